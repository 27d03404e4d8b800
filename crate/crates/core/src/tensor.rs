//! Scatter-style tensor operations whose results depend on accumulation order.
//!
//! Each operation runs in one of three modes. `DeterministicSerial` commits
//! contributions in ascending source order; `NondetReplay` commits them in a
//! seeded permutation; `NondetLive` lets the executor race on atomic cells.
//!
//! The reduction ratio `R` measures how much an operation reduces its input:
//! an input extent `n` maps to `max(1, round((1 - R) n))` output slots, so
//! `R = 0.5` halves the extent and `R = 1` collapses everything into a single
//! slot, i.e. a plain sum.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::atomic::{atomic_f64_add, AtomicF64};
use crate::datagen::{gen_indices, gen_uniform, permutation, RngSpec, WordRng};
use crate::exec::Executor;
use crate::metrics::{v_c, v_ermv, ArrayPair};
use crate::reduction::Engine;
use crate::{Error, Result};

/// A dense row-major tensor of rank 1 or 2.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.len() > 2 {
            return Err(Error::InvalidArgument(alloc::format!(
                "tensor rank must be 1 or 2, got {}",
                dims.len()
            )));
        }
        let expected = dims.iter().product();
        if data.len() != expected {
            return Err(Error::LengthMismatch { expected, actual: data.len() });
        }
        Ok(Tensor { dims, data })
    }

    pub fn vector(data: Vec<f64>) -> Self {
        Tensor { dims: vec![data.len()], data }
    }

    pub fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Self::new(vec![rows, cols], data)
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        Self::new(dims.to_vec(), vec![0.0; dims.iter().product()])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn rows(&self) -> usize {
        self.dims[0]
    }

    /// Columns of a matrix; 1 for a vector.
    pub fn cols(&self) -> usize {
        self.dims.get(1).copied().unwrap_or(1)
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let c = self.cols();
        &self.data[r * c..(r + 1) * c]
    }

    /// Little-endian bytes of the row-major data; the identity used for
    /// counting distinct outputs.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        self.data.iter().flat_map(|v| v.to_le_bytes()).collect()
    }

    /// `self (r x k) * rhs (k x c)` with each dot product folded in `k` order.
    pub fn matmul(&self, rhs: &Tensor) -> Result<Tensor> {
        let (r, k) = (self.rows(), self.cols());
        if self.rank() != 2 || rhs.rank() != 2 || rhs.rows() != k {
            return Err(Error::ShapeMismatch {
                left: self.dims.clone(),
                right: rhs.dims.clone(),
            });
        }
        let c = rhs.cols();
        let mut out = vec![0.0; r * c];
        for i in 0..r {
            for j in 0..c {
                let mut acc = 0.0;
                for t in 0..k {
                    acc += self.data[i * k + t] * rhs.data[t * c + j];
                }
                out[i * c + j] = acc;
            }
        }
        Tensor::matrix(r, c, out)
    }
}

/// Target positions for scatter operations.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IndexArray {
    indices: Vec<usize>,
    target_extent: usize,
}

impl IndexArray {
    pub fn new(indices: Vec<usize>, target_extent: usize) -> Result<Self> {
        if let Some((position, &index)) =
            indices.iter().enumerate().find(|(_, &i)| i >= target_extent)
        {
            return Err(Error::IndexOutOfRange {
                position,
                index,
                extent: target_extent,
            });
        }
        Ok(IndexArray { indices, target_extent })
    }

    /// Indices drawn uniformly from `[0, target_extent)`.
    pub fn random(rng: RngSpec, len: usize, target_extent: usize) -> Result<Self> {
        if target_extent == 0 && len > 0 {
            return Err(Error::InvalidArgument("target extent must be positive".into()));
        }
        Self::new(gen_indices(rng, len, target_extent), target_extent)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn target_extent(&self) -> usize {
        self.target_extent
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ScatterKind {
    Sum,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ExecMode {
    #[default]
    DeterministicSerial,
    NondetReplay { seed: u64 },
    NondetLive,
}

impl ExecMode {
    pub fn is_deterministic(&self) -> bool {
        matches!(self, ExecMode::DeterministicSerial)
    }
}

/// Output extent for an input extent `n` at reduction ratio `r`.
pub fn output_extent_for_ratio(n: usize, r: f64) -> Result<usize> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "reduction ratio must lie in (0, 1], got {r}"
        )));
    }
    let out = libm::round((1.0 - r) * n as f64) as usize;
    Ok(out.clamp(1, n.max(1)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TensorOp {
    ScatterReduceSum,
    ScatterReduceMean,
    IndexAdd,
}

/// One scatter/index-add experiment instance.
///
/// `input_dims` is `[n]` for scatter-reduce and `[n, cols]` for index-add;
/// `n` is the extent along the reduction axis. Input values are drawn
/// uniformly from `[1, 10)` with `data`, indices with `data.seed + 1`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TensorOpSpec {
    pub op: TensorOp,
    pub input_dims: Vec<usize>,
    pub output_extent: usize,
    pub reduction_ratio: f64,
    pub exec: ExecMode,
    pub data: RngSpec,
}

impl TensorOpSpec {
    pub fn with_ratio(
        op: TensorOp,
        input_dims: Vec<usize>,
        reduction_ratio: f64,
        exec: ExecMode,
        data: RngSpec,
    ) -> Result<Self> {
        let n = *input_dims
            .first()
            .ok_or_else(|| Error::InvalidArgument("input dims must not be empty".into()))?;
        let output_extent = output_extent_for_ratio(n, reduction_ratio)?;
        let spec = TensorOpSpec {
            op,
            input_dims,
            output_extent,
            reduction_ratio,
            exec,
            data,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let rank_ok = match self.op {
            TensorOp::ScatterReduceSum | TensorOp::ScatterReduceMean => self.input_dims.len() == 1,
            TensorOp::IndexAdd => self.input_dims.len() == 2,
        };
        if !rank_ok {
            return Err(Error::InvalidArgument("input rank does not match the operation".into()));
        }
        let expected = output_extent_for_ratio(self.input_dims[0], self.reduction_ratio)?;
        if expected != self.output_extent {
            return Err(Error::InvalidArgument(alloc::format!(
                "output extent {} inconsistent with ratio {} (expected {expected})",
                self.output_extent,
                self.reduction_ratio
            )));
        }
        Ok(())
    }

    /// Generates `(input, indices)` for this instance.
    pub fn instance(&self) -> Result<(Tensor, IndexArray)> {
        let n: usize = self.input_dims.iter().product();
        let values = gen_uniform(self.data, n, 1.0, 10.0)?.into_values();
        let input = Tensor::new(self.input_dims.clone(), values)?;
        let idx = IndexArray::random(
            self.data.with_seed(self.data.seed.wrapping_add(1)),
            self.input_dims[0],
            self.output_extent,
        )?;
        Ok((input, idx))
    }
}

/// A directed graph with node features; edge `(src, dst)` sends `src`'s
/// features to `dst`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
    features: Tensor,
}

impl Graph {
    pub fn new(num_nodes: usize, edges: Vec<(usize, usize)>, features: Tensor) -> Result<Self> {
        if features.rank() != 2 || features.rows() != num_nodes {
            return Err(Error::ShapeMismatch {
                left: vec![num_nodes],
                right: features.dims().to_vec(),
            });
        }
        if let Some((position, &(s, d))) = edges
            .iter()
            .enumerate()
            .find(|(_, &(s, d))| s >= num_nodes || d >= num_nodes)
        {
            return Err(Error::IndexOutOfRange {
                position,
                index: s.max(d),
                extent: num_nodes,
            });
        }
        Ok(Graph { num_nodes, edges, features })
    }

    /// `num_edges` edges with uniformly drawn endpoints and `U(-1, 1)`
    /// features of width `feature_width`.
    pub fn random(num_nodes: usize, num_edges: usize, feature_width: usize, rng: RngSpec) -> Result<Self> {
        if num_nodes == 0 {
            return Err(Error::InvalidArgument("graph needs at least one node".into()));
        }
        let mut g = rng.build();
        let edges = (0..num_edges)
            .map(|_| {
                let s = g.next_below(num_nodes as u64) as usize;
                let d = g.next_below(num_nodes as u64) as usize;
                (s, d)
            })
            .collect();
        let feats = gen_uniform(
            rng.with_seed(rng.seed.wrapping_add(1)),
            num_nodes * feature_width,
            -1.0,
            1.0,
        )?;
        Self::new(num_nodes, edges, Tensor::matrix(num_nodes, feature_width, feats.into_values())?)
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn features(&self) -> &Tensor {
        &self.features
    }

    pub fn with_features(&self, features: Tensor) -> Result<Graph> {
        Graph::new(self.num_nodes, self.edges.clone(), features)
    }
}

/// Distinct-output statistics over repeated executions of one op.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OpVariability {
    pub runs: usize,
    pub unique_outputs: usize,
    /// Mean `V_c` of each run against the deterministic reference.
    pub mean_vc: f64,
    /// Mean `V_ermv` of each run against the deterministic reference.
    pub mean_vermv: f64,
}

fn commit_order(units: usize, exec: ExecMode) -> Vec<usize> {
    match exec {
        ExecMode::NondetReplay { seed } => permutation(units, seed),
        _ => (0..units).collect(),
    }
}

impl<E: Executor> Engine<E> {
    /// `Y[k] = reduce { X[j] : I[j] = k }` over an `out_extent`-long output.
    pub fn scatter_reduce(
        &self,
        x: &Tensor,
        idx: &IndexArray,
        out_extent: usize,
        kind: ScatterKind,
        exec: ExecMode,
    ) -> Result<Tensor> {
        if x.rank() != 1 {
            return Err(Error::InvalidArgument("scatter_reduce expects a rank-1 input".into()));
        }
        if idx.len() != x.rows() {
            return Err(Error::LengthMismatch { expected: x.rows(), actual: idx.len() });
        }
        if idx.target_extent() > out_extent {
            if let Some((position, &index)) =
                idx.indices().iter().enumerate().find(|(_, &i)| i >= out_extent)
            {
                return Err(Error::IndexOutOfRange { position, index, extent: out_extent });
            }
        }
        let xs = x.data();
        let ix = idx.indices();
        let mut counts = vec![0usize; out_extent];
        for &k in ix {
            counts[k] += 1;
        }
        // Buckets start at -0.0, the exact additive identity, so a one-slot
        // output equals the serial fold of the input bit for bit.
        let mut sums = match exec {
            ExecMode::NondetLive => {
                let cells: Vec<AtomicF64> = (0..out_extent).map(|_| AtomicF64::new(-0.0)).collect();
                self.executor()
                    .for_each(xs.len(), &|j| atomic_f64_add(&cells[ix[j]], xs[j]));
                cells.into_iter().map(AtomicF64::into_inner).collect()
            }
            _ => {
                let mut sums = vec![-0.0f64; out_extent];
                for j in commit_order(xs.len(), exec) {
                    sums[ix[j]] += xs[j];
                }
                sums
            }
        };
        for (s, &c) in sums.iter_mut().zip(&counts) {
            if c == 0 {
                *s = 0.0;
            } else if kind == ScatterKind::Mean {
                *s /= c as f64;
            }
        }
        Ok(Tensor::vector(sums))
    }

    /// `Y[I[k], j] += X[k, j]`; each element is its own commit unit.
    pub fn index_add(&self, y: &Tensor, x: &Tensor, idx: &IndexArray, exec: ExecMode) -> Result<Tensor> {
        if y.rank() != 2 || x.rank() != 2 || y.cols() != x.cols() {
            return Err(Error::ShapeMismatch {
                left: y.dims().to_vec(),
                right: x.dims().to_vec(),
            });
        }
        if idx.len() != x.rows() {
            return Err(Error::LengthMismatch { expected: x.rows(), actual: idx.len() });
        }
        if let Some((position, &index)) = idx.indices().iter().enumerate().find(|(_, &i)| i >= y.rows()) {
            return Err(Error::IndexOutOfRange { position, index, extent: y.rows() });
        }
        let cols = x.cols();
        let xs = x.data();
        let ix = idx.indices();
        let units = xs.len();
        let data = match exec {
            ExecMode::NondetLive => {
                let cells: Vec<AtomicF64> = y.data().iter().map(|&v| AtomicF64::new(v)).collect();
                self.executor().for_each(units, &|u| {
                    let (k, j) = (u / cols, u % cols);
                    atomic_f64_add(&cells[ix[k] * cols + j], xs[u]);
                });
                cells.into_iter().map(AtomicF64::into_inner).collect()
            }
            _ => {
                let mut data = y.data().to_vec();
                for u in commit_order(units, exec) {
                    let (k, j) = (u / cols, u % cols);
                    data[ix[k] * cols + j] += xs[u];
                }
                data
            }
        };
        Tensor::new(y.dims().to_vec(), data)
    }

    /// One GraphSAGE layer with mean aggregation and row L2 normalisation:
    /// `normalize(mean_{u -> v} h_u * W_agg + h_v * W_self)`.
    ///
    /// Neighbour sums and counts are accumulated with [`Engine::index_add`]
    /// over edges sorted by destination; that is the only order-dependent step.
    pub fn sage_forward(&self, g: &Graph, w_self: &Tensor, w_agg: &Tensor, exec: ExecMode) -> Result<Tensor> {
        let x = g.features();
        let f = x.cols();
        for w in [w_self, w_agg] {
            if w.rank() != 2 || w.rows() != f {
                return Err(Error::ShapeMismatch {
                    left: x.dims().to_vec(),
                    right: w.dims().to_vec(),
                });
            }
        }
        if w_self.cols() != w_agg.cols() {
            return Err(Error::ShapeMismatch {
                left: w_self.dims().to_vec(),
                right: w_agg.dims().to_vec(),
            });
        }
        let n = g.num_nodes();
        let mut edges = g.edges().to_vec();
        edges.sort_by_key(|&(_, d)| d);
        let gathered: Vec<f64> = edges.iter().flat_map(|&(s, _)| x.row(s).iter().copied()).collect();
        let source = Tensor::matrix(edges.len(), f, gathered)?;
        let ones = Tensor::matrix(edges.len(), f, vec![1.0; edges.len() * f])?;
        let index = IndexArray::new(edges.iter().map(|&(_, d)| d).collect(), n)?;
        let zeros = Tensor::zeros(&[n, f])?;
        let summed = self.index_add(&zeros, &source, &index, exec)?;
        let counts = self.index_add(&zeros, &ones, &index, exec)?;
        let mean: Vec<f64> = summed
            .data()
            .iter()
            .zip(counts.data())
            .map(|(s, c)| s / c.max(1.0))
            .collect();
        let agg = Tensor::matrix(n, f, mean)?.matmul(w_agg)?;
        let own = x.matmul(w_self)?;
        let out_w = agg.cols();
        let mut h: Vec<f64> = agg.data().iter().zip(own.data()).map(|(a, b)| a + b).collect();
        for row in h.chunks_mut(out_w) {
            let norm = libm::sqrt(row.iter().fold(0.0, |acc, v| acc + v * v)).max(1e-12);
            for v in row.iter_mut() {
                *v /= norm;
            }
        }
        Tensor::matrix(n, out_w, h)
    }

    /// Executes the op described by `spec` with explicit data.
    pub fn run_op(&self, spec: &TensorOpSpec, input: &Tensor, idx: &IndexArray, exec: ExecMode) -> Result<Tensor> {
        match spec.op {
            TensorOp::ScatterReduceSum => self.scatter_reduce(input, idx, spec.output_extent, ScatterKind::Sum, exec),
            TensorOp::ScatterReduceMean => self.scatter_reduce(input, idx, spec.output_extent, ScatterKind::Mean, exec),
            TensorOp::IndexAdd => {
                let y = Tensor::zeros(&[spec.output_extent, input.cols()])?;
                self.index_add(&y, input, idx, exec)
            }
        }
    }

    /// Runs `spec` `runs` times and counts bitwise-distinct outputs.
    ///
    /// Under `NondetReplay { seed }` run `r` uses seed `seed + r`.
    pub fn unique_output_count(&self, spec: &TensorOpSpec, runs: usize) -> Result<OpVariability> {
        if runs < 2 {
            return Err(Error::InvalidArgument("at least two runs are required".into()));
        }
        spec.validate()?;
        let (input, idx) = spec.instance()?;
        let reference = self.run_op(spec, &input, &idx, ExecMode::DeterministicSerial)?;
        let mut distinct = BTreeSet::new();
        let mut vc_total = 0.0;
        let mut vermv_total = 0.0;
        for r in 0..runs {
            let exec = match spec.exec {
                ExecMode::NondetReplay { seed } => ExecMode::NondetReplay {
                    seed: seed.wrapping_add(r as u64),
                },
                other => other,
            };
            let out = self.run_op(spec, &input, &idx, exec)?;
            let pair = ArrayPair::from_tensors(&reference, &out)?;
            vc_total += v_c(&pair);
            vermv_total += v_ermv(&pair).value;
            distinct.insert(out.canonical_bytes());
        }
        Ok(OpVariability {
            runs,
            unique_outputs: distinct.len(),
            mean_vc: vc_total / runs as f64,
            mean_vermv: vermv_total / runs as f64,
        })
    }
}
