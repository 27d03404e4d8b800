//! Summation variants, from serial folds to emulated GPU block reductions.
//!
//! The blocked variants follow the CUDA execution model re-expressed on a CPU
//! worker pool. A grid has `n_b` blocks of `n_t` virtual threads; thread
//! `gid = block * n_t + lane` first folds `x[gid], x[gid + stride], ...`
//! serially (`stride = n_t * n_b`), lanes past the end of the data hold `0.0`,
//! and each block then combines its lanes with the halving tree
//! `smem[i] += smem[i + offset]` for `offset = n_t/2, n_t/4, ..., 1`.
//! Blocks are independent, so partials are bitwise identical whatever the
//! number of workers. Only the final stage differs between variants.
//!
//! Nondeterministic variants (SPSA, AO) run either on live atomics or on a
//! seeded replay: a Fisher–Yates permutation of the commit units (block
//! partials for SPSA, elements for AO) followed by a serial fold in that order.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::atomic::{atomic_f64_add, AtomicF64};
use crate::datagen::permutation;
use crate::exec::{map_indexed, Executor, Serial};
use crate::{Error, Result, UNIT_ROUNDOFF};

const STACK_LANES: usize = 1024;

/// Threads per block and block count of an emulated kernel launch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "GeometryFields"))]
pub struct KernelGeometry {
    n_t: usize,
    n_b: usize,
}

#[cfg(feature = "serde")]
#[derive(serde::Deserialize)]
struct GeometryFields {
    n_t: usize,
    n_b: usize,
}

#[cfg(feature = "serde")]
impl TryFrom<GeometryFields> for KernelGeometry {
    type Error = Error;

    fn try_from(f: GeometryFields) -> Result<Self> {
        KernelGeometry::new(f.n_t, f.n_b)
    }
}

impl KernelGeometry {
    pub fn new(n_t: usize, n_b: usize) -> Result<Self> {
        if n_t == 0 || !n_t.is_power_of_two() {
            return Err(Error::InvalidThreadsPerBlock(n_t));
        }
        if n_b == 0 {
            return Err(Error::InvalidBlockCount);
        }
        Ok(KernelGeometry { n_t, n_b })
    }

    /// `n_t` threads per block and just enough blocks to cover `n` elements.
    pub fn covering(n_t: usize, n: usize) -> Result<Self> {
        Self::new(n_t, n.div_ceil(n_t.max(1)).max(1))
    }

    pub fn threads_per_block(&self) -> usize {
        self.n_t
    }

    pub fn blocks(&self) -> usize {
        self.n_b
    }

    pub fn total_threads(&self) -> usize {
        self.n_t * self.n_b
    }
}

impl fmt::Display for KernelGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.n_t, self.n_b)
    }
}

/// Summation algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Variant {
    /// Left-to-right fold in storage order.
    RecursiveSerial,
    /// Stride-halving pairwise tree over the zero-padded array.
    PairwiseSerial,
    /// Compensated summation.
    KahanSerial,
    /// Parallel chunk sums combined in chunk order.
    OrderedChunk,
    /// Two pass: block tree, then a serial fold of the partials on the host.
    Tprc,
    /// Single pass: the last block to retire tree-reduces the partials.
    Sps,
    /// Single pass: the last block to retire folds the partials serially.
    Spsrc,
    /// Block tree, partials committed with atomic adds.
    Spsa,
    /// Every element committed with an atomic add.
    Ao,
}

impl Variant {
    pub const ALL: [Variant; 9] = [
        Variant::RecursiveSerial,
        Variant::PairwiseSerial,
        Variant::KahanSerial,
        Variant::OrderedChunk,
        Variant::Tprc,
        Variant::Sps,
        Variant::Spsrc,
        Variant::Spsa,
        Variant::Ao,
    ];

    pub const DETERMINISTIC: [Variant; 7] = [
        Variant::RecursiveSerial,
        Variant::PairwiseSerial,
        Variant::KahanSerial,
        Variant::OrderedChunk,
        Variant::Tprc,
        Variant::Sps,
        Variant::Spsrc,
    ];

    pub fn is_deterministic(self) -> bool {
        !matches!(self, Variant::Spsa | Variant::Ao)
    }

    /// Whether the variant produces block partials.
    pub fn is_blocked(self) -> bool {
        matches!(self, Variant::Tprc | Variant::Sps | Variant::Spsrc | Variant::Spsa)
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::RecursiveSerial => "recursive_serial",
            Variant::PairwiseSerial => "pairwise_serial",
            Variant::KahanSerial => "kahan_serial",
            Variant::OrderedChunk => "ordered_chunk",
            Variant::Tprc => "tprc",
            Variant::Sps => "sps",
            Variant::Spsrc => "spsrc",
            Variant::Spsa => "spsa",
            Variant::Ao => "ao",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase().replace('-', "_");
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == lower)
            .ok_or_else(|| Error::InvalidArgument(alloc::format!("unknown variant `{s}`")))
    }
}

/// Where the nondeterministic commit order comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Backend {
    /// Genuine concurrent compare-and-swap accumulation on the executor.
    LiveAtomic,
    /// Commit order drawn from a permutation seeded by the plan.
    #[default]
    SeededReplay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReductionPlan {
    pub variant: Variant,
    pub geometry: KernelGeometry,
    #[cfg_attr(feature = "serde", serde(default))]
    pub backend: Backend,
    #[cfg_attr(feature = "serde", serde(default))]
    pub schedule_seed: u64,
}

impl ReductionPlan {
    pub fn new(variant: Variant, geometry: KernelGeometry) -> Self {
        ReductionPlan {
            variant,
            geometry,
            backend: Backend::SeededReplay,
            schedule_seed: 0,
        }
    }

    pub fn replay(variant: Variant, geometry: KernelGeometry, schedule_seed: u64) -> Self {
        ReductionPlan {
            variant,
            geometry,
            backend: Backend::SeededReplay,
            schedule_seed,
        }
    }

    pub fn live(variant: Variant, geometry: KernelGeometry) -> Self {
        ReductionPlan {
            variant,
            geometry,
            backend: Backend::LiveAtomic,
            schedule_seed: 0,
        }
    }

    pub fn label(&self) -> String {
        alloc::format!("{}@{}", self.variant, self.geometry)
    }
}

/// Outcome of one reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct SumResult {
    pub value: f64,
    pub variant: Variant,
    /// Block (or chunk) partials in index order, for variants that have them.
    pub block_partials: Option<Vec<f64>>,
    /// Order in which commit units were accumulated; replay backend only.
    pub commit_order: Option<Vec<usize>>,
}

impl SumResult {
    /// Re-applies the final stage of `plan` to the recorded partials.
    ///
    /// Returns `None` when there is nothing to recombine (serial variants,
    /// AO, or SPSA without a recorded commit order).
    pub fn recombine(&self, plan: &ReductionPlan) -> Option<f64> {
        let partials = self.block_partials.as_deref()?;
        match plan.variant {
            Variant::Tprc | Variant::Spsrc | Variant::OrderedChunk => Some(recursive_sum(partials)),
            Variant::Sps => Some(tree_reduce(partials, plan.geometry.threads_per_block())),
            Variant::Spsa => self
                .commit_order
                .as_deref()
                .map(|order| ordered_sum(partials, order)),
            _ => None,
        }
    }
}

/// Left-to-right fold; `+0.0` for an empty slice.
pub fn recursive_sum(x: &[f64]) -> f64 {
    match x.split_first() {
        None => 0.0,
        Some((&first, rest)) => rest.iter().fold(first, |acc, &v| acc + v),
    }
}

/// Serial fold of `units` taken in `order`.
pub fn ordered_sum(units: &[f64], order: &[usize]) -> f64 {
    match order.split_first() {
        None => 0.0,
        Some((&first, rest)) => rest.iter().fold(units[first], |acc, &i| acc + units[i]),
    }
}

/// Folds `units` along a seeded Fisher–Yates permutation; returns the sum and
/// the commit order used.
pub fn replay_sum(units: &[f64], schedule_seed: u64) -> (f64, Vec<usize>) {
    let order = permutation(units.len(), schedule_seed);
    (ordered_sum(units, &order), order)
}

/// Pairwise sum with pairs `t_i = x_i + x_{i + m/2}` over the array
/// zero-padded to the next power of two `m`.
pub fn pairwise_sum(x: &[f64]) -> f64 {
    match x.len() {
        0 => 0.0,
        1 => x[0],
        n => {
            let mut buf = x.to_vec();
            buf.resize(n.next_power_of_two(), 0.0);
            halving_tree(&mut buf)
        }
    }
}

/// Kahan compensated summation.
pub fn kahan_sum(x: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for &v in x {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

/// `N * u * sum |x_i|`, an a-priori ceiling on the difference between two
/// serial orderings of `x`.
pub fn error_bound(x: &[f64]) -> f64 {
    let abs_sum = x.iter().fold(0.0, |acc, v| acc + v.abs());
    x.len() as f64 * UNIT_ROUNDOFF * abs_sum
}

fn halving_tree(smem: &mut [f64]) -> f64 {
    debug_assert!(smem.len().is_power_of_two());
    let mut offset = smem.len() / 2;
    while offset > 0 {
        for i in 0..offset {
            smem[i] += smem[i + offset];
        }
        offset /= 2;
    }
    smem[0]
}

/// Partial of one block of the grid described by `g`.
pub fn block_partial(x: &[f64], g: KernelGeometry, block: usize) -> f64 {
    let n_t = g.threads_per_block();
    let stride = g.total_threads();
    let base = block * n_t;
    let fill = |smem: &mut [f64]| {
        if stride >= x.len() {
            // One element per lane at most.
            let start = base.min(x.len());
            let end = (base + n_t).min(x.len());
            smem[..end - start].copy_from_slice(&x[start..end]);
            smem[end - start..].fill(0.0);
            return;
        }
        for (lane, slot) in smem.iter_mut().enumerate() {
            let gid = base + lane;
            *slot = if gid < x.len() {
                x.get(gid + stride..)
                    .unwrap_or(&[])
                    .iter()
                    .step_by(stride)
                    .fold(x[gid], |acc, &v| acc + v)
            } else {
                0.0
            };
        }
    };
    if n_t <= 64 {
        let mut smem = [0.0f64; 64];
        fill(&mut smem[..n_t]);
        halving_tree(&mut smem[..n_t])
    } else if n_t <= STACK_LANES {
        let mut smem = [0.0f64; STACK_LANES];
        fill(&mut smem[..n_t]);
        halving_tree(&mut smem[..n_t])
    } else {
        let mut smem = vec![0.0f64; n_t];
        fill(&mut smem);
        halving_tree(&mut smem)
    }
}

/// The `n_b` block partials of `x` under `g`, computed serially.
pub fn block_reduce(x: &[f64], g: KernelGeometry) -> Vec<f64> {
    Engine::new(Serial).block_reduce(x, g)
}

/// A single `n_t`-lane block reducing all of `partials` (grid-stride when
/// there are more partials than lanes). This is the SPS final stage.
pub fn tree_reduce(partials: &[f64], n_t: usize) -> f64 {
    let g = KernelGeometry::new(n_t, 1).expect("threads per block already validated");
    block_partial(partials, g, 0)
}

/// Runs reductions on an executor.
#[derive(Debug, Clone, Default)]
pub struct Engine<E> {
    exec: E,
}

impl<E: Executor> Engine<E> {
    pub fn new(exec: E) -> Self {
        Engine { exec }
    }

    pub fn executor(&self) -> &E {
        &self.exec
    }

    /// Block partials computed on the executor; identical to
    /// [`block_reduce`] for every worker count.
    pub fn block_reduce(&self, x: &[f64], g: KernelGeometry) -> Vec<f64> {
        map_indexed(&self.exec, g.blocks(), |b| block_partial(x, g, b))
    }

    pub fn reduce(&self, x: &[f64], plan: &ReductionPlan) -> Result<SumResult> {
        let g = KernelGeometry::new(plan.geometry.n_t, plan.geometry.n_b)?;
        let variant = plan.variant;
        let done = |value, block_partials, commit_order| SumResult {
            value,
            variant,
            block_partials,
            commit_order,
        };
        Ok(match variant {
            Variant::RecursiveSerial => done(recursive_sum(x), None, None),
            Variant::PairwiseSerial => done(pairwise_sum(x), None, None),
            Variant::KahanSerial => done(kahan_sum(x), None, None),
            Variant::OrderedChunk => {
                let chunk = x.len().div_ceil(g.threads_per_block()).max(1);
                let chunks = x.len().div_ceil(chunk);
                let partials = map_indexed(&self.exec, chunks, |c| {
                    recursive_sum(&x[c * chunk..((c + 1) * chunk).min(x.len())])
                });
                done(recursive_sum(&partials), Some(partials), None)
            }
            Variant::Tprc | Variant::Spsrc => {
                let partials = self.block_reduce(x, g);
                done(recursive_sum(&partials), Some(partials), None)
            }
            Variant::Sps => {
                let partials = self.block_reduce(x, g);
                done(tree_reduce(&partials, g.threads_per_block()), Some(partials), None)
            }
            Variant::Spsa => match plan.backend {
                Backend::SeededReplay => {
                    let partials = self.block_reduce(x, g);
                    let (value, order) = replay_sum(&partials, plan.schedule_seed);
                    done(value, Some(partials), Some(order))
                }
                Backend::LiveAtomic => {
                    let cell = AtomicF64::new(-0.0);
                    let partials = map_indexed(&self.exec, g.blocks(), |b| {
                        let p = block_partial(x, g, b);
                        atomic_f64_add(&cell, p);
                        p
                    });
                    done(cell.into_inner(), Some(partials), None)
                }
            },
            Variant::Ao => match plan.backend {
                Backend::SeededReplay => {
                    let (value, order) = replay_sum(x, plan.schedule_seed);
                    done(value, None, Some(order))
                }
                Backend::LiveAtomic => {
                    let cell = AtomicF64::new(-0.0);
                    self.exec.for_each(x.len(), &|i| atomic_f64_add(&cell, x[i]));
                    let v = cell.into_inner();
                    done(if x.is_empty() { 0.0 } else { v }, None, None)
                }
            },
        })
    }
}
