//! Inference variability of a small GraphSAGE network whose only
//! order-dependent step is index-add aggregation.

use std::collections::BTreeMap;

use fpna_core::datagen::gen_uniform;
use fpna_core::metrics::{v_c, v_ermv, ArrayPair};
use fpna_core::tensor::{ExecMode, Graph, Tensor};
use fpna_core::{Engine, Executor, RngAlgorithm, RngSpec};
use serde::{Deserialize, Serialize};

use super::{derive_seed, echo, STREAM_GRAPH, STREAM_SCHEDULE, STREAM_WEIGHTS};
use crate::error::{HarnessError, Result};
use crate::report::{ExperimentKind, Report, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GnnParams {
    pub nodes: usize,
    pub edges: usize,
    pub features: usize,
    pub hidden: usize,
    pub layers: usize,
    pub runs: usize,
    pub rng: RngAlgorithm,
    pub seed: u64,
}

impl Default for GnnParams {
    fn default() -> Self {
        GnnParams {
            nodes: 200,
            edges: 1000,
            features: 16,
            hidden: 16,
            layers: 2,
            runs: 100,
            rng: RngAlgorithm::Mt19937_64,
            seed: 2024,
        }
    }
}

/// Weights of one layer: `(w_self, w_agg)`.
pub type Layer = (Tensor, Tensor);

/// Glorot-style uniform weights, `U(-1/sqrt(in), 1/sqrt(in))`.
pub fn init_layers(p: &GnnParams) -> Result<Vec<Layer>> {
    let mut layers = Vec::with_capacity(p.layers);
    let mut width = p.features;
    for l in 0..p.layers {
        let scale = 1.0 / (width as f64).sqrt();
        let w = |k: u64| -> Result<Tensor> {
            let seed = derive_seed(p.seed, STREAM_WEIGHTS, 2 * l as u64 + k);
            let v = gen_uniform(RngSpec { algorithm: p.rng, seed }, width * p.hidden, -scale, scale)?;
            Ok(Tensor::matrix(width, p.hidden, v.into_values())?)
        };
        layers.push((w(0)?, w(1)?));
        width = p.hidden;
    }
    Ok(layers)
}

/// Runs every layer; `exec_for(layer)` picks each layer's index-add mode.
pub fn forward<E: Executor>(
    engine: &Engine<E>,
    g: &Graph,
    layers: &[Layer],
    exec_for: impl Fn(usize) -> ExecMode,
) -> Result<Tensor> {
    let mut h = g.features().clone();
    for (l, (w_self, w_agg)) in layers.iter().enumerate() {
        h = engine.sage_forward(&g.with_features(h)?, w_self, w_agg, exec_for(l))?;
    }
    Ok(h)
}

fn pairs_differing(outputs: &[Vec<u8>]) -> (usize, usize) {
    let mut groups: BTreeMap<&[u8], usize> = BTreeMap::new();
    for o in outputs {
        *groups.entry(o).or_default() += 1;
    }
    let k = outputs.len();
    let total = k * k.saturating_sub(1) / 2;
    let equal: usize = groups.values().map(|&c| c * (c - 1) / 2).sum();
    (total - equal, total)
}

pub fn run_gnn<E: Executor>(p: &GnnParams, engine: &Engine<E>) -> Result<Report> {
    if p.runs < 2 || p.layers == 0 {
        return Err(HarnessError::usage("gnn demo needs at least two runs and one layer"));
    }
    let mut report = Report::new(ExperimentKind::GnnDemo, echo(p));
    let graph = Graph::random(
        p.nodes,
        p.edges,
        p.features,
        RngSpec { algorithm: p.rng, seed: derive_seed(p.seed, STREAM_GRAPH, 0) },
    )?;
    let layers = init_layers(p)?;
    let reference = forward(engine, &graph, &layers, |_| ExecMode::DeterministicSerial)?;
    let mut runs = Table::new("runs", &["reference", "mode", "run", "schedule_seed", "v_ermv", "v_c"]);
    let mut combos = Table::new(
        "combinations",
        &["reference", "mode", "runs", "mean_v_ermv", "mean_v_c", "unique_outputs", "differing_pairs", "pairs"],
    );
    let mut deterministic_vc_max = 0.0f64;
    for mode in ["D", "ND"] {
        let mut outputs = Vec::with_capacity(p.runs);
        let (mut ermv_sum, mut vc_sum) = (0.0, 0.0);
        for r in 0..p.runs {
            let base = derive_seed(p.seed, STREAM_SCHEDULE, r as u64);
            let out = if mode == "D" {
                forward(engine, &graph, &layers, |_| ExecMode::DeterministicSerial)?
            } else {
                forward(engine, &graph, &layers, |l| ExecMode::NondetReplay {
                    seed: base.wrapping_add(l as u64),
                })?
            };
            let pair = ArrayPair::from_tensors(&reference, &out)?;
            let (e, c) = (v_ermv(&pair).value, v_c(&pair));
            if mode == "D" {
                deterministic_vc_max = deterministic_vc_max.max(c);
            }
            ermv_sum += e;
            vc_sum += c;
            let seed_cell = if mode == "D" { "none".into() } else { base.into() };
            runs.push(vec!["D".into(), mode.into(), r.into(), seed_cell, e.into(), c.into()]);
            outputs.push(out.canonical_bytes());
        }
        let (differing, total) = pairs_differing(&outputs);
        let mut distinct = outputs.clone();
        distinct.sort();
        distinct.dedup();
        let n = p.runs as f64;
        combos.push(vec![
            "D".into(),
            mode.into(),
            p.runs.into(),
            (ermv_sum / n).into(),
            (vc_sum / n).into(),
            distinct.len().into(),
            differing.into(),
            total.into(),
        ]);
        report.set(
            &format!("differing_pair_fraction_{}", mode.to_lowercase()),
            differing as f64 / total as f64,
        );
    }
    report.check(
        "deterministic_forward_v_c_zero",
        deterministic_vc_max == 0.0,
        format!("largest deterministic v_c {deterministic_vc_max}"),
    );
    report.tables.extend([combos, runs]);
    Ok(report)
}
