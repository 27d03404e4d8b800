//! Run-to-run and pool-size determinism of the reduction variants.

use std::collections::BTreeSet;

use fpna_core::{Engine, Executor, KernelGeometry, ReductionPlan, RngAlgorithm, Serial, Variant};
use serde::{Deserialize, Serialize};

use super::{derive_seed, echo, DataSpec, STREAM_DATA};
use crate::error::{HarnessError, Result};
use crate::pool::Pool;
use crate::report::{ExperimentKind, Report, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeterminismParams {
    pub arrays: usize,
    pub n: usize,
    pub runs: usize,
    /// Worker-pool sizes every run is repeated on.
    pub threads: Vec<usize>,
    pub variants: Vec<Variant>,
    pub geometries: Vec<KernelGeometry>,
    pub data: DataSpec,
    pub rng: RngAlgorithm,
    pub seed: u64,
    /// Live-atomic runs of the nondeterministic variants, reported only.
    pub live: LiveParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LiveParams {
    pub n: usize,
    pub runs: usize,
    pub variants: Vec<Variant>,
    pub geometry: KernelGeometry,
}

impl Default for LiveParams {
    fn default() -> Self {
        LiveParams {
            n: 1_000_000,
            runs: 10,
            variants: vec![Variant::Spsa, Variant::Ao],
            geometry: KernelGeometry::new(256, 64).expect("valid"),
        }
    }
}

impl Default for DeterminismParams {
    fn default() -> Self {
        DeterminismParams {
            arrays: 100,
            n: 10_000,
            runs: 100,
            threads: vec![1, 2, 8],
            variants: Variant::DETERMINISTIC.to_vec(),
            geometries: vec![KernelGeometry::new(64, 32).expect("valid")],
            data: DataSpec::UNIFORM_1_10,
            rng: RngAlgorithm::Mt19937_64,
            seed: 2024,
            live: LiveParams::default(),
        }
    }
}

pub fn run_determinism(p: &DeterminismParams) -> Result<Report> {
    if let Some(v) = p.variants.iter().find(|v| !v.is_deterministic()) {
        return Err(HarnessError::usage(format!(
            "{v} is nondeterministic; list it under live.variants"
        )));
    }
    let pools = p.threads.iter().map(|&k| Pool::new(k)).collect::<Result<Vec<_>>>()?;
    let mut report = Report::new(ExperimentKind::DeterminismCheck, echo(p));
    let mut det = Table::new(
        "deterministic",
        &["array", "data_seed", "variant", "geometry", "evaluations", "unique_values", "value"],
    );
    let mut failures = 0usize;
    let mut single_block_mismatches = 0usize;
    for a in 0..p.arrays {
        let data_seed = derive_seed(p.seed, STREAM_DATA, a as u64);
        let x = p.data.generate(p.rng, p.n, data_seed)?;
        for &g in &p.geometries {
            for &v in &p.variants {
                let plan = ReductionPlan::new(v, g);
                let mut seen = BTreeSet::new();
                let mut first = None;
                for pool in &pools {
                    let engine = Engine::new(pool);
                    for _ in 0..p.runs {
                        let value = engine.reduce(&x, &plan)?.value;
                        first.get_or_insert(value);
                        seen.insert(value.to_bits());
                    }
                }
                if seen.len() > 1 {
                    failures += 1;
                }
                det.push(vec![
                    a.into(),
                    data_seed.into(),
                    v.name().into(),
                    g.to_string().into(),
                    (pools.len() * p.runs).into(),
                    seen.len().into(),
                    first.unwrap_or(0.0).into(),
                ]);
            }
            let one = KernelGeometry::new(g.threads_per_block(), 1)?;
            let e = Engine::new(Serial);
            let sps = e.reduce(&x, &ReductionPlan::new(Variant::Sps, one))?.value;
            let spsrc = e.reduce(&x, &ReductionPlan::new(Variant::Spsrc, one))?.value;
            if sps.to_bits() != spsrc.to_bits() {
                single_block_mismatches += 1;
            }
        }
    }
    report.check(
        "deterministic_variants_unique",
        failures == 0,
        format!("{failures} (array, variant, geometry) cells had more than one result"),
    );
    report.check(
        "single_block_sps_equals_spsrc",
        single_block_mismatches == 0,
        format!("{single_block_mismatches} mismatches with n_b = 1"),
    );

    let mut live = Table::new("live", &["variant", "geometry", "workers", "n", "runs", "unique_values"]);
    if p.live.runs > 0 && !p.live.variants.is_empty() {
        report.reproducible = false;
        let pool = Pool::new(p.threads.iter().copied().max().unwrap_or(1))?;
        let engine = Engine::new(&pool);
        let x = p.data.generate(p.rng, p.live.n, derive_seed(p.seed, STREAM_DATA, u64::MAX))?;
        for &v in &p.live.variants {
            let plan = ReductionPlan::live(v, p.live.geometry);
            let mut seen = BTreeSet::new();
            for _ in 0..p.live.runs {
                seen.insert(engine.reduce(&x, &plan)?.value.to_bits());
            }
            live.push(vec![
                v.name().into(),
                p.live.geometry.to_string().into(),
                pool.workers().into(),
                p.live.n.into(),
                p.live.runs.into(),
                seen.len().into(),
            ]);
        }
    }
    report.set("deterministic_failures", failures);
    report.tables.extend([det, live]);
    Ok(report)
}
