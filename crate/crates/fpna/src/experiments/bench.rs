//! Relative wall-clock cost of the summation variants.

use std::collections::BTreeSet;
use std::time::Instant;

use fpna_core::{Backend, Engine, Executor, ReductionPlan, RngAlgorithm, Variant};
use serde::{Deserialize, Serialize};

use super::{derive_seed, echo, geometry, DataSpec, STREAM_DATA};
use crate::error::{HarnessError, Result};
use crate::report::{ExperimentKind, Report, Table};
use crate::svg::Chart;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchPlan {
    pub variant: Variant,
    #[serde(default = "default_threads_per_block")]
    pub threads_per_block: usize,
    #[serde(default)]
    pub blocks: Option<usize>,
    #[serde(default = "default_backend")]
    pub backend: Backend,
}

fn default_threads_per_block() -> usize {
    512
}

fn default_backend() -> Backend {
    Backend::LiveAtomic
}

impl BenchPlan {
    pub fn new(variant: Variant) -> Self {
        BenchPlan {
            variant,
            threads_per_block: default_threads_per_block(),
            blocks: None,
            backend: default_backend(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchParams {
    pub n: usize,
    pub sums_per_trial: usize,
    pub trials: usize,
    pub plans: Vec<BenchPlan>,
    pub data: DataSpec,
    pub rng: RngAlgorithm,
    pub seed: u64,
}

impl Default for BenchParams {
    fn default() -> Self {
        BenchParams {
            n: 1 << 22,
            sums_per_trial: 10,
            trials: 5,
            plans: [
                Variant::Spsa,
                Variant::Sps,
                Variant::Tprc,
                Variant::Spsrc,
                Variant::OrderedChunk,
                Variant::RecursiveSerial,
                Variant::PairwiseSerial,
                Variant::KahanSerial,
                Variant::Ao,
            ]
            .into_iter()
            .map(BenchPlan::new)
            .collect(),
            data: DataSpec::UNIFORM_1_10,
            rng: RngAlgorithm::Mt19937_64,
            seed: 2024,
        }
    }
}

/// One row of the timing table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub variant: Variant,
    pub geometry: String,
    pub backend: Backend,
    pub repetitions: usize,
    pub mean_seconds: f64,
    pub std_seconds: f64,
    pub penalty: f64,
    pub unique_values: usize,
}

/// `P_s = 100 (1 - t / min t)`: zero for the fastest entry, negative for
/// the rest. The first of several tied minima is the reference.
pub fn penalties(times: &[f64]) -> Vec<f64> {
    let Some(fastest) = times
        .iter()
        .copied()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, t)| match best {
            Some((_, b)) if b <= t => best,
            _ => Some((i, t)),
        })
    else {
        return Vec::new();
    };
    times
        .iter()
        .enumerate()
        .map(|(i, &t)| if i == fastest.0 { 0.0 } else { 100.0 * (1.0 - t / fastest.1) })
        .collect()
}

fn backend_name(b: Backend) -> &'static str {
    match b {
        Backend::LiveAtomic => "live_atomic",
        Backend::SeededReplay => "seeded_replay",
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

pub fn run_bench<E: Executor>(p: &BenchParams, engine: &Engine<E>) -> Result<Report> {
    if p.plans.is_empty() || p.trials == 0 || p.sums_per_trial == 0 {
        return Err(HarnessError::usage("bench needs plans, trials and sums_per_trial"));
    }
    let mut report = Report::new(ExperimentKind::Bench, echo(p));
    report.reproducible = false;
    let x = p.data.generate(p.rng, p.n, derive_seed(p.seed, STREAM_DATA, 0))?;
    let mut records = Vec::new();
    let mut unstable = Vec::new();
    for bp in &p.plans {
        let g = geometry(bp.threads_per_block, bp.blocks, p.n)?;
        let plan = ReductionPlan {
            variant: bp.variant,
            geometry: g,
            backend: bp.backend,
            schedule_seed: derive_seed(p.seed, super::STREAM_SCHEDULE, 0),
        };
        // Warm-up, discarded.
        engine.reduce(&x, &plan)?;
        let mut times = Vec::with_capacity(p.trials);
        let mut values = BTreeSet::new();
        for _ in 0..p.trials {
            let start = Instant::now();
            for _ in 0..p.sums_per_trial {
                values.insert(engine.reduce(&x, &plan)?.value.to_bits());
            }
            times.push(start.elapsed().as_secs_f64() / p.sums_per_trial as f64);
        }
        if bp.variant.is_deterministic() && values.len() != 1 {
            unstable.push(bp.variant);
        }
        let (mean, std) = mean_std(&times);
        records.push(TimingRecord {
            variant: bp.variant,
            geometry: g.to_string(),
            backend: bp.backend,
            repetitions: p.trials * p.sums_per_trial,
            mean_seconds: mean,
            std_seconds: std,
            penalty: 0.0,
            unique_values: values.len(),
        });
    }
    let ps = penalties(&records.iter().map(|r| r.mean_seconds).collect::<Vec<_>>());
    for (r, p) in records.iter_mut().zip(ps) {
        r.penalty = p;
    }
    report.check(
        "deterministic_sums_stable",
        unstable.is_empty(),
        format!("deterministic plans with varying sums: {unstable:?}"),
    );
    let mut table = Table::new(
        "timings",
        &["variant", "geometry", "backend", "repetitions", "mean_seconds", "std_seconds", "penalty", "unique_values"],
    );
    for r in &records {
        table.push(vec![
            r.variant.name().into(),
            r.geometry.clone().into(),
            backend_name(r.backend).into(),
            r.repetitions.into(),
            r.mean_seconds.into(),
            r.std_seconds.into(),
            r.penalty.into(),
            r.unique_values.into(),
        ]);
    }
    report.charts.push(Chart::Bars {
        name: "penalty".into(),
        title: "performance penalty P_s (%)".into(),
        labels: records.iter().map(|r| r.variant.name().to_string()).collect(),
        values: records.iter().map(|r| r.penalty).collect(),
    });
    report.set("workers", engine.executor().workers());
    report.set("records", &records);
    report.tables.push(table);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use fpna_core::Serial;

    #[test]
    fn fastest_has_zero_penalty() {
        assert_eq!(penalties(&[2.0, 1.0, 4.0]), [-100.0, 0.0, -300.0]);
        assert_eq!(penalties(&[1.0, 1.0]), [0.0, 0.0]);
        assert!(penalties(&[]).is_empty());
    }

    #[test]
    fn ties_resolve_to_first_listed() {
        let p = penalties(&[3.0, 1.0, 1.0]);
        assert_eq!(p[1], 0.0);
        assert_eq!(p[2], 0.0);
    }

    #[test]
    fn small_bench_runs() {
        let p = BenchParams {
            n: 1 << 12,
            sums_per_trial: 2,
            trials: 2,
            ..Default::default()
        };
        let r = run_bench(&p, &Engine::new(Serial)).unwrap();
        assert!(r.passed());
        let ps = r.table("timings").unwrap().floats("penalty");
        assert_eq!(ps.len(), 9);
        assert!(ps.iter().all(|&v| v <= 0.0));
        assert!(!r.reproducible);
    }
}
