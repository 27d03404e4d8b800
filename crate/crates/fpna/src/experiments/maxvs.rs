//! Growth of `max |V_s|` with the array size.

use fpna_core::metrics::v_s;
use fpna_core::stats::{fit_power_law, max_abs, PowerLawFit};
use fpna_core::{Engine, Executor, RngAlgorithm, Variant};
use serde::{Deserialize, Serialize};

use super::{derive_seed, echo, geometry, replay_samples, DataSpec, STREAM_DATA, STREAM_SCHEDULE};
use crate::error::{HarnessError, Result};
use crate::report::{ExperimentKind, Report, Table};
use crate::svg::{Chart, Series};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaxvsParams {
    pub n_values: Vec<usize>,
    pub samples: usize,
    pub variant: Variant,
    pub data: DataSpec,
    pub rng: RngAlgorithm,
    pub threads_per_block: usize,
    pub seed: u64,
}

impl Default for MaxvsParams {
    fn default() -> Self {
        MaxvsParams {
            n_values: (10..=20).map(|k| 1usize << k).collect(),
            samples: 1000,
            variant: Variant::Spsa,
            data: DataSpec::UNIFORM_1_10,
            rng: RngAlgorithm::Mt19937_64,
            threads_per_block: 64,
            seed: 2024,
        }
    }
}

/// Power-law fit of `(n, max |V_s|)` points.
pub fn fit_growth(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    Ok(fit_power_law(points)?)
}

pub fn run_maxvs<E: Executor>(p: &MaxvsParams, engine: &Engine<E>) -> Result<Report> {
    if p.n_values.len() < 3 {
        return Err(HarnessError::usage("maxvs needs at least three n values"));
    }
    let mut report = Report::new(ExperimentKind::MaxvsSweep, echo(p));
    let mut sizes = Table::new("sizes", &["n", "data_seed", "s_d", "max_abs_v_s", "bound", "violations"]);
    let mut runs = Table::new("samples", &["n", "sample", "schedule_seed", "s_nd", "v_s"]);
    let mut points = Vec::new();
    let mut violations = 0usize;
    for (i, &n) in p.n_values.iter().enumerate() {
        let data_seed = derive_seed(p.seed, STREAM_DATA, i as u64);
        let x = p.data.generate(p.rng, n, data_seed)?;
        let g = geometry(p.threads_per_block, None, n)?;
        let seeds: Vec<u64> = (0..p.samples)
            .map(|s| derive_seed(p.seed, STREAM_SCHEDULE, (i * p.samples + s) as u64))
            .collect();
        let samples = replay_samples(engine, &x, p.variant, g, &seeds)?;
        let vs = samples
            .s_nd
            .iter()
            .map(|&s| v_s(samples.s_d, s))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        for (s, ((&seed, &s_nd), &v)) in seeds.iter().zip(&samples.s_nd).zip(&vs).enumerate() {
            runs.push(vec![n.into(), s.into(), seed.into(), s_nd.into(), v.into()]);
        }
        let m = max_abs(&vs)?;
        let v = samples.violations();
        violations += v;
        sizes.push(vec![n.into(), data_seed.into(), samples.s_d.into(), m.into(), samples.bound.into(), v.into()]);
        points.push((n as f64, m));
    }
    report.set("variant", p.variant);
    report.set("bound_violations", violations);
    report.check("error_bound", violations == 0, format!("{violations} sums exceeded N*u*sum|x|"));
    let mut series = vec![Series { label: "max |V_s|".into(), points: points.clone() }];
    match fit_growth(&points) {
        Ok(fit) => {
            report.set("fit", fit);
            series.push(Series {
                label: format!("fit {:.3} n^{:.3}", fit.beta, fit.alpha),
                points: points.iter().map(|&(n, _)| (n, fit.predict(n))).collect(),
            });
        }
        // A zero maximum (e.g. exact data) has no log; the fit is omitted.
        Err(_) => report.set("fit", serde_json::Value::Null),
    }
    report.charts.push(Chart::Lines {
        name: "max_v_s".into(),
        title: format!("max |V_s| vs n, {}", p.variant),
        log_log: true,
        series,
    });
    report.tables.extend([sizes, runs]);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use fpna_core::Serial;

    #[test]
    fn constant_series_has_zero_exponent() {
        let pts: Vec<(f64, f64)> = [1024.0, 2048.0, 4096.0].iter().map(|&n| (n, 3e-15)).collect();
        let fit = fit_growth(&pts).unwrap();
        assert_eq!(fit.alpha, 0.0);
        assert_eq!(fit.r2, 1.0);
    }

    #[test]
    fn small_sweep_runs() {
        let p = MaxvsParams {
            n_values: vec![256, 1024, 4096],
            samples: 20,
            ..Default::default()
        };
        let r = run_maxvs(&p, &Engine::new(Serial)).unwrap();
        assert_eq!(r.table("sizes").unwrap().rows.len(), 3);
        assert!(r.summary_f64("bound_violations") == Some(0.0));
        assert!(run_maxvs(&MaxvsParams { n_values: vec![1, 2], ..p }, &Engine::new(Serial)).is_err());
    }
}
