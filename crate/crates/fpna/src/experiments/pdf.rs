//! Empirical distribution of `V_s` for a nondeterministic variant.

use fpna_core::metrics::v_s;
use fpna_core::stats::{
    fit_gaussian, histogram_lattice, kl_to_gaussian, max_abs, GaussianFit, DEFAULT_BINS,
};
use fpna_core::{Engine, Executor, RngAlgorithm, Variant};
use serde::{Deserialize, Serialize};

use super::{derive_seed, echo, geometry, replay_samples, DataSpec, STREAM_DATA, STREAM_SCHEDULE};
use crate::error::Result;
use crate::report::{ExperimentKind, Report, Table};
use crate::svg::Chart;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PdfParams {
    pub n: usize,
    pub arrays: usize,
    pub samples_per_array: usize,
    pub variant: Variant,
    pub data: DataSpec,
    pub rng: RngAlgorithm,
    pub threads_per_block: usize,
    pub blocks: Option<usize>,
    pub bins: usize,
    pub seed: u64,
}

impl Default for PdfParams {
    fn default() -> Self {
        PdfParams {
            n: 100_000,
            arrays: 100,
            samples_per_array: 100,
            variant: Variant::Spsa,
            data: DataSpec::UNIFORM_1_10,
            rng: RngAlgorithm::Mt19937_64,
            threads_per_block: 64,
            blocks: None,
            bins: DEFAULT_BINS,
            seed: 2024,
        }
    }
}

/// Spacing of the grid `V_s` lives on: the largest `ulp(S_d) / |S_d|`.
fn vs_quantum(references: &[f64]) -> f64 {
    references
        .iter()
        .map(|s| {
            let a = s.abs();
            (a.next_up() - a) / a
        })
        .fold(0.0, f64::max)
}

pub fn run_pdf<E: Executor>(p: &PdfParams, engine: &Engine<E>) -> Result<Report> {
    let mut report = Report::new(ExperimentKind::Pdf, echo(p));
    let mut runs = Table::new(
        "samples",
        &["array", "data_seed", "sample", "schedule_seed", "s_d", "s_nd", "v_s"],
    );
    let mut arrays = Table::new("arrays", &["array", "data_seed", "s_d", "bound", "violations"]);
    let mut all_vs = Vec::with_capacity(p.arrays * p.samples_per_array);
    let mut references = Vec::with_capacity(p.arrays);
    let mut violations = 0usize;
    let g = geometry(p.threads_per_block, p.blocks, p.n)?;
    for a in 0..p.arrays {
        let data_seed = derive_seed(p.seed, STREAM_DATA, a as u64);
        let x = p.data.generate(p.rng, p.n, data_seed)?;
        let seeds: Vec<u64> = (0..p.samples_per_array)
            .map(|s| derive_seed(p.seed, STREAM_SCHEDULE, (a * p.samples_per_array + s) as u64))
            .collect();
        let samples = replay_samples(engine, &x, p.variant, g, &seeds)?;
        let v = samples.violations();
        violations += v;
        arrays.push(vec![a.into(), data_seed.into(), samples.s_d.into(), samples.bound.into(), v.into()]);
        references.push(samples.s_d);
        for (s, (&seed, &s_nd)) in seeds.iter().zip(&samples.s_nd).enumerate() {
            let vs = v_s(samples.s_d, s_nd)?;
            all_vs.push(vs);
            runs.push(vec![
                a.into(),
                data_seed.into(),
                s.into(),
                seed.into(),
                samples.s_d.into(),
                s_nd.into(),
                vs.into(),
            ]);
        }
    }
    report.set("variant", p.variant);
    report.set("geometry", g);
    report.set("samples", all_vs.len());
    report.set("bound_violations", violations);
    report.check("error_bound", violations == 0, format!("{violations} sums exceeded N*u*sum|x|"));
    if all_vs.is_empty() {
        report.tables.extend([arrays, runs]);
        return Ok(report);
    }
    report.set("max_abs_v_s", max_abs(&all_vs)?);
    let quantum = vs_quantum(&references);
    let hist = histogram_lattice(&all_vs, p.bins, quantum)?;
    report.set("lattice_quantum", quantum);
    match fit_gaussian(&all_vs) {
        Ok(fit) => {
            let kl = kl_to_gaussian(&hist, &fit);
            report.set("gaussian", fit);
            report.set("kl_to_gaussian", kl);
            report.charts.push(pdf_chart(&hist, Some(&fit), p.variant));
        }
        Err(_) => {
            report.set("gaussian", serde_json::Value::Null);
            report.set("kl_to_gaussian", serde_json::Value::Null);
            report.charts.push(pdf_chart(&hist, None, p.variant));
        }
    }
    let mut bins = Table::new("histogram", &["lower_edge", "upper_edge", "count", "density"]);
    for (i, (&c, d)) in hist.counts.iter().zip(hist.densities()).enumerate() {
        bins.push(vec![hist.bin_edges[i].into(), hist.bin_edges[i + 1].into(), c.into(), d.into()]);
    }
    report.set("histogram", &hist);
    report.tables.extend([arrays, bins, runs]);
    Ok(report)
}

fn pdf_chart(hist: &fpna_core::stats::Histogram, fit: Option<&GaussianFit>, variant: Variant) -> Chart {
    let overlay = fit.map(|g| {
        let (lo, hi) = (hist.bin_edges[0], hist.bin_edges[hist.bin_edges.len() - 1]);
        (0..=200)
            .map(|i| {
                let x = lo + (hi - lo) * i as f64 / 200.0;
                let z = (x - g.mu) / g.sigma;
                (x, (-0.5 * z * z).exp() / (g.sigma * (2.0 * std::f64::consts::PI).sqrt()))
            })
            .collect()
    });
    Chart::Histogram {
        name: "v_s_pdf".into(),
        title: format!("PDF of V_s, {variant}"),
        edges: hist.bin_edges.clone(),
        heights: hist.densities(),
        overlay,
    }
}
