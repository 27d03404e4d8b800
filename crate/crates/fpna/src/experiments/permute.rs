//! Serial sums of an array before and after a random permutation.

use fpna_core::datagen::permute;
use fpna_core::metrics::v_s;
use fpna_core::reduction::{error_bound, recursive_sum};
use fpna_core::stats::median;
use fpna_core::RngAlgorithm;
use serde::{Deserialize, Serialize};

use super::{derive_seed, echo, DataSpec, STREAM_DATA, STREAM_PERMUTE};
use crate::error::Result;
use crate::report::{Cell, ExperimentKind, Report, Table};
use crate::svg::{Chart, Series};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PermuteDemoParams {
    pub sizes: Vec<usize>,
    /// Fresh arrays per size.
    pub repeats: usize,
    pub data: DataSpec,
    pub rng: RngAlgorithm,
    pub seed: u64,
}

impl Default for PermuteDemoParams {
    fn default() -> Self {
        PermuteDemoParams {
            sizes: vec![100, 1_000, 10_000, 100_000, 1_000_000],
            repeats: 10,
            data: DataSpec::STANDARD_NORMAL,
            rng: RngAlgorithm::Mt19937_64,
            seed: 2024,
        }
    }
}

pub fn run_permute_demo(p: &PermuteDemoParams) -> Result<Report> {
    let mut report = Report::new(ExperimentKind::PermuteDemo, echo(p));
    let mut runs = Table::new(
        "runs",
        &["n", "repeat", "data_seed", "permutation_seed", "s_d", "s_nd", "difference", "v_s", "bound"],
    );
    let mut sizes = Table::new("sizes", &["n", "median_abs_v_s", "min_abs_v_s", "max_abs_v_s", "zero_differences"]);
    let mut violations = 0usize;
    let mut medians = Vec::new();
    for (si, &n) in p.sizes.iter().enumerate() {
        let mut abs_vs = Vec::with_capacity(p.repeats);
        let mut zeros = 0usize;
        for r in 0..p.repeats {
            let item = (si * p.repeats + r) as u64;
            let data_seed = derive_seed(p.seed, STREAM_DATA, item);
            let perm_seed = derive_seed(p.seed, STREAM_PERMUTE, item);
            let x = p.data.generate(p.rng, n, data_seed)?;
            let s_d = recursive_sum(&x);
            let s_nd = recursive_sum(&permute(&x, perm_seed));
            let bound = error_bound(&x);
            if (s_d - s_nd).abs() > bound {
                violations += 1;
            }
            if s_d == s_nd {
                zeros += 1;
            }
            let vs = match v_s(s_d, s_nd) {
                Ok(v) => {
                    abs_vs.push(v.abs());
                    Cell::Float(v)
                }
                Err(_) => Cell::Text("undefined".into()),
            };
            runs.push(vec![
                n.into(),
                r.into(),
                data_seed.into(),
                perm_seed.into(),
                s_d.into(),
                s_nd.into(),
                (s_nd - s_d).into(),
                vs,
                bound.into(),
            ]);
        }
        if let Ok(m) = median(&abs_vs) {
            let lo = abs_vs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = abs_vs.iter().copied().fold(0.0, f64::max);
            sizes.push(vec![n.into(), m.into(), lo.into(), hi.into(), zeros.into()]);
            medians.push((n, m));
        }
    }
    let mut ordered = medians.clone();
    ordered.sort_by_key(|&(n, _)| n);
    let monotone = ordered.windows(2).all(|w| w[0].1 <= w[1].1);
    report.check(
        "error_bound",
        violations == 0,
        format!("{violations} sums exceeded N*u*sum|x|"),
    );
    report.check(
        "median_abs_v_s_non_decreasing",
        monotone,
        format!("medians by n: {ordered:?}"),
    );
    report.set("bound_violations", violations);
    report.charts.push(Chart::Lines {
        name: "median_v_s".into(),
        title: "median |V_s| after one permutation".into(),
        log_log: true,
        series: vec![Series {
            label: "median |V_s|".into(),
            points: ordered.iter().map(|&(n, m)| (n as f64, m)).collect(),
        }],
    });
    report.tables.push(sizes);
    report.tables.push(runs);
    Ok(report)
}
