//! Unique outputs and count variability of scatter-style ops over a grid of
//! dimensions and reduction ratios.

use fpna_core::stats::{median, spearman};
use fpna_core::tensor::{ExecMode, TensorOp, TensorOpSpec};
use fpna_core::{Engine, Executor, RngAlgorithm, RngSpec};
use serde::{Deserialize, Serialize};

use super::{derive_seed, echo, STREAM_DATA, STREAM_SCHEDULE};
use crate::error::{HarnessError, Result};
use crate::report::{ExperimentKind, Report, Table};
use crate::svg::{Chart, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecKind {
    Deterministic,
    Replay,
    Live,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpSweepParams {
    pub op: TensorOp,
    /// Extents of the reduced axis.
    pub dims: Vec<usize>,
    /// Columns of the index-add input; ignored by scatter-reduce.
    pub columns: usize,
    pub ratios: Vec<f64>,
    pub runs: usize,
    pub exec: ExecKind,
    pub rng: RngAlgorithm,
    pub seed: u64,
}

impl Default for OpSweepParams {
    fn default() -> Self {
        OpSweepParams {
            op: TensorOp::ScatterReduceSum,
            dims: vec![2000],
            columns: 1,
            ratios: (1..=10).map(|k| k as f64 / 10.0).collect(),
            runs: 100,
            exec: ExecKind::Replay,
            rng: RngAlgorithm::Mt19937_64,
            seed: 2024,
        }
    }
}

/// Trend statistics of `v_c` against `R` for one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VcTrend {
    pub dim: usize,
    /// `v_c` at the largest ratio over the median `v_c` of the others.
    pub jump_ratio: Option<f64>,
    pub spearman_rho: Option<f64>,
}

pub fn run_op_sweep<E: Executor>(p: &OpSweepParams, engine: &Engine<E>) -> Result<Report> {
    if p.runs < 2 {
        return Err(HarnessError::usage("op sweep needs at least two runs"));
    }
    if let Some(r) = p.ratios.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
        return Err(HarnessError::usage(format!("reduction ratio {r} outside (0, 1]")));
    }
    let mut report = Report::new(ExperimentKind::OpSweep, echo(p));
    if p.exec == ExecKind::Live {
        report.reproducible = false;
    }
    let mut cells = Table::new(
        "cells",
        &["dim", "ratio", "output_extent", "data_seed", "schedule_seed", "runs", "unique_outputs", "mean_v_c", "mean_v_ermv"],
    );
    let mut unique_grid = Vec::new();
    let mut vc_grid = Vec::new();
    let mut trends = Vec::new();
    let mut series = Vec::new();
    let mut deterministic_ok = true;
    for (di, &dim) in p.dims.iter().enumerate() {
        let mut unique_row = Vec::new();
        let mut vc_row = Vec::new();
        for (ri, &ratio) in p.ratios.iter().enumerate() {
            let cell = (di * p.ratios.len() + ri) as u64;
            let data_seed = derive_seed(p.seed, STREAM_DATA, cell);
            let schedule_seed = derive_seed(p.seed, STREAM_SCHEDULE, cell);
            let exec = match p.exec {
                ExecKind::Deterministic => ExecMode::DeterministicSerial,
                ExecKind::Replay => ExecMode::NondetReplay { seed: schedule_seed },
                ExecKind::Live => ExecMode::NondetLive,
            };
            let input_dims = match p.op {
                TensorOp::IndexAdd => vec![dim, p.columns],
                _ => vec![dim],
            };
            let spec = TensorOpSpec::with_ratio(p.op, input_dims, ratio, exec, RngSpec { algorithm: p.rng, seed: data_seed })?;
            let v = engine.unique_output_count(&spec, p.runs)?;
            if v.unique_outputs != 1 || v.mean_vc != 0.0 {
                deterministic_ok = false;
            }
            cells.push(vec![
                dim.into(),
                ratio.into(),
                spec.output_extent.into(),
                data_seed.into(),
                schedule_seed.into(),
                p.runs.into(),
                v.unique_outputs.into(),
                v.mean_vc.into(),
                v.mean_vermv.into(),
            ]);
            unique_row.push(v.unique_outputs as f64);
            vc_row.push(v.mean_vc);
        }
        trends.push(trend(dim, &p.ratios, &vc_row));
        series.push(Series {
            label: format!("dim {dim}"),
            points: p.ratios.iter().copied().zip(vc_row.iter().copied()).collect(),
        });
        unique_grid.push(unique_row);
        vc_grid.push(vc_row);
    }
    if p.exec == ExecKind::Deterministic {
        report.check(
            "deterministic_single_output",
            deterministic_ok,
            "every cell must have one unique output and v_c = 0",
        );
    }
    let rows: Vec<String> = p.dims.iter().map(|d| d.to_string()).collect();
    let cols: Vec<String> = p.ratios.iter().map(|r| format!("{r}")).collect();
    report.charts.push(Chart::Heatmap {
        name: "unique_outputs".into(),
        title: format!("unique outputs per {} runs", p.runs),
        row_labels: rows.clone(),
        col_labels: cols.clone(),
        values: unique_grid,
    });
    report.charts.push(Chart::Heatmap {
        name: "v_c".into(),
        title: "mean V_c".into(),
        row_labels: rows,
        col_labels: cols,
        values: vc_grid,
    });
    report.charts.push(Chart::Lines {
        name: "v_c_by_ratio".into(),
        title: "mean V_c vs reduction ratio".into(),
        log_log: false,
        series,
    });
    report.set("op", p.op);
    report.set("trends", &trends);
    report.tables.push(cells);
    Ok(report)
}

fn trend(dim: usize, ratios: &[f64], vc: &[f64]) -> VcTrend {
    let last = ratios
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i);
    let jump_ratio = last.and_then(|i| {
        let rest: Vec<f64> = vc.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
        let m = median(&rest).ok()?;
        (m > 0.0).then(|| vc[i] / m)
    });
    VcTrend {
        dim,
        jump_ratio,
        spearman_rho: spearman(ratios, vc).ok(),
    }
}
