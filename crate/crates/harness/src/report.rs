//! CSV output. Numbers use Rust's shortest round-trip formatting, so identical
//! runs give byte-identical files.

use std::fs;
use std::path::Path;

use crate::error::HarnessError;
use crate::experiment::ExperimentReport;
use crate::presets::{Derived, PresetOutcome};

pub const SERIES_HEADER: [&str; 6] = ["step", "time", "rmse", "linf", "momentum", "min_spacing"];
pub const SUMMARY_HEADER: [&str; 11] =
    ["run", "scheme", "mesh", "n", "dt", "status", "abort_step", "rmse", "linf", "momentum_drift", "solitons"];

/// Shortest round-trip text; scientific outside `[1e-4, 1e6)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e6).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn csv_err(e: csv::Error) -> HarnessError {
    HarnessError::Io(e.to_string())
}

fn mesh_label(report: &ExperimentReport) -> String {
    use kdv_core::{MeshStrategy, MonitorKind};
    match report.strategy {
        MeshStrategy::Fixed => "fixed".into(),
        MeshStrategy::Lagrangian => "lagrangian".into(),
        MeshStrategy::EvolutionProjection { order, .. } => format!("evolution_projection_{order}"),
        MeshStrategy::Adaptive(MonitorKind::ArcLengthInvariant { alpha }) => format!("adaptive_arclength_{alpha:e}"),
        MeshStrategy::Adaptive(MonitorKind::CurvatureNonInvariant { alpha }) => format!("adaptive_curvature_{alpha:e}"),
    }
}

/// Time series of one run followed by a `summary` row with the final errors and momentum drift.
pub fn write_series(report: &ExperimentReport, path: &Path) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(SERIES_HEADER).map_err(csv_err)?;
    for r in &report.rows {
        w.write_record([
            r.step.to_string(),
            num(r.time),
            num(r.rmse),
            num(r.linf),
            num(r.momentum),
            num(r.min_spacing),
        ])
        .map_err(csv_err)?;
    }
    let last = report.rows.last();
    w.write_record([
        "summary".to_string(),
        num(last.map_or(f64::NAN, |r| r.time)),
        num(report.rmse),
        num(report.linf),
        num(report.momentum_drift),
        num(last.map_or(f64::NAN, |r| r.min_spacing)),
    ])
    .map_err(csv_err)?;
    w.flush()?;
    Ok(())
}

pub fn write_summary(reports: &[ExperimentReport], path: &Path) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(SUMMARY_HEADER).map_err(csv_err)?;
    for r in reports {
        let (status, step) = match &r.abort {
            None => ("completed".to_string(), String::new()),
            Some(a) => (format!("aborted: {}", a.message), a.step.to_string()),
        };
        w.write_record([
            r.name.clone(),
            r.scheme.name().to_string(),
            mesh_label(r),
            r.n.to_string(),
            num(r.dt),
            status,
            step,
            num(r.rmse),
            num(r.linf),
            num(r.momentum_drift),
            r.solitons.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_derived(derived: &[Derived], path: &Path) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["label", "quantity", "value"]).map_err(csv_err)?;
    for d in derived {
        w.write_record([d.label.as_str(), d.quantity, &num(d.value)]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `<dir>/<run>.csv` for every run, `summary.csv`, and `derived.csv` when present.
pub fn write_outcome(reports: &[ExperimentReport], derived: &[Derived], dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir)?;
    for r in reports {
        write_series(r, &dir.join(format!("{}.csv", r.name)))?;
    }
    write_summary(reports, &dir.join("summary.csv"))?;
    if !derived.is_empty() {
        write_derived(derived, &dir.join("derived.csv"))?;
    }
    Ok(())
}

pub fn write_preset(outcome: &PresetOutcome, dir: &Path) -> Result<(), HarnessError> {
    write_outcome(&outcome.reports, &outcome.derived, dir)
}
