//! Writing CSV, JSON, SVG and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use dephasing::{derive_scales, to_reduced_units};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::experiments::{CurveRecord, RunOutput};
use crate::CliError;

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv(path: &Path, curve: &CurveRecord) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = [curve.x_label.as_str(), "value", "abs_error_estimate"];
    w.write_record(header).expect("in-memory write");
    for ((x, v), e) in curve.x.iter().zip(&curve.value).zip(&curve.abs_error) {
        w.write_record([fmt_f64(*x), fmt_f64(*v), fmt_f64(*e)]).expect("in-memory write");
    }
    let bytes = w.into_inner().expect("in-memory flush");
    fs::write(path, bytes).map_err(io(path))
}

#[derive(Debug, Serialize)]
struct ErrorSummary<'a> {
    name: &'a str,
    points: usize,
    max_abs_error: f64,
    rel_tol: f64,
}

/// The deterministic results document.
pub fn results_json(cfg: &ExperimentConfig, out: &RunOutput) -> Result<String, CliError> {
    let scales = derive_scales(&cfg.params)?;
    let doc = json!({
        "kind": cfg.kind.label(),
        "config": cfg,
        "derived_scales": scales,
        "curves": out.curves,
        "extra": out.extra,
    });
    Ok(serde_json::to_string_pretty(&doc).expect("results serialise") + "\n")
}

/// Everything needed to reproduce the run. `wall_clock_seconds` is the only
/// field that varies between identical runs.
pub fn manifest_json(cfg: &ExperimentConfig, out: &RunOutput, files: &[String], wall_clock: f64, threads: usize) -> Result<String, CliError> {
    let scales = derive_scales(&cfg.params)?;
    let reduced = to_reduced_units(&cfg.params, &scales);
    let errors: Vec<ErrorSummary> =
        out.curves.iter().map(|c| ErrorSummary { name: &c.name, points: c.x.len(), max_abs_error: c.max_abs_error(), rel_tol: c.rel_tol }).collect();
    let doc = json!({
        "program": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "kind": cfg.kind.label(),
        "parameters_si": cfg.params,
        "parameters_kv": cfg.params.to_kv_string(),
        "parameters_reduced": reduced,
        "derived_scales": scales,
        "experiment": cfg,
        "quadrature_errors": errors,
        "files": files,
        "threads": threads,
        "wall_clock_seconds": wall_clock,
    });
    Ok(serde_json::to_string_pretty(&doc).expect("manifest serialises") + "\n")
}

/// Write every artifact of a run into `dir`; returns the file names.
pub fn write_run(dir: &Path, cfg: &ExperimentConfig, out: &RunOutput) -> Result<Vec<String>, CliError> {
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut files = Vec::new();
    for c in &out.curves {
        let name = format!("{}.csv", c.name);
        write_csv(&dir.join(&name), c)?;
        files.push(name);
    }
    let results = dir.join("results.json");
    fs::write(&results, results_json(cfg, out)?).map_err(io(&results))?;
    files.push("results.json".into());
    let svg_name = format!("{}.svg", cfg.kind.preset_name());
    let svg = dir.join(&svg_name);
    fs::write(&svg, out.figure.render()).map_err(io(&svg))?;
    files.push(svg_name);
    Ok(files)
}

pub fn write_manifest(dir: &Path, cfg: &ExperimentConfig, out: &RunOutput, files: &[String], wall_clock: f64, threads: usize) -> Result<PathBuf, CliError> {
    let path = dir.join("manifest.json");
    fs::write(&path, manifest_json(cfg, out, files, wall_clock, threads)?).map_err(io(&path))?;
    Ok(path)
}

/// Drop the wall-clock entry, for comparing manifests of repeated runs.
pub fn strip_wall_clock(manifest: &str) -> Result<Value, serde_json::Error> {
    let mut v: Value = serde_json::from_str(manifest)?;
    if let Some(o) = v.as_object_mut() {
        o.remove("wall_clock_seconds");
    }
    Ok(v)
}
