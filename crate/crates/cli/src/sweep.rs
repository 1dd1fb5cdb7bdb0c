//! Parallel parameter sweeps.

use std::time::Instant;

use epsense_core::active::{
    eigenfrequencies, lasing_threshold, qfi_active_quadrature, scattering_amplitude_active, ActiveSystem,
};
use epsense_core::numerics::Quadrature;
use epsense_core::scattering::scattering_amplitude;
use epsense_core::sensing::{qfi_splitting_with, qfi_total_quadrature, sensitivity_bound};
use epsense_core::{Complex64, Error};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Output, SweepConfig, SweepVar, SystemKind};

/// One table cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Real(f64),
    Complex(Complex64),
    List(Vec<Complex64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub x: f64,
    /// One entry per requested output; `None` when the value could not be
    /// computed, with the reason in `status`.
    pub values: Vec<Option<Cell>>,
    /// `ok`, or `|`-joined failure codes.
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    pub sweep_var: String,
    pub columns: Vec<String>,
    pub config: serde_json::Value,
    /// Inversion at the lasing threshold, for active systems.
    pub threshold: Option<f64>,
    pub wall_time_s: f64,
    /// Largest absolute quadrature error estimate over all `f_eps` values.
    pub max_quadrature_error: f64,
    /// Largest error estimate relative to its `f_eps` value.
    pub max_quadrature_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub metadata: Metadata,
    pub rows: Vec<Row>,
}

/// Short machine-readable code for a per-point failure.
pub fn status_code(e: &Error) -> &'static str {
    match e {
        Error::AboveThreshold { .. } => "above_threshold",
        Error::NearDefective { .. } => "near_defective",
        Error::DivergentAtEp { .. } => "divergent_at_ep",
        Error::DepthExceeded { .. } => "depth_exceeded",
        Error::SingularAtFrequency { .. } | Error::Singular { .. } => "singular",
        Error::ZeroInformation => "zero_information",
        Error::NonConvergence { .. } => "non_convergence",
        Error::InvalidParameter(_) => "invalid_parameter",
        _ => "numeric_error",
    }
}

/// Parameters of a single sweep point.
#[derive(Debug, Clone, Copy)]
pub struct Point {
    pub x: f64,
    pub system: Option<ActiveSystem>,
    pub passive: epsense_core::model::PassiveParams,
    pub nu: f64,
}

/// Parameters at sweep value `x`; `threshold` scales relative `s_z` sweeps.
pub fn point_at(cfg: &SweepConfig, var: SweepVar, x: f64, threshold: Option<f64>) -> Point {
    let mut passive = cfg.passive;
    let mut gain = cfg.gain;
    let mut nu = cfg.nu;
    match var {
        SweepVar::G => passive.g = x,
        SweepVar::Epsilon => passive = passive.with_epsilon(x, cfg.eps_convention),
        SweepVar::Nu => nu = x,
        SweepVar::SZ => {
            if let Some(g) = gain.as_mut() {
                g.s_z = threshold.map_or(x, |sc| x * sc);
            }
        }
    }
    Point { x, system: gain.map(|gain| ActiveSystem { passive, gain }), passive, nu }
}

struct Evaluated {
    row: Row,
    quadrature: Option<Quadrature>,
}

fn note(status: &mut Vec<&'static str>, e: &Error) {
    let code = status_code(e);
    if !status.contains(&code) {
        status.push(code);
    }
}

fn finite(v: f64, status: &mut Vec<&'static str>, code: &'static str) -> Option<Cell> {
    if v.is_finite() {
        Some(Cell::Real(v))
    } else {
        if !status.contains(&code) {
            status.push(code);
        }
        None
    }
}

/// Evaluate every requested output at one point. Failures are recorded in
/// the row status rather than returned.
pub fn evaluate_point(cfg: &SweepConfig, pt: &Point) -> Row {
    evaluate(cfg, pt).row
}

fn evaluate(cfg: &SweepConfig, pt: &Point) -> Evaluated {
    let mut status: Vec<&'static str> = Vec::new();
    let p = &pt.passive;
    let input = &cfg.input;
    let spec = cfg.quadrature.spec(p, input);
    let coupling = match &pt.system {
        Some(a) => a.effective_coupling(),
        None => p.coupling(),
    };

    let needs_f_eps = cfg.outputs.iter().any(|o| matches!(o, Output::FEps | Output::Eta));
    let quadrature = if needs_f_eps {
        let q = spec.and_then(|spec| match &pt.system {
            Some(a) => qfi_active_quadrature(a, input, &spec, cfg.gain_model, cfg.eps_convention),
            None => qfi_total_quadrature(p, input, &spec, cfg.eps_convention),
        });
        match q {
            Ok(q) => Some(q),
            Err(e) => {
                note(&mut status, &e);
                None
            }
        }
    } else {
        None
    };

    let breakdown = if cfg.outputs.contains(&Output::FDelta) {
        match cfg.quadrature.spec(p, input).and_then(|spec| qfi_splitting_with(p, input, &spec, cfg.eps_convention)) {
            Ok(b) => Some(b),
            Err(e) => {
                note(&mut status, &e);
                None
            }
        }
    } else {
        None
    };

    let mut values = Vec::with_capacity(cfg.outputs.len());
    for out in &cfg.outputs {
        let cell = match out {
            Output::FEps => quadrature.and_then(|q| finite(q.value, &mut status, "non_finite")),
            Output::FDelta => breakdown.and_then(|b| finite(b.f_delta, &mut status, "non_finite")),
            Output::ChiSq => match coupling.susceptibility() {
                Ok(chi) => finite(chi.norm_sqr(), &mut status, "divergent_at_ep"),
                Err(e) => {
                    note(&mut status, &e);
                    None
                }
            },
            Output::Overlap => finite(coupling.overlap(), &mut status, "non_finite"),
            Output::Eigenvalues => {
                let ev = match &pt.system {
                    Some(a) => eigenfrequencies(a, cfg.gain_model),
                    None => Ok(coupling.eigenvalues().to_vec()),
                };
                match ev {
                    Ok(ev) => Some(Cell::List(ev)),
                    Err(e) => {
                        note(&mut status, &e);
                        None
                    }
                }
            }
            Output::SNu => {
                let s = match &pt.system {
                    Some(a) => scattering_amplitude_active(pt.nu, a, cfg.gain_model),
                    None => Ok(scattering_amplitude(pt.nu, p)),
                };
                match s {
                    Ok(s) if s.re.is_finite() && s.im.is_finite() => Some(Cell::Complex(s)),
                    Ok(_) => {
                        note(&mut status, &Error::SingularAtFrequency { nu: pt.nu });
                        None
                    }
                    Err(e) => {
                        note(&mut status, &e);
                        None
                    }
                }
            }
            Output::Eta => quadrature.and_then(|q| match sensitivity_bound(q.value, cfg.reps_per_time) {
                Ok(eta) => finite(eta, &mut status, "non_finite"),
                Err(e) => {
                    note(&mut status, &e);
                    None
                }
            }),
        };
        values.push(cell);
    }
    let status = if status.is_empty() { "ok".to_string() } else { status.join("|") };
    Evaluated { row: Row { x: pt.x, values, status }, quadrature }
}

/// Inversion at threshold when the sweep is expressed relative to it.
pub fn sweep_threshold(cfg: &SweepConfig) -> Option<f64> {
    cfg.active_system().map(|a| lasing_threshold(&a))
}

/// Evaluate every sweep point on `jobs` worker threads. Rows come back in
/// sweep order and do not depend on the worker count.
pub fn run_sweep(cfg: &SweepConfig, jobs: usize) -> Result<SweepResult, rayon::ThreadPoolBuildError> {
    let started = Instant::now();
    let sweep = cfg.sweep.clone();
    let (var, xs) = match &sweep {
        Some(s) => (s.var, s.values()),
        None => (SweepVar::G, vec![cfg.passive.g]),
    };
    let threshold = sweep_threshold(cfg);
    let scale = sweep.as_ref().filter(|s| s.relative_to_threshold).and(threshold);

    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?;
    let evaluated: Vec<Evaluated> =
        pool.install(|| xs.par_iter().map(|&x| evaluate(cfg, &point_at(cfg, var, x, scale))).collect());

    let mut max_err = 0.0f64;
    let mut max_rel = 0.0f64;
    for q in evaluated.iter().filter_map(|e| e.quadrature) {
        max_err = max_err.max(q.error);
        if q.value != 0.0 {
            max_rel = max_rel.max(q.error / q.value.abs());
        }
    }
    let mut columns = vec![var.name().to_string()];
    columns.extend(cfg.outputs.iter().map(|o| o.name().to_string()));
    columns.push("status".into());
    let metadata = Metadata {
        version: env!("CARGO_PKG_VERSION").to_string(),
        sweep_var: var.name().to_string(),
        columns,
        config: serde_json::to_value(cfg).unwrap_or(serde_json::Value::Null),
        threshold: if cfg.system == SystemKind::Active { threshold } else { None },
        wall_time_s: started.elapsed().as_secs_f64(),
        max_quadrature_error: max_err,
        max_quadrature_rel_error: max_rel,
    };
    Ok(SweepResult { metadata, rows: evaluated.into_iter().map(|e| e.row).collect() })
}
