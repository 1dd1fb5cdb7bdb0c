//! Adaptive Simpson quadrature with Richardson-corrected panels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of equal panels the window is split into before refinement.
const INITIAL_PANELS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub center: f64,
    pub half_width: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
}

impl QuadratureSpec {
    pub fn new(center: f64, half_width: f64, rel_tol: f64, max_depth: u32) -> Result<Self> {
        let spec = Self { center, half_width, rel_tol, max_depth };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(Error::QuadratureSpec("half_width must be positive and finite"));
        }
        if !self.center.is_finite() {
            return Err(Error::QuadratureSpec("center must be finite"));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::QuadratureSpec("rel_tol must lie in (0, 1)"));
        }
        if self.max_depth < 4 {
            return Err(Error::QuadratureSpec("max_depth must be at least 4"));
        }
        Ok(())
    }

    pub fn lower(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.center + self.half_width
    }
}

/// Integral value with the accumulated local error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// `∫ f` over `[center − half_width, center + half_width]`.
pub fn adaptive_integrate(f: impl Fn(f64) -> f64, spec: &QuadratureSpec) -> Result<f64> {
    integrate_with_error(f, spec).map(|q| q.value)
}

/// Like [`adaptive_integrate`] but also reports the error estimate.
///
/// Tolerance is relative to a coarse estimate of `∫|f|`, distributed over
/// panels in proportion to their width.
pub fn integrate_with_error(f: impl Fn(f64) -> f64, spec: &QuadratureSpec) -> Result<Quadrature> {
    spec.validate()?;
    integrate_interval(&f, spec.lower(), spec.upper(), spec.rel_tol, spec.max_depth)
}

pub(crate) fn integrate_interval(
    f: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    rel_tol: f64,
    max_depth: u32,
) -> Result<Quadrature> {
    let width = hi - lo;
    let h = width / INITIAL_PANELS as f64;
    let nodes: Vec<f64> = (0..=2 * INITIAL_PANELS).map(|i| f(lo + 0.5 * h * i as f64)).collect();
    if let Some(bad) = nodes.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("integrand not finite: {bad}")));
    }
    let panels: Vec<Panel> = (0..INITIAL_PANELS)
        .map(|p| {
            let a = lo + h * p as f64;
            let b = if p + 1 == INITIAL_PANELS { hi } else { lo + h * (p + 1) as f64 };
            let (fa, fm, fb) = (nodes[2 * p], nodes[2 * p + 1], nodes[2 * p + 2]);
            Panel { a, b, fa, fm, fb, whole: simpson(a, b, fa, fm, fb) }
        })
        .collect();
    let coarse_abs: f64 = (0..INITIAL_PANELS)
        .map(|p| simpson(0.0, h, nodes[2 * p].abs(), nodes[2 * p + 1].abs(), nodes[2 * p + 2].abs()))
        .sum();
    let abs_tol = rel_tol * coarse_abs.max(f64::MIN_POSITIVE);

    let mut value = 0.0;
    let mut error = 0.0;
    let mut exceeded = false;
    for panel in panels {
        let tol = abs_tol * (panel.b - panel.a) / width;
        let (v, e) = refine(f, panel, tol, max_depth, &mut exceeded)?;
        value += v;
        error += e;
    }
    if exceeded {
        return Err(Error::DepthExceeded { estimate: value, error_bound: error });
    }
    Ok(Quadrature { value, error })
}

fn refine(f: &dyn Fn(f64) -> f64, p: Panel, tol: f64, depth_left: u32, exceeded: &mut bool) -> Result<(f64, f64)> {
    let m = 0.5 * (p.a + p.b);
    let (lm, rm) = (0.5 * (p.a + m), 0.5 * (m + p.b));
    let (flm, frm) = (f(lm), f(rm));
    if !flm.is_finite() || !frm.is_finite() {
        return Err(Error::InvalidParameter(format!("integrand not finite near {m}")));
    }
    let left = simpson(p.a, m, p.fa, flm, p.fm);
    let right = simpson(m, p.b, p.fm, frm, p.fb);
    let delta = left + right - p.whole;
    if delta.abs() <= 15.0 * tol {
        return Ok((left + right + delta / 15.0, delta.abs() / 15.0));
    }
    if depth_left == 0 {
        *exceeded = true;
        return Ok((left + right + delta / 15.0, delta.abs() / 15.0));
    }
    let (lv, le) = refine(
        f,
        Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left },
        0.5 * tol,
        depth_left - 1,
        exceeded,
    )?;
    let (rv, re) = refine(
        f,
        Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right },
        0.5 * tol,
        depth_left - 1,
        exceeded,
    )?;
    Ok((lv + rv, le + re))
}

/// Like [`integrate_with_error`] with the window first cut at `breakpoints`.
///
/// Each piece gets its own initial panel grid, so narrow features placed at
/// breakpoints are resolved however wide the window is. Breakpoints outside
/// the window are ignored.
pub fn integrate_segments(f: impl Fn(f64) -> f64, spec: &QuadratureSpec, breakpoints: &[f64]) -> Result<Quadrature> {
    spec.validate()?;
    let (lo, hi) = (spec.lower(), spec.upper());
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|x| x.is_finite() && *x > lo && *x < hi).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * spec.half_width);
    let edges: Vec<f64> = std::iter::once(lo).chain(cuts).chain(std::iter::once(hi)).collect();

    let mut value = 0.0;
    let mut error = 0.0;
    let mut exceeded = false;
    for w in edges.windows(2) {
        match integrate_interval(&f, w[0], w[1], spec.rel_tol, spec.max_depth) {
            Ok(q) => {
                value += q.value;
                error += q.error;
            }
            Err(Error::DepthExceeded { estimate, error_bound }) => {
                exceeded = true;
                value += estimate;
                error += error_bound;
            }
            Err(e) => return Err(e),
        }
    }
    if exceeded {
        return Err(Error::DepthExceeded { estimate: value, error_bound: error });
    }
    Ok(Quadrature { value, error })
}

/// `∫_{−∞}^{∞} f` through the map `ν = center + scale·tan θ`.
///
/// Suited to integrands decaying at least like a Lorentzian; the endpoint
/// slivers `|θ| > (π/2)(1 − 1e-12)` are dropped.
pub fn integrate_real_line(
    f: impl Fn(f64) -> f64,
    center: f64,
    scale: f64,
    rel_tol: f64,
    max_depth: u32,
) -> Result<Quadrature> {
    if !(scale > 0.0) {
        return Err(Error::QuadratureSpec("scale must be positive"));
    }
    let edge = std::f64::consts::FRAC_PI_2 * (1.0 - 1e-12);
    let mapped = move |theta: f64| {
        let c = theta.cos();
        f(center + scale * theta.tan()) * scale / (c * c)
    };
    integrate_interval(&mapped, -edge, edge, rel_tol, max_depth)
}
