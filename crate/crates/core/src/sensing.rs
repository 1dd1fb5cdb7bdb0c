//! Frequency-integrated quantum Fisher information of the passive sensor,
//! its split into splitting and mean-frequency contributions, and the
//! Cramér–Rao bound.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{GaussianDerivative, GaussianMode};
use crate::model::{EpsilonConvention, ModeCoupling, PassiveParams};
use crate::numerics::{integrate_real_line, integrate_segments, Quadrature, QuadratureSpec};
use crate::scattering::{ds_deps, output_moments, InputField};

/// Default refinement depth of the frequency integrals.
pub const DEFAULT_MAX_DEPTH: u32 = 48;

/// Default relative tolerance of the frequency integrals.
pub const DEFAULT_REL_TOL: f64 = 1e-8;

/// Window centered on `ν_b` with half-width `max(10Γ, 50γ_b)`.
pub fn default_window(p: &PassiveParams, input: &InputField, rel_tol: f64) -> Result<QuadratureSpec> {
    QuadratureSpec::new(p.nu_b, (10.0 * input.bandwidth).max(50.0 * p.gamma_b), rel_tol, DEFAULT_MAX_DEPTH)
}

/// Breakpoints clustering around each pole so that narrow resonances are
/// always resolved.
pub fn resonance_breakpoints(poles: &[C64], input: &InputField) -> Vec<f64> {
    const MULTIPLES: [f64; 9] = [-100.0, -10.0, -3.0, -1.0, 0.0, 1.0, 3.0, 10.0, 100.0];
    let mut cuts = Vec::new();
    for z in poles {
        let width = z.im.abs().max(1e-9);
        cuts.extend(MULTIPLES.iter().map(|m| z.re + m * width));
    }
    let gw = 0.5 * input.bandwidth;
    cuts.extend([-10.0, -1.0, 0.0, 1.0, 10.0].iter().map(|m| input.center + m * gw));
    cuts
}

/// Per-frequency weight `4|α_ν|²/(2n̄_ν + 1)`.
pub fn signal_weight(nu: f64, input: &InputField) -> Result<f64> {
    let nbar = input.occupation(nu)?;
    Ok(4.0 * input.spectral_amplitude(nu).norm_sqr() / (2.0 * nbar + 1.0))
}

/// Integrand of the total QFI without the `1/2π`:
/// `4|α_ν|²/(2n̄_ν + 1) |dS_ν/dε|²`.
pub fn qfi_density(nu: f64, p: &PassiveParams, input: &InputField, conv: EpsilonConvention) -> Result<f64> {
    Ok(signal_weight(nu, input)? * ds_deps(nu, p, conv).norm_sqr())
}

/// `∂_ε` of the output moments at one frequency; the covariance does not
/// depend on `ε`.
pub fn output_moments_derivative(
    nu: f64,
    p: &PassiveParams,
    input: &InputField,
    conv: EpsilonConvention,
) -> GaussianDerivative {
    let d = input.spectral_amplitude(nu) * (-C64::i() * ds_deps(nu, p, conv));
    GaussianDerivative { dmean: [2f64.sqrt() * d.re, 2f64.sqrt() * d.im], dcov: [[0.0; 2]; 2] }
}

/// Output moments and their derivative, the input of the general Gaussian
/// QFI formula.
pub fn output_state_and_derivative(
    nu: f64,
    p: &PassiveParams,
    input: &InputField,
    conv: EpsilonConvention,
) -> Result<(GaussianMode, GaussianDerivative)> {
    Ok((output_moments(nu, p, input)?, output_moments_derivative(nu, p, input, conv)))
}

fn passive_breakpoints(p: &PassiveParams, input: &InputField) -> Vec<f64> {
    resonance_breakpoints(&p.coupling().eigenvalues(), input)
}

/// `F^ε = (1/2π) ∫ 4|α_ν|²/(2n̄_ν + 1) |dS_ν/dε|² dν` in the symmetric
/// convention.
pub fn qfi_total(p: &PassiveParams, input: &InputField, q: &QuadratureSpec) -> Result<f64> {
    qfi_total_with(p, input, q, EpsilonConvention::Symmetric)
}

pub fn qfi_total_with(
    p: &PassiveParams,
    input: &InputField,
    q: &QuadratureSpec,
    conv: EpsilonConvention,
) -> Result<f64> {
    qfi_total_quadrature(p, input, q, conv).map(|r| r.value)
}

/// [`qfi_total_with`] together with the quadrature error estimate.
pub fn qfi_total_quadrature(
    p: &PassiveParams,
    input: &InputField,
    q: &QuadratureSpec,
    conv: EpsilonConvention,
) -> Result<Quadrature> {
    p.validate()?;
    input.validate()?;
    let cuts = passive_breakpoints(p, input);
    let first_error = std::cell::RefCell::new(None);
    let integral = integrate_segments(
        |nu| match qfi_density(nu, p, input, conv) {
            Ok(v) => v,
            Err(e) => {
                first_error.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        q,
        &cuts,
    )?;
    if let Some(e) = first_error.into_inner() {
        return Err(e);
    }
    Ok(scaled(integral))
}

fn scaled(q: Quadrature) -> Quadrature {
    Quadrature { value: q.value / (2.0 * PI), error: q.error / (2.0 * PI) }
}

/// Decomposition of `F^ε` into splitting and mean-frequency contributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QfiBreakdown {
    pub f_eps: f64,
    /// Fisher information of the splitting `Δ`; zero at the EP.
    pub f_delta: f64,
    /// `(1/2π) ∫ w · 2 Re(A* B)`.
    pub cross_term: f64,
    /// `(1/2π) ∫ w |B|²`.
    pub f_nubar: f64,
    /// `|χ|²`; infinite at the EP.
    pub chi_sq: f64,
    /// `|χ|² F^Δ` integrated as one quantity, finite at the EP.
    pub f_chi: f64,
}

impl QfiBreakdown {
    /// `|χ|² F^Δ + cross + F^ν̄`.
    pub fn reconstructed(&self) -> f64 {
        self.f_chi + self.cross_term + self.f_nubar
    }
}

/// Closed-form pieces of `S_ν` written as
/// `γ_ex (ν − ν_b + iγ_b/2)/((ν − c)² − Δ²/4)`.
#[derive(Debug, Clone, Copy)]
pub struct SplittingDerivatives {
    /// `∂S/∂Δ = γ_ex N (Δ/2)/D²`.
    pub ds_ddelta: C64,
    /// `χ ∂S/∂Δ = γ_ex N (ε/2 − iγ/2)/D²`, finite at the EP.
    pub splitting_part: C64,
    /// `dS/dε − χ ∂S/∂Δ`.
    pub remainder: C64,
}

pub fn splitting_derivatives(nu: f64, p: &PassiveParams, conv: EpsilonConvention) -> SplittingDerivatives {
    let coupling: ModeCoupling = p.coupling();
    let [lp, lm] = coupling.eigenvalues();
    let z = C64::new(nu, 0.0);
    let n = C64::new(nu - p.nu_b, 0.5 * p.gamma_b);
    let d = (z - lp) * (z - lm);
    let d2 = d * d;
    let ds_ddelta = n * coupling.half_splitting() * p.gamma_ex / d2;
    let splitting_part = n * coupling.detuning_term() * p.gamma_ex / d2;
    let remainder = ds_deps(nu, p, conv) - splitting_part;
    SplittingDerivatives { ds_ddelta, splitting_part, remainder }
}

/// `S_ν` as a function of the splitting, the center `c` and `ν_b`, for
/// checking the closed-form derivatives.
pub fn scattering_in_splitting_form(nu: f64, p: &PassiveParams, delta: C64) -> C64 {
    let c = p.coupling().center();
    let z = C64::new(nu, 0.0) - c;
    C64::new(nu - p.nu_b, 0.5 * p.gamma_b) * p.gamma_ex / (z * z - delta * delta * 0.25)
}

pub fn qfi_splitting(p: &PassiveParams, input: &InputField, q: &QuadratureSpec) -> Result<QfiBreakdown> {
    qfi_splitting_with(p, input, q, EpsilonConvention::Symmetric)
}

pub fn qfi_splitting_with(
    p: &PassiveParams,
    input: &InputField,
    q: &QuadratureSpec,
    conv: EpsilonConvention,
) -> Result<QfiBreakdown> {
    p.validate()?;
    input.validate()?;
    let cuts = passive_breakpoints(p, input);
    let first_error = std::cell::RefCell::new(None);
    let weight = |nu: f64| match signal_weight(nu, input) {
        Ok(w) => w,
        Err(e) => {
            first_error.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let integrate = |f: &dyn Fn(f64) -> f64| integrate_segments(f, q, &cuts).map(|r| r.value / (2.0 * PI));

    let f_eps = integrate(&|nu| weight(nu) * ds_deps(nu, p, conv).norm_sqr())?;
    let f_delta = integrate(&|nu| weight(nu) * splitting_derivatives(nu, p, conv).ds_ddelta.norm_sqr())?;
    let f_chi = integrate(&|nu| weight(nu) * splitting_derivatives(nu, p, conv).splitting_part.norm_sqr())?;
    let cross_term = integrate(&|nu| {
        let s = splitting_derivatives(nu, p, conv);
        weight(nu) * 2.0 * (s.splitting_part.conj() * s.remainder).re
    })?;
    let f_nubar = integrate(&|nu| weight(nu) * splitting_derivatives(nu, p, conv).remainder.norm_sqr())?;
    if let Some(e) = first_error.into_inner() {
        return Err(e);
    }
    let chi_sq = match p.coupling().susceptibility() {
        Ok(chi) => chi.norm_sqr(),
        Err(Error::DivergentAtEp { .. }) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    Ok(QfiBreakdown { f_eps, f_delta, cross_term, f_nubar, chi_sq, f_chi })
}

/// Cramér–Rao sensitivity `η = 1/√(F · rate)`.
pub fn sensitivity_bound(f_eps: f64, reps_per_time: f64) -> Result<f64> {
    if f_eps == 0.0 {
        return Err(Error::ZeroInformation);
    }
    if !(f_eps > 0.0) || !(reps_per_time > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Fisher information and repetition rate must be positive, got {f_eps} and {reps_per_time}"
        )));
    }
    Ok(1.0 / (f_eps * reps_per_time).sqrt())
}

/// `(1/2π) ∫ |α_ν|² dν` over the whole real line; `2α²` analytically.
pub fn input_photon_number(input: &InputField, rel_tol: f64) -> Result<f64> {
    input.validate()?;
    let q = integrate_real_line(
        |nu| input.spectral_amplitude(nu).norm_sqr(),
        input.center,
        0.5 * input.bandwidth,
        rel_tol,
        DEFAULT_MAX_DEPTH,
    )?;
    Ok(q.value / (2.0 * PI))
}

/// Quantity tracked by [`scaling_analysis`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingQuantity {
    /// `|χ|²` against `|Δ|`.
    ChiSq,
    /// `F^Δ` against `|Δ|`.
    FDelta,
    /// `|χ|² F^Δ` against `|Δ|`.
    Product,
    /// `1 − |ψ_+† ψ_−|` against `|g − g_ep|`.
    OverlapDeficit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub r_squared: f64,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> Result<ScalingFit> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::InvalidParameter("log-log fit needs at least 3 paired points".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidParameter("log-log fit needs positive finite data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let exponent = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(ScalingFit { exponent, r_squared })
}

/// Log-log exponent of `quantity` as `g` approaches the EP from above at
/// `ε = 0`, using `offsets` as the values of `g − g_ep`.
///
/// Fails with [`Error::PoorFit`] when `r² < 0.99`, except for
/// [`ScalingQuantity::Product`], whose slope is that of the other two fits
/// combined and is expected to vanish.
pub fn scaling_analysis(
    base: &PassiveParams,
    input: &InputField,
    quantity: ScalingQuantity,
    offsets: &[f64],
    rel_tol: f64,
) -> Result<ScalingFit> {
    let mut xs = Vec::with_capacity(offsets.len());
    let mut ys = Vec::with_capacity(offsets.len());
    let centered = base.with_epsilon(0.0, EpsilonConvention::Symmetric);
    let (g_ep, _) = centered.coupling().ep_location();
    for &dg in offsets {
        let p = centered.with_g(g_ep + dg);
        let delta = p.coupling().splitting().norm();
        let (x, y) = match quantity {
            ScalingQuantity::OverlapDeficit => (dg.abs(), 1.0 - p.coupling().overlap()),
            ScalingQuantity::ChiSq => (delta, p.coupling().susceptibility()?.norm_sqr()),
            ScalingQuantity::FDelta | ScalingQuantity::Product => {
                let q = default_window(&p, input, rel_tol)?;
                let b = qfi_splitting(&p, input, &q)?;
                let y = if quantity == ScalingQuantity::FDelta { b.f_delta } else { b.chi_sq * b.f_delta };
                (delta, y)
            }
        };
        xs.push(x);
        ys.push(y);
    }
    let fit = log_log_fit(&xs, &ys)?;
    // r² carries no information when the expected slope is zero
    if quantity != ScalingQuantity::Product && fit.r_squared < 0.99 {
        return Err(Error::PoorFit { exponent: fit.exponent, r_squared: fit.r_squared });
    }
    Ok(fit)
}

/// `count` log-spaced offsets spanning `[lo, hi]`.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::qfi_analytic;
    use crate::numerics::{central_diff, central_diff_real};
    use crate::scattering::scattering_amplitude;

    fn reference_input() -> InputField {
        InputField::coherent(1000.0, 200.0, 0.0)
    }

    fn window(p: &PassiveParams) -> QuadratureSpec {
        default_window(p, &reference_input(), 1e-10).unwrap()
    }

    #[test]
    fn trivial_zeros() {
        let p = PassiveParams::reference(2.4);
        let dark = InputField::coherent(0.0, 200.0, 0.0);
        assert_eq!(qfi_total(&p, &dark, &window(&p)).unwrap(), 0.0);
        let mut closed = p;
        closed.gamma_ex = 0.0;
        assert_eq!(qfi_total(&closed, &reference_input(), &window(&closed)).unwrap(), 0.0);
    }

    #[test]
    fn window_defaults() {
        let p = PassiveParams::reference(2.4);
        let q = default_window(&p, &reference_input(), 1e-8).unwrap();
        assert_eq!(q.center, 0.0);
        assert_eq!(q.half_width, 2000.0);
        let narrow = InputField::coherent(1.0, 1.0, 0.0);
        assert_eq!(default_window(&p, &narrow, 1e-8).unwrap().half_width, 50.0);
    }

    #[test]
    fn density_matches_gaussian_formula() {
        for g in [0.5, 1.025, 2.4] {
            let p = PassiveParams::reference(g);
            for nu in [-30.0, -1.0, 0.0, 0.7, 5.0] {
                let direct = qfi_density(nu, &p, &reference_input(), EpsilonConvention::Symmetric).unwrap();
                let (m, dm) = output_state_and_derivative(nu, &p, &reference_input(), EpsilonConvention::Symmetric).unwrap();
                let general = qfi_analytic(&m, &dm).unwrap();
                assert!((direct - general).abs() <= 1e-10 * direct, "g={g} nu={nu}");
            }
        }
    }

    #[test]
    fn total_scales_with_alpha_squared() {
        let p = PassiveParams::reference(2.4);
        let f1 = qfi_total(&p, &InputField::coherent(10.0, 200.0, 0.0), &window(&p)).unwrap();
        let f2 = qfi_total(&p, &InputField::coherent(30.0, 200.0, 0.0), &window(&p)).unwrap();
        assert!(f1 > 0.0);
        assert!((f2 / f1 - 9.0).abs() < 1e-9);
        let eta1 = sensitivity_bound(f1, 1.0).unwrap();
        let eta2 = sensitivity_bound(f2, 1.0).unwrap();
        assert!((eta1 / eta2 - 3.0).abs() < 1e-9);
    }

    #[test]
    fn splitting_derivative_matches_finite_difference() {
        let p = PassiveParams::reference(2.4).with_epsilon(0.2, EpsilonConvention::Symmetric);
        let delta0 = p.coupling().splitting();
        for nu in [-2.0, 0.0, 1.3] {
            let fd = central_diff(|t| scattering_in_splitting_form(nu, &p, delta0 + t), 0.0, 1e-4);
            let s = splitting_derivatives(nu, &p, EpsilonConvention::Symmetric);
            assert!((fd - s.ds_ddelta).norm() <= 1e-8 * s.ds_ddelta.norm());
            assert!((scattering_in_splitting_form(nu, &p, delta0) - scattering_amplitude(nu, &p)).norm() < 1e-14);
        }
    }

    #[test]
    fn breakdown_reconstructs_total() {
        for g in [0.6, 1.025, 1.2, 2.4] {
            let p = PassiveParams::reference(g);
            let q = window(&p);
            let b = qfi_splitting(&p, &reference_input(), &q).unwrap();
            let direct = qfi_total(&p, &reference_input(), &q).unwrap();
            assert!((b.f_eps - direct).abs() <= 1e-9 * direct);
            assert!((b.reconstructed() - b.f_eps).abs() <= 1e-6 * b.f_eps, "g={g}");
            if b.chi_sq.is_finite() {
                assert!((b.chi_sq * b.f_delta - b.f_chi).abs() <= 1e-8 * b.f_chi.max(1e-300));
            }
        }
    }

    #[test]
    fn splitting_information_vanishes_at_ep() {
        let p = PassiveParams::reference(1.025);
        let b = qfi_splitting(&p, &reference_input(), &window(&p)).unwrap();
        assert!(b.f_delta.abs() <= 1e-12 * b.f_eps);
        assert!(b.chi_sq.is_infinite());
        let far = PassiveParams::reference(2.4);
        assert!(qfi_splitting(&far, &reference_input(), &window(&far)).unwrap().f_delta > 0.0);
    }

    #[test]
    fn total_continuous_across_ep() {
        let f = |g: f64| {
            let p = PassiveParams::reference(g);
            qfi_total(&p, &reference_input(), &window(&p)).unwrap()
        };
        let slope = central_diff_real(f, 1.025, 1e-2).abs();
        for h in [1e-4, 1e-3, 1e-2] {
            assert!((f(1.025 + h) - f(1.025 - h)).abs() <= 4.0 * slope * h + 1e-9 * f(1.025));
        }
    }

    #[test]
    fn sensitivity_bound_cases() {
        assert_eq!(sensitivity_bound(4.0, 1.0).unwrap(), 0.5);
        assert!(matches!(sensitivity_bound(0.0, 1.0), Err(Error::ZeroInformation)));
        assert!(sensitivity_bound(1.0, 0.0).is_err());
    }

    #[test]
    fn lorentzian_norm() {
        let n = input_photon_number(&reference_input(), 1e-10).unwrap();
        assert!((n / 2e6 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn fit_recovers_power_law() {
        let xs = log_spaced(1e-3, 1e-1, 7);
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-1.5)).collect();
        let fit = log_log_fit(&xs, &ys).unwrap();
        assert!((fit.exponent + 1.5).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn poor_fit_is_flagged() {
        let p = PassiveParams::reference(2.4);
        // far from the EP the overlap deficit does not follow a power law
        let offsets = [1e-4, 0.5, 1.0, 2.0, 50.0];
        let r = scaling_analysis(&p, &reference_input(), ScalingQuantity::OverlapDeficit, &offsets, 1e-8);
        assert!(matches!(r, Err(Error::PoorFit { .. })), "{r:?}");
    }

    #[test]
    fn susceptibility_scaling_exponent() {
        let p = PassiveParams::reference(2.4);
        let fit =
            scaling_analysis(&p, &reference_input(), ScalingQuantity::ChiSq, &log_spaced(1e-4, 1e-2, 9), 1e-8).unwrap();
        assert!((fit.exponent + 2.0).abs() < 0.05);
    }
}
