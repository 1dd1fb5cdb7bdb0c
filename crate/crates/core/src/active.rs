//! Active–passive system: cavity `b` loaded with an inverted gain medium,
//! either as an explicit third mode or adiabatically eliminated into an
//! effective negative decay rate.
//!
//! The gain-medium mode sits at `ν_b` and follows it when the detuning is
//! varied.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EpsilonConvention, ModeCoupling, PassiveParams};
use crate::numerics::{eigenvalues, integrate_segments, ComplexMatrix, Quadrature, QuadratureSpec};
use crate::scattering::InputField;
use crate::sensing::resonance_breakpoints;

/// Which description of the gain medium to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainModel {
    /// Explicit three-mode coefficient matrix.
    #[default]
    Full3,
    /// Gain mode eliminated; cavity `b` decays at `γ_b′`.
    Adiabatic,
}

/// Two-level gain ensemble coupled to cavity `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainParams {
    pub n_total: f64,
    pub gamma_1: f64,
    pub g_gain: f64,
    pub kappa: f64,
    /// Population inversion `S_z = N_e − N_g`.
    pub s_z: f64,
}

impl GainParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.n_total, self.gamma_1, self.g_gain, self.kappa, self.s_z];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("gain parameters must be finite".into()));
        }
        if !(self.kappa > 0.0) {
            return Err(Error::InvalidParameter(format!("kappa must be > 0, got {}", self.kappa)));
        }
        if self.g_gain < 0.0 {
            return Err(Error::InvalidParameter(format!("g_gain must be >= 0, got {}", self.g_gain)));
        }
        if self.gamma_1 < 0.0 {
            return Err(Error::InvalidParameter(format!("gamma_1 must be >= 0, got {}", self.gamma_1)));
        }
        if self.s_z < 0.0 || self.s_z > self.n_total {
            return Err(Error::InvalidParameter(format!(
                "s_z must lie in [0, n_total = {}], got {}",
                self.n_total, self.s_z
            )));
        }
        Ok(())
    }

    /// `N_e = (N + S_z)/2`.
    pub fn n_excited(&self) -> f64 {
        0.5 * (self.n_total + self.s_z)
    }

    /// `N_g = (N − S_z)/2`.
    pub fn n_ground(&self) -> f64 {
        0.5 * (self.n_total - self.s_z)
    }

    /// Occupation `N_g/S_z` of the gain-noise input.
    pub fn noise_occupation(&self) -> f64 {
        self.n_ground() / self.s_z
    }

    /// Amplification rate `4 S_z g_G²/κ`.
    pub fn gain_rate(&self) -> f64 {
        4.0 * self.s_z * self.g_gain * self.g_gain / self.kappa
    }

    fn is_active(&self) -> bool {
        self.s_z > 0.0 && self.g_gain > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActiveSystem {
    pub passive: PassiveParams,
    pub gain: GainParams,
}

impl ActiveSystem {
    pub fn new(passive: PassiveParams, gain: GainParams) -> Result<Self> {
        let a = Self { passive, gain };
        a.validate()?;
        Ok(a)
    }

    /// Parameters of the gain sweep in the figures at inversion `s_z`:
    /// `g = 2.4`, `κ = 100`, `g_G = 1e-5`, `N = 2e12`, `γ_1 = 0.01`.
    pub fn reference(s_z: f64) -> Self {
        Self {
            passive: PassiveParams::reference(2.4),
            gain: GainParams { n_total: 2e12, gamma_1: 0.01, g_gain: 1e-5, kappa: 100.0, s_z },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.passive.validate()?;
        self.gain.validate()
    }

    pub fn with_s_z(mut self, s_z: f64) -> Self {
        self.gain.s_z = s_z;
        self
    }

    pub fn with_epsilon(mut self, eps: f64, conv: EpsilonConvention) -> Self {
        self.passive = self.passive.with_epsilon(eps, conv);
        self
    }

    /// The adiabatically eliminated two-mode system.
    pub fn effective_coupling(&self) -> ModeCoupling {
        let mut c = self.passive.coupling();
        c.loss_b = effective_gamma_b(self);
        c
    }
}

/// `γ_b′ = γ_b − 4 S_z g_G²/κ`.
pub fn effective_gamma_b(a: &ActiveSystem) -> f64 {
    a.passive.gamma_b - a.gain.gain_rate()
}

/// Closed-form lasing threshold of the resonant system.
pub fn lasing_threshold(a: &ActiveSystem) -> f64 {
    let p = &a.passive;
    let ga = p.gamma_a_eff();
    let prefactor = a.gain.kappa / (4.0 * a.gain.g_gain * a.gain.g_gain);
    if p.g < 0.5 * ga {
        prefactor * (4.0 * p.g * p.g / ga + p.gamma_b)
    } else {
        prefactor * (ga + p.gamma_b)
    }
}

/// Inversion at which the effective two-mode system has its EP,
/// `γ_b′ = γ_a′ − 4g`.
pub fn ep_inversion(a: &ActiveSystem) -> f64 {
    let p = &a.passive;
    let target = p.gamma_a_eff() - 4.0 * p.g;
    (p.gamma_b - target) * a.gain.kappa / (4.0 * a.gain.g_gain * a.gain.g_gain)
}

pub fn coefficient_matrix_3mode(a: &ActiveSystem) -> ComplexMatrix {
    let p = &a.passive;
    let c = (a.gain.s_z.sqrt() * a.gain.g_gain, 0.0);
    let z = C64::new(0.0, 0.0);
    let g = C64::new(p.g, 0.0);
    ComplexMatrix::from_rows(&[
        [C64::new(p.nu_a, -0.5 * p.gamma_a_eff()), g, z],
        [g, C64::new(p.nu_b, -0.5 * p.gamma_b), C64::new(c.0, c.1)],
        [z, C64::new(-c.0, -c.1), C64::new(p.nu_b, -0.5 * a.gain.kappa)],
    ])
    .expect("3×3 is a valid dimension")
}

/// Two-mode matrix with cavity `b` decaying at `γ_b′`.
pub fn effective_matrix_2mode(a: &ActiveSystem) -> ComplexMatrix {
    let p = &a.passive;
    let slowest = p.gamma_a_eff().max(p.gamma_b);
    if a.gain.kappa < 10.0 * slowest {
        log::warn!(
            "adiabatic elimination with kappa = {} not well separated from cavity rates (max {})",
            a.gain.kappa,
            slowest
        );
    }
    a.effective_coupling().matrix()
}

fn model_matrix(a: &ActiveSystem, model: GainModel) -> ComplexMatrix {
    match model {
        GainModel::Full3 => coefficient_matrix_3mode(a),
        GainModel::Adiabatic => a.effective_coupling().matrix(),
    }
}

/// Complex eigenfrequencies of the chosen model.
pub fn eigenfrequencies(a: &ActiveSystem, model: GainModel) -> Result<Vec<C64>> {
    match model {
        GainModel::Full3 => eigenvalues(&coefficient_matrix_3mode(a)),
        GainModel::Adiabatic => Ok(a.effective_coupling().eigenvalues().to_vec()),
    }
}

/// Largest `Im ν_i`; non-negative at or above threshold.
pub fn max_growth(a: &ActiveSystem, model: GainModel) -> Result<f64> {
    Ok(eigenfrequencies(a, model)?.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max))
}

pub fn check_below_threshold(a: &ActiveSystem, model: GainModel) -> Result<()> {
    let growth = max_growth(a, model)?;
    if growth >= 0.0 {
        return Err(Error::AboveThreshold { max_growth: growth });
    }
    Ok(())
}

/// Scattering amplitude, gain-modified occupation and their
/// `ε`-derivatives at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActiveResponse {
    pub s: C64,
    pub ds: C64,
    pub nbar_prime: f64,
    pub dnbar_prime: f64,
}

fn inverse_and_derivative(
    nu: f64,
    a: &ActiveSystem,
    model: GainModel,
    conv: EpsilonConvention,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let m = model_matrix(a, model);
    let inv = match m.shifted(C64::new(nu, 0.0)).inverse() {
        Ok(inv) => inv,
        Err(Error::Singular { .. }) => return Err(Error::SingularAtFrequency { nu }),
        Err(e) => return Err(e),
    };
    let (da, db) = conv.shifts();
    let mut diag = vec![C64::new(da, 0.0), C64::new(db, 0.0)];
    if model == GainModel::Full3 {
        diag.push(C64::new(db, 0.0));
    }
    let dm = ComplexMatrix::from_diagonal(&diag)?;
    // ∂(νI − M)⁻¹ = (νI − M)⁻¹ ∂M (νI − M)⁻¹
    let dinv = &(&inv * &dm) * &inv;
    Ok((inv, dinv))
}

/// Evaluate the response without the threshold check; callers integrating
/// over frequency check once up front.
fn response_unchecked(
    nu: f64,
    a: &ActiveSystem,
    input: &InputField,
    model: GainModel,
    conv: EpsilonConvention,
) -> Result<ActiveResponse> {
    let nbar = input.occupation(nu)?;
    let (inv, dinv) = inverse_and_derivative(nu, a, model, conv)?;
    let gex = a.passive.gamma_ex;
    let s = inv[(0, 0)] * gex;
    let ds = dinv[(0, 0)] * gex;
    let (nbar_prime, dnbar_prime) = if a.gain.is_active() {
        let source = nbar + a.gain.n_excited() / a.gain.s_z;
        let (weight, z, dz) = match model {
            GainModel::Full3 => (gex * a.gain.kappa * source, inv[(0, 2)], dinv[(0, 2)]),
            GainModel::Adiabatic => (gex * a.gain.gain_rate() * source, inv[(0, 1)], dinv[(0, 1)]),
        };
        (nbar + weight * z.norm_sqr(), weight * 2.0 * (z.conj() * dz).re)
    } else {
        (nbar, 0.0)
    };
    Ok(ActiveResponse { s, ds, nbar_prime, dnbar_prime })
}

pub fn response(
    nu: f64,
    a: &ActiveSystem,
    input: &InputField,
    model: GainModel,
    conv: EpsilonConvention,
) -> Result<ActiveResponse> {
    a.validate()?;
    check_below_threshold(a, model)?;
    response_unchecked(nu, a, input, model, conv)
}

/// `S_ν = γ_ex ((νI − M)⁻¹)₁₁`.
pub fn scattering_amplitude_active(nu: f64, a: &ActiveSystem, model: GainModel) -> Result<C64> {
    a.validate()?;
    check_below_threshold(a, model)?;
    let (inv, _) = inverse_and_derivative(nu, a, model, EpsilonConvention::Symmetric)?;
    Ok(inv[(0, 0)] * a.passive.gamma_ex)
}

/// Output occupation including amplified gain-medium noise.
pub fn modified_occupation(nu: f64, a: &ActiveSystem, input: &InputField, model: GainModel) -> Result<f64> {
    Ok(response(nu, a, input, model, EpsilonConvention::Symmetric)?.nbar_prime)
}

/// Occupation with the noise transfer written as `g G_a G_b⁽⁰⁾`, where the
/// free propagator of `b` keeps the bare decay `γ_b`; for comparison with
/// [`modified_occupation`].
pub fn modified_occupation_main_text(nu: f64, a: &ActiveSystem, input: &InputField) -> Result<f64> {
    a.validate()?;
    check_below_threshold(a, GainModel::Adiabatic)?;
    let nbar = input.occupation(nu)?;
    if !a.gain.is_active() {
        return Ok(nbar);
    }
    let (inv, _) = inverse_and_derivative(nu, a, GainModel::Adiabatic, EpsilonConvention::Symmetric)?;
    let gb0 = C64::new(nu - a.passive.nu_b, 0.5 * a.passive.gamma_b).inv();
    let transfer = inv[(0, 0)] * gb0 * a.passive.g;
    let source = nbar + a.gain.n_excited() / a.gain.s_z;
    Ok(nbar + a.passive.gamma_ex * a.gain.gain_rate() * source * transfer.norm_sqr())
}

/// Integrand of the active QFI without `1/2π`, given `weight = 4|α_ν|²`.
pub fn qfi_active_density(r: &ActiveResponse, weight: f64) -> f64 {
    let n = r.nbar_prime;
    let signal = weight / (2.0 * n + 1.0) * r.ds.norm_sqr();
    let noise = if r.dnbar_prime == 0.0 { 0.0 } else { r.dnbar_prime * r.dnbar_prime / (n * (n + 1.0)) };
    signal + noise
}

/// `F^ε` of the active system in the symmetric convention.
pub fn qfi_active(a: &ActiveSystem, input: &InputField, q: &QuadratureSpec, model: GainModel) -> Result<f64> {
    qfi_active_with(a, input, q, model, EpsilonConvention::Symmetric)
}

pub fn qfi_active_with(
    a: &ActiveSystem,
    input: &InputField,
    q: &QuadratureSpec,
    model: GainModel,
    conv: EpsilonConvention,
) -> Result<f64> {
    qfi_active_quadrature(a, input, q, model, conv).map(|r| r.value)
}

/// [`qfi_active_with`] together with the quadrature error estimate.
pub fn qfi_active_quadrature(
    a: &ActiveSystem,
    input: &InputField,
    q: &QuadratureSpec,
    model: GainModel,
    conv: EpsilonConvention,
) -> Result<Quadrature> {
    a.validate()?;
    input.validate()?;
    let poles = eigenfrequencies(a, model)?;
    if let Some(growth) = poles.iter().map(|z| z.im).reduce(f64::max) {
        if growth >= 0.0 {
            return Err(Error::AboveThreshold { max_growth: growth });
        }
    }
    let cuts = resonance_breakpoints(&poles, input);
    let first_error = std::cell::RefCell::new(None);
    let integral = integrate_segments(
        |nu| {
            let eval = || -> Result<f64> {
                let r = response_unchecked(nu, a, input, model, conv)?;
                Ok(qfi_active_density(&r, 4.0 * input.spectral_amplitude(nu).norm_sqr()))
            };
            eval().unwrap_or_else(|e| {
                first_error.borrow_mut().get_or_insert(e);
                0.0
            })
        },
        q,
        &cuts,
    )?;
    if let Some(e) = first_error.into_inner() {
        return Err(e);
    }
    Ok(Quadrature { value: integral.value / (2.0 * PI), error: integral.error / (2.0 * PI) })
}

/// Lowest inversion in `[0, N]` at which an eigenfrequency with real part in
/// `nu_window` reaches the real axis, or `None` if the system stays below
/// threshold over the whole range.
pub fn singularity_scan(a: &ActiveSystem, nu_window: (f64, f64), model: GainModel) -> Result<Option<f64>> {
    a.validate()?;
    let (lo_nu, hi_nu) = nu_window;
    let lasing = |s: f64| -> Result<bool> {
        let ev = eigenfrequencies(&a.with_s_z(s), model)?;
        Ok(ev.iter().any(|z| z.im >= 0.0 && z.re >= lo_nu && z.re <= hi_nu))
    };
    const COARSE: usize = 400;
    let top = a.gain.n_total;
    let mut prev = 0.0;
    if lasing(prev)? {
        return Ok(Some(0.0));
    }
    for k in 1..=COARSE {
        let s = top * k as f64 / COARSE as f64;
        if lasing(s)? {
            let (mut lo, mut hi) = (prev, s);
            while hi - lo > 1e-13 * hi {
                let mid = 0.5 * (lo + hi);
                if lasing(mid)? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Some(0.5 * (lo + hi)));
        }
        prev = s;
    }
    Ok(None)
}
