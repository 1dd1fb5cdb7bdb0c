//! Frequency-domain input-output relations of the passive system.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EpsilonConvention, PassiveParams};
use crate::numerics::ComplexMatrix;

pub use crate::gaussian::GaussianMode;

/// Coherent (optionally thermal) Lorentzian input pulse in the waveguide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputField {
    pub alpha: f64,
    pub bandwidth: f64,
    pub center: f64,
    /// `f64::INFINITY` means zero temperature.
    pub inv_temperature: f64,
}

impl InputField {
    pub fn new(alpha: f64, bandwidth: f64, center: f64, inv_temperature: f64) -> Result<Self> {
        let f = Self { alpha, bandwidth, center, inv_temperature };
        f.validate()?;
        Ok(f)
    }

    /// Zero-temperature input centered at `center`.
    pub fn coherent(alpha: f64, bandwidth: f64, center: f64) -> Self {
        Self { alpha, bandwidth, center, inv_temperature: f64::INFINITY }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(Error::InvalidParameter(format!("bandwidth must be > 0, got {}", self.bandwidth)));
        }
        if !self.alpha.is_finite() || !self.center.is_finite() {
            return Err(Error::InvalidParameter("alpha and center must be finite".into()));
        }
        if !(self.inv_temperature > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "inv_temperature must be in (0, inf], got {}",
                self.inv_temperature
            )));
        }
        Ok(())
    }

    /// `α_ν = α √(2Γ)/(ν − ν₀ + iΓ/2)`.
    pub fn spectral_amplitude(&self, nu: f64) -> C64 {
        C64::new(self.alpha * (2.0 * self.bandwidth).sqrt(), 0.0) / C64::new(nu - self.center, 0.5 * self.bandwidth)
    }

    pub fn occupation(&self, nu: f64) -> Result<f64> {
        thermal_occupation(nu, self.inv_temperature)
    }
}

/// Waveguide coupling rate of each system mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortCouplings {
    pub rates: Vec<f64>,
}

impl PortCouplings {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if rates.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
            return Err(Error::InvalidParameter("port rates must be finite and >= 0".into()));
        }
        Ok(Self { rates })
    }

    /// Rate `gamma_ex` on mode 0 and nothing elsewhere.
    pub fn single(dim: usize, gamma_ex: f64) -> Result<Self> {
        let mut rates = vec![0.0; dim];
        if let Some(r) = rates.first_mut() {
            *r = gamma_ex;
        }
        Self::new(rates)
    }
}

/// Coefficients of `c_out(ν)` in terms of the input operators.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringCoefficients {
    /// Multiplies the waveguide input `c_in(ν)`.
    pub direct: C64,
    /// Entry `l` multiplies the mode-`l` bath input `o_l^in(ν)/√(2π)`.
    pub modes: Vec<C64>,
}

impl ScatteringCoefficients {
    /// `[direct, modes...]`.
    pub fn to_vec(&self) -> Vec<C64> {
        std::iter::once(self.direct).chain(self.modes.iter().copied()).collect()
    }
}

/// `(e^{βν} − 1)^{−1}`; zero at `β = ∞`.
pub fn thermal_occupation(nu: f64, beta: f64) -> Result<f64> {
    if beta == f64::INFINITY {
        return Ok(0.0);
    }
    if !(nu > 0.0) {
        return Err(Error::NonPositiveFrequency { nu });
    }
    Ok(1.0 / (beta * nu).exp_m1())
}

/// `G_b⁽⁰⁾(ν) = 1/(ν − ν_b + iγ_b/2)`.
pub fn free_propagator_b(nu: f64, p: &PassiveParams) -> C64 {
    C64::new(nu - p.nu_b, 0.5 * p.gamma_b).inv()
}

/// `G_a(ν) = 1/(ν − ν_a + iγ_a′/2 − g² G_b⁽⁰⁾(ν))`.
pub fn dressed_propagator_a(nu: f64, p: &PassiveParams) -> C64 {
    let gb = free_propagator_b(nu, p);
    (C64::new(nu - p.nu_a, 0.5 * p.gamma_a_eff()) - gb * (p.g * p.g)).inv()
}

/// `G_a` through the eigenfrequencies, `(ν − ν_b + iγ_b/2)/((ν − ν_+)(ν − ν_−))`.
pub fn dressed_propagator_a_rational(nu: f64, p: &PassiveParams) -> C64 {
    let [lp, lm] = p.coupling().eigenvalues();
    let z = C64::new(nu, 0.0);
    C64::new(nu - p.nu_b, 0.5 * p.gamma_b) / ((z - lp) * (z - lm))
}

/// `S_ν = γ_ex G_a(ν)`; the waveguide output is `(1 − iS_ν) c_in`.
pub fn scattering_amplitude(nu: f64, p: &PassiveParams) -> C64 {
    dressed_propagator_a(nu, p) * p.gamma_ex
}

/// Output quadrature mean and covariance at frequency `nu`.
pub fn output_moments(nu: f64, p: &PassiveParams, input: &InputField) -> Result<GaussianMode> {
    let nbar = input.occupation(nu)?;
    let out = input.spectral_amplitude(nu) * (C64::new(1.0, 0.0) - C64::i() * scattering_amplitude(nu, p));
    let v = nbar + 0.5;
    Ok(GaussianMode { mean: [2f64.sqrt() * out.re, 2f64.sqrt() * out.im], cov: [[v, 0.0], [0.0, v]] })
}

/// Waveguide output of an arbitrary linear system with coefficient matrix
/// `m` coupled to the waveguide through `ports`.
pub fn generic_scattering(nu: f64, m: &ComplexMatrix, ports: &PortCouplings) -> Result<ScatteringCoefficients> {
    let n = m.dim();
    if ports.rates.len() != n {
        return Err(Error::Shape { expected: n, got: ports.rates.len() });
    }
    let inv = match m.shifted(C64::new(nu, 0.0)).inverse() {
        Ok(inv) => inv,
        Err(Error::Singular { .. }) => return Err(Error::SingularAtFrequency { nu }),
        Err(e) => return Err(e),
    };
    let roots: Vec<f64> = ports.rates.iter().map(|r| r.sqrt()).collect();
    let modes: Vec<C64> = (0..n).map(|l| (0..n).map(|j| inv[(l, j)] * roots[j]).sum()).collect();
    let loop_sum: C64 = (0..n).map(|l| modes[l] * roots[l]).sum();
    Ok(ScatteringCoefficients { direct: C64::new(1.0, 0.0) - C64::i() * loop_sum, modes })
}

/// `dS_ν/dε = γ_ex G_a² (∂ν_a/∂ε + g² (G_b⁽⁰⁾)² ∂ν_b/∂ε)`.
pub fn ds_deps(nu: f64, p: &PassiveParams, conv: EpsilonConvention) -> C64 {
    let (da, db) = conv.shifts();
    let ga = dressed_propagator_a(nu, p);
    let gb = free_propagator_b(nu, p);
    ga * ga * p.gamma_ex * (gb * gb * (p.g * p.g * db) + da)
}

/// [`ds_deps`] in the default symmetric convention.
pub fn ds_deps_analytic(nu: f64, p: &PassiveParams) -> C64 {
    ds_deps(nu, p, EpsilonConvention::Symmetric)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::central_diff;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn occupation_values() {
        assert_eq!(thermal_occupation(3.0, f64::INFINITY).unwrap(), 0.0);
        assert_eq!(thermal_occupation(-3.0, f64::INFINITY).unwrap(), 0.0);
        assert!((thermal_occupation(2f64.ln(), 1.0).unwrap() - 1.0).abs() < 1e-14);
        let direct = 1.0 / (0.1f64.exp() - 1.0);
        assert!((thermal_occupation(0.1, 1.0).unwrap() - direct).abs() < 1e-12);
        assert!((thermal_occupation(0.1, 1.0).unwrap() - 9.5083).abs() < 1e-4);
        assert!(matches!(thermal_occupation(0.0, 2.0), Err(Error::NonPositiveFrequency { .. })));
    }

    #[test]
    fn free_propagator_values() {
        let p = PassiveParams::new(0.0, 0.3, 5.0, 2.0, 0.1, 1.0).unwrap();
        assert!((free_propagator_b(0.3, &p) - c(0.0, -1.0)).norm() < 1e-15);
        assert!((free_propagator_b(1.3, &p) - c(0.5, -0.5)).norm() < 1e-15);
        let far = free_propagator_b(1e8, &p);
        assert!((far * 1e8 - c(1.0, 0.0)).norm() < 1e-7);
    }

    #[test]
    fn dressed_propagator_values() {
        let p = PassiveParams::reference(0.0);
        assert!((dressed_propagator_a(0.7, &p) - c(0.7, 2.55).inv()).norm() < 1e-15);
        let ep = PassiveParams::reference(1.025);
        let ga = dressed_propagator_a(0.0, &ep);
        assert!((ga - c(0.0, -1.0 / (2.55 + 2.10125))).norm() < 1e-12);
        assert!((ga.im + 0.214996).abs() < 1e-6);
        assert!((scattering_amplitude(0.0, &ep).im + 0.0214996).abs() < 1e-7);
    }

    #[test]
    fn rational_form_identity() {
        for g in [0.3, 1.025, 2.4] {
            let p = PassiveParams::reference(g).with_epsilon(0.2, EpsilonConvention::Symmetric);
            for k in -20..=20 {
                let nu = 0.37 * k as f64;
                let a = dressed_propagator_a(nu, &p);
                let b = dressed_propagator_a_rational(nu, &p);
                assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0), "g={g} nu={nu}");
            }
        }
    }

    #[test]
    fn output_moments_limits() {
        let p = PassiveParams::reference(1.2);
        let vac = InputField::new(0.0, 10.0, 0.0, 2.0).unwrap();
        let m = output_moments(0.5, &p, &vac).unwrap();
        assert_eq!(m.mean, [0.0, 0.0]);
        let v = thermal_occupation(0.5, 2.0).unwrap() + 0.5;
        assert_eq!(m.cov, [[v, 0.0], [0.0, v]]);

        let mut opaque = p;
        opaque.gamma_ex = 0.0;
        let input = InputField::coherent(3.0, 4.0, 0.2);
        let a = input.spectral_amplitude(1.1);
        let m = output_moments(1.1, &opaque, &input).unwrap();
        assert_eq!(m.mean, [2f64.sqrt() * a.re, 2f64.sqrt() * a.im]);
        assert_eq!(m.cov, [[0.5, 0.0], [0.0, 0.5]]);
    }

    #[test]
    fn output_moments_reference_point() {
        let p = PassiveParams::reference(1.025);
        let input = InputField::coherent(1000.0, 200.0, 0.0);
        assert!((input.spectral_amplitude(0.0) - c(0.0, -200.0)).norm() < 1e-10);
        let s = scattering_amplitude(0.0, &p);
        let expected = c(0.0, -200.0) * (c(1.0, 0.0) - C64::i() * s);
        let m = output_moments(0.0, &p, &input).unwrap();
        assert!((m.mean[0] - 2f64.sqrt() * expected.re).abs() < 1e-10);
        assert!((m.mean[1] - 2f64.sqrt() * expected.im).abs() < 1e-10);
        // 1 − iS = 1 − 0.0214996
        assert!((m.mean[1] / 2f64.sqrt() + 200.0 * (1.0 - 0.0214996)).abs() < 1e-4);
    }

    #[test]
    fn generic_scattering_zero_ports_is_identity() {
        let p = PassiveParams::reference(2.0);
        let out =
            generic_scattering(0.4, &p.coupling().matrix(), &PortCouplings::new(vec![0.0, 0.0]).unwrap()).unwrap();
        assert_eq!(out.direct, c(1.0, 0.0));
        assert!(out.modes.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn generic_scattering_matches_passive() {
        for g in [0.4, 1.025, 2.4] {
            let p = PassiveParams::reference(g);
            let ports = PortCouplings::single(2, p.gamma_ex).unwrap();
            for nu in [-3.0, -0.2, 0.0, 0.9, 4.0] {
                let out = generic_scattering(nu, &p.coupling().matrix(), &ports).unwrap();
                let expected = c(1.0, 0.0) - C64::i() * scattering_amplitude(nu, &p);
                assert!((out.direct - expected).norm() < 1e-12);
                assert!((out.modes[0] - dressed_propagator_a(nu, &p) * p.gamma_ex.sqrt()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn generic_scattering_flags_singular_frequency() {
        // lossless single mode at ν = 1
        let m = ComplexMatrix::from_rows(&[[c(1.0, 0.0)]]).unwrap();
        let ports = PortCouplings::new(vec![0.5]).unwrap();
        assert!(matches!(generic_scattering(1.0, &m, &ports), Err(Error::SingularAtFrequency { .. })));
        assert!(matches!(
            generic_scattering(0.0, &m, &PortCouplings::new(vec![0.5, 0.1]).unwrap()),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let base = PassiveParams::reference(1.3);
        for conv in [EpsilonConvention::Symmetric, EpsilonConvention::CavityAOnly] {
            for (eps, nu) in [(0.0, 0.0), (0.05, -0.6), (-0.3, 1.4)] {
                let p = base.with_epsilon(eps, conv);
                let fd = central_diff(|e| scattering_amplitude(nu, &p.with_epsilon(e, conv)), eps, 1e-3);
                let exact = ds_deps(nu, &p, conv);
                assert!((fd - exact).norm() <= 1e-7 * exact.norm(), "{conv:?} eps={eps} nu={nu}");
            }
        }
    }

    #[test]
    fn derivative_decoupled_limit() {
        let p = PassiveParams::reference(0.0);
        let ga = dressed_propagator_a(0.3, &p);
        assert!((ds_deps_analytic(0.3, &p) - ga * ga * 0.05).norm() < 1e-15);
    }

    #[test]
    fn derivative_magnitude_even_in_epsilon_at_center() {
        let base = PassiveParams::reference(1.1);
        for eps in [0.01, 0.2, 1.5] {
            let plus = base.with_epsilon(eps, EpsilonConvention::Symmetric);
            let minus = base.with_epsilon(-eps, EpsilonConvention::Symmetric);
            let a = ds_deps_analytic(plus.nu_bar(), &plus).norm();
            let b = ds_deps_analytic(minus.nu_bar(), &minus).norm();
            assert!((a - b).abs() <= 1e-12 * a, "eps={eps}: {a} vs {b}");
        }
    }
}
