//! Quick oracle-agreement suite behind `epsense check`.

use epsense_core::active::{lasing_threshold, singularity_scan, ActiveSystem, GainModel};
use epsense_core::gaussian::{
    adequate_nmax, fock_density, fock_derivative, qfi_analytic, qfi_eigenbasis_oracle, qfi_fd_oracle,
    GaussianDerivative, GaussianMode,
};
use epsense_core::model::{EpsilonConvention, PassiveParams};
use epsense_core::scattering::{generic_scattering, scattering_amplitude, InputField, PortCouplings};
use epsense_core::sensing::{
    default_window, input_photon_number, output_state_and_derivative, qfi_density, qfi_splitting,
};
use epsense_core::{Complex64, Result};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed discrepancy.
    pub worst: f64,
    pub tolerance: f64,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn outcome(name: &'static str, worst: Result<f64>, tolerance: f64) -> CheckOutcome {
    match worst {
        Ok(w) => CheckOutcome { name, passed: w <= tolerance, worst: w, tolerance },
        Err(e) => {
            log::warn!("{name}: {e}");
            CheckOutcome { name, passed: false, worst: f64::INFINITY, tolerance }
        }
    }
}

/// Displaced thermal family `α(ε) = α₀ + ε·dα`, `n̄(ε) = n̄₀ + ε·dn`.
#[derive(Debug, Clone, Copy)]
pub struct Family {
    pub alpha: Complex64,
    pub dalpha: Complex64,
    pub nbar: f64,
    pub dnbar: f64,
}

impl Family {
    pub fn state(&self, eps: f64) -> GaussianMode {
        GaussianMode::displaced_thermal(self.alpha + self.dalpha * eps, self.nbar + self.dnbar * eps)
    }

    pub fn derivative(&self) -> GaussianDerivative {
        let s = 2f64.sqrt();
        GaussianDerivative {
            dmean: [s * self.dalpha.re, s * self.dalpha.im],
            dcov: [[self.dnbar, 0.0], [0.0, self.dnbar]],
        }
    }

    /// `(analytic, Bures finite difference, Fock eigenbasis)`.
    pub fn three_routes(&self) -> Result<(f64, f64, f64)> {
        let analytic = qfi_analytic(&self.state(0.0), &self.derivative())?;
        let fd = qfi_fd_oracle(|e| Ok(self.state(e)), 0.0, 1e-3)?;
        let nmax = adequate_nmax(self.alpha, self.nbar + self.dnbar.abs() * 1e-3)? + 10;
        let rho = fock_density(self.alpha, self.nbar, nmax)?;
        let drho = fock_derivative(
            |e| fock_density(self.alpha + self.dalpha * e, self.nbar + self.dnbar * e, nmax),
            0.0,
            1e-4,
        )?;
        let fock = qfi_eigenbasis_oracle(&rho, &drho)?;
        Ok((analytic, fd, fock))
    }
}

const FAMILIES: [Family; 4] = [
    Family { alpha: Complex64::new(0.7, -0.3), dalpha: Complex64::new(0.4, 0.9), nbar: 0.3, dnbar: 0.2 },
    Family { alpha: Complex64::new(1.5, 0.5), dalpha: Complex64::new(-0.2, 0.1), nbar: 0.8, dnbar: -0.5 },
    Family { alpha: Complex64::new(0.0, 0.0), dalpha: Complex64::new(1.0, 0.0), nbar: 0.1, dnbar: 0.0 },
    Family { alpha: Complex64::new(-1.1, 1.2), dalpha: Complex64::new(0.0, 0.0), nbar: 0.5, dnbar: 0.3 },
];

fn reference_input() -> InputField {
    InputField::coherent(1000.0, 200.0, 0.0)
}

/// Every check, in a fixed order.
pub fn run_checks() -> Vec<CheckOutcome> {
    let mut out = Vec::new();

    let triangle: Result<(f64, f64)> = FAMILIES.iter().try_fold((0.0f64, 0.0f64), |(wf, wk), fam| {
        let (a, fd, fock) = fam.three_routes()?;
        Ok((wf.max(rel(fd, a)), wk.max(rel(fock, a))))
    });
    let (fd_worst, fock_worst) = match triangle {
        Ok(w) => (Ok(w.0), Ok(w.1)),
        Err(e) => (Err(e.clone()), Err(e)),
    };
    out.push(outcome("gaussian qfi vs Bures finite difference", fd_worst, 1e-5));
    out.push(outcome("gaussian qfi vs Fock eigenbasis", fock_worst, 1e-3));

    let input = reference_input();
    let two_route = (|| -> Result<f64> {
        let mut worst = 0.0f64;
        for g in [0.6, 1.025, 2.4] {
            let p = PassiveParams::reference(g);
            for nu in [-7.0, -1.0, 0.0, 0.3, 2.5] {
                let direct = qfi_density(nu, &p, &input, EpsilonConvention::Symmetric)?;
                let (m, dm) = output_state_and_derivative(nu, &p, &input, EpsilonConvention::Symmetric)?;
                worst = worst.max(rel(qfi_analytic(&m, &dm)?, direct));
            }
        }
        Ok(worst)
    })();
    out.push(outcome("per-mode integrand vs gaussian qfi of output moments", two_route, 1e-8));

    let generic = (|| -> Result<f64> {
        let mut worst = 0.0f64;
        for g in [0.4, 1.025, 2.4] {
            let p = PassiveParams::reference(g);
            let ports = PortCouplings::single(2, p.gamma_ex)?;
            for nu in [-3.0, 0.0, 0.9] {
                let direct = generic_scattering(nu, &p.coupling().matrix(), &ports)?.direct;
                let expected = Complex64::new(1.0, 0.0) - Complex64::i() * scattering_amplitude(nu, &p);
                worst = worst.max((direct - expected).norm());
            }
        }
        Ok(worst)
    })();
    out.push(outcome("generic scattering vs specialized propagators", generic, 1e-10));

    let reconstruction = (|| -> Result<f64> {
        let p = PassiveParams::reference(2.4);
        let q = default_window(&p, &input, 1e-10)?;
        let b = qfi_splitting(&p, &input, &q)?;
        Ok(rel(b.reconstructed(), b.f_eps))
    })();
    out.push(outcome("splitting decomposition reconstructs F^eps", reconstruction, 1e-6));

    let norm = input_photon_number(&input, 1e-10).map(|n| rel(n, 2.0 * input.alpha * input.alpha));
    out.push(outcome("Lorentzian spectral norm", norm, 1e-6));

    let threshold = (|| -> Result<f64> {
        let a = ActiveSystem::reference(0.0);
        let closed = lasing_threshold(&a);
        let scanned = singularity_scan(&a, (-50.0, 50.0), GainModel::Full3)?.unwrap_or(f64::INFINITY);
        Ok(rel(scanned, closed))
    })();
    out.push(outcome("lasing threshold closed form vs 3-mode scan", threshold, 1e-6));

    out
}
