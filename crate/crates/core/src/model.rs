//! Two coupled lossy cavities: coefficient matrix, exceptional point,
//! eigenvalue splitting, its susceptibility and the eigenvector overlap.
//!
//! The waveguide coupling `γ_ex` is folded into cavity `a`'s loss
//! (`γ_a′ = γ_a + γ_ex`) everywhere, including the exceptional-point location.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, EigenSystem};

/// Below this |Δ| the susceptibility is reported as divergent.
pub const EP_SPLITTING_FLOOR: f64 = 1e-12;

/// How a change of the detuning `ε = ν_a − ν_b` is distributed over the
/// cavity frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonConvention {
    /// `ν_a = ν̄ + ε/2`, `ν_b = ν̄ − ε/2` with the mean `ν̄` held fixed.
    #[default]
    Symmetric,
    /// Only cavity `a` moves; `ν_b` is held fixed.
    CavityAOnly,
}

impl EpsilonConvention {
    /// `(∂ν_a/∂ε, ∂ν_b/∂ε)`.
    pub fn shifts(self) -> (f64, f64) {
        match self {
            Self::Symmetric => (0.5, -0.5),
            Self::CavityAOnly => (1.0, 0.0),
        }
    }

    /// `∂ν̄/∂ε`.
    pub fn mean_shift(self) -> f64 {
        let (a, b) = self.shifts();
        0.5 * (a + b)
    }
}

/// Passive coupled-cavity parameters, in units of `γ_b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PassiveParams {
    pub nu_a: f64,
    pub nu_b: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub gamma_ex: f64,
    pub g: f64,
}

impl PassiveParams {
    pub fn new(nu_a: f64, nu_b: f64, gamma_a: f64, gamma_b: f64, gamma_ex: f64, g: f64) -> Result<Self> {
        let p = Self { nu_a, nu_b, gamma_a, gamma_b, gamma_ex, g };
        p.validate()?;
        Ok(p)
    }

    /// Parameters of the sensing experiment in the figures: `γ_b = 1`,
    /// `γ_a = 5`, `γ_ex = 0.1`, resonant cavities at zero frequency.
    pub fn reference(g: f64) -> Self {
        Self { nu_a: 0.0, nu_b: 0.0, gamma_a: 5.0, gamma_b: 1.0, gamma_ex: 0.1, g }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.nu_a, self.nu_b, self.gamma_a, self.gamma_b, self.gamma_ex, self.g];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("passive parameters must be finite".into()));
        }
        if !(self.gamma_b > 0.0) {
            return Err(Error::InvalidParameter(format!("gamma_b must be > 0, got {}", self.gamma_b)));
        }
        if !(self.gamma_a > 0.0) {
            return Err(Error::InvalidParameter(format!("gamma_a must be > 0, got {}", self.gamma_a)));
        }
        if self.gamma_ex < 0.0 {
            return Err(Error::InvalidParameter(format!("gamma_ex must be >= 0, got {}", self.gamma_ex)));
        }
        if self.g < 0.0 {
            return Err(Error::InvalidParameter(format!("g must be >= 0, got {}", self.g)));
        }
        Ok(())
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    /// Set the detuning to `eps` by moving the cavity frequencies per `conv`.
    pub fn with_epsilon(self, eps: f64, conv: EpsilonConvention) -> Self {
        self.shift_epsilon(eps - self.epsilon(), conv)
    }

    /// Change the detuning by `delta` according to `conv`.
    pub fn shift_epsilon(mut self, delta: f64, conv: EpsilonConvention) -> Self {
        let (da, db) = conv.shifts();
        self.nu_a += da * delta;
        self.nu_b += db * delta;
        self
    }

    pub fn epsilon(&self) -> f64 {
        self.nu_a - self.nu_b
    }

    pub fn nu_bar(&self) -> f64 {
        0.5 * (self.nu_a + self.nu_b)
    }

    /// `γ_a′ = γ_a + γ_ex`.
    pub fn gamma_a_eff(&self) -> f64 {
        self.gamma_a + self.gamma_ex
    }

    /// `γ̄ = (γ_a′ + γ_b)/2`.
    pub fn gamma_bar(&self) -> f64 {
        0.5 * (self.gamma_a_eff() + self.gamma_b)
    }

    /// `γ = (γ_a′ − γ_b)/2`.
    pub fn gamma_diff(&self) -> f64 {
        0.5 * (self.gamma_a_eff() - self.gamma_b)
    }

    /// `(γ_a − γ_b)/2`, ignoring the waveguide loss.
    pub fn gamma_diff_bare(&self) -> f64 {
        0.5 * (self.gamma_a - self.gamma_b)
    }

    pub fn coupling(&self) -> ModeCoupling {
        ModeCoupling { nu_a: self.nu_a, nu_b: self.nu_b, loss_a: self.gamma_a_eff(), loss_b: self.gamma_b, g: self.g }
    }
}

/// Two coupled modes with arbitrary (possibly negative) loss rates.
///
/// This is the common algebra behind the passive system and the
/// adiabatically eliminated active system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeCoupling {
    pub nu_a: f64,
    pub nu_b: f64,
    pub loss_a: f64,
    pub loss_b: f64,
    pub g: f64,
}

impl ModeCoupling {
    /// `ε/2 − iγ/2` with `γ = (loss_a − loss_b)/2`.
    pub fn detuning_term(&self) -> C64 {
        C64::new(0.5 * (self.nu_a - self.nu_b), -0.25 * (self.loss_a - self.loss_b))
    }

    /// Mean complex frequency `ν̄ − iγ̄/2`.
    pub fn center(&self) -> C64 {
        C64::new(0.5 * (self.nu_a + self.nu_b), -0.25 * (self.loss_a + self.loss_b))
    }

    /// `g² + (ε/2 − iγ/2)²`.
    pub fn radicand(&self) -> C64 {
        let a = self.detuning_term();
        a * a + self.g * self.g
    }

    /// Principal square root of the radicand; half the splitting.
    pub fn half_splitting(&self) -> C64 {
        self.radicand().sqrt()
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let g = C64::new(self.g, 0.0);
        ComplexMatrix::from_rows(&[
            [C64::new(self.nu_a, -0.5 * self.loss_a), g],
            [g, C64::new(self.nu_b, -0.5 * self.loss_b)],
        ])
        .expect("2×2 is a valid dimension")
    }

    /// `[ν_+, ν_−]`.
    pub fn eigenvalues(&self) -> [C64; 2] {
        let (c, s) = (self.center(), self.half_splitting());
        [c + s, c - s]
    }

    pub fn splitting(&self) -> C64 {
        self.half_splitting() * 2.0
    }

    /// Exact `∂Δ/∂ε = (ε/2 − iγ/2)/√(g² + (ε/2 − iγ/2)²)`.
    pub fn susceptibility(&self) -> Result<C64> {
        let s = self.half_splitting();
        if (2.0 * s).norm() < EP_SPLITTING_FLOOR {
            return Err(Error::DivergentAtEp { delta_abs: 2.0 * s.norm() });
        }
        Ok(self.detuning_term() / s)
    }

    /// Un-normalized right eigenvector for eigenvalue `center + lambda`.
    fn right_vector(&self, lambda: C64, fallback: usize) -> Vec<C64> {
        let a = self.detuning_term();
        let g = C64::new(self.g, 0.0);
        let primary = [a + lambda, g];
        let alternate = [g, lambda - a];
        let np = primary[0].norm_sqr() + primary[1].norm_sqr();
        let na = alternate[0].norm_sqr() + alternate[1].norm_sqr();
        let scale = self.g.abs() + a.norm() + lambda.norm();
        if np.max(na) <= (1e-15 * scale.max(f64::MIN_POSITIVE)).powi(2) {
            let mut e = vec![C64::new(0.0, 0.0); 2];
            e[fallback] = C64::new(1.0, 0.0);
            return e;
        }
        if np >= na {
            primary.to_vec()
        } else {
            alternate.to_vec()
        }
    }

    /// Unit-norm right eigenvectors `[ψ^R_+, ψ^R_−]`.
    pub fn right_vectors(&self) -> [Vec<C64>; 2] {
        let s = self.half_splitting();
        let unit = |v: Vec<C64>| {
            let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.into_iter().map(|z| z / n).collect::<Vec<_>>()
        };
        [unit(self.right_vector(s, 0)), unit(self.right_vector(-s, 1))]
    }

    /// Closed-form biorthogonal eigensystem.
    pub fn eigen_system(&self) -> Result<EigenSystem> {
        let [vp, vm] = self.right_vectors();
        let [lp, lm] = self.eigenvalues();
        EigenSystem::from_right_pairs(vec![(lp, vp), (lm, vm)])
    }

    /// `|ψ^{R†}_+ ψ^R_−|` for unit-norm right eigenvectors; 1 at the EP.
    pub fn overlap(&self) -> f64 {
        if self.half_splitting() == C64::new(0.0, 0.0) {
            return 1.0;
        }
        let [vp, vm] = self.right_vectors();
        let inner: C64 = vp.iter().zip(&vm).map(|(a, b)| a.conj() * b).sum();
        inner.norm().min(1.0)
    }

    /// `(g_ep, ε_ep) = (|γ|/2, 0)`.
    pub fn ep_location(&self) -> (f64, f64) {
        (0.25 * (self.loss_a - self.loss_b).abs(), 0.0)
    }
}

/// Splitting, susceptibility and overlap at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpDiagnostics {
    pub delta: C64,
    /// `None` exactly at the exceptional point.
    pub chi: Option<C64>,
    pub overlap: f64,
    /// EP coupling with the waveguide loss folded into cavity `a`.
    pub ep_g: f64,
    /// EP coupling if the waveguide loss were ignored.
    pub ep_g_bare: f64,
    pub ep_distance: f64,
}

/// Coefficient matrix `(ν̄ − iγ̄/2) I + [[ε/2 − iγ/2, g], [g, −ε/2 + iγ/2]]`.
pub fn coefficient_matrix(p: &PassiveParams) -> ComplexMatrix {
    p.coupling().matrix()
}

/// Closed-form eigenvalues and biorthogonal eigenvectors.
pub fn eigenmodes(p: &PassiveParams) -> Result<EigenSystem> {
    p.coupling().eigen_system()
}

/// `Δ = ν_+ − ν_−`.
pub fn splitting(p: &PassiveParams) -> C64 {
    p.coupling().splitting()
}

/// Exact `χ = ∂Δ/∂ε`.
pub fn susceptibility_exact(p: &PassiveParams) -> Result<C64> {
    p.coupling().susceptibility()
}

/// Leading-order susceptibility near the EP,
/// `(−iγ/2)/√(|γ|(g − |γ|/2) − iγε/2)`.
pub fn susceptibility_near_ep(p: &PassiveParams) -> C64 {
    let gamma = p.gamma_diff();
    let root = near_ep_radicand(p).sqrt();
    C64::new(0.0, -0.5 * gamma) / root
}

/// Leading-order splitting near the EP, `2√(|γ|(g − |γ|/2) − iγε/2)`.
pub fn splitting_near_ep(p: &PassiveParams) -> C64 {
    near_ep_radicand(p).sqrt() * 2.0
}

fn near_ep_radicand(p: &PassiveParams) -> C64 {
    let gamma = p.gamma_diff();
    C64::new(gamma.abs() * (p.g - 0.5 * gamma.abs()), -0.5 * gamma * p.epsilon())
}

/// Exact `|ψ^{R†}_+ ψ^R_−|`.
pub fn overlap(p: &PassiveParams) -> f64 {
    p.coupling().overlap()
}

/// Near-EP approximant `1 − (2/|γ|)√((g − |γ|/2)² + (ε/2)²)`.
pub fn overlap_near_ep(p: &PassiveParams) -> f64 {
    let gamma = p.gamma_diff().abs();
    1.0 - (2.0 / gamma) * ((p.g - 0.5 * gamma).powi(2) + (0.5 * p.epsilon()).powi(2)).sqrt()
}

/// `(|γ|/2, 0)` with `γ = (γ_a′ − γ_b)/2`.
pub fn ep_location(p: &PassiveParams) -> (f64, f64) {
    p.coupling().ep_location()
}

pub fn diagnostics(p: &PassiveParams) -> EpDiagnostics {
    let coupling = p.coupling();
    let (ep_g, _) = coupling.ep_location();
    EpDiagnostics {
        delta: coupling.splitting(),
        chi: coupling.susceptibility().ok(),
        overlap: coupling.overlap(),
        ep_g,
        ep_g_bare: 0.5 * p.gamma_diff_bare().abs(),
        ep_distance: (p.g - ep_g).abs(),
    }
}
