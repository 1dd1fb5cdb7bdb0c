//! Single-mode Gaussian states: purity, fidelity, Bures distance and the
//! quantum Fisher information, with two brute-force oracles for the latter.
//!
//! Quadratures are `X₁ = (c + c†)/√2`, `X₂ = (c − c†)/(√2 i)`, so the vacuum
//! covariance is `I/2` and a coherent amplitude `α` has mean `√2(Re α, Im α)`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{central_diff_vec, hermitian_eigen, matrix_exp, LargeMatrix, MAX_LARGE_DIM};

/// Slack allowed on the uncertainty relation `det(2C) ≥ 1`.
const UNCERTAINTY_SLACK: f64 = 1e-12;

/// Pairs with `p_α + p_β` below this are skipped by the eigenbasis oracle.
pub const EIGENBASIS_CUTOFF: f64 = 1e-12;

/// Maximum trace weight allowed outside a Fock truncation.
pub const FOCK_TAIL_BOUND: f64 = 1e-10;

/// Mean and covariance of one bosonic mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMode {
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
}

/// `∂_ε` of a [`GaussianMode`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GaussianDerivative {
    pub dmean: [f64; 2],
    pub dcov: [[f64; 2]; 2],
}

type Mat2 = [[f64; 2]; 2];

fn det2(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn inv2(m: &Mat2) -> Mat2 {
    let d = det2(m);
    [[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]
}

fn mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn quad_form(m: &Mat2, x: &[f64; 2]) -> f64 {
    x[0] * (m[0][0] * x[0] + m[0][1] * x[1]) + x[1] * (m[1][0] * x[0] + m[1][1] * x[1])
}

impl GaussianMode {
    /// Displaced thermal state with coherent amplitude `alpha` and mean
    /// thermal occupation `nbar`.
    pub fn displaced_thermal(alpha: C64, nbar: f64) -> Self {
        let v = nbar + 0.5;
        Self { mean: [2f64.sqrt() * alpha.re, 2f64.sqrt() * alpha.im], cov: [[v, 0.0], [0.0, v]] }
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.cov;
        if !(self.mean.iter().all(|v| v.is_finite()) && c.iter().flatten().all(|v| v.is_finite())) {
            return Err(Error::NonPhysicalCovariance("non-finite entries".into()));
        }
        let scale = c[0][0].abs() + c[1][1].abs() + c[0][1].abs();
        if (c[0][1] - c[1][0]).abs() > 1e-12 * scale {
            return Err(Error::NonPhysicalCovariance(format!("not symmetric: {} vs {}", c[0][1], c[1][0])));
        }
        if !(c[0][0] > 0.0 && c[1][1] > 0.0) {
            return Err(Error::NonPhysicalCovariance("diagonal must be positive".into()));
        }
        let d = 4.0 * det2(c);
        if d < 1.0 - UNCERTAINTY_SLACK {
            return Err(Error::NonPhysicalCovariance(format!("det(2C) = {d} < 1")));
        }
        Ok(())
    }

    /// Rotate mean and covariance by `angle` in quadrature space.
    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let r = [[c, -s], [s, c]];
        let rt = [[c, s], [-s, c]];
        let m = self.mean;
        Self { mean: [c * m[0] - s * m[1], s * m[0] + c * m[1]], cov: mul2(&mul2(&r, &self.cov), &rt) }
    }
}

impl GaussianDerivative {
    pub fn rotated(&self, angle: f64) -> Self {
        let g = GaussianMode { mean: self.dmean, cov: self.dcov }.rotated(angle);
        Self { dmean: g.mean, dcov: g.cov }
    }
}

/// `det(2C)^{−1/2}`.
pub fn purity(m: &GaussianMode) -> Result<f64> {
    m.validate()?;
    Ok((4.0 * det2(&m.cov)).sqrt().recip().min(1.0))
}

/// `ln F` for the Uhlmann fidelity (squared-overlap convention).
fn log_fidelity(m1: &GaussianMode, m2: &GaussianMode) -> Result<f64> {
    m1.validate()?;
    m2.validate()?;
    let mut cbar = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            cbar[i][j] = 0.5 * (m1.cov[i][j] + m2.cov[i][j]);
        }
    }
    let dx = [m1.mean[0] - m2.mean[0], m1.mean[1] - m2.mean[1]];
    let exponent = -0.25 * quad_form(&inv2(&cbar), &dx);
    let d = 16.0 * det2(&cbar);
    let a = ((4.0 * det2(&m1.cov) - 1.0).max(0.0)) * ((4.0 * det2(&m2.cov) - 1.0).max(0.0));
    // √(d + a) − √a written without cancellation.
    let denom = d / ((d + a).sqrt() + a.sqrt());
    Ok((std::f64::consts::LN_2 + exponent - denom.ln()).min(0.0))
}

/// Fidelity `F = 2 exp(−¼ δXᵀ C̄⁻¹ δX)/(√(det[4C̄] + A) − √A)`.
pub fn fidelity(m1: &GaussianMode, m2: &GaussianMode) -> Result<f64> {
    log_fidelity(m1, m2).map(f64::exp)
}

/// `d_B² = 2 − 2√F`, accurate when the states are close.
pub fn bures_distance_sq(m1: &GaussianMode, m2: &GaussianMode) -> Result<f64> {
    let lf = log_fidelity(m1, m2)?;
    Ok(-2.0 * (0.5 * lf).exp_m1())
}

pub fn bures_distance(m1: &GaussianMode, m2: &GaussianMode) -> Result<f64> {
    bures_distance_sq(m1, m2).map(f64::sqrt)
}

/// Closed-form QFI of a single-mode Gaussian family.
pub fn qfi_analytic(m: &GaussianMode, dm: &GaussianDerivative) -> Result<f64> {
    m.validate()?;
    let c = &m.cov;
    let cinv = inv2(c);
    let k = mul2(&cinv, &dm.dcov);
    let tr_k2 = k[0][0] * k[0][0] + 2.0 * k[0][1] * k[1][0] + k[1][1] * k[1][1];

    let d = 4.0 * det2(c);
    let p = d.sqrt().recip().min(1.0);
    // ∂ det(2C) = 4 Tr(adj(C) Ċ)
    let dd =
        4.0 * (c[1][1] * dm.dcov[0][0] + c[0][0] * dm.dcov[1][1] - c[0][1] * dm.dcov[1][0] - c[1][0] * dm.dcov[0][1]);
    let dp = -0.5 * dd / (d * d.sqrt());

    let mixed_term = tr_k2 / (2.0 * (1.0 + p * p));
    let one_minus_p4 = (d * d - 1.0) / (d * d);
    let purity_term = if one_minus_p4 <= 1e-14 {
        if dp.abs() > 1e-10 {
            return Err(Error::PurityDerivativeSingularity { dpurity: dp });
        }
        0.0
    } else {
        2.0 * dp * dp / one_minus_p4
    };
    let mean_term = quad_form(&cinv, &dm.dmean);
    Ok(mixed_term + purity_term + mean_term)
}

/// `4 d_B²(ρ(ε), ρ(ε+h))/h²` with one Richardson step over `(h, h/2)`.
pub fn qfi_fd_oracle(state_of: impl Fn(f64) -> Result<GaussianMode>, eps: f64, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {h}")));
    }
    let base = state_of(eps)?;
    let estimate = |step: f64| -> Result<f64> {
        let moved = state_of(eps + step)?;
        Ok(4.0 * bures_distance_sq(&base, &moved)? / (step * step))
    };
    let coarse = estimate(h)?;
    let fine = estimate(0.5 * h)?;
    let scale = coarse.abs().max(fine.abs());
    if scale > 0.0 && (coarse - fine).abs() > 0.1 * scale {
        return Err(Error::StepTooLarge { coarse, fine });
    }
    Ok((2.0 * fine - coarse).max(0.0))
}

/// Truncated density matrix in the Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    pub matrix: LargeMatrix,
    /// Trace weight lost to the truncation.
    pub tail: f64,
}

impl FockState {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// Default truncation `⌈4(|α|² + n̄)⌉ + 20`.
pub fn default_nmax(alpha: C64, nbar: f64) -> usize {
    (4.0 * (alpha.norm_sqr() + nbar)).ceil() as usize + 20
}

/// Smallest truncation, in steps of 10 from [`default_nmax`], whose tail
/// weight stays below [`FOCK_TAIL_BOUND`].
pub fn adequate_nmax(alpha: C64, nbar: f64) -> Result<usize> {
    let mut nmax = default_nmax(alpha, nbar);
    loop {
        match fock_density(alpha, nbar, nmax) {
            Ok(_) => return Ok(nmax),
            Err(Error::TruncationTooSmall { .. }) if nmax + 10 <= MAX_LARGE_DIM / 2 => nmax += 10,
            Err(e) => return Err(e),
        }
    }
}

/// Displaced thermal state `D(α) ρ_T D(α)†` on Fock levels `0..nmax`.
///
/// The state is built in a padded space so that truncation of the
/// displacement operator does not leak into the retained block.
pub fn fock_density(alpha: C64, nbar: f64, nmax: usize) -> Result<FockState> {
    if !(nbar >= 0.0 && nbar.is_finite()) {
        return Err(Error::InvalidParameter(format!("nbar must be finite and >= 0, got {nbar}")));
    }
    if nmax == 0 || nmax > MAX_LARGE_DIM {
        return Err(Error::Dimension { dim: nmax, max: MAX_LARGE_DIM });
    }
    let big = (nmax + nmax.max(40)).min(MAX_LARGE_DIM);
    // generator αa† − α*a
    let generator = LargeMatrix::from_fn(big, |i, j| {
        if i == j + 1 {
            alpha * (i as f64).sqrt()
        } else if j == i + 1 {
            -alpha.conj() * (j as f64).sqrt()
        } else {
            C64::new(0.0, 0.0)
        }
    })?;
    let displacement = matrix_exp(&generator)?;
    let ratio = nbar / (nbar + 1.0);
    let thermal = LargeMatrix::from_fn(big, |i, j| {
        if i == j {
            C64::new((1.0 - ratio) * ratio.powi(i as i32), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })?;
    let full = &(&displacement * &thermal) * &displacement.adjoint();
    let matrix = full.truncate(nmax)?;
    let tail = (1.0 - matrix.trace().re).max(0.0);
    if tail > FOCK_TAIL_BOUND {
        return Err(Error::TruncationTooSmall { nmax, tail });
    }
    Ok(FockState { matrix, tail })
}

/// `∂_ε ρ` of a Fock-space family by central differences.
pub fn fock_derivative(family: impl Fn(f64) -> Result<FockState>, eps: f64, h: f64) -> Result<LargeMatrix> {
    let n = family(eps)?.dim();
    let failure = std::cell::RefCell::new(None);
    let flat = central_diff_vec(
        |e| match family(e) {
            Ok(s) if s.dim() == n => s.matrix.as_slice().to_vec(),
            Ok(s) => {
                failure.borrow_mut().get_or_insert(Error::Shape { expected: n * n, got: s.dim() * s.dim() });
                vec![C64::new(f64::NAN, 0.0); n * n]
            }
            Err(err) => {
                failure.borrow_mut().get_or_insert(err);
                vec![C64::new(f64::NAN, 0.0); n * n]
            }
        },
        eps,
        h,
    );
    if let Some(err) = failure.into_inner() {
        return Err(err);
    }
    LargeMatrix::from_fn(n, |i, j| flat[i * n + j])
}

/// `2 Σ_{αβ} |⟨μ_α|∂ρ|μ_β⟩|²/(p_α + p_β)` in the eigenbasis of `ρ`.
pub fn qfi_eigenbasis_oracle(rho: &FockState, drho: &LargeMatrix) -> Result<f64> {
    if drho.dim() != rho.dim() {
        return Err(Error::Shape { expected: rho.dim() * rho.dim(), got: drho.dim() * drho.dim() });
    }
    let (p, v) = hermitian_eigen(&rho.matrix)?;
    let rotated = &(&v.adjoint() * drho) * &v;
    let n = rho.dim();
    let mut total = 0.0;
    for a in 0..n {
        for b in 0..n {
            let s = p[a] + p[b];
            if s < EIGENBASIS_CUTOFF {
                continue;
            }
            total += rotated[(a, b)].norm_sqr() / s;
        }
    }
    Ok(2.0 * total)
}
