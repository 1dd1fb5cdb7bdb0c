//! Matrix exponential for the truncated Fock-space path.

use num_complex::Complex64 as C64;

use super::matrix::LargeMatrix;
use crate::error::{Error, Result};

const MAX_TAYLOR_TERMS: usize = 60;

/// Scaling and squaring around a Taylor kernel: the argument is scaled below
/// norm ½, the series is summed to round-off, and the result squared back.
pub fn matrix_exp(m: &LargeMatrix) -> Result<LargeMatrix> {
    let n = m.dim();
    let norm = m.norm_one();
    if !norm.is_finite() {
        return Err(Error::InvalidParameter("matrix_exp of non-finite matrix".into()));
    }
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = m.scale(C64::new(0.5f64.powi(squarings), 0.0));

    let mut result = LargeMatrix::identity(n)?;
    let mut term = LargeMatrix::identity(n)?;
    let mut converged = false;
    for k in 1..=MAX_TAYLOR_TERMS {
        term = (&term * &scaled).scale(C64::new(1.0 / k as f64, 0.0));
        result = &result + &term;
        if term.norm_one() <= f64::EPSILON * 1e-2 * result.norm_one() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence { iterations: MAX_TAYLOR_TERMS });
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    Ok(result)
}
