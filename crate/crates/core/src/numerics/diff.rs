//! Central differences with one Richardson step.

use num_complex::Complex64 as C64;

/// `(f(x+h) − f(x−h))/2h`, combined over steps `h` and `h/2` to cancel the
/// `O(h²)` term.
pub fn central_diff(f: impl Fn(f64) -> C64, x: f64, h: f64) -> C64 {
    assert!(h > 0.0, "step must be positive");
    let d = |step: f64| (f(x + step) - f(x - step)) / (2.0 * step);
    let coarse = d(h);
    let fine = d(0.5 * h);
    (fine * 4.0 - coarse) / 3.0
}

/// Real-valued convenience wrapper around [`central_diff`].
pub fn central_diff_real(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    central_diff(|t| C64::new(f(t), 0.0), x, h).re
}

/// Elementwise [`central_diff`] of a vector-valued function.
pub fn central_diff_vec(f: impl Fn(f64) -> Vec<C64>, x: f64, h: f64) -> Vec<C64> {
    assert!(h > 0.0, "step must be positive");
    let d = |step: f64| -> Vec<C64> {
        let (p, m) = (f(x + step), f(x - step));
        p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * step)).collect()
    };
    let coarse = d(h);
    let fine = d(0.5 * h);
    fine.iter().zip(&coarse).map(|(f, c)| (f * 4.0 - c) / 3.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_at_three() {
        let d = central_diff(|x| C64::new(x * x, 0.0), 3.0, 1e-2);
        assert!((d - C64::new(6.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn exp_at_zero() {
        let d = central_diff(|x| C64::new(x.exp(), 0.0), 0.0, 1e-2);
        assert!((d.re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn complex_valued_function() {
        let d = central_diff(|x| C64::new(0.0, x).exp(), 0.4, 1e-3);
        let exact = C64::new(0.0, 1.0) * C64::new(0.0, 0.4).exp();
        assert!((d - exact).norm() < 1e-11);
    }
}
