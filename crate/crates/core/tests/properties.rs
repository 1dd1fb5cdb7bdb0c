//! Randomized invariants of the numerical building blocks.

use epsense_core::gaussian::{fidelity, purity, qfi_analytic, GaussianDerivative, GaussianMode};
use epsense_core::model::{EpsilonConvention, PassiveParams};
use epsense_core::numerics::{eig, eigenvalues, integrate_with_error, ComplexMatrix, QuadratureSpec};
use epsense_core::scattering::{ds_deps, scattering_amplitude, InputField};
use epsense_core::sensing::{qfi_density, splitting_derivatives};
use epsense_core::{Complex64, Error};
use proptest::prelude::*;

fn matrix(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |v| {
        ComplexMatrix::from_row_major(dim, v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()).unwrap()
    })
}

fn any_matrix() -> impl Strategy<Value = ComplexMatrix> {
    (2usize..=5).prop_flat_map(matrix)
}

fn thermal_mode() -> impl Strategy<Value = GaussianMode> {
    (-2.0f64..2.0, -2.0f64..2.0, 0.0f64..1.5)
        .prop_map(|(re, im, n)| GaussianMode::displaced_thermal(Complex64::new(re, im), n))
}

fn squeezed_mode() -> impl Strategy<Value = GaussianMode> {
    (thermal_mode(), -1.0f64..1.0, 0.0f64..3.2).prop_map(|(m, r, angle)| {
        let v = m.cov[0][0];
        GaussianMode { mean: m.mean, cov: [[v * r.exp(), 0.0], [0.0, v * (-r).exp()]] }.rotated(angle)
    })
}

fn passive() -> impl Strategy<Value = PassiveParams> {
    (0.0f64..3.0, -1.0f64..1.0)
        .prop_map(|(g, eps)| PassiveParams::reference(g).with_epsilon(eps, EpsilonConvention::Symmetric))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn determinant_is_product_of_eigenvalues(m in any_matrix()) {
        let ev = eigenvalues(&m).unwrap();
        let prod: Complex64 = ev.iter().product();
        let scale = m.norm().powi(m.dim() as i32).max(1e-12);
        prop_assert!((prod - m.det()).norm() <= 1e-10 * scale);
        let trace: Complex64 = ev.iter().sum();
        prop_assert!((trace - m.trace()).norm() <= 1e-10 * m.norm().max(1.0));
    }

    #[test]
    fn eigenvectors_are_biorthogonal(m in any_matrix()) {
        match eig(&m) {
            Ok(es) => {
                let n = m.dim();
                for i in 0..n {
                    let r = es.right_vector(i);
                    let av = m.mul_vec(&r);
                    for k in 0..n {
                        prop_assert!((av[k] - es.eigenvalues[i] * r[k]).norm() <= 1e-9 * es.defectiveness * m.norm().max(1.0));
                    }
                    for j in 0..n {
                        let l = es.left_vector(i);
                        let dot: Complex64 = l.iter().zip(&es.right_vector(j)).map(|(a, b)| a * b).sum();
                        let want = if i == j { 1.0 } else { 0.0 };
                        prop_assert!((dot - want).norm() <= 1e-9 * es.defectiveness);
                    }
                }
            }
            Err(Error::NearDefective { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn inverse_round_trip(m in any_matrix()) {
        prop_assume!(m.det().norm() > 1e-6);
        let inv = m.inverse().unwrap();
        let eye = ComplexMatrix::identity(m.dim()).unwrap();
        let err = (&(&m * &inv) - &eye).norm();
        prop_assert!(err <= 1e-8 * inv.norm().max(1.0));
    }

    #[test]
    fn fidelity_is_symmetric_and_bounded(a in squeezed_mode(), b in squeezed_mode()) {
        let fab = fidelity(&a, &b).unwrap();
        let fba = fidelity(&b, &a).unwrap();
        prop_assert!((fab - fba).abs() <= 1e-12 * fab.max(1e-300));
        prop_assert!(fab > 0.0 && fab <= 1.0 + 1e-12);
        prop_assert!((fidelity(&a, &a).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn purity_in_unit_interval(m in squeezed_mode()) {
        let p = purity(&m).unwrap();
        prop_assert!(p > 0.0 && p <= 1.0 + 1e-12);
    }

    #[test]
    fn qfi_invariant_under_phase_rotation(
        m in thermal_mode(),
        d in (-1.0f64..1.0, -1.0f64..1.0, -0.5f64..0.5),
        angle in 0.0f64..6.3,
    ) {
        prop_assume!(m.cov[0][0] > 0.55);
        let dm = GaussianDerivative { dmean: [d.0, d.1], dcov: [[d.2, 0.0], [0.0, d.2]] };
        let f = qfi_analytic(&m, &dm).unwrap();
        let fr = qfi_analytic(&m.rotated(angle), &dm.rotated(angle)).unwrap();
        prop_assert!((f - fr).abs() <= 1e-10 * f.max(1e-12));
        prop_assert!(f >= 0.0);
    }

    #[test]
    fn splitting_parts_sum_to_derivative(p in passive(), nu in -10.0f64..10.0) {
        let s = splitting_derivatives(nu, &p, EpsilonConvention::Symmetric);
        let total = ds_deps(nu, &p, EpsilonConvention::Symmetric);
        prop_assert!((s.splitting_part + s.remainder - total).norm() <= 1e-12 * total.norm().max(1e-12));
    }

    #[test]
    fn passive_scattering_is_bounded(p in passive(), nu in -20.0f64..20.0) {
        // |1 − iS| ≤ 1 for a lossy passive system
        let t = Complex64::new(1.0, 0.0) - Complex64::i() * scattering_amplitude(nu, &p);
        prop_assert!(t.norm() <= 1.0 + 1e-12);
        prop_assert!(qfi_density(nu, &p, &InputField::coherent(10.0, 5.0, 0.0), EpsilonConvention::Symmetric).unwrap() >= 0.0);
    }

    #[test]
    fn overlap_in_unit_interval(p in passive()) {
        let o = p.coupling().overlap();
        prop_assert!((0.0..=1.0).contains(&o));
    }

    #[test]
    fn quadrature_is_deterministic(center in -5.0f64..5.0, width in 0.5f64..5.0) {
        let spec = QuadratureSpec::new(center, 10.0 * width, 1e-10, 40).unwrap();
        let f = |x: f64| width / ((x - center).powi(2) + width * width);
        let a = integrate_with_error(f, &spec).unwrap();
        let b = integrate_with_error(f, &spec).unwrap();
        prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
        let exact = 2.0 * 10f64.atan();
        prop_assert!((a.value - exact).abs() <= 1e-8 * exact);
    }
}
