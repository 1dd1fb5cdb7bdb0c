//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use epsense::check::Family;
use epsense_core::active::{ep_inversion, lasing_threshold, qfi_active, singularity_scan, ActiveSystem, GainModel};
use epsense_core::gaussian::qfi_analytic;
use epsense_core::model::{EpsilonConvention, PassiveParams};
use epsense_core::numerics::{eigenvalues, QuadratureSpec};
use epsense_core::scattering::{
    dressed_propagator_a, generic_scattering, scattering_amplitude, InputField, PortCouplings,
};
use epsense_core::sensing::{
    default_window, input_photon_number, log_spaced, output_state_and_derivative, qfi_density, qfi_total,
    scaling_analysis, ScalingQuantity,
};
use epsense_core::{model, Complex64, Result};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Verdict = Result<(bool, String)>;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn reference_input() -> InputField {
    InputField::coherent(1000.0, 200.0, 0.0)
}

fn reference_ep() -> f64 {
    PassiveParams::reference(1.0).coupling().ep_location().0
}

fn oracle_triangle() -> Verdict {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let (mut worst_fd, mut worst_fock) = (0.0f64, 0.0f64);
    let count = 60;
    for i in 0..count {
        let r = 2.0 * rng.gen::<f64>().sqrt();
        let phase = std::f64::consts::TAU * rng.gen::<f64>();
        let alpha = Complex64::from_polar(r, phase);
        let dalpha = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        // every tenth family is a pure coherent state
        let (nbar, dnbar) = if i % 10 == 0 { (0.0, 0.0) } else { (rng.gen_range(0.05..1.0), rng.gen_range(-0.5..0.5)) };
        let (a, fd, fock) = Family { alpha, dalpha, nbar, dnbar }.three_routes()?;
        worst_fd = worst_fd.max(rel(fd, a));
        worst_fock = worst_fock.max(rel(fock, a));
    }
    let secs = started.elapsed().as_secs_f64();
    Ok((
        worst_fd <= 1e-5 && worst_fock <= 1e-3 && secs <= 120.0,
        format!("{count} families; worst rel. diff FD {worst_fd:.2e} (<= 1e-5), Fock {worst_fock:.2e} (<= 1e-3); {secs:.1}s"),
    ))
}

fn two_route_identity() -> Verdict {
    let mut rng = StdRng::seed_from_u64(19);
    let g_ep = reference_ep();
    let inputs = [reference_input(), InputField::new(1000.0, 200.0, 0.0, 0.5)?];
    let mut worst = 0.0f64;
    let mut samples = 0;
    let mut thermal = 0;
    for k in 0..100 {
        let g = if k % 10 == 0 { g_ep } else { rng.gen_range(0.3..3.0) };
        let nu = rng.gen_range(-20.0..20.0);
        let p = PassiveParams::reference(g);
        // thermal occupation needs positive frequencies
        let input = if nu > 0.0 && k % 2 == 1 { &inputs[1] } else { &inputs[0] };
        let direct = qfi_density(nu, &p, input, EpsilonConvention::Symmetric)?;
        let (m, dm) = output_state_and_derivative(nu, &p, input, EpsilonConvention::Symmetric)?;
        worst = worst.max(rel(qfi_analytic(&m, &dm)?, direct));
        samples += 1;
        thermal += usize::from(input.inv_temperature.is_finite());
    }
    Ok((
        worst <= 1e-8,
        format!(
            "{samples} (g, nu) samples incl. g_ep, {thermal} with thermal input; worst rel. diff {worst:.2e} (<= 1e-8)"
        ),
    ))
}

fn passive_smoothness() -> Verdict {
    let started = Instant::now();
    let input = reference_input();
    let g_ep = reference_ep();
    let f_at = |g: f64| -> Result<f64> {
        let p = PassiveParams::reference(g);
        qfi_total(&p, &input, &default_window(&p, &input, 1e-10)?)
    };
    let f0 = f_at(g_ep)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for h in [1e-4, 1e-3, 1e-2] {
        let jump = (f_at(g_ep + h)? - f_at(g_ep - h)?).abs() / f0;
        ok &= jump <= 10.0 * h;
        parts.push(format!("h={h:e}: {jump:.2e} (<= {:.0e})", 10.0 * h));
    }
    let secs = started.elapsed().as_secs_f64();
    ok &= secs <= 60.0;
    Ok((ok, format!("F(g_ep)={f0:.6}; {}; {secs:.1}s", parts.join(", "))))
}

fn susceptibility_divergence() -> Verdict {
    let fit = scaling_analysis(
        &PassiveParams::reference(2.0),
        &reference_input(),
        ScalingQuantity::ChiSq,
        &log_spaced(1e-4, 1e-2, 9),
        1e-10,
    )?;
    Ok((
        (fit.exponent + 2.0).abs() <= 0.05 && fit.r_squared >= 0.99,
        format!("|chi|^2 ~ |Delta|^{:.4}, r^2 = {:.6}", fit.exponent, fit.r_squared),
    ))
}

fn splitting_information() -> Verdict {
    let offsets = log_spaced(1e-4, 1e-2, 9);
    let base = PassiveParams::reference(2.0);
    let input = reference_input();
    let f = scaling_analysis(&base, &input, ScalingQuantity::FDelta, &offsets, 1e-10)?;
    let prod = scaling_analysis(&base, &input, ScalingQuantity::Product, &offsets, 1e-10)?;
    Ok((
        (f.exponent - 2.0).abs() <= 0.05 && prod.exponent.abs() <= 0.05,
        format!(
            "F^Delta ~ |Delta|^{:.4} (r^2 {:.6}); F^Delta |chi|^2 ~ |Delta|^{:.4}",
            f.exponent, f.r_squared, prod.exponent
        ),
    ))
}

fn lasing_threshold_check() -> Verdict {
    let a = ActiveSystem::reference(0.0);
    let sc = lasing_threshold(&a);
    let scanned = singularity_scan(&a, (-50.0, 50.0), GainModel::Full3)?.unwrap_or(f64::NAN);
    let quoted = rel(sc, 1.38e12);
    let scan = rel(scanned, sc);
    Ok((
        quoted <= 0.01 && scan <= 1e-6,
        format!("S_c = {sc:.6e} ({:.3}% from 1.38e12); 3-mode scan {scanned:.6e} (rel. {scan:.1e})", 100.0 * quoted),
    ))
}

fn active_smoothness() -> Verdict {
    let base = ActiveSystem::reference(0.0);
    let sc = lasing_threshold(&base);
    let input = reference_input();
    let q = QuadratureSpec::new(0.0, 2000.0, 1e-10, 48)?;
    let f_at = |x: f64| qfi_active(&base.with_s_z(x * sc), &input, &q, GainModel::Full3);
    let x_ep = ep_inversion(&base) / sc;
    let f0 = f_at(x_ep)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for h in [1e-4, 1e-3, 1e-2] {
        match (f_at(x_ep + h), f_at(x_ep - h)) {
            (Ok(up), Ok(down)) => {
                let jump = (up - down).abs() / f0;
                ok &= jump <= 10.0 * h;
                parts.push(format!("h={h:e}: {jump:.2e} (<= {:.0e})", 10.0 * h));
            }
            (up, down) => {
                ok = false;
                let e = up.err().or(down.err()).expect("one side failed");
                parts.push(format!("h={h:e}: {e}"));
            }
        }
    }
    let ratio = f_at(0.999)? / f_at(0.9)?;
    ok &= ratio > 100.0;
    // Diagnostics only: the local log-slope and the kink measure
    // (F(x+h) + F(x-h) - 2F(x)) / (F(x+h) - F(x-h)) at h = 1e-5.
    let h = 1e-5;
    let (up, down) = (f_at(x_ep + h)?, f_at(x_ep - h)?);
    let slope = (up - down) / (2.0 * h * f0);
    let kink = (up + down - 2.0 * f0) / (up - down);
    Ok((
        ok,
        format!(
            "S_ep/S_c = {x_ep:.6}, F = {f0:.6e}; {}; F(0.999)/F(0.9) = {ratio:.1} (> 100); \
             d ln F/dx = {slope:.1}, kink measure {kink:.1e}",
            parts.join(", ")
        ),
    ))
}

fn structural_identities() -> Verdict {
    let mut worst_det = 0.0f64;
    let mut worst_bi = 0.0f64;
    let mut worst_generic = 0.0f64;
    let mut worst_overlap = 0.0f64;
    let g_ep = reference_ep();
    for g in [0.4, 0.9, 1.0, 1.2, 2.4] {
        for eps in [0.0, 0.3, -1.1] {
            let p = PassiveParams::reference(g).with_epsilon(eps, EpsilonConvention::Symmetric);
            let m = model::coefficient_matrix(&p);
            let [lp, lm] = p.coupling().eigenvalues();
            worst_det = worst_det.max((m.det() - lp * lm).norm() / m.det().norm());
            let numeric = eigenvalues(&m)?;
            let prod: Complex64 = numeric.iter().product();
            worst_det = worst_det.max((prod - m.det()).norm() / m.det().norm());
            let es = model::eigenmodes(&p)?;
            for i in 0..2 {
                for j in 0..2 {
                    let l = es.left_vector(i);
                    let r = es.right_vector(j);
                    let dot: Complex64 = l.iter().zip(&r).map(|(a, b)| a * b).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    worst_bi = worst_bi.max((dot - want).norm());
                }
            }
            let ports = PortCouplings::single(2, p.gamma_ex)?;
            for nu in [-5.0, -0.4, 0.0, 0.7, 3.0] {
                let out = generic_scattering(nu, &m, &ports)?;
                let expected = Complex64::new(1.0, 0.0) - Complex64::i() * scattering_amplitude(nu, &p);
                worst_generic = worst_generic.max((out.direct - expected).norm());
                let mode_a = dressed_propagator_a(nu, &p) * p.gamma_ex.sqrt();
                worst_generic = worst_generic.max((out.modes[0] - mode_a).norm());
            }
        }
    }
    for k in 0..=20 {
        let g = g_ep - 0.05 + 0.005 * k as f64;
        let p = PassiveParams::reference(g);
        worst_overlap = worst_overlap.max(rel(model::overlap_near_ep(&p), model::overlap(&p)));
    }
    let input = reference_input();
    let norm = rel(input_photon_number(&input, 1e-10)?, 2.0 * input.alpha * input.alpha);
    let ok = worst_det <= 1e-10 && worst_bi <= 1e-10 && worst_generic <= 1e-10 && norm <= 1e-6 && worst_overlap <= 0.01;
    Ok((
        ok,
        format!(
            "det {worst_det:.1e}, biorthogonality {worst_bi:.1e}, generic scattering {worst_generic:.1e}, \
             spectral norm {norm:.1e}, overlap approximant {worst_overlap:.1e}"
        ),
    ))
}

fn golden_stability() -> Verdict {
    let configs = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["coupling_sweep.json", "gain_sweep.json"] {
        let run = |jobs: &str| {
            Command::new(env!("CARGO_BIN_EXE_epsense"))
                .env_remove("EPSENSE_JOBS")
                .args(["sweep", "--format", "csv", "--jobs", jobs, "--config"])
                .arg(configs.join(name))
                .output()
        };
        let (one, eight) = match (run("1"), run("8")) {
            (Ok(a), Ok(b)) => (a, b),
            _ => return Ok((false, format!("{name}: could not run the sweep binary"))),
        };
        let rows = one.stdout.iter().filter(|&&b| b == b'\n').count().saturating_sub(1);
        let same = one.status.success() && eight.status.success() && one.stdout == eight.stdout;
        ok &= same && rows == 201;
        parts.push(format!("{name}: {rows} rows, {}", if same { "byte-identical" } else { "DIFFERENT" }));
    }
    Ok((ok, parts.join("; ")))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("oracle triangle", oracle_triangle),
        ("two-route identity", two_route_identity),
        ("smoothness at the passive EP", passive_smoothness),
        ("susceptibility divergence", susceptibility_divergence),
        ("splitting-information vanishing", splitting_information),
        ("lasing threshold", lasing_threshold_check),
        ("active EP smoothness and threshold divergence", active_smoothness),
        ("structural identities", structural_identities),
        ("golden regression", golden_stability),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (pass, detail) = match run() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!("criterion {} [{}] {name}: {detail}", i + 1, if pass { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
