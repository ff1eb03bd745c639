use std::f64::consts::PI;
use std::time::Instant;

use adiabatic_counting::closed_form::{
    evolve_closed_form, overlap_report, perturbative_coefficients, solve_closed_form,
};
use adiabatic_counting::estimator::{exact_etas, recover_bits};
use adiabatic_counting::integrator::{
    integrate_2d, integrate_full, numeric_berry_phase, IntegrationConfig,
};
use adiabatic_counting::scheduler::{run_counting, scaling_curve, CountingConfig, Mode};
use adiabatic_counting::validate::path_phases;
use adiabatic_counting::{MarkedDatabase, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(id: u32, ok: bool, started: Instant, detail: String) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!(
        "{tag} criterion {id}: {detail} ({:.2} s)",
        started.elapsed().as_secs_f64()
    );
    assert!(ok, "criterion {id}: {detail}");
}

fn wrap(x: f64) -> f64 {
    (x + PI).rem_euclid(2.0 * PI) - PI
}

#[test]
fn criterion_01_berry_phase() {
    let t0 = Instant::now();
    let quarter = numeric_berry_phase(0.25, 1, 10_000).unwrap();
    let mut worst = (quarter - PI / 2.0).abs();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let alpha: f64 = rng.random_range(0.0..0.5);
        let got = numeric_berry_phase(alpha, 1, 10_000).unwrap();
        worst = worst.max((got - 2.0 * PI * alpha).abs());
    }
    verdict(1, worst <= 1e-6, t0, format!("worst deviation {worst:.2e}"));
}

#[test]
fn criterion_02_closed_form_vs_ode() {
    let t0 = Instant::now();
    let cfg = IntegrationConfig::with_step(1e-3);
    let mut worst = 0.0f64;
    for alpha in [0.1, 0.25, 0.3, 0.45] {
        for omega in [0.01, 0.02, 0.05] {
            let t = 2.0 * PI / omega;
            let sol = solve_closed_form(alpha, omega).unwrap();
            for reversed in [false, true] {
                let exact = evolve_closed_form(&sol, t, reversed);
                let ode = integrate_2d(alpha, omega, t, reversed, &cfg).unwrap();
                worst = worst.max(1.0 - exact.fidelity(&ode.state));
            }
        }
    }
    verdict(
        2,
        worst <= 1e-8,
        t0,
        format!("worst infidelity {worst:.2e}"),
    );
}

#[test]
fn criterion_03_full_space() {
    let t0 = Instant::now();
    let omega = 0.05;
    let t = 2.0 * PI / omega;
    let cfg = IntegrationConfig::with_step(1e-3);
    let (mut leak, mut infid, mut cases) = (0.0f64, 0.0f64, 0);
    for n in 1..=4u32 {
        let size = 1u64 << n;
        for count in 0..size.div_ceil(2) {
            let marked = (0..count).map(|i| (i * 5 + 1) % size);
            let db = MarkedDatabase::new(n, marked).unwrap();
            let run = integrate_full(&db, omega, t, &cfg).unwrap();
            leak = leak.max(run.leakage);
            let (b0, b1) = run.blocks();
            for (block, reversed) in [(b0, false), (b1, true)] {
                let sub = integrate_2d(db.alpha_f64(), omega, t, reversed, &cfg).unwrap();
                let reference: StateVector = db.embed(&sub.state).unwrap();
                infid = infid.max(1.0 - reference.fidelity(&block));
            }
            cases += 1;
        }
    }
    verdict(
        3,
        leak <= 1e-9 && infid <= 1e-8,
        t0,
        format!("{cases} instances, leakage {leak:.2e}, block infidelity {infid:.2e}"),
    );
}

const ALPHAS: [f64; 5] = [0.05, 0.15, 0.25, 0.35, 0.45];
const OMEGAS: [f64; 5] = [0.01, 0.02, 0.03, 0.04, 0.05];

#[test]
fn criterion_04_success_probability_bound() {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for alpha in ALPHAS {
        for omega in OMEGAS {
            let r = overlap_report(alpha, omega, 2.0 * PI / omega).unwrap();
            let bound = 8.0 * alpha * (1.0 - alpha) * omega * omega + 50.0 * omega.powi(3);
            worst = worst.max((1.0 - r.p_success) / bound);
        }
    }
    let omega = 0.005;
    let mut limits = Vec::new();
    for alpha in ALPHAS {
        let r = overlap_report(alpha, omega, 2.0 * PI / omega).unwrap();
        limits.push((1.0 - r.p_success) / (alpha * (1.0 - alpha) * omega * omega));
    }
    let limits_ok = limits.iter().all(|&l| l > 0.0 && l <= 8.5);
    verdict(
        4,
        worst <= 1.0 && limits_ok,
        t0,
        format!("worst bound ratio {worst:.3}, limit ratios {limits:.4?}"),
    );
}

#[test]
fn criterion_05_phase_error_bound() {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for alpha in ALPHAS {
        for omega in OMEGAS {
            let r = overlap_report(alpha, omega, 2.0 * PI / omega).unwrap();
            let bound = 8.0 * alpha * (1.0 - alpha) * omega * omega + 50.0 * omega.powi(3);
            worst = worst.max(wrap(r.arg_phase - r.mu1).abs() / bound);
        }
    }
    verdict(5, worst <= 1.0, t0, format!("worst bound ratio {worst:.3}"));
}

#[test]
fn criterion_06_perturbative_coefficients() {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    let mut shrinking = true;
    for alpha in [0.1, 0.3] {
        let k = alpha * (1.0 - alpha);
        let rel = |w: f64| {
            let p = perturbative_coefficients(alpha, w).unwrap();
            let w2 = w * w;
            [
                (p.aa_dd - 1.0) / (-3.0 * k * w2) - 1.0,
                p.bb_cc / (-k * w2) - 1.0,
                p.ab_cd / (2.0 * k * w2) - 1.0,
                p.ba_dc / (2.0 * k * w2) - 1.0,
            ]
        };
        let seq = [rel(0.02), rel(0.01), rel(0.005)];
        for ((a, b), c) in seq[0].iter().zip(&seq[1]).zip(&seq[2]) {
            worst = worst.max(c.abs());
            // relative remainders vanish with omega
            shrinking &= b.abs() < 0.6 * a.abs() + 1e-9 && c.abs() < 0.6 * b.abs() + 1e-9;
        }
    }
    verdict(
        6,
        worst <= 0.05 && shrinking,
        t0,
        format!("worst relative deviation at omega 0.005: {worst:.2e}"),
    );
}

#[test]
fn criterion_07_end_to_end_counting() {
    let t0 = Instant::now();
    let mut rates = Vec::new();
    let mut exact_ok = true;
    for count in 0..8u64 {
        let db = MarkedDatabase::new(4, (0..count).map(|i| (3 * i + 2) % 16)).unwrap();
        let hits = (0..200u64)
            .filter(|&seed| {
                let run =
                    run_counting(&db, &CountingConfig::new(4, Mode::ClosedForm, seed)).unwrap();
                run.estimate.error_against(db.alpha()) <= 1.0 / 16.0
            })
            .count();
        rates.push(hits as f64 / 200.0);
        exact_ok &= recover_bits(&exact_etas(db.alpha(), 4)).unwrap().value == db.alpha();
    }
    let worst = rates.iter().cloned().fold(1.0, f64::min);
    verdict(
        7,
        worst > 0.5 && exact_ok,
        t0,
        format!("success rates {rates:?}, exact pipeline exact: {exact_ok}"),
    );
}

#[test]
fn criterion_08_cost_law() {
    let t0 = Instant::now();
    let curve = scaling_curve(4..=12, 0.05).unwrap();
    let plan = CountingConfig::new(12, Mode::ClosedForm, 0).plan().unwrap();
    let worst = plan
        .windows(2)
        .map(|p| (p[1].duration / p[0].duration / 2f64.powf(1.5) - 1.0).abs())
        .fold(0.0, f64::max);
    verdict(
        8,
        (curve.slope - 1.5).abs() <= 0.1 && worst <= 1e-9,
        t0,
        format!(
            "slope {:.4}, stage ratio deviation {worst:.1e}",
            curve.slope
        ),
    );
}

#[test]
fn criterion_09_kickback_equivalence() {
    let t0 = Instant::now();
    let (mut checks, mut ok) = (0u64, true);
    for n in 1..=4u32 {
        let size = 1u64 << n;
        for mask in 0u64..(1 << size) {
            if 2 * mask.count_ones() as u64 >= size {
                continue;
            }
            let db = MarkedDatabase::new(n, (0..size).filter(|s| mask >> s & 1 == 1)).unwrap();
            for s in 0..size as usize {
                ok &= db
                    .kickback_equivalence_check(&StateVector::basis(size as usize, s))
                    .unwrap();
                checks += 1;
            }
        }
    }
    verdict(9, ok, t0, format!("{checks} basis states checked"));
}

#[test]
fn criterion_10_path_independence() {
    let t0 = Instant::now();
    let omega = 0.02;
    let (linear, smooth) = path_phases(0.25, omega, 1e-3).unwrap();
    let diff = wrap(linear - smooth).abs();
    verdict(
        10,
        diff <= 20.0 * omega * omega,
        t0,
        format!(
            "phase difference {diff:.2e} rad, bound {:.1e}",
            20.0 * omega * omega
        ),
    );
}
