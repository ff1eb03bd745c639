//! Self-check suites run by `aqcount validate`.
//!
//! Each suite returns a pass/fail verdict with a one-line detail. `Fast`
//! trims the grids to keep the whole run well under a minute in release
//! builds; `Full` adds the exhaustive estimator suite and the complete grids.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use crate::closed_form::{
    evolve_closed_form, overlap_report, perturbative_coefficients, solve_closed_form,
};
use crate::database::MarkedDatabase;
use crate::error::{Error, Result};
use crate::estimator::{exact_etas, recover_bits, EtaEstimate};
use crate::hamiltonian::{
    hamiltonian_full_with, projector_hamiltonian, schedule_weights, LinearSchedule, Reversed,
    SmoothstepSchedule, WeightFn,
};
use crate::integrator::{
    integrate_2d, integrate_2d_with, integrate_full, numeric_berry_phase, IntegrationConfig,
};
use crate::scheduler::{run_counting, scaling_curve, CountingConfig, Mode};
use crate::state::StateVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Fast,
    Full,
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Level::Fast),
            "full" => Ok(Level::Full),
            other => Err(Error::ConfigFormat(format!(
                "unknown level `{other}` (fast | full)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {}", self.name, self.detail)
    }
}

type Outcome = std::result::Result<String, String>;

fn check(ok: bool, fail: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(fail())
    }
}

fn lib<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

pub const SUITE_NAMES: [&str; 13] = [
    "schedule_sum",
    "hamiltonian",
    "berry_phase",
    "closed_form_vs_ode",
    "full_space",
    "overlap_bounds",
    "perturbative",
    "kickback",
    "path_independence",
    "cost_law",
    "mode_equivalence",
    "counting",
    "estimator_exhaustive",
];

pub fn run_suites(level: Level) -> Vec<SuiteResult> {
    run_suites_with(level, schedule_weights)
}

/// Runs every suite for `level`; `weights` replaces the schedule weights in
/// the schedule-sum suite only.
pub fn run_suites_with(level: Level, weights: WeightFn) -> Vec<SuiteResult> {
    let full = level == Level::Full;
    let mut out = Vec::new();
    let mut push = |name: &'static str, outcome: Outcome| {
        let (passed, detail) = match outcome {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        out.push(SuiteResult {
            name,
            passed,
            detail,
        });
    };
    push("schedule_sum", schedule_sum(weights));
    push("hamiltonian", hamiltonian_suite(full));
    push("berry_phase", berry_phase(full));
    push("closed_form_vs_ode", closed_form_vs_ode(full));
    push("full_space", full_space(full));
    push("overlap_bounds", overlap_bounds());
    push("perturbative", perturbative());
    push("kickback", kickback(full));
    push("path_independence", path_independence());
    push("cost_law", cost_law());
    push("mode_equivalence", mode_equivalence(full));
    push("counting", counting(full));
    if full {
        push("estimator_exhaustive", estimator_exhaustive(4));
    } else {
        push("estimator_exhaustive", estimator_exhaustive(3));
    }
    out
}

fn theta_grid(points: usize) -> impl Iterator<Item = f64> {
    (0..points).map(move |i| 2.0 * PI * i as f64 / points as f64 - PI / 7.0)
}

pub fn schedule_sum(weights: WeightFn) -> Outcome {
    let mut worst_sum = 0.0f64;
    for theta in theta_grid(257) {
        worst_sum = worst_sum.max((weights(theta).sum() - 1.0).abs());
    }
    check(worst_sum <= 1e-12, || {
        format!("weights sum off by {worst_sum:e}")
    })?;

    let db = lib(MarkedDatabase::new(3, [1, 6]))?;
    let mut worst = 0.0f64;
    for theta in theta_grid(17) {
        let sum = lib(hamiltonian_full_with(&db, theta, false, weights))?;
        let direct = lib(projector_hamiltonian(&db, theta))?;
        worst = worst.max(sum.max_abs_diff(&direct));
    }
    check(worst <= 1e-12, || {
        format!("oracle sum differs from projector by {worst:e}")
    })?;
    Ok(format!(
        "sum defect {worst_sum:.1e}, projector defect {worst:.1e}"
    ))
}

fn hamiltonian_suite(full: bool) -> Outcome {
    let max_n = if full { 4 } else { 3 };
    let mut cases = 0;
    for n in 1..=max_n {
        let size = 1u64 << n;
        for mask in 0u64..(1 << size) {
            if 2 * mask.count_ones() as u64 >= size || (cases > 40 && mask % 97 != 0) {
                continue;
            }
            let marked = (0..size).filter(|s| mask >> s & 1 == 1);
            let db = lib(MarkedDatabase::new(n, marked))?;
            let h = lib(projector_hamiltonian(&db, 0.7))?;
            check(h.hermiticity_defect() <= 1e-12, || {
                format!("{db}: not Hermitian")
            })?;
            check(h.idempotence_defect() <= 1e-12, || {
                format!("{db}: not a projector")
            })?;
            let eig = h.eigenvalues();
            let zeros = eig.iter().filter(|e| e.abs() < 1e-9).count();
            let ones = eig.iter().filter(|e| (*e - 1.0).abs() < 1e-9).count();
            check(zeros == 1 && ones == eig.len() - 1, || {
                format!("{db}: spectrum {eig:?}")
            })?;
            cases += 1;
        }
    }
    Ok(format!("{cases} databases"))
}

fn berry_phase(full: bool) -> Outcome {
    let got = lib(numeric_berry_phase(0.25, 1, 10_000))?;
    check((got - PI / 2.0).abs() <= 1e-6, || {
        format!("alpha=1/4 gave {got}")
    })?;
    let count = if full { 20 } else { 5 };
    let mut worst = 0.0f64;
    for k in 0..count {
        let alpha = 0.49 * (k as f64 + 0.5) / count as f64;
        let got = lib(numeric_berry_phase(alpha, 1, 10_000))?;
        worst = worst.max((got - 2.0 * PI * alpha).abs());
    }
    check(worst <= 1e-6, || format!("worst deviation {worst:e}"))?;
    Ok(format!(
        "worst deviation {worst:.1e} over {} values",
        count + 1
    ))
}

fn closed_form_vs_ode(full: bool) -> Outcome {
    let alphas: &[f64] = if full {
        &[0.1, 0.25, 0.3, 0.45]
    } else {
        &[0.1, 0.45]
    };
    let omegas: &[f64] = if full { &[0.01, 0.02, 0.05] } else { &[0.05] };
    let cfg = IntegrationConfig::with_step(1e-3);
    let mut worst = 0.0f64;
    for &alpha in alphas {
        for &omega in omegas {
            let t = 2.0 * PI / omega;
            let sol = lib(solve_closed_form(alpha, omega))?;
            for reversed in [false, true] {
                let exact = evolve_closed_form(&sol, t, reversed);
                let ode = lib(integrate_2d(alpha, omega, t, reversed, &cfg))?;
                worst = worst.max(1.0 - exact.fidelity(&ode.state));
            }
        }
    }
    check(worst <= 1e-8, || format!("infidelity {worst:e}"))?;
    Ok(format!("worst infidelity {worst:.1e}"))
}

fn full_space(full: bool) -> Outcome {
    let instances: Vec<(u32, Vec<u64>)> = if full {
        (0..8u64)
            .map(|m| (4, (0..m).map(|i| (5 * i + 3) % 16).collect()))
            .collect()
    } else {
        vec![(2, vec![2]), (3, vec![0, 5, 6])]
    };
    let omega = 0.05;
    let t = 2.0 * PI / omega;
    let cfg = IntegrationConfig::with_step(1e-3);
    let (mut leak, mut infid) = (0.0f64, 0.0f64);
    for (n, marked) in &instances {
        let db = lib(MarkedDatabase::new(*n, marked.iter().copied()))?;
        let run = lib(integrate_full(&db, omega, t, &cfg))?;
        leak = leak.max(run.leakage);
        let (b0, b1) = run.blocks();
        for (block, reversed) in [(b0, false), (b1, true)] {
            let sub = lib(integrate_2d(db.alpha_f64(), omega, t, reversed, &cfg))?;
            let reference: StateVector = lib(db.embed(&sub.state))?;
            infid = infid.max(1.0 - reference.fidelity(&block));
        }
    }
    check(leak <= 1e-9, || format!("leakage {leak:e}"))?;
    check(infid <= 1e-8, || format!("block infidelity {infid:e}"))?;
    Ok(format!(
        "{} instances, leakage {leak:.1e}, infidelity {infid:.1e}",
        instances.len()
    ))
}

fn overlap_bounds() -> Outcome {
    let (mut prob, mut phase) = (0.0f64, 0.0f64);
    for alpha in [0.05, 0.15, 0.25, 0.35, 0.45] {
        for omega in [0.01, 0.02, 0.03, 0.04, 0.05] {
            let r = lib(overlap_report(alpha, omega, 2.0 * PI / omega))?;
            let bound = 8.0 * alpha * (1.0 - alpha) * omega * omega + 50.0 * omega.powi(3);
            let d = (r.arg_phase - r.mu1 + PI).rem_euclid(2.0 * PI) - PI;
            prob = prob.max((1.0 - r.p_success) / bound);
            phase = phase.max(d.abs() / bound);
        }
    }
    check(prob <= 1.0, || {
        format!("success bound exceeded, ratio {prob}")
    })?;
    check(phase <= 1.0, || {
        format!("phase bound exceeded, ratio {phase}")
    })?;
    let omega = 0.005;
    for alpha in [0.1, 0.25, 0.4] {
        let r = lib(overlap_report(alpha, omega, 2.0 * PI / omega))?;
        let ratio = (1.0 - r.p_success) / (alpha * (1.0 - alpha) * omega * omega);
        check(ratio > 0.0 && ratio <= 8.5, || {
            format!("limit ratio {ratio} at alpha {alpha}")
        })?;
    }
    Ok(format!(
        "worst ratios {prob:.2} (success), {phase:.2} (phase)"
    ))
}

fn perturbative() -> Outcome {
    let mut worst = 0.0f64;
    for alpha in [0.1, 0.3] {
        let k = alpha * (1.0 - alpha);
        let scaled = |w: f64| -> std::result::Result<[f64; 4], String> {
            let p = lib(perturbative_coefficients(alpha, w))?;
            let w2 = w * w;
            Ok([
                (p.aa_dd - 1.0) / (-3.0 * k * w2),
                p.bb_cc / (-k * w2),
                p.ab_cd / (2.0 * k * w2),
                p.ba_dc / (2.0 * k * w2),
            ])
        };
        let at = scaled(0.005)?;
        for (i, v) in at.iter().enumerate() {
            worst = worst.max((v - 1.0).abs());
            check((v - 1.0).abs() <= 0.05, || {
                format!("coefficient {i} at alpha {alpha}: ratio {v}")
            })?;
        }
        // the relative error must shrink at least linearly along a halving sequence
        let coarse = scaled(0.02)?;
        let fine = scaled(0.01)?;
        for i in 0..4 {
            let (a, b, c) = (
                (coarse[i] - 1.0).abs(),
                (fine[i] - 1.0).abs(),
                (at[i] - 1.0).abs(),
            );
            check(b <= 0.6 * a + 1e-9 && c <= 0.6 * b + 1e-9, || {
                format!("coefficient {i} at alpha {alpha}: residuals {a:e} {b:e} {c:e}")
            })?;
        }
    }
    Ok(format!(
        "worst relative deviation {worst:.1e} at omega 0.005"
    ))
}

fn kickback(full: bool) -> Outcome {
    let max_n = if full { 4 } else { 3 };
    let mut checks = 0u64;
    for n in 1..=max_n {
        let size = 1u64 << n;
        for mask in 0u64..(1 << size) {
            if 2 * mask.count_ones() as u64 >= size {
                continue;
            }
            let db = lib(MarkedDatabase::new(
                n,
                (0..size).filter(|s| mask >> s & 1 == 1),
            ))?;
            for s in 0..size as usize {
                let v = StateVector::basis(size as usize, s);
                check(lib(db.kickback_equivalence_check(&v))?, || {
                    format!("{db}: basis state {s} differs")
                })?;
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} basis states"))
}

/// Relative phase `arg <phi'|phi>` after one winding under a linear and a
/// smoothstep schedule of the same duration.
pub fn path_phases(alpha: f64, omega: f64, step: f64) -> Result<(f64, f64)> {
    let t = 2.0 * PI / omega;
    let cfg = IntegrationConfig::with_step(step);
    let linear = LinearSchedule { omega };
    let smooth = SmoothstepSchedule {
        total_angle: 2.0 * PI,
        duration: t,
    };
    let lf = integrate_2d_with(alpha, &linear, t, &cfg)?;
    let lr = integrate_2d_with(alpha, &Reversed(linear), t, &cfg)?;
    let sf = integrate_2d_with(alpha, &smooth, t, &cfg)?;
    let sr = integrate_2d_with(alpha, &Reversed(smooth), t, &cfg)?;
    Ok((
        lr.state.inner(&lf.state).arg(),
        sr.state.inner(&sf.state).arg(),
    ))
}

fn path_independence() -> Outcome {
    let omega = 0.02;
    let (linear, smooth) = lib(path_phases(0.25, omega, 1e-3))?;
    let diff = ((linear - smooth + PI).rem_euclid(2.0 * PI) - PI).abs();
    check(diff <= 20.0 * omega * omega, || {
        format!("phases differ by {diff:e}")
    })?;
    Ok(format!("linear {linear:.6}, smoothstep {smooth:.6}"))
}

fn cost_law() -> Outcome {
    let curve = lib(scaling_curve(4..=12, 0.05))?;
    check((curve.slope - 1.5).abs() <= 0.1, || {
        format!("slope {}", curve.slope)
    })?;
    let plan = lib(CountingConfig::new(12, Mode::ClosedForm, 0).plan())?;
    for pair in plan.windows(2) {
        let ratio = pair[1].duration / pair[0].duration;
        check((ratio / 2f64.powf(1.5) - 1.0).abs() <= 1e-9, || {
            format!("stage ratio {ratio}")
        })?;
    }
    Ok(format!("slope {:.3}", curve.slope))
}

fn mode_equivalence(full: bool) -> Outcome {
    let m = if full { 4 } else { 3 };
    let marked: &[&[u64]] = if full {
        &[&[], &[3], &[1, 4, 9], &[0, 2, 5, 7, 11]]
    } else {
        &[&[3], &[1, 4, 9]]
    };
    for (i, set) in marked.iter().enumerate() {
        let db = lib(MarkedDatabase::new(4, set.iter().copied()))?;
        let seed = 1000 + i as u64;
        let a = lib(run_counting(
            &db,
            &CountingConfig::new(m, Mode::ClosedForm, seed),
        ))?;
        let b = lib(run_counting(
            &db,
            &CountingConfig::new(m, Mode::Integrate2d, seed),
        ))?;
        check(a.estimate == b.estimate, || {
            format!("{db}: estimates differ")
        })?;
    }
    Ok(format!("{} instances at m = {m}", marked.len()))
}

fn counting(full: bool) -> Outcome {
    let seeds = if full { 200 } else { 50 };
    let mut worst = 1.0f64;
    for count in 0..8u64 {
        let db = lib(MarkedDatabase::new(4, 0..count))?;
        let mut hits = 0;
        for seed in 0..seeds {
            let run = lib(run_counting(
                &db,
                &CountingConfig::new(4, Mode::ClosedForm, seed),
            ))?;
            if run.estimate.error_against(db.alpha()) <= 1.0 / 16.0 {
                hits += 1;
            }
        }
        let rate = hits as f64 / seeds as f64;
        worst = worst.min(rate);
        check(rate > 0.5, || format!("M = {count}: success rate {rate}"))?;
        let exact = lib(recover_bits(&exact_etas(db.alpha(), 4)))?;
        check(exact.value == db.alpha(), || {
            format!("M = {count}: exact pipeline missed")
        })?;
    }
    Ok(format!("lowest success rate {worst:.3} over {seeds} seeds"))
}

/// Noise-free recovery for every `N = 2^n <= 2^max_n`, `M < N/2`, `m <= 5`,
/// plus every combination of `{-1/17, 0, 1/17}` offsets on the stage phases.
pub fn estimator_exhaustive(max_n: u32) -> Outcome {
    let mut cases = 0u64;
    for n in 1..=max_n {
        let size = 1u64 << n;
        for count in 0..size.div_ceil(2) {
            let alpha = Ratio::new(count, size);
            for m in 1..=5u32 {
                let est = lib(recover_bits(&exact_etas(alpha, m)))?;
                let tol = Ratio::new(1, 1u64 << (m + 1));
                if m + 1 >= n {
                    check(est.value == alpha, || {
                        format!("{alpha} at m = {m}: got {}", est.value)
                    })?;
                } else {
                    check(est.error_against(alpha) <= ratio_f64(tol), || {
                        format!("{alpha} at m = {m}: got {}", est.value)
                    })?;
                }
                cases += 1;
                if m > 4 {
                    continue;
                }
                let truth: Vec<f64> = (1..=m)
                    .map(|j| {
                        let s = alpha * Ratio::from_integer(1u64 << j);
                        let f = s - Ratio::from_integer(s.to_integer());
                        *f.numer() as f64 / *f.denom() as f64
                    })
                    .collect();
                for code in 0..3u32.pow(m) {
                    let etas: Vec<EtaEstimate> = truth
                        .iter()
                        .enumerate()
                        .map(|(i, &p)| {
                            let offset = (code / 3u32.pow(i as u32) % 3) as f64 - 1.0;
                            EtaEstimate::exact(i as u32 + 1, p + offset / 17.0)
                        })
                        .collect();
                    let est = lib(recover_bits(&etas))?;
                    let wrapped = circular(est.value_f64(), ratio_f64(alpha));
                    check(wrapped <= 2f64.powi(-(m as i32 + 1)) + 1e-15, || {
                        format!("{alpha} at m = {m}, offsets {code}: got {}", est.value)
                    })?;
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} recoveries"))
}

fn ratio_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn circular(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::ScheduleWeights;

    fn flipped(theta: f64) -> ScheduleWeights {
        let mut w = schedule_weights(theta);
        w.s3 = -w.s3;
        w
    }

    #[test]
    fn schedule_sum_passes() {
        assert!(schedule_sum(schedule_weights).is_ok());
    }

    #[test]
    fn schedule_sum_catches_sign_flip() {
        assert!(schedule_sum(flipped).is_err());
    }

    #[test]
    fn level_names() {
        assert_eq!("fast".parse::<Level>().unwrap(), Level::Fast);
        assert_eq!("full".parse::<Level>().unwrap(), Level::Full);
        assert!("quick".parse::<Level>().is_err());
    }

    #[test]
    fn small_exhaustive_estimator() {
        let r = estimator_exhaustive(3);
        assert!(r.is_ok(), "{r:?}");
    }
}
