//! Fixed-step fourth-order Runge-Kutta integration of `i d/dt psi = H psi`,
//! kept free of any eigendecomposition so that it checks the closed form
//! independently.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::database::MarkedDatabase;
use crate::error::{Error, Result};
use crate::hamiltonian::{
    check_alpha, ground_state, LinearSchedule, OracleSum, Reversed, Schedule, MAX_DENSE_DATABASE,
};
use crate::state::{StateVector, SubspaceState, C64};

pub const MAX_STEP: f64 = 0.1;
pub const MAX_STEPS: f64 = 1e9;
pub const NORM_DRIFT_LIMIT: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrationConfig {
    pub step: f64,
    /// Only the classical fourth-order scheme is implemented.
    pub scheme_order: u32,
    pub store_trajectory: bool,
}

impl IntegrationConfig {
    pub fn with_step(step: f64) -> Self {
        IntegrationConfig {
            step,
            scheme_order: 4,
            store_trajectory: false,
        }
    }

    /// `min(1e-3, omega/50)`.
    pub fn for_omega(omega: f64) -> Self {
        Self::with_step(f64::min(1e-3, omega.abs() / 50.0))
    }

    fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step <= MAX_STEP) {
            return Err(Error::StepTooLarge(self.step));
        }
        if self.scheme_order != 4 {
            return Err(Error::UnsupportedScheme(self.scheme_order));
        }
        Ok(())
    }

    /// Number of uniform steps covering `[0, duration]`.
    fn steps_for(&self, duration: f64) -> Result<u64> {
        self.validate()?;
        if !(duration >= 0.0 && duration.is_finite()) {
            return Err(Error::out_of_range(
                "T",
                duration,
                "must be finite and non-negative",
            ));
        }
        let steps = (duration / self.step).ceil();
        if steps > MAX_STEPS {
            return Err(Error::CostGuardExceeded { steps });
        }
        Ok(steps as u64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub state: SubspaceState,
}

/// Writes `t,re_x,im_x,re_y,im_y` rows with a header line.
pub fn write_trajectory_csv<W: Write>(points: &[TrajectoryPoint], mut out: W) -> Result<()> {
    writeln!(out, "t,re_x,im_x,re_y,im_y")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{}",
            p.t, p.state.x.re, p.state.x.im, p.state.y.re, p.state.y.im
        )?;
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct Integration2d {
    pub state: SubspaceState,
    pub steps: u64,
    pub norm_drift: f64,
    pub trajectory: Option<Vec<TrajectoryPoint>>,
}

/// Classical RK4 for `y' = -i H(t) y` where `apply(t, y, out)` writes `H(t) y`.
fn rk4<F>(
    mut y: Vec<C64>,
    steps: u64,
    h: f64,
    apply: F,
    mut observe: impl FnMut(f64, &[C64]),
) -> Vec<C64>
where
    F: Fn(f64, &[C64], &mut [C64]),
{
    let dim = y.len();
    let zero = C64::new(0.0, 0.0);
    let mi = C64::new(0.0, -1.0);
    let (mut k1, mut k2, mut k3, mut k4) = (
        vec![zero; dim],
        vec![zero; dim],
        vec![zero; dim],
        vec![zero; dim],
    );
    let mut tmp = vec![zero; dim];
    observe(0.0, &y);
    for n in 0..steps {
        let t = n as f64 * h;
        apply(t, &y, &mut k1);
        for i in 0..dim {
            k1[i] *= mi;
            tmp[i] = y[i] + k1[i] * (0.5 * h);
        }
        apply(t + 0.5 * h, &tmp, &mut k2);
        for i in 0..dim {
            k2[i] *= mi;
            tmp[i] = y[i] + k2[i] * (0.5 * h);
        }
        apply(t + 0.5 * h, &tmp, &mut k3);
        for i in 0..dim {
            k3[i] *= mi;
            tmp[i] = y[i] + k3[i] * h;
        }
        apply(t + h, &tmp, &mut k4);
        for i in 0..dim {
            k4[i] *= mi;
            y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
        observe((n + 1) as f64 * h, &y);
    }
    y
}

/// Two-level evolution from `(sqrt(beta), sqrt(alpha))` under `H(+-omega t)`.
pub fn integrate_2d(
    alpha: f64,
    omega: f64,
    duration: f64,
    reversed: bool,
    cfg: &IntegrationConfig,
) -> Result<Integration2d> {
    if !(omega > 0.0 && omega < crate::closed_form::MAX_OMEGA) {
        return Err(Error::out_of_range("omega", omega, "must lie in (0, 1/2)"));
    }
    let forward = LinearSchedule { omega };
    if reversed {
        integrate_2d_with(alpha, &Reversed(forward), duration, cfg)
    } else {
        integrate_2d_with(alpha, &forward, duration, cfg)
    }
}

/// Two-level evolution along an arbitrary path angle `theta(t)`.
pub fn integrate_2d_with<S: Schedule + ?Sized>(
    alpha: f64,
    schedule: &S,
    duration: f64,
    cfg: &IntegrationConfig,
) -> Result<Integration2d> {
    check_alpha(alpha)?;
    let steps = cfg.steps_for(duration)?;
    let h = if steps == 0 {
        0.0
    } else {
        duration / steps as f64
    };
    let beta = 1.0 - alpha;
    let coupling = -(alpha * beta).sqrt();
    let init = SubspaceState::uniform(alpha);

    let mut trajectory = cfg.store_trajectory.then(Vec::new);
    let y = rk4(
        init.as_array().to_vec(),
        steps,
        h,
        |t, v, out| {
            let off = C64::from_polar(coupling, schedule.theta(t));
            out[0] = v[0] * alpha + off * v[1];
            out[1] = off.conj() * v[0] + v[1] * beta;
        },
        |t, v| {
            if let Some(tr) = trajectory.as_mut() {
                tr.push(TrajectoryPoint {
                    t,
                    state: SubspaceState::new(v[0], v[1]),
                });
            }
        },
    );
    let state = SubspaceState::new(y[0], y[1]);
    let norm_drift = (state.norm_sqr().sqrt() - 1.0).abs();
    if norm_drift > NORM_DRIFT_LIMIT {
        return Err(Error::NormDrift(norm_drift));
    }
    Ok(Integration2d {
        state,
        steps,
        norm_drift,
        trajectory,
    })
}

/// Final state of the control qubit and register, `2N` amplitudes with the
/// control qubit as the most significant index bit.
#[derive(Clone, Debug)]
pub struct FullIntegration {
    pub state: StateVector,
    pub steps: u64,
    pub norm_drift: f64,
    /// Largest norm outside `span{|0^>, |1^>}` over the two control blocks,
    /// each block renormalized to unit norm.
    pub leakage: f64,
}

impl FullIntegration {
    /// Register states on control `|0>` and `|1>`, each rescaled to unit norm.
    pub fn blocks(&self) -> (StateVector, StateVector) {
        let n = self.state.len() / 2;
        let amps = self.state.amplitudes();
        let s = std::f64::consts::SQRT_2;
        (
            StateVector::new(amps[..n].iter().map(|a| a * s).collect()),
            StateVector::new(amps[n..].iter().map(|a| a * s).collect()),
        )
    }

    /// `<block1|block0>`: the forward branch relative to the reversed one.
    pub fn relative_inner(&self) -> C64 {
        let (b0, b1) = self.blocks();
        b1.inner(&b0)
    }
}

/// Evolution of `(|0>+|1>)/sqrt2 (x) psi_0` under
/// `|0><0| (x) H(omega t) + |1><1| (x) H(-omega t)`, with each `H` applied as
/// the weighted sum of the four oracle Hamiltonians.
pub fn integrate_full(
    db: &MarkedDatabase,
    omega: f64,
    duration: f64,
    cfg: &IntegrationConfig,
) -> Result<FullIntegration> {
    if db.size() > MAX_DENSE_DATABASE {
        return Err(Error::DimensionTooLarge {
            size: 2 * db.size() as usize,
            max: 2 * MAX_DENSE_DATABASE as usize,
        });
    }
    if !(omega > 0.0 && omega < crate::closed_form::MAX_OMEGA) {
        return Err(Error::out_of_range("omega", omega, "must lie in (0, 1/2)"));
    }
    let steps = cfg.steps_for(duration)?;
    let h = if steps == 0 {
        0.0
    } else {
        duration / steps as f64
    };
    let op = OracleSum::new(db)?;
    let n = op.dim();

    let psi0 = db.psi_k(0)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let init: Vec<C64> = psi0
        .amplitudes()
        .iter()
        .chain(psi0.amplitudes())
        .map(|a| a * s)
        .collect();

    let y = rk4(
        init,
        steps,
        h,
        |t, v, out| {
            let theta = omega * t;
            let (lo, hi) = out.split_at_mut(n);
            op.apply(theta, &v[..n], lo);
            op.apply(-theta, &v[n..], hi);
        },
        |_, _| {},
    );
    let state = StateVector::new(y);
    let norm_drift = (state.norm() - 1.0).abs();
    if norm_drift > NORM_DRIFT_LIMIT {
        return Err(Error::NormDrift(norm_drift));
    }
    let mut out = FullIntegration {
        state,
        steps,
        norm_drift,
        leakage: 0.0,
    };
    let (b0, b1) = out.blocks();
    out.leakage = f64::max(
        db.project_to_subspace(&b0)?.leakage,
        db.project_to_subspace(&b1)?.leakage,
    );
    Ok(out)
}

/// Discretized `i \oint <psi|d_theta psi> d theta` over `windings` full turns
/// of the ground state, midpoint rule with a centred difference quotient.
pub fn numeric_berry_phase(alpha: f64, windings: u32, steps: usize) -> Result<f64> {
    check_alpha(alpha)?;
    if steps < 1000 {
        return Err(Error::TooFewSteps(steps));
    }
    if windings == 0 {
        return Err(Error::out_of_range("windings", 0.0, "must be positive"));
    }
    let span = 2.0 * PI * windings as f64;
    let d = span / steps as f64;
    let mut total = 0.0;
    for k in 0..steps {
        let lo = ground_state(alpha, k as f64 * d)?;
        let hi = ground_state(alpha, (k + 1) as f64 * d)?;
        let mid = ground_state(alpha, (k as f64 + 0.5) * d)?;
        let dpsi = SubspaceState::new((hi.x - lo.x) / d, (hi.y - lo.y) / d);
        total += (C64::i() * mid.inner(&dpsi)).re * d;
    }
    Ok(total)
}
