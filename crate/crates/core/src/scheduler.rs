//! Stage planning, the end-to-end counting run and evolution-time accounting.
//!
//! Stage `j` sweeps at `omega_j = c_omega 2^{-j/2}` for `T_j = 2^j pi / omega_j`
//! and is repeated `R_j = r0 + ceil(r_slope (m - j))` times in each of the two
//! readout bases. Cost is total evolution time, every shot needing a fresh
//! sweep.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::ops::RangeInclusive;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::closed_form::overlap_report;
use crate::database::MarkedDatabase;
use crate::error::{Error, Result};
use crate::estimator::{
    chernoff_repetitions, derive_stage_seed, estimate_eta, measurement_probabilities, recover_bits,
    sample_counts, AlphaEstimate, EtaEstimate, StageRecord, DEFAULT_DELTA,
};
use crate::hamiltonian::{check_alpha, MAX_DENSE_DATABASE};
use crate::integrator::{integrate_2d, integrate_full, IntegrationConfig};

pub const OMEGA_MAX: f64 = 0.1;
pub const DEFAULT_C_OMEGA: f64 = 0.05;
pub const DEFAULT_FAILURE_PROB: f64 = 0.1;
pub const MAX_STAGES_CLOSED_FORM: u32 = 20;
pub const MAX_STAGES_INTEGRATED: u32 = 10;

/// Phase error allowed per stage before readout noise is counted.
pub const DELTA_BUDGET: f64 = 2.0 * PI / 32.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    ClosedForm,
    Integrate2d,
    Full,
}

impl Mode {
    pub fn max_stages(self) -> u32 {
        match self {
            Mode::ClosedForm => MAX_STAGES_CLOSED_FORM,
            Mode::Integrate2d | Mode::Full => MAX_STAGES_INTEGRATED,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::ClosedForm => "closed_form",
            Mode::Integrate2d => "integrate_2d",
            Mode::Full => "full",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed_form" => Ok(Mode::ClosedForm),
            "integrate_2d" => Ok(Mode::Integrate2d),
            "full" => Ok(Mode::Full),
            other => Err(Error::ConfigFormat(format!(
                "unknown mode `{other}` (closed_form | integrate_2d | full)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageConfig {
    pub j: u32,
    pub omega: f64,
    /// `T_j`, with `omega * T_j = 2^j pi`.
    pub duration: f64,
    /// Shots per readout basis.
    pub repetitions: u32,
}

/// Upper bound of [`delta_bound`] over all `alpha in [0, 1/2)`, using
/// `1 - p_s <= 8 alpha beta omega^2`, `alpha beta <= 1/4` and
/// `alpha beta (beta - alpha) <= 1/(6 sqrt 3)`.
pub fn worst_case_delta_bound(omega: f64, j: u32) -> f64 {
    let w2 = omega * omega;
    2.0 * PI * 2.0 * w2 + 2.0 * w2 + 2.0 * PI * 2f64.powi(j as i32) * w2 / (6.0 * 3f64.sqrt())
}

pub fn plan_stages(m: u32, c_omega: f64, r0: u32, r_slope: f64) -> Result<Vec<StageConfig>> {
    if m == 0 {
        return Err(Error::out_of_range("m", 0.0, "at least one stage"));
    }
    if m > MAX_STAGES_CLOSED_FORM {
        return Err(Error::GuardExceeded(format!(
            "m = {m} exceeds {MAX_STAGES_CLOSED_FORM}"
        )));
    }
    if !(c_omega > 0.0 && c_omega <= OMEGA_MAX) {
        return Err(Error::out_of_range(
            "c_omega",
            c_omega,
            "must lie in (0, 0.1]",
        ));
    }
    if r0 == 0 {
        return Err(Error::out_of_range("r0", 0.0, "at least one repetition"));
    }
    if !(r_slope >= 0.0 && r_slope.is_finite()) {
        return Err(Error::out_of_range(
            "r_slope",
            r_slope,
            "must be non-negative",
        ));
    }
    (1..=m)
        .map(|j| {
            let omega = c_omega * 2f64.powf(-(j as f64) / 2.0);
            let budget = worst_case_delta_bound(omega, j);
            if budget >= DELTA_BUDGET {
                return Err(Error::GuardExceeded(format!(
                    "stage {j}: worst-case phase budget {budget:.4} >= 2 pi/32"
                )));
            }
            Ok(StageConfig {
                j,
                omega,
                duration: 2f64.powi(j as i32) * PI / omega,
                repetitions: r0 + (r_slope * (m - j) as f64).ceil() as u32,
            })
        })
        .collect()
}

/// Default `(r0, r_slope)` for `m` stages: `r0 = chernoff(delta, failure/m)`,
/// `r_slope = r0 / 2`.
pub fn default_repetitions(m: u32, delta: f64, failure_prob: f64) -> Result<(u32, f64)> {
    let r0 = chernoff_repetitions(delta, failure_prob / m.max(1) as f64)?;
    Ok((r0, r0 as f64 / 2.0))
}

/// `2 pi (1 - p_s) + 8 a b w^2 + 2 pi 2^j a b |b - a| w^2` for stage `j`.
pub fn delta_bound(alpha: f64, omega: f64, j: u32) -> Result<f64> {
    check_alpha(alpha)?;
    if j == 0 {
        return Err(Error::out_of_range("j", 0.0, "stage index starts at 1"));
    }
    let turns = 2f64.powi(j as i32) * PI;
    let report = overlap_report(alpha, omega, turns / omega)?;
    let beta = 1.0 - alpha;
    let w2 = omega * omega;
    Ok(2.0 * PI * (1.0 - report.p_success)
        + 8.0 * alpha * beta * w2
        + 2.0 * turns * alpha * beta * (beta - alpha).abs() * w2)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageCost {
    pub j: u32,
    pub duration: f64,
    pub repetitions: u32,
    pub bases: u32,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostLedger {
    pub per_stage: Vec<StageCost>,
    pub total: f64,
}

impl CostLedger {
    pub fn from_stages(stages: &[StageConfig]) -> Self {
        let per_stage: Vec<StageCost> = stages
            .iter()
            .map(|s| StageCost {
                j: s.j,
                duration: s.duration,
                repetitions: s.repetitions,
                bases: 2,
                cost: 2.0 * s.repetitions as f64 * s.duration,
            })
            .collect();
        let total = per_stage.iter().map(|s| s.cost).sum();
        CostLedger { per_stage, total }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingConfig {
    pub m: u32,
    pub mode: Mode,
    pub seed: u64,
    pub c_omega: f64,
    pub delta: f64,
    pub failure_prob: f64,
    /// Overrides the Chernoff-derived base repetition count.
    pub r0: Option<u32>,
    pub r_slope: Option<f64>,
    /// Overrides `min(1e-3, omega/50)` in the integrated modes.
    pub integration_step: Option<f64>,
}

impl CountingConfig {
    pub fn new(m: u32, mode: Mode, seed: u64) -> Self {
        CountingConfig {
            m,
            mode,
            seed,
            c_omega: DEFAULT_C_OMEGA,
            delta: DEFAULT_DELTA,
            failure_prob: DEFAULT_FAILURE_PROB,
            r0: None,
            r_slope: None,
            integration_step: None,
        }
    }

    pub fn plan(&self) -> Result<Vec<StageConfig>> {
        let (r0, slope) = default_repetitions(self.m.max(1), self.delta, self.failure_prob)?;
        plan_stages(
            self.m,
            self.c_omega,
            self.r0.unwrap_or(r0),
            self.r_slope.unwrap_or(slope),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageDiagnostics {
    pub stage: u32,
    pub omega: f64,
    pub duration: f64,
    #[serde(rename = "R")]
    pub repetitions: u32,
    pub inner_re: f64,
    pub inner_im: f64,
    #[serde(rename = "pX")]
    pub p_x: f64,
    #[serde(rename = "pY")]
    pub p_y: f64,
    #[serde(rename = "qX")]
    pub q_x: f64,
    #[serde(rename = "qY")]
    pub q_y: f64,
    pub raw_phase: f64,
    pub eta: f64,
    /// `2 pi 2^j alpha mod 2 pi`.
    pub ideal_phase: f64,
    /// `arg(inner) mod 2 pi`.
    pub achieved_phase: f64,
    pub low_confidence: bool,
}

impl StageDiagnostics {
    pub fn record(&self) -> StageRecord {
        StageRecord {
            stage: self.stage,
            eta: self.eta,
            raw_phase: self.raw_phase,
            q_x: self.q_x,
            q_y: self.q_y,
            r: self.repetitions,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CountingRun {
    pub estimate: AlphaEstimate,
    pub etas: Vec<EtaEstimate>,
    pub ledger: CostLedger,
    pub stages: Vec<StageDiagnostics>,
}

/// Serialized form of a run, as written to `result.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub alpha_hat: f64,
    /// Exact estimate as `numer/denom`.
    pub alpha_hat_fraction: String,
    pub bits: Vec<u8>,
    pub m: u32,
    pub epsilon: f64,
    pub ambiguous_stages: Vec<u32>,
    pub alpha_true: f64,
    pub n: u32,
    pub marked_count: u64,
    pub config: CountingConfig,
    pub ledger: CostLedger,
    pub stages: Vec<StageDiagnostics>,
}

impl CountingRun {
    pub fn report(&self, db: &MarkedDatabase, cfg: &CountingConfig) -> RunReport {
        let e = &self.estimate;
        RunReport {
            alpha_hat: e.value_f64(),
            alpha_hat_fraction: format!("{}/{}", e.value.numer(), e.value.denom()),
            bits: e.bits.clone(),
            m: e.m,
            epsilon: e.epsilon,
            ambiguous_stages: e.ambiguous_stages.clone(),
            alpha_true: db.alpha_f64(),
            n: db.qubits(),
            marked_count: db.marked_count(),
            config: cfg.clone(),
            ledger: self.ledger.clone(),
            stages: self.stages.clone(),
        }
    }
}

/// Overlap `<phi'(T)|phi(T)>` for one stage from the selected engine.
pub fn stage_overlap(
    db: &MarkedDatabase,
    stage: &StageConfig,
    mode: Mode,
    step: Option<f64>,
) -> Result<crate::state::C64> {
    let alpha = db.alpha_f64();
    let cfg = step.map_or_else(
        || IntegrationConfig::for_omega(stage.omega),
        IntegrationConfig::with_step,
    );
    match mode {
        Mode::ClosedForm => Ok(overlap_report(alpha, stage.omega, stage.duration)?.inner),
        Mode::Integrate2d => {
            let fwd = integrate_2d(alpha, stage.omega, stage.duration, false, &cfg)?;
            let rev = integrate_2d(alpha, stage.omega, stage.duration, true, &cfg)?;
            Ok(rev.state.inner(&fwd.state))
        }
        Mode::Full => Ok(integrate_full(db, stage.omega, stage.duration, &cfg)?.relative_inner()),
    }
}

pub fn run_counting(db: &MarkedDatabase, cfg: &CountingConfig) -> Result<CountingRun> {
    if cfg.m > cfg.mode.max_stages() {
        return Err(Error::GuardExceeded(format!(
            "m = {} exceeds {} for mode {}",
            cfg.m,
            cfg.mode.max_stages(),
            cfg.mode
        )));
    }
    if cfg.mode == Mode::Full && db.size() > MAX_DENSE_DATABASE {
        return Err(Error::GuardExceeded(format!(
            "full mode needs N <= {MAX_DENSE_DATABASE}, got {}",
            db.size()
        )));
    }
    let plan = cfg.plan()?;
    let alpha = db.alpha();

    let mut etas = Vec::with_capacity(plan.len());
    let mut stages = Vec::with_capacity(plan.len());
    for stage in &plan {
        let inner = stage_overlap(db, stage, cfg.mode, cfg.integration_step)?;
        let (p_x, p_y) = measurement_probabilities(inner)?;
        let (q_x, q_y) = sample_counts(
            p_x,
            p_y,
            stage.repetitions,
            derive_stage_seed(cfg.seed, stage.j),
        );
        let eta = estimate_eta(q_x, q_y, stage.j)?;

        let scaled = alpha * num_rational::Ratio::from_integer(1u64 << stage.j);
        let frac = scaled - num_rational::Ratio::from_integer(scaled.to_integer());
        let ideal = 2.0 * PI * (*frac.numer() as f64 / *frac.denom() as f64);
        stages.push(StageDiagnostics {
            stage: stage.j,
            omega: stage.omega,
            duration: stage.duration,
            repetitions: stage.repetitions,
            inner_re: inner.re,
            inner_im: inner.im,
            p_x,
            p_y,
            q_x,
            q_y,
            raw_phase: eta.raw_phase,
            eta: eta.eta.value(),
            ideal_phase: ideal,
            achieved_phase: inner.arg().rem_euclid(2.0 * PI),
            low_confidence: eta.low_confidence,
        });
        etas.push(eta);
    }
    Ok(CountingRun {
        estimate: recover_bits(&etas)?,
        etas,
        ledger: CostLedger::from_stages(&plan),
        stages,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub m: u32,
    pub epsilon: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingCurve {
    pub points: Vec<ScalingPoint>,
    /// Least-squares slope of `ln T_total` against `ln(1/epsilon)`.
    pub slope: f64,
}

impl ScalingCurve {
    /// Writes `m,epsilon,T_total` rows with a header line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "m,epsilon,T_total")?;
        for p in &self.points {
            writeln!(out, "{},{},{}", p.m, p.epsilon, p.total)?;
        }
        Ok(())
    }
}

pub fn scaling_curve(m_range: RangeInclusive<u32>, c_omega: f64) -> Result<ScalingCurve> {
    scaling_curve_with(m_range, c_omega, DEFAULT_DELTA, DEFAULT_FAILURE_PROB)
}

/// Analytic ledger totals over a range of precisions; nothing is sampled.
pub fn scaling_curve_with(
    m_range: RangeInclusive<u32>,
    c_omega: f64,
    delta: f64,
    failure_prob: f64,
) -> Result<ScalingCurve> {
    let (lo, hi) = (*m_range.start(), *m_range.end());
    if lo == 0 || hi > MAX_STAGES_CLOSED_FORM {
        return Err(Error::GuardExceeded(format!(
            "m range {lo}..={hi} must lie within 1..={MAX_STAGES_CLOSED_FORM}"
        )));
    }
    if hi <= lo {
        return Err(Error::SlopeUndefined);
    }
    let points = m_range
        .map(|m| {
            let (r0, slope) = default_repetitions(m, delta, failure_prob)?;
            let plan = plan_stages(m, c_omega, r0, slope)?;
            Ok(ScalingPoint {
                m,
                epsilon: 2f64.powi(-(m as i32)),
                total: CostLedger::from_stages(&plan).total,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let xy: Vec<(f64, f64)> = points
        .iter()
        .map(|p| ((1.0 / p.epsilon).ln(), p.total.ln()))
        .collect();
    Ok(ScalingCurve {
        slope: least_squares_slope(&xy).ok_or(Error::SlopeUndefined)?,
        points,
    })
}

fn least_squares_slope(xy: &[(f64, f64)]) -> Option<f64> {
    if xy.len() < 2 {
        return None;
    }
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
