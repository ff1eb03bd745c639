//! Readout of the control qubit and recovery of the binary expansion of
//! `alpha` from per-stage phase estimates.
//!
//! Stage `j` carries the relative phase `2 pi 2^j alpha`, so its estimate
//! `eta_j` approximates `2^j alpha mod 1 = 0.a_{j+1} a_{j+2} ...`. Bits are
//! fixed from the finest stage back to the coarsest, and `a_1 = 0` because
//! `alpha < 1/2`.

use std::f64::consts::PI;
use std::io::Write;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::C64;

/// Default tolerance on each estimated probability.
pub const DEFAULT_DELTA: f64 = 0.22;

/// Distance on the circle `R/Z`: `min_k |a - b - k|`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// `(P(|+>), P(|+i>))` for a control qubit whose branch overlap is `inner`.
///
/// `inner = <phi'|phi>` is the phase of the forward branch relative to the
/// reversed one, hence the minus sign on the imaginary part.
pub fn measurement_probabilities(inner: C64) -> Result<(f64, f64)> {
    let mag = inner.norm();
    if mag > 1.0 + 1e-9 || !mag.is_finite() {
        return Err(Error::NonPhysicalOverlap(mag));
    }
    let clamp = |p: f64| p.clamp(0.0, 1.0);
    Ok((clamp(0.5 * (1.0 + inner.re)), clamp(0.5 * (1.0 - inner.im))))
}

/// Smallest `R` with `2 exp(-2 delta^2 R) <= failure_prob`.
pub fn chernoff_repetitions(delta: f64, failure_prob: f64) -> Result<u32> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::out_of_range("delta", delta, "must lie in (0, 1/2)"));
    }
    if !(failure_prob > 0.0 && failure_prob.is_finite()) {
        return Err(Error::out_of_range(
            "failure_prob",
            failure_prob,
            "must be positive",
        ));
    }
    let r = ((2.0 / failure_prob).ln() / (2.0 * delta * delta)).ceil();
    Ok(r.max(1.0) as u32)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementPlan {
    pub delta: f64,
    pub failure_prob: f64,
    /// Shots per basis.
    pub repetitions: u32,
}

impl MeasurementPlan {
    pub fn new(delta: f64, failure_prob: f64) -> Result<Self> {
        Ok(MeasurementPlan {
            delta,
            failure_prob,
            repetitions: chernoff_repetitions(delta, failure_prob)?,
        })
    }

    /// A plan with more shots than the Chernoff minimum.
    pub fn with_repetitions(delta: f64, failure_prob: f64, repetitions: u32) -> Result<Self> {
        let min = chernoff_repetitions(delta, failure_prob)?;
        if repetitions < min {
            return Err(Error::out_of_range(
                "repetitions",
                repetitions as f64,
                "below the Chernoff requirement",
            ));
        }
        Ok(MeasurementPlan {
            delta,
            failure_prob,
            repetitions,
        })
    }
}

/// Seed for one stage, derived from the run seed with a splitmix64 round.
pub fn derive_stage_seed(seed: u64, stage: u32) -> u64 {
    let mut z = seed ^ (stage as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Empirical `|+>` and `|+i>` frequencies from `R` shots per basis.
///
/// Shots are drawn from ChaCha8 seeded with `seed`: the first `R` uniforms
/// decide the X-basis outcomes, the next `R` the Y-basis outcomes.
pub fn sample_counts(p_x: f64, p_y: f64, repetitions: u32, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |p: f64| {
        let hits = (0..repetitions).filter(|_| rng.random::<f64>() < p).count();
        hits as f64 / repetitions as f64
    };
    let q_x = draw(p_x);
    let q_y = draw(p_y);
    (q_x, q_y)
}

/// One stage's phase estimate rounded to the eighths grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Eighths(u8);

impl Eighths {
    pub fn new(k: u8) -> Self {
        Eighths(k % 8)
    }

    /// Nearest grid point under the circular distance; an exact tie goes to
    /// the numerically smaller grid value.
    pub fn nearest(phase: f64) -> Self {
        let x = phase.rem_euclid(1.0) * 8.0;
        let k = x.floor();
        let up = x - k > 0.5;
        Eighths::new((k as u8 + u8::from(up)) % 8)
    }

    pub fn numerator(self) -> u8 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 8.0
    }

    pub fn as_ratio(self) -> Ratio<u64> {
        Ratio::new(self.0 as u64, 8)
    }

    /// The three bits `b1 b2 b3` with `self = 0.b1 b2 b3`.
    pub fn bits(self) -> [u8; 3] {
        [(self.0 >> 2) & 1, (self.0 >> 1) & 1, self.0 & 1]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaEstimate {
    pub stage_j: u32,
    pub eta: Eighths,
    /// Estimate of `2^j alpha mod 1` before rounding.
    pub raw_phase: f64,
    /// Both frequencies were exactly 1/2 and the phase is undefined.
    pub low_confidence: bool,
}

impl EtaEstimate {
    /// An estimate built directly from a known phase, as a noiseless readout
    /// would produce.
    pub fn exact(stage_j: u32, phase: f64) -> Self {
        let raw_phase = phase.rem_euclid(1.0);
        EtaEstimate {
            stage_j,
            eta: Eighths::nearest(raw_phase),
            raw_phase,
            low_confidence: false,
        }
    }
}

/// Phase `atan2(1 - 2 q_Y, 2 q_X - 1) / 2 pi mod 1`, rounded to eighths.
pub fn estimate_eta(q_x: f64, q_y: f64, stage_j: u32) -> Result<EtaEstimate> {
    for (name, q) in [("q_x", q_x), ("q_y", q_y)] {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::out_of_range(name, q, "frequency must lie in [0, 1]"));
        }
    }
    let (re, im) = (2.0 * q_x - 1.0, 1.0 - 2.0 * q_y);
    if re == 0.0 && im == 0.0 {
        return Ok(EtaEstimate {
            stage_j,
            eta: Eighths::new(0),
            raw_phase: 0.0,
            low_confidence: true,
        });
    }
    let raw_phase = (im.atan2(re) / (2.0 * PI)).rem_euclid(1.0);
    // rem_euclid can return exactly 1.0 for tiny negative inputs
    let raw_phase = if raw_phase >= 1.0 { 0.0 } else { raw_phase };
    Ok(EtaEstimate {
        stage_j,
        eta: Eighths::nearest(raw_phase),
        raw_phase,
        low_confidence: false,
    })
}

/// Recovered binary fraction `0.a_1 a_2 ... a_{m+1}` with `a_1 = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate {
    pub bits: Vec<u8>,
    #[serde(skip)]
    pub value: Ratio<u64>,
    pub m: u32,
    pub epsilon: f64,
    /// Stages whose bit was a tie at distance 1/4 and defaulted to 0.
    pub ambiguous_stages: Vec<u32>,
}

impl AlphaEstimate {
    pub fn value_f64(&self) -> f64 {
        *self.value.numer() as f64 / *self.value.denom() as f64
    }

    pub fn error_against(&self, alpha: Ratio<u64>) -> f64 {
        let (a, b) = (self.value, alpha);
        let diff = if a > b { a - b } else { b - a };
        *diff.numer() as f64 / *diff.denom() as f64
    }
}

/// Largest number of stages a recovery accepts.
pub const MAX_STAGES: u32 = 60;

/// Fixes `a_{m+1} a_{m+2} a_{m+3}` from `eta_m`, then for `j = m-1 .. 1`
/// picks `a_{j+1}` so that `0.a_{j+1} a_{j+2} a_{j+3}` is closest to
/// `eta_j`. Correct whenever every `eta_j` is within 1/8 of `2^j alpha mod 1`.
pub fn recover_bits(etas: &[EtaEstimate]) -> Result<AlphaEstimate> {
    let m = etas.len() as u32;
    if m == 0 {
        return Err(Error::InvalidStages("no estimates".into()));
    }
    if m > MAX_STAGES {
        return Err(Error::InvalidStages(format!(
            "{m} stages exceed {MAX_STAGES}"
        )));
    }
    let mut by_stage: Vec<Option<Eighths>> = vec![None; m as usize];
    for e in etas {
        let slot = e
            .stage_j
            .checked_sub(1)
            .and_then(|i| by_stage.get_mut(i as usize))
            .ok_or_else(|| Error::InvalidStages(format!("stage {} outside 1..={m}", e.stage_j)))?;
        if slot.replace(e.eta).is_some() {
            return Err(Error::InvalidStages(format!(
                "stage {} repeated",
                e.stage_j
            )));
        }
    }
    let eta: Vec<Eighths> = by_stage.into_iter().map(Option::unwrap).collect();

    // bits[i] holds a_i; index 0 unused
    let mut bits = vec![0u8; m as usize + 4];
    let top = eta[m as usize - 1].bits();
    bits[m as usize + 1..m as usize + 4].copy_from_slice(&top);

    let mut ambiguous_stages = Vec::new();
    for j in (1..m as usize).rev() {
        let target = eta[j - 1].numerator() as i32;
        let tail = 2 * bits[j + 2] as i32 + bits[j + 3] as i32;
        let dist = |b: i32| {
            let d = (4 * b + tail - target).rem_euclid(8);
            d.min(8 - d)
        };
        let (d0, d1) = (dist(0), dist(1));
        if d0 == d1 {
            ambiguous_stages.push(j as u32);
        }
        bits[j + 1] = u8::from(d1 < d0);
    }

    let kept: Vec<u8> = bits[1..=m as usize + 1].to_vec();
    let denom = 1u64 << (m + 1);
    let numer = kept.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
    Ok(AlphaEstimate {
        bits: kept,
        value: Ratio::new(numer, denom),
        m,
        epsilon: 2f64.powi(-(m as i32)),
        ambiguous_stages,
    })
}

/// Noise-free estimates `round_8(2^j alpha mod 1)` for `j = 1..=m`.
pub fn exact_etas(alpha: Ratio<u64>, m: u32) -> Vec<EtaEstimate> {
    (1..=m)
        .map(|j| {
            let scaled = alpha * Ratio::from_integer(1u64 << j);
            let frac = scaled - Ratio::from_integer(scaled.to_integer());
            EtaEstimate::exact(j, *frac.numer() as f64 / *frac.denom() as f64)
        })
        .collect()
}

/// Per-stage line of the JSON-lines result record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: u32,
    pub eta: f64,
    pub raw_phase: f64,
    #[serde(rename = "qX")]
    pub q_x: f64,
    #[serde(rename = "qY")]
    pub q_y: f64,
    #[serde(rename = "R")]
    pub r: u32,
}

/// Final line of the JSON-lines result record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinalRecord {
    pub alpha_hat: f64,
    pub bits: Vec<u8>,
    pub m: u32,
    pub epsilon: f64,
}

impl From<&AlphaEstimate> for FinalRecord {
    fn from(a: &AlphaEstimate) -> Self {
        FinalRecord {
            alpha_hat: a.value_f64(),
            bits: a.bits.clone(),
            m: a.m,
            epsilon: a.epsilon,
        }
    }
}

pub fn write_json_lines<W: Write>(
    stages: &[StageRecord],
    result: &FinalRecord,
    mut out: W,
) -> Result<()> {
    for s in stages {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n")?;
    }
    serde_json::to_writer(&mut out, result)?;
    out.write_all(b"\n")?;
    Ok(())
}
