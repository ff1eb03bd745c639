//! Interpolated oracle Hamiltonians, their ground states and the exact Berry
//! phase of the cyclic path.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::database::MarkedDatabase;
use crate::error::{Error, Result};
use crate::state::{StateVector, SubspaceState, C64};

/// Largest database size for which the dense controlled form is built.
pub const MAX_DENSE_DATABASE: u64 = 64;

/// Interpolation coefficients of the four oracle Hamiltonians.
///
/// `s3` is negative on half the cycle; the weights are coefficients, not
/// probabilities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleWeights {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl ScheduleWeights {
    pub fn sum(&self) -> f64 {
        self.s0 + self.s1 + self.s2 + self.s3
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.s0, self.s1, self.s2, self.s3]
    }
}

pub type WeightFn = fn(f64) -> ScheduleWeights;

pub fn schedule_weights(theta: f64) -> ScheduleWeights {
    let (sin, cos) = theta.sin_cos();
    ScheduleWeights {
        s0: 0.5 * (1.0 + cos),
        s1: 0.5 * sin,
        s2: 0.5 * (1.0 - cos),
        s3: -0.5 * sin,
    }
}

/// Path angle as a function of time.
pub trait Schedule {
    fn theta(&self, t: f64) -> f64;
}

/// `theta = omega * t`.
#[derive(Clone, Copy, Debug)]
pub struct LinearSchedule {
    pub omega: f64,
}

impl Schedule for LinearSchedule {
    fn theta(&self, t: f64) -> f64 {
        self.omega * t
    }
}

/// `theta = total * u^2 (3 - 2u)` with `u = t / duration`: same endpoints as
/// the linear sweep but zero rate at both ends.
#[derive(Clone, Copy, Debug)]
pub struct SmoothstepSchedule {
    pub total_angle: f64,
    pub duration: f64,
}

impl Schedule for SmoothstepSchedule {
    fn theta(&self, t: f64) -> f64 {
        let u = t / self.duration;
        self.total_angle * u * u * (3.0 - 2.0 * u)
    }
}

/// Traverses another schedule with the opposite orientation.
#[derive(Clone, Copy, Debug)]
pub struct Reversed<S>(pub S);

impl<S: Schedule> Schedule for Reversed<S> {
    fn theta(&self, t: f64) -> f64 {
        -self.0.theta(t)
    }
}

/// Dense complex Hamiltonian.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianMatrix(pub DMatrix<C64>);

impl HamiltonianMatrix {
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.0;
        (m - m.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise deviation of `H^2` from `H`.
    pub fn idempotence_defect(&self) -> f64 {
        let m = &self.0;
        (m * m - m).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &HamiltonianMatrix) -> f64 {
        (&self.0 - &other.0)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .0
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.0[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn apply_subspace(&self, s: &SubspaceState) -> SubspaceState {
        let out = self.apply(&s.as_array());
        SubspaceState::new(out[0], out[1])
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..0.5).contains(&alpha) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    Ok(())
}

/// `H(theta)` on `{|0^>, |1^>}`:
/// `[[alpha, -sqrt(ab) e^{i theta}], [-sqrt(ab) e^{-i theta}, beta]]`.
pub fn hamiltonian_2x2(alpha: f64, theta: f64) -> Result<HamiltonianMatrix> {
    check_alpha(alpha)?;
    let beta = 1.0 - alpha;
    let off = -(alpha * beta).sqrt();
    let e = C64::from_polar(1.0, theta);
    Ok(HamiltonianMatrix(DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(alpha, 0.0),
            e * off,
            e.conj() * off,
            C64::new(beta, 0.0),
        ],
    )))
}

fn identity_minus_projector(v: &StateVector) -> DMatrix<C64> {
    let n = v.len();
    let a = v.amplitudes();
    DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        C64::new(id, 0.0) - a[i] * a[j].conj()
    })
}

fn check_dense(db: &MarkedDatabase, controlled: bool) -> Result<usize> {
    let n = db.size();
    let dim = if controlled { 2 * n } else { n };
    if n > MAX_DENSE_DATABASE {
        return Err(Error::DimensionTooLarge {
            size: dim as usize,
            max: if controlled { 2 } else { 1 } * MAX_DENSE_DATABASE as usize,
        });
    }
    Ok(n as usize)
}

/// Oracle Hamiltonian `H_k = I - |psi_k><psi_k|`.
pub fn oracle_hamiltonian(db: &MarkedDatabase, k: i64) -> Result<HamiltonianMatrix> {
    check_dense(db, false)?;
    Ok(HamiltonianMatrix(identity_minus_projector(&db.psi_k(k)?)))
}

/// `psi(theta) = sqrt(beta)|0^> + e^{-i theta} sqrt(alpha)|1^>` on the full
/// register.
pub fn path_state(db: &MarkedDatabase, theta: f64) -> Result<StateVector> {
    let alpha = db.alpha_f64();
    db.embed(&ground_state(alpha, theta)?)
}

/// `I - |psi(theta)><psi(theta)|` built directly from the path state.
pub fn projector_hamiltonian(db: &MarkedDatabase, theta: f64) -> Result<HamiltonianMatrix> {
    check_dense(db, false)?;
    Ok(HamiltonianMatrix(identity_minus_projector(&path_state(
        db, theta,
    )?)))
}

/// `sum_k s_k(theta) H_k`, or the block-diagonal controlled form
/// `|0><0| (x) H(theta) + |1><1| (x) H(-theta)` with the control qubit as the
/// most significant index bit.
pub fn hamiltonian_full(
    db: &MarkedDatabase,
    theta: f64,
    controlled: bool,
) -> Result<HamiltonianMatrix> {
    hamiltonian_full_with(db, theta, controlled, schedule_weights)
}

pub fn hamiltonian_full_with(
    db: &MarkedDatabase,
    theta: f64,
    controlled: bool,
    weights: WeightFn,
) -> Result<HamiltonianMatrix> {
    let n = check_dense(db, controlled)?;
    let oracles = (0..4)
        .map(|k| oracle_hamiltonian(db, k))
        .collect::<Result<Vec<_>>>()?;
    let interpolate = |theta: f64| {
        let w = weights(theta).as_array();
        oracles
            .iter()
            .zip(w)
            .fold(DMatrix::<C64>::zeros(n, n), |acc, (h, s)| {
                acc + h.matrix().map(|z| z * s)
            })
    };
    if !controlled {
        return Ok(HamiltonianMatrix(interpolate(theta)));
    }
    let mut full = DMatrix::<C64>::zeros(2 * n, 2 * n);
    full.view_mut((0, 0), (n, n)).copy_from(&interpolate(theta));
    full.view_mut((n, n), (n, n))
        .copy_from(&interpolate(-theta));
    Ok(HamiltonianMatrix(full))
}

/// Matrix-free form of `sum_k s_k(theta) H_k` for time stepping on the full
/// register: `H v = (sum_k s_k) v - sum_k s_k |psi_k><psi_k|v>`.
#[derive(Clone, Debug)]
pub struct OracleSum {
    psis: [StateVector; 4],
    weights: WeightFn,
}

impl OracleSum {
    pub fn new(db: &MarkedDatabase) -> Result<Self> {
        Self::with_weights(db, schedule_weights)
    }

    pub fn with_weights(db: &MarkedDatabase, weights: WeightFn) -> Result<Self> {
        Ok(OracleSum {
            psis: [db.psi_k(0)?, db.psi_k(1)?, db.psi_k(2)?, db.psi_k(3)?],
            weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.psis[0].len()
    }

    /// Writes `H(theta) v` into `out`.
    pub fn apply(&self, theta: f64, v: &[C64], out: &mut [C64]) {
        let w = (self.weights)(theta).as_array();
        let total: f64 = w.iter().sum();
        for (o, a) in out.iter_mut().zip(v) {
            *o = a * total;
        }
        for (psi, s) in self.psis.iter().zip(w) {
            let p = psi.amplitudes();
            let overlap: C64 = p.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
            let c = overlap * s;
            for (o, a) in out.iter_mut().zip(p) {
                *o -= a * c;
            }
        }
    }
}

/// Ground state `(sqrt(beta), e^{-i theta} sqrt(alpha))` of `H(theta)`.
pub fn ground_state(alpha: f64, theta: f64) -> Result<SubspaceState> {
    check_alpha(alpha)?;
    Ok(SubspaceState::new(
        C64::new((1.0 - alpha).sqrt(), 0.0),
        C64::from_polar(alpha.sqrt(), -theta),
    ))
}

/// Berry phase of one branch after stage `j` and the relative phase between
/// the two control branches.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub gamma: f64,
    pub big_gamma: f64,
    /// Endpoint `2^j pi` of the path angle.
    pub winding: f64,
}

/// `gamma_j = 2^j pi alpha`: the connection `i<psi|d_theta psi>` equals
/// `alpha` at every point of the path.
pub fn berry_phase_exact(alpha: f64, j: u32) -> Result<PhaseRecord> {
    check_alpha(alpha)?;
    if j == 0 {
        return Err(Error::out_of_range("j", 0.0, "stage index starts at 1"));
    }
    let winding = 2f64.powi(j as i32) * PI;
    let gamma = winding * alpha;
    Ok(PhaseRecord {
        gamma,
        big_gamma: 2.0 * gamma,
        winding,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn weights_examples() {
        assert_eq!(
            schedule_weights(0.0),
            ScheduleWeights {
                s0: 1.0,
                s1: 0.0,
                s2: 0.0,
                s3: 0.0
            }
        );
        let w = schedule_weights(PI / 2.0);
        for (got, want) in w.as_array().iter().zip([0.5, 0.5, 0.5, -0.5]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!((schedule_weights(1.234).sum() - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn weights_sum_to_one(theta in -100.0f64..100.0) {
            prop_assert!((schedule_weights(theta).sum() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn two_by_two_is_a_projector_complement(alpha in 0.0f64..0.4999, theta in 0.0f64..(2.0 * PI)) {
            let h = hamiltonian_2x2(alpha, theta).unwrap();
            prop_assert!(h.hermiticity_defect() < 1e-12);
            prop_assert!(h.idempotence_defect() < 1e-10);
            let g = h.apply_subspace(&ground_state(alpha, theta).unwrap());
            prop_assert!(g.norm_sqr().sqrt() < 1e-12);
        }
    }

    #[test]
    fn two_by_two_examples() {
        let h = hamiltonian_2x2(0.25, 0.0).unwrap();
        let r = 3f64.sqrt() / 4.0;
        let want = [[0.25, -r], [-r, 0.75]];
        for (i, row) in want.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                assert!((h.entry(i, j) - C64::new(*w, 0.0)).norm() < 1e-15);
            }
        }
        let h = hamiltonian_2x2(0.0, 1.7).unwrap();
        assert_eq!(h.entry(0, 0), C64::new(0.0, 0.0));
        assert_eq!(h.entry(1, 1), C64::new(1.0, 0.0));
        assert!(h.entry(0, 1).norm() == 0.0 && h.entry(1, 0).norm() == 0.0);

        // closed-form 2x2 eigenvalues: tr/2 +- sqrt((tr/2)^2 - det)
        let h = hamiltonian_2x2(0.3, 0.7).unwrap();
        let tr = (h.entry(0, 0) + h.entry(1, 1)).re;
        let det = (h.entry(0, 0) * h.entry(1, 1) - h.entry(0, 1) * h.entry(1, 0)).re;
        let disc = (tr * tr / 4.0 - det).sqrt();
        assert!((tr / 2.0 - disc).abs() < 1e-12);
        assert!((tr / 2.0 + disc - 1.0).abs() < 1e-12);

        assert!(matches!(
            hamiltonian_2x2(0.5, 0.0),
            Err(Error::AlphaOutOfRange(_))
        ));
    }

    #[test]
    fn full_form_at_zero_is_h0() {
        let db = MarkedDatabase::new(2, [2]).unwrap();
        let h = hamiltonian_full(&db, 0.0, false).unwrap();
        let h0 = oracle_hamiltonian(&db, 0).unwrap();
        assert!(h.max_abs_diff(&h0) < 1e-15);
        let psi0 = db.psi_k(0).unwrap();
        let manual = HamiltonianMatrix(identity_minus_projector(&psi0));
        assert!(h.max_abs_diff(&manual) < 1e-15);
    }

    #[test]
    fn oracle_interpolation_collapses_to_single_projector() {
        let db = MarkedDatabase::new(3, [0, 5, 6]).unwrap();
        let summed = hamiltonian_full(&db, 0.9, false).unwrap();
        let direct = projector_hamiltonian(&db, 0.9).unwrap();
        assert!(summed.max_abs_diff(&direct) < 1e-12);
    }

    #[test]
    fn controlled_blocks() {
        let db = MarkedDatabase::new(2, [3]).unwrap();
        let theta = 0.4;
        let c = hamiltonian_full(&db, theta, true).unwrap();
        let plus = hamiltonian_full(&db, theta, false).unwrap();
        let minus = hamiltonian_full(&db, -theta, false).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(c.entry(i, j), plus.entry(i, j));
                assert_eq!(c.entry(4 + i, 4 + j), minus.entry(i, j));
                assert_eq!(c.entry(i, 4 + j), C64::new(0.0, 0.0));
                assert_eq!(c.entry(4 + i, j), C64::new(0.0, 0.0));
            }
        }
        let big = MarkedDatabase::new(7, [1]).unwrap();
        assert!(matches!(
            hamiltonian_full(&big, 0.0, true),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn full_spectrum_and_gap() {
        let db = MarkedDatabase::new(3, [2, 7]).unwrap();
        let ev = hamiltonian_full(&db, 2.3, false).unwrap().eigenvalues();
        assert!(ev[0].abs() < 1e-10);
        for e in &ev[1..] {
            assert!((e - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn matrix_free_matches_dense() {
        let db = MarkedDatabase::new(3, [1, 6]).unwrap();
        let op = OracleSum::new(&db).unwrap();
        let v: Vec<C64> = (0..8).map(|i| C64::new(i as f64, 1.0 - i as f64)).collect();
        let mut out = vec![C64::new(0.0, 0.0); 8];
        for theta in [0.0, 1.1, -2.5] {
            op.apply(theta, &v, &mut out);
            let dense = hamiltonian_full(&db, theta, false).unwrap().apply(&v);
            for (a, b) in out.iter().zip(&dense) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn ground_state_examples() {
        let g = ground_state(0.2, 0.0).unwrap();
        assert!((g.x.re - 0.8f64.sqrt()).abs() < 1e-15 && (g.y.re - 0.2f64.sqrt()).abs() < 1e-15);
        let g = ground_state(0.25, PI).unwrap();
        assert!((g.x - C64::new(3f64.sqrt() / 2.0, 0.0)).norm() < 1e-15);
        assert!((g.y - C64::new(-0.5, 0.0)).norm() < 1e-15);
        let h = hamiltonian_2x2(0.3, 2.1).unwrap();
        let r = h.apply_subspace(&ground_state(0.3, 2.1).unwrap());
        assert!(r.norm_sqr().sqrt() < 1e-12);
    }

    #[test]
    fn berry_phase_examples() {
        let p = berry_phase_exact(0.25, 1).unwrap();
        assert!((p.gamma - PI / 2.0).abs() < 1e-15);
        assert!((p.big_gamma - PI).abs() < 1e-15);
        assert_eq!(berry_phase_exact(0.0, 5).unwrap().gamma, 0.0);
        let p = berry_phase_exact(5.0 / 16.0, 3).unwrap();
        assert!((p.gamma - 2.5 * PI).abs() < 1e-12);
        assert!((p.big_gamma - 5.0 * PI).abs() < 1e-12);
        assert_eq!(p.big_gamma, 2.0 * p.gamma);
        assert!(berry_phase_exact(0.1, 0).is_err());
    }

    #[test]
    fn smoothstep_hits_endpoints() {
        let s = SmoothstepSchedule {
            total_angle: 4.0 * PI,
            duration: 10.0,
        };
        assert_eq!(s.theta(0.0), 0.0);
        assert!((s.theta(10.0) - 4.0 * PI).abs() < 1e-12);
        assert!((Reversed(s).theta(10.0) + 4.0 * PI).abs() < 1e-12);
    }
}
