//! Complex state vectors over the full register and over the two-dimensional
//! invariant subspace.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type C64 = Complex64;

/// Dense state vector over the computational basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(Vec<C64>);

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Self {
        StateVector(amplitudes)
    }

    pub fn zeros(len: usize) -> Self {
        StateVector(vec![C64::new(0.0, 0.0); len])
    }

    /// Computational basis state `|index>`.
    pub fn basis(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.0[index] = C64::new(1.0, 0.0);
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.0
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.0
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        debug_assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn scaled(&self, factor: C64) -> StateVector {
        StateVector(self.0.iter().map(|a| a * factor).collect())
    }

    pub fn normalized(&self) -> StateVector {
        let n = self.norm();
        StateVector(self.0.iter().map(|a| a / n).collect())
    }

    /// Largest componentwise distance after removing the global phase.
    ///
    /// Both vectors are rotated so that the amplitude where `self` has its
    /// largest magnitude becomes real and non-negative.
    pub fn distance_up_to_global_phase(&self, other: &StateVector) -> f64 {
        if self.len() != other.len() {
            return f64::INFINITY;
        }
        let pivot = self
            .0
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .map(|(i, _)| i);
        let Some(pivot) = pivot else {
            return 0.0;
        };
        let unit = |z: C64| {
            if z.norm() > 0.0 {
                z.conj() / z.norm()
            } else {
                C64::new(1.0, 0.0)
            }
        };
        let ra = unit(self.0[pivot]);
        let rb = unit(other.0[pivot]);
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a * ra - b * rb).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq_up_to_global_phase(&self, other: &StateVector, tol: f64) -> bool {
        self.distance_up_to_global_phase(other) <= tol
    }
}

impl From<Vec<C64>> for StateVector {
    fn from(v: Vec<C64>) -> Self {
        StateVector(v)
    }
}

/// Amplitudes `(x, y)` on the basis `{|0^>, |1^>}` of unmarked and marked
/// uniform superpositions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubspaceState {
    pub x: C64,
    pub y: C64,
}

impl SubspaceState {
    pub fn new(x: C64, y: C64) -> Self {
        SubspaceState { x, y }
    }

    /// The uniform superposition `sqrt(beta)|0^> + sqrt(alpha)|1^>`.
    pub fn uniform(alpha: f64) -> Self {
        SubspaceState::new(
            C64::new((1.0 - alpha).sqrt(), 0.0),
            C64::new(alpha.sqrt(), 0.0),
        )
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x.norm_sqr() + self.y.norm_sqr()
    }

    pub fn inner(&self, other: &SubspaceState) -> C64 {
        self.x.conj() * other.x + self.y.conj() * other.y
    }

    pub fn fidelity(&self, other: &SubspaceState) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn as_array(&self) -> [C64; 2] {
        [self.x, self.y]
    }
}
