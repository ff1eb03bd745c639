//! The counting instance: a membership predicate over `N = 2^n` items, the
//! uniform superpositions it induces and the phase oracle built from it.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::state::{StateVector, SubspaceState, C64};

/// Largest qubit count accepted for an instance.
pub const MAX_QUBITS: u32 = 62;

/// Largest qubit count for which dense `2^n` vectors are materialized.
pub const MAX_DENSE_QUBITS: u32 = 24;

/// A database of `N = 2^n` items of which `M < N/2` are marked.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedDatabase {
    n: u32,
    marked: Vec<u64>,
    alpha: Ratio<u64>,
}

impl MarkedDatabase {
    /// Builds an instance. Duplicate indices are collapsed.
    pub fn new(n: u32, marked: impl IntoIterator<Item = u64>) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::NonPowerOfTwoDomain(n));
        }
        let size = 1u64 << n;
        let mut marked: Vec<u64> = marked.into_iter().collect();
        if let Some(&index) = marked.iter().find(|&&s| s >= size) {
            return Err(Error::IndexOutOfRange { index, size });
        }
        marked.sort_unstable();
        marked.dedup();
        let count = marked.len() as u64;
        if 2 * count >= size {
            return Err(Error::AlphaTooLarge {
                marked: count,
                size,
            });
        }
        Ok(MarkedDatabase {
            n,
            marked,
            alpha: Ratio::new(count, size),
        })
    }

    pub fn qubits(&self) -> u32 {
        self.n
    }

    /// `N`.
    pub fn size(&self) -> u64 {
        1u64 << self.n
    }

    /// `M`.
    pub fn marked_count(&self) -> u64 {
        self.marked.len() as u64
    }

    pub fn marked(&self) -> &[u64] {
        &self.marked
    }

    /// Exact marked fraction `M/N`.
    pub fn alpha(&self) -> Ratio<u64> {
        self.alpha
    }

    /// Exact `1 - alpha`.
    pub fn beta(&self) -> Ratio<u64> {
        Ratio::from_integer(1) - self.alpha
    }

    /// The marked fraction as a float; the only place the exact value is
    /// converted for the dynamics.
    pub fn alpha_f64(&self) -> f64 {
        *self.alpha.numer() as f64 / *self.alpha.denom() as f64
    }

    /// `f(s)`.
    pub fn is_marked(&self, s: u64) -> bool {
        self.marked.binary_search(&s).is_ok()
    }

    /// True when no item is marked and `|1^>` does not exist.
    pub fn is_degenerate(&self) -> bool {
        self.marked.is_empty()
    }

    fn dense_len(&self) -> Result<usize> {
        if self.n > MAX_DENSE_QUBITS {
            return Err(Error::DimensionTooLarge {
                size: self.size() as usize,
                max: 1 << MAX_DENSE_QUBITS,
            });
        }
        Ok(self.size() as usize)
    }

    fn check_len(&self, v: &StateVector) -> Result<usize> {
        let len = self.dense_len()?;
        if v.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                found: v.len(),
            });
        }
        Ok(len)
    }

    /// `|0^>`, the normalized uniform superposition of unmarked items.
    pub fn zero_hat(&self) -> Result<StateVector> {
        let len = self.dense_len()?;
        let amp = C64::new(
            1.0 / ((self.size() - self.marked_count()) as f64).sqrt(),
            0.0,
        );
        Ok((0..len as u64)
            .map(|s| {
                if self.is_marked(s) {
                    C64::new(0.0, 0.0)
                } else {
                    amp
                }
            })
            .collect::<Vec<_>>()
            .into())
    }

    /// `|1^>`, or `None` when nothing is marked.
    pub fn one_hat(&self) -> Result<Option<StateVector>> {
        let len = self.dense_len()?;
        if self.is_degenerate() {
            return Ok(None);
        }
        let mut v = StateVector::zeros(len);
        let amp = C64::new(1.0 / (self.marked_count() as f64).sqrt(), 0.0);
        for &s in &self.marked {
            v.amplitudes_mut()[s as usize] = amp;
        }
        Ok(Some(v))
    }

    /// Maps subspace coordinates to the full register.
    pub fn embed(&self, state: &SubspaceState) -> Result<StateVector> {
        let zero = self.zero_hat()?;
        let one = self.one_hat()?;
        let mut out = zero.scaled(state.x);
        if let Some(one) = one {
            for (o, b) in out.amplitudes_mut().iter_mut().zip(one.amplitudes()) {
                *o += state.y * b;
            }
        }
        Ok(out)
    }

    /// `psi_k = sqrt(beta)|0^> + (-i)^k sqrt(alpha)|1^>`, the state after `k`
    /// phase-oracle applications to the uniform superposition.
    pub fn psi_k(&self, k: i64) -> Result<StateVector> {
        let len = self.dense_len()?;
        let phase = neg_i_pow(k);
        let amp = C64::new(1.0 / (len as f64).sqrt(), 0.0);
        Ok((0..len as u64)
            .map(|s| if self.is_marked(s) { amp * phase } else { amp })
            .collect::<Vec<_>>()
            .into())
    }

    /// Multiplies every marked amplitude by `exp(-i pi/2) = -i`.
    pub fn apply_phase_oracle(&self, v: &StateVector) -> Result<StateVector> {
        self.check_len(v)?;
        let mut out = v.clone();
        for &s in &self.marked {
            out.amplitudes_mut()[s as usize] *= C64::new(0.0, -1.0);
        }
        Ok(out)
    }

    /// Runs the reversible oracle `|x>|y>|z> -> |x>|y^f(x)>|z^(y f(x))>` on
    /// `v (x) (|0>+i|1>)/sqrt2 (x) (|0>-|1>)/sqrt2`, factors the two auxiliary
    /// qubits back off and compares the residual register state with
    /// [`apply_phase_oracle`](Self::apply_phase_oracle) up to global phase.
    ///
    /// Returns false if the output is not a product with the original
    /// auxiliary state.
    pub fn kickback_equivalence_check(&self, v: &StateVector) -> Result<bool> {
        let len = self.check_len(v)?;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // index = 2*y + z
        let aux = [
            C64::new(h * h, 0.0),
            C64::new(-h * h, 0.0),
            C64::new(0.0, h * h),
            C64::new(0.0, -h * h),
        ];

        let mut output = vec![C64::new(0.0, 0.0); 4 * len];
        for (x, &amp) in v.amplitudes().iter().enumerate() {
            let f = u8::from(self.is_marked(x as u64));
            for y in 0..2u8 {
                for z in 0..2u8 {
                    let y_out = y ^ f;
                    let z_out = z ^ (y & f);
                    let src = aux[(2 * y + z) as usize];
                    output[4 * x + (2 * y_out + z_out) as usize] += amp * src;
                }
            }
        }

        // project the auxiliary pair back onto its initial state
        let residual: StateVector = (0..len)
            .map(|x| {
                (0..4)
                    .map(|a| aux[a].conj() * output[4 * x + a])
                    .sum::<C64>()
            })
            .collect::<Vec<_>>()
            .into();

        let product_defect = (0..len)
            .flat_map(|x| (0..4).map(move |a| (x, a)))
            .map(|(x, a)| (output[4 * x + a] - residual.amplitudes()[x] * aux[a]).norm())
            .fold(0.0, f64::max);
        if product_defect > 1e-12 {
            return Ok(false);
        }

        let expected = self.apply_phase_oracle(v)?;
        Ok(expected.approx_eq_up_to_global_phase(&residual, 1e-12))
    }

    /// Coordinates of `v` in `{|0^>, |1^>}` and the norm of the part of `v`
    /// outside that span.
    pub fn project_to_subspace(&self, v: &StateVector) -> Result<Projection> {
        self.check_len(v)?;
        let zero = self.zero_hat()?;
        let one = self.one_hat()?;
        let x = zero.inner(v);
        let y = one.as_ref().map_or(C64::new(0.0, 0.0), |o| o.inner(v));

        let leakage_sqr: f64 = v
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(s, a)| {
                let z = zero.amplitudes()[s];
                let o = one
                    .as_ref()
                    .map_or(C64::new(0.0, 0.0), |o| o.amplitudes()[s]);
                (a - x * z - y * o).norm_sqr()
            })
            .sum();

        let in_span = (x.norm_sqr() + y.norm_sqr()).sqrt();
        let state = if in_span > 0.0 {
            SubspaceState::new(x / in_span, y / in_span)
        } else {
            SubspaceState::new(x, y)
        };
        Ok(Projection {
            state,
            leakage: leakage_sqr.sqrt(),
            in_span_norm: in_span,
            degenerate: self.is_degenerate(),
        })
    }

    /// Renders the instance file format.
    pub fn to_instance_string(&self) -> String {
        let marked: Vec<String> = self.marked.iter().map(u64::to_string).collect();
        format!("n={}\nmarked={}\n", self.n, marked.join(","))
    }
}

/// `(-i)^k` for any integer `k`.
fn neg_i_pow(k: i64) -> C64 {
    match k.rem_euclid(4) {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, -1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, 1.0),
    }
}

/// Result of [`MarkedDatabase::project_to_subspace`].
#[derive(Clone, Copy, Debug)]
pub struct Projection {
    /// Renormalized coordinates; left unnormalized when the in-span part
    /// vanishes.
    pub state: SubspaceState,
    pub leakage: f64,
    pub in_span_norm: f64,
    /// Set when nothing is marked: `y` is reported as 0 and leakage is
    /// measured against `|0^>` alone.
    pub degenerate: bool,
}

impl fmt::Display for MarkedDatabase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_instance_string())
    }
}

impl FromStr for MarkedDatabase {
    type Err = Error;

    /// Parses `n=<int>` on the first line and `marked=<i,j,...>` on the
    /// second. Blank trailing lines are ignored.
    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
        let n_line = lines
            .next()
            .ok_or_else(|| Error::InstanceFormat("missing `n=` line".into()))?;
        let marked_line = lines
            .next()
            .ok_or_else(|| Error::InstanceFormat("missing `marked=` line".into()))?;
        if let Some(extra) = lines.next() {
            return Err(Error::InstanceFormat(format!("unexpected line `{extra}`")));
        }

        let n = n_line
            .strip_prefix("n=")
            .ok_or_else(|| Error::InstanceFormat(format!("expected `n=<int>`, got `{n_line}`")))?
            .trim()
            .parse::<u32>()
            .map_err(|e| Error::InstanceFormat(format!("bad qubit count: {e}")))?;
        let list = marked_line
            .strip_prefix("marked=")
            .ok_or_else(|| {
                Error::InstanceFormat(format!("expected `marked=<indices>`, got `{marked_line}`"))
            })?
            .trim();
        let marked = if list.is_empty() {
            Vec::new()
        } else {
            list.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<u64>()
                        .map_err(|e| Error::InstanceFormat(format!("bad index `{t}`: {e}")))
                })
                .collect::<Result<Vec<_>>>()?
        };
        MarkedDatabase::new(n, marked)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unit(len: usize, seed: u64) -> StateVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: StateVector = (0..len)
            .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect::<Vec<_>>()
            .into();
        v.normalized()
    }

    #[test]
    fn alpha_is_exact() {
        let db = MarkedDatabase::new(3, [3]).unwrap();
        assert_eq!(db.alpha(), Ratio::new(1, 8));
        assert_eq!(db.alpha() + db.beta(), Ratio::from_integer(1));
        let empty = MarkedDatabase::new(3, []).unwrap();
        assert_eq!(empty.alpha(), Ratio::from_integer(0));
        assert!(empty.is_degenerate());
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            MarkedDatabase::new(3, [0, 1, 2, 3]),
            Err(Error::AlphaTooLarge { marked: 4, size: 8 })
        ));
        assert!(matches!(
            MarkedDatabase::new(3, [8]),
            Err(Error::IndexOutOfRange { index: 8, size: 8 })
        ));
        assert!(matches!(
            MarkedDatabase::new(0, []),
            Err(Error::NonPowerOfTwoDomain(0))
        ));
        // duplicates collapse before the alpha check
        let db = MarkedDatabase::new(3, [1, 1, 1, 2]).unwrap();
        assert_eq!(db.marked(), &[1, 2]);
    }

    #[test]
    fn psi_k_matches_closed_expression() {
        let db = MarkedDatabase::new(3, [5]).unwrap();
        let psi0 = db.psi_k(0).unwrap();
        for a in psi0.amplitudes() {
            assert!((a - C64::new(8f64.sqrt().recip(), 0.0)).norm() < 1e-15);
        }
        let psi2 = db.psi_k(2).unwrap();
        let expected = db
            .embed(&SubspaceState::new(
                C64::new((7.0f64 / 8.0).sqrt(), 0.0),
                C64::new(-(1.0f64 / 8.0).sqrt(), 0.0),
            ))
            .unwrap();
        assert!(psi2.distance_up_to_global_phase(&expected) < 1e-12);
        assert_eq!(db.psi_k(1).unwrap(), db.psi_k(5).unwrap());
        assert_eq!(db.psi_k(-1).unwrap(), db.psi_k(3).unwrap());
    }

    #[test]
    fn oracle_powers_generate_psi_k() {
        let db = MarkedDatabase::new(4, [0, 3, 9]).unwrap();
        let mut v = db.psi_k(0).unwrap();
        for k in 0..4 {
            let psi = db.psi_k(k).unwrap();
            for (a, b) in v.amplitudes().iter().zip(psi.amplitudes()) {
                assert!((a - b).norm() < 1e-12);
            }
            v = db.apply_phase_oracle(&v).unwrap();
        }
        // four applications return to the start
        assert!(v
            .amplitudes()
            .iter()
            .zip(db.psi_k(0).unwrap().amplitudes())
            .all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn oracle_leaves_unmarked_basis_states() {
        let db = MarkedDatabase::new(3, [2]).unwrap();
        let e = StateVector::basis(8, 6);
        assert_eq!(db.apply_phase_oracle(&e).unwrap(), e);
        assert!(matches!(
            db.apply_phase_oracle(&StateVector::zeros(4)),
            Err(Error::LengthMismatch {
                expected: 8,
                found: 4
            })
        ));
    }

    #[test]
    fn kickback_reproduces_phase_oracle() {
        let db = MarkedDatabase::new(2, [1]).unwrap();
        assert!(db
            .kickback_equivalence_check(&db.psi_k(0).unwrap())
            .unwrap());

        let empty = MarkedDatabase::new(3, []).unwrap();
        assert!(empty
            .kickback_equivalence_check(&random_unit(8, 3))
            .unwrap());

        let db = MarkedDatabase::new(3, [1, 4, 6]).unwrap();
        for seed in 0..5 {
            assert!(db
                .kickback_equivalence_check(&random_unit(8, seed))
                .unwrap());
        }
    }

    #[test]
    fn kickback_rejects_wrong_length() {
        let db = MarkedDatabase::new(2, [1]).unwrap();
        assert!(db
            .kickback_equivalence_check(&StateVector::zeros(3))
            .is_err());
    }

    #[test]
    fn hat_states_are_orthonormal() {
        let db = MarkedDatabase::new(4, [1, 2, 7]).unwrap();
        let z = db.zero_hat().unwrap();
        let o = db.one_hat().unwrap().unwrap();
        assert!((z.norm() - 1.0).abs() < 1e-12);
        assert!((o.norm() - 1.0).abs() < 1e-12);
        assert!(z.inner(&o).norm() < 1e-12);
    }

    #[test]
    fn projection_examples() {
        let db = MarkedDatabase::new(3, [4]).unwrap();
        let p = db.project_to_subspace(&db.psi_k(2).unwrap()).unwrap();
        assert!((p.state.x - C64::new((7.0f64 / 8.0).sqrt(), 0.0)).norm() < 1e-12);
        assert!((p.state.y - C64::new(-(1.0f64 / 8.0).sqrt(), 0.0)).norm() < 1e-12);
        assert!(p.leakage < 1e-12);

        let p = db.project_to_subspace(&StateVector::basis(8, 4)).unwrap();
        assert!(p.state.x.norm() < 1e-12 && (p.state.y - 1.0).norm() < 1e-12);
        assert!(p.leakage < 1e-12);

        // orthogonal to both: the difference of two unmarked basis states
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = StateVector::zeros(8);
        v.amplitudes_mut()[0] = C64::new(h, 0.0);
        v.amplitudes_mut()[1] = C64::new(-h, 0.0);
        let p = db.project_to_subspace(&v).unwrap();
        assert!((p.leakage - 1.0).abs() < 1e-12);
        assert!(p.in_span_norm < 1e-12);
    }

    #[test]
    fn degenerate_projection_is_flagged() {
        let db = MarkedDatabase::new(2, []).unwrap();
        let p = db.project_to_subspace(&StateVector::basis(4, 0)).unwrap();
        assert!(p.degenerate);
        assert_eq!(p.state.y, C64::new(0.0, 0.0));
        assert!((p.leakage - (0.75f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn instance_format_round_trips() {
        let db: MarkedDatabase = "n=4\nmarked=3,1,9\n".parse().unwrap();
        assert_eq!(db.marked(), &[1, 3, 9]);
        assert_eq!(db.to_instance_string(), "n=4\nmarked=1,3,9\n");
        let empty: MarkedDatabase = "n=3\nmarked=\n".parse().unwrap();
        assert_eq!(empty.marked_count(), 0);
        assert!(matches!(
            "marked=1\nn=3".parse::<MarkedDatabase>(),
            Err(Error::InstanceFormat(_))
        ));
        assert!(matches!(
            "n=3\nmarked=1\nextra=2".parse::<MarkedDatabase>(),
            Err(Error::InstanceFormat(_))
        ));
        assert!(matches!(
            "n=3\nmarked=9".parse::<MarkedDatabase>(),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn dense_operations_are_capped() {
        let db = MarkedDatabase::new(40, [7]).unwrap();
        assert!((db.alpha_f64() - 2f64.powi(-40)).abs() < 1e-25);
        assert!(matches!(db.psi_k(0), Err(Error::DimensionTooLarge { .. })));
    }
}
