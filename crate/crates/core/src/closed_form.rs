//! Exact solution of the two-level Schrödinger equation under `H(+-omega t)`
//! starting from the uniform superposition.
//!
//! With `E = sqrt((1-omega)^2 + 4 alpha omega)` the state is
//!
//! ```text
//! x(t) = e^{-it/2} (A e^{i w1 t} + B e^{i w2 t})
//! y(t) = e^{-it/2} (C e^{-i w1 t} + D e^{-i w2 t}),   w1,2 = (omega +- E)/2
//! ```
//!
//! The reversed sweep is the same solution with `omega -> -omega`; primed
//! quantities below refer to it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::check_alpha;
use crate::state::{SubspaceState, C64};

/// Upper end of the accepted sweep rate.
pub const MAX_OMEGA: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormSolution {
    pub alpha: f64,
    pub beta: f64,
    /// Signed sweep rate; negative for the reversed branch.
    pub omega: f64,
    pub e: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub lambda: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega > 0.0 && omega < MAX_OMEGA) {
        return Err(Error::out_of_range("omega", omega, "must lie in (0, 1/2)"));
    }
    Ok(())
}

/// Solution for the forward sweep `H(omega t)`.
pub fn solve_closed_form(alpha: f64, omega: f64) -> Result<ClosedFormSolution> {
    check_alpha(alpha)?;
    check_omega(omega)?;
    Ok(ClosedFormSolution::signed(alpha, omega))
}

impl ClosedFormSolution {
    fn signed(alpha: f64, omega: f64) -> Self {
        let beta = 1.0 - alpha;
        let (sa, sb) = (alpha.sqrt(), beta.sqrt());
        let e = ((1.0 - omega).powi(2) + 4.0 * alpha * omega).sqrt();
        let den = (1.0 - omega).powi(2) + 4.0 * alpha * omega + (beta - alpha - omega) * e;
        let a =
            ((1.0 - omega).powi(2) - alpha * (1.0 - 3.0 * omega) + (beta - omega) * e) / den * sb;
        let b = (alpha * (1.0 + omega) - alpha * e) / den * sb;
        let c =
            ((1.0 + omega).powi(2) - beta * (1.0 + 3.0 * omega) - (alpha + omega) * e) / den * sa;
        let d = (beta * (1.0 - omega) + beta * e) / den * sa;
        ClosedFormSolution {
            alpha,
            beta,
            omega,
            e,
            omega1: 0.5 * (omega + e),
            omega2: 0.5 * (omega - e),
            lambda: 2.0 * (alpha * beta).sqrt() / ((beta - alpha - omega) + e),
            a,
            b,
            c,
            d,
        }
    }

    /// The solution with `omega -> -omega`.
    pub fn reversed(&self) -> ClosedFormSolution {
        ClosedFormSolution::signed(self.alpha, -self.omega)
    }

    /// `(A, B, C, D)` from the ratio `lambda = D/A = -B/C` instead of `E`.
    pub fn lambda_form(&self) -> [f64; 4] {
        let l = self.lambda;
        let (sa, sb) = (self.alpha.sqrt(), self.beta.sqrt());
        let n = 1.0 + l * l;
        [
            (l * sa + sb) / n,
            l * (l * sb - sa) / n,
            (sa - l * sb) / n,
            l * (l * sa + sb) / n,
        ]
    }

    pub fn coefficients(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn state_at(&self, t: f64) -> SubspaceState {
        let x = C64::from_polar(self.a, (self.omega1 - 0.5) * t)
            + C64::from_polar(self.b, (self.omega2 - 0.5) * t);
        let y = C64::from_polar(self.c, -(self.omega1 + 0.5) * t)
            + C64::from_polar(self.d, -(self.omega2 + 0.5) * t);
        SubspaceState::new(x, y)
    }
}

/// State at time `t`, following the reversed sweep when `reversed` is set.
pub fn evolve_closed_form(sol: &ClosedFormSolution, t: f64, reversed: bool) -> SubspaceState {
    if reversed {
        sol.reversed().state_at(t)
    } else {
        sol.state_at(t)
    }
}

/// `(E - E')/2 * T` and `(E + E')/2 * T`, unreduced.
pub fn mu_phases(alpha: f64, omega: f64, t: f64) -> (f64, f64) {
    let e = ((1.0 - omega).powi(2) + 4.0 * alpha * omega).sqrt();
    let e_rev = ((1.0 + omega).powi(2) - 4.0 * alpha * omega).sqrt();
    // E^2 - E'^2 = -4 omega (1 - 2 alpha), taken in this form to avoid cancellation
    let diff = -4.0 * omega * (1.0 - 2.0 * alpha) / (e + e_rev);
    (0.5 * diff * t, 0.5 * (e + e_rev) * t)
}

/// The overlap that carries the relative control phase, together with the
/// phases and probabilities derived from it.
///
/// `inner` is `<phi'(T)|phi(T)>`, the phase of the forward branch relative to
/// the reversed one, which is close to `exp(i 2 pi 2^j alpha)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub inner: C64,
    /// Same overlap from the four-term expansion in `mu1`, `mu2`.
    pub inner_formula: C64,
    pub mu1: f64,
    pub mu2: f64,
    pub p_success: f64,
    pub arg_phase: f64,
    pub leak_magnitude: f64,
}

impl OverlapReport {
    pub fn route_disagreement(&self) -> f64 {
        (self.inner - self.inner_formula).norm()
    }
}

pub fn overlap_report(alpha: f64, omega: f64, t: f64) -> Result<OverlapReport> {
    let fwd = solve_closed_form(alpha, omega)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::out_of_range(
            "T",
            t,
            "evolution time must be positive",
        ));
    }
    let rev = fwd.reversed();
    let inner = rev.state_at(t).inner(&fwd.state_at(t));

    let (mu1, mu2) = mu_phases(alpha, omega, t);
    // e^{+-i omega T} factors vanish when omega T is a multiple of 2 pi
    let w = C64::from_polar(1.0, omega * t);
    let wc = w.conj();
    let (a, b, c, d) = (fwd.a, fwd.b, fwd.c, fwd.d);
    let (ar, br, cr, dr) = (rev.a, rev.b, rev.c, rev.d);
    let inner_formula = (w * (a * ar) + wc * (d * dr)) * C64::from_polar(1.0, mu1)
        + (w * (b * br) + wc * (c * cr)) * C64::from_polar(1.0, -mu1)
        + (w * (a * br) + wc * (cr * d)) * C64::from_polar(1.0, mu2)
        + (w * (ar * b) + wc * (c * dr)) * C64::from_polar(1.0, -mu2);

    let mag_sqr = inner.norm_sqr();
    Ok(OverlapReport {
        inner,
        inner_formula,
        mu1,
        mu2,
        p_success: 0.5 * (1.0 + mag_sqr),
        arg_phase: inner.arg(),
        leak_magnitude: (1.0 - mag_sqr).max(0.0).sqrt(),
    })
}

/// Exact `AA'+DD'`, `BB'+CC'`, `AB'+C'D` and `A'B+CD'`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbativeCoefficients {
    pub aa_dd: f64,
    pub bb_cc: f64,
    pub ab_cd: f64,
    pub ba_dc: f64,
}

impl PerturbativeCoefficients {
    /// Small-omega limits `1 - 3ab w^2`, `-ab w^2`, `2ab w^2`, `2ab w^2`.
    pub fn leading_order(alpha: f64, omega: f64) -> Self {
        let k = alpha * (1.0 - alpha) * omega * omega;
        PerturbativeCoefficients {
            aa_dd: 1.0 - 3.0 * k,
            bb_cc: -k,
            ab_cd: 2.0 * k,
            ba_dc: 2.0 * k,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.aa_dd, self.bb_cc, self.ab_cd, self.ba_dc]
    }
}

pub fn perturbative_coefficients(alpha: f64, omega: f64) -> Result<PerturbativeCoefficients> {
    let f = solve_closed_form(alpha, omega)?;
    let r = f.reversed();
    Ok(PerturbativeCoefficients {
        aa_dd: f.a * r.a + f.d * r.d,
        bb_cc: f.b * r.b + f.c * r.c,
        ab_cd: f.a * r.b + r.c * f.d,
        ba_dc: r.a * f.b + f.c * r.d,
    })
}

/// Shared denominator of the four overlap coefficients,
/// `[(1-w)^2 + 4aw + (1-2a-w)E] [(1+w)^2 - 4aw + (1-2a+w)E']`.
pub fn coefficient_denominator(alpha: f64, omega: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_omega(omega)?;
    let w = omega;
    let e = ((1.0 - w).powi(2) + 4.0 * alpha * w).sqrt();
    let e_rev = ((1.0 + w).powi(2) - 4.0 * alpha * w).sqrt();
    Ok(
        ((1.0 - w).powi(2) + 4.0 * alpha * w + (1.0 - 2.0 * alpha - w) * e)
            * ((1.0 + w).powi(2) - 4.0 * alpha * w + (1.0 - 2.0 * alpha + w) * e_rev),
    )
}

/// Remainder of `mu1` against `2 pi 2^j alpha (1 + beta(beta-alpha) w^2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mu1Remainder {
    /// `|mu1 + omega T - 2 pi 2^j alpha (1 + beta(beta-alpha) omega^2)|`;
    /// `omega T = 2^j pi` is a whole number of turns and is removed exactly.
    pub absolute: f64,
    /// `absolute / (2 pi 2^j alpha omega^4)`; `None` when `alpha = 0`.
    pub relative: Option<f64>,
}

pub fn mu1_expansion_check(alpha: f64, omega: f64, j: u32) -> Result<Mu1Remainder> {
    check_alpha(alpha)?;
    check_omega(omega)?;
    if j == 0 {
        return Err(Error::out_of_range("j", 0.0, "stage index starts at 1"));
    }
    let beta = 1.0 - alpha;
    let turns = 2f64.powi(j as i32) * PI;
    let t = turns / omega;
    let (mu1, _) = mu_phases(alpha, omega, t);
    let leading = 2.0 * turns * alpha;
    let absolute = (mu1 + turns - leading * (1.0 + beta * (beta - alpha) * omega * omega)).abs();
    let relative = (alpha > 0.0).then(|| absolute / (leading * omega.powi(4)));
    Ok(Mu1Remainder { absolute, relative })
}
