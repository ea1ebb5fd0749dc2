//! Parameter algebra for the equation i ∂_t u + Δu + γ|x|^{-b}|u|^α u = 0.
//!
//! All derived exponents and constants used elsewhere in the crate are fixed
//! here, eagerly, at construction time:
//!
//! * decay exponent        β   = (4 - 2b - α(n-2)) / (2α(α+2))
//! * solution-space index  r   = n(α+2)/(n-b)
//! * critical regularity   s_b = n/2 - (2-b)/α
//! * lower admissibility   α₀  = positive root of nα² + (n-2+2b)α - (4-2b) = 0
//! * upper admissibility   2*_b = (4-2b)/(n-2) for n ≥ 3, +∞ otherwise
//! * contraction constant  K   = 2|γ|(α+1)(4π)^{-nα/(2(α+2))}
//!                               · B(1 - (nα+2b)/(2(α+2)), 1 - β(α+1))
//!
//! The admissible window α₀ < α < 2*_b is exactly the range in which both
//! Beta arguments of K are positive, so K is finite for every accepted
//! parameter set; this is asserted rather than assumed.

use crate::error::{Error, Result};
use crate::special;
use serde::{Deserialize, Serialize};

/// Validated equation parameters together with every derived quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InlsParams {
    /// Space dimension (1, 2 or 3 are supported by the grid machinery).
    pub n: u32,
    /// Nonlinearity power α, strictly inside (α₀, 2*_b).
    pub alpha: f64,
    /// Singular-weight exponent b ∈ (0, min(2, n)).
    pub b: f64,
    /// Coupling γ.  ±1 are the conventional values; γ = 0 switches the
    /// nonlinearity off (linear-flow override used by several diagnostics).
    pub gamma: f64,
    /// β = (4 - 2b - α(n-2)) / (2α(α+2)).
    pub beta: f64,
    /// Lorentz space index r = n(α+2)/(n-b).
    pub r: f64,
    /// Critical Sobolev index s_b = n/2 - (2-b)/α (negative in the
    /// infinite-energy regime this crate targets).
    pub s_b: f64,
    /// Positive root α₀ of nα² + (n-2+2b)α - (4-2b) = 0.
    pub alpha0: f64,
    /// Upper admissibility threshold 2*_b ((4-2b)/(n-2) if n ≥ 3, else +∞).
    pub two_star_b: f64,
    /// Contraction constant K of the Duhamel fixed-point map.
    pub contraction_k: f64,
}

impl InlsParams {
    /// Validate `(n, α, b, γ)` and derive every dependent quantity.
    ///
    /// Rejected (naming the violated constraint): n ∉ {1,2,3}, b outside
    /// (0, min(2,n)), α outside the open window (α₀, 2*_b), non-finite γ.
    pub fn derive(n: u32, alpha: f64, b: f64, gamma: f64) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::InvalidParameter(format!(
                "dimension n must be 1, 2 or 3 (got {n})"
            )));
        }
        let b_cap = 2.0f64.min(n as f64);
        if !(b.is_finite() && b > 0.0 && b < b_cap) {
            return Err(Error::InvalidParameter(format!(
                "weight exponent must satisfy 0 < b < min(2, n) = {b_cap} (got {b})"
            )));
        }
        if !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "coupling gamma must be finite (got {gamma})"
            )));
        }
        let alpha0 = alpha_lower(n, b);
        let two_star_b = alpha_upper(n, b);
        if !(alpha.is_finite() && alpha > alpha0 && alpha < two_star_b) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in the admissible window ({alpha0}, {two_star_b}) \
                 for n = {n}, b = {b} (got {alpha})"
            )));
        }

        let nf = n as f64;
        let beta = (4.0 - 2.0 * b - alpha * (nf - 2.0)) / (2.0 * alpha * (alpha + 2.0));
        let r = nf * (alpha + 2.0) / (nf - b);
        let s_b = nf / 2.0 - (2.0 - b) / alpha;

        // Beta-function arguments of K; both positive exactly on the
        // admissible window (first ⇔ α < 2*_b, second ⇔ α > α₀).
        let x = 1.0 - (nf * alpha + 2.0 * b) / (2.0 * (alpha + 2.0));
        let y = 1.0 - beta * (alpha + 1.0);
        debug_assert!(x > 0.0 && y > 0.0);
        let contraction_k = 2.0
            * gamma.abs()
            * (alpha + 1.0)
            * (4.0 * std::f64::consts::PI).powf(-nf * alpha / (2.0 * (alpha + 2.0)))
            * special::beta(x, y);

        Ok(InlsParams {
            n,
            alpha,
            b,
            gamma,
            beta,
            r,
            s_b,
            alpha0,
            two_star_b,
            contraction_k,
        })
    }

    /// Singular-quadrature exponent β(α+1) of the nonlinear term's
    /// Lorentz-norm profile near t = 0.  Always < 1 on the admissible window.
    pub fn singular_exponent(&self) -> f64 {
        self.beta * (self.alpha + 1.0)
    }

    /// (n/2)(1/r' - 1/r) = (nα + 2b)/(2(α+2)), the dispersive-decay rate of
    /// the free propagator between the dual pair L^{r',q} → L^{r,q}.
    pub fn dispersive_rate(&self) -> f64 {
        (self.n as f64 * self.alpha + 2.0 * self.b) / (2.0 * (self.alpha + 2.0))
    }

    /// Real part of the self-similar profile exponent, (2 - b)/α.
    pub fn profile_exponent(&self) -> f64 {
        (2.0 - self.b) / self.alpha
    }

    /// Copy of these parameters with the coupling replaced (γ = 0 gives the
    /// linear-flow override used by diagnostics).
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        InlsParams::derive(self.n, self.alpha, self.b, gamma)
    }
}

/// Positive root of nα² + (n - 2 + 2b)α - (4 - 2b) = 0, evaluated in the
/// cancellation-free form: with B = n - 2 + 2b and D = √(B² + 4n(4-2b)),
/// the positive root is 2(4-2b)/(B + D) when B ≥ 0 and (D - B)/(2n) when
/// B < 0.  Both expressions add quantities of equal sign.
pub fn alpha_lower(n: u32, b: f64) -> f64 {
    let nf = n as f64;
    let bb = nf - 2.0 + 2.0 * b;
    let c = 4.0 - 2.0 * b; // -constant term
    let disc = (bb * bb + 4.0 * nf * c).sqrt();
    if bb >= 0.0 {
        2.0 * c / (bb + disc)
    } else {
        (disc - bb) / (2.0 * nf)
    }
}

/// Upper admissibility threshold 2*_b.
pub fn alpha_upper(n: u32, b: f64) -> f64 {
    if n >= 3 {
        (4.0 - 2.0 * b) / (n as f64 - 2.0)
    } else {
        f64::INFINITY
    }
}

/// Beta function with eager domain validation (both arguments must be
/// strictly positive); thin wrapper over [`special::beta`].
pub fn beta_function(x: f64, y: f64) -> Result<f64> {
    if !(x.is_finite() && x > 0.0 && y.is_finite() && y > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "beta function requires positive arguments (got {x}, {y})"
        )));
    }
    Ok(special::beta(x, y))
}

/// Result of the smallness analysis ρ + K·M^{α+1} ≤ M.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleMass {
    /// Smallest ball radius M admitting the fixed point.
    pub mass: f64,
    /// Whether the strict contraction condition (2M)^α K < 1 holds at M.
    pub strict_contraction: bool,
}

/// Smallest M ≥ 0 with ρ + K·M^{α+1} ≤ M, or `None` when the linear datum
/// is too large for the fixed-point argument to close.
///
/// The map g(M) = ρ + K M^{α+1} - M decreases until M* = (K(α+1))^{-1/α} and
/// increases afterwards, so a root exists iff g(M*) ≤ 0; bisection on
/// [0, M*] then brackets the smallest root to absolute tolerance 1e-12.
pub fn admissible_mass(params: &InlsParams, rho: f64) -> Result<Option<AdmissibleMass>> {
    if !(rho.is_finite() && rho >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "linear smallness rho must be a finite nonnegative real (got {rho})"
        )));
    }
    let (alpha, k) = (params.alpha, params.contraction_k);
    if rho == 0.0 {
        // Degenerate ball: the zero solution.
        return Ok(Some(AdmissibleMass {
            mass: 0.0,
            strict_contraction: true,
        }));
    }
    if k == 0.0 {
        // Linear override γ = 0: the constraint is just ρ ≤ M.
        return Ok(Some(AdmissibleMass {
            mass: rho,
            strict_contraction: true,
        }));
    }
    let g = |m: f64| rho + k * m.powf(alpha + 1.0) - m;
    let m_star = (k * (alpha + 1.0)).powf(-1.0 / alpha);
    if g(m_star) > 0.0 {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0f64, m_star);
    // Invariant: g(lo) > 0 ≥ g(hi); hi is always a feasible radius.
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mass = hi;
    Ok(Some(AdmissibleMass {
        mass,
        strict_contraction: (2.0 * mass).powf(alpha) * k < 1.0,
    }))
}
