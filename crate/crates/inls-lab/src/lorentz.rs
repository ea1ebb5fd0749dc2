//! Lorentz quasinorms ‖·‖_{p,q} of grid fields, evaluated exactly on the
//! decreasing rearrangement of the sampled step function.
//!
//! A sampled field is a simple function: each cell carries the value |u_i|
//! on a set of measure hⁿ.  Its decreasing rearrangement is the descending
//! sort of the magnitudes with equal values merged into single levels, and
//!
//!   ‖u‖_{p,q}^q = Σ_j v_j^q (T_j^{q/p} − T_{j−1}^{q/p})        (q < ∞),
//!   ‖u‖_{p,∞}  = max_j T_j^{1/p} v_j,
//!
//! where v_j are the distinct nonzero levels in decreasing order and T_j the
//! cumulative measures at their right endpoints.  With this normalization
//! ‖u‖_{p,p} is the ordinary Lᵖ norm, and the weak norm coincides with
//! sup_λ λ·|{|u| > λ}|^{1/p}.

use crate::error::{Error, Result};
use crate::field::Field;

/// A Lorentz exponent pair (p, q); `q = f64::INFINITY` selects the weak norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzIndex {
    p: f64,
    q: f64,
}

impl LorentzIndex {
    /// p must be a positive real; q a positive real or +∞.
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "primary Lorentz exponent must be a positive real (got {p})"
            )));
        }
        if !(q > 0.0) || q.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "secondary Lorentz exponent must be positive or infinite (got {q})"
            )));
        }
        Ok(LorentzIndex { p, q })
    }

    /// The ordinary Lᵖ norm, i.e. the diagonal pair (p, p).
    pub fn lebesgue(p: f64) -> Result<Self> {
        Self::new(p, p)
    }

    /// The weak norm (p, ∞).
    pub fn weak(p: f64) -> Result<Self> {
        Self::new(p, f64::INFINITY)
    }

    /// The pair (r, 2r) used for the solution-space bounds.
    pub fn solution_space(r: f64) -> Result<Self> {
        Self::new(r, 2.0 * r)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn is_weak(&self) -> bool {
        self.q.is_infinite()
    }
}

/// Serializable mirror of [`LorentzIndex`].  JSON has no literal for +∞, so
/// the weak-norm secondary exponent is encoded as an absent `q`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LorentzIndexSpec {
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
}

impl From<LorentzIndex> for LorentzIndexSpec {
    fn from(idx: LorentzIndex) -> Self {
        LorentzIndexSpec {
            p: idx.p(),
            q: idx.q().is_finite().then_some(idx.q()),
        }
    }
}

impl TryFrom<LorentzIndexSpec> for LorentzIndex {
    type Error = Error;

    fn try_from(spec: LorentzIndexSpec) -> Result<LorentzIndex> {
        LorentzIndex::new(spec.p, spec.q.unwrap_or(f64::INFINITY))
    }
}

/// Decreasing rearrangement of a sampled simple function: distinct nonzero
/// levels in descending order with cumulative-measure right endpoints.
#[derive(Debug, Clone)]
pub struct StepRearrangement {
    levels: Vec<f64>,
    cum_measure: Vec<f64>,
}

impl StepRearrangement {
    /// Build from sample magnitudes, each carrying measure `weight`.
    /// Negative or NaN magnitudes are rejected; zeros are dropped.
    pub fn from_magnitudes(mags: impl IntoIterator<Item = f64>, weight: f64) -> Result<Self> {
        let mut sorted: Vec<f64> = mags.into_iter().collect();
        if sorted.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::InvalidParameter(
                "sample magnitudes must be finite and nonnegative".to_string(),
            ));
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cell measure must be a positive real (got {weight})"
            )));
        }
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut levels = Vec::new();
        let mut cum_measure = Vec::new();
        let mut count = 0usize;
        let mut i = 0usize;
        while i < sorted.len() {
            let v = sorted[i];
            let mut j = i;
            while j < sorted.len() && sorted[j] == v {
                j += 1;
            }
            count += j - i;
            if v > 0.0 {
                levels.push(v);
                cum_measure.push(count as f64 * weight);
            }
            i = j;
        }
        Ok(StepRearrangement { levels, cum_measure })
    }

    /// Rearrangement of |u| for a grid field, cells weighted by hⁿ.
    pub fn of_field(field: &Field) -> Result<Self> {
        Self::from_magnitudes(
            field.values().iter().map(|v| v.norm()),
            field.grid().cell_measure(),
        )
    }

    /// Distinct nonzero levels, descending.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Cumulative measures at the right endpoint of each level.
    pub fn cumulative_measures(&self) -> &[f64] {
        &self.cum_measure
    }

    /// Measure of the superlevel set {|u| > λ}.
    pub fn measure_above(&self, lambda: f64) -> f64 {
        // Levels are descending, so the last level exceeding λ carries the
        // cumulative measure of the whole superlevel set.
        let mut m = 0.0;
        for (v, t) in self.levels.iter().zip(&self.cum_measure) {
            if *v > lambda {
                m = *t;
            } else {
                break;
            }
        }
        m
    }

    /// Evaluate ‖·‖_{p,q} exactly on the step rearrangement.
    pub fn quasinorm(&self, idx: LorentzIndex) -> f64 {
        if self.levels.is_empty() {
            return 0.0;
        }
        let p = idx.p();
        if idx.is_weak() {
            let mut best = 0.0f64;
            for (v, t) in self.levels.iter().zip(&self.cum_measure) {
                best = best.max(v * t.powf(1.0 / p));
            }
            return best;
        }
        let q = idx.q();
        // Factor out the top level so the qth powers stay in range even for
        // large q or strongly peaked fields.
        let vmax = self.levels[0];
        let mut acc = 0.0f64;
        let mut prev_tp = 0.0f64;
        for (v, t) in self.levels.iter().zip(&self.cum_measure) {
            let tp = t.powf(q / p);
            acc += (v / vmax).powf(q) * (tp - prev_tp);
            prev_tp = tp;
        }
        vmax * acc.powf(1.0 / q)
    }
}

/// Convenience wrapper: Lorentz quasinorm of a grid field.
pub fn lorentz_norm(field: &Field, idx: LorentzIndex) -> Result<f64> {
    Ok(StepRearrangement::of_field(field)?.quasinorm(idx))
}

/// Exact weak norm of the radial weight: ‖|x|^{−b}‖_{L^{n/b,∞}} = ω_n^{b/n}
/// with ω_n = π^{n/2}/Γ(n/2 + 1) the unit-ball volume, since the superlevel
/// set {|x|^{−b} > λ} is the ball of radius λ^{−1/b}.
pub fn weak_norm_power_law(n: u32, b: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "dimension must be positive".to_string(),
        ));
    }
    if !(b > 0.0 && b < n as f64) {
        return Err(Error::InvalidParameter(format!(
            "weight exponent must satisfy 0 < b < n (got b = {b}, n = {n})"
        )));
    }
    let nf = n as f64;
    let ln_omega = 0.5 * nf * std::f64::consts::PI.ln() - crate::special::ln_gamma(0.5 * nf + 1.0);
    Ok((b / nf * ln_omega).exp())
}

/// Ratio ‖fg‖_{p,q} / (‖f‖_{p₁,q₁}·‖g‖_{p₂,q₂}) for empirical studies of the
/// Hölder inequality in Lorentz spaces.  Requires 1/p = 1/p₁ + 1/p₂ with
/// p > 1 and 1/q ≤ 1/q₁ + 1/q₂.  Returns 0 when a factor norm vanishes and
/// the product is 0 as well.
pub fn holder_defect(
    f: &Field,
    g: &Field,
    idx1: LorentzIndex,
    idx2: LorentzIndex,
    idx: LorentzIndex,
) -> Result<f64> {
    f.check_compatible(g)?;
    let inv_p = 1.0 / idx1.p() + 1.0 / idx2.p();
    if (inv_p - 1.0 / idx.p()).abs() > 1e-12 || inv_p >= 1.0 {
        return Err(Error::Incompatible(format!(
            "need 1/p = 1/p1 + 1/p2 < 1, got 1/{} vs 1/{} + 1/{}",
            idx.p(),
            idx1.p(),
            idx2.p()
        )));
    }
    let inv_q = if idx1.is_weak() { 0.0 } else { 1.0 / idx1.q() }
        + if idx2.is_weak() { 0.0 } else { 1.0 / idx2.q() };
    let inv_q_target = if idx.is_weak() { 0.0 } else { 1.0 / idx.q() };
    if inv_q_target > inv_q + 1e-12 {
        return Err(Error::Incompatible(
            "secondary exponents must satisfy 1/q <= 1/q1 + 1/q2".to_string(),
        ));
    }
    let nf = lorentz_norm(f, idx1)?;
    let ng = lorentz_norm(g, idx2)?;
    let product = Field::from_values(
        *f.grid(),
        f.values()
            .iter()
            .zip(g.values())
            .map(|(a, b)| a * b)
            .collect(),
    )?;
    let np = lorentz_norm(&product, idx)?;
    if nf == 0.0 || ng == 0.0 {
        if np == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::Incompatible(
            "product norm nonzero while a factor norm vanishes".to_string(),
        ));
    }
    Ok(np / (nf * ng))
}
