//! Geometric time grids t_j = t_min·ρ^j used by the integral-equation
//! solvers: log-uniform nodes resolve both the τ^{−β(α+1)} weight near τ = 0
//! and the algebraic t^{−β} decay at large times.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_min: f64,
    t_max: f64,
    count: usize,
    #[serde(skip)]
    nodes: Vec<f64>,
}

impl TimeGrid {
    /// Geometric grid with `count` nodes from t_min to t_max inclusive.
    pub fn geometric(t_min: f64, t_max: f64, count: usize) -> Result<Self> {
        if !(t_min.is_finite() && t_min > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "t_min must be a positive real (got {t_min})"
            )));
        }
        if !(t_max.is_finite() && t_max > t_min) {
            return Err(Error::InvalidParameter(format!(
                "t_max must exceed t_min (got {t_max} vs {t_min})"
            )));
        }
        if count < 2 {
            return Err(Error::InvalidParameter(format!(
                "a geometric grid needs at least 2 nodes (got {count})"
            )));
        }
        let mut tg = TimeGrid {
            t_min,
            t_max,
            count,
            nodes: Vec::new(),
        };
        tg.rebuild_nodes();
        Ok(tg)
    }

    /// Rebuild the cached node vector (used after deserialization, which
    /// skips the cache).
    pub fn rebuild_nodes(&mut self) {
        let rho = self.ratio();
        self.nodes = (0..self.count)
            .map(|j| {
                if j + 1 == self.count {
                    self.t_max
                } else {
                    self.t_min * rho.powi(j as i32)
                }
            })
            .collect();
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Common ratio ρ = (t_max/t_min)^{1/(count−1)}.
    pub fn ratio(&self) -> f64 {
        (self.t_max / self.t_min).powf(1.0 / (self.count as f64 - 1.0))
    }

    /// Logarithmic step ln ρ.
    pub fn log_step(&self) -> f64 {
        (self.t_max / self.t_min).ln() / (self.count as f64 - 1.0)
    }

    pub fn node(&self, j: usize) -> f64 {
        self.nodes[j]
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Node index whose time is closest to t.
    pub fn nearest_index(&self, t: f64) -> usize {
        let mut best = 0;
        let mut err = f64::INFINITY;
        for (j, &tj) in self.nodes.iter().enumerate() {
            let e = (tj - t).abs();
            if e < err {
                err = e;
                best = j;
            }
        }
        best
    }

    /// Integer node shift m with ρ^m = factor, if the factor aligns with the
    /// grid to relative accuracy 1e−9.
    pub fn aligned_shift(&self, factor: f64) -> Option<usize> {
        if !(factor.is_finite() && factor >= 1.0) {
            return None;
        }
        let m = factor.ln() / self.log_step();
        let rounded = m.round();
        if rounded >= 0.0 && (m - rounded).abs() * self.log_step() < 1e-9 {
            Some(rounded as usize)
        } else {
            None
        }
    }

    /// Same ratio, horizon extended to at least `new_t_max` by appending
    /// whole steps.
    pub fn extended_to(&self, new_t_max: f64) -> Result<TimeGrid> {
        if new_t_max <= self.t_max {
            return Err(Error::InvalidParameter(format!(
                "extension target {new_t_max} does not exceed t_max {}",
                self.t_max
            )));
        }
        let extra = ((new_t_max / self.t_max).ln() / self.log_step()).ceil() as usize;
        let rho = self.ratio();
        TimeGrid::geometric(
            self.t_min,
            self.t_max * rho.powi(extra as i32),
            self.count + extra,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(TimeGrid::geometric(0.0, 1.0, 8).is_err());
        assert!(TimeGrid::geometric(1.0, 1.0, 8).is_err());
        assert!(TimeGrid::geometric(0.1, 1.0, 1).is_err());
        assert!(TimeGrid::geometric(1e-3, 10.0, 96).is_ok());
    }

    #[test]
    fn nodes_are_geometric_and_hit_endpoints() {
        let tg = TimeGrid::geometric(1e-3, 16.0, 113).unwrap();
        assert_eq!(tg.len(), 113);
        assert_eq!(tg.node(0), 1e-3);
        assert_eq!(tg.node(112), 16.0);
        let rho = tg.ratio();
        for j in 1..tg.len() {
            let r = tg.node(j) / tg.node(j - 1);
            assert!((r - rho).abs() < 1e-12 * rho, "node ratio drift at {j}");
        }
        assert!(tg.nodes().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn aligned_shift_detects_lattice_factors() {
        // 113 nodes over [2^{-14}·16, 16] give ratio exactly 2^{1/8}.
        let tg = TimeGrid::geometric(16.0 * 2f64.powi(-14), 16.0, 113).unwrap();
        assert_eq!(tg.aligned_shift(2.0f64.powf(0.25)), Some(2));
        assert_eq!(tg.aligned_shift(2.0), Some(8));
        assert_eq!(tg.aligned_shift(1.0), Some(0));
        assert_eq!(tg.aligned_shift(1.17), None);
    }

    #[test]
    fn extension_preserves_ratio_and_prefix() {
        let tg = TimeGrid::geometric(1e-3, 16.0, 113).unwrap();
        let ext = tg.extended_to(32.0).unwrap();
        assert!((ext.ratio() - tg.ratio()).abs() < 1e-12);
        assert!(ext.t_max() >= 32.0);
        for j in 0..tg.len() {
            assert!((ext.node(j) - tg.node(j)).abs() <= 1e-12 * tg.node(j));
        }
    }

    #[test]
    fn nearest_index_picks_closest_node() {
        let tg = TimeGrid::geometric(0.1, 10.0, 21).unwrap();
        for (j, &t) in tg.nodes().iter().enumerate() {
            assert_eq!(tg.nearest_index(t * 1.01), j);
        }
    }
}
