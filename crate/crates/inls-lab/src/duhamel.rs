//! Picard construction of solutions of the integral equation
//!
//!   u(t) = e^{itΔ}φ + iγ ∫₀^t e^{i(t−τ)Δ} |x|^{−b} |u|^α u(τ) dτ
//!
//! on a geometric time grid, in the weighted class whose size is the triple
//! norm |||u||| = sup_j t_j^β ‖u(t_j)‖_{L^{r,q}}.
//!
//! ## Quadrature
//!
//! In the weighted class the integrand's Lorentz profile behaves like
//! τ^{−σ} with σ = β(α+1) < 1, so the integral in τ is split into
//!
//! * a frozen first panel ∫₀^{t₀} ≈ t₀·I(t₀)/(1−σ), exact when the profile
//!   of I is a pure power τ^{−σ} (constant τ^σ I), and
//! * log-trapezoid panels: with τ = e^s, ∫ I dτ = ∫ τI ds is approximated by
//!   the trapezoid rule on the geometric nodes.
//!
//! Because e^{i(t−τ)Δ} factors as e^{−i|ξ|²t}·e^{+i|ξ|²τ}, the phased
//! spectra E_k·N̂_k can be accumulated once per node in a single sweep and
//! reused for every later (forward scan) or earlier (backward scan) target,
//! giving all J Duhamel values in O(J) FFTs per Picard iteration.
//!
//! The backward scan solves the final-state problem
//! u(t) = e^{itΔ}ψ − iγ∫_t^∞ e^{i(t−τ)Δ}(…)dτ, whose iteration constructs
//! the wave operator.  Integrals over [T, ∞) are completed by the frozen
//! power-law tail ∫_T^∞ ≈ T·I(T)/β, exact when t^β‖N(u)‖ has settled to its
//! asymptotically constant profile.

use crate::error::{Error, Result};
use crate::field::{read_fld1, write_fld1, Field, Grid};
use crate::lorentz::{LorentzIndex, LorentzIndexSpec, StepRearrangement};
use crate::params::{admissible_mass, AdmissibleMass, InlsParams};
use crate::spectral::SpectralEngine;
use crate::timegrid::TimeGrid;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Quadrature weights for ∫₀^{t_j}, ∫₀^∞ and ∫_{t_j}^∞ on one geometric node
/// set: frozen τ^{−σ} first panel, log-trapezoid interior panels, frozen
/// τ^{−(1+tail_rate)}-type tail T·I(T)/tail_rate beyond the last node.
#[derive(Debug, Clone)]
pub struct QuadratureWeights {
    right: Vec<f64>,
    chain: Vec<f64>,
    infinite: Vec<f64>,
    back_right: Vec<f64>,
    back_chain: Vec<f64>,
}

impl QuadratureWeights {
    /// `sigma` < 1 is the first-panel profile exponent; `tail_rate` > 0 the
    /// decay rate t^{−tail_rate} assumed of the integrand's weighted profile
    /// beyond the last node.
    pub fn new(nodes: &[f64], sigma: f64, tail_rate: f64) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidParameter(
                "quadrature needs at least one node".into(),
            ));
        }
        if !(sigma.is_finite() && sigma < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "first-panel exponent must satisfy sigma < 1 (got {sigma})"
            )));
        }
        if !(tail_rate.is_finite() && tail_rate > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tail decay rate must be positive (got {tail_rate})"
            )));
        }
        let count = nodes.len();
        for k in 0..count {
            let ok = nodes[k].is_finite()
                && nodes[k] > 0.0
                && (k == 0 || nodes[k] > nodes[k - 1]);
            if !ok {
                return Err(Error::InvalidParameter(
                    "quadrature nodes must be positive and strictly increasing".into(),
                ));
            }
        }

        // Log-step to the left / right of each node (0 at the ends).
        let ds = |k: usize| (nodes[k + 1] / nodes[k]).ln();
        let last = count - 1;
        let tail = nodes[last] / tail_rate;

        let mut right = vec![0.0; count];
        let mut chain = vec![0.0; count];
        let mut infinite = vec![0.0; count];
        let mut back_right = vec![0.0; count];
        let mut back_chain = vec![0.0; count];

        right[0] = nodes[0] / (1.0 - sigma);
        for j in 1..count {
            right[j] = 0.5 * ds(j - 1) * nodes[j];
        }
        for k in 0..count {
            let fwd_half = if k < last { 0.5 * ds(k) * nodes[k] } else { 0.0 };
            chain[k] = right[k] + fwd_half;
            infinite[k] = right[k] + if k < last { fwd_half } else { tail };
            back_right[k] = if k < last { fwd_half } else { tail };
            // Node 0 is never strictly left of a backward target.
            back_chain[k] = if k == 0 {
                0.0
            } else {
                right[k] + if k < last { fwd_half } else { tail }
            };
        }

        Ok(QuadratureWeights {
            right,
            chain,
            infinite,
            back_right,
            back_chain,
        })
    }

    /// Weight of node j as the target (right endpoint) of ∫₀^{t_j}.
    pub fn right(&self) -> &[f64] {
        &self.right
    }

    /// Weight of node k inside ∫₀^{t_j} for every target j > k.
    pub fn chain(&self) -> &[f64] {
        &self.chain
    }

    /// Weight of node k in ∫₀^∞ (tail-completed).
    pub fn infinite(&self) -> &[f64] {
        &self.infinite
    }

    /// Weight of node j as the target (left endpoint) of ∫_{t_j}^∞.
    pub fn back_right(&self) -> &[f64] {
        &self.back_right
    }

    /// Weight of node k inside ∫_{t_j}^∞ for every target j < k.
    pub fn back_chain(&self) -> &[f64] {
        &self.back_chain
    }
}

/// Initial iterate of the Picard loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PicardStart {
    /// The free flow e^{itΔ}φ (one iteration ahead of zero).
    #[default]
    LinearFlow,
    /// The zero trajectory; used to confirm the fixed point does not depend
    /// on the starting point.
    Zero,
}

/// Convergence record of one fixed-point solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PicardDiagnostics {
    /// Sweeps performed.
    pub iterations: usize,
    /// Whether the last iterate distance fell below the tolerance.
    pub converged: bool,
    /// Whether the loop stopped early on sustained growth or overflow.
    pub diverged: bool,
    /// Triple-norm distances |||u_{k+1} − u_k||| in iteration order.
    pub iterate_distances: Vec<f64>,
    /// |||Ψ(u) − u||| of the returned iterate (recomputed on convergence).
    pub final_residual: f64,
    /// Measured smallness ρ = |||e^{itΔ}φ||| of the linear part.
    pub rho_linear: f64,
    /// Ball radius solving ρ + K·M^{α+1} ≤ M, when one exists.
    pub admissible: Option<AdmissibleMass>,
    /// Contraction-rate bound (2M)^α·K at the admissible radius.
    pub contraction_bound: Option<f64>,
    /// Triple norm of the returned trajectory.
    pub triple_norm: f64,
    /// Node attaining the triple norm.
    pub argmax_node: usize,
}

impl PicardDiagnostics {
    /// Largest measured ratio of consecutive iterate distances (the empirical
    /// contraction rate); `None` when fewer than two nonzero distances exist.
    pub fn max_contraction_ratio(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for pair in self.iterate_distances.windows(2) {
            if pair[0] > 0.0 {
                let r = pair[1] / pair[0];
                best = Some(best.map_or(r, |b: f64| b.max(r)));
            }
        }
        best
    }
}

/// A solution sampled on the nodes of a geometric time grid, together with
/// the parameters and the Lorentz index its weighted norms refer to.
#[derive(Debug, Clone)]
pub struct Trajectory {
    params: InlsParams,
    timegrid: TimeGrid,
    norm_index: LorentzIndex,
    fields: Vec<Field>,
}

impl Trajectory {
    /// All fields must share one grid and match the time grid node count.
    pub fn new(
        params: InlsParams,
        timegrid: TimeGrid,
        norm_index: LorentzIndex,
        fields: Vec<Field>,
    ) -> Result<Self> {
        if fields.len() != timegrid.len() {
            return Err(Error::Incompatible(format!(
                "trajectory has {} fields for {} time nodes",
                fields.len(),
                timegrid.len()
            )));
        }
        for f in &fields[1..] {
            fields[0].check_compatible(f)?;
        }
        Ok(Trajectory {
            params,
            timegrid,
            norm_index,
            fields,
        })
    }

    pub fn params(&self) -> &InlsParams {
        &self.params
    }

    pub fn timegrid(&self) -> &TimeGrid {
        &self.timegrid
    }

    pub fn norm_index(&self) -> LorentzIndex {
        self.norm_index
    }

    pub fn grid(&self) -> &Grid {
        self.fields[0].grid()
    }

    pub fn field(&self, j: usize) -> &Field {
        &self.fields[j]
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    /// t_j^β ‖u(t_j)‖ for every node.
    pub fn weighted_norms(&self) -> Result<Vec<f64>> {
        let beta = self.params.beta;
        let idx = self.norm_index;
        self.fields
            .par_iter()
            .zip(self.timegrid.nodes().par_iter())
            .map(|(f, &t)| Ok(t.powf(beta) * StepRearrangement::of_field(f)?.quasinorm(idx)))
            .collect()
    }

    /// Discrete triple norm sup_j t_j^β‖u(t_j)‖ and the node attaining it.
    pub fn triple_norm(&self) -> Result<(f64, usize)> {
        let norms = self.weighted_norms()?;
        let mut best = (f64::NEG_INFINITY, 0usize);
        for (j, &v) in norms.iter().enumerate() {
            if v > best.0 {
                best = (v, j);
            }
        }
        Ok(best)
    }

    /// Write the trajectory as a directory: one field file per node plus a
    /// JSON manifest (optionally carrying solver diagnostics).
    pub fn write_dir(&self, dir: &Path, diagnostics: Option<&PicardDiagnostics>) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut files = Vec::with_capacity(self.fields.len());
        for (j, f) in self.fields.iter().enumerate() {
            let name = format!("u_{j:04}.fld");
            write_fld1(f, self.timegrid.node(j), &dir.join(&name))?;
            files.push(name);
        }
        let manifest = TrajectoryManifest {
            schema: MANIFEST_SCHEMA.to_string(),
            params: self.params.clone(),
            t_min: self.timegrid.t_min(),
            t_max: self.timegrid.t_max(),
            count: self.timegrid.len(),
            norm: self.norm_index.into(),
            nodes: self.timegrid.nodes().to_vec(),
            files,
            diagnostics: diagnostics.cloned(),
        };
        let text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| Error::Format(format!("manifest serialization failed: {e}")))?;
        std::fs::write(dir.join("trajectory.json"), text)?;
        Ok(())
    }

    /// Read a directory written by [`write_dir`](Self::write_dir).
    pub fn read_dir(dir: &Path) -> Result<(Trajectory, Option<PicardDiagnostics>)> {
        let text = std::fs::read_to_string(dir.join("trajectory.json"))?;
        let manifest: TrajectoryManifest = serde_json::from_str(&text)
            .map_err(|e| Error::Format(format!("malformed trajectory manifest: {e}")))?;
        if manifest.schema != MANIFEST_SCHEMA {
            return Err(Error::Format(format!(
                "unsupported trajectory schema {:?}",
                manifest.schema
            )));
        }
        let timegrid = TimeGrid::geometric(manifest.t_min, manifest.t_max, manifest.count)?;
        if manifest.nodes.len() != timegrid.len() {
            return Err(Error::Format(
                "manifest node list does not match its time grid".into(),
            ));
        }
        for (a, b) in manifest.nodes.iter().zip(timegrid.nodes()) {
            if (a - b).abs() > 1e-9 * b.abs() {
                return Err(Error::Format(
                    "manifest node list does not match its time grid".into(),
                ));
            }
        }
        if manifest.files.len() != timegrid.len() {
            return Err(Error::Format(format!(
                "manifest lists {} files for {} nodes",
                manifest.files.len(),
                timegrid.len()
            )));
        }
        let mut fields = Vec::with_capacity(manifest.files.len());
        for (j, name) in manifest.files.iter().enumerate() {
            let (f, time) = read_fld1(&dir.join(name))?;
            let t = timegrid.node(j);
            if (time - t).abs() > 1e-9 * t.abs() {
                return Err(Error::Format(format!(
                    "field file {name} carries time {time}, manifest expects {t}"
                )));
            }
            fields.push(f);
        }
        let norm_index = manifest.norm.try_into()?;
        let traj = Trajectory::new(manifest.params, timegrid, norm_index, fields)?;
        Ok((traj, manifest.diagnostics))
    }
}

const MANIFEST_SCHEMA: &str = "inls-lab/1";

#[derive(Serialize, Deserialize)]
struct TrajectoryManifest {
    schema: String,
    params: InlsParams,
    t_min: f64,
    t_max: f64,
    count: usize,
    norm: LorentzIndexSpec,
    nodes: Vec<f64>,
    files: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    diagnostics: Option<PicardDiagnostics>,
}

/// Free function form of [`Trajectory::triple_norm`].
pub fn triple_norm(traj: &Trajectory) -> Result<(f64, usize)> {
    traj.triple_norm()
}

/// γ|x|^{−b}|u|^α u evaluated cellwise (the weight at cell centers).
pub fn nonlinearity(f: &Field, params: &InlsParams) -> Result<Field> {
    if f.grid().dim() != params.n {
        return Err(Error::Incompatible(format!(
            "field dimension {} does not match parameter dimension {}",
            f.grid().dim(),
            params.n
        )));
    }
    let grid = *f.grid();
    let weight: Vec<f64> = (0..grid.len())
        .map(|i| grid.radius(i).powf(-params.b))
        .collect();
    let vals = apply_nonlinearity(f.values(), &weight, params.alpha, params.gamma);
    Ok(Field::from_values(grid, vals).expect("length preserved"))
}

fn apply_nonlinearity(u: &[Complex64], weight: &[f64], alpha: f64, gamma: f64) -> Vec<Complex64> {
    if gamma == 0.0 {
        return vec![Complex64::new(0.0, 0.0); u.len()];
    }
    if alpha == 2.0 {
        u.iter()
            .zip(weight)
            .map(|(&z, &w)| gamma * w * z.norm_sqr() * z)
            .collect()
    } else {
        u.iter()
            .zip(weight)
            .map(|(&z, &w)| {
                let m = z.norm();
                if m == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    gamma * w * m.powf(alpha) * z
                }
            })
            .collect()
    }
}

/// ∫₀^{t_{target}} e^{i(t_{target}−τ)Δ} I(τ) dτ of a supplied integrand
/// trajectory, using the frozen-σ first panel and log-trapezoid panels.
/// No coupling or imaginary unit is folded in.
pub fn free_kernel_integral(
    engine: &SpectralEngine,
    nodes: &[f64],
    sigma: f64,
    integrand: &[Field],
    target: usize,
) -> Result<Field> {
    if integrand.len() != nodes.len() {
        return Err(Error::Incompatible(format!(
            "{} integrand fields for {} nodes",
            integrand.len(),
            nodes.len()
        )));
    }
    if target >= nodes.len() {
        return Err(Error::InvalidParameter(format!(
            "target index {target} out of range for {} nodes",
            nodes.len()
        )));
    }
    for f in integrand {
        if f.grid() != engine.grid() {
            return Err(Error::Incompatible(
                "integrand fields must live on the engine's grid".into(),
            ));
        }
    }
    // Tail rate is irrelevant to finite targets; any positive value works.
    let weights = QuadratureWeights::new(nodes, sigma, 1.0)?;
    let xs = engine.xi_squared();
    let cells = engine.grid().len();
    let mut acc = vec![Complex64::new(0.0, 0.0); cells];
    for k in 0..=target {
        let w = if k < target {
            weights.chain()[k]
        } else {
            weights.right()[k]
        };
        let mut hat = integrand[k].values().to_vec();
        engine.forward(&mut hat);
        let t = nodes[k];
        for i in 0..cells {
            acc[i] += w * Complex64::from_polar(1.0, xs[i] * t) * hat[i];
        }
    }
    let t_target = nodes[target];
    for i in 0..cells {
        acc[i] *= Complex64::from_polar(1.0, -xs[i] * t_target);
    }
    engine.inverse(&mut acc);
    Ok(Field::from_values(*engine.grid(), acc).expect("length preserved"))
}

/// Fixed-point solver bound to one grid, one time grid and one parameter set.
pub struct DuhamelSolver {
    params: InlsParams,
    timegrid: TimeGrid,
    engine: SpectralEngine,
    norm_index: LorentzIndex,
    weight: Vec<f64>,
    weights: QuadratureWeights,
}

impl DuhamelSolver {
    /// Norms default to the solution-space pair (r, 2r).
    pub fn new(params: InlsParams, grid: Grid, timegrid: TimeGrid) -> Result<Self> {
        let idx = LorentzIndex::solution_space(params.r)?;
        Self::with_norm_index(params, grid, timegrid, idx)
    }

    pub fn with_norm_index(
        params: InlsParams,
        grid: Grid,
        timegrid: TimeGrid,
        norm_index: LorentzIndex,
    ) -> Result<Self> {
        if grid.dim() != params.n {
            return Err(Error::Incompatible(format!(
                "grid dimension {} does not match parameter dimension {}",
                grid.dim(),
                params.n
            )));
        }
        let weights =
            QuadratureWeights::new(timegrid.nodes(), params.singular_exponent(), params.beta)?;
        let weight: Vec<f64> = (0..grid.len())
            .map(|i| grid.radius(i).powf(-params.b))
            .collect();
        Ok(DuhamelSolver {
            params,
            timegrid,
            engine: SpectralEngine::new(grid),
            norm_index,
            weight,
            weights,
        })
    }

    pub fn params(&self) -> &InlsParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid {
        self.engine.grid()
    }

    pub fn timegrid(&self) -> &TimeGrid {
        &self.timegrid
    }

    pub fn norm_index(&self) -> LorentzIndex {
        self.norm_index
    }

    pub fn engine(&self) -> &SpectralEngine {
        &self.engine
    }

    pub fn quadrature(&self) -> &QuadratureWeights {
        &self.weights
    }

    /// γ|x|^{−b}|u|^α u with the solver's cached weight.
    pub fn nonlinearity(&self, f: &Field) -> Result<Field> {
        if f.grid() != self.engine.grid() {
            return Err(Error::Incompatible(
                "field does not live on the solver grid".into(),
            ));
        }
        let vals = apply_nonlinearity(f.values(), &self.weight, self.params.alpha, self.params.gamma);
        Ok(Field::from_values(*self.engine.grid(), vals).expect("length preserved"))
    }

    /// e^{it_jΔ}φ on every node of the time grid.
    pub fn linear_flow(&self, phi: &Field) -> Result<Vec<Field>> {
        if phi.grid() != self.engine.grid() {
            return Err(Error::Incompatible(
                "datum does not live on the solver grid".into(),
            ));
        }
        let mut hat = phi.values().to_vec();
        self.engine.forward(&mut hat);
        let flows = self.flow_from_spectrum(&hat);
        Ok(flows
            .into_iter()
            .map(|v| Field::from_values(*self.engine.grid(), v).expect("length preserved"))
            .collect())
    }

    fn flow_from_spectrum(&self, hat: &[Complex64]) -> Vec<Vec<Complex64>> {
        let xs = self.engine.xi_squared();
        self.timegrid
            .nodes()
            .par_iter()
            .map(|&t| {
                let mut v: Vec<Complex64> = hat
                    .iter()
                    .zip(xs)
                    .map(|(&z, &x)| Complex64::from_polar(1.0, -x * t) * z)
                    .collect();
                self.engine.inverse(&mut v);
                v
            })
            .collect()
    }

    /// One application of the integral-equation map to the value vectors `u`:
    /// lin_j ± i·(Duhamel scan)_j, forward (`backward = false`) or backward.
    fn sweep(
        &self,
        lin: &[Vec<Complex64>],
        u: &[Vec<Complex64>],
        backward: bool,
    ) -> Vec<Vec<Complex64>> {
        let cells = self.engine.grid().len();
        let count = u.len();
        let mut nhat: Vec<Vec<Complex64>> = u
            .par_iter()
            .map(|vals| {
                let mut nl =
                    apply_nonlinearity(vals, &self.weight, self.params.alpha, self.params.gamma);
                self.engine.forward(&mut nl);
                nl
            })
            .collect();
        let xs = self.engine.xi_squared();
        let nodes = self.timegrid.nodes();
        let sign = if backward {
            Complex64::new(0.0, -1.0)
        } else {
            Complex64::new(0.0, 1.0)
        };
        let mut acc = vec![Complex64::new(0.0, 0.0); cells];
        let mut out: Vec<Vec<Complex64>> = vec![Vec::new(); count];
        let order: Box<dyn Iterator<Item = usize>> = if backward {
            Box::new((0..count).rev())
        } else {
            Box::new(0..count)
        };
        for j in order {
            let (w_target, w_chain) = if backward {
                (self.weights.back_right[j], self.weights.back_chain[j])
            } else {
                (self.weights.right[j], self.weights.chain[j])
            };
            let t = nodes[j];
            let nh = std::mem::take(&mut nhat[j]);
            let mut dhat = vec![Complex64::new(0.0, 0.0); cells];
            for i in 0..cells {
                let ph = Complex64::from_polar(1.0, xs[i] * t);
                let e = ph * nh[i];
                dhat[i] = ph.conj() * (acc[i] + w_target * e);
                acc[i] += w_chain * e;
            }
            self.engine.inverse(&mut dhat);
            let lin_j = &lin[j];
            out[j] = (0..cells).map(|i| lin_j[i] + sign * dhat[i]).collect();
        }
        out
    }

    /// sup_j t_j^β · ‖v_j‖ with its argmax node.
    fn weighted_sup(&self, fields: &[Vec<Complex64>]) -> Result<(f64, usize)> {
        let beta = self.params.beta;
        let measure = self.engine.grid().cell_measure();
        let norms: Vec<f64> = fields
            .par_iter()
            .zip(self.timegrid.nodes().par_iter())
            .map(|(v, &t)| {
                Ok(t.powf(beta)
                    * StepRearrangement::from_magnitudes(v.iter().map(|z| z.norm()), measure)?
                        .quasinorm(self.norm_index))
            })
            .collect::<Result<_>>()?;
        let mut best = (f64::NEG_INFINITY, 0usize);
        for (j, &v) in norms.iter().enumerate() {
            if v > best.0 {
                best = (v, j);
            }
        }
        Ok(best)
    }

    fn weighted_distance(&self, a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Result<f64> {
        let diffs: Vec<Vec<Complex64>> = a
            .par_iter()
            .zip(b.par_iter())
            .map(|(x, y)| x.iter().zip(y).map(|(&p, &q)| p - q).collect())
            .collect();
        Ok(self.weighted_sup(&diffs)?.0)
    }

    /// Picard iteration for the initial-value problem with datum φ.
    /// Divergence (three consecutive growing distances, or a non-finite
    /// iterate) stops the loop with `converged = false`; the last finite
    /// iterate is returned either way.
    pub fn picard_solve(
        &self,
        phi: &Field,
        tol: f64,
        max_iter: usize,
        start: PicardStart,
    ) -> Result<(Trajectory, PicardDiagnostics)> {
        let lin = self.prepared_flow(phi)?;
        self.fixed_point(lin, tol, max_iter, start, false)
    }

    /// Backward iteration constructing the wave-operator solution whose free
    /// asymptote as t → ∞ is e^{itΔ}ψ.
    pub fn wave_operator_solve(
        &self,
        psi: &Field,
        tol: f64,
        max_iter: usize,
    ) -> Result<(Trajectory, PicardDiagnostics)> {
        let lin = self.prepared_flow(psi)?;
        self.fixed_point(lin, tol, max_iter, PicardStart::LinearFlow, true)
    }

    fn prepared_flow(&self, datum: &Field) -> Result<Vec<Vec<Complex64>>> {
        if datum.grid() != self.engine.grid() {
            return Err(Error::Incompatible(
                "datum does not live on the solver grid".into(),
            ));
        }
        if !datum.all_finite() {
            return Err(Error::InvalidParameter(
                "datum contains non-finite values".into(),
            ));
        }
        let mut hat = datum.values().to_vec();
        self.engine.forward(&mut hat);
        Ok(self.flow_from_spectrum(&hat))
    }

    fn fixed_point(
        &self,
        lin: Vec<Vec<Complex64>>,
        tol: f64,
        max_iter: usize,
        start: PicardStart,
        backward: bool,
    ) -> Result<(Trajectory, PicardDiagnostics)> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be a positive real (got {tol})"
            )));
        }
        if max_iter == 0 {
            return Err(Error::InvalidParameter(
                "at least one iteration is required".into(),
            ));
        }
        let (rho, _) = self.weighted_sup(&lin)?;
        let admissible = admissible_mass(&self.params, rho)?;
        let contraction_bound = admissible
            .as_ref()
            .map(|a| (2.0 * a.mass).powf(self.params.alpha) * self.params.contraction_k);

        let cells = self.engine.grid().len();
        let mut u: Vec<Vec<Complex64>> = match start {
            PicardStart::LinearFlow => lin.clone(),
            PicardStart::Zero => vec![vec![Complex64::new(0.0, 0.0); cells]; lin.len()],
        };
        let mut distances = Vec::new();
        let mut converged = false;
        let mut diverged = false;
        let mut iterations = 0;

        for _ in 0..max_iter {
            let new = self.sweep(&lin, &u, backward);
            iterations += 1;
            let finite = new
                .par_iter()
                .all(|v| v.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
            if !finite {
                diverged = true;
                break;
            }
            let dist = self.weighted_distance(&new, &u)?;
            distances.push(dist);
            u = new;
            if dist <= tol {
                converged = true;
                break;
            }
            let m = distances.len();
            if m >= 3 && distances[m - 1] > distances[m - 2] && distances[m - 2] > distances[m - 3]
            {
                diverged = true;
                break;
            }
        }

        let final_residual = if converged {
            let check = self.sweep(&lin, &u, backward);
            self.weighted_distance(&check, &u)?
        } else {
            distances.last().copied().unwrap_or(f64::MAX)
        };

        let (triple, argmax) = self.weighted_sup(&u)?;
        let fields: Vec<Field> = u
            .into_iter()
            .map(|v| Field::from_values(*self.engine.grid(), v).expect("length preserved"))
            .collect();
        let traj = Trajectory::new(
            self.params.clone(),
            self.timegrid.clone(),
            self.norm_index,
            fields,
        )?;
        let diag = PicardDiagnostics {
            iterations,
            converged,
            diverged,
            iterate_distances: distances,
            final_residual,
            rho_linear: rho,
            admissible,
            contraction_bound,
            triple_norm: triple,
            argmax_node: argmax,
        };
        Ok((traj, diag))
    }

    /// iγ∫₀^{t_j} e^{i(t_j−τ)Δ}|x|^{−b}|u|^αu(τ)dτ recomputed from the
    /// trajectory's own nodes (the nonlinear part of the integral equation).
    pub fn duhamel_integral(&self, traj: &Trajectory, j: usize) -> Result<Field> {
        self.check_trajectory(traj)?;
        let nl: Vec<Field> = traj
            .fields()
            .iter()
            .map(|f| self.nonlinearity(f))
            .collect::<Result<_>>()?;
        let integral = free_kernel_integral(
            &self.engine,
            self.timegrid.nodes(),
            self.params.singular_exponent(),
            &nl,
            j,
        )?;
        Ok(integral.scale(Complex64::new(0.0, 1.0)))
    }

    /// Evaluate the integral equation at an off-node time t ∈ [t₀, t_max]:
    /// full panels up to the last node t_k ≤ t plus a partial log-trapezoid
    /// panel [t_k, t] whose right endpoint propagates u(t_k) freely.
    pub fn evaluate_at(&self, traj: &Trajectory, phi: &Field, t: f64) -> Result<Field> {
        self.check_trajectory(traj)?;
        if phi.grid() != self.engine.grid() {
            return Err(Error::Incompatible(
                "datum does not live on the solver grid".into(),
            ));
        }
        let nodes = self.timegrid.nodes();
        let last = nodes.len() - 1;
        if !(t.is_finite() && t >= nodes[0] * (1.0 - 1e-12) && t <= nodes[last] * (1.0 + 1e-12)) {
            return Err(Error::InvalidParameter(format!(
                "evaluation time {t} outside the covered range [{}, {}]",
                nodes[0], nodes[last]
            )));
        }
        let k = self.timegrid.nearest_index(t);
        if (t - nodes[k]).abs() <= 1e-12 * nodes[k] {
            return Ok(traj.field(k).clone());
        }
        let k = if nodes[k] > t { k - 1 } else { k };

        let xs = self.engine.xi_squared();
        let cells = self.engine.grid().len();
        let ds_partial = (t / nodes[k]).ln();
        let mut acc = vec![Complex64::new(0.0, 0.0); cells];
        for i in 0..=k {
            let w = if i < k {
                self.weights.chain[i]
            } else {
                self.weights.right[i] + 0.5 * ds_partial * nodes[i]
            };
            let mut hat = self.nonlinearity(traj.field(i))?.into_values();
            self.engine.forward(&mut hat);
            let ti = nodes[i];
            for c in 0..cells {
                acc[c] += w * Complex64::from_polar(1.0, xs[c] * ti) * hat[c];
            }
        }
        // Right endpoint of the partial panel: free flow of u(t_k) to time t.
        let mut prop = traj.field(k).values().to_vec();
        self.engine.forward(&mut prop);
        for c in 0..cells {
            prop[c] *= Complex64::from_polar(1.0, -xs[c] * (t - nodes[k]));
        }
        self.engine.inverse(&mut prop);
        let mut hat_t = apply_nonlinearity(&prop, &self.weight, self.params.alpha, self.params.gamma);
        self.engine.forward(&mut hat_t);
        let w_t = 0.5 * ds_partial * t;
        for c in 0..cells {
            acc[c] += w_t * Complex64::from_polar(1.0, xs[c] * t) * hat_t[c];
        }

        let mut lin = phi.values().to_vec();
        self.engine.forward(&mut lin);
        let mut vals: Vec<Complex64> = (0..cells)
            .map(|c| Complex64::from_polar(1.0, -xs[c] * t) * (lin[c] + Complex64::new(0.0, 1.0) * acc[c]))
            .collect();
        self.engine.inverse(&mut vals);
        Ok(Field::from_values(*self.engine.grid(), vals).expect("length preserved"))
    }

    fn check_trajectory(&self, traj: &Trajectory) -> Result<()> {
        if traj.grid() != self.engine.grid() {
            return Err(Error::Incompatible(
                "trajectory does not live on the solver grid".into(),
            ));
        }
        if traj.timegrid().len() != self.timegrid.len()
            || (traj.timegrid().t_min() - self.timegrid.t_min()).abs()
                > 1e-12 * self.timegrid.t_min()
            || (traj.timegrid().t_max() - self.timegrid.t_max()).abs()
                > 1e-12 * self.timegrid.t_max()
        {
            return Err(Error::Incompatible(
                "trajectory time grid does not match the solver's".into(),
            ));
        }
        Ok(())
    }
}
