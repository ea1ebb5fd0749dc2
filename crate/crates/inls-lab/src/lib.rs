//! Numerical laboratory for infinite-energy global solutions of the
//! inhomogeneous nonlinear Schrödinger equation
//!
//! ```text
//!     i ∂_t u + Δu + γ |x|^{-b} |u|^α u = 0,   u(0) = φ,   x ∈ ℝⁿ
//! ```
//!
//! worked in Lorentz spaces L^{r,q}(ℝⁿ).  The crate builds solutions as fixed
//! points of the Duhamel integral equation
//!
//! ```text
//!     u(t) = e^{itΔ} φ + iγ ∫₀ᵗ e^{i(t-τ)Δ} |x|^{-b} (|u|^α u)(τ) dτ
//! ```
//!
//! in the weighted solution class ||| u ||| = sup_t t^β ‖u(t)‖_{L^{r,q}}, and
//! then verifies the analytic predictions attached to that construction:
//! explicit contraction constants, self-similarity of solutions launched from
//! homogeneous data, scattering states and wave operators, and weighted
//! asymptotic stability of nearby solutions.  A symmetric Strang split-step
//! integrator serves as an independent cross-check on the Picard solver.
//!
//! Start with the runnable programs under `examples/`, one per capability;
//! the `inls-lab` binary drives the same machinery from JSON configs.

pub mod datum;
pub mod duhamel;
pub mod error;
pub mod field;
pub mod lorentz;
pub mod params;
pub mod propagator;
pub mod special;
pub mod spectral;
pub mod splitstep;
pub mod timegrid;

pub use datum::{AnalyticDatum, HarmonicPoly};
pub use duhamel::{DuhamelSolver, PicardDiagnostics, PicardStart, Trajectory};
pub use error::{Error, Result};
pub use field::{Field, Grid};
pub use lorentz::{LorentzIndex, StepRearrangement};
pub use params::{AdmissibleMass, InlsParams};
pub use timegrid::TimeGrid;
