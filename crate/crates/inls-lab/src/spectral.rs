//! FFT machinery shared by the propagator and the solvers: forward/inverse
//! transforms along every axis of a row-major field, the frequency lattice
//! ξ = πk/L with signed index k ∈ {−N/2, …, N/2 − 1}, Fourier multipliers,
//! and evaluation of the trigonometric interpolant at off-grid points.
//!
//! The forward transform is the unnormalized DFT (rustfft convention); the
//! inverse divides by the total cell count, so `inverse(forward(u)) = u`.

use crate::field::{Field, Grid};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Cached FFT plans and the frequency lattice for one grid.
pub struct SpectralEngine {
    grid: Grid,
    forward_plan: Arc<dyn Fft<f64>>,
    inverse_plan: Arc<dyn Fft<f64>>,
    xi_sq: Vec<f64>,
}

/// Signed frequency index of DFT bin i out of N: i for i < N/2, i − N above.
pub fn signed_index(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Frequency ξ = πk/L of DFT bin i along an axis of the grid.
pub fn axis_frequency(grid: &Grid, i: usize) -> f64 {
    std::f64::consts::PI * signed_index(i, grid.points_per_axis() as usize) as f64
        / grid.half_width()
}

/// Visit every 1-D line along `axis` of a row-major array with extents
/// `dims`, yielding (base offset, stride).
fn for_each_line(dims: [usize; 3], axis: usize, mut f: impl FnMut(usize, usize)) {
    let len_axis = dims[axis];
    let stride: usize = dims[axis + 1..3].iter().product();
    let blocks: usize = dims[..axis].iter().product();
    for b in 0..blocks {
        for inner in 0..stride {
            f(b * len_axis * stride + inner, stride);
        }
    }
    let _ = len_axis;
}

impl SpectralEngine {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.points_per_axis() as usize;
        let forward_plan = planner.plan_fft_forward(n);
        let inverse_plan = planner.plan_fft_inverse(n);
        // |ξ|² on the flat lattice, assembled from the per-axis frequencies.
        let axis_xi: Vec<f64> = (0..n).map(|i| axis_frequency(&grid, i)).collect();
        let dims = grid.dims();
        let mut xi_sq = vec![0.0f64; grid.len()];
        for (flat, x) in xi_sq.iter_mut().enumerate() {
            let mut rest = flat;
            let mut s = 0.0;
            for axis in (0..grid.dim() as usize).rev() {
                let i = rest % dims[axis];
                rest /= dims[axis];
                s += axis_xi[i] * axis_xi[i];
            }
            *x = s;
        }
        SpectralEngine {
            grid,
            forward_plan,
            inverse_plan,
            xi_sq,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// |ξ|² for every flat lattice index.
    pub fn xi_squared(&self) -> &[f64] {
        &self.xi_sq
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.grid.len(), "field/engine grid mismatch");
        let plan = if inverse {
            &self.inverse_plan
        } else {
            &self.forward_plan
        };
        let n = self.grid.points_per_axis() as usize;
        let mut line = vec![Complex64::default(); n];
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        let dims = self.grid.dims();
        for axis in 0..self.grid.dim() as usize {
            for_each_line(dims, axis, |base, stride| {
                for (j, l) in line.iter_mut().enumerate() {
                    *l = data[base + j * stride];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for (j, l) in line.iter().enumerate() {
                    data[base + j * stride] = *l;
                }
            });
        }
        if inverse {
            let scale = 1.0 / self.grid.len() as f64;
            for v in data.iter_mut() {
                *v *= scale;
            }
        }
    }

    /// In-place unnormalized forward DFT along every axis.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, false);
    }

    /// In-place inverse DFT along every axis, normalized by 1/Nⁿ.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, true);
    }

    /// Replace u by the inverse transform of m(|ξ|²)·û.
    pub fn apply_multiplier(&self, data: &mut [Complex64], mut m: impl FnMut(f64) -> Complex64) {
        self.forward(data);
        for (v, &xs) in data.iter_mut().zip(&self.xi_sq) {
            *v *= m(xs);
        }
        self.inverse(data);
    }

    /// ‖∇u‖²_{L²} by Parseval: hⁿ/Nⁿ · Σ_ξ |ξ|² |û(ξ)|².
    pub fn grad_l2_sq(&self, field: &Field) -> f64 {
        assert_eq!(*field.grid(), self.grid, "field/engine grid mismatch");
        let mut hat = field.values().to_vec();
        self.forward(&mut hat);
        let sum: f64 = hat
            .iter()
            .zip(&self.xi_sq)
            .map(|(v, &xs)| xs * v.norm_sqr())
            .sum();
        self.grid.cell_measure() / self.grid.len() as f64 * sum
    }
}

/// Row-major M×N matrix that evaluates the trigonometric interpolant at the
/// coordinates `targets`, acting on unnormalized forward DFT coefficients
/// along one axis:  E[m, i] = exp(2πi·k(i)·j(x_m)/N) / N  with the fractional
/// grid index j(x) = (x + L)/h − 1/2.
pub fn interpolation_matrix(grid: &Grid, targets: &[f64]) -> Vec<Complex64> {
    let n = grid.points_per_axis() as usize;
    let h = grid.h();
    let l = grid.half_width();
    let mut mat = vec![Complex64::default(); targets.len() * n];
    for (m, &x) in targets.iter().enumerate() {
        let j = (x + l) / h - 0.5;
        for i in 0..n {
            let k = signed_index(i, n) as f64;
            let angle = 2.0 * std::f64::consts::PI * k * j / n as f64;
            mat[m * n + i] = Complex64::from_polar(1.0 / n as f64, angle);
        }
    }
    mat
}

/// Apply an M×N matrix along `axis` of a row-major array with extents
/// `dims`; returns the transformed array and its new extents.
pub fn apply_axis_matrix(
    data: &[Complex64],
    dims: [usize; 3],
    axis: usize,
    mat: &[Complex64],
    m_rows: usize,
) -> (Vec<Complex64>, [usize; 3]) {
    let n = dims[axis];
    assert_eq!(mat.len(), m_rows * n, "matrix shape mismatch");
    let mut out_dims = dims;
    out_dims[axis] = m_rows;
    let mut out = vec![Complex64::default(); out_dims[0] * out_dims[1] * out_dims[2]];
    let stride: usize = dims[axis + 1..3].iter().product();
    let blocks: usize = dims[..axis].iter().product();
    for b in 0..blocks {
        for inner in 0..stride {
            let base_in = b * n * stride + inner;
            let base_out = b * m_rows * stride + inner;
            for m in 0..m_rows {
                let mut acc = Complex64::default();
                for i in 0..n {
                    acc += mat[m * n + i] * data[base_in + i * stride];
                }
                out[base_out + m * stride] = acc;
            }
        }
    }
    (out, out_dims)
}
