//! Cell-centered grids on (-L, L)ⁿ and complex scalar fields sampled on them,
//! together with the `FLD1` on-disk snapshot format.
//!
//! Cells have side h = 2L/N and centers at coordinates (j + 1/2)h - L, so the
//! origin is never a sample point and |x|^{-b} is finite at every cell.  The
//! flat storage order is row-major with axis 0 slowest.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

/// Largest permitted total cell count (memory guard: 2²⁴ cells ≈ 268 MB as
/// complex doubles).
const MAX_CELLS: usize = 1 << 24;

/// Uniform cell-centered grid on the cube (-L, L)ⁿ, N cells per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: u32,
    l: f64,
    points: u32,
}

impl Grid {
    /// Validated constructor: n ∈ {1,2,3}, L > 0, N even and ≥ 2, Nⁿ bounded.
    pub fn new(n: u32, l: f64, points: u32) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::InvalidParameter(format!(
                "grid dimension must be 1, 2 or 3 (got {n})"
            )));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "grid half-width L must be a positive real (got {l})"
            )));
        }
        if points < 2 || points % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "grid resolution N must be even and at least 2 (got {points})"
            )));
        }
        let total = (points as usize).checked_pow(n).filter(|&t| t <= MAX_CELLS);
        if total.is_none() {
            return Err(Error::InvalidParameter(format!(
                "grid too large: {points}^{n} exceeds the {MAX_CELLS}-cell cap"
            )));
        }
        Ok(Grid { n, l, points })
    }

    pub fn dim(&self) -> u32 {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.l
    }

    pub fn points_per_axis(&self) -> u32 {
        self.points
    }

    /// Cell side h = 2L/N.
    pub fn h(&self) -> f64 {
        2.0 * self.l / self.points as f64
    }

    /// Cell measure hⁿ.
    pub fn cell_measure(&self) -> f64 {
        self.h().powi(self.n as i32)
    }

    /// Total number of cells Nⁿ.
    pub fn len(&self) -> usize {
        (self.points as usize).pow(self.n)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Extents per axis with inactive axes reported as 1, e.g. [N, N, 1].
    pub fn dims(&self) -> [usize; 3] {
        let mut d = [1usize; 3];
        for dd in d.iter_mut().take(self.n as usize) {
            *dd = self.points as usize;
        }
        d
    }

    /// Coordinate of cell index j along any axis: (j + 1/2)h - L.
    pub fn axis_coord(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.h() - self.l
    }

    /// Cell-center coordinates of a flat index (inactive axes are 0).
    pub fn cell_center(&self, flat: usize) -> [f64; 3] {
        let nn = self.points as usize;
        let mut out = [0.0f64; 3];
        let mut rest = flat;
        for axis in (0..self.n as usize).rev() {
            out[axis] = self.axis_coord(rest % nn);
            rest /= nn;
        }
        out
    }

    /// Euclidean distance of a cell center from the origin; bounded below by
    /// h/2, so singular radial weights are finite everywhere.
    pub fn radius(&self, flat: usize) -> f64 {
        let c = self.cell_center(flat);
        (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
    }

    /// Radii of all cells in flat order (cached by the solvers).
    pub fn radii(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.radius(i)).collect()
    }
}

/// Complex scalar field sampled at the cell centers of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Field {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Wrap an existing value vector; its length must equal `grid.len()`.
    pub fn from_values(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Incompatible(format!(
                "value vector length {} does not match grid cell count {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Field { grid, values })
    }

    /// Sample a pointwise function of the cell-center coordinates.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(&[f64; 3]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.cell_center(i))).collect();
        Field { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Error unless `other` lives on the same grid.
    pub fn check_compatible(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Incompatible(
                "fields live on different grids".to_string(),
            ));
        }
        Ok(())
    }

    /// L² norm (hⁿ Σ |u|²)^{1/2}.
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (self.grid.cell_measure() * sum).sqrt()
    }

    /// Pointwise difference on a shared grid.
    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.check_compatible(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Field {
            grid: self.grid,
            values,
        })
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.check_compatible(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Field {
            grid: self.grid,
            values,
        })
    }

    pub fn scale(&self, c: Complex64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// Relative L² distance ‖self - other‖₂ / ‖other‖₂.
    pub fn rel_l2_distance(&self, other: &Field) -> Result<f64> {
        let d = self.sub(other)?.l2_norm();
        let n = other.l2_norm();
        Ok(if n == 0.0 { d } else { d / n })
    }

    /// True if every sample is finite (NaN/∞ poison norms and files).
    pub fn all_finite(&self) -> bool {
        self.values
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

#[derive(Serialize, Deserialize)]
struct FldHeader {
    n: u32,
    #[serde(rename = "L")]
    l: f64,
    #[serde(rename = "N")]
    points: u32,
    time: f64,
}

const FLD_MAGIC: &[u8; 4] = b"FLD1";

/// Write a field snapshot: magic `FLD1`, little-endian u32 JSON-header
/// length, JSON header `{n, L, N, time}`, then Nⁿ cells as interleaved
/// little-endian f64 (re, im) pairs in row-major order.
pub fn write_fld1(field: &Field, time: f64, path: &Path) -> Result<()> {
    let header = serde_json::to_vec(&FldHeader {
        n: field.grid.dim(),
        l: field.grid.half_width(),
        points: field.grid.points_per_axis(),
        time,
    })
    .map_err(|e| Error::Format(format!("header serialization failed: {e}")))?;
    let mut out = Vec::with_capacity(8 + header.len() + 16 * field.values.len());
    out.extend_from_slice(FLD_MAGIC);
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(&header);
    for v in &field.values {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(&out)?;
    Ok(())
}

/// Read a field snapshot written by [`write_fld1`]; returns the field and
/// the stored time stamp.  Malformed files are rejected with a description
/// of the defect.
pub fn read_fld1(path: &Path) -> Result<(Field, f64)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 8 || &bytes[0..4] != FLD_MAGIC {
        return Err(Error::Format(format!(
            "{}: missing FLD1 magic",
            path.display()
        )));
    }
    let hlen = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    if bytes.len() < 8 + hlen {
        return Err(Error::Format(format!(
            "{}: truncated header (declared {hlen} bytes)",
            path.display()
        )));
    }
    let header: FldHeader = serde_json::from_slice(&bytes[8..8 + hlen])
        .map_err(|e| Error::Format(format!("{}: bad header: {e}", path.display())))?;
    let grid = Grid::new(header.n, header.l, header.points)?;
    let payload = &bytes[8 + hlen..];
    if payload.len() != 16 * grid.len() {
        return Err(Error::Format(format!(
            "{}: payload holds {} bytes, grid needs {}",
            path.display(),
            payload.len(),
            16 * grid.len()
        )));
    }
    let values = payload
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            )
        })
        .collect();
    Ok((Field { grid, values }, header.time))
}
