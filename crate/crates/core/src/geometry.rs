//! Small vector helpers, simulation cells and neighbor enumeration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

#[inline]
pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Lattice vectors (rows) plus per-axis periodicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub lattice: [Vec3; 3],
    pub pbc: [bool; 3],
}

impl Cell {
    pub fn volume(&self) -> f64 {
        let [a, b, c] = self.lattice;
        dot(a, cross(b, c))
    }

    pub fn is_periodic(&self) -> bool {
        self.pbc.iter().any(|&p| p)
    }

    /// Distance between opposite faces along each lattice direction.
    pub fn heights(&self) -> Vec3 {
        let [a, b, c] = self.lattice;
        let v = self.volume().abs();
        [
            v / norm(cross(b, c)),
            v / norm(cross(c, a)),
            v / norm(cross(a, b)),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_periodic() {
            let v = self.volume();
            if !v.is_finite() || v.abs() < 1e-12 {
                return Err(Error::invalid("periodic cell is singular"));
            }
        }
        Ok(())
    }
}

/// One directed neighbor relation: atom `j` (shifted by `shift`) seen from atom `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborPair {
    pub i: usize,
    pub j: usize,
    pub shift: Vec3,
}

/// Full (both directions) neighbor list within `cutoff`.
///
/// Periodic images are included along periodic axes. Coincident atoms are
/// rejected because every pair term in this crate is singular at r = 0.
pub fn neighbor_list(
    positions: &[Vec3],
    cell: Option<&Cell>,
    cutoff: f64,
) -> Result<Vec<NeighborPair>> {
    let mut shifts: Vec<Vec3> = vec![[0.0; 3]];
    if let Some(cell) = cell.filter(|c| c.is_periodic()) {
        cell.validate()?;
        let h = cell.heights();
        let range: Vec<i64> = (0..3)
            .map(|d| {
                if cell.pbc[d] {
                    (cutoff / h[d]).ceil() as i64
                } else {
                    0
                }
            })
            .collect();
        shifts.clear();
        for n0 in -range[0]..=range[0] {
            for n1 in -range[1]..=range[1] {
                for n2 in -range[2]..=range[2] {
                    let [a, b, c] = cell.lattice;
                    let s = add(
                        add(scale(a, n0 as f64), scale(b, n1 as f64)),
                        scale(c, n2 as f64),
                    );
                    shifts.push(s);
                }
            }
        }
    }

    let cutoff2 = cutoff * cutoff;
    let mut pairs = Vec::new();
    for (i, &xi) in positions.iter().enumerate() {
        for (j, &xj) in positions.iter().enumerate() {
            for &shift in &shifts {
                let is_origin = shift == [0.0; 3];
                if i == j && is_origin {
                    continue;
                }
                let d = sub(add(xj, shift), xi);
                let r2 = dot(d, d);
                if r2 == 0.0 {
                    return Err(Error::SingularGeometry { i, j });
                }
                if r2 < cutoff2 {
                    pairs.push(NeighborPair { i, j, shift });
                }
            }
        }
    }
    Ok(pairs)
}

/// Rotation matrix from a unit axis and an angle (radians).
pub fn rotation_matrix(axis: Vec3, angle: f64) -> [Vec3; 3] {
    let n = norm(axis);
    let [x, y, z] = scale(axis, 1.0 / n);
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ]
}

pub fn rotate(m: &[Vec3; 3], v: Vec3) -> Vec3 {
    [dot(m[0], v), dot(m[1], v), dot(m[2], v)]
}
