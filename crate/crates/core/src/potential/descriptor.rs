//! Radial symmetry functions
//! G_k(i) = Σ_j exp(−w_k (r_ij − c_k)²) · f_cut(r_ij).

use serde::{Deserialize, Serialize};

use super::scalar::Scalar;
use super::switching::smoothstep_generic;
use crate::dataset::Configuration;
use crate::error::{Error, Result};
use crate::geometry::{neighbor_list, NeighborPair, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorSpec {
    pub n_radial: usize,
    /// Gaussian centers, Å.
    pub centers: Vec<f64>,
    /// Gaussian widths, 1/Å².
    pub widths: Vec<f64>,
    /// Cutoff radius, Å.
    pub cutoff: f64,
    /// Whether centers and widths are part of the trainable parameters.
    pub trainable_basis: bool,
}

impl DescriptorSpec {
    /// `n` Gaussians evenly spaced on [0.2·rc, rc), width 1/spacing².
    pub fn uniform(n: usize, cutoff: f64) -> Self {
        let start = 0.2 * cutoff;
        let spacing = (cutoff - start) / n as f64;
        DescriptorSpec {
            n_radial: n,
            centers: (0..n).map(|k| start + k as f64 * spacing).collect(),
            widths: vec![1.0 / (spacing * spacing); n],
            cutoff,
            trainable_basis: false,
        }
    }

    pub fn trainable(mut self, yes: bool) -> Self {
        self.trainable_basis = yes;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_radial == 0
            || self.centers.len() != self.n_radial
            || self.widths.len() != self.n_radial
        {
            return Err(Error::invalid(
                "descriptor needs n_radial centers and widths",
            ));
        }
        if !(self.cutoff > 0.0 && self.cutoff.is_finite()) {
            return Err(Error::invalid("descriptor cutoff must be positive"));
        }
        if self.centers.iter().any(|&c| !(c > 0.0 && c <= self.cutoff)) {
            return Err(Error::invalid("descriptor centers must lie in (0, cutoff]"));
        }
        if self.widths.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::invalid("descriptor widths must be positive"));
        }
        Ok(())
    }
}

/// Descriptor values and derivatives for all atoms of one configuration.
pub(crate) struct Environment<T> {
    pub n_radial: usize,
    /// `[atom * n_radial + k]`
    pub g: Vec<T>,
    /// ∂g/∂c_k, same layout; empty unless requested.
    pub dg_dcenter: Vec<T>,
    /// ∂g/∂(ln w_k), same layout; empty unless requested.
    pub dg_dlogwidth: Vec<T>,
    /// ∂g_k/∂r for each pair, `[pair * n_radial + k]`; empty unless requested.
    pub pair_dg_dr: Vec<T>,
    /// Unit vector from atom i toward (shifted) atom j per pair.
    pub pair_unit: Vec<[T; 3]>,
}

impl<T: Scalar> Environment<T> {
    pub fn atom(&self, i: usize) -> &[T] {
        &self.g[i * self.n_radial..(i + 1) * self.n_radial]
    }
}

pub(crate) fn environment<T: Scalar>(
    centers: &[f64],
    widths: &[f64],
    cutoff: f64,
    positions: &[[T; 3]],
    pairs: &[NeighborPair],
    basis_grad: bool,
    spatial: bool,
) -> Environment<T> {
    let n = centers.len();
    let na = positions.len();
    let mut env = Environment {
        n_radial: n,
        g: vec![T::zero(); na * n],
        dg_dcenter: if basis_grad {
            vec![T::zero(); na * n]
        } else {
            Vec::new()
        },
        dg_dlogwidth: if basis_grad {
            vec![T::zero(); na * n]
        } else {
            Vec::new()
        },
        pair_dg_dr: if spatial {
            vec![T::zero(); pairs.len() * n]
        } else {
            Vec::new()
        },
        pair_unit: if spatial {
            vec![[T::zero(); 3]; pairs.len()]
        } else {
            Vec::new()
        },
    };
    for (p, pair) in pairs.iter().enumerate() {
        let xi = positions[pair.i];
        let xj = positions[pair.j];
        let d = [
            xj[0] - xi[0] + T::cst(pair.shift[0]),
            xj[1] - xi[1] + T::cst(pair.shift[1]),
            xj[2] - xi[2] + T::cst(pair.shift[2]),
        ];
        let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        let (fc, dfc) = cutoff_generic(r, cutoff);
        if spatial {
            let inv = T::cst(1.0) / r;
            env.pair_unit[p] = [d[0] * inv, d[1] * inv, d[2] * inv];
        }
        let row = pair.i * n;
        for k in 0..n {
            let dr = r - T::cst(centers[k]);
            let e = (dr * dr * (-widths[k])).exp();
            let efc = e * fc;
            env.g[row + k] += efc;
            if basis_grad {
                env.dg_dcenter[row + k] += efc * dr * (2.0 * widths[k]);
                env.dg_dlogwidth[row + k] += efc * dr * dr * (-widths[k]);
            }
            if spatial {
                env.pair_dg_dr[p * n + k] = e * (dfc - fc * dr * (2.0 * widths[k]));
            }
        }
    }
    env
}

/// f_cut(r) and its derivative in generic arithmetic.
fn cutoff_generic<T: Scalar>(r: T, rc: f64) -> (T, T) {
    let x = r * (1.0 / rc);
    let xv = x.value();
    if xv >= 1.0 || xv <= 0.0 {
        return (smoothstep_generic(x), T::zero());
    }
    let om = T::cst(1.0) - x;
    (smoothstep_generic(x), x * x * om * om * (-30.0 / rc))
}

/// Descriptor vector of one atom plus its spatial Jacobian.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorOutput {
    pub values: Vec<f64>,
    /// `jacobian[k][a]` = ∂G_k / ∂x_a.
    pub jacobian: Vec<Vec<Vec3>>,
}

pub fn descriptors(
    spec: &DescriptorSpec,
    c: &Configuration,
    atom_index: usize,
) -> Result<DescriptorOutput> {
    spec.validate()?;
    if atom_index >= c.len() {
        return Err(Error::invalid(format!(
            "atom index {atom_index} out of range for {} atoms",
            c.len()
        )));
    }
    let pairs = neighbor_list(&c.positions, c.cell.as_ref(), spec.cutoff)?;
    let env = environment::<f64>(
        &spec.centers,
        &spec.widths,
        spec.cutoff,
        &c.positions,
        &pairs,
        false,
        true,
    );
    let n = spec.n_radial;
    let mut jacobian = vec![vec![[0.0; 3]; c.len()]; n];
    for (p, pair) in pairs.iter().enumerate() {
        if pair.i != atom_index {
            continue;
        }
        let u = env.pair_unit[p];
        for (k, jac) in jacobian.iter_mut().enumerate() {
            let s = env.pair_dg_dr[p * n + k];
            for ax in 0..3 {
                jac[pair.j][ax] += s * u[ax];
                jac[pair.i][ax] -= s * u[ax];
            }
        }
    }
    Ok(DescriptorOutput {
        values: env.atom(atom_index).to_vec(),
        jacobian,
    })
}
