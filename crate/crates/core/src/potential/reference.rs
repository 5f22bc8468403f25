//! Analytic pair potentials used as ground truth for synthetic datasets.

use serde::{Deserialize, Serialize};

use super::switching::switch_fn;
use super::ForceModel;
use crate::dataset::Configuration;
use crate::error::{Error, Result};
use crate::geometry::{self, neighbor_list, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairKind {
    /// 4ε[(σ/r)¹² − (σ/r)⁶]
    LennardJones { epsilon: f64, sigma: f64 },
    /// D[(1 − e^{−a(r − r0)})² − 1]
    Morse { depth: f64, alpha: f64, r0: f64 },
}

impl PairKind {
    /// Bare pair energy and its radial derivative.
    pub fn energy_derivative(&self, r: f64) -> (f64, f64) {
        match *self {
            PairKind::LennardJones { epsilon, sigma } => {
                let sr6 = (sigma / r).powi(6);
                let sr12 = sr6 * sr6;
                let e = 4.0 * epsilon * (sr12 - sr6);
                let de = 4.0 * epsilon * (-12.0 * sr12 + 6.0 * sr6) / r;
                (e, de)
            }
            PairKind::Morse { depth, alpha, r0 } => {
                let x = (-alpha * (r - r0)).exp();
                let e = depth * ((1.0 - x) * (1.0 - x) - 1.0);
                let de = 2.0 * depth * alpha * x * (1.0 - x);
                (e, de)
            }
        }
    }

    /// Distance of the pair-energy minimum.
    pub fn equilibrium_distance(&self) -> f64 {
        match *self {
            PairKind::LennardJones { sigma, .. } => 2f64.powf(1.0 / 6.0) * sigma,
            PairKind::Morse { r0, .. } => r0,
        }
    }
}

/// A pair potential with a smooth switch between `switch_on` and `cutoff`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferencePotential {
    pub kind: PairKind,
    pub cutoff: f64,
    pub switch_on: f64,
}

impl ReferencePotential {
    /// Lennard-Jones with cutoff 2.5σ, switching from 2σ.
    pub fn lennard_jones(epsilon: f64, sigma: f64) -> Self {
        ReferencePotential {
            kind: PairKind::LennardJones { epsilon, sigma },
            cutoff: 2.5 * sigma,
            switch_on: 2.0 * sigma,
        }
    }

    /// Morse with a 5 Å cutoff, switching from 4 Å.
    pub fn morse(depth: f64, alpha: f64, r0: f64) -> Self {
        ReferencePotential {
            kind: PairKind::Morse { depth, alpha, r0 },
            cutoff: 5.0,
            switch_on: 4.0,
        }
    }

    pub fn with_cutoff(mut self, switch_on: f64, cutoff: f64) -> Self {
        self.switch_on = switch_on;
        self.cutoff = cutoff;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.kind {
            PairKind::LennardJones { epsilon, sigma } => epsilon > 0.0 && sigma > 0.0,
            PairKind::Morse { depth, alpha, r0 } => depth > 0.0 && alpha > 0.0 && r0 > 0.0,
        };
        if !ok {
            return Err(Error::invalid(
                "reference potential parameters must be positive",
            ));
        }
        if !(self.switch_on > 0.0 && self.switch_on < self.cutoff) {
            return Err(Error::invalid("need 0 < switch_on < cutoff"));
        }
        Ok(())
    }

    /// Switched pair energy and derivative.
    pub fn pair(&self, r: f64) -> (f64, f64) {
        if r >= self.cutoff {
            return (0.0, 0.0);
        }
        let (e, de) = self.kind.energy_derivative(r);
        let (s, ds) = switch_fn(r, self.switch_on, self.cutoff);
        (e * s, de * s + e * ds)
    }

    /// Total energy (eV) and forces (eV/Å).
    pub fn evaluate(&self, c: &Configuration) -> Result<(f64, Vec<Vec3>)> {
        let pairs = neighbor_list(&c.positions, c.cell.as_ref(), self.cutoff)?;
        let mut energy = 0.0;
        let mut forces = vec![[0.0; 3]; c.len()];
        // full list: every unordered pair appears twice
        for p in &pairs {
            let d = geometry::sub(geometry::add(c.positions[p.j], p.shift), c.positions[p.i]);
            let r = geometry::norm(d);
            let (e, de) = self.pair(r);
            energy += 0.5 * e;
            let f = geometry::scale(d, 0.5 * de / r);
            for k in 0..3 {
                forces[p.i][k] += f[k];
                forces[p.j][k] -= f[k];
            }
        }
        Ok((energy, forces))
    }

    /// Copy of `c` labelled with this potential's energy and forces.
    pub fn label(&self, c: &Configuration) -> Result<Configuration> {
        let (e, f) = self.evaluate(c)?;
        let mut out = c.clone();
        out.energy = Some(e);
        out.forces = Some(f);
        Ok(out)
    }
}

impl ForceModel for ReferencePotential {
    fn energy_forces(&self, c: &Configuration) -> Result<(f64, Vec<Vec3>)> {
        self.evaluate(c)
    }
}

/// Energy and forces of `c` under `pot`.
pub fn reference_eval(pot: &ReferencePotential, c: &Configuration) -> Result<(f64, Vec<Vec3>)> {
    pot.evaluate(c)
}
