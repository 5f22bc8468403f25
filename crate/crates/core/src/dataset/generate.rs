//! Synthetic reference data: thermostatted MD under an analytic potential.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{Configuration, Dataset};
use crate::error::{Error, Result};
use crate::geometry::{self, Vec3};
use crate::md::{self, MdConfig, MdState};
use crate::potential::ReferencePotential;
use crate::rng::{self, streams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateOptions {
    pub n_atoms: usize,
    pub species: String,
    /// K
    pub temperatures: Vec<f64>,
    pub frames_per_t: usize,
    /// MD steps between kept frames.
    pub stride: usize,
    pub equilibration_steps: usize,
    /// fs
    pub timestep: f64,
    /// fs
    pub tau: f64,
    pub seed: u64,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions {
            n_atoms: 13,
            species: "C".into(),
            temperatures: vec![300.0, 600.0, 1200.0],
            frames_per_t: 100,
            stride: 50,
            equilibration_steps: 1000,
            timestep: 1.0,
            tau: 100.0,
            seed: 0,
        }
    }
}

/// Compact fcc fragment of `n_atoms` relaxed under `pot`.
///
/// Sites are added greedily, each time picking the lattice site with the most
/// already-occupied nearest neighbours (ties: closest to the origin). A small
/// fixed jitter breaks the lattice symmetry before relaxing, otherwise steepest
/// descent can stall on a symmetric saddle (the 13-atom cuboctahedron).
pub fn cluster_geometry(
    pot: &ReferencePotential,
    n_atoms: usize,
    species: &str,
) -> Result<Configuration> {
    if n_atoms == 0 {
        return Err(Error::invalid("cluster needs at least one atom"));
    }
    pot.validate()?;
    let a = pot.kind.equilibrium_distance();
    let mut sites: Vec<Vec3> = Vec::new();
    let m = 3i32;
    for i in -m..=m {
        for j in -m..=m {
            for k in -m..=m {
                if (i + j + k).rem_euclid(2) == 0 {
                    let s = std::f64::consts::FRAC_1_SQRT_2 * a;
                    sites.push([i as f64 * s, j as f64 * s, k as f64 * s]);
                }
            }
        }
    }
    let is_nn = |p: Vec3, q: Vec3| (geometry::norm(geometry::sub(p, q)) - a).abs() < 1e-9 * a;
    let mut chosen = vec![[0.0; 3]];
    while chosen.len() < n_atoms {
        let best = sites
            .iter()
            .filter(|s| !chosen.contains(s))
            .map(|&s| {
                let nn = chosen.iter().filter(|&&c| is_nn(s, c)).count();
                (s, nn, geometry::norm(s))
            })
            .max_by(|x, y| x.1.cmp(&y.1).then(y.2.total_cmp(&x.2)))
            .ok_or_else(|| Error::invalid("cluster too large for the site pool"))?;
        chosen.push(best.0);
    }
    let mut jitter = rng::substream(n_atoms as u64, streams::GEOMETRY, 0);
    for p in chosen.iter_mut().skip(1) {
        for x in p.iter_mut() {
            *x += 0.05 * a * (2.0 * jitter.random::<f64>() - 1.0);
        }
    }
    let c = Configuration::new(vec![species.to_string(); n_atoms], chosen);
    if n_atoms == 1 {
        return Ok(c);
    }
    md::relax(pot, &c, 5000, 1e-8)
}

/// Frames sampled from Berendsen MD at each temperature, labelled exactly.
pub fn generate_reference_dataset(
    pot: &ReferencePotential,
    opts: &GenerateOptions,
) -> Result<Dataset> {
    if opts.frames_per_t == 0 {
        return Err(Error::invalid("frames_per_t must be positive"));
    }
    if opts.temperatures.is_empty() || opts.temperatures.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::invalid(
            "temperatures must be a nonempty list of positive values",
        ));
    }
    if opts.stride == 0 {
        return Err(Error::invalid("stride must be positive"));
    }
    let start = cluster_geometry(pot, opts.n_atoms, &opts.species)?;
    let mut frames = Vec::with_capacity(opts.temperatures.len() * opts.frames_per_t);
    for (ti, &t) in opts.temperatures.iter().enumerate() {
        let cfg = MdConfig {
            temperature: t,
            timestep: opts.timestep,
            tau: Some(opts.tau),
            ..MdConfig::default()
        };
        let seed = rng::derive_seed(opts.seed, streams::DATASET, ti as u64);
        let v = md::init_velocities(&start, t, seed)?;
        let mut state = MdState::new(pot, start.clone(), v)?;
        for _ in 0..opts.equilibration_steps {
            md::md_step(&mut state, pot, &cfg)?;
        }
        for _ in 0..opts.frames_per_t {
            for _ in 0..opts.stride {
                md::md_step(&mut state, pot, &cfg)?;
            }
            let mut c = state.config.clone();
            c.energy = Some(state.potential_energy);
            c.forces = Some(state.forces.clone());
            c.temperature = Some(t);
            frames.push(c);
        }
    }
    let name = format!(
        "synthetic-{}{}-seed{}",
        opts.species, opts.n_atoms, opts.seed
    );
    Dataset::new(name, frames)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trimer_is_a_triangle() {
        let pot = ReferencePotential::lennard_jones(0.0104, 3.4);
        let c = cluster_geometry(&pot, 3, "Ar").unwrap();
        let d01 = geometry::norm(geometry::sub(c.positions[0], c.positions[1]));
        let d02 = geometry::norm(geometry::sub(c.positions[0], c.positions[2]));
        let d12 = geometry::norm(geometry::sub(c.positions[1], c.positions[2]));
        assert!((d01 - d02).abs() < 1e-6 && (d01 - d12).abs() < 1e-6);
        let (_, f) = pot.evaluate(&c).unwrap();
        assert!(f.iter().flatten().all(|v| v.abs() < 1e-7));
    }

    #[test]
    fn zero_frames_rejected() {
        let pot = ReferencePotential::morse(3.0, 2.0, 1.5);
        let opts = GenerateOptions {
            frames_per_t: 0,
            ..GenerateOptions::default()
        };
        assert!(generate_reference_dataset(&pot, &opts).is_err());
    }
}
