//! NVT molecular dynamics (velocity Verlet + Berendsen) with bond-rupture
//! failure detection and ensemble statistics.

mod summary;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Configuration;
use crate::error::{Error, Result};
use crate::geometry::{self, Vec3};
use crate::potential::ForceModel;
use crate::rng::{self, streams};
use crate::units::{
    atomic_mass, ACCEL_EV_PER_ANG_AMU_TO_ANG_PER_FS2, AMU_ANG2_PER_FS2_TO_EV, BOLTZMANN_EV_PER_K,
};

pub use summary::{summarize, write_summary_csv, EnsembleSummary, SUMMARY_HEADER};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MdConfig {
    /// Target temperature, K.
    pub temperature: f64,
    /// fs
    pub timestep: f64,
    /// Berendsen time constant in fs; `None` runs NVE.
    pub tau: Option<f64>,
    /// ps
    pub total_time: f64,
    pub n_trajectories: usize,
    /// Å; a bonded pair strictly longer than this counts as failure.
    pub failure_bond_length: f64,
    /// Bonded pairs; inferred from the start geometry when absent.
    pub bond_list: Option<Vec<[usize; 2]>>,
    pub seed: u64,
    /// Record the instantaneous temperature every this many steps.
    pub trace_every: usize,
    /// Keep a snapshot every this many steps (0 = never).
    pub dump_every: usize,
}

impl Default for MdConfig {
    fn default() -> Self {
        MdConfig {
            temperature: 1600.0,
            timestep: 1.0,
            tau: Some(250.0),
            total_time: 6.0,
            n_trajectories: 30,
            failure_bond_length: 2.0,
            bond_list: None,
            seed: 0,
            trace_every: 10,
            dump_every: 0,
        }
    }
}

impl MdConfig {
    pub fn validate(&self, n_atoms: usize) -> Result<()> {
        let positive = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("md {what} must be positive")))
            }
        };
        positive(self.temperature, "temperature")?;
        positive(self.timestep, "timestep")?;
        positive(self.total_time, "total_time")?;
        positive(self.failure_bond_length, "failure_bond_length")?;
        if let Some(tau) = self.tau {
            positive(tau, "tau")?;
        }
        if self.n_trajectories == 0 {
            return Err(Error::Config("md n_trajectories must be positive".into()));
        }
        if self.trace_every == 0 {
            return Err(Error::Config("md trace_every must be positive".into()));
        }
        if let Some(bonds) = &self.bond_list {
            if bonds
                .iter()
                .any(|&[i, j]| i >= n_atoms || j >= n_atoms || i == j)
            {
                return Err(Error::Config("bond_list has invalid atom indices".into()));
            }
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.total_time * 1000.0 / self.timestep).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureCause {
    BondRupture,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub seed: u64,
    /// ps; equals the configured total time when nothing failed.
    pub time_to_failure: f64,
    pub failed: bool,
    pub failure_cause: Option<FailureCause>,
    pub failure_pair: Option<[usize; 2]>,
    pub failure_distance: Option<f64>,
    /// K, sampled every `trace_every` steps starting at step 0.
    pub temperature_trace: Vec<f64>,
    pub steps: usize,
    #[serde(skip)]
    pub snapshots: Vec<Configuration>,
}

/// Positions, velocities (Å/fs) and current forces of a running trajectory.
#[derive(Debug, Clone)]
pub struct MdState {
    pub config: Configuration,
    pub velocities: Vec<Vec3>,
    pub forces: Vec<Vec3>,
    pub potential_energy: f64,
    pub masses: Vec<f64>,
    pub step: usize,
}

pub fn masses(c: &Configuration) -> Result<Vec<f64>> {
    c.species
        .iter()
        .map(|s| atomic_mass(s).ok_or_else(|| Error::invalid(format!("unknown element {s}"))))
        .collect()
}

/// Kinetic energy in eV.
pub fn kinetic_energy(masses: &[f64], velocities: &[Vec3]) -> f64 {
    masses
        .iter()
        .zip(velocities)
        .map(|(m, v)| 0.5 * m * geometry::dot(*v, *v))
        .sum::<f64>()
        * AMU_ANG2_PER_FS2_TO_EV
}

/// Instantaneous temperature with 3N − 3 degrees of freedom.
pub fn instantaneous_temperature(masses: &[f64], velocities: &[Vec3]) -> f64 {
    let dof = (3 * masses.len()).saturating_sub(3).max(1) as f64;
    2.0 * kinetic_energy(masses, velocities) / (dof * BOLTZMANN_EV_PER_K)
}

/// Maxwell-Boltzmann velocities with zero net momentum, rescaled to exactly `t`.
pub fn init_velocities(c: &Configuration, t: f64, seed: u64) -> Result<Vec<Vec3>> {
    if c.len() < 2 {
        return Err(Error::invalid(
            "temperature undefined for fewer than two atoms",
        ));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid(
            "temperature must be finite and non-negative",
        ));
    }
    let m = masses(c)?;
    let mut rng = rng::substream(seed, streams::VELOCITIES, 0);
    let mut v: Vec<Vec3> = m
        .iter()
        .map(|&mi| {
            let s = (BOLTZMANN_EV_PER_K * t / mi * ACCEL_EV_PER_ANG_AMU_TO_ANG_PER_FS2).sqrt();
            [0, 1, 2].map(|_| {
                let g: f64 = StandardNormal.sample(&mut rng);
                s * g
            })
        })
        .collect();
    let total_m: f64 = m.iter().sum();
    let mut p = [0.0; 3];
    for (mi, vi) in m.iter().zip(&v) {
        p = geometry::add(p, geometry::scale(*vi, *mi));
    }
    let vcm = geometry::scale(p, 1.0 / total_m);
    for vi in &mut v {
        *vi = geometry::sub(*vi, vcm);
    }
    let t_now = instantaneous_temperature(&m, &v);
    let f = if t_now > 0.0 { (t / t_now).sqrt() } else { 0.0 };
    for vi in &mut v {
        *vi = geometry::scale(*vi, f);
    }
    Ok(v)
}

/// Berendsen velocity scaling factor, clamped to [0.9, 1.1].
pub fn berendsen_lambda(dt: f64, tau: Option<f64>, t0: f64, t_inst: f64) -> f64 {
    let Some(tau) = tau else { return 1.0 };
    if t_inst <= 0.0 {
        return 1.1;
    }
    (1.0 + dt / tau * (t0 / t_inst - 1.0))
        .max(0.0)
        .sqrt()
        .clamp(0.9, 1.1)
}

fn evaluate<M: ForceModel + ?Sized>(model: &M, c: &Configuration) -> Result<(f64, Vec<Vec3>)> {
    let (e, f) = model.energy_forces(c)?;
    if !e.is_finite() {
        return Err(Error::Numeric {
            context: "md energy",
            atom: None,
        });
    }
    if let Some(a) = f.iter().position(|v| v.iter().any(|x| !x.is_finite())) {
        return Err(Error::Numeric {
            context: "md force",
            atom: Some(a),
        });
    }
    Ok((e, f))
}

impl MdState {
    pub fn new<M: ForceModel + ?Sized>(
        model: &M,
        config: Configuration,
        velocities: Vec<Vec3>,
    ) -> Result<Self> {
        let masses = masses(&config)?;
        if velocities.len() != config.len() {
            return Err(Error::invalid("one velocity per atom required"));
        }
        let (potential_energy, forces) = evaluate(model, &config)?;
        Ok(MdState {
            config,
            velocities,
            forces,
            potential_energy,
            masses,
            step: 0,
        })
    }

    pub fn temperature(&self) -> f64 {
        instantaneous_temperature(&self.masses, &self.velocities)
    }

    pub fn total_energy(&self) -> f64 {
        self.potential_energy + kinetic_energy(&self.masses, &self.velocities)
    }

    fn half_kick(&mut self, dt: f64) {
        for ((v, f), m) in self
            .velocities
            .iter_mut()
            .zip(&self.forces)
            .zip(&self.masses)
        {
            let a = ACCEL_EV_PER_ANG_AMU_TO_ANG_PER_FS2 / m;
            for k in 0..3 {
                v[k] += 0.5 * dt * a * f[k];
            }
        }
    }
}

/// One velocity-Verlet step followed by Berendsen rescaling.
pub fn md_step<M: ForceModel + ?Sized>(
    state: &mut MdState,
    model: &M,
    cfg: &MdConfig,
) -> Result<()> {
    let dt = cfg.timestep;
    state.half_kick(dt);
    for (x, v) in state.config.positions.iter_mut().zip(&state.velocities) {
        for k in 0..3 {
            x[k] += dt * v[k];
        }
    }
    let (e, f) = evaluate(model, &state.config)?;
    state.potential_energy = e;
    state.forces = f;
    state.half_kick(dt);
    let lambda = berendsen_lambda(dt, cfg.tau, cfg.temperature, state.temperature());
    if lambda != 1.0 {
        for v in &mut state.velocities {
            *v = geometry::scale(*v, lambda);
        }
    }
    state.step += 1;
    Ok(())
}

/// Pairs closer than `factor` × the shortest interatomic distance.
pub fn infer_bonds(c: &Configuration, factor: f64) -> Vec<[usize; 2]> {
    let n = c.len();
    let mut d_min = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            d_min = d_min.min(geometry::norm(geometry::sub(
                c.positions[j],
                c.positions[i],
            )));
        }
    }
    let mut bonds = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if geometry::norm(geometry::sub(c.positions[j], c.positions[i])) <= factor * d_min {
                bonds.push([i, j]);
            }
        }
    }
    bonds
}

/// First bonded pair whose length strictly exceeds `max_length`.
pub fn detect_failure(
    c: &Configuration,
    bonds: &[[usize; 2]],
    max_length: f64,
) -> Option<([usize; 2], f64)> {
    bonds.iter().find_map(|&[i, j]| {
        let r = geometry::norm(geometry::sub(c.positions[j], c.positions[i]));
        (r > max_length).then_some(([i, j], r))
    })
}

fn bonds_for(start: &Configuration, cfg: &MdConfig) -> Result<Vec<[usize; 2]>> {
    cfg.validate(start.len())?;
    let bonds = match &cfg.bond_list {
        Some(b) => b.clone(),
        None => infer_bonds(start, 1.2),
    };
    if bonds.is_empty() {
        return Err(Error::Config("bond list is empty".into()));
    }
    Ok(bonds)
}

/// Run one trajectory from `start` with velocities drawn from `seed`.
pub fn run_trajectory<M: ForceModel + ?Sized>(
    model: &M,
    start: &Configuration,
    cfg: &MdConfig,
    seed: u64,
) -> Result<TrajectoryRecord> {
    let bonds = bonds_for(start, cfg)?;
    trajectory(model, start, cfg, &bonds, seed)
}

fn trajectory<M: ForceModel + ?Sized>(
    model: &M,
    start: &Configuration,
    cfg: &MdConfig,
    bonds: &[[usize; 2]],
    seed: u64,
) -> Result<TrajectoryRecord> {
    let v0 = init_velocities(start, cfg.temperature, seed)?;
    let n_steps = cfg.n_steps();
    let mut rec = TrajectoryRecord {
        seed,
        time_to_failure: n_steps as f64 * cfg.timestep / 1000.0,
        failed: false,
        failure_cause: None,
        failure_pair: None,
        failure_distance: None,
        temperature_trace: Vec::new(),
        steps: 0,
        snapshots: Vec::new(),
    };
    let mut state = match MdState::new(model, start.clone(), v0) {
        Ok(s) => s,
        Err(_) => {
            rec.failed = true;
            rec.failure_cause = Some(FailureCause::Numeric);
            rec.time_to_failure = cfg.timestep / 1000.0;
            return Ok(rec);
        }
    };
    rec.temperature_trace.push(state.temperature());
    if cfg.dump_every > 0 {
        rec.snapshots.push(state.config.clone());
    }
    for step in 1..=n_steps {
        let outcome = md_step(&mut state, model, cfg);
        rec.steps = step;
        let fail = match outcome {
            Err(_) => Some((FailureCause::Numeric, None)),
            Ok(()) => detect_failure(&state.config, bonds, cfg.failure_bond_length)
                .map(|(p, r)| (FailureCause::BondRupture, Some((p, r)))),
        };
        if cfg.dump_every > 0 && (step % cfg.dump_every == 0 || fail.is_some()) {
            rec.snapshots.push(state.config.clone());
        }
        if let Some((cause, pair)) = fail {
            rec.failed = true;
            rec.failure_cause = Some(cause);
            rec.failure_pair = pair.map(|p| p.0);
            rec.failure_distance = pair.map(|p| p.1);
            rec.time_to_failure = step as f64 * cfg.timestep / 1000.0;
            return Ok(rec);
        }
        if step % cfg.trace_every == 0 {
            rec.temperature_trace.push(state.temperature());
        }
    }
    Ok(rec)
}

/// Per-trajectory velocity seed of ensemble member `index`.
pub fn trajectory_seed(seed: u64, index: usize) -> u64 {
    rng::derive_seed(seed, streams::VELOCITIES, index as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub config: MdConfig,
    pub bonds: Vec<[usize; 2]>,
    pub records: Vec<TrajectoryRecord>,
    pub summary: EnsembleSummary,
}

/// `n_trajectories` independent runs that differ only in their velocity seed.
pub fn run_ensemble<M: ForceModel + ?Sized>(
    model: &M,
    start: &Configuration,
    cfg: &MdConfig,
) -> Result<EnsembleResult> {
    let bonds = bonds_for(start, cfg)?;
    let seeds: Vec<u64> = (0..cfg.n_trajectories)
        .map(|i| trajectory_seed(cfg.seed, i))
        .collect();
    run_with_seeds(model, start, cfg, &bonds, &seeds)
}

/// Ensemble over an explicit list of velocity seeds.
pub fn run_ensemble_with_seeds<M: ForceModel + ?Sized>(
    model: &M,
    start: &Configuration,
    cfg: &MdConfig,
    seeds: &[u64],
) -> Result<EnsembleResult> {
    let bonds = bonds_for(start, cfg)?;
    run_with_seeds(model, start, cfg, &bonds, seeds)
}

fn run_with_seeds<M: ForceModel + ?Sized>(
    model: &M,
    start: &Configuration,
    cfg: &MdConfig,
    bonds: &[[usize; 2]],
    seeds: &[u64],
) -> Result<EnsembleResult> {
    let records: Vec<TrajectoryRecord> = seeds
        .par_iter()
        .map(|&s| trajectory(model, start, cfg, bonds, s))
        .collect::<Result<_>>()?;
    let summary = summarize(&records)?;
    Ok(EnsembleResult {
        config: cfg.clone(),
        bonds: bonds.to_vec(),
        records,
        summary,
    })
}

/// Steepest descent with adaptive step until max |F| < `fmax` (eV/Å).
pub fn relax<M: ForceModel + ?Sized>(
    model: &M,
    c: &Configuration,
    max_steps: usize,
    fmax: f64,
) -> Result<Configuration> {
    let mut cur = c.clone();
    let (mut e, mut f) = evaluate(model, &cur)?;
    let mut step = 0.01;
    for _ in 0..max_steps {
        let worst = f.iter().map(|v| geometry::norm(*v)).fold(0.0, f64::max);
        if worst < fmax {
            break;
        }
        let mut trial = cur.clone();
        for (x, g) in trial.positions.iter_mut().zip(&f) {
            *x = geometry::add(*x, geometry::scale(*g, step));
        }
        match evaluate(model, &trial) {
            Ok((e2, f2)) if e2 <= e => {
                cur = trial;
                e = e2;
                f = f2;
                step *= 1.2;
            }
            _ => step *= 0.5,
        }
        if step < 1e-12 {
            break;
        }
    }
    Ok(cur)
}
