//! Atomistic configurations with energy/force labels.

mod extxyz;
mod generate;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Cell, Vec3};
use crate::rng::{self, streams};
use crate::units::EV_TO_MEV;

pub use extxyz::{parse_extxyz, parse_frames, read_extxyz, write_extxyz, write_extxyz_file};
pub use generate::{cluster_geometry, generate_reference_dataset, GenerateOptions};

/// One labelled atomic structure. Positions in Å, energy in eV, forces in eV/Å.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub positions: Vec<Vec3>,
    pub species: Vec<String>,
    pub cell: Option<Cell>,
    pub energy: Option<f64>,
    pub forces: Option<Vec<Vec3>>,
    /// Sampling temperature in K.
    pub temperature: Option<f64>,
}

impl Configuration {
    pub fn new(species: Vec<String>, positions: Vec<Vec3>) -> Self {
        Configuration {
            positions,
            species,
            cell: None,
            energy: None,
            forces: None,
            temperature: None,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn is_periodic(&self) -> bool {
        self.cell.is_some_and(|c| c.is_periodic())
    }

    pub fn validate(&self) -> Result<()> {
        if self.species.len() != self.positions.len() {
            return Err(Error::invalid(format!(
                "{} species for {} positions",
                self.species.len(),
                self.positions.len()
            )));
        }
        if let Some(f) = &self.forces {
            if f.len() != self.positions.len() {
                return Err(Error::invalid(format!(
                    "{} force vectors for {} atoms",
                    f.len(),
                    self.positions.len()
                )));
            }
            if f.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::invalid("non-finite force component"));
            }
        }
        if self.positions.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite position"));
        }
        if self.energy.is_some_and(|e| !e.is_finite()) {
            return Err(Error::invalid("non-finite energy"));
        }
        if let Some(cell) = &self.cell {
            cell.validate()?;
        }
        Ok(())
    }

    pub fn energy_per_atom(&self) -> Option<f64> {
        self.energy.map(|e| e / self.len() as f64)
    }
}

/// Population mean and standard deviation.
pub(crate) fn mean_std(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        return None;
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

/// An ordered, nonempty, immutable collection of configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    name: String,
    configurations: Vec<Configuration>,
    sigma_dft_energy: Option<f64>,
    sigma_dft_force: Option<f64>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, configurations: Vec<Configuration>) -> Result<Self> {
        if configurations.is_empty() {
            return Err(Error::invalid(
                "dataset must contain at least one configuration",
            ));
        }
        for (k, c) in configurations.iter().enumerate() {
            c.validate()
                .map_err(|e| Error::invalid(format!("configuration {k}: {e}")))?;
        }
        let sigma_dft_energy = mean_std(
            configurations
                .iter()
                .filter_map(Configuration::energy_per_atom),
        )
        .map(|(_, s)| s * EV_TO_MEV);
        let sigma_dft_force = mean_std(
            configurations
                .iter()
                .filter_map(|c| c.forces.as_ref())
                .flat_map(|f| f.iter().flatten().copied()),
        )
        .map(|(_, s)| s);
        Ok(Dataset {
            name: name.into(),
            configurations,
            sigma_dft_energy,
            sigma_dft_force,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn configurations(&self) -> &[Configuration] {
        &self.configurations
    }

    pub fn len(&self) -> usize {
        self.configurations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configurations.is_empty()
    }

    /// Per-atom energy standard deviation, meV/atom.
    pub fn sigma_dft_energy(&self) -> Option<f64> {
        self.sigma_dft_energy
    }

    /// Force-component standard deviation, eV/Å.
    pub fn sigma_dft_force(&self) -> Option<f64> {
        self.sigma_dft_force
    }

    pub fn has_energies(&self) -> bool {
        self.configurations.iter().all(|c| c.energy.is_some())
    }

    pub fn has_forces(&self) -> bool {
        self.configurations.iter().all(|c| c.forces.is_some())
    }

    pub fn total_atoms(&self) -> usize {
        self.configurations.iter().map(Configuration::len).sum()
    }

    /// Subset by index, preserving the given order.
    pub fn subset(&self, name: impl Into<String>, indices: &[usize]) -> Result<Dataset> {
        Dataset::new(
            name,
            indices
                .iter()
                .map(|&i| self.configurations[i].clone())
                .collect(),
        )
    }

    /// First `n` configurations.
    pub fn take(&self, n: usize) -> Result<Dataset> {
        let n = n.min(self.len());
        Dataset::new(
            format!("{}[..{n}]", self.name),
            self.configurations[..n].to_vec(),
        )
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseTarget {
    Energies,
    Forces,
    Both,
}

/// Gaussian label corruption: each targeted label gets `g * sigma * sigma_dft`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub target: NoiseTarget,
    pub seed: u64,
}

/// Return a corrupted copy of `d`.
///
/// Energy noise is drawn on the per-atom scale (σ_DFT in meV/atom) and
/// multiplied by the atom count before being added to the total energy. Force
/// noise is added independently to every component of every atom.
pub fn corrupt_labels(d: &Dataset, spec: &NoiseSpec) -> Result<Dataset> {
    if !(spec.sigma >= 0.0) || !spec.sigma.is_finite() {
        return Err(Error::invalid("noise sigma must be finite and >= 0"));
    }
    let do_energy = matches!(spec.target, NoiseTarget::Energies | NoiseTarget::Both);
    let do_forces = matches!(spec.target, NoiseTarget::Forces | NoiseTarget::Both);
    if do_energy && !d.has_energies() {
        return Err(Error::MissingLabels(
            "energy noise requested but energies absent".into(),
        ));
    }
    if do_forces && !d.has_forces() {
        return Err(Error::MissingLabels(
            "force noise requested but forces absent".into(),
        ));
    }
    let name = format!("{}+noise({})", d.name(), spec.sigma);
    if spec.sigma == 0.0 {
        return Ok(d.clone().with_name(name));
    }

    let energy_scale = d.sigma_dft_energy().unwrap_or(0.0) / EV_TO_MEV * spec.sigma;
    let force_scale = d.sigma_dft_force().unwrap_or(0.0) * spec.sigma;
    let mut energy_rng = rng::substream(spec.seed, streams::NOISE, 0);
    let mut force_rng = rng::substream(spec.seed, streams::NOISE, 1);

    let configs = d
        .configurations()
        .iter()
        .map(|c| {
            let mut c = c.clone();
            if do_energy {
                let g: f64 = StandardNormal.sample(&mut energy_rng);
                let n = c.len() as f64;
                if let Some(e) = c.energy.as_mut() {
                    *e += g * energy_scale * n;
                }
            }
            if do_forces {
                if let Some(f) = c.forces.as_mut() {
                    for v in f.iter_mut().flatten() {
                        let g: f64 = StandardNormal.sample(&mut force_rng);
                        *v += g * force_scale;
                    }
                }
            }
            c
        })
        .collect();
    Dataset::new(name, configs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperatureCount {
    pub temperature: Option<f64>,
    pub count: usize,
}

/// Label distribution summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub n_configurations: usize,
    pub n_atoms: usize,
    pub energy_mean_mev_per_atom: f64,
    pub energy_std_mev_per_atom: f64,
    pub force_mean_ev_per_ang: Option<f64>,
    pub force_std_ev_per_ang: Option<f64>,
    pub n_force_components: usize,
    pub counts_per_temperature: Vec<TemperatureCount>,
}

pub fn dataset_stats(d: &Dataset) -> Result<DatasetStats> {
    if d.is_empty() {
        return Err(Error::invalid("empty dataset"));
    }
    if !d.has_energies() {
        return Err(Error::MissingLabels(
            "energies required for statistics".into(),
        ));
    }
    let (emean, estd) = mean_std(
        d.configurations()
            .iter()
            .filter_map(Configuration::energy_per_atom),
    )
    .expect("nonempty");
    let force_values: Vec<f64> = d
        .configurations()
        .iter()
        .filter_map(|c| c.forces.as_ref())
        .flat_map(|f| f.iter().flatten().copied())
        .collect();
    let n_force_components = force_values.len();
    let force = mean_std(force_values.into_iter());

    let mut counts: BTreeMap<TemperatureKey, usize> = BTreeMap::new();
    let mut untagged = 0;
    for c in d.configurations() {
        match c.temperature {
            Some(t) => *counts.entry(TemperatureKey(t)).or_default() += 1,
            None => untagged += 1,
        }
    }
    let mut counts_per_temperature: Vec<TemperatureCount> = counts
        .into_iter()
        .map(|(t, count)| TemperatureCount {
            temperature: Some(t.0),
            count,
        })
        .collect();
    if untagged > 0 {
        counts_per_temperature.push(TemperatureCount {
            temperature: None,
            count: untagged,
        });
    }

    Ok(DatasetStats {
        n_configurations: d.len(),
        n_atoms: d.total_atoms(),
        energy_mean_mev_per_atom: emean * EV_TO_MEV,
        energy_std_mev_per_atom: estd * EV_TO_MEV,
        force_mean_ev_per_ang: force.map(|f| f.0),
        force_std_ev_per_ang: force.map(|f| f.1),
        n_force_components,
        counts_per_temperature,
    })
}

/// Totally ordered temperature, usable as a map key.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TemperatureKey(pub f64);

impl PartialEq for TemperatureKey {
    fn eq(&self, other: &Self) -> bool {
        self.0.total_cmp(&other.0).is_eq()
    }
}
impl Eq for TemperatureKey {}
impl PartialOrd for TemperatureKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for TemperatureKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitOptions {
    /// Fraction of the training-temperature frames held out for testing.
    pub held_out_fraction: f64,
    pub seed: u64,
}

impl Default for SplitOptions {
    fn default() -> Self {
        SplitOptions {
            held_out_fraction: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TemperatureSplit {
    pub train: Dataset,
    /// Test splits keyed by temperature; the training temperature key holds the
    /// held-out portion of the training-temperature frames.
    pub tests: BTreeMap<TemperatureKey, Dataset>,
}

fn same_temperature(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Partition `d` into a training split at `train_t` and per-temperature tests.
pub fn split_by_temperature(
    d: &Dataset,
    train_t: f64,
    opts: &SplitOptions,
) -> Result<TemperatureSplit> {
    if !(0.0..1.0).contains(&opts.held_out_fraction) {
        return Err(Error::invalid("held_out_fraction must lie in [0, 1)"));
    }
    let mut train_idx = Vec::new();
    let mut other: BTreeMap<TemperatureKey, Vec<usize>> = BTreeMap::new();
    for (k, c) in d.configurations().iter().enumerate() {
        let t = c.temperature.ok_or_else(|| {
            Error::MissingLabels(format!("configuration {k} has no temperature tag"))
        })?;
        if same_temperature(t, train_t) {
            train_idx.push(k);
        } else {
            other.entry(TemperatureKey(t)).or_default().push(k);
        }
    }
    if train_idx.is_empty() {
        return Err(Error::invalid(format!(
            "no configurations tagged {train_t} K"
        )));
    }

    let n_held = ((opts.held_out_fraction * train_idx.len() as f64).round() as usize)
        .min(train_idx.len() - 1);
    let mut shuffled = train_idx.clone();
    shuffled.shuffle(&mut rng::substream(opts.seed, streams::SPLIT, 0));
    let mut held: Vec<usize> = shuffled[..n_held].to_vec();
    let mut kept: Vec<usize> = shuffled[n_held..].to_vec();
    held.sort_unstable();
    kept.sort_unstable();

    let train = d.subset(format!("{}@{train_t}K/train", d.name()), &kept)?;
    let mut tests = BTreeMap::new();
    if !held.is_empty() {
        tests.insert(
            TemperatureKey(train_t),
            d.subset(format!("{}@{train_t}K/test", d.name()), &held)?,
        );
    }
    for (t, idx) in other {
        tests.insert(t, d.subset(format!("{}@{}K/test", d.name(), t.0), &idx)?);
    }
    Ok(TemperatureSplit { train, tests })
}
