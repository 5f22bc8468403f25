//! Experiment configuration: one TOML file, dotted `key=value` overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{GenerateOptions, NoiseTarget};
use crate::entropy::{DEFAULT_ALPHA, DEFAULT_T_E, DEFAULT_T_F};
use crate::error::{Error, Result};
use crate::md::MdConfig;
use crate::potential::{Activation, Architecture, DescriptorSpec, ReferencePotential};
use crate::training::TrainConfig;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "NNIP_LL_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Global seed; every module draws from its own named substream of it.
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub data: DataConfig,
    pub potential: PotentialConfig,
    pub generate: GenerateOptions,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub landscape: LandscapeConfig,
    pub entropy: EntropyConfig,
    pub md: MdConfig,
    pub noise: NoiseConfig,
    pub learning_curve: LearningCurveConfig,
    pub toy: ToyConfig,
    pub slopes: SlopesConfig,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// Extended-XYZ input; when absent the dataset is generated.
    pub path: Option<PathBuf>,
    /// Keep only the first `max_frames` frames.
    pub max_frames: Option<usize>,
    /// Train on this temperature only; other temperatures become test splits.
    pub train_temperature: Option<f64>,
    pub held_out_fraction: Option<f64>,
    /// Start geometry for MD (first frame used).
    pub md_start: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    Morse,
    LennardJones,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotentialConfig {
    pub kind: PotentialKind,
    /// Morse D, eV
    pub depth: f64,
    /// Morse a, 1/Å
    pub alpha: f64,
    /// Morse r0, Å
    pub r0: f64,
    /// LJ ε, eV
    pub epsilon: f64,
    /// LJ σ, Å
    pub sigma: f64,
    pub cutoff: Option<f64>,
    pub switch_on: Option<f64>,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        PotentialConfig {
            kind: PotentialKind::Morse,
            depth: 3.0,
            alpha: 2.0,
            r0: 1.5,
            epsilon: 0.0104,
            sigma: 3.4,
            cutoff: None,
            switch_on: None,
        }
    }
}

impl PotentialConfig {
    pub fn build(&self) -> Result<ReferencePotential> {
        let mut p = match self.kind {
            PotentialKind::Morse => ReferencePotential::morse(self.depth, self.alpha, self.r0),
            PotentialKind::LennardJones => {
                ReferencePotential::lennard_jones(self.epsilon, self.sigma)
            }
        };
        if let Some(c) = self.cutoff {
            p.cutoff = c;
        }
        if let Some(s) = self.switch_on {
            p.switch_on = s;
        }
        p.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Checkpoint to load (all commands except `train` require one).
    pub path: Option<PathBuf>,
    /// Second checkpoint, for `interp`.
    pub path_b: Option<PathBuf>,
    /// Run MD with the reference potential instead of a checkpoint.
    pub reference: bool,
    pub n_radial: usize,
    pub cutoff: f64,
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub trainable_basis: bool,
    /// Fit the energy shift/scale to the training data before training.
    pub rescale: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            path: None,
            path_b: None,
            reference: false,
            n_radial: 8,
            cutoff: 5.0,
            hidden: vec![16, 16],
            activation: Activation::ShiftedSoftplus,
            trainable_basis: false,
            rescale: true,
        }
    }
}

impl ModelConfig {
    pub fn architecture(&self) -> Architecture {
        Architecture {
            descriptor: DescriptorSpec::uniform(self.n_radial, self.cutoff)
                .trainable(self.trainable_basis),
            hidden: self.hidden.clone(),
            activation: self.activation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LandscapeConfig {
    /// Direction seed; the global seed when unset.
    pub seed: Option<u64>,
    pub n_directions: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub t_points: usize,
    /// Grid points per axis of `landscape2d`.
    pub points_2d: usize,
    pub frozen_layers: Vec<usize>,
    pub parallel: bool,
    /// Optional (w_E, w_F) re-weighting of the 2D surface.
    pub reweight: Option<[f64; 2]>,
}

impl Default for LandscapeConfig {
    fn default() -> Self {
        LandscapeConfig {
            seed: None,
            n_directions: 20,
            t_min: -1.0,
            t_max: 1.0,
            t_points: 21,
            points_2d: 21,
            frozen_layers: Vec::new(),
            parallel: true,
            reweight: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntropyConfig {
    /// Profile CSV to analyse.
    pub profile: Option<PathBuf>,
    #[serde(rename = "T_E")]
    pub t_e: f64,
    #[serde(rename = "T_F")]
    pub t_f: f64,
    pub alpha: f64,
    #[serde(rename = "T_E_range")]
    pub t_e_range: [f64; 2],
    #[serde(rename = "T_F_range")]
    pub t_f_range: [f64; 2],
    pub sweep_points: usize,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        EntropyConfig {
            profile: None,
            t_e: DEFAULT_T_E,
            t_f: DEFAULT_T_F,
            alpha: DEFAULT_ALPHA,
            t_e_range: [DEFAULT_T_E / 2.0, DEFAULT_T_E * 2.0],
            t_f_range: [DEFAULT_T_F / 2.0, DEFAULT_T_F * 2.0],
            sweep_points: 9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// Noise seed; the global seed when unset.
    pub seed: Option<u64>,
    pub sigmas: Vec<f64>,
    pub target: NoiseTarget,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            seed: None,
            sigmas: vec![0.0, 0.025, 0.05, 0.1],
            target: NoiseTarget::Forces,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearningCurveConfig {
    pub sizes: Vec<usize>,
}

impl Default for LearningCurveConfig {
    fn default() -> Self {
        LearningCurveConfig {
            sizes: vec![25, 125, 250, 500],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToyConfig {
    pub n_list: Vec<usize>,
    pub sigma_list: Vec<f64>,
    pub repeats: usize,
}

impl Default for ToyConfig {
    fn default() -> Self {
        ToyConfig {
            n_list: vec![2, 5, 10, 100, 1000, 10000],
            sigma_list: vec![0.0, 0.5, 1.0, 2.0],
            repeats: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SlopesConfig {
    /// (temperature K, force RMSE meV/Å) pairs.
    pub extrapolation: Vec<[f64; 2]>,
    /// (training-set size, force RMSE meV/Å) pairs.
    pub learning: Vec<[f64; 2]>,
    /// `rmse_by_split.csv` written by `eval`, used when `extrapolation` is empty.
    pub rmse_table: Option<PathBuf>,
    /// `learning_curve.csv` written by `learning-curve`, used when `learning` is empty.
    pub learning_table: Option<PathBuf>,
}

fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t
            .remove("v")
            .unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

/// Set `a.b.c = value` inside a table, creating intermediate tables.
fn set_dotted(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("bad override key {key:?}")));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("{p} in {key:?} is not a table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Sections whose seed defaults to the global one.
pub const SEEDED_SECTIONS: [&str; 5] = ["generate", "train", "landscape", "md", "noise"];

fn fill_module_seeds(table: &mut toml::Table) -> Result<()> {
    let global = match table.get("seed") {
        None => toml::Value::Integer(0),
        Some(v @ toml::Value::Integer(_)) => v.clone(),
        Some(_) => return Err(Error::Config("seed must be an integer".into())),
    };
    for sec in SEEDED_SECTIONS {
        let has = table
            .get(sec)
            .and_then(|v| v.as_table())
            .is_some_and(|t| t.contains_key("seed"));
        if !has {
            set_dotted(table, &format!("{sec}.seed"), global.clone())?;
        }
    }
    Ok(())
}

impl ExperimentConfig {
    /// Merge the optional config file with `key=value` overrides.
    ///
    /// Overrides win over the file; unset keys take their defaults.
    pub fn load(file: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
                text.parse::<toml::Table>()
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override {o:?} is not key=value")))?;
            set_dotted(&mut table, k.trim(), parse_value(v.trim()))?;
        }
        fill_module_seeds(&mut table)?;
        let cfg: ExperimentConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    /// Output directory: explicit setting, else the environment, else `runs`.
    pub fn output_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("runs"))
    }
}
