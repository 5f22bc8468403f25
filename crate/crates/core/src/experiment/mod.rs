//! Experiment runs: one command, one config, a directory of artifacts and a
//! manifest describing them.

mod commands;
mod config;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use commands::{NoiseRow, LEARNING_CURVE_HEADER, NOISE_HEADER};
pub use config::{
    DataConfig, EntropyConfig, ExperimentConfig, LandscapeConfig, LearningCurveConfig, ModelConfig,
    NoiseConfig, PotentialConfig, PotentialKind, SlopesConfig, ToyConfig, OUTPUT_DIR_ENV,
    SEEDED_SECTIONS,
};

use crate::error::{Error, Result};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    #[value(name = "gen-data")]
    GenData,
    Train,
    Eval,
    #[value(name = "landscape1d")]
    Landscape1d,
    #[value(name = "landscape2d")]
    Landscape2d,
    Interp,
    Entropy,
    #[value(name = "sweep-entropy")]
    SweepEntropy,
    Md,
    #[value(name = "noise-sweep")]
    NoiseSweep,
    #[value(name = "learning-curve")]
    LearningCurve,
    #[value(name = "toy-regression")]
    ToyRegression,
    #[value(name = "fit-slopes")]
    FitSlopes,
}

impl Command {
    pub const ALL: [Command; 13] = [
        Command::GenData,
        Command::Train,
        Command::Eval,
        Command::Landscape1d,
        Command::Landscape2d,
        Command::Interp,
        Command::Entropy,
        Command::SweepEntropy,
        Command::Md,
        Command::NoiseSweep,
        Command::LearningCurve,
        Command::ToyRegression,
        Command::FitSlopes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::GenData => "gen-data",
            Command::Train => "train",
            Command::Eval => "eval",
            Command::Landscape1d => "landscape1d",
            Command::Landscape2d => "landscape2d",
            Command::Interp => "interp",
            Command::Entropy => "entropy",
            Command::SweepEntropy => "sweep-entropy",
            Command::Md => "md",
            Command::NoiseSweep => "noise-sweep",
            Command::LearningCurve => "learning-curve",
            Command::ToyRegression => "toy-regression",
            Command::FitSlopes => "fit-slopes",
        }
    }
}

/// Command-line level settings layered over the config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: Option<PathBuf>,
    /// `key=value` overrides, applied in order.
    pub set: Vec<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl RunOptions {
    /// Overrides in precedence order: `--set` entries, then `--seed`, then `--out`.
    fn overrides(&self) -> Vec<String> {
        let mut o = self.set.clone();
        if let Some(s) = self.seed {
            o.push(format!("seed={s}"));
        }
        if let Some(out) = &self.out {
            let quoted = toml::Value::String(out.to_string_lossy().into_owned()).to_string();
            o.push(format!("out={quoted}"));
        }
        o
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}

impl From<&Error> for ErrorInfo {
    fn from(e: &Error) -> Self {
        ErrorInfo {
            kind: e.kind().into(),
            message: e.to_string(),
            exit_code: e.exit_code(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: Command,
    /// "ok" or "error".
    pub status: String,
    pub error: Option<ErrorInfo>,
    pub config: Option<ExperimentConfig>,
    /// Effective seed of every module (global under `global`).
    pub seeds: BTreeMap<String, u64>,
    pub threads: Option<usize>,
    pub wall_time_s: f64,
    /// File name → sha256 hex digest.
    pub artifacts: BTreeMap<String, String>,
}

/// Output directory plus a record of everything written to it.
pub struct Artifacts {
    dir: PathBuf,
    hashes: BTreeMap<String, String>,
}

impl Artifacts {
    fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            hashes: BTreeMap::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.path(name);
        std::fs::write(&path, bytes).map_err(|e| Error::file(&path, e))?;
        self.hashes
            .insert(name.into(), hex::encode(Sha256::digest(bytes)));
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn write_with<F>(&mut self, name: &str, f: F) -> Result<PathBuf>
    where
        F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(name, &buf)
    }
}

/// Result of [`execute`]: the manifest (also on disk) and the error, if any.
#[derive(Debug)]
pub struct Outcome {
    pub manifest: Manifest,
    pub manifest_path: PathBuf,
    pub error: Option<Error>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        self.error.as_ref().map_or(0, Error::exit_code)
    }
}

fn seeds_of(cfg: &ExperimentConfig) -> BTreeMap<String, u64> {
    BTreeMap::from([
        ("global".to_string(), cfg.seed),
        ("generate".to_string(), cfg.generate.seed),
        ("train".to_string(), cfg.train.seed),
        (
            "landscape".to_string(),
            cfg.landscape.seed.unwrap_or(cfg.seed),
        ),
        ("md".to_string(), cfg.md.seed),
        ("noise".to_string(), cfg.noise.seed.unwrap_or(cfg.seed)),
    ])
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match threads {
        None | Some(0) => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(f),
    }
}

/// Run `command` and write its artifacts and manifest.
///
/// The manifest is written even when loading the config or the command
/// itself fails; its `error` field then holds the cause.
pub fn execute(command: Command, opts: &RunOptions) -> Outcome {
    let start = Instant::now();
    let loaded = ExperimentConfig::load(opts.config.as_deref(), &opts.overrides());
    let out_dir = match &loaded {
        Ok(cfg) => cfg.output_dir(),
        Err(_) => ExperimentConfig {
            out: opts.out.clone(),
            ..ExperimentConfig::default()
        }
        .output_dir(),
    };

    let mut hashes = BTreeMap::new();
    let result = loaded.and_then(|cfg| {
        let mut art = Artifacts::create(&out_dir)?;
        let r = in_pool(opts.threads, || commands::run(command, &cfg, &mut art));
        hashes = std::mem::take(&mut art.hashes);
        r.map(|()| cfg)
    });
    let (config, error) = match result {
        Ok(cfg) => (Some(cfg), None),
        Err(e) => (
            ExperimentConfig::load(opts.config.as_deref(), &opts.overrides()).ok(),
            Some(e),
        ),
    };
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command,
        status: if error.is_none() { "ok" } else { "error" }.into(),
        error: error.as_ref().map(ErrorInfo::from),
        seeds: config.as_ref().map(seeds_of).unwrap_or_default(),
        config,
        threads: opts.threads,
        wall_time_s: start.elapsed().as_secs_f64(),
        artifacts: hashes,
    };
    let manifest_path = out_dir.join(MANIFEST_NAME);
    let written = std::fs::create_dir_all(&out_dir)
        .and_then(|()| {
            let mut text =
                serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
            text.push('\n');
            std::fs::write(&manifest_path, text)
        })
        .map_err(|e| Error::file(&manifest_path, e));
    let error = match (error, written) {
        (Some(e), _) => Some(e),
        (None, Err(e)) => Some(e),
        (None, Ok(())) => None,
    };
    Outcome {
        manifest,
        manifest_path,
        error,
    }
}
