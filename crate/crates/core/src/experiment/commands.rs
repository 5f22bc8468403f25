use std::collections::BTreeMap;
use std::io::BufReader;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{Artifacts, Command, ExperimentConfig};
use crate::analysis::{
    extrapolation_slope, learning_curve_slope, rmse_by_split, toy_regression_experiment, SlopeFit,
    SplitTable,
};
use crate::dataset::{
    cluster_geometry, corrupt_labels, dataset_stats, generate_reference_dataset, read_extxyz,
    split_by_temperature, write_extxyz, Configuration, Dataset, NoiseSpec, SplitOptions,
    TemperatureKey,
};
use crate::entropy::{entropy_from_profile, temperature_sweep};
use crate::error::{Error, Result};
use crate::landscape::{
    interpolate_models, landscape_1d, landscape_2d, read_profile_csv, reweight_surface,
    uniform_grid, write_profile_csv, write_surface_csv, LandscapeOptions, LandscapeProfile,
    ModelLoss, ProfileMeta,
};
use crate::md::{run_ensemble, write_summary_csv, EnsembleResult};
use crate::potential::{
    fit_rescale, loss_eval, ForceModel, LossReport, LossWeights, NeuralPotential,
};
use crate::rng::{self, streams};
use crate::training::{train_with, TrainReport};
use crate::units::EV_TO_MEV;

pub const NOISE_HEADER: &str = "sigma,baseline_force_mev_per_ang,force_rmse_noisy,force_rmse_original,energy_rmse_noisy,energy_rmse_original";
pub const LEARNING_CURVE_HEADER: &str = "n,force_rmse_mev_per_ang,energy_rmse_mev_per_atom";

pub(super) fn run(cmd: Command, cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    match cmd {
        Command::GenData => gen_data(cfg, art),
        Command::Train => train_cmd(cfg, art),
        Command::Eval => eval(cfg, art),
        Command::Landscape1d => landscape1d(cfg, art),
        Command::Landscape2d => landscape2d(cfg, art),
        Command::Interp => interp(cfg, art),
        Command::Entropy => entropy(cfg, art),
        Command::SweepEntropy => sweep_entropy(cfg, art),
        Command::Md => md(cfg, art),
        Command::NoiseSweep => noise_sweep(cfg, art),
        Command::LearningCurve => learning_curve(cfg, art),
        Command::ToyRegression => toy_regression(cfg, art),
        Command::FitSlopes => fit_slopes(cfg, art),
    }
}

fn need<'a>(p: &'a Option<std::path::PathBuf>, key: &str) -> Result<&'a Path> {
    p.as_deref()
        .ok_or_else(|| Error::Config(format!("{key} is required for this command")))
}

fn load_dataset(cfg: &ExperimentConfig) -> Result<Dataset> {
    let d = match &cfg.data.path {
        Some(p) => read_extxyz(p)?,
        None => generate_reference_dataset(&cfg.potential.build()?, &cfg.generate)?,
    };
    match cfg.data.max_frames {
        Some(n) if n < d.len() => d.take(n),
        _ => Ok(d),
    }
}

fn load_model(cfg: &ExperimentConfig) -> Result<NeuralPotential> {
    NeuralPotential::load(need(&cfg.model.path, "model.path")?)
}

/// Training frames plus test splits keyed by temperature.
///
/// With `data.train_temperature` the split is by temperature. Otherwise a
/// random `held_out_fraction` (default 0) of all frames is held out and
/// grouped by temperature tag.
struct Split {
    train: Dataset,
    tests: BTreeMap<TemperatureKey, Dataset>,
    held_out: Option<Dataset>,
}

fn split(cfg: &ExperimentConfig, d: &Dataset) -> Result<Split> {
    if let Some(t) = cfg.data.train_temperature {
        let opts = SplitOptions {
            held_out_fraction: cfg.data.held_out_fraction.unwrap_or(0.1),
            seed: cfg.seed,
        };
        let s = split_by_temperature(d, t, &opts)?;
        let held_out = s.tests.get(&TemperatureKey(t)).cloned();
        return Ok(Split {
            train: s.train,
            tests: s.tests,
            held_out,
        });
    }
    let frac = cfg.data.held_out_fraction.unwrap_or(0.0);
    if !(0.0..1.0).contains(&frac) {
        return Err(Error::Config(
            "data.held_out_fraction must lie in [0, 1)".into(),
        ));
    }
    let n_held = ((frac * d.len() as f64).round() as usize).min(d.len().saturating_sub(1));
    if n_held == 0 {
        return Ok(Split {
            train: d.clone(),
            tests: BTreeMap::new(),
            held_out: None,
        });
    }
    let mut idx: Vec<usize> = (0..d.len()).collect();
    idx.shuffle(&mut rng::substream(cfg.seed, streams::SPLIT, 0));
    let (held, kept) = idx.split_at(n_held);
    let (mut held, mut kept) = (held.to_vec(), kept.to_vec());
    held.sort_unstable();
    kept.sort_unstable();
    let held_out = d.subset(format!("{}/test", d.name()), &held)?;
    Ok(Split {
        train: d.subset(format!("{}/train", d.name()), &kept)?,
        tests: group_by_temperature(&held_out)?,
        held_out: Some(held_out),
    })
}

/// Frames grouped by temperature tag; empty if any frame is untagged.
fn group_by_temperature(d: &Dataset) -> Result<BTreeMap<TemperatureKey, Dataset>> {
    let mut groups: BTreeMap<TemperatureKey, Vec<usize>> = BTreeMap::new();
    for (k, c) in d.configurations().iter().enumerate() {
        match c.temperature {
            Some(t) => groups.entry(TemperatureKey(t)).or_default().push(k),
            None => return Ok(BTreeMap::new()),
        }
    }
    groups
        .into_iter()
        .map(|(t, idx)| Ok((t, d.subset(format!("{}@{}K", d.name(), t.0), &idx)?)))
        .collect()
}

fn fresh_model(cfg: &ExperimentConfig, train: &Dataset) -> Result<NeuralPotential> {
    let m = NeuralPotential::new(cfg.model.architecture(), cfg.train.seed)?;
    if cfg.model.rescale {
        fit_rescale(&m, train)
    } else {
        Ok(m)
    }
}

fn fit(cfg: &ExperimentConfig, init: &NeuralPotential, s: &Split) -> Result<TrainReport> {
    train_with(init, &s.train, s.held_out.as_ref(), &cfg.train, |_| {})
}

fn gen_data(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let d = load_dataset(cfg)?;
    art.write("dataset.extxyz", write_extxyz(&d).as_bytes())?;
    art.write_json("dataset_stats.json", &dataset_stats(&d)?)?;
    Ok(())
}

#[derive(Serialize)]
struct TrainSummary<'a> {
    n_train: usize,
    n_validation: usize,
    initial: LossReport,
    last: Option<&'a crate::training::HistoryRow>,
    best_epoch: usize,
    best_fingerprint: String,
    final_fingerprint: String,
}

fn train_cmd(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let d = load_dataset(cfg)?;
    let s = split(cfg, &d)?;
    let init = match &cfg.model.path {
        Some(p) => NeuralPotential::load(p)?,
        None => fresh_model(cfg, &s.train)?,
    };
    let report = fit(cfg, &init, &s)?;
    art.write_with("history.csv", |w| report.write_history_csv(w))?;
    art.write("model.json", report.best_model.to_json()?.as_bytes())?;
    art.write("model_final.json", report.final_model.to_json()?.as_bytes())?;
    if let Some(m) = &report.ema_model {
        art.write("model_ema.json", m.to_json()?.as_bytes())?;
    }
    if let Some(m) = &report.swa_model {
        art.write("model_swa.json", m.to_json()?.as_bytes())?;
    }
    art.write_json(
        "train_summary.json",
        &TrainSummary {
            n_train: s.train.len(),
            n_validation: s.held_out.as_ref().map_or(0, Dataset::len),
            initial: report.initial,
            last: report.history.last(),
            best_epoch: report.best_epoch,
            best_fingerprint: report.best_model.fingerprint(),
            final_fingerprint: report.final_model.fingerprint(),
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct EvalReport {
    model: String,
    dataset: String,
    loss: LossReport,
    splits: Option<SplitTable>,
    extrapolation: Option<SlopeFit>,
}

fn eval(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let m = load_model(cfg)?;
    let d = load_dataset(cfg)?;
    let (target, groups) = match cfg.data.train_temperature {
        Some(_) => {
            let s = split(cfg, &d)?;
            let all: Vec<Configuration> = s
                .tests
                .values()
                .flat_map(|t| t.configurations().iter().cloned())
                .collect();
            (Dataset::new(format!("{}/tests", d.name()), all)?, s.tests)
        }
        None => {
            let g = group_by_temperature(&d)?;
            (d, g)
        }
    };
    let loss = loss_eval(&m, &target, LossWeights::default())?;
    let splits = if groups.is_empty() {
        None
    } else {
        Some(rmse_by_split(&m, &groups)?)
    };
    let extrapolation = match &splits {
        Some(t) if t.rows.len() >= 2 => Some(extrapolation_slope(
            &t.rows
                .iter()
                .map(|r| (r.temperature.unwrap_or(f64::NAN), r.force_rmse))
                .collect::<Vec<_>>(),
        )?),
        _ => None,
    };
    if let Some(t) = &splits {
        art.write_with("rmse_by_split.csv", |w| t.write_csv(w))?;
    }
    art.write_json(
        "eval.json",
        &EvalReport {
            model: m.fingerprint(),
            dataset: target.name().into(),
            loss,
            splits,
            extrapolation,
        },
    )?;
    Ok(())
}

fn t_grid(cfg: &ExperimentConfig, n: usize) -> Vec<f64> {
    uniform_grid(n, cfg.landscape.t_min, cfg.landscape.t_max)
}

fn meta_path(csv: &Path) -> std::path::PathBuf {
    csv.with_extension("meta.json")
}

fn write_profile(art: &mut Artifacts, stem: &str, p: &LandscapeProfile) -> Result<()> {
    art.write_with(&format!("{stem}.csv"), |w| write_profile_csv(w, p))?;
    art.write_json(&format!("{stem}.meta.json"), &p.meta)?;
    Ok(())
}

fn landscape1d(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let m = load_model(cfg)?;
    let d = load_dataset(cfg)?;
    let opts = LandscapeOptions {
        t_grid: t_grid(cfg, cfg.landscape.t_points),
        n_directions: cfg.landscape.n_directions,
        seed: cfg.landscape.seed.unwrap_or(cfg.seed),
        frozen_layers: cfg.landscape.frozen_layers.clone(),
        parallel: cfg.landscape.parallel,
        cache_origin: true,
    };
    let p = landscape_1d(&ModelLoss::new(&m, &d), &opts)?;
    write_profile(art, "profile", &p)
}

#[derive(Serialize)]
struct SurfaceMeta<'a> {
    direction_ids: [usize; 2],
    seed: u64,
    frozen_layers: &'a [usize],
    model_id: &'a str,
    dataset_id: &'a str,
    orthogonalization: &'a str,
    evaluations: usize,
    failed_points: &'a [(usize, usize)],
    reweight: Option<[f64; 2]>,
}

fn landscape2d(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let m = load_model(cfg)?;
    let d = load_dataset(cfg)?;
    let g = t_grid(cfg, cfg.landscape.points_2d);
    let s = landscape_2d(
        &ModelLoss::new(&m, &d),
        &g,
        &g,
        cfg.landscape.seed.unwrap_or(cfg.seed),
        &cfg.landscape.frozen_layers,
        cfg.landscape.parallel,
    )?;
    art.write_with("surface.csv", |w| write_surface_csv(w, &s))?;
    if let Some([we, wf]) = cfg.landscape.reweight {
        let c = reweight_surface(&s, we, wf)?;
        art.write_with("surface_reweighted.csv", |w| {
            use std::io::Write;
            writeln!(w, "t1,t2,combined")?;
            for (i, t1) in s.t1_grid.iter().enumerate() {
                for (j, t2) in s.t2_grid.iter().enumerate() {
                    writeln!(w, "{t1},{t2},{}", c[i][j])?;
                }
            }
            Ok(())
        })?;
    }
    art.write_json(
        "surface.meta.json",
        &SurfaceMeta {
            direction_ids: s.direction_ids,
            seed: s.seed,
            frozen_layers: &s.frozen_layers,
            model_id: &s.model_id,
            dataset_id: &s.dataset_id,
            orthogonalization: &s.orthogonalization,
            evaluations: s.evaluations,
            failed_points: &s.failed_points,
            reweight: cfg.landscape.reweight,
        },
    )?;
    Ok(())
}

fn interp(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let a = load_model(cfg)?;
    let b = NeuralPotential::load(need(&cfg.model.path_b, "model.path_b")?)?;
    let d = load_dataset(cfg)?;
    let p = interpolate_models(
        &ModelLoss::new(&a, &d),
        b.params(),
        &t_grid(cfg, cfg.landscape.t_points),
        cfg.landscape.parallel,
    )?;
    write_profile(art, "interp", &p)
}

/// Profile CSV plus its `.meta.json` sidecar, if present.
fn read_profile(path: &Path) -> Result<LandscapeProfile> {
    let meta = match std::fs::read_to_string(meta_path(path)) {
        Ok(text) => serde_json::from_str(&text)?,
        Err(_) => ProfileMeta {
            kind: "external".into(),
            model_id: String::new(),
            dataset_id: path.display().to_string(),
            seed: None,
            n_directions: 0,
            frozen_layers: Vec::new(),
            normalization: "unknown".into(),
            evaluations: 0,
            failed_points: Vec::new(),
        },
    };
    let f = std::fs::File::open(path).map_err(|e| Error::file(path, e))?;
    read_profile_csv(BufReader::new(f), meta)
}

fn entropy(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let p = read_profile(need(&cfg.entropy.profile, "entropy.profile")?)?;
    let e = &cfg.entropy;
    art.write_json(
        "entropy.json",
        &entropy_from_profile(&p, e.t_e, e.t_f, e.alpha)?,
    )?;
    Ok(())
}

fn sweep_entropy(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let p = read_profile(need(&cfg.entropy.profile, "entropy.profile")?)?;
    let e = &cfg.entropy;
    let s = temperature_sweep(
        &p,
        (e.t_e_range[0], e.t_e_range[1]),
        (e.t_f_range[0], e.t_f_range[1]),
        e.sweep_points,
        e.alpha,
    )?;
    art.write_with("entropy_sweep.csv", |w| s.write_csv(w))?;
    art.write_json("entropy_sweep.json", &s)?;
    Ok(())
}

fn md(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let start = match &cfg.data.md_start {
        Some(p) => read_extxyz(p)?.configurations()[0].clone(),
        None => cluster_geometry(
            &cfg.potential.build()?,
            cfg.generate.n_atoms,
            &cfg.generate.species,
        )?,
    };
    let (label, result): (String, EnsembleResult) = if cfg.model.reference {
        let pot = cfg.potential.build()?;
        ("reference".into(), ensemble(&pot, &start, cfg)?)
    } else {
        let m = load_model(cfg)?;
        (m.fingerprint(), ensemble(&m, &start, cfg)?)
    };
    art.write_json("md_ensemble.json", &result)?;
    art.write_with("md_summary.csv", |w| {
        write_summary_csv(w, &[(label.clone(), result.summary.clone())])
    })?;
    if cfg.md.dump_every > 0 {
        for (i, r) in result.records.iter().enumerate() {
            let d = Dataset::new(format!("traj_{i:03}"), r.snapshots.clone())?;
            art.write(&format!("traj_{i:03}.extxyz"), write_extxyz(&d).as_bytes())?;
        }
    }
    Ok(())
}

fn ensemble<M: ForceModel>(
    m: &M,
    start: &Configuration,
    cfg: &ExperimentConfig,
) -> Result<EnsembleResult> {
    run_ensemble(m, start, &cfg.md)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseRow {
    pub sigma: f64,
    /// σ·σ_DFT of the force labels, meV/Å.
    pub baseline_force: f64,
    pub force_rmse_noisy: f64,
    pub force_rmse_original: f64,
    pub energy_rmse_noisy: f64,
    pub energy_rmse_original: f64,
    pub best_epoch: usize,
}

/// Corrupt, train, then score the model on the noisy labels it saw and on
/// the original labels of the same frames.
fn noise_sweep(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let d = load_dataset(cfg)?;
    let base = split(cfg, &d)?;
    let sigma_dft = base
        .train
        .sigma_dft_force()
        .ok_or_else(|| Error::MissingLabels("noise sweep needs force labels".into()))?;
    let seed = cfg.noise.seed.unwrap_or(cfg.seed);
    let mut rows = Vec::new();
    for &sigma in &cfg.noise.sigmas {
        let spec = NoiseSpec {
            sigma,
            target: cfg.noise.target,
            seed,
        };
        let noisy = corrupt_labels(&base.train, &spec)?;
        let s = Split {
            train: noisy.clone(),
            tests: BTreeMap::new(),
            held_out: None,
        };
        let report = fit(cfg, &fresh_model(cfg, &noisy)?, &s)?;
        let m = &report.final_model;
        let on_noisy = loss_eval(m, &noisy, LossWeights::default())?;
        let on_orig = loss_eval(m, &base.train, LossWeights::default())?;
        rows.push(NoiseRow {
            sigma,
            baseline_force: sigma * sigma_dft * EV_TO_MEV,
            force_rmse_noisy: on_noisy.loss_f,
            force_rmse_original: on_orig.loss_f,
            energy_rmse_noisy: on_noisy.loss_e,
            energy_rmse_original: on_orig.loss_e,
            best_epoch: report.best_epoch,
        });
    }
    art.write_with("noise_sweep.csv", |w| {
        use std::io::Write;
        writeln!(w, "{NOISE_HEADER}")?;
        for r in &rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.sigma,
                r.baseline_force,
                r.force_rmse_noisy,
                r.force_rmse_original,
                r.energy_rmse_noisy,
                r.energy_rmse_original
            )?;
        }
        Ok(())
    })?;
    art.write_json("noise_sweep.json", &rows)?;
    Ok(())
}

#[derive(Serialize)]
struct LearningCurveReport {
    rows: Vec<[f64; 3]>,
    slope: Option<SlopeFit>,
}

/// Nested random subsets of the training split, each scored on the tests.
fn learning_curve(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let d = load_dataset(cfg)?;
    let s = split(cfg, &d)?;
    let test = s.held_out.clone().ok_or_else(|| {
        Error::Config(
            "learning-curve needs data.held_out_fraction > 0 or data.train_temperature".into(),
        )
    })?;
    let mut order: Vec<usize> = (0..s.train.len()).collect();
    order.shuffle(&mut rng::substream(cfg.seed, streams::SPLIT, 1));
    let mut rows = Vec::new();
    for &n in &cfg.learning_curve.sizes {
        if n == 0 || n > order.len() {
            return Err(Error::Config(format!(
                "learning_curve size {n} outside 1..={}",
                order.len()
            )));
        }
        let mut idx = order[..n].to_vec();
        idx.sort_unstable();
        let sub = s.train.subset(format!("{}[{n}]", s.train.name()), &idx)?;
        let sub_split = Split {
            train: sub.clone(),
            tests: BTreeMap::new(),
            held_out: None,
        };
        let report = fit(cfg, &fresh_model(cfg, &sub)?, &sub_split)?;
        let r = loss_eval(&report.final_model, &test, LossWeights::default())?;
        rows.push([n as f64, r.loss_f, r.loss_e]);
    }
    let slope = if rows.len() >= 2 {
        Some(learning_curve_slope(
            &rows.iter().map(|r| (r[0], r[1])).collect::<Vec<_>>(),
        )?)
    } else {
        None
    };
    art.write_with("learning_curve.csv", |w| {
        use std::io::Write;
        writeln!(w, "{LEARNING_CURVE_HEADER}")?;
        for r in &rows {
            writeln!(w, "{},{},{}", r[0], r[1], r[2])?;
        }
        Ok(())
    })?;
    art.write_json("learning_curve.json", &LearningCurveReport { rows, slope })?;
    Ok(())
}

fn toy_regression(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let t = &cfg.toy;
    let r = toy_regression_experiment(&t.n_list, &t.sigma_list, t.repeats, cfg.seed)?;
    art.write_with("toy_regression.csv", |w| r.write_csv(w))?;
    Ok(())
}

/// (x, y) pairs from two named columns of a CSV; rows whose x does not
/// parse (such as the pooled `all` row) are skipped.
fn read_columns(path: &Path, x: &str, y: &str) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::invalid(format!("{}: no column {name}", path.display())))
    };
    let (ix, iy) = (col(x)?, col(y)?);
    let mut out = Vec::new();
    for (k, line) in lines.enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        let (Some(a), Some(b)) = (cols.get(ix), cols.get(iy)) else {
            continue;
        };
        let Ok(a) = a.trim().parse::<f64>() else {
            continue;
        };
        let b = b.trim().parse::<f64>().map_err(|_| Error::Parse {
            frame: 0,
            line: k + 2,
            message: format!("bad value {b:?} in column {y}"),
        })?;
        out.push((a, b));
    }
    Ok(out)
}

#[derive(Serialize)]
struct Slopes {
    extrapolation: Option<SlopeFit>,
    learning: Option<SlopeFit>,
}

fn fit_slopes(cfg: &ExperimentConfig, art: &mut Artifacts) -> Result<()> {
    let s = &cfg.slopes;
    let pairs = |v: &[[f64; 2]]| v.iter().map(|p| (p[0], p[1])).collect::<Vec<_>>();
    let ext = if !s.extrapolation.is_empty() {
        pairs(&s.extrapolation)
    } else if let Some(p) = &s.rmse_table {
        read_columns(p, "temperature", "force_rmse_mev_per_ang")?
    } else {
        Vec::new()
    };
    let learn = if !s.learning.is_empty() {
        pairs(&s.learning)
    } else if let Some(p) = &s.learning_table {
        read_columns(p, "n", "force_rmse_mev_per_ang")?
    } else {
        Vec::new()
    };
    if ext.is_empty() && learn.is_empty() {
        return Err(Error::Config(
            "fit-slopes needs slopes.extrapolation, slopes.learning or a table".into(),
        ));
    }
    let out = Slopes {
        extrapolation: (!ext.is_empty())
            .then(|| extrapolation_slope(&ext))
            .transpose()?,
        learning: (!learn.is_empty())
            .then(|| learning_curve_slope(&learn))
            .transpose()?,
    };
    art.write_json("slopes.json", &out)?;
    Ok(())
}
