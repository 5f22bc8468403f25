//! Mini-batch Adam training of the neural potential with EMA, tail
//! averaging, plateau decay and scheduled loss weights.

mod optim;

use std::io::Write;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

pub use optim::{minimize, Adam, Ema, PlateauConfig, PlateauScheduler, TailAverage};

use crate::dataset::{Configuration, Dataset};
use crate::error::{Error, Result};
use crate::potential::{
    batch_loss_and_gradient, loss_eval, LossReport, LossWeights, NeuralPotential,
};
use crate::rng::{self, streams};

/// From `epoch` on, use weights (w_E, w_F).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightStep {
    pub epoch: usize,
    #[serde(rename = "w_E")]
    pub w_e: f64,
    #[serde(rename = "w_F")]
    pub w_f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub batch_size: usize,
    pub lr0: f64,
    pub amsgrad: bool,
    pub ema_decay: Option<f64>,
    pub plateau: PlateauConfig,
    pub weight_schedule: Vec<WeightStep>,
    pub swa_tail: Option<usize>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_epochs: 200,
            batch_size: 8,
            lr0: 5e-3,
            amsgrad: false,
            ema_decay: None,
            plateau: PlateauConfig::default(),
            weight_schedule: vec![WeightStep {
                epoch: 0,
                w_e: 1.0,
                w_f: 1000.0,
            }],
            swa_tail: None,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: TrainConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.lr0 >= 0.0 && self.lr0.is_finite()) {
            return bad("lr0 must be finite and non-negative");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if !(self.plateau.factor > 0.0 && self.plateau.factor < 1.0) {
            return bad("plateau.factor must lie in (0, 1)");
        }
        if self.plateau.patience == 0 {
            return bad("plateau.patience must be positive");
        }
        if self.ema_decay.is_some_and(|d| !(d > 0.0 && d < 1.0)) {
            return bad("ema_decay must lie in (0, 1)");
        }
        if self.weight_schedule.is_empty() {
            return bad("weight_schedule must not be empty");
        }
        if self.weight_schedule[0].epoch != 0 {
            return bad("weight_schedule must start at epoch 0");
        }
        if self
            .weight_schedule
            .windows(2)
            .any(|w| w[1].epoch <= w[0].epoch)
        {
            return bad("weight_schedule epochs must be increasing");
        }
        if self
            .weight_schedule
            .iter()
            .any(|s| !(s.w_e >= 0.0 && s.w_f >= 0.0))
        {
            return bad("loss weights must be non-negative");
        }
        Ok(())
    }
}

/// Piecewise-constant weights: the last entry whose epoch is ≤ `epoch`.
pub fn apply_weight_schedule(cfg: &TrainConfig, epoch: usize) -> Result<LossWeights> {
    cfg.weight_schedule
        .iter()
        .rev()
        .find(|s| s.epoch <= epoch)
        .map(|s| LossWeights::new(s.w_e, s.w_f))
        .ok_or_else(|| Error::Config(format!("weight schedule undefined at epoch {epoch}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub epoch: usize,
    pub train: LossReport,
    pub validation: Option<LossReport>,
    pub lr: f64,
    pub weights: LossWeights,
}

pub const HISTORY_HEADER: &str = "epoch,loss_E,loss_F,combined,lr,w_E,w_F";

#[derive(Debug, Clone)]
pub struct TrainReport {
    /// Loss of the starting model under the epoch-0 weights.
    pub initial: LossReport,
    /// One row per completed epoch, evaluated after that epoch's updates.
    pub history: Vec<HistoryRow>,
    pub final_model: NeuralPotential,
    pub best_epoch: usize,
    pub best_model: NeuralPotential,
    pub ema_model: Option<NeuralPotential>,
    pub swa_model: Option<NeuralPotential>,
}

impl TrainReport {
    pub fn write_history_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{HISTORY_HEADER}")?;
        for r in &self.history {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.epoch,
                r.train.loss_e,
                r.train.loss_f,
                r.train.combined,
                r.lr,
                r.weights.energy,
                r.weights.force
            )?;
        }
        Ok(())
    }
}

pub fn train(m: &NeuralPotential, d_train: &Dataset, cfg: &TrainConfig) -> Result<TrainReport> {
    train_with(m, d_train, None, cfg, |_| {})
}

/// Training with an optional validation set (used for best-epoch selection)
/// and an observer called with the parameters after every optimizer step.
pub fn train_with<F>(
    m: &NeuralPotential,
    d_train: &Dataset,
    validation: Option<&Dataset>,
    cfg: &TrainConfig,
    mut observer: F,
) -> Result<TrainReport>
where
    F: FnMut(&[f64]),
{
    cfg.validate()?;
    if d_train.is_empty() {
        return Err(Error::invalid("empty training set"));
    }
    let mask: Vec<bool> = {
        let mut mask = vec![true; m.params().len()];
        for b in m.partition().blocks.iter().filter(|b| b.frozen) {
            mask[b.range()].iter_mut().for_each(|x| *x = false);
        }
        mask
    };
    let mut theta = m.params().values.clone();
    let mut adam = Adam::new(theta.len(), cfg.amsgrad);
    let mut sched = PlateauScheduler::new(cfg.plateau);
    let mut ema = cfg.ema_decay.map(|d| Ema::new(d, &theta));
    let mut swa = TailAverage::default();
    let mut lr = cfg.lr0;

    let w0 = apply_weight_schedule(cfg, 0)?;
    let initial = loss_eval(m, d_train, w0)?;
    let mut history = Vec::with_capacity(cfg.max_epochs);
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    let mut order: Vec<usize> = (0..d_train.len()).collect();
    let mut prev_w = w0;

    for epoch in 0..cfg.max_epochs {
        let w = apply_weight_schedule(cfg, epoch)?;
        if w != prev_w {
            // Losses under different weights are not comparable.
            sched.reset();
            best = None;
            prev_w = w;
        }
        order.shuffle(&mut rng::substream(cfg.seed, streams::TRAIN, epoch as u64));
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&Configuration> = chunk
                .iter()
                .map(|&i| &d_train.configurations()[i])
                .collect();
            let model = m.with_values(theta.clone())?;
            let (_, grad) = batch_loss_and_gradient(&model, &batch, w)
                .map_err(|_| Error::Divergence { epoch })?;
            adam.step(&mut theta, &grad, lr, Some(&mask));
            if theta.iter().any(|v| !v.is_finite()) {
                return Err(Error::Divergence { epoch });
            }
            if let Some(e) = ema.as_mut() {
                e.update(&theta);
            }
            observer(&theta);
        }
        let model = m.with_values(theta.clone())?;
        let train = loss_eval(&model, d_train, w).map_err(|_| Error::Divergence { epoch })?;
        if !train.combined.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        let val = validation.map(|v| loss_eval(&model, v, w)).transpose()?;
        let select = val.map_or(train.combined, |v| v.combined);
        if best.as_ref().is_none_or(|b| select < b.0) {
            best = Some((select, epoch, theta.clone()));
        }
        if cfg.swa_tail.is_some_and(|t| epoch >= t) {
            swa.add(&theta);
        }
        history.push(HistoryRow {
            epoch,
            train,
            validation: val,
            lr,
            weights: w,
        });
        sched.observe(train.combined, &mut lr);
    }

    let final_model = m.with_values(theta)?;
    let (best_epoch, best_model) = match best {
        Some((_, e, p)) => (e, m.with_values(p)?),
        None => (0, final_model.clone()),
    };
    Ok(TrainReport {
        initial,
        history,
        best_epoch,
        best_model,
        ema_model: ema.map(|e| m.with_values(e.values)).transpose()?,
        swa_model: if swa.count > 0 {
            Some(m.with_values(swa.values)?)
        } else {
            None
        },
        final_model,
    })
}
