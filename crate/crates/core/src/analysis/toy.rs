//! Noisy linear regression: y = 2x + 1 observed as ỹ = y + σε, fitted by
//! least squares, scored against the noiseless y.

use std::io::Write;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, streams};

const TRUE_A: f64 = 2.0;
const TRUE_B: f64 = 1.0;

pub const TOY_HEADER: &str = "N,sigma,mean_rmse,std_err,repeats";

/// Least-squares (A, B) for y ≈ A·x + B.
pub fn toy_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let a = sxy / sxx;
    (a, my - a * mx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyCell {
    pub n: usize,
    pub sigma: f64,
    pub mean_rmse: f64,
    /// Standard error of the mean over repeats (0 for a single repeat).
    pub std_err: f64,
    pub repeats: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyRegressionResult {
    pub cells: Vec<ToyCell>,
    pub seed: u64,
}

impl ToyRegressionResult {
    pub fn cell(&self, n: usize, sigma: f64) -> Option<&ToyCell> {
        self.cells.iter().find(|c| c.n == n && c.sigma == sigma)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{TOY_HEADER}")?;
        for c in &self.cells {
            writeln!(
                w,
                "{},{},{},{},{}",
                c.n, c.sigma, c.mean_rmse, c.std_err, c.repeats
            )?;
        }
        Ok(())
    }
}

fn linspace01(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// RMSE of the fitted line against the true line for one noise draw.
///
/// Least squares is linear in the targets, so the fit of ỹ = y + σε is the
/// exact generator (2, 1) plus σ times the fit of ε alone. Fitting ε and
/// adding the generator back makes σ = 0 reproduce the truth exactly.
fn one_repeat(x: &[f64], sigma: f64, seed: u64) -> f64 {
    let mut rng = rng::substream(seed, streams::TOY, 0);
    let eps: Vec<f64> = x.iter().map(|_| StandardNormal.sample(&mut rng)).collect();
    let (a_eps, b_eps) = toy_fit(x, &eps);
    let (da, db) = (sigma * a_eps, sigma * b_eps);
    let mse = x.iter().map(|&xi| (da * xi + db).powi(2)).sum::<f64>() / x.len() as f64;
    mse.sqrt()
}

/// Seed of one (N, σ, repeat) draw.
pub(crate) fn repeat_seed(seed: u64, n: usize, repeat: usize) -> u64 {
    rng::derive_seed(
        rng::derive_seed(seed, streams::TOY, n as u64),
        streams::TOY,
        repeat as u64,
    )
}

/// Noise draws depend on (N, repeat) but not on σ, so cells at different σ
/// share their draws.
pub fn toy_regression_experiment(
    n_list: &[usize],
    sigma_list: &[f64],
    repeats: usize,
    seed: u64,
) -> Result<ToyRegressionResult> {
    if n_list.iter().any(|&n| n < 2) {
        return Err(Error::invalid("toy regression needs N ≥ 2"));
    }
    if repeats == 0 {
        return Err(Error::invalid("repeats must be ≥ 1"));
    }
    if sigma_list.iter().any(|&s| !(s >= 0.0 && s.is_finite())) {
        return Err(Error::invalid("sigma must be finite and ≥ 0"));
    }
    let grid: Vec<(usize, f64)> = n_list
        .iter()
        .flat_map(|&n| sigma_list.iter().map(move |&s| (n, s)))
        .collect();
    let cells = grid
        .par_iter()
        .map(|&(n, sigma)| {
            let x = linspace01(n);
            let r: Vec<f64> = (0..repeats)
                .map(|k| one_repeat(&x, sigma, repeat_seed(seed, n, k)))
                .collect();
            let mean = r.iter().sum::<f64>() / repeats as f64;
            let std_err = if repeats > 1 {
                let var = r.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (repeats - 1) as f64;
                (var / repeats as f64).sqrt()
            } else {
                0.0
            };
            ToyCell {
                n,
                sigma,
                mean_rmse: mean,
                std_err,
                repeats,
            }
        })
        .collect();
    Ok(ToyRegressionResult { cells, seed })
}

/// The (A, B) fitted to one noisy draw, computed directly on ỹ.
pub fn toy_direct_fit(n: usize, sigma: f64, seed: u64, repeat: usize) -> (f64, f64) {
    let x = linspace01(n);
    let mut rng = rng::substream(repeat_seed(seed, n, repeat), streams::TOY, 0);
    let y: Vec<f64> = x
        .iter()
        .map(|&xi| {
            let g: f64 = StandardNormal.sample(&mut rng);
            TRUE_A * xi + TRUE_B + sigma * g
        })
        .collect();
    toy_fit(&x, &y)
}
