//! Error tables, slope fits, correlations and the noisy linear-regression toy.

mod toy;

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

pub use toy::{
    toy_direct_fit, toy_fit, toy_regression_experiment, ToyCell, ToyRegressionResult, TOY_HEADER,
};

use crate::dataset::{Dataset, TemperatureKey};
use crate::error::{Error, Result};
use crate::potential::{loss_eval, LossWeights, NeuralPotential};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub quantity: String,
    pub unit: String,
    /// Natural log applied before fitting.
    pub log: bool,
}

impl Axis {
    fn new(quantity: &str, unit: &str, log: bool) -> Self {
        Axis {
            quantity: quantity.into(),
            unit: unit.into(),
            log,
        }
    }
}

/// y = m·x + b by ordinary least squares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub m: f64,
    pub b: f64,
    pub r2: f64,
    pub x: Axis,
    pub y: Axis,
    /// (x, y) after any log transform.
    pub points: Vec<(f64, f64)>,
}

/// Closed-form OLS: (slope, intercept, r²). r² is 1 when y is constant.
pub fn ols(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if points.len() < 2 {
        return Err(Error::invalid("a line fit needs at least two points"));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::invalid("fit points must be finite"));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("singular fit: all x values are equal"));
    }
    let m = sxy / sxx;
    let b = my - m * mx;
    let ss_res: f64 = points.iter().map(|p| (p.1 - m * p.0 - b).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok((m, b, r2))
}

/// Force RMSE (meV/Å) against test temperature (K), fitted on linear T.
pub fn extrapolation_slope(errors: &[(f64, f64)]) -> Result<SlopeFit> {
    let (m, b, r2) = ols(errors)?;
    Ok(SlopeFit {
        m,
        b,
        r2,
        x: Axis::new("temperature", "K", false),
        y: Axis::new("force_rmse", "meV/Å", false),
        points: errors.to_vec(),
    })
}

/// ln n = m·ln ε + b over (training size n, force RMSE ε) pairs.
pub fn learning_curve_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.iter().any(|&(n, e)| !(n > 0.0 && e > 0.0)) {
        return Err(Error::invalid("learning-curve points must be positive"));
    }
    let pts: Vec<(f64, f64)> = points.iter().map(|&(n, e)| (e.ln(), n.ln())).collect();
    let (m, b, r2) = ols(&pts)?;
    Ok(SlopeFit {
        m,
        b,
        r2,
        x: Axis::new("force_rmse", "meV/Å", true),
        y: Axis::new("training_set_size", "configurations", true),
        points: pts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub pearson: f64,
    pub spearman: f64,
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::invalid("correlation undefined for zero variance"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks; ties share the average of their positions.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

pub fn correlate(xs: &[f64], ys: &[f64]) -> Result<Correlation> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::invalid(
            "correlation needs two equal-length series of ≥ 3 values",
        ));
    }
    Ok(Correlation {
        pearson: pearson(xs, ys)?,
        spearman: pearson(&ranks(xs), &ranks(ys))?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitError {
    /// `None` for the pooled row.
    pub temperature: Option<f64>,
    pub n_configurations: usize,
    pub n_force_components: usize,
    pub energy_rmse: f64,
    pub force_rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitTable {
    pub rows: Vec<SplitError>,
    pub pooled: SplitError,
}

pub const SPLIT_HEADER: &str =
    "temperature,n_configurations,energy_rmse_mev_per_atom,force_rmse_mev_per_ang";

impl SplitTable {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{SPLIT_HEADER}")?;
        for r in self.rows.iter().chain(std::iter::once(&self.pooled)) {
            let t = r
                .temperature
                .map(|t| t.to_string())
                .unwrap_or_else(|| "all".into());
            writeln!(
                w,
                "{t},{},{},{}",
                r.n_configurations, r.energy_rmse, r.force_rmse
            )?;
        }
        Ok(())
    }
}

/// Pool per-split RMSEs: MSEs weighted by configuration / component counts.
pub fn pool_splits(rows: &[SplitError]) -> Result<SplitError> {
    let nc: usize = rows.iter().map(|r| r.n_configurations).sum();
    let nf: usize = rows.iter().map(|r| r.n_force_components).sum();
    if nc == 0 || nf == 0 {
        return Err(Error::invalid("nothing to pool"));
    }
    let e: f64 = rows
        .iter()
        .map(|r| r.n_configurations as f64 * r.energy_rmse.powi(2))
        .sum::<f64>()
        / nc as f64;
    let f: f64 = rows
        .iter()
        .map(|r| r.n_force_components as f64 * r.force_rmse.powi(2))
        .sum::<f64>()
        / nf as f64;
    Ok(SplitError {
        temperature: None,
        n_configurations: nc,
        n_force_components: nf,
        energy_rmse: e.sqrt(),
        force_rmse: f.sqrt(),
    })
}

/// Energy (meV/atom) and force (meV/Å) RMSE per test split plus the pooled value.
pub fn rmse_by_split(
    model: &NeuralPotential,
    tests: &BTreeMap<TemperatureKey, Dataset>,
) -> Result<SplitTable> {
    if tests.is_empty() {
        return Err(Error::invalid("no test splits"));
    }
    let mut rows = Vec::new();
    for (t, d) in tests {
        if d.is_empty() {
            return Err(Error::invalid(format!("empty split at {} K", t.0)));
        }
        let r = loss_eval(model, d, LossWeights::default())?;
        rows.push(SplitError {
            temperature: Some(t.0),
            n_configurations: d.len(),
            n_force_components: 3 * d.total_atoms(),
            energy_rmse: r.loss_e,
            force_rmse: r.loss_f,
        });
    }
    let pooled = pool_splits(&rows)?;
    Ok(SplitTable { rows, pooled })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_extrapolation() {
        let f = extrapolation_slope(&[(300.0, 30.0), (600.0, 60.0), (1200.0, 120.0)]).unwrap();
        assert!((f.m - 0.1).abs() < 1e-15);
        assert!((f.r2 - 1.0).abs() < 1e-15);
        let c = extrapolation_slope(&[(300.0, 5.0), (600.0, 5.0)]).unwrap();
        assert_eq!(c.m, 0.0);
        assert!(extrapolation_slope(&[(300.0, 5.0), (300.0, 6.0)]).is_err());
    }

    #[test]
    fn inverse_square_root_learning_curve() {
        let pts: Vec<(f64, f64)> = [25.0, 125.0, 250.0, 500.0]
            .iter()
            .map(|&n: &f64| (n, 7.0 * n.powf(-0.5)))
            .collect();
        let f = learning_curve_slope(&pts).unwrap();
        assert!((f.m + 2.0).abs() < 1e-10);
        assert!(learning_curve_slope(&[(25.0, 1.0), (50.0, 1.0)]).is_err());
        assert!(learning_curve_slope(&[(0.0, 1.0), (50.0, 2.0)]).is_err());
    }

    #[test]
    fn correlation_basics() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let c = correlate(&x, &y).unwrap();
        assert!((c.pearson - 1.0).abs() < 1e-15 && (c.spearman - 1.0).abs() < 1e-15);
        let rev = [9.0, 7.0, 3.0, 1.0];
        assert!((correlate(&x, &rev).unwrap().spearman + 1.0).abs() < 1e-15);
        assert!(correlate(&x, &[1.0; 4]).is_err());
        assert_eq!(ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn pooled_rmse_from_counts() {
        let rows = [
            SplitError {
                temperature: Some(300.0),
                n_configurations: 1,
                n_force_components: 3,
                energy_rmse: 3.0,
                force_rmse: 1.0,
            },
            SplitError {
                temperature: Some(600.0),
                n_configurations: 3,
                n_force_components: 9,
                energy_rmse: 1.0,
                force_rmse: 3.0,
            },
        ];
        let p = pool_splits(&rows).unwrap();
        assert!((p.energy_rmse - (12.0f64 / 4.0).sqrt()).abs() < 1e-15);
        assert!((p.force_rmse - (84.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }
}
