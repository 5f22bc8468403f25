//! Loss entropy S(T) = k·ln Σ_t exp(−ℓ̄(t)/kT) of a landscape profile and its
//! energy/force weighting.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landscape::LandscapeProfile;

/// Boltzmann-like constant, fixed to one.
pub const K: f64 = 1.0;

pub const DEFAULT_T_E: f64 = 4.0;
pub const DEFAULT_T_F: f64 = 40.0;
pub const DEFAULT_ALPHA: f64 = 0.2;

pub const SWEEP_HEADER: &str = "T_E,T_F,S_E,S_F,S";

/// ln Σ exp(−ℓ/kT) via a max-shifted log-sum-exp. `+∞` entries contribute zero.
pub fn loss_entropy(curve: &[f64], kt: f64) -> Result<f64> {
    if curve.is_empty() {
        return Err(Error::invalid("entropy of an empty curve"));
    }
    if !(kt > 0.0 && kt.is_finite()) {
        return Err(Error::invalid("kT must be positive and finite"));
    }
    if curve.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
        return Err(Error::invalid("curve contains NaN or -inf"));
    }
    let x: Vec<f64> = curve.iter().map(|l| -l / kt).collect();
    let m = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let s: f64 = x.iter().map(|v| (v - m).exp()).sum();
    Ok(K * (m + s.ln()))
}

/// α·S_E + (1 − α)·S_F
pub fn weighted_entropy(s_e: f64, s_f: f64, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!("alpha {alpha} outside [0, 1]")));
    }
    Ok(alpha * s_e + (1.0 - alpha) * s_f)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    #[serde(rename = "S_E")]
    pub s_e: f64,
    #[serde(rename = "S_F")]
    pub s_f: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "T_E_mev_per_atom")]
    pub t_e: f64,
    #[serde(rename = "T_F_mev_per_ang")]
    pub t_f: f64,
    pub alpha: f64,
    pub k: f64,
    pub grid_points: usize,
    pub profile_ref: String,
}

fn profile_ref(p: &LandscapeProfile) -> String {
    let m = &p.meta;
    let seed = m.seed.map(|s| s.to_string()).unwrap_or_else(|| "-".into());
    format!(
        "{}:{}:{}:seed={seed}:n={}",
        m.kind, m.model_id, m.dataset_id, m.n_directions
    )
}

/// S_E from ℓ̄_E at kT = T_E, S_F from ℓ̄_F at kT = T_F, combined with α.
pub fn entropy_from_profile(
    p: &LandscapeProfile,
    t_e: f64,
    t_f: f64,
    alpha: f64,
) -> Result<EntropyReport> {
    let s_e = loss_entropy(&p.mean_energy, t_e)?;
    let s_f = loss_entropy(&p.mean_force, t_f)?;
    Ok(EntropyReport {
        s_e,
        s_f,
        s: weighted_entropy(s_e, s_f, alpha)?,
        t_e,
        t_f,
        alpha,
        k: K,
        grid_points: p.t_grid.len(),
        profile_ref: profile_ref(p),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperatureSweep {
    pub rows: Vec<EntropyReport>,
    /// ln |grid|: the entropy of a perfectly flat zero loss.
    pub flat_reference: f64,
}

impl TemperatureSweep {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{SWEEP_HEADER}")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{},{}", r.t_e, r.t_f, r.s_e, r.s_f, r.s)?;
        }
        Ok(())
    }
}

/// `n` log-spaced points from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

/// Entropies over paired log-spaced temperatures T_E ∈ `t_e_range`,
/// T_F ∈ `t_f_range`.
pub fn temperature_sweep(
    p: &LandscapeProfile,
    t_e_range: (f64, f64),
    t_f_range: (f64, f64),
    n_points: usize,
    alpha: f64,
) -> Result<TemperatureSweep> {
    let ok = |(lo, hi): (f64, f64)| lo > 0.0 && hi >= lo && hi.is_finite();
    if !ok(t_e_range) || !ok(t_f_range) || n_points == 0 {
        return Err(Error::invalid(
            "sweep needs positive increasing temperature ranges",
        ));
    }
    let te = log_grid(t_e_range.0, t_e_range.1, n_points);
    let tf = log_grid(t_f_range.0, t_f_range.1, n_points);
    let rows = te
        .iter()
        .zip(&tf)
        .map(|(&a, &b)| entropy_from_profile(p, a, b, alpha))
        .collect::<Result<_>>()?;
    Ok(TemperatureSweep {
        rows,
        flat_reference: (p.t_grid.len() as f64).ln(),
    })
}
