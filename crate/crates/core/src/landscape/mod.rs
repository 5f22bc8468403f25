//! Filter-normalized loss landscapes: 1D random-direction profiles, 2D
//! planes, linear interpolation between models and loss re-weighting.

mod direction;
mod io;
mod surface;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use direction::{filter_normalize, orthogonalize_pair, sample_direction, Direction};
pub use io::{
    read_profile_csv, write_profile_csv, write_surface_csv, PROFILE_HEADER, SURFACE_HEADER,
};
pub use surface::{CountingSurface, LossSurface, ModelLoss, QuadraticSurface};

use crate::error::{Error, Result};
use crate::potential::ParameterVector;

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn uniform_grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| {
            let s = i as f64 / (n - 1) as f64;
            lo * (1.0 - s) + hi * s
        })
        .collect()
}

fn check_grid(t: &[f64], need_zero: bool) -> Result<()> {
    if t.is_empty() || t.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("grid must be nonempty and finite"));
    }
    if t.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("grid must be strictly increasing"));
    }
    if need_zero && !t.contains(&0.0) {
        return Err(Error::invalid("grid must contain t = 0"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeOptions {
    pub t_grid: Vec<f64>,
    pub n_directions: usize,
    pub seed: u64,
    /// Layers whose parameters stay fixed (in addition to frozen blocks of
    /// the model's own partition).
    pub frozen_layers: Vec<usize>,
    pub parallel: bool,
    /// Evaluate t = 0 once and share it across directions.
    pub cache_origin: bool,
}

impl Default for LandscapeOptions {
    fn default() -> Self {
        LandscapeOptions {
            t_grid: uniform_grid(21, -1.0, 1.0),
            n_directions: 20,
            seed: 0,
            frozen_layers: Vec::new(),
            parallel: true,
            cache_origin: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileMeta {
    /// "random_directions" or "interpolation".
    pub kind: String,
    pub model_id: String,
    pub dataset_id: String,
    pub seed: Option<u64>,
    pub n_directions: usize,
    pub frozen_layers: Vec<usize>,
    pub normalization: String,
    pub evaluations: usize,
    /// (direction, grid index) pairs whose loss was not finite.
    pub failed_points: Vec<(usize, usize)>,
}

/// Losses along a grid of t: per direction and averaged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeProfile {
    pub t_grid: Vec<f64>,
    /// `energy[n][i]`: ℓ_E (meV/atom RMSE) of direction n at t_grid[i].
    pub energy: Vec<Vec<f64>>,
    /// `force[n][i]`: ℓ_F (meV/Å RMSE).
    pub force: Vec<Vec<f64>>,
    pub mean_energy: Vec<f64>,
    pub mean_force: Vec<f64>,
    pub meta: ProfileMeta,
}

fn column_mean(curves: &[Vec<f64>], len: usize) -> Vec<f64> {
    (0..len)
        .map(|i| curves.iter().map(|c| c[i]).sum::<f64>() / curves.len() as f64)
        .collect()
}

impl LandscapeProfile {
    /// Build from per-direction curves; the averages are recomputed.
    pub fn from_curves(
        t_grid: Vec<f64>,
        energy: Vec<Vec<f64>>,
        force: Vec<Vec<f64>>,
        meta: ProfileMeta,
    ) -> Result<Self> {
        check_grid(&t_grid, false)?;
        if energy.is_empty() || energy.len() != force.len() {
            return Err(Error::ShapeMismatch(
                "need matching energy and force curves".into(),
            ));
        }
        if energy.iter().chain(&force).any(|c| c.len() != t_grid.len()) {
            return Err(Error::ShapeMismatch(
                "curve length differs from grid".into(),
            ));
        }
        Ok(LandscapeProfile {
            mean_energy: column_mean(&energy, t_grid.len()),
            mean_force: column_mean(&force, t_grid.len()),
            t_grid,
            energy,
            force,
            meta,
        })
    }

    pub fn n_directions(&self) -> usize {
        self.energy.len()
    }

    /// Index of t = 0 in the grid, if present.
    pub fn origin(&self) -> Option<usize> {
        self.t_grid.iter().position(|&t| t == 0.0)
    }
}

fn effective_params(p: &ParameterVector, frozen_layers: &[usize]) -> ParameterVector {
    let mut p = p.clone();
    let mut layers = p.partition.frozen_layers();
    layers.extend_from_slice(frozen_layers);
    p.partition = p.partition.with_frozen_layers(&layers);
    p
}

/// θ + Σ t_k·δ̄_k, accumulated in direction order.
pub fn displaced(theta: &[f64], steps: &[(f64, &Direction)]) -> Vec<f64> {
    let mut out = theta.to_vec();
    for (t, d) in steps {
        for (o, v) in out.iter_mut().zip(&d.values) {
            *o += t * v;
        }
    }
    out
}

/// Evaluate, mapping any failure to the +∞ sentinel.
fn eval_point<S: LossSurface + ?Sized>(s: &S, theta: &[f64]) -> (f64, f64) {
    match s.loss_at(theta) {
        Ok((e, f)) if e.is_finite() && f.is_finite() => (e, f),
        _ => (f64::INFINITY, f64::INFINITY),
    }
}

fn run_points<S, F>(s: &S, n: usize, parallel: bool, point: F) -> Vec<(f64, f64)>
where
    S: LossSurface + ?Sized,
    F: Fn(usize) -> Vec<f64> + Sync,
{
    if parallel {
        (0..n)
            .into_par_iter()
            .map(|k| eval_point(s, &point(k)))
            .collect()
    } else {
        (0..n).map(|k| eval_point(s, &point(k))).collect()
    }
}

/// The filter-normalized directions used by [`landscape_1d`].
pub fn landscape_directions(
    p: &ParameterVector,
    n_directions: usize,
    seed: u64,
    frozen_layers: &[usize],
) -> Result<Vec<Direction>> {
    let p = effective_params(p, frozen_layers);
    (0..n_directions)
        .map(|n| filter_normalize(&sample_direction(&p, seed, n), &p))
        .collect()
}

/// Averaged random-direction profile around the surface's parameters.
pub fn landscape_1d<S: LossSurface + ?Sized>(
    s: &S,
    opts: &LandscapeOptions,
) -> Result<LandscapeProfile> {
    check_grid(&opts.t_grid, true)?;
    if opts.n_directions == 0 {
        return Err(Error::invalid("n_directions must be positive"));
    }
    let p = effective_params(s.parameters(), &opts.frozen_layers);
    let dirs = landscape_directions(&p, opts.n_directions, opts.seed, &[])?;
    let theta = &p.values;
    let nt = opts.t_grid.len();
    let origin = opts.t_grid.iter().position(|&t| t == 0.0).expect("checked");

    let tasks: Vec<(usize, usize)> = (0..opts.n_directions)
        .flat_map(|n| (0..nt).map(move |i| (n, i)))
        .filter(|&(_, i)| !(opts.cache_origin && i == origin))
        .collect();
    let values = run_points(s, tasks.len(), opts.parallel, |k| {
        let (n, i) = tasks[k];
        displaced(theta, &[(opts.t_grid[i], &dirs[n])])
    });
    let mut evaluations = tasks.len();
    let origin_value = if opts.cache_origin {
        evaluations += 1;
        Some(eval_point(s, theta))
    } else {
        None
    };

    let mut energy = vec![vec![0.0; nt]; opts.n_directions];
    let mut force = vec![vec![0.0; nt]; opts.n_directions];
    for (&(n, i), &(e, f)) in tasks.iter().zip(&values) {
        energy[n][i] = e;
        force[n][i] = f;
    }
    if let Some((e, f)) = origin_value {
        for n in 0..opts.n_directions {
            energy[n][origin] = e;
            force[n][origin] = f;
        }
    }
    let failed_points = failed(&energy, &force);
    let meta = ProfileMeta {
        kind: "random_directions".into(),
        model_id: s.model_id(),
        dataset_id: s.dataset_id(),
        seed: Some(opts.seed),
        n_directions: opts.n_directions,
        frozen_layers: p.partition.frozen_layers(),
        normalization: "filter".into(),
        evaluations,
        failed_points,
    };
    LandscapeProfile::from_curves(opts.t_grid.clone(), energy, force, meta)
}

fn failed(energy: &[Vec<f64>], force: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (n, (e, f)) in energy.iter().zip(force).enumerate() {
        for i in 0..e.len() {
            if !e[i].is_finite() || !f[i].is_finite() {
                out.push((n, i));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Surface2D {
    pub t1_grid: Vec<f64>,
    pub t2_grid: Vec<f64>,
    /// `energy[i][j]` at (t1_grid[i], t2_grid[j]).
    pub energy: Vec<Vec<f64>>,
    pub force: Vec<Vec<f64>>,
    /// Indices of the two directions in the seed's direction stream.
    pub direction_ids: [usize; 2],
    pub seed: u64,
    pub frozen_layers: Vec<usize>,
    pub model_id: String,
    pub dataset_id: String,
    /// Gram-Schmidt is applied to the raw directions before normalization.
    pub orthogonalization: String,
    pub evaluations: usize,
    pub failed_points: Vec<(usize, usize)>,
}

pub fn landscape_2d<S: LossSurface + ?Sized>(
    s: &S,
    t1_grid: &[f64],
    t2_grid: &[f64],
    seed: u64,
    frozen_layers: &[usize],
    parallel: bool,
) -> Result<Surface2D> {
    check_grid(t1_grid, true)?;
    check_grid(t2_grid, true)?;
    let p = effective_params(s.parameters(), frozen_layers);
    let (d1, d2) = orthogonalize_pair(
        &sample_direction(&p, seed, 0),
        &sample_direction(&p, seed, 1),
        &p,
    )?;
    let n2 = t2_grid.len();
    let n = t1_grid.len() * n2;
    let values = run_points(s, n, parallel, |k| {
        displaced(&p.values, &[(t1_grid[k / n2], &d1), (t2_grid[k % n2], &d2)])
    });
    let energy: Vec<Vec<f64>> = values
        .chunks(n2)
        .map(|r| r.iter().map(|v| v.0).collect())
        .collect();
    let force: Vec<Vec<f64>> = values
        .chunks(n2)
        .map(|r| r.iter().map(|v| v.1).collect())
        .collect();
    Ok(Surface2D {
        t1_grid: t1_grid.to_vec(),
        t2_grid: t2_grid.to_vec(),
        failed_points: failed(&energy, &force),
        energy,
        force,
        direction_ids: [0, 1],
        seed,
        frozen_layers: p.partition.frozen_layers(),
        model_id: s.model_id(),
        dataset_id: s.dataset_id(),
        orthogonalization: "gram_schmidt_before_filter_normalization".into(),
        evaluations: n,
    })
}

/// Loss along θ(t) = (1 − t)·θ_A + t·θ_B, evaluated on surface `s`, whose own
/// parameters play the role of θ_A.
pub fn interpolate_models<S: LossSurface + ?Sized>(
    s: &S,
    theta_b: &ParameterVector,
    t_grid: &[f64],
    parallel: bool,
) -> Result<LandscapeProfile> {
    check_grid(t_grid, false)?;
    let a = s.parameters();
    if !a.partition.same_shape(&theta_b.partition) || a.len() != theta_b.len() {
        return Err(Error::ShapeMismatch(
            "models have different parameter layouts".into(),
        ));
    }
    let values = run_points(s, t_grid.len(), parallel, |i| {
        interpolate(&a.values, &theta_b.values, t_grid[i])
    });
    let energy = vec![values.iter().map(|v| v.0).collect::<Vec<_>>()];
    let force = vec![values.iter().map(|v| v.1).collect::<Vec<_>>()];
    let meta = ProfileMeta {
        kind: "interpolation".into(),
        model_id: s.model_id(),
        dataset_id: s.dataset_id(),
        seed: None,
        n_directions: 1,
        frozen_layers: Vec::new(),
        normalization: "none".into(),
        evaluations: t_grid.len(),
        failed_points: failed(&energy, &force),
    };
    LandscapeProfile::from_curves(t_grid.to_vec(), energy, force, meta)
}

/// (1 − t)·a + t·b coordinate-wise.
pub fn interpolate(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(x, y)| (1.0 - t) * x + t * y)
        .collect()
}

/// w_E·ℓ_E + w_F·ℓ_F pointwise; a zero weight drops its term entirely.
pub fn reweight_surface(s: &Surface2D, w_e: f64, w_f: f64) -> Result<Vec<Vec<f64>>> {
    if !(w_e >= 0.0 && w_f >= 0.0) {
        return Err(Error::invalid("re-weighting needs non-negative weights"));
    }
    let term = |w: f64, v: f64| if w == 0.0 { 0.0 } else { w * v };
    Ok(s.energy
        .iter()
        .zip(&s.force)
        .map(|(re, rf)| {
            re.iter()
                .zip(rf)
                .map(|(&e, &f)| term(w_e, e) + term(w_f, f))
                .collect()
        })
        .collect())
}
