//! Atom-centred neural potential: radial descriptors → shared MLP → per-atom
//! energy, summed and optionally rescaled.

use std::path::Path;

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::descriptor::{environment, DescriptorSpec};
use super::network::{Activation, Mlp};
use super::params::{FilterPartition, ParameterVector, PartitionBuilder};
use super::scalar::{Dual, Scalar};
use super::ForceModel;
use crate::dataset::{mean_std, Configuration, Dataset};
use crate::error::{Error, Result};
use crate::geometry::{neighbor_list, NeighborPair, Vec3};
use crate::rng::{self, streams};
use crate::units::EV_TO_MEV;

/// Layer index of the descriptor basis blocks (centers, log-widths).
pub const BASIS_LAYER: usize = 0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub descriptor: DescriptorSpec,
    pub hidden: Vec<usize>,
    #[serde(default)]
    pub activation: Activation,
}

impl Default for Architecture {
    fn default() -> Self {
        Architecture {
            descriptor: DescriptorSpec::uniform(8, 5.0),
            hidden: vec![16, 16],
            activation: Activation::ShiftedSoftplus,
        }
    }
}

impl Architecture {
    fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.descriptor.n_radial];
        w.extend(&self.hidden);
        w.push(1);
        w
    }

    fn layout(&self) -> (FilterPartition, Mlp) {
        let mut b = PartitionBuilder::default();
        if self.descriptor.trainable_basis {
            for k in 0..self.descriptor.n_radial {
                b.push(BASIS_LAYER, k, 2);
            }
        }
        let mlp = Mlp::layout(&self.widths(), BASIS_LAYER + 1, &mut b);
        (b.finish(), mlp)
    }
}

/// E = scale·Σ net + shift·N when enabled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rescale {
    /// eV
    pub scale: f64,
    /// eV/atom
    pub shift: f64,
    pub enabled: bool,
}

impl Rescale {
    pub fn disabled() -> Self {
        Rescale {
            scale: 1.0,
            shift: 0.0,
            enabled: false,
        }
    }

    fn effective(&self) -> (f64, f64) {
        if self.enabled {
            (self.scale, self.shift)
        } else {
            (1.0, 0.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeuralPotential {
    architecture: Architecture,
    params: ParameterVector,
    rescale: Rescale,
    #[serde(skip, default = "empty_mlp")]
    mlp: Mlp,
}

fn empty_mlp() -> Mlp {
    Mlp {
        widths: Vec::new(),
        offset: 0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NnOutput {
    pub energy: f64,
    pub forces: Vec<Vec3>,
    pub per_atom_energies: Vec<f64>,
}

/// Loss weights of the training objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    #[serde(rename = "w_E")]
    pub energy: f64,
    #[serde(rename = "w_F")]
    pub force: f64,
}

impl LossWeights {
    pub fn new(energy: f64, force: f64) -> Self {
        LossWeights { energy, force }
    }
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights::new(1.0, 1000.0)
    }
}

/// Errors in meV units. `combined` = w_E·MSE_E + w_F·MSE_F.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    /// Per-atom energy RMSE, meV/atom.
    pub loss_e: f64,
    /// Force-component RMSE, meV/Å.
    pub loss_f: f64,
    pub mse_e: f64,
    pub mse_f: f64,
    pub combined: f64,
}

impl LossReport {
    fn from_mse(mse_e: f64, mse_f: f64, w: LossWeights) -> Self {
        LossReport {
            loss_e: mse_e.sqrt(),
            loss_f: mse_f.sqrt(),
            mse_e,
            mse_f,
            combined: w.energy * mse_e + w.force * mse_f,
        }
    }
}

struct Pass<T> {
    per_atom: Vec<T>,
    /// ∂E/∂x per atom; empty unless requested.
    grad_x: Vec<[T; 3]>,
    /// ∂E/∂θ; empty unless requested.
    grad_theta: Vec<T>,
}

impl NeuralPotential {
    /// Fresh model: LeCun-normal weights, zero biases, basis from the descriptor settings.
    pub fn new(architecture: Architecture, seed: u64) -> Result<Self> {
        architecture.descriptor.validate()?;
        if architecture.hidden.contains(&0) {
            return Err(Error::invalid("hidden layer widths must be positive"));
        }
        let (partition, mlp) = architecture.layout();
        let mut values = vec![0.0; partition.total_len()];
        let d = &architecture.descriptor;
        if d.trainable_basis {
            for k in 0..d.n_radial {
                values[2 * k] = d.centers[k];
                values[2 * k + 1] = d.widths[k].ln();
            }
        }
        let mut rng = rng::substream(seed, streams::INIT, 0);
        let widths = architecture.widths();
        for (l, w) in widths.windows(2).enumerate() {
            let base = mlp.layer_offset(l);
            let normal = Normal::new(0.0, 1.0 / (w[0] as f64).sqrt()).expect("positive std");
            for j in 0..w[1] {
                for i in 0..w[0] {
                    values[base + j * (w[0] + 1) + i] = normal.sample(&mut rng);
                }
            }
        }
        let params = ParameterVector::new(values, partition)?;
        Ok(NeuralPotential {
            architecture,
            params,
            rescale: Rescale::disabled(),
            mlp,
        })
    }

    pub fn architecture(&self) -> &Architecture {
        &self.architecture
    }

    pub fn params(&self) -> &ParameterVector {
        &self.params
    }

    pub fn partition(&self) -> &FilterPartition {
        &self.params.partition
    }

    pub fn rescale(&self) -> Rescale {
        self.rescale
    }

    pub fn with_rescale(mut self, rescale: Rescale) -> Self {
        self.rescale = rescale;
        self
    }

    /// Copy with new parameter values (same partition, frozen flags kept).
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.params.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {} parameters",
                values.len(),
                self.params.len()
            )));
        }
        let mut m = self.clone();
        m.params = ParameterVector::new(values, self.params.partition.clone())?;
        Ok(m)
    }

    /// Mark the blocks of the given layers frozen.
    pub fn with_frozen_layers(mut self, layers: &[usize]) -> Self {
        self.params.partition = self.params.partition.with_frozen_layers(layers);
        self
    }

    /// Short content hash of architecture, parameters and rescale constants.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&self.architecture).unwrap_or_default());
        for v in &self.params.values {
            h.update(v.to_le_bytes());
        }
        h.update(self.rescale.scale.to_le_bytes());
        h.update(self.rescale.shift.to_le_bytes());
        h.update([u8::from(self.rescale.enabled)]);
        hex::encode(&h.finalize()[..8])
    }

    fn basis(&self) -> (Vec<f64>, Vec<f64>) {
        let d = &self.architecture.descriptor;
        if d.trainable_basis {
            let v = &self.params.values;
            let centers = (0..d.n_radial).map(|k| v[2 * k]).collect();
            let widths = (0..d.n_radial).map(|k| v[2 * k + 1].exp()).collect();
            (centers, widths)
        } else {
            (d.centers.clone(), d.widths.clone())
        }
    }

    fn pairs(&self, c: &Configuration) -> Result<Vec<NeighborPair>> {
        neighbor_list(
            &c.positions,
            c.cell.as_ref(),
            self.architecture.descriptor.cutoff,
        )
    }

    fn pass<T: Scalar>(
        &self,
        positions: &[[T; 3]],
        pairs: &[NeighborPair],
        want_x: bool,
        want_theta: bool,
    ) -> Pass<T> {
        let (centers, widths) = self.basis();
        let trainable = self.architecture.descriptor.trainable_basis;
        let env = environment(
            &centers,
            &widths,
            self.architecture.descriptor.cutoff,
            positions,
            pairs,
            want_theta && trainable,
            want_x,
        );
        let (scale, shift) = self.rescale.effective();
        let n = env.n_radial;
        let na = positions.len();
        let mut grad_theta = if want_theta {
            vec![T::zero(); self.params.len()]
        } else {
            Vec::new()
        };
        let mut per_atom = Vec::with_capacity(na);
        let mut de_dg = vec![T::zero(); na * n];
        for i in 0..na {
            let g = if want_theta {
                Some((grad_theta.as_mut_slice(), scale))
            } else {
                None
            };
            let (out, dg) = self.mlp.forward_backward(
                &self.params.values,
                self.architecture.activation,
                env.atom(i),
                g,
            );
            per_atom.push(out * scale + T::cst(shift));
            for k in 0..n {
                de_dg[i * n + k] = dg[k] * scale;
            }
        }
        if want_theta && trainable {
            for i in 0..na {
                for k in 0..n {
                    let s = de_dg[i * n + k];
                    grad_theta[2 * k] += s * env.dg_dcenter[i * n + k];
                    grad_theta[2 * k + 1] += s * env.dg_dlogwidth[i * n + k];
                }
            }
        }
        let mut grad_x = Vec::new();
        if want_x {
            grad_x = vec![[T::zero(); 3]; na];
            for (p, pair) in pairs.iter().enumerate() {
                let mut s = T::zero();
                for k in 0..n {
                    s += de_dg[pair.i * n + k] * env.pair_dg_dr[p * n + k];
                }
                let u = env.pair_unit[p];
                for ax in 0..3 {
                    let f = s * u[ax];
                    grad_x[pair.j][ax] += f;
                    grad_x[pair.i][ax] -= f;
                }
            }
        }
        Pass {
            per_atom,
            grad_x,
            grad_theta,
        }
    }

    fn eval_with_pairs(&self, c: &Configuration, pairs: &[NeighborPair]) -> Result<NnOutput> {
        let pass = self.pass::<f64>(&c.positions, pairs, true, false);
        if let Some(a) = pass.per_atom.iter().position(|e| !e.is_finite()) {
            return Err(Error::Numeric {
                context: "per-atom energy",
                atom: Some(a),
            });
        }
        let forces: Vec<Vec3> = pass.grad_x.iter().map(|g| g.map(|v| -v)).collect();
        if let Some(a) = forces.iter().position(|f| f.iter().any(|v| !v.is_finite())) {
            return Err(Error::Numeric {
                context: "force",
                atom: Some(a),
            });
        }
        Ok(NnOutput {
            energy: pass.per_atom.iter().sum(),
            forces,
            per_atom_energies: pass.per_atom,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: 1,
            model: self.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(text)?;
        if ck.format != CHECKPOINT_FORMAT || ck.version != 1 {
            return Err(Error::invalid(format!(
                "unsupported checkpoint {} v{}",
                ck.format, ck.version
            )));
        }
        let mut m = ck.model;
        m.architecture.descriptor.validate()?;
        let (partition, mlp) = m.architecture.layout();
        if !partition.same_shape(&m.params.partition) {
            return Err(Error::ShapeMismatch(
                "checkpoint partition does not match its architecture".into(),
            ));
        }
        m.params = ParameterVector::new(m.params.values, m.params.partition)?;
        m.mlp = mlp;
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::file(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        NeuralPotential::from_json(&text)
    }
}

const CHECKPOINT_FORMAT: &str = "nnip-landscape-model";

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format: String,
    version: u32,
    model: NeuralPotential,
}

impl ForceModel for NeuralPotential {
    fn energy_forces(&self, c: &Configuration) -> Result<(f64, Vec<Vec3>)> {
        let out = nn_eval(self, c)?;
        Ok((out.energy, out.forces))
    }
}

pub fn nn_eval(m: &NeuralPotential, c: &Configuration) -> Result<NnOutput> {
    let pairs = m.pairs(c)?;
    m.eval_with_pairs(c, &pairs)
}

fn labels(c: &Configuration, index: usize) -> Result<(f64, &[Vec3])> {
    match (c.energy, c.forces.as_deref()) {
        (Some(e), Some(f)) => Ok((e, f)),
        _ => Err(Error::MissingLabels(format!(
            "configuration {index} lacks energy or forces"
        ))),
    }
}

/// Per-configuration squared errors: (e_c² in (meV/atom)², Σ ΔF² in (meV/Å)²).
fn squared_errors(m: &NeuralPotential, c: &Configuration, index: usize) -> Result<(f64, f64)> {
    let (e_ref, f_ref) = labels(c, index)?;
    let out = nn_eval(m, c)?;
    let e = (out.energy - e_ref) * EV_TO_MEV / c.len() as f64;
    let f: f64 = out
        .forces
        .iter()
        .zip(f_ref)
        .flat_map(|(a, b)| (0..3).map(move |k| ((a[k] - b[k]) * EV_TO_MEV).powi(2)))
        .sum();
    Ok((e * e, f))
}

pub fn loss_eval(m: &NeuralPotential, d: &Dataset, w: LossWeights) -> Result<LossReport> {
    let per: Vec<(f64, f64)> = d
        .configurations()
        .par_iter()
        .enumerate()
        .map(|(i, c)| squared_errors(m, c, i))
        .collect::<Result<_>>()?;
    let n_comp = 3 * d.total_atoms();
    let (se, sf) = per.iter().fold((0.0, 0.0), |(a, b), (e, f)| (a + e, b + f));
    Ok(LossReport::from_mse(
        se / d.len() as f64,
        sf / n_comp as f64,
        w,
    ))
}

/// Loss and its gradient with respect to all parameters.
///
/// The force term needs ∂F/∂θ, a mixed second derivative. It is obtained as
/// a directional derivative: the energy gradient ∂E/∂θ is evaluated on dual
/// positions x + ε·r, where r is the force residual, so the ε-part is
/// Σ_a r_a·∂²E/∂x_a∂θ.
pub fn loss_and_gradient(
    m: &NeuralPotential,
    d: &Dataset,
    w: LossWeights,
) -> Result<(LossReport, Vec<f64>)> {
    let confs: Vec<&Configuration> = d.configurations().iter().collect();
    batch_loss_and_gradient(m, &confs, w)
}

/// [`loss_and_gradient`] over an arbitrary batch of configurations.
pub(crate) fn batch_loss_and_gradient(
    m: &NeuralPotential,
    confs: &[&Configuration],
    w: LossWeights,
) -> Result<(LossReport, Vec<f64>)> {
    if confs.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    let n_conf = confs.len() as f64;
    let n_comp = (3 * confs.iter().map(|c| c.len()).sum::<usize>()) as f64;
    let per: Vec<(f64, f64, Vec<f64>)> = confs
        .par_iter()
        .enumerate()
        .map(|(idx, &c)| {
            let (e_ref, f_ref) = labels(c, idx)?;
            let pairs = m.pairs(c)?;
            let out = m.eval_with_pairs(c, &pairs)?;
            let na = c.len() as f64;
            let e_err = (out.energy - e_ref) * EV_TO_MEV / na;
            let resid: Vec<Vec3> = out
                .forces
                .iter()
                .zip(f_ref)
                .map(|(a, b)| [a[0] - b[0], a[1] - b[1], a[2] - b[2]])
                .collect();
            let f_sq: f64 = resid
                .iter()
                .flatten()
                .map(|r| (r * EV_TO_MEV).powi(2))
                .sum();
            let pos: Vec<[Dual; 3]> = c
                .positions
                .iter()
                .zip(&resid)
                .map(|(x, r)| [0, 1, 2].map(|k| Dual::new(x[k], r[k])))
                .collect();
            let pass = m.pass::<Dual>(&pos, &pairs, false, true);
            let ce = w.energy * 2.0 * e_err * EV_TO_MEV / (n_conf * na);
            let cf = -w.force * 2.0 * EV_TO_MEV * EV_TO_MEV / n_comp;
            let grad: Vec<f64> = pass
                .grad_theta
                .iter()
                .map(|g| ce * g.v + cf * g.d)
                .collect();
            Ok((e_err * e_err, f_sq, grad))
        })
        .collect::<Result<_>>()?;
    let mut grad = vec![0.0; m.params.len()];
    let (mut se, mut sf) = (0.0, 0.0);
    for (e, f, g) in &per {
        se += e;
        sf += f;
        for (a, b) in grad.iter_mut().zip(g) {
            *a += b;
        }
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Numeric {
            context: "loss gradient",
            atom: None,
        });
    }
    Ok((LossReport::from_mse(se / n_conf, sf / n_comp, w), grad))
}

/// Set shift to the mean per-atom energy and scale to the force-component std.
pub fn fit_rescale(m: &NeuralPotential, d: &Dataset) -> Result<NeuralPotential> {
    if d.len() < 2 {
        return Err(Error::invalid("fit_rescale needs at least two frames"));
    }
    for (i, c) in d.configurations().iter().enumerate() {
        labels(c, i)?;
    }
    let (shift, _) = mean_std(
        d.configurations()
            .iter()
            .filter_map(|c| c.energy_per_atom()),
    )
    .expect("nonempty dataset");
    let (_, scale) = mean_std(
        d.configurations()
            .iter()
            .flat_map(|c| c.forces.iter().flatten().flatten().copied()),
    )
    .expect("nonempty dataset");
    let scale = if scale > 0.0 { scale } else { 1.0 };
    Ok(m.clone().with_rescale(Rescale {
        scale,
        shift,
        enabled: true,
    }))
}
