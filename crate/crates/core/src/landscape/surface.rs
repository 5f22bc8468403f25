use std::sync::atomic::{AtomicUsize, Ordering};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::potential::{loss_eval, LossWeights, NeuralPotential, ParameterVector};

/// A loss (ℓ_E, ℓ_F) defined over the parameter space of `parameters()`.
pub trait LossSurface: Sync {
    fn parameters(&self) -> &ParameterVector;
    fn loss_at(&self, theta: &[f64]) -> Result<(f64, f64)>;

    fn model_id(&self) -> String {
        String::new()
    }
    fn dataset_id(&self) -> String {
        String::new()
    }
}

/// RMSE energy/force losses of a neural potential on a dataset.
pub struct ModelLoss<'a> {
    pub model: &'a NeuralPotential,
    pub data: &'a Dataset,
}

impl<'a> ModelLoss<'a> {
    pub fn new(model: &'a NeuralPotential, data: &'a Dataset) -> Self {
        ModelLoss { model, data }
    }
}

impl LossSurface for ModelLoss<'_> {
    fn parameters(&self) -> &ParameterVector {
        self.model.params()
    }

    fn loss_at(&self, theta: &[f64]) -> Result<(f64, f64)> {
        let m = self.model.with_values(theta.to_vec())?;
        let r = loss_eval(&m, self.data, LossWeights::default())?;
        Ok((r.loss_e, r.loss_f))
    }

    fn model_id(&self) -> String {
        self.model.fingerprint()
    }

    fn dataset_id(&self) -> String {
        self.data.name().to_string()
    }
}

/// ℓ_E = Σ a_E,i (θ_i − c_i)², ℓ_F = Σ a_F,i (θ_i − c_i)², minimum at c = θ.
///
/// A closed-form stand-in for a trained model, handy for checking landscape
/// machinery.
pub struct QuadraticSurface {
    pub params: ParameterVector,
    pub center: Vec<f64>,
    pub a_energy: Vec<f64>,
    pub a_force: Vec<f64>,
}

impl QuadraticSurface {
    pub fn new(params: ParameterVector, a_energy: Vec<f64>, a_force: Vec<f64>) -> Result<Self> {
        if a_energy.len() != params.len() || a_force.len() != params.len() {
            return Err(Error::ShapeMismatch(
                "curvatures must match parameter count".into(),
            ));
        }
        Ok(QuadraticSurface {
            center: params.values.clone(),
            params,
            a_energy,
            a_force,
        })
    }
}

impl LossSurface for QuadraticSurface {
    fn parameters(&self) -> &ParameterVector {
        &self.params
    }

    fn loss_at(&self, theta: &[f64]) -> Result<(f64, f64)> {
        let mut e = 0.0;
        let mut f = 0.0;
        for i in 0..theta.len() {
            let d = theta[i] - self.center[i];
            e += self.a_energy[i] * d * d;
            f += self.a_force[i] * d * d;
        }
        Ok((e, f))
    }

    fn model_id(&self) -> String {
        "quadratic".into()
    }
}

/// Wraps a surface and counts how often it is evaluated.
pub struct CountingSurface<S> {
    pub inner: S,
    count: AtomicUsize,
}

impl<S> CountingSurface<S> {
    pub fn new(inner: S) -> Self {
        CountingSurface {
            inner,
            count: AtomicUsize::new(0),
        }
    }

    pub fn count(&self) -> usize {
        self.count.load(Ordering::SeqCst)
    }
}

impl<S: LossSurface> LossSurface for CountingSurface<S> {
    fn parameters(&self) -> &ParameterVector {
        self.inner.parameters()
    }

    fn loss_at(&self, theta: &[f64]) -> Result<(f64, f64)> {
        self.count.fetch_add(1, Ordering::SeqCst);
        self.inner.loss_at(theta)
    }

    fn model_id(&self) -> String {
        self.inner.model_id()
    }

    fn dataset_id(&self) -> String {
        self.inner.dataset_id()
    }
}
