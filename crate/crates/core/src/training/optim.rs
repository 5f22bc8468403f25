//! Adam / AMSGrad, plateau learning-rate decay and weight averaging.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub amsgrad: bool,
    m: Vec<f64>,
    v: Vec<f64>,
    v_max: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(n: usize, amsgrad: bool) -> Self {
        Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            amsgrad,
            m: vec![0.0; n],
            v: vec![0.0; n],
            v_max: if amsgrad { vec![0.0; n] } else { Vec::new() },
            t: 0,
        }
    }

    /// One update; coordinates with `mask[i] == false` are left untouched.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64, mask: Option<&[bool]>) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t);
        let bc2 = 1.0 - self.beta2.powi(self.t);
        for i in 0..params.len() {
            if mask.is_some_and(|m| !m[i]) {
                continue;
            }
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let v = if self.amsgrad {
                self.v_max[i] = self.v_max[i].max(self.v[i]);
                self.v_max[i]
            } else {
                self.v[i]
            };
            let denom = (v / bc2).sqrt() + self.eps;
            params[i] -= lr * (self.m[i] / bc1) / denom;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlateauConfig {
    pub patience: usize,
    pub factor: f64,
}

impl Default for PlateauConfig {
    fn default() -> Self {
        PlateauConfig {
            patience: 50,
            factor: 0.5,
        }
    }
}

/// Multiply the learning rate by `factor` after `patience` consecutive
/// epochs whose loss is not strictly below the best seen so far.
#[derive(Debug, Clone)]
pub struct PlateauScheduler {
    pub config: PlateauConfig,
    best: f64,
    bad_epochs: usize,
}

impl PlateauScheduler {
    pub fn new(config: PlateauConfig) -> Self {
        PlateauScheduler {
            config,
            best: f64::INFINITY,
            bad_epochs: 0,
        }
    }

    /// Feed one epoch's loss; returns true when the rate was reduced.
    pub fn observe(&mut self, loss: f64, lr: &mut f64) -> bool {
        if loss < self.best {
            self.best = loss;
            self.bad_epochs = 0;
            return false;
        }
        self.bad_epochs += 1;
        if self.bad_epochs >= self.config.patience {
            *lr *= self.config.factor;
            self.bad_epochs = 0;
            return true;
        }
        false
    }

    /// Forget the best value, e.g. after the loss definition changed.
    pub fn reset(&mut self) {
        self.best = f64::INFINITY;
        self.bad_epochs = 0;
    }
}

/// Exponential moving average of parameters.
#[derive(Debug, Clone)]
pub struct Ema {
    pub decay: f64,
    pub values: Vec<f64>,
}

impl Ema {
    pub fn new(decay: f64, init: &[f64]) -> Self {
        Ema {
            decay,
            values: init.to_vec(),
        }
    }

    pub fn update(&mut self, params: &[f64]) {
        let d = self.decay;
        for (e, p) in self.values.iter_mut().zip(params) {
            *e = d * *e + (1.0 - d) * p;
        }
    }
}

/// Uniform running average.
#[derive(Debug, Clone, Default)]
pub struct TailAverage {
    pub count: usize,
    pub values: Vec<f64>,
}

impl TailAverage {
    pub fn add(&mut self, params: &[f64]) {
        if self.count == 0 {
            self.values = params.to_vec();
        } else {
            let k = (self.count + 1) as f64;
            for (a, p) in self.values.iter_mut().zip(params) {
                *a += (p - *a) / k;
            }
        }
        self.count += 1;
    }
}

/// Full-batch Adam with plateau decay on an arbitrary smooth objective.
///
/// Returns the final point and the objective values per iteration.
pub fn minimize<F>(
    mut objective: F,
    x0: &[f64],
    lr0: f64,
    amsgrad: bool,
    plateau: PlateauConfig,
    iterations: usize,
) -> (Vec<f64>, Vec<f64>)
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let mut x = x0.to_vec();
    let mut adam = Adam::new(x.len(), amsgrad);
    let mut sched = PlateauScheduler::new(plateau);
    let mut lr = lr0;
    let mut trace = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let (f, g) = objective(&x);
        trace.push(f);
        sched.observe(f, &mut lr);
        adam.step(&mut x, &g, lr, None);
    }
    (x, trace)
}
