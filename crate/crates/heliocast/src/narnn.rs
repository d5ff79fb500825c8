//! Stage 1: nonlinear autoregressive neural network.
//!
//! A single hidden tanh layer with linear output, trained on sliding
//! windows of the stationary series by damped least-squares
//! (Levenberg-Marquardt style) with a gradient-descent fallback. The
//! trained network rolls forward closed-loop to produce the day-ahead
//! fitting series that Stage 2 consumes as exogenous input.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Training hyperparameters. `d` is the lag count: how many previous
/// hourly samples feed each prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NarnnConfig {
    pub d: usize,
    pub hidden_units: usize,
    pub max_epochs: usize,
    /// Stop once training MSE falls below this.
    pub target_loss: f64,
    pub seed: u64,
}

impl Default for NarnnConfig {
    fn default() -> Self {
        NarnnConfig {
            d: 12,
            hidden_units: 10,
            max_epochs: 200,
            target_loss: 1e-5,
            seed: 0,
        }
    }
}

impl NarnnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d < 1 {
            return Err(Error::InvalidConfig("narnn: d must be >= 1".into()));
        }
        if self.hidden_units < 1 {
            return Err(Error::InvalidConfig("narnn: hidden_units must be >= 1".into()));
        }
        if self.max_epochs < 1 {
            return Err(Error::InvalidConfig("narnn: max_epochs must be >= 1".into()));
        }
        if !(self.target_loss > 0.0) {
            return Err(Error::InvalidConfig("narnn: target_loss must be > 0".into()));
        }
        Ok(())
    }
}

/// Trained network. Prediction is deterministic given the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NarnnModel {
    pub config: NarnnConfig,
    /// hidden x d.
    pub input_weights: Vec<Vec<f64>>,
    pub input_bias: Vec<f64>,
    pub output_weights: Vec<f64>,
    pub output_bias: f64,
    /// Coefficient of determination on the training targets.
    pub training_r2: f64,
}

impl NarnnModel {
    /// Flat parameter vector: input weights row-major, input bias,
    /// output weights, output bias.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(param_count(self.config.d, self.config.hidden_units));
        for row in &self.input_weights {
            p.extend_from_slice(row);
        }
        p.extend_from_slice(&self.input_bias);
        p.extend_from_slice(&self.output_weights);
        p.push(self.output_bias);
        p
    }

    /// Rebuild a model from a flat parameter vector (inverse of
    /// [`NarnnModel::params`]). `training_r2` is left at zero.
    pub fn from_params(config: NarnnConfig, params: &[f64]) -> Result<Self> {
        config.validate()?;
        let (d, hidden) = (config.d, config.hidden_units);
        if params.len() != param_count(d, hidden) {
            return Err(Error::Shape(format!(
                "expected {} parameters, got {}",
                param_count(d, hidden),
                params.len()
            )));
        }
        let mut input_weights = Vec::with_capacity(hidden);
        for j in 0..hidden {
            input_weights.push(params[j * d..(j + 1) * d].to_vec());
        }
        let base = hidden * d;
        Ok(NarnnModel {
            config,
            input_weights,
            input_bias: params[base..base + hidden].to_vec(),
            output_weights: params[base + hidden..base + 2 * hidden].to_vec(),
            output_bias: params[base + 2 * hidden],
            training_r2: 0.0,
        })
    }

    /// One forward pass on a window of `d` lagged values, oldest first.
    pub fn predict_one(&self, window: &[f64]) -> f64 {
        debug_assert_eq!(window.len(), self.config.d);
        let mut out = self.output_bias;
        for j in 0..self.config.hidden_units {
            let mut a = self.input_bias[j];
            for (w, x) in self.input_weights[j].iter().zip(window) {
                a += w * x;
            }
            out += self.output_weights[j] * a.tanh();
        }
        out
    }

    /// Closed-loop multi-step rollout: each prediction joins the lag
    /// window for the next. Outputs are clamped into [0, 1].
    pub fn predict_fitting_series(&self, recent_history: &[f64], horizon: usize) -> Result<Vec<f64>> {
        let d = self.config.d;
        if recent_history.len() < d {
            return Err(Error::TooShort {
                stage: "narnn predict",
                len: recent_history.len(),
                min: d,
            });
        }
        let mut window: Vec<f64> = recent_history[recent_history.len() - d..].to_vec();
        let mut out = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            let y = self.predict_one(&window).clamp(0.0, 1.0);
            out.push(y);
            window.rotate_left(1);
            *window.last_mut().unwrap() = y;
        }
        Ok(out)
    }

    /// One-step-ahead predictions over a historical series: output `i`
    /// predicts `history[d + i]` from the observed window before it.
    /// Clamped into [0, 1] like the closed-loop rollout.
    pub fn one_step_series(&self, history: &[f64]) -> Result<Vec<f64>> {
        let d = self.config.d;
        if history.len() <= d {
            return Err(Error::TooShort {
                stage: "narnn one-step",
                len: history.len(),
                min: d + 1,
            });
        }
        Ok((d..history.len())
            .map(|t| self.predict_one(&history[t - d..t]).clamp(0.0, 1.0))
            .collect())
    }
}

fn param_count(d: usize, hidden: usize) -> usize {
    hidden * (d + 2) + 1
}

/// Coefficient of determination:
/// 1 - sum((actual - pred)^2) / sum((actual - mean(actual))^2).
/// Negative for forecasts worse than the mean.
pub fn r_squared(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    if actual.is_empty() || actual.len() != predicted.len() {
        return Err(Error::Shape(format!(
            "r_squared needs equal nonzero lengths, got {} and {}",
            actual.len(),
            predicted.len()
        )));
    }
    let mean = actual.iter().sum::<f64>() / actual.len() as f64;
    let ss_tot: f64 = actual.iter().map(|&a| (a - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::ZeroVarianceTarget);
    }
    let ss_res: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(&a, &p)| (a - p).powi(2))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Supervised windows (d lags -> next value) from a series.
fn build_windows(history: &[f64], d: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for t in d..history.len() {
        xs.push(history[t - d..t].to_vec());
        ys.push(history[t]);
    }
    (xs, ys)
}

/// Mean squared one-step training error of `model` on `history`.
pub fn training_loss(model: &NarnnModel, history: &[f64]) -> Result<f64> {
    let (xs, ys) = build_windows(history, model.config.d);
    if xs.is_empty() {
        return Err(Error::TooShort {
            stage: "narnn loss",
            len: history.len(),
            min: model.config.d + 1,
        });
    }
    let sum: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, &y)| (model.predict_one(x) - y).powi(2))
        .sum();
    Ok(sum / xs.len() as f64)
}

/// Analytic gradient of [`training_loss`] with respect to the flat
/// parameter vector.
pub fn training_loss_gradient(model: &NarnnModel, history: &[f64]) -> Result<Vec<f64>> {
    let (xs, ys) = build_windows(history, model.config.d);
    if xs.is_empty() {
        return Err(Error::TooShort {
            stage: "narnn loss",
            len: history.len(),
            min: model.config.d + 1,
        });
    }
    let params = model.params();
    let mut grad = vec![0.0; params.len()];
    let n = xs.len() as f64;
    for (x, &y) in xs.iter().zip(&ys) {
        let (out, jac_row) = forward_with_jacobian(model, x);
        let r = out - y;
        for (g, j) in grad.iter_mut().zip(&jac_row) {
            *g += 2.0 * r * j / n;
        }
    }
    Ok(grad)
}

/// Forward pass plus the derivative of the output with respect to each
/// parameter, in flat layout order.
fn forward_with_jacobian(model: &NarnnModel, x: &[f64]) -> (f64, Vec<f64>) {
    let d = model.config.d;
    let hidden = model.config.hidden_units;
    let mut jac = vec![0.0; param_count(d, hidden)];
    let mut out = model.output_bias;
    let base = hidden * d;
    for j in 0..hidden {
        let mut a = model.input_bias[j];
        for (w, xi) in model.input_weights[j].iter().zip(x) {
            a += w * xi;
        }
        let h = a.tanh();
        let dh = 1.0 - h * h;
        out += model.output_weights[j] * h;
        let wj = model.output_weights[j];
        for (k, &xi) in x.iter().enumerate() {
            jac[j * d + k] = wj * dh * xi;
        }
        jac[base + j] = wj * dh; // input bias
        jac[base + hidden + j] = h; // output weight
    }
    jac[base + 2 * hidden] = 1.0; // output bias
    (out, jac)
}

/// Train on the stationary normalized series.
///
/// Weight init is seeded uniform in [-0.5, 0.5]; the last 10% of windows
/// are held out for early stopping. Accepted damped-least-squares steps
/// strictly decrease the training loss.
pub fn train_narnn(history: &[f64], config: &NarnnConfig) -> Result<NarnnModel> {
    config.validate()?;
    let d = config.d;
    if history.len() <= d + 10 {
        return Err(Error::TooShort {
            stage: "narnn train",
            len: history.len(),
            min: d + 11,
        });
    }
    let (xs, ys) = build_windows(history, d);
    let first = ys[0];
    if ys.iter().all(|&y| y == first) {
        return Err(Error::ZeroVarianceTarget);
    }

    let holdout = if xs.len() >= 30 { xs.len() / 10 } else { 0 };
    let split = xs.len() - holdout;
    let (train_x, val_x) = xs.split_at(split);
    let (train_y, val_y) = ys.split_at(split);

    let hidden = config.hidden_units;
    let n_params = param_count(d, hidden);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let params: Vec<f64> = (0..n_params).map(|_| rng.random_range(-0.5..0.5)).collect();
    let mut model = NarnnModel::from_params(*config, &params)?;

    let loss_of = |m: &NarnnModel, xs: &[Vec<f64>], ys: &[f64]| -> f64 {
        xs.iter()
            .zip(ys)
            .map(|(x, &y)| (m.predict_one(x) - y).powi(2))
            .sum::<f64>()
            / xs.len() as f64
    };

    let mut loss = loss_of(&model, train_x, train_y);
    let mut lambda = 1e-2;
    let mut best_val = if holdout > 0 { loss_of(&model, val_x, val_y) } else { f64::INFINITY };
    let mut best_model = model.clone();
    let mut stale_epochs = 0usize;
    const PATIENCE: usize = 20;

    for epoch in 0..config.max_epochs {
        if !loss.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
        if loss <= config.target_loss {
            break;
        }

        // Jacobian of residuals on the training split.
        let n = train_x.len();
        let mut jac = DMatrix::zeros(n, n_params);
        let mut residuals = DVector::zeros(n);
        for (i, (x, &y)) in train_x.iter().zip(train_y).enumerate() {
            let (out, row) = forward_with_jacobian(&model, x);
            residuals[i] = out - y;
            for (jcol, &v) in row.iter().enumerate() {
                jac[(i, jcol)] = v;
            }
        }
        let jt = jac.transpose();
        let gradient = &jt * &residuals;
        let hessian = &jt * &jac;

        let mut accepted = false;
        for _ in 0..8 {
            let mut damped = hessian.clone();
            for j in 0..n_params {
                damped[(j, j)] += lambda;
            }
            if let Some(chol) = damped.cholesky() {
                let step = chol.solve(&gradient);
                let mut trial = model.params();
                for (t, s) in trial.iter_mut().zip(step.iter()) {
                    *t -= s;
                }
                let trial_model = NarnnModel::from_params(*config, &trial)?;
                let trial_loss = loss_of(&trial_model, train_x, train_y);
                if trial_loss.is_finite() && trial_loss < loss {
                    model = trial_model;
                    loss = trial_loss;
                    lambda = (lambda / 10.0).max(1e-12);
                    accepted = true;
                    break;
                }
            }
            lambda *= 10.0;
        }

        if !accepted {
            // first-order fallback for ill-conditioned steps
            let gnorm = gradient.amax();
            if gnorm > 0.0 {
                let mut eta = 0.1 / gnorm;
                for _ in 0..20 {
                    let mut trial = model.params();
                    for (t, g) in trial.iter_mut().zip(gradient.iter()) {
                        *t -= eta * 2.0 / n as f64 * g;
                    }
                    let trial_model = NarnnModel::from_params(*config, &trial)?;
                    let trial_loss = loss_of(&trial_model, train_x, train_y);
                    if trial_loss.is_finite() && trial_loss < loss {
                        model = trial_model;
                        loss = trial_loss;
                        accepted = true;
                        break;
                    }
                    eta *= 0.5;
                }
            }
        }
        if !accepted {
            break; // no descent direction left
        }

        if holdout > 0 {
            let val = loss_of(&model, val_x, val_y);
            if val < best_val {
                best_val = val;
                best_model = model.clone();
                stale_epochs = 0;
            } else {
                stale_epochs += 1;
                if stale_epochs >= PATIENCE {
                    model = best_model.clone();
                    break;
                }
            }
        }
    }

    if holdout > 0 && loss_of(&best_model, val_x, val_y) < loss_of(&model, val_x, val_y) {
        model = best_model;
    }

    let predictions: Vec<f64> = xs.iter().map(|x| model.predict_one(x)).collect();
    model.training_r2 = r_squared(&ys, &predictions)?;
    Ok(model)
}

impl NarnnModel {
    pub fn to_toml(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Versioned<'a> {
            schema_version: u32,
            #[serde(flatten)]
            model: &'a NarnnModel,
        }
        toml::to_string(&Versioned {
            schema_version: crate::preprocess::ARTIFACT_SCHEMA_VERSION,
            model: self,
        })
        .map_err(|e| Error::Config(format!("model serialization: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Versioned {
            schema_version: u32,
            #[serde(flatten)]
            model: NarnnModel,
        }
        let v: Versioned = toml::from_str(text).map_err(|e| Error::Config(format!("model parse: {e}")))?;
        if v.schema_version != crate::preprocess::ARTIFACT_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported model schema version {}",
                v.schema_version
            )));
        }
        Ok(v.model)
    }
}
