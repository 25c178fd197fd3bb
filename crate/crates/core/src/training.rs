//! Full-batch gradient descent with per-epoch metric recording.

use crate::data::{one_hot, Dataset};
use crate::network::{accuracy, backward, forward, objective_mse, Dropout, NetworkParams};
use crate::numerics::seeded_rng;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub dropout_rate: f64,
    /// Metrics are recorded at epoch 0, every `record_every` epochs, and at the last epoch.
    pub record_every: usize,
    /// Seeds the dropout masks.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 10_000,
            learning_rate: 0.5,
            dropout_rate: 0.0,
            record_every: 10,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::param("epochs must be positive"));
        }
        // lr = 0 is accepted: it makes a useful null-update control run
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::param(format!(
                "learning_rate must be non-negative, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::param(format!(
                "dropout_rate must lie in [0, 1), got {}",
                self.dropout_rate
            )));
        }
        if self.record_every == 0 || self.record_every > self.epochs {
            return Err(Error::param(format!(
                "record_every must be in 1..={}, got {}",
                self.epochs, self.record_every
            )));
        }
        Ok(())
    }
}

/// Metrics after `epoch` parameter updates (epoch 0 is the initialization).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRecord {
    pub epoch: usize,
    pub objective: f64,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
}

fn check_compatible(params: &NetworkParams, ds: &Dataset) -> Result<()> {
    if ds.dim() != params.input_dim() || ds.class_count != params.output_dim() {
        return Err(Error::Shape {
            op: "dataset vs network",
            lhs: (params.input_dim(), params.output_dim()),
            rhs: (ds.dim(), ds.class_count),
        });
    }
    Ok(())
}

/// Objective and accuracy on `ds`, dropout disabled.
pub fn evaluate(params: &NetworkParams, ds: &Dataset) -> Result<(f64, f64)> {
    check_compatible(params, ds)?;
    let cache = forward(params, &ds.features, Dropout::Off)?;
    let objective = objective_mse(cache.output(), &one_hot(ds))?;
    let acc = accuracy(cache.output(), &ds.labels)?;
    Ok((objective, acc))
}

fn record(params: &NetworkParams, train: &Dataset, test: &Dataset, epoch: usize) -> Result<MetricsRecord> {
    let (objective, train_accuracy) = evaluate(params, train)?;
    let (_, test_accuracy) = evaluate(params, test)?;
    if !objective.is_finite() {
        return Err(Error::Diverged { epoch });
    }
    Ok(MetricsRecord {
        epoch,
        objective,
        train_accuracy,
        test_accuracy,
    })
}

/// Trains `params` with `W ← W − lr·∇W`, `b ← b − lr·∇b` once per epoch on the full training set.
///
/// Any non-finite value during epoch `t` aborts with [`Error::Diverged`].
pub fn train(
    mut params: NetworkParams,
    train_set: &Dataset,
    test_set: &Dataset,
    cfg: &TrainConfig,
) -> Result<(NetworkParams, Vec<MetricsRecord>)> {
    cfg.validate()?;
    check_compatible(&params, train_set)?;
    check_compatible(&params, test_set)?;

    let targets = one_hot(train_set);
    let mut rng = seeded_rng(cfg.seed);
    let mut records = vec![record(&params, train_set, test_set, 0)?];

    for epoch in 1..=cfg.epochs {
        let diverged = |e: Error| if e.is_numeric() { Error::Diverged { epoch } } else { e };
        let dropout = if cfg.dropout_rate > 0.0 {
            Dropout::Sample {
                rate: cfg.dropout_rate,
                rng: &mut rng,
            }
        } else {
            Dropout::Off
        };
        let cache = forward(&params, &train_set.features, dropout).map_err(diverged)?;
        let grads = backward(&params, &cache, &targets).map_err(diverged)?;
        params.apply_gradients(&grads, cfg.learning_rate).map_err(diverged)?;

        if epoch % cfg.record_every == 0 || epoch == cfg.epochs {
            records.push(record(&params, train_set, test_set, epoch).map_err(diverged)?);
        }
    }
    Ok((params, records))
}
