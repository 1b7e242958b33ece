//! Cross-validated comparison of boosting methods on the synthetic
//! `sin(x1 x2 x3)` task, scored by test 0-1 loss with paired t-tests against
//! a reference method.

use rayon::prelude::*;
use serde::Serialize;

use crate::boosting::{self, Mode, TrainConfig};
use crate::data::{self, compute_borders, generate_synthetic, quantize};
use crate::losses::{zero_one_loss, Loss};
use crate::stats::paired_t_test;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSpec {
    pub name: String,
    pub config: TrainConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub folds: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub methods: Vec<MethodSpec>,
    /// Name of the method p-values are reported against.
    pub reference: String,
    pub seed: u64,
}

impl ExperimentSpec {
    /// Depth-1 trees, 5 borders, learning rate 0.1, SLA sigma 0.1;
    /// SGLB with beta = 1e3 and gamma = 1e-3; SGB subsampling 0.5.
    /// 20 folds of 1000 train / 1000 test rows, 1000 iterations.
    pub fn synthetic_default(seed: u64) -> Self {
        let base = TrainConfig {
            mode: Mode::Gb,
            loss: Loss::Sla { sigma: 0.1 },
            learning_rate: 0.1,
            diffusion_temperature: 1e3,
            model_shrink_rate: 1e-3,
            random_strength: 0.0,
            depth: 1,
            border_count: 5,
            iterations: 1000,
            subsample: 1.0,
            use_best_model: false,
            seed,
        };
        let method = |name: &str, config: TrainConfig| MethodSpec {
            name: name.to_string(),
            config,
        };
        Self {
            folds: 20,
            train_size: 1000,
            test_size: 1000,
            methods: vec![
                method(
                    "Logloss + GB",
                    TrainConfig {
                        loss: Loss::Logloss,
                        ..base.clone()
                    },
                ),
                method("SLA + GB", base.clone()),
                method(
                    "SLA + SGB",
                    TrainConfig {
                        mode: Mode::Sgb,
                        subsample: 0.5,
                        ..base.clone()
                    },
                ),
                method(
                    "SLA + SGLB",
                    TrainConfig {
                        mode: Mode::Sglb,
                        ..base
                    },
                ),
            ],
            reference: "SLA + SGLB".to_string(),
            seed,
        }
    }

    pub fn with_iterations(mut self, iterations: usize) -> Self {
        for m in &mut self.methods {
            m.config.iterations = iterations;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 folds, got {}",
                self.folds
            )));
        }
        if self.train_size == 0 || self.test_size == 0 {
            return Err(Error::InvalidConfig(
                "train and test sizes must be >= 1".into(),
            ));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("no methods configured".into()));
        }
        if !self.methods.iter().any(|m| m.name == self.reference) {
            return Err(Error::InvalidConfig(format!(
                "reference method {:?} not configured",
                self.reference
            )));
        }
        for m in &self.methods {
            m.config.validate()?;
        }
        Ok(())
    }

    /// Seed for fold `fold`: `seed * 10007 + fold`.
    pub fn fold_seed(&self, fold: usize) -> u64 {
        self.seed.wrapping_mul(10_007).wrapping_add(fold as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodResult {
    pub name: String,
    pub fold_losses: Vec<f64>,
    pub mean_loss: f64,
    /// Paired t-test p-value against the reference; `None` for the
    /// reference itself.
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub reference: String,
    pub methods: Vec<MethodResult>,
}

impl ExperimentResult {
    pub fn method(&self, name: &str) -> Option<&MethodResult> {
        self.methods.iter().find(|m| m.name == name)
    }

    /// Fixed-width text table: method, mean 0-1 loss, p-value.
    pub fn table(&self) -> String {
        let width = self
            .methods
            .iter()
            .map(|m| m.name.len())
            .max()
            .unwrap_or(6)
            .max(6);
        let mut out = format!(
            "{:<width$}  {:>9}  {:>10}\n",
            "method", "0-1 loss", "p-value"
        );
        for m in &self.methods {
            let p = m
                .p_value
                .map_or_else(|| "-".to_string(), |p| format!("{p:.3e}"));
            out.push_str(&format!(
                "{:<width$}  {:>9.4}  {:>10}\n",
                m.name, m.mean_loss, p
            ));
        }
        out
    }
}

/// Test 0-1 loss of every method on one fold.
fn run_fold(spec: &ExperimentSpec, fold: usize) -> Result<Vec<f64>> {
    let seed = spec.fold_seed(fold);
    let all = generate_synthetic(spec.train_size + spec.test_size, seed)?;
    let train = all.slice(0..spec.train_size)?;
    let test = all.slice(spec.train_size..spec.train_size + spec.test_size)?;
    spec.methods
        .iter()
        .map(|m| {
            let fail =
                |e: Error| Error::InvalidData(format!("fold {fold}, method {:?}: {e}", m.name));
            let borders = compute_borders(&train, m.config.border_count).map_err(fail)?;
            let q = quantize(&train, &borders).map_err(fail)?;
            let config = TrainConfig {
                seed,
                ..m.config.clone()
            };
            let (ensemble, _) = boosting::train(&config, &q, None).map_err(fail)?;
            let f =
                boosting::predict(&ensemble, test.features(), test.n_features()).map_err(fail)?;
            zero_one_loss(&f, test.targets()).map_err(fail)
        })
        .collect()
}

/// Runs every fold (in parallel) and aggregates in fold order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let per_fold: Vec<Vec<f64>> = (0..spec.folds)
        .into_par_iter()
        .map(|fold| run_fold(spec, fold))
        .collect::<Result<_>>()?;

    let column = |j: usize| -> Vec<f64> { per_fold.iter().map(|row| row[j]).collect() };
    let ref_idx = spec
        .methods
        .iter()
        .position(|m| m.name == spec.reference)
        .expect("validated");
    let reference = column(ref_idx);
    let methods = spec
        .methods
        .iter()
        .enumerate()
        .map(|(j, m)| {
            let fold_losses = column(j);
            let mean_loss = fold_losses.iter().sum::<f64>() / fold_losses.len() as f64;
            let p_value = if j == ref_idx {
                None
            } else {
                Some(paired_t_test(&fold_losses, &reference)?)
            };
            Ok(MethodResult {
                name: m.name.clone(),
                fold_losses,
                mean_loss,
                p_value,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ExperimentResult {
        reference: spec.reference.clone(),
        methods,
    })
}

/// Fold data for external inspection: `(train, test)` of fold `fold`.
pub fn fold_data(spec: &ExperimentSpec, fold: usize) -> Result<(data::Dataset, data::Dataset)> {
    let all = generate_synthetic(spec.train_size + spec.test_size, spec.fold_seed(fold))?;
    Ok((
        all.slice(0..spec.train_size)?,
        all.slice(spec.train_size..spec.train_size + spec.test_size)?,
    ))
}
