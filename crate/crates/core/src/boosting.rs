//! Boosting loops: plain gradient boosting (GB), stochastic gradient boosting
//! with Bernoulli row subsampling (SGB), and stochastic gradient Langevin
//! boosting (SGLB).
//!
//! One SGLB iteration on training predictions `F`:
//!
//! 1. `g = gradient(F)` (possibly subsampled);
//! 2. draw independent `zeta, zeta' ~ N(0, I_N)`;
//! 3. pick a structure by the noisy greedy search on `g + s * zeta'`,
//!    `s = sqrt(2N / (lr * beta))`;
//! 4. leaf values `-lr * mean_leaf(g + s * zeta)`;
//! 5. `F <- (1 - shrink_rate * lr) F + tree`.
//!
//! GB and SGB skip the noise and the shrinkage.

use std::time::{Duration, Instant};

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::data::{BorderSet, Dataset, QuantizedDataset};
use crate::losses::{batch_gradient, zero_one_loss, Loss};
use crate::rng::{self, Rng, Stream};
use crate::trees::{self, LeafAssignment, ObliviousTree, SelectionParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Gb,
    Sgb,
    Sglb,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Gb => "gb",
            Mode::Sgb => "sgb",
            Mode::Sglb => "sglb",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gb" => Ok(Mode::Gb),
            "sgb" => Ok(Mode::Sgb),
            "sglb" => Ok(Mode::Sglb),
            _ => Err(Error::InvalidConfig(format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub mode: Mode,
    pub loss: Loss,
    pub learning_rate: f64,
    /// Inverse diffusion temperature. `f64::INFINITY` switches the Langevin
    /// noise off.
    pub diffusion_temperature: f64,
    pub model_shrink_rate: f64,
    pub random_strength: f64,
    pub depth: usize,
    pub border_count: usize,
    pub iterations: usize,
    pub subsample: f64,
    pub use_best_model: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Sglb,
            loss: Loss::Sla { sigma: 0.1 },
            learning_rate: 0.1,
            diffusion_temperature: 1e3,
            model_shrink_rate: 1e-3,
            random_strength: 0.0,
            depth: 6,
            border_count: 64,
            iterations: 1000,
            subsample: 1.0,
            use_best_model: false,
            seed: 0,
        }
    }
}

/// Largest supported tree depth.
pub const MAX_DEPTH: usize = 16;

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            ));
        }
        if !(self.model_shrink_rate.is_finite() && self.model_shrink_rate >= 0.0) {
            return bad(format!(
                "model shrink rate must be >= 0, got {}",
                self.model_shrink_rate
            ));
        }
        if self.mode == Mode::Sglb {
            if self.diffusion_temperature.is_nan() || self.diffusion_temperature <= 0.0 {
                return bad(format!(
                    "diffusion temperature must be positive, got {}",
                    self.diffusion_temperature
                ));
            }
            if self.model_shrink_rate * self.learning_rate >= 1.0 {
                return bad("model_shrink_rate * learning_rate must be < 1".into());
            }
        }
        if !(self.random_strength.is_finite() && self.random_strength >= 0.0) {
            return bad(format!(
                "random strength must be >= 0, got {}",
                self.random_strength
            ));
        }
        if !(1..=MAX_DEPTH).contains(&self.depth) {
            return bad(format!(
                "depth must be in 1..={MAX_DEPTH}, got {}",
                self.depth
            ));
        }
        if self.border_count == 0 || self.border_count > u16::MAX as usize {
            return bad(format!(
                "border count must be in 1..=65535, got {}",
                self.border_count
            ));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return bad(format!(
                "subsample must be in (0, 1], got {}",
                self.subsample
            ));
        }
        Ok(())
    }

    /// Langevin noise scale `sqrt(2N / (lr * beta))`; zero outside SGLB.
    pub fn noise_scale(&self, n: usize) -> f64 {
        match self.mode {
            Mode::Sglb => {
                (2.0 * n as f64 / (self.learning_rate * self.diffusion_temperature)).sqrt()
            }
            _ => 0.0,
        }
    }

    /// Per-iteration multiplier of the existing ensemble.
    pub fn shrink_factor(&self) -> f64 {
        match self.mode {
            Mode::Sglb => 1.0 - self.model_shrink_rate * self.learning_rate,
            _ => 1.0,
        }
    }

    fn effective_subsample(&self) -> f64 {
        match self.mode {
            Mode::Gb => 1.0,
            _ => self.subsample,
        }
    }
}

/// Settings recorded alongside a trained ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainMetadata {
    pub mode: Mode,
    pub loss: Loss,
    pub learning_rate: f64,
    pub diffusion_temperature: f64,
    pub model_shrink_rate: f64,
    pub seed: u64,
    pub iterations: usize,
}

impl From<&TrainConfig> for TrainMetadata {
    fn from(c: &TrainConfig) -> Self {
        Self {
            mode: c.mode,
            loss: c.loss,
            learning_rate: c.learning_rate,
            diffusion_temperature: c.diffusion_temperature,
            model_shrink_rate: c.model_shrink_rate,
            seed: c.seed,
            iterations: c.iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Weights {
    /// Tree `t` of `T` has weight `exp((T - 1 - t) * log_factor)`.
    Shrink {
        log_factor: f64,
    },
    Explicit(Vec<f64>),
}

/// Weighted sum of oblivious trees over a shared border set.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    borders: BorderSet,
    trees: Vec<ObliviousTree>,
    weights: Weights,
    bias: f64,
    metadata: Option<TrainMetadata>,
}

impl Ensemble {
    /// Empty ensemble; appended trees are shrunk by `shrink_factor` per
    /// subsequent append.
    pub fn new(borders: BorderSet, shrink_factor: f64) -> Result<Self> {
        if !(shrink_factor > 0.0 && shrink_factor <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "shrink factor {shrink_factor} not in (0, 1]"
            )));
        }
        Ok(Self {
            borders,
            trees: Vec::new(),
            weights: Weights::Shrink {
                log_factor: shrink_factor.ln(),
            },
            bias: 0.0,
            metadata: None,
        })
    }

    /// Ensemble with fixed per-tree weights, as read from a model file.
    pub fn from_parts(
        borders: BorderSet,
        trees: Vec<ObliviousTree>,
        weights: Vec<f64>,
        bias: f64,
        metadata: Option<TrainMetadata>,
    ) -> Result<Self> {
        if weights.len() != trees.len() {
            return Err(Error::InvalidModel(format!(
                "{} trees but {} weights",
                trees.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) || !bias.is_finite() {
            return Err(Error::InvalidModel("non-finite weight or bias".into()));
        }
        for t in &trees {
            t.validate(&borders)?;
            if t.leaf_values().iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidModel("non-finite leaf value".into()));
            }
        }
        Ok(Self {
            borders,
            trees,
            weights: Weights::Explicit(weights),
            bias,
            metadata,
        })
    }

    pub fn borders(&self) -> &BorderSet {
        &self.borders
    }

    pub fn trees(&self) -> &[ObliviousTree] {
        &self.trees
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn metadata(&self) -> Option<&TrainMetadata> {
        self.metadata.as_ref()
    }

    pub fn set_metadata(&mut self, metadata: TrainMetadata) {
        self.metadata = Some(metadata);
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    /// Materialized per-tree multipliers.
    pub fn weights(&self) -> Vec<f64> {
        match &self.weights {
            Weights::Explicit(w) => w.clone(),
            Weights::Shrink { log_factor } => {
                let t = self.trees.len();
                (0..t)
                    .map(|i| ((t - 1 - i) as f64 * log_factor).exp())
                    .collect()
            }
        }
    }

    /// Appends a tree with weight 1, shrinking all earlier trees.
    pub fn push(&mut self, tree: ObliviousTree) -> Result<()> {
        if let Weights::Explicit(_) = self.weights {
            return Err(Error::InvalidModel(
                "cannot extend an ensemble with fixed weights".into(),
            ));
        }
        tree.validate(&self.borders)?;
        self.trees.push(tree);
        Ok(())
    }

    /// Keeps the first `n` trees, as if training had stopped after `n`
    /// iterations.
    pub fn truncate(&mut self, n: usize) {
        self.trees.truncate(n);
        if let Weights::Explicit(w) = &mut self.weights {
            w.truncate(n);
        }
    }

    pub fn predict_row(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.borders.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.borders.n_features(),
                found: x.len(),
            });
        }
        let weights = self.weights();
        Ok(self.predict_row_with(&weights, x))
    }

    fn predict_row_with(&self, weights: &[f64], x: &[f64]) -> f64 {
        self.trees
            .iter()
            .zip(weights)
            .fold(self.bias, |acc, (t, w)| {
                acc + w * t.leaf_values()[t.leaf_of_row(&self.borders, x)]
            })
    }
}

/// Predictions for row-major `features` with `n_features` columns.
pub fn predict(e: &Ensemble, features: &[f64], n_features: usize) -> Result<Vec<f64>> {
    if n_features != e.borders.n_features()
        || (n_features > 0 && !features.len().is_multiple_of(n_features))
    {
        return Err(Error::DimensionMismatch {
            expected: e.borders.n_features(),
            found: n_features,
        });
    }
    let weights = e.weights();
    Ok(features
        .chunks_exact(n_features)
        .map(|x| e.predict_row_with(&weights, x))
        .collect())
}

/// Mean loss and 0-1 loss of `e` on `data`.
pub fn evaluate(e: &Ensemble, data: &Dataset, loss: &Loss) -> Result<(f64, f64)> {
    let f = predict(e, data.features(), data.n_features())?;
    Ok((
        loss.mean(&f, data.targets())?,
        zero_one_loss(&f, data.targets())?,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainTrace {
    pub train_loss: Vec<f64>,
    pub valid_loss: Option<Vec<f64>>,
    pub noise_scale: f64,
    /// Index of the last kept iteration when the best validation model is
    /// selected.
    pub best_iteration: Option<usize>,
    pub elapsed: Duration,
}

/// Everything one boosting iteration drew and built.
#[derive(Debug, Clone)]
pub struct Step {
    pub tree: ObliviousTree,
    pub leaves: LeafAssignment,
    /// Gradient estimate the iteration fitted.
    pub gradient: Vec<f64>,
    /// Unscaled Gaussian draw added to the leaf-value target (SGLB only).
    pub value_noise: Option<Vec<f64>>,
}

/// Incremental training state over one quantized dataset.
pub struct Booster<'a> {
    config: TrainConfig,
    data: &'a QuantizedDataset,
    predictions: Vec<f64>,
    iteration: usize,
    noise_scale: f64,
    shrink: f64,
    subsample_rng: Rng,
    langevin_rng: Rng,
    selection_rng: Rng,
}

impl<'a> Booster<'a> {
    pub fn new(config: &TrainConfig, data: &'a QuantizedDataset) -> Result<Self> {
        config.validate()?;
        if data.n_rows() == 0 {
            return Err(Error::Empty("training set is empty".into()));
        }
        config.loss.validate_targets(data.targets())?;
        Ok(Self {
            noise_scale: config.noise_scale(data.n_rows()),
            shrink: config.shrink_factor(),
            predictions: vec![0.0; data.n_rows()],
            iteration: 0,
            subsample_rng: rng::stream(config.seed, Stream::Subsample),
            langevin_rng: rng::stream(config.seed, Stream::Langevin),
            selection_rng: rng::stream(config.seed, Stream::Selection),
            config: config.clone(),
            data,
        })
    }

    pub fn predictions(&self) -> &[f64] {
        &self.predictions
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn noise_scale(&self) -> f64 {
        self.noise_scale
    }

    pub fn shrink_factor(&self) -> f64 {
        self.shrink
    }

    /// Runs one iteration and updates the training predictions.
    pub fn step(&mut self) -> Result<Step> {
        let cfg = &self.config;
        let n = self.data.n_rows();
        let gradient = batch_gradient(
            &cfg.loss,
            &self.predictions,
            self.data.targets(),
            cfg.effective_subsample(),
            &mut self.subsample_rng,
        )?;
        if gradient.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "gradient",
                iteration: self.iteration,
            });
        }

        let (structure_target, value_target, value_noise) = if cfg.mode == Mode::Sglb {
            let zeta: Vec<f64> = (0..n)
                .map(|_| self.langevin_rng.sample(StandardNormal))
                .collect();
            let zeta_s: Vec<f64> = (0..n)
                .map(|_| self.langevin_rng.sample(StandardNormal))
                .collect();
            let s = self.noise_scale;
            let structure: Vec<f64> = gradient
                .iter()
                .zip(&zeta_s)
                .map(|(g, z)| g + s * z)
                .collect();
            let value: Vec<f64> = gradient.iter().zip(&zeta).map(|(g, z)| g + s * z).collect();
            (Some(structure), Some(value), Some(zeta))
        } else {
            (None, None, None)
        };

        let sel = SelectionParams {
            random_strength: cfg.random_strength,
            learning_rate: cfg.learning_rate,
            iteration: self.iteration,
        };
        let splits = trees::build_structure(
            structure_target.as_deref().unwrap_or(&gradient),
            self.data,
            cfg.depth,
            &sel,
            &mut self.selection_rng,
        )?;
        let leaves = trees::assign_leaves(&splits, self.data)?;
        let lr = cfg.learning_rate;
        let leaf_values: Vec<f64> =
            trees::estimate_leaves(value_target.as_deref().unwrap_or(&gradient), &leaves)?
                .into_iter()
                .map(|v| -lr * v)
                .collect();

        for (f, &l) in self.predictions.iter_mut().zip(leaves.leaves()) {
            *f = self.shrink * *f + leaf_values[l];
        }
        let tree = ObliviousTree::new(splits, leaf_values)?;
        self.iteration += 1;
        Ok(Step {
            tree,
            leaves,
            gradient,
            value_noise,
        })
    }
}

/// Trains an ensemble. `valid`, when given, must be quantized with the same
/// borders as `train`.
pub fn train(
    config: &TrainConfig,
    train: &QuantizedDataset,
    valid: Option<&QuantizedDataset>,
) -> Result<(Ensemble, TrainTrace)> {
    let start = Instant::now();
    let mut booster = Booster::new(config, train)?;
    if let Some(v) = valid {
        if v.borders() != train.borders() {
            return Err(Error::InvalidData(
                "validation set uses different borders".into(),
            ));
        }
        config.loss.validate_targets(v.targets())?;
    }
    let mut ensemble = Ensemble::new(train.borders().clone(), booster.shrink_factor())?;
    ensemble.set_metadata(TrainMetadata::from(config));

    let mut train_loss = Vec::with_capacity(config.iterations);
    let mut valid_loss = valid.map(|_| Vec::with_capacity(config.iterations));
    let mut valid_pred = valid.map(|v| vec![0.0; v.n_rows()]);

    for it in 0..config.iterations {
        let step = booster.step()?;
        let loss = config.loss.mean(booster.predictions(), train.targets())?;
        if !loss.is_finite() {
            return Err(Error::NonFinite {
                what: "train loss",
                iteration: it,
            });
        }
        train_loss.push(loss);
        if let (Some(v), Some(pred), Some(hist)) = (valid, valid_pred.as_mut(), valid_loss.as_mut())
        {
            for (row, f) in pred.iter_mut().enumerate() {
                *f = booster.shrink_factor() * *f
                    + step.tree.leaf_values()[step.tree.leaf_of_bins(v, row)];
            }
            hist.push(config.loss.mean(pred, v.targets())?);
        }
        ensemble.push(step.tree)?;
    }

    let mut best_iteration = None;
    if config.use_best_model {
        if let Some(hist) = &valid_loss {
            let best =
                hist.iter()
                    .enumerate()
                    .fold(None::<(usize, f64)>, |best, (i, &l)| match best {
                        Some((_, b)) if b <= l => best,
                        _ => Some((i, l)),
                    });
            if let Some((i, _)) = best {
                ensemble.truncate(i + 1);
                best_iteration = Some(i);
            }
        }
    }

    Ok((
        ensemble,
        TrainTrace {
            train_loss,
            valid_loss,
            noise_scale: booster.noise_scale(),
            best_iteration,
            elapsed: start.elapsed(),
        },
    ))
}
