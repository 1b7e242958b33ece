//! Gradient boosting over oblivious decision trees with Langevin-type noise
//! injection and model shrinkage (SGLB), alongside classic (stochastic)
//! gradient boosting.
//!
//! The crate is organised bottom-up:
//!
//! * [`data`]: CSV loading, quantile borders, quantization and the synthetic
//!   generator used by the experiment harness.
//! * [`losses`]: smoothed 0-1 loss, logistic loss and squared error.
//! * [`trees`]: oblivious tree structure search and leaf estimation.
//! * [`boosting`]: GB / SGB / SGLB training loops and ensemble prediction.
//! * [`diagnostics`]: independent dense oracles and stationary-law tests.
//! * [`experiments`]: the cross-validated synthetic study.
//! * [`model_io`]: canonical JSON model files.

pub mod boosting;
pub mod data;
pub mod diagnostics;
mod error;
pub mod experiments;
pub mod losses;
pub mod model_io;
pub mod rng;
pub mod stats;
pub mod trees;

pub use boosting::{evaluate, predict, train, Booster, Ensemble, Mode, TrainConfig, TrainTrace};
pub use data::{
    compute_borders, generate_synthetic, load_csv, quantize, BorderSet, Dataset, QuantizedDataset,
};
pub use error::{Error, Result};
pub use losses::Loss;
pub use trees::{ObliviousTree, SelectionParams, Split};
