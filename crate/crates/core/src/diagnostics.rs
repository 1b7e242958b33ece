//! Dense oracles and statistical checks for the structural properties the
//! boosting code relies on:
//!
//! * leaf averaging equals the minimum-norm least-squares fit, computed here
//!   as the ridge limit `(H^T H + d I)^{-1} H^T` with `d = 1e-12`;
//! * the induced hat matrix `P = H (H^T H + d I)^{-1} H^T` is an orthogonal
//!   projector;
//! * `N * E[P_s]` under structure sampling at a zero gradient (the limiting
//!   preconditioner);
//! * on a configuration where every row sits in its own leaf, SGLB with
//!   squared error is a discretized Ornstein-Uhlenbeck process
//!   `dF = -gamma F dt - (F - Y) dt + sqrt(2N / beta) dW` whose stationary
//!   law is `N(Y / (1 + gamma), N / (beta (1 + gamma)) I)`.
//!
//! Everything here is deliberately dense and size-capped.

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::boosting::{Booster, Mode, TrainConfig};
use crate::data::{BorderSet, Dataset, QuantizedDataset};
use crate::losses::Loss;
use crate::trees::{assign_leaves, build_structure, LeafAssignment, SelectionParams};
use crate::{data, Error, Result};

/// Ridge term of the pseudo-inverse limit.
pub const RIDGE: f64 = 1e-12;
/// Largest N for the dense oracles.
pub const DENSE_LIMIT: usize = 2000;
/// Largest N for the preconditioner estimate.
pub const P_INFINITY_LIMIT: usize = 200;
/// Pass threshold for projector defects.
pub const PROJECTOR_TOLERANCE: f64 = 1e-10;

fn check_size(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(Error::SizeLimit { size: n, limit });
    }
    Ok(())
}

/// N x m leaf indicator matrix.
pub fn indicator_matrix(assignment: &LeafAssignment) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(assignment.n_rows(), assignment.n_leaves());
    for (i, &l) in assignment.leaves().iter().enumerate() {
        h[(i, l)] = 1.0;
    }
    h
}

fn ridge_inverse(h: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = h.ncols();
    let gram = h.transpose() * h + DMatrix::identity(m, m) * RIDGE;
    gram.cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::InvalidData("ridge Gram matrix is not positive definite".into()))
}

/// Leaf coefficients `(H^T H + d I)^{-1} H^T target`.
pub fn pinv_leaf_oracle(assignment: &LeafAssignment, target: &[f64]) -> Result<Vec<f64>> {
    check_size(assignment.n_rows(), DENSE_LIMIT)?;
    if target.len() != assignment.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: assignment.n_rows(),
            found: target.len(),
        });
    }
    let h = indicator_matrix(assignment);
    let coef = ridge_inverse(&h)? * (h.transpose() * DVector::from_column_slice(target));
    Ok(coef.iter().copied().collect())
}

/// Dense hat matrix `H (H^T H + d I)^{-1} H^T`.
pub fn projector_matrix(assignment: &LeafAssignment) -> Result<DMatrix<f64>> {
    check_size(assignment.n_rows(), DENSE_LIMIT)?;
    let h = indicator_matrix(assignment);
    Ok(&h * ridge_inverse(&h)? * h.transpose())
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectorReport {
    /// max |P - P^T|
    pub symmetry_defect: f64,
    /// max |P^2 - P|
    pub idempotence_defect: f64,
    /// max |P H - H|: P fixes the image of H.
    pub image_residual: f64,
    pub passed: bool,
}

pub fn check_projector(assignment: &LeafAssignment) -> Result<ProjectorReport> {
    let p = projector_matrix(assignment)?;
    let h = indicator_matrix(assignment);
    let symmetry_defect = max_abs(&(&p - p.transpose()));
    let idempotence_defect = max_abs(&(&p * &p - &p));
    let image_residual = max_abs(&(&p * &h - &h));
    let passed = [symmetry_defect, idempotence_defect, image_residual]
        .iter()
        .all(|&d| d <= PROJECTOR_TOLERANCE);
    Ok(ProjectorReport {
        symmetry_defect,
        idempotence_defect,
        image_residual,
        passed,
    })
}

/// Worst projector defects over trees grown greedily on random gradients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectorSuite {
    pub trees: usize,
    pub max_symmetry_defect: f64,
    pub max_idempotence_defect: f64,
    pub max_image_residual: f64,
    pub passed: bool,
}

/// Grows `per_depth` trees at each depth in `1..=max_depth` on standard-normal
/// gradients over `q` and checks every induced hat matrix.
pub fn greedy_projector_suite<R: rand::Rng + ?Sized>(
    q: &QuantizedDataset,
    max_depth: usize,
    per_depth: usize,
    rng: &mut R,
) -> Result<ProjectorSuite> {
    check_size(q.n_rows(), DENSE_LIMIT)?;
    let mut out = ProjectorSuite {
        trees: 0,
        max_symmetry_defect: 0.0,
        max_idempotence_defect: 0.0,
        max_image_residual: 0.0,
        passed: false,
    };
    for depth in 1..=max_depth {
        for _ in 0..per_depth {
            let g: Vec<f64> = (0..q.n_rows())
                .map(|_| rng.sample(StandardNormal))
                .collect();
            let splits = build_structure(&g, q, depth, &SelectionParams::deterministic(), rng)?;
            let r = check_projector(&assign_leaves(&splits, q)?)?;
            out.max_symmetry_defect = out.max_symmetry_defect.max(r.symmetry_defect);
            out.max_idempotence_defect = out.max_idempotence_defect.max(r.idempotence_defect);
            out.max_image_residual = out.max_image_residual.max(r.image_residual);
            out.trees += 1;
        }
    }
    out.passed = out.trees > 0
        && [
            out.max_symmetry_defect,
            out.max_idempotence_defect,
            out.max_image_residual,
        ]
        .iter()
        .all(|&d| d <= PROJECTOR_TOLERANCE);
    Ok(out)
}

/// Monte Carlo estimate of `N * E[P_s]` for structures sampled at a zero
/// gradient.
#[derive(Debug, Clone)]
pub struct PInfinityEstimate {
    pub matrix: DMatrix<f64>,
    /// Per-entry Monte Carlo standard error of `matrix`.
    pub standard_errors: DMatrix<f64>,
    pub samples: usize,
    /// Distinct partitions encountered.
    pub images: Vec<LeafAssignment>,
}

impl PInfinityEstimate {
    /// max |P - P^T| measured in standard errors of the difference.
    pub fn max_asymmetry_z(&self) -> f64 {
        let n = self.matrix.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..i {
                let d = (self.matrix[(i, j)] - self.matrix[(j, i)]).abs();
                if d == 0.0 {
                    continue;
                }
                let se = (self.standard_errors[(i, j)].powi(2)
                    + self.standard_errors[(j, i)].powi(2))
                .sqrt();
                worst = worst.max(if se > 0.0 { d / se } else { f64::INFINITY });
            }
        }
        worst
    }

    /// max |estimate - N I|.
    pub fn identity_deviation(&self) -> f64 {
        let n = self.matrix.nrows();
        (&self.matrix - DMatrix::<f64>::identity(n, n) * n as f64).amax()
    }

    /// Smallest eigenvalue of the estimate restricted to the span of all
    /// sampled leaf images.
    pub fn min_eigenvalue_on_span(&self) -> f64 {
        let n = self.matrix.nrows();
        let cols: usize = self.images.iter().map(|a| a.n_leaves()).sum();
        let mut stacked = DMatrix::zeros(n, cols);
        let mut c = 0;
        for a in &self.images {
            let h = indicator_matrix(a);
            stacked.columns_mut(c, h.ncols()).copy_from(&h);
            c += h.ncols();
        }
        let svd = stacked.svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let tol = 1e-9 * svd.singular_values.max().max(1.0);
        let rank_cols: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > tol)
            .collect();
        let q = u.select_columns(&rank_cols);
        let restricted = q.transpose() * &self.matrix * &q;
        let sym = (&restricted + restricted.transpose()) * 0.5;
        sym.symmetric_eigen().eigenvalues.min()
    }
}

pub fn estimate_p_infinity<R: rand::Rng + ?Sized>(
    q: &QuantizedDataset,
    sel: &SelectionParams,
    depth: usize,
    samples: usize,
    rng: &mut R,
) -> Result<PInfinityEstimate> {
    let n = q.n_rows();
    check_size(n, P_INFINITY_LIMIT)?;
    if samples == 0 {
        return Err(Error::InvalidConfig("need at least one sample".into()));
    }
    let mut sum = DMatrix::<f64>::zeros(n, n);
    let mut sum_sq = DMatrix::<f64>::zeros(n, n);
    let mut images: Vec<LeafAssignment> = Vec::new();
    for _ in 0..samples {
        // zero gradient plus structure noise
        let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let splits = build_structure(&z, q, depth, sel, rng)?;
        let a = assign_leaves(&splits, q)?;
        let sizes = a.leaf_sizes();
        for i in 0..n {
            for j in 0..n {
                if a.leaves()[i] == a.leaves()[j] {
                    let v = 1.0 / sizes[a.leaves()[i]] as f64;
                    sum[(i, j)] += v;
                    sum_sq[(i, j)] += v * v;
                }
            }
        }
        if !images.iter().any(|b| same_partition(b, &a)) {
            images.push(a);
        }
    }
    let s = samples as f64;
    let mean = &sum / s;
    let var = (&sum_sq / s - mean.component_mul(&mean)).map(|v| v.max(0.0));
    let se = if samples > 1 {
        var.map(|v| (v / (s - 1.0)).sqrt())
    } else {
        DMatrix::zeros(n, n)
    };
    Ok(PInfinityEstimate {
        matrix: mean * n as f64,
        standard_errors: se * n as f64,
        samples,
        images,
    })
}

fn same_partition(a: &LeafAssignment, b: &LeafAssignment) -> bool {
    let n = a.n_rows();
    (0..n).all(|i| {
        (0..i).all(|j| (a.leaves()[i] == a.leaves()[j]) == (b.leaves()[i] == b.leaves()[j]))
    })
}

/// Settings for the stationary-moment test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GibbsConfig {
    pub targets: Vec<f64>,
    pub diffusion_temperature: f64,
    pub model_shrink_rate: f64,
    pub learning_rate: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl GibbsConfig {
    /// Four rows `Y = [1, -1, 2, 0]`, beta = 100, gamma = 0.5, lr = 1e-3;
    /// 2e6 iterations, the first 1e5 discarded as burn-in.
    pub fn reference() -> Self {
        Self {
            targets: vec![1.0, -1.0, 2.0, 0.0],
            diffusion_temperature: 100.0,
            model_shrink_rate: 0.5,
            learning_rate: 1e-3,
            iterations: 2_000_000,
            burn_in: 100_000,
            seed: 20_200_717,
        }
    }

    pub fn analytic_mean(&self) -> Vec<f64> {
        self.targets
            .iter()
            .map(|y| y / (1.0 + self.model_shrink_rate))
            .collect()
    }

    pub fn analytic_variance(&self) -> f64 {
        self.targets.len() as f64 / (self.diffusion_temperature * (1.0 + self.model_shrink_rate))
    }

    /// Lag-one autocorrelation of the discretized chain.
    pub fn autocorrelation(&self) -> f64 {
        (-(1.0 + self.model_shrink_rate) * self.learning_rate).exp()
    }
}

/// Acceptance bounds for [`StationaryReport::passed`].
pub const MAX_ABS_Z: f64 = 4.0;
pub const VARIANCE_RATIO_RANGE: (f64, f64) = (0.8, 1.25);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryReport {
    pub empirical_mean: Vec<f64>,
    pub empirical_variance: Vec<f64>,
    pub analytic_mean: Vec<f64>,
    pub analytic_variance: f64,
    pub effective_sample_size: f64,
    pub z_scores: Vec<f64>,
    pub variance_ratios: Vec<f64>,
    pub passed: bool,
}

impl StationaryReport {
    pub fn max_abs_z(&self) -> f64 {
        self.z_scores.iter().fold(0.0, |a, z| a.max(z.abs()))
    }

    pub fn mean_variance_ratio(&self) -> f64 {
        self.variance_ratios.iter().sum::<f64>() / self.variance_ratios.len() as f64
    }
}

/// Rows indexed by their bit patterns over `ceil(log2 N)` binary features,
/// one border at 0.5 each: a tree using every feature isolates every row.
pub fn isolating_dataset(targets: &[f64]) -> Result<QuantizedDataset> {
    let n = targets.len();
    if n == 0 {
        return Err(Error::Empty("no targets".into()));
    }
    let k = (usize::BITS - (n - 1).leading_zeros()).max(1) as usize;
    let features: Vec<f64> = (0..n)
        .flat_map(|i| (0..k).map(move |j| ((i >> j) & 1) as f64))
        .collect();
    let d = Dataset::new(features, k, targets.to_vec())?;
    data::quantize(&d, &BorderSet::new(vec![vec![0.5]; k])?)
}

/// Runs the SGLB chain with squared error on [`isolating_dataset`] and
/// compares post-burn-in moments of the training predictions with the
/// Ornstein-Uhlenbeck stationary law.
pub fn gibbs_moment_test(cfg: &GibbsConfig) -> Result<StationaryReport> {
    if cfg.burn_in >= cfg.iterations {
        return Err(Error::InvalidConfig(format!(
            "burn-in {} must be below iterations {}",
            cfg.burn_in, cfg.iterations
        )));
    }
    let q = isolating_dataset(&cfg.targets)?;
    let n = q.n_rows();
    let train_cfg = TrainConfig {
        mode: Mode::Sglb,
        loss: Loss::Mse,
        learning_rate: cfg.learning_rate,
        diffusion_temperature: cfg.diffusion_temperature,
        model_shrink_rate: cfg.model_shrink_rate,
        random_strength: 0.0,
        depth: q.n_features(),
        border_count: 1,
        iterations: cfg.iterations,
        subsample: 1.0,
        use_best_model: false,
        seed: cfg.seed,
    };
    let mut booster = Booster::new(&train_cfg, &q)?;
    let mut mean = vec![0.0; n];
    let mut m2 = vec![0.0; n];
    let mut count = 0usize;
    let mut seen = vec![false; 1 << q.n_features()];
    for it in 0..cfg.iterations {
        let step = booster.step()?;
        seen.iter_mut().for_each(|s| *s = false);
        for &l in step.leaves.leaves() {
            if std::mem::replace(&mut seen[l], true) {
                return Err(Error::InvalidConfig(format!(
                    "rows share a leaf at iteration {it}; the isolation precondition fails"
                )));
            }
        }
        if it < cfg.burn_in {
            continue;
        }
        count += 1;
        let c = count as f64;
        for ((m, s), &f) in mean
            .iter_mut()
            .zip(m2.iter_mut())
            .zip(booster.predictions())
        {
            let delta = f - *m;
            *m += delta / c;
            *s += delta * (f - *m);
        }
    }
    let samples = count as f64;
    let variance: Vec<f64> = m2.iter().map(|s| s / (samples - 1.0).max(1.0)).collect();
    let rho = cfg.autocorrelation();
    let ess = samples * (1.0 - rho) / (1.0 + rho);
    let analytic_mean = cfg.analytic_mean();
    let analytic_variance = cfg.analytic_variance();
    let z_scores: Vec<f64> = mean
        .iter()
        .zip(&variance)
        .zip(&analytic_mean)
        .map(|((m, v), a)| (m - a) / (v / ess).sqrt())
        .collect();
    let variance_ratios: Vec<f64> = variance.iter().map(|v| v / analytic_variance).collect();
    let (lo, hi) = VARIANCE_RATIO_RANGE;
    let passed = z_scores.iter().all(|z| z.abs() <= MAX_ABS_Z)
        && variance_ratios.iter().all(|r| (lo..=hi).contains(r));
    Ok(StationaryReport {
        empirical_mean: mean,
        empirical_variance: variance,
        analytic_mean,
        analytic_variance,
        effective_sample_size: ess,
        z_scores,
        variance_ratios,
        passed,
    })
}

/// One point of a discretization sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub learning_rate: f64,
    pub iterations: usize,
    /// |mean variance ratio - 1|
    pub moment_error: f64,
    pub report: StationaryReport,
}

/// Runs [`gibbs_moment_test`] at each learning rate over the same simulated
/// time `base.learning_rate * base.iterations` (iterations and burn-in scale
/// inversely with the step).
pub fn discretization_sweep(base: &GibbsConfig, learning_rates: &[f64]) -> Result<Vec<SweepPoint>> {
    let horizon = base.learning_rate * base.iterations as f64;
    let burn_time = base.learning_rate * base.burn_in as f64;
    learning_rates
        .iter()
        .map(|&lr| {
            let cfg = GibbsConfig {
                learning_rate: lr,
                iterations: (horizon / lr).round() as usize,
                burn_in: (burn_time / lr).round() as usize,
                ..base.clone()
            };
            let report = gibbs_moment_test(&cfg)?;
            Ok(SweepPoint {
                learning_rate: lr,
                iterations: cfg.iterations,
                moment_error: (report.mean_variance_ratio() - 1.0).abs(),
                report,
            })
        })
        .collect()
}

/// Number of consecutive sweep steps in which the moment error shrank.
pub fn improving_steps(points: &[SweepPoint]) -> usize {
    points
        .windows(2)
        .filter(|w| w[1].moment_error < w[0].moment_error)
        .count()
}

/// Random leaf assignment with `1..=max_rows` rows and depth `1..=max_depth`;
/// leaves are drawn uniformly, so some may be empty.
pub fn random_assignment<R: rand::Rng + ?Sized>(
    rng: &mut R,
    max_rows: usize,
    max_depth: usize,
) -> LeafAssignment {
    let n = rng.random_range(1..=max_rows);
    let n_leaves = 1usize << rng.random_range(1..=max_depth);
    let leaves = (0..n).map(|_| rng.random_range(0..n_leaves)).collect();
    LeafAssignment::new(leaves, n_leaves).expect("indices drawn below n_leaves")
}

/// Worst-case discrepancies over a batch of random assignments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeafOracleSuite {
    pub instances: usize,
    /// max |leaf averaging - ridge-limit oracle|
    pub max_pinv_error: f64,
    pub max_symmetry_defect: f64,
    pub max_idempotence_defect: f64,
    pub max_image_residual: f64,
    pub passed: bool,
}

/// Compares leaf averaging against [`pinv_leaf_oracle`] and runs
/// [`check_projector`] on `instances` random assignments (N <= 200,
/// depth <= 4) with standard-normal targets.
pub fn leaf_oracle_suite(instances: usize, seed: u64) -> Result<LeafOracleSuite> {
    let mut rng = crate::rng::stream(seed, crate::rng::Stream::Diagnostics);
    let mut out = LeafOracleSuite {
        instances,
        max_pinv_error: 0.0,
        max_symmetry_defect: 0.0,
        max_idempotence_defect: 0.0,
        max_image_residual: 0.0,
        passed: false,
    };
    for _ in 0..instances {
        let a = random_assignment(&mut rng, P_INFINITY_LIMIT, 4);
        let target: Vec<f64> = (0..a.n_rows())
            .map(|_| rng.sample(StandardNormal))
            .collect();
        let fast = crate::trees::estimate_leaves(&target, &a)?;
        let oracle = pinv_leaf_oracle(&a, &target)?;
        for (x, y) in fast.iter().zip(&oracle) {
            out.max_pinv_error = out.max_pinv_error.max((x - y).abs());
        }
        let r = check_projector(&a)?;
        out.max_symmetry_defect = out.max_symmetry_defect.max(r.symmetry_defect);
        out.max_idempotence_defect = out.max_idempotence_defect.max(r.idempotence_defect);
        out.max_image_residual = out.max_image_residual.max(r.image_residual);
    }
    out.passed = [
        out.max_pinv_error,
        out.max_symmetry_defect,
        out.max_idempotence_defect,
        out.max_image_residual,
    ]
    .iter()
    .all(|&d| d <= PROJECTOR_TOLERANCE);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::estimate_leaves;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assignment(leaves: &[usize], n_leaves: usize) -> LeafAssignment {
        LeafAssignment::new(leaves.to_vec(), n_leaves).unwrap()
    }

    #[test]
    fn oracle_two_leaves() {
        let v = pinv_leaf_oracle(&assignment(&[0, 0, 1, 1], 2), &[1., 2., 3., 4.]).unwrap();
        assert_abs_diff_eq!(v[0], 1.5, epsilon = 1e-10);
        assert_abs_diff_eq!(v[1], 3.5, epsilon = 1e-10);
    }

    #[test]
    fn oracle_identity_and_empty_leaf() {
        let t = [0.3, -2.0, 5.0];
        let v = pinv_leaf_oracle(&assignment(&[0, 1, 2], 3), &t).unwrap();
        for (a, b) in v.iter().zip(&t) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
        let v = pinv_leaf_oracle(&assignment(&[0, 0, 3], 4), &t).unwrap();
        assert_eq!(v[1], 0.0);
        assert_eq!(v[2], 0.0);
        let direct = estimate_leaves(&t, &assignment(&[0, 0, 3], 4)).unwrap();
        for (a, b) in v.iter().zip(&direct) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn projector_special_cases() {
        let single = projector_matrix(&assignment(&[0; 5], 1)).unwrap();
        for v in single.iter() {
            assert_abs_diff_eq!(*v, 0.2, epsilon = 1e-12);
        }
        let r = check_projector(&assignment(&[0; 5], 1)).unwrap();
        assert!(r.passed, "{r:?}");
        let id = projector_matrix(&assignment(&[0, 1, 2, 3], 4)).unwrap();
        assert!(max_abs(&(id - DMatrix::identity(4, 4))) <= 1e-10);
        let r = check_projector(&assignment(&[1, 0, 1, 2, 2, 2], 4)).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn size_limits() {
        let big = assignment(&vec![0; DENSE_LIMIT + 1], 1);
        assert!(matches!(
            check_projector(&big),
            Err(Error::SizeLimit { .. })
        ));
        assert!(matches!(
            pinv_leaf_oracle(&big, &vec![0.0; DENSE_LIMIT + 1]),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn p_infinity_identity_partition() {
        let q = isolating_dataset(&[0.0; 8]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let est =
            estimate_p_infinity(&q, &SelectionParams::deterministic(), 3, 50, &mut rng).unwrap();
        assert_eq!(est.matrix, DMatrix::identity(8, 8) * 8.0);
        assert_abs_diff_eq!(est.min_eigenvalue_on_span(), 8.0, epsilon = 1e-9);
    }

    #[test]
    fn p_infinity_single_candidate() {
        let d = Dataset::new(vec![0.0, 1.0, 2.0, 3.0], 1, vec![0.0; 4]).unwrap();
        let q = data::quantize(&d, &BorderSet::new(vec![vec![1.5]]).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let est =
            estimate_p_infinity(&q, &SelectionParams::deterministic(), 1, 20, &mut rng).unwrap();
        let p = projector_matrix(&assignment(&[1, 1, 0, 0], 2)).unwrap() * 4.0;
        assert!(max_abs(&(&est.matrix - p)) < 1e-9);
        assert!(est.standard_errors.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn gibbs_rejects_bad_burn_in() {
        let cfg = GibbsConfig {
            iterations: 10,
            burn_in: 10,
            ..GibbsConfig::reference()
        };
        assert!(gibbs_moment_test(&cfg).is_err());
    }

    #[test]
    fn isolating_dataset_shape() {
        let q = isolating_dataset(&[0.0; 5]).unwrap();
        assert_eq!(q.n_features(), 3);
        let q = isolating_dataset(&[0.0]).unwrap();
        assert_eq!(q.n_features(), 1);
    }
}
