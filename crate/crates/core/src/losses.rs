//! Scalar losses `L(z, y)` in the prediction `z`, their derivatives, and the
//! 0-1 evaluation metric.

use crate::{Error, Result};

/// Pointwise training loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Loss {
    /// Sigmoid-smoothed 0-1 loss `1 - sigmoid((2y - 1) z / sigma)`.
    Sla { sigma: f64 },
    /// Logistic loss `-y ln sigmoid(z) - (1 - y) ln(1 - sigmoid(z))`.
    Logloss,
    /// Squared error `(z - y)^2 / 2`.
    Mse,
}

/// Numerically stable logistic function.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

impl Loss {
    pub fn sla(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "SLA sigma must be positive, got {sigma}"
            )));
        }
        Ok(Loss::Sla { sigma })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Loss::Sla { .. } => "sla",
            Loss::Logloss => "logloss",
            Loss::Mse => "mse",
        }
    }

    pub fn is_classification(&self) -> bool {
        !matches!(self, Loss::Mse)
    }

    /// Classification losses accept only 0/1 targets. Checked once per
    /// dataset rather than per evaluation.
    pub fn validate_targets(&self, targets: &[f64]) -> Result<()> {
        if self.is_classification() {
            if let Some(i) = targets.iter().position(|&y| y != 0.0 && y != 1.0) {
                return Err(Error::InvalidData(format!(
                    "{} loss needs 0/1 targets; row {} has {}",
                    self.name(),
                    i + 1,
                    targets[i]
                )));
            }
        }
        Ok(())
    }

    pub fn value(&self, z: f64, y: f64) -> f64 {
        match *self {
            Loss::Sla { sigma } => sigmoid(-(2.0 * y - 1.0) * z / sigma),
            Loss::Logloss => softplus(z) - y * z,
            Loss::Mse => 0.5 * (z - y) * (z - y),
        }
    }

    pub fn derivative(&self, z: f64, y: f64) -> f64 {
        match *self {
            Loss::Sla { sigma } => {
                let sign = 2.0 * y - 1.0;
                let x = sign * z / sigma;
                -sign / sigma * sigmoid(x) * sigmoid(-x)
            }
            Loss::Logloss => sigmoid(z) - y,
            Loss::Mse => z - y,
        }
    }

    /// Empirical mean loss.
    pub fn mean(&self, predictions: &[f64], targets: &[f64]) -> Result<f64> {
        check_lengths(predictions, targets)?;
        let sum: f64 = predictions
            .iter()
            .zip(targets)
            .map(|(&z, &y)| self.value(z, y))
            .sum();
        Ok(sum / predictions.len() as f64)
    }
}

impl std::str::FromStr for Loss {
    type Err = Error;

    /// Parses `sla`, `sla:<sigma>`, `logloss` or `mse`. Bare `sla` uses
    /// sigma = 0.1.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sla" => Loss::sla(0.1),
            "logloss" => Ok(Loss::Logloss),
            "mse" => Ok(Loss::Mse),
            _ => match s.strip_prefix("sla:") {
                Some(v) => Loss::sla(
                    v.parse()
                        .map_err(|_| Error::InvalidConfig(format!("bad SLA sigma {v:?}")))?,
                ),
                None => Err(Error::InvalidConfig(format!("unknown loss {s:?}"))),
            },
        }
    }
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(())
}

/// Per-example gradient estimate (no `1/N` factor).
///
/// With `subsample < 1` each coordinate is kept and divided by the rate with
/// probability `subsample`, otherwise zeroed, which is unbiased for the full
/// gradient.
pub fn batch_gradient<R: rand::Rng + ?Sized>(
    loss: &Loss,
    predictions: &[f64],
    targets: &[f64],
    subsample: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_lengths(predictions, targets)?;
    if !(subsample > 0.0 && subsample <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "subsample rate {subsample} not in (0, 1]"
        )));
    }
    let exact = predictions
        .iter()
        .zip(targets)
        .map(|(&z, &y)| loss.derivative(z, y));
    if subsample == 1.0 {
        return Ok(exact.collect());
    }
    Ok(exact
        .map(|g| {
            if rng.random::<f64>() < subsample {
                g / subsample
            } else {
                0.0
            }
        })
        .collect())
}

/// Fraction of rows with `(2y - 1) f <= 0`; a zero prediction counts as an
/// error.
pub fn zero_one_loss(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    check_lengths(predictions, targets)?;
    if predictions.is_empty() {
        return Err(Error::Empty("zero_one_loss of empty vectors".into()));
    }
    let correct = predictions
        .iter()
        .zip(targets)
        .filter(|(&f, &y)| (2.0 * y - 1.0) * f > 0.0)
        .count();
    Ok(1.0 - correct as f64 / predictions.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const SLA: Loss = Loss::Sla { sigma: 0.1 };

    #[test]
    fn values_at_zero() {
        assert_eq!(SLA.value(0.0, 1.0), 0.5);
        assert_abs_diff_eq!(
            Loss::Logloss.value(0.0, 1.0),
            std::f64::consts::LN_2,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            Loss::Logloss.value(0.0, 0.0),
            std::f64::consts::LN_2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn sla_saturates() {
        // 1 - sigmoid(100) = e^-100 / (1 + e^-100)
        let v = SLA.value(10.0, 1.0);
        assert!(v < 1e-40 && v > 0.0);
        assert_abs_diff_eq!(v, (-100f64).exp(), epsilon = 1e-55);
        let mut prev = 1.0;
        for z in [0.0, 0.5, 1.0, 2.0, 5.0, 10.0] {
            let v = SLA.value(z, 1.0);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn derivatives_at_known_points() {
        assert_eq!(Loss::Logloss.derivative(0.0, 1.0), -0.5);
        assert_eq!(SLA.derivative(0.0, 1.0), -2.5);
        assert_eq!(SLA.derivative(0.0, 0.0), 2.5);
        assert_eq!(Loss::Mse.derivative(3.0, 1.0), 2.0);
        assert_eq!(Loss::Mse.value(3.0, 1.0), 2.0);
    }

    #[test]
    fn stable_for_extreme_arguments() {
        for z in [-1e3, -50.0, 50.0, 1e3] {
            for y in [0.0, 1.0] {
                for l in [SLA, Loss::Logloss] {
                    assert!(l.value(z, y).is_finite());
                    assert!(l.derivative(z, y).is_finite());
                }
            }
        }
        assert_abs_diff_eq!(Loss::Logloss.value(1e3, 0.0), 1e3, epsilon = 1e-9);
    }

    #[test]
    fn parses_loss_names() {
        assert_eq!("sla".parse::<Loss>().unwrap(), SLA);
        assert_eq!("sla:0.5".parse::<Loss>().unwrap(), Loss::Sla { sigma: 0.5 });
        assert_eq!("mse".parse::<Loss>().unwrap(), Loss::Mse);
        assert!("sla:-1".parse::<Loss>().is_err());
        assert!("hinge".parse::<Loss>().is_err());
    }

    #[test]
    fn target_validation() {
        assert!(SLA.validate_targets(&[0.0, 1.0]).is_ok());
        assert!(Loss::Logloss.validate_targets(&[0.5]).is_err());
        assert!(Loss::Mse.validate_targets(&[0.5]).is_ok());
    }

    #[test]
    fn exact_batch_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = batch_gradient(&Loss::Mse, &[1.0, 0.0], &[0.0, 0.0], 1.0, &mut rng).unwrap();
        assert_eq!(g, vec![1.0, 0.0]);
        assert!(batch_gradient(&Loss::Mse, &[1.0], &[0.0, 0.0], 1.0, &mut rng).is_err());
        assert!(batch_gradient(&Loss::Mse, &[1.0], &[0.0], 0.0, &mut rng).is_err());
        assert!(batch_gradient(&Loss::Mse, &[1.0], &[0.0], 1.5, &mut rng).is_err());
    }

    #[test]
    fn saturated_sla_gradient_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let y = [1.0, 0.0, 1.0, 0.0];
        let f: Vec<f64> = y.iter().map(|&y| 10.0 * (2.0 * y - 1.0)).collect();
        let g = batch_gradient(&SLA, &f, &y, 1.0, &mut rng).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-39), "{g:?}");
    }

    #[test]
    fn subsampled_gradient_is_unbiased() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let f = [0.3, -1.0, 2.0, 0.0];
        let y = [1.0, 0.0, 0.0, 1.0];
        let full = batch_gradient(&Loss::Logloss, &f, &y, 1.0, &mut rng).unwrap();
        let reps = 100_000;
        let mut sum = [0.0; 4];
        let mut sq = [0.0; 4];
        for _ in 0..reps {
            let g = batch_gradient(&Loss::Logloss, &f, &y, 0.5, &mut rng).unwrap();
            for i in 0..4 {
                sum[i] += g[i];
                sq[i] += g[i] * g[i];
            }
        }
        for i in 0..4 {
            let mean = sum[i] / reps as f64;
            let var = sq[i] / reps as f64 - mean * mean;
            let se = (var / reps as f64).sqrt();
            assert!(
                (mean - full[i]).abs() <= 3.0 * se + 1e-12,
                "coord {i}: {mean} vs {}",
                full[i]
            );
        }
    }

    #[test]
    fn zero_one_examples() {
        assert_eq!(zero_one_loss(&[1.0, -1.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(zero_one_loss(&[0.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(
            zero_one_loss(&[-1.0, -1.0, 1.0, 1.0], &[1.0, 0.0, 1.0, 0.0]).unwrap(),
            0.5
        );
        assert!(zero_one_loss(&[1.0], &[1.0, 0.0]).is_err());
    }
}
