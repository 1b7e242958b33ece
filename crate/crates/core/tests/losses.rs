use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sglb::losses::{zero_one_loss, Loss};

fn central_difference(loss: &Loss, z: f64, y: f64, h: f64) -> f64 {
    (loss.value(z + h, y) - loss.value(z - h, y)) / (2.0 * h)
}

fn random_point(rng: &mut ChaCha8Rng, loss: &Loss) -> (f64, f64) {
    let z = rng.random_range(-3.0..3.0);
    let y = if loss.is_classification() {
        f64::from(rng.random_bool(0.5))
    } else {
        rng.random_range(-3.0..3.0)
    };
    (z, y)
}

#[test]
fn derivatives_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for loss in [Loss::Sla { sigma: 0.1 }, Loss::Logloss, Loss::Mse] {
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let (z, y) = random_point(&mut rng, &loss);
            let dz = loss.derivative(z, y);
            let fd = central_difference(&loss, z, y, 1e-5);
            worst = worst.max((dz - fd).abs() / (1.0 + dz.abs()));
        }
        assert!(
            worst <= 1e-6,
            "{}: worst relative error {worst:e}",
            loss.name()
        );
    }
}

#[test]
fn derivative_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for sigma in [0.01, 0.1, 1.0] {
        let sla = Loss::Sla { sigma };
        for _ in 0..1000 {
            let z = rng.random_range(-50.0..50.0) * sigma;
            let y = f64::from(rng.random_bool(0.5));
            assert!(sla.derivative(z, y).abs() <= 0.25 / sigma + 1e-15);
            assert!(Loss::Logloss.derivative(z / sigma, y).abs() <= 1.0);
        }
        // the bound is attained at the origin
        assert_eq!(sla.derivative(0.0, 1.0).abs(), 0.25 / sigma);
    }
}

#[test]
fn sla_approaches_zero_one_loss() {
    let sla = Loss::Sla { sigma: 1e-4 };
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let n = 200;
        let f: Vec<f64> = (0..n)
            .map(|_| {
                let m = rng.random_range(0.1..3.0);
                if rng.random_bool(0.5) {
                    m
                } else {
                    -m
                }
            })
            .collect();
        let y: Vec<f64> = (0..n).map(|_| f64::from(rng.random_bool(0.5))).collect();
        let smooth = sla.mean(&f, &y).unwrap();
        let exact = zero_one_loss(&f, &y).unwrap();
        assert!((smooth - exact).abs() <= 1e-3, "{smooth} vs {exact}");
    }
}

proptest! {
    #[test]
    fn sla_is_a_smoothed_step(z in -10.0f64..10.0, sigma in 0.01f64..2.0) {
        let l = Loss::Sla { sigma };
        let (pos, neg) = (l.value(z, 1.0), l.value(z, 0.0));
        prop_assert!((0.0..=1.0).contains(&pos));
        prop_assert!((pos + neg - 1.0).abs() < 1e-12);
        prop_assert!(l.value(z.abs(), 1.0) <= 0.5);
    }

    #[test]
    fn logloss_is_convex_in_z(z in -20.0f64..20.0, y in 0u8..=1) {
        let y = f64::from(y);
        let h = 1e-3;
        let l = Loss::Logloss;
        prop_assert!(l.derivative(z + h, y) >= l.derivative(z, y));
        prop_assert!(l.value(z, y) >= 0.0);
    }
}
