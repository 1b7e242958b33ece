use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sglb::model_io::{from_json, load_model, save_model, to_json};
use sglb::{
    compute_borders, generate_synthetic, predict, quantize, train, Error, Loss, Mode, TrainConfig,
};

fn random_rows(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n * 3).map(|_| rng.random_range(-4.0..4.0)).collect()
}

fn trained(mode: Mode, iterations: usize, shrink: f64) -> sglb::Ensemble {
    let d = generate_synthetic(400, 21).unwrap();
    let q = quantize(&d, &compute_borders(&d, 16).unwrap()).unwrap();
    let config = TrainConfig {
        mode,
        depth: 4,
        border_count: 16,
        iterations,
        model_shrink_rate: shrink,
        seed: 5,
        ..TrainConfig::default()
    };
    train(&config, &q, None).unwrap().0
}

#[test]
fn hundred_tree_model_round_trips() {
    let model = trained(Mode::Sgb, 100, 0.0);
    assert_eq!(model.len(), 100);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    save_model(&model, &path).unwrap();
    let back = load_model(&path).unwrap();
    let rows = random_rows(1000, 1);
    let a = predict(&model, &rows, 3).unwrap();
    let b = predict(&back, &rows, 3).unwrap();
    assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    assert_eq!(back.metadata(), model.metadata());
}

#[test]
fn shrunk_weights_survive_serialization() {
    let model = trained(Mode::Sglb, 60, 0.5);
    let weights = model.weights();
    assert!(weights[0] < 1.0 && weights[59] == 1.0);
    let text = to_json(&model).unwrap();
    let back = from_json(&text).unwrap();
    assert_eq!(back.weights(), weights);
    let rows = random_rows(1000, 2);
    assert_eq!(
        predict(&model, &rows, 3).unwrap(),
        predict(&back, &rows, 3).unwrap()
    );
    assert_eq!(to_json(&back).unwrap(), text);
}

#[test]
fn infinite_temperature_is_stored_as_null() {
    let d = generate_synthetic(50, 1).unwrap();
    let q = quantize(&d, &compute_borders(&d, 4).unwrap()).unwrap();
    let config = TrainConfig {
        mode: Mode::Sglb,
        diffusion_temperature: f64::INFINITY,
        loss: Loss::Logloss,
        depth: 2,
        border_count: 4,
        iterations: 3,
        ..TrainConfig::default()
    };
    let model = train(&config, &q, None).unwrap().0;
    let text = to_json(&model).unwrap();
    assert!(text.contains("\"diffusion_temperature\":null"));
    let back = from_json(&text).unwrap();
    assert_eq!(
        back.metadata().unwrap().diffusion_temperature,
        f64::INFINITY
    );
    assert_eq!(back.metadata().unwrap().loss, Loss::Logloss);
}

#[test]
fn corrupted_files_are_rejected() {
    let text = to_json(&trained(Mode::Gb, 5, 0.0)).unwrap();
    let future = text.replace("\"format_version\":1", "\"format_version\":7");
    assert!(matches!(
        from_json(&future),
        Err(Error::VersionMismatch { found: 7, .. })
    ));
    let truncated = &text[..text.len() / 2];
    assert!(matches!(from_json(truncated), Err(Error::Json(_))));
    let extra = text.replacen('{', "{\"extra\":1,", 1);
    assert!(from_json(&extra).is_err());
    let no_version = text.replace("\"format_version\":1,", "");
    assert!(matches!(
        from_json(&no_version),
        Err(Error::InvalidModel(_))
    ));
}
