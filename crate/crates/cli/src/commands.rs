use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use serde_json::json;

use sglb::data::load_features_csv;
use sglb::diagnostics::{self, GibbsConfig};
use sglb::experiments::{run_experiment, ExperimentSpec};
use sglb::model_io::{load_model, save_model};
use sglb::rng::{stream, Stream};
use sglb::trees::SelectionParams;
use sglb::{
    compute_borders, evaluate, generate_synthetic, load_csv, predict as predict_scores, quantize,
    train as fit, Loss, Mode, TrainConfig,
};

use crate::{
    BenchArgs, Check, DiagnoseArgs, EvalArgs, Failure, LossArg, ModeArg, PredictArgs, PredictType,
    SynthArgs, TrainArgs,
};

type CmdResult = Result<(), Failure>;

fn loss_from(arg: LossArg, sigma: f64) -> Result<Loss, Failure> {
    Ok(match arg {
        LossArg::Sla => Loss::sla(sigma).map_err(|e| Failure::Usage(e.to_string()))?,
        LossArg::Logloss => Loss::Logloss,
        LossArg::Mse => Loss::Mse,
    })
}

pub fn train(a: TrainArgs) -> CmdResult {
    let config = TrainConfig {
        mode: match a.mode {
            ModeArg::Gb => Mode::Gb,
            ModeArg::Sgb => Mode::Sgb,
            ModeArg::Sglb => Mode::Sglb,
        },
        loss: loss_from(a.loss, a.sla_sigma)?,
        learning_rate: a.learning_rate,
        diffusion_temperature: a.diffusion_temperature,
        model_shrink_rate: a.model_shrink_rate,
        random_strength: a.random_strength,
        depth: a.depth as usize,
        border_count: a.border_count as usize,
        iterations: a.iterations,
        subsample: a.subsample,
        use_best_model: a.use_best_model,
        seed: a.seed,
    };
    config
        .validate()
        .map_err(|e| Failure::Usage(e.to_string()))?;

    let has_header = !a.data.no_header;
    let data = load_csv(&a.data.data, &a.data.target, has_header)?;
    config.loss.validate_targets(data.targets())?;
    let borders = compute_borders(&data, config.border_count)?;
    let q = quantize(&data, &borders)?;
    let valid = match &a.valid {
        Some(path) => {
            let v = load_csv(path, &a.data.target, has_header)?;
            Some(quantize(&v, &borders)?)
        }
        None => None,
    };
    let (ensemble, trace) = fit(&config, &q, valid.as_ref())?;
    save_model(&ensemble, &a.model)?;

    println!("trees: {}", ensemble.len());
    if let Some(l) = trace.train_loss.last() {
        println!("train {}: {l}", config.loss.name());
    }
    if let Some(l) = trace.valid_loss.as_ref().and_then(|v| v.last()) {
        println!("valid {}: {l}", config.loss.name());
    }
    if let Some(i) = trace.best_iteration {
        println!("best iteration: {}", i + 1);
    }
    Ok(())
}

pub fn predict(a: PredictArgs) -> CmdResult {
    let model = load_model(&a.model)?;
    let (features, n_features) = load_features_csv(&a.data, a.target.as_ref(), !a.no_header)?;
    let raw = predict_scores(&model, &features, n_features)?;
    let mut text = String::with_capacity(raw.len() * 20);
    for f in raw {
        match a.predict_type {
            PredictType::Raw => writeln!(text, "{f}").expect("writing to a String"),
            PredictType::Class => {
                writeln!(text, "{}", u8::from(f > 0.0)).expect("writing to a String")
            }
        }
    }
    match &a.out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(())
}

pub fn eval(a: EvalArgs) -> CmdResult {
    let model = load_model(&a.model)?;
    let data = load_csv(&a.data.data, &a.data.target, !a.data.no_header)?;
    let trained = model.metadata().map(|m| m.loss);
    let loss = match (a.loss, trained) {
        (Some(arg), Some(Loss::Sla { sigma })) => loss_from(arg, a.sla_sigma.unwrap_or(sigma))?,
        (Some(arg), _) => loss_from(arg, a.sla_sigma.unwrap_or(0.1))?,
        (None, Some(Loss::Sla { sigma })) => loss_from(LossArg::Sla, a.sla_sigma.unwrap_or(sigma))?,
        (None, Some(l)) => l,
        (None, None) => return Err(Failure::Usage("model has no metadata; pass --loss".into())),
    };
    loss.validate_targets(data.targets())?;
    let (value, zero_one) = evaluate(&model, &data, &loss)?;
    println!("{}: {value}", loss.name());
    println!("zero-one: {zero_one}");
    Ok(())
}

fn write_records<T: Serialize>(path: &Path, records: &[T]) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()
        .with_context(|| format!("writing {}", path.display()))
}

pub fn bench_synthetic(a: BenchArgs) -> CmdResult {
    let mut spec = ExperimentSpec::synthetic_default(a.seed).with_iterations(a.iterations);
    spec.folds = a.folds as usize;
    spec.train_size = a.train_size as usize;
    spec.test_size = a.test_size as usize;
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let result = run_experiment(&spec)?;
    print!("{}", result.table());
    if let Some(out) = &a.out {
        write_records(out, &result.methods)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CheckRecord {
    check: &'static str,
    metrics: serde_json::Value,
    passed: bool,
}

fn projector_check(seed: u64) -> sglb::Result<CheckRecord> {
    let data = generate_synthetic(200, seed)?;
    let q = quantize(&data, &compute_borders(&data, 16)?)?;
    let mut rng = stream(seed, Stream::Diagnostics);
    let r = diagnostics::greedy_projector_suite(&q, 4, 25, &mut rng)?;
    Ok(CheckRecord {
        check: "projector",
        passed: r.passed,
        metrics: serde_json::to_value(&r).map_err(sglb::Error::from)?,
    })
}

fn pinv_check(seed: u64) -> sglb::Result<CheckRecord> {
    let r = diagnostics::leaf_oracle_suite(500, seed)?;
    Ok(CheckRecord {
        check: "pinv",
        passed: r.passed,
        metrics: serde_json::to_value(&r).map_err(sglb::Error::from)?,
    })
}

/// Noise-only structure average: exact `N I` when every row is isolated,
/// symmetric and positive on the sampled span for greedy trees.
fn pinfinity_check(seed: u64) -> sglb::Result<CheckRecord> {
    let mut rng = stream(seed, Stream::Diagnostics);
    let sel = SelectionParams::deterministic();

    let iso = diagnostics::isolating_dataset(&[0.0; 8])?;
    let est = diagnostics::estimate_p_infinity(&iso, &sel, 3, 50, &mut rng)?;
    let identity = est.identity_deviation();

    let data = generate_synthetic(40, seed)?;
    let q = quantize(&data, &compute_borders(&data, 4)?)?;
    let est = diagnostics::estimate_p_infinity(&q, &sel, 2, 2000, &mut rng)?;
    let asym = est.max_asymmetry_z();
    let min_eig = est.min_eigenvalue_on_span();
    Ok(CheckRecord {
        check: "pinfinity",
        metrics: json!({
            "identity_case_max_error": identity,
            "samples": est.samples,
            "distinct_images": est.images.len(),
            "max_asymmetry_z": asym,
            "min_eigenvalue_on_span": min_eig,
        }),
        passed: identity == 0.0 && asym <= 3.0 && min_eig > 0.0,
    })
}

fn gibbs_check(seed: u64) -> sglb::Result<CheckRecord> {
    let cfg = GibbsConfig {
        seed,
        ..GibbsConfig::reference()
    };
    let r = diagnostics::gibbs_moment_test(&cfg)?;
    Ok(CheckRecord {
        check: "gibbs",
        passed: r.passed,
        metrics: json!({
            "config": cfg,
            "max_abs_z": r.max_abs_z(),
            "report": r,
        }),
    })
}

pub fn diagnose(a: DiagnoseArgs) -> CmdResult {
    let wanted = |c: Check| a.check == c || a.check == Check::All;
    let mut records = Vec::new();
    if wanted(Check::Projector) {
        records.push(projector_check(a.seed)?);
    }
    if wanted(Check::Pinv) {
        records.push(pinv_check(a.seed)?);
    }
    if wanted(Check::Pinfinity) {
        records.push(pinfinity_check(a.seed)?);
    }
    if wanted(Check::Gibbs) {
        records.push(gibbs_check(a.seed)?);
    }
    for r in &records {
        println!("{}: {}", r.check, if r.passed { "pass" } else { "FAIL" });
        if let serde_json::Value::Object(map) = &r.metrics {
            for (k, v) in map {
                if !v.is_object() {
                    println!("  {k}: {v}");
                }
            }
        }
    }
    if let Some(out) = &a.out {
        write_records(out, &records)?;
    }
    let failed: Vec<&str> = records
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.check)
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::CheckFailed(failed.join(", ")))
    }
}

pub fn synth(a: SynthArgs) -> CmdResult {
    let n = usize::try_from(a.n).map_err(|_| Failure::Usage(format!("--n {} too large", a.n)))?;
    let data = generate_synthetic(n, a.seed)?;
    data.save_csv(&a.out, "y")?;
    Ok(())
}
