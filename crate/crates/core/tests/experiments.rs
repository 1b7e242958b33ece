use sglb::experiments::{run_experiment, ExperimentSpec};

fn small(seed: u64) -> ExperimentSpec {
    let mut spec = ExperimentSpec::synthetic_default(seed).with_iterations(20);
    spec.folds = 4;
    spec.train_size = 100;
    spec.test_size = 100;
    spec
}

#[test]
fn runs_are_reproducible() {
    let a = run_experiment(&small(3)).unwrap();
    let b = run_experiment(&small(3)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.table(), b.table());
    assert_ne!(a, run_experiment(&small(4)).unwrap());
}

#[test]
fn smoke_run_stays_in_range() {
    let mut spec = small(1);
    spec.folds = 2;
    spec.train_size = 10;
    spec.test_size = 10;
    let r = run_experiment(&spec).unwrap();
    assert_eq!(r.methods.len(), 4);
    for m in &r.methods {
        assert_eq!(m.fold_losses.len(), 2);
        assert!(m.fold_losses.iter().all(|l| (0.0..=1.0).contains(l)));
        if let Some(p) = m.p_value {
            assert!((0.0..=1.0).contains(&p));
        }
    }
    assert!(r.method(&r.reference).unwrap().p_value.is_none());
}

#[test]
fn identical_methods_have_zero_paired_difference() {
    let mut spec = small(9);
    let copy = spec.methods[3].clone();
    spec.methods.push(sglb::experiments::MethodSpec {
        name: "copy".into(),
        ..copy
    });
    let r = run_experiment(&spec).unwrap();
    let copy = r.method("copy").unwrap();
    assert_eq!(
        copy.fold_losses,
        r.method(&r.reference).unwrap().fold_losses
    );
    assert_eq!(copy.p_value, Some(1.0));
}

#[test]
fn invalid_specs_are_rejected() {
    let mut spec = small(1);
    spec.folds = 1;
    assert!(run_experiment(&spec).is_err());
    let mut spec = small(1);
    spec.reference = "missing".into();
    assert!(run_experiment(&spec).is_err());
}
