use std::path::PathBuf;

use glnn::experiment::{
    emit_csv, emit_markdown, parse_csv, prepare_dataset, run_on_examples, Canonical, ExperimentConfig,
};
use glnn::LossKind;

fn config() -> ExperimentConfig {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
    ExperimentConfig {
        images: data.join("digits-images-idx3-ubyte.gz"),
        labels: data.join("digits-labels-idx1-ubyte.gz"),
        subset: Some(400),
        folds: 2,
        epochs: 1,
        batch_size: 64,
        ..ExperimentConfig::default()
    }
}

#[test]
fn untrained_network_is_at_chance() {
    let cfg = ExperimentConfig {
        epochs: 0,
        subset: Some(2000),
        folds: 4,
        ..config()
    };
    let examples = prepare_dataset(&cfg).unwrap();
    let report = run_on_examples(&cfg, &examples).unwrap();
    for f in &report.folds {
        assert!((2.0..=25.0).contains(&f.accuracy), "fold {}: {}", f.fold, f.accuracy);
        assert!(f.loss_traces.iter().all(Vec::is_empty));
    }
    assert!((5.0..=18.0).contains(&report.mean), "mean {}", report.mean);
}

#[test]
fn same_seed_same_run() {
    let cfg = config();
    let examples = prepare_dataset(&cfg).unwrap();
    let a = run_on_examples(&cfg, &examples).unwrap();
    let b = run_on_examples(&cfg, &prepare_dataset(&cfg).unwrap()).unwrap();
    assert_eq!(a.accuracies(), b.accuracies());
    for (fa, fb) in a.folds.iter().zip(&b.folds) {
        assert_eq!(fa.loss_traces, fb.loss_traces);
        assert_eq!(fa.final_params, fb.final_params);
    }
}

#[test]
fn different_seed_changes_the_data() {
    let a = prepare_dataset(&config()).unwrap();
    let b = prepare_dataset(&ExperimentConfig { seed: 1, ..config() }).unwrap();
    assert_ne!(a, b);
}

#[test]
fn training_reduces_the_loss_and_beats_chance() {
    let cfg = ExperimentConfig {
        epochs: 3,
        ..config()
    };
    for which in Canonical::ALL {
        let cfg = cfg.with_canonical(which);
        let report = run_on_examples(&cfg, &prepare_dataset(&cfg).unwrap()).unwrap();
        assert!(report.traces_finite());
        assert!(report.is_consistent());
        for f in &report.folds {
            let trace = &f.loss_traces[0];
            assert_eq!(trace.len(), 3);
            assert!(trace[2] < trace[0], "{}: {trace:?}", cfg.label());
            if cfg.loss == LossKind::Proposed {
                assert!(trace.iter().all(|&l| (2.5..10.0).contains(&l)));
            }
        }
        assert!(report.mean > 30.0, "{}: {}", cfg.label(), report.mean);
    }
}

#[test]
fn report_csv_round_trips() {
    let cfg = config();
    let report = run_on_examples(&cfg, &prepare_dataset(&cfg).unwrap()).unwrap();
    let rows = parse_csv(&emit_csv(std::slice::from_ref(&report))).unwrap();
    assert_eq!(rows.len(), cfg.folds);
    for (row, fold) in rows.iter().zip(&report.folds) {
        assert_eq!(row.loss, "proposed");
        assert!(row.momentum);
        assert_eq!(row.eta, cfg.eta);
        assert_eq!(row.alpha, cfg.alpha);
        assert_eq!(row.fold, fold.fold);
        assert_eq!(row.accuracy, fold.accuracy);
    }
    let md = emit_markdown(&[report]);
    assert!(md.starts_with("| Loss | avg. accuracy (%) | std |"));
}
