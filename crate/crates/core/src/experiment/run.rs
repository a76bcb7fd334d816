use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;

use super::config::ExperimentConfig;
use super::report::{ExperimentReport, FoldResult};
use crate::data::{self, argmax, kfold_split, LabeledImage};
use crate::error::{Error, Result};
use crate::loss::{LossBatch, LossKind};
use crate::nn::{Mode, NetworkSpec, ParamSet};
use crate::optim::Optimizer;
use crate::seed::{self, Purpose};

const EVAL_BATCH: usize = 256;

/// Loads the corpus named by `cfg`, takes the seeded subset if one is
/// requested, and applies the per-example random rotation.
pub fn prepare_dataset(cfg: &ExperimentConfig) -> Result<Vec<LabeledImage>> {
    let all = data::load_labeled(&cfg.images, &cfg.labels)?;
    let chosen = match cfg.subset {
        Some(n) => data::select_subset(&all, n, cfg.seed)?,
        None => all,
    };
    data::augment_rotations(&chosen, cfg.angle_range, cfg.seed)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let examples = prepare_dataset(cfg)?;
    run_on_examples(cfg, &examples)
}

/// Cross-validates `cfg` on already prepared examples.
pub fn run_on_examples(cfg: &ExperimentConfig, examples: &[LabeledImage]) -> Result<ExperimentReport> {
    cfg.validate()?;
    let started = Instant::now();
    let plan = kfold_split(examples.len(), cfg.folds, cfg.seed)?;
    let spec = NetworkSpec::digit_classifier();

    let run_fold = |fold: usize| -> Result<FoldResult> {
        let train: Vec<&LabeledImage> = plan.train_indices(fold).into_iter().map(|i| &examples[i]).collect();
        let test: Vec<&LabeledImage> = plan.test_indices(fold).into_iter().map(|i| &examples[i]).collect();
        let mut accuracies = Vec::with_capacity(cfg.repeats);
        let mut traces = Vec::with_capacity(cfg.repeats);
        let mut last = ParamSet::default();
        for repeat in 0..cfg.repeats {
            let stream_id = (fold * cfg.repeats + repeat) as u64;
            let mut params = spec.init_params(&mut seed::stream(cfg.seed, Purpose::Init, stream_id));
            let mut optimizer = Optimizer::new(cfg.optimizer(), &params)?;
            let mut order_rng = seed::stream(cfg.seed, Purpose::EpochOrder, stream_id);
            let mut trace = Vec::with_capacity(cfg.epochs);
            for epoch in 0..cfg.epochs {
                let loss = train_epoch(
                    &spec,
                    &mut params,
                    &mut optimizer,
                    &train,
                    cfg.loss,
                    cfg.batch_size,
                    &mut order_rng,
                )
                .map_err(|e| match e {
                    Error::NonFiniteLoss { batch, .. } => Error::NonFiniteLoss { fold, epoch, batch },
                    other => other,
                })?;
                trace.push(loss);
            }
            let acc = evaluate(&spec, &params, &test)?;
            log::info!(
                "{}: fold {fold} repeat {repeat} accuracy {acc:.2}% final loss {:.5}",
                cfg.label(),
                trace.last().copied().unwrap_or(f64::NAN)
            );
            accuracies.push(acc);
            traces.push(trace);
            last = params;
        }
        let accuracy = accuracies.iter().sum::<f64>() / accuracies.len() as f64;
        Ok(FoldResult {
            fold,
            accuracy,
            repeat_accuracies: accuracies,
            loss_traces: traces,
            final_params: last,
        })
    };

    #[cfg(feature = "parallel")]
    let folds = {
        use rayon::prelude::*;
        (0..cfg.folds).into_par_iter().map(run_fold).collect::<Result<Vec<_>>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let folds = (0..cfg.folds).map(run_fold).collect::<Result<Vec<_>>>()?;

    ExperimentReport::new(cfg.clone(), folds, started.elapsed().as_secs_f64())
}

/// One pass over `train` in a freshly shuffled order. Returns the
/// example-weighted mean batch loss.
pub fn train_epoch(
    spec: &NetworkSpec,
    params: &mut ParamSet,
    optimizer: &mut Optimizer,
    train: &[&LabeledImage],
    loss: LossKind,
    batch_size: usize,
    rng: &mut impl Rng,
) -> Result<f64> {
    let mut order: Vec<usize> = (0..train.len()).collect();
    order.shuffle(rng);
    let mut total = 0.0;
    for (batch_idx, chunk) in order.chunks(batch_size).enumerate() {
        let (x, t) = data::to_batch(chunk.iter().map(|&i| train[i]));
        let (y, cache) = spec.forward_train(params, &x)?;
        let batch = LossBatch::new(&y, &t)?;
        let value = loss.loss(&batch);
        if !value.is_finite() {
            return Err(Error::NonFiniteLoss {
                fold: 0,
                epoch: 0,
                batch: batch_idx,
            });
        }
        let grads = spec.backward(params, &cache, &loss.grad(&batch))?;
        optimizer.step(params, &grads)?;
        total += value * chunk.len() as f64;
    }
    Ok(total / train.len() as f64)
}

/// Argmax accuracy in percent. A network whose batch-norm layers never saw
/// a training batch is evaluated with per-batch statistics.
pub fn evaluate(spec: &NetworkSpec, params: &ParamSet, test: &[&LabeledImage]) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::InvalidArgument("empty evaluation set".into()));
    }
    let mode = if spec.has_running_stats(params) {
        Mode::Infer
    } else {
        Mode::Train
    };
    let mut correct = 0usize;
    for chunk in test.chunks(EVAL_BATCH) {
        let (x, _) = data::to_batch(chunk.iter().copied());
        let (y, _) = spec.forward(params, &x, mode)?;
        correct += y
            .data()
            .chunks(spec.classes())
            .zip(chunk)
            .filter(|(row, ex)| argmax(row) == usize::from(ex.label()))
            .count();
    }
    Ok(100.0 * correct as f64 / test.len() as f64)
}
