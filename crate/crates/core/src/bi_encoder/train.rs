use std::path::{Path, PathBuf};

use log::info;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::checkpoint::write_checkpoint;
use super::loss::Gradients;
use super::{dot, rank_scores, score, BiEncoder, TrainingExample};
use crate::error::{Error, Result};

/// Optimisation settings. The learning rate default suits the reference
/// encoder; fine-tuning a pretrained transformer would use about 1e-5.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Checkpoints without a validation improvement before stopping.
    pub patience: usize,
    /// Checkpoints per epoch.
    pub segments: usize,
    /// Seed for the per-epoch shuffle.
    pub seed: u64,
    pub checkpoint_dir: Option<PathBuf>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            batch_size: 64,
            max_epochs: 10,
            patience: 3,
            segments: 5,
            seed: 42,
            checkpoint_dir: None,
        }
    }
}

/// One line of the training log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointRecord {
    pub epoch: usize,
    pub segment: usize,
    pub examples_seen: usize,
    pub mean_loss: f64,
    pub val_four_way: f64,
    pub val_top1: f64,
    pub checkpoint: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    /// Parameters of the best checkpoint.
    pub model: BiEncoder,
    pub records: Vec<CheckpointRecord>,
    pub best: usize,
    pub stopped_early: bool,
}

impl TrainOutcome {
    pub fn best_record(&self) -> &CheckpointRecord {
        &self.records[self.best]
    }
}

/// Fraction of examples whose positive strictly outscores all three
/// negatives, and fraction whose top-1 over the whole label set is the
/// positive.
pub fn validation_accuracy(model: &BiEncoder, validation: &[TrainingExample]) -> Result<(f64, f64)> {
    if validation.is_empty() {
        return Ok((0.0, 0.0));
    }
    let gloss = model.gloss_matrix();
    let mut four_way = 0usize;
    let mut top1 = 0usize;
    for ex in validation {
        let u = model.encode_context(&ex.tokens, ex.target_index)?;
        let mut s = [0.0; 4];
        for (q, label) in ex.candidates().into_iter().enumerate() {
            s[q] = dot(&u.0, gloss.row(model.label_id(label)?));
        }
        if s[1..].iter().all(|&x| s[0] > x) {
            four_way += 1;
        }
        let scores = score(&u, &gloss)?;
        if rank_scores(&scores, gloss.label_order(), 1)[0].0 == ex.positive {
            top1 += 1;
        }
    }
    let n = validation.len() as f64;
    Ok((four_way as f64 / n, top1 as f64 / n))
}

fn segment_bounds(n: usize, segments: usize) -> Vec<usize> {
    let mut bounds: Vec<usize> = (1..=segments).map(|k| k * n / segments).collect();
    bounds.dedup();
    bounds.retain(|&b| b > 0);
    bounds
}

fn checkpoint_path(dir: &Path, epoch: usize, segment: usize) -> PathBuf {
    dir.join(format!("checkpoint-e{epoch:02}-s{segment}.bin"))
}

/// Mini-batch gradient descent on the mean batch loss. After every
/// `1/segments` of an epoch the model is checkpointed and validated; training
/// stops once validation 4-way accuracy has not improved for `patience`
/// checkpoints. Returns the best checkpoint.
pub fn train(
    mut model: BiEncoder,
    train_set: &[TrainingExample],
    validation: &[TrainingExample],
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    if train_set.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if config.batch_size == 0 || config.segments == 0 {
        return Err(Error::Config("batch_size and segments must be at least 1".into()));
    }
    for ex in train_set.iter().chain(validation) {
        ex.validate()?;
        for label in ex.candidates() {
            model.label_id(label)?;
        }
    }
    if let Some(dir) = &config.checkpoint_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let bounds = segment_bounds(train_set.len(), config.segments);

    let mut records = Vec::new();
    let mut best: Option<(usize, f64, BiEncoder)> = None;
    let mut since_best = 0usize;
    let mut seen = 0usize;
    let mut stopped_early = false;

    'epochs: for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let mut start = 0;
        for (segment, &end) in bounds.iter().enumerate() {
            let mut loss_sum = 0.0;
            for batch in order[start..end].chunks(config.batch_size) {
                let mut grad = Gradients::default();
                for &i in batch {
                    let (l, g) = model.loss(&train_set[i])?;
                    loss_sum += l;
                    grad.accumulate(&g, 1.0 / batch.len() as f64);
                }
                grad.apply(model.encoder_mut(), config.learning_rate);
            }
            let count = end - start;
            seen += count;
            start = end;

            let (four_way, top1) = validation_accuracy(&model, validation)?;
            let path = match &config.checkpoint_dir {
                Some(dir) => {
                    let p = checkpoint_path(dir, epoch, segment + 1);
                    write_checkpoint(&model, &p)?;
                    Some(p)
                }
                None => None,
            };
            let record = CheckpointRecord {
                epoch,
                segment: segment + 1,
                examples_seen: seen,
                mean_loss: loss_sum / count as f64,
                val_four_way: four_way,
                val_top1: top1,
                checkpoint: path,
            };
            info!(
                "epoch {} segment {}: seen {} loss {:.5} val 4-way {:.4} val top-1 {:.4}",
                record.epoch, record.segment, record.examples_seen, record.mean_loss, four_way, top1
            );
            records.push(record);

            let improved = match &best {
                None => true,
                Some((_, acc, _)) => validation.is_empty() || four_way > *acc,
            };
            if improved {
                best = Some((records.len() - 1, four_way, model.clone()));
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= config.patience {
                    stopped_early = true;
                    break 'epochs;
                }
            }
        }
    }

    let (best, _, model) = best.expect("at least one checkpoint was recorded");
    Ok(TrainOutcome {
        model,
        records,
        best,
        stopped_early,
    })
}
