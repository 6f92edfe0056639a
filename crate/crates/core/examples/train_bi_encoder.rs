//! Trains the reference bi-encoder on a generated corpus where each
//! pseudo-word always carries the same sense, then tags a new sentence.
//!
//! cargo run --release --example train_bi_encoder [learning_rate]

use std::time::Instant;

use usas_core::bi_encoder::{validation_accuracy, BiEncoder, EncoderConfig, NeuralTagger, TrainConfig};
use usas_core::silver::{make_dataset, SplitSpec, SplitUnit};
use usas_core::synthetic::{separable_corpus, SyntheticConfig};
use usas_core::token::sentence;
use usas_core::{SenseInventory, Tagger};

fn main() -> usas_core::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let lr: f64 = std::env::args().nth(1).map_or(20.0, |s| s.parse().expect("learning rate"));

    let inventory = SenseInventory::usas();
    let synthetic = separable_corpus(&inventory, &SyntheticConfig::default())?;
    let split = SplitSpec::new(SplitUnit::Document, 90, 10)?;
    let silver = make_dataset(&synthetic.corpus, &inventory, &split, 1)?;
    let train: Vec<_> = silver.train.iter().map(|r| r.to_example()).collect();
    let val: Vec<_> = silver.validation.iter().map(|r| r.to_example()).collect();
    println!("{} training and {} validation examples", train.len(), val.len());

    let encoder = EncoderConfig {
        dim: 32,
        ..EncoderConfig::default()
    };
    let vocab = BiEncoder::build_vocabulary(&train, &inventory, encoder.oov_buckets);
    let model = BiEncoder::new(&encoder, vocab, &inventory)?;
    let config = TrainConfig {
        learning_rate: lr,
        max_epochs: 3,
        ..TrainConfig::default()
    };

    let start = Instant::now();
    let outcome = usas_core::bi_encoder::train(model, &train, &val, &config)?;
    let best = outcome.best_record();
    println!(
        "best checkpoint: epoch {} segment {} (4-way {:.3}, top-1 {:.3}) after {:.1?}",
        best.epoch,
        best.segment,
        best.val_four_way,
        best.val_top1,
        start.elapsed()
    );
    let (four_way, top1) = validation_accuracy(&outcome.model, &val)?;
    println!("recomputed: 4-way {four_way:.3}, top-1 {top1:.3}");

    let (word, sense) = synthetic.lexicon.iter().next().expect("non-empty lexicon");
    let tagger = NeuralTagger::new(outcome.model, 3)?;
    let tokens = sentence([("filler1", "filler1", "X"), (word.as_str(), word.as_str(), "NOUN")]);
    let tags = tagger.tag_sentence(&tokens);
    println!("{word} (expected {sense}): {}", tags[1].top_k_strings(3).join(" "));
    Ok(())
}
