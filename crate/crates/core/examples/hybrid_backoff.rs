//! Hybrid tagging: lexicon hits pass through, and words the lexicons do not
//! cover get the bi-encoder's top-k senses instead of Z99.
//!
//! cargo run --release --example hybrid_backoff

use std::path::Path;

use usas_core::bi_encoder::{BiEncoder, EncoderConfig, NeuralTagger, TrainConfig};
use usas_core::silver::{make_dataset, SplitSpec, SplitUnit};
use usas_core::synthetic::{separable_corpus, SyntheticConfig};
use usas_core::{HybridConfig, HybridTagger, MweLexicon, RuleTagger, SenseInventory, SingleWordLexicon, Tagger};

fn main() -> usas_core::Result<()> {
    let inventory = SenseInventory::usas();
    let synthetic = separable_corpus(
        &inventory,
        &SyntheticConfig {
            examples: 1000,
            ..SyntheticConfig::default()
        },
    )?;
    let silver = make_dataset(&synthetic.corpus, &inventory, &SplitSpec::parse("90:10", SplitUnit::Document)?, 3)?;
    let train: Vec<_> = silver.train.iter().map(|r| r.to_example()).collect();
    let val: Vec<_> = silver.validation.iter().map(|r| r.to_example()).collect();

    let encoder = EncoderConfig {
        dim: 16,
        ..EncoderConfig::default()
    };
    let vocab = BiEncoder::build_vocabulary(&train, &inventory, encoder.oov_buckets);
    let model = BiEncoder::new(&encoder, vocab, &inventory)?;
    let config = TrainConfig {
        learning_rate: 20.0,
        max_epochs: 2,
        ..TrainConfig::default()
    };
    let model = usas_core::bi_encoder::train(model, &train, &val, &config)?.model;

    // The lexicon knows half of the pseudo-words; the rest are left to the
    // neural model.
    let rows: String = synthetic
        .lexicon
        .iter()
        .step_by(2)
        .map(|(w, l)| format!("{w}\tNOUN\t{l}\n"))
        .collect();
    let single = SingleWordLexicon::parse(&rows, Path::new("half.tsv"), None)?;
    let rule = RuleTagger::new(single, MweLexicon::default());
    let hybrid = HybridTagger::new(rule, NeuralTagger::new(model, 1)?, HybridConfig { k_backoff: 3 })?;

    let words: Vec<&str> = synthetic.lexicon.keys().take(4).map(String::as_str).collect();
    let tokens = usas_core::token::sentence(
        ["filler1", words[0], "filler2", words[1], words[2], words[3]].map(|w| (w, w, "NOUN")),
    );
    for (tok, pred) in tokens.iter().zip(hybrid.tag_sentence(&tokens)) {
        let expected = synthetic.lexicon.get(&tok.text).map_or("-".to_owned(), |l| l.to_string());
        println!(
            "{:<10} {:<12} expected {:<6} got {}",
            tok.text,
            pred.provenance.to_string(),
            expected,
            pred.top_k_strings(3).join(" ")
        );
    }
    Ok(())
}
