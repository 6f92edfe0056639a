//! Builds a silver training set from a tagged corpus: one example per
//! membership label, with one negative drawn from each sampling
//! distribution.
//!
//! cargo run --example silver_dataset

use usas_core::silver::{distribution_report, make_dataset, SamplingKind, SplitSpec, SplitUnit};
use usas_core::synthetic::{separable_corpus, SyntheticConfig};
use usas_core::SenseInventory;

fn main() -> usas_core::Result<()> {
    let inventory = SenseInventory::usas();
    let config = SyntheticConfig {
        examples: 400,
        ..SyntheticConfig::default()
    };
    let corpus = separable_corpus(&inventory, &config)?.corpus;
    let split = SplitSpec::new(SplitUnit::Sentence, 95, 5)?;
    let silver = make_dataset(&corpus, &inventory, &split, 42)?;

    println!(
        "{} tokens, {} labelled, {} train / {} validation examples",
        silver.stats.tokens,
        silver.stats.labelled_tokens,
        silver.train.len(),
        silver.validation.len()
    );
    print!("{}", distribution_report(&silver.distributions, 3));

    for r in silver.train.iter().take(3) {
        println!(
            "{} [{}] +{} {}:{} {}:{} {}:{}",
            r.tokens.join(" "),
            r.target_index,
            r.positive,
            SamplingKind::Original,
            r.negatives.original,
            SamplingKind::Inverse,
            r.negatives.inverse,
            SamplingKind::LogInverse,
            r.negatives.log_inverse,
        );
    }
    Ok(())
}
