//! Tags the bundled sample corpus with the rule-based tagger and prints the
//! top three candidates and provenance for every token.
//!
//! cargo run --example rule_tagging

use std::path::PathBuf;

use usas_core::lexicon::PosMap;
use usas_core::{Corpus, MweLexicon, RuleTagger, SingleWordLexicon, Tagger};

fn main() -> usas_core::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/sample");
    let pos_map = PosMap::load(dir.join("pos_map.tsv"))?;
    let single = SingleWordLexicon::load(dir.join("lexicon.tsv"), Some(&pos_map))?;
    let mwe = MweLexicon::load(dir.join("mwe.tsv"), Some(&pos_map))?;
    println!("{} single-word entries, {} MWE templates", single.len(), mwe.len());
    let tagger = RuleTagger::new(single, mwe);

    let corpus = Corpus::load(dir.join("corpus.tsv"))?;
    for sentence in corpus.sentences() {
        for (tok, pred) in sentence.tokens.iter().zip(tagger.tag_sentence(&sentence.input_tokens())) {
            println!(
                "{:<10} {:<12} {}",
                tok.text,
                pred.provenance.to_string(),
                pred.top_k_strings(3).join(" ")
            );
        }
        println!();
    }
    Ok(())
}
