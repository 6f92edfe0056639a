//! Scores the rule-based tagger against the bundled gold sample at top-1
//! and top-5, with ordered and unordered membership matching.
//!
//! cargo run --example top_n_evaluation

use std::path::PathBuf;

use usas_core::lexicon::PosMap;
use usas_core::{evaluate_run, Corpus, EvalOptions, MembershipMatch, MweLexicon, RuleTagger, SenseInventory, SingleWordLexicon};

fn main() -> usas_core::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/sample");
    let pos_map = PosMap::load(dir.join("pos_map.tsv"))?;
    let tagger = RuleTagger::new(
        SingleWordLexicon::load(dir.join("lexicon.tsv"), Some(&pos_map))?,
        MweLexicon::load(dir.join("mwe.tsv"), Some(&pos_map))?,
    );
    let gold = Corpus::load(dir.join("gold.tsv"))?;
    let inventory = SenseInventory::usas();

    for membership in [MembershipMatch::Ordered, MembershipMatch::Unordered] {
        let options = EvalOptions {
            membership,
            model: "rule".into(),
            language: "en".into(),
            ..EvalOptions::default()
        };
        let report = evaluate_run(&gold, &tagger, &inventory, &options)?;
        println!("{membership:?} membership");
        print!("{}", report.to_table());
        print!("{}", report.to_jsonl());
        println!();
    }
    Ok(())
}
