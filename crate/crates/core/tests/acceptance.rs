//! Acceptance checks. Prints one PASS/FAIL/SKIP line per criterion and
//! exits non-zero if any check fails.
//!
//! cargo test --test acceptance
//!
//! Set USAS_ENGLISH_EVAL to a vertical-format English gold corpus to run the
//! corpus statistics check.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use usas_core::bi_encoder::{
    cross_entropy, encode_checkpoint, train, validation_accuracy, BiEncoder, EncoderConfig, NeuralTagger,
    TrainConfig, TrainingExample, Vocabulary,
};
use usas_core::corpus::{parse_tag_groups, Corpus};
use usas_core::evaluation::{evaluate_run, preprocess_gold, top_n_accuracy, GoldToken};
use usas_core::lexicon::{MweLexicon, SingleWordLexicon};
use usas_core::silver::{build_distributions, make_dataset, sample_negatives, SamplingKind, SplitSpec, SplitUnit, TagFrequencyTable};
use usas_core::synthetic::{separable_corpus, SyntheticConfig};
use usas_core::tagset::{is_discardable, is_punctuation_marker, GlossEntry, TokenTag};
use usas_core::token::{sentence, InputToken};
use usas_core::{
    parse_tag, CategoryLabel, EvalOptions, HybridConfig, HybridTagger, MembershipMatch, ParsedTag, Provenance,
    RankedPrediction, RuleTagger, SenseInventory, Tagger,
};

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if $cond {
        } else {
            return Err(format!($($arg)+));
        }
    };
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    if took > limit {
        return Err(format!("took {took:.2?}, limit {limit:?}"));
    }
    Ok(())
}

fn label(s: &str) -> CategoryLabel {
    CategoryLabel::new(s).unwrap()
}

fn tag(s: &str) -> ParsedTag {
    parse_tag(s).unwrap()
}

// 1

fn tag_grammar() -> Check {
    let start = Instant::now();
    // (raw, core, membership, marks, plus, minus, marker)
    type TableRow = (&'static str, &'static str, &'static [&'static str], &'static str, u8, u8, Option<(u32, u32, u32)>);
    let rows: [TableRow; 15] = [
        ("O1.3", "O1.3", &["O1.3"], "", 0, 0, None),
        ("O4.3", "O4.3", &["O4.3"], "", 0, 0, None),
        ("Z5", "Z5", &["Z5"], "", 0, 0, None),
        ("O1.2", "O1.2", &["O1.2"], "", 0, 0, None),
        ("F2/O2[i135.2.1", "F2/O2", &["F2", "O2"], "", 0, 0, Some((135, 2, 1))),
        ("F2/O2[i135.2.2", "F2/O2", &["F2", "O2"], "", 0, 0, Some((135, 2, 2))),
        ("Z1mf", "Z1", &["Z1"], "mf", 0, 0, None),
        ("Z3c", "Z3", &["Z3"], "c", 0, 0, None),
        ("Z99", "Z99", &["Z99"], "", 0, 0, None),
        ("H1/F1", "H1/F1", &["H1", "F1"], "", 0, 0, None),
        ("Y2", "Y2", &["Y2"], "", 0, 0, None),
        ("P1", "P1", &["P1"], "", 0, 0, None),
        ("Z2", "Z2", &["Z2"], "", 0, 0, None),
        ("T2-", "T2", &["T2"], "", 0, 1, None),
        ("M6", "M6", &["M6"], "", 0, 0, None),
    ];
    for (raw, core, members, marks, plus, minus, marker) in rows {
        let t = parse_tag(raw).map_err(|e| format!("{raw}: {e}"))?;
        ensure!(t.raw() == raw, "{raw}: raw form not kept");
        ensure!(t.canonical_core() == core, "{raw}: core {} != {core}", t.canonical_core());
        let m: Vec<&str> = t.membership().iter().map(CategoryLabel::as_str).collect();
        ensure!(m == members, "{raw}: membership {m:?}");
        ensure!(t.affixes().marks().collect::<String>() == marks, "{raw}: marks");
        ensure!(t.affixes().plus() == plus && t.affixes().minus() == minus, "{raw}: +/- counts");
        let got = t.mwe_marker().map(|k| (k.entry_id, k.span_length, k.position));
        ensure!(got == marker, "{raw}: marker {got:?}");
        let again = parse_tag(&t.to_string()).unwrap();
        ensure!(again == t, "{raw}: round trip");
        let core_tag = parse_tag(&t.canonical_core()).unwrap();
        ensure!(core_tag.canonical_core() == core, "{raw}: core not idempotent");
    }
    // braced tag groups, punctuation and the unmatched tag
    let groups = parse_tag_groups("{Z1mf}{Z3c}").map_err(|e| e.to_string())?;
    ensure!(groups.len() == 2, "Erik has two tag groups");
    ensure!(groups[0].to_string() == "Z1mf" && groups[1].to_string() == "Z3c", "group order");
    for p in ["PUNC", "PUNCT"] {
        ensure!(is_punctuation_marker(p), "{p} is punctuation");
        ensure!(parse_tag(p).is_err(), "{p} is not a semantic tag");
        ensure!(is_discardable(&TokenTag::parse(p).unwrap()), "{p} discardable");
    }
    ensure!(is_discardable(&TokenTag::parse("Z99").unwrap()), "Z99 discardable");
    ensure!(is_discardable(&TokenTag::parse("Z99/A1").unwrap()), "Z99/A1 discardable");
    ensure!(!is_discardable(&TokenTag::parse("Z1mf").unwrap()), "Z1mf kept");
    for bad in ["", "f2", "F2/", "A1/B2/C3/E1/F1", "F2x", "F2[i1.2", "F2[x1.2.1"] {
        ensure!(parse_tag(bad).is_err(), "{bad:?} should be rejected");
    }
    let inventory = SenseInventory::usas();
    ensure!(inventory.len() == 232, "bundled inventory has {} labels", inventory.len());
    within(start, Duration::from_secs(1))?;
    Ok(format!("15 example tags, inventory {} labels", inventory.len()))
}

// 2

fn pacific_ocean() -> Check {
    let start = Instant::now();
    let single = SingleWordLexicon::parse("ocean\tNOUN\tW3/M4\nPacific\tPROPN\tZ2 W3\n", Path::new("single"), None)
        .map_err(|e| e.to_string())?;
    let mwe = MweLexicon::parse("*_* Ocean_NOUN\tZ2\n*_VERB over_ADV\tT2- M1 M6\n", Path::new("mwe"), None)
        .map_err(|e| e.to_string())?;
    let tagger = RuleTagger::new(single, mwe);
    let tokens = sentence([
        ("the", "the", "DET"),
        ("Pacific", "Pacific", "PROPN"),
        ("Ocean", "Ocean", "NOUN"),
        ("is", "be", "AUX"),
        ("deep", "deep", "ADJ"),
    ]);
    let out = tagger.tag_sentence(&tokens);
    for i in [1, 2] {
        ensure!(out[i].provenance == Provenance::Mwe, "token {i} provenance {:?}", out[i].provenance);
        ensure!(out[i].top_k_strings(5) == ["Z2"], "token {i} tags {:?}", out[i].top_k_strings(5));
    }
    ensure!(out[0].provenance == Provenance::Unmatched, "the");
    within(start, Duration::from_secs(1))?;
    Ok("Pacific Ocean -> Z2 Z2 via *_* Ocean_NOUN".into())
}

// 3

const LEMMAS: [&str; 6] = ["coffee", "Coffee", "pot", "ocean", "Ocean", "sail"];
const POS_TAGS: [&str; 3] = ["NOUN", "VERB", "PROPN"];
const TAG_POOL: [&str; 8] = ["F2", "O2", "F2/O2", "W3", "M4", "Z2", "T2-", "A1.1.1"];

fn random_tags(rng: &mut ChaCha8Rng) -> Vec<&'static str> {
    let n = rng.gen_range(1..=3);
    (0..n).map(|_| *TAG_POOL.choose(rng).unwrap()).collect()
}

/// First successful stage, merging rows in file order and dropping repeated
/// cores.
type Row<'a> = (String, String, Vec<&'a str>);

fn oracle_lookup(rows: &[Row], tok: &InputToken) -> Option<Vec<String>> {
    let collect = |pred: &dyn Fn(&Row) -> bool| {
        let mut out: Vec<String> = Vec::new();
        let mut cores: Vec<String> = Vec::new();
        for r in rows.iter().filter(|r| pred(r)) {
            for t in &r.2 {
                let core = tag(t).canonical_core();
                if !cores.contains(&core) {
                    cores.push(core);
                    out.push(t.to_string());
                }
            }
        }
        (!out.is_empty()).then_some(out)
    };
    let lower_text = tok.text.to_lowercase();
    let lower_lemma = tok.lemma.to_lowercase();
    collect(&|r| r.0 == tok.lemma && r.1 == tok.pos)
        .or_else(|| collect(&|r| r.0 == lower_text && r.1 == tok.pos))
        .or_else(|| collect(&|r| r.0 == tok.lemma))
        .or_else(|| collect(&|r| r.0 == lower_lemma))
}

fn ranking_order() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut mwe_tokens = 0;
    let mut single_tokens = 0;
    for fixture in 0..1000 {
        let rows: Vec<Row> = (0..rng.gen_range(1..8))
            .map(|_| {
                (
                    LEMMAS.choose(&mut rng).unwrap().to_string(),
                    POS_TAGS.choose(&mut rng).unwrap().to_string(),
                    random_tags(&mut rng),
                )
            })
            .collect();
        let single_text: String = rows.iter().map(|(l, p, t)| format!("{l}\t{p}\t{}\n", t.join(" "))).collect();
        let templates: Vec<(String, Vec<&str>)> = (0..rng.gen_range(0..4))
            .map(|_| {
                let n = rng.gen_range(2..=3);
                let slots: Vec<String> = (0..n)
                    .map(|_| {
                        if rng.gen_bool(0.25) {
                            "*_*".to_owned()
                        } else {
                            format!("{}_{}", LEMMAS.choose(&mut rng).unwrap(), POS_TAGS.choose(&mut rng).unwrap())
                        }
                    })
                    .collect();
                (slots.join(" "), random_tags(&mut rng))
            })
            .filter(|(t, _)| t.split(' ').any(|s| s != "*_*"))
            .collect();
        let mwe_text: String = templates.iter().map(|(t, tags)| format!("{t}\t{}\n", tags.join(" "))).collect();

        let single = SingleWordLexicon::parse(&single_text, Path::new("s"), None).map_err(|e| e.to_string())?;
        let mwe = MweLexicon::parse(&mwe_text, Path::new("m"), None).map_err(|e| e.to_string())?;
        let matches = mwe.match_sentence(&[]);
        ensure!(matches.is_empty(), "empty sentence matched");
        let tagger = RuleTagger::new(single, mwe.clone());

        let tokens: Vec<InputToken> = (0..rng.gen_range(1..10))
            .map(|i| {
                let lemma = *LEMMAS.choose(&mut rng).unwrap();
                let text = if rng.gen_bool(0.3) { lemma.to_uppercase() } else { lemma.to_owned() };
                InputToken::new(i, &text, lemma, POS_TAGS.choose(&mut rng).unwrap())
            })
            .collect();
        let out = tagger.tag_sentence(&tokens);
        let spans = mwe.match_sentence(&tokens);
        for (i, p) in out.iter().enumerate() {
            let got = p.top_k_strings(usize::MAX);
            match spans.iter().find(|m| m.covers(i)) {
                Some(m) => {
                    mwe_tokens += 1;
                    ensure!(p.provenance == Provenance::Mwe, "fixture {fixture} token {i}: MWE span not preferred");
                    let (template, tags) = &templates[m.entry];
                    ensure!(got == *tags, "fixture {fixture} token {i}: {got:?} != {tags:?} for {template}");
                }
                None => {
                    ensure!(p.provenance != Provenance::Mwe, "fixture {fixture} token {i}: MWE outside span");
                    match oracle_lookup(&rows, &tokens[i]) {
                        Some(expected) => {
                            single_tokens += 1;
                            ensure!(p.provenance == Provenance::SingleWord, "fixture {fixture} token {i}: provenance");
                            ensure!(got == expected, "fixture {fixture} token {i}: {got:?} != {expected:?}");
                        }
                        None => ensure!(p.provenance == Provenance::Unmatched, "fixture {fixture} token {i}: expected Z99"),
                    }
                }
            }
        }
    }
    ensure!(mwe_tokens > 100 && single_tokens > 100, "fixtures too easy: {mwe_tokens} MWE, {single_tokens} single");
    Ok(format!("1000 fixtures, {mwe_tokens} MWE and {single_tokens} single-word tokens, 0 violations"))
}

// 4, 5

fn toy_inventory() -> SenseInventory {
    let rows = [
        ("A1", "General actions making"),
        ("B1", "Anatomy physiology"),
        ("F2", "Drinks"),
        ("O2", "Objects generally"),
        ("W3", "Geographical terms"),
        ("Z99", "Unmatched"),
    ];
    SenseInventory::from_entries(rows.iter().map(|(l, t)| GlossEntry::new(label(l), t, None).unwrap())).unwrap()
}

fn random_example(rng: &mut ChaCha8Rng, words: &[&str]) -> TrainingExample {
    let mut labels = ["A1", "B1", "F2", "O2", "W3"];
    labels.shuffle(rng);
    let n = rng.gen_range(1..=6);
    let tokens: Vec<String> = (0..n).map(|_| words.choose(rng).unwrap().to_string()).collect();
    TrainingExample {
        target_index: rng.gen_range(0..n),
        tokens,
        positive: label(labels[0]),
        negatives: [label(labels[1]), label(labels[2]), label(labels[3])],
    }
}

fn gradient_check() -> Check {
    let start = Instant::now();
    let inventory = toy_inventory();
    let words = ["sea", "cup", "tea", "arm", "oov1", "oov2"];
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    for m in 0..100 {
        let config = EncoderConfig {
            dim: rng.gen_range(1..=8),
            window: rng.gen_range(0..=3),
            oov_buckets: 3,
            seed: rng.gen(),
        };
        let vocab = Vocabulary::build(["sea", "cup", "tea", "arm"], config.oov_buckets);
        let mut model = BiEncoder::new(&config, vocab, &inventory).map_err(|e| e.to_string())?;
        let scale: f32 = rng.gen_range(1.0..20.0);
        model.encoder_mut().target_table_mut().iter_mut().for_each(|x| *x *= scale);
        model.encoder_mut().context_table_mut().iter_mut().for_each(|x| *x *= scale);
        let ex = random_example(&mut rng, &words);
        let (_, grads) = model.loss(&ex).map_err(|e| e.to_string())?;
        let d = model.dim();

        for target_table in [true, false] {
            let len = if target_table {
                model.encoder().target_table().len()
            } else {
                model.encoder().context_table().len()
            };
            for idx in 0..len {
                let (row, col) = (idx / d, idx % d);
                let map = if target_table { &grads.target } else { &grads.context };
                let analytic = map.get(&row).map_or(0.0, |g| g[col]);
                let h = 1e-4f64;
                let bump = |delta: f64| -> (f64, f64) {
                    let mut copy = model.clone();
                    let table = if target_table {
                        copy.encoder_mut().target_table_mut()
                    } else {
                        copy.encoder_mut().context_table_mut()
                    };
                    table[idx] = (table[idx] as f64 + delta) as f32;
                    let stored = table[idx] as f64;
                    (stored, copy.loss_value(&ex).unwrap())
                };
                let (p_plus, l_plus) = bump(h);
                let (p_minus, l_minus) = bump(-h);
                let numeric = (l_plus - l_minus) / (p_plus - p_minus);
                let err = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-12);
                worst = worst.max(err);
                checked += 1;
                ensure!(
                    err < 1e-4,
                    "model {m} {} table idx {idx}: analytic {analytic} numeric {numeric}",
                    if target_table { "target" } else { "context" }
                );
            }
        }
    }
    within(start, Duration::from_secs(30))?;
    Ok(format!("{checked} parameters over 100 models, worst relative error {worst:.1e}"))
}

fn uniform_loss() -> Check {
    let expected = 4f64.ln();
    for s in [[0.0; 4], [3.25; 4], [-1e3; 4], [1e6; 4]] {
        let l = cross_entropy(&s);
        ensure!((l - expected).abs() < 1e-9, "scores {s:?}: loss {l}");
    }
    // a model whose parameters are all zero scores every candidate 0
    let inventory = toy_inventory();
    let mut model = BiEncoder::new(&EncoderConfig { dim: 4, window: 1, oov_buckets: 2, seed: 1 }, Vocabulary::build(["sea"], 2), &inventory)
        .map_err(|e| e.to_string())?;
    model.encoder_mut().target_table_mut().fill(0.0);
    model.encoder_mut().context_table_mut().fill(0.0);
    let ex = random_example(&mut ChaCha8Rng::seed_from_u64(5), &["sea", "x"]);
    let l = model.loss_value(&ex).map_err(|e| e.to_string())?;
    ensure!((l - expected).abs() < 1e-9, "zero model loss {l}");
    Ok(format!("loss {l:.12} = ln 4"))
}

// 6

fn chi_square_critical(df: usize) -> f64 {
    ChiSquared::new(df as f64).unwrap().inverse_cdf(1.0 - 0.001)
}

fn chi_square(observed: &[u64], expected_p: &[f64], n: u64) -> f64 {
    observed
        .iter()
        .zip(expected_p)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&o, &p)| {
            let e = p * n as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum()
}

fn negative_sampling() -> Check {
    let start = Instant::now();

    // hand-computed weights for {A: 3, B: 1}
    let hand = TagFrequencyTable::from_counts([(label("A1"), 3), (label("B1"), 1)]);
    let d = build_distributions(&hand).map_err(|e| e.to_string())?;
    let log_a = (1.0f64 + 4.0 / 3.0).log2();
    let log_b = (1.0f64 + 4.0).log2();
    let expected = [
        (SamplingKind::Original, 0.75, 0.25),
        (SamplingKind::Inverse, 0.25, 0.75),
        (SamplingKind::LogInverse, log_a / (log_a + log_b), log_b / (log_a + log_b)),
    ];
    for (kind, a, b) in expected {
        let dist = d.get(kind);
        ensure!((dist.weight(&label("A1")) - a).abs() < 1e-6, "{kind} A: {}", dist.weight(&label("A1")));
        ensure!((dist.weight(&label("B1")) - b).abs() < 1e-6, "{kind} B: {}", dist.weight(&label("B1")));
    }
    ensure!((d.get(SamplingKind::LogInverse).weight(&label("A1")) - 0.345).abs() < 1e-3, "log-inverse ~0.345");

    // a skewed table over 30 labels, with one unseen label
    let inventory = SenseInventory::usas();
    let labels: Vec<CategoryLabel> = inventory.semantic_entries().take(31).map(|e| e.label.clone()).collect();
    let counts: Vec<(CategoryLabel, u64)> = labels
        .iter()
        .enumerate()
        .map(|(r, l)| (l.clone(), if r == 30 { 0 } else { 1 + 3000 / (r as u64 + 1) }))
        .collect();
    let table = TagFrequencyTable::from_counts(counts.clone());
    let dists = build_distributions(&table).map_err(|e| e.to_string())?;
    let total: f64 = counts.iter().map(|(_, c)| *c as f64).sum();
    let oracle = |kind: SamplingKind| -> Vec<f64> {
        let raw: Vec<f64> = counts
            .iter()
            .map(|(_, c)| {
                let c = *c as f64;
                if c == 0.0 {
                    0.0
                } else {
                    match kind {
                        SamplingKind::Original => c,
                        SamplingKind::Inverse => 1.0 / c,
                        SamplingKind::LogInverse => (1.0 + total / c).log2(),
                    }
                }
            })
            .collect();
        let z: f64 = raw.iter().sum();
        raw.iter().map(|w| w / z).collect()
    };

    let n: u64 = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut stats = Vec::new();
    for kind in SamplingKind::ALL {
        let p = oracle(kind);
        let dist = dists.get(kind);
        for (l, q) in labels.iter().zip(&p) {
            ensure!((dist.weight(l) - q).abs() < 1e-9, "{kind} weight of {l}");
        }
        let mut observed = vec![0u64; labels.len()];
        for _ in 0..n {
            let l = dist.sample(&mut rng);
            observed[labels.iter().position(|x| x == l).unwrap()] += 1;
        }
        ensure!(observed[30] == 0, "{kind}: unseen label drawn");
        let stat = chi_square(&observed, &p, n);
        let critical = chi_square_critical(29);
        ensure!(stat < critical, "{kind}: chi-square {stat:.1} >= {critical:.1}");
        stats.push(format!("{kind} {stat:.1}"));
    }

    // seeded negative draws: disjoint, distinct, and the first draw follows
    // ORIGINAL conditioned on avoiding the positives
    let positives: BTreeSet<CategoryLabel> = [labels[0].clone(), labels[3].clone()].into();
    let p = oracle(SamplingKind::Original);
    let excluded: f64 = labels.iter().zip(&p).filter(|(l, _)| positives.contains(*l)).map(|(_, q)| q).sum();
    let conditional: Vec<f64> = labels
        .iter()
        .zip(&p)
        .map(|(l, q)| if positives.contains(l) { 0.0 } else { q / (1.0 - excluded) })
        .collect();
    let mut first = vec![0u64; labels.len()];
    for _ in 0..n {
        let neg = sample_negatives(&positives, &dists, &mut rng).map_err(|e| e.to_string())?;
        ensure!(neg.iter().all(|l| !positives.contains(l)), "negative overlaps positives");
        ensure!(neg[0] != neg[1] && neg[0] != neg[2] && neg[1] != neg[2], "repeated negative");
        first[labels.iter().position(|x| *x == neg[0]).unwrap()] += 1;
    }
    let stat = chi_square(&first, &conditional, n);
    let critical = chi_square_critical(29 - positives.len());
    ensure!(stat < critical, "conditional ORIGINAL: chi-square {stat:.1} >= {critical:.1}");
    stats.push(format!("conditional {stat:.1}"));

    within(start, Duration::from_secs(10))?;
    Ok(format!("chi-square {} (critical {:.1})", stats.join(", "), chi_square_critical(29)))
}

// 7

fn toy_training() -> Check {
    let start = Instant::now();
    let inventory = SenseInventory::usas();
    let syn = separable_corpus(&inventory, &SyntheticConfig::default()).map_err(|e| e.to_string())?;
    ensure!(syn.senses.len() == 20, "20 senses");
    let silver = make_dataset(&syn.corpus, &inventory, &SplitSpec::new(SplitUnit::Document, 90, 10).unwrap(), 1)
        .map_err(|e| e.to_string())?;
    ensure!(silver.stats.examples == 2000, "{} examples", silver.stats.examples);
    let train_set: Vec<_> = silver.train.iter().map(|r| r.to_example()).collect();
    let val: Vec<_> = silver.validation.iter().map(|r| r.to_example()).collect();
    let encoder = EncoderConfig {
        dim: 32,
        ..EncoderConfig::default()
    };

    let run = |dir: &Path| -> usas_core::Result<_> {
        let vocab = BiEncoder::build_vocabulary(&train_set, &inventory, encoder.oov_buckets);
        let model = BiEncoder::new(&encoder, vocab, &inventory)?;
        let config = TrainConfig {
            learning_rate: 20.0,
            max_epochs: 3,
            checkpoint_dir: Some(dir.to_path_buf()),
            ..TrainConfig::default()
        };
        train(model, &train_set, &val, &config)
    };
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let a = run(dir_a.path()).map_err(|e| e.to_string())?;
    let first_run = start.elapsed();
    let b = run(dir_b.path()).map_err(|e| e.to_string())?;

    let (four_way, top1) = validation_accuracy(&a.model, &val).map_err(|e| e.to_string())?;
    ensure!(a.records.iter().all(|r| r.epoch <= 3), "ran past 3 epochs");
    ensure!(four_way >= 0.99, "4-way accuracy {four_way}");
    ensure!(top1 >= 0.95, "full-inventory top-1 {top1}");

    ensure!(encode_checkpoint(&a.model) == encode_checkpoint(&b.model), "best models differ");
    let files = |dir: &Path| -> BTreeMap<String, Vec<u8>> {
        std::fs::read_dir(dir)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
            })
            .collect()
    };
    let (fa, fb) = (files(dir_a.path()), files(dir_b.path()));
    ensure!(!fa.is_empty(), "no checkpoints written");
    ensure!(fa == fb, "checkpoint files differ between identical runs");
    ensure!(first_run < Duration::from_secs(60), "training took {first_run:.1?}");
    Ok(format!(
        "4-way {four_way:.3}, top-1 {top1:.3}, {} checkpoints bit-identical, {first_run:.1?} per run",
        fa.len()
    ))
}

// 8

fn random_model(inventory: &SenseInventory, words: &[&str], seed: u64) -> BiEncoder {
    let config = EncoderConfig {
        dim: 8,
        window: 2,
        oov_buckets: 16,
        seed,
    };
    BiEncoder::new(&config, Vocabulary::build(words.iter().copied(), 16), inventory).unwrap()
}

fn hybrid_invariants() -> Check {
    let inventory = SenseInventory::usas();
    let known = ["coffee", "pot", "tea", "cup", "sea", "ocean", "light", "drink"];
    let oov = ["zorbit", "quell", "frap", "nimb", "trosk", "plen", "vask", "gurd"];
    let single: String = known
        .iter()
        .zip(["F2/O2", "O2", "F2", "O2 F2", "W3/M4", "W3", "W2 O4.3", "F2"])
        .map(|(w, t)| format!("{w}\tNOUN\t{t}\n"))
        .collect();
    let rule = RuleTagger::new(
        SingleWordLexicon::parse(&single, Path::new("s"), None).unwrap(),
        MweLexicon::parse("coffee_NOUN pot_NOUN\tO2/F2\n", Path::new("m"), None).unwrap(),
    );
    let k = 5;
    let neural = NeuralTagger::new(random_model(&inventory, &known, 3), 1).map_err(|e| e.to_string())?;
    let hybrid =
        HybridTagger::new(rule.clone(), neural.clone(), HybridConfig { k_backoff: k }).map_err(|e| e.to_string())?;

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut passed, mut backed_off, mut total_oov, mut total) = (0, 0, 0, 0);
    for s in 0..300 {
        let tokens: Vec<InputToken> = (0..rng.gen_range(1..12))
            .map(|i| {
                if rng.gen_bool(0.1) {
                    return InputToken::new(i, ".", ".", "PUNCT");
                }
                let w = if rng.gen_bool(0.5) { known.choose(&mut rng) } else { oov.choose(&mut rng) };
                InputToken::new(i, w.unwrap(), w.unwrap(), "NOUN")
            })
            .collect();
        let r = rule.tag_sentence(&tokens);
        let h = hybrid.tag_sentence(&tokens);
        let words: Vec<String> = tokens.iter().map(|t| t.text.clone()).collect();
        ensure!(h.len() == tokens.len(), "sentence {s}: length");
        for i in 0..tokens.len() {
            total += 1;
            if oov.contains(&tokens[i].text.as_str()) {
                total_oov += 1;
            }
            ensure!(
                h[i].candidates.iter().all(|c| !c.contains_unmatched()),
                "sentence {s} token {i}: hybrid emitted Z99"
            );
            match r[i].provenance {
                Provenance::Unmatched => {
                    backed_off += 1;
                    let expected = neural.predict_token(&words, i, k).map_err(|e| e.to_string())?;
                    ensure!(h[i] == expected, "sentence {s} token {i}: back-off differs from neural top-{k}");
                    ensure!(h[i].candidates.len() == k, "back-off size");
                }
                _ => {
                    passed += 1;
                    ensure!(h[i] == r[i], "sentence {s} token {i}: rule prediction not passed through");
                }
            }
            // coverage superset: whatever the rule tagger labels, so does the hybrid
            let covered = |p: &RankedPrediction| p.top().is_some_and(|t| !t.contains_unmatched());
            ensure!(!covered(&r[i]) || covered(&h[i]), "sentence {s} token {i}: coverage lost");
            ensure!(covered(&h[i]) || h[i].provenance == Provenance::Punctuation, "uncovered token");
        }
    }
    let share = total_oov as f64 / total as f64;
    ensure!((0.35..0.55).contains(&share), "OOV share {share:.2}");
    Ok(format!(
        "{total} tokens ({:.0}% OOV): {passed} passed through, {backed_off} backed off, 0 Z99",
        100.0 * share
    ))
}

// 9

fn top_n_oracle() -> Check {
    let pool = ["A1", "B2", "F2/O2", "O2/F2", "F2/O1", "Z5", "E1", "F2/O2%", "A1+"];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for inst in 0..1000 {
        let n_tokens = rng.gen_range(1..30);
        let mut gold = Vec::new();
        let mut preds = Vec::new();
        let mut raw: Vec<(String, Vec<String>)> = Vec::new();
        for i in 0..n_tokens {
            let g = pool[rng.gen_range(0..pool.len())];
            let cands: Vec<String> = (0..rng.gen_range(0..7)).map(|_| pool.choose(&mut rng).unwrap().to_string()).collect();
            let gt = tag(g).stripped();
            gold.push(GoldToken {
                sentence: 0,
                token_index: i,
                multi_membership: gt.is_multi_membership(),
                gold: gt,
            });
            preds.push(RankedPrediction {
                token_index: i,
                candidates: cands.iter().map(|c| tag(c)).collect(),
                provenance: Provenance::SingleWord,
            });
            raw.push((g.to_owned(), cands));
        }
        // brute force on strings: strip affix characters and compare
        let core = |s: &str| -> String { s.chars().filter(|c| !"%@mfcn+-".contains(*c)).collect() };
        let mut last = 0.0;
        for n in [1, 3, 5] {
            let hits = raw
                .iter()
                .filter(|(g, c)| c.iter().take(n).any(|x| core(x) == core(g)))
                .count();
            let expected = hits as f64 / n_tokens as f64;
            let got = top_n_accuracy(&gold, &preds, n, MembershipMatch::Ordered).map_err(|e| e.to_string())?;
            ensure!(got == expected, "instance {inst} n={n}: {got} != {expected}");
            ensure!(got >= last, "instance {inst}: accuracy fell at n={n}");
            last = got;
        }
    }
    let miss = top_n_accuracy(
        &[GoldToken {
            sentence: 0,
            token_index: 0,
            gold: tag("F2/O1"),
            multi_membership: true,
        }],
        &[RankedPrediction {
            token_index: 0,
            candidates: vec![tag("F2/O2")],
            provenance: Provenance::SingleWord,
        }],
        1,
        MembershipMatch::Ordered,
    )
    .map_err(|e| e.to_string())?;
    ensure!(miss == 0.0, "F2/O2 against gold F2/O1 scored {miss}");
    Ok("1000 instances match brute force at n = 1, 3, 5; F2/O2 vs F2/O1 is a miss".into())
}

// 10

fn multi_membership_zero() -> Check {
    let inventory = SenseInventory::usas();
    let words = ["coffee", "pot", "house", "erik"];
    let gold_text = "coffee\tcoffee\tNOUN\tF2/O2\npot\tpot\tNOUN\tF2/O2[i1.2.2\nhouse\thouse\tNOUN\tH1/F1\n,\t,\tPUNCT\tPUNC\nerik\terik\tPROPN\tZ1mf/S2.2m\n\nhouse\thouse\tNOUN\tH1/F1/O2\n";
    let gold = Corpus::parse(gold_text, Path::new("gold")).map_err(|e| e.to_string())?;
    let (g, stats) = preprocess_gold(&gold, &inventory).map_err(|e| e.to_string())?;
    ensure!(stats.labelled == 5 && stats.multi_membership == 5, "{stats:?}");
    ensure!(g.iter().all(|t| t.multi_membership), "non-membership gold");
    let n_values = vec![1, 5, 10, 231];
    for seed in 0..5 {
        let tagger = NeuralTagger::new(random_model(&inventory, &words, seed), 231).map_err(|e| e.to_string())?;
        let options = EvalOptions {
            n_values: n_values.clone(),
            ..EvalOptions::default()
        };
        let report = evaluate_run(&gold, &tagger, &inventory, &options).map_err(|e| e.to_string())?;
        ensure!(report.accuracy.iter().all(|&a| a == 0.0), "seed {seed}: accuracy {:?}", report.accuracy);
        for s in gold.sentences() {
            for p in tagger.tag_sentence(&s.input_tokens()) {
                ensure!(p.candidates.iter().all(|c| c.membership().len() == 1), "neural output with membership");
            }
        }
    }
    Ok(format!("5 models score 0.0 at n = {n_values:?}"))
}

// 11

const ENGLISH_EVAL_ENV: &str = "USAS_ENGLISH_EVAL";

fn english_statistics() -> Option<Check> {
    let path = std::env::var_os(ENGLISH_EVAL_ENV)?;
    let path = Path::new(&path);
    if !path.exists() {
        return None;
    }
    Some((|| {
        let corpus = Corpus::load(path).map_err(|e| e.to_string())?;
        let (_, stats) = preprocess_gold(&corpus, &SenseInventory::usas()).map_err(|e| e.to_string())?;
        ensure!(
            (stats.tokens, stats.labelled, stats.multi_membership) == (3899, 3468, 212),
            "tokens {}, labelled {}, multi-membership {}",
            stats.tokens,
            stats.labelled,
            stats.multi_membership
        );
        Ok(format!("{} tokens, {} labelled, {} multi-membership", stats.tokens, stats.labelled, stats.multi_membership))
    })())
}

fn run(id: usize, name: &str, check: impl FnOnce() -> Option<Check>, failures: &mut Vec<usize>) {
    let start = Instant::now();
    let outcome = panic::catch_unwind(AssertUnwindSafe(check));
    let took = start.elapsed();
    match outcome {
        Ok(Some(Ok(detail))) => println!("PASS  {id:>2} {name} ({took:.2?}): {detail}"),
        Ok(Some(Err(reason))) => {
            failures.push(id);
            println!("FAIL  {id:>2} {name} ({took:.2?}): {reason}");
        }
        Ok(None) => println!("SKIP  {id:>2} {name}: set {ENGLISH_EVAL_ENV} to a gold corpus file"),
        Err(p) => {
            failures.push(id);
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            println!("FAIL  {id:>2} {name} ({took:.2?}): panicked: {msg}");
        }
    }
}

fn main() -> ExitCode {
    panic::set_hook(Box::new(|_| {}));
    let mut failures = Vec::new();
    run(1, "tag grammar", || Some(tag_grammar()), &mut failures);
    run(2, "MWE Pacific Ocean", || Some(pacific_ocean()), &mut failures);
    run(3, "ranking order", || Some(ranking_order()), &mut failures);
    run(4, "loss gradient check", || Some(gradient_check()), &mut failures);
    run(5, "uniform-score loss", || Some(uniform_loss()), &mut failures);
    run(6, "negative sampling", || Some(negative_sampling()), &mut failures);
    run(7, "toy training", || Some(toy_training()), &mut failures);
    run(8, "hybrid invariants", || Some(hybrid_invariants()), &mut failures);
    run(9, "top-n oracle", || Some(top_n_oracle()), &mut failures);
    run(10, "multi-membership", || Some(multi_membership_zero()), &mut failures);
    run(11, "English corpus statistics", english_statistics, &mut failures);
    if failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {failures:?}");
        ExitCode::FAILURE
    }
}
