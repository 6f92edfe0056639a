//! Decomposes USAS tags into membership, affixes and MWE markers.
//!
//! cargo run --example tag_grammar [TAG...]

use usas_core::parse_tag;

fn main() {
    let mut tags: Vec<String> = std::env::args().skip(1).collect();
    if tags.is_empty() {
        tags = ["Z1mf", "F2/O2[i135.2.1", "A5.1+++", "O4.2-", "S2mf/S7.1+", "A1.1.1", "Q"]
            .map(String::from)
            .to_vec();
    }
    for raw in &tags {
        match parse_tag(raw) {
            Ok(t) => {
                let a = t.affixes();
                let marks: String = a.marks().collect();
                print!(
                    "{raw:<18} core={:<10} members={} marks={:?} +{} -{}",
                    t.canonical_core(),
                    t.membership().len(),
                    marks,
                    a.plus(),
                    a.minus()
                );
                if let Some(m) = t.mwe_marker() {
                    print!(" mwe=(entry {}, len {}, pos {})", m.entry_id, m.span_length, m.position);
                }
                println!();
            }
            Err(e) => println!("{raw:<18} error: {e}"),
        }
    }
}
