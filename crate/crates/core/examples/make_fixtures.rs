//! Regenerates the checked-in fixture files from the synthetic corpus.
//!
//! Usage: cargo run -p agids-core --example make_fixtures -- <out-dir> [n_flows]

use agids_core::corpus::{generate, CorpusConfig};
use agids_core::flow::write_flows;

fn main() {
    let mut args = std::env::args().skip(1);
    let out = std::path::PathBuf::from(args.next().unwrap_or_else(|| "fixtures".into()));
    let n_flows: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(2_000);

    std::fs::create_dir_all(&out).expect("create fixture dir");
    let corpus = generate(&CorpusConfig {
        n_flows,
        ..CorpusConfig::default()
    });

    let inventory = serde_json::to_string_pretty(&corpus.inventory).expect("inventory json");
    std::fs::write(out.join("inventory.json"), inventory).expect("write inventory");

    let rules = serde_json::to_string_pretty(&corpus.rules).expect("rules json");
    std::fs::write(out.join("rules.json"), rules).expect("write rules");

    let file = std::fs::File::create(out.join("flows_small.csv")).expect("create flows csv");
    write_flows(&corpus.dataset, file).expect("write flows");

    println!(
        "wrote inventory.json, rules.json, flows_small.csv ({} flows) to {}",
        n_flows,
        out.display()
    );
}
