//! Every suite that applies to an instance read from JSON, as the CLI runs them.
//!
//! `cargo run --example verification_suites -- config.json`; defaults to
//! `Λ[Sym(2), Sym(3)]`.

use bsl::instance::InstanceConfig;
use bsl::verify::{run_suite, Suite, SuiteOptions};
use clap::ValueEnum;

const DEFAULT: &str = r#"{"family":"hnn",
  "sigmaM":{"domain":2,"generators":["(0 1)"]},
  "sigmaP":{"domain":3,"generators":["(0 1)","(0 1 2)"]},
  "caps":{"pathDepth":2,"ballRadius":6}}"#;

fn main() {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path).unwrap(),
        None => DEFAULT.to_string(),
    };
    let instance = InstanceConfig::from_json(&text).unwrap().build().unwrap();
    // Depth-2 quasi-kernel labels are only seen by three-syllable conjugators.
    let opts = SuiteOptions {
        oracle_len: 3,
        ..SuiteOptions::default()
    };
    for suite in Suite::value_variants() {
        match run_suite(&instance, *suite, opts) {
            Ok(report) => print!("{}", report.render()),
            Err(e) => println!("{suite:?}: {e}"),
        }
    }
}
