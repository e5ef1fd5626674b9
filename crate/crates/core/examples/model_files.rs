//! Loading models from TOML, and what a bad file reports.

use walkfluct::cli::parse_model;
use walkfluct::fluct::WalkFunctionals;

const GOOD: &str = r#"
schema_version = 1
kind = "product"

[b]
law = "erlang"
shape = 2
rate = 5.0

[a]
law = "uniform"
low = 0.5
high = 1.5
"#;

const BAD: &str = r#"
schema_version = 1
kind = "product"
[b]
law = "exponential"
rate = -1.0
[a]
law = "exponential"
rate = 1.0
"#;

fn main() {
    match parse_model(GOOD) {
        Ok(m) => {
            let wf = WalkFunctionals::new(m.clone());
            println!("{} model, E B = {}, E A = {}, {:?}", m.kind().as_str(), m.mean_b(), m.mean_a(), wf.stability());
        }
        Err(e) => println!("unexpected: {e}"),
    }
    match parse_model(BAD) {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("rejected: {e}"),
    }
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/models/markov.toml");
    let model = walkfluct::cli::load_model(path).expect("shipped model");
    println!("{path}: {} model", model.kind().as_str());
}
