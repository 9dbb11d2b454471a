//! Runs any scenario file and prints the verdict as JSON.
//!
//! cargo run --example run_scenario -- examples/scenarios/th3_proposition.json

use std::path::PathBuf;

use blowuplab::scenario::Scenario;
use blowuplab::solver::simulate;

fn main() -> blowuplab::Result<()> {
    let path = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/scenarios/th1_exponential.json"));
    let problem = Scenario::load(&path)?.problem(0, false)?;
    let (_, verdict) = simulate::<std::io::Sink>(&problem, None)?;
    println!("{}", serde_json::to_string_pretty(&verdict).unwrap());
    Ok(())
}
