//! e^u − 1 with ζ = exp(t²) on [0, π]: observed blow-up time against the
//! weighted-mass bound at three grid levels.

use std::path::Path;

use blowuplab::scenario::Scenario;
use blowuplab::solver::simulate;

fn main() -> blowuplab::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/scenarios/th1_exponential.json");
    let scenario = Scenario::load(&path)?;
    println!("{:>6} {:>14} {:>12} {:>14} {:>8} {:>10}", "n", "T_obs", "+/-", "T*", "y0/C", "monitors");
    for refine in 0..3 {
        let problem = scenario.problem(refine, false)?;
        let (_, v) = simulate::<std::io::Sink>(&problem, None)?;
        let report = v.bound.report.as_ref().expect("hypotheses hold");
        println!(
            "{:>6} {:>14.8e} {:>12.2e} {:>14.8e} {:>8.3} {:>10}",
            problem.grid.len(),
            v.t_obs.unwrap_or(f64::NAN),
            v.uncertainty.unwrap_or(f64::NAN),
            report.t_star,
            report.inputs["y0"] / report.inputs["C"],
            if v.monitors_pass { "pass" } else { "FAIL" }
        );
    }
    Ok(())
}
