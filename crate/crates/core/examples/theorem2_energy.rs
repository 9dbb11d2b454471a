//! Cubic reaction from nonpositive and from positive initial energy, with the
//! energy and L² growth monitors.

use std::path::Path;

use blowuplab::scenario::Scenario;
use blowuplab::solver::simulate;

fn main() -> blowuplab::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/scenarios");
    for name in ["th2_nonpositive_energy.json", "th2_positive_energy.json"] {
        let problem = Scenario::load(&dir.join(name))?.problem(0, false)?;
        let (traj, v) = simulate::<std::io::Sink>(&problem, None)?;
        println!("{name}");
        println!("  E(u0) = {:.6}, L(u0) = {:.6}", traj.records[0].snapshot.e2, traj.records[0].snapshot.l);
        println!("  T_obs = {:.8e} +/- {:.1e}", v.t_obs.unwrap_or(f64::NAN), v.uncertainty.unwrap_or(f64::NAN));
        if let Some(r) = &v.bound.report {
            println!("  T*    = {:.8e} (A = {:.6})", r.t_star, r.inputs["A"]);
        }
        for m in &v.monitors {
            println!("  {:<12} min residual/scale = {:+.3e} over {} steps", m.name.column(), m.min_relative, m.count);
        }
    }
    Ok(())
}
