//! Observed blow-up time under grid refinement and regularisation changes,
//! run in parallel.

use std::path::Path;

use rayon::prelude::*;

use blowuplab::scenario::Scenario;
use blowuplab::solver::simulate;

fn main() -> blowuplab::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/scenarios");
    for name in ["th2_nonpositive_energy.json", "th3_proposition.json"] {
        let base = Scenario::load(&dir.join(name))?;
        let variants: Vec<(u32, f64)> = (0..3).flat_map(|r| [(r, 1.0), (r, 0.5)]).collect();
        let rows: Vec<_> = variants
            .par_iter()
            .map(|&(refine, eps_scale)| {
                let mut s = base.clone();
                s.solver.step.eps_reg *= eps_scale;
                let (_, v) = simulate::<std::io::Sink>(&s.problem(refine, false)?, None)?;
                Ok((refine, eps_scale, v.t_obs.unwrap_or(f64::NAN)))
            })
            .collect::<blowuplab::Result<_>>()?;
        println!("{name}");
        for (refine, eps_scale, t) in rows {
            println!("  refine {refine}  eps_reg x{eps_scale:<4} T_obs = {t:.8e}");
        }
    }
    Ok(())
}
