//! Pure diffusion of the first eigenmode decays like exp(−λ₁ t).

use std::f64::consts::PI;

use blowuplab::grid::Grid;
use blowuplab::initial_data::eigen_scaled;
use blowuplab::model::{Coefficient, ModelProfile, Nonlinearity, Sampling};
use blowuplab::operators::principal_eigenpair;
use blowuplab::solver::{simulate, Problem, RunControls};

fn main() -> blowuplab::Result<()> {
    let grid = Grid::interval(0.0, PI, 201)?;
    let eigen = principal_eigenpair(&grid, 1e-12)?;
    let problem = Problem {
        u0: eigen_scaled(&eigen, 1.0),
        grid,
        profile: ModelProfile::new(Nonlinearity::zero(), Coefficient::one()),
        p: 2.0,
        regime: None,
        exploratory: true,
        sampling: Sampling::default(),
        controls: RunControls { horizon: 1.0, ..RunControls::default() },
    };
    let (traj, verdict) = simulate::<std::io::Sink>(&problem, None)?;
    println!("{:>8} {:>14} {:>14}", "t", "sup-norm", "exp(-l1 t)");
    let stride = traj.records.len() / 10;
    for r in traj.records.iter().step_by(stride.max(1)).chain(traj.records.last()) {
        println!("{:>8.4} {:>14.8} {:>14.8}", r.t, r.snapshot.sup_norm, (-eigen.lambda1 * r.t).exp());
    }
    println!("status: {:?} after {} steps", verdict.status, verdict.run.steps);
    Ok(())
}
