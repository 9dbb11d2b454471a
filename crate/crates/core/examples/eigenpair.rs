//! Principal Dirichlet eigenpair on [0, π] and the unit square, with the
//! observed convergence order of λ₁ under refinement.

use std::f64::consts::PI;

use blowuplab::grid::Grid;
use blowuplab::operators::principal_eigenpair;

fn main() -> blowuplab::Result<()> {
    println!("{:>6} {:>16} {:>12} {:>8}", "n", "lambda1", "error", "order");
    let mut prev: Option<f64> = None;
    for n in [51, 101, 201, 401, 801] {
        let e = principal_eigenpair(&Grid::interval(0.0, PI, n)?, 1e-12)?;
        let err = (e.lambda1 - 1.0).abs();
        let order = prev.map_or(String::new(), |p| format!("{:.3}", (p / err).log2()));
        println!("{n:>6} {:>16.12} {err:>12.3e} {order:>8}", e.lambda1);
        prev = Some(err);
    }

    let square = Grid::rectangle((0.0, 1.0), (0.0, 1.0), (81, 81))?;
    let e = principal_eigenpair(&square, 1e-12)?;
    println!("unit square 81x81: lambda1 = {:.8} (continuum 2 pi^2 = {:.8})", e.lambda1, 2.0 * PI * PI);
    Ok(())
}
