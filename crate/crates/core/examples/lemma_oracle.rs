//! The comparison bound for y' ≥ −C₁ + C₂ y^q against the blow-up time of
//! the equality ODE. The two agree for C₁ ≥ 0; for C₁ < 0 the bound is the
//! C₁ = 0 time and the equality ODE blows up strictly earlier.

use blowuplab::bounds::lemma_bound;
use blowuplab::solver::ode_oracle;

fn main() -> blowuplab::Result<()> {
    println!("{:>6} {:>6} {:>6} {:>6} {:>14} {:>14} {:>10}", "C1", "C2", "q", "y0", "bound", "ode", "rel");
    for (c1, c2, q, y0) in [
        (0.0, 1.0, 2.0, 1.0),
        (1.0, 1.0, 2.0, 2.0),
        (0.5, 2.0, 3.0, 1.0),
        (2.0, 0.5, 1.5, 20.0),
        (-1.0, 1.0, 2.0, 1.0),
        (-2.0, 0.5, 3.0, 0.5),
    ] {
        let bound = lemma_bound(c1, c2, q, y0)?.t_star;
        let ode = ode_oracle(c1, c2, q, y0, 100.0 * bound).unwrap_or(f64::NAN);
        println!("{c1:>6} {c2:>6} {q:>6} {y0:>6} {bound:>14.9} {ode:>14.9} {:>10.2e}", (ode - bound).abs() / bound);
    }
    println!("below equilibrium (C1 = C2 = 1, q = 2, y0 = 0.5): {:?}", ode_oracle(1.0, 1.0, 2.0, 0.5, 1e3));
    Ok(())
}
