//! Blow-up time bounds for the three regimes over a range of initial sizes.

use blowuplab::bounds::{constant_a, tmax1, tmax2, tmax3};
use blowuplab::model::{compute_m, Coefficient, Nonlinearity, TailBehavior};

fn main() -> blowuplab::Result<()> {
    let f = Nonlinearity::exp_minus_one();
    let m = compute_m(&Coefficient::exp_t2(), 10.0, TailBehavior::AtLeastOne)?;
    println!("exponential reaction, lambda1 = 1, m = {m}");
    println!("{:>10} {:>14}", "mass0", "T*");
    for mass0 in [1.5, 2.0, 3.0, 5.0, 10.0] {
        match tmax1(&f, m, 1.0, mass0) {
            Ok(r) => println!("{mass0:>10} {:>14.6e}", r.t_star),
            Err(e) => println!("{mass0:>10} {e}"),
        }
    }

    let a = constant_a(2.0, 0.25, 4.0, 1.0, std::f64::consts::PI)?;
    println!("\ncubic reaction, A = {a:.6}");
    println!("{:>8} {:>10} {:>14}", "E0", "|u0|_2", "T*");
    for (e0, norm) in [(-1.0, 1.0), (0.0, 1.0), (0.1, 2.0), (1.0, 3.0), (1.0, 1.0)] {
        match tmax2(e0, norm, a, 4.0) {
            Ok(r) => println!("{e0:>8} {norm:>10} {:>14.6e}", r.t_star),
            Err(e) => println!("{e0:>8} {norm:>10} {e}"),
        }
    }

    println!("\np-Laplacian regime, C = 0.1, p = 3, kappa = 4");
    for l0 in [0.1, 1.0, 10.0, 100.0] {
        println!("L0 = {l0:>6}: T* = {:.6e}", tmax3(0.1, 3.0, 4.0, l0)?.t_star);
    }
    Ok(())
}
