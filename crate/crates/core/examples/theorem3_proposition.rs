//! Scaled cutoff data with nonpositive p-energy for p = 3, κ = 4, then the
//! p-Laplacian run against the Poincaré-constant bound.

use blowuplab::bounds::tmax3;
use blowuplab::grid::Grid;
use blowuplab::initial_data::{build_cutoff, in_blowup_set, proposition_lambda};
use blowuplab::model::{Coefficient, ModelProfile, Nonlinearity, Regime, Sampling, StructuralParams};
use blowuplab::operators::poincare_constant;
use blowuplab::solver::{simulate, Problem, RunControls};

fn main() -> blowuplab::Result<()> {
    let (p, kappa) = (3.0, 4.0);
    let grid = Grid::interval(0.0, 1.0, 201)?;
    let f = Nonlinearity::power(kappa)?.with_params(StructuralParams { kappa: Some(kappa), ..Default::default() });
    let profile = ModelProfile::new(f, Coefficient::one());

    let cutoff = build_cutoff(&grid, &[(0.3, 0.7)], 5)?;
    let r = proposition_lambda(&grid, &cutoff, &profile.f, 1.0, p, kappa)?;
    println!(
        "lambda* = {:.6}, sufficient amplitude = {:.6}, E_p(lambda* phi) = {:.3e}",
        r.lambda_star, r.sufficient, r.energy
    );
    let u0 = cutoff.phi.scaled(r.lambda_star);
    println!("in blow-up set: {}", in_blowup_set(&grid, &u0, &profile, p)?);

    let c = poincare_constant(&grid, p, 1e-12)?;
    let l0 = 0.5 * grid.lp_norm(&u0, 2.0)?.powi(2);
    println!("Poincare C = {:.6} (mu1 = {:.4}), bound T* = {:.6e}", c.c, c.mu1, tmax3(c.c, p, kappa, l0)?.t_star);

    let problem = Problem {
        grid,
        profile,
        p,
        regime: Some(Regime::Th3 { p }),
        exploratory: false,
        u0,
        sampling: Sampling::default(),
        controls: RunControls { horizon: 1.0, ..RunControls::default() },
    };
    let (_, v) = simulate::<std::io::Sink>(&problem, None)?;
    println!("T_obs = {:.6e}, verification {:?}", v.t_obs.unwrap_or(f64::NAN), v.verification);
    Ok(())
}
