//! Structural checks on f and ζ for each regime, including failing cases
//! with their witnesses.

use blowuplab::model::{check_assumptions, Coefficient, Nonlinearity, Regime, Sampling, StructuralParams};

fn show(label: &str, f: &Nonlinearity, zeta: &Coefficient, regime: Regime) -> blowuplab::Result<()> {
    let report = check_assumptions(f, zeta, regime, &Sampling::default())?;
    println!("{label} [{}]", regime.label());
    for c in &report.checks {
        println!("  ({}) {}", c.assumption.key(), serde_json::to_string(&c.status).unwrap());
    }
    Ok(())
}

fn main() -> blowuplab::Result<()> {
    show("e^u - 1 with exp(t^2)", &Nonlinearity::exp_minus_one(), &Coefficient::exp_t2(), Regime::Th1)?;
    show("linear f", &Nonlinearity::power(2.0)?, &Coefficient::one(), Regime::Th1)?;
    show("e^u - 1 with zeta = 1/2", &Nonlinearity::exp_minus_one(), &Coefficient::linear(0.5, 0.0), Regime::Th1)?;

    let cubic = Nonlinearity::power(4.0)?.with_params(StructuralParams {
        alpha: Some(4.0),
        epsilon: Some(2.0),
        c0: Some(0.25),
        kappa: Some(4.0),
        ..Default::default()
    });
    show("u^3", &cubic, &Coefficient::one(), Regime::Th2)?;
    show("u^3 with decreasing zeta", &cubic, &Coefficient::linear(2.0, -0.5), Regime::Th2)?;
    show("u^3, p = 3", &cubic, &Coefficient::one(), Regime::Th3 { p: 3.0 })?;
    show("u^3, p = 4", &cubic, &Coefficient::one(), Regime::Th3 { p: 4.0 })?;
    Ok(())
}
