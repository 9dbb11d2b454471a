//! Reaction term `f`, time coefficient `ζ`, and sampling checks of the
//! structural hypotheses each blow-up criterion relies on.

mod assumptions;
mod coefficient;
mod nonlinearity;

pub use assumptions::{
    check_assumptions, infer_lambda_pos, threshold_c, Assumption, AssumptionCheck, AssumptionReport, Regime, Sampling,
    Status,
};
pub use coefficient::{compute_m, Coefficient, TailBehavior};
pub use nonlinearity::{Evaluator, Nonlinearity, StructuralParams};

/// Everything the right-hand side `ζ(t) f(u)` needs, plus `m = inf Θ`.
#[derive(Debug, Clone)]
pub struct ModelProfile {
    pub f: Nonlinearity,
    pub zeta: Coefficient,
    /// `inf Θ`; zero when (z1) was not evaluated.
    pub m: f64,
}

impl ModelProfile {
    pub fn new(f: Nonlinearity, zeta: Coefficient) -> Self {
        ModelProfile { f, zeta, m: 0.0 }
    }

    pub fn with_m(mut self, m: f64) -> Self {
        self.m = m;
        self
    }
}
