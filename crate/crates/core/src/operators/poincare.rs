use super::eigen::{principal_eigenpair, DirichletLaplacian};
use crate::error::{Error, Result};
use crate::grid::Grid;

const MAX_ITERATIONS: usize = 50_000;
const ARMIJO: f64 = 1e-4;

/// Constant `C` with `½‖u‖₂² ≤ C (∫|∇u|^p)^{2/p}` on discrete Dirichlet fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoincareConstant {
    pub c: f64,
    pub p: f64,
    /// `min ∫|∇u|^p / ∫|u|^p` over nonzero discrete fields.
    pub mu1: f64,
    pub iterations: usize,
}

impl PoincareConstant {
    pub fn from_mu1(mu1: f64, p: f64, measure: f64) -> Result<Self> {
        if !(mu1 > 0.0) {
            return Err(Error::InvalidParameter(format!("mu1 must be positive, got {mu1}")));
        }
        Ok(PoincareConstant { c: measure.powf(1.0 - 2.0 / p) * mu1.powf(-2.0 / p), p, mu1, iterations: 0 })
    }
}

struct Quotient<'a> {
    lap: &'a DirichletLaplacian,
    weights: &'a [f64],
    p: f64,
}

impl Quotient<'_> {
    fn denominator(&self, u: &[f64]) -> f64 {
        self.weights.iter().zip(u).map(|(w, v)| w * v.abs().powf(self.p)).sum()
    }

    fn value(&self, u: &[f64]) -> f64 {
        self.lap.stencil.grad_p_integral(u, self.p) / self.denominator(u)
    }

    fn normalize(&self, u: &mut [f64]) {
        let s = self.denominator(u).powf(-1.0 / self.p);
        u.iter_mut().for_each(|v| *v *= s);
    }

    /// Gradient of the quotient in the lumped-mass inner product, for `D(u) = 1`.
    fn gradient(&self, u: &[f64], r: f64, scratch: &mut [f64]) {
        self.lap.stencil.apply_into(u, self.p, 0.0, scratch);
        for (k, g) in scratch.iter_mut().enumerate() {
            let uk = u[k];
            *g = self.p * (-*g - r * uk.abs().powf(self.p - 2.0) * uk);
        }
    }
}

/// Minimises the discrete Rayleigh quotient `∫|∇u|^p / ∫|u|^p` by
/// Laplacian-preconditioned gradient descent on the sphere `∫|u|^p = 1`,
/// starting from the principal eigenfunction, then assembles
/// `C = |Ω|^{1−2/p} μ₁^{−2/p}`.
///
/// `p = 2` is accepted as a diagnostic: the minimiser is then `φ₁` itself.
pub fn poincare_constant(grid: &Grid, p: f64, tol: f64) -> Result<PoincareConstant> {
    if !(p >= 2.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("Poincare constant needs p >= 2, got {p}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let lap = DirichletLaplacian::new(grid)?;
    let q = Quotient { lap: &lap, weights: grid.weights(), p };

    let mut u = principal_eigenpair(grid, 1e-10)?.phi1.into_values();
    q.normalize(&mut u);
    let mut r = q.value(&u);
    let mut grad = vec![0.0; u.len()];
    let mut trial = vec![0.0; u.len()];
    let mut step = 1.0 / p;
    let mut quiet = 0;

    for it in 1..=MAX_ITERATIONS {
        q.gradient(&u, r, &mut grad);
        let dir = lap.precondition(&grad);
        let slope: f64 = grid.weights().iter().zip(&grad).zip(&dir).map(|((w, g), d)| w * g * d).sum();
        if !(slope > 1e-30 * r) {
            return Ok(PoincareConstant { iterations: it, ..PoincareConstant::from_mu1(r, p, grid.measure())? });
        }
        let mut accepted = false;
        for _ in 0..60 {
            for ((t, v), d) in trial.iter_mut().zip(&u).zip(&dir) {
                *t = v - step * d;
            }
            q.normalize(&mut trial);
            let r_trial = q.value(&trial);
            if r_trial <= r - ARMIJO * step * slope {
                std::mem::swap(&mut u, &mut trial);
                let decrease = r - r_trial;
                r = r_trial;
                step *= 1.5;
                accepted = true;
                quiet = if decrease <= tol * r { quiet + 1 } else { 0 };
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // the line search no longer resolves a decrease: at rounding level
            return Ok(PoincareConstant { iterations: it, ..PoincareConstant::from_mu1(r, p, grid.measure())? });
        }
        if quiet >= 10 {
            return Ok(PoincareConstant { iterations: it, ..PoincareConstant::from_mu1(r, p, grid.measure())? });
        }
    }
    Err(Error::NotConverged { what: "Rayleigh quotient descent", iterations: MAX_ITERATIONS })
}
