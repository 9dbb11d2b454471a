use serde::Serialize;

use super::Stencil;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid, GridKind};

const MAX_ITERATIONS: usize = 10_000;
const RESIDUAL_TOL: f64 = 1e-8;

/// Principal Dirichlet eigenpair `Δ_h φ₁ = −λ₁ φ₁`, `φ₁ > 0`, `∫φ₁ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub lambda1: f64,
    pub phi1: Field,
    /// `‖Δ_h φ₁ + λ₁ φ₁‖∞ / (λ₁ ‖φ₁‖∞)`
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenHeader {
    pub lambda1: f64,
    pub n: Vec<usize>,
    pub residual: f64,
}

impl EigenPair {
    pub fn header(&self, grid: &Grid) -> EigenHeader {
        EigenHeader { lambda1: self.lambda1, n: grid.axes().iter().map(|a| a.n).collect(), residual: self.residual }
    }
}

/// Interior stiffness matrix of the `p = 2` operator with its factorisation.
pub(super) struct DirichletLaplacian {
    pub stencil: Stencil,
    pub nodes: Vec<usize>,
    pub stiffness: super::banded::BandedSpd,
    pub mass: Vec<f64>,
    pub chol: super::banded::CholeskyBand,
}

impl DirichletLaplacian {
    pub fn new(grid: &Grid) -> Result<Self> {
        let stencil = Stencil::new(grid);
        let mut interior = vec![None; grid.len()];
        let mut nodes = Vec::new();
        for k in grid.interior() {
            interior[k] = Some(nodes.len());
            nodes.push(k);
        }
        let bandwidth = match grid.kind() {
            GridKind::Interval => 1,
            GridKind::Rectangle => grid.nx() - 2,
        };
        let stiffness = stencil.stiffness(&interior, bandwidth);
        let mass = nodes.iter().map(|&k| grid.weights()[k]).collect();
        let chol = stiffness.clone().factor()?;
        Ok(DirichletLaplacian { stencil, nodes, stiffness, mass, chol })
    }

    /// Solves `K x = M g` for nodal `g`, returning a full-length vector.
    pub fn precondition(&self, g: &[f64]) -> Vec<f64> {
        let mut x: Vec<f64> = self.nodes.iter().zip(&self.mass).map(|(&k, m)| m * g[k]).collect();
        self.chol.solve_in_place(&mut x);
        let mut out = vec![0.0; g.len()];
        for (&k, v) in self.nodes.iter().zip(x) {
            out[k] = v;
        }
        out
    }
}

/// Inverse power iteration on the factored 3-point / 5-point operator,
/// started from the all-ones interior vector.
pub fn principal_eigenpair(grid: &Grid, tol: f64) -> Result<EigenPair> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let lap_h = DirichletLaplacian::new(grid)?;
    let DirichletLaplacian { stencil, nodes, stiffness, mass, chol } = &lap_h;

    let mut v = vec![1.0; stiffness.n()];
    let mut lambda_prev = f64::NAN;
    let mut full = vec![0.0; grid.len()];
    let mut lap = vec![0.0; grid.len()];
    for it in 1..=MAX_ITERATIONS {
        for (x, m) in v.iter_mut().zip(mass.iter()) {
            *x *= m;
        }
        chol.solve_in_place(&mut v);
        let norm = v.iter().zip(mass.iter()).map(|(x, m)| m * x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        let kv = stiffness.mul(&v);
        let lambda = v.iter().zip(&kv).map(|(a, b)| a * b).sum::<f64>();

        if (lambda - lambda_prev).abs() <= tol * lambda {
            for (&k, &x) in nodes.iter().zip(&v) {
                full[k] = x;
            }
            stencil.apply_into(&full, 2.0, 0.0, &mut lap);
            let sup = full.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            let res = full.iter().zip(&lap).map(|(u, a)| (a + lambda * u).abs()).fold(0.0, f64::max);
            let residual = res / (lambda * sup);
            if residual <= RESIDUAL_TOL {
                let mass_integral = grid.integrate(&full)?;
                let scale = 1.0 / mass_integral;
                let phi: Vec<f64> = full.iter().map(|x| x * scale).collect();
                if grid.interior().any(|k| !(phi[k] > 0.0)) {
                    return Err(Error::NotConverged { what: "principal eigenvector positivity", iterations: it });
                }
                return Ok(EigenPair {
                    lambda1: lambda,
                    phi1: Field::from_values(grid, phi)?,
                    residual,
                    iterations: it,
                });
            }
        }
        lambda_prev = lambda;
    }
    Err(Error::NotConverged { what: "inverse power iteration", iterations: MAX_ITERATIONS })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_interval_on_pi() {
        let g = Grid::interval(0.0, PI, 401).unwrap();
        let e = principal_eigenpair(&g, 1e-10).unwrap();
        assert!((e.lambda1 - 1.0).abs() < 1e-4, "{}", e.lambda1);
        for k in 0..g.len() {
            let x = g.coords(k)[0];
            assert!((e.phi1.values()[k] - 0.5 * x.sin()).abs() < 1e-4);
        }
        assert!((g.integrate(e.phi1.values()).unwrap() - 1.0).abs() < 1e-10);
        assert!(e.residual <= 1e-8);
    }

    #[test]
    fn unit_interval() {
        let g = Grid::interval(0.0, 1.0, 401).unwrap();
        let e = principal_eigenpair(&g, 1e-10).unwrap();
        assert!((e.lambda1 - PI * PI).abs() < 1e-2);
    }

    #[test]
    fn unit_square() {
        let g = Grid::rectangle((0.0, 1.0), (0.0, 1.0), (101, 101)).unwrap();
        let e = principal_eigenpair(&g, 1e-10).unwrap();
        assert!((e.lambda1 - 2.0 * PI * PI).abs() < 0.05, "{}", e.lambda1);
        assert!(g.interior().all(|k| e.phi1.values()[k] > 0.0));
    }

    #[test]
    fn matches_closed_form_discrete_eigenvalue() {
        // discrete 3-point eigenvalue (4/h²) sin²(πh/(2L))
        let g = Grid::interval(0.0, 2.0, 41).unwrap();
        let h = g.axis(0).h;
        let exact = 4.0 / (h * h) * (PI * h / 4.0).sin().powi(2);
        let e = principal_eigenpair(&g, 1e-12).unwrap();
        assert!((e.lambda1 - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn rejects_nonpositive_tolerance() {
        let g = Grid::interval(0.0, 1.0, 11).unwrap();
        assert!(principal_eigenpair(&g, 0.0).is_err());
    }
}
