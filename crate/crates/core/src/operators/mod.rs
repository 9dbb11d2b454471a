//! Discrete p-Laplacian and its spectral companions.
//!
//! The operator is the weighted gradient of the convex energy
//! `Φ(u) = (1/p) Σ_e w_e (|∇u_e|² + ε²)^{p/2}`, where the elements `e` are the
//! cells of an interval grid or the two triangles of each rectangle cell
//! (split along the `(i,j)–(i+1,j+1)` diagonal). With lumped trapezoid
//! masses this gives, at `p = 2`, exactly the 3-point and 5-point Laplacians,
//! and in general
//!
//! ```text
//! Σ_k w_k u_k (Δ_p u)_k = −Σ_e w_e (|∇u_e|² + ε²)^{(p−2)/2} |∇u_e|²
//! ```
//!
//! holds to rounding for every Dirichlet field.

mod banded;
mod eigen;
mod poincare;

pub use eigen::{principal_eigenpair, EigenPair};
pub use poincare::{poincare_constant, PoincareConstant};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, GridKind};

/// One directional difference `(u[plus] − u[minus]) · inv_h`.
#[derive(Debug, Clone, Copy)]
struct Difference {
    plus: usize,
    minus: usize,
    inv_h: f64,
}

#[derive(Debug, Clone, Copy)]
struct Element {
    weight: f64,
    diffs: [Difference; 2],
    ncomp: usize,
}

impl Element {
    #[inline]
    fn grad(&self, u: &[f64]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for (c, d) in self.diffs[..self.ncomp].iter().enumerate() {
            g[c] = (u[d.plus] - u[d.minus]) * d.inv_h;
        }
        g
    }
}

/// Element decomposition of a grid, reusable across many operator applications.
#[derive(Debug, Clone)]
pub struct Stencil {
    elements: Vec<Element>,
    inv_weights: Vec<f64>,
    boundary: Vec<bool>,
}

impl Stencil {
    pub fn new(grid: &Grid) -> Stencil {
        let mut elements = Vec::new();
        match grid.kind() {
            GridKind::Interval => {
                let h = grid.axis(0).h;
                for i in 0..grid.nx() - 1 {
                    let d = Difference { plus: i + 1, minus: i, inv_h: 1.0 / h };
                    elements.push(Element { weight: h, diffs: [d, d], ncomp: 1 });
                }
            }
            GridKind::Rectangle => {
                let (hx, hy) = (grid.axis(0).h, grid.axis(1).h);
                let area = 0.5 * hx * hy;
                for j in 0..grid.ny() - 1 {
                    for i in 0..grid.nx() - 1 {
                        let n00 = grid.index(i, j);
                        let n10 = grid.index(i + 1, j);
                        let n01 = grid.index(i, j + 1);
                        let n11 = grid.index(i + 1, j + 1);
                        elements.push(Element {
                            weight: area,
                            diffs: [
                                Difference { plus: n10, minus: n00, inv_h: 1.0 / hx },
                                Difference { plus: n11, minus: n10, inv_h: 1.0 / hy },
                            ],
                            ncomp: 2,
                        });
                        elements.push(Element {
                            weight: area,
                            diffs: [
                                Difference { plus: n11, minus: n01, inv_h: 1.0 / hx },
                                Difference { plus: n01, minus: n00, inv_h: 1.0 / hy },
                            ],
                            ncomp: 2,
                        });
                    }
                }
            }
        }
        let boundary: Vec<bool> = (0..grid.len()).map(|k| grid.is_boundary(k)).collect();
        let inv_weights = grid.weights().iter().map(|w| 1.0 / w).collect();
        Stencil { elements, inv_weights, boundary }
    }

    pub fn len(&self) -> usize {
        self.boundary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundary.is_empty()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    fn check(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.len() {
            return Err(Error::ShapeMismatch { expected: self.len(), actual: u.len() });
        }
        Ok(())
    }

    /// `|∇u|` on every element.
    pub fn gradient_magnitude(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check(u)?;
        Ok(self
            .elements
            .iter()
            .map(|e| {
                let g = e.grad(u);
                (g[0] * g[0] + g[1] * g[1]).sqrt()
            })
            .collect())
    }

    /// Writes `div((|∇u|² + ε²)^{(p−2)/2} ∇u)` into `out` (0 on the boundary).
    pub fn apply_into(&self, u: &[f64], p: f64, eps_reg: f64, out: &mut [f64]) {
        debug_assert_eq!(u.len(), self.len());
        debug_assert_eq!(out.len(), self.len());
        out.iter_mut().for_each(|v| *v = 0.0);
        let half_exp = 0.5 * (p - 2.0);
        let eps2 = eps_reg * eps_reg;
        for e in &self.elements {
            let g = e.grad(u);
            let kappa = if half_exp == 0.0 { 1.0 } else { (g[0] * g[0] + g[1] * g[1] + eps2).powf(half_exp) };
            for (c, d) in e.diffs[..e.ncomp].iter().enumerate() {
                let flux = e.weight * kappa * g[c] * d.inv_h;
                out[d.plus] -= flux;
                out[d.minus] += flux;
            }
        }
        for (k, v) in out.iter_mut().enumerate() {
            *v = if self.boundary[k] { 0.0 } else { *v * self.inv_weights[k] };
        }
    }

    pub fn apply(&self, u: &[f64], p: f64, eps_reg: f64) -> Result<Vec<f64>> {
        self.check(u)?;
        check_p(p)?;
        if !(eps_reg >= 0.0) {
            return Err(Error::InvalidParameter(format!("eps_reg must be >= 0, got {eps_reg}")));
        }
        let mut out = vec![0.0; u.len()];
        self.apply_into(u, p, eps_reg, &mut out);
        Ok(out)
    }

    /// `∫|∇u|^p` by element quadrature.
    pub fn grad_p_integral(&self, u: &[f64], p: f64) -> f64 {
        let half_p = 0.5 * p;
        self.elements
            .iter()
            .map(|e| {
                let g = e.grad(u);
                e.weight * (g[0] * g[0] + g[1] * g[1]).powf(half_p)
            })
            .sum()
    }

    /// `∫(|∇u|² + ε²)^{(p−2)/2} |∇u|²`, the dissipation paired with [`Stencil::apply`].
    pub fn dissipation(&self, u: &[f64], p: f64, eps_reg: f64) -> f64 {
        let half_exp = 0.5 * (p - 2.0);
        let eps2 = eps_reg * eps_reg;
        self.elements
            .iter()
            .map(|e| {
                let g = e.grad(u);
                let s = g[0] * g[0] + g[1] * g[1];
                e.weight * (s + eps2).powf(half_exp) * s
            })
            .sum()
    }

    /// `max_e (|∇u_e|² + ε²)^{(p−2)/2}`.
    pub fn max_flux_coefficient(&self, u: &[f64], p: f64, eps_reg: f64) -> f64 {
        if p == 2.0 {
            return 1.0;
        }
        let max_sq = self
            .elements
            .iter()
            .map(|e| {
                let g = e.grad(u);
                g[0] * g[0] + g[1] * g[1]
            })
            .fold(0.0, f64::max);
        (max_sq + eps_reg * eps_reg).powf(0.5 * (p - 2.0))
    }

    /// Assembles the interior stiffness matrix `K` of the `p = 2` operator,
    /// so that `Δ_h = −M⁻¹K` with `M` the lumped masses.
    fn stiffness(&self, interior: &[Option<usize>], bandwidth: usize) -> banded::BandedSpd {
        let n = interior.iter().filter(|k| k.is_some()).count();
        let mut k = banded::BandedSpd::zeros(n, bandwidth);
        for e in &self.elements {
            for d in &e.diffs[..e.ncomp] {
                let s = e.weight * d.inv_h * d.inv_h;
                let (a, b) = (interior[d.plus], interior[d.minus]);
                if let Some(a) = a {
                    k.add(a, a, s);
                }
                if let Some(b) = b {
                    k.add(b, b, s);
                }
                if let (Some(a), Some(b)) = (a, b) {
                    k.add(a.max(b), a.min(b), -s);
                }
            }
        }
        k
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 2.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p-Laplacian needs p >= 2, got {p}")));
    }
    Ok(())
}

/// `|∇u|` per element: interval cells in 1D, triangles in 2D.
pub fn gradient_magnitude(field: &Field, grid: &Grid) -> Result<Vec<f64>> {
    Stencil::new(grid).gradient_magnitude(field.values())
}

/// Conservative discretisation of `div((|∇u|² + ε²)^{(p−2)/2} ∇u)`.
pub fn p_laplacian_apply(field: &Field, p: f64, eps_reg: f64, grid: &Grid) -> Result<Field> {
    grid.check_len(field.len())?;
    let out = Stencil::new(grid).apply(field.values(), p, eps_reg)?;
    Ok(Field::from_raw(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn interior_max_abs(grid: &Grid, v: &[f64], f: impl Fn([f64; 2]) -> f64) -> f64 {
        grid.interior().map(|k| (v[k] - f(grid.coords(k))).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn gradient_of_affine_and_zero() {
        let g = Grid::interval(0.0, 1.0, 11).unwrap();
        let x = g.sample(|x| x[0]);
        let st = Stencil::new(&g);
        assert!(st.gradient_magnitude(&x).unwrap().iter().all(|&v| (v - 1.0).abs() < 1e-14));
        assert!(st.gradient_magnitude(&vec![0.0; g.len()]).unwrap().iter().all(|&v| v == 0.0));
        assert!(st.gradient_magnitude(&[0.0; 3]).is_err());
    }

    #[test]
    fn gradient_of_sine_matches_cosine() {
        let g = Grid::interval(0.0, PI, 401).unwrap();
        let f = Field::from_fn(&g, |x| x[0].sin()).unwrap();
        let gm = gradient_magnitude(&f, &g).unwrap();
        let h = g.axis(0).h;
        for (i, v) in gm.iter().enumerate() {
            let mid = (i as f64 + 0.5) * h;
            assert!((v - mid.cos().abs()).abs() < 1e-4);
        }
    }

    #[test]
    fn p2_is_exact_on_quadratics() {
        let g = Grid::interval(0.0, 1.0, 21).unwrap();
        let f = Field::from_fn(&g, |x| x[0] * (1.0 - x[0])).unwrap();
        let a = p_laplacian_apply(&f, 2.0, 0.0, &g).unwrap();
        assert!(interior_max_abs(&g, a.values(), |_| -2.0) < 1e-10);
        assert!(a.values()[0] == 0.0 && a.values()[20] == 0.0);
    }

    #[test]
    fn affine_has_zero_divergence() {
        let g = Grid::interval(0.0, 1.0, 21).unwrap();
        let x = g.sample(|x| x[0]);
        let st = Stencil::new(&g);
        for p in [2.0, 2.5, 3.0, 4.0] {
            let a = st.apply(&x, p, 0.0).unwrap();
            assert!(a.iter().all(|v| v.abs() < 1e-10), "p = {p}");
        }
    }

    #[test]
    fn p3_on_square_profile() {
        let g = Grid::interval(0.0, 1.0, 201).unwrap();
        let u = g.sample(|x| x[0] * x[0]);
        let a = Stencil::new(&g).apply(&u, 3.0, 0.0).unwrap();
        let err = interior_max_abs(&g, &a, |x| 8.0 * x[0]);
        assert!(err < 1e-3, "max error {err}");
    }

    #[test]
    fn rejects_p_below_two() {
        let g = Grid::interval(0.0, 1.0, 5).unwrap();
        assert!(p_laplacian_apply(&Field::zeros(&g), 1.5, 0.0, &g).is_err());
    }

    #[test]
    fn p2_matches_five_point_stencil() {
        let g = Grid::rectangle((0.0, 1.0), (0.0, 2.0), (9, 13)).unwrap();
        let u: Vec<f64> =
            (0..g.len()).map(|k| if g.is_boundary(k) { 0.0 } else { ((k * 7919) % 101) as f64 / 50.0 - 1.0 }).collect();
        let a = Stencil::new(&g).apply(&u, 2.0, 0.3).unwrap();
        let (hx, hy) = (g.axis(0).h, g.axis(1).h);
        for k in g.interior() {
            let (i, j) = g.ij(k);
            let five = (u[g.index(i + 1, j)] - 2.0 * u[k] + u[g.index(i - 1, j)]) / (hx * hx)
                + (u[g.index(i, j + 1)] - 2.0 * u[k] + u[g.index(i, j - 1)]) / (hy * hy);
            assert!((a[k] - five).abs() < 1e-9 * five.abs().max(1.0));
        }
    }
}
