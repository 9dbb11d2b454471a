//! Admissible initial data: scaled eigenfunctions and cutoff profiles scaled
//! until their energy turns nonpositive.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::model::{ModelProfile, Nonlinearity};
use crate::operators::{EigenPair, Stencil};

/// Smooth bump equal to 1 on the box `K` and 0 on the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffProfile {
    /// One `(lo, hi)` pair per axis.
    pub k: Vec<(f64, f64)>,
    pub phi: Field,
    pub order: u32,
}

fn ramp(t: f64, order: u32) -> f64 {
    let t = t.clamp(0.0, 1.0);
    match order {
        1 => t,
        3 => t * t * (3.0 - 2.0 * t),
        _ => t * t * t * (10.0 + t * (-15.0 + 6.0 * t)),
    }
}

/// Tensor product of polynomial transitions of order 1 (tent), 3 or 5.
pub fn build_cutoff(grid: &Grid, k: &[(f64, f64)], order: u32) -> Result<CutoffProfile> {
    if !matches!(order, 1 | 3 | 5) {
        return Err(Error::InvalidParameter(format!("transition order must be 1, 3 or 5, got {order}")));
    }
    if k.len() != grid.dim() {
        return Err(Error::ShapeMismatch { expected: grid.dim(), actual: k.len() });
    }
    for (axis, &(lo, hi)) in grid.axes().iter().zip(k) {
        if !(lo <= hi) {
            return Err(Error::InvalidParameter(format!("empty core interval [{lo}, {hi}]")));
        }
        if !(lo - axis.lo >= axis.h && axis.hi - hi >= axis.h) {
            return Err(Error::InvalidParameter(format!(
                "core [{lo}, {hi}] must stay at least one cell inside [{}, {}]",
                axis.lo, axis.hi
            )));
        }
    }
    let axes = grid.axes().to_vec();
    let core = k.to_vec();
    let phi = Field::from_fn(grid, |x| {
        axes.iter()
            .zip(&core)
            .enumerate()
            .map(|(d, (a, &(lo, hi)))| {
                let s = x[d];
                if s < lo {
                    ramp((s - a.lo) / (lo - a.lo), order)
                } else if s > hi {
                    ramp((a.hi - s) / (a.hi - hi), order)
                } else {
                    1.0
                }
            })
            .product()
    })?;
    Ok(CutoffProfile { k: k.to_vec(), phi, order })
}

/// `E_p(u) = (1/p)∫|∇u|^p − ζ₀∫F(u)`.
pub fn energy_p(grid: &Grid, stencil: &Stencil, u: &[f64], f: &Nonlinearity, zeta0: f64, p: f64) -> Result<f64> {
    let mut potential = 0.0;
    for (w, &v) in grid.weights().iter().zip(u) {
        potential += w * f.big_f(v)?;
    }
    Ok(stencil.grad_p_integral(u, p) / p - zeta0 * potential)
}

/// Scale factor making a cutoff profile a member of the nonpositive-energy set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropositionLambda {
    /// Smallest `λ ≥ 1` with `E_p(λφ) ≤ 0`.
    pub lambda_star: f64,
    /// `(‖∇φ‖_p^p / (p C̃))^{1/(κ−p)}`, floored at 1.
    pub sufficient: f64,
    /// `C` of the growth bound `F(u) ≥ C u^κ` on `u ≥ 1`.
    pub c_growth: f64,
    /// `ζ₀ C |K|`
    pub c_tilde: f64,
    pub grad_p_norm: f64,
    pub energy: f64,
}

const LAMBDA_CAP: f64 = 1e150;

/// Minimal amplitude `λ*` by a doubling ladder and bisection to `1e−8`
/// relative, with the closed-form sufficient amplitude alongside.
pub fn proposition_lambda(
    grid: &Grid,
    cutoff: &CutoffProfile,
    f: &Nonlinearity,
    zeta0: f64,
    p: f64,
    kappa: f64,
) -> Result<PropositionLambda> {
    if !(zeta0 > 0.0) {
        return Err(Error::Precondition(format!("zeta(0) must be positive, got {zeta0}")));
    }
    if !(p > 2.0 && kappa > p) {
        return Err(Error::InvalidParameter(format!("need kappa > p > 2, got kappa = {kappa}, p = {p}")));
    }
    let stencil = Stencil::new(grid);
    let phi = cutoff.phi.values();
    let energy = |lambda: f64| -> Result<f64> {
        let u: Vec<f64> = phi.iter().map(|v| lambda * v).collect();
        energy_p(grid, &stencil, &u, f, zeta0, p)
    };

    let mut hi = 1.0;
    let mut e_hi = energy(hi)?;
    let lambda_star = if e_hi <= 0.0 {
        1.0
    } else {
        let mut lo = hi;
        while e_hi > 0.0 {
            lo = hi;
            hi *= 2.0;
            if hi > LAMBDA_CAP {
                return Err(Error::Precondition(format!(
                    "E_p(lambda phi) stays positive up to lambda = {LAMBDA_CAP:e}"
                )));
            }
            e_hi = energy(hi)?;
        }
        while hi - lo > 1e-9 * hi {
            let mid = 0.5 * (lo + hi);
            let e = energy(mid)?;
            if e <= 0.0 {
                hi = mid;
                e_hi = e;
            } else {
                lo = mid;
            }
        }
        hi
    };

    let grad_p_norm = stencil.grad_p_integral(phi, p);
    let c_growth = growth_constant(f, kappa)?;
    let core_measure: f64 = grid.weights().iter().zip(phi).filter(|(_, &v)| v == 1.0).map(|(w, _)| w).sum();
    let c_tilde = zeta0 * c_growth * core_measure;
    let sufficient =
        if c_tilde > 0.0 { (grad_p_norm / (p * c_tilde)).powf(1.0 / (kappa - p)).max(1.0) } else { f64::INFINITY };
    Ok(PropositionLambda { lambda_star, sufficient, c_growth, c_tilde, grad_p_norm, energy: e_hi })
}

/// `inf_{u ≥ 1} F(u)/u^κ` over log-spaced samples of `[1, 1e6]`.
fn growth_constant(f: &Nonlinearity, kappa: f64) -> Result<f64> {
    let mut best = f64::INFINITY;
    for k in 0..=6 * 64 {
        let u = 10f64.powf(k as f64 / 64.0);
        let v = f.big_f(u)? / u.powf(kappa);
        if v.is_finite() {
            best = best.min(v);
        }
    }
    Ok(best.max(0.0))
}

/// Nonzero with `E_p(u₀) ≤ 0` at `t = 0`.
pub fn in_blowup_set(grid: &Grid, u0: &Field, profile: &ModelProfile, p: f64) -> Result<bool> {
    grid.check_len(u0.len())?;
    if u0.is_zero() {
        return Ok(false);
    }
    let e = energy_p(grid, &Stencil::new(grid), u0.values(), &profile.f, profile.zeta.zeta(0.0), p)?;
    Ok(e <= 0.0)
}

/// `amplitude · φ₁ / ‖φ₁‖∞`.
pub fn eigen_scaled(eigen: &EigenPair, amplitude: f64) -> Field {
    eigen.phi1.scaled(amplitude / eigen.phi1.sup_norm())
}
