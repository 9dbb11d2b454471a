//! Lyapunov-type functionals along a discrete trajectory and the residuals of
//! the differential inequalities that drive each blow-up argument.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::model::{ModelProfile, Regime};
use crate::operators::{EigenPair, Stencil};

/// All functionals of one field at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctionalSnapshot {
    pub t: f64,
    pub zeta: f64,
    /// `a(t) ∫ u φ₁`
    pub y: f64,
    /// `e^{λ₁(m − Θ(t))}`
    pub a: f64,
    /// `½∫|∇u|² − ζ∫F(u)`
    pub e2: f64,
    /// `(1/p)∫|∇u|^p − ζ∫F(u)`
    pub ep: f64,
    /// `ζ∫F(u) − (1/p)∫|∇u|^p`
    pub h: f64,
    /// `½‖u‖₂²`
    pub l: f64,
    pub sup_norm: f64,
    pub grad_p_integral: f64,
    /// `∫ u φ₁`
    pub mass: f64,
    /// `∫ f(u) φ₁`
    pub reaction_moment: f64,
    /// `∫ F(u)`
    pub potential: f64,
}

/// Precomputed pieces shared by every snapshot of one run.
#[derive(Debug, Clone)]
pub struct Functionals<'a> {
    grid: &'a Grid,
    stencil: Stencil,
    profile: &'a ModelProfile,
    eigen: &'a EigenPair,
    p: f64,
}

impl<'a> Functionals<'a> {
    pub fn new(grid: &'a Grid, profile: &'a ModelProfile, eigen: &'a EigenPair, p: f64) -> Result<Self> {
        if !(p >= 2.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("p must be >= 2, got {p}")));
        }
        grid.check_len(eigen.phi1.len())?;
        Ok(Functionals { grid, stencil: Stencil::new(grid), profile, eigen, p })
    }

    pub fn grid(&self) -> &Grid {
        self.grid
    }

    pub fn stencil(&self) -> &Stencil {
        &self.stencil
    }

    pub fn snapshot(&self, u: &[f64], t: f64) -> Result<FunctionalSnapshot> {
        self.grid.check_len(u.len())?;
        if let Some((index, &value)) = u.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        let w = self.grid.weights();
        let phi = self.eigen.phi1.values();
        let f = &self.profile.f;
        let (mut mass, mut moment, mut potential, mut sq) = (0.0, 0.0, 0.0, 0.0);
        for k in 0..u.len() {
            let v = u[k];
            mass += w[k] * v * phi[k];
            moment += w[k] * f.f(v) * phi[k];
            potential += w[k] * f.big_f(v)?;
            sq += w[k] * v * v;
        }
        let zeta = self.profile.zeta.zeta(t);
        let theta = self.profile.zeta.theta(t)?;
        let a = (self.eigen.lambda1 * (self.profile.m - theta)).exp();
        let grad2 = self.stencil.grad_p_integral(u, 2.0);
        let e2 = 0.5 * grad2 - zeta * potential;
        let (grad_p, ep) = if self.p == 2.0 {
            (grad2, e2)
        } else {
            let g = self.stencil.grad_p_integral(u, self.p);
            (g, g / self.p - zeta * potential)
        };
        Ok(FunctionalSnapshot {
            t,
            zeta,
            y: a * mass,
            a,
            e2,
            ep,
            h: -ep,
            l: 0.5 * sq,
            sup_norm: u.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
            grad_p_integral: grad_p,
            mass,
            reaction_moment: moment,
            potential,
        })
    }
}

/// Functionals of `u` at time `t`.
pub fn snapshot(
    u: &Field,
    t: f64,
    profile: &ModelProfile,
    eigen: &EigenPair,
    p: f64,
    grid: &Grid,
) -> Result<FunctionalSnapshot> {
    Functionals::new(grid, profile, eigen, p)?.snapshot(u.values(), t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Monitor {
    DI1,
    Jensen,
    DI3,
    DI5,
    EnergyDecay,
    HGrowth,
    PoincareChain,
}

impl Monitor {
    pub fn column(&self) -> &'static str {
        match self {
            Monitor::DI1 => "res_di1",
            Monitor::Jensen => "res_jensen",
            Monitor::DI3 => "res_di3",
            Monitor::DI5 => "res_di5",
            Monitor::EnergyDecay => "res_energy_decay",
            Monitor::HGrowth => "res_h_growth",
            Monitor::PoincareChain => "res_poincare_chain",
        }
    }

    pub fn for_regime(regime: Regime) -> &'static [Monitor] {
        match regime {
            Regime::Th1 => &[Monitor::DI1, Monitor::Jensen],
            Regime::Th2 => &[Monitor::DI3, Monitor::EnergyDecay],
            Regime::Th3 { .. } => &[Monitor::HGrowth, Monitor::DI5, Monitor::PoincareChain],
        }
    }
}

/// `LHS − RHS` of one inequality; nonnegative means satisfied. `scale` is the
/// magnitude the tolerance is relative to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonitorResidual {
    pub name: Monitor,
    pub t: f64,
    pub residual: f64,
    pub scale: f64,
}

impl MonitorResidual {
    /// `tol_h = 10·(dt_max + h²)·scale`
    pub fn tolerance(&self, dt_max: f64, h: f64) -> f64 {
        10.0 * (dt_max + h * h) * self.scale
    }

    pub fn passes(&self, dt_max: f64, h: f64) -> bool {
        self.residual >= -self.tolerance(dt_max, h)
    }
}

/// Constants the inequalities of each regime refer to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonitorContext {
    pub regime: Regime,
    pub lambda1: f64,
    /// `E(u₀)` at `p = 2`.
    pub e0: f64,
    /// `A` of the energy bound.
    pub a_const: Option<f64>,
    pub alpha: Option<f64>,
    pub kappa: Option<f64>,
    /// Poincaré-type constant `C`.
    pub poincare_c: Option<f64>,
}

fn residual(name: Monitor, t: f64, lhs: f64, rhs: f64, extra_scale: f64) -> MonitorResidual {
    MonitorResidual { name, t, residual: lhs - rhs, scale: lhs.abs() + rhs.abs() + extra_scale }
}

/// Residuals of the active inequalities over one accepted step of length `dt`.
pub fn monitor_step(
    prev: &FunctionalSnapshot,
    next: &FunctionalSnapshot,
    dt: f64,
    profile: &ModelProfile,
    ctx: &MonitorContext,
) -> Result<Vec<MonitorResidual>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("monitor step needs dt > 0, got {dt}")));
    }
    let mut out = Vec::new();
    for &m in Monitor::for_regime(ctx.regime) {
        let r = match m {
            Monitor::DI1 => {
                let lhs = (next.y - prev.y) / dt;
                let rhs = prev.zeta * (-ctx.lambda1 * prev.y + profile.f.f(prev.y));
                residual(m, prev.t, lhs, rhs, 0.0)
            }
            Monitor::Jensen => {
                let lhs = next.a * next.reaction_moment;
                let rhs = profile.f.f(next.y);
                residual(m, next.t, lhs, rhs, 0.0)
            }
            Monitor::DI3 => {
                let a = ctx.a_const.ok_or(Error::MissingParameter("A"))?;
                let alpha = ctx.alpha.ok_or(Error::MissingParameter("alpha"))?;
                let lhs = (next.l - prev.l) / dt;
                let rhs = -2.0 * ctx.e0 + a * prev.l.powf(0.5 * alpha);
                residual(m, prev.t, lhs, rhs, 2.0 * ctx.e0.abs())
            }
            Monitor::DI5 => {
                let kappa = ctx.kappa.ok_or(Error::MissingParameter("kappa"))?;
                let c = ctx.poincare_c.ok_or(Error::MissingParameter("Poincare constant"))?;
                let p = ctx.regime.p();
                let lhs = (next.l - prev.l) / dt;
                let rhs = (kappa - p) / (p * c.powf(0.5 * p)) * prev.l.powf(0.5 * p);
                residual(m, prev.t, lhs, rhs, 0.0)
            }
            Monitor::EnergyDecay => {
                let (e_prev, e_next) = match ctx.regime {
                    Regime::Th3 { .. } => (prev.ep, next.ep),
                    _ => (prev.e2, next.e2),
                };
                residual(m, next.t, e_prev, e_next, 0.0)
            }
            Monitor::HGrowth => {
                if !(prev.zeta > 0.0 && next.zeta > 0.0) {
                    return Err(Error::Precondition("H growth monitor needs zeta > 0".into()));
                }
                residual(m, next.t, next.h / next.zeta, prev.h / prev.zeta, 0.0)
            }
            Monitor::PoincareChain => {
                let c = ctx.poincare_c.ok_or(Error::MissingParameter("Poincare constant"))?;
                let p = ctx.regime.p();
                let lhs = c * next.grad_p_integral.powf(2.0 / p);
                residual(m, next.t, lhs, next.l, 0.0)
            }
        };
        out.push(r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Coefficient, Nonlinearity};
    use crate::operators::principal_eigenpair;
    use std::f64::consts::PI;

    fn setup(n: usize) -> (Grid, EigenPair, ModelProfile) {
        let g = Grid::interval(0.0, PI, n).unwrap();
        let e = principal_eigenpair(&g, 1e-10).unwrap();
        let profile = ModelProfile::new(Nonlinearity::power(4.0).unwrap(), Coefficient::one());
        (g, e, profile)
    }

    #[test]
    fn zero_field_has_zero_functionals() {
        let (g, e, profile) = setup(101);
        let s = snapshot(&Field::zeros(&g), 0.0, &profile, &e, 2.0, &g).unwrap();
        assert_eq!((s.y, s.e2, s.ep, s.h, s.l), (0.0, 0.0, 0.0, 0.0, 0.0));
        assert_eq!(s.a, 1.0);
    }

    #[test]
    fn energy_of_sine() {
        let (g, e, profile) = setup(2001);
        let u = Field::from_fn(&g, |x| x[0].sin()).unwrap();
        let s = snapshot(&u, 0.0, &profile, &e, 2.0, &g).unwrap();
        assert!((s.e2 - 5.0 * PI / 32.0).abs() < 1e-3, "{}", s.e2);
        assert_eq!(s.ep, s.e2);
        assert_eq!(s.h, -s.ep);
        let l2 = g.lp_norm(&u, 2.0).unwrap();
        assert!((s.l - 0.5 * l2 * l2).abs() <= 1e-12 * s.l);
    }

    #[test]
    fn eigen_weighted_mass_of_phi1() {
        let (g, e, profile) = setup(401);
        let s = snapshot(&e.phi1, 0.0, &profile, &e, 2.0, &g).unwrap();
        assert!((s.y - PI / 8.0).abs() < 1e-3, "{}", s.y);
        assert!((s.y - s.mass).abs() == 0.0);
    }

    #[test]
    fn weight_consistent_with_theta() {
        let g = Grid::interval(0.0, PI, 101).unwrap();
        let e = principal_eigenpair(&g, 1e-10).unwrap();
        let zeta = Coefficient::linear(0.5, 1.0);
        let profile = ModelProfile::new(Nonlinearity::exp_minus_one(), zeta.clone()).with_m(-0.125);
        let fx = Functionals::new(&g, &profile, &e, 2.0).unwrap();
        for t in [0.0, 0.3, 0.5, 2.0] {
            let s = fx.snapshot(e.phi1.values(), t).unwrap();
            let lhs = s.a * (e.lambda1 * zeta.theta(t).unwrap()).exp();
            assert!((lhs - (e.lambda1 * -0.125).exp()).abs() < 1e-10);
            assert!(s.a > 0.0 && s.a <= 1.0);
        }
    }

    #[test]
    fn stationary_zero_trajectory_residuals_vanish() {
        let (g, e, profile) = setup(51);
        let fx = Functionals::new(&g, &profile, &e, 3.0).unwrap();
        let z = vec![0.0; g.len()];
        let (s0, s1) = (fx.snapshot(&z, 0.0).unwrap(), fx.snapshot(&z, 0.1).unwrap());
        for regime in [Regime::Th1, Regime::Th2, Regime::Th3 { p: 3.0 }] {
            let ctx = MonitorContext {
                regime,
                lambda1: e.lambda1,
                e0: 0.0,
                a_const: Some(1.0),
                alpha: Some(4.0),
                kappa: Some(4.0),
                poincare_c: Some(1.0),
            };
            for r in monitor_step(&s0, &s1, s1.t - s0.t, &profile, &ctx).unwrap() {
                assert!(r.residual.abs() <= 1e-12, "{r:?}");
            }
        }
    }

    #[test]
    fn rejects_nonpositive_dt_and_nonfinite_fields() {
        let (g, e, profile) = setup(21);
        let fx = Functionals::new(&g, &profile, &e, 2.0).unwrap();
        let z = vec![0.0; g.len()];
        let s = fx.snapshot(&z, 0.0).unwrap();
        let ctx = MonitorContext {
            regime: Regime::Th1,
            lambda1: 1.0,
            e0: 0.0,
            a_const: None,
            alpha: None,
            kappa: None,
            poincare_c: None,
        };
        assert!(monitor_step(&s, &s, 0.0, &profile, &ctx).is_err());
        let mut bad = z.clone();
        bad[3] = f64::NAN;
        assert!(matches!(fx.snapshot(&bad, 0.0), Err(Error::NonFinite { index: 3, .. })));
    }
}
