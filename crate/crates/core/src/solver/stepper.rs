use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::model::ModelProfile;
use crate::operators::Stencil;

/// Step-size controls of the explicit scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepControls {
    pub sigma_d: f64,
    pub sigma_r: f64,
    pub dt_min: f64,
    /// Upper cap on every step.
    pub dt_max: f64,
    pub delta0: f64,
    pub eps_reg: f64,
}

impl Default for StepControls {
    fn default() -> Self {
        StepControls { sigma_d: 0.4, sigma_r: 0.1, dt_min: 1e-14, dt_max: 1e-2, delta0: 1e-12, eps_reg: 1e-4 }
    }
}

/// Accepted explicit Euler update.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub u_next: Vec<f64>,
    pub dt_used: f64,
    /// Trials discarded because the update was not finite.
    pub rejections: usize,
}

/// Explicit Euler for `u̇ = Δ_p^h u + ζ(t) f(u)` with a degenerate-diffusion
/// and a reaction step limit.
#[derive(Debug, Clone)]
pub struct Stepper<'a> {
    stencil: Stencil,
    boundary: Vec<bool>,
    h_eff_sq: f64,
    profile: &'a ModelProfile,
    p: f64,
    pub controls: StepControls,
    lap: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(grid: &Grid, profile: &'a ModelProfile, p: f64, controls: StepControls) -> Result<Self> {
        if !(p >= 2.0 && p.is_finite()) {
            return Err(Error::InvalidParameter(format!("p must be >= 2, got {p}")));
        }
        let c = &controls;
        if !(c.sigma_d > 0.0
            && c.sigma_r > 0.0
            && c.dt_min > 0.0
            && c.dt_max > 0.0
            && c.delta0 > 0.0
            && c.eps_reg >= 0.0)
        {
            return Err(Error::InvalidParameter(format!("invalid step controls {controls:?}")));
        }
        Ok(Stepper {
            stencil: Stencil::new(grid),
            boundary: (0..grid.len()).map(|k| grid.is_boundary(k)).collect(),
            h_eff_sq: grid.h_eff_sq(),
            profile,
            p,
            controls,
            lap: vec![0.0; grid.len()],
        })
    }

    /// `min(σ_d h²/((p−1)κ_max + δ₀), σ_r/(ζ Λ_f + δ₀))`.
    pub fn stable_dt(&self, u: &[f64], t: f64) -> f64 {
        let c = &self.controls;
        let kappa = self.stencil.max_flux_coefficient(u, self.p, c.eps_reg);
        let diffusion = c.sigma_d * self.h_eff_sq / ((self.p - 1.0) * kappa + c.delta0);
        let sup = u.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let lip = self.profile.f.local_lipschitz(sup);
        let reaction = c.sigma_r / (self.profile.zeta.zeta(t).abs() * lip + c.delta0);
        diffusion.min(reaction)
    }

    /// One accepted step of at most `dt_try`, halving after non-finite trials.
    pub fn step(&mut self, u: &[f64], t: f64, dt_try: f64) -> Result<StepOutcome> {
        if !(dt_try > 0.0) {
            return Err(Error::InvalidParameter(format!("dt_try must be positive, got {dt_try}")));
        }
        if let Some((index, &value)) = u.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        let mut dt = dt_try.min(self.controls.dt_max).min(self.stable_dt(u, t));
        self.stencil.apply_into(u, self.p, self.controls.eps_reg, &mut self.lap);
        let zeta = self.profile.zeta.zeta(t);
        let rate: Vec<f64> = u
            .iter()
            .zip(&self.lap)
            .zip(&self.boundary)
            .map(|((&v, &l), &b)| if b { 0.0 } else { l + zeta * self.profile.f.f(v) })
            .collect();
        let mut rejections = 0;
        loop {
            let next: Vec<f64> = u.iter().zip(&rate).map(|(v, r)| v + dt * r).collect();
            if next.iter().all(|v| v.is_finite()) {
                return Ok(StepOutcome { u_next: next, dt_used: dt, rejections });
            }
            rejections += 1;
            dt *= 0.5;
            if dt < self.controls.dt_min {
                return Err(Error::DtCollapse { t, dt_min: self.controls.dt_min });
            }
        }
    }
}

/// Single explicit step on `grid`; see [`Stepper::step`].
pub fn step(
    grid: &Grid,
    u: &Field,
    t: f64,
    dt_try: f64,
    profile: &ModelProfile,
    p: f64,
    eps_reg: f64,
) -> Result<(Field, f64, bool)> {
    grid.check_len(u.len())?;
    let controls = StepControls { eps_reg, dt_max: f64::INFINITY, ..StepControls::default() };
    let mut stepper = Stepper::new(grid, profile, p, controls)?;
    let out = stepper.step(u.values(), t, dt_try)?;
    Ok((Field::from_raw(out.u_next), out.dt_used, true))
}

/// Kahan-compensated running time.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Clock {
    sum: f64,
    comp: f64,
}

impl Clock {
    pub fn now(&self) -> f64 {
        self.sum + self.comp
    }

    pub fn advance(&mut self, dt: f64) {
        let y = dt - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }
}
