//! Upper bounds on the blow-up time from the comparison arguments.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{threshold_c, Nonlinearity, Sampling};
use crate::quadrature;

const QUAD_TOL: f64 = 1e-10;
const MAX_REPORTED_ERROR: f64 = 1e-8;
const MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Th1,
    Th2,
    Th3,
    Lemma,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub regime: BoundKind,
    #[serde(rename = "T_star")]
    pub t_star: f64,
    pub inputs: BTreeMap<&'static str, f64>,
    /// Absolute error estimate of any quadrature involved.
    pub quad_error: f64,
}

impl BoundReport {
    fn new(regime: BoundKind, t_star: f64, quad_error: f64, inputs: &[(&'static str, f64)]) -> Self {
        BoundReport { regime, t_star, inputs: inputs.iter().copied().collect(), quad_error }
    }

    pub fn input(&self, key: &str) -> Option<f64> {
        self.inputs.get(key).copied()
    }
}

fn improper(g: impl Fn(f64) -> f64, a: f64) -> Result<quadrature::Quadrature> {
    let q = quadrature::integrate_to_infinity(g, a, QUAD_TOL)?;
    if q.relative_error() > MAX_REPORTED_ERROR {
        return Err(Error::Quadrature(format!(
            "error estimate {:e} exceeds the reporting threshold",
            q.relative_error()
        )));
    }
    Ok(q)
}

/// `T* = −m + 2∫_{y₀}^∞ ds/f(s)` with `y₀ = e^{mλ₁} ∫u₀φ₁`.
///
/// Fails when `y₀` is below the threshold `C` past which `f(s) ≥ 2λ₁ s`.
pub fn tmax1(f: &Nonlinearity, m: f64, lambda1: f64, mass0: f64) -> Result<BoundReport> {
    let sampling = Sampling::default();
    let lambda_pos = match f.params.lambda_pos {
        Some(l) => l,
        None => crate::model::infer_lambda_pos(f, &sampling)
            .ok_or_else(|| Error::Precondition("f has no positivity threshold lambda".into()))?,
    };
    let c = threshold_c(f, lambda1, lambda_pos, &sampling)?;
    tmax1_with_threshold(f, m, lambda1, mass0, c)
}

/// [`tmax1`] with a precomputed threshold `C`.
pub fn tmax1_with_threshold(f: &Nonlinearity, m: f64, lambda1: f64, mass0: f64, c: f64) -> Result<BoundReport> {
    if !(m <= 0.0) || !(lambda1 > 0.0) {
        return Err(Error::InvalidParameter(format!("need m <= 0 and lambda1 > 0, got m = {m}, lambda1 = {lambda1}")));
    }
    let y0 = (m * lambda1).exp() * mass0;
    if !(y0 >= c * (1.0 - 1e-10)) {
        return Err(Error::Precondition(format!("largeness condition unmet: y0 = {y0:e} < C = {c:e}")));
    }
    let q = improper(|s| 1.0 / f.f(s), y0)?;
    Ok(BoundReport::new(
        BoundKind::Th1,
        -m + 2.0 * q.value,
        2.0 * q.error,
        &[("m", m), ("lambda1", lambda1), ("mass0", mass0), ("y0", y0), ("C", c)],
    ))
}

/// `A = 2^{α/2} C₀ ε ζ(0) / ((2+ε) |Ω|^{α/2−1})`.
pub fn constant_a(epsilon: f64, c0: f64, alpha: f64, zeta0: f64, measure: f64) -> Result<f64> {
    if !(epsilon > 0.0 && c0 > 0.0 && alpha > 2.0 && zeta0 > 0.0 && measure > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need epsilon, C0, zeta(0), |Omega| > 0 and alpha > 2; got {epsilon}, {c0}, {zeta0}, {measure}, {alpha}"
        )));
    }
    Ok(2f64.powf(0.5 * alpha) * c0 * epsilon * zeta0 / ((2.0 + epsilon) * measure.powf(0.5 * alpha - 1.0)))
}

/// Blow-up bound for `y′ ≥ −C₁ + C₂ y^q`, `y(0) = y₀`.
pub fn lemma_bound(c1: f64, c2: f64, q: f64, y0: f64) -> Result<BoundReport> {
    if !(c2 > 0.0 && q > 1.0 && y0 > 0.0 && c1.is_finite()) {
        return Err(Error::InvalidParameter(format!("need C2 > 0, q > 1, y0 > 0; got {c2}, {q}, {y0}")));
    }
    let inputs = [("C1", c1), ("C2", c2), ("q", q), ("y0", y0)];
    if c1 <= 0.0 {
        let t = y0.powf(1.0 - q) / (c2 * (q - 1.0));
        return Ok(BoundReport::new(BoundKind::Lemma, t, 0.0, &inputs));
    }
    let lead = c2 * y0.powf(q);
    if !(lead - c1 >= MARGIN * lead) {
        return Err(Error::Precondition(format!(
            "no blow-up guaranteed: C2 y0^q = {lead:e} does not exceed C1 = {c1:e}"
        )));
    }
    let qd = improper(|z| 1.0 / (c2 * z.powf(q) - c1), y0)?;
    Ok(BoundReport::new(BoundKind::Lemma, qd.value, qd.error, &inputs))
}

/// Energy-method bound with `y₀ = ‖u₀‖₂²/2`: the lemma with `C₁ = 2E₀`,
/// `C₂ = A`, exponent `α/2`.
pub fn tmax2(e0: f64, norm_u0_2: f64, a: f64, alpha: f64) -> Result<BoundReport> {
    if !(alpha > 2.0) {
        return Err(Error::InvalidParameter(format!("alpha must exceed 2, got {alpha}")));
    }
    let y0 = 0.5 * norm_u0_2 * norm_u0_2;
    let lemma = lemma_bound(2.0 * e0, a, 0.5 * alpha, y0).map_err(|e| match e {
        Error::Precondition(_) => Error::Precondition(format!(
            "largeness condition unmet: A y0^(alpha/2) = {:e} must exceed 2 E0 = {:e}",
            a * y0.powf(0.5 * alpha),
            2.0 * e0
        )),
        other => other,
    })?;
    Ok(BoundReport::new(
        BoundKind::Th2,
        lemma.t_star,
        lemma.quad_error,
        &[("E0", e0), ("norm_u0_2", norm_u0_2), ("y0", y0), ("A", a), ("alpha", alpha)],
    ))
}

/// `T* = 2p C^{p/2} L₀^{1−p/2} / ((p−2)(κ−p))`.
pub fn tmax3(c: f64, p: f64, kappa: f64, l0: f64) -> Result<BoundReport> {
    if !(p > 2.0 && kappa > p) {
        return Err(Error::InvalidParameter(format!("need kappa > p > 2, got kappa = {kappa}, p = {p}")));
    }
    if !(c > 0.0 && l0 > 0.0) {
        return Err(Error::InvalidParameter(format!("need C > 0 and L0 > 0, got {c}, {l0}")));
    }
    let t = 2.0 * p * c.powf(0.5 * p) * l0.powf(1.0 - 0.5 * p) / ((p - 2.0) * (kappa - p));
    Ok(BoundReport::new(BoundKind::Th3, t, 0.0, &[("C", c), ("p", p), ("kappa", kappa), ("L0", l0)]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tmax1_examples() {
        let sq = Nonlinearity::power(3.0).unwrap();
        let r = tmax1(&sq, 0.0, 1.0, 2.0).unwrap();
        assert!((r.t_star - 1.0).abs() < 1e-10, "{r:?}");
        let e = Nonlinearity::exp_minus_one();
        let r = tmax1(&e, 0.0, 1.0, 3.0).unwrap();
        let exact = -2.0 * (1.0 - (-3.0_f64).exp()).ln();
        assert!((r.t_star - exact).abs() < 1e-6);
        assert!((r.t_star - 0.10214).abs() < 1e-5);
        assert!(r.quad_error <= 1e-8 * r.t_star);
    }

    #[test]
    fn tmax1_shift_by_m() {
        let e = Nonlinearity::exp_minus_one();
        let c = 1.2564;
        let base = tmax1_with_threshold(&e, 0.0, 1.0, 3.0, c).unwrap();
        // same y0 = e^{mλ₁}·mass0 with m = −1
        let shifted = tmax1_with_threshold(&e, -1.0, 1.0, 3.0 * 1f64.exp(), c).unwrap();
        assert!((shifted.t_star - base.t_star - 1.0).abs() < 1e-9);
    }

    #[test]
    fn tmax1_largeness_and_divergence() {
        let e = Nonlinearity::exp_minus_one();
        assert!(matches!(tmax1(&e, 0.0, 1.0, 1.0), Err(Error::Precondition(_))));
        let lin = Nonlinearity::custom("lin", |s| 3.0 * s);
        assert!(matches!(tmax1_with_threshold(&lin, 0.0, 1.0, 2.0, 1.0), Err(Error::Divergent { .. })));
    }

    #[test]
    fn constant_a_examples() {
        assert!((constant_a(1.0, 1.0, 4.0, 1.0, 1.0).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        let a3 = constant_a(1.0, 1.0, 3.0, 1.0, 1.0).unwrap();
        assert!((a3 - 2f64.powf(1.5) / 3.0).abs() < 1e-15);
        let mut prev = 0.0;
        for eps in [0.1, 1.0, 10.0, 100.0, 1e4] {
            let a = constant_a(eps, 1.0, 4.0, 1.0, 2.0).unwrap();
            assert!(a > prev);
            prev = a;
        }
        assert!(prev < 4.0 / 2.0);
        assert!(constant_a(1.0, 1.0, 2.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn tmax2_examples() {
        let a = constant_a(1.0, 1.0, 4.0, 1.0, 1.0).unwrap();
        let closed = tmax2(-0.1, 1.0, a, 4.0).unwrap();
        assert!((closed.t_star - 1.5).abs() < 1e-12);
        let at_zero = tmax2(0.0, 1.0, a, 4.0).unwrap();
        assert!((at_zero.t_star - 1.5).abs() < 1e-12);
        let pos = tmax2(0.5, 2.0, 1.0, 4.0).unwrap();
        assert!((pos.t_star - 0.5 * 3f64.ln()).abs() < 1e-9, "{pos:?}");
        assert!(matches!(tmax2(1.0, 1.0, 1.0, 4.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn lemma_examples() {
        assert!((lemma_bound(0.0, 1.0, 2.0, 1.0).unwrap().t_star - 1.0).abs() < 1e-15);
        let r = lemma_bound(1.0, 1.0, 2.0, 2.0).unwrap();
        assert!((r.t_star - 0.5 * 3f64.ln()).abs() < 1e-9);
        assert!(matches!(lemma_bound(1.0, 1.0, 2.0, 0.5), Err(Error::Precondition(_))));
    }

    #[test]
    fn lemma_limit_as_c1_vanishes() {
        let closed = lemma_bound(0.0, 1.3, 2.5, 0.8).unwrap().t_star;
        let mut prev = f64::INFINITY;
        for k in 1..=8 {
            let t = lemma_bound(10f64.powi(-k), 1.3, 2.5, 0.8).unwrap().t_star;
            assert!(t <= prev && t >= closed);
            prev = t;
        }
        assert!((prev - closed).abs() < 1e-6 * closed);
    }

    #[test]
    fn tmax3_examples() {
        assert!((tmax3(1.0, 3.0, 4.0, 1.0).unwrap().t_star - 6.0).abs() < 1e-14);
        let a = tmax3(0.7, 3.0, 4.0, 2.0).unwrap().t_star;
        let b = tmax3(0.7, 3.0, 5.0, 2.0).unwrap().t_star;
        assert!((a - 2.0 * b).abs() < 1e-12 * a);
        let c = tmax3(0.7, 4.0, 5.0, 1.0).unwrap().t_star;
        let d = tmax3(0.7, 4.0, 5.0, 4.0).unwrap().t_star;
        assert!((d - c / 4.0).abs() < 1e-12 * c);
        assert!(tmax3(1.0, 3.0, 3.0, 1.0).is_err());
        assert!(tmax3(1.0, 2.0, 3.0, 1.0).is_err());
    }

    #[test]
    fn report_serializes_with_expected_fields() {
        let r = tmax3(1.0, 3.0, 4.0, 1.0).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["regime"], "th3");
        assert_eq!(v["T_star"], 6.0);
        assert_eq!(v["inputs"]["kappa"], 4.0);
        assert!(v.get("quad_error").is_some());
    }
}
