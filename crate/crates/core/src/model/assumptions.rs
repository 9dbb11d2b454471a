use serde::{Deserialize, Serialize};

use super::coefficient::{compute_m, Coefficient, TailBehavior};
use super::nonlinearity::Nonlinearity;
use crate::error::{Error, Result};
use crate::quadrature;

/// Which theorem's hypotheses to verify.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum Regime {
    Th1,
    Th2,
    Th3 { p: f64 },
}

impl Regime {
    pub fn p(&self) -> f64 {
        match self {
            Regime::Th3 { p } => *p,
            _ => 2.0,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Regime::Th1 => "th1",
            Regime::Th2 => "th2",
            Regime::Th3 { .. } => "th3",
        }
    }

    pub fn assumptions(&self) -> &'static [Assumption] {
        match self {
            Regime::Th1 => &[Assumption::F1, Assumption::F2, Assumption::F3, Assumption::Z1],
            Regime::Th2 => &[Assumption::Ff1, Assumption::Z2],
            Regime::Th3 { .. } => &[Assumption::FF, Assumption::Z2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Assumption {
    #[serde(rename = "f1")]
    F1,
    #[serde(rename = "f2")]
    F2,
    #[serde(rename = "f3")]
    F3,
    #[serde(rename = "z1")]
    Z1,
    #[serde(rename = "ff1")]
    Ff1,
    #[serde(rename = "z2")]
    Z2,
    #[serde(rename = "fF")]
    FF,
}

impl Assumption {
    pub fn key(&self) -> &'static str {
        match self {
            Assumption::F1 => "f1",
            Assumption::F2 => "f2",
            Assumption::F3 => "f3",
            Assumption::Z1 => "z1",
            Assumption::Ff1 => "ff1",
            Assumption::Z2 => "z2",
            Assumption::FF => "fF",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    Holds,
    /// `witness` is the `s`- or `t`-value at which the check failed.
    Fails {
        witness: f64,
        detail: String,
    },
    Undetermined {
        detail: String,
    },
}

impl Status {
    pub fn holds(&self) -> bool {
        matches!(self, Status::Holds)
    }

    pub fn fails(&self) -> bool {
        matches!(self, Status::Fails { .. })
    }

    fn fails_at(witness: f64, detail: impl Into<String>) -> Self {
        Status::Fails { witness, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionCheck {
    pub assumption: Assumption,
    #[serde(flatten)]
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub regime: Regime,
    pub checks: Vec<AssumptionCheck>,
    /// `inf Θ` when (z1) was evaluated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    /// λ of (f2): declared, or the smallest sample from which `f` stays positive.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_pos: Option<f64>,
}

impl AssumptionReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.status.holds())
    }

    pub fn any_fails(&self) -> bool {
        self.checks.iter().any(|c| c.status.fails())
    }

    pub fn get(&self, a: Assumption) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.assumption == a)
    }
}

/// Sampling used by the pointwise checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    /// `|s|` range, sampled log-uniformly on both signs.
    pub range: (f64, f64),
    pub per_decade: usize,
    /// Time horizon for (z1) and (z2).
    pub horizon: f64,
    pub time_samples: usize,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling { range: (1e-6, 1e6), per_decade: 512, horizon: 10.0, time_samples: 4096 }
    }
}

impl Sampling {
    /// Positive sample points `10^{log10(lo) + k/per_decade}`, ascending.
    pub fn positive_points(&self) -> Vec<f64> {
        let (lo, hi) = self.range;
        let (l0, l1) = (lo.log10(), hi.log10());
        let count = ((l1 - l0) * self.per_decade as f64).round() as usize;
        (0..=count).map(|k| 10f64.powf(l0 + k as f64 / self.per_decade as f64)).collect()
    }

    /// `−s_max … −s_min, 0, s_min … s_max`.
    pub fn signed_points(&self) -> Vec<f64> {
        let pos = self.positive_points();
        let mut all: Vec<f64> = pos.iter().rev().map(|s| -s).collect();
        all.push(0.0);
        all.extend(pos);
        all
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.range;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) || self.per_decade == 0 {
            return Err(Error::InvalidParameter(format!("invalid sampling range {:?}", self.range)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) || self.time_samples < 2 {
            return Err(Error::InvalidParameter(format!("invalid sampling horizon {}", self.horizon)));
        }
        Ok(())
    }
}

fn tol(scale: f64) -> f64 {
    1e-9 * scale + 1e-300
}

/// Evaluates the hypotheses of `regime` by sampling.
pub fn check_assumptions(
    f: &Nonlinearity,
    zeta: &Coefficient,
    regime: Regime,
    sampling: &Sampling,
) -> Result<AssumptionReport> {
    sampling.validate()?;
    let mut report = AssumptionReport { regime, checks: Vec::new(), m: None, lambda_pos: None };
    match regime {
        Regime::Th1 => {
            report.checks.push(check_f1(f, sampling));
            let (f2, lambda) = check_f2(f, sampling);
            report.checks.push(f2);
            report.lambda_pos = lambda;
            report.checks.push(check_f3(f, lambda));
            let (z1, m) = check_z1(zeta, sampling);
            report.checks.push(z1);
            report.m = m;
        }
        Regime::Th2 => {
            let params = &f.params;
            let alpha = params.alpha.ok_or(Error::MissingParameter("alpha"))?;
            let eps = params.epsilon.ok_or(Error::MissingParameter("epsilon"))?;
            let c0 = params.c0.ok_or(Error::MissingParameter("c0"))?;
            report.checks.push(check_ff1(f, alpha, eps, c0, sampling));
            report.checks.push(check_z2(zeta, sampling));
        }
        Regime::Th3 { p } => {
            let kappa = f.params.kappa.ok_or(Error::MissingParameter("kappa"))?;
            report.checks.push(check_ff(f, kappa, p, sampling));
            report.checks.push(check_z2(zeta, sampling));
        }
    }
    Ok(report)
}

fn check(assumption: Assumption, status: Status) -> AssumptionCheck {
    AssumptionCheck { assumption, status, note: None }
}

fn check_f1(f: &Nonlinearity, sampling: &Sampling) -> AssumptionCheck {
    let f0 = f.f(0.0);
    if f0 != 0.0 {
        return check(Assumption::F1, Status::fails_at(0.0, format!("f(0) = {f0:e}")));
    }
    let pts = sampling.signed_points();
    // (slope, rounding bound of the slope) of the previous pair
    let mut prev: Option<(f64, f64)> = None;
    let mut truncated = None;
    for w in pts.windows(2) {
        let (a, b) = (f.f(w[0]), f.f(w[1]));
        let dx = w[1] - w[0];
        let slope = (b - a) / dx;
        if !slope.is_finite() {
            truncated = Some(w[0]);
            if w[0] > 0.0 {
                break;
            }
            prev = None;
            continue;
        }
        let noise = 4.0 * f64::EPSILON * (a.abs() + b.abs()) / dx;
        if let Some((s0, n0)) = prev {
            if slope - s0 < -(tol(s0.abs() + slope.abs()) + n0 + noise) {
                return check(
                    Assumption::F1,
                    Status::fails_at(w[0], format!("second difference {:e} < 0", slope - s0)),
                );
            }
        }
        prev = Some((slope, noise));
    }
    let mut c = check(Assumption::F1, Status::Holds);
    if let Some(s) = truncated {
        c.note = Some(format!("f is not finite beyond |s| = {s:e}; convexity unchecked there"));
    }
    c
}

/// λ of (f2): declared, or inferred from the positive samples; `None` when
/// `f` is not eventually positive on the sampled range.
pub fn infer_lambda_pos(f: &Nonlinearity, sampling: &Sampling) -> Option<f64> {
    match check_f2(f, sampling) {
        (c, lambda) if c.status.holds() => lambda,
        _ => None,
    }
}

fn check_f2(f: &Nonlinearity, sampling: &Sampling) -> (AssumptionCheck, Option<f64>) {
    let pts = sampling.positive_points();
    if let Some(lambda) = f.params.lambda_pos {
        if !(lambda > 0.0) {
            return (check(Assumption::F2, Status::fails_at(lambda, "declared lambda must be positive")), None);
        }
        let mut candidates = vec![lambda];
        candidates.extend(pts.iter().copied().filter(|&s| s >= lambda));
        for s in candidates {
            let v = f.f(s);
            if !(v > 0.0) && !v.is_nan() {
                return (check(Assumption::F2, Status::fails_at(s, format!("f(s) = {v:e} <= 0"))), Some(lambda));
            }
        }
        return (check(Assumption::F2, Status::Holds), Some(lambda));
    }
    // infer: first sample after the last nonpositive value
    let last_bad = pts.iter().rposition(|&s| !(f.f(s) > 0.0) && !f.f(s).is_nan());
    match last_bad {
        Some(i) if i + 1 == pts.len() => {
            let s = pts[i];
            (
                check(Assumption::F2, Status::fails_at(s, format!("f(s) = {:e} <= 0 at the largest sample", f.f(s)))),
                None,
            )
        }
        Some(i) => {
            let mut c = check(Assumption::F2, Status::Holds);
            c.note = Some(format!("lambda inferred from samples: {:e}", pts[i + 1]));
            (c, Some(pts[i + 1]))
        }
        None => {
            let mut c = check(Assumption::F2, Status::Holds);
            c.note = Some(format!("f > 0 on every positive sample; lambda = {:e}", pts[0]));
            (c, Some(pts[0]))
        }
    }
}

fn check_f3(f: &Nonlinearity, lambda: Option<f64>) -> AssumptionCheck {
    let Some(lambda) = lambda else {
        return check(Assumption::F3, Status::Undetermined { detail: "no lambda with f > 0 beyond it".into() });
    };
    let s0 = lambda.max(1.0);
    match quadrature::integrate_to_infinity(|s| 1.0 / f.f(s), s0, 1e-10) {
        Ok(q) => {
            let mut c = check(Assumption::F3, Status::Holds);
            c.note = Some(format!("integral of 1/f from {s0:e} to infinity = {:.12e}", q.value));
            c
        }
        Err(Error::Divergent { at }) => check(
            Assumption::F3,
            Status::fails_at(
                at,
                format!("integral of ds/f(s) from {s0:e} diverges (integrand not decaying at s = {at:e})"),
            ),
        ),
        Err(e) => check(Assumption::F3, Status::Undetermined { detail: e.to_string() }),
    }
}

fn check_z1(zeta: &Coefficient, sampling: &Sampling) -> (AssumptionCheck, Option<f64>) {
    match compute_m(zeta, sampling.horizon, zeta.tail) {
        Ok(m) => {
            let mut c = check(Assumption::Z1, Status::Holds);
            c.note = Some(format!("m = {m:e} on [0, {}]", sampling.horizon));
            (c, Some(m))
        }
        Err(Error::UnboundedTheta) => {
            let t = sampling.horizon;
            let theta = zeta.theta(t).unwrap_or(f64::NAN);
            let detail = format!("zeta < 1 forever: Theta({t}) = {theta:e} and Theta is unbounded below");
            (check(Assumption::Z1, Status::fails_at(t, detail)), None)
        }
        Err(e) => (check(Assumption::Z1, Status::Undetermined { detail: e.to_string() }), None),
    }
}

fn check_ff1(f: &Nonlinearity, alpha: f64, eps: f64, c0: f64, sampling: &Sampling) -> AssumptionCheck {
    if !(alpha > 2.0 && eps > 0.0 && c0 > 0.0) {
        return check(
            Assumption::Ff1,
            Status::fails_at(f64::NAN, format!("need alpha > 2, epsilon > 0, C0 > 0; got {alpha}, {eps}, {c0}")),
        );
    }
    let mut first_small: Option<(f64, String)> = None;
    let mut first_large: Option<(f64, String)> = None;
    let mut truncated = None;
    for s in sampling.signed_points() {
        let (sf, big_f) = match f.big_f(s) {
            Ok(big_f) => (s * f.f(s), big_f),
            Err(_) => {
                truncated.get_or_insert(s);
                continue;
            }
        };
        let mid = (2.0 + eps) * big_f;
        let low = c0 * s.abs().powf(alpha);
        if !(sf.is_finite() && mid.is_finite() && low.is_finite()) {
            truncated.get_or_insert(s);
            continue;
        }
        let bad = if sf < mid - tol(sf.abs() + mid.abs()) {
            Some(format!("s f(s) = {sf:e} < (2+eps) F(s) = {mid:e}"))
        } else if mid < low - tol(mid.abs() + low.abs()) {
            Some(format!("(2+eps) F(s) = {mid:e} < C0 |s|^alpha = {low:e}"))
        } else {
            None
        };
        if let Some(detail) = bad {
            let slot = if s.abs() > 1.0 { &mut first_large } else { &mut first_small };
            slot.get_or_insert((s, detail));
        }
    }
    let mut c = match (first_large, first_small) {
        (Some((s, detail)), _) => check(Assumption::Ff1, Status::fails_at(s, detail)),
        (None, Some((s, detail))) => {
            let mut c = check(Assumption::Ff1, Status::fails_at(s, detail));
            c.note = Some("violations only at |s| <= 1".into());
            c
        }
        (None, None) => check(Assumption::Ff1, Status::Holds),
    };
    if let Some(s) = truncated {
        let msg = format!("not finite from s = {s:e}; unchecked there");
        c.note = Some(c.note.map_or(msg.clone(), |n| format!("{n}; {msg}")));
    }
    c
}

fn check_z2(zeta: &Coefficient, sampling: &Sampling) -> AssumptionCheck {
    let z0 = zeta.zeta(0.0);
    if !(z0 > 0.0) {
        return check(Assumption::Z2, Status::fails_at(0.0, format!("zeta(0) = {z0:e} is not positive")));
    }
    let n = sampling.time_samples;
    for i in 0..=n {
        let t = sampling.horizon * i as f64 / n as f64;
        let d = zeta.zeta_prime(t);
        let z = zeta.zeta(t);
        if !(d >= -1e-8 * z.abs().max(1.0)) {
            return check(Assumption::Z2, Status::fails_at(t, format!("zeta'(t) = {d:e} < 0")));
        }
    }
    let mut c = check(Assumption::Z2, Status::Holds);
    if zeta.tail != TailBehavior::AtLeastOne {
        c.note = Some(format!("checked on [0, {}] only", sampling.horizon));
    }
    c
}

fn check_ff(f: &Nonlinearity, kappa: f64, p: f64, sampling: &Sampling) -> AssumptionCheck {
    if !(p > 2.0 && kappa > p) {
        return check(
            Assumption::FF,
            Status::fails_at(kappa, format!("need kappa > p > 2; got kappa = {kappa}, p = {p}")),
        );
    }
    let mut truncated = None;
    for s in sampling.signed_points() {
        let Ok(big_f) = f.big_f(s) else {
            truncated.get_or_insert(s);
            continue;
        };
        let kf = kappa * big_f;
        let sf = s * f.f(s);
        if !(kf.is_finite() && sf.is_finite()) {
            truncated.get_or_insert(s);
            continue;
        }
        if kf < -tol(kf.abs()) {
            return check(Assumption::FF, Status::fails_at(s, format!("kappa F(s) = {kf:e} < 0")));
        }
        if sf < kf - tol(sf.abs() + kf.abs()) {
            return check(Assumption::FF, Status::fails_at(s, format!("s f(s) = {sf:e} < kappa F(s) = {kf:e}")));
        }
    }
    let mut c = check(Assumption::FF, Status::Holds);
    if let Some(s) = truncated {
        c.note = Some(format!("not finite from s = {s:e}; unchecked there"));
    }
    c
}

/// Smallest `C ≥ λ` with `f(s) ≥ 2λ₁ s` for every sampled `s ≥ C`.
pub fn threshold_c(f: &Nonlinearity, lambda1: f64, lambda_pos: f64, sampling: &Sampling) -> Result<f64> {
    if !(lambda1 > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda1 must be positive, got {lambda1}")));
    }
    let g = |s: f64| {
        let v = f.f(s) - 2.0 * lambda1 * s;
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut pts = vec![lambda_pos];
    pts.extend(sampling.positive_points().into_iter().filter(|&s| s > lambda_pos));
    let Some(last_neg) = pts.iter().rposition(|&s| g(s) < 0.0) else {
        return Ok(lambda_pos);
    };
    if last_neg + 1 == pts.len() {
        return Err(Error::Precondition(format!("f(s) < 2 lambda1 s up to the search cap s = {:e}", pts[last_neg])));
    }
    let (mut lo, mut hi) = (pts[last_neg], pts[last_neg + 1]);
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::nonlinearity::StructuralParams;

    fn sampling() -> Sampling {
        Sampling::default()
    }

    #[test]
    fn example_th1_holds() {
        let r = check_assumptions(&Nonlinearity::exp_minus_one(), &Coefficient::exp_t2(), Regime::Th1, &sampling())
            .unwrap();
        assert!(r.all_hold(), "{r:#?}");
        assert_eq!(r.m, Some(0.0));
    }

    #[test]
    fn cubic_th2_holds() {
        let f = Nonlinearity::power(4.0).unwrap().with_params(StructuralParams {
            alpha: Some(4.0),
            epsilon: Some(2.0),
            c0: Some(0.25),
            ..Default::default()
        });
        let r = check_assumptions(&f, &Coefficient::one(), Regime::Th2, &sampling()).unwrap();
        assert!(r.all_hold(), "{r:#?}");
    }

    #[test]
    fn linear_f3_fails_with_witness() {
        let f = Nonlinearity::custom("linear", |s| s);
        let r = check_assumptions(&f, &Coefficient::one(), Regime::Th1, &sampling()).unwrap();
        let c = r.get(Assumption::F3).unwrap();
        assert!(matches!(c.status, Status::Fails { witness, .. } if witness > 1.0), "{c:?}");
        assert!(r.get(Assumption::F1).unwrap().status.holds());
    }

    #[test]
    fn nonconvex_f1_fails() {
        let f = Nonlinearity::custom("sin", |s: f64| s.sin() + 0.1 * s * s);
        let r = check_assumptions(&f, &Coefficient::one(), Regime::Th1, &sampling()).unwrap();
        assert!(r.get(Assumption::F1).unwrap().status.fails());
    }

    #[test]
    fn half_coefficient_z1_fails() {
        let r = check_assumptions(
            &Nonlinearity::exp_minus_one(),
            &Coefficient::from_key("linear:0.5,0").unwrap(),
            Regime::Th1,
            &sampling(),
        )
        .unwrap();
        assert!(r.get(Assumption::Z1).unwrap().status.fails());
    }

    #[test]
    fn decreasing_coefficient_z2_fails() {
        let f =
            Nonlinearity::power(4.0).unwrap().with_params(StructuralParams { kappa: Some(4.0), ..Default::default() });
        let r = check_assumptions(&f, &Coefficient::linear(2.0, -0.1), Regime::Th3 { p: 3.0 }, &sampling()).unwrap();
        assert!(r.get(Assumption::FF).unwrap().status.holds());
        assert!(r.get(Assumption::Z2).unwrap().status.fails());
    }

    #[test]
    fn kappa_at_most_p_fails() {
        let f =
            Nonlinearity::power(4.0).unwrap().with_params(StructuralParams { kappa: Some(3.0), ..Default::default() });
        let r = check_assumptions(&f, &Coefficient::one(), Regime::Th3 { p: 3.0 }, &sampling()).unwrap();
        assert!(r.get(Assumption::FF).unwrap().status.fails());
    }

    #[test]
    fn missing_parameters_are_errors() {
        let f = Nonlinearity::power(4.0).unwrap();
        assert!(matches!(
            check_assumptions(&f, &Coefficient::one(), Regime::Th2, &sampling()),
            Err(Error::MissingParameter(_))
        ));
        assert!(matches!(
            check_assumptions(&f, &Coefficient::one(), Regime::Th3 { p: 3.0 }, &sampling()),
            Err(Error::MissingParameter("kappa"))
        ));
    }

    #[test]
    fn threshold_examples() {
        let s = sampling();
        let sq = Nonlinearity::power(3.0).unwrap();
        // f = |s| s: s² ≥ 2s for s ≥ 2
        assert!((threshold_c(&sq, 1.0, 1e-6, &s).unwrap() - 2.0).abs() < 1e-10);
        let cube = Nonlinearity::power(4.0).unwrap();
        assert!((threshold_c(&cube, 2.0, 1e-6, &s).unwrap() - 2.0).abs() < 1e-10);
        // root of e^s − 1 − 2s by an independent bisection
        let (mut lo, mut hi) = (1.0_f64, 2.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid.exp() - 1.0 - 2.0 * mid < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let c = threshold_c(&Nonlinearity::exp_minus_one(), 1.0, 1e-6, &s).unwrap();
        assert!((c - lo).abs() < 1e-10, "{c} vs {lo}");
        assert!((c - 1.2564).abs() < 1e-4);
        assert!(threshold_c(&Nonlinearity::custom("lin", |s| s), 1.0, 1e-6, &s).is_err());
    }

    #[test]
    fn sample_grids_nest_under_refinement() {
        let coarse = Sampling::default().positive_points();
        let fine = Sampling { per_decade: 1024, ..Default::default() }.positive_points();
        assert_eq!(fine.len(), 2 * coarse.len() - 1);
        assert!(coarse.iter().enumerate().all(|(k, s)| *s == fine[2 * k]));
    }
}
