use std::fmt;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use super::nonlinearity::Evaluator;
use crate::error::{Error, Result};
use crate::quadrature;

/// Declared sign of `ζ − 1` beyond the sampled horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailBehavior {
    /// `ζ ≥ 1` from the horizon on, so `Θ` is nondecreasing there.
    AtLeastOne,
    /// `ζ < 1` forever after some time; `Θ → −∞`.
    BelowOneForever,
    Unknown,
}

#[derive(Clone)]
enum ThetaRepr {
    Closed(Evaluator),
    Quadrature(Arc<ThetaCache>),
}

const CHECKPOINT: f64 = 0.25;

/// `Θ` at checkpoints `k·0.25`, extended lazily.
struct ThetaCache {
    zeta: Evaluator,
    checkpoints: RwLock<Vec<f64>>,
}

impl ThetaCache {
    fn piece(&self, a: f64, b: f64) -> Result<f64> {
        let z = &self.zeta;
        Ok(quadrature::integrate(|s| z(s) - 1.0, a, b, 1e-15, 1e-12)?.value)
    }

    fn eval(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        let k = (t / CHECKPOINT).floor() as usize;
        if self.checkpoints.read().expect("theta cache poisoned").len() <= k {
            let mut c = self.checkpoints.write().expect("theta cache poisoned");
            while c.len() <= k {
                let j = c.len();
                let next = c[j - 1] + self.piece((j - 1) as f64 * CHECKPOINT, j as f64 * CHECKPOINT)?;
                c.push(next);
            }
        }
        let base = self.checkpoints.read().expect("theta cache poisoned")[k];
        Ok(base + self.piece(k as f64 * CHECKPOINT, t)?)
    }
}

/// Time coefficient `ζ(t)` with `Θ(t) = ∫₀^t (ζ − 1)`.
#[derive(Clone)]
pub struct Coefficient {
    name: String,
    zeta: Evaluator,
    zeta_prime: Option<Evaluator>,
    theta: ThetaRepr,
    pub tail: TailBehavior,
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("Coefficient").field("name", &self.name).field("tail", &self.tail).finish()
    }
}

impl Coefficient {
    pub fn one() -> Self {
        Coefficient {
            name: "one".into(),
            zeta: Arc::new(|_| 1.0),
            zeta_prime: Some(Arc::new(|_| 0.0)),
            theta: ThetaRepr::Closed(Arc::new(|_| 0.0)),
            tail: TailBehavior::AtLeastOne,
        }
    }

    /// `ζ(t) = e^{t²}`.
    pub fn exp_t2() -> Self {
        let zeta: Evaluator = Arc::new(|t: f64| (t * t).exp());
        Coefficient {
            name: "exp_t2".into(),
            zeta: zeta.clone(),
            zeta_prime: Some(Arc::new(|t: f64| 2.0 * t * (t * t).exp())),
            theta: ThetaRepr::Quadrature(Arc::new(ThetaCache { zeta, checkpoints: RwLock::new(vec![0.0]) })),
            tail: TailBehavior::AtLeastOne,
        }
    }

    /// `ζ(t) = a + b t`.
    pub fn linear(a: f64, b: f64) -> Self {
        let tail =
            if b > 0.0 || (b == 0.0 && a >= 1.0) { TailBehavior::AtLeastOne } else { TailBehavior::BelowOneForever };
        Coefficient {
            name: format!("linear:{a},{b}"),
            zeta: Arc::new(move |t| a + b * t),
            zeta_prime: Some(Arc::new(move |_| b)),
            theta: ThetaRepr::Closed(Arc::new(move |t| (a - 1.0) * t + 0.5 * b * t * t)),
            tail,
        }
    }

    /// User evaluator: `ζ′` by finite differences, `Θ` by quadrature.
    pub fn custom<F>(name: impl Into<String>, zeta: F, tail: TailBehavior) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let zeta: Evaluator = Arc::new(zeta);
        Coefficient {
            name: name.into(),
            zeta: zeta.clone(),
            zeta_prime: None,
            theta: ThetaRepr::Quadrature(Arc::new(ThetaCache { zeta, checkpoints: RwLock::new(vec![0.0]) })),
            tail,
        }
    }

    /// Piecewise-linear `ζ` through `(t, ζ)` pairs, held constant beyond the ends.
    pub fn table(points: &[(f64, f64)], tail: TailBehavior) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("coefficient table is empty".into()));
        }
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pts.windows(2).any(|w| w[0].0 == w[1].0) || pts.iter().any(|p| !(p.0.is_finite() && p.1.is_finite())) {
            return Err(Error::InvalidParameter("coefficient table abscissae must be finite and distinct".into()));
        }
        let pts: Arc<[(f64, f64)]> = pts.into();
        Ok(Coefficient::custom(
            "custom",
            move |t| {
                let n = pts.len();
                if t <= pts[0].0 {
                    return pts[0].1;
                }
                if t >= pts[n - 1].0 {
                    return pts[n - 1].1;
                }
                let i = pts.partition_point(|p| p.0 <= t);
                let (a, b) = (pts[i - 1], pts[i]);
                a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
            },
            tail,
        ))
    }

    /// Registry lookup: `one`, `exp_t2`, `linear:a,b`.
    pub fn from_key(key: &str) -> Result<Self> {
        let (head, arg) = key.split_once(':').map_or((key, None), |(h, a)| (h, Some(a)));
        match (head.trim(), arg) {
            ("one", None) => Ok(Coefficient::one()),
            ("exp_t2", None) => Ok(Coefficient::exp_t2()),
            ("linear", Some(args)) => {
                let parsed: Vec<f64> = args
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::Scenario(format!("cannot parse coefficients in {key:?}")))?;
                match parsed.as_slice() {
                    [a, b] => Ok(Coefficient::linear(*a, *b)),
                    _ => Err(Error::Scenario(format!("linear coefficient needs two values in {key:?}"))),
                }
            }
            _ => Err(Error::Scenario(format!("unknown coefficient key {key:?}"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn zeta(&self, t: f64) -> f64 {
        (self.zeta)(t)
    }

    /// Analytic derivative when registered, otherwise fourth-order differences
    /// with step `1e−4·max(1, |t|)` (one-sided near `t = 0`).
    pub fn zeta_prime(&self, t: f64) -> f64 {
        if let Some(d) = &self.zeta_prime {
            return d(t);
        }
        let h = 1e-4 * t.abs().max(1.0);
        let z = &self.zeta;
        if t >= 2.0 * h {
            (z(t - 2.0 * h) - 8.0 * z(t - h) + 8.0 * z(t + h) - z(t + 2.0 * h)) / (12.0 * h)
        } else {
            (-25.0 * z(t) + 48.0 * z(t + h) - 36.0 * z(t + 2.0 * h) + 16.0 * z(t + 3.0 * h) - 3.0 * z(t + 4.0 * h))
                / (12.0 * h)
        }
    }

    /// `Θ(t) = ∫₀^t (ζ(s) − 1) ds`.
    pub fn theta(&self, t: f64) -> Result<f64> {
        match &self.theta {
            ThetaRepr::Closed(g) => Ok(g(t)),
            ThetaRepr::Quadrature(c) => c.eval(t),
        }
    }
}

const M_SAMPLES: usize = 4096;

/// `m = inf_{t ≥ 0} Θ(t)`, taken as the minimum over `[0, horizon]`; valid
/// when `ζ ≥ 1` beyond the horizon.
pub fn compute_m(coefficient: &Coefficient, horizon: f64, tail: TailBehavior) -> Result<f64> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
    }
    match tail {
        TailBehavior::BelowOneForever => return Err(Error::UnboundedTheta),
        TailBehavior::Unknown => {
            return Err(Error::Precondition("tail behaviour of zeta beyond the horizon is undeclared".into()))
        }
        TailBehavior::AtLeastOne => {}
    }
    let dt = horizon / M_SAMPLES as f64;
    let mut best = (0.0_f64, 0.0_f64);
    for i in 1..=M_SAMPLES {
        let t = i as f64 * dt;
        let v = coefficient.theta(t)?;
        if v < best.1 {
            best = (t, v);
        }
    }
    if best.1 < 0.0 {
        // golden-section refinement around the sampled minimum
        let (mut a, mut b) = ((best.0 - dt).max(0.0), (best.0 + dt).min(horizon));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if coefficient.theta(c)? < coefficient.theta(d)? {
                b = d;
            } else {
                a = c;
            }
        }
        best.1 = best.1.min(coefficient.theta(0.5 * (a + b))?);
    }
    Ok(best.1.min(0.0))
}
