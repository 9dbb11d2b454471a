use std::fmt;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

pub type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Constants attached to `f` by the growth assumptions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructuralParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// λ with `f(s) > 0` for all `s ≥ λ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_pos: Option<f64>,
}

#[derive(Clone)]
enum Antiderivative {
    Closed(Evaluator),
    Quadrature(Arc<PanelCache>),
}

/// Cumulative `∫₀^{±b_k} f` at breakpoints `b_k = 2^{k−9}`, filled lazily.
struct PanelCache {
    f: Evaluator,
    positive: RwLock<Vec<f64>>,
    negative: RwLock<Vec<f64>>,
}

const FIRST_BREAK: f64 = 1.0 / 512.0;
const PANEL_TOL: f64 = 1e-13;

impl PanelCache {
    fn new(f: Evaluator) -> Self {
        PanelCache { f, positive: RwLock::new(vec![0.0]), negative: RwLock::new(vec![0.0]) }
    }

    fn breakpoint(k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            FIRST_BREAK * 2f64.powi(k as i32 - 1)
        }
    }

    fn panel(&self, a: f64, b: f64) -> Result<f64> {
        let q = quadrature::integrate(|s| (self.f)(s), a, b, 1e-300, PANEL_TOL)?;
        Ok(q.value)
    }

    fn eval(&self, s: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(0.0);
        }
        let sign = s.signum();
        let x = s.abs();
        // largest k with b_k <= x
        let k = if x < FIRST_BREAK { 0 } else { ((x / FIRST_BREAK).log2().floor() as usize) + 1 };
        let k = if Self::breakpoint(k) > x { k - 1 } else { k };
        let table = if sign > 0.0 { &self.positive } else { &self.negative };
        let known = table.read().expect("panel cache poisoned").len();
        if known <= k {
            let mut t = table.write().expect("panel cache poisoned");
            while t.len() <= k {
                let j = t.len();
                let (a, b) = (sign * Self::breakpoint(j - 1), sign * Self::breakpoint(j));
                let next = t[j - 1] + self.panel(a, b)?;
                t.push(next);
            }
        }
        let base = table.read().expect("panel cache poisoned")[k];
        Ok(base + self.panel(sign * Self::breakpoint(k), s)?)
    }
}

/// Reaction term `f` with antiderivative `F(s) = ∫₀^s f`.
#[derive(Clone)]
pub struct Nonlinearity {
    name: String,
    f: Evaluator,
    antiderivative: Antiderivative,
    pub params: StructuralParams,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("Nonlinearity").field("name", &self.name).field("params", &self.params).finish()
    }
}

impl Nonlinearity {
    /// `f(u) = |u|^{q−2} u`, `F(u) = |u|^q / q`.
    pub fn power(q: f64) -> Result<Self> {
        Nonlinearity::scaled_power(q, 1.0)
    }

    /// `f(u) = c |u|^{q−2} u`, `F(u) = c |u|^q / q`.
    pub fn scaled_power(q: f64, c: f64) -> Result<Self> {
        if !(q > 1.0 && q.is_finite()) {
            return Err(Error::InvalidParameter(format!("power nonlinearity needs q > 1, got {q}")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("power coefficient must be positive, got {c}")));
        }
        Ok(Nonlinearity {
            name: if c == 1.0 { format!("power:{q}") } else { format!("power:{q},{c}") },
            f: Arc::new(move |u: f64| c * u.abs().powf(q - 2.0) * u),
            antiderivative: Antiderivative::Closed(Arc::new(move |u: f64| c * u.abs().powf(q) / q)),
            params: StructuralParams::default(),
        })
    }

    /// `f(u) = e^u − 1`, `F(u) = e^u − u − 1`.
    pub fn exp_minus_one() -> Self {
        Nonlinearity {
            name: "exp_minus_one".into(),
            f: Arc::new(f64::exp_m1),
            antiderivative: Antiderivative::Closed(Arc::new(|u: f64| u.exp_m1() - u)),
            params: StructuralParams::default(),
        }
    }

    pub fn zero() -> Self {
        Nonlinearity {
            name: "zero".into(),
            f: Arc::new(|_| 0.0),
            antiderivative: Antiderivative::Closed(Arc::new(|_| 0.0)),
            params: StructuralParams::default(),
        }
    }

    /// Arbitrary evaluator; `F` comes from cached adaptive quadrature.
    pub fn custom<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let f: Evaluator = Arc::new(f);
        Nonlinearity {
            name: name.into(),
            f: f.clone(),
            antiderivative: Antiderivative::Quadrature(Arc::new(PanelCache::new(f))),
            params: StructuralParams::default(),
        }
    }

    /// Piecewise-linear interpolation of `(s, f(s))` pairs, extended linearly
    /// beyond the table. The table must contain `s = 0` with value 0.
    pub fn table(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParameter("table nonlinearity needs at least two points".into()));
        }
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pts.windows(2).any(|w| w[0].0 == w[1].0) || pts.iter().any(|p| !(p.0.is_finite() && p.1.is_finite())) {
            return Err(Error::InvalidParameter("table abscissae must be finite and distinct".into()));
        }
        match pts.iter().find(|p| p.0 == 0.0) {
            Some(p) if p.1 == 0.0 => {}
            _ => return Err(Error::InvalidParameter("table must contain the point (0, 0)".into())),
        }
        let pts: Arc<[(f64, f64)]> = pts.into();
        let interp = {
            let pts = pts.clone();
            move |s: f64| {
                let n = pts.len();
                let i = match pts.binary_search_by(|p| p.0.total_cmp(&s)) {
                    Ok(i) => return pts[i].1,
                    Err(i) => i.clamp(1, n - 1),
                };
                let (a, b) = (pts[i - 1], pts[i]);
                a.1 + (b.1 - a.1) * (s - a.0) / (b.0 - a.0)
            }
        };
        let mut nl = Nonlinearity::custom("table", interp);
        nl.name = "custom".into();
        Ok(nl)
    }

    /// Registry lookup: `power:q`, `exp_minus_one`, `zero`.
    pub fn from_key(key: &str) -> Result<Self> {
        let (head, arg) = key.split_once(':').map_or((key, None), |(h, a)| (h, Some(a)));
        match (head.trim(), arg) {
            ("power", Some(args)) => {
                let parse = |v: &str| {
                    v.trim().parse::<f64>().map_err(|_| Error::Scenario(format!("cannot parse {v:?} in {key:?}")))
                };
                match args.split_once(',') {
                    Some((q, c)) => Nonlinearity::scaled_power(parse(q)?, parse(c)?),
                    None => Nonlinearity::power(parse(args)?),
                }
            }
            ("exp_minus_one", None) => Ok(Nonlinearity::exp_minus_one()),
            ("zero", None) => Ok(Nonlinearity::zero()),
            _ => Err(Error::Scenario(format!("unknown nonlinearity key {key:?}"))),
        }
    }

    pub fn with_params(mut self, params: StructuralParams) -> Self {
        self.params = params;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn has_closed_antiderivative(&self) -> bool {
        matches!(self.antiderivative, Antiderivative::Closed(_))
    }

    #[inline]
    pub fn f(&self, s: f64) -> f64 {
        (self.f)(s)
    }

    /// `F(s)`; quadrature-backed antiderivatives may fail on non-finite `f`.
    pub fn big_f(&self, s: f64) -> Result<f64> {
        match &self.antiderivative {
            Antiderivative::Closed(g) => Ok(g(s)),
            Antiderivative::Quadrature(cache) => cache.eval(s),
        }
    }

    /// Largest neighbour slope of `f` over 64 equispaced points of `[−r, r]`.
    pub fn local_lipschitz(&self, r: f64) -> f64 {
        if !(r > 0.0) {
            return 0.0;
        }
        const POINTS: usize = 64;
        let dx = 2.0 * r / (POINTS - 1) as f64;
        let mut prev = self.f(-r);
        let mut best = 0.0_f64;
        for i in 1..POINTS {
            let x = if i == POINTS - 1 { r } else { -r + i as f64 * dx };
            let v = self.f(x);
            let slope = ((v - prev) / dx).abs();
            best = if slope.is_nan() { f64::INFINITY } else { best.max(slope) };
            prev = v;
        }
        best
    }
}
