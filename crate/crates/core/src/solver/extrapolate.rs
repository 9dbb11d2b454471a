use serde::Serialize;

use crate::error::{Error, Result};

/// Time at which `‖u‖∞` first reached `level`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    #[serde(rename = "M")]
    pub level: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extrapolation {
    #[serde(rename = "T_obs")]
    pub t_obs: f64,
    pub uncertainty: f64,
    pub theta: f64,
}

/// Least-squares `(T, c)` of `t = T − c x` and its sum of squared residuals.
fn linear_fit(x: &[f64], t: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let (mx, mt) = (x.iter().sum::<f64>() / n, t.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxt: f64 = x.iter().zip(t).map(|(a, b)| (a - mx) * (b - mt)).sum();
    let slope = if sxx > 0.0 { sxt / sxx } else { 0.0 };
    let intercept = mt - slope * mx;
    let ssr = x.iter().zip(t).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    (intercept, -slope, ssr)
}

const THETA_RANGE: (f64, f64) = (1e-2, 20.0);

/// Fits `t_M = T − c M^{−θ}` to ladder crossings: linear least squares in
/// `(T, c)` nested in a one-dimensional search over `θ`.
///
/// `T_obs` is never earlier than the last crossing; the uncertainty is the
/// larger of the worst fit residual and the gap between the last two crossings.
pub fn extrapolate_blowup(history: &[Crossing]) -> Result<Extrapolation> {
    if history.len() < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 crossings, got {}", history.len())));
    }
    if history.windows(2).any(|w| !(w[1].t > w[0].t) || !(w[1].level > w[0].level)) {
        return Err(Error::NonMonotoneCrossings);
    }
    let t: Vec<f64> = history.iter().map(|c| c.t).collect();
    // work in M/M₀ so M^{−θ} stays representable for large θ
    let m0 = history[0].level;
    let ratio: Vec<f64> = history.iter().map(|c| c.level / m0).collect();
    let ssr = |log_theta: f64| {
        let theta = log_theta.exp();
        let x: Vec<f64> = ratio.iter().map(|r| r.powf(-theta)).collect();
        linear_fit(&x, &t).2
    };
    let (lo, hi) = (THETA_RANGE.0.ln(), THETA_RANGE.1.ln());
    const SCAN: usize = 400;
    let mut best = (lo, f64::INFINITY);
    for i in 0..=SCAN {
        let v = lo + (hi - lo) * i as f64 / SCAN as f64;
        let s = ssr(v);
        if s < best.1 {
            best = (v, s);
        }
    }
    let step = (hi - lo) / SCAN as f64;
    let (mut a, mut b) = ((best.0 - step).max(lo), (best.0 + step).min(hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if ssr(c) < ssr(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let theta = (0.5 * (a + b)).exp();
    let x: Vec<f64> = ratio.iter().map(|r| r.powf(-theta)).collect();
    let (intercept, c, _) = linear_fit(&x, &t);
    let max_residual = x.iter().zip(&t).map(|(xi, ti)| (ti - (intercept - c * xi)).abs()).fold(0.0, f64::max);
    let n = t.len();
    let t_last = t[n - 1];
    let gap = t_last - t[n - 2];
    let t_obs = if intercept.is_finite() { intercept.max(t_last) } else { t_last };
    Ok(Extrapolation { t_obs, uncertainty: max_residual.max(gap), theta })
}
