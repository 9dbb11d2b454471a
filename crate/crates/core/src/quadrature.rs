//! Adaptive Gauss–Kronrod (7, 15) quadrature on finite intervals and on `[a, ∞)`.
//!
//! Semi-infinite integrals are mapped through `z = a·e^v`, which turns the
//! power-law tails met in blow-up bounds into exponentially decaying ones.
//! The `v` axis is swept in doubling panels; once the local decay rate of the
//! transformed integrand stabilises, the remaining tail is closed analytically
//! as `h(V)/r`, which is exact for a pure power law.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

const MAX_INTERVALS: usize = 4000;

/// Result of a quadrature with its a-posteriori absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

impl Quadrature {
    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            self.error
        } else {
            self.error / self.value.abs()
        }
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    check_finite(fc, center)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (x1, x2) = (center - dx, center + dx);
        let (f1, f2) = (f(x1), f(x2));
        check_finite(f1, x1)?;
        check_finite(f2, x2)?;
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let k = kronrod * half;
    let g = gauss * half;
    Ok((k, (k - g).abs()))
}

fn check_finite(v: f64, x: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Quadrature(format!("integrand is {v} at x = {x}")))
    }
}

/// Globally adaptive quadrature of `f` over `[a, b]`.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate falls below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Quadrature> {
    if a == b {
        return Ok(Quadrature { value: 0.0, error: 0.0, converged: true });
    }
    let (v0, e0) = gk15(&f, a, b)?;
    let mut intervals = vec![(a, b, v0, e0)];
    let mut value = v0;
    let mut error = e0;
    while error > abs_tol.max(rel_tol * value.abs()) {
        if intervals.len() >= MAX_INTERVALS {
            return Ok(Quadrature { value, error, converged: false });
        }
        let (worst, _) =
            intervals.iter().enumerate().max_by(|x, y| x.1 .3.total_cmp(&y.1 .3)).expect("non-empty interval list");
        let (lo, hi, v, e) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // interval cannot be split further in floating point
            intervals.push((lo, hi, v, e));
            return Ok(Quadrature { value, error, converged: false });
        }
        let (vl, el) = gk15(&f, lo, mid)?;
        let (vr, er) = gk15(&f, mid, hi)?;
        intervals.push((lo, mid, vl, el));
        intervals.push((mid, hi, vr, er));
        value += vl + vr - v;
        error += el + er - e;
    }
    // re-sum to shed accumulated cancellation in the running totals
    let value = intervals.iter().map(|iv| iv.2).sum();
    let error = intervals.iter().map(|iv| iv.3).sum();
    Ok(Quadrature { value, error, converged: true })
}

/// `∫_a^∞ g(z) dz` for `a > 0` to relative tolerance `rel_tol`.
///
/// Returns [`Error::Divergent`] when the transformed integrand `z·g(z)`
/// stops decaying, and [`Error::Quadrature`] when the tail cannot be closed
/// before `z` overflows.
pub fn integrate_to_infinity<G: Fn(f64) -> f64>(g: G, a: f64, rel_tol: f64) -> Result<Quadrature> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(format!("lower limit must be positive and finite, got {a}")));
    }
    let h = |v: f64| {
        let z = a * v.exp();
        g(z) * z
    };
    let v_max = (f64::MAX / a).ln().min(700.0) - 1.0;
    let mut total = 0.0_f64;
    let mut gk_error = 0.0_f64;
    let mut lo = 0.0_f64;
    let mut width = 1.0_f64;
    let mut prev_rate: Option<f64> = None;
    let mut flat_panels = 0;
    loop {
        let hi = (lo + width).min(v_max);
        let panel = integrate(h, lo, hi, 1e-300_f64.max(0.01 * rel_tol * total.abs()), 0.01 * rel_tol)?;
        if !panel.converged {
            return Err(Error::Quadrature(format!("panel [{lo}, {hi}] in log-coordinates did not converge")));
        }
        total += panel.value;
        gk_error += panel.error;

        let h_end = h(hi);
        check_finite(h_end, a * hi.exp())?;
        if h_end == 0.0 {
            return Ok(Quadrature { value: total, error: gk_error, converged: true });
        }
        let delta = 0.5_f64.min(0.5 * (hi - lo));
        let h_before = h(hi - delta);
        let rate = (h_before / h_end).ln() / delta;
        let target = rel_tol * total.abs();

        if rate > 0.0 {
            let tail = h_end / rate;
            let tail_error = match prev_rate {
                Some(r0) if r0 > 0.0 => tail * ((rate - r0) / rate).abs(),
                _ => tail,
            };
            if tail < 1e-3 * target || (tail_error + gk_error) < target {
                return Ok(Quadrature { value: total + tail, error: gk_error + tail_error, converged: true });
            }
            flat_panels = 0;
        } else {
            flat_panels += 1;
            if flat_panels >= 2 && hi >= 8.0 {
                return Err(Error::Divergent { at: a * hi.exp() });
            }
        }
        if hi >= v_max {
            if rate <= 1e-9 {
                return Err(Error::Divergent { at: a * hi.exp() });
            }
            return Err(Error::Quadrature(format!(
                "tail of the integral from {a} not closed before z overflowed (decay rate {rate:e})"
            )));
        }
        prev_rate = Some(rate);
        lo = hi;
        width *= 2.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_interval_polynomial_exact() {
        let q = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-14, 1e-14).unwrap();
        assert!((q.value - 0.0).abs() < 1e-13);
        let q = integrate(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-14, 1e-14).unwrap();
        assert!((q.value - 2.0).abs() < 1e-13);
    }

    #[test]
    fn power_tail_closes_analytically() {
        // ∫_2^∞ z^{-2} = 1/2
        let q = integrate_to_infinity(|z| z.powi(-2), 2.0, 1e-12).unwrap();
        assert!((q.value - 0.5).abs() < 1e-12, "{q:?}");
        // slowly decaying tail: ∫_1^∞ z^{-1.02} = 50
        let q = integrate_to_infinity(|z| z.powf(-1.02), 1.0, 1e-10).unwrap();
        assert!((q.value - 50.0).abs() < 1e-8 * 50.0, "{q:?}");
    }

    #[test]
    fn exponential_tail() {
        // ∫_3^∞ ds/(e^s − 1) = −ln(1 − e^{−3})
        let exact = -(1.0 - (-3.0_f64).exp()).ln();
        let q = integrate_to_infinity(|s| 1.0 / s.exp_m1(), 3.0, 1e-12).unwrap();
        assert!((q.value - exact).abs() < 1e-13, "{} vs {exact}", q.value);
    }

    #[test]
    fn harmonic_tail_diverges() {
        let r = integrate_to_infinity(|s| 1.0 / s, 1.0, 1e-10);
        assert!(matches!(r, Err(Error::Divergent { .. })), "{r:?}");
    }

    #[test]
    fn partial_fraction_tail() {
        // ∫_2^∞ dz/(z² − 1) = ½ ln 3
        let q = integrate_to_infinity(|z| 1.0 / (z * z - 1.0), 2.0, 1e-12).unwrap();
        assert!((q.value - 0.5 * 3.0_f64.ln()).abs() < 1e-12);
    }
}
