/// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// One step of an autonomous scalar ODE: fifth-order value and error estimate.
fn dopri_step(g: &impl Fn(f64) -> f64, w: f64, h: f64) -> (f64, f64) {
    let mut k = [0.0; 7];
    for i in 0..7 {
        let arg = w + h * (0..i).map(|j| A[i][j] * k[j]).sum::<f64>();
        k[i] = g(arg);
    }
    let w5 = w + h * (0..7).map(|i| B5[i] * k[i]).sum::<f64>();
    let w4 = w + h * (0..7).map(|i| B4[i] * k[i]).sum::<f64>();
    (w5, (w5 - w4).abs())
}

const MAX_STEPS: usize = 1_000_000;

/// Blow-up time of `y′ = −C₁ + C₂ y^q`, `y(0) = y₀`, or `None` when `y` stays
/// bounded up to `horizon`.
///
/// Integrates `w = y^{1−q}`, which obeys `w′ = (1−q)(C₂ − C₁ w^{q/(q−1)})`
/// and reaches 0 with finite slope exactly when `y` blows up; the zero is
/// located inside the final adaptive step by bisection on the step length.
pub fn ode_oracle(c1: f64, c2: f64, q: f64, y0: f64, horizon: f64) -> Option<f64> {
    if !(c2 > 0.0 && q > 1.0 && y0 > 0.0 && c1.is_finite() && horizon > 0.0) {
        return None;
    }
    if c1 > 0.0 && c2 * y0.powf(q) <= c1 {
        return None;
    }
    let r = q / (q - 1.0);
    let g = move |w: f64| (1.0 - q) * (c2 - c1 * w.max(0.0).powf(r));
    let w0 = y0.powf(1.0 - q);
    let (rtol, atol) = (1e-13, 1e-15 * w0);
    let mut t = 0.0;
    let mut w = w0;
    let mut h = 1e-3 * w0 / g(w0).abs();
    for _ in 0..MAX_STEPS {
        if t > horizon {
            return None;
        }
        let (w_new, err) = dopri_step(&g, w, h);
        let tol = atol + rtol * w.abs().max(w_new.abs());
        if err <= tol {
            if w_new <= 0.0 {
                let (mut lo, mut hi) = (0.0, h);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if dopri_step(&g, w, mid).0 > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let t_blow = t + 0.5 * (lo + hi);
                return (t_blow <= horizon).then_some(t_blow);
            }
            t += h;
            w = w_new;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    None
}
