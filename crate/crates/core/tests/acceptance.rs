//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use blowuplab::bounds::{lemma_bound, tmax2};
use blowuplab::functionals::{Monitor, MonitorResidual};
use blowuplab::grid::Grid;
use blowuplab::initial_data::{build_cutoff, energy_p, in_blowup_set, proposition_lambda};
use blowuplab::model::{ModelProfile, Nonlinearity};
use blowuplab::operators::{principal_eigenpair, Stencil};
use blowuplab::scenario::Scenario;
use blowuplab::solver::{ode_oracle, simulate, BlowupVerdict, Problem, RunStatus, StepRecord, Trajectory};

struct Outcome {
    pass: bool,
    detail: String,
}

fn scenario(name: &str) -> Scenario {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "examples", "scenarios", name].iter().collect();
    Scenario::load(&path).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn run(problem: &Problem) -> (Trajectory, BlowupVerdict) {
    simulate::<std::io::Sink>(problem, None).expect("simulation runs")
}

fn within(elapsed: Duration, limit_s: u64) -> (bool, String) {
    (elapsed <= Duration::from_secs(limit_s), format!("{:.2}s of {limit_s}s", elapsed.as_secs_f64()))
}

/// Every residual of `monitor` over accepted steps meets `bound(residual)`.
fn every_step(traj: &Trajectory, monitor: Monitor, bound: impl Fn(&MonitorResidual) -> f64) -> (bool, f64) {
    let mut worst = f64::INFINITY;
    let mut ok = true;
    for r in traj.records.iter().filter(|r| r.accepted).flat_map(|r: &StepRecord| &r.residuals) {
        if r.name == monitor {
            let slack = r.residual + bound(r);
            worst = worst.min(slack);
            ok &= slack >= 0.0;
        }
    }
    (ok, worst)
}

fn tol_h(v: &BlowupVerdict) -> impl Fn(&MonitorResidual) -> f64 + '_ {
    move |r| r.tolerance(v.run.dt_max_used, v.run.h_min)
}

fn eigenpair_accuracy() -> Outcome {
    let start = Instant::now();
    let err: Vec<f64> = [101, 201, 401]
        .iter()
        .map(|&n| {
            let g = Grid::interval(0.0, std::f64::consts::PI, n).unwrap();
            (principal_eigenpair(&g, 1e-12).unwrap().lambda1 - 1.0).abs()
        })
        .collect();
    let orders = [(err[0] / err[1]).log2(), (err[1] / err[2]).log2()];
    let (fast, time) = within(start.elapsed(), 5);
    let pass = err[2] <= 1e-4 && orders.iter().all(|o| (o - 2.0).abs() <= 0.3) && fast;
    Outcome {
        pass,
        detail: format!("|lambda1-1| = {:.3e} at n=401, orders {:.3}, {:.3}; {time}", err[2], orders[0], orders[1]),
    }
}

fn linear_heat() -> Outcome {
    let start = Instant::now();
    let problem = scenario("linear_heat.json").problem(0, false).unwrap();
    let lambda1 = principal_eigenpair(&problem.grid, 1e-12).unwrap().lambda1;
    let (traj, v) = run(&problem);
    let s0 = traj.records[0].snapshot.sup_norm;
    let worst = traj
        .records
        .iter()
        .map(|r| (r.snapshot.sup_norm / s0 / (-lambda1 * r.t).exp() - 1.0).abs())
        .fold(0.0, f64::max);
    let (fast, time) = within(start.elapsed(), 10);
    let pass = worst <= 1e-2 && v.status == RunStatus::GlobalUntilHorizon && v.run.t_end >= 1.0 - 1e-12 && fast;
    Outcome { pass, detail: format!("max relative deviation from exp(-lambda1 t) = {worst:.3e}; {time}") }
}

fn lemma_exactness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut agree, mut worst, mut worst_tuple) = (0, 0.0_f64, (0.0, 0.0, 0.0, 0.0));
    let (mut c1_neg, mut c1_neg_agree) = (0, 0);
    for _ in 0..100 {
        let c1: f64 = rng.gen_range(-2.0..=2.0);
        let c2: f64 = rng.gen_range(0.1..=5.0);
        let q: f64 = 1.0 + rng.gen_range(1e-3..=3.0);
        let y0 = if c1 > 0.0 {
            // strictly above the unstable equilibrium (C1/C2)^{1/q}
            (rng.gen_range(1.1..=10.0) * c1 / c2).powf(1.0 / q)
        } else {
            rng.gen_range(0.2..=3.0)
        };
        let bound = lemma_bound(c1, c2, q, y0).unwrap().t_star;
        let oracle = ode_oracle(c1, c2, q, y0, 10.0 * bound + 1.0);
        let rel = oracle.map_or(f64::INFINITY, |t| (t - bound).abs() / bound);
        let ok = rel <= 1e-6;
        agree += ok as usize;
        if c1 < 0.0 {
            c1_neg += 1;
            c1_neg_agree += ok as usize;
        }
        if rel > worst {
            worst = rel;
            worst_tuple = (c1, c2, q, y0);
        }
    }
    let (fast, time) = within(start.elapsed(), 30);
    Outcome {
        pass: agree == 100 && fast,
        detail: format!(
            "{agree}/100 agree to 1e-6 ({c1_neg_agree}/{c1_neg} with C1 < 0); worst rel {worst:.3e} at \
             (C1, C2, q, y0) = ({:.3}, {:.3}, {:.3}, {:.3}); {time}",
            worst_tuple.0, worst_tuple.1, worst_tuple.2, worst_tuple.3
        ),
    }
}

fn bounds_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0_f64;
    let mut agree = 0;
    for _ in 0..100 {
        let alpha: f64 = rng.gen_range(2.1..=6.0);
        let a: f64 = rng.gen_range(0.1..=5.0);
        let norm: f64 = rng.gen_range(0.2..=3.0);
        let y0 = 0.5 * norm * norm;
        let lead = a * y0.powf(0.5 * alpha);
        // E0 ≤ 0 half the time, otherwise strictly inside the largeness margin
        let e0 = if rng.gen_bool(0.5) { -rng.gen_range(0.0..=2.0) } else { 0.5 * lead * rng.gen_range(0.05..=0.9) };
        let t2 = tmax2(e0, norm, a, alpha).unwrap().t_star;
        let tl = lemma_bound(2.0 * e0, a, 0.5 * alpha, y0).unwrap().t_star;
        let rel = (t2 - tl).abs() / tl;
        worst = worst.max(rel);
        agree += (rel <= 1e-10) as usize;
    }
    let mut limit_worst = 0.0_f64;
    for &(a, norm, alpha) in &[(1.0, 1.0, 4.0), (0.3, 2.0, 3.0), (4.0, 0.5, 5.5)] {
        let closed = tmax2(0.0, norm, a, alpha).unwrap().t_star;
        let near = tmax2(1e-12, norm, a, alpha).unwrap().t_star;
        limit_worst = limit_worst.max((near - closed).abs() / closed);
    }
    Outcome {
        pass: agree == 100 && limit_worst <= 1e-6,
        detail: format!("{agree}/100 identical to 1e-10 (worst {worst:.1e}); E0 -> 0+ limit rel {limit_worst:.1e}"),
    }
}

fn theorem1_consistency() -> Outcome {
    let start = Instant::now();
    let s = scenario("th1_exponential.json");
    let mut lines = Vec::new();
    let mut pass = true;
    for refine in 0..3 {
        let (traj, v) = run(&s.problem(refine, false).unwrap());
        let report = v.bound.report.as_ref().expect("bound applies");
        let large = report.inputs["y0"] >= 1.5 * report.inputs["C"];
        let consistent = v.status == RunStatus::BlewUp && v.t_obs.unwrap() <= report.t_star;
        let (di1, _) = every_step(&traj, Monitor::DI1, tol_h(&v));
        let (jensen, _) = every_step(&traj, Monitor::Jensen, tol_h(&v));
        pass &= large && consistent && di1 && jensen;
        lines.push(format!(
            "n={} T_obs={:.6e} T*={:.6e} y0/C={:.2} DI1 {} Jensen {}",
            s.grid(refine).unwrap().len(),
            v.t_obs.unwrap_or(f64::NAN),
            report.t_star,
            report.inputs["y0"] / report.inputs["C"],
            if di1 { "ok" } else { "violated" },
            if jensen { "ok" } else { "violated" }
        ));
    }
    let (fast, time) = within(start.elapsed(), 120);
    Outcome { pass: pass && fast, detail: format!("{}; {time}", lines.join("; ")) }
}

fn theorem2_consistency() -> Outcome {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut pass = true;
    for name in ["th2_nonpositive_energy.json", "th2_positive_energy.json"] {
        let (traj, v) = run(&scenario(name).problem(0, false).unwrap());
        let e0 = traj.records[0].snapshot.e2;
        let report = v.bound.report.as_ref().expect("bound applies");
        let consistent = v.status == RunStatus::BlewUp && v.t_obs.unwrap() <= report.t_star;
        let (decay, worst) = every_step(&traj, Monitor::EnergyDecay, |_| 1e-6 * (1.0 + e0.abs()));
        pass &= consistent && decay;
        lines.push(format!(
            "E0={e0:.4} T_obs={:.6e} T*={:.6e} energy slack {worst:.2e}",
            v.t_obs.unwrap_or(f64::NAN),
            report.t_star
        ));
    }
    let (fast, time) = within(start.elapsed(), 120);
    Outcome { pass: pass && fast, detail: format!("{}; {time}", lines.join("; ")) }
}

fn theorem3_consistency() -> Outcome {
    let start = Instant::now();
    let problem = scenario("th3_proposition.json").problem(0, false).unwrap();
    let member = in_blowup_set(&problem.grid, &problem.u0, &problem.profile, problem.p).unwrap();
    let (traj, v) = run(&problem);
    let report = v.bound.report.as_ref().expect("bound applies");
    let consistent = v.status == RunStatus::BlewUp && v.t_obs.unwrap() <= report.t_star;
    let (h_growth, _) = every_step(&traj, Monitor::HGrowth, tol_h(&v));
    let (di5, _) = every_step(&traj, Monitor::DI5, tol_h(&v));
    let (fast, time) = within(start.elapsed(), 180);
    Outcome {
        pass: member && consistent && h_growth && di5 && fast,
        detail: format!(
            "in E: {member}; T_obs={:.6e} T*={:.6e} (Poincare C={:.4}); H/zeta {} DI5 {}; {time}",
            v.t_obs.unwrap_or(f64::NAN),
            report.t_star,
            report.inputs["C"],
            if h_growth { "ok" } else { "violated" },
            if di5 { "ok" } else { "violated" }
        ),
    }
}

fn proposition_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let grid = Grid::interval(0.0, 1.0, 201).unwrap();
    let stencil = Stencil::new(&grid);
    let cutoff = build_cutoff(&grid, &[(0.3, 0.7)], 5).unwrap();
    let mut ok = 0;
    for _ in 0..20 {
        let p: f64 = rng.gen_range(2.05..=5.5);
        let kappa: f64 = rng.gen_range(p + 0.5..=6.0);
        let f = Nonlinearity::power(kappa).unwrap();
        let r = proposition_lambda(&grid, &cutoff, &f, 1.0, p, kappa).unwrap();
        let u0 = cutoff.phi.scaled(r.lambda_star);
        let nonpositive = energy_p(&grid, &stencil, u0.values(), &f, 1.0, p).unwrap() <= 0.0;
        let minimal = r.lambda_star <= 1.0 || {
            let below = cutoff.phi.scaled((1.0 - 1e-6) * r.lambda_star);
            energy_p(&grid, &stencil, below.values(), &f, 1.0, p).unwrap() > 0.0
        };
        let profile = ModelProfile::new(f, blowuplab::model::Coefficient::one());
        let member = in_blowup_set(&grid, &u0, &profile, p).unwrap();
        ok += (nonpositive && minimal && member) as usize;
    }
    Outcome { pass: ok == 20, detail: format!("{ok}/20 (p, kappa) draws give E_p(u0) <= 0 with minimal lambda*") }
}

fn robustness() -> Outcome {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut pass = true;
    let cases = [
        ("th1_exponential.json", vec![Monitor::DI1, Monitor::Jensen]),
        ("th2_nonpositive_energy.json", vec![Monitor::DI3, Monitor::EnergyDecay]),
        ("th2_positive_energy.json", vec![Monitor::DI3, Monitor::EnergyDecay]),
        ("th3_proposition.json", vec![Monitor::HGrowth, Monitor::DI5, Monitor::PoincareChain]),
    ];
    for (name, monitors) in cases {
        let s = scenario(name);
        let (_, base) = run(&s.problem(0, false).unwrap());
        let (_, fine) = run(&s.problem(1, false).unwrap());
        let mut soft = s.clone();
        soft.solver.step.eps_reg *= 0.5;
        let (_, eps) = run(&soft.problem(0, false).unwrap());
        let t = base.t_obs.unwrap_or(f64::NAN);
        let dh = (fine.t_obs.unwrap_or(f64::NAN) - t).abs() / t;
        let de = (eps.t_obs.unwrap_or(f64::NAN) - t).abs() / t;
        let flips: Vec<_> = monitors
            .iter()
            .filter(|&&m| {
                let before = base.monitor(m).is_some_and(|x| x.passed);
                let after = [&fine, &eps].iter().all(|v| v.monitor(m).is_some_and(|x| x.passed));
                before && !after
            })
            .map(|m| m.column())
            .collect();
        pass &= dh < 0.05 && de < 0.01 && flips.is_empty();
        lines.push(format!("{name}: h {dh:.2e}, eps_reg {de:.2e}, flips {flips:?}"));
    }
    Outcome { pass, detail: format!("{}; {:.1}s", lines.join("; "), start.elapsed().as_secs_f64()) }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("eigenpair accuracy", eigenpair_accuracy),
        ("linear heat sanity", linear_heat),
        ("lemma exactness", lemma_exactness),
        ("bounds identity", bounds_identity),
        ("Th1 consistency", theorem1_consistency),
        ("Th2 consistency", theorem2_consistency),
        ("Th3 consistency", theorem3_consistency),
        ("proposition suite", proposition_suite),
        ("robustness", robustness),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += (!o.pass) as usize;
        println!("criterion {} [{}] {name}: {}", k + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
