//! Method-of-lines integration with blow-up detection, bound consistency
//! checks and monitor bookkeeping.

mod extrapolate;
mod oracle;
mod stepper;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use extrapolate::{extrapolate_blowup, Crossing, Extrapolation};
pub use oracle::ode_oracle;
pub use stepper::{step, Clock, StepControls, StepOutcome, Stepper};

use crate::bounds::{constant_a, tmax1_with_threshold, tmax2, tmax3, BoundReport};
use crate::error::{Error, Result};
use crate::functionals::{monitor_step, FunctionalSnapshot, Functionals, Monitor, MonitorContext, MonitorResidual};
use crate::grid::{Field, Grid};
use crate::initial_data::in_blowup_set;
use crate::model::{check_assumptions, compute_m, threshold_c, AssumptionReport, ModelProfile, Regime, Sampling};
use crate::operators::{poincare_constant, principal_eigenpair, EigenPair};

/// Run-level controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunControls {
    pub horizon: f64,
    /// Escalating `‖u‖∞` thresholds; levels at or below `‖u₀‖∞` are skipped.
    pub ladder: Vec<f64>,
    #[serde(flatten)]
    pub step: StepControls,
    pub max_steps: usize,
}

impl Default for RunControls {
    fn default() -> Self {
        RunControls {
            horizon: 10.0,
            ladder: (2..=8).map(|k| 10f64.powi(k)).collect(),
            step: StepControls::default(),
            max_steps: 20_000_000,
        }
    }
}

/// Everything one simulation needs.
#[derive(Debug, Clone)]
pub struct Problem {
    pub grid: Grid,
    pub profile: ModelProfile,
    pub p: f64,
    /// Theorem whose hypotheses the run targets; `None` for a free run.
    pub regime: Option<Regime>,
    /// Run even when hypotheses fail; bounds are then reported as non-applicable.
    pub exploratory: bool,
    pub u0: Field,
    pub sampling: Sampling,
    pub controls: RunControls,
}

/// One accepted step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub t: f64,
    pub dt: f64,
    pub accepted: bool,
    pub snapshot: FunctionalSnapshot,
    pub residuals: Vec<MonitorResidual>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Trajectory {
    pub records: Vec<StepRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    BlewUp,
    GlobalUntilHorizon,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verification {
    Pass,
    Fail,
    Inconclusive,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundEntry {
    pub applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<BoundReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// `T_obs ≤ T* + uncertainty`
    #[serde(skip_serializing_if = "Option::is_none")]
    pub consistent: Option<bool>,
    /// Signed slack of the largeness hypothesis; positive when it holds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorSummary {
    pub name: Monitor,
    pub count: usize,
    pub min_residual: f64,
    /// `min residual/scale`, compared against `−10(dt_max + h²)`.
    pub min_relative: f64,
    pub t_worst: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunStats {
    pub t_end: f64,
    pub steps: usize,
    pub rejections: usize,
    pub dt_max_used: f64,
    pub dt_min_used: f64,
    pub sup_norm_start: f64,
    pub sup_norm_end: f64,
    pub lambda1: f64,
    pub h_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupVerdict {
    pub status: RunStatus,
    pub verification: Verification,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regime: Option<&'static str>,
    pub exploratory: bool,
    #[serde(rename = "T_obs")]
    pub t_obs: Option<f64>,
    pub uncertainty: Option<f64>,
    pub theta: Option<f64>,
    pub crossings: Vec<Crossing>,
    pub bound: BoundEntry,
    pub monitors: Vec<MonitorSummary>,
    pub monitors_pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assumptions: Option<AssumptionReport>,
    pub run: RunStats,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl BlowupVerdict {
    pub fn bound_t_star(&self) -> Option<f64> {
        self.bound.report.as_ref().map(|r| r.t_star)
    }

    pub fn monitor(&self, m: Monitor) -> Option<&MonitorSummary> {
        self.monitors.iter().find(|s| s.name == m)
    }
}

/// Theorem-side quantities fixed before the run starts.
struct Assessment {
    bound: BoundEntry,
    ctx: Option<MonitorContext>,
}

fn applicable(report: BoundReport) -> BoundEntry {
    BoundEntry { applicable: true, report: Some(report), reason: None, consistent: None, margin: None }
}

fn not_applicable(reason: String) -> BoundEntry {
    BoundEntry { applicable: false, report: None, reason: Some(reason), consistent: None, margin: None }
}

fn assess(
    problem: &Problem,
    profile: &ModelProfile,
    eigen: &EigenPair,
    report: Option<&AssumptionReport>,
    s0: &FunctionalSnapshot,
    exploratory: bool,
) -> Result<Assessment> {
    let Some(regime) = problem.regime else {
        return Ok(Assessment { bound: not_applicable("no theorem regime targeted".into()), ctx: None });
    };
    let grid = &problem.grid;
    let params = profile.f.params;
    let zeta0 = profile.zeta.zeta(0.0);
    let mut ctx = MonitorContext {
        regime,
        lambda1: eigen.lambda1,
        e0: s0.e2,
        a_const: None,
        alpha: params.alpha,
        kappa: params.kappa,
        poincare_c: None,
    };
    let mut margin = None;
    let bound: Result<BoundReport> = match regime {
        Regime::Th1 => (|| {
            if problem.u0.values().iter().any(|&v| v < 0.0) {
                return Err(Error::Precondition("initial data must be nonnegative".into()));
            }
            let lambda_pos = report
                .and_then(|r| r.lambda_pos)
                .or(params.lambda_pos)
                .ok_or_else(|| Error::Precondition("no positivity threshold lambda for f".into()))?;
            let c = threshold_c(&profile.f, eigen.lambda1, lambda_pos, &problem.sampling)?;
            margin = Some(s0.y / c - 1.0);
            tmax1_with_threshold(&profile.f, profile.m, eigen.lambda1, s0.mass, c)
        })(),
        Regime::Th2 => (|| {
            let eps = params.epsilon.ok_or(Error::MissingParameter("epsilon"))?;
            let c0 = params.c0.ok_or(Error::MissingParameter("c0"))?;
            let alpha = params.alpha.ok_or(Error::MissingParameter("alpha"))?;
            let a = constant_a(eps, c0, alpha, zeta0, grid.measure())?;
            ctx.a_const = Some(a);
            let lead = a * s0.l.powf(0.5 * alpha);
            margin = Some((lead - 2.0 * s0.e2) / (lead + 2.0 * s0.e2.abs()));
            tmax2(s0.e2, (2.0 * s0.l).sqrt(), a, alpha)
        })(),
        Regime::Th3 { p } => (|| {
            if p != problem.p {
                return Err(Error::InvalidParameter(format!("regime p = {p} differs from problem p = {}", problem.p)));
            }
            let kappa = params.kappa.ok_or(Error::MissingParameter("kappa"))?;
            let kinetic = s0.grad_p_integral / p;
            margin = Some(if kinetic > 0.0 { -s0.ep / kinetic } else { -s0.ep.signum() });
            let c = poincare_constant(grid, p, 1e-12)?;
            ctx.poincare_c = Some(c.c);
            if !in_blowup_set(grid, &problem.u0, profile, p)? {
                return Err(Error::Precondition(format!(
                    "initial data not in the nonpositive-energy set: E_p(u0) = {:e}",
                    s0.ep
                )));
            }
            let mut r = tmax3(c.c, p, kappa, s0.l)?;
            r.inputs.insert("mu1", c.mu1);
            Ok(r)
        })(),
    };
    let mut bound = match bound {
        Ok(r) => applicable(r),
        Err(e) if exploratory => not_applicable(e.to_string()),
        Err(e) => return Err(e),
    };
    bound.margin = margin;
    Ok(Assessment { bound, ctx: Some(ctx) })
}

struct Setup {
    eigen: EigenPair,
    report: Option<AssumptionReport>,
    /// Problem profile with `m` filled in.
    profile: ModelProfile,
    s0: FunctionalSnapshot,
    assessment: Assessment,
    notes: Vec<String>,
}

fn prepare(problem: &Problem, exploratory: bool) -> Result<Setup> {
    let grid = &problem.grid;
    grid.check_len(problem.u0.len())?;
    let eigen = principal_eigenpair(grid, 1e-10)?;
    let mut notes = Vec::new();
    let report = match problem.regime {
        Some(r) => Some(check_assumptions(&problem.profile.f, &problem.profile.zeta, r, &problem.sampling)?),
        None => None,
    };
    if let Some(rep) = &report {
        if rep.any_fails() {
            let failed: Vec<String> =
                rep.checks.iter().filter(|c| c.status.fails()).map(|c| format!("({})", c.assumption.key())).collect();
            let msg = format!("hypotheses fail: {}", failed.join(", "));
            if !exploratory {
                return Err(Error::Precondition(msg));
            }
            notes.push(msg);
        }
    }
    let m = match report.as_ref().and_then(|r| r.m) {
        Some(m) => m,
        None => compute_m(&problem.profile.zeta, problem.sampling.horizon, problem.profile.zeta.tail).unwrap_or(0.0),
    };
    let profile = problem.profile.clone().with_m(m);
    let s0 = Functionals::new(grid, &profile, &eigen, problem.p)?.snapshot(problem.u0.values(), 0.0)?;
    let assessment = assess(problem, &profile, &eigen, report.as_ref(), &s0, exploratory)?;
    Ok(Setup { eigen, report, profile, s0, assessment, notes })
}

/// Blow-up time bound of the targeted regime, evaluated as [`simulate`] does
/// but failing on any unmet hypothesis.
pub fn bound_report(problem: &Problem) -> Result<BoundReport> {
    if problem.regime.is_none() {
        return Err(Error::Precondition("no theorem regime targeted".into()));
    }
    let setup = prepare(problem, false)?;
    Ok(setup.assessment.bound.report.expect("strict assessment yields a report"))
}

const CSV_FLUSH_EVERY: usize = 128;

struct CsvSink<W: Write> {
    writer: csv::Writer<W>,
    monitors: Vec<Monitor>,
    rows: usize,
}

impl<W: Write> CsvSink<W> {
    fn new(out: W, monitors: &[Monitor]) -> Result<Self> {
        let mut writer = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = vec!["t", "dt", "sup_norm", "y", "a", "E2", "Ep", "H", "L"];
        header.extend(monitors.iter().map(|m| m.column()));
        writer.write_record(&header)?;
        Ok(CsvSink { writer, monitors: monitors.to_vec(), rows: 0 })
    }

    fn row(&mut self, dt: f64, s: &FunctionalSnapshot, residuals: &[MonitorResidual]) -> Result<()> {
        let mut rec: Vec<String> =
            [s.t, dt, s.sup_norm, s.y, s.a, s.e2, s.ep, s.h, s.l].iter().map(|v| format!("{v:e}")).collect();
        for m in &self.monitors {
            rec.push(residuals.iter().find(|r| r.name == *m).map_or_else(String::new, |r| format!("{:e}", r.residual)));
        }
        self.writer.write_record(&rec)?;
        self.rows += 1;
        if self.rows.is_multiple_of(CSV_FLUSH_EVERY) {
            self.writer.flush()?;
        }
        Ok(())
    }

    fn finish(mut self) -> Result<()> {
        self.writer.flush()?;
        Ok(())
    }
}

struct MonitorTrack {
    name: Monitor,
    count: usize,
    min_residual: f64,
    min_relative: f64,
    t_worst: f64,
}

/// Integrates until the ladder completes, the horizon is reached or the step
/// size collapses, streaming one CSV row per accepted step to `csv`.
pub fn simulate<W: Write>(problem: &Problem, csv: Option<W>) -> Result<(Trajectory, BlowupVerdict)> {
    let grid = &problem.grid;
    let controls = &problem.controls;
    if !(controls.horizon > 0.0 && controls.horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!("horizon must be positive, got {}", controls.horizon)));
    }
    if controls.ladder.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("ladder must be strictly increasing".into()));
    }
    let Setup { eigen, report, profile, s0, assessment, mut notes } = prepare(problem, problem.exploratory)?;
    let Assessment { mut bound, ctx } = assessment;
    let functionals = Functionals::new(grid, &profile, &eigen, problem.p)?;
    let monitors: &[Monitor] = ctx.as_ref().map_or(&[], |c| Monitor::for_regime(c.regime));

    let ladder: Vec<f64> = controls.ladder.iter().copied().filter(|&l| l > s0.sup_norm).collect();
    if ladder.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "ladder needs at least three levels above the initial sup-norm {:e}",
            s0.sup_norm
        )));
    }

    let mut sink = csv.map(|w| CsvSink::new(w, monitors)).transpose()?;
    if let Some(s) = sink.as_mut() {
        s.row(0.0, &s0, &[])?;
    }
    let mut stepper = Stepper::new(grid, &profile, problem.p, controls.step)?;
    let mut tracks: Vec<MonitorTrack> = monitors
        .iter()
        .map(|&name| MonitorTrack {
            name,
            count: 0,
            min_residual: f64::INFINITY,
            min_relative: f64::INFINITY,
            t_worst: 0.0,
        })
        .collect();

    let mut records = vec![StepRecord { t: 0.0, dt: 0.0, accepted: true, snapshot: s0, residuals: vec![] }];
    let mut u = problem.u0.values().to_vec();
    let mut clock = Clock::default();
    let mut prev = s0;
    let mut crossings = Vec::new();
    let (mut steps, mut rejections) = (0usize, 0usize);
    let (mut dt_max_used, mut dt_min_used) = (0.0_f64, f64::INFINITY);
    let mut status = None;

    while status.is_none() {
        let t = clock.now();
        if t >= controls.horizon {
            status = Some(RunStatus::GlobalUntilHorizon);
            break;
        }
        if steps >= controls.max_steps {
            notes.push(format!("step limit {} reached", controls.max_steps));
            status = Some(RunStatus::Inconclusive);
            break;
        }
        let out = match stepper.step(&u, t, controls.horizon - t) {
            Ok(o) => o,
            Err(e @ Error::DtCollapse { .. }) => {
                notes.push(e.to_string());
                status = Some(RunStatus::Inconclusive);
                break;
            }
            Err(e) => return Err(e),
        };
        steps += 1;
        rejections += out.rejections;
        dt_max_used = dt_max_used.max(out.dt_used);
        dt_min_used = dt_min_used.min(out.dt_used);
        clock.advance(out.dt_used);
        u = out.u_next;
        let next = functionals.snapshot(&u, clock.now())?;
        let residuals = match &ctx {
            Some(c) => monitor_step(&prev, &next, out.dt_used, &profile, c)?,
            None => Vec::new(),
        };
        for r in &residuals {
            let track = tracks.iter_mut().find(|k| k.name == r.name).expect("monitor tracked");
            track.count += 1;
            track.min_residual = track.min_residual.min(r.residual);
            let rel = if r.scale > 0.0 { r.residual / r.scale } else { r.residual };
            if rel < track.min_relative {
                track.min_relative = rel;
                track.t_worst = r.t;
            }
        }
        if let Some(s) = sink.as_mut() {
            s.row(out.dt_used, &next, &residuals)?;
        }
        while crossings.len() < ladder.len() && next.sup_norm >= ladder[crossings.len()] {
            let level = ladder[crossings.len()];
            let frac = if next.sup_norm > prev.sup_norm && prev.sup_norm > 0.0 {
                ((level / prev.sup_norm).ln() / (next.sup_norm / prev.sup_norm).ln()).clamp(0.0, 1.0)
            } else {
                1.0
            };
            crossings.push(Crossing { level, t: prev.t + frac * (next.t - prev.t) });
        }
        records.push(StepRecord { t: next.t, dt: out.dt_used, accepted: true, snapshot: next, residuals });
        prev = next;
        if crossings.len() == ladder.len() {
            status = Some(RunStatus::BlewUp);
        }
    }
    if let Some(s) = sink {
        s.finish()?;
    }
    let mut status = status.expect("loop exits with a status");
    if status == RunStatus::GlobalUntilHorizon && problem.exploratory && problem.regime.is_some() && !bound.applicable {
        status = RunStatus::Inconclusive;
    }

    let h = grid.h_min();
    let tol_factor = 10.0 * (dt_max_used + h * h);
    let summaries: Vec<MonitorSummary> = tracks
        .into_iter()
        .map(|k| MonitorSummary {
            name: k.name,
            count: k.count,
            min_residual: k.min_residual,
            min_relative: k.min_relative,
            t_worst: k.t_worst,
            passed: k.count == 0 || k.min_relative >= -tol_factor,
        })
        .collect();
    let monitors_pass = summaries.iter().all(|s| s.passed);

    let extrapolation = if status == RunStatus::BlewUp {
        match extrapolate_blowup(&crossings) {
            Ok(e) => Some(e),
            Err(e) => {
                notes.push(format!("extrapolation failed: {e}"));
                let t_last = crossings.last().map_or(clock.now(), |c| c.t);
                Some(Extrapolation { t_obs: t_last, uncertainty: t_last, theta: f64::NAN })
            }
        }
    } else {
        None
    };

    let verification = match (&bound.report, status) {
        _ if problem.exploratory || problem.regime.is_none() => Verification::NotApplicable,
        (Some(r), RunStatus::BlewUp) => {
            let e = extrapolation.expect("blow-up has an extrapolation");
            let consistent = e.t_obs <= r.t_star + e.uncertainty;
            bound.consistent = Some(consistent);
            if consistent && monitors_pass {
                Verification::Pass
            } else {
                Verification::Fail
            }
        }
        (Some(r), RunStatus::GlobalUntilHorizon) if controls.horizon >= r.t_star => {
            bound.consistent = Some(false);
            Verification::Fail
        }
        _ => Verification::Inconclusive,
    };
    if problem.exploratory {
        if let (Some(r), Some(e)) = (&bound.report, extrapolation) {
            bound.consistent = Some(e.t_obs <= r.t_star + e.uncertainty);
        }
    }

    let verdict = BlowupVerdict {
        status,
        verification,
        regime: problem.regime.map(|r| r.label()),
        exploratory: problem.exploratory,
        t_obs: extrapolation.map(|e| e.t_obs),
        uncertainty: extrapolation.map(|e| e.uncertainty),
        theta: extrapolation.map(|e| e.theta).filter(|t| t.is_finite()),
        crossings,
        bound,
        monitors: summaries,
        monitors_pass,
        assumptions: report,
        run: RunStats {
            t_end: clock.now(),
            steps,
            rejections,
            dt_max_used,
            dt_min_used: if steps == 0 { 0.0 } else { dt_min_used },
            sup_norm_start: s0.sup_norm,
            sup_norm_end: prev.sup_norm,
            lambda1: eigen.lambda1,
            h_min: h,
        },
        notes,
    };
    Ok((Trajectory { records }, verdict))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial_data::eigen_scaled;
    use crate::model::{Coefficient, Nonlinearity, StructuralParams};
    use std::f64::consts::PI;

    fn free_problem(f: Nonlinearity, amplitude: f64, horizon: f64) -> Problem {
        let grid = Grid::interval(0.0, PI, 101).unwrap();
        let e = principal_eigenpair(&grid, 1e-10).unwrap();
        Problem {
            u0: eigen_scaled(&e, amplitude),
            grid,
            profile: ModelProfile::new(f, Coefficient::one()),
            p: 2.0,
            regime: None,
            exploratory: true,
            sampling: Sampling::default(),
            controls: RunControls { horizon, ..RunControls::default() },
        }
    }

    #[test]
    fn linear_heat_is_global() {
        let (traj, v) = simulate::<Vec<u8>>(&free_problem(Nonlinearity::zero(), 1.0, 1.0), None).unwrap();
        assert_eq!(v.status, RunStatus::GlobalUntilHorizon);
        assert_eq!(v.verification, Verification::NotApplicable);
        let last = traj.records.last().unwrap();
        assert!((last.t - 1.0).abs() < 1e-12);
        assert!((last.snapshot.sup_norm / (-v.run.lambda1).exp() - 1.0).abs() < 1e-2);
    }

    #[test]
    fn cubic_reaction_blows_up_with_monotone_crossings() {
        let (_, v) = simulate::<Vec<u8>>(&free_problem(Nonlinearity::power(4.0).unwrap(), 10.0, 1.0), None).unwrap();
        assert_eq!(v.status, RunStatus::BlewUp);
        assert_eq!(v.crossings.len(), 7);
        assert!(v.crossings.windows(2).all(|w| w[1].t > w[0].t));
        assert!(v.t_obs.unwrap() >= v.crossings.last().unwrap().t);
    }

    #[test]
    fn csv_stream_has_header_and_rows() {
        let mut buf = Vec::new();
        let (traj, _) = simulate(&free_problem(Nonlinearity::zero(), 1.0, 0.01), Some(&mut buf)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,dt,sup_norm,y,a,E2,Ep,H,L");
        assert_eq!(lines.count(), traj.records.len());
    }

    #[test]
    fn failing_hypotheses_refuse_to_run() {
        let mut p = free_problem(Nonlinearity::custom("lin", |s| s), 1.0, 0.1);
        p.regime = Some(Regime::Th1);
        p.exploratory = false;
        assert!(matches!(simulate::<Vec<u8>>(&p, None), Err(Error::Precondition(_))));
        p.exploratory = true;
        let (_, v) = simulate::<Vec<u8>>(&p, None).unwrap();
        assert!(!v.bound.applicable);
        assert_eq!(v.verification, Verification::NotApplicable);
    }

    #[test]
    fn energy_regime_blows_up_within_bound() {
        let f = Nonlinearity::power(4.0).unwrap().with_params(StructuralParams {
            alpha: Some(4.0),
            epsilon: Some(2.0),
            c0: Some(0.25),
            ..Default::default()
        });
        let mut p = free_problem(f, 6.0, 5.0);
        p.regime = Some(Regime::Th2);
        p.exploratory = false;
        let (_, v) = simulate::<Vec<u8>>(&p, None).unwrap();
        assert_eq!(v.status, RunStatus::BlewUp);
        assert!(v.bound.applicable);
        assert_eq!(v.verification, Verification::Pass, "{v:#?}");
    }
}
