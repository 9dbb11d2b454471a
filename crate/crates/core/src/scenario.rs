//! JSON scenario files and their translation into a [`Problem`].

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::initial_data::{build_cutoff, eigen_scaled, proposition_lambda};
use crate::model::{Coefficient, ModelProfile, Nonlinearity, Regime, Sampling, StructuralParams, TailBehavior};
use crate::operators::principal_eigenpair;
use crate::solver::{Problem, RunControls};

/// Grid endpoint: a number, `"pi"`, or a multiple such as `"2pi"` / `"0.5*pi"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coord {
    Value(f64),
    #[serde(deserialize_with = "parse_pi")]
    Pi(f64),
}

impl Coord {
    pub fn value(self) -> f64 {
        match self {
            Coord::Value(v) | Coord::Pi(v) => v,
        }
    }
}

fn parse_pi<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    let s = String::deserialize(d)?;
    let t = s.trim();
    let head = t.strip_suffix("pi").ok_or_else(|| serde::de::Error::custom(format!("bad coordinate {s:?}")))?;
    let head = head.trim().trim_end_matches('*').trim();
    let k = if head.is_empty() {
        1.0
    } else if head == "-" {
        -1.0
    } else {
        head.parse::<f64>().map_err(|_| serde::de::Error::custom(format!("bad coordinate {s:?}")))?
    };
    Ok(k * std::f64::consts::PI)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x: (Coord, Coord),
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<(Coord, Coord)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ny: Option<usize>,
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        let x = (self.x.0.value(), self.x.1.value());
        match (self.y, self.ny) {
            (None, None) => Grid::interval(x.0, x.1, self.n),
            (Some(y), ny) => Grid::rectangle(x, (y.0.value(), y.1.value()), (self.n, ny.unwrap_or(self.n))),
            (None, Some(_)) => Err(Error::Scenario("grid: `ny` given without `y`".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FSpec {
    Key(String),
    Table { table: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ZetaSpec {
    Key(String),
    Table { table: Vec<(f64, f64)>, tail: TailBehavior },
}

impl Default for ZetaSpec {
    fn default() -> Self {
        ZetaSpec::Key("one".into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeTag {
    Th1,
    Th2,
    Th3,
    Exploratory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffSpec {
    /// Core box, one `[lo, hi]` per axis.
    pub k: Vec<(f64, f64)>,
    #[serde(default = "default_order")]
    pub order: u32,
    /// Multiplier applied to the minimal amplitude `λ*`.
    #[serde(default = "one")]
    pub factor: f64,
}

fn default_order() -> u32 {
    5
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// `amplitude · φ₁/‖φ₁‖∞`
    EigenScaled(f64),
    PropositionCutoff(CutoffSpec),
    /// Node values in a `x[,y],u` CSV, resolved relative to the scenario file.
    Table(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialSpec {
    /// `"eigen_scaled:<amplitude>"` or `"proposition_cutoff"`.
    Key(String),
    Structured(InitialData),
}

impl InitialSpec {
    pub fn resolve(&self) -> Result<InitialData> {
        match self {
            InitialSpec::Structured(d) => Ok(d.clone()),
            InitialSpec::Key(key) => {
                let (head, arg) = key.split_once(':').map_or((key.as_str(), None), |(h, a)| (h, Some(a)));
                match (head.trim(), arg) {
                    ("eigen_scaled", Some(a)) => a
                        .trim()
                        .parse()
                        .map(InitialData::EigenScaled)
                        .map_err(|_| Error::Scenario(format!("initial: bad amplitude in {key:?}"))),
                    ("table", Some(path)) => Ok(InitialData::Table(PathBuf::from(path.trim()))),
                    _ => Err(Error::Scenario(format!("initial: unknown constructor {key:?}"))),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    pub trajectory: String,
    pub verdict: String,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs { dir: None, trajectory: "trajectory.csv".into(), verdict: "verdict.json".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub grid: GridSpec,
    pub f: FSpec,
    #[serde(default)]
    pub params: StructuralParams,
    #[serde(default)]
    pub zeta: ZetaSpec,
    #[serde(default = "two")]
    pub p: f64,
    pub regime: RegimeTag,
    /// Run even when hypotheses fail.
    #[serde(default)]
    pub exploratory: bool,
    pub initial: InitialSpec,
    #[serde(default)]
    pub solver: RunControls,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<Sampling>,
    #[serde(default)]
    pub outputs: Outputs,
    /// Directory of the scenario file; relative paths resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario> {
        serde_json::from_str(text).map_err(|e| Error::Scenario(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut s = Scenario::from_json(&text).map_err(|e| match e {
            Error::Scenario(msg) => Error::Scenario(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        s.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(s)
    }

    pub fn nonlinearity(&self) -> Result<Nonlinearity> {
        let f = match &self.f {
            FSpec::Key(k) => Nonlinearity::from_key(k)?,
            FSpec::Table { table } => Nonlinearity::table(table)?,
        };
        Ok(f.with_params(self.params))
    }

    pub fn coefficient(&self) -> Result<Coefficient> {
        match &self.zeta {
            ZetaSpec::Key(k) => Coefficient::from_key(k),
            ZetaSpec::Table { table, tail } => Coefficient::table(table, *tail),
        }
    }

    pub fn profile(&self) -> Result<ModelProfile> {
        Ok(ModelProfile::new(self.nonlinearity()?, self.coefficient()?))
    }

    /// Targeted theorem, or `None` for a free exploratory run.
    pub fn regime(&self) -> Option<Regime> {
        match self.regime {
            RegimeTag::Th1 => Some(Regime::Th1),
            RegimeTag::Th2 => Some(Regime::Th2),
            RegimeTag::Th3 => Some(Regime::Th3 { p: self.p }),
            RegimeTag::Exploratory => None,
        }
    }

    pub fn sampling(&self) -> Sampling {
        self.sampling.unwrap_or_default()
    }

    /// Grid after `refine` uniform halvings of `h`.
    pub fn grid(&self, refine: u32) -> Result<Grid> {
        let mut g = self.grid.build()?;
        for _ in 0..refine {
            g = g.refined();
        }
        Ok(g)
    }

    pub fn initial_field(&self, grid: &Grid, profile: &ModelProfile) -> Result<Field> {
        match self.initial.resolve()? {
            InitialData::EigenScaled(amplitude) => {
                let e = principal_eigenpair(grid, 1e-10)?;
                Ok(eigen_scaled(&e, amplitude))
            }
            InitialData::PropositionCutoff(spec) => {
                let kappa = self
                    .params
                    .kappa
                    .ok_or_else(|| Error::Scenario("initial: proposition_cutoff needs params.kappa".into()))?;
                let cutoff = build_cutoff(grid, &spec.k, spec.order)?;
                let r = proposition_lambda(grid, &cutoff, &profile.f, profile.zeta.zeta(0.0), self.p, kappa)?;
                Ok(cutoff.phi.scaled(spec.factor * r.lambda_star))
            }
            InitialData::Table(path) => {
                let path = if path.is_absolute() { path } else { self.base_dir.join(path) };
                let file = File::open(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                Field::read_csv(grid, file)
            }
        }
    }

    pub fn problem(&self, refine: u32, exploratory: bool) -> Result<Problem> {
        let grid = self.grid(refine)?;
        let profile = self.profile()?;
        let u0 = self.initial_field(&grid, &profile)?;
        Ok(Problem {
            grid,
            profile,
            p: self.p,
            regime: self.regime(),
            exploratory: exploratory || self.exploratory || self.regime == RegimeTag::Exploratory,
            u0,
            sampling: self.sampling(),
            controls: self.solver.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TH1: &str = r#"{
        "grid": {"x": [0, "pi"], "n": 101},
        "f": "exp_minus_one",
        "zeta": "exp_t2",
        "regime": "th1",
        "initial": "eigen_scaled:5",
        "solver": {"horizon": 2, "ladder": [5, 10, 15, 20], "eps_reg": 1e-5}
    }"#;

    #[test]
    fn parses_minimal_scenario() {
        let s = Scenario::from_json(TH1).unwrap();
        assert_eq!(s.grid.x.1.value(), std::f64::consts::PI);
        assert_eq!(s.solver.ladder.len(), 4);
        assert_eq!(s.solver.step.eps_reg, 1e-5);
        assert_eq!(s.solver.step.sigma_d, 0.4);
        let p = s.problem(0, false).unwrap();
        assert_eq!(p.regime, Some(Regime::Th1));
        assert!((p.u0.sup_norm() - 5.0).abs() < 1e-12);
        assert_eq!(s.problem(1, false).unwrap().grid.len(), 201);
    }

    #[test]
    fn coordinates_accept_pi_multiples() {
        let g: GridSpec = serde_json::from_str(r#"{"x": ["-pi", "2*pi"], "n": 5}"#).unwrap();
        assert_eq!(g.x.0.value(), -std::f64::consts::PI);
        assert_eq!(g.x.1.value(), 2.0 * std::f64::consts::PI);
        assert!(serde_json::from_str::<GridSpec>(r#"{"x": [0, "tau"], "n": 5}"#).is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let bad = TH1.replace("\"regime\"", "\"regme\"");
        assert!(matches!(Scenario::from_json(&bad), Err(Error::Scenario(_))));
        let bad = TH1.replace("\"eps_reg\"", "\"eps\"");
        assert!(Scenario::from_json(&bad).is_err());
    }

    #[test]
    fn structured_initial_data() {
        let s = Scenario::from_json(
            r#"{
            "grid": {"x": [0, 1], "n": 101},
            "f": "power:4", "params": {"kappa": 4},
            "p": 3, "regime": "th3",
            "initial": {"proposition_cutoff": {"k": [[0.3, 0.7]]}}
        }"#,
        )
        .unwrap();
        let p = s.problem(0, false).unwrap();
        assert_eq!(p.regime, Some(Regime::Th3 { p: 3.0 }));
        assert!(p.u0.sup_norm() > 1.0);
    }

    #[test]
    fn exploratory_tag_has_no_regime() {
        let s = Scenario::from_json(&TH1.replace("\"th1\"", "\"exploratory\"")).unwrap();
        let p = s.problem(0, false).unwrap();
        assert!(p.regime.is_none() && p.exploratory);
    }
}
