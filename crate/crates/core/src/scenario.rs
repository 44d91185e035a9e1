//! TOML scenarios and their CSV/JSON artifacts.
//!
//! ```toml
//! [[roads]]
//! id = "1"
//! direction = "in"
//! flux_breakpoints = [[0.0, 0.0], [0.5, 1.0], [1.0, 0.0]]
//! entropy = { kind = "quadratic" }
//! initial = { default = 0.25 }
//!
//! [solver]
//! scheme = "godunov"
//! dx = 0.0025
//! t_end = 0.2
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::branch::Direction;
use crate::dissipation::solve_max_dissipation;
use crate::entropy::EntropyPair;
use crate::error::{Error, Result};
use crate::flux::FluxFunction;
use crate::junction::{classify_state, germ_dissipation, germ_projection, solve_riemann, Junction, JunctionSolution, PriorityProfile, Road};
use crate::kinetic::{BgkSolver, SpaceGrid};
use crate::network::{compare_kinetic_macroscopic, godunov_solve, RoadProfile};
use crate::riemann::{self_similar_eval, Side};
use crate::sampling::{random_germ_member, rng};
use crate::table1::{self, Variant};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub roads: Vec<RoadConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoadConfig {
    pub id: String,
    pub direction: Direction,
    /// Optional `[a, b]`; must match the first and last breakpoint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<[f64; 2]>,
    pub flux_breakpoints: Vec<[f64; 2]>,
    pub entropy: EntropyConfig,
    #[serde(default)]
    pub priority: PriorityProfile,
    #[serde(default)]
    pub initial: RoadProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EntropyConfig {
    /// `(ρ - center)² / 2`; `center` defaults to `0`, `recentered = true`
    /// puts it at the flux maximizer.
    Quadratic {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<f64>,
        #[serde(default)]
        recentered: bool,
    },
    NegFlux,
    /// `η̂'` given per piece as `[x0, x1, η̂'(x0+), η̂'(x1-)]`.
    PiecewiseLinearDerivative {
        segments: Vec<[f64; 4]>,
        #[serde(default)]
        flux_offset: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Riemann,
    EntropyOpt,
    Godunov,
    Bgk,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Riemann => "riemann",
            Scheme::EntropyOpt => "entropy_opt",
            Scheme::Godunov => "godunov",
            Scheme::Bgk => "bgk",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "defaults::dx")]
    pub dx: f64,
    #[serde(default = "defaults::dxi")]
    pub dxi: f64,
    #[serde(default = "defaults::cfl")]
    pub cfl: f64,
    #[serde(default = "defaults::epsilon")]
    pub epsilon: f64,
    #[serde(default = "defaults::epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default = "defaults::t_end")]
    pub t_end: f64,
    /// Road length `X`; defaults to `1`.
    #[serde(default = "defaults::truncation")]
    pub truncation: f64,
    /// Field snapshot every this many steps; `0` keeps only the initial and
    /// final fields.
    #[serde(default)]
    pub snapshot_every: usize,
}

mod defaults {
    pub fn dx() -> f64 {
        1.0 / 400.0
    }
    pub fn dxi() -> f64 {
        1.0 / 200.0
    }
    pub fn cfl() -> f64 {
        0.9
    }
    pub fn epsilon() -> f64 {
        1e-3
    }
    pub fn epsilons() -> Vec<f64> {
        vec![1e-1, 1e-2, 1e-3]
    }
    pub fn t_end() -> f64 {
        0.2
    }
    pub fn truncation() -> f64 {
        1.0
    }
    pub fn write_fields() -> bool {
        true
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::default(),
            dx: defaults::dx(),
            dxi: defaults::dxi(),
            cfl: defaults::cfl(),
            epsilon: defaults::epsilon(),
            epsilons: defaults::epsilons(),
            t_end: defaults::t_end(),
            truncation: defaults::truncation(),
            snapshot_every: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory for the artifacts, relative to the working directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default = "defaults::write_fields")]
    pub fields: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: None, fields: true }
    }
}

impl EntropyConfig {
    fn build(&self, f: &FluxFunction) -> Result<EntropyPair> {
        let (a, b) = f.domain();
        match self {
            EntropyConfig::Quadratic { center, recentered } => {
                let c = if *recentered { f.peak() } else { center.unwrap_or(0.0) };
                EntropyPair::quadratic(a, b, c)
            }
            EntropyConfig::NegFlux => Ok(EntropyPair::neg_flux(f)),
            EntropyConfig::PiecewiseLinearDerivative { segments, flux_offset } => {
                Ok(EntropyPair::from_segments(segments)?.with_offset(*flux_offset))
            }
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| {
            let field = e.message().split('`').nth(1).unwrap_or("toml").to_string();
            Error::config(field, e.message().trim())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario configs serialize")
    }

    /// Preset for the reference two-in, two-out junction with Riemann data
    /// `(1/4, 1/4, 0, 0)`.
    pub fn table1(variant: Variant) -> Self {
        let roads = table1::fluxes()
            .into_iter()
            .enumerate()
            .map(|(k, f)| RoadConfig {
                id: (k + 1).to_string(),
                direction: if k < 2 { Direction::In } else { Direction::Out },
                domain: Some([0.0, 1.0]),
                flux_breakpoints: f.breakpoints().map(|(x, y)| [x, y]).collect(),
                entropy: match variant {
                    Variant::Common => EntropyConfig::Quadratic {
                        center: None,
                        recentered: false,
                    },
                    Variant::NegFlux => EntropyConfig::NegFlux,
                },
                priority: PriorityProfile::Linear,
                initial: RoadProfile::constant(table1::INITIAL[k]),
            })
            .collect();
        Self {
            name: Some(format!("table1_{}", variant.name())),
            roads,
            solver: SolverConfig::default(),
            output: OutputConfig::default(),
        }
    }

    /// Checks the schema beyond what parsing enforces and returns warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let j = self.junction()?;
        let s = &self.solver;
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("solver.{name}"), "must be positive"))
            }
        };
        positive("dx", s.dx)?;
        positive("dxi", s.dxi)?;
        positive("epsilon", s.epsilon)?;
        positive("truncation", s.truncation)?;
        if !(s.cfl > 0.0 && s.cfl <= 1.0) {
            return Err(Error::config("solver.cfl", "must lie in (0, 1]"));
        }
        if !(s.t_end >= 0.0 && s.t_end.is_finite()) {
            return Err(Error::config("solver.t_end", "must be nonnegative"));
        }
        for (k, e) in s.epsilons.iter().enumerate() {
            positive(&format!("epsilons[{k}]"), *e)?;
        }
        for (k, r) in self.roads.iter().enumerate() {
            if r.id.contains([',', '"', '\n', '\r']) {
                return Err(Error::config(format!("roads[{k}].id"), "must not contain commas, quotes or newlines"));
            }
            r.initial
                .validate()
                .map_err(|e| Error::config(format!("roads[{k}].initial"), e))?;
            let f = &j.road(self.position(k)).flux;
            for v in r.initial.values() {
                f.check(v).map_err(|e| Error::config(format!("roads[{k}].initial"), e))?;
            }
        }
        let mut warnings = Vec::new();
        if matches!(s.scheme, Scheme::Godunov | Scheme::Bgk) && s.truncation <= j.max_speed() * s.t_end {
            warnings.push(format!(
                "solver.truncation {} does not exceed max|f'| * t_end = {}; far-boundary effects may reach the junction",
                s.truncation,
                j.max_speed() * s.t_end
            ));
        }
        Ok(warnings)
    }

    // index of config road k in junction order
    fn position(&self, k: usize) -> usize {
        let dir = self.roads[k].direction;
        let before = self.roads[..k].iter().filter(|r| r.direction == dir).count();
        match dir {
            Direction::In => before,
            Direction::Out => self.roads.iter().filter(|r| r.direction == Direction::In).count() + before,
        }
    }

    pub fn junction(&self) -> Result<Junction> {
        let mut incoming = Vec::new();
        let mut outgoing = Vec::new();
        for (k, r) in self.roads.iter().enumerate() {
            let field = |name: &str| format!("roads[{k}].{name}");
            let f = FluxFunction::new(r.flux_breakpoints.iter().map(|p| (p[0], p[1])).collect())
                .map_err(|e| Error::config(field("flux_breakpoints"), e))?;
            if let Some([a, b]) = r.domain {
                if f.domain() != (a, b) {
                    return Err(Error::config(
                        field("domain"),
                        format!("[{a}, {b}] does not match the breakpoints {:?}", f.domain()),
                    ));
                }
            }
            let entropy = r.entropy.build(&f).map_err(|e| Error::config(field("entropy"), e))?;
            if let PriorityProfile::Power { exponent } = r.priority {
                if !(exponent > 0.0) {
                    return Err(Error::config(field("priority.exponent"), "must be positive"));
                }
            }
            let road = Road::new(r.id.clone(), f, entropy).with_priority(r.priority);
            match r.direction {
                Direction::In => incoming.push(road),
                Direction::Out => outgoing.push(road),
            }
        }
        Junction::new(incoming, outgoing).map_err(|e| Error::config("roads", e))
    }

    /// Initial profiles in junction order.
    pub fn profiles(&self) -> Vec<RoadProfile> {
        let mut out = vec![RoadProfile::default(); self.roads.len()];
        for k in 0..self.roads.len() {
            out[self.position(k)] = self.roads[k].initial.clone();
        }
        out
    }
}

/// Paths and headline numbers of a finished scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub scheme: Scheme,
    pub report: serde_json::Value,
    /// Last junction row per road: `(road_id, rho_trace, flux_trace, hat_rho)`.
    pub traces: Vec<(String, f64, f64, f64)>,
}

pub const TRACES_HEADER: &str = "t,road_id,rho_trace,flux_trace,hat_rho";
pub const FIELDS_HEADER: &str = "t,road_id,x,rho";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

struct Csv {
    text: String,
}

impl Csv {
    fn new(header: &str) -> Self {
        Self {
            text: format!("{header}\n"),
        }
    }

    fn row(&mut self, t: f64, id: &str, values: &[f64]) {
        let _ = write!(self.text, "{},{}", num(t), id);
        for v in values {
            let _ = write!(self.text, ",{}", num(*v));
        }
        self.text.push('\n');
    }
}

fn ids(j: &Junction) -> Vec<String> {
    j.roads().map(|(_, r)| r.id.clone()).collect()
}

fn riemann_data(config: &ScenarioConfig) -> Result<Vec<f64>> {
    config
        .profiles()
        .iter()
        .enumerate()
        .map(|(k, p)| {
            if p.pieces.is_empty() {
                Ok(p.default)
            } else {
                Err(Error::config(
                    format!("roads[{k}].initial.pieces"),
                    "one-shot schemes take constant data per road (initial.pieces must be empty)",
                ))
            }
        })
        .collect()
}

/// Certificates attached to a one-shot junction solution.
fn certificates(j: &Junction, rho0: &[f64], sol: &JunctionSolution) -> Result<serde_json::Value> {
    let germ = germ_projection(j, sol);
    let class = classify_state(j, &germ)?;
    let mut r = rng(0);
    let mut min = f64::INFINITY;
    for _ in 0..64 {
        min = min.min(germ_dissipation(j, &germ, &random_germ_member(&mut r, j)?)?);
    }
    let kkt = if j.roads().all(|(_, r)| r.entropy.dissipation_compatible(&r.flux)) {
        let m = solve_max_dissipation(j, rho0)?;
        let gap = m
            .solution
            .trace_flux
            .iter()
            .zip(&sol.trace_flux)
            .fold(0.0, |g: f64, (a, b)| g.max((a - b).abs()));
        json!({ "flux_gap": gap, "kkt_violation": m.kkt_violation, "unique": m.unique })
    } else {
        serde_json::Value::Null
    };
    Ok(json!({
        "germ_state": germ,
        "germ_state_class": class,
        "min_germ_dissipation_vs_64_samples": min,
        "max_dissipation": kkt,
    }))
}

/// Runs the scenario and writes `traces.csv`, `fields.csv` (unless
/// disabled) and `report.json` into `dir`.
pub fn run_scenario(config: &ScenarioConfig, dir: &Path) -> Result<RunSummary> {
    let warnings = config.validate()?;
    let j = config.junction()?;
    let s = &config.solver;
    let names = ids(&j);
    let mut traces = Csv::new(TRACES_HEADER);
    let mut fields = Csv::new(FIELDS_HEADER);
    let space = SpaceGrid::covering(s.dx, s.truncation).map_err(|e| Error::config("solver.dx", e))?;
    let mut last = Vec::new();
    let report = match s.scheme {
        Scheme::Riemann | Scheme::EntropyOpt => {
            let rho0 = riemann_data(config)?;
            let (sol, extra) = if s.scheme == Scheme::Riemann {
                (solve_riemann(&j, &rho0)?, serde_json::Value::Null)
            } else {
                let m = solve_max_dissipation(&j, &rho0)?;
                let extra = json!({ "cases": m.cases, "kkt_violation": m.kkt_violation, "unique": m.unique, "objective": m.objective });
                (m.solution, extra)
            };
            for h in 0..j.len() {
                traces.row(0.0, &names[h], &[sol.trace_rho[h], sol.trace_flux[h], sol.hat_rho[h]]);
                last.push((names[h].clone(), sol.trace_rho[h], sol.trace_flux[h], sol.hat_rho[h]));
            }
            if s.t_end > 0.0 {
                for (h, (dir, road)) in j.roads().enumerate() {
                    for x in space.centers(dir) {
                        let speed = x / s.t_end;
                        let rho = match dir {
                            Direction::In => self_similar_eval(&road.flux, rho0[h], sol.hat_rho[h], speed, Side::FromLeft),
                            Direction::Out => self_similar_eval(&road.flux, sol.hat_rho[h], rho0[h], speed, Side::FromRight),
                        };
                        fields.row(s.t_end, &names[h], &[x, rho]);
                    }
                }
            }
            json!({
                "level": sol.level,
                "z": sol.z,
                "balance_residual": sol.balance_residual(j.n()),
                "entropy_opt": extra,
                "certificates": certificates(&j, &rho0, &sol)?,
            })
        }
        Scheme::Godunov => {
            let traj = godunov_solve(&j, &config.profiles(), space, s.cfl, s.t_end, s.snapshot_every)?;
            for rec in &traj.steps {
                for h in 0..j.len() {
                    traces.row(rec.t, &names[h], &[rec.trace_rho[h], rec.junction_flux[h], rec.hat_rho[h]]);
                }
            }
            if let Some(rec) = traj.steps.last() {
                for h in 0..j.len() {
                    last.push((names[h].clone(), rec.trace_rho[h], rec.junction_flux[h], rec.hat_rho[h]));
                }
            }
            for snap in &traj.snapshots {
                for (h, (dir, _)) in j.roads().enumerate() {
                    for (x, rho) in space.centers(dir).into_iter().zip(&snap.rho[h]) {
                        fields.row(snap.t, &names[h], &[x, *rho]);
                    }
                }
            }
            json!({
                "steps": traj.steps.len(),
                "max_mass_drift": traj.max_mass_drift(),
                "max_balance_residual": traj.max_balance_residual(),
                "final_mass": traj.last.mass(space.dx),
                "far_flux": traj.last.far_flux,
            })
        }
        Scheme::Bgk => {
            let mut solver = BgkSolver::new(j.clone(), space, s.dxi, s.epsilon, &config.profiles())?;
            let snap = |solver: &BgkSolver, fields: &mut Csv| {
                let rho = solver.densities();
                for (h, (dir, _)) in j.roads().enumerate() {
                    for (x, r) in space.centers(dir).into_iter().zip(&rho[h]) {
                        fields.row(solver.state.time, &names[h], &[x, *r]);
                    }
                }
            };
            snap(&solver, &mut fields);
            let mut count = 0;
            let report = solver.run_with(s.t_end, s.cfl, |solver, step| {
                count += 1;
                for h in 0..j.len() {
                    traces.row(step.time, &names[h], &[step.trace_rho[h], step.junction_flux[h], step.hat_rho[h]]);
                }
                if s.snapshot_every > 0 && count % s.snapshot_every == 0 && step.time < s.t_end {
                    snap(solver, &mut fields);
                }
            })?;
            if let Some(step) = &report.last {
                snap(&solver, &mut fields);
                for h in 0..j.len() {
                    last.push((names[h].clone(), step.trace_rho[h], step.junction_flux[h], step.hat_rho[h]));
                }
            }
            json!({
                "steps": report.steps,
                "epsilon": s.epsilon,
                "max_mass_drift": report.max_mass_drift,
                "max_balance_residual": report.max_balance_residual,
                "far_flux": solver.state.far_flux,
            })
        }
    };
    let report = json!({
        "name": config.name,
        "scheme": s.scheme,
        "t_end": s.t_end,
        "roads": names,
        "warnings": warnings,
        "results": report,
    });
    write_artifacts(dir, &traces.text, config.output.fields.then_some(fields.text.as_str()), &report)?;
    Ok(RunSummary {
        dir: dir.to_path_buf(),
        scheme: s.scheme,
        report,
        traces: last,
    })
}

fn write_artifacts(dir: &Path, traces: &str, fields: Option<&str>, report: &serde_json::Value) -> Result<()> {
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    fs::write(dir.join("traces.csv"), traces).map_err(io)?;
    if let Some(fields) = fields {
        fs::write(dir.join("fields.csv"), fields).map_err(io)?;
    }
    let text = serde_json::to_string_pretty(report).expect("json values serialize");
    fs::write(dir.join("report.json"), text + "\n").map_err(io)?;
    Ok(())
}

/// Runs the `ε` sweep of the scenario and writes `compare.json`.
pub fn run_comparison(config: &ScenarioConfig, dir: &Path) -> Result<crate::network::Comparison> {
    config.validate()?;
    let j = config.junction()?;
    let s = &config.solver;
    let space = SpaceGrid::covering(s.dx, s.truncation).map_err(|e| Error::config("solver.dx", e))?;
    let c = compare_kinetic_macroscopic(&j, &config.profiles(), &s.epsilons, space, s.dxi, s.cfl, s.t_end)?;
    fs::create_dir_all(dir)?;
    let report = json!({
        "name": config.name,
        "dx": s.dx,
        "dxi": s.dxi,
        "t_end": s.t_end,
        "epsilons": s.epsilons,
        "distances": c.distances.iter().map(|d| d.distance).collect::<Vec<_>>(),
        "strictly_decreasing": c.strictly_decreasing,
        "godunov_refinement": c.refinement,
        "kinetic_max_mass_drift": c.distances.iter().map(|d| d.kinetic.max_mass_drift).fold(0.0, f64::max),
        "kinetic_max_balance_residual": c.distances.iter().map(|d| d.kinetic.max_balance_residual).fold(0.0, f64::max),
    });
    fs::write(
        dir.join("compare.json"),
        serde_json::to_string_pretty(&report).expect("json values serialize") + "\n",
    )?;
    Ok(c)
}

/// Both reference variants, written to `dir/common` and `dir/neg_flux`.
pub fn run_table1(dir: &Path) -> Result<Vec<(Variant, RunSummary)>> {
    [Variant::Common, Variant::NegFlux]
        .into_iter()
        .map(|v| Ok((v, run_scenario(&ScenarioConfig::table1(v), &dir.join(v.name()))?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
name = "two roads"

[[roads]]
id = "a"
direction = "in"
flux_breakpoints = [[0.0, 0.0], [0.5, 1.0], [1.0, 0.0]]
entropy = { kind = "quadratic" }
initial = { default = 0.3 }

[[roads]]
id = "b"
direction = "out"
domain = [0.0, 1.0]
flux_breakpoints = [[0.0, 0.0], [0.4, 0.8], [0.6, 1.0], [1.0, 0.0]]
entropy = { kind = "piecewise_linear_derivative", segments = [[0.0, 0.6, -1.0, 0.0], [0.6, 1.0, 0.0, 1.0]] }
priority = { kind = "power", exponent = 2.0 }

[solver]
scheme = "godunov"
dx = 0.05
t_end = 0.1
"#;

    #[test]
    fn parse_and_round_trip() {
        let c = ScenarioConfig::from_toml_str(SAMPLE).unwrap();
        assert_eq!(c.roads.len(), 2);
        assert_eq!(c.solver.scheme, Scheme::Godunov);
        assert_eq!(c.solver.cfl, 0.9);
        let again = ScenarioConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.to_toml_string(), c.to_toml_string());
    }

    #[test]
    fn non_concave_breakpoints_name_the_field() {
        let bad = SAMPLE.replace("[0.4, 0.8], [0.6, 1.0]", "[0.4, 0.5], [0.6, 1.0]");
        let e = ScenarioConfig::from_toml_str(&bad).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("roads[1].flux_breakpoints"), "{msg}");
        assert!(msg.contains("segments 0 and 1"), "{msg}");
    }

    #[test]
    fn missing_field_is_reported() {
        let bad = SAMPLE.replace("direction = \"out\"\n", "");
        match ScenarioConfig::from_toml_str(&bad) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "direction"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_solver_values() {
        let bad = SAMPLE.replace("dx = 0.05", "dx = -1.0");
        match ScenarioConfig::from_toml_str(&bad) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "solver.dx"),
            other => panic!("{other:?}"),
        }
        let bad = SAMPLE.replace("initial = { default = 0.3 }", "initial = { default = 1.3 }");
        assert!(matches!(ScenarioConfig::from_toml_str(&bad), Err(Error::Config { .. })));
    }

    #[test]
    fn table1_preset_writes_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let runs = run_table1(dir.path()).unwrap();
        for (variant, run) in &runs {
            let e = table1::expected(*variant);
            for (h, (_, rho, flux, hat)) in run.traces.iter().enumerate() {
                assert!((rho - e.trace_rho[h]).abs() < 1e-10);
                assert!((flux - e.trace_flux[h]).abs() < 1e-10);
                assert!((hat - e.hat_rho[h]).abs() < 1e-10);
            }
            let text = fs::read_to_string(run.dir.join("traces.csv")).unwrap();
            assert!(text.starts_with(TRACES_HEADER));
            assert_eq!(text.lines().count(), 5);
            let fields = fs::read_to_string(run.dir.join("fields.csv")).unwrap();
            assert!(fields.starts_with(FIELDS_HEADER));
            let report: serde_json::Value =
                serde_json::from_str(&fs::read_to_string(run.dir.join("report.json")).unwrap()).unwrap();
            assert_eq!(report["scheme"], "riemann");
        }
    }

    #[test]
    fn godunov_and_bgk_runs() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = ScenarioConfig::from_toml_str(SAMPLE).unwrap();
        let run = run_scenario(&c, dir.path()).unwrap();
        assert!(run.report["results"]["max_mass_drift"].as_f64().unwrap() < 1e-12);
        c.solver.scheme = Scheme::Bgk;
        c.solver.dxi = 0.05;
        c.solver.epsilon = 0.01;
        let run = run_scenario(&c, dir.path()).unwrap();
        assert!(run.report["results"]["max_balance_residual"].as_f64().unwrap() < 1e-10);
    }
}
