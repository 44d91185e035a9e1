//! Junction topology and the generalized Riemann solver.

use serde::{Deserialize, Serialize};

use crate::branch::{in_gamma_out, Direction};
use crate::entropy::{kruzkov_flux, EntropyPair};
use crate::error::{Error, Result};
use crate::flux::FluxFunction;
use crate::level::{Level, LevelProblem};
use crate::riemann::{self_similar_eval, Side};

/// Monotone surjective map `z ↦ Π^M(z)` from `[0, 1]` onto `S(M)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriorityProfile {
    /// `min S + z (max S - min S)`.
    #[default]
    Linear,
    /// `min S + z^p (max S - min S)` with `p > 0`.
    Power { exponent: f64 },
}

impl PriorityProfile {
    pub fn eval(&self, (lo, hi): (f64, f64), z: f64) -> f64 {
        let w = match *self {
            PriorityProfile::Linear => z,
            PriorityProfile::Power { exponent } => z.powf(exponent),
        };
        if w <= 0.0 {
            lo
        } else if w >= 1.0 {
            hi
        } else {
            lo + w * (hi - lo)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Road {
    pub id: String,
    pub flux: FluxFunction,
    pub entropy: EntropyPair,
    #[serde(default)]
    pub priority: PriorityProfile,
}

impl Road {
    pub fn new(id: impl Into<String>, flux: FluxFunction, entropy: EntropyPair) -> Self {
        Self {
            id: id.into(),
            flux,
            entropy,
            priority: PriorityProfile::Linear,
        }
    }

    pub fn with_priority(mut self, priority: PriorityProfile) -> Self {
        self.priority = priority;
        self
    }

    /// `Π^M(z)`.
    pub fn hat_state(&self, level: f64, z: f64) -> f64 {
        self.priority.eval(self.entropy.level_set(level), z)
    }
}

/// A single junction with `n ≥ 1` incoming and `m ≥ 1` outgoing roads.
///
/// Road vectors are ordered incoming first, then outgoing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "JunctionRepr", into = "JunctionRepr")]
pub struct Junction {
    incoming: Vec<Road>,
    outgoing: Vec<Road>,
}

#[derive(Serialize, Deserialize)]
struct JunctionRepr {
    incoming: Vec<Road>,
    outgoing: Vec<Road>,
}

impl TryFrom<JunctionRepr> for Junction {
    type Error = Error;
    fn try_from(r: JunctionRepr) -> Result<Self> {
        Junction::new(r.incoming, r.outgoing)
    }
}

impl From<Junction> for JunctionRepr {
    fn from(j: Junction) -> Self {
        JunctionRepr {
            incoming: j.incoming,
            outgoing: j.outgoing,
        }
    }
}

impl Junction {
    pub fn new(incoming: Vec<Road>, outgoing: Vec<Road>) -> Result<Self> {
        if incoming.is_empty() || outgoing.is_empty() {
            return Err(Error::MissingRoads);
        }
        let mut ids = std::collections::HashSet::new();
        for road in incoming.iter().chain(&outgoing) {
            if !ids.insert(road.id.as_str()) {
                return Err(Error::DuplicateRoad(road.id.clone()));
            }
            let (a, b) = road.flux.domain();
            if road.entropy.domain() != (a, b) {
                return Err(Error::EntropyDomainMismatch { a, b });
            }
        }
        let at_zero = incoming.iter().map(|r| r.flux.eval(0.0)).sum::<f64>()
            - outgoing.iter().map(|r| r.flux.eval(0.0)).sum::<f64>();
        let scale = incoming
            .iter()
            .chain(&outgoing)
            .map(|r| r.flux.max_flux())
            .fold(0.0, f64::max);
        if at_zero.abs() > 1e-12 * scale {
            return Err(Error::IncompatibleFluxes(at_zero));
        }
        Ok(Self { incoming, outgoing })
    }

    pub fn n(&self) -> usize {
        self.incoming.len()
    }

    pub fn m(&self) -> usize {
        self.outgoing.len()
    }

    pub fn len(&self) -> usize {
        self.n() + self.m()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn incoming(&self) -> &[Road] {
        &self.incoming
    }

    pub fn outgoing(&self) -> &[Road] {
        &self.outgoing
    }

    pub fn road(&self, h: usize) -> &Road {
        if h < self.n() {
            &self.incoming[h]
        } else {
            &self.outgoing[h - self.n()]
        }
    }

    pub fn direction(&self, h: usize) -> Direction {
        if h < self.n() {
            Direction::In
        } else {
            Direction::Out
        }
    }

    /// Roads with their direction, incoming first.
    pub fn roads(&self) -> impl Iterator<Item = (Direction, &Road)> {
        self.incoming
            .iter()
            .map(|r| (Direction::In, r))
            .chain(self.outgoing.iter().map(|r| (Direction::Out, r)))
    }

    /// Lower ends `(a_1, …, a_{n+m})`.
    pub fn lower_states(&self) -> Vec<f64> {
        self.roads().map(|(_, r)| r.flux.domain().0).collect()
    }

    /// Largest `f^max` over all roads.
    pub fn flux_scale(&self) -> f64 {
        self.roads().map(|(_, r)| r.flux.max_flux()).fold(0.0, f64::max)
    }

    /// Largest characteristic speed over all roads.
    pub fn max_speed(&self) -> f64 {
        self.roads().map(|(_, r)| r.flux.lipschitz()).fold(0.0, f64::max)
    }

    pub(crate) fn level_bracket(&self) -> (f64, f64) {
        let lo = self.roads().map(|(_, r)| r.entropy.lowest_slope()).fold(f64::INFINITY, f64::min);
        let hi = self.roads().map(|(_, r)| r.entropy.highest_slope()).fold(f64::NEG_INFINITY, f64::max);
        (lo - 1.0, hi + 1.0)
    }

    pub(crate) fn critical_levels(&self) -> Vec<f64> {
        let mut levels: Vec<f64> = self.roads().flat_map(|(_, r)| r.entropy.flat_levels()).collect();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        levels
    }

    pub(crate) fn check_states(&self, rho: &[f64]) -> Result<()> {
        if rho.len() != self.len() {
            return Err(Error::WrongLength {
                expected: self.len(),
                got: rho.len(),
            });
        }
        for (h, (_, road)) in self.roads().enumerate() {
            road.flux.check(rho[h])?;
        }
        Ok(())
    }

    /// Flux through the junction on road `h` with datum `rho0` and ghost
    /// state `hat`.
    pub fn road_flux(&self, h: usize, rho0: f64, hat: f64) -> f64 {
        let f = &self.road(h).flux;
        match self.direction(h) {
            Direction::In => f.godunov(rho0, hat),
            Direction::Out => f.godunov(hat, rho0),
        }
    }
}

/// Output shared by the junction solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JunctionSolution {
    /// Entropy-slope level `M`.
    pub level: f64,
    pub z: f64,
    pub hat_rho: Vec<f64>,
    pub trace_rho: Vec<f64>,
    pub trace_flux: Vec<f64>,
    /// Traces on the ghost side of the junction.
    pub ghost_trace: Vec<f64>,
}

impl JunctionSolution {
    /// `Σ_i F_i - Σ_j F_j`.
    pub fn balance_residual(&self, n: usize) -> f64 {
        self.trace_flux[..n].iter().sum::<f64>() - self.trace_flux[n..].iter().sum::<f64>()
    }
}

/// Ghost states `ρ̂_h = Π^M_h(z)`.
///
/// ```
/// use lwr_junction::{hat_states, table1};
/// let j = table1::junction(table1::Variant::Common);
/// assert_eq!(hat_states(&j, 3.0 / 16.0, 0.3), vec![3.0 / 16.0; 4]);
/// ```
pub fn hat_states(junction: &Junction, level: f64, z: f64) -> Vec<f64> {
    junction.roads().map(|(_, r)| r.hat_state(level, z)).collect()
}

/// Flux imbalance `Ξ(M, z)` for road data `rho0`; nonincreasing in both
/// arguments.
pub fn xi(junction: &Junction, rho0: &[f64], level: f64, z: f64) -> Result<f64> {
    junction.check_states(rho0)?;
    Ok(xi_unchecked(junction, rho0, level, z))
}

fn xi_unchecked(junction: &Junction, rho0: &[f64], level: f64, z: f64) -> f64 {
    let mut total = 0.0;
    for (h, (dir, road)) in junction.roads().enumerate() {
        let flux = junction.road_flux(h, rho0[h], road.hat_state(level, z));
        total += dir.sign() * flux;
    }
    total
}

/// Traces on the road side and on the ghost side for ghost state `hat`.
pub(crate) fn traces(f: &FluxFunction, dir: Direction, rho0: f64, hat: f64) -> (f64, f64) {
    match dir {
        Direction::In => (
            self_similar_eval(f, rho0, hat, 0.0, Side::FromLeft),
            self_similar_eval(f, rho0, hat, 0.0, Side::FromRight),
        ),
        Direction::Out => (
            self_similar_eval(f, hat, rho0, 0.0, Side::FromRight),
            self_similar_eval(f, hat, rho0, 0.0, Side::FromLeft),
        ),
    }
}

pub(crate) fn solution_from_level(junction: &Junction, rho0: &[f64], level: Level) -> JunctionSolution {
    let hat_rho = hat_states(junction, level.m, level.z);
    let mut trace_rho = Vec::with_capacity(junction.len());
    let mut ghost_trace = Vec::with_capacity(junction.len());
    let mut trace_flux = Vec::with_capacity(junction.len());
    for (h, (dir, road)) in junction.roads().enumerate() {
        let (trace, ghost) = traces(&road.flux, dir, rho0[h], hat_rho[h]);
        trace_rho.push(trace);
        ghost_trace.push(ghost);
        trace_flux.push(road.flux.eval(trace));
    }
    JunctionSolution {
        level: level.m,
        z: level.z,
        hat_rho,
        trace_rho,
        trace_flux,
        ghost_trace,
    }
}

/// Solves the generalized Riemann problem at the junction.
///
/// ```
/// use lwr_junction::{solve_riemann, table1};
/// let j = table1::junction(table1::Variant::Common);
/// let s = solve_riemann(&j, &table1::INITIAL).unwrap();
/// let expected = [0.5, 0.5, 0.75, 0.25];
/// for (got, want) in s.trace_flux.iter().zip(expected) {
///     assert!((got - want).abs() < 1e-12);
/// }
/// ```
pub fn solve_riemann(junction: &Junction, rho0: &[f64]) -> Result<JunctionSolution> {
    junction.check_states(rho0)?;
    let critical = junction.critical_levels();
    let level = LevelProblem {
        balance: |m, z| xi_unchecked(junction, rho0, m, z),
        bracket: junction.level_bracket(),
        critical: &critical,
        scale: junction.flux_scale(),
    }
    .solve()?;
    Ok(solution_from_level(junction, rho0, level))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateClass {
    NotFixed,
    FixedPoint,
    GermMember,
}

fn state_tol(junction: &Junction) -> (f64, f64) {
    let width = junction
        .roads()
        .map(|(_, r)| {
            let (a, b) = r.flux.domain();
            b - a
        })
        .fold(0.0, f64::max);
    (1e-9 * width, 1e-9 * junction.flux_scale())
}

/// Whether `rho` is stationary under the Riemann map, and whether it
/// belongs to the germ `𝒦`.
pub fn classify_state(junction: &Junction, rho: &[f64]) -> Result<StateClass> {
    let sol = solve_riemann(junction, rho)?;
    let (rho_tol, flux_tol) = state_tol(junction);
    if rho.iter().zip(&sol.trace_rho).any(|(a, b)| (a - b).abs() > rho_tol) {
        return Ok(StateClass::NotFixed);
    }
    for (h, (dir, road)) in junction.roads().enumerate() {
        let f = &road.flux;
        let hat = sol.hat_rho[h];
        let tied = (f.eval(rho[h]) - f.eval(hat)).abs() <= flux_tol;
        if tied && in_gamma_out(f, dir, hat) {
            let s = match dir {
                Direction::In => rho[h] + rho_tol,
                Direction::Out => rho[h] - rho_tol,
            };
            if !in_gamma_out(f, dir, s) {
                return Ok(StateClass::FixedPoint);
            }
        }
    }
    Ok(StateClass::GermMember)
}

/// Germ member with the same junction fluxes as `sol`: the road trace is
/// replaced by the ghost state whenever the latter lies in `Γ_out` and
/// carries the same flux (up to the tolerance of [`classify_state`]).
pub fn germ_projection(junction: &Junction, sol: &JunctionSolution) -> Vec<f64> {
    let (_, flux_tol) = state_tol(junction);
    junction
        .roads()
        .enumerate()
        .map(|(h, (dir, road))| {
            let f = &road.flux;
            let (trace, hat) = (sol.trace_rho[h], sol.hat_rho[h]);
            if in_gamma_out(f, dir, hat) && (f.eval(trace) - f.eval(hat)).abs() <= flux_tol {
                hat
            } else {
                trace
            }
        })
        .collect()
}

/// `Σ_i q_i(ρ¹_i, ρ²_i) - Σ_j q_j(ρ¹_j, ρ²_j)` with Kružkov fluxes `q`.
pub fn germ_dissipation(junction: &Junction, rho1: &[f64], rho2: &[f64]) -> Result<f64> {
    junction.check_states(rho1)?;
    junction.check_states(rho2)?;
    Ok(junction
        .roads()
        .enumerate()
        .map(|(h, (dir, road))| dir.sign() * kruzkov_flux(&road.flux, rho1[h], rho2[h]))
        .sum())
}
