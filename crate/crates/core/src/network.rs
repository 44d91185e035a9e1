//! Godunov finite volumes on the roads around the junction, and the
//! comparison with the kinetic model.

use serde::{Deserialize, Serialize};

use crate::branch::Direction;
use crate::error::{Error, Result};
use crate::junction::{solve_riemann, Junction};
use crate::kinetic::{epsilon_sweep, KineticReport, SpaceGrid};

/// Piecewise constant initial datum on one road.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct RoadProfile {
    #[serde(default)]
    pub default: f64,
    #[serde(default)]
    pub pieces: Vec<Piece>,
}

/// `ρ` on `[x0, x1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub x0: f64,
    pub x1: f64,
    pub rho: f64,
}

impl RoadProfile {
    pub fn constant(rho: f64) -> Self {
        Self {
            default: rho,
            pieces: Vec::new(),
        }
    }

    pub fn with_piece(mut self, x0: f64, x1: f64, rho: f64) -> Self {
        self.pieces.push(Piece { x0, x1, rho });
        self
    }

    /// Pieces must be nonempty and pairwise disjoint.
    pub fn validate(&self) -> Result<()> {
        for p in &self.pieces {
            if !(p.x0 < p.x1) {
                return Err(Error::param("initial.pieces", format!("empty piece [{}, {})", p.x0, p.x1)));
            }
        }
        let mut sorted = self.pieces.clone();
        sorted.sort_by(|a, b| a.x0.total_cmp(&b.x0));
        for w in sorted.windows(2) {
            if w[1].x0 < w[0].x1 {
                return Err(Error::param("initial.pieces", "pieces overlap"));
            }
        }
        Ok(())
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.default).chain(self.pieces.iter().map(|p| p.rho))
    }

    pub fn value_at(&self, x: f64) -> f64 {
        self.pieces
            .iter()
            .find(|p| p.x0 <= x && x < p.x1)
            .map_or(self.default, |p| p.rho)
    }

    /// Average over `[x0, x1]`.
    pub fn average(&self, x0: f64, x1: f64) -> f64 {
        let w = x1 - x0;
        let mut avg = self.default;
        for p in &self.pieces {
            let overlap = (x1.min(p.x1) - x0.max(p.x0)).max(0.0);
            if overlap > 0.0 {
                avg += overlap / w * (p.rho - self.default);
            }
        }
        avg
    }
}

/// Cell averages on every road, incoming first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkState {
    pub rho: Vec<Vec<f64>>,
    pub time: f64,
    /// Cumulative flux through the far end of each road, counted in the
    /// direction of the road.
    pub far_flux: Vec<f64>,
}

impl NetworkState {
    pub fn mass(&self, dx: f64) -> f64 {
        self.rho.iter().flatten().sum::<f64>() * dx
    }

    /// Mass corrected by the far-boundary ledger; constant in time.
    pub fn audited_mass(&self, junction: &Junction, dx: f64) -> f64 {
        let ledger: f64 = (0..junction.len())
            .map(|h| junction.direction(h).sign() * self.far_flux[h])
            .sum();
        self.mass(dx) - ledger
    }

    /// Cells next to the junction.
    pub fn junction_cells(&self, junction: &Junction) -> Vec<f64> {
        (0..junction.len())
            .map(|h| match junction.direction(h) {
                Direction::In => *self.rho[h].last().expect("nonempty road"),
                Direction::Out => self.rho[h][0],
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Time at the end of the step.
    pub t: f64,
    pub dt: f64,
    /// Riemann data at the junction for this step.
    pub junction_cells: Vec<f64>,
    pub hat_rho: Vec<f64>,
    pub trace_rho: Vec<f64>,
    pub junction_flux: Vec<f64>,
    pub balance_residual: f64,
    pub mass_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub rho: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub space: SpaceGrid,
    pub snapshots: Vec<Snapshot>,
    pub steps: Vec<StepRecord>,
    pub last: NetworkState,
}

impl Trajectory {
    pub fn max_balance_residual(&self) -> f64 {
        self.steps.iter().fold(0.0, |m, s| m.max(s.balance_residual.abs()))
    }

    pub fn max_mass_drift(&self) -> f64 {
        self.steps.iter().fold(0.0, |m, s| m.max(s.mass_drift))
    }
}

fn relative(drift: f64, reference: f64) -> f64 {
    if reference.abs() > 0.0 {
        drift / reference.abs()
    } else {
        drift
    }
}

#[derive(Debug, Clone)]
pub struct GodunovSolver {
    pub junction: Junction,
    pub space: SpaceGrid,
    pub state: NetworkState,
    initial_mass: f64,
}

impl GodunovSolver {
    pub fn new(junction: Junction, space: SpaceGrid, initial: &[RoadProfile]) -> Result<Self> {
        if initial.len() != junction.len() {
            return Err(Error::WrongLength {
                expected: junction.len(),
                got: initial.len(),
            });
        }
        let rho = junction
            .roads()
            .zip(initial)
            .map(|((dir, _), p)| {
                p.validate()?;
                Ok(space.sample(dir, p))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_cells(junction, space, rho)
    }

    pub fn from_cells(junction: Junction, space: SpaceGrid, rho: Vec<Vec<f64>>) -> Result<Self> {
        if rho.len() != junction.len() {
            return Err(Error::WrongLength {
                expected: junction.len(),
                got: rho.len(),
            });
        }
        for (cells, (_, road)) in rho.iter().zip(junction.roads()) {
            if cells.len() != space.nx {
                return Err(Error::WrongLength {
                    expected: space.nx,
                    got: cells.len(),
                });
            }
            cells.iter().try_for_each(|r| road.flux.check(*r))?;
        }
        let state = NetworkState {
            far_flux: vec![0.0; rho.len()],
            rho,
            time: 0.0,
        };
        let initial_mass = state.audited_mass(&junction, space.dx);
        Ok(Self {
            junction,
            space,
            state,
            initial_mass,
        })
    }

    pub fn max_dt(&self) -> f64 {
        self.space.dx / self.junction.max_speed()
    }

    pub fn mass_drift(&self) -> f64 {
        let m = self.state.audited_mass(&self.junction, self.space.dx);
        relative((m - self.initial_mass).abs(), self.initial_mass)
    }

    pub fn step(&mut self, dt: f64) -> Result<StepRecord> {
        let limit = self.max_dt();
        if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
            return Err(Error::Cfl { dt, limit });
        }
        let lambda = dt / self.space.dx;
        let cells = self.state.junction_cells(&self.junction);
        let sol = solve_riemann(&self.junction, &cells)?;
        let nx = self.space.nx;
        for h in 0..self.junction.len() {
            let f = &self.junction.road(h).flux;
            let rho = &self.state.rho[h];
            let dir = self.junction.direction(h);
            // faces 0..=nx, face i is the left face of cell i
            let mut faces = Vec::with_capacity(nx + 1);
            faces.push(match dir {
                Direction::In => f.eval(rho[0]),
                Direction::Out => sol.trace_flux[h],
            });
            for i in 1..nx {
                faces.push(f.godunov(rho[i - 1], rho[i]));
            }
            faces.push(match dir {
                Direction::In => sol.trace_flux[h],
                Direction::Out => f.eval(rho[nx - 1]),
            });
            let far = match dir {
                Direction::In => faces[0],
                Direction::Out => faces[nx],
            };
            let next: Vec<f64> = (0..nx).map(|i| rho[i] - lambda * (faces[i + 1] - faces[i])).collect();
            self.state.rho[h] = next;
            self.state.far_flux[h] += dt * far;
        }
        self.state.time += dt;
        Ok(StepRecord {
            t: self.state.time,
            dt,
            junction_cells: cells,
            balance_residual: sol.balance_residual(self.junction.n()),
            hat_rho: sol.hat_rho,
            trace_rho: sol.trace_rho,
            junction_flux: sol.trace_flux,
            mass_drift: self.mass_drift(),
        })
    }

    /// Advances to `t_end` with `dt = cfl · dx / max|f'|`, shortening the last
    /// step.
    pub fn run_with(&mut self, t_end: f64, cfl: f64, mut observe: impl FnMut(&Self, &StepRecord)) -> Result<Vec<StepRecord>> {
        check_cfl(cfl)?;
        let dt = cfl * self.max_dt();
        let mut steps = Vec::new();
        while self.state.time < t_end * (1.0 - 1e-14) {
            let rec = self.step(dt.min(t_end - self.state.time))?;
            observe(self, &rec);
            steps.push(rec);
        }
        Ok(steps)
    }
}

pub(crate) fn check_cfl(cfl: f64) -> Result<()> {
    if cfl > 0.0 && cfl <= 1.0 {
        Ok(())
    } else {
        Err(Error::param("cfl", "must lie in (0, 1]"))
    }
}

/// Runs the Godunov scheme up to `t_end`, keeping the initial and final
/// fields plus one snapshot every `snapshot_every` steps (never when `0`).
pub fn godunov_solve(
    junction: &Junction,
    initial: &[RoadProfile],
    space: SpaceGrid,
    cfl: f64,
    t_end: f64,
    snapshot_every: usize,
) -> Result<Trajectory> {
    if !(t_end >= 0.0) {
        return Err(Error::param("t_end", "must be nonnegative"));
    }
    let mut solver = GodunovSolver::new(junction.clone(), space, initial)?;
    let mut snapshots = vec![Snapshot {
        t: 0.0,
        rho: solver.state.rho.clone(),
    }];
    let mut count = 0;
    let steps = solver.run_with(t_end, cfl, |s, rec| {
        count += 1;
        if snapshot_every > 0 && count % snapshot_every == 0 && rec.t < t_end {
            snapshots.push(Snapshot {
                t: rec.t,
                rho: s.state.rho.clone(),
            });
        }
    })?;
    if !steps.is_empty() {
        snapshots.push(Snapshot {
            t: solver.state.time,
            rho: solver.state.rho.clone(),
        });
    }
    Ok(Trajectory {
        space,
        snapshots,
        steps,
        last: solver.state,
    })
}

/// `Σ_h Σ_i |a - b| Δx`.
pub fn l1_distance(a: &[Vec<f64>], b: &[Vec<f64>], dx: f64) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .sum::<f64>()
        * dx
}

/// Averages consecutive pairs of cells.
pub fn coarsen(fine: &[Vec<f64>]) -> Vec<Vec<f64>> {
    fine.iter()
        .map(|road| road.chunks(2).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonDistance {
    pub epsilon: f64,
    pub distance: f64,
    pub kinetic: KineticReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub distances: Vec<EpsilonDistance>,
    /// Distances strictly decrease along the given `ε` order.
    pub strictly_decreasing: bool,
    /// L1 distance between the Godunov solutions on `dx` and `dx/2`.
    pub refinement: f64,
    pub godunov: NetworkState,
}

/// Runs the Godunov scheme once and the BGK model for every `ε`, all on
/// the same spatial grid, and reports the L1 distances at `t_end`.
pub fn compare_kinetic_macroscopic(
    junction: &Junction,
    initial: &[RoadProfile],
    epsilons: &[f64],
    space: SpaceGrid,
    dxi: f64,
    cfl: f64,
    t_end: f64,
) -> Result<Comparison> {
    let (godunov, fine) = rayon::join(
        || godunov_solve(junction, initial, space, cfl, t_end, 0),
        || {
            let fine = SpaceGrid::new(space.dx / 2.0, space.nx * 2)?;
            godunov_solve(junction, initial, fine, cfl, t_end, 0)
        },
    );
    let (godunov, fine) = (godunov?, fine?);
    let refinement = l1_distance(&godunov.last.rho, &coarsen(&fine.last.rho), space.dx);
    let runs = epsilon_sweep(junction, space, dxi, epsilons, initial, t_end, cfl)?;
    let distances: Vec<EpsilonDistance> = epsilons
        .iter()
        .zip(runs)
        .map(|(&epsilon, (rho, kinetic))| EpsilonDistance {
            epsilon,
            distance: l1_distance(&rho, &godunov.last.rho, space.dx),
            kinetic,
        })
        .collect();
    let strictly_decreasing = distances.windows(2).all(|w| w[1].distance < w[0].distance);
    Ok(Comparison {
        distances,
        strictly_decreasing,
        refinement,
        godunov: godunov.last,
    })
}
