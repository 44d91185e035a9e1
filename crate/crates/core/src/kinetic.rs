//! BGK relaxation model on the roads around the junction.
//!
//! Every road carries a kinetic density `g(x, ξ)` on `K_h`. A step transports
//! `g` along the constant speeds `f'(ξ)` with first-order upwinding, then
//! relaxes it towards `χ(ρ_g, ·)` exactly. At the junction the incoming
//! kinetic traces are completed by [`psi`], which returns equilibrium data on
//! `Γ_out` balancing the kinetic mass flux.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::branch::Direction;
use crate::error::{Error, Result};
use crate::flux::FluxFunction;
use crate::junction::Junction;
use crate::level::LevelProblem;
use crate::network::RoadProfile;

/// Partition of `K_h` into velocity cells.
///
/// The partition refines a uniform grid by the flux breakpoints and by `0`,
/// so `f'` is constant on each cell and every cell lies entirely in `Γ_in`
/// or in `Γ_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct XiGrid {
    edges: Vec<f64>,
    widths: Vec<f64>,
    speeds: Vec<f64>,
    gamma_in: Vec<bool>,
}

impl XiGrid {
    pub fn new(f: &FluxFunction, direction: Direction, dxi: f64) -> Result<Self> {
        let (a, b) = f.domain();
        if !(dxi > 0.0) {
            return Err(Error::param("dxi", "must be positive"));
        }
        if !(a <= 0.0 && 0.0 <= b) {
            return Err(Error::param("domain", "the kinetic model needs 0 in every K_h"));
        }
        let cells = ((b - a) / dxi).ceil().max(1.0) as usize;
        let snap = 1e-9 * (b - a) / cells as f64;
        let mut edges: Vec<f64> = (0..=cells).map(|k| a + (b - a) * k as f64 / cells as f64).collect();
        edges[cells] = b;
        for &x in f.nodes().iter().chain(std::iter::once(&0.0)) {
            match edges.iter().position(|e| (e - x).abs() <= snap) {
                Some(k) => edges[k] = x,
                None => edges.push(x),
            }
        }
        edges.sort_by(f64::total_cmp);
        edges.dedup();
        let widths: Vec<f64> = edges.windows(2).map(|w| w[1] - w[0]).collect();
        let speeds: Vec<f64> = edges
            .windows(2)
            .map(|w| (f.eval(w[1]) - f.eval(w[0])) / (w[1] - w[0]))
            .collect();
        let gamma_in = speeds
            .iter()
            .map(|s| match direction {
                Direction::In => *s > 0.0,
                Direction::Out => *s < 0.0,
            })
            .collect();
        Ok(Self {
            edges,
            widths,
            speeds,
            gamma_in,
        })
    }

    pub fn len(&self) -> usize {
        self.widths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.widths.is_empty()
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    /// `f'` on each cell.
    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }

    pub fn is_gamma_in(&self, k: usize) -> bool {
        self.gamma_in[k]
    }

    pub fn max_speed(&self) -> f64 {
        self.speeds.iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    /// Exact averages of `χ(ρ, ·)` over the cells.
    pub fn equilibrium(&self, rho: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.equilibrium_into(rho, &mut out);
        out
    }

    pub fn equilibrium_into(&self, rho: f64, out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = chi_average(rho, self.edges[k], self.edges[k + 1]);
        }
    }

    /// `ρ_g = Σ g_k Δξ_k`.
    pub fn moment(&self, g: &[f64]) -> f64 {
        g.iter().zip(&self.widths).map(|(g, w)| g * w).sum()
    }

    /// `Σ f'(ξ_k) g_k Δξ_k`.
    pub fn flux(&self, g: &[f64]) -> f64 {
        g.iter()
            .zip(&self.widths)
            .zip(&self.speeds)
            .map(|((g, w), s)| g * w * s)
            .sum()
    }

    /// Distance to equilibrium `Σ |g - χ(ρ_g, ·)| Δξ`.
    pub fn defect(&self, g: &[f64]) -> f64 {
        let rho = self.moment(g);
        (0..self.len())
            .map(|k| (g[k] - chi_average(rho, self.edges[k], self.edges[k + 1])).abs() * self.widths[k])
            .sum()
    }

    /// Whether `g` satisfies `sgn(ξ) g = |g| ≤ 1` cellwise.
    pub fn in_d_xi(&self, g: &[f64], tol: f64) -> bool {
        (0..self.len()).all(|k| {
            let mid = 0.5 * (self.edges[k] + self.edges[k + 1]);
            if mid > 0.0 {
                g[k] >= -tol && g[k] <= 1.0 + tol
            } else {
                g[k] <= tol && g[k] >= -1.0 - tol
            }
        })
    }
}

/// Average of `χ(ρ, ·)` over `[lo, hi]`.
pub fn chi_average(rho: f64, lo: f64, hi: f64) -> f64 {
    let (s, e, sign) = if rho >= 0.0 { (0.0, rho, 1.0) } else { (rho, 0.0, -1.0) };
    let overlap = (hi.min(e) - lo.max(s)).max(0.0);
    sign * overlap / (hi - lo)
}

/// Velocity grids for every road of a junction, incoming first.
pub fn xi_grids(junction: &Junction, dxi: f64) -> Result<Vec<XiGrid>> {
    junction
        .roads()
        .map(|(dir, road)| XiGrid::new(&road.flux, dir, dxi))
        .collect()
}

/// Output of the kinetic coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiSolution {
    pub level: f64,
    pub z: f64,
    pub hat_rho: Vec<f64>,
    /// Full kinetic state at the junction per road: the given traces on
    /// `Γ_in`, cell averages of `χ(ρ̂_h, ·)` on `Γ_out`.
    pub face: Vec<Vec<f64>>,
    /// Kinetic flux `Σ f' g Δξ` of `face` per road.
    pub flux: Vec<f64>,
    /// `Σ_i flux_i - Σ_j flux_j`.
    pub residual: f64,
}

/// Kinetic coupling `Ψ`: completes the traces on `Γ_in` with equilibrium
/// data on `Γ_out` such that the kinetic mass flux balances.
///
/// Only the `Γ_in` entries of `traces` are read.
pub fn psi(junction: &Junction, grids: &[XiGrid], traces: &[Vec<f64>]) -> Result<PsiSolution> {
    if traces.len() != junction.len() || grids.len() != junction.len() {
        return Err(Error::WrongLength {
            expected: junction.len(),
            got: traces.len().min(grids.len()),
        });
    }
    // fixed Γ_in contribution per road
    let inflow: Vec<f64> = grids
        .iter()
        .zip(traces)
        .map(|(grid, g)| {
            (0..grid.len())
                .filter(|&k| grid.is_gamma_in(k))
                .map(|k| grid.speeds[k] * g[k] * grid.widths[k])
                .sum()
        })
        .collect();
    let out_flux = |h: usize, rho: f64| -> f64 {
        let grid = &grids[h];
        (0..grid.len())
            .filter(|&k| !grid.is_gamma_in(k))
            .map(|k| grid.speeds[k] * chi_average(rho, grid.edges[k], grid.edges[k + 1]) * grid.widths[k])
            .sum()
    };
    let road_flux = |h: usize, m: f64, z: f64| inflow[h] + out_flux(h, junction.road(h).hat_state(m, z));
    let balance = |m: f64, z: f64| {
        (0..junction.len())
            .map(|h| junction.direction(h).sign() * road_flux(h, m, z))
            .sum::<f64>()
    };
    let critical = junction.critical_levels();
    let level = LevelProblem {
        balance,
        bracket: junction.level_bracket(),
        critical: &critical,
        scale: junction.flux_scale(),
    }
    .solve()?;
    let hat_rho: Vec<f64> = (0..junction.len())
        .map(|h| junction.road(h).hat_state(level.m, level.z))
        .collect();
    let face: Vec<Vec<f64>> = (0..junction.len())
        .map(|h| {
            let grid = &grids[h];
            let eq = grid.equilibrium(hat_rho[h]);
            (0..grid.len())
                .map(|k| if grid.is_gamma_in(k) { traces[h][k] } else { eq[k] })
                .collect()
        })
        .collect();
    let flux: Vec<f64> = grids.iter().zip(&face).map(|(grid, g)| grid.flux(g)).collect();
    let n = junction.n();
    let residual = flux[..n].iter().sum::<f64>() - flux[n..].iter().sum::<f64>();
    Ok(PsiSolution {
        level: level.m,
        z: level.z,
        hat_rho,
        face,
        flux,
        residual,
    })
}

/// `Σ_i Σ_k f'_i |g¹ - g²| Δξ - Σ_j Σ_k f'_j |g¹ - g²| Δξ` for two junction
/// states.
pub fn kinetic_dissipation_check(junction: &Junction, grids: &[XiGrid], g1: &[Vec<f64>], g2: &[Vec<f64>]) -> f64 {
    (0..junction.len())
        .map(|h| {
            let grid = &grids[h];
            let v: f64 = (0..grid.len())
                .map(|k| grid.speeds[k] * (g1[h][k] - g2[h][k]).abs() * grid.widths[k])
                .sum();
            junction.direction(h).sign() * v
        })
        .sum()
}

/// Spatial grid shared by all roads: `nx` cells of width `dx`, covering
/// `[-nx dx, 0]` on incoming and `[0, nx dx]` on outgoing roads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceGrid {
    pub dx: f64,
    pub nx: usize,
}

impl SpaceGrid {
    pub fn new(dx: f64, nx: usize) -> Result<Self> {
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::param("dx", "must be positive"));
        }
        if nx == 0 {
            return Err(Error::param("nx", "need at least one cell"));
        }
        Ok(Self { dx, nx })
    }

    /// Grid covering `[-length, 0]` and `[0, length]`.
    pub fn covering(dx: f64, length: f64) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::param("truncation", "must be positive"));
        }
        Self::new(dx, (length / dx).round().max(1.0) as usize)
    }

    pub fn length(&self) -> f64 {
        self.dx * self.nx as f64
    }

    /// Cell centers for a road; incoming roads run from the far end to the
    /// junction, outgoing roads from the junction outwards.
    pub fn centers(&self, direction: Direction) -> Vec<f64> {
        let x = self.length();
        (0..self.nx)
            .map(|i| {
                let c = (i as f64 + 0.5) * self.dx;
                match direction {
                    Direction::In => c - x,
                    Direction::Out => c,
                }
            })
            .collect()
    }

    /// Cell averages of `profile`.
    pub fn sample(&self, direction: Direction, profile: &RoadProfile) -> Vec<f64> {
        let x = self.length();
        (0..self.nx)
            .map(|i| {
                let lo = i as f64 * self.dx;
                let (x0, x1) = match direction {
                    Direction::In => (lo - x, lo - x + self.dx),
                    Direction::Out => (lo, lo + self.dx),
                };
                profile.average(x0, x1)
            })
            .collect()
    }
}

/// Kinetic densities of all roads.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticState {
    /// `g[h][i * n_xi + k]`.
    pub g: Vec<Vec<f64>>,
    pub epsilon: f64,
    pub time: f64,
    /// Cumulative mass entering through the far end of incoming roads and
    /// leaving through the far end of outgoing roads.
    pub far_flux: Vec<f64>,
}

impl KineticState {
    /// Equilibrium data `χ(ρ, ·)` for the cell averages `rho[h][i]`.
    pub fn equilibrium(grids: &[XiGrid], rho: &[Vec<f64>], epsilon: f64) -> Self {
        let g = grids
            .iter()
            .zip(rho)
            .map(|(grid, cells)| {
                let nxi = grid.len();
                let mut out = vec![0.0; cells.len() * nxi];
                for (i, r) in cells.iter().enumerate() {
                    grid.equilibrium_into(*r, &mut out[i * nxi..(i + 1) * nxi]);
                }
                out
            })
            .collect();
        Self {
            g,
            epsilon,
            time: 0.0,
            far_flux: vec![0.0; grids.len()],
        }
    }

    /// Macroscopic densities `ρ_g` per road and cell.
    pub fn densities(&self, grids: &[XiGrid]) -> Vec<Vec<f64>> {
        self.g
            .iter()
            .zip(grids)
            .map(|(g, grid)| g.chunks(grid.len()).map(|row| grid.moment(row)).collect())
            .collect()
    }

    /// `Σ g Δx Δξ` over all roads.
    pub fn mass(&self, grids: &[XiGrid], dx: f64) -> f64 {
        self.densities(grids).iter().flatten().sum::<f64>() * dx
    }

    /// Mass corrected by the far-boundary ledger; constant in time.
    pub fn audited_mass(&self, junction: &Junction, grids: &[XiGrid], dx: f64) -> f64 {
        let ledger: f64 = (0..junction.len())
            .map(|h| junction.direction(h).sign() * self.far_flux[h])
            .sum();
        self.mass(grids, dx) - ledger
    }
}

/// Per-step junction data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KineticStep {
    pub time: f64,
    pub dt: f64,
    pub hat_rho: Vec<f64>,
    /// `ρ` of the kinetic state at the junction face.
    pub trace_rho: Vec<f64>,
    pub junction_flux: Vec<f64>,
    pub balance_residual: f64,
}

fn relax(grid: &XiGrid, row: &mut [f64], decay: f64, scratch: &mut [f64]) {
    let rho = grid.moment(row);
    grid.equilibrium_into(rho, scratch);
    for (g, eq) in row.iter_mut().zip(scratch.iter()) {
        *g = decay * *g + (1.0 - decay) * eq;
    }
}

/// Exact relaxation `g ← e^{-dt/ε} g + (1 - e^{-dt/ε}) χ(ρ_g, ·)` on every
/// spatial cell.
pub fn relax_state(state: &mut KineticState, grids: &[XiGrid], dt: f64) {
    let decay = (-dt / state.epsilon).exp();
    for (g, grid) in state.g.iter_mut().zip(grids) {
        let nxi = grid.len();
        let mut scratch = vec![0.0; nxi];
        for row in g.chunks_mut(nxi) {
            relax(grid, row, decay, &mut scratch);
        }
    }
}

/// One transport step followed by one relaxation step.
pub fn bgk_step(
    state: &KineticState,
    junction: &Junction,
    grids: &[XiGrid],
    space: SpaceGrid,
    dt: f64,
) -> Result<(KineticState, KineticStep)> {
    let speed = grids.iter().map(XiGrid::max_speed).fold(0.0, f64::max);
    let limit = space.dx / speed;
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::Cfl { dt, limit });
    }
    let nx = space.nx;
    let lambda = dt / space.dx;

    let traces: Vec<Vec<f64>> = (0..junction.len())
        .map(|h| {
            let nxi = grids[h].len();
            let i = match junction.direction(h) {
                Direction::In => nx - 1,
                Direction::Out => 0,
            };
            state.g[h][i * nxi..(i + 1) * nxi].to_vec()
        })
        .collect();
    let coupling = psi(junction, grids, &traces)?;

    let mut next = state.clone();
    for h in 0..junction.len() {
        let grid = &grids[h];
        let nxi = grid.len();
        let g = &state.g[h];
        let out = &mut next.g[h];
        let face = &coupling.face[h];
        let dir = junction.direction(h);
        let mut far = 0.0;
        for k in 0..nxi {
            let a = grid.speeds[k];
            let at = |i: usize| g[i * nxi + k];
            // flux through the left face of cell i, i = 0..=nx
            let face_flux = |i: usize| -> f64 {
                let left = if i == 0 {
                    match dir {
                        Direction::In => at(0),
                        Direction::Out => face[k],
                    }
                } else {
                    at(i - 1)
                };
                let right = if i == nx {
                    match dir {
                        Direction::In => face[k],
                        Direction::Out => at(nx - 1),
                    }
                } else {
                    at(i)
                };
                a * if a > 0.0 { left } else { right }
            };
            let mut left_flux = face_flux(0);
            match dir {
                Direction::In => far += left_flux * grid.widths[k],
                Direction::Out => far += a * at(nx - 1) * grid.widths[k],
            }
            for i in 0..nx {
                let right_flux = face_flux(i + 1);
                out[i * nxi + k] = at(i) - lambda * (right_flux - left_flux);
                left_flux = right_flux;
            }
        }
        next.far_flux[h] += dt * far;
    }
    relax_state(&mut next, grids, dt);
    next.time += dt;
    let trace_rho = grids.iter().zip(&coupling.face).map(|(g, face)| g.moment(face)).collect();
    Ok((
        next,
        KineticStep {
            time: state.time + dt,
            dt,
            hat_rho: coupling.hat_rho,
            trace_rho,
            junction_flux: coupling.flux,
            balance_residual: coupling.residual,
        },
    ))
}

/// Diagnostics gathered over a kinetic run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KineticReport {
    pub steps: usize,
    pub max_balance_residual: f64,
    /// Largest `|audited mass - initial|` relative to the initial mass (or
    /// absolute when that vanishes).
    pub max_mass_drift: f64,
    pub last: Option<KineticStep>,
}

/// Owns a kinetic simulation.
#[derive(Debug, Clone)]
pub struct BgkSolver {
    pub junction: Junction,
    pub grids: Vec<XiGrid>,
    pub space: SpaceGrid,
    pub state: KineticState,
    initial_mass: f64,
}

impl BgkSolver {
    pub fn new(junction: Junction, space: SpaceGrid, dxi: f64, epsilon: f64, initial: &[RoadProfile]) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::param("epsilon", "must be positive"));
        }
        if initial.len() != junction.len() {
            return Err(Error::WrongLength {
                expected: junction.len(),
                got: initial.len(),
            });
        }
        let grids = xi_grids(&junction, dxi)?;
        let rho: Vec<Vec<f64>> = junction
            .roads()
            .zip(initial)
            .map(|((dir, road), p)| {
                let cells = space.sample(dir, p);
                cells.iter().try_for_each(|r| road.flux.check(*r))?;
                Ok(cells)
            })
            .collect::<Result<_>>()?;
        let state = KineticState::equilibrium(&grids, &rho, epsilon);
        let initial_mass = state.audited_mass(&junction, &grids, space.dx);
        Ok(Self {
            junction,
            grids,
            space,
            state,
            initial_mass,
        })
    }

    /// Largest stable time step.
    pub fn max_dt(&self) -> f64 {
        self.space.dx / self.grids.iter().map(XiGrid::max_speed).fold(0.0, f64::max)
    }

    pub fn step(&mut self, dt: f64) -> Result<KineticStep> {
        let (next, info) = bgk_step(&self.state, &self.junction, &self.grids, self.space, dt)?;
        self.state = next;
        Ok(info)
    }

    pub fn mass_drift(&self) -> f64 {
        let m = self.state.audited_mass(&self.junction, &self.grids, self.space.dx);
        let d = (m - self.initial_mass).abs();
        if self.initial_mass.abs() > 0.0 {
            d / self.initial_mass.abs()
        } else {
            d
        }
    }

    /// Advances to `t_end` with `dt = cfl · dx / max|f'|`, shortening the last
    /// step. `observe` sees the solver after every step.
    pub fn run_with(&mut self, t_end: f64, cfl: f64, mut observe: impl FnMut(&Self, &KineticStep)) -> Result<KineticReport> {
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(Error::param("cfl", "must lie in (0, 1]"));
        }
        let dt = cfl * self.max_dt();
        let mut report = KineticReport {
            steps: 0,
            max_balance_residual: 0.0,
            max_mass_drift: 0.0,
            last: None,
        };
        while self.state.time < t_end * (1.0 - 1e-14) {
            let step = dt.min(t_end - self.state.time);
            let info = self.step(step)?;
            report.steps += 1;
            report.max_balance_residual = report.max_balance_residual.max(info.balance_residual.abs());
            report.max_mass_drift = report.max_mass_drift.max(self.mass_drift());
            observe(self, &info);
            report.last = Some(info);
        }
        Ok(report)
    }

    pub fn run(&mut self, t_end: f64, cfl: f64) -> Result<KineticReport> {
        self.run_with(t_end, cfl, |_, _| {})
    }

    pub fn densities(&self) -> Vec<Vec<f64>> {
        self.state.densities(&self.grids)
    }
}

/// Runs one kinetic simulation per relaxation time, in parallel.
pub fn epsilon_sweep(
    junction: &Junction,
    space: SpaceGrid,
    dxi: f64,
    epsilons: &[f64],
    initial: &[RoadProfile],
    t_end: f64,
    cfl: f64,
) -> Result<Vec<(Vec<Vec<f64>>, KineticReport)>> {
    epsilons
        .par_iter()
        .map(|&eps| {
            let mut solver = BgkSolver::new(junction.clone(), space, dxi, eps, initial)?;
            let report = solver.run(t_end, cfl)?;
            Ok((solver.densities(), report))
        })
        .collect()
}
