//! Seeded property suites: solver equivalence, germ dissipation, L1
//! contraction and conservation.
//!
//! Sample `k` of a suite draws from its own ChaCha stream, so results do not
//! depend on the number of worker threads.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::branch::Direction;
use crate::dissipation::{brute_force_max_dissipation, solve_max_dissipation};
use crate::error::{Error, Result};
use crate::junction::{classify_state, germ_dissipation, germ_projection, solve_riemann, Junction, StateClass};
use crate::kinetic::{kinetic_dissipation_check, psi, xi_grids, BgkSolver, SpaceGrid, XiGrid};
use crate::network::{GodunovSolver, RoadProfile};
use crate::sampling::{random_germ_member, random_junction, random_state, rng};
use crate::table1::{self, Variant, INITIAL};

fn stream(seed: u64, k: usize) -> ChaCha8Rng {
    let mut r = rng(seed);
    r.set_stream(k as u64);
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Contraction,
    Conservation,
    Germ,
    Equivalence,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Contraction, Suite::Conservation, Suite::Germ, Suite::Equivalence];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Contraction => "contraction",
            Suite::Conservation => "conservation",
            Suite::Germ => "germ",
            Suite::Equivalence => "equivalence",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::param("suite", format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value ≤ tolerance`.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }

    /// Passes when `value ≥ -tolerance`.
    pub fn at_least_minus(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            passed: value >= -tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub samples: usize,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Runs one suite with `samples` random instances.
pub fn run_suite(suite: Suite, samples: usize, seed: u64) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::Equivalence => {
            let s = equivalence(samples, seed, 800)?;
            vec![
                Check::at_most("riemann_vs_kkt_max_flux_gap", s.max_kkt_gap, 1e-8),
                Check::at_most("riemann_vs_brute_force_max_flux_gap", s.max_brute_gap, 2e-3),
            ]
        }
        Suite::Germ => {
            let s = germ(samples.max(1).div_ceil(100), 100.min(samples.max(1)), 20, seed)?;
            vec![
                Check::at_least_minus("min_germ_dissipation", s.min_dissipation, 1e-12),
                Check::at_most("misclassified_germ_members", s.misclassified as f64, 0.0),
                Check::at_most("undetected_non_fixed_states", s.undetected as f64, 0.0),
            ]
        }
        Suite::Contraction => {
            let space = SpaceGrid::covering(1.0 / 100.0, 1.0)?;
            let mut worst_godunov = f64::NEG_INFINITY;
            let mut worst_bgk = f64::NEG_INFINITY;
            let j = table1::junction(Variant::Common);
            for k in 0..samples.max(1) {
                let mut r = stream(seed, k);
                let (a, b) = perturbed_pair(&mut r, &j);
                worst_godunov = worst_godunov.max(godunov_contraction(&j, &a, &b, space, 0.9, 0.2)?.max_increase);
                let bgk = bgk_contraction(&j, &a, &b, space, 1.0 / 50.0, 1e-2, 0.9, 0.1)?;
                worst_bgk = worst_bgk.max(bgk.max_increase);
            }
            let kin = kinetic_coupling(&j, samples.max(1), seed, 1.0 / 200.0)?;
            vec![
                Check::at_most("godunov_l1_max_increase", worst_godunov, 1e-12),
                Check::at_most("bgk_l1_max_increase", worst_bgk, 1e-12),
                Check::at_least_minus("kinetic_coupling_min_dissipation", kin.min_dissipation, 1e-12),
            ]
        }
        Suite::Conservation => {
            let s = conservation(samples, seed)?;
            vec![
                Check::at_most("godunov_mass_drift", s.godunov_drift, 1e-12),
                Check::at_most("godunov_balance_residual", s.godunov_residual, 1e-10),
                Check::at_most("bgk_mass_drift", s.bgk_drift, 1e-12),
                Check::at_most("bgk_balance_residual", s.bgk_residual, 1e-10),
            ]
        }
    };
    Ok(SuiteReport {
        suite,
        samples,
        seed,
        checks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceStats {
    pub instances: usize,
    pub max_kkt_gap: f64,
    pub brute_instances: usize,
    pub max_brute_gap: f64,
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Compares the Riemann solver with the KKT solver on random junctions
/// with up to three roads per side, and with brute force on those with
/// `n + m ≤ 4` (skipped when `brute_grid` is `0`).
pub fn equivalence(samples: usize, seed: u64, brute_grid: usize) -> Result<EquivalenceStats> {
    let gaps = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut r = stream(seed, k);
            let j = random_junction(&mut r, 3, 3);
            let rho = random_state(&mut r, &j);
            let riemann = solve_riemann(&j, &rho)?;
            let kkt = solve_max_dissipation(&j, &rho)?;
            let kkt_gap = max_gap(&riemann.trace_flux, &kkt.solution.trace_flux);
            let brute = if brute_grid > 0 && j.len() <= 4 {
                let b = brute_force_max_dissipation(&j, &rho, brute_grid)?;
                Some(max_gap(&riemann.trace_flux, &b))
            } else {
                None
            };
            Ok((kkt_gap, brute))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EquivalenceStats {
        instances: samples,
        max_kkt_gap: gaps.iter().fold(0.0, |m, g| m.max(g.0)),
        brute_instances: gaps.iter().filter(|g| g.1.is_some()).count(),
        max_brute_gap: gaps.iter().filter_map(|g| g.1).fold(0.0, f64::max),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GermStats {
    pub junctions: usize,
    pub pairs: usize,
    pub min_dissipation: f64,
    /// Sampled germ members not classified as such.
    pub misclassified: usize,
    pub non_fixed: usize,
    /// Non-fixed states that dissipate against every member of their
    /// germ sample.
    pub undetected: usize,
}

/// On each random junction: germ dissipation over `pairs` pairs of germ
/// members, and for `non_fixed` states outside the fixed points a search
/// for a germ member against which the dissipation is negative.
///
/// The germ sample for a state holds 49 random members and the germ
/// projection of the state's own Riemann solution.
pub fn germ(junctions: usize, pairs: usize, non_fixed: usize, seed: u64) -> Result<GermStats> {
    let per = (0..junctions)
        .into_par_iter()
        .map(|k| {
            let mut r = stream(seed, k);
            let j = random_junction(&mut r, 3, 3);
            let pool: Vec<Vec<f64>> = (0..200).map(|_| random_germ_member(&mut r, &j)).collect::<Result<_>>()?;
            let mut misclassified = 0;
            for g in &pool {
                if classify_state(&j, g)? != StateClass::GermMember {
                    misclassified += 1;
                }
            }
            let mut min = f64::INFINITY;
            for _ in 0..pairs {
                let a = pool.choose(&mut r).expect("nonempty pool");
                let b = pool.choose(&mut r).expect("nonempty pool");
                min = min.min(germ_dissipation(&j, a, b)?);
            }
            let mut found = 0;
            let mut undetected = 0;
            let mut attempts = 0;
            while found < non_fixed && attempts < 100 * non_fixed {
                attempts += 1;
                let rho = random_state(&mut r, &j);
                if classify_state(&j, &rho)? != StateClass::NotFixed {
                    continue;
                }
                found += 1;
                let own = germ_projection(&j, &solve_riemann(&j, &rho)?);
                let mut worst = germ_dissipation(&j, &rho, &own)?;
                for g in pool.choose_multiple(&mut r, 49) {
                    worst = worst.min(germ_dissipation(&j, &rho, g)?);
                }
                if worst >= -1e-12 {
                    undetected += 1;
                }
            }
            Ok((min, misclassified, found, undetected))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GermStats {
        junctions,
        pairs: junctions * pairs,
        min_dissipation: per.iter().fold(f64::INFINITY, |m, p| m.min(p.0)),
        misclassified: per.iter().map(|p| p.1).sum(),
        non_fixed: per.iter().map(|p| p.2).sum(),
        undetected: per.iter().map(|p| p.3).sum(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KineticCouplingStats {
    pub samples: usize,
    pub min_dissipation: f64,
    pub max_residual: f64,
    /// Largest deviation of a `Γ_out` entry from the cell average of
    /// `χ(ρ̂_h, ·)`.
    pub max_equilibrium_gap: f64,
}

fn random_trace<R: Rng>(r: &mut R, grid: &XiGrid, rho: f64, equilibrium: bool) -> Vec<f64> {
    if equilibrium {
        return grid.equilibrium(rho);
    }
    let e = grid.edges();
    (0..grid.len())
        .map(|k| {
            let v: f64 = r.gen_range(0.0..=1.0);
            if 0.5 * (e[k] + e[k + 1]) > 0.0 {
                v
            } else {
                -v
            }
        })
        .collect()
}

/// Pairs of coupled kinetic junction states from random incoming data:
/// half equilibrium data `χ(ρ_h, ·)`, half arbitrary data in `D_ξ`.
pub fn kinetic_coupling(junction: &Junction, samples: usize, seed: u64, dxi: f64) -> Result<KineticCouplingStats> {
    let grids = xi_grids(junction, dxi)?;
    let per = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut r = stream(seed, k);
            let equilibrium = k % 2 == 0;
            let draw = |r: &mut ChaCha8Rng| -> Vec<Vec<f64>> {
                let rho = random_state(r, junction);
                grids
                    .iter()
                    .zip(&rho)
                    .map(|(g, rho)| random_trace(r, g, *rho, equilibrium))
                    .collect()
            };
            let t1 = draw(&mut r);
            let t2 = draw(&mut r);
            let p1 = psi(junction, &grids, &t1)?;
            let p2 = psi(junction, &grids, &t2)?;
            let d = kinetic_dissipation_check(junction, &grids, &p1.face, &p2.face);
            let mut gap: f64 = 0.0;
            for p in [&p1, &p2] {
                for (h, grid) in grids.iter().enumerate() {
                    let eq = grid.equilibrium(p.hat_rho[h]);
                    for k in (0..grid.len()).filter(|&k| !grid.is_gamma_in(k)) {
                        gap = gap.max((p.face[h][k] - eq[k]).abs());
                    }
                }
            }
            Ok((d, p1.residual.abs().max(p2.residual.abs()), gap))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KineticCouplingStats {
        samples,
        min_dissipation: per.iter().fold(f64::INFINITY, |m, p| m.min(p.0)),
        max_residual: per.iter().fold(0.0, |m, p| m.max(p.1)),
        max_equilibrium_gap: per.iter().fold(0.0, |m, p| m.max(p.2)),
    })
}

/// Two perturbations of the Riemann data `(1/4, 1/4, 0, 0)`: each road gets
/// one random block of random density.
pub fn perturbed_pair<R: Rng>(r: &mut R, junction: &Junction) -> (Vec<RoadProfile>, Vec<RoadProfile>) {
    let mut one = || -> Vec<RoadProfile> {
        junction
            .roads()
            .enumerate()
            .map(|(h, (dir, road))| {
                let (a, b) = road.flux.domain();
                let base = INITIAL.get(h).copied().unwrap_or(a).clamp(a, b);
                let x0: f64 = r.gen_range(0.0..0.8);
                let x1 = x0 + r.gen_range(0.05..0.2);
                let (x0, x1) = match dir {
                    Direction::In => (-x1, -x0),
                    Direction::Out => (x0, x1),
                };
                RoadProfile::constant(base).with_piece(x0, x1, r.gen_range(a..=b))
            })
            .collect()
    };
    let first = one();
    (first, one())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionStats {
    pub steps: usize,
    pub initial_distance: f64,
    pub final_distance: f64,
    /// Largest one-step increase of the L1 distance after subtracting the
    /// far-boundary flux of the difference.
    pub max_increase: f64,
}

/// Runs the Godunov scheme from `a` and `b` in lockstep and audits
/// `Σ|ρ¹ - ρ²|Δx` against the far-boundary Kružkov fluxes.
pub fn godunov_contraction(
    junction: &Junction,
    a: &[RoadProfile],
    b: &[RoadProfile],
    space: SpaceGrid,
    cfl: f64,
    t_end: f64,
) -> Result<ContractionStats> {
    crate::network::check_cfl(cfl)?;
    let mut s1 = GodunovSolver::new(junction.clone(), space, a)?;
    let mut s2 = GodunovSolver::new(junction.clone(), space, b)?;
    let dist = |s1: &GodunovSolver, s2: &GodunovSolver| crate::network::l1_distance(&s1.state.rho, &s2.state.rho, space.dx);
    let dt = cfl * s1.max_dt();
    let initial = dist(&s1, &s2);
    let mut prev = initial;
    let mut max_increase = f64::NEG_INFINITY;
    let mut steps = 0;
    while s1.state.time < t_end * (1.0 - 1e-14) {
        let step = dt.min(t_end - s1.state.time);
        // boundary term of d/dt Σ|ρ¹ - ρ²|Δx through the far faces
        let mut boundary = 0.0;
        for (h, (dir, road)) in junction.roads().enumerate() {
            let f = &road.flux;
            let (u, v) = match dir {
                Direction::In => (s1.state.rho[h][0], s2.state.rho[h][0]),
                Direction::Out => (s1.state.rho[h][space.nx - 1], s2.state.rho[h][space.nx - 1]),
            };
            let q = (u - v).signum() * (f.eval(u) - f.eval(v));
            boundary += dir.sign() * q;
        }
        s1.step(step)?;
        s2.step(step)?;
        steps += 1;
        let now = dist(&s1, &s2);
        max_increase = max_increase.max(now - prev - step * boundary);
        prev = now;
    }
    Ok(ContractionStats {
        steps,
        initial_distance: initial,
        final_distance: prev,
        max_increase,
    })
}

fn kinetic_distance(grids: &[XiGrid], g1: &[Vec<f64>], g2: &[Vec<f64>], dx: f64) -> f64 {
    grids
        .iter()
        .zip(g1.iter().zip(g2))
        .map(|(grid, (a, b))| {
            a.chunks(grid.len())
                .zip(b.chunks(grid.len()))
                .map(|(ra, rb)| {
                    ra.iter()
                        .zip(rb)
                        .zip(grid.widths())
                        .map(|((x, y), w)| (x - y).abs() * w)
                        .sum::<f64>()
                })
                .sum::<f64>()
        })
        .sum::<f64>()
        * dx
}

/// BGK analogue of [`godunov_contraction`] for `Σ|g¹ - g²|ΔxΔξ`.
#[allow(clippy::too_many_arguments)]
pub fn bgk_contraction(
    junction: &Junction,
    a: &[RoadProfile],
    b: &[RoadProfile],
    space: SpaceGrid,
    dxi: f64,
    epsilon: f64,
    cfl: f64,
    t_end: f64,
) -> Result<ContractionStats> {
    crate::network::check_cfl(cfl)?;
    let mut s1 = BgkSolver::new(junction.clone(), space, dxi, epsilon, a)?;
    let mut s2 = BgkSolver::new(junction.clone(), space, dxi, epsilon, b)?;
    let grids = s1.grids.clone();
    let dist = |s1: &BgkSolver, s2: &BgkSolver| kinetic_distance(&grids, &s1.state.g, &s2.state.g, space.dx);
    let dt = cfl * s1.max_dt();
    let initial = dist(&s1, &s2);
    let mut prev = initial;
    let mut max_increase = f64::NEG_INFINITY;
    let mut steps = 0;
    while s1.state.time < t_end * (1.0 - 1e-14) {
        let step = dt.min(t_end - s1.state.time);
        let mut boundary = 0.0;
        for (h, grid) in grids.iter().enumerate() {
            let nxi = grid.len();
            let dir = junction.direction(h);
            let i = match dir {
                Direction::In => 0,
                Direction::Out => space.nx - 1,
            };
            let (r1, r2) = (&s1.state.g[h][i * nxi..(i + 1) * nxi], &s2.state.g[h][i * nxi..(i + 1) * nxi]);
            let q: f64 = (0..nxi)
                .map(|k| grid.speeds()[k] * (r1[k] - r2[k]).abs() * grid.widths()[k])
                .sum();
            boundary += dir.sign() * q;
        }
        s1.step(step)?;
        s2.step(step)?;
        steps += 1;
        let now = dist(&s1, &s2);
        max_increase = max_increase.max(now - prev - step * boundary);
        prev = now;
    }
    Ok(ContractionStats {
        steps,
        initial_distance: initial,
        final_distance: prev,
        max_increase,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservationStats {
    pub runs: usize,
    pub godunov_drift: f64,
    pub godunov_residual: f64,
    pub bgk_drift: f64,
    pub bgk_residual: f64,
}

fn random_profiles<R: Rng>(r: &mut R, junction: &Junction) -> Vec<RoadProfile> {
    junction
        .roads()
        .map(|(dir, road)| {
            let (a, b) = road.flux.domain();
            let x0: f64 = r.gen_range(0.0..0.5);
            let x1 = x0 + r.gen_range(0.1..0.4);
            let (x0, x1) = match dir {
                Direction::In => (-x1, -x0),
                Direction::Out => (x0, x1),
            };
            RoadProfile::constant(r.gen_range(a..=b)).with_piece(x0, x1, r.gen_range(a..=b))
        })
        .collect()
}

/// Mass drift and junction balance of both solvers on random junctions
/// with random piecewise constant data.
pub fn conservation(samples: usize, seed: u64) -> Result<ConservationStats> {
    let per = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut r = stream(seed, k);
            let j = random_junction(&mut r, 3, 3);
            let init = random_profiles(&mut r, &j);
            let space = SpaceGrid::covering(1.0 / 50.0, 1.0)?;
            let mut g = GodunovSolver::new(j.clone(), space, &init)?;
            let steps = g.run_with(0.2, 0.9, |_, _| {})?;
            let gd = steps.iter().fold(0.0, |m: f64, s| m.max(s.mass_drift));
            let gr = steps.iter().fold(0.0, |m: f64, s| m.max(s.balance_residual.abs()));
            let mut b = BgkSolver::new(j, space, 1.0 / 40.0, 10f64.powf(-r.gen_range(1.0..3.0)), &init)?;
            let rep = b.run(0.2, 0.9)?;
            Ok((gd, gr, rep.max_mass_drift, rep.max_balance_residual))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConservationStats {
        runs: samples,
        godunov_drift: per.iter().fold(0.0, |m, p| m.max(p.0)),
        godunov_residual: per.iter().fold(0.0, |m, p| m.max(p.1)),
        bgk_drift: per.iter().fold(0.0, |m, p| m.max(p.2)),
        bgk_residual: per.iter().fold(0.0, |m, p| m.max(p.3)),
    })
}
