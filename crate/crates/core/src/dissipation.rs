//! Maximum entropy dissipation at the junction, written as a concave program
//! in the junction fluxes and solved through its KKT conditions.
//!
//! Per road the program keeps one flux `F̃_h ∈ [0, cap_h]`, realized by the
//! state `ρ̃_h = f_h^{-1}|_{Γ_out}(F̃_h)`, and maximizes
//! `Σ_i Ĝ_i(ρ̃_i) - Σ_j Ĝ_j(ρ̃_j)` subject to `Σ_i F̃_i = Σ_j F̃_j`.

use serde::{Deserialize, Serialize};

use crate::branch::{in_gamma_out, inverse_out, Direction};
use crate::entropy::{entropy_flux, EntropyPair};
use crate::error::{Error, Result};
use crate::flux::FluxFunction;
use crate::junction::{Junction, JunctionSolution};
use crate::level::{Level, LevelProblem};

/// The flux program built from road data `ρ₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxProgram {
    /// Upper bound `cap_h` on `F̃_h`.
    pub caps: Vec<f64>,
    /// Admissible `ρ̃_h`, the part of `Γ_out` with `f ≤ cap_h`.
    pub ranges: Vec<(f64, f64)>,
}

impl FluxProgram {
    pub fn new(junction: &Junction, rho0: &[f64]) -> Result<Self> {
        junction.check_states(rho0)?;
        let mut caps = Vec::with_capacity(junction.len());
        let mut ranges = Vec::with_capacity(junction.len());
        for (h, (dir, road)) in junction.roads().enumerate() {
            let f = &road.flux;
            let (a, b) = f.domain();
            let s = f.peak();
            let r = rho0[h];
            let (cap, edge) = match dir {
                Direction::In if r >= s => (f.max_flux(), s),
                Direction::Out if r <= s => (f.max_flux(), s),
                _ => (f.eval(r), inverse_out(f, dir, f.eval(r))),
            };
            caps.push(cap.max(0.0));
            ranges.push(match dir {
                Direction::In => (edge, b),
                Direction::Out => (a, edge),
            });
        }
        Ok(Self { caps, ranges })
    }

    /// Objective term `±Ĝ_h(f_h^{-1}|_{Γ_out}(F))`.
    pub fn term(junction: &Junction, h: usize, flux: f64) -> f64 {
        let road = junction.road(h);
        let dir = junction.direction(h);
        let rho = inverse_out(&road.flux, dir, flux);
        dir.sign() * entropy_flux(&road.entropy, &road.flux, rho)
    }

    pub fn objective(&self, junction: &Junction, fluxes: &[f64]) -> f64 {
        fluxes
            .iter()
            .enumerate()
            .map(|(h, f)| Self::term(junction, h, *f))
            .sum()
    }

    fn tilde_state(&self, junction: &Junction, h: usize, level: f64, z: f64) -> f64 {
        let (lo, hi) = self.ranges[h];
        junction.road(h).hat_state(level, z).clamp(lo, hi)
    }

    fn balance(&self, junction: &Junction, level: f64, z: f64) -> f64 {
        junction
            .roads()
            .enumerate()
            .map(|(h, (dir, road))| dir.sign() * road.flux.eval(self.tilde_state(junction, h, level, z)))
            .sum()
    }
}

/// Which branch of the KKT case split a road satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KktCase {
    /// `η̂'(ρ̃-) ≤ M ≤ η̂'(ρ̃+)` with `0 < F̃ < cap`.
    Interior,
    /// `F̃ = cap` and the multiplier bound on the capacity side.
    CapacityActive,
    /// `F̃ = 0`.
    ZeroActive,
}

/// Result of [`solve_max_dissipation`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxDissipation {
    /// Same shape as the Riemann solver output. `ghost_trace` holds the
    /// optimal `ρ̃`.
    pub solution: JunctionSolution,
    pub program: FluxProgram,
    pub cases: Vec<KktCase>,
    /// Largest violation of the KKT inequalities, in slope units.
    pub kkt_violation: f64,
    /// `false` when a flat piece of some `η̂'` overlaps the admissible
    /// states, in which case other maximizers may exist.
    pub unique: bool,
    pub objective: f64,
}

/// Maximizes the entropy dissipation at the junction.
///
/// Requires every entropy to be dissipation compatible.
///
/// ```
/// use lwr_junction::{solve_max_dissipation, table1};
/// let j = table1::recentered_junction();
/// let r = solve_max_dissipation(&j, &table1::INITIAL).unwrap();
/// let expected = [0.5, 0.5, 0.25, 0.75];
/// for (got, want) in r.solution.trace_flux.iter().zip(expected) {
///     assert!((got - want).abs() < 1e-12);
/// }
/// ```
pub fn solve_max_dissipation(junction: &Junction, rho0: &[f64]) -> Result<MaxDissipation> {
    for (_, road) in junction.roads() {
        if !road.entropy.dissipation_compatible(&road.flux) {
            return Err(Error::NotDissipationCompatible(road.id.clone()));
        }
    }
    let program = FluxProgram::new(junction, rho0)?;
    let cap_in: f64 = program.caps[..junction.n()].iter().sum();
    let cap_out: f64 = program.caps[junction.n()..].iter().sum();
    let level = if cap_in == 0.0 || cap_out == 0.0 {
        // the only feasible point is F̃ = 0; pick M so that every ρ̃ sits at
        // its zero-flux end
        let (lo, hi) = junction.level_bracket();
        let m = if cap_in == 0.0 && cap_out == 0.0 {
            0.5 * (lo + hi)
        } else if cap_in == 0.0 {
            lo
        } else {
            hi
        };
        Level { m, z: 0.0, residual: 0.0 }
    } else {
        let critical = junction.critical_levels();
        LevelProblem {
            balance: |m, z| program.balance(junction, m, z),
            bracket: junction.level_bracket(),
            critical: &critical,
            scale: junction.flux_scale(),
        }
        .solve()?
    };
    Ok(assemble(junction, rho0, program, level))
}

fn assemble(junction: &Junction, rho0: &[f64], program: FluxProgram, level: Level) -> MaxDissipation {
    let n = junction.len();
    let mut hat_rho = Vec::with_capacity(n);
    let mut tilde = Vec::with_capacity(n);
    let mut flux = Vec::with_capacity(n);
    let mut trace = Vec::with_capacity(n);
    let mut cases = Vec::with_capacity(n);
    let mut violation: f64 = 0.0;
    let mut unique = true;
    let m = level.m;
    for (h, (dir, road)) in junction.roads().enumerate() {
        let f = &road.flux;
        let e = &road.entropy;
        let hat = road.hat_state(m, level.z);
        let (lo, hi) = program.ranges[h];
        let cap = program.caps[h];
        let (rho_t, cap_edge, zero_edge) = match dir {
            Direction::In => (hat.clamp(lo, hi), lo, hi),
            Direction::Out => (hat.clamp(lo, hi), hi, lo),
        };
        let value = if cap == 0.0 { 0.0 } else { f.eval(rho_t) };
        let case = if cap == 0.0 || rho_t == zero_edge {
            KktCase::ZeroActive
        } else if rho_t == cap_edge {
            KktCase::CapacityActive
        } else {
            KktCase::Interior
        };
        let v = match (case, dir) {
            _ if cap == 0.0 => 0.0,
            (KktCase::Interior, _) => {
                (e.left_limit(rho_t) - m).max(0.0).max(m - e.right_limit(rho_t))
            }
            (KktCase::CapacityActive, Direction::In) => (m - e.right_limit(rho_t)).max(0.0),
            (KktCase::CapacityActive, Direction::Out) => (e.left_limit(rho_t) - m).max(0.0),
            (KktCase::ZeroActive, Direction::In) => (e.left_limit(rho_t) - m).max(0.0),
            (KktCase::ZeroActive, Direction::Out) => (m - e.right_limit(rho_t)).max(0.0),
        };
        violation = violation.max(v);
        if hi > lo
            && e
                .segments()
                .iter()
                .any(|s| s[2] == s[3] && s[0].max(lo) < s[1].min(hi))
        {
            unique = false;
        }
        // free-flow data that passes through unchanged keeps its own trace
        let r0 = rho0[h];
        let passes = case == KktCase::CapacityActive && !in_gamma_out(f, dir, r0);
        trace.push(if passes { r0 } else { rho_t });
        hat_rho.push(hat);
        tilde.push(rho_t);
        flux.push(value);
        cases.push(case);
    }
    let objective = program.objective(junction, &flux);
    MaxDissipation {
        solution: JunctionSolution {
            level: m,
            z: level.z,
            hat_rho,
            trace_rho: trace,
            trace_flux: flux,
            ghost_trace: tilde,
        },
        program,
        cases,
        kkt_violation: violation,
        unique,
        objective,
    }
}

/// Exhaustive search over the flux grid with `grid_n` points per axis on
/// `[0, cap_h]`, one road being eliminated through the balance constraint
/// and taking a continuous value. Every road takes the eliminated role in
/// turn and the best balanced point overall is returned, so a road sitting
/// at its cap in the optimum is also represented exactly.
///
/// With dissipation compatible entropies every objective term is concave, so
/// along the last free axis the objective is unimodal and its largest argmax
/// moves monotonically with the partial sum of the other axes; that axis is
/// then swept with a single pointer instead of rescanned. Otherwise it is
/// scanned in full. Supports at most four roads.
pub fn brute_force_max_dissipation(junction: &Junction, rho0: &[f64], grid_n: usize) -> Result<Vec<f64>> {
    if junction.len() > 4 {
        return Err(Error::OracleScale(junction.len()));
    }
    if grid_n < 2 {
        return Err(Error::param("grid_n", "need at least two grid points"));
    }
    let program = FluxProgram::new(junction, rho0)?;
    let grids: Vec<Vec<f64>> = program
        .caps
        .iter()
        .map(|cap| (0..grid_n).map(|k| cap * k as f64 / (grid_n - 1) as f64).collect())
        .collect();
    let values: Vec<Vec<f64>> = grids
        .iter()
        .enumerate()
        .map(|(h, g)| g.iter().map(|&y| FluxProgram::term(junction, h, y)).collect())
        .collect();
    let concave = junction
        .roads()
        .all(|(_, r)| r.entropy.dissipation_compatible(&r.flux));
    let grid = Grid { junction, caps: &program.caps, grids: &grids, values: &values, concave };
    (0..junction.len())
        .filter_map(|e| grid.search(e))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, f)| f)
        .ok_or_else(|| Error::Numerical("no balanced grid point".into()))
}

struct Grid<'a> {
    junction: &'a Junction,
    caps: &'a [f64],
    grids: &'a [Vec<f64>],
    values: &'a [Vec<f64>],
    concave: bool,
}

impl Grid<'_> {
    /// Best balanced point with road `e` eliminated, with its objective.
    fn search(&self, e: usize) -> Option<(f64, Vec<f64>)> {
        let (junction, caps, grids, values) = (self.junction, self.caps, self.grids, self.values);
        let len = junction.len();
        let grid_n = grids[0].len();
        let sign = |h: usize| junction.direction(h).sign();
        let free: Vec<usize> = (0..len).filter(|&h| h != e).collect();
        let (&c, outer) = free.split_last()?;

        // every combination of the outer axes as (v, value), combination `i`
        // having index `(i / grid_n^r) % grid_n` on `outer[outer.len() - 1 - r]`;
        // `F_e = v - σ F_c` restores the balance
        let sigma = sign(e) * sign(c);
        let mut combos: Vec<(f64, f64)> = vec![(0.0, 0.0)];
        for &h in outer {
            let mut next = Vec::with_capacity(combos.len() * grid_n);
            for (u, val) in &combos {
                for k in 0..grid_n {
                    next.push((u - sign(e) * sign(h) * grids[h][k], val + values[h][k]));
                }
            }
            combos = next;
        }
        let cap_e = caps[e];
        let step_c = caps[c] / (grid_n - 1) as f64;
        let tol = 1e-12 * (1.0 + cap_e);
        // window of `F_c` indices keeping `F_e` in `[0, cap_e]`
        let window = |v: f64| -> Option<(usize, usize)> {
            let (lo, hi) = if sigma > 0.0 { (v - cap_e, v) } else { (-v, cap_e - v) };
            if hi < -tol || lo > hi + tol {
                return None;
            }
            if step_c == 0.0 {
                return (lo <= tol).then_some((0, 0));
            }
            let lo_k = ((lo - tol) / step_c).ceil().max(0.0) as usize;
            let hi_k = (((hi + tol) / step_c).floor() as usize).min(grid_n - 1);
            (lo_k <= hi_k).then_some((lo_k, hi_k))
        };
        // the eliminated term is piecewise quadratic in its flux
        let road = junction.road(e);
        let fmax = road.flux.max_flux();
        let term_e = holden_risebro_convert(&road.entropy, &road.flux, junction.direction(e));
        let g = |v: f64, k: usize| {
            let y = (v - sigma * grids[c][k]).clamp(0.0, cap_e);
            values[c][k] + term_e.eval(y / fmax)
        };

        // within a block of `grid_n` consecutive combinations `v` is monotone,
        // so each block is swept in the direction where the argmax ascends
        let block = if outer.is_empty() { 1 } else { grid_n };
        let last_sign = outer.last().map_or(1.0, |&h| -sign(e) * sign(h));
        let ascending = (last_sign > 0.0) == (sigma > 0.0);
        let order = (0..combos.len() / block).flat_map(|b| {
            (0..block).map(move |j| (j == 0, b * block + if ascending { j } else { block - 1 - j }))
        });
        let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
        let mut k = 0usize;
        for (fresh, i) in order {
            if fresh {
                k = 0;
            }
            let (v, val) = &combos[i];
            let Some((lo, hi)) = window(*v) else { continue };
            let (arg, top) = if self.concave {
                k = k.max(lo).min(hi);
                let mut top = g(*v, k);
                while k < hi {
                    let next = g(*v, k + 1);
                    if next < top {
                        break;
                    }
                    top = next;
                    k += 1;
                }
                (k, top)
            } else {
                (lo..=hi)
                    .map(|k| (k, g(*v, k)))
                    .fold((lo, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a })
            };
            if val + top > best.0 {
                best = (val + top, i, arg);
            }
        }
        if best.0 == f64::NEG_INFINITY {
            return None;
        }
        let (total, i, kc) = best;
        let mut out = vec![0.0; len];
        let mut rest = i;
        for &h in outer.iter().rev() {
            out[h] = grids[h][rest % grid_n];
            rest /= grid_n;
        }
        out[c] = grids[c][kc];
        out[e] = (combos[i].0 - sigma * out[c]).clamp(0.0, cap_e);
        Some((total, out))
    }
}

/// Piecewise quadratic on `[knots[0], knots[last]]`, with
/// `c[k][0] + c[k][1] t + c[k][2] t²` on piece `k` and `t = y - knots[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseQuadratic {
    pub knots: Vec<f64>,
    pub coeffs: Vec<[f64; 3]>,
}

impl PiecewiseQuadratic {
    fn piece(&self, y: f64) -> usize {
        self.knots
            .partition_point(|k| *k <= y)
            .saturating_sub(1)
            .min(self.coeffs.len() - 1)
    }

    pub fn eval(&self, y: f64) -> f64 {
        let k = self.piece(y);
        let t = y - self.knots[k];
        let c = self.coeffs[k];
        c[0] + t * (c[1] + t * c[2])
    }

    /// Derivative on piece `k` at `y`.
    fn piece_derivative(&self, k: usize, y: f64) -> f64 {
        let c = self.coeffs[k];
        c[1] + 2.0 * c[2] * (y - self.knots[k])
    }

    pub fn derivative(&self, y: f64) -> f64 {
        self.piece_derivative(self.piece(y), y)
    }

    /// Builds the quadratic pieces from the value `g` at each left knot and
    /// the derivative `dg`, which must be affine inside every piece. The
    /// derivative is sampled at interior points only, so one-sided limits at
    /// the knots never enter.
    pub fn from_derivative(knots: Vec<f64>, g: impl Fn(f64) -> f64, dg: impl Fn(f64) -> f64) -> Self {
        let coeffs = knots
            .windows(2)
            .map(|w| {
                let h = w[1] - w[0];
                let d1 = dg(w[0] + 0.25 * h);
                let d3 = dg(w[0] + 0.75 * h);
                let c2 = (d3 - d1) / h;
                [g(w[0]), d1 - 0.5 * c2 * h, c2]
            })
            .collect();
        Self { knots, coeffs }
    }

    /// Index of the first piece that breaks concavity, if any.
    pub fn concavity_defect(&self, tol: f64) -> Option<usize> {
        for (k, c) in self.coeffs.iter().enumerate() {
            // change of slope across the piece
            if c[2] * (self.knots[k + 1] - self.knots[k]) > tol {
                return Some(k);
            }
            if k + 1 < self.coeffs.len() {
                let y = self.knots[k + 1];
                if self.piece_derivative(k + 1, y) > self.piece_derivative(k, y) + tol {
                    return Some(k + 1);
                }
            }
        }
        None
    }
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-13);
    v
}

fn gamma_out_range(f: &FluxFunction, direction: Direction) -> (f64, f64) {
    let (a, b) = f.domain();
    match direction {
        Direction::In => (f.peak(), b),
        Direction::Out => (a, f.peak()),
    }
}

/// Normalized objective `ĝ(y) = ±Ĝ(f^{-1}|_{Γ_out}(y f^max))` on `[0, 1]`.
///
/// ```
/// use lwr_junction::{holden_risebro_convert, Direction, EntropyPair, FluxFunction};
/// let f = FluxFunction::triangular(0.0, 0.5, 1.0, 1.0).unwrap();
/// let g = holden_risebro_convert(&EntropyPair::neg_flux(&f), &f, Direction::In);
/// assert!((g.eval(0.25) - (2.0 * 0.25 - 4.0)).abs() < 1e-14);
/// ```
pub fn holden_risebro_convert(pair: &EntropyPair, f: &FluxFunction, direction: Direction) -> PiecewiseQuadratic {
    let (lo, hi) = gamma_out_range(f, direction);
    let fmax = f.max_flux();
    let knots = sorted_unique(
        pair.knots()
            .iter()
            .chain(f.nodes())
            .copied()
            .filter(|x| *x >= lo && *x <= hi)
            .chain([lo, hi])
            .map(|x| (f.eval(x) / fmax).clamp(0.0, 1.0))
            .chain([0.0, 1.0])
            .collect(),
    );
    let sign = direction.sign();
    PiecewiseQuadratic::from_derivative(
        knots,
        |y| sign * entropy_flux(pair, f, inverse_out(f, direction, y * fmax)),
        |y| sign * fmax * pair.right_limit(inverse_out(f, direction, y * fmax)),
    )
}

/// Inverse of [`holden_risebro_convert`]: builds `η̂'` with
/// `η̂'(ρ) = ±ĝ'(f(ρ)/f^max) / f^max` on `Γ_out`, extended by a constant on
/// `Γ_in`, and matches the entropy-flux offset.
pub fn holden_risebro_inverse(g: &PiecewiseQuadratic, f: &FluxFunction, direction: Direction) -> Result<EntropyPair> {
    if let Some(piece) = g.concavity_defect(1e-12) {
        return Err(Error::NotConcaveObjective { piece });
    }
    let (lo, hi) = gamma_out_range(f, direction);
    let (a, b) = f.domain();
    let fmax = f.max_flux();
    let sign = direction.sign();
    let mut cuts: Vec<f64> = f.nodes().iter().copied().filter(|x| *x > lo && *x < hi).collect();
    for y in &g.knots {
        if *y > 0.0 && *y < 1.0 {
            cuts.push(inverse_out(f, direction, y * fmax));
        }
    }
    cuts.extend([lo, hi]);
    let cuts = sorted_unique(cuts);
    let mut knots = Vec::new();
    let mut left = Vec::new();
    let mut right = Vec::new();
    let slope_at = |rho: f64, other: f64| {
        // ĝ' on the piece that covers the open ρ-interval towards `other`
        let y = f.eval(rho) / fmax;
        let y_in = f.eval(0.5 * (rho + other)) / fmax;
        let k = g.piece(y_in);
        sign * g.piece_derivative(k, y) / fmax
    };
    for w in cuts.windows(2) {
        knots.push(w[0]);
        left.push(slope_at(w[0], w[1]));
        right.push(slope_at(w[1], w[0]));
    }
    knots.push(*cuts.last().expect("nonempty"));
    // constant extension over Γ_in
    match direction {
        Direction::In => {
            if a < lo {
                let v = left[0];
                knots.insert(0, a);
                left.insert(0, v);
                right.insert(0, v);
            }
        }
        Direction::Out => {
            if hi < b {
                let v = *right.last().expect("nonempty");
                knots.push(b);
                left.push(v);
                right.push(v);
            }
        }
    }
    // one-sided slopes read off neighbouring pieces may disagree by rounding
    let scale = 1e-12 * left.iter().chain(&right).fold(1.0, |m: f64, v| m.max(v.abs()));
    for k in 0..left.len() {
        if k > 0 && left[k] < right[k - 1] && right[k - 1] - left[k] <= scale {
            left[k] = right[k - 1];
        }
        if right[k] < left[k] && left[k] - right[k] <= scale {
            right[k] = left[k];
        }
    }
    let pair = EntropyPair::new(knots, left, right)?;
    let offset = sign * g.eval(1.0) - entropy_flux(&pair, f, f.peak());
    Ok(pair.with_offset(offset))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::junction::{solve_riemann, Road};
    use crate::table1::{self, INITIAL};

    #[test]
    fn recentered_table1_matches_riemann() {
        let j = table1::recentered_junction();
        let r = solve_max_dissipation(&j, &INITIAL).unwrap();
        let s = solve_riemann(&j, &INITIAL).unwrap();
        let expected = [0.5, 0.5, 0.25, 0.75];
        for h in 0..4 {
            assert!((r.solution.trace_flux[h] - expected[h]).abs() < 1e-12);
            assert!((s.trace_flux[h] - expected[h]).abs() < 1e-12);
        }
        assert!((r.solution.level + 3.0 / 16.0).abs() < 1e-12);
        assert!((r.solution.ghost_trace[2] - 1.0 / 16.0).abs() < 1e-12);
        assert!((r.solution.ghost_trace[3] - 9.0 / 16.0).abs() < 1e-12);
        assert!(r.kkt_violation < 1e-12);
        assert!(r.unique);
        assert_eq!(
            r.cases,
            vec![KktCase::CapacityActive, KktCase::CapacityActive, KktCase::Interior, KktCase::Interior]
        );
    }

    #[test]
    fn empty_roads_give_zero_flux() {
        let j = table1::recentered_junction();
        let r = solve_max_dissipation(&j, &[0.0; 4]).unwrap();
        assert!(r.solution.trace_flux.iter().all(|f| *f == 0.0));
        assert!(r.cases.iter().all(|c| *c == KktCase::ZeroActive));
        assert_eq!(brute_force_max_dissipation(&j, &[0.0; 4], 50).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn rejects_incompatible_entropy() {
        let j = table1::junction(table1::Variant::Common);
        assert!(matches!(
            solve_max_dissipation(&j, &INITIAL),
            Err(Error::NotDissipationCompatible(_))
        ));
    }

    #[test]
    fn brute_force_one_in_one_out() {
        let [f1, _, f3, _] = table1::fluxes();
        let e1 = EntropyPair::quadratic(0.0, 1.0, f1.peak()).unwrap();
        let e3 = EntropyPair::quadratic(0.0, 1.0, f3.peak()).unwrap();
        let j = Junction::new(vec![Road::new("1", f1, e1)], vec![Road::new("3", f3, e3)]).unwrap();
        let bf = brute_force_max_dissipation(&j, &[0.25, 0.0], 1600).unwrap();
        assert!((bf[0] - 0.5).abs() < 1e-3 && (bf[1] - 0.5).abs() < 1e-3);
        // the grid runs through the cap, so the capacity-limited optimum is hit
        assert_eq!(bf, vec![0.5, 0.5]);
        let kkt = solve_max_dissipation(&j, &[0.25, 0.0]).unwrap();
        assert!((kkt.solution.trace_flux[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn brute_force_table1_recentered() {
        let j = table1::recentered_junction();
        let bf = brute_force_max_dissipation(&j, &INITIAL, 800).unwrap();
        let expected = [0.5, 0.5, 0.25, 0.75];
        for h in 0..4 {
            assert!((bf[h] - expected[h]).abs() < 2e-3, "{bf:?}");
        }
        // the oracle's objective is never better than the KKT optimum
        let kkt = solve_max_dissipation(&j, &INITIAL).unwrap();
        let p = FluxProgram::new(&j, &INITIAL).unwrap();
        assert!(p.objective(&j, &bf) <= kkt.objective + 1e-12);
    }

    #[test]
    fn oracle_scale_cap() {
        let [f1, _, f3, _] = table1::fluxes();
        let e = EntropyPair::quadratic(0.0, 1.0, 0.5).unwrap();
        let inc: Vec<Road> = (0..3).map(|k| Road::new(format!("i{k}"), f1.clone(), e.clone())).collect();
        let out: Vec<Road> = (0..2).map(|k| Road::new(format!("o{k}"), f3.clone(), e.clone())).collect();
        let j = Junction::new(inc, out).unwrap();
        assert_eq!(brute_force_max_dissipation(&j, &[0.0; 5], 10).unwrap_err(), Error::OracleScale(5));
    }

    #[test]
    fn conversion_examples() {
        let f1 = FluxFunction::triangular(0.0, 0.5, 1.0, 1.0).unwrap();
        let g = holden_risebro_convert(&EntropyPair::neg_flux(&f1), &f1, Direction::In);
        for k in 0..=10 {
            let y = k as f64 / 10.0;
            assert!((g.eval(y) - (2.0 * y - 4.0)).abs() < 1e-14);
        }
        let zero = EntropyPair::new(vec![0.0, 1.0], vec![0.0], vec![0.0]).unwrap();
        let g = holden_risebro_convert(&zero, &f1, Direction::In);
        assert!((0..=10).all(|k| g.eval(k as f64 / 10.0) == 0.0));
        // η̂' = ρ - 1/2: Ĝ(1/2) = ∫_0^{1/2} 2(y - 1/2) dy = -1/4
        let c = EntropyPair::quadratic(0.0, 1.0, 0.5).unwrap();
        let g = holden_risebro_convert(&c, &f1, Direction::In);
        assert!((g.eval(1.0) + 0.25).abs() < 1e-15);
        let oracle = |rho: f64| {
            let n = 20_000;
            let h = rho / n as f64;
            (0..n).map(|i| {
                let x = (i as f64 + 0.5) * h;
                (x - 0.5) * f1.slope_right(x) * h
            }).sum::<f64>()
        };
        for k in 0..=8 {
            let y = k as f64 / 8.0;
            assert!((g.eval(y) - oracle(1.0 - y / 2.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn conversion_is_concave_and_round_trips() {
        let f = FluxFunction::new(vec![(0.0, 0.0), (0.2, 0.6), (0.5, 0.9), (0.7, 0.6), (1.0, 0.0)]).unwrap();
        let e = EntropyPair::from_segments(&[
            [0.0, 0.3, -2.0, -1.0],
            [0.3, 0.5, -0.5, 0.0],
            [0.5, 0.8, 0.25, 1.0],
            [0.8, 1.0, 1.0, 3.0],
        ])
        .unwrap();
        for dir in [Direction::In, Direction::Out] {
            let g = holden_risebro_convert(&e, &f, dir);
            assert_eq!(g.concavity_defect(1e-12), None);
            let ys: Vec<f64> = (0..=400).map(|k| k as f64 / 400.0).collect();
            for w in ys.windows(3) {
                assert!(g.eval(w[0]) - 2.0 * g.eval(w[1]) + g.eval(w[2]) <= 1e-12);
            }
            let back = holden_risebro_inverse(&g, &f, dir).unwrap();
            let (lo, hi) = gamma_out_range(&f, dir);
            for k in 1..200 {
                let rho = lo + (hi - lo) * k as f64 / 200.0;
                assert!((back.right_limit(rho) - e.right_limit(rho)).abs() < 1e-9, "{dir:?} {rho}");
                assert!((entropy_flux(&back, &f, rho) - entropy_flux(&e, &f, rho)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn inverse_rejects_convex_objective() {
        let f = FluxFunction::triangular(0.0, 0.5, 1.0, 1.0).unwrap();
        let g = PiecewiseQuadratic { knots: vec![0.0, 1.0], coeffs: vec![[0.0, 0.0, 1.0]] };
        assert_eq!(
            holden_risebro_inverse(&g, &f, Direction::In).unwrap_err(),
            Error::NotConcaveObjective { piece: 0 }
        );
    }
}
