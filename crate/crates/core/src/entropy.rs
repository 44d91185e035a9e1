//! Convex entropies stored through their monotone derivative, entropy fluxes,
//! Kružkov pairs and the moments of the kinetic equilibrium `χ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::FluxFunction;

/// A convex entropy `η̂` given by its derivative `η̂'`, which is piecewise
/// linear and nondecreasing with upward jumps allowed at the knots.
///
/// Outside the domain the convention `η̂'(a-) = -∞`, `η̂'(b+) = +∞` applies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EntropyRepr", into = "EntropyRepr")]
pub struct EntropyPair {
    knots: Vec<f64>,
    // η̂'(knots[k]+) and η̂'(knots[k + 1]-) for every piece k
    left: Vec<f64>,
    right: Vec<f64>,
    flux_offset: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct EntropyRepr {
    /// `[x0, x1, η̂'(x0+), η̂'(x1-)]` per piece
    segments: Vec<[f64; 4]>,
    #[serde(default)]
    flux_offset: f64,
}

impl TryFrom<EntropyRepr> for EntropyPair {
    type Error = Error;

    fn try_from(repr: EntropyRepr) -> Result<Self> {
        Ok(Self::from_segments(&repr.segments)?.with_offset(repr.flux_offset))
    }
}

impl From<EntropyPair> for EntropyRepr {
    fn from(e: EntropyPair) -> Self {
        EntropyRepr {
            segments: e.segments(),
            flux_offset: e.flux_offset,
        }
    }
}

impl EntropyPair {
    /// Builds `η̂'` from its knots and the one-sided values on every piece.
    pub fn new(knots: Vec<f64>, left: Vec<f64>, right: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 || left.len() != knots.len() - 1 || right.len() != left.len() {
            return Err(Error::param(
                "entropy",
                "need one (left, right) pair per knot interval",
            ));
        }
        for w in knots.windows(2) {
            if !(w[1] > w[0]) || !w[0].is_finite() || !w[1].is_finite() {
                return Err(Error::param("entropy", "knots must be strictly increasing"));
            }
        }
        for k in 0..left.len() {
            if !left[k].is_finite() || !right[k].is_finite() || left[k] > right[k] {
                return Err(Error::NonMonotoneEntropy { at: knots[k] });
            }
            if k + 1 < left.len() && right[k] > left[k + 1] {
                return Err(Error::NonMonotoneEntropy { at: knots[k + 1] });
            }
        }
        Ok(Self {
            knots,
            left,
            right,
            flux_offset: 0.0,
        })
    }

    /// Pieces given as `[x0, x1, η̂'(x0+), η̂'(x1-)]`; they must tile the domain.
    pub fn from_segments(segments: &[[f64; 4]]) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::param("entropy", "no segments"));
        }
        let mut knots = vec![segments[0][0]];
        for (k, s) in segments.iter().enumerate() {
            if s[0] != knots[k] {
                return Err(Error::param("entropy", "segments must be contiguous"));
            }
            knots.push(s[1]);
        }
        Self::new(
            knots,
            segments.iter().map(|s| s[2]).collect(),
            segments.iter().map(|s| s[3]).collect(),
        )
    }

    /// Continuous `η̂'` interpolating `(ρ, η̂'(ρ))` points.
    pub fn from_derivative_points(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::param("entropy", "need at least two points"));
        }
        let knots = points.iter().map(|p| p.0).collect();
        let left = points[..points.len() - 1].iter().map(|p| p.1).collect();
        let right = points[1..].iter().map(|p| p.1).collect();
        Self::new(knots, left, right)
    }

    /// `η̂(ρ) = (ρ - center)² / 2` on `[a, b]`.
    pub fn quadratic(a: f64, b: f64, center: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![a - center], vec![b - center])
    }

    /// `η̂ = -f`, i.e. `η̂' = -f'`.
    pub fn neg_flux(f: &FluxFunction) -> Self {
        let knots = f.nodes().to_vec();
        let d: Vec<f64> = f.slopes().iter().map(|s| -s).collect();
        Self::new(knots, d.clone(), d).expect("concave flux gives a monotone -f'")
    }

    pub fn with_offset(mut self, flux_offset: f64) -> Self {
        self.flux_offset = flux_offset;
        self
    }

    pub fn flux_offset(&self) -> f64 {
        self.flux_offset
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn segments(&self) -> Vec<[f64; 4]> {
        (0..self.left.len())
            .map(|k| [self.knots[k], self.knots[k + 1], self.left[k], self.right[k]])
            .collect()
    }

    /// Subtracts a constant from `η̂'` so that its sign change sits at `sigma`.
    ///
    /// This adds a linear function to `η̂`, which keeps convexity and makes
    /// the pair dissipation compatible for any flux peaking at `sigma`.
    pub fn recenter(&self, sigma: f64) -> Self {
        let shift = 0.5 * (self.inner_left_limit(sigma) + self.inner_right_limit(sigma));
        let mut out = self.clone();
        out.left.iter_mut().for_each(|v| *v -= shift);
        out.right.iter_mut().for_each(|v| *v -= shift);
        out
    }

    fn piece_value(&self, k: usize, rho: f64) -> f64 {
        let (x0, x1) = (self.knots[k], self.knots[k + 1]);
        let t = (rho - x0) / (x1 - x0);
        self.left[k] + t * (self.right[k] - self.left[k])
    }

    /// `η̂'(ρ-)` inside the domain; at `a` this is `η̂'(a+)`.
    fn inner_left_limit(&self, rho: f64) -> f64 {
        let k = self.knots.partition_point(|x| *x < rho).saturating_sub(1);
        let k = k.min(self.left.len() - 1);
        self.piece_value(k, rho.clamp(self.knots[k], self.knots[k + 1]))
    }

    /// `η̂'(ρ+)` inside the domain; at `b` this is `η̂'(b-)`.
    fn inner_right_limit(&self, rho: f64) -> f64 {
        let k = self.knots.partition_point(|x| *x <= rho).saturating_sub(1);
        let k = k.min(self.left.len() - 1);
        self.piece_value(k, rho.clamp(self.knots[k], self.knots[k + 1]))
    }

    /// `η̂'(ρ-)`, equal to `-∞` at or below the lower end.
    pub fn left_limit(&self, rho: f64) -> f64 {
        let (a, _) = self.domain();
        if rho <= a {
            f64::NEG_INFINITY
        } else {
            self.inner_left_limit(rho)
        }
    }

    /// `η̂'(ρ+)`, equal to `+∞` at or above the upper end.
    pub fn right_limit(&self, rho: f64) -> f64 {
        let (_, b) = self.domain();
        if rho >= b {
            f64::INFINITY
        } else {
            self.inner_right_limit(rho)
        }
    }

    /// `η̂'(a+)`.
    pub fn lowest_slope(&self) -> f64 {
        self.left[0]
    }

    /// `η̂'(b-)`.
    pub fn highest_slope(&self) -> f64 {
        self.right[self.right.len() - 1]
    }

    /// The level set `S(M) = {ρ : η̂'(ρ-) ≤ M ≤ η̂'(ρ+)}` as `(min, max)`.
    pub fn level_set(&self, level: f64) -> (f64, f64) {
        let (a, b) = self.domain();
        let n = self.left.len();
        let lo = match (0..n).find(|&k| self.right[k] >= level) {
            None => b,
            Some(k) if self.left[k] >= level => self.knots[k],
            Some(k) => self.solve_piece(k, level),
        };
        let hi = match (0..n).rev().find(|&k| self.left[k] <= level) {
            None => a,
            Some(k) if self.right[k] <= level => self.knots[k + 1],
            Some(k) => self.solve_piece(k, level),
        };
        (lo, hi.max(lo))
    }

    // point of piece k where the strictly increasing linear part reaches `level`
    fn solve_piece(&self, k: usize, level: f64) -> f64 {
        let (x0, x1) = (self.knots[k], self.knots[k + 1]);
        let t = (level - self.left[k]) / (self.right[k] - self.left[k]);
        (x0 + t * (x1 - x0)).clamp(x0, x1)
    }

    /// Levels `M` at which `S(M)` is a nondegenerate interval.
    pub fn flat_levels(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.left.len())
            .filter(|&k| self.left[k] == self.right[k])
            .map(|k| self.left[k])
    }

    /// No flat piece, so `η̂'` is strictly increasing.
    pub fn is_strictly_convex(&self) -> bool {
        self.flat_levels().next().is_none()
    }

    /// `η̂' f' ≤ 0` almost everywhere, i.e. the minimum of `η̂` sits at the
    /// maximizer of `f`.
    pub fn dissipation_compatible(&self, f: &FluxFunction) -> bool {
        let s = f.peak();
        self.inner_left_limit(s) <= 0.0 && self.inner_right_limit(s) >= 0.0
    }

    /// `∫_lo^hi η̂'`, extending `η̂'` by constants outside the domain.
    pub fn integrate(&self, lo: f64, hi: f64) -> f64 {
        if lo > hi {
            return -self.integrate(hi, lo);
        }
        let (a, b) = self.domain();
        let mut total = 0.0;
        if lo < a {
            total += self.lowest_slope() * (hi.min(a) - lo);
        }
        if hi > b {
            total += self.highest_slope() * (hi - lo.max(b));
        }
        let (l, r) = (lo.max(a), hi.min(b));
        if l < r {
            for k in 0..self.left.len() {
                let (x0, x1) = (self.knots[k].max(l), self.knots[k + 1].min(r));
                if x0 < x1 {
                    total += 0.5 * (self.piece_value(k, x0) + self.piece_value(k, x1)) * (x1 - x0);
                }
            }
        }
        total
    }

    /// `η̂(ρ) - η̂(0)`.
    pub fn eta(&self, rho: f64) -> f64 {
        self.integrate(0.0, rho)
    }

    /// `∫_lo^hi η̂' f'` over `[lo, hi] ∩ K` (the flux is zero outside `K`).
    fn integrate_with_flux(&self, f: &FluxFunction, lo: f64, hi: f64) -> f64 {
        if lo > hi {
            return -self.integrate_with_flux(f, hi, lo);
        }
        let (a, b) = f.domain();
        let (l, r) = (lo.max(a), hi.min(b));
        if l >= r {
            return 0.0;
        }
        let mut cuts: Vec<f64> = self
            .knots
            .iter()
            .chain(f.nodes())
            .copied()
            .filter(|x| *x > l && *x < r)
            .collect();
        cuts.push(l);
        cuts.push(r);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts.windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                let slope = f.slope_right(mid);
                slope * self.integrate(w[0], w[1])
            })
            .sum()
    }
}

/// `Ĝ(ρ) = ∫_0^ρ η̂' f' + Ĝ(0)`, integrated exactly piece by piece.
///
/// ```
/// use lwr_junction::{EntropyPair, FluxFunction, entropy_flux_eval};
/// let f = FluxFunction::triangular(0.0, 0.5, 1.0, 1.0).unwrap();
/// let eta = EntropyPair::quadratic(0.0, 1.0, 0.0).unwrap();
/// assert!((entropy_flux_eval(&eta, &f, 0.25).unwrap() - 1.0 / 16.0).abs() < 1e-15);
/// ```
pub fn entropy_flux_eval(pair: &EntropyPair, f: &FluxFunction, rho: f64) -> Result<f64> {
    f.check(rho)?;
    Ok(entropy_flux(pair, f, rho))
}

/// Unchecked form of [`entropy_flux_eval`].
pub fn entropy_flux(pair: &EntropyPair, f: &FluxFunction, rho: f64) -> f64 {
    pair.integrate_with_flux(f, 0.0, rho) + pair.flux_offset
}

/// Kružkov entropy flux `sgn(ρ - k) (f(ρ) - f(k))` with `sgn(0) = 0`.
pub fn kruzkov_flux(f: &FluxFunction, rho: f64, k: f64) -> f64 {
    if rho > k {
        f.eval(rho) - f.eval(k)
    } else if rho < k {
        f.eval(k) - f.eval(rho)
    } else {
        0.0
    }
}

/// Weight for a moment of the equilibrium function `χ(ρ, ·)`.
#[derive(Debug, Clone, Copy)]
pub enum Weight<'a> {
    Unit,
    FluxDerivative(&'a FluxFunction),
    EntropyDerivative(&'a EntropyPair),
}

/// `∫ w(ξ) χ(ρ, ξ) dξ` in closed form, where `χ(ρ, ·)` is `+1` on `(0, ρ)`
/// for `ρ > 0` and `-1` on `(ρ, 0)` for `ρ < 0`.
///
/// ```
/// use lwr_junction::{chi_moment, FluxFunction, Weight};
/// assert_eq!(chi_moment(0.25, Weight::Unit), 0.25);
/// let f3 = FluxFunction::triangular(0.0, 0.25, 1.0, 1.0).unwrap();
/// assert_eq!(chi_moment(3.0 / 16.0, Weight::FluxDerivative(&f3)), 0.75);
/// ```
pub fn chi_moment(rho: f64, weight: Weight<'_>) -> f64 {
    match weight {
        Weight::Unit => rho,
        Weight::FluxDerivative(f) => f.eval(rho) - f.eval(0.0),
        Weight::EntropyDerivative(e) => e.eta(rho),
    }
}
