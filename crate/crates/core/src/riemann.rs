//! The scalar Riemann problem on a single road.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::flux::FluxFunction;

/// Which one-sided limit to take when the ray sits on a discontinuity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    FromLeft,
    FromRight,
}

/// Godunov flux with domain checks.
///
/// ```
/// use lwr_junction::{FluxFunction, godunov_flux};
/// let f = FluxFunction::triangular(0.0, 0.5, 1.0, 1.0).unwrap();
/// assert_eq!(godunov_flux(&f, 0.25, 3.0 / 16.0).unwrap(), 0.5);
/// assert_eq!(godunov_flux(&f, 0.25, 0.75).unwrap(), 0.5);
/// ```
pub fn godunov_flux(f: &FluxFunction, left: f64, right: f64) -> Result<f64> {
    f.check(left)?;
    f.check(right)?;
    Ok(f.godunov(left, right))
}

/// Value of the entropy solution of the Riemann problem `(left, right)` on
/// the ray `x / t = speed`.
///
/// Concave fluxes give a single shock when `left < right` and a fan when
/// `left > right`. The fan of a piecewise-linear flux consists of contact
/// waves, so the solution is piecewise constant in the ray; `side` picks the
/// one-sided limit on a wave.
pub fn self_similar_eval(f: &FluxFunction, left: f64, right: f64, speed: f64, side: Side) -> f64 {
    if left == right {
        return left;
    }
    if left < right {
        let shock = (f.eval(right) - f.eval(left)) / (right - left);
        return if speed < shock {
            left
        } else if speed > shock {
            right
        } else {
            match side {
                Side::FromLeft => left,
                Side::FromRight => right,
            }
        };
    }
    let nodes = f.nodes();
    let slopes = f.slopes();
    match side {
        // largest state whose left speed still reaches the ray
        Side::FromLeft => {
            let p = slopes.partition_point(|s| *s >= speed);
            nodes[p].clamp(right, left)
        }
        // smallest state whose right speed does not pass the ray
        Side::FromRight => {
            let q = slopes.partition_point(|s| *s > speed);
            nodes[q].clamp(right, left)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f1() -> FluxFunction {
        FluxFunction::triangular(0.0, 0.5, 1.0, 1.0).unwrap()
    }

    fn dense_min_max(f: &FluxFunction, l: f64, r: f64) -> f64 {
        let (lo, hi) = if l <= r { (l, r) } else { (r, l) };
        // a dense grid plus the kinks, where a piecewise linear f has its extremes
        let kinks: Vec<f64> = f.breakpoints().map(|p| p.0).filter(|x| lo <= *x && *x <= hi).collect();
        let samples = (0..=10_000)
            .map(|k| lo + (hi - lo) * k as f64 / 10_000.0)
            .chain(kinks)
            .map(|x| f.eval(x));
        if l <= r {
            samples.fold(f64::INFINITY, f64::min)
        } else {
            samples.fold(f64::NEG_INFINITY, f64::max)
        }
    }

    #[test]
    fn godunov_matches_dense_grid() {
        let f = f1();
        assert_eq!(godunov_flux(&f, 0.25, 0.75).unwrap(), dense_min_max(&f, 0.25, 0.75));
        assert_eq!(godunov_flux(&f, 0.25, 3.0 / 16.0).unwrap(), 0.5);
        let g = FluxFunction::new(vec![(0.0, 0.0), (0.2, 0.6), (0.5, 0.9), (0.7, 0.6), (1.0, 0.0)])
            .unwrap();
        for &(l, r) in &[(0.1, 0.9), (0.9, 0.1), (0.3, 0.6), (0.6, 0.3), (0.4, 0.4), (0.0, 1.0)] {
            assert!((g.godunov(l, r) - dense_min_max(&g, l, r)).abs() < 1e-12);
        }
        assert!(godunov_flux(&f, -0.1, 0.5).is_err());
    }

    #[test]
    fn shock_traces() {
        let f = f1();
        assert_eq!(self_similar_eval(&f, 0.25, 3.0 / 16.0, 0.0, Side::FromLeft), 0.25);
        assert_eq!(self_similar_eval(&f, 0.25, 0.75, 0.0, Side::FromLeft), 0.25);
        assert_eq!(self_similar_eval(&f, 0.25, 0.75, 0.0, Side::FromRight), 0.75);
        assert_eq!(self_similar_eval(&f, 0.1, 0.95, 0.0, Side::FromRight), 0.95);
        assert_eq!(self_similar_eval(&f, 0.4, 0.4, 3.0, Side::FromRight), 0.4);
    }

    #[test]
    fn fan_contacts() {
        let f = f1();
        assert_eq!(self_similar_eval(&f, 0.9, 0.1, 2.0, Side::FromLeft), 0.5);
        assert_eq!(self_similar_eval(&f, 0.9, 0.1, 2.0, Side::FromRight), 0.1);
        assert_eq!(self_similar_eval(&f, 0.9, 0.1, -2.0, Side::FromLeft), 0.9);
        assert_eq!(self_similar_eval(&f, 0.9, 0.1, -2.0, Side::FromRight), 0.5);
        assert_eq!(self_similar_eval(&f, 0.9, 0.1, -3.0, Side::FromRight), 0.9);
        assert_eq!(self_similar_eval(&f, 0.9, 0.1, 2.5, Side::FromLeft), 0.1);
    }

    #[test]
    fn sonic_fan_matches_fine_grid_evolution() {
        let f = f1();
        for side in [Side::FromLeft, Side::FromRight] {
            assert_eq!(self_similar_eval(&f, 0.75, 0.25, 0.0, side), 0.5);
        }
        // Godunov evolution of the datum (3/4, 1/4) to t = 0.1
        let n: usize = 4000;
        let dx = 2.0 / n as f64;
        let mut u: Vec<f64> = (0..n).map(|i| if i < n / 2 { 0.75 } else { 0.25 }).collect();
        let dt = 0.4 * dx / f.lipschitz();
        let mut t = 0.0;
        while t < 0.1 {
            let step = dt.min(0.1 - t);
            let flux: Vec<f64> = (0..=n)
                .map(|k| f.godunov(u[k.saturating_sub(1)], u[k.min(n - 1)]))
                .collect();
            for i in 0..n {
                u[i] -= step / dx * (flux[i + 1] - flux[i]);
            }
            t += step;
        }
        assert!((u[n / 2 - 1] - 0.5).abs() < 1e-9);
        assert!((u[n / 2] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn godunov_agrees_with_trace_flux() {
        let g = FluxFunction::new(vec![(0.0, 0.0), (0.2, 0.6), (0.5, 0.9), (0.7, 0.6), (1.0, 0.0)])
            .unwrap();
        for i in 0..=20 {
            for j in 0..=20 {
                let (l, r) = (i as f64 / 20.0, j as f64 / 20.0);
                for side in [Side::FromLeft, Side::FromRight] {
                    let trace = self_similar_eval(&g, l, r, 0.0, side);
                    assert!((g.eval(trace) - g.godunov(l, r)).abs() < 1e-14, "{l} {r}");
                }
            }
        }
    }
}
