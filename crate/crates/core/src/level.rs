//! Root finding for monotone balance functions `B(M, z)`.
//!
//! All three junction solvers reduce to the same scalar problem: find an
//! entropy-slope level `M` and a tie-break `z ∈ [0, 1]` such that a flux
//! imbalance, nonincreasing in both arguments, vanishes. The imbalance is
//! continuous in `M` except at levels where some `η̂'` is flat; there the gap
//! is closed by moving `z`.

use crate::error::{Error, Result};

const MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Level {
    pub m: f64,
    pub z: f64,
    pub residual: f64,
}

pub(crate) struct LevelProblem<'a, B: Fn(f64, f64) -> f64> {
    pub balance: B,
    pub bracket: (f64, f64),
    /// Levels at which the balance may jump.
    pub critical: &'a [f64],
    /// Typical flux size, used for the sign threshold and the tolerance.
    pub scale: f64,
}

/// Bisects on `M` until the bracket collapses to adjacent floats.
fn bisect(mut lo: f64, mut hi: f64, keep_lo: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if keep_lo(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

impl<B: Fn(f64, f64) -> f64> LevelProblem<'_, B> {
    pub fn solve(&self) -> Result<Level> {
        let scale = self.scale.max(f64::MIN_POSITIVE);
        let thr = 1e-14 * scale;
        let tol = 1e-10 * scale;
        let (m_lo, m_hi) = self.bracket;
        let b = &self.balance;
        let eval = |m: f64, z: f64| Level {
            m,
            z,
            residual: b(m, z),
        };

        // M_left = sup{B > thr}, M_right = inf{B < -thr}
        let m_left = if b(m_lo, 0.0) > thr {
            bisect(m_lo, m_hi, |m| b(m, 0.0) > thr)
        } else {
            m_lo
        };
        let m_right = if b(m_hi, 0.0) < -thr {
            bisect(m_lo, m_hi, |m| b(m, 0.0) >= -thr)
        } else {
            m_hi
        };
        let (m_left, m_right) = (m_left.min(m_right), m_left.max(m_right));

        let mid = eval(0.5 * (m_left + m_right), 0.0);
        let best = [eval(m_left, 0.0), eval(m_right, 0.0)]
            .into_iter()
            .fold(mid, |acc, c| if c.residual.abs() < acc.residual.abs() { c } else { acc });
        if best.residual.abs() <= thr || (best.residual.abs() <= tol && !self.jumps_near(m_left, m_right)) {
            return Ok(best);
        }

        // jump in M: close the gap by moving z at the critical level
        let slack = 1e-9 * (1.0 + m_left.abs().max(m_right.abs()));
        let critical = self
            .critical
            .iter()
            .copied()
            .filter(|c| *c >= m_left - slack && *c <= m_right + slack)
            .min_by(|x, y| (x - mid.m).abs().total_cmp(&(y - mid.m).abs()));
        if let Some(c) = critical {
            let z0 = eval(c, 0.0);
            let z1 = eval(c, 1.0);
            let cand = if z0.residual <= 0.0 {
                z0
            } else if z1.residual >= 0.0 {
                z1
            } else {
                let z = bisect(0.0, 1.0, |z| b(c, z) > 0.0);
                let zs = [z, (z - f64::EPSILON).max(0.0), (z + f64::EPSILON).min(1.0)];
                zs.into_iter()
                    .map(|z| eval(c, z))
                    .min_by(|x, y| x.residual.abs().total_cmp(&y.residual.abs()))
                    .expect("nonempty")
            };
            let cand = if cand.residual.abs() <= best.residual.abs() { cand } else { best };
            if cand.residual.abs() <= tol {
                return Ok(cand);
            }
        } else if best.residual.abs() <= tol {
            return Ok(best);
        }
        Err(Error::Numerical(format!(
            "balance did not vanish: residual {} near M = {}",
            best.residual, best.m
        )))
    }

    fn jumps_near(&self, m_left: f64, m_right: f64) -> bool {
        let slack = 1e-9 * (1.0 + m_left.abs().max(m_right.abs()));
        self.critical
            .iter()
            .any(|c| *c >= m_left - slack && *c <= m_right + slack)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continuous_crossing() {
        let p = LevelProblem {
            balance: |m: f64, _z: f64| 0.3 - m,
            bracket: (-5.0, 5.0),
            critical: &[],
            scale: 1.0,
        };
        let s = p.solve().unwrap();
        assert!((s.m - 0.3).abs() < 1e-15);
        assert_eq!(s.z, 0.0);
    }

    #[test]
    fn flat_zero_interval_returns_midpoint() {
        let p = LevelProblem {
            balance: |m: f64, _z: f64| {
                if m < -1.0 {
                    -1.0 - m
                } else if m > 2.0 {
                    2.0 - m
                } else {
                    0.0
                }
            },
            bracket: (-5.0, 5.0),
            critical: &[],
            scale: 1.0,
        };
        let s = p.solve().unwrap();
        assert!((s.m - 0.5).abs() < 1e-12);
    }

    #[test]
    fn jump_is_closed_by_z() {
        // jumps from +0.5 to -0.5 at M = 1, interpolated by z there
        let p = LevelProblem {
            balance: |m: f64, z: f64| {
                if m < 1.0 {
                    0.5 + 0.1 * (1.0 - m)
                } else if m > 1.0 {
                    -0.5 - 0.1 * (m - 1.0)
                } else {
                    0.5 - z
                }
            },
            bracket: (-5.0, 5.0),
            critical: &[1.0],
            scale: 1.0,
        };
        let s = p.solve().unwrap();
        assert_eq!(s.m, 1.0);
        assert!((s.z - 0.5).abs() < 1e-12);
        assert!(s.residual.abs() < 1e-12);
    }

    #[test]
    fn unexplained_jump_is_a_numerical_error() {
        let p = LevelProblem {
            balance: |m: f64, _z: f64| if m < 1.0 { 1.0 } else { -1.0 },
            bracket: (-5.0, 5.0),
            critical: &[],
            scale: 1.0,
        };
        assert!(p.solve().unwrap_err().is_numerical());
    }
}
