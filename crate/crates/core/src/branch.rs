//! Splitting of a road's density range by the direction of its characteristics.

use serde::{Deserialize, Serialize};

use crate::flux::FluxFunction;

/// Side of the junction a road sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `x < 0`, traffic flows into the junction.
    #[serde(alias = "incoming")]
    In,
    /// `x > 0`, traffic flows away from the junction.
    #[serde(alias = "outgoing")]
    Out,
}

impl Direction {
    /// `+1` for incoming roads, `-1` for outgoing ones.
    pub fn sign(self) -> f64 {
        match self {
            Direction::In => 1.0,
            Direction::Out => -1.0,
        }
    }
}

/// Closed or half-open interval of densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn contains(&self, rho: f64) -> bool {
        let above = if self.lo_closed { rho >= self.lo } else { rho > self.lo };
        let below = if self.hi_closed { rho <= self.hi } else { rho < self.hi };
        above && below
    }
}

/// `Γ_in` holds the states whose characteristics hit the junction, `Γ_out`
/// the ones that leave it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchDecomposition {
    pub gamma_in: Interval,
    pub gamma_out: Interval,
}

impl BranchDecomposition {
    pub fn new(f: &FluxFunction, direction: Direction) -> Self {
        let (a, b) = f.domain();
        let s = f.peak();
        match direction {
            Direction::In => Self {
                gamma_in: Interval { lo: a, hi: s, lo_closed: true, hi_closed: false },
                gamma_out: Interval { lo: s, hi: b, lo_closed: true, hi_closed: true },
            },
            Direction::Out => Self {
                gamma_in: Interval { lo: s, hi: b, lo_closed: false, hi_closed: true },
                gamma_out: Interval { lo: a, hi: s, lo_closed: true, hi_closed: true },
            },
        }
    }
}

/// Whether `rho` lies in `Γ_out` of a road with flux `f`.
pub fn in_gamma_out(f: &FluxFunction, direction: Direction, rho: f64) -> bool {
    match direction {
        Direction::In => rho >= f.peak(),
        Direction::Out => rho <= f.peak(),
    }
}

/// Inverse of `f` on `Γ_out`: the falling branch for incoming roads and the
/// rising branch for outgoing ones.
pub fn inverse_out(f: &FluxFunction, direction: Direction, flux: f64) -> f64 {
    match direction {
        Direction::In => f.inverse_falling(flux),
        Direction::Out => f.inverse_rising(flux),
    }
}
