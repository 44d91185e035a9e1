//! Concave, bell-shaped, piecewise-linear flux functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ENDPOINT_TOL: f64 = 1e-12;

/// A strictly concave piecewise-linear flux on `K = [a, b]` with
/// `f(a) = f(b) = 0` and a unique maximizer `σ`.
///
/// The flux is extended by zero outside of `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct FluxFunction {
    nodes: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    peak: usize,
}

impl FluxFunction {
    /// Builds a flux from `(density, flux)` breakpoints.
    ///
    /// The breakpoints must be strictly increasing in density, vanish at both
    /// ends, stay nonnegative and have strictly decreasing segment slopes with
    /// no flat segment at the top.
    pub fn new(breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        if breakpoints.len() < 3 {
            return Err(Error::TooFewBreakpoints(breakpoints.len()));
        }
        for (index, w) in breakpoints.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) || !w[1].0.is_finite() || !w[0].0.is_finite() {
                return Err(Error::UnorderedBreakpoints {
                    index: index + 1,
                    rho: w[1].0,
                });
            }
        }
        let (nodes, mut values): (Vec<f64>, Vec<f64>) = breakpoints.into_iter().unzip();
        let last = values.len() - 1;
        for i in [0, last] {
            if values[i].abs() > ENDPOINT_TOL || !values[i].is_finite() {
                return Err(Error::NonzeroEndpoint {
                    rho: nodes[i],
                    value: values[i],
                });
            }
            values[i] = 0.0;
        }
        if let Some(index) = values.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::NegativeFlux {
                index,
                value: values[index],
            });
        }
        let slopes: Vec<f64> = (0..last)
            .map(|k| (values[k + 1] - values[k]) / (nodes[k + 1] - nodes[k]))
            .collect();
        for (k, w) in slopes.windows(2).enumerate() {
            if !(w[0] > w[1]) {
                return Err(Error::NotConcave {
                    left: k,
                    right: k + 1,
                    left_slope: w[0],
                    right_slope: w[1],
                });
            }
        }
        if let Some(segment) = slopes.iter().position(|s| *s == 0.0) {
            return Err(Error::FlatMaximum { segment });
        }
        // slopes are strictly decreasing, start positive and end negative
        let peak = slopes.partition_point(|s| *s > 0.0);
        Ok(Self {
            nodes,
            values,
            slopes,
            peak,
        })
    }

    /// Two-segment tent flux through `(peak, peak_flux)`.
    pub fn triangular(a: f64, peak: f64, b: f64, peak_flux: f64) -> Result<Self> {
        Self::new(vec![(a, 0.0), (peak, peak_flux), (b, 0.0)])
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.nodes[0], self.nodes[self.nodes.len() - 1])
    }

    pub fn contains(&self, rho: f64) -> bool {
        let (a, b) = self.domain();
        rho >= a && rho <= b
    }

    pub fn check(&self, rho: f64) -> Result<()> {
        if self.contains(rho) {
            Ok(())
        } else {
            let (a, b) = self.domain();
            Err(Error::OutOfDomain { rho, a, b })
        }
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.values.iter().copied())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    /// The unique maximizer `σ`.
    pub fn peak(&self) -> f64 {
        self.nodes[self.peak]
    }

    pub fn max_flux(&self) -> f64 {
        self.values[self.peak]
    }

    /// Largest characteristic speed `max |f'|`.
    pub fn lipschitz(&self) -> f64 {
        self.slopes.iter().fold(0.0, |acc, s| acc.max(s.abs()))
    }

    /// Index of the segment containing `rho`, clamped to the valid range.
    fn segment(&self, rho: f64) -> usize {
        let k = self.nodes.partition_point(|x| *x <= rho);
        k.saturating_sub(1).min(self.slopes.len() - 1)
    }

    pub fn eval(&self, rho: f64) -> f64 {
        if !self.contains(rho) {
            return 0.0;
        }
        if rho == self.nodes[self.nodes.len() - 1] {
            return self.values[self.values.len() - 1];
        }
        let k = self.segment(rho);
        self.values[k] + self.slopes[k] * (rho - self.nodes[k])
    }

    /// `f'(rho-)`, taken inside the domain (the first slope at `a`).
    pub fn slope_left(&self, rho: f64) -> f64 {
        let k = self.nodes.partition_point(|x| *x < rho);
        self.slopes[k.saturating_sub(1).min(self.slopes.len() - 1)]
    }

    /// `f'(rho+)`, taken inside the domain (the last slope at `b`).
    pub fn slope_right(&self, rho: f64) -> f64 {
        self.slopes[self.segment(rho)]
    }

    /// Maximum of `f` over `[lo, hi]`.
    pub fn max_on(&self, lo: f64, hi: f64) -> f64 {
        self.eval(self.peak().clamp(lo, hi))
    }

    /// Minimum of `f` over `[lo, hi]`; concavity puts it at an endpoint.
    pub fn min_on(&self, lo: f64, hi: f64) -> f64 {
        self.eval(lo).min(self.eval(hi))
    }

    /// Godunov flux between `left` and `right`. Inputs are assumed to lie in
    /// the domain; see [`crate::riemann::godunov_flux`] for the checked form.
    pub fn godunov(&self, left: f64, right: f64) -> f64 {
        if left <= right {
            self.min_on(left, right)
        } else {
            self.max_on(right, left)
        }
    }

    /// Inverse of `f` restricted to the rising branch `[a, σ]`.
    pub fn inverse_rising(&self, flux: f64) -> f64 {
        let flux = flux.clamp(0.0, self.max_flux());
        let rising = &self.values[..=self.peak];
        let k = rising.partition_point(|v| *v < flux).clamp(1, self.peak);
        if rising[k] == flux {
            return self.nodes[k];
        }
        self.nodes[k - 1] + (flux - self.values[k - 1]) / self.slopes[k - 1]
    }

    /// Inverse of `f` restricted to the falling branch `[σ, b]`.
    pub fn inverse_falling(&self, flux: f64) -> f64 {
        let flux = flux.clamp(0.0, self.max_flux());
        let falling = &self.values[self.peak..];
        // values decrease along the falling branch
        let k = falling.partition_point(|v| *v > flux).max(1) + self.peak;
        let k = k.min(self.nodes.len() - 1);
        if self.values[k] == flux {
            return self.nodes[k];
        }
        self.nodes[k - 1] + (flux - self.values[k - 1]) / self.slopes[k - 1]
    }
}

impl TryFrom<Vec<(f64, f64)>> for FluxFunction {
    type Error = Error;

    fn try_from(value: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<FluxFunction> for Vec<(f64, f64)> {
    fn from(value: FluxFunction) -> Self {
        value.breakpoints().collect()
    }
}
