//! The two-in, two-out reference junction with tent fluxes, and its known
//! boundary traces.

use crate::entropy::EntropyPair;
use crate::flux::FluxFunction;
use crate::junction::{Junction, Road};

/// Initial densities `(1/4, 1/4, 0, 0)`.
pub const INITIAL: [f64; 4] = [0.25, 0.25, 0.0, 0.0];

/// Entropy used on every road.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// `η̂(ρ) = ρ² / 2` on all roads.
    Common,
    /// `η̂_h = -f_h`.
    NegFlux,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Common => "common",
            Variant::NegFlux => "neg_flux",
        }
    }
}

/// Expected traces, fluxes and ghost states.
pub struct Expected {
    pub trace_rho: [f64; 4],
    pub trace_flux: [f64; 4],
    pub hat_rho: [f64; 4],
}

pub fn expected(variant: Variant) -> Expected {
    match variant {
        Variant::Common => Expected {
            trace_rho: [0.25, 0.25, 0.1875, 0.1875],
            trace_flux: [0.5, 0.5, 0.75, 0.25],
            hat_rho: [0.1875; 4],
        },
        Variant::NegFlux => Expected {
            trace_rho: [0.25, 0.25, 0.25, 0.0],
            trace_flux: [0.5, 0.5, 1.0, 0.0],
            hat_rho: [0.0, 0.0, 0.25, 0.0],
        },
    }
}

/// Fluxes `f_1 = f_2` (peak 1 at 1/2), `f_3` (peak 1 at 1/4) and `f_4`
/// (peak 1 at 3/4), all on `[0, 1]`.
pub fn fluxes() -> [FluxFunction; 4] {
    let tent = |peak| FluxFunction::triangular(0.0, peak, 1.0, 1.0).expect("valid tent");
    [tent(0.5), tent(0.5), tent(0.25), tent(0.75)]
}

pub fn junction(variant: Variant) -> Junction {
    let roads: Vec<Road> = fluxes()
        .into_iter()
        .enumerate()
        .map(|(k, f)| {
            let entropy = match variant {
                Variant::Common => EntropyPair::quadratic(0.0, 1.0, 0.0).expect("valid"),
                Variant::NegFlux => EntropyPair::neg_flux(&f),
            };
            Road::new((k + 1).to_string(), f, entropy)
        })
        .collect();
    let mut roads = roads.into_iter();
    let incoming = roads.by_ref().take(2).collect();
    Junction::new(incoming, roads.collect()).expect("valid junction")
}

/// Same junction with `η̂_h'(ρ) = ρ - σ_h`, which is dissipation compatible.
pub fn recentered_junction() -> Junction {
    let roads: Vec<Road> = fluxes()
        .into_iter()
        .enumerate()
        .map(|(k, f)| {
            let entropy = EntropyPair::quadratic(0.0, 1.0, f.peak()).expect("valid");
            Road::new((k + 1).to_string(), f, entropy)
        })
        .collect();
    let mut roads = roads.into_iter();
    let incoming = roads.by_ref().take(2).collect();
    Junction::new(incoming, roads.collect()).expect("valid junction")
}
