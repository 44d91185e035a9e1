//! Solvers for the LWR traffic model on a single junction with `n` incoming
//! and `m` outgoing roads.
//!
//! The coupling at the junction is fixed by an entropy per road. Three
//! routes compute it:
//!
//! * [`solve_riemann`] picks ghost states on a common entropy-slope level,
//! * [`solve_max_dissipation`] maximizes the entropy dissipation through its
//!   KKT conditions,
//! * [`kinetic`] relaxes a BGK model whose junction condition is [`kinetic::psi`].
//!
//! [`network`] runs a Godunov scheme on the roads around the junction and
//! compares it with the kinetic model. [`scenario`] reads TOML scenarios and
//! writes CSV/JSON artifacts.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Road and cell indices run over several parallel vectors at once.
#![allow(clippy::needless_range_loop)]

pub mod branch;
pub mod dissipation;
pub mod entropy;
pub mod error;
pub mod flux;
pub mod junction;
pub mod kinetic;
mod level;
pub mod network;
pub mod riemann;
pub mod sampling;
pub mod scenario;
pub mod table1;
pub mod validation;

pub use branch::{BranchDecomposition, Direction};
pub use dissipation::{
    brute_force_max_dissipation, holden_risebro_convert, holden_risebro_inverse,
    solve_max_dissipation, FluxProgram, KktCase, MaxDissipation, PiecewiseQuadratic,
};
pub use entropy::{chi_moment, entropy_flux_eval, kruzkov_flux, EntropyPair, Weight};
pub use error::{Error, Result};
pub use flux::FluxFunction;
pub use junction::{
    classify_state, germ_dissipation, germ_projection, hat_states, solve_riemann, xi, Junction,
    JunctionSolution, PriorityProfile, Road, StateClass,
};
pub use riemann::{godunov_flux, self_similar_eval, Side};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    struct Intro;
    #[doc = include_str!("../../../book/src/fluxes.md")]
    struct Fluxes;
    #[doc = include_str!("../../../book/src/entropies.md")]
    struct Entropies;
    #[doc = include_str!("../../../book/src/riemann.md")]
    struct Riemann;
    #[doc = include_str!("../../../book/src/dissipation.md")]
    struct Dissipation;
    #[doc = include_str!("../../../book/src/kinetic.md")]
    struct Kinetic;
    #[doc = include_str!("../../../book/src/network.md")]
    struct Network;
    #[doc = include_str!("../../../book/src/scenarios.md")]
    struct Scenarios;
}
