//! Spectral laboratory for the mass-critical generalized KdV equation
//!
//! ```text
//! u_t + u_xxx = mu (u^5)_x
//! ```
//!
//! on a large periodic box: a de-aliased pseudo-spectral solver, the
//! smoothed frequency cutoff `m_{N,s}` and the I-operator, exact evaluators
//! for the multilinear symbols of the first and second modified energies,
//! the resonant decomposition of the sextic symbol, and experiment drivers
//! measuring almost-conservation of the modified energies.

// `!(x > 0.0)` rejects NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod functionals;
pub mod grid;
pub mod multiplier;
pub mod resonance;
pub mod solver;
pub mod symbols;

pub use error::{Error, Result};
pub use grid::{
    bessel_potential, forward_transform, fractional_derivative, inverse_transform, regrid,
    sobolev_norm, Field, Grid, Spectrum,
};
pub use multiplier::{apply_i, m_value, IParams, MultiplierTable};
pub use resonance::Thresholds;
pub use solver::{ground_state, SolverConfig};
pub use symbols::{FrequencyTuple, SymbolValue};
