//! Scale-invariant ultrametric analysis toolkit.
//!
//! The crate builds exact Cantor-set interval covers (thin IFS and fat
//! variable-gap constructions), estimates box-counting and fatness exponents
//! from them, realizes the ultrametric valuation of relative infinitesimals
//! by scale-ladder extrapolation together with its closed parametric forms,
//! evaluates the devil's staircase exactly on rationals, provides p-adic
//! valuations with the Monna embedding and the rooted component tree, and
//! checks the prime-counting asymptotics the valuation reproduces
//! (v = x·Π(1/x), conservation identities, and the Chebyshev-ψ route).

pub mod cantor;
pub mod config;
pub mod error;
pub mod fit;
pub mod ladder;
pub mod measures;
pub mod padic;
pub mod primes;
pub mod rat;
pub mod staircase;
pub mod valuation;
pub mod verify;

pub use error::{Error, Result};
