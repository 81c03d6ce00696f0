//! Anderson acceleration for fixed-point iterations with the least-squares
//! step posed in a discrete negative-order Sobolev norm `H^{-s}`.
//!
//! The crate is organized bottom-up:
//!
//! * [`grid`]: sampled vectors, band/tridiagonal solvers, Krylov helpers.
//! * [`norms`]: the `H^{-s}` weight operators and weighted Gram systems.
//! * [`anderson`]: Picard, Anderson acceleration and its multisecant form.
//! * [`krylov`]: restarted GMRES for affine fixed-point maps.
//! * [`problems`]: Poisson, nonlinear Helmholtz and WaveHoltz maps.
//! * [`theory`]: one-step error formulas and Chebyshev bounds.
//!
//! The guide under `book/` walks through each piece; its code listings are
//! compiled and run as doctests of this crate.

pub mod anderson;
pub mod error;
pub mod grid;
pub mod krylov;
pub mod norms;
pub mod problems;
pub mod theory;

pub use error::{Error, Result};
pub use grid::{GridFunction, Scalar};
pub use norms::{NormKind, WeightOperator, WeightedQr};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/norms.md")]
    mod norms {}
    #[doc = include_str!("../../../book/src/anderson.md")]
    mod anderson {}
    #[doc = include_str!("../../../book/src/gmres.md")]
    mod gmres {}
    #[doc = include_str!("../../../book/src/theory.md")]
    mod theory {}
    #[doc = include_str!("../../../book/src/problems.md")]
    mod problems {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
