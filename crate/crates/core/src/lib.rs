//! A numerical laboratory for weighted partial sums `Σ_{n≤y} f(n) n^{-σ}` of a
//! Rademacher random multiplicative function `f`.
//!
//! The crate is organised bottom-up:
//!
//! - [`sieve`]: primes, μ², ω and distinct prime factors by segmented sieve;
//! - [`sampler`]: seed-reproducible prime signs and the functions `f`, `f*`;
//! - [`series`]: partial sums, positivity, prime sums and Euler products;
//! - [`oracle`] and [`montecarlo`]: exact enumeration over all sign
//!   assignments of a small prime universe, and parallel Monte Carlo;
//! - [`nt`] and [`zeta`]: explicit number-theoretic sums, `ζ` and the prime
//!   zeta function;
//! - [`bounds`]: closed-form evaluation of the tail and positivity bounds.
//!
//! The guide in `book/` walks through each layer; its code listings are
//! compiled and run as doc-tests of this crate.

pub mod bounds;
pub mod error;
pub mod montecarlo;
pub mod nt;
pub mod oracle;
pub mod sampler;
pub mod series;
pub mod sieve;
pub mod stats;
pub mod summation;
pub mod zeta;

pub use error::{Error, Result};
pub use sampler::{FValue, Mode, SignAssignment};
pub use sieve::{ArithSignature, PrimeList};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/sieve.md")]
    mod sieve {}
    #[doc = include_str!("../../../book/src/signs.md")]
    mod signs {}
    #[doc = include_str!("../../../book/src/series.md")]
    mod series {}
    #[doc = include_str!("../../../book/src/enumeration.md")]
    mod enumeration {}
    #[doc = include_str!("../../../book/src/number-theory.md")]
    mod number_theory {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
}
