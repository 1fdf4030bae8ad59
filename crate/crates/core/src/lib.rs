//! Exact arithmetic on finite sets of unit fractions: reciprocal sums,
//! the ◇/★ word calculus, splitting sequences, sylvester powers, and
//! iteration of `n ↦ n(n+1)`.

pub mod arith;
pub mod checks;
pub mod cli;
pub mod coprime;
pub mod error;
pub mod factor;
pub mod family;
pub mod primes;
pub mod scan;
pub mod sequence;
pub mod stars;
pub mod sylvester;
pub mod words;

pub use arith::{delta, mu, nat, nu, sigma, FinSet, Nat, PosRational};
pub use error::{Error, Result};
