//! Exact linear algebra over prime fields and the integers.

pub mod dense;
pub mod integer;
pub mod modp;
pub mod primes;
pub mod rank;
pub mod smith;
pub mod sparse;
