//! Exact-arithmetic toolkit for the symbol groups `B_n(G)`, `M_n(G)` and
//! their variants: symbol enumeration, relation matrices, sparse ranks over
//! prime fields, integer normal forms, Hecke operators, structure maps,
//! classical Manin symbols and the blowup invariant.

pub mod birat;
pub mod compute;
pub mod error;
pub mod group;
pub mod hecke;
pub mod linalg;
pub mod modsym;
pub mod relations;
pub mod structure;
pub mod symbol;

pub use error::{Error, Result};
pub use group::{AbelianGroup, Code, GroupElement};
pub use symbol::{canonicalize, Flavor, Symbol, SymbolIndex};
