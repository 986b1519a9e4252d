//! Lattices, cones and Hecke operators on symbol groups.

pub(crate) mod intmat;
pub mod cone;
pub mod lattice;
pub mod operator;

pub use cone::{subdivide_to_basic, symbol_of_cone, SimplicialCone, Transport};
pub use lattice::{enumerate_overlattices, enumerate_sublattices, gaussian_binomial, Lattice};
pub use operator::{charpoly_report, hecke_matrix, hecke_matrix_on, induced_on_quotient, HeckeMatrix, HeckePlan, SpectrumReport};
