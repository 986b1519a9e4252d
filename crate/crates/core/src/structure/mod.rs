//! Structure maps between symbol groups: `μ: B_n → M_n`, the projection
//! `μ⁻`, multiplication `∇`, co-multiplication `Δ`/`Δ⁻`, and primitive parts.

pub mod coproduct;
pub mod mu;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::sparse::SparseMatrix;
use crate::relations::SymbolVector;

pub use coproduct::{
    coprimitive_dim, delta_map, explicit_functional, nabla_map, primitive_dim, DeltaVariant, PrimitiveReport,
    SubquotientDatum, TensorMap,
};
pub use mu::{mu_cokernel, mu_map, mu_minus_map, verify_mu, MuReport};

/// A homomorphism between free modules on symbols; `images[c]` is the image
/// of source column `c`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearMap {
    pub source_len: usize,
    pub target_len: usize,
    pub images: Vec<SymbolVector>,
}

impl LinearMap {
    pub fn apply(&self, v: &SymbolVector) -> SymbolVector {
        let mut out = SymbolVector::new();
        for (c, x) in v.iter() {
            out.add_vector(&self.images[c], x);
        }
        out
    }

    /// Matrix with one row per target and one column per source.
    pub fn to_sparse(&self) -> Result<SparseMatrix> {
        let mut trip = Vec::new();
        for (j, col) in self.images.iter().enumerate() {
            trip.extend(col.iter().map(|(i, x)| (i, j, x)));
        }
        SparseMatrix::from_triplets(self.target_len, self.source_len, &trip)
    }

    /// Image vectors as rows, one per source column.
    pub fn image_rows(&self) -> Result<SparseMatrix> {
        let rows = self.images.iter().map(|v| v.iter().map(|(c, x)| (c as u32, x as i32)).collect::<Vec<_>>());
        SparseMatrix::from_rows(self.target_len, rows)
    }
}
