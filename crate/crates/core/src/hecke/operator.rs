//! Hecke operators `T_{ℓ,r}` and `T*_{ℓ,r}` as integer matrices on symbol
//! spaces, and their action on quotients.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::AbelianGroup;
use crate::hecke::cone::{apply_transport, subdivide_to_basic, transport_matrix, SimplicialCone, Transport};
use crate::hecke::lattice::{enumerate_overlattices, enumerate_sublattices};
use crate::linalg::dense::{charpoly_mod_p, DenseMatrix};
use crate::linalg::modp::{vec_mod_p, Elimination};
use crate::linalg::sparse::SparseMatrix;
use crate::relations::{RelationSystem, SymbolVector};
use crate::symbol::{Codes, Flavor, SymbolIndex};

/// Precomputed transport matrices, one per basic cone of every lattice.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HeckePlan {
    pub n: usize,
    pub ell: u64,
    pub r: usize,
    pub transport: Transport,
    pub lattice_count: usize,
    /// Number of basic cones contributed by each lattice.
    pub cones_per_lattice: Vec<usize>,
    pub transports: Vec<Vec<Vec<i64>>>,
}

impl HeckePlan {
    pub fn new(n: usize, ell: u64, r: usize, transport: Transport, allow_full: bool) -> Result<Self> {
        let lattices = match transport {
            Transport::Vector => enumerate_overlattices(n, ell, r, allow_full)?,
            Transport::Covector => enumerate_sublattices(n, ell, r, allow_full)?,
        };
        let mut transports = Vec::new();
        let mut cones_per_lattice = Vec::with_capacity(lattices.len());
        for l in &lattices {
            let cones = subdivide_to_basic(&SimplicialCone::octant(l)?);
            cones_per_lattice.push(cones.len());
            for c in &cones {
                transports.push(transport_matrix(c, l, transport)?);
            }
        }
        Ok(HeckePlan { n, ell, r, transport, lattice_count: lattices.len(), cones_per_lattice, transports })
    }

    /// Number of terms in the image of a single symbol before collecting.
    pub fn term_count(&self) -> usize {
        self.transports.len()
    }
}

/// Transport used for each flavor; `B` carries no Hecke action here.
pub fn transport_for(flavor: Flavor) -> Result<Transport> {
    match flavor {
        Flavor::M | Flavor::Mminus => Ok(Transport::Vector),
        Flavor::Mstar => Ok(Transport::Covector),
        Flavor::B => Err(Error::Unsupported("Hecke operators are defined on M, M* and M⁻".into())),
    }
}

/// A Hecke operator on the free module of symbols of an index; column
/// `c` is the image of symbol `c`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HeckeMatrix {
    pub ell: u64,
    pub r: usize,
    pub flavor: Flavor,
    pub lattice_count: usize,
    images: Vec<SymbolVector>,
}

impl HeckeMatrix {
    pub fn dim(&self) -> usize {
        self.images.len()
    }

    pub fn column(&self, c: usize) -> &SymbolVector {
        &self.images[c]
    }

    pub fn columns(&self) -> &[SymbolVector] {
        &self.images
    }

    pub fn apply(&self, v: &SymbolVector) -> SymbolVector {
        let mut out = SymbolVector::new();
        for (c, x) in v.iter() {
            out.add_vector(&self.images[c], x);
        }
        out
    }

    /// Square sparse matrix with entry `(i, j)` the coefficient of symbol
    /// `i` in the image of symbol `j`.
    pub fn to_sparse(&self) -> Result<SparseMatrix> {
        let mut trip = Vec::new();
        for (j, col) in self.images.iter().enumerate() {
            for (i, x) in col.iter() {
                trip.push((i, j, x));
            }
        }
        SparseMatrix::from_triplets(self.dim(), self.dim(), &trip)
    }
}

/// `T_{ℓ,r}` (M, M⁻) or `T*_{ℓ,r}` (M*) on `(G, n)`.
pub fn hecke_matrix(group: &AbelianGroup, n: usize, ell: u64, r: usize, flavor: Flavor) -> Result<HeckeMatrix> {
    let index = SymbolIndex::enumerate(group, n, flavor)?;
    hecke_matrix_on(&index, ell, r, false)
}

/// Hecke operator on the columns of an existing index.
pub fn hecke_matrix_on(index: &SymbolIndex, ell: u64, r: usize, allow_full: bool) -> Result<HeckeMatrix> {
    let g = index.group();
    let order = g.order() as u64;
    if num_integer::gcd(ell, order) != 1 {
        return Err(Error::EllDividesOrder { ell, order });
    }
    let transport = transport_for(index.flavor())?;
    let plan = HeckePlan::new(index.n(), ell, r, transport, allow_full)?;
    Ok(hecke_matrix_with_plan(index, &plan))
}

pub fn hecke_matrix_with_plan(index: &SymbolIndex, plan: &HeckePlan) -> HeckeMatrix {
    let g = index.group();
    let images = (0..index.len())
        .into_par_iter()
        .map(|c| {
            let chi = index.codes(c);
            let mut v = SymbolVector::new();
            for t in &plan.transports {
                let mut codes: Codes = apply_transport(g, t, chi).into_iter().collect();
                v.add_codes(index, &mut codes, 1);
            }
            v
        })
        .collect();
    HeckeMatrix { ell: plan.ell, r: plan.r, flavor: index.flavor(), lattice_count: plan.lattice_count, images }
}

/// Matrix of `H` on the quotient by the relations, over `F_p`, in the basis
/// of free columns of an echelon form. Entry `(i, j)` is coordinate `i` of
/// the image of basis vector `j`. Fails if some relation is not mapped into
/// the relation span.
pub fn induced_on_quotient(h: &HeckeMatrix, rel: &RelationSystem, p: u32) -> Result<DenseMatrix> {
    if h.dim() != rel.ncols() || h.flavor != rel.flavor() {
        return Err(Error::IncompatibleIndex(format!(
            "operator on {} {} symbols, relations on {} {} symbols",
            h.dim(),
            h.flavor,
            rel.ncols(),
            rel.flavor()
        )));
    }
    let elim = Elimination::new(rel.matrix(), p)?;
    let row_images: Vec<_> = rel
        .matrix()
        .rows()
        .map(|(cols, vals)| vec_mod_p(h.apply(&SymbolVector::from_row(cols, vals)).iter(), p))
        .collect();
    let residues = elim.reduce_many(&row_images);
    if let Some(i) = residues.iter().position(|r| r.iter().any(|&x| x != 0)) {
        return Err(Error::SpanViolation(format!("image of relation row {i} is not in the relation span mod {p}")));
    }
    let basis_images: Vec<_> = elim.free_columns().iter().map(|&f| vec_mod_p(h.column(f as usize).iter(), p)).collect();
    let cols = elim.reduce_many(&basis_images);
    let k = cols.len();
    Ok((0..k).map(|i| (0..k).map(|j| cols[j][i]).collect()).collect())
}

/// Characteristic polynomial of a Hecke operator on a quotient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub ell: u64,
    pub r: usize,
    pub flavor: Flavor,
    pub prime: u32,
    pub dim: usize,
    /// Coefficients, constant term first.
    pub charpoly: Vec<u32>,
}

pub fn charpoly_report(h: &HeckeMatrix, rel: &RelationSystem, p: u32) -> Result<SpectrumReport> {
    let m = induced_on_quotient(h, rel, p)?;
    let charpoly = charpoly_mod_p(&m, p)?;
    Ok(SpectrumReport { ell: h.ell, r: h.r, flavor: h.flavor, prime: p, dim: m.len(), charpoly })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relations::{build_relations, combination_cyclic, full_kset};

    #[test]
    fn plan_term_counts() {
        assert_eq!(HeckePlan::new(2, 2, 1, Transport::Vector, false).unwrap().term_count(), 4);
        assert_eq!(HeckePlan::new(2, 2, 1, Transport::Covector, false).unwrap().term_count(), 4);
        let star = HeckePlan::new(3, 2, 1, Transport::Covector, false).unwrap();
        assert_eq!(star.term_count(), 13);
        let mut per = star.cones_per_lattice.clone();
        per.sort();
        assert_eq!(per, vec![1, 1, 1, 2, 2, 2, 4]);
    }

    #[test]
    fn t2_on_m2_matches_explicit_formula() {
        let g = AbelianGroup::cyclic(5).unwrap();
        let h = hecke_matrix(&g, 2, 2, 1, Flavor::M).unwrap();
        let idx = SymbolIndex::enumerate(&g, 2, Flavor::M).unwrap();
        for c in 0..idx.len() {
            let (a1, a2) = (idx.codes(c)[0] as i64, idx.codes(c)[1] as i64);
            let want = combination_cyclic(
                &idx,
                &[(&[2 * a1, a2], 1), (&[a1 - a2, 2 * a2], 1), (&[2 * a1, a2 - a1], 1), (&[a1, 2 * a2], 1)],
            )
            .unwrap();
            assert_eq!(h.column(c), &want);
        }
    }

    #[test]
    fn errors() {
        let g = AbelianGroup::cyclic(6).unwrap();
        assert_eq!(hecke_matrix(&g, 2, 3, 1, Flavor::M).unwrap_err(), Error::EllDividesOrder { ell: 3, order: 6 });
        assert!(matches!(hecke_matrix(&g, 2, 5, 1, Flavor::B), Err(Error::Unsupported(_))));
        let g5 = AbelianGroup::cyclic(5).unwrap();
        let h = hecke_matrix(&g5, 2, 2, 1, Flavor::M).unwrap();
        let rel = build_relations(&g5, 2, Flavor::Mstar, &full_kset(2)).unwrap();
        assert!(matches!(induced_on_quotient(&h, &rel, 101), Err(Error::IncompatibleIndex(_))));
    }

    #[test]
    fn trivial_group_one_by_one() {
        let g = AbelianGroup::cyclic(1).unwrap();
        let idx = SymbolIndex::enumerate(&g, 1, Flavor::M).unwrap();
        let h = hecke_matrix_on(&idx, 2, 1, true).unwrap();
        let rel = build_relations(&g, 1, Flavor::M, &full_kset(1)).unwrap();
        let m = induced_on_quotient(&h, &rel, 101).unwrap();
        assert_eq!(m, vec![vec![1]]);
    }
}
