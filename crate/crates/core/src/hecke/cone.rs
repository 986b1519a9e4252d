//! Simplicial cones, subdivision into basic cones, and the symbol attached
//! to a triple (lattice, character, basic cone).

use std::collections::HashSet;

use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{AbelianGroup, Code};
use crate::hecke::intmat::{self, IntMat};
use crate::hecke::lattice::Lattice;

/// A full-dimensional simplicial cone. Generators are primitive integer
/// vectors in the coordinates of the associated lattice basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplicialCone {
    gens: IntMat,
}

impl SimplicialCone {
    /// Cone on the given generators (lattice coordinates), primitivized.
    pub fn new(gens: Vec<Vec<i64>>) -> Result<Self> {
        let n = gens.len();
        if gens.iter().any(|g| g.len() != n) {
            return Err(Error::DegenerateCone(format!("{n} generators of wrong length")));
        }
        let gens: IntMat = gens.iter().map(|g| intmat::primitive(g)).collect();
        if n == 0 || intmat::det(&gens) == 0 {
            return Err(Error::DegenerateCone("generators are linearly dependent".into()));
        }
        Ok(SimplicialCone { gens })
    }

    /// Cone spanned by ambient rays, expressed in `lattice` coordinates.
    pub fn from_ambient(lattice: &Lattice, rays: &[Vec<Rational64>]) -> Result<Self> {
        let gens = rays
            .iter()
            .map(|x| {
                let c = lattice.coordinates(x);
                let l = c.iter().fold(1i64, |acc, q| num_integer::lcm(acc, *q.denom()));
                c.iter().map(|q| (q * l).to_integer()).collect()
            })
            .collect();
        SimplicialCone::new(gens)
    }

    /// The positive orthant of the standard lattice, seen in `lattice`.
    pub fn octant(lattice: &Lattice) -> Result<Self> {
        let n = lattice.rank();
        let rays: Vec<Vec<Rational64>> = (0..n)
            .map(|i| (0..n).map(|j| Rational64::from_integer(i64::from(i == j))).collect())
            .collect();
        SimplicialCone::from_ambient(lattice, &rays)
    }

    pub fn generators(&self) -> &[Vec<i64>] {
        &self.gens
    }

    pub fn dim(&self) -> usize {
        self.gens.len()
    }

    /// Index of the sublattice spanned by the generators.
    pub fn multiplicity(&self) -> i64 {
        intmat::det(&self.gens).abs()
    }

    pub fn is_basic(&self) -> bool {
        self.multiplicity() == 1
    }

    /// Generators in ambient coordinates.
    pub fn ambient_rays(&self, lattice: &Lattice) -> Vec<Vec<Rational64>> {
        self.gens.iter().map(|g| lattice.ambient(g)).collect()
    }

    /// Coordinates `c` with `x = Σ c_i g_i`.
    pub fn cone_coordinates(&self, x: &[Rational64]) -> Vec<Rational64> {
        let d = intmat::det(&self.gens);
        let adj = intmat::adjugate(&self.gens);
        let n = self.dim();
        (0..n).map(|j| (0..n).map(|i| x[i] * adj[i][j]).sum::<Rational64>() / Rational64::from_integer(d)).collect()
    }

    /// Nonzero lattice point `Σ c_i g_i`, `0 ≤ c_i < 1`, minimizing `Σ c_i`
    /// with lexicographic tie-break on `c`. Returned as `(point, D·c)` where
    /// `D` is the multiplicity.
    fn best_interior_point(&self) -> Option<(Vec<i64>, Vec<i64>)> {
        let n = self.dim();
        let d = intmat::det(&self.gens);
        let m = d.abs();
        if m <= 1 {
            return None;
        }
        // c = x · adj(G) / det(G): fractional parts form the subgroup of
        // (Z/m)^n generated by the rows of sign(det)·adj(G).
        let adj = intmat::adjugate(&self.gens);
        let s = d.signum();
        let gens: Vec<Vec<i64>> = adj.iter().map(|r| r.iter().map(|&x| (s * x).rem_euclid(m)).collect()).collect();
        let zero = vec![0i64; n];
        let mut seen: HashSet<Vec<i64>> = HashSet::from([zero.clone()]);
        let mut frontier = vec![zero];
        while let Some(u) = frontier.pop() {
            for g in &gens {
                let v: Vec<i64> = u.iter().zip(g).map(|(&a, &b)| (a + b) % m).collect();
                if seen.insert(v.clone()) {
                    frontier.push(v);
                }
            }
        }
        debug_assert_eq!(seen.len() as i64, m);
        let best = seen
            .into_iter()
            .filter(|u| u.iter().any(|&x| x != 0))
            .min_by(|a, b| a.iter().sum::<i64>().cmp(&b.iter().sum::<i64>()).then_with(|| a.cmp(b)))?;
        let point: Vec<i64> = (0..n).map(|j| (0..n).map(|i| best[i] * self.gens[i][j]).sum::<i64>() / m).collect();
        Some((point, best))
    }

    /// Replaces `g_i` by `w` for every `i` with positive coefficient.
    fn stellar(&self, w: &[i64], coeffs: &[i64]) -> Vec<SimplicialCone> {
        coeffs
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c > 0)
            .map(|(i, _)| {
                let mut gens = self.gens.clone();
                gens[i] = w.to_vec();
                SimplicialCone { gens }
            })
            .collect()
    }

    /// Stellar subdivision at the sum of the generators in `subset`.
    pub fn stellar_at_sum(&self, subset: &[usize]) -> Vec<SimplicialCone> {
        let n = self.dim();
        let w: Vec<i64> = (0..n).map(|j| subset.iter().map(|&i| self.gens[i][j]).sum()).collect();
        let coeffs: Vec<i64> = (0..n).map(|i| i64::from(subset.contains(&i))).collect();
        self.stellar(&intmat::primitive(&w), &coeffs)
    }
}

/// Basic cones with disjoint interiors covering `cone`.
pub fn subdivide_to_basic(cone: &SimplicialCone) -> Vec<SimplicialCone> {
    let mut out = Vec::new();
    let mut stack = vec![cone.clone()];
    while let Some(c) = stack.pop() {
        match c.best_interior_point() {
            None => out.push(c),
            Some((w, coeffs)) => {
                let mut pieces = c.stellar(&w, &coeffs);
                pieces.reverse();
                stack.extend(pieces);
            }
        }
    }
    out
}

/// How a character is carried to a finer or coarser lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Transport {
    /// `χ ∈ L ⊗ A`, rewritten in a basis of an overlattice.
    Vector,
    /// `χ ∈ Hom(L, A)`, restricted to a sublattice.
    Covector,
}

/// Integer matrix `T` with `a′_j = Σ_i T[j][i]·a_i` for the symbol of a
/// basic `cone` in `lattice`.
pub fn transport_matrix(cone: &SimplicialCone, lattice: &Lattice, transport: Transport) -> Result<Vec<Vec<i64>>> {
    if !cone.is_basic() {
        return Err(Error::DegenerateCone(format!("cone of multiplicity {} is not basic", cone.multiplicity())));
    }
    let n = cone.dim();
    match transport {
        Transport::Vector => {
            // e_i = Σ_j D_ji f_j, i.e. Y = Dᵀ F with Y the standard basis in lattice coordinates
            let mut y = vec![vec![0i64; n]; n];
            for (i, row) in y.iter_mut().enumerate() {
                let mut e = vec![Rational64::zero(); n];
                e[i] = Rational64::from_integer(1);
                for (slot, q) in row.iter_mut().zip(lattice.coordinates(&e)) {
                    if !q.is_integer() {
                        return Err(Error::InvalidHecke("standard lattice is not contained in the target".into()));
                    }
                    *slot = q.to_integer();
                }
            }
            let f = cone.generators().to_vec();
            let det = intmat::det(&f);
            let finv: IntMat = intmat::adjugate(&f).iter().map(|r| r.iter().map(|&x| x * det).collect()).collect();
            Ok(intmat::transpose(&intmat::mul(&y, &finv)))
        }
        Transport::Covector => cone
            .generators()
            .iter()
            .map(|g| {
                lattice
                    .ambient(g)
                    .into_iter()
                    .map(|q| {
                        if q.is_integer() {
                            Ok(q.to_integer())
                        } else {
                            Err(Error::InvalidHecke("target is not a sublattice of the standard lattice".into()))
                        }
                    })
                    .collect()
            })
            .collect(),
    }
}

/// Applies a transport matrix to a character given by its values on the
/// standard basis.
pub fn apply_transport(group: &AbelianGroup, t: &[Vec<i64>], chi: &[Code]) -> Vec<Code> {
    t.iter()
        .map(|row| row.iter().zip(chi).fold(group.zero(), |acc, (&k, &a)| group.add(acc, group.scale(k, a))))
        .collect()
}

/// Symbol entries `(a′_1, …, a′_n)` of the triple `(lattice, χ, cone)`.
pub fn symbol_of_cone(
    cone: &SimplicialCone,
    lattice: &Lattice,
    group: &AbelianGroup,
    chi: &[Code],
    transport: Transport,
) -> Result<Vec<Code>> {
    if chi.len() != cone.dim() {
        return Err(Error::WrongArity { expected: cone.dim(), got: chi.len() });
    }
    let t = transport_matrix(cone, lattice, transport)?;
    Ok(apply_transport(group, &t, chi))
}
