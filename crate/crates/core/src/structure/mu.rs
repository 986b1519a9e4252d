//! The homomorphism `μ: B_n(G) → M_n(G)` and the projection `μ⁻`.

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::AbelianGroup;
use crate::linalg::integer::IntegerQuotient;
use crate::linalg::modp::{vec_mod_p, Elimination};
use crate::relations::{build_relations, full_kset, SymbolVector};
use crate::structure::LinearMap;
use crate::symbol::{Codes, Flavor, SymbolIndex};

/// Largest symbol count for which the Z-span check is attempted.
const Z_CHECK_MAX_COLS: usize = 4000;

fn check_pair(source: &SymbolIndex, target: &SymbolIndex, sf: Flavor, tf: Flavor) -> Result<()> {
    if source.flavor() != sf || target.flavor() != tf {
        return Err(Error::IncompatibleIndex(format!("expected {sf} → {tf}, got {} → {}", source.flavor(), target.flavor())));
    }
    if source.group() != target.group() || source.n() != target.n() {
        return Err(Error::IncompatibleIndex("source and target differ in group or arity".into()));
    }
    Ok(())
}

/// `[a] ↦ ⟨a⟩` without zeros, `2⟨a⟩` with exactly one zero, `0` otherwise.
pub fn mu_map(b: &SymbolIndex, m: &SymbolIndex) -> Result<LinearMap> {
    check_pair(b, m, Flavor::B, Flavor::M)?;
    let zero = b.group().zero();
    let images = (0..b.len())
        .map(|c| {
            let codes = b.codes(c);
            let zeros = codes.iter().filter(|&&a| a == zero).count();
            let mut v = SymbolVector::new();
            if zeros <= 1 {
                let mut t: Codes = codes.iter().copied().collect();
                v.add_codes(m, &mut t, if zeros == 0 { 1 } else { 2 });
            }
            v
        })
        .collect();
    Ok(LinearMap { source_len: b.len(), target_len: m.len(), images })
}

/// Natural projection `M_n(G) → M⁻_n(G)`.
pub fn mu_minus_map(m: &SymbolIndex, minus: &SymbolIndex) -> Result<LinearMap> {
    check_pair(m, minus, Flavor::M, Flavor::Mminus)?;
    let images = (0..m.len())
        .map(|c| {
            let mut v = SymbolVector::new();
            let mut t: Codes = m.codes(c).iter().copied().collect();
            v.add_codes(minus, &mut t, 1);
            v
        })
        .collect();
    Ok(LinearMap { source_len: m.len(), target_len: minus.len(), images })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuReport {
    pub n: usize,
    pub b_symbols: usize,
    pub m_symbols: usize,
    pub b_relations: usize,
    /// Every image of a B-relation lies in the M-relation span mod each prime.
    pub relations_mapped_mod_p: bool,
    /// Same over Z; `None` when the instance is too large to check.
    pub relations_mapped_z: Option<bool>,
    /// The image of μ spans the quotient mod each (odd) prime.
    pub surjective_mod_p: bool,
    pub dim_b: usize,
    pub dim_m: usize,
    pub primes: Vec<u32>,
}

impl MuReport {
    pub fn passed(&self) -> bool {
        self.relations_mapped_mod_p && self.relations_mapped_z != Some(false) && self.surjective_mod_p
    }
}

/// Checks that μ respects relations and is onto up to 2-torsion.
pub fn verify_mu(group: &AbelianGroup, n: usize, primes: &[u32]) -> Result<MuReport> {
    if primes.is_empty() {
        return Err(Error::EmptyPrimeList);
    }
    if primes.contains(&2) {
        return Err(Error::Unsupported("surjectivity of μ holds only away from 2".into()));
    }
    let b_rel = build_relations(group, n, Flavor::B, &full_kset(n))?;
    let m_rel = build_relations(group, n, Flavor::M, &full_kset(n))?;
    let mu = mu_map(b_rel.index(), m_rel.index())?;
    let mapped: Vec<SymbolVector> =
        b_rel.matrix().rows().map(|(c, v)| mu.apply(&SymbolVector::from_row(c, v))).collect();
    let mut mapped_ok = true;
    let mut surjective = true;
    let mut dim_b = 0;
    let mut dim_m = 0;
    for &p in primes {
        let em = Elimination::new(m_rel.matrix(), p)?;
        let eb = Elimination::new(b_rel.matrix(), p)?;
        dim_b = dim_b.max(eb.quotient_dim());
        dim_m = dim_m.max(em.quotient_dim());
        let rows: Vec<_> = mapped.iter().map(|v| vec_mod_p(v.iter(), p)).collect();
        mapped_ok &= em.reduce_many(&rows).iter().all(|r| r.iter().all(|&x| x == 0));
        let images: Vec<_> = mu.images.iter().map(|v| vec_mod_p(v.iter(), p)).collect();
        let reduced = em.reduce_many(&images);
        let k = em.quotient_dim();
        let rows: Vec<_> = reduced
            .iter()
            .map(|r| r.iter().enumerate().filter(|(_, &x)| x != 0).map(|(i, &x)| (i as u32, x)).collect())
            .collect();
        let span = Elimination::from_mod_rows(rows, k, p, &Default::default());
        surjective &= span.rank() == k;
    }
    let relations_mapped_z = if m_rel.ncols() <= Z_CHECK_MAX_COLS {
        let q = IntegerQuotient::new(m_rel.matrix())?;
        let mut ok = true;
        for v in &mapped {
            ok &= q.in_rowspan_z(v)?;
        }
        Some(ok)
    } else {
        None
    };
    Ok(MuReport {
        n,
        b_symbols: b_rel.ncols(),
        m_symbols: m_rel.ncols(),
        b_relations: b_rel.nrows(),
        relations_mapped_mod_p: mapped_ok,
        relations_mapped_z,
        surjective_mod_p: surjective,
        dim_b,
        dim_m,
        primes: primes.to_vec(),
    })
}

/// Nontrivial invariant factors of `M_n(G) / μ(B_n(G))`.
pub fn mu_cokernel(group: &AbelianGroup, n: usize) -> Result<Vec<BigInt>> {
    let b = SymbolIndex::enumerate(group, n, Flavor::B)?;
    let m_rel = build_relations(group, n, Flavor::M, &full_kset(n))?;
    let mu = mu_map(&b, m_rel.index())?;
    let mut stacked = m_rel.matrix().clone();
    stacked.append(&mu.image_rows()?)?;
    let q = IntegerQuotient::new(&stacked)?;
    if q.free_rank() != 0 {
        return Err(Error::Unsupported(format!("μ has cokernel of rank {}", q.free_rank())));
    }
    Ok(q.elementary_divisors().into_iter().filter(|d| !d.is_one()).collect())
}
