//! One-call dimension computations for a symbol group presentation.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::AbelianGroup;
use crate::linalg::modp::{rank_mod_p_with, EliminationConfig};
use crate::linalg::primes::{is_prime, random_primes, DEFAULT_SEED};
use crate::linalg::rank::{rank_q_with, PrimeRank};
use crate::relations::{build_relations, build_relations_f2, full_kset, RelationSystem};
use crate::symbol::Flavor;

/// Coefficient field of a rank computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Field {
    /// Rationals, via the maximum rank over several large primes.
    Q,
    /// The prime field `F_p`.
    Fp(u32),
}

impl std::str::FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("q") {
            return Ok(Field::Q);
        }
        let digits = t.strip_prefix('F').or_else(|| t.strip_prefix('f')).unwrap_or(t);
        let p: u32 = digits.parse().map_err(|_| Error::Unsupported(format!("unknown field {s:?}")))?;
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        Ok(Field::Fp(p))
    }
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Field::Q => write!(f, "Q"),
            Field::Fp(p) => write!(f, "F{p}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimReport {
    pub moduli: Vec<u32>,
    pub n: usize,
    pub flavor: Flavor,
    pub kset: Vec<usize>,
    pub field: Field,
    pub symbols: usize,
    pub relations: usize,
    pub rank: usize,
    pub dim: usize,
    pub per_prime: Vec<PrimeRank>,
    /// Every prime gave the same rank.
    pub agree: bool,
}

/// Default primes for rational ranks: three seeded 31-bit primes.
pub fn default_primes(group: &AbelianGroup) -> Vec<u32> {
    random_primes(3, DEFAULT_SEED, group.order() as u64)
}

/// Relation system for ranks over `field`; over `F_2` self-negating
/// `Mminus` symbols are kept.
pub fn relations_for(group: &AbelianGroup, n: usize, flavor: Flavor, kset: &[usize], field: Field) -> Result<RelationSystem> {
    match field {
        Field::Fp(2) => build_relations_f2(group, n, flavor, kset),
        _ => build_relations(group, n, flavor, kset),
    }
}

/// `#symbols − rank` of the relation system over `field`. An empty `kset`
/// means the full range; `primes` is used only for `Q`.
pub fn dimension(
    group: &AbelianGroup,
    n: usize,
    flavor: Flavor,
    kset: &[usize],
    field: Field,
    primes: &[u32],
    cfg: &EliminationConfig,
) -> Result<DimReport> {
    let kset = if kset.is_empty() { full_kset(n) } else { kset.to_vec() };
    let rel = relations_for(group, n, flavor, &kset, field)?;
    dimension_of(group, &rel, field, primes, cfg)
}

/// As [`dimension`], for an already built system.
pub fn dimension_of(
    group: &AbelianGroup,
    rel: &RelationSystem,
    field: Field,
    primes: &[u32],
    cfg: &EliminationConfig,
) -> Result<DimReport> {
    let (rank, per_prime, agree) = match field {
        Field::Q => {
            let r = rank_q_with(rel.matrix(), primes, cfg)?;
            (r.rank, r.per_prime, r.agree)
        }
        Field::Fp(p) => {
            let t = Instant::now();
            let rank = rank_mod_p_with(rel.matrix(), p, cfg)?;
            (rank, vec![PrimeRank { prime: p, rank, seconds: t.elapsed().as_secs_f64() }], true)
        }
    };
    Ok(DimReport {
        moduli: group.moduli().to_vec(),
        n: rel.index().n(),
        flavor: rel.flavor(),
        kset: rel.kset().to_vec(),
        field,
        symbols: rel.ncols(),
        relations: rel.nrows(),
        rank,
        dim: rel.ncols() - rank,
        per_prime,
        agree,
    })
}
