//! Weight-2 Manin symbols `(c, d)` for `Γ₁(N)`, the minus space for the
//! involution `ι`, cusp counts, and comparison with `M⁻_2(Z/N)`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{divisors, euler_phi, AbelianGroup};
use crate::linalg::modp::{vec_mod_p, Elimination};
use crate::linalg::rank::{rank_q, RankReport};
use crate::linalg::sparse::{normalize_row, SparseMatrix};
use crate::relations::{build_relations, full_kset, SymbolVector};
use crate::symbol::{Flavor, SymbolIndex};

/// Which identifications act on the generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ManinKind {
    /// `(c,d) = -(d,-c)`.
    Full,
    /// Additionally `(c,d) = (d,c)`.
    Minus,
}

/// Three-term relation used for the minus space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ThreeTerm {
    /// `(a,b) = (a,b-a) + (a-b,b)`.
    Vector,
    /// `(a,b) = (a+b,b) + (a,a+b)`.
    Covector,
}

/// Generators modulo the sign identifications, with relation rows.
#[derive(Clone, Debug)]
pub struct ManinSystem {
    level: u32,
    kind: ManinKind,
    reps: Vec<(u32, u32)>,
    /// `(c,d) ↦ (column, sign)`; pairs forced to vanish are absent.
    lookup: HashMap<(u32, u32), (usize, i64)>,
    matrix: SparseMatrix,
}

fn gcd3(c: u32, d: u32, n: u32) -> u32 {
    num_integer::gcd(num_integer::gcd(c, d), n)
}

impl ManinSystem {
    fn generators(level: u32, kind: ManinKind) -> (Vec<(u32, u32)>, HashMap<(u32, u32), (usize, i64)>) {
        let n = level;
        let neg = |x: u32| (n - x) % n;
        let mut reps = Vec::new();
        let mut lookup = HashMap::new();
        let mut seen: HashMap<(u32, u32), ()> = HashMap::new();
        for c in 0..n.max(1) {
            for d in 0..n.max(1) {
                if gcd3(c, d, n) != 1 || seen.contains_key(&(c, d)) {
                    continue;
                }
                // orbit with signs relative to (c,d)
                let mut orbit: HashMap<(u32, u32), i64> = HashMap::from([((c, d), 1)]);
                let mut stack = vec![(c, d)];
                let mut zero = false;
                while let Some(v) = stack.pop() {
                    let s = orbit[&v];
                    let mut moves = vec![((v.1, neg(v.0)), -s)];
                    if kind == ManinKind::Minus {
                        moves.push(((v.1, v.0), s));
                    }
                    for (w, sw) in moves {
                        match orbit.get(&w) {
                            Some(&old) if old != sw => zero = true,
                            Some(_) => {}
                            None => {
                                orbit.insert(w, sw);
                                stack.push(w);
                            }
                        }
                    }
                }
                for &w in orbit.keys() {
                    seen.insert(w, ());
                }
                if zero {
                    continue;
                }
                let rep = *orbit.keys().min().expect("nonempty orbit");
                let rs = orbit[&rep];
                let col = reps.len();
                reps.push(rep);
                for (&w, &s) in &orbit {
                    lookup.insert(w, (col, s * rs));
                }
            }
        }
        (reps, lookup)
    }

    fn build(level: u32, kind: ManinKind, three: ThreeTerm) -> Result<Self> {
        if level == 0 {
            return Err(Error::InvalidGroup("level must be positive".into()));
        }
        let (reps, lookup) = Self::generators(level, kind);
        let n = level;
        let m = |x: i64| x.rem_euclid(n as i64) as u32;
        let mut matrix = SparseMatrix::new(reps.len());
        for c in 0..n {
            for d in 0..n {
                if gcd3(c, d, n) != 1 {
                    continue;
                }
                let (ci, di) = (c as i64, d as i64);
                let terms: [((u32, u32), i64); 3] = match (kind, three) {
                    (ManinKind::Full, _) => [((c, d), 1), ((d, m(-ci - di)), 1), ((m(-ci - di), c), 1)],
                    (ManinKind::Minus, ThreeTerm::Vector) => [((c, d), 1), ((c, m(di - ci)), -1), ((m(ci - di), d), -1)],
                    (ManinKind::Minus, ThreeTerm::Covector) => [((c, d), 1), ((m(ci + di), d), -1), ((c, m(ci + di)), -1)],
                };
                let row: Vec<(u32, i64)> = terms
                    .iter()
                    .filter_map(|&(pair, coef)| lookup.get(&pair).map(|&(col, s)| (col as u32, s * coef)))
                    .collect();
                let row = normalize_row(row);
                if !row.is_empty() {
                    let narrow: Vec<(u32, i32)> = row.into_iter().map(|(c, v)| (c, v as i32)).collect();
                    matrix.push_row(&narrow)?;
                }
            }
        }
        let matrix = matrix.dedup_rows();
        Ok(ManinSystem { level, kind, reps, lookup, matrix })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn kind(&self) -> ManinKind {
        self.kind
    }

    pub fn ncols(&self) -> usize {
        self.reps.len()
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn representative(&self, col: usize) -> (u32, u32) {
        self.reps[col]
    }

    /// Column and sign of `(c, d)`, or `None` if the symbol vanishes.
    pub fn locate(&self, c: u32, d: u32) -> Option<(usize, i64)> {
        let n = self.level;
        self.lookup.get(&(c % n, d % n)).copied()
    }
}

/// Presentation of the weight-2 modular symbols for `Γ₁(N)`.
pub fn build_manin_system(level: u32) -> Result<ManinSystem> {
    ManinSystem::build(level, ManinKind::Full, ThreeTerm::Vector)
}

/// Presentation of the `ι`-minus part, with either three-term relation.
pub fn build_manin_minus_system(level: u32, three: ThreeTerm) -> Result<ManinSystem> {
    ManinSystem::build(level, ManinKind::Minus, three)
}

/// Number of cusps `C(N)` and of cusps fixed by the involution `C₂(N)`.
pub fn cusp_counts(level: u32) -> (u64, u64) {
    match level {
        0 | 1 => (1, 1),
        2 => (2, 2),
        3 => (2, 2),
        4 => (3, 3),
        n => {
            let n64 = n as u64;
            let c: u64 = divisors(n).iter().map(|&d| euler_phi(d as u64) * euler_phi(n64 / d as u64)).sum::<u64>() / 2;
            let c2 = if n % 2 == 0 { euler_phi(n64) + euler_phi(n64 / 2) } else { euler_phi(n64) };
            (c, c2)
        }
    }
}

/// `g(p) = (p-5)(p-7)/24` for primes `p ≥ 5`.
pub fn genus_prime(p: u64) -> u64 {
    (p - 5) * (p - 7) / 24
}

/// Conjectural `dim M_2(Z/N) ⊗ Q = g + ½ Σ_{d|N, d≥3} φ(d)φ(N/d)`.
pub fn hypothetical_m2_dim(level: u32, genus: u64) -> u64 {
    let n = level as u64;
    genus + divisors(level).iter().filter(|&&d| d >= 3).map(|&d| euler_phi(d as u64) * euler_phi(n / d as u64)).sum::<u64>() / 2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModsymReport {
    pub level: u32,
    pub dim: usize,
    pub dim_minus: usize,
    pub cusps: u64,
    pub cusps_fixed: u64,
    /// `(dim - C + 1)/2` when this is a nonnegative integer.
    pub genus: Option<u64>,
    /// `dim_minus = g + (C - C₂)/2` with the derived genus.
    pub minus_formula_holds: bool,
    pub ranks: Vec<RankReport>,
}

pub fn modsym_report(level: u32, primes: &[u32]) -> Result<ModsymReport> {
    let full = build_manin_system(level)?;
    let minus = build_manin_minus_system(level, ThreeTerm::Vector)?;
    let rf = rank_q(full.matrix(), primes)?;
    let rm = rank_q(minus.matrix(), primes)?;
    let (c, c2) = cusp_counts(level);
    let dim = rf.corank();
    let dim_minus = rm.corank();
    let twice = dim as i64 - c as i64 + 1;
    let genus = (twice >= 0 && twice % 2 == 0).then_some(twice as u64 / 2);
    let minus_formula_holds = genus.is_some_and(|g| (c - c2) % 2 == 0 && dim_minus as u64 == g + (c - c2) / 2);
    Ok(ModsymReport { level, dim, dim_minus, cusps: c, cusps_fixed: c2, genus, minus_formula_holds, ranks: vec![rf, rm] })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub level: u32,
    pub dim_symbols: usize,
    pub dim_manin_minus: usize,
    /// Relations of `M⁻_2(Z/N)` map into the Manin relation span.
    pub forward: bool,
    /// Manin minus relations map into the `M⁻_2(Z/N)` relation span.
    pub backward: bool,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.forward && self.backward && self.dim_symbols == self.dim_manin_minus
    }
}

/// Compares `M⁻_2(Z/N)` with the Manin minus space through
/// `⟨a₁,a₂⟩⁻ ↦ (a₁,a₂)⁻` and back, modulo each prime.
pub fn compare_with_symbol_group(level: u32, primes: &[u32]) -> Result<ComparisonReport> {
    if primes.is_empty() {
        return Err(Error::EmptyPrimeList);
    }
    let g = AbelianGroup::cyclic(level)?;
    let sym = build_relations(&g, 2, Flavor::Mminus, &full_kset(2))?;
    let man = build_manin_minus_system(level, ThreeTerm::Vector)?;
    let idx: &SymbolIndex = sym.index();
    let to_manin: Vec<SymbolVector> = (0..idx.len())
        .map(|c| {
            let (a, b) = (idx.codes(c)[0], idx.codes(c)[1]);
            let mut v = SymbolVector::new();
            if let Some((col, s)) = man.locate(a, b) {
                v.add_term(col, s);
            }
            v
        })
        .collect();
    let to_symbols: Vec<SymbolVector> = (0..man.ncols())
        .map(|c| {
            let (a, b) = man.representative(c);
            let mut v = SymbolVector::new();
            let mut codes: crate::symbol::Codes = [a, b].into_iter().collect();
            v.add_codes(idx, &mut codes, 1);
            v
        })
        .collect();
    let apply = |images: &[SymbolVector], cols: &[u32], vals: &[i32]| {
        let mut out = SymbolVector::new();
        for (&c, &x) in cols.iter().zip(vals) {
            out.add_vector(&images[c as usize], x as i64);
        }
        out
    };
    let mut forward = true;
    let mut backward = true;
    let mut dim_symbols = 0;
    let mut dim_manin_minus = 0;
    for &p in primes {
        let es = Elimination::new(sym.matrix(), p)?;
        let em = Elimination::new(man.matrix(), p)?;
        dim_symbols = dim_symbols.max(es.quotient_dim());
        dim_manin_minus = dim_manin_minus.max(em.quotient_dim());
        forward &= sym.matrix().rows().all(|(c, v)| em.contains(&vec_mod_p(apply(&to_manin, c, v).iter(), p)));
        backward &= man.matrix().rows().all(|(c, v)| es.contains(&vec_mod_p(apply(&to_symbols, c, v).iter(), p)));
    }
    Ok(ComparisonReport { level, dim_symbols, dim_manin_minus, forward, backward })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PRIMES: [u32; 2] = [1_000_003, 998_244_353];

    #[test]
    fn cusp_formulas() {
        assert_eq!(cusp_counts(12), (10, 6));
        assert_eq!(cusp_counts(3), (2, 2));
        assert_eq!(cusp_counts(11), (10, 10));
        assert_eq!(cusp_counts(1), (1, 1));
    }

    #[test]
    fn small_levels() {
        // 2g + C - 1 with g = 0 and C = 1
        let r = modsym_report(1, &PRIMES).unwrap();
        assert_eq!((r.dim, r.genus), (0, Some(0)));
        let r = modsym_report(11, &PRIMES).unwrap();
        assert_eq!((r.dim, r.dim_minus, r.genus), (11, 1, Some(1)));
        let r = modsym_report(4, &PRIMES).unwrap();
        assert_eq!(r.dim_minus, 0);
    }

    #[test]
    fn orbit_signs() {
        let m = build_manin_system(7).unwrap();
        let (c, s) = m.locate(1, 2).unwrap();
        // (1,2) = -(2,-1)
        assert_eq!(m.locate(2, 6).unwrap(), (c, -s));
        assert_eq!(m.locate(6, 5).unwrap(), (c, s));
        let minus = build_manin_minus_system(7, ThreeTerm::Vector).unwrap();
        let (c, s) = minus.locate(1, 2).unwrap();
        assert_eq!(minus.locate(2, 1).unwrap(), (c, s));
        assert!(minus.locate(3, 0).is_none());
    }
}
