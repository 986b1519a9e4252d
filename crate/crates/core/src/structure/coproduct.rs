//! Multiplication `∇` and co-multiplication `Δ`, `Δ⁻` for cyclic groups,
//! and the primitive parts they cut out.
//!
//! For `G = Z/N` and `d | N`, the subgroup `G′` has order `d` and
//! `G″ = G/G′` has order `N/d`. On characters, `A″ ⊂ A` is `d·Z/N`,
//! identified with `Z/(N/d)` by `d·x ↔ x`, and `A′ = A/A″ = Z/d` by
//! reduction mod `d`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{divisors, AbelianGroup, Code};
use crate::linalg::modp::{vec_mod_p, Elimination, ModRow};
use crate::relations::{full_kset, SymbolVector};
use crate::structure::LinearMap;
use crate::symbol::{Codes, Flavor, SymbolIndex};

/// The exact sequence `0 → G′ → Z/N → G″ → 0` with `|G′| = d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubquotientDatum {
    pub order: u32,
    pub d: u32,
}

impl SubquotientDatum {
    pub fn new(order: u32, d: u32) -> Result<Self> {
        if order == 0 || d == 0 || order % d != 0 {
            return Err(Error::InvalidGroup(format!("{d} does not divide {order}")));
        }
        Ok(SubquotientDatum { order, d })
    }

    /// Character group `A′ = Z/d` of `G′`.
    pub fn sub_group(&self) -> AbelianGroup {
        AbelianGroup::cyclic(self.d).expect("positive order")
    }

    /// Character group `A″ ≅ Z/(N/d)` of `G″`.
    pub fn quotient_group(&self) -> AbelianGroup {
        AbelianGroup::cyclic(self.order / self.d).expect("positive order")
    }

    pub fn in_a2(&self, a: Code) -> bool {
        a % self.d == 0
    }

    /// `d·x ↦ x`.
    pub fn to_quotient(&self, a: Code) -> Code {
        a / self.d
    }

    /// `x ↦ d·x`.
    pub fn from_quotient(&self, x: Code) -> Code {
        x * self.d
    }

    /// Reduction `A → A′`.
    pub fn to_sub(&self, a: Code) -> Code {
        a % self.d
    }
}

fn cyclic_order(group: &AbelianGroup) -> Result<u32> {
    group.as_cyclic().ok_or_else(|| Error::Unsupported("structure maps are implemented for cyclic groups".into()))
}

/// A map between the symbols of one index and pairs of symbols of two
/// others; pair `(l, r)` has flat position `l·right.len() + r`.
#[derive(Clone, Debug)]
pub struct TensorMap {
    pub single: SymbolIndex,
    pub left: SymbolIndex,
    pub right: SymbolIndex,
    pub map: LinearMap,
}

impl TensorMap {
    pub fn pair_position(&self, l: usize, r: usize) -> usize {
        l * self.right.len() + r
    }

    pub fn split(&self, pos: usize) -> (usize, usize) {
        (pos / self.right.len(), pos % self.right.len())
    }
}

/// `Δ: M_n(G) → M_{n′}(G′) ⊗ M⁻_{n″}(G″)` or `Δ⁻` with both factors minus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DeltaVariant {
    Delta,
    DeltaMinus,
}

impl DeltaVariant {
    fn source_flavor(self) -> Flavor {
        match self {
            DeltaVariant::Delta => Flavor::M,
            DeltaVariant::DeltaMinus => Flavor::Mminus,
        }
    }
}

fn for_each_subset(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(n, k, i + 1, cur, f);
            cur.pop();
        }
    }
    rec(n, k, 0, &mut Vec::with_capacity(k), f);
}

/// Terms `((left column, right column), coefficient)` of `Δ(⟨codes⟩)`.
fn delta_terms(datum: &SubquotientDatum, codes: &[Code], n2: usize, left: &SymbolIndex, right: &SymbolIndex) -> Vec<(usize, usize, i64)> {
    let n = codes.len();
    let qg = right.group();
    let mut out = Vec::new();
    for_each_subset(n, n2, &mut |idx2| {
        if !idx2.iter().all(|&j| datum.in_a2(codes[j])) {
            return;
        }
        let mut r: Codes = idx2.iter().map(|&j| datum.to_quotient(codes[j])).collect();
        if !qg.spans_codes(&r) {
            return;
        }
        let mut l: Codes = (0..n).filter(|i| !idx2.contains(i)).map(|i| datum.to_sub(codes[i])).collect();
        if let (Some((cl, sl)), Some((cr, sr))) = (left.locate(&mut l), right.locate(&mut r)) {
            out.push((cl, cr, (sl * sr) as i64));
        }
    });
    out
}

/// One-step co-multiplication for `G = Z/N` and `|G′| = d`.
pub fn delta_map(group: &AbelianGroup, d: u32, n1: usize, n2: usize, variant: DeltaVariant) -> Result<TensorMap> {
    let order = cyclic_order(group)?;
    let datum = SubquotientDatum::new(order, d)?;
    if d == order {
        return Err(Error::InvalidGroup("G″ must be nontrivial".into()));
    }
    if n1 == 0 || n2 == 0 {
        return Err(Error::WrongArity { expected: 1, got: 0 });
    }
    let flavor = variant.source_flavor();
    let single = SymbolIndex::enumerate(group, n1 + n2, flavor)?;
    let left = SymbolIndex::enumerate(&datum.sub_group(), n1, flavor)?;
    let right = SymbolIndex::enumerate(&datum.quotient_group(), n2, Flavor::Mminus)?;
    let width = right.len();
    let images = (0..single.len())
        .map(|c| {
            let mut v = SymbolVector::new();
            for (l, r, x) in delta_terms(&datum, single.codes(c), n2, &left, &right) {
                v.add_term(l * width + r, x);
            }
            v
        })
        .collect();
    let map = LinearMap { source_len: single.len(), target_len: left.len() * width, images };
    Ok(TensorMap { single, left, right, map })
}

/// `∇(⟨l⟩ ⊗ ⟨r⟩)`: sum over all lifts of the entries of `l` to `Z/N`,
/// with the entries of `r` embedded as multiples of `d`.
fn nabla_pair(datum: &SubquotientDatum, l: &[Code], r: &[Code], target: &SymbolIndex) -> SymbolVector {
    let step = datum.order / datum.d;
    let n1 = l.len();
    let mut v = SymbolVector::new();
    let total = (step as u64).pow(n1 as u32);
    let mut t: Codes = Codes::new();
    for mut code in 0..total {
        t.clear();
        for &a in l {
            let k = (code % step as u64) as u32;
            code /= step as u64;
            t.push(a + datum.d * k);
        }
        t.extend(r.iter().map(|&x| datum.from_quotient(x)));
        debug_assert!(target.group().spans_codes(&t));
        v.add_codes(target, &mut t, 1);
    }
    v
}

/// One-step multiplication; `flavor` is `M` for `∇` and `Mminus` for `∇⁻`.
pub fn nabla_map(group: &AbelianGroup, d: u32, n1: usize, n2: usize, flavor: Flavor) -> Result<TensorMap> {
    let order = cyclic_order(group)?;
    let datum = SubquotientDatum::new(order, d)?;
    if !matches!(flavor, Flavor::M | Flavor::Mminus) {
        return Err(Error::Unsupported(format!("∇ on {flavor}")));
    }
    let single = SymbolIndex::enumerate(group, n1 + n2, flavor)?;
    let left = SymbolIndex::enumerate(&datum.sub_group(), n1, flavor)?;
    let right = SymbolIndex::enumerate(&datum.quotient_group(), n2, flavor)?;
    let mut images = Vec::with_capacity(left.len() * right.len());
    for l in 0..left.len() {
        for r in 0..right.len() {
            images.push(nabla_pair(&datum, left.codes(l), right.codes(r), &single));
        }
    }
    let map = LinearMap { source_len: images.len(), target_len: single.len(), images };
    Ok(TensorMap { single, left, right, map })
}

/// Quotient by the full relation system modulo a prime, with coordinates
/// of every symbol in the basis of free columns.
struct Quotient {
    elim: Elimination,
    coords: Vec<Vec<u32>>,
}

impl Quotient {
    fn build(index: SymbolIndex, p: u32) -> Result<Self> {
        let n = index.n();
        let rel = crate::relations::build_on_index(index, &full_kset(n))?;
        let elim = Elimination::new(rel.matrix(), p)?;
        let units: Vec<ModRow> = (0..rel.ncols()).map(|c| vec![(c as u32, 1)]).collect();
        let coords = elim.reduce_many(&units);
        Ok(Quotient { elim, coords })
    }

    fn dim(&self) -> usize {
        self.elim.quotient_dim()
    }
}

type QuotientCache = HashMap<(u32, usize, Flavor), Quotient>;

fn quotient<'a>(cache: &'a mut QuotientCache, order: u32, n: usize, flavor: Flavor, p: u32) -> Result<&'a Quotient> {
    if !cache.contains_key(&(order, n, flavor)) {
        let g = AbelianGroup::cyclic(order)?;
        let q = Quotient::build(SymbolIndex::enumerate(&g, n, flavor)?, p)?;
        cache.insert((order, n, flavor), q);
    }
    Ok(&cache[&(order, n, flavor)])
}

fn admissible_divisors(order: u32, flavor: Flavor) -> Vec<u32> {
    divisors(order)
        .into_iter()
        .filter(|&d| d < order && (flavor == Flavor::M || d > 1))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveReport {
    pub order: u32,
    pub n: usize,
    pub variant: Flavor,
    /// Dimension of the ambient quotient per prime.
    pub quotient_dims: Vec<usize>,
    pub per_prime: Vec<(u32, usize)>,
    pub dim: usize,
    pub agree: bool,
}

fn summarize(order: u32, n: usize, variant: Flavor, quotient_dims: Vec<usize>, per_prime: Vec<(u32, usize)>) -> PrimitiveReport {
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for &(_, d) in &per_prime {
        *counts.entry(d).or_default() += 1;
    }
    let dim = counts.iter().max_by_key(|&(d, c)| (*c, std::cmp::Reverse(*d))).map_or(0, |(&d, _)| d);
    let agree = counts.len() <= 1;
    PrimitiveReport { order, n, variant, quotient_dims, per_prime, dim, agree }
}

fn check_variant(variant: Flavor) -> Result<()> {
    if matches!(variant, Flavor::M | Flavor::Mminus) {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("primitive part of {variant}")))
    }
}

/// Dimension of the common kernel of all one-step co-multiplications on
/// `M_n(Z/N)` (`variant = M`, `G′` may be trivial) or `M⁻_n(Z/N)`
/// (`variant = Mminus`, `G′` nontrivial).
pub fn primitive_dim(group: &AbelianGroup, n: usize, variant: Flavor, primes: &[u32]) -> Result<PrimitiveReport> {
    let order = cyclic_order(group)?;
    check_variant(variant)?;
    if primes.is_empty() {
        return Err(Error::EmptyPrimeList);
    }
    let mut per_prime = Vec::new();
    let mut quotient_dims = Vec::new();
    for &p in primes {
        let mut cache = QuotientCache::new();
        let source = quotient(&mut cache, order, n, variant, p)?;
        let k = source.dim();
        let free: Vec<usize> = source.elim.free_columns().iter().map(|&c| c as usize).collect();
        let src_index = SymbolIndex::enumerate(group, n, variant)?;
        quotient_dims.push(k);
        let mut rows: Vec<Vec<(u32, u32)>> = vec![Vec::new(); k];
        let mut offset = 0usize;
        for d in admissible_divisors(order, variant) {
            let datum = SubquotientDatum::new(order, d)?;
            for n1 in 1..n {
                let n2 = n - n1;
                let left = SymbolIndex::enumerate(&datum.sub_group(), n1, variant)?;
                let right = SymbolIndex::enumerate(&datum.quotient_group(), n2, Flavor::Mminus)?;
                quotient(&mut cache, d, n1, variant, p)?;
                quotient(&mut cache, order / d, n2, Flavor::Mminus, p)?;
                let ql = &cache[&(d, n1, variant)];
                let qr = &cache[&(order / d, n2, Flavor::Mminus)];
                let (kl, kr) = (ql.dim(), qr.dim());
                if kl == 0 || kr == 0 {
                    continue;
                }
                for (row, &f) in rows.iter_mut().zip(&free) {
                    let mut block = vec![0u64; kl * kr];
                    for (l, r, x) in delta_terms(&datum, src_index.codes(f), n2, &left, &right) {
                        let x = x.rem_euclid(p as i64) as u64;
                        for (i, &u) in ql.coords[l].iter().enumerate() {
                            if u == 0 {
                                continue;
                            }
                            let ux = u as u64 * x % p as u64;
                            for (j, &w) in qr.coords[r].iter().enumerate() {
                                let e = &mut block[i * kr + j];
                                *e = (*e + ux * w as u64) % p as u64;
                            }
                        }
                    }
                    row.extend(block.iter().enumerate().filter(|(_, &x)| x != 0).map(|(i, &x)| ((offset + i) as u32, x as u32)));
                }
                offset += kl * kr;
            }
        }
        let rank = Elimination::from_mod_rows(rows, offset, p, &Default::default()).rank();
        per_prime.push((p, k - rank));
    }
    Ok(summarize(order, n, variant, quotient_dims, per_prime))
}

/// Dimension of the cokernel of the sum of all one-step multiplications
/// into `M⁻_n(Z/N)` (or `M_n(Z/N)`), over the same subgroup range as
/// [`primitive_dim`].
pub fn coprimitive_dim(group: &AbelianGroup, n: usize, variant: Flavor, primes: &[u32]) -> Result<PrimitiveReport> {
    let order = cyclic_order(group)?;
    check_variant(variant)?;
    if primes.is_empty() {
        return Err(Error::EmptyPrimeList);
    }
    let mut per_prime = Vec::new();
    let mut quotient_dims = Vec::new();
    for &p in primes {
        let mut cache = QuotientCache::new();
        let k = quotient(&mut cache, order, n, variant, p)?.dim();
        quotient_dims.push(k);
        let target = SymbolIndex::enumerate(group, n, variant)?;
        let mut images: Vec<ModRow> = Vec::new();
        for d in admissible_divisors(order, variant) {
            let datum = SubquotientDatum::new(order, d)?;
            for n1 in 1..n {
                let n2 = n - n1;
                let left = SymbolIndex::enumerate(&datum.sub_group(), n1, variant)?;
                let right = SymbolIndex::enumerate(&datum.quotient_group(), n2, variant)?;
                let fl: Vec<u32> = quotient(&mut cache, d, n1, variant, p)?.elim.free_columns().to_vec();
                let fr: Vec<u32> = quotient(&mut cache, order / d, n2, variant, p)?.elim.free_columns().to_vec();
                for &l in &fl {
                    for &r in &fr {
                        let v = nabla_pair(&datum, left.codes(l as usize), right.codes(r as usize), &target);
                        images.push(vec_mod_p(v.iter(), p));
                    }
                }
            }
        }
        let src = &cache[&(order, n, variant)];
        let reduced = src.elim.reduce_many(&images);
        let rows: Vec<ModRow> = reduced
            .iter()
            .map(|r| r.iter().enumerate().filter(|(_, &x)| x != 0).map(|(i, &x)| (i as u32, x)).collect())
            .collect();
        let rank = Elimination::from_mod_rows(rows, k, p, &Default::default()).rank();
        per_prime.push((p, k - rank));
    }
    Ok(summarize(order, n, variant, quotient_dims, per_prime))
}

/// Value on a tuple over `Z/3^{m-1}` of the functional obtained by
/// iterating `Δ` down the flag `0 ⊂ Z/3 ⊂ … ⊂ Z/3^{m-1}` and pairing with
/// `⟨0⟩ ↦ 1` on `M_1(Z/1)` and `⟨±1⟩⁻ ↦ ±1` on `M⁻_1(Z/3)`.
fn phi(m: usize, tuple: &[u32]) -> i64 {
    if m == 1 {
        return 1;
    }
    let d = 3u32.pow(m as u32 - 2);
    let mut total = 0;
    for j in 0..m {
        let a = tuple[j];
        if a % d != 0 {
            continue;
        }
        let sign = match (a / d) % 3 {
            0 => continue,
            1 => 1,
            _ => -1,
        };
        let rest: Vec<u32> = (0..m).filter(|&i| i != j).map(|i| tuple[i] % d).collect();
        total += sign * phi(m - 1, &rest);
    }
    total
}

/// The functional above as a vector over the symbols of `M_n(Z/3^{n-1})`.
pub fn explicit_functional(n: usize) -> Result<(SymbolIndex, Vec<i64>)> {
    if n == 0 {
        return Err(Error::WrongArity { expected: 1, got: 0 });
    }
    let g = AbelianGroup::cyclic(3u32.pow(n as u32 - 1))?;
    let index = SymbolIndex::enumerate(&g, n, Flavor::M)?;
    let values = (0..index.len()).map(|c| phi(n, index.codes(c))).collect();
    Ok((index, values))
}
