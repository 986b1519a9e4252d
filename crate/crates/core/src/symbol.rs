//! Canonical symbols `[a_1,...,a_n]` / `<a_1,...,a_n>` and deterministic
//! symbol enumeration.
//!
//! A symbol is a multiset of `n` characters that generates the character
//! group. The canonical representative is the sorted tuple of element codes
//! (lexicographic on residue vectors). For the anti-symmetric flavor
//! `Mminus` each entry may additionally be replaced by its negative at the
//! cost of a sign, and the representative takes `min(a, -a)` entrywise.
//! Symbols containing a 2-torsion entry (including 0) are equal to their own
//! negatives there; they are 2-torsion and are dropped unless the index is
//! built for characteristic 2.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::group::{AbelianGroup, Code, GroupElement};

pub type Codes = SmallVec<[Code; 8]>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum Flavor {
    /// Birational symbols `[a_1..a_n]`, relation (B).
    B,
    /// Modular symbols `<a_1..a_n>`, relation (M).
    M,
    /// Co-vector symbols `<a_1..a_n>*`.
    Mstar,
    /// Quotient of `M` by `<-a_1, a_2, ...> = -<a_1, a_2, ...>`.
    Mminus,
}

impl Flavor {
    pub fn name(self) -> &'static str {
        match self {
            Flavor::B => "B",
            Flavor::M => "M",
            Flavor::Mstar => "Mstar",
            Flavor::Mminus => "Mminus",
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Flavor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "B" | "b" => Ok(Flavor::B),
            "M" | "m" => Ok(Flavor::M),
            "Mstar" | "mstar" | "M*" => Ok(Flavor::Mstar),
            "Mminus" | "mminus" | "M-" => Ok(Flavor::Mminus),
            _ => Err(Error::Unsupported(format!("unknown flavor {s:?}"))),
        }
    }
}

/// A canonical symbol. `sign` is only meaningful for `Mminus`: it is 0 for a
/// self-negating symbol and 1 otherwise.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    flavor: Flavor,
    entries: Codes,
    sign: i8,
}

impl Symbol {
    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn codes(&self) -> &[Code] {
        &self.entries
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn entries(&self, group: &AbelianGroup) -> Vec<GroupElement> {
        self.entries.iter().map(|&c| group.decode(c)).collect()
    }

    pub fn arity(&self) -> usize {
        self.entries.len()
    }

    /// Text form: entries separated by `;`, residues within an entry by `,`.
    pub fn to_text(&self, group: &AbelianGroup) -> String {
        self.entries.iter().map(|&c| group.decode(c).to_string()).collect::<Vec<_>>().join(";")
    }
}

/// Sorts `codes` into canonical order in place and returns
/// `(flip parity sign, self_negating)`. For flavors other than `Mminus` the
/// result is always `(1, false)`.
#[inline]
pub fn canonicalize_codes(group: &AbelianGroup, codes: &mut [Code], flavor: Flavor) -> (i8, bool) {
    let mut sign = 1i8;
    let mut self_neg = false;
    if flavor == Flavor::Mminus {
        for c in codes.iter_mut() {
            let m = group.neg(*c);
            if m < *c {
                *c = m;
                sign = -sign;
            } else if m == *c {
                self_neg = true;
            }
        }
    }
    codes.sort_unstable();
    (sign, self_neg)
}

/// Canonical representative of a tuple together with its coefficient:
/// `+1` for B/M/Mstar; for Mminus the flip parity, or 0 when the symbol is
/// identified with its own negative.
pub fn canonicalize(group: &AbelianGroup, tuple: &[GroupElement], n: usize, flavor: Flavor) -> Result<(Symbol, i8)> {
    if tuple.len() != n {
        return Err(Error::WrongArity { expected: n, got: tuple.len() });
    }
    let mut codes: Codes = tuple.iter().map(|e| group.encode(e)).collect::<Result<_>>()?;
    if !group.spans_codes(&codes) {
        return Err(Error::SpanFailure);
    }
    let (sign, self_neg) = canonicalize_codes(group, &mut codes, flavor);
    let coef = if self_neg { 0 } else { sign };
    let sym_sign = if flavor == Flavor::Mminus && self_neg { 0 } else { 1 };
    Ok((Symbol { flavor, entries: codes, sign: sym_sign }, coef))
}

/// Packs a sorted code tuple into a hash key.
#[derive(Clone, Copy, Debug)]
pub(crate) struct KeyPacker {
    bits: u32,
}

impl KeyPacker {
    fn new(group: &AbelianGroup, n: usize) -> Result<Self> {
        let bits = 32 - (group.order().max(2) - 1).leading_zeros();
        if bits as usize * n > 128 {
            return Err(Error::Unsupported(format!("symbol key too wide: n={n}, |G|={}", group.order())));
        }
        Ok(KeyPacker { bits })
    }

    #[inline]
    fn pack(&self, codes: &[Code]) -> u128 {
        let mut k = 0u128;
        for &c in codes {
            k = (k << self.bits) | c as u128;
        }
        k
    }
}

/// Bijection between canonical symbols of `(G, n, flavor)` and column indices.
#[derive(Clone, Debug)]
pub struct SymbolIndex {
    group: AbelianGroup,
    n: usize,
    flavor: Flavor,
    keep_self_negating: bool,
    symbols: Vec<Codes>,
    lookup: FxHashMap<u128, u32>,
    packer: KeyPacker,
    self_negating: usize,
}

impl SymbolIndex {
    /// All canonical symbols, lexicographically ordered by sorted code tuple.
    pub fn enumerate(group: &AbelianGroup, n: usize, flavor: Flavor) -> Result<Self> {
        Self::build(group, n, flavor, false)
    }

    /// Like [`SymbolIndex::enumerate`], but for `Mminus` keeps self-negating
    /// symbols as ordinary columns (for computations over `F_2`).
    pub fn enumerate_keep_self_negating(group: &AbelianGroup, n: usize, flavor: Flavor) -> Result<Self> {
        Self::build(group, n, flavor, true)
    }

    fn build(group: &AbelianGroup, n: usize, flavor: Flavor, keep: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::WrongArity { expected: 1, got: 0 });
        }
        let packer = KeyPacker::new(group, n)?;
        // allowed entries, ascending
        let allowed: Vec<Code> = match flavor {
            Flavor::Mminus => group.codes().filter(|&c| group.neg(c) >= c).filter(|&c| keep || !group.is_two_torsion(c)).collect(),
            _ => group.codes().collect(),
        };
        let symbols = spanning_multisets(group, n, &allowed);
        let self_negating = if flavor == Flavor::Mminus {
            symbols.iter().filter(|s| s.iter().any(|&c| group.is_two_torsion(c))).count()
        } else {
            0
        };
        let mut lookup = FxHashMap::default();
        lookup.reserve(symbols.len());
        for (i, s) in symbols.iter().enumerate() {
            lookup.insert(packer.pack(s), i as u32);
        }
        Ok(SymbolIndex {
            group: group.clone(),
            n,
            flavor,
            keep_self_negating: keep,
            symbols,
            lookup,
            packer,
            self_negating,
        })
    }

    pub fn group(&self) -> &AbelianGroup {
        &self.group
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Whether self-negating `Mminus` symbols are kept as columns.
    pub fn keeps_self_negating(&self) -> bool {
        self.keep_self_negating
    }

    /// Number of self-negating symbols present as columns.
    pub fn self_negating_count(&self) -> usize {
        self.self_negating
    }

    pub fn codes(&self, col: usize) -> &[Code] {
        &self.symbols[col]
    }

    pub fn symbol(&self, col: usize) -> Symbol {
        let entries = self.symbols[col].clone();
        let sign = if self.flavor == Flavor::Mminus && entries.iter().any(|&c| self.group.is_two_torsion(c)) { 0 } else { 1 };
        Symbol { flavor: self.flavor, entries, sign }
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Code]> + '_ {
        self.symbols.iter().map(|s| s.as_slice())
    }

    /// Column of an already canonical code tuple.
    #[inline]
    pub fn column_of_canonical(&self, codes: &[Code]) -> Option<usize> {
        self.lookup.get(&self.packer.pack(codes)).map(|&i| i as usize)
    }

    pub fn column_of(&self, symbol: &Symbol) -> Option<usize> {
        if symbol.flavor != self.flavor || symbol.arity() != self.n {
            return None;
        }
        self.column_of_canonical(&symbol.entries)
    }

    /// Canonicalizes `codes` in place and returns `(column, coefficient)`,
    /// or `None` when the term vanishes (a dropped self-negating symbol).
    /// Panics if a spanning tuple has no column, which would be a bug.
    #[inline]
    pub fn locate(&self, codes: &mut [Code]) -> Option<(usize, i32)> {
        let (sign, self_neg) = canonicalize_codes(&self.group, codes, self.flavor);
        if self_neg && !self.keep_self_negating {
            return None;
        }
        match self.column_of_canonical(codes) {
            Some(c) => Some((c, sign as i32)),
            None => {
                debug_assert!(!self.group.spans_codes(codes), "spanning tuple {codes:?} missing from index");
                None
            }
        }
    }

    /// Column and coefficient for a tuple of group elements, validated.
    pub fn locate_tuple(&self, tuple: &[GroupElement]) -> Result<Option<(usize, i32)>> {
        if tuple.len() != self.n {
            return Err(Error::WrongArity { expected: self.n, got: tuple.len() });
        }
        let mut codes: Codes = tuple.iter().map(|e| self.group.encode(e)).collect::<Result<_>>()?;
        if !self.group.spans_codes(&codes) {
            return Err(Error::SpanFailure);
        }
        Ok(self.locate(&mut codes))
    }

    /// Writes one symbol per line in the text format.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        for col in 0..self.len() {
            writeln!(w, "{}", self.symbol(col).to_text(&self.group))?;
        }
        Ok(())
    }
}

/// All nondecreasing `n`-tuples over `allowed` (ascending) that generate the
/// group, in lexicographic order.
pub fn spanning_multisets(group: &AbelianGroup, n: usize, allowed: &[Code]) -> Vec<Codes> {
    let mut out = Vec::new();
    if allowed.is_empty() || n == 0 {
        return out;
    }
    let cyclic = group.as_cyclic();
    let mut idx = vec![0usize; n];
    loop {
        let codes: Codes = idx.iter().map(|&i| allowed[i]).collect();
        let spans = match cyclic {
            Some(m) => codes.iter().fold(m, |g, &c| num_integer::gcd(g, c)) == 1,
            None => group.spans_codes(&codes),
        };
        if spans {
            out.push(codes);
        }
        let mut pos = n;
        while pos > 0 && idx[pos - 1] == allowed.len() - 1 {
            pos -= 1;
        }
        if pos == 0 {
            break;
        }
        idx[pos - 1] += 1;
        let v = idx[pos - 1];
        for slot in idx.iter_mut().skip(pos) {
            *slot = v;
        }
    }
    out
}

/// Parses a symbol line (`1;4`, or `1,0;0,1` for two-factor groups).
pub fn parse_tuple(group: &AbelianGroup, line: &str) -> std::result::Result<Vec<GroupElement>, String> {
    let line = line.trim();
    let parts: Vec<&str> = if line.contains(';') || group.rank() > 1 {
        line.split(';').collect()
    } else {
        line.split(',').collect()
    };
    parts
        .iter()
        .map(|p| {
            let residues = p
                .split(',')
                .map(|x| x.trim().parse::<i64>().map_err(|e| format!("bad residue {x:?}: {e}")))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            group.element(&residues).map_err(|e| e.to_string())
        })
        .collect()
}

/// Reads a symbol list written by [`SymbolIndex::write_text`].
pub fn read_symbol_list<R: BufRead>(group: &AbelianGroup, n: usize, flavor: Flavor, r: R) -> Result<Vec<(Symbol, i8)>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let tuple = parse_tuple(group, &line).map_err(|msg| Error::Parse { line: i + 1, msg })?;
        out.push(canonicalize(group, &tuple, n, flavor)?);
    }
    Ok(out)
}
