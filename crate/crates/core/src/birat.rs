//! The class `β(X) ∈ B_n(G)` of fixed-locus data, and the local change of
//! that class under an equivariant blowup.

use std::collections::BTreeMap;
use std::io::BufRead;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{AbelianGroup, Code, GroupElement};
use crate::linalg::integer::{IntegerQuotient, Order};
use crate::relations::{RelationSystem, SymbolVector};
use crate::symbol::{parse_tuple, Codes, Flavor, SymbolIndex};

/// One fixed component: the characters of `G` on the normal-plus-tangent
/// space at a generic point, zeros for the tangent directions of the
/// component, and an optional birational-type label.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub label: Option<String>,
    pub codes: Vec<Code>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedLocusData {
    pub components: Vec<Component>,
}

impl FixedLocusData {
    pub fn from_tuples(group: &AbelianGroup, tuples: &[Vec<GroupElement>]) -> Result<Self> {
        let components = tuples
            .iter()
            .map(|t| Ok(Component { label: None, codes: t.iter().map(|e| group.encode(e)).collect::<Result<_>>()? }))
            .collect::<Result<_>>()?;
        Ok(FixedLocusData { components })
    }

    /// Reads `label? : a_1,…,a_n` lines; blank lines and `#` comments are skipped.
    pub fn parse<R: BufRead>(group: &AbelianGroup, reader: R) -> Result<Self> {
        let mut components = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let text = line.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let (label, tuple) = match text.split_once(':') {
                Some((l, t)) => {
                    let l = l.trim();
                    ((!l.is_empty()).then(|| l.to_string()), t)
                }
                None => (None, text),
            };
            let elems = parse_tuple(group, tuple).map_err(|msg| Error::Parse { line: i + 1, msg })?;
            let codes = elems.iter().map(|e| group.encode(e)).collect::<Result<_>>()?;
            components.push(Component { label, codes });
        }
        Ok(FixedLocusData { components })
    }
}

fn add_component(index: &SymbolIndex, codes: &[Code], coef: i64, v: &mut SymbolVector) -> Result<()> {
    if codes.len() != index.n() {
        return Err(Error::WrongArity { expected: index.n(), got: codes.len() });
    }
    if !index.group().spans_codes(codes) {
        return Err(Error::SpanFailure);
    }
    let mut c: Codes = codes.iter().copied().collect();
    v.add_codes(index, &mut c, coef);
    Ok(())
}

fn check_b_index(index: &SymbolIndex) -> Result<()> {
    if index.flavor() != Flavor::B {
        return Err(Error::IncompatibleIndex(format!("β lives in B_n, got {}", index.flavor())));
    }
    Ok(())
}

/// `β = Σ_α [a_{1,α}, …, a_{n,α}]`.
pub fn beta_class(data: &FixedLocusData, index: &SymbolIndex) -> Result<SymbolVector> {
    check_b_index(index)?;
    let mut v = SymbolVector::new();
    for comp in &data.components {
        add_component(index, &comp.codes, 1, &mut v)?;
    }
    Ok(v)
}

/// Classes per label, for the refined invariant.
pub fn beta_by_label(data: &FixedLocusData, index: &SymbolIndex) -> Result<BTreeMap<Option<String>, SymbolVector>> {
    check_b_index(index)?;
    let mut out: BTreeMap<Option<String>, SymbolVector> = BTreeMap::new();
    for comp in &data.components {
        add_component(index, &comp.codes, 1, out.entry(comp.label.clone()).or_default())?;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlowupCase {
    /// The center contains the fixed component near `Z`.
    I,
    /// The fixed component meets the center transversally in part.
    II,
    /// No weights normal to both: no new fixed components.
    III,
}

/// Local data of a blowup along `W` near a fixed component `Z ⊆ W^G`:
/// the spectrum `0^{d1} | 0^{d2} | b_1..b_{d3} | (a^i)^{κ_i}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlowupSpec {
    pub case: BlowupCase,
    pub d1: usize,
    pub d2: usize,
    pub b: Vec<Code>,
    /// Distinct nonzero characters with multiplicities.
    pub a: Vec<(Code, usize)>,
}

impl BlowupSpec {
    pub fn d3(&self) -> usize {
        self.b.len()
    }

    pub fn d4(&self) -> usize {
        self.a.iter().map(|&(_, k)| k).sum()
    }

    pub fn n(&self) -> usize {
        self.d1 + self.d2 + self.d3() + self.d4()
    }

    /// The tangent spectrum at a point of `Z`.
    pub fn spectrum(&self) -> Vec<Code> {
        let mut s = vec![0; self.d1 + self.d2];
        s.extend(&self.b);
        for &(a, k) in &self.a {
            s.extend(std::iter::repeat(a).take(k));
        }
        s
    }

    pub fn validate(&self, group: &AbelianGroup) -> Result<()> {
        let bad = |m: &str| Err(Error::MalformedSpec(m.to_string()));
        let (d1, d3, d4) = (self.d1, self.d3(), self.d4());
        let zero = group.zero();
        if self.b.iter().chain(self.a.iter().map(|(a, _)| a)).any(|&c| c >= group.order()) {
            return bad("character out of range");
        }
        if self.b.contains(&zero) || self.a.iter().any(|&(a, _)| a == zero) {
            return bad("characters b and a must be nonzero");
        }
        if self.a.iter().any(|&(_, k)| k == 0) {
            return bad("multiplicities must be positive");
        }
        let mut distinct: Vec<Code> = self.a.iter().map(|&(a, _)| a).collect();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() != self.a.len() {
            return bad("characters a^i must be pairwise distinct");
        }
        if d3 + d4 < 1 {
            return bad("d3 + d4 >= 1 is required");
        }
        if d1 + d4 < 2 {
            return bad("d1 + d4 >= 2 is required");
        }
        let consistent = match self.case {
            BlowupCase::I => d1 == 0 && d4 >= 2,
            BlowupCase::II => d1 >= 1 && d4 >= 1,
            BlowupCase::III => d1 >= 2 && d3 >= 1 && d4 == 0,
        };
        if !consistent {
            return bad(&format!("dimensions (d1={d1}, d3={d3}, d4={d4}) do not match case {:?}", self.case));
        }
        if !group.spans_codes(&self.spectrum()) {
            return Err(Error::SpanFailure);
        }
        Ok(())
    }

    /// Symbol of the new component indexed by `i`, with `lead` copies of
    /// `lead_value` in front and `tail` after.
    fn new_component(&self, group: &AbelianGroup, i: usize, lead: usize, lead_value: Code, tail: &[Code]) -> Vec<Code> {
        let ai = self.a[i].0;
        let mut s = vec![lead_value; lead];
        for (j, &(aj, k)) in self.a.iter().enumerate() {
            if j == i {
                s.push(ai);
                s.extend(std::iter::repeat(group.zero()).take(k - 1));
            } else {
                s.extend(std::iter::repeat(group.sub(aj, ai)).take(k));
            }
        }
        s.extend_from_slice(tail);
        s
    }
}

/// New minus removed contributions to `β` near the center.
pub fn blowup_delta(spec: &BlowupSpec, index: &SymbolIndex) -> Result<SymbolVector> {
    check_b_index(index)?;
    let g = index.group();
    spec.validate(g)?;
    if spec.n() != index.n() {
        return Err(Error::WrongArity { expected: index.n(), got: spec.n() });
    }
    let mut v = SymbolVector::new();
    let mut b_bar = spec.b.clone();
    b_bar.extend(std::iter::repeat(g.zero()).take(spec.d2));
    match spec.case {
        BlowupCase::I => {
            for i in 0..spec.a.len() {
                add_component(index, &spec.new_component(g, i, 0, 0, &b_bar), 1, &mut v)?;
            }
            add_component(index, &spec.spectrum(), -1, &mut v)?;
        }
        BlowupCase::II => {
            for i in 0..spec.a.len() {
                let lead = g.neg(spec.a[i].0);
                add_component(index, &spec.new_component(g, i, spec.d1, lead, &b_bar), 1, &mut v)?;
            }
        }
        BlowupCase::III => {}
    }
    Ok(v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpanField {
    Q,
    Z,
}

/// Relation-span membership for `B_n(G)` with the integer normal form built once.
pub struct Certifier {
    index: SymbolIndex,
    quotient: IntegerQuotient,
}

impl Certifier {
    pub fn new(rel: &RelationSystem) -> Result<Self> {
        check_b_index(rel.index())?;
        Ok(Certifier { index: rel.index().clone(), quotient: IntegerQuotient::new(rel.matrix())? })
    }

    pub fn index(&self) -> &SymbolIndex {
        &self.index
    }

    pub fn order(&self, v: &SymbolVector) -> Result<Order> {
        self.quotient.element_order(v)
    }

    pub fn contains(&self, v: &SymbolVector, field: SpanField) -> Result<bool> {
        match field {
            SpanField::Q => self.quotient.in_rowspan_q(v),
            SpanField::Z => self.quotient.in_rowspan_z(v),
        }
    }
}

impl Certifier {
    /// `v` and `w` define the same class.
    pub fn equal(&self, v: &SymbolVector, w: &SymbolVector, field: SpanField) -> Result<bool> {
        let mut d = v.clone();
        d.add_vector(w, -1);
        self.contains(&d, field)
    }

    /// Per-label class equality; a label missing on one side counts as zero.
    pub fn equal_by_label(
        &self,
        v: &BTreeMap<Option<String>, SymbolVector>,
        w: &BTreeMap<Option<String>, SymbolVector>,
        field: SpanField,
    ) -> Result<bool> {
        let zero = SymbolVector::new();
        for key in v.keys().chain(w.keys()) {
            if !self.equal(v.get(key).unwrap_or(&zero), w.get(key).unwrap_or(&zero), field)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// `β` of the blown-up data: the old class plus the local change.
pub fn beta_after_blowup(data: &FixedLocusData, spec: &BlowupSpec, index: &SymbolIndex) -> Result<SymbolVector> {
    let mut v = beta_class(data, index)?;
    v.add_vector(&blowup_delta(spec, index)?, 1);
    Ok(v)
}

/// Whether the blowup leaves `β` unchanged in `B_n(G)` (over `Q` or `Z`).
pub fn certify_invariance(spec: &BlowupSpec, certifier: &Certifier, field: SpanField) -> Result<bool> {
    let delta = blowup_delta(spec, certifier.index())?;
    certifier.contains(&delta, field)
}

/// A uniformly drawn valid spec of the given case, or `None` if none was
/// found after a bounded number of attempts.
pub fn random_blowup_spec<R: Rng>(group: &AbelianGroup, n: usize, case: BlowupCase, rng: &mut R) -> Option<BlowupSpec> {
    let nonzero: Vec<Code> = group.codes().filter(|&c| c != group.zero()).collect();
    if nonzero.is_empty() {
        return None;
    }
    for _ in 0..200 {
        let (d1, d4) = match case {
            BlowupCase::I => (0, rng.gen_range(2..=n.max(2))),
            BlowupCase::II => (rng.gen_range(1..=n.saturating_sub(1).max(1)), rng.gen_range(1..=n.saturating_sub(1).max(1))),
            BlowupCase::III => (rng.gen_range(2..=n.max(2)), 0),
        };
        if d1 + d4 > n {
            continue;
        }
        let rest = n - d1 - d4;
        let d3 = match case {
            BlowupCase::III if rest == 0 => continue,
            BlowupCase::III => rng.gen_range(1..=rest),
            _ => rng.gen_range(0..=rest),
        };
        let d2 = rest - d3;
        let b: Vec<Code> = (0..d3).map(|_| *nonzero.choose(rng).expect("nonempty")).collect();
        let m = rng.gen_range(1..=d4.min(nonzero.len()).max(1)).min(d4);
        let mut a = Vec::new();
        if d4 > 0 {
            let chars: Vec<Code> = nonzero.choose_multiple(rng, m).copied().collect();
            let mut kappas = vec![1usize; m];
            for _ in m..d4 {
                kappas[rng.gen_range(0..m)] += 1;
            }
            a = chars.into_iter().zip(kappas).collect();
        }
        let spec = BlowupSpec { case, d1, d2, b, a };
        if spec.validate(group).is_ok() {
            return Some(spec);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relations::{build_relations, combination_cyclic, full_kset};

    fn setup(order: u32, n: usize) -> (AbelianGroup, RelationSystem) {
        let g = AbelianGroup::cyclic(order).unwrap();
        let rel = build_relations(&g, n, Flavor::B, &full_kset(n)).unwrap();
        (g, rel)
    }

    #[test]
    fn projective_plane_class() {
        let (g, rel) = setup(3, 2);
        let data = FixedLocusData::parse(&g, "p0: 1,2\np1 : 2,1\n: 1,2\n# comment\n".as_bytes()).unwrap();
        assert_eq!(data.components[0].label.as_deref(), Some("p0"));
        assert_eq!(data.components[2].label, None);
        let v = beta_class(&data, rel.index()).unwrap();
        assert_eq!(v, combination_cyclic(rel.index(), &[(&[1, 2], 3)]).unwrap());
        assert!(beta_class(&FixedLocusData::default(), rel.index()).unwrap().is_zero());
        let by = beta_by_label(&data, rel.index()).unwrap();
        assert_eq!(by.len(), 3);
    }

    #[test]
    fn z2_single_component() {
        let (g, rel) = setup(2, 2);
        let data = FixedLocusData::parse(&g, "0,1".as_bytes()).unwrap();
        assert_eq!(beta_class(&data, rel.index()).unwrap(), combination_cyclic(rel.index(), &[(&[0, 1], 1)]).unwrap());
        let bad = FixedLocusData::parse(&g, "0,0".as_bytes()).unwrap();
        assert_eq!(beta_class(&bad, rel.index()), Err(Error::SpanFailure));
    }

    #[test]
    fn point_blowup_of_plane() {
        let (_, rel) = setup(3, 2);
        let spec = BlowupSpec { case: BlowupCase::I, d1: 0, d2: 0, b: vec![], a: vec![(1, 1), (2, 1)] };
        let d = blowup_delta(&spec, rel.index()).unwrap();
        let literal = combination_cyclic(rel.index(), &[(&[1, 1], 1), (&[2, 2], 1), (&[1, 2], -1)]).unwrap();
        assert_eq!(d, literal);
        let reduced = combination_cyclic(rel.index(), &[(&[1, 0], 1), (&[2, 0], 1), (&[1, 2], -1)]).unwrap();
        let cert = Certifier::new(&rel).unwrap();
        let mut diff = d.clone();
        diff.add_vector(&reduced, -1);
        assert!(cert.contains(&diff, SpanField::Z).unwrap());
        let g = rel.index().group().clone();
        let data = FixedLocusData::parse(&g, "1,2\n2,1\n1,2".as_bytes()).unwrap();
        let before = beta_class(&data, rel.index()).unwrap();
        let after = beta_after_blowup(&data, &spec, rel.index()).unwrap();
        assert!(cert.equal(&before, &after, SpanField::Z).unwrap());
        assert!(certify_invariance(&spec, &cert, SpanField::Z).unwrap());
    }

    #[test]
    fn case_three_is_zero() {
        let (_, rel) = setup(5, 3);
        let spec = BlowupSpec { case: BlowupCase::III, d1: 2, d2: 0, b: vec![3], a: vec![] };
        assert!(blowup_delta(&spec, rel.index()).unwrap().is_zero());
        let cert = Certifier::new(&rel).unwrap();
        assert!(certify_invariance(&spec, &cert, SpanField::Q).unwrap());
    }

    #[test]
    fn malformed_specs() {
        let g = AbelianGroup::cyclic(5).unwrap();
        let mk = |case, d1, d2, b: Vec<Code>, a: Vec<(Code, usize)>| BlowupSpec { case, d1, d2, b, a };
        for spec in [
            mk(BlowupCase::I, 1, 0, vec![], vec![(1, 2)]),
            mk(BlowupCase::II, 1, 0, vec![], vec![(1, 1), (1, 1)]),
            mk(BlowupCase::III, 2, 0, vec![], vec![]),
            mk(BlowupCase::I, 0, 0, vec![0], vec![(1, 2)]),
            mk(BlowupCase::II, 1, 0, vec![], vec![(2, 0)]),
        ] {
            assert!(matches!(spec.validate(&g), Err(Error::MalformedSpec(_))), "{spec:?}");
        }
    }

    #[test]
    fn random_specs_are_valid() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let g = AbelianGroup::cyclic(6).unwrap();
        for case in [BlowupCase::I, BlowupCase::II, BlowupCase::III] {
            for _ in 0..50 {
                let s = random_blowup_spec(&g, 4, case, &mut rng).unwrap();
                assert_eq!(s.case, case);
                assert_eq!(s.n(), 4);
                s.validate(&g).unwrap();
            }
        }
    }
}
