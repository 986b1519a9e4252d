use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use birsym_core::compute::default_primes;
use birsym_core::linalg::integer::{IntegerQuotient, Order};
use birsym_core::linalg::modp::rank_mod_p;
use birsym_core::linalg::rank::rank_q;
use birsym_core::relations::{build_relations, combination_cyclic, full_kset, SymbolVector};
use birsym_core::{AbelianGroup, Flavor};
use proptest::prelude::*;

#[test]
fn k2_subsystem_generates_m_relations() {
    let mut groups: Vec<Vec<u32>> = (1u32..=16).map(|m| vec![m]).collect();
    groups.extend([vec![2, 2], vec![2, 4], vec![3, 3], vec![2, 6], vec![4, 4], vec![2, 2, 2], vec![2, 8]]);
    for moduli in groups {
        let g = AbelianGroup::new(moduli.clone()).unwrap();
        let primes = default_primes(&g);
        for n in 2..=4 {
            let k2 = build_relations(&g, n, Flavor::M, &[2]).unwrap();
            let all = build_relations(&g, n, Flavor::M, &full_kset(n)).unwrap();
            assert_eq!(
                rank_q(k2.matrix(), &primes).unwrap().rank,
                rank_q(all.matrix(), &primes).unwrap().rank,
                "Q, G={moduli:?} n={n}"
            );
            assert_eq!(
                rank_mod_p(k2.matrix(), 2).unwrap(),
                rank_mod_p(all.matrix(), 2).unwrap(),
                "F2, G={moduli:?} n={n}"
            );
        }
    }
}

#[test]
fn ranks_agree_across_primes() {
    for order in [5u32, 7, 9, 12] {
        let g = AbelianGroup::cyclic(order).unwrap();
        for n in 2..=3 {
            for flavor in [Flavor::B, Flavor::M, Flavor::Mminus] {
                let rel = build_relations(&g, n, flavor, &full_kset(n)).unwrap();
                let r = rank_q(rel.matrix(), &default_primes(&g)).unwrap();
                assert!(r.agree && r.per_prime.len() >= 3, "N={order} n={n} {flavor}");
            }
        }
    }
}

fn m_quotient(order: u32, n: usize) -> Arc<IntegerQuotient> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, usize), Arc<IntegerQuotient>>>> = OnceLock::new();
    let mut map = CACHE.get_or_init(Default::default).lock().unwrap();
    map.entry((order, n))
        .or_insert_with(|| {
            let g = AbelianGroup::cyclic(order).unwrap();
            let rel = build_relations(&g, n, Flavor::M, &full_kset(n)).unwrap();
            Arc::new(IntegerQuotient::new(rel.matrix()).unwrap())
        })
        .clone()
}

/// `Σ c·⟨head, rest⟩`, or `None` when some tuple fails to span.
fn identity(order: u32, n: usize, terms: &[(Vec<i64>, i64)], rest: &[i64]) -> Option<SymbolVector> {
    let g = AbelianGroup::cyclic(order).unwrap();
    let idx = build_relations(&g, n, Flavor::M, &full_kset(n)).unwrap().index().clone();
    let full: Vec<(Vec<i64>, i64)> = terms
        .iter()
        .map(|(h, c)| (h.iter().chain(rest).copied().take(n).collect::<Vec<i64>>(), *c))
        .collect();
    for (t, _) in &full {
        let codes: Vec<u32> = t.iter().map(|&x| x.rem_euclid(order as i64) as u32).collect();
        if t.len() != n || !g.spans_codes(&codes) {
            return None;
        }
    }
    let refs: Vec<(&[i64], i64)> = full.iter().map(|(t, c)| (&t[..], *c)).collect();
    Some(combination_cyclic(&idx, &refs).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn derived_identities_in_integer_span(
        order in 2u32..=10,
        n in 2usize..=4,
        a in 0i64..10,
        a2 in 0i64..10,
        rest in prop::collection::vec(0i64..10, 4),
    ) {
        let q = m_quotient(order, n);
        let cases: Vec<(usize, Vec<(Vec<i64>, i64)>, usize)> = vec![
            (1, vec![(vec![0, 0], 1)], 2),
            (2, vec![(vec![a, a], 1), (vec![a, 0], -2)], 2),
            (3, vec![(vec![a, a, 0], 1)], 3),
            (4, vec![(vec![a, a, a2, a2], 1)], 4),
            (5, vec![(vec![a, a, a], 1)], 3),
            (6, vec![(vec![a, -a], 1)], 2),
        ];
        for (label, terms, min_n) in cases {
            if n < min_n {
                continue;
            }
            if let Some(v) = identity(order, n, &terms, &rest) {
                prop_assert!(q.in_rowspan_z(&v).unwrap(), "identity ({}) N={} n={}", label, order, n);
            }
        }
    }

    #[test]
    fn element_order_matches_membership(
        order in 3u32..=8,
        n in 2usize..=3,
        coeffs in prop::collection::vec((0usize..400, -3i64..=3), 1..6),
    ) {
        let q = m_quotient(order, n);
        let mut v = SymbolVector::new();
        for (c, x) in coeffs {
            v.add_term(c % q.ncols(), x);
        }
        let ord = q.element_order(&v).unwrap();
        prop_assert_eq!(ord.is_one(), q.in_rowspan_z(&v).unwrap());
        prop_assert_eq!(ord == Order::Infinite, !q.in_rowspan_q(&v).unwrap());
    }
}

#[test]
fn two_a_zero_identity_over_q() {
    for p in [5u32, 7, 11, 13] {
        let q = m_quotient(p, 2);
        for a in 1..p as i64 {
            for b in 0..p as i64 {
                let v = identity(p, 2, &[(vec![a, b], 1), (vec![a, -b], 1), (vec![a, 0], -2)], &[]).unwrap();
                assert!(q.in_rowspan_q(&v).unwrap(), "p={p} a={a} b={b}");
            }
        }
    }
}

#[test]
fn p_squared_minus_one_kills_delta() {
    for p in [7u32, 11] {
        let q = m_quotient(p, 2);
        let k = (p as i64).pow(2) - 1;
        let v = identity(p, 2, &[(vec![1, 0], k), (vec![-1, 0], k)], &[]).unwrap();
        assert!(q.in_rowspan_z(&v).unwrap(), "p={p}");
    }
}

/// Dimension of a single-`k` system built from every ordered tuple, with no
/// sub-multiset enumeration or row deduplication.
fn brute_partial_dim(order: u32, n: usize, k: usize, flavor: Flavor) -> usize {
    let g = AbelianGroup::cyclic(order).unwrap();
    let idx = birsym_core::SymbolIndex::enumerate(&g, n, flavor).unwrap();
    let mut m = birsym_core::linalg::sparse::SparseMatrix::new(idx.len());
    for mut code in 0..(order as u64).pow(n as u32) {
        let mut t = vec![0u32; n];
        for x in t.iter_mut() {
            *x = (code % order as u64) as u32;
            code /= order as u64;
        }
        if !g.spans_codes(&t) {
            continue;
        }
        let mut row = std::collections::BTreeMap::<u32, i64>::new();
        let mut add = |mut s: Vec<u32>, c: i64| {
            if let Some((col, sign)) = idx.locate(&mut s) {
                *row.entry(col as u32).or_default() += c * sign as i64;
            }
        };
        add(t.clone(), 1);
        for i in 0..k {
            if flavor == Flavor::B && (0..i).any(|j| t[j] == t[i]) {
                continue;
            }
            let s: Vec<u32> = (0..n).map(|j| if j < k && j != i { (t[j] + order - t[i]) % order } else { t[j] }).collect();
            add(s, -1);
        }
        let r: Vec<(u32, i32)> = row.into_iter().filter(|&(_, c)| c != 0).map(|(c, x)| (c, x as i32)).collect();
        m.push_row(&r).unwrap();
    }
    idx.len() - rank_mod_p(&m, 1_000_003).unwrap()
}

#[test]
fn partial_systems_match_brute_force() {
    let cells = [
        (Flavor::B, 3, 3, 2u32, 0usize),
        (Flavor::B, 3, 3, 5, 4),
        (Flavor::M, 3, 3, 9, 8),
        (Flavor::B, 4, 4, 3, 3),
        (Flavor::B, 4, 4, 12, 104),
        (Flavor::M, 4, 4, 9, 44),
        (Flavor::M, 4, 3, 11, 1),
        (Flavor::B, 5, 5, 2, 0),
        (Flavor::B, 5, 5, 3, 4),
        (Flavor::B, 5, 5, 12, 162),
    ];
    for (flavor, n, k, order, want) in cells {
        let g = AbelianGroup::cyclic(order).unwrap();
        let rel = build_relations(&g, n, flavor, &[k]).unwrap();
        let dim = rel.ncols() - rank_mod_p(rel.matrix(), 1_000_003).unwrap();
        assert_eq!(dim, want, "{flavor}_{{{n},{k}}}(Z/{order})");
        assert_eq!(brute_partial_dim(order, n, k, flavor), want, "brute force {flavor}_{{{n},{k}}}(Z/{order})");
    }
}
