use birsym_core::compute::{default_primes, dimension, Field};
use birsym_core::group::divisors;
use birsym_core::linalg::integer::IntegerQuotient;
use birsym_core::linalg::sparse::SparseMatrix;
use birsym_core::relations::{build_relations, full_kset, SymbolVector};
use birsym_core::structure::{
    coprimitive_dim, delta_map, explicit_functional, mu_cokernel, nabla_map, primitive_dim, verify_mu, DeltaVariant,
    TensorMap,
};
use birsym_core::{AbelianGroup, Flavor};
use num_bigint::BigInt;

fn rel_matrix(group: &AbelianGroup, n: usize, flavor: Flavor) -> SparseMatrix {
    build_relations(group, n, flavor, &full_kset(n)).unwrap().matrix().clone()
}

/// Rows `ρ ⊗ e_r` and `e_l ⊗ σ` spanning the relations of a tensor product.
fn tensor_relations(t: &TensorMap, left: &SparseMatrix, right: &SparseMatrix) -> SparseMatrix {
    let (nl, nr) = (t.left.len(), t.right.len());
    let mut out = SparseMatrix::new(nl * nr);
    for (cols, vals) in left.rows() {
        for r in 0..nr {
            let row: Vec<(u32, i32)> = cols.iter().zip(vals).map(|(&l, &x)| ((l as usize * nr + r) as u32, x)).collect();
            out.push_row(&row).unwrap();
        }
    }
    for (cols, vals) in right.rows() {
        for l in 0..nl {
            let row: Vec<(u32, i32)> = cols.iter().zip(vals).map(|(&r, &x)| ((l * nr + r as usize) as u32, x)).collect();
            out.push_row(&row).unwrap();
        }
    }
    out
}

#[test]
fn delta_respects_relations() {
    for order in [4u32, 6, 8, 9, 10, 12] {
        let g = AbelianGroup::cyclic(order).unwrap();
        for d in divisors(order).into_iter().filter(|&d| d < order) {
            for variant in [DeltaVariant::Delta, DeltaVariant::DeltaMinus] {
                if variant == DeltaVariant::DeltaMinus && d == 1 {
                    continue;
                }
                for (n1, n2) in [(1usize, 1usize), (1, 2), (2, 1)] {
                    let t = delta_map(&g, d, n1, n2, variant).unwrap();
                    let source_flavor = t.single.flavor();
                    let src = rel_matrix(&g, n1 + n2, source_flavor);
                    let lrel = rel_matrix(t.left.group(), n1, source_flavor);
                    let rrel = rel_matrix(t.right.group(), n2, Flavor::Mminus);
                    let q = IntegerQuotient::new(&tensor_relations(&t, &lrel, &rrel)).unwrap();
                    for (cols, vals) in src.rows() {
                        let img = t.map.apply(&SymbolVector::from_row(cols, vals));
                        assert!(q.in_rowspan_z(&img).unwrap(), "N={order} d={d} {variant:?} ({n1},{n2})");
                    }
                }
            }
        }
    }
}

#[test]
fn nabla_respects_relations() {
    for order in [4u32, 6, 8, 9] {
        let g = AbelianGroup::cyclic(order).unwrap();
        for d in divisors(order).into_iter().filter(|&d| d > 1 && d < order) {
            for flavor in [Flavor::M, Flavor::Mminus] {
                let t = nabla_map(&g, d, 1, 1, flavor).unwrap();
                let target = IntegerQuotient::new(&rel_matrix(&g, 2, flavor)).unwrap();
                let lrel = rel_matrix(t.left.group(), 1, flavor);
                let rrel = rel_matrix(t.right.group(), 1, flavor);
                for (cols, vals) in tensor_relations(&t, &lrel, &rrel).rows() {
                    let img = t.map.apply(&SymbolVector::from_row(cols, vals));
                    assert!(target.in_rowspan_z(&img).unwrap(), "N={order} d={d} {flavor}");
                }
            }
        }
    }
}

#[test]
fn explicit_functional_witnesses_dimension_one() {
    for n in 2..=3 {
        let (index, phi) = explicit_functional(n).unwrap();
        let rel = build_relations(index.group(), n, Flavor::M, &full_kset(n)).unwrap();
        for (cols, vals) in rel.matrix().rows() {
            let s: i64 = cols.iter().zip(vals).map(|(&c, &x)| phi[c as usize] * x as i64).sum();
            assert_eq!(s, 0);
        }
        let mut witness: Vec<u32> = (0..n as u32).map(|i| 3u32.pow(i) % index.group().order()).collect();
        witness.sort_unstable();
        assert_eq!(phi[index.column_of_canonical(&witness).unwrap()], 1);
        let g = index.group();
        let r = dimension(g, n, Flavor::M, &[], Field::Q, &default_primes(g), &Default::default()).unwrap();
        assert_eq!(r.dim, 1, "n={n}");
    }
}

#[test]
fn f2_dimension_of_two_power_level() {
    for n in 2..=4 {
        let g = AbelianGroup::cyclic(1 << (n - 1)).unwrap();
        let r = dimension(&g, n, Flavor::M, &[], Field::Fp(2), &[], &Default::default()).unwrap();
        assert!(r.dim >= 1, "n={n}: {}", r.dim);
    }
}

#[test]
fn m2_splits_into_minus_parts() {
    for p in [5u32, 7, 11, 13] {
        let g = AbelianGroup::cyclic(p).unwrap();
        let primes = default_primes(&g);
        let dim = |n, flavor| dimension(&g, n, flavor, &[], Field::Q, &primes, &Default::default()).unwrap().dim;
        assert_eq!(dim(2, Flavor::M), dim(2, Flavor::Mminus) + dim(1, Flavor::Mminus), "p={p}");
    }
}

#[test]
fn primitive_and_coprimitive_agree() {
    let primes = [1_000_003u32, 998_244_353];
    for order in 11u32..=20 {
        let g = AbelianGroup::cyclic(order).unwrap();
        let prim = primitive_dim(&g, 2, Flavor::Mminus, &primes).unwrap();
        let coprim = coprimitive_dim(&g, 2, Flavor::Mminus, &primes).unwrap();
        assert!(prim.agree && coprim.agree);
        assert_eq!(prim.dim, coprim.dim, "N={order}");
    }
}

#[test]
fn mu_is_onto_away_from_two() {
    for order in [3u32, 5, 7, 8, 9] {
        let g = AbelianGroup::cyclic(order).unwrap();
        for n in 1..=3 {
            let r = verify_mu(&g, n, &[1_000_003]).unwrap();
            assert!(r.passed(), "N={order} n={n}: {r:?}");
        }
    }
    let two = BigInt::from(2);
    for order in [5u32, 7, 8, 9, 11] {
        let g = AbelianGroup::cyclic(order).unwrap();
        let divs = mu_cokernel(&g, 2).unwrap();
        assert_eq!(divs.len() as u64, g.phi(), "N={order}");
        assert!(divs.iter().all(|d| *d == two));
    }
    let klein = AbelianGroup::new(vec![2, 2]).unwrap();
    assert!(mu_cokernel(&klein, 2).unwrap().is_empty());
}
