use std::collections::BTreeSet;

use proptest::prelude::*;
use singer_lattice::arith::{prime_power, GaloisField};
use singer_lattice::permgrp::*;
use singer_lattice::Exec;

const MODEL_Q: [u64; 7] = [2, 3, 4, 5, 7, 8, 9];

/// PGL(2, q) by brute force: every invertible (a b; c d) applied to every
/// point [x : y] of the projective line, read through the library's indexing.
fn oracle_pgl2(q: u64) -> BTreeSet<Permutation> {
    let line = ProjectiveLine::new(q).unwrap();
    let f = GaloisField::of_order(q).unwrap();
    let elems: Vec<_> = f.elements().collect();
    let points: Vec<(_, _)> = elems
        .iter()
        .map(|&x| (x, f.one()))
        .chain(std::iter::once((f.one(), f.zero())))
        .collect();
    let mut out = BTreeSet::new();
    for &a in &elems {
        for &b in &elems {
            for &c in &elems {
                for &d in &elems {
                    if f.sub(f.mul(a, d), f.mul(b, c)) == f.zero() {
                        continue;
                    }
                    let images = points
                        .iter()
                        .map(|&(x, y)| {
                            line.index_of(f.add(f.mul(a, x), f.mul(b, y)), f.add(f.mul(c, x), f.mul(d, y)))
                        })
                        .collect();
                    out.insert(Permutation::from_images(images).unwrap());
                }
            }
        }
    }
    out
}

#[test]
fn projective_line_indexing() {
    let line = ProjectiveLine::new(4).unwrap();
    let f = line.field();
    assert_eq!(line.infinity(), 4);
    for x in f.elements() {
        assert_eq!(line.index_of(x, f.one()), x.code() as usize);
        assert_eq!(line.index_of(f.mul(x, f.primitive()), f.primitive()), x.code() as usize);
    }
    assert_eq!(line.index_of(f.one(), f.zero()), 4);
}

#[test]
fn models_match_brute_force() {
    for q in [2u64, 3, 4, 5, 7] {
        let model = pgl2_model(q).unwrap();
        let oracle = oracle_pgl2(q);
        assert_eq!(model.elements().iter().cloned().collect::<BTreeSet<_>>(), oracle, "q = {q}");
    }
}

#[test]
fn model_orders_and_index() {
    for q in MODEL_Q {
        let (_, eta) = prime_power(q).unwrap();
        let pgl = pgl2_model(q).unwrap();
        let pgaml = pgammal2_model(q).unwrap();
        assert_eq!(pgl.order() as u64, q * (q * q - 1));
        assert_eq!(pgaml.order() as u64, q * (q * q - 1) * eta as u64);
        assert!(pgl.is_subgroup_of(&pgaml));
        assert_eq!(pgaml.order() / pgl.order(), eta as usize);
    }
    assert_eq!(pgl2_model(4).unwrap().order(), 60);
    assert_eq!(pgammal2_model(9).unwrap().order(), 1440);
    assert!(pgl2_model(6).is_err());
    assert!(pgl2_model(11).unwrap_err().is_cap());
}

#[test]
fn small_models_are_symmetric() {
    // PΓL(2, q) = Sym(q+1) for q ≤ 4
    for q in [2u64, 3, 4] {
        let g = pgammal2_model(q).unwrap();
        assert!(groups_equal(&g, &PermGroup::symmetric(q as usize + 1).unwrap()));
    }
    assert!(!groups_equal(&pgammal2_model(5).unwrap(), &PermGroup::symmetric(6).unwrap()));
}

#[test]
fn self_normalization() {
    for q in [4u64, 5, 7, 8] {
        let pgaml = pgammal2_model(q).unwrap();
        let n = normalizer_in_sym(&pgl2_model(q).unwrap(), Exec::Parallel).unwrap();
        assert!(groups_equal(&n, &pgaml), "q = {q}");
        if q <= 5 {
            let nn = normalizer_in_sym(&pgaml, Exec::Parallel).unwrap();
            assert!(groups_equal(&nn, &pgaml));
        }
    }
}

#[test]
fn conjugacy_search() {
    let g = pgammal2_model(5).unwrap();
    let sigma = Permutation::from_cycles(6, &[&[0, 3, 5], &[1, 4]]).unwrap();
    let h = g.conjugate(&sigma);
    let found = is_conjugate(&g, &h, Exec::Parallel).unwrap().unwrap();
    assert!(groups_equal(&g.conjugate(&found), &h));
    let a3 = closure(&[Permutation::from_cycles(3, &[&[0, 1, 2]]).unwrap()], 3).unwrap();
    assert_eq!(is_conjugate(&PermGroup::symmetric(3).unwrap(), &a3, Exec::Sequential).unwrap(), None);
    assert!(!groups_equal(&PermGroup::symmetric(3).unwrap(), &a3));
}

#[test]
fn conjugate_membership_matches_conjugate_group() {
    let g = pgammal2_model(5).unwrap();
    let sigma = Permutation::from_cycles(6, &[&[0, 1], &[2, 5, 3]]).unwrap();
    let h = g.conjugate(&sigma);
    for x in all_permutations(6) {
        assert_eq!(g.conjugate_contains(&sigma, &x), h.contains(&x));
    }
}

fn perm(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n).collect::<Vec<usize>>())
        .prop_shuffle()
        .prop_map(|v| Permutation::from_images(v).unwrap())
}

fn perms_of_degree() -> impl Strategy<Value = (Permutation, Permutation, Permutation)> {
    (2usize..=10).prop_flat_map(|n| (perm(n), perm(n), perm(n)))
}

proptest! {
    #[test]
    fn composition_laws((a, b, c) in perms_of_degree()) {
        let n = a.degree();
        prop_assert_eq!(a.compose(&b).compose(&c), a.compose(&b.compose(&c)));
        prop_assert!(a.compose(&a.inverse()).is_identity());
        prop_assert_eq!(a.compose(&Permutation::identity(n)), a.clone());
        for i in 0..n {
            prop_assert_eq!(a.compose(&b).apply(i), a.apply(b.apply(i)));
        }
        prop_assert_eq!(a.conjugate_by(&b), b.inverse().compose(&a).compose(&b));
        prop_assert!(a.pow(a.order()).is_identity());
        prop_assert_eq!(a.cycle_type().iter().sum::<usize>(), n);
    }

    #[test]
    fn rank_unrank_bijection(p in (1usize..=8).prop_flat_map(perm)) {
        let n = p.degree();
        prop_assert_eq!(unrank(n, rank(&p)), p.clone());
        prop_assert!(rank(&p) < factorial(n));
    }

    #[test]
    fn text_and_json_round_trip(p in (1usize..=12).prop_flat_map(perm)) {
        let s = p.to_string();
        prop_assert_eq!(s.parse::<Permutation>().unwrap(), p.clone());
        let json = serde_json::to_string(&p).unwrap();
        prop_assert_eq!(serde_json::from_str::<Permutation>(&json).unwrap(), p);
    }

    #[test]
    fn lagrange((a, b, _) in (3usize..=6).prop_flat_map(|n| (perm(n), perm(n), perm(n)))) {
        let n = a.degree();
        let g = closure(&[a.clone(), b.clone()], n).unwrap();
        prop_assert_eq!(factorial(n) % g.order(), 0);
        for x in g.elements().iter().take(20) {
            prop_assert_eq!(g.order() % x.order(), 0);
        }
        let cyclic = closure(std::slice::from_ref(&a), n).unwrap();
        prop_assert_eq!(cyclic.order(), a.order());
        prop_assert!(cyclic.is_subgroup_of(&g));
        prop_assert_eq!(g.order() % cyclic.order(), 0);
    }

    #[test]
    fn equality_is_an_equivalence(s1 in perm(6), s2 in perm(6), s3 in perm(6), pick in 0usize..3) {
        let base = [pgl2_model(5).unwrap(), pgammal2_model(5).unwrap(), PermGroup::symmetric(6).unwrap()];
        let g = &base[pick];
        let (a, b, c) = (g.conjugate(&s1), g.conjugate(&s2), g.conjugate(&s3));
        prop_assert!(groups_equal(&a, &a));
        prop_assert_eq!(groups_equal(&a, &b), groups_equal(&b, &a));
        if groups_equal(&a, &b) && groups_equal(&b, &c) {
            prop_assert!(groups_equal(&a, &c));
        }
        // equality agrees with mutual inclusion
        prop_assert_eq!(groups_equal(&a, &b), a.is_subgroup_of(&b) && b.is_subgroup_of(&a));
    }
}
