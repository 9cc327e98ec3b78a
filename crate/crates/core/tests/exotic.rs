use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use singer_lattice::diffsets::{canonical_singer, AffineMap, DifferenceMatrix, DifferenceVector};
use singer_lattice::exotic::*;
use singer_lattice::permgrp::{factorial, groups_equal, rank, unrank, Permutation};
use singer_lattice::{Error, Exec};

fn ctx(q: u64) -> CensusContext {
    CensusContext::new(q, Exec::Parallel).unwrap()
}

/// Orbit of `(a1, a2)` under `(s1 a1 s0⁻¹, s2 a2 s0⁻¹)` for all stabilizer
/// triples, listed directly rather than through generators.
fn stab_orbit(c: &CensusContext, a1: &Permutation, a2: &Permutation) -> BTreeSet<(Permutation, Permutation)> {
    let mut out = BTreeSet::new();
    for s0 in &c.stabilizer {
        let s0i = s0.inverse();
        for s1 in &c.stabilizer {
            for s2 in &c.stabilizer {
                out.insert((s1.compose(a1).compose(&s0i), s2.compose(a2).compose(&s0i)));
            }
        }
    }
    out
}

fn transposition_outside_g0(c: &CensusContext) -> Permutation {
    let n = c.q as usize + 1;
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| Permutation::from_cycles(n, &[&[i, j]]).unwrap())
        .find(|t| !c.g0.contains(t))
        .expect("G0 is not the full symmetric group")
}

#[test]
fn search_and_model_routes_agree() {
    for q in [2u64, 3, 4, 5] {
        let v = canonical_singer(q).unwrap().sorted_vector();
        let s = search_pencil_group(&v, Exec::Parallel).unwrap();
        let m = model_pencil_group(&v).unwrap();
        assert!(groups_equal(&s, &m), "q = {q}");
        let w = v.permute_rows(&Permutation::from_cycles(q as usize + 1, &[&[0, 1, 2]]).unwrap());
        assert!(groups_equal(&search_pencil_group(&w, Exec::Parallel).unwrap(), &model_pencil_group(&w).unwrap()));
    }
}

#[test]
fn model_route_orders() {
    for (q, order) in [(7u64, 336usize), (8, 1512), (9, 1440)] {
        let v = canonical_singer(q).unwrap().sorted_vector();
        assert_eq!(model_pencil_group(&v).unwrap().order(), order);
    }
}

#[test]
fn singer_coordinates_are_projective_points() {
    for q in [2u64, 3, 4, 5, 7, 8, 9] {
        let c = singer_coordinates(q).unwrap();
        assert_eq!(c.set.q(), q);
        let pts: BTreeSet<usize> = c.points.iter().copied().collect();
        assert_eq!(pts, (0..=q as usize).collect());
    }
}

#[test]
fn column_groups_are_conjugates_of_g0() {
    let c = ctx(5);
    let a1 = unrank(6, 417);
    let a2 = unrank(6, 93);
    let nm = c.normalized(a1.clone(), a2.clone());
    let groups = local_pencil_groups(&nm.decode(), Exec::Parallel).unwrap();
    assert!(groups_equal(&groups[0], &c.g0));
    assert!(groups_equal(&groups[1], &c.g0.conjugate(&a1)));
    assert!(groups_equal(&groups[2], &c.g0.conjugate(&a2)));
}

#[test]
fn row_permutation_conjugates_all_groups() {
    let c = ctx(5);
    let m = c.normalized(unrank(6, 5), unrank(6, 600)).decode();
    let sigma = Permutation::from_cycles(6, &[&[0, 4], &[1, 2, 3]]).unwrap();
    let before = local_pencil_groups(&m, Exec::Parallel).unwrap();
    let after = local_pencil_groups(&m.permute_rows(&sigma), Exec::Parallel).unwrap();
    for t in 0..3 {
        assert!(groups_equal(&after[t], &before[t].conjugate(&sigma)));
    }
}

#[test]
fn fast_condition_matches_certificate_q5_sample() {
    let c = ctx(5);
    for r in (0..720 * 720).step_by(7919) {
        let nm = c.normalized(unrank(6, r / 720), unrank(6, r % 720));
        let full = certify_exotic(&nm.decode(), Exec::Sequential).unwrap();
        assert_eq!(!fast_necessary_condition(&nm, &c.g0), full.is_exotic());
        assert_eq!(c.certify(&nm).is_exotic(), full.is_exotic());
    }
}

#[test]
fn stabilizer_labels_lie_in_g0() {
    for q in [2u64, 3, 4, 5, 7, 8, 9] {
        let c = ctx(q);
        assert_eq!(c.stabilizer.len() as u64, 3 * singer_lattice::arith::prime_power(q).unwrap().1 as u64);
        assert!(c.stabilizer.iter().all(|s| c.g0.contains(s)));
    }
}

#[test]
fn small_q_pencil_group_is_symmetric() {
    for (q, n) in [(2u64, 3usize), (3, 4), (4, 5)] {
        assert_eq!(ctx(q).g0.order(), factorial(n));
    }
    assert_eq!(ctx(5).g0.order(), 120);
}

#[test]
fn witness_checks_and_exotic_example() {
    let c = ctx(5);
    let t = transposition_outside_g0(&c);
    let nm = c.normalized(t, Permutation::identity(6));
    let v = certify_exotic(&nm.decode(), Exec::Parallel).unwrap();
    assert!(v.is_exotic());
    assert!(v.witness().unwrap().check());
    let fast = c.certify(&nm);
    assert!(fast.witness().unwrap().check());
    assert!(fast.to_string().starts_with("CertifiedExotic ("));
    if let Some(Witness::GroupMismatch { separating, second_generators, first_generators, types }) = fast.witness() {
        let forged = Witness::GroupMismatch {
            types: (types.1, types.0),
            first_generators: second_generators.clone(),
            second_generators: first_generators.clone(),
            separating: separating.clone(),
        };
        assert!(!forged.check());
    } else {
        panic!("expected a group mismatch");
    }
}

#[test]
fn identity_matrix_is_inconclusive() {
    for q in [2u64, 3, 4, 5] {
        let d = canonical_singer(q).unwrap().sorted_vector();
        let m = DifferenceMatrix::constant(&d);
        assert_eq!(certify_exotic(&m, Exec::Parallel).unwrap(), Verdict::Inconclusive);
    }
    for q in [7u64, 8, 9] {
        let d = canonical_singer(q).unwrap().sorted_vector();
        assert_eq!(certify_exotic(&DifferenceMatrix::constant(&d), Exec::Parallel).unwrap(), Verdict::Inconclusive);
    }
}

#[test]
fn invalid_and_oversized_inputs() {
    // {0, 1, 2} is not a difference set, so matrix construction rejects it
    assert!(DifferenceMatrix::from_entries(2, [vec![0, 1, 3], vec![0, 1, 2], vec![0, 1, 3]]).is_err());
    assert!(singer_lattice::diffsets::singer_difference_set(11).unwrap_err().is_cap());
    assert!(classify(11, ClassifyOptions { candidates_only: true, ..ClassifyOptions::default() }).unwrap_err().is_cap());
}

#[test]
fn agl_column_moves_match_move_formulas() {
    let c = ctx(4);
    let v = c.set.sorted_vector();
    let m = c.set.modulus();
    let id = AffineMap::identity(m);
    let stab = singer_lattice::diffsets::set_stabilizer_in_agl(&c.set);
    for (a1r, a2r) in [(7usize, 50usize), (119, 3), (64, 64)] {
        let (a1, a2) = (unrank(5, a1r), unrank(5, a2r));
        let nm = c.normalized(a1.clone(), a2.clone());
        let mat = nm.decode();
        for g in &stab {
            let s = g.label_permutation(&v).unwrap();
            for (col, mv) in [(0usize, Move::Column0(s.clone())), (1, Move::Column1(s.clone())), (2, Move::Column2(s.clone()))] {
                let mut maps = [&id, &id, &id];
                maps[col] = g;
                let moved = NormalizedMatrix::from_matrix(&mat.apply_agl(maps).unwrap(), &c.set).unwrap();
                let (b1, b2) = mv.apply(&a1, &a2);
                assert!(stab_orbit(&c, &b1, &b2).contains(&(moved.alpha1().clone(), moved.alpha2().clone())));
                assert!(stab_orbit(&c, &a1, &a2).contains(&(b1, b2)));
            }
        }
    }
}

#[test]
fn rotate_and_dual_match_matrix_operations() {
    let c = ctx(4);
    let m = c.set.modulus();
    let neg = AffineMap::new(m - 1, 0, m).unwrap();
    for (a1r, a2r) in [(7usize, 50usize), (119, 3), (11, 98)] {
        let (a1, a2) = (unrank(5, a1r), unrank(5, a2r));
        let mat = c.normalized(a1.clone(), a2.clone()).decode();
        let cols = mat.columns();
        let rotated = DifferenceMatrix::new([cols[1].clone(), cols[2].clone(), cols[0].clone()]).unwrap();
        let neg_col = |v: &DifferenceVector| singer_lattice::diffsets::agl_apply(&neg, v).unwrap();
        let dual = DifferenceMatrix::new([neg_col(&cols[0]), neg_col(&cols[2]), neg_col(&cols[1])]).unwrap();
        for (mv, target) in [(Move::Rotate, rotated), (Move::Dual, dual)] {
            let n = NormalizedMatrix::from_matrix(&target, &c.set).unwrap();
            let (b1, b2) = mv.apply(&a1, &a2);
            assert!(stab_orbit(&c, &b1, &b2).contains(&(n.alpha1().clone(), n.alpha2().clone())), "{mv:?}");
        }
    }
}

#[test]
fn rotate_and_dual_preserve_verdict_q5() {
    let c = ctx(5);
    for r in (0..720 * 720).step_by(7919) {
        let (a1, a2) = (unrank(6, r / 720), unrank(6, r % 720));
        let v = c.certify(&c.normalized(a1.clone(), a2.clone())).is_exotic();
        for mv in [Move::Rotate, Move::Dual] {
            let (b1, b2) = mv.apply(&a1, &a2);
            assert_eq!(c.certify(&c.normalized(b1, b2)).is_exotic(), v);
        }
    }
}

#[test]
fn census_small_q() {
    let c2 = classify(2, ClassifyOptions::default()).unwrap();
    assert_eq!(c2.total, 36);
    assert_eq!(c2.certified_exotic(), 0);
    let c3 = classify(3, ClassifyOptions::default()).unwrap();
    assert_eq!(c3.total, 576);
    assert!(c3.verdicts_constant);
    let c4 = classify(4, ClassifyOptions::default()).unwrap();
    assert_eq!(c4.total, 14400);
    assert_eq!(c4.certified_exotic(), 0);
    assert!(c4.classes.len() as u128 <= bound_b(4));
    for census in [&c2, &c3, &c4] {
        assert_eq!(census.classes.iter().map(|k| k.orbit_size).sum::<usize>(), census.total);
    }
}

#[test]
fn orbit_sizes_match_direct_enumeration() {
    for q in [3u64, 4] {
        let c = ctx(q);
        let census = classify_with(&c, ClassifyOptions::default()).unwrap();
        let group_order = c.stabilizer.len().pow(3);
        let mut seen = BTreeSet::new();
        for k in &census.classes {
            let orbit = stab_orbit(&c, k.representative.alpha1(), k.representative.alpha2());
            assert_eq!(orbit.len(), k.orbit_size);
            assert_eq!(group_order % k.orbit_size, 0);
            let min = orbit.iter().next().unwrap();
            assert_eq!((min.0.clone(), min.1.clone()), (k.representative.alpha1().clone(), k.representative.alpha2().clone()));
            for p in orbit {
                assert!(seen.insert(p));
            }
        }
        assert_eq!(seen.len(), census.total);
    }
}

#[test]
fn census_q5_and_candidates() {
    let census = classify(5, ClassifyOptions::default()).unwrap();
    assert_eq!(census.total, 518_400);
    assert!(census.verdicts_constant);
    let count = census.inconclusive();
    assert!(count as u128 <= bound_b(5));
    let c = ctx(5);
    let candidates = classify_with(&c, ClassifyOptions { candidates_only: true, ..ClassifyOptions::default() }).unwrap();
    assert_eq!(candidates.total, 120 * 120);
    assert_eq!(candidates.certified_exotic(), 0);
    let inside: usize = census
        .classes
        .iter()
        .filter(|k| !k.verdict.is_exotic())
        .map(|k| k.orbit_size)
        .sum();
    assert_eq!(inside, 120 * 120);
}

#[test]
fn census_file_round_trip_and_tsv() {
    let census = classify(3, ClassifyOptions { extra_moves: true, ..ClassifyOptions::default() }).unwrap();
    let file = census.to_file();
    let text = file.to_text();
    assert_eq!(CensusFile::from_text(&text).unwrap(), file);
    assert!(text.ends_with('\n'));
    let tsv = census.summary_tsv();
    let lines: Vec<&str> = tsv.lines().collect();
    assert_eq!(lines[0], "q\ttotal\tclasses\tcertified_exotic\tinconclusive\tbound_B");
    assert!(lines[1].starts_with("3\t576\t"));
    assert!(lines[1].ends_with("\t64"));
    match CensusFile::from_text("{\n  \"q\": 3,\n  oops") {
        Err(Error::Parse(msg)) => assert!(msg.contains("line 3")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn extra_moves_coarsen_census() {
    let plain = classify(4, ClassifyOptions::default()).unwrap();
    let extra = classify(4, ClassifyOptions { extra_moves: true, ..ClassifyOptions::default() }).unwrap();
    assert!(extra.classes.len() <= plain.classes.len());
    assert_eq!(extra.total, plain.total);
}

#[test]
fn candidates_only_large_q() {
    for q in [7u64, 8, 9] {
        let census = classify(q, ClassifyOptions { candidates_only: true, ..ClassifyOptions::default() }).unwrap();
        assert_eq!(census.certified_exotic(), 0);
        assert!(census.verdicts_constant);
    }
    assert!(classify(7, ClassifyOptions::default()).unwrap_err().is_cap());
}

#[test]
fn bounds_table() {
    assert_eq!([2u64, 3, 4, 5].map(bound_b), [4, 64, 400, 1600]);
    for q in 2u64..=1000 {
        assert_eq!((q * (q * q - 1)) % 3, 0);
        let t = (q * (q * q - 1) / 3) as u128;
        assert_eq!(bound_b(q), t * t);
    }
    assert_eq!(lower_a(2).unwrap(), BigRational::new(BigInt::from(2), BigInt::from(9)));
    // q = 4 = 2², η = 2: A = 120² / (162·8)
    assert_eq!(lower_a(4).unwrap(), BigRational::new(BigInt::from(14400), BigInt::from(162 * 8)));
    assert!(lower_a(6).is_err());
}

#[test]
fn ratio_table_decreases() {
    let qs = [2u64, 3, 4, 5, 7, 8, 9, 11];
    let rows = ratio_table(&qs).unwrap();
    let ratios: Vec<&BigRational> = rows.iter().map(|r| &r.ratio).collect();
    // strictly decreasing from some index on
    let start = (0..ratios.len()).find(|&i| ratios[i..].windows(2).all(|w| w[1] < w[0])).unwrap();
    assert!(start < ratios.len() - 1);
    assert!(*ratios.last().unwrap() < &BigRational::new(BigInt::from(1), BigInt::from(1_000_000)));
    let tsv = ratio_table_tsv(&rows);
    assert_eq!(tsv.lines().count(), qs.len() + 1);
    assert_eq!(tsv.lines().next().unwrap(), "q\tB\tA\tB/A");
    assert!(rows.iter().all(|r| (r.ratio_f64() - r.ratio_decimal().parse::<f64>().unwrap()).abs() <= 1e-5 * r.ratio_f64()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stabilizer_moves_preserve_verdict(r1 in 0usize..720, r2 in 0usize..720, i in 0usize..9, which in 0usize..3) {
        let c = CTX5.with(|c| c.clone());
        let s = &c.stabilizer[i % c.stabilizer.len()];
        let (a1, a2) = (unrank(6, r1), unrank(6, r2));
        let mv = match which { 0 => Move::Column0(s.clone()), 1 => Move::Column1(s.clone()), _ => Move::Column2(s.clone()) };
        let (b1, b2) = mv.apply(&a1, &a2);
        prop_assert_eq!(
            c.certify(&c.normalized(a1, a2)).is_exotic(),
            c.certify(&c.normalized(b1, b2)).is_exotic()
        );
    }

    #[test]
    fn rank_indexes_census(r in 0usize..720) {
        prop_assert_eq!(rank(&unrank(6, r)), r);
    }
}

thread_local! {
    static CTX5: CensusContext = CensusContext::new(5, Exec::Sequential).unwrap();
}
