use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};
use proptest::prelude::*;

use spatialsurf::algebra::{
    check_mgr_axioms, check_quandle, check_rack_axioms, conjugation_mcq, cyclic_rack, dihedral_quandle,
    mgr_from_rack, product_rack, stabilizer_order, Algebra, FiniteMgr, FiniteRack, GroupTable,
};
use spatialsurf::coloring::{count_colorings, count_colorings_bruteforce, count_colorings_jobs, enumerate_colorings};
use spatialsurf::diagram::{parse_diagram, Diagram};
use spatialsurf::family::{corpus, make_dn, make_dn_prime, trefoil_base, trivial_base};
use spatialsurf::moves::{find_sites, random_walk, apply_move, MoveKind, ALL_MOVES, SURFACE_MOVES};
use spatialsurf::seifert::{
    build_vk, congruent_transform, gcd_profile, minor_gcd, profiles_distinguish, random_unimodular, IntMatrix,
};

fn small_rack() -> impl Strategy<Value = FiniteRack> {
    prop_oneof![
        (1usize..=6).prop_map(|n| dihedral_quandle(n).unwrap()),
        (1usize..=6).prop_map(|n| cyclic_rack(n).unwrap()),
        ((1usize..=3), (1usize..=3))
            .prop_map(|(a, b)| product_rack(&dihedral_quandle(a).unwrap(), &cyclic_rack(b).unwrap())),
    ]
}

fn r3xc2_mgr() -> FiniteMgr {
    mgr_from_rack(&product_rack(&dihedral_quandle(3).unwrap(), &cyclic_rack(2).unwrap())).unwrap()
}

fn corpus_diagram() -> impl Strategy<Value = (String, Diagram)> {
    let all = corpus();
    (0..all.len()).prop_map(move |i| all[i].clone())
}

fn small_corpus_diagram() -> impl Strategy<Value = (String, Diagram)> {
    let all: Vec<_> = corpus().into_iter().filter(|(_, d)| d.num_arcs() <= 6).collect();
    (0..all.len()).prop_map(move |i| all[i].clone())
}

fn int_matrix(max_n: usize, bound: i64) -> impl Strategy<Value = IntMatrix> {
    (1..=max_n).prop_flat_map(move |n| {
        proptest::collection::vec(proptest::collection::vec(-bound..=bound, n), n)
            .prop_map(|rows| IntMatrix::from_rows(&rows))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rack_constructors_pass_axioms(r in small_rack()) {
        prop_assert!(check_rack_axioms(&r).passed);
        let x = mgr_from_rack(&r).unwrap();
        prop_assert!(check_mgr_axioms(&x).passed);
        prop_assert!(x.translations_bijective());
    }

    #[test]
    fn op_inv_is_two_sided(r in small_rack()) {
        for y in 0..r.size() {
            for a in 0..r.size() {
                prop_assert_eq!(r.op_inv(r.op(a, y), y), a);
                prop_assert_eq!(r.op(r.op_inv(a, y), y), a);
            }
        }
    }

    #[test]
    fn stabilizer_order_is_exact(r in small_rack()) {
        let n = stabilizer_order(&r).unwrap();
        let power = |y: usize, k: usize, x: usize| (0..k).fold(x, |acc, _| r.op(acc, y));
        for y in 0..r.size() {
            for x in 0..r.size() {
                prop_assert_eq!(power(y, n, x), x);
            }
        }
        for m in 1..n {
            let some_moves = (0..r.size()).any(|y| (0..r.size()).any(|x| power(y, m, x) != x));
            prop_assert!(some_moves, "S_y^{} is the identity for all y", m);
        }
    }

    #[test]
    fn mgr_projection_intertwines(r in small_rack()) {
        let n = stabilizer_order(&r).unwrap();
        let x = mgr_from_rack(&r).unwrap();
        for a in 0..x.size() {
            for b in 0..x.size() {
                let (xa, _) = (a / n, a % n);
                let (yb, j) = (b / n, b % n);
                let expect = (0..j).fold(xa, |acc, _| r.op(acc, yb));
                prop_assert_eq!(x.op(a, b) / n, expect);
            }
        }
    }

    #[test]
    fn solver_matches_brute_force((name, d) in small_corpus_diagram(), k in 1usize..=4) {
        let algs: Vec<Box<dyn Algebra>> = vec![
            Box::new(mgr_from_rack(&dihedral_quandle(3).unwrap()).unwrap()),
            Box::new(conjugation_mcq(&GroupTable::cyclic(k).unwrap())),
            Box::new(mgr_from_rack(&cyclic_rack(k.min(3)).unwrap()).unwrap()),
        ];
        for x in &algs {
            prop_assert_eq!(
                count_colorings(&d, x.as_ref()).unwrap(),
                count_colorings_bruteforce(&d, x.as_ref()).unwrap(),
                "{}", name
            );
        }
    }

    #[test]
    fn walk_outputs_are_valid((_, d) in corpus_diagram(), seed in any::<u64>(), steps in 0usize..40) {
        let (w, log) = random_walk(&d, &ALL_MOVES, steps, seed).unwrap();
        prop_assert!(log.len() <= steps);
        prop_assert_eq!(w.validate(), vec![]);
        prop_assert!(w.satisfies_y());
    }

    #[test]
    fn surface_walks_preserve_counts_and_stats((name, d) in corpus_diagram(), seed in any::<u64>()) {
        let x = r3xc2_mgr();
        let (w, _) = random_walk(&d, &SURFACE_MOVES, 30, seed).unwrap();
        prop_assert_eq!(count_colorings(&w, &x).unwrap(), count_colorings(&d, &x).unwrap(), "{}", name);
        prop_assert_eq!(w.surface_stats(), d.surface_stats());
    }

    #[test]
    fn mcq_walks_preserve_counts((name, d) in corpus_diagram(), seed in any::<u64>()) {
        let x = conjugation_mcq(&GroupTable::symmetric(3).unwrap());
        let (w, _) = random_walk(&d, &ALL_MOVES, 30, seed).unwrap();
        prop_assert_eq!(count_colorings(&w, &x).unwrap(), count_colorings(&d, &x).unwrap(), "{}", name);
    }

    #[test]
    fn every_single_surface_move_preserves_counts((_, d) in corpus_diagram(), seed in any::<u64>()) {
        // scramble a little, then try every site of every surface move once
        let (w, _) = random_walk(&d, &SURFACE_MOVES, 5, seed).unwrap();
        let x = mgr_from_rack(&dihedral_quandle(3).unwrap()).unwrap();
        let base = count_colorings(&w, &x).unwrap();
        for kind in SURFACE_MOVES {
            for site in find_sites(&w, kind).into_iter().take(12) {
                let next = apply_move(&w, &site).unwrap();
                prop_assert_eq!(count_colorings(&next, &x).unwrap(), base.clone(), "{}", site);
            }
        }
    }

    #[test]
    fn y_orientations_agree((name, d) in small_corpus_diagram(), seed in any::<u64>()) {
        let (w, _) = random_walk(&d, &SURFACE_MOVES, 6, seed).unwrap();
        let x = conjugation_mcq(&GroupTable::symmetric(3).unwrap());
        let base = count_colorings(&w, &x).unwrap();
        let all = w.enumerate_y_orientations();
        prop_assert!(all.first() == Some(&w));
        for o in all {
            prop_assert_eq!(o.validate(), vec![]);
            prop_assert_eq!(count_colorings(&o, &x).unwrap(), base.clone(), "{}", name);
        }
    }

    #[test]
    fn sgd_round_trip((_, d) in corpus_diagram(), seed in any::<u64>()) {
        let (w, _) = random_walk(&d, &ALL_MOVES, 10, seed).unwrap();
        let text = w.to_sgd();
        let back = parse_diagram(&text).unwrap();
        prop_assert_eq!(&back, &w);
        prop_assert_eq!(back.to_sgd(), text);
    }

    #[test]
    fn reverse_edge_involution((_, d) in corpus_diagram(), pick in any::<prop::sample::Index>()) {
        let edges = d.edges();
        prop_assume!(!edges.is_empty());
        let e = &edges[pick.index(edges.len())];
        let once = d.reverse_edge(&e.arcs[0]).unwrap();
        prop_assert_eq!(once.reverse_edge(&e.arcs[0]).unwrap(), d.clone());
        if let Some(f) = edges.iter().find(|f| f.arcs[0] != e.arcs[0]) {
            let ab = once.reverse_edge(&f.arcs[0]).unwrap();
            let ba = d.reverse_edge(&f.arcs[0]).unwrap().reverse_edge(&e.arcs[0]).unwrap();
            prop_assert_eq!(ab, ba);
        }
    }

    #[test]
    fn euler_is_vertices_minus_edges((_, d) in corpus_diagram()) {
        let open = d.edges().iter().filter(|e| !e.closed).count() as i64;
        prop_assert_eq!(d.surface_stats().euler, d.num_vertices() as i64 - open);
    }

    #[test]
    fn disjoint_union_multiplies((_, a) in small_corpus_diagram(), (_, b) in small_corpus_diagram()) {
        let x = mgr_from_rack(&dihedral_quandle(3).unwrap()).unwrap();
        let u = a.disjoint_union(&b, "z_");
        prop_assert_eq!(
            count_colorings(&u, &x).unwrap(),
            count_colorings(&a, &x).unwrap() * count_colorings(&b, &x).unwrap()
        );
    }

    #[test]
    fn jobs_do_not_change_counts((_, d) in corpus_diagram(), jobs in 1usize..=4) {
        let x = r3xc2_mgr();
        prop_assert_eq!(count_colorings_jobs(&d, &x, jobs).unwrap(), count_colorings(&d, &x).unwrap());
    }

    #[test]
    fn profiles_survive_congruence(m in int_matrix(4, 5), seed in any::<u64>()) {
        let p = random_unimodular(m.size(), 12, seed);
        prop_assert_eq!(p.det().abs(), BigInt::from(1));
        prop_assert_eq!(gcd_profile(&congruent_transform(&m, &p).unwrap()), gcd_profile(&m));
        prop_assert!(!profiles_distinguish(&m, &congruent_transform(&m, &p).unwrap()).unwrap());
    }

    #[test]
    fn profile_zeros_propagate(m in int_matrix(4, 2)) {
        let g = gcd_profile(&m);
        if let Some(first_zero) = g.g.iter().position(|v| v.is_zero()) {
            prop_assert!(g.g[first_zero..].iter().all(|v| v.is_zero()));
        }
        prop_assert!(g.g.iter().all(|v| !v.is_negative()));
        prop_assert_eq!(minor_gcd(&m, m.size()).unwrap(), m.det().abs());
    }

    #[test]
    fn family_formula(v in int_matrix(3, 4), k in -6i64..=6) {
        let gv = gcd_profile(&v);
        let s = gv.rank();
        let big = gcd_profile(&build_vk(&v, k));
        let expect = if s == 0 {
            BigInt::from((4 + 2 * k).abs())
        } else {
            BigInt::from((4 + 2 * k).abs()) * gv.at(s)
        };
        prop_assert_eq!(big.at(3 + s), &expect);
    }
}

#[test]
fn family_ratio_positivity_and_divisibility() {
    let x = r3xc2_mgr();
    for base in [trivial_base(), trefoil_base()] {
        for n in -2..=2 {
            let a = count_colorings(&make_dn(n, &base), &x).unwrap();
            let b = count_colorings(&make_dn_prime(n, &base), &x).unwrap();
            assert!(a > BigUint::zero());
            assert!((&a % 4u32).is_zero());
            assert_eq!(b, a * 2u32, "n={n}");
        }
    }
}

#[test]
fn dn_forces_even_coordinates() {
    // mgr_from_rack(R_3 × C_2) has stabilizer order 2: element x·2 + i
    let x = r3xc2_mgr();
    for n in -1..=1 {
        for d in [make_dn(n, &trivial_base()), make_dn_prime(n, &trivial_base())] {
            let all = enumerate_colorings(&d, &x, usize::MAX).unwrap();
            assert!(!all.truncated);
            let forced: Vec<String> = d
                .edges()
                .into_iter()
                .filter(|e| e.arcs[0] == "e2" || e.arcs[0] == "e10")
                .flat_map(|e| e.arcs)
                .collect();
            assert!(!forced.is_empty());
            for c in &all.colorings {
                for a in &forced {
                    assert_eq!(c.get(a).unwrap() % 2, 0, "arc {a}");
                }
            }
        }
    }
}

#[test]
fn quandle_split() {
    for n in 1..=9 {
        assert!(check_quandle(&dihedral_quandle(n).unwrap()).passed);
    }
    for n in 2..=6 {
        assert!(!check_quandle(&cyclic_rack(n).unwrap()).passed);
    }
}

#[test]
fn kink_chain_reduces() {
    let k = spatialsurf::family::kink_chain(2, true).close();
    let mut cur = k;
    for _ in 0..2 {
        let site = find_sites(&cur, MoveKind::R1)
            .into_iter()
            .find(|s| s.variant == "reduce")
            .unwrap();
        cur = apply_move(&cur, &site).unwrap();
    }
    // back to a single unknotted circle, up to arc names
    assert_eq!(cur.num_crossings(), 0);
    assert_eq!(cur.circles().count(), 1);
    assert_eq!(cur.num_arcs(), 1);
}
