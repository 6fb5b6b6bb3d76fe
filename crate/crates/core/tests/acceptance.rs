//! End-to-end acceptance run. Prints one line per criterion:
//! `[PASS]`, `[FAIL]` or `[KNOWN_UNATTAINABLE]`, with elapsed time and limit.

use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};

use spatialsurf::algebra::{
    check_mgr_axioms, check_quandle, check_rack_axioms, conjugation_mcq, cyclic_rack, dihedral_quandle,
    mgr_from_rack, product_rack, stabilizer_order, Algebra, FiniteMgr, GroupTable,
};
use spatialsurf::coloring::{count_colorings, count_colorings_bruteforce};
use spatialsurf::diagram::{parse_diagram, Diagram};
use spatialsurf::family::{corpus, make_dn, make_dn_prime, trivial_base};
use spatialsurf::moves::{apply_move, find_sites, random_walk, MoveKind, ALL_MOVES, SURFACE_MOVES};
use spatialsurf::seifert::{
    build_vk, congruence_witness_search, congruent_transform, gcd_profile, profiles_distinguish, random_unimodular,
    IntMatrix,
};

type Check = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

struct Outcome {
    failed: Vec<String>,
}

impl Outcome {
    fn run(&mut self, id: u32, name: &str, limit_s: u64, f: impl FnOnce() -> Check) {
        let start = Instant::now();
        let res = f();
        let el = start.elapsed();
        let over = el > Duration::from_secs(limit_s);
        let tag = if res.is_ok() && !over { "PASS" } else { "FAIL" };
        let mut line = format!("[{tag}] {id}. {name} ({:.2}s, limit {limit_s}s)", el.as_secs_f64());
        if let Err(e) = &res {
            line.push_str(&format!(": {e}"));
        } else if over {
            line.push_str(": over time limit");
        }
        println!("{line}");
        if tag == "FAIL" {
            self.failed.push(line);
        }
    }
}

fn r3xc2() -> FiniteMgr {
    mgr_from_rack(&product_rack(&dihedral_quandle(3).unwrap(), &cyclic_rack(2).unwrap())).unwrap()
}

fn crit1() -> Check {
    for n in 1..=9 {
        let r = dihedral_quandle(n).unwrap();
        ensure(check_rack_axioms(&r).passed && check_quandle(&r).passed, || format!("R_{n}"))?;
    }
    for n in 2..=6 {
        let r = cyclic_rack(n).unwrap();
        ensure(check_rack_axioms(&r).passed, || format!("C_{n} rack"))?;
        ensure(!check_quandle(&r).passed, || format!("C_{n} should not be a quandle"))?;
    }
    let p = product_rack(&dihedral_quandle(3).unwrap(), &cyclic_rack(2).unwrap());
    ensure(check_rack_axioms(&p).passed, || "R_3 x C_2".into())?;
    ensure(check_mgr_axioms(&mgr_from_rack(&p).unwrap()).passed, || "mgr(R_3 x C_2)".into())?;
    let mut groups: Vec<(String, GroupTable)> =
        (1..=8).map(|k| (format!("Z_{k}"), GroupTable::cyclic(k).unwrap())).collect();
    groups.push(("S_3".into(), GroupTable::symmetric(3).unwrap()));
    for (name, g) in &groups {
        let q = conjugation_mcq(g);
        ensure(check_mgr_axioms(&q).passed, || format!("mcq({name})"))?;
        let r = q.underlying_rack();
        ensure(check_rack_axioms(&r).passed, || format!("rack of mcq({name})"))?;
        ensure(check_mgr_axioms(&mgr_from_rack(&r).unwrap()).passed, || format!("mgr(mcq({name}))"))?;
    }
    Ok(())
}

fn crit2() -> Check {
    let p = product_rack(&dihedral_quandle(3).unwrap(), &cyclic_rack(2).unwrap());
    let n = stabilizer_order(&p).unwrap();
    ensure(n == 2, || format!("got {n}"))
}

fn small_algebras() -> Vec<(String, Box<dyn Algebra>)> {
    let mut out: Vec<(String, Box<dyn Algebra>)> = Vec::new();
    for n in 1..=6 {
        out.push((format!("R_{n}"), Box::new(dihedral_quandle(n).unwrap())));
        out.push((format!("C_{n}"), Box::new(cyclic_rack(n).unwrap())));
    }
    out.push(("R_3xC_2".into(), Box::new(product_rack(&dihedral_quandle(3).unwrap(), &cyclic_rack(2).unwrap()))));
    for n in 1..=6 {
        let m = mgr_from_rack(&dihedral_quandle(n).unwrap()).unwrap();
        if m.size() <= 12 {
            out.push((format!("mgr(R_{n})"), Box::new(m)));
        }
        let m = mgr_from_rack(&cyclic_rack(n).unwrap()).unwrap();
        if m.size() <= 12 {
            out.push((format!("mgr(C_{n})"), Box::new(m)));
        }
    }
    out.push(("mgr(R_3xC_2)".into(), Box::new(r3xc2())));
    for k in 1..=8 {
        out.push((format!("mcq(Z_{k})"), Box::new(conjugation_mcq(&GroupTable::cyclic(k).unwrap()))));
    }
    out.push(("mcq(S_3)".into(), Box::new(conjugation_mcq(&GroupTable::symmetric(3).unwrap()))));
    out
}

fn crit3() -> Check {
    let algs = small_algebras();
    let mut pairs = 0;
    for (dname, d) in corpus().into_iter().filter(|(_, d)| d.num_arcs() <= 6) {
        for (aname, x) in &algs {
            // plain racks cannot color vertices
            if d.num_vertices() > 0 && x.as_mgr().is_none() {
                continue;
            }
            let fast = count_colorings(&d, x.as_ref()).map_err(|e| format!("{dname}/{aname}: {e}"))?;
            let slow = count_colorings_bruteforce(&d, x.as_ref()).map_err(|e| format!("{dname}/{aname}: {e}"))?;
            ensure(fast == slow, || format!("{dname}/{aname}: {fast} vs {slow}"))?;
            pairs += 1;
        }
    }
    ensure(pairs > 0, || "no pairs".into())?;
    let trefoil = corpus().into_iter().find(|(n, _)| n == "trefoil").unwrap().1;
    let r3 = dihedral_quandle(3).unwrap();
    let t = count_colorings(&trefoil, &r3).unwrap();
    ensure(t == BigUint::from(9u32), || format!("trefoil/R_3 = {t}"))?;
    let circle = parse_diagram("circle a\n").unwrap();
    for (aname, x) in &algs {
        let c = count_colorings(&circle, x.as_ref()).unwrap();
        ensure(c == BigUint::from(x.size()), || format!("circle/{aname} = {c}"))?;
    }
    println!("    oracle agreed on {pairs} diagram/algebra pairs");
    Ok(())
}

fn crit4() -> Check {
    let x = r3xc2();
    for n in -2..=2 {
        let a = count_colorings(&make_dn(n, &trivial_base()), &x).unwrap();
        let b = count_colorings(&make_dn_prime(n, &trivial_base()), &x).unwrap();
        println!("    n={n}: |Col(D_n)|={a} |Col(D_n')|={b}");
        ensure(!a.is_zero() && !b.is_zero(), || format!("n={n}: zero count"))?;
        ensure((&a % 4u32).is_zero() && (&b % 4u32).is_zero(), || format!("n={n}: not divisible by 4"))?;
        ensure(b == &a * 2u32, || format!("n={n}: ratio is not 2"))?;
    }
    Ok(())
}

const WALK_DIAGRAMS: [&str; 7] = ["trefoil", "theta", "handcuff", "theta_clasp", "hopf", "Dn_1", "Dnp_m1"];

fn walk_corpus() -> Vec<(String, Diagram)> {
    corpus().into_iter().filter(|(n, _)| WALK_DIAGRAMS.contains(&n.as_str())).collect()
}

fn crit5() -> Check {
    let diagrams = walk_corpus();
    ensure(diagrams.len() >= 4, || "too few walk diagrams".into())?;
    let mgrs: Vec<(&str, FiniteMgr)> = vec![
        ("mgr(R_3xC_2)", r3xc2()),
        ("mgr(R_3)", mgr_from_rack(&dihedral_quandle(3).unwrap()).unwrap()),
        ("mgr(C_3)", mgr_from_rack(&cyclic_rack(3).unwrap()).unwrap()),
    ];
    let mcqs: Vec<(&str, FiniteMgr)> = vec![
        ("mcq(S_3)", conjugation_mcq(&GroupTable::symmetric(3).unwrap())),
        ("mcq(Z_3)", conjugation_mcq(&GroupTable::cyclic(3).unwrap())),
    ];
    let mut moves_done = 0;
    for (dname, d) in &diagrams {
        for (suite, allowed, algs) in [("surface", &SURFACE_MOVES[..], &mgrs), ("all", &ALL_MOVES[..], &mcqs)] {
            for seed in 0..2u64 {
                let (w, log) = random_walk(d, allowed, 100, seed).map_err(|e| e.to_string())?;
                moves_done += log.len();
                for (aname, x) in algs.iter() {
                    let before = count_colorings(d, x).unwrap();
                    let after = count_colorings(&w, x).unwrap();
                    ensure(before == after, || {
                        format!("{dname} {suite} walk seed {seed} / {aname}: {before} -> {after}")
                    })?;
                }
            }
        }
    }
    println!("    {moves_done} moves applied");

    // R1 is framing-sensitive for MGRs built from a non-quandle rack:
    // in mgr(C_2), x ◁ x ≠ x, so a kink on an unknot kills colorings.
    let x = mgr_from_rack(&cyclic_rack(2).unwrap()).unwrap();
    let circle = parse_diagram("circle a\n").unwrap();
    let site = find_sites(&circle, MoveKind::R1).into_iter().next().ok_or("no R1 site")?;
    let kinked = apply_move(&circle, &site).map_err(|e| e.to_string())?;
    let (a, b) = (count_colorings(&circle, &x).unwrap(), count_colorings(&kinked, &x).unwrap());
    println!("    mgr(C_2): unknot {a}, after `{site}` {b}");
    ensure(a != b, || format!("R1 left the mgr(C_2) count at {a}"))
}

fn crit6() -> Check {
    let algs: Vec<(&str, FiniteMgr)> = vec![
        ("mgr(R_3xC_2)", r3xc2()),
        ("mcq(S_3)", conjugation_mcq(&GroupTable::symmetric(3).unwrap())),
    ];
    let mut orientations = 0;
    for (dname, d) in corpus().into_iter().filter(|(_, d)| d.edges().len() <= 12) {
        let all = d.enumerate_y_orientations();
        ensure(!all.is_empty(), || format!("{dname}: no Y-orientation"))?;
        for (aname, x) in &algs {
            let base = count_colorings(&d, x).unwrap();
            for o in &all {
                let c = count_colorings(o, x).unwrap();
                ensure(c == base, || format!("{dname}/{aname}: {c} vs {base}"))?;
            }
        }
        orientations += all.len();
    }
    println!("    {orientations} orientations checked");
    Ok(())
}

fn profile_rank(m: &IntMatrix) -> usize {
    gcd_profile(m).rank()
}

fn crit7() -> Check {
    let empty = IntMatrix::zero(0);
    for m in -5..=5i64 {
        let p = gcd_profile(&build_vk(&empty, m));
        let want = BigInt::from(4 + 2 * m).abs();
        ensure(p.at(3) == &want, || format!("empty, m={m}: {} vs {want}", p.at(3)))?;
    }
    let vs = [
        IntMatrix::from_rows(&[vec![2]]),
        IntMatrix::from_rows(&[vec![1, 1], vec![0, 1]]),
        IntMatrix::from_rows(&[vec![2, 4], vec![4, 8]]),
    ];
    for v in vs.iter().chain(std::iter::once(&empty)) {
        let s = profile_rank(v);
        let gv = if s == 0 { BigInt::from(1) } else { gcd_profile(v).at(s).clone() };
        for m in -5..=5i64 {
            let p = gcd_profile(&build_vk(v, m));
            let want = BigInt::from(4 + 2 * m).abs() * &gv;
            ensure(p.at(3 + s) == &want, || format!("v={v:?}, m={m}: {} vs {want}", p.at(3 + s)))?;
            for n in -5..=5i64 {
                let got = profiles_distinguish(&build_vk(v, m), &build_vk(v, n)).unwrap();
                let want = (4 + 2 * m).abs() != (4 + 2 * n).abs();
                ensure(got == want, || format!("distinguish m={m} n={n}: {got}"))?;
            }
        }
    }
    Ok(())
}

fn crit8() -> Check {
    let tests = [
        build_vk(&IntMatrix::zero(0), 0),
        build_vk(&IntMatrix::from_rows(&[vec![2]]), 1),
        build_vk(&IntMatrix::from_rows(&[vec![1, 1], vec![0, 1]]), -3),
        IntMatrix::from_rows(&[vec![0, 1], vec![-1, 0]]),
        IntMatrix::from_rows(&[vec![2, 4, 1], vec![4, 8, 0], vec![-3, 5, 7]]),
    ];
    for (i, m) in tests.iter().enumerate() {
        let base = gcd_profile(m);
        for seed in 0..200u64 {
            let p = random_unimodular(m.size(), 12, seed);
            let t = congruent_transform(m, &p).map_err(|e| e.to_string())?;
            ensure(gcd_profile(&t) == base, || format!("matrix {i}, seed {seed}"))?;
        }
    }
    let planted = [
        (vec![vec![0, 1], vec![-1, 0]], vec![vec![1, 1], vec![0, 1]]),
        (vec![vec![2, 1], vec![0, 3]], vec![vec![1, 0], vec![2, 1]]),
        (vec![vec![1, 2], vec![2, 5]], vec![vec![0, 1], vec![1, 0]]),
        (vec![vec![3, -1], vec![1, 2]], vec![vec![1, -1], vec![0, -1]]),
    ];
    for (m, p) in &planted {
        let m1 = IntMatrix::from_rows(m);
        let m2 = congruent_transform(&m1, &IntMatrix::from_rows(p)).unwrap();
        let w = congruence_witness_search(&m1, &m2, 2)
            .map_err(|e| e.to_string())?
            .ok_or_else(|| format!("no witness for {m:?}"))?;
        ensure(w.det().abs() == BigInt::from(1), || "witness not unimodular".into())?;
        ensure(congruent_transform(&m1, &w).unwrap() == m2, || "witness does not transform".into())?;
    }
    Ok(())
}

fn stats_pair(d: &Diagram) -> (i64, usize) {
    let s = d.surface_stats();
    (s.euler, s.boundary)
}

fn crit9() -> Check {
    let circle = parse_diagram("circle a\n").unwrap();
    ensure(stats_pair(&circle) == (0, 2), || format!("circle {:?}", stats_pair(&circle)))?;
    let theta = corpus().into_iter().find(|(n, _)| n == "theta").unwrap().1;
    ensure(stats_pair(&theta) == (-1, 3), || format!("theta {:?}", stats_pair(&theta)))?;
    for n in -2..=2 {
        let (a, b) = (make_dn(n, &trivial_base()), make_dn_prime(n, &trivial_base()));
        ensure(a.surface_stats() == b.surface_stats(), || format!("D_{n} vs D_{n}'"))?;
    }
    // every move except the vertex twist
    let no_twist: Vec<MoveKind> = ALL_MOVES.iter().copied().filter(|k| *k != MoveKind::R4).collect();
    for (dname, d) in walk_corpus() {
        for seed in 0..3u64 {
            let (w, _) = random_walk(&d, &no_twist, 100, seed).map_err(|e| e.to_string())?;
            ensure(w.surface_stats() == d.surface_stats(), || format!("{dname} seed {seed}"))?;
        }
    }
    Ok(())
}

/// R4 twists a band by a half turn, so surface statistics cannot be invariant
/// under walks that include it. Confirms the obstruction instead.
fn crit9_twist() -> Check {
    let theta = corpus().into_iter().find(|(n, _)| n == "theta").unwrap().1;
    let site = find_sites(&theta, MoveKind::R4)
        .into_iter()
        .find(|s| s.variant.starts_with("expand"))
        .ok_or("no R4 site")?;
    let w = apply_move(&theta, &site).map_err(|e| e.to_string())?;
    println!("    theta {:?} -> after `{site}` {:?}", stats_pair(&theta), stats_pair(&w));
    ensure(w.surface_stats() != theta.surface_stats(), || "R4 kept the stats".into())
}

#[test]
fn acceptance() {
    let mut out = Outcome { failed: Vec::new() };
    out.run(1, "algebra axioms", 2, crit1);
    out.run(2, "stabilizer order of R_3 x C_2 is 2", 1, crit2);
    out.run(3, "coloring oracle equivalence", 30, crit3);
    out.run(4, "|Col(D_n')| = 2|Col(D_n)|, positive, divisible by 4", 60, crit4);
    out.run(5, "move invariance of coloring counts; R1 framing example", 120, crit5);
    out.run(6, "Y-orientation independence", 60, crit6);
    out.run(7, "Seifert minor-gcd formulas and distinction", 10, crit7);
    out.run(8, "congruence invariance and witness search", 30, crit8);
    out.run(9, "surface statistics (circle, theta, D_n vs D_n', walks without R4)", 10, crit9);

    let start = Instant::now();
    match crit9_twist() {
        Ok(()) => println!(
            "[KNOWN_UNATTAINABLE] 9. surface statistics invariant under walks using R4 ({:.2}s): \
             R4 changes the boundary count, confirmed",
            start.elapsed().as_secs_f64()
        ),
        Err(e) => {
            let line = format!("[FAIL] 9. R4 obstruction not reproduced: {e}");
            println!("{line}");
            out.failed.push(line);
        }
    }
    assert!(out.failed.is_empty(), "failed criteria:\n{}", out.failed.join("\n"));
}
