//! Reidemeister moves R1–R6 as local rewrites of the slot model.
//!
//! R1 adds or removes a kink, R2 a bigon, R3 slides a strand over a
//! crossing, R4 twists two legs of a vertex, R5 moves a strand across a
//! vertex (over or under it) and R6 is the IH-move along an edge between two
//! vertices. R3 and R6 are self-inverse; the others have expand and reduce
//! directions. Slot `k` of a vertex is an index into its canonical rotation;
//! the geometric templates put slot `k` at 0° and slots `k+1`, `k+2` at 120°
//! and 240°.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::diagram::{crossing_sign, Crossing, Diagram, Dir, End, Sign, Slot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MoveKind {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
}

pub const ALL_MOVES: [MoveKind; 6] = [
    MoveKind::R1,
    MoveKind::R2,
    MoveKind::R3,
    MoveKind::R4,
    MoveKind::R5,
    MoveKind::R6,
];

/// Moves preserving the spatial surface.
pub const SURFACE_MOVES: [MoveKind; 4] = [MoveKind::R2, MoveKind::R3, MoveKind::R5, MoveKind::R6];

/// Moves preserving the handlebody-knot.
pub const HANDLEBODY_MOVES: [MoveKind; 6] = ALL_MOVES;

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for MoveKind {
    type Err = MoveError;

    fn from_str(s: &str) -> Result<Self, MoveError> {
        ALL_MOVES
            .into_iter()
            .find(|k| k.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| MoveError::Parse(format!("unknown move kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Expand,
    Reduce,
    /// Self-inverse moves (R3, R6).
    Flip,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MoveSite {
    pub kind: MoveKind,
    pub direction: Direction,
    pub variant: String,
    pub anchors: Vec<String>,
}

impl MoveSite {
    fn new(kind: MoveKind, variant: String, anchors: Vec<String>) -> Self {
        MoveSite {
            kind,
            direction: direction_of(&variant),
            variant,
            anchors,
        }
    }
}

fn direction_of(variant: &str) -> Direction {
    if variant.starts_with("expand") {
        Direction::Expand
    } else if variant.starts_with("reduce") {
        Direction::Reduce
    } else {
        Direction::Flip
    }
}

impl fmt::Display for MoveSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.kind, self.variant)?;
        for a in &self.anchors {
            write!(f, " {a}")?;
        }
        Ok(())
    }
}

impl FromStr for MoveSite {
    type Err = MoveError;

    /// Parses one log line `<kind> <variant> <anchors…>`.
    fn from_str(line: &str) -> Result<Self, MoveError> {
        let mut parts = line.split_whitespace();
        let kind: MoveKind = parts
            .next()
            .ok_or_else(|| MoveError::Parse("empty move line".into()))?
            .parse()?;
        let variant = parts
            .next()
            .ok_or_else(|| MoveError::Parse(format!("missing variant in `{line}`")))?
            .to_string();
        Ok(MoveSite::new(kind, variant, parts.map(str::to_string).collect()))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MoveError {
    #[error("site `{0}` does not match the diagram")]
    Stale(String),
    #[error("move {0} is not allowed here")]
    NotAllowed(MoveKind),
    #[error("moves need a valid Y-oriented diagram")]
    InvalidDiagram,
    #[error("{0}")]
    Parse(String),
}

pub fn serialize_log(log: &[MoveSite]) -> String {
    log.iter().map(|s| format!("{s}\n")).collect()
}

pub fn parse_log(text: &str) -> Result<Vec<MoveSite>, MoveError> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::parse)
        .collect()
}

/// Rejects kinds outside the legal set for the chosen equivalence.
pub fn check_allowed(allowed: &[MoveKind], surface: bool) -> Result<(), MoveError> {
    let legal: &[MoveKind] = if surface { &SURFACE_MOVES } else { &HANDLEBODY_MOVES };
    match allowed.iter().find(|k| !legal.contains(k)) {
        Some(&k) => Err(MoveError::NotAllowed(k)),
        None => Ok(()),
    }
}

// Geometry of the local templates.

const SQRT3: f64 = 1.732_050_807_568_877_2;

fn slot_angle_dir(offset: usize) -> (f64, f64) {
    match offset % 3 {
        0 => (1.0, 0.0),
        1 => (-0.5, SQRT3 / 2.0),
        _ => (-0.5, -SQRT3 / 2.0),
    }
}

fn along(v: (f64, f64), dir: Dir) -> (f64, f64) {
    match dir {
        Dir::Out => v,
        Dir::In => (-v.0, -v.1),
    }
}

const UP: (f64, f64) = (0.0, 1.0);
const DOWN: (f64, f64) = (0.0, -1.0);

/// Signs of a twisted pair of legs: the strand in slot `k+1` leaves the
/// crossing along `(−1, −√3)`, the one in slot `k+2` along `(−1, √3)`.
fn twist_sign(over_offset: usize, over_dir: Dir, under_dir: Dir) -> Sign {
    let first = (-1.0, -SQRT3);
    let second = (-1.0, SQRT3);
    let (o, u) = if over_offset == 1 { (first, second) } else { (second, first) };
    crossing_sign(along(o, over_dir), along(u, under_dir))
}

// Small helpers over the diagram.

fn base_of(id: &str) -> &str {
    id.split('.').next().unwrap_or(id)
}

fn fresh(d: &Diagram, anchor: &str) -> String {
    d.fresh_id(base_of(anchor))
}

fn rotation_from(d: &Diagram, v: &str, k: usize) -> [Slot; 3] {
    let r = d.vertex(v).expect("vertex exists").rotation();
    [r[k].clone(), r[(k + 1) % 3].clone(), r[(k + 2) % 3].clone()]
}

fn set_rotation_from(d: &mut Diagram, v: &str, rot: [Slot; 3]) {
    d.vertex_mut(v).expect("vertex exists").set_rotation(rot);
}

/// Points the head of `arc` at `new` instead.
fn redirect_head(d: &mut Diagram, arc: &str, new: &str) {
    let end = d.heads().get(arc).cloned();
    match end {
        Some(End::Crossing(c)) => d.crossings.get_mut(&c).unwrap().under_in = new.to_string(),
        Some(End::Vertex(v, i)) => d.vertex_mut(&v).unwrap().slots_mut()[i].arc = new.to_string(),
        None => {}
    }
}

fn other_under(c: &Crossing, arc: &str) -> String {
    if c.under_in == arc {
        c.under_out.clone()
    } else {
        c.under_in.clone()
    }
}

fn is_clean(d: &Diagram, arc: &str) -> bool {
    !d.is_over_anywhere(arc)
}

/// Arc in slot `k` of `v` together with the crossing at its other end, when
/// that end is an undercrossing.
fn leg_crossing<'a>(
    d: &'a Diagram,
    heads: &std::collections::HashMap<&str, End>,
    tails: &std::collections::HashMap<&str, End>,
    slot: &Slot,
) -> Option<&'a Crossing> {
    let far = match slot.dir {
        Dir::Out => heads.get(slot.arc.as_str()),
        Dir::In => tails.get(slot.arc.as_str()),
    };
    match far {
        Some(End::Crossing(c)) => d.crossing(c),
        _ => None,
    }
}

fn usable(d: &Diagram) -> bool {
    d.is_valid() && d.satisfies_y()
}

/// All sites of `kind` in both directions, in a deterministic order.
pub fn find_sites(d: &Diagram, kind: MoveKind) -> Vec<MoveSite> {
    if !usable(d) {
        return Vec::new();
    }
    match kind {
        MoveKind::R1 => r1_sites(d),
        MoveKind::R2 => r2_sites(d),
        MoveKind::R3 => r3_sites(d),
        MoveKind::R4 => r4_sites(d),
        MoveKind::R5 => r5_sites(d),
        MoveKind::R6 => r6_sites(d),
    }
}

/// Applies `site`, rejecting it unless `find_sites` reports it for `d`.
pub fn apply_move(d: &Diagram, site: &MoveSite) -> Result<Diagram, MoveError> {
    if !usable(d) {
        return Err(MoveError::InvalidDiagram);
    }
    if !find_sites(d, site.kind).contains(site) {
        return Err(MoveError::Stale(site.to_string()));
    }
    Ok(rewrite(d, site))
}

fn rewrite(d: &Diagram, site: &MoveSite) -> Diagram {
    let mut out = d.clone();
    match site.kind {
        MoveKind::R1 => r1_apply(&mut out, site),
        MoveKind::R2 => r2_apply(&mut out, site),
        MoveKind::R3 => r3_apply(&mut out, site),
        MoveKind::R4 => r4_apply(&mut out, site),
        MoveKind::R5 => r5_apply(&mut out, site),
        MoveKind::R6 => r6_apply(&mut out, site),
    }
    debug_assert!(usable(&out), "{} broke the diagram", site);
    out
}

/// Applies `steps` moves drawn from `allowed`: each step picks a
/// (kind, direction) group uniformly among those with sites, then a site
/// uniformly within it. Stops early when nothing applies.
pub fn random_walk(
    d: &Diagram,
    allowed: &[MoveKind],
    steps: usize,
    seed: u64,
) -> Result<(Diagram, Vec<MoveSite>), MoveError> {
    if !usable(d) {
        return Err(MoveError::InvalidDiagram);
    }
    let kinds: BTreeSet<MoveKind> = allowed.iter().copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cur = d.clone();
    let mut log = Vec::with_capacity(steps);
    for _ in 0..steps {
        let mut groups: BTreeMap<(MoveKind, Direction), Vec<MoveSite>> = BTreeMap::new();
        for &k in &kinds {
            for s in find_sites(&cur, k) {
                groups.entry((k, s.direction)).or_default().push(s);
            }
        }
        if groups.is_empty() {
            break;
        }
        let g = rng.gen_range(0..groups.len());
        let sites = groups.into_values().nth(g).unwrap();
        let site = sites[rng.gen_range(0..sites.len())].clone();
        cur = rewrite(&cur, &site);
        log.push(site);
    }
    Ok((cur, log))
}

/// Replays a log, checking every step.
pub fn replay(d: &Diagram, log: &[MoveSite]) -> Result<Diagram, MoveError> {
    log.iter().try_fold(d.clone(), |cur, s| apply_move(&cur, s))
}

// R1: kinks.

fn r1_sites(d: &Diagram) -> Vec<MoveSite> {
    let mut out = Vec::new();
    for a in d.arcs() {
        let firsts: &[&str] = if d.is_circle(a) { &["over"] } else { &["over", "under"] };
        for first in firsts {
            for sign in ["pos", "neg"] {
                out.push(MoveSite::new(
                    MoveKind::R1,
                    format!("expand-{first}-{sign}"),
                    vec![a.to_string()],
                ));
            }
        }
    }
    for c in d.crossings() {
        if c.over == c.under_in || c.over == c.under_out {
            out.push(MoveSite::new(MoveKind::R1, "reduce".into(), vec![c.id.clone()]));
        }
    }
    out
}

fn parse_sign(tag: &str) -> Sign {
    if tag == "pos" {
        Sign::Pos
    } else {
        Sign::Neg
    }
}

fn r1_apply(d: &mut Diagram, site: &MoveSite) {
    let anchor = &site.anchors[0];
    if site.direction == Direction::Reduce {
        let c = d.remove_crossing(anchor).unwrap();
        if c.under_in == c.under_out {
            d.circles.insert(c.under_in.clone());
        } else {
            d.merge_arc_into(&c.under_out, &c.under_in);
        }
        return;
    }
    let mut parts = site.variant.split('-').skip(1);
    let first = parts.next().unwrap();
    let sign = parse_sign(parts.next().unwrap());
    let a = anchor.clone();
    let id = fresh(d, &a);
    if d.is_circle(&a) {
        d.uncircle(&a);
        d.add_crossing(&id, &a, &a, &a, sign);
        return;
    }
    let a_new = id;
    d.add_arc(a_new.clone());
    redirect_head(d, &a, &a_new);
    let cid = fresh(d, &a);
    let over = if first == "over" { &a } else { &a_new };
    d.add_crossing(&cid, over, &a, &a_new, sign);
}

// R2: bigons.

fn r2_sites(d: &Diagram) -> Vec<MoveSite> {
    let mut out = Vec::new();
    // arcs touching a common crossing or vertex can be pushed together
    let mut near: BTreeSet<(&str, &str)> = BTreeSet::new();
    let mut groups: Vec<Vec<&str>> = Vec::new();
    for c in d.crossings() {
        groups.push(vec![&c.over, &c.under_in, &c.under_out]);
    }
    for v in d.vertices() {
        groups.push(v.rotation().iter().map(|s| s.arc.as_str()).collect());
    }
    for g in &groups {
        for &a in g {
            for &b in g {
                if a != b {
                    near.insert((a, b));
                }
            }
        }
    }
    let involved: BTreeSet<&str> = groups.iter().flatten().copied().collect();
    for u in d.arcs() {
        for o in d.arcs() {
            let free = |a: &str| d.is_circle(a) && !involved.contains(a);
            if u != o && (near.contains(&(u, o)) || free(u) || free(o)) {
                for sign in ["pos", "neg"] {
                    out.push(MoveSite::new(
                        MoveKind::R2,
                        format!("expand-{sign}"),
                        vec![u.to_string(), o.to_string()],
                    ));
                }
            }
        }
    }
    let mut by_in: BTreeMap<&str, Vec<&Crossing>> = BTreeMap::new();
    for c in d.crossings() {
        by_in.entry(&c.under_in).or_default().push(c);
    }
    for c1 in d.crossings() {
        let m = &c1.under_out;
        if m == &c1.under_in || !is_clean(d, m) {
            continue;
        }
        for c2 in by_in.get(m.as_str()).into_iter().flatten() {
            if c2.id != c1.id && c2.over == c1.over && c2.sign != c1.sign && c2.under_out != *m {
                out.push(MoveSite::new(
                    MoveKind::R2,
                    "reduce".into(),
                    vec![c1.id.clone(), c2.id.clone()],
                ));
            }
        }
    }
    out
}

fn r2_apply(d: &mut Diagram, site: &MoveSite) {
    if site.direction == Direction::Reduce {
        let c1 = d.remove_crossing(&site.anchors[0]).unwrap();
        let c2 = d.remove_crossing(&site.anchors[1]).unwrap();
        d.remove_arc(&c1.under_out);
        if c1.under_in == c2.under_out {
            d.circles.insert(c1.under_in.clone());
        } else {
            d.merge_arc_into(&c2.under_out, &c1.under_in);
        }
        return;
    }
    let sign = parse_sign(site.variant.trim_start_matches("expand-"));
    let (u, o) = (site.anchors[0].clone(), site.anchors[1].clone());
    let um = fresh(d, &u);
    d.add_arc(um.clone());
    let ub = if d.is_circle(&u) {
        d.uncircle(&u);
        u.clone()
    } else {
        let ub = fresh(d, &u);
        d.add_arc(ub.clone());
        redirect_head(d, &u, &ub);
        ub
    };
    let c1 = fresh(d, &u);
    d.add_crossing(&c1, &o, &u, &um, sign);
    let c2 = fresh(d, &u);
    d.add_crossing(&c2, &o, &um, &ub, sign.flip());
}

// R3: slide the top strand across the crossing of the other two.

fn r3_sites(d: &Diagram) -> Vec<MoveSite> {
    let mut out = Vec::new();
    for ctm in d.crossings() {
        for ctb in d.crossings() {
            for cmb in d.crossings() {
                if r3_mid(d, ctm, ctb, cmb).is_some() {
                    out.push(MoveSite::new(
                        MoveKind::R3,
                        "slide".into(),
                        vec![ctm.id.clone(), ctb.id.clone(), cmb.id.clone()],
                    ));
                }
            }
        }
    }
    out
}

/// The bottom-strand piece between `ctb` and `cmb` that the slide shortens,
/// with whether it leaves `ctb` (true) or enters it (false).
fn r3_mid<'a>(d: &Diagram, ctm: &Crossing, ctb: &'a Crossing, cmb: &Crossing) -> Option<(&'a str, bool)> {
    let t = &ctm.over;
    let (m1, m2) = (&ctm.under_in, &ctm.under_out);
    if m1 == m2 || t == m1 || t == m2 {
        return None;
    }
    if &ctb.over != t || ctb.id == ctm.id || ctb.under_in == ctb.under_out {
        return None;
    }
    if cmb.id == ctm.id || cmb.id == ctb.id || cmb.under_in == cmb.under_out {
        return None;
    }
    if &cmb.over != m1 && &cmb.over != m2 {
        return None;
    }
    let mx = &cmb.over;
    for mid in [&ctb.under_in, &ctb.under_out] {
        if mid == m1 || mid == m2 || !is_clean(d, mid) {
            continue;
        }
        let mid_first = mid == &ctb.under_out;
        // mid runs from one crossing to the other
        let joined = if mid_first { &cmb.under_in == mid } else { &cmb.under_out == mid };
        if joined && (ctm.src() == mx) == (ctb.src() == mid) {
            return Some((mid.as_str(), mid_first));
        }
    }
    None
}

fn r3_apply(d: &mut Diagram, site: &MoveSite) {
    let ctm = d.crossing(&site.anchors[0]).unwrap().clone();
    let ctb = d.crossing(&site.anchors[1]).unwrap().clone();
    let cmb = d.crossing(&site.anchors[2]).unwrap().clone();
    let my = if cmb.over == ctm.under_in {
        ctm.under_out.clone()
    } else {
        ctm.under_in.clone()
    };
    let (mid, mid_first) = r3_mid(d, &ctm, &ctb, &cmb).unwrap();
    let mid = mid.to_string();
    let mid = &mid;
    let new_mid = fresh(d, mid);
    d.remove_arc(mid);
    d.add_arc(new_mid.clone());
    let ctb_new = d.crossings.get_mut(&ctb.id).unwrap();
    if mid_first {
        // p → ctb → mid → cmb → q   becomes   p → cmb → mid' → ctb → q
        ctb_new.under_in = new_mid.clone();
        ctb_new.under_out = cmb.under_out.clone();
        let cmb_new = d.crossings.get_mut(&cmb.id).unwrap();
        cmb_new.under_in = ctb.under_in.clone();
        cmb_new.under_out = new_mid;
        cmb_new.over = my;
    } else {
        // q → cmb → mid → ctb → p   becomes   q → ctb → mid' → cmb → p
        ctb_new.under_in = cmb.under_in.clone();
        ctb_new.under_out = new_mid.clone();
        let cmb_new = d.crossings.get_mut(&cmb.id).unwrap();
        cmb_new.under_in = new_mid;
        cmb_new.under_out = ctb.under_out.clone();
        cmb_new.over = my;
    }
}

// R4: twist two legs of a vertex around each other.

fn r4_sites(d: &Diagram) -> Vec<MoveSite> {
    let mut out = Vec::new();
    let heads = d.heads();
    let tails = d.tails();
    for v in d.vertices() {
        for k in 0..3 {
            for leg in [1, 2] {
                out.push(MoveSite::new(
                    MoveKind::R4,
                    format!("expand-k{k}-over{leg}"),
                    vec![v.id.clone()],
                ));
            }
            let rot = rotation_from(d, &v.id, k);
            for under in [1, 2] {
                let over = 3 - under;
                let (us, os) = (&rot[under], &rot[over]);
                if us.arc == os.arc || !is_clean(d, &us.arc) {
                    continue;
                }
                let Some(c) = leg_crossing(d, &heads, &tails, us) else {
                    continue;
                };
                if c.under_in == c.under_out || c.over != os.arc {
                    continue;
                }
                if other_under(c, &us.arc) == os.arc {
                    continue;
                }
                if c.sign == twist_sign(over, os.dir, us.dir) {
                    out.push(MoveSite::new(
                        MoveKind::R4,
                        format!("reduce-k{k}-under{under}"),
                        vec![v.id.clone(), c.id.clone()],
                    ));
                }
            }
        }
    }
    out
}

/// Parses the `k<slot>` field and the trailing digit of the next field.
fn slot_fields(variant: &str) -> (usize, usize) {
    let mut parts = variant.split('-').skip(1);
    let k = parts.next().unwrap()[1..].parse().unwrap();
    let leg = parts.next().unwrap();
    (k, leg[leg.len() - 1..].parse().unwrap())
}

fn r4_apply(d: &mut Diagram, site: &MoveSite) {
    let v = site.anchors[0].clone();
    let (k, leg) = slot_fields(&site.variant);
    let rot = rotation_from(d, &v, k);
    if site.direction == Direction::Reduce {
        let c = d.remove_crossing(&site.anchors[1]).unwrap();
        let under = leg;
        let us = &rot[under];
        let cont = other_under(&c, &us.arc);
        d.remove_arc(&us.arc);
        let new = if under == 1 {
            // (stem, A↓, B) → (stem, B, cont A)
            [rot[0].clone(), rot[2].clone(), Slot::new(cont, us.dir)]
        } else {
            // (stem, A, B↓) → (stem, cont B, A)
            [rot[0].clone(), Slot::new(cont, us.dir), rot[1].clone()]
        };
        set_rotation_from(d, &v, new);
        return;
    }
    // over1: (stem, P, Q) → (stem, Q_in, P) with P over; over2: → (stem, Q, P_in)
    let (p, q) = (rot[1].clone(), rot[2].clone());
    let (over, under) = if leg == 1 { (&p, &q) } else { (&q, &p) };
    let inner = fresh(d, &v);
    d.add_arc(inner.clone());
    let new = if leg == 1 {
        [rot[0].clone(), Slot::new(inner.clone(), q.dir), p.clone()]
    } else {
        [rot[0].clone(), q.clone(), Slot::new(inner.clone(), p.dir)]
    };
    set_rotation_from(d, &v, new);
    let (cin, cout) = match under.dir {
        Dir::Out => (inner.clone(), under.arc.clone()),
        Dir::In => (under.arc.clone(), inner.clone()),
    };
    let over_offset = if leg == 1 { 2 } else { 1 };
    let sign = twist_sign(over_offset, over.dir, under.dir);
    let cid = fresh(d, &v);
    d.add_crossing(&cid, &over.arc, &cin, &cout, sign);
}

// R5: a strand S crosses the two legs of a vertex or, after the move, its stem.

/// S direction making the predicted signs match, if any.
fn infer_s_dir(predict: impl Fn((f64, f64)) -> bool) -> Option<(f64, f64)> {
    [UP, DOWN].into_iter().find(|&s| predict(s))
}

/// S direction for the under variant, legs side. Going up, S meets the
/// slot `k+2` leg first.
fn under_s_dir(rot: &[Slot; 3], c_first: &Crossing, c_second: &Crossing) -> Option<(f64, f64)> {
    let leg_dir = |i: usize| along(slot_angle_dir(i), rot[i].dir);
    infer_s_dir(|s| {
        let (a, b) = if s == UP { (2, 1) } else { (1, 2) };
        c_first.over == rot[a].arc
            && c_second.over == rot[b].arc
            && crossing_sign(leg_dir(a), s) == c_first.sign
            && crossing_sign(leg_dir(b), s) == c_second.sign
    })
}

fn r5_sites(d: &Diagram) -> Vec<MoveSite> {
    let mut out = Vec::new();
    let heads = d.heads();
    let tails = d.tails();
    for v in d.vertices() {
        let arcs: BTreeSet<&str> = v.rotation().iter().map(|s| s.arc.as_str()).collect();
        for k in 0..3 {
            let rot = rotation_from(d, &v.id, k);
            let leg_dir = |i: usize| along(slot_angle_dir(i), rot[i].dir);

            // over, legs side: S over both legs near the vertex
            let c1 = leg_crossing(d, &heads, &tails, &rot[1]);
            let c2 = leg_crossing(d, &heads, &tails, &rot[2]);
            if let (Some(c1), Some(c2)) = (c1, c2) {
                let clean_legs = rot[1].arc != rot[2].arc
                    && is_clean(d, &rot[1].arc)
                    && is_clean(d, &rot[2].arc)
                    && c1.id != c2.id
                    && c1.under_in != c1.under_out
                    && c2.under_in != c2.under_out;
                let outer_free = !arcs.contains(other_under(c1, &rot[1].arc).as_str())
                    && !arcs.contains(other_under(c2, &rot[2].arc).as_str());
                if clean_legs
                    && outer_free
                    && c1.over == c2.over
                    && !arcs.contains(c1.over.as_str())
                {
                    let fits = |s| {
                        crossing_sign(s, leg_dir(1)) == c1.sign
                            && crossing_sign(s, leg_dir(2)) == c2.sign
                    };
                    if infer_s_dir(fits).is_some() {
                        out.push(MoveSite::new(
                            MoveKind::R5,
                            format!("reduce-k{k}-over"),
                            vec![v.id.clone(), c1.id.clone(), c2.id.clone()],
                        ));
                    }
                }
            }

            // over, stem side
            if let Some(c) = leg_crossing(d, &heads, &tails, &rot[0]) {
                if is_clean(d, &rot[0].arc)
                    && c.under_in != c.under_out
                    && !arcs.contains(c.over.as_str())
                    && !arcs.contains(other_under(c, &rot[0].arc).as_str())
                {
                    out.push(MoveSite::new(
                        MoveKind::R5,
                        format!("expand-k{k}-over"),
                        vec![v.id.clone(), c.id.clone()],
                    ));
                }
            }

            // under, legs side: S cut by both legs, first by the leg it meets first
            for c_first in d.crossings() {
                let m = &c_first.under_out;
                if m == &c_first.under_in || !is_clean(d, m) || arcs.contains(m.as_str()) {
                    continue;
                }
                for c_second in d.crossings().filter(|c| &c.under_in == m && c.id != c_first.id) {
                    if c_second.under_out == *m {
                        continue;
                    }
                    if under_s_dir(&rot, c_first, c_second).is_some() {
                        out.push(MoveSite::new(
                            MoveKind::R5,
                            format!("reduce-k{k}-under"),
                            vec![v.id.clone(), c_first.id.clone(), c_second.id.clone()],
                        ));
                    }
                }
            }

            // under, stem side
            for c in d.crossings().filter(|c| c.over == rot[0].arc) {
                if !arcs.contains(c.under_in.as_str()) && !arcs.contains(c.under_out.as_str()) {
                    out.push(MoveSite::new(
                        MoveKind::R5,
                        format!("expand-k{k}-under"),
                        vec![v.id.clone(), c.id.clone()],
                    ));
                }
            }
        }
    }
    out
}

fn r5_apply(d: &mut Diagram, site: &MoveSite) {
    let v = site.anchors[0].clone();
    let mut parts = site.variant.split('-').skip(1);
    let k: usize = parts.next().unwrap()[1..].parse().unwrap();
    let over = parts.next().unwrap() == "over";
    let rot = rotation_from(d, &v, k);
    let leg_dir = |i: usize| along(slot_angle_dir(i), rot[i].dir);
    let stem_dir = leg_dir(0);
    match (site.direction, over) {
        (Direction::Reduce, true) => {
            let c1 = d.remove_crossing(&site.anchors[1]).unwrap();
            let c2 = d.remove_crossing(&site.anchors[2]).unwrap();
            let s_arc = c1.over.clone();
            let s = infer_s_dir(|s| crossing_sign(s, leg_dir(1)) == c1.sign).unwrap();
            for (c, slot) in [(&c1, &rot[1]), (&c2, &rot[2])] {
                let outer = other_under(c, &slot.arc);
                d.merge_arc_into(&slot.arc, &outer);
            }
            let stem = &rot[0];
            let inner = fresh(d, &v);
            d.add_arc(inner.clone());
            let mut new = rotation_from(d, &v, k);
            new[0] = Slot::new(inner.clone(), stem.dir);
            set_rotation_from(d, &v, new);
            let (cin, cout) = match stem.dir {
                Dir::Out => (inner, stem.arc.clone()),
                Dir::In => (stem.arc.clone(), inner),
            };
            let cid = fresh(d, &v);
            d.add_crossing(&cid, &s_arc, &cin, &cout, crossing_sign(s, stem_dir));
        }
        (Direction::Expand, true) => {
            let c = d.remove_crossing(&site.anchors[1]).unwrap();
            let s = infer_s_dir(|s| crossing_sign(s, stem_dir) == c.sign).unwrap();
            let outer = other_under(&c, &rot[0].arc);
            d.merge_arc_into(&rot[0].arc, &outer);
            let mut new = rotation_from(d, &v, k);
            for i in [1, 2] {
                let leg = rot[i].clone();
                let inner = fresh(d, &v);
                d.add_arc(inner.clone());
                new[i] = Slot::new(inner.clone(), leg.dir);
                let (cin, cout) = match leg.dir {
                    Dir::Out => (inner, leg.arc.clone()),
                    Dir::In => (leg.arc.clone(), inner),
                };
                let cid = fresh(d, &v);
                d.add_crossing(&cid, &c.over, &cin, &cout, crossing_sign(s, leg_dir(i)));
            }
            set_rotation_from(d, &v, new);
        }
        (Direction::Reduce, false) => {
            let c1 = d.remove_crossing(&site.anchors[1]).unwrap();
            let c2 = d.remove_crossing(&site.anchors[2]).unwrap();
            let s = under_s_dir(&rot, &c1, &c2).unwrap();
            d.remove_arc(&c1.under_out);
            let cid = fresh(d, &v);
            d.add_crossing(
                &cid,
                &rot[0].arc,
                &c1.under_in,
                &c2.under_out,
                crossing_sign(stem_dir, s),
            );
        }
        (Direction::Expand, false) => {
            let c = d.remove_crossing(&site.anchors[1]).unwrap();
            let s = infer_s_dir(|s| crossing_sign(stem_dir, s) == c.sign).unwrap();
            let (a, b) = if s == UP { (2, 1) } else { (1, 2) };
            let m = fresh(d, &v);
            d.add_arc(m.clone());
            let c1 = fresh(d, &v);
            d.add_crossing(&c1, &rot[a].arc, &c.under_in, &m, crossing_sign(leg_dir(a), s));
            let c2 = fresh(d, &v);
            d.add_crossing(&c2, &rot[b].arc, &m, &c.under_out, crossing_sign(leg_dir(b), s));
        }
        (Direction::Flip, _) => unreachable!("R5 has a direction"),
    }
}

// R6: IH-move.

fn r6_sites(d: &Diagram) -> Vec<MoveSite> {
    let heads = d.heads();
    let tails = d.tails();
    let mut out = Vec::new();
    for e in d.arcs() {
        if d.is_circle(e) || !is_clean(d, e) {
            continue;
        }
        let (Some(End::Vertex(u, _)), Some(End::Vertex(w, _))) = (tails.get(e), heads.get(e)) else {
            continue;
        };
        if u != w && r6_result(d, e).is_some() {
            out.push(MoveSite::new(MoveKind::R6, "ih".into(), vec![e.to_string()]));
        }
    }
    out
}

/// New rotations `(u', w')` for the IH-move along `e` from `u` to `w`.
fn r6_result(d: &Diagram, e: &str) -> Option<(String, [Slot; 3], String, [Slot; 3])> {
    let (Some(End::Vertex(u, i)), Some(End::Vertex(w, j))) = (d.tails().get(e).cloned(), d.heads().get(e).cloned())
    else {
        return None;
    };
    let x = rotation_from(d, &u, i);
    let y = rotation_from(d, &w, j);
    let valid = |r: &[Slot; 3]| {
        let outs = r.iter().filter(|s| s.dir == Dir::Out).count();
        outs == 1 || outs == 2
    };
    for (l_dir, r_dir) in [(Dir::Out, Dir::In), (Dir::In, Dir::Out)] {
        let l = [Slot::new(e, l_dir), x[2].clone(), y[1].clone()];
        let r = [Slot::new(e, r_dir), y[2].clone(), x[1].clone()];
        if valid(&l) && valid(&r) {
            return Some((u, l, w, r));
        }
    }
    None
}

fn r6_apply(d: &mut Diagram, site: &MoveSite) {
    let (u, l, w, r) = r6_result(d, &site.anchors[0]).unwrap();
    set_rotation_from(d, &u, l);
    set_rotation_from(d, &w, r);
}
