//! Colorings of Y-oriented diagrams by racks and MGRs.
//!
//! A crossing imposes `C(dst) = C(src) ◁ C(over)` (see [`Crossing::src`]); a
//! vertex imposes `C(left) · C(right) = C(stem)` with all three colors in one
//! group (see [`Vertex::product_arcs`]).
//!
//! The solver propagates constraints that leave a single candidate for their
//! only uncolored arc and otherwise branches on the lowest-id uncolored arc,
//! trying elements in ascending order. Counting splits the constraint graph
//! into independent components and multiplies.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{Algebra, Elem, FiniteMgr};
use crate::diagram::{Crossing, Diagram, Vertex};

/// Default bound on `|X|^{#arcs}` for [`count_colorings_bruteforce`].
pub const BRUTE_FORCE_BOUND: u128 = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ColoringError {
    #[error("coloring does not assign arc `{0}`")]
    MissingArc(String),
    #[error("coloring assigns {value} to arc `{arc}`, outside 0..{size}")]
    OutOfRange { arc: String, value: Elem, size: usize },
    #[error("vertex `{0}` needs an MGR; a plain rack colors vertex-free diagrams only")]
    NeedsMgr(String),
    #[error("vertex `{0}` violates the Y-condition")]
    NotYOriented(String),
    #[error("invalid diagram: {0}")]
    InvalidDiagram(String),
    #[error("right translations of the algebra are not bijective")]
    NotBijective,
    #[error("brute force would visit {size}^{arcs} assignments, above the bound {bound}")]
    TooLarge { size: usize, arcs: usize, bound: u128 },
}

/// An assignment of algebra elements to arcs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coloring {
    pub assignment: BTreeMap<String, Elem>,
}

impl Coloring {
    pub fn get(&self, arc: &str) -> Option<Elem> {
        self.assignment.get(arc).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub colorings: Vec<Coloring>,
    pub truncated: bool,
}

fn mgr_for<'a>(d: &Diagram, x: &'a dyn Algebra) -> Result<Option<&'a FiniteMgr>, ColoringError> {
    match (d.vertices().next(), x.as_mgr()) {
        (Some(v), None) => Err(ColoringError::NeedsMgr(v.id.clone())),
        (_, m) => Ok(m),
    }
}

fn crossing_holds(x: &dyn Algebra, c: &Crossing, col: impl Fn(&str) -> Elem) -> bool {
    x.op(col(c.src()), col(&c.over)) == col(c.dst())
}

fn vertex_holds(
    m: &FiniteMgr,
    v: &Vertex,
    col: impl Fn(&str) -> Elem,
) -> Result<bool, ColoringError> {
    let (l, r, s) = v
        .product_arcs()
        .ok_or_else(|| ColoringError::NotYOriented(v.id.clone()))?;
    Ok(m.mul(col(l), col(r)) == Some(col(s)))
}

/// Checks every crossing and vertex condition.
pub fn is_coloring(d: &Diagram, x: &dyn Algebra, c: &Coloring) -> Result<bool, ColoringError> {
    let mgr = mgr_for(d, x)?;
    for arc in d.arcs() {
        match c.get(arc) {
            None => return Err(ColoringError::MissingArc(arc.to_string())),
            Some(v) if v >= x.size() => {
                return Err(ColoringError::OutOfRange {
                    arc: arc.to_string(),
                    value: v,
                    size: x.size(),
                })
            }
            _ => {}
        }
    }
    let col = |a: &str| c.assignment[a];
    for cr in d.crossings() {
        if !crossing_holds(x, cr, col) {
            return Ok(false);
        }
    }
    if let Some(m) = mgr {
        for v in d.vertices() {
            if !vertex_holds(m, v, col)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Exhaustive count over all `|X|^{#arcs}` assignments, refusing when that
/// exceeds [`BRUTE_FORCE_BOUND`].
pub fn count_colorings_bruteforce(d: &Diagram, x: &dyn Algebra) -> Result<BigUint, ColoringError> {
    count_colorings_bruteforce_bounded(d, x, BRUTE_FORCE_BOUND)
}

pub fn count_colorings_bruteforce_bounded(
    d: &Diagram,
    x: &dyn Algebra,
    bound: u128,
) -> Result<BigUint, ColoringError> {
    let mgr = mgr_for(d, x)?;
    let arcs: Vec<&str> = d.arcs().collect();
    let n = x.size();
    let total = (n as u128).checked_pow(arcs.len() as u32);
    if total.is_none_or(|t| t > bound) {
        return Err(ColoringError::TooLarge {
            size: n,
            arcs: arcs.len(),
            bound,
        });
    }
    let index: BTreeMap<&str, usize> = arcs.iter().enumerate().map(|(i, a)| (*a, i)).collect();
    let mut vals = vec![0usize; arcs.len()];
    let mut count: u128 = 0;
    loop {
        let col = |a: &str| vals[index[a]];
        let mut ok = d.crossings().all(|c| crossing_holds(x, c, col));
        if ok {
            if let Some(m) = mgr {
                for v in d.vertices() {
                    if !vertex_holds(m, v, col)? {
                        ok = false;
                        break;
                    }
                }
            }
        }
        count += ok as u128;
        // odometer, last arc fastest
        let mut i = arcs.len();
        loop {
            if i == 0 {
                return Ok(BigUint::from(count));
            }
            i -= 1;
            vals[i] += 1;
            if vals[i] < n {
                break;
            }
            vals[i] = 0;
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Constraint {
    /// `dst = src ◁ over`
    Cross { src: usize, over: usize, dst: usize },
    /// `a · b = c`
    Prod { a: usize, b: usize, c: usize },
}

impl Constraint {
    fn arcs(&self) -> [usize; 3] {
        match *self {
            Constraint::Cross { src, over, dst } => [src, over, dst],
            Constraint::Prod { a, b, c } => [a, b, c],
        }
    }
}

const NONE: usize = usize::MAX;

/// Up to this many colorings, enumeration lists all of them and sorts.
const COLLECT_LIMIT: u64 = 1 << 20;

struct Solver<'a> {
    x: &'a dyn Algebra,
    mgr: Option<&'a FiniteMgr>,
    names: Vec<String>,
    cons: Vec<Constraint>,
    by_arc: Vec<Vec<usize>>,
}

/// Result of examining one constraint under a partial coloring.
enum Status {
    Satisfied,
    Violated,
    Forced(usize, Elem),
    Open,
}

impl<'a> Solver<'a> {
    fn new(d: &Diagram, x: &'a dyn Algebra) -> Result<Self, ColoringError> {
        let violations = d.validate();
        if let Some(v) = violations.first() {
            return Err(ColoringError::InvalidDiagram(v.to_string()));
        }
        let mgr = mgr_for(d, x)?;
        if !x.translations_bijective() {
            return Err(ColoringError::NotBijective);
        }
        let names: Vec<String> = d.arcs().map(str::to_string).collect();
        let index: BTreeMap<&str, usize> =
            names.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
        let mut cons = Vec::new();
        for c in d.crossings() {
            cons.push(Constraint::Cross {
                src: index[c.src()],
                over: index[c.over.as_str()],
                dst: index[c.dst()],
            });
        }
        for v in d.vertices() {
            let (l, r, s) = v
                .product_arcs()
                .ok_or_else(|| ColoringError::NotYOriented(v.id.clone()))?;
            cons.push(Constraint::Prod {
                a: index[l],
                b: index[r],
                c: index[s],
            });
        }
        let mut by_arc = vec![Vec::new(); names.len()];
        for (i, c) in cons.iter().enumerate() {
            let mut arcs = c.arcs().to_vec();
            arcs.sort_unstable();
            arcs.dedup();
            for a in arcs {
                by_arc[a].push(i);
            }
        }
        Ok(Solver {
            x,
            mgr,
            names,
            cons,
            by_arc,
        })
    }

    fn holds(&self, c: &Constraint, col: &[usize]) -> bool {
        match *c {
            Constraint::Cross { src, over, dst } => self.x.op(col[src], col[over]) == col[dst],
            Constraint::Prod { a, b, c } => {
                self.mgr.unwrap().mul(col[a], col[b]) == Some(col[c])
            }
        }
    }

    fn status(&self, ci: usize, col: &mut [usize]) -> Status {
        let c = &self.cons[ci];
        let arcs = c.arcs();
        let mut unknown = NONE;
        for &a in &arcs {
            if col[a] == NONE {
                if unknown != NONE && unknown != a {
                    return Status::Open;
                }
                unknown = a;
            }
        }
        if unknown == NONE {
            return if self.holds(c, col) {
                Status::Satisfied
            } else {
                Status::Violated
            };
        }
        let occurrences = arcs.iter().filter(|&&a| a == unknown).count();
        if occurrences == 1 {
            if let Some(v) = self.solve_single(c, unknown, col) {
                return match v {
                    Some(v) => Status::Forced(unknown, v),
                    None => Status::Violated,
                };
            }
        }
        // scan all elements for the unknown arc
        let mut found = NONE;
        for v in 0..self.x.size() {
            col[unknown] = v;
            let ok = self.holds(c, col);
            col[unknown] = NONE;
            if ok {
                if found != NONE {
                    return Status::Open;
                }
                found = v;
            }
        }
        if found == NONE {
            Status::Violated
        } else {
            Status::Forced(unknown, found)
        }
    }

    /// Direct solution when the unknown occurs once and has a unique
    /// solution formula: `Some(Some(v))` forced, `Some(None)` impossible,
    /// `None` when a scan is needed.
    fn solve_single(&self, c: &Constraint, unknown: usize, col: &[usize]) -> Option<Option<Elem>> {
        match *c {
            Constraint::Cross { src, over, dst } => {
                if unknown == dst {
                    Some(Some(self.x.op(col[src], col[over])))
                } else if unknown == src {
                    Some(Some(self.x.op_inv(col[dst], col[over])))
                } else {
                    None
                }
            }
            Constraint::Prod { a, b, c } => {
                let m = self.mgr.unwrap();
                Some(if unknown == c {
                    m.mul(col[a], col[b])
                } else if unknown == a {
                    m.mul(col[c], m.inv(col[b]))
                } else {
                    m.mul(m.inv(col[a]), col[c])
                })
            }
        }
    }

    /// Propagates from the constraints in `queue`; records assignments in
    /// `trail`. Returns false on contradiction.
    fn propagate(&self, col: &mut [usize], queue: &mut Vec<usize>, trail: &mut Vec<usize>) -> bool {
        while let Some(ci) = queue.pop() {
            match self.status(ci, col) {
                Status::Violated => {
                    queue.clear();
                    return false;
                }
                Status::Forced(a, v) => {
                    col[a] = v;
                    trail.push(a);
                    queue.extend(self.by_arc[a].iter().copied());
                }
                Status::Satisfied | Status::Open => {}
            }
        }
        true
    }

    fn assign(&self, col: &mut [usize], arc: usize, v: Elem, trail: &mut Vec<usize>) -> bool {
        col[arc] = v;
        trail.push(arc);
        let mut queue = self.by_arc[arc].clone();
        self.propagate(col, &mut queue, trail)
    }

    fn undo(col: &mut [usize], trail: &mut Vec<usize>, mark: usize) {
        for a in trail.drain(mark..) {
            col[a] = NONE;
        }
    }

    /// Marks everything that two known arcs of a constraint determine.
    fn closure(&self, known: &mut [bool], start: usize) -> usize {
        let mut added = 0;
        let mut stack = vec![start];
        if !known[start] {
            known[start] = true;
            added += 1;
        }
        while let Some(a) = stack.pop() {
            for &ci in &self.by_arc[a] {
                let forced = match self.cons[ci] {
                    Constraint::Cross { src, over, dst } => {
                        if known[over] && known[src] != known[dst] {
                            Some(if known[src] { dst } else { src })
                        } else {
                            None
                        }
                    }
                    Constraint::Prod { a, b, c } => {
                        let unknown: Vec<usize> =
                            [a, b, c].into_iter().filter(|&z| !known[z]).collect();
                        (unknown.len() == 1).then(|| unknown[0])
                    }
                };
                if let Some(z) = forced {
                    if !known[z] {
                        known[z] = true;
                        added += 1;
                        stack.push(z);
                    }
                }
            }
        }
        added
    }

    /// Branching order for a component: greedily the arc whose value
    /// determines the most others, ties broken by index.
    fn branch_order(&self, arcs: &[usize]) -> Vec<usize> {
        let mut known = vec![false; self.names.len()];
        let mut order = Vec::new();
        loop {
            let mut best: Option<(usize, usize)> = None;
            for &a in arcs.iter().filter(|&&a| !known[a]) {
                let mut trial = known.clone();
                let gain = self.closure(&mut trial, a);
                if best.is_none_or(|(g, _)| gain > g) {
                    best = Some((gain, a));
                }
            }
            let Some((_, a)) = best else {
                return order;
            };
            self.closure(&mut known, a);
            order.push(a);
        }
    }

    /// Counts completions of `col`, branching along `order`; constraints of
    /// the component do not involve arcs outside it.
    fn count(&self, col: &mut [usize], order: &[usize], trail: &mut Vec<usize>) -> BigUint {
        let Some(&branch) = order.iter().find(|&&a| col[a] == NONE) else {
            return BigUint::one();
        };
        let mut total = BigUint::zero();
        for v in 0..self.x.size() {
            let mark = trail.len();
            if self.assign(col, branch, v, trail) {
                total += self.count(col, order, trail);
            }
            Self::undo(col, trail, mark);
        }
        total
    }

    /// Every coloring, in search order.
    fn collect(&self, col: &mut [usize], order: &[usize], trail: &mut Vec<usize>, out: &mut Vec<Vec<Elem>>) {
        let Some(&branch) = order.iter().find(|&&a| col[a] == NONE) else {
            out.push(col.to_vec());
            return;
        };
        for v in 0..self.x.size() {
            let mark = trail.len();
            if self.assign(col, branch, v, trail) {
                self.collect(col, order, trail, out);
            }
            Self::undo(col, trail, mark);
        }
    }

    fn enumerate(
        &self,
        col: &mut [usize],
        trail: &mut Vec<usize>,
        limit: usize,
        out: &mut Vec<Vec<Elem>>,
    ) {
        if out.len() >= limit {
            return;
        }
        let Some(branch) = col.iter().position(|&c| c == NONE) else {
            out.push(col.to_vec());
            return;
        };
        for v in 0..self.x.size() {
            let mark = trail.len();
            if self.assign(col, branch, v, trail) {
                self.enumerate(col, trail, limit, out);
            }
            Self::undo(col, trail, mark);
            if out.len() >= limit {
                return;
            }
        }
    }

    /// Independent components of the constraint graph, each sorted.
    fn components(&self) -> Vec<Vec<usize>> {
        let n = self.names.len();
        let mut comp = vec![NONE; n];
        let mut out = Vec::new();
        for start in 0..n {
            if comp[start] != NONE {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            comp[start] = id;
            let mut i = 0;
            while i < members.len() {
                let a = members[i];
                i += 1;
                for &ci in &self.by_arc[a] {
                    for b in self.cons[ci].arcs() {
                        if comp[b] == NONE {
                            comp[b] = id;
                            members.push(b);
                        }
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    fn count_component(&self, arcs: &[usize], jobs: usize) -> BigUint {
        let mut col = vec![NONE; self.names.len()];
        let mut trail = Vec::new();
        let mut queue: Vec<usize> = arcs
            .iter()
            .flat_map(|&a| self.by_arc[a].iter().copied())
            .collect();
        queue.sort_unstable();
        queue.dedup();
        if !self.propagate(&mut col, &mut queue, &mut trail) {
            return BigUint::zero();
        }
        let order = self.branch_order(arcs);
        let branch = order.iter().copied().find(|&a| col[a] == NONE);
        match branch {
            Some(branch) if jobs > 1 => {
                let run = || {
                    (0..self.x.size())
                        .into_par_iter()
                        .map(|v| {
                            let mut col = col.clone();
                            let mut trail = Vec::new();
                            if self.assign(&mut col, branch, v, &mut trail) {
                                self.count(&mut col, &order, &mut trail)
                            } else {
                                BigUint::zero()
                            }
                        })
                        .collect::<Vec<_>>()
                };
                let parts = match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
                    Ok(pool) => pool.install(run),
                    Err(_) => run(),
                };
                parts.into_iter().sum()
            }
            _ => self.count(&mut col, &order, &mut trail),
        }
    }
}

/// `|Col_X(D)|` for a valid Y-oriented diagram.
pub fn count_colorings(d: &Diagram, x: &dyn Algebra) -> Result<BigUint, ColoringError> {
    count_colorings_jobs(d, x, 1)
}

/// As [`count_colorings`], splitting each component's first branch over
/// `jobs` worker threads. The result does not depend on `jobs`.
pub fn count_colorings_jobs(
    d: &Diagram,
    x: &dyn Algebra,
    jobs: usize,
) -> Result<BigUint, ColoringError> {
    let s = Solver::new(d, x)?;
    let mut total = BigUint::one();
    for comp in s.components() {
        total *= s.count_component(&comp, jobs);
        if total.is_zero() {
            break;
        }
    }
    Ok(total)
}

/// Colorings in lexicographic order of their values listed by ascending arc
/// id, at most `cap` of them; `truncated` is set when more exist.
pub fn enumerate_colorings(
    d: &Diagram,
    x: &dyn Algebra,
    cap: usize,
) -> Result<Enumeration, ColoringError> {
    let s = Solver::new(d, x)?;
    let mut col = vec![NONE; s.names.len()];
    let mut trail = Vec::new();
    let mut queue: Vec<usize> = (0..s.cons.len()).collect();
    let mut out = Vec::new();
    if s.propagate(&mut col, &mut queue, &mut trail) {
        let total = count_colorings(d, x)?;
        if total <= BigUint::from(COLLECT_LIMIT) {
            // cheap to list everything in search order and sort
            let all: Vec<usize> = (0..s.names.len()).collect();
            let order = s.branch_order(&all);
            s.collect(&mut col, &order, &mut trail, &mut out);
            out.sort_unstable();
            out.truncate(cap.saturating_add(1));
        } else {
            s.enumerate(&mut col, &mut trail, cap.saturating_add(1), &mut out);
        }
    }
    let truncated = out.len() > cap;
    out.truncate(cap);
    let colorings = out
        .into_iter()
        .map(|vals| Coloring {
            assignment: s.names.iter().cloned().zip(vals).collect(),
        })
        .collect();
    Ok(Enumeration {
        colorings,
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{conjugation_mcq, dihedral_quandle, mgr_from_rack, GroupTable};
    use crate::diagram::parse_diagram;

    const TREFOIL: &str = "\
arc a
arc b
arc c
crossing x over=c under_in=a under_out=b sign=+
crossing y over=a under_in=b under_out=c sign=+
crossing z over=b under_in=c under_out=a sign=+
";

    const THETA: &str = "\
arc l
arc m
arc r
vertex u kind=split left=r right=l stem=m
vertex v kind=merge left=r right=l stem=m
";

    fn col(pairs: &[(&str, Elem)]) -> Coloring {
        Coloring {
            assignment: pairs.iter().map(|(a, v)| (a.to_string(), *v)).collect(),
        }
    }

    #[test]
    fn trefoil_by_r3() {
        let d = parse_diagram(TREFOIL).unwrap();
        let r3 = dihedral_quandle(3).unwrap();
        assert_eq!(count_colorings(&d, &r3).unwrap(), BigUint::from(9u32));
        assert_eq!(count_colorings_bruteforce(&d, &r3).unwrap(), BigUint::from(9u32));
        assert!(is_coloring(&d, &r3, &col(&[("a", 0), ("b", 1), ("c", 2)])).unwrap());
        assert!(is_coloring(&d, &r3, &col(&[("a", 2), ("b", 2), ("c", 2)])).unwrap());
        assert!(!is_coloring(&d, &r3, &col(&[("a", 0), ("b", 0), ("c", 1)])).unwrap());
        assert_eq!(
            is_coloring(&d, &r3, &col(&[("a", 0), ("b", 0)])),
            Err(ColoringError::MissingArc("c".into()))
        );
    }

    #[test]
    fn enumeration_order_and_cap() {
        let d = parse_diagram(TREFOIL).unwrap();
        let r3 = dihedral_quandle(3).unwrap();
        let all = enumerate_colorings(&d, &r3, 100).unwrap();
        assert_eq!(all.colorings.len(), 9);
        assert!(!all.truncated);
        assert_eq!(all.colorings[0], col(&[("a", 0), ("b", 0), ("c", 0)]));
        assert!(all.colorings.windows(2).all(|w| {
            let a: Vec<_> = w[0].assignment.values().collect();
            let b: Vec<_> = w[1].assignment.values().collect();
            a < b
        }));
        let two = enumerate_colorings(&d, &r3, 2).unwrap();
        assert_eq!(two.colorings.len(), 2);
        assert!(two.truncated);
        let c = parse_diagram("circle a1\n").unwrap();
        assert_eq!(enumerate_colorings(&c, &r3, 10).unwrap().colorings.len(), 3);
    }

    #[test]
    fn theta_by_z2_mcq() {
        let d = parse_diagram(THETA).unwrap();
        let z2 = conjugation_mcq(&GroupTable::cyclic(2).unwrap());
        let n = count_colorings(&d, &z2).unwrap();
        assert_eq!(n, count_colorings_bruteforce(&d, &z2).unwrap());
        assert_eq!(n, BigUint::from(4u32));
    }

    #[test]
    fn vertices_need_an_mgr() {
        let d = parse_diagram(THETA).unwrap();
        let r3 = dihedral_quandle(3).unwrap();
        assert_eq!(count_colorings(&d, &r3), Err(ColoringError::NeedsMgr("u".into())));
    }

    #[test]
    fn kink_changes_count_for_non_quandle() {
        let x = mgr_from_rack(&crate::algebra::cyclic_rack(2).unwrap()).unwrap();
        let circle = parse_diagram("circle a\n").unwrap();
        let kinked = parse_diagram("arc a\ncrossing k over=a under_in=a under_out=a sign=+\n").unwrap();
        assert_eq!(count_colorings(&circle, &x).unwrap(), BigUint::from(4u32));
        assert_eq!(count_colorings(&kinked, &x).unwrap(), BigUint::from(2u32));
        assert_eq!(count_colorings_bruteforce(&kinked, &x).unwrap(), BigUint::from(2u32));
    }

    #[test]
    fn jobs_do_not_change_counts() {
        let d = parse_diagram(TREFOIL).unwrap();
        let x = mgr_from_rack(&dihedral_quandle(3).unwrap()).unwrap();
        let one = count_colorings_jobs(&d, &x, 1).unwrap();
        assert_eq!(count_colorings_jobs(&d, &x, 4).unwrap(), one);
        assert_eq!(one, count_colorings_bruteforce(&d, &x).unwrap());
    }

    #[test]
    fn brute_force_bound() {
        let d = parse_diagram(TREFOIL).unwrap();
        let r3 = dihedral_quandle(3).unwrap();
        assert!(matches!(
            count_colorings_bruteforce_bounded(&d, &r3, 26),
            Err(ColoringError::TooLarge { .. })
        ));
    }
}
