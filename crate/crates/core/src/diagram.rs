//! Y-oriented diagrams of spatial trivalent graphs in a slot model.
//!
//! An arc is a piece of the diagram between undercrossings and vertices. Each
//! non-circle arc has exactly one tail (a crossing's `under_out` or a vertex
//! out-slot) and one head (a crossing's `under_in` or a vertex in-slot).
//! Over-passes do not cut arcs and are recorded only as `Crossing::over`.
//!
//! A crossing may have `under_in == under_out`: a strand cut by a single
//! undercrossing is one arc (a circle with one kink, a Hopf link component).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }

    /// `+` when `v > 0`, `−` when `v < 0`.
    pub fn of(v: f64) -> Sign {
        debug_assert!(v != 0.0);
        if v > 0.0 {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Pos => "+",
            Sign::Neg => "-",
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Direction of a vertex slot relative to the vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    In,
    Out,
}

impl Dir {
    pub fn flip(self) -> Dir {
        match self {
            Dir::In => Dir::Out,
            Dir::Out => Dir::In,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Dir::In => "in",
            Dir::Out => "out",
        }
    }
}

/// Sign of the crossing where a strand with direction `under` passes under a
/// strand with direction `over`: `+` iff turning `under` clockwise by a
/// quarter turn gives `over`.
pub fn crossing_sign(over: (f64, f64), under: (f64, f64)) -> Sign {
    Sign::of(over.0 * under.1 - over.1 * under.0)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Crossing {
    pub id: String,
    pub over: String,
    pub under_in: String,
    pub under_out: String,
    pub sign: Sign,
}

impl Crossing {
    /// The under-arc acted on: `C(dst) = C(src) ◁ C(over)`.
    pub fn src(&self) -> &str {
        match self.sign {
            Sign::Pos => &self.under_in,
            Sign::Neg => &self.under_out,
        }
    }

    pub fn dst(&self) -> &str {
        match self.sign {
            Sign::Pos => &self.under_out,
            Sign::Neg => &self.under_in,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot {
    pub arc: String,
    pub dir: Dir,
}

impl Slot {
    pub fn new(arc: impl Into<String>, dir: Dir) -> Self {
        Slot {
            arc: arc.into(),
            dir,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexKind {
    Merge,
    Split,
}

/// A trivalent vertex with its counterclockwise rotation of slots.
///
/// Rotations are stored starting at the minority slot (the out-slot of a
/// merge, the in-slot of a split), so equal vertices compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Vertex {
    pub id: String,
    rotation: [Slot; 3],
}

impl Vertex {
    pub fn new(id: impl Into<String>, rotation: [Slot; 3]) -> Self {
        let mut v = Vertex {
            id: id.into(),
            rotation,
        };
        v.canonicalize();
        v
    }

    /// Merge sugar: counterclockwise `(left, stem, right)`, stem out.
    pub fn merge(id: impl Into<String>, left: &str, right: &str, stem: &str) -> Self {
        Self::new(
            id,
            [
                Slot::new(left, Dir::In),
                Slot::new(stem, Dir::Out),
                Slot::new(right, Dir::In),
            ],
        )
    }

    /// Split sugar: counterclockwise `(stem, left, right)`, stem in.
    pub fn split(id: impl Into<String>, left: &str, right: &str, stem: &str) -> Self {
        Self::new(
            id,
            [
                Slot::new(stem, Dir::In),
                Slot::new(left, Dir::Out),
                Slot::new(right, Dir::Out),
            ],
        )
    }

    fn canonicalize(&mut self) {
        let outs = self.rotation.iter().filter(|s| s.dir == Dir::Out).count();
        let start = match outs {
            1 => self.rotation.iter().position(|s| s.dir == Dir::Out).unwrap(),
            2 => self.rotation.iter().position(|s| s.dir == Dir::In).unwrap(),
            _ => (0..3)
                .min_by_key(|&i| {
                    [
                        &self.rotation[i],
                        &self.rotation[(i + 1) % 3],
                        &self.rotation[(i + 2) % 3],
                    ]
                })
                .unwrap(),
        };
        self.rotation.rotate_left(start);
    }

    pub fn rotation(&self) -> &[Slot; 3] {
        &self.rotation
    }

    pub fn kind(&self) -> Option<VertexKind> {
        match self.rotation.iter().filter(|s| s.dir == Dir::Out).count() {
            1 => Some(VertexKind::Merge),
            2 => Some(VertexKind::Split),
            _ => None,
        }
    }

    /// `(left, right, stem)` arcs with `C(left) · C(right) = C(stem)`.
    pub fn product_arcs(&self) -> Option<(&str, &str, &str)> {
        let r = &self.rotation;
        match self.kind()? {
            VertexKind::Merge => Some((&r[2].arc, &r[1].arc, &r[0].arc)),
            VertexKind::Split => Some((&r[1].arc, &r[2].arc, &r[0].arc)),
        }
    }

    fn flip_arcs(&mut self, arcs: &BTreeSet<String>) {
        for s in &mut self.rotation {
            if arcs.contains(&s.arc) {
                s.dir = s.dir.flip();
            }
        }
        self.canonicalize();
    }

    pub(crate) fn slots_mut(&mut self) -> &mut [Slot; 3] {
        &mut self.rotation
    }

    pub(crate) fn set_rotation(&mut self, rotation: [Slot; 3]) {
        self.rotation = rotation;
        self.canonicalize();
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateId(String),
    UnknownArc { at: String, arc: String },
    CircleInSlot { at: String, arc: String },
    Tails { arc: String, count: usize },
    Heads { arc: String, count: usize },
    Sink { vertex: String },
    Source { vertex: String },
}

impl Violation {
    /// The crossing, vertex or arc the violation is reported at.
    pub fn location(&self) -> &str {
        match self {
            Violation::DuplicateId(id) => id,
            Violation::UnknownArc { at, .. } | Violation::CircleInSlot { at, .. } => at,
            Violation::Tails { arc, .. } | Violation::Heads { arc, .. } => arc,
            Violation::Sink { vertex } | Violation::Source { vertex } => vertex,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateId(id) => write!(f, "duplicate id `{id}`"),
            Violation::UnknownArc { at, arc } => write!(f, "`{at}` references unknown arc `{arc}`"),
            Violation::CircleInSlot { at, arc } => {
                write!(f, "circle arc `{arc}` used as an endpoint slot at `{at}`")
            }
            Violation::Tails { arc, count } => {
                write!(f, "slot violation: arc `{arc}` starts {count} times (expected once)")
            }
            Violation::Heads { arc, count } => {
                write!(f, "slot violation: arc `{arc}` ends {count} times (expected once)")
            }
            Violation::Sink { vertex } => write!(f, "Y-violation: vertex `{vertex}` is a sink"),
            Violation::Source { vertex } => write!(f, "Y-violation: vertex `{vertex}` is a source"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown arc `{arc}`")]
    UnknownArc { line: usize, arc: String },
    #[error("line {line}: {violation}")]
    Invalid { line: usize, violation: Violation },
    #[error("invalid diagram: {0}")]
    Violations(String),
    #[error("no edge contains arc `{0}`")]
    NoSuchEdge(String),
}

/// Where an arc starts or ends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum End {
    Crossing(String),
    Vertex(String, usize),
}

/// A graph edge: arcs chained through undercrossings, listed in the direction
/// of the orientation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub arcs: Vec<String>,
    /// True for circles and for vertex-free closed strands.
    pub closed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SurfaceStats {
    pub components: usize,
    pub euler: i64,
    pub boundary: usize,
    pub genus: i64,
}

impl fmt::Display for SurfaceStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "components={} euler={} boundary={} genus={}",
            self.components, self.euler, self.boundary, self.genus
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Diagram {
    pub(crate) arcs: BTreeSet<String>,
    pub(crate) circles: BTreeSet<String>,
    pub(crate) crossings: BTreeMap<String, Crossing>,
    pub(crate) vertices: BTreeMap<String, Vertex>,
}

pub fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

impl Diagram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_arc(&mut self, id: impl Into<String>) {
        self.arcs.insert(id.into());
    }

    pub fn add_circle(&mut self, id: impl Into<String>) {
        let id = id.into();
        self.arcs.insert(id.clone());
        self.circles.insert(id);
    }

    pub fn add_crossing(
        &mut self,
        id: &str,
        over: &str,
        under_in: &str,
        under_out: &str,
        sign: Sign,
    ) {
        self.crossings.insert(
            id.to_string(),
            Crossing {
                id: id.to_string(),
                over: over.to_string(),
                under_in: under_in.to_string(),
                under_out: under_out.to_string(),
                sign,
            },
        );
    }

    pub fn add_vertex(&mut self, v: Vertex) {
        self.vertices.insert(v.id.clone(), v);
    }

    pub fn arcs(&self) -> impl Iterator<Item = &str> {
        self.arcs.iter().map(String::as_str)
    }

    pub fn circles(&self) -> impl Iterator<Item = &str> {
        self.circles.iter().map(String::as_str)
    }

    pub fn crossings(&self) -> impl Iterator<Item = &Crossing> {
        self.crossings.values()
    }

    pub fn vertices(&self) -> impl Iterator<Item = &Vertex> {
        self.vertices.values()
    }

    pub fn crossing(&self, id: &str) -> Option<&Crossing> {
        self.crossings.get(id)
    }

    pub fn vertex(&self, id: &str) -> Option<&Vertex> {
        self.vertices.get(id)
    }

    pub fn has_arc(&self, id: &str) -> bool {
        self.arcs.contains(id)
    }

    pub fn is_circle(&self, id: &str) -> bool {
        self.circles.contains(id)
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    pub fn num_crossings(&self) -> usize {
        self.crossings.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Every slot-discipline, reference and Y-condition failure.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for id in self.crossings.keys() {
            if self.vertices.contains_key(id) {
                out.push(Violation::DuplicateId(id.clone()));
            }
        }
        let mut tails: HashMap<&str, usize> = HashMap::new();
        let mut heads: HashMap<&str, usize> = HashMap::new();
        let check_ref = |at: &str, arc: &str, out: &mut Vec<Violation>| {
            if !self.arcs.contains(arc) {
                out.push(Violation::UnknownArc {
                    at: at.to_string(),
                    arc: arc.to_string(),
                });
                false
            } else {
                true
            }
        };
        for c in self.crossings.values() {
            check_ref(&c.id, &c.over, &mut out);
            for (arc, is_tail) in [(&c.under_in, false), (&c.under_out, true)] {
                if !check_ref(&c.id, arc, &mut out) {
                    continue;
                }
                if self.circles.contains(arc) {
                    out.push(Violation::CircleInSlot {
                        at: c.id.clone(),
                        arc: arc.clone(),
                    });
                }
                let map = if is_tail { &mut tails } else { &mut heads };
                *map.entry(arc).or_default() += 1;
            }
        }
        for v in self.vertices.values() {
            for s in &v.rotation {
                if !check_ref(&v.id, &s.arc, &mut out) {
                    continue;
                }
                if self.circles.contains(&s.arc) {
                    out.push(Violation::CircleInSlot {
                        at: v.id.clone(),
                        arc: s.arc.clone(),
                    });
                }
                let map = if s.dir == Dir::Out { &mut tails } else { &mut heads };
                *map.entry(&s.arc).or_default() += 1;
            }
        }
        for arc in &self.arcs {
            if self.circles.contains(arc) {
                continue;
            }
            let t = tails.get(arc.as_str()).copied().unwrap_or(0);
            let h = heads.get(arc.as_str()).copied().unwrap_or(0);
            if t != 1 {
                out.push(Violation::Tails {
                    arc: arc.clone(),
                    count: t,
                });
            }
            if h != 1 {
                out.push(Violation::Heads {
                    arc: arc.clone(),
                    count: h,
                });
            }
        }
        for v in self.vertices.values() {
            let outs = v.rotation.iter().filter(|s| s.dir == Dir::Out).count();
            if outs == 0 {
                out.push(Violation::Sink {
                    vertex: v.id.clone(),
                });
            } else if outs == 3 {
                out.push(Violation::Source {
                    vertex: v.id.clone(),
                });
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    pub fn satisfies_y(&self) -> bool {
        self.vertices.values().all(|v| v.kind().is_some())
    }

    /// Starting point of every non-circle arc. Assumes slot discipline.
    pub(crate) fn tails(&self) -> HashMap<&str, End> {
        let mut m = HashMap::new();
        for c in self.crossings.values() {
            m.insert(c.under_out.as_str(), End::Crossing(c.id.clone()));
        }
        for v in self.vertices.values() {
            for (i, s) in v.rotation.iter().enumerate() {
                if s.dir == Dir::Out {
                    m.insert(s.arc.as_str(), End::Vertex(v.id.clone(), i));
                }
            }
        }
        m
    }

    /// End point of every non-circle arc. Assumes slot discipline.
    pub(crate) fn heads(&self) -> HashMap<&str, End> {
        let mut m = HashMap::new();
        for c in self.crossings.values() {
            m.insert(c.under_in.as_str(), End::Crossing(c.id.clone()));
        }
        for v in self.vertices.values() {
            for (i, s) in v.rotation.iter().enumerate() {
                if s.dir == Dir::In {
                    m.insert(s.arc.as_str(), End::Vertex(v.id.clone(), i));
                }
            }
        }
        m
    }

    /// Partition of the arcs into graph edges, ordered by smallest arc id.
    pub fn edges(&self) -> Vec<Edge> {
        let heads = self.heads();
        let tails = self.tails();
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        let mut out = Vec::new();
        let follow = |start: &str, seen: &mut BTreeSet<String>| -> Vec<String> {
            let mut arcs = Vec::new();
            let mut cur = start.to_string();
            while seen.insert(cur.clone()) {
                arcs.push(cur.clone());
                match heads.get(cur.as_str()) {
                    Some(End::Crossing(c)) => cur = self.crossings[c].under_out.clone(),
                    _ => break,
                }
            }
            arcs
        };
        let mut visited: BTreeSet<String> = BTreeSet::new();
        for arc in &self.arcs {
            if self.circles.contains(arc) {
                seen.insert(arc);
                out.push(Edge {
                    arcs: vec![arc.clone()],
                    closed: true,
                });
            } else if matches!(tails.get(arc.as_str()), Some(End::Vertex(..))) {
                let arcs = follow(arc, &mut visited);
                out.push(Edge { arcs, closed: false });
            }
        }
        for arc in &self.arcs {
            if !seen.contains(arc.as_str()) && !visited.contains(arc) {
                let arcs = follow(arc, &mut visited);
                out.push(Edge { arcs, closed: true });
            }
        }
        out.sort_by(|a, b| a.arcs.iter().min().cmp(&b.arcs.iter().min()));
        out
    }

    fn reverse_arcs(&self, arcs: &BTreeSet<String>) -> Diagram {
        let mut d = self.clone();
        for c in d.crossings.values_mut() {
            if arcs.contains(&c.under_in) {
                std::mem::swap(&mut c.under_in, &mut c.under_out);
                c.sign = c.sign.flip();
            }
            if arcs.contains(&c.over) {
                c.sign = c.sign.flip();
            }
        }
        for v in d.vertices.values_mut() {
            v.flip_arcs(arcs);
        }
        d
    }

    /// Reverses the orientation of the edge containing `arc`.
    pub fn reverse_edge(&self, arc: &str) -> Result<Diagram, DiagramError> {
        let edge = self
            .edges()
            .into_iter()
            .find(|e| e.arcs.iter().any(|a| a == arc))
            .ok_or_else(|| DiagramError::NoSuchEdge(arc.to_string()))?;
        Ok(self.reverse_arcs(&edge.arcs.into_iter().collect()))
    }

    /// All reorientations satisfying the Y-condition, by ascending bitmask over
    /// `edges()`; bitmask 0 (the diagram itself) comes first when it is Y-valid.
    pub fn enumerate_y_orientations(&self) -> Vec<Diagram> {
        let edges = self.edges();
        assert!(edges.len() < 32, "too many edges to enumerate orientations");
        (0u32..1 << edges.len())
            .filter_map(|mask| {
                let arcs: BTreeSet<String> = edges
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .flat_map(|(_, e)| e.arcs.iter().cloned())
                    .collect();
                let d = self.reverse_arcs(&arcs);
                d.satisfies_y().then_some(d)
            })
            .collect()
    }

    /// Statistics of the abstract surface F(D): vertices are disks with the
    /// stored rotation, edges are untwisted bands, circles and vertex-free
    /// closed strands are annuli.
    pub fn surface_stats(&self) -> SurfaceStats {
        let edges = self.edges();
        let arc_index: HashMap<&str, usize> =
            self.arcs.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
        let mut uf = UnionFind::new(self.arcs.len());
        for e in &edges {
            for w in e.arcs.windows(2) {
                uf.union(arc_index[w[0].as_str()], arc_index[w[1].as_str()]);
            }
        }
        for v in self.vertices.values() {
            let a = arc_index[v.rotation[0].arc.as_str()];
            for s in &v.rotation[1..] {
                uf.union(a, arc_index[s.arc.as_str()]);
            }
        }
        let components = (0..self.arcs.len()).filter(|&i| uf.find(i) == i).count();

        let closed = edges.iter().filter(|e| e.closed).count();
        let open = edges.len() - closed;
        let euler = self.vertices.len() as i64 - open as i64;

        // Darts are vertex slots; alpha joins the two ends of an edge.
        let vids: Vec<&String> = self.vertices.keys().collect();
        let vindex: HashMap<&str, usize> =
            vids.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let heads = self.heads();
        let tails = self.tails();
        let ndarts = 3 * vids.len();
        let mut alpha = vec![usize::MAX; ndarts];
        for e in edges.iter().filter(|e| !e.closed) {
            let first = &e.arcs[0];
            let last = &e.arcs[e.arcs.len() - 1];
            let dart = |end: &End| match end {
                End::Vertex(v, i) => 3 * vindex[v.as_str()] + i,
                End::Crossing(_) => unreachable!("open edge ends at a vertex"),
            };
            let a = dart(&tails[first.as_str()]);
            let b = dart(&heads[last.as_str()]);
            alpha[a] = b;
            alpha[b] = a;
        }
        let mut seen = vec![false; ndarts];
        let mut faces = 0;
        for start in 0..ndarts {
            if seen[start] {
                continue;
            }
            faces += 1;
            let mut d = start;
            while !seen[d] {
                seen[d] = true;
                let other = alpha[d];
                d = other - other % 3 + (other % 3 + 1) % 3;
            }
        }
        let boundary = faces + 2 * closed;
        let genus = (2 * components as i64 - boundary as i64 - euler) / 2;
        SurfaceStats {
            components,
            euler,
            boundary,
            genus,
        }
    }

    /// Disjoint union; ids of `other` are prefixed with `prefix`.
    pub fn disjoint_union(&self, other: &Diagram, prefix: &str) -> Diagram {
        let mut d = self.clone();
        let p = |s: &str| format!("{prefix}{s}");
        for a in &other.arcs {
            d.arcs.insert(p(a));
        }
        for a in &other.circles {
            d.circles.insert(p(a));
        }
        for c in other.crossings.values() {
            d.add_crossing(&p(&c.id), &p(&c.over), &p(&c.under_in), &p(&c.under_out), c.sign);
        }
        for v in other.vertices.values() {
            let rot = v.rotation.clone().map(|s| Slot::new(p(&s.arc), s.dir));
            d.add_vertex(Vertex::new(p(&v.id), rot));
        }
        d
    }

    /// Serializes to `.sgd`: arcs, circles, crossings, vertices, each sorted by id.
    pub fn to_sgd(&self) -> String {
        let mut out = String::new();
        for a in &self.arcs {
            if !self.circles.contains(a) {
                out.push_str(&format!("arc {a}\n"));
            }
        }
        for a in &self.circles {
            out.push_str(&format!("circle {a}\n"));
        }
        for c in self.crossings.values() {
            out.push_str(&format!(
                "crossing {} over={} under_in={} under_out={} sign={}\n",
                c.id, c.over, c.under_in, c.under_out, c.sign
            ));
        }
        for v in self.vertices.values() {
            let r = &v.rotation;
            match v.kind() {
                Some(VertexKind::Merge) => out.push_str(&format!(
                    "vertex {} kind=merge left={} right={} stem={}\n",
                    v.id, r[2].arc, r[1].arc, r[0].arc
                )),
                Some(VertexKind::Split) => out.push_str(&format!(
                    "vertex {} kind=split left={} right={} stem={}\n",
                    v.id, r[1].arc, r[2].arc, r[0].arc
                )),
                None => out.push_str(&format!(
                    "vertex {} rotation={}:{},{}:{},{}:{}\n",
                    v.id,
                    r[0].arc,
                    r[0].dir.name(),
                    r[1].arc,
                    r[1].dir.name(),
                    r[2].arc,
                    r[2].dir.name()
                )),
            }
        }
        out
    }

    // Rewriting helpers for moves and builders.

    pub(crate) fn all_ids(&self) -> impl Iterator<Item = &String> {
        self.arcs
            .iter()
            .chain(self.crossings.keys())
            .chain(self.vertices.keys())
    }

    /// Smallest `<base>.<n>` (n ≥ 1) not used by any arc, crossing or vertex.
    pub(crate) fn fresh_id(&self, base: &str) -> String {
        let used: BTreeSet<&String> = self.all_ids().collect();
        (1..)
            .map(|n| format!("{base}.{n}"))
            .find(|id| !used.contains(id))
            .unwrap()
    }

    /// Points every reference to arc `from` at `to` and deletes `from`.
    pub(crate) fn merge_arc_into(&mut self, from: &str, to: &str) {
        if from == to {
            return;
        }
        for c in self.crossings.values_mut() {
            for f in [&mut c.over, &mut c.under_in, &mut c.under_out] {
                if f == from {
                    *f = to.to_string();
                }
            }
        }
        for v in self.vertices.values_mut() {
            for s in v.slots_mut() {
                if s.arc == from {
                    s.arc = to.to_string();
                }
            }
            v.canonicalize();
        }
        self.arcs.remove(from);
        if self.circles.remove(from) {
            self.circles.insert(to.to_string());
        }
    }

    pub(crate) fn is_over_anywhere(&self, arc: &str) -> bool {
        self.crossings.values().any(|c| c.over == arc)
    }

    pub(crate) fn remove_crossing(&mut self, id: &str) -> Option<Crossing> {
        self.crossings.remove(id)
    }

    pub(crate) fn vertex_mut(&mut self, id: &str) -> Option<&mut Vertex> {
        self.vertices.get_mut(id)
    }

    pub(crate) fn remove_arc(&mut self, id: &str) {
        self.arcs.remove(id);
        self.circles.remove(id);
    }

    pub(crate) fn uncircle(&mut self, id: &str) {
        self.circles.remove(id);
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn syntax(line: usize, msg: impl Into<String>) -> DiagramError {
    DiagramError::Syntax {
        line,
        msg: msg.into(),
    }
}

fn parse_id(line: usize, tok: &str) -> Result<String, DiagramError> {
    if valid_id(tok) {
        Ok(tok.to_string())
    } else {
        Err(syntax(line, format!("invalid id `{tok}`")))
    }
}

fn parse_fields<'a>(
    line: usize,
    toks: &[&'a str],
    keys: &[&str],
) -> Result<BTreeMap<&'a str, &'a str>, DiagramError> {
    let mut m = BTreeMap::new();
    for t in toks {
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| syntax(line, format!("expected key=value, found `{t}`")))?;
        if !keys.contains(&k) {
            return Err(syntax(line, format!("unexpected field `{k}`")));
        }
        if m.insert(k, v).is_some() {
            return Err(syntax(line, format!("field `{k}` given twice")));
        }
    }
    for k in keys {
        if !m.contains_key(k) {
            return Err(syntax(line, format!("missing field `{k}`")));
        }
    }
    Ok(m)
}

fn parse_dir(line: usize, s: &str) -> Result<Dir, DiagramError> {
    match s {
        "in" => Ok(Dir::In),
        "out" => Ok(Dir::Out),
        _ => Err(syntax(line, format!("expected `in` or `out`, found `{s}`"))),
    }
}

/// Parses and validates a `.sgd` diagram.
pub fn parse_diagram(text: &str) -> Result<Diagram, DiagramError> {
    let (d, lines_of) = parse_declarations(text)?;
    if let Some(v) = d.validate().into_iter().next() {
        let line = match &v {
            Violation::Tails { arc, .. } | Violation::Heads { arc, .. } => {
                slot_line(&d, arc, matches!(v, Violation::Tails { .. }), &lines_of)
            }
            _ => None,
        }
        .or_else(|| lines_of.get(v.location()).copied())
        .unwrap_or(0);
        return Err(DiagramError::Invalid { line, violation: v });
    }
    Ok(d)
}

/// Parses `.sgd` declarations and resolves arc references without checking
/// slot discipline or the Y-condition (used for tangles with open ends).
pub fn parse_diagram_unchecked(text: &str) -> Result<Diagram, DiagramError> {
    parse_declarations(text).map(|(d, _)| d)
}

fn parse_declarations(text: &str) -> Result<(Diagram, HashMap<String, usize>), DiagramError> {
    let mut d = Diagram::new();
    let mut lines_of: HashMap<String, usize> = HashMap::new();
    // (line, referenced arc) for reference checking after all declarations
    let mut refs: Vec<(usize, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = content.split_whitespace().collect();
        let Some((&head, rest)) = toks.split_first() else {
            continue;
        };
        match head {
            "arc" | "circle" => {
                let [id] = rest else {
                    return Err(syntax(line, format!("expected `{head} <id>`")));
                };
                let id = parse_id(line, id)?;
                let circle = head == "circle";
                if d.arcs.contains(&id) {
                    // `arc x` followed by `circle x` marks a declared arc as a circle
                    if !(circle && !d.circles.contains(&id)) {
                        return Err(syntax(line, format!("arc `{id}` declared twice")));
                    }
                }
                d.arcs.insert(id.clone());
                if circle {
                    d.circles.insert(id.clone());
                }
                lines_of.insert(id, line);
            }
            "crossing" => {
                let Some((id, fields)) = rest.split_first() else {
                    return Err(syntax(line, "expected `crossing <id> …`"));
                };
                let id = parse_id(line, id)?;
                let f = parse_fields(line, fields, &["over", "under_in", "under_out", "sign"])?;
                let sign = match f["sign"] {
                    "+" => Sign::Pos,
                    "-" => Sign::Neg,
                    s => return Err(syntax(line, format!("sign must be + or -, found `{s}`"))),
                };
                let over = parse_id(line, f["over"])?;
                let under_in = parse_id(line, f["under_in"])?;
                let under_out = parse_id(line, f["under_out"])?;
                if d.crossings.contains_key(&id) || d.vertices.contains_key(&id) {
                    return Err(syntax(line, format!("id `{id}` declared twice")));
                }
                for a in [&over, &under_in, &under_out] {
                    refs.push((line, a.clone()));
                }
                d.add_crossing(&id, &over, &under_in, &under_out, sign);
                lines_of.insert(id, line);
            }
            "vertex" => {
                let Some((id, fields)) = rest.split_first() else {
                    return Err(syntax(line, "expected `vertex <id> …`"));
                };
                let id = parse_id(line, id)?;
                if d.crossings.contains_key(&id) || d.vertices.contains_key(&id) {
                    return Err(syntax(line, format!("id `{id}` declared twice")));
                }
                let v = if fields.len() == 1 && fields[0].starts_with("rotation=") {
                    let raw = &fields[0]["rotation=".len()..];
                    let slots: Vec<&str> = raw.split(',').collect();
                    if slots.len() != 3 {
                        return Err(syntax(line, "rotation needs three slots"));
                    }
                    let mut rot = Vec::new();
                    for s in slots {
                        let (a, dir) = s
                            .split_once(':')
                            .ok_or_else(|| syntax(line, format!("bad slot `{s}`")))?;
                        rot.push(Slot::new(parse_id(line, a)?, parse_dir(line, dir)?));
                    }
                    Vertex::new(id.clone(), rot.try_into().unwrap())
                } else {
                    let f = parse_fields(line, fields, &["kind", "left", "right", "stem"])?;
                    let (l, r, s) = (
                        parse_id(line, f["left"])?,
                        parse_id(line, f["right"])?,
                        parse_id(line, f["stem"])?,
                    );
                    match f["kind"] {
                        "merge" => Vertex::merge(id.clone(), &l, &r, &s),
                        "split" => Vertex::split(id.clone(), &l, &r, &s),
                        k => {
                            return Err(syntax(line, format!("kind must be merge or split, found `{k}`")))
                        }
                    }
                };
                for s in v.rotation() {
                    refs.push((line, s.arc.clone()));
                }
                d.add_vertex(v);
                lines_of.insert(id, line);
            }
            other => return Err(syntax(line, format!("unknown declaration `{other}`"))),
        }
    }
    for (line, arc) in refs {
        if !d.arcs.contains(&arc) {
            return Err(DiagramError::UnknownArc { line, arc });
        }
    }
    Ok((d, lines_of))
}

/// Line of the last declaration consuming `arc` as a tail (or head), or of
/// the arc declaration when none does.
fn slot_line(d: &Diagram, arc: &str, tail: bool, lines: &HashMap<String, usize>) -> Option<usize> {
    let mut best: Option<usize> = None;
    for c in d.crossings.values() {
        let slot = if tail { &c.under_out } else { &c.under_in };
        if slot == arc {
            best = best.max(lines.get(&c.id).copied());
        }
    }
    for v in d.vertices.values() {
        let want = if tail { Dir::Out } else { Dir::In };
        if v.rotation.iter().any(|s| s.arc == arc && s.dir == want) {
            best = best.max(lines.get(&v.id).copied());
        }
    }
    best.or_else(|| lines.get(arc).copied())
}
