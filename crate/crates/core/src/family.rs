//! The distinguishing pairs `D_n`, `D_n'` and a small diagram corpus.
//!
//! Both diagrams share one trivalent graph with eight vertices and twelve
//! edges; the base tangle sits on edge `e3`. They differ only in how the
//! decorations (a row of four kinks, a self-crossing braid loop followed by a
//! kink, and the `2n` kink box) are distributed over the two edges `e10` and
//! `e11` leaving the right-hand vertices.

use std::collections::HashMap;

use thiserror::Error;

use crate::diagram::{parse_diagram, parse_diagram_unchecked, Diagram, DiagramError, Dir, Sign, Slot, Vertex};

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("tangle: {0}")]
    Tangle(String),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

/// A diagram fragment with one open strand end on each side: `in_arc` has no
/// tail and `out_arc` has no head (they coincide for a plain strand).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tangle {
    pub diagram: Diagram,
    pub in_arc: String,
    pub out_arc: String,
}

impl Tangle {
    /// Checks that closing the strand into a loop gives a valid diagram.
    pub fn check(&self) -> Result<(), FamilyError> {
        let closed = self.close();
        match closed.validate().first() {
            None => Ok(()),
            Some(v) => Err(FamilyError::Tangle(v.to_string())),
        }
    }

    /// Joins the two open ends, giving a closed diagram.
    pub fn close(&self) -> Diagram {
        let mut d = self.diagram.clone();
        if self.in_arc == self.out_arc {
            if d.num_crossings() == 0 && d.num_vertices() == 0 {
                d.add_circle(self.in_arc.clone());
            }
            // a lone arc through crossings closes onto itself
        } else {
            d.merge_arc_into(&self.in_arc, &self.out_arc);
        }
        d
    }

    /// Parses a tangle file: an `.sgd` body plus `in <arc>` and `out <arc>` lines.
    pub fn parse(text: &str) -> Result<Tangle, FamilyError> {
        let mut body = String::new();
        let (mut in_arc, mut out_arc) = (None, None);
        for line in text.lines() {
            let toks: Vec<&str> = line.split('#').next().unwrap_or("").split_whitespace().collect();
            match toks.as_slice() {
                ["in", a] => in_arc = Some(a.to_string()),
                ["out", a] => out_arc = Some(a.to_string()),
                _ => {
                    body.push_str(line);
                    body.push('\n');
                }
            }
        }
        let (Some(in_arc), Some(out_arc)) = (in_arc, out_arc) else {
            return Err(FamilyError::Tangle("missing `in <arc>` or `out <arc>` line".into()));
        };
        let t = Tangle {
            diagram: parse_diagram_unchecked(&body)?,
            in_arc,
            out_arc,
        };
        t.check()?;
        Ok(t)
    }

    pub fn to_text(&self) -> String {
        format!("{}in {}\nout {}\n", self.diagram.to_sgd(), self.in_arc, self.out_arc)
    }
}

/// A single strand with no crossings.
pub fn trivial_base() -> Tangle {
    let mut d = Diagram::new();
    d.add_arc("s");
    Tangle {
        diagram: d,
        in_arc: "s".into(),
        out_arc: "s".into(),
    }
}

/// A strand with `count` kinks of one sign, each passing over itself first.
pub fn kink_chain(count: usize, positive: bool) -> Tangle {
    if count == 0 {
        return trivial_base();
    }
    let sign = if positive { Sign::Pos } else { Sign::Neg };
    let mut d = Diagram::new();
    let arc = |i: usize| format!("s{i}");
    for i in 0..=count {
        d.add_arc(arc(i));
    }
    for i in 0..count {
        d.add_crossing(&format!("k{i}"), &arc(i), &arc(i), &arc(i + 1), sign);
    }
    Tangle {
        diagram: d,
        in_arc: arc(0),
        out_arc: arc(count),
    }
}

/// A long trefoil: the trefoil cut open on one arc.
pub fn trefoil_base() -> Tangle {
    let mut d = Diagram::new();
    for a in ["t0", "t1", "t2", "t3"] {
        d.add_arc(a);
    }
    // closed trefoil a -x-> b -y-> c -z-> a with a cut into t3 (before the cut) and t0
    d.add_crossing("x", "t2", "t0", "t1", Sign::Pos);
    d.add_crossing("y", "t0", "t1", "t2", Sign::Pos);
    d.add_crossing("z", "t1", "t2", "t3", Sign::Pos);
    Tangle {
        diagram: d,
        in_arc: "t0".into(),
        out_arc: "t3".into(),
    }
}

#[derive(Debug, Clone)]
enum Event {
    Over(String),
    Under(String),
    Base,
}

fn kink(events: &mut Vec<Event>, signs: &mut HashMap<String, Sign>, id: String, sign: Sign) {
    events.push(Event::Over(id.clone()));
    events.push(Event::Under(id.clone()));
    signs.insert(id, sign);
}

fn kinks(events: &mut Vec<Event>, signs: &mut HashMap<String, Sign>, prefix: &str, count: usize, sign: Sign) {
    for j in 0..count {
        kink(events, signs, format!("{prefix}{j}"), sign);
    }
}

/// A strand crossing itself three times: under, over, under, over, under, over.
fn braid_loop(events: &mut Vec<Event>, signs: &mut HashMap<String, Sign>, prefix: &str) {
    let x = |i: usize| format!("{prefix}{i}");
    for (i, over) in [(1, false), (2, true), (3, false), (1, true), (2, false), (3, true)] {
        events.push(if over { Event::Over(x(i)) } else { Event::Under(x(i)) });
    }
    for i in 1..=3 {
        signs.insert(x(i), Sign::Pos);
    }
}

struct Builder {
    d: Diagram,
    signs: HashMap<String, Sign>,
    over: HashMap<String, String>,
    under: HashMap<String, (String, String)>,
    first: HashMap<String, String>,
    last: HashMap<String, String>,
}

impl Builder {
    fn new(signs: HashMap<String, Sign>) -> Self {
        Builder {
            d: Diagram::new(),
            signs,
            over: HashMap::new(),
            under: HashMap::new(),
            first: HashMap::new(),
            last: HashMap::new(),
        }
    }

    /// Lays out edge `name` as a chain of arcs cut at its undercrossings.
    fn edge(&mut self, name: &str, events: &[Event], base: &Tangle) {
        let mut piece = 0;
        let mut cur = name.to_string();
        self.d.add_arc(cur.clone());
        self.first.insert(name.to_string(), cur.clone());
        for ev in events {
            match ev {
                Event::Over(c) => {
                    self.over.insert(c.clone(), cur.clone());
                }
                Event::Under(c) => {
                    piece += 1;
                    let next = format!("{name}.{piece}");
                    self.d.add_arc(next.clone());
                    self.under.insert(c.clone(), (cur.clone(), next.clone()));
                    cur = next;
                }
                Event::Base => {
                    let p = |s: &str| format!("b.{s}");
                    let t = &base.diagram;
                    for a in t.arcs() {
                        self.d.add_arc(p(a));
                    }
                    for c in t.crossings() {
                        self.d
                            .add_crossing(&p(&c.id), &p(&c.over), &p(&c.under_in), &p(&c.under_out), c.sign);
                    }
                    for v in t.vertices() {
                        let rot = v.rotation().clone().map(|s| Slot::new(p(&s.arc), s.dir));
                        self.d.add_vertex(Vertex::new(p(&v.id), rot));
                    }
                    let out = p(&base.out_arc);
                    let inn = p(&base.in_arc);
                    if inn == out {
                        self.d.merge_arc_into(&inn, &cur);
                    } else {
                        self.d.merge_arc_into(&inn, &cur);
                        cur = out;
                    }
                }
            }
        }
        self.last.insert(name.to_string(), cur);
    }

    fn vertex(&mut self, id: &str, slots: [(&str, Dir); 3]) {
        let rot = slots.map(|(e, dir)| {
            let arc = match dir {
                Dir::Out => &self.first[e],
                Dir::In => &self.last[e],
            };
            Slot::new(arc.clone(), dir)
        });
        self.d.add_vertex(Vertex::new(id, rot));
    }

    fn finish(mut self) -> Diagram {
        let mut ids: Vec<&String> = self.signs.keys().collect();
        ids.sort();
        for id in ids {
            let (ui, uo) = &self.under[id];
            self.d.add_crossing(id, &self.over[id], ui, uo, self.signs[id]);
        }
        self.d
    }
}

fn build(n: i64, base: &Tangle, prime: bool) -> Diagram {
    let mut signs: HashMap<String, Sign> = HashMap::new();
    signs.insert("c62".into(), Sign::Pos);
    signs.insert("cA".into(), Sign::Neg);

    let box_sign = if n >= 0 { Sign::Pos } else { Sign::Neg };
    let box_count = 2 * n.unsigned_abs() as usize;

    let mut e10 = vec![Event::Over("cA".into())];
    let mut e11 = Vec::new();
    if prime {
        braid_loop(&mut e11, &mut signs, "x");
        kink(&mut e11, &mut signs, "k1".into(), Sign::Pos);
        kinks(&mut e11, &mut signs, "n", box_count, box_sign);
        kinks(&mut e10, &mut signs, "f", 4, Sign::Pos);
    } else {
        kinks(&mut e11, &mut signs, "f", 4, Sign::Pos);
        kinks(&mut e11, &mut signs, "n", box_count, box_sign);
        braid_loop(&mut e10, &mut signs, "x");
        kink(&mut e10, &mut signs, "k1".into(), Sign::Pos);
    }

    let mut b = Builder::new(signs);
    let none: Vec<Event> = Vec::new();
    b.edge("e1", &none, base);
    b.edge("e2", &[Event::Over("c62".into())], base);
    b.edge("e3", &[Event::Base], base);
    b.edge("e4", &none, base);
    b.edge("e5", &none, base);
    b.edge("e6", &[Event::Under("c62".into())], base);
    b.edge("e7", &[Event::Under("cA".into())], base);
    b.edge("e8", &none, base);
    b.edge("e9", &none, base);
    b.edge("e10", &e10, base);
    b.edge("e11", &e11, base);
    b.edge("e12", &none, base);

    use Dir::{In, Out};
    b.vertex("T", [("e1", Out), ("e12", In), ("e3", In)]);
    b.vertex("U", [("e2", Out), ("e1", In), ("e4", Out)]);
    b.vertex("W", [("e2", In), ("e5", In), ("e3", Out)]);
    b.vertex("Z", [("e6", Out), ("e4", In), ("e5", Out)]);
    b.vertex("Q", [("e9", In), ("e7", Out), ("e6", In)]);
    b.vertex("P", [("e8", Out), ("e11", Out), ("e7", In)]);
    b.vertex("R", [("e8", In), ("e10", Out), ("e9", Out)]);
    b.vertex("S", [("e10", In), ("e11", In), ("e12", Out)]);
    b.finish()
}

/// The diagram `D_n` around `base`.
pub fn make_dn(n: i64, base: &Tangle) -> Diagram {
    build(n, base, false)
}

/// The diagram `D_n'` around `base`.
pub fn make_dn_prime(n: i64, base: &Tangle) -> Diagram {
    build(n, base, true)
}

/// Named test diagrams, sorted by name.
pub fn corpus() -> Vec<(String, Diagram)> {
    let mut out: Vec<(String, Diagram)> = Vec::new();
    let mut add = |name: &str, text: &str| {
        out.push((name.to_string(), parse_diagram(text).expect("corpus diagram is valid")));
    };
    add("unknot", "circle a\n");
    add("unlink2", "circle a\ncircle b\n");
    add("kink1", "arc a\ncrossing k over=a under_in=a under_out=a sign=+\n");
    add(
        "kink2",
        "arc a\narc b\ncrossing k1 over=a under_in=a under_out=b sign=+\ncrossing k2 over=b under_in=b under_out=a sign=+\n",
    );
    add(
        "hopf",
        "arc a\narc b\ncrossing x over=b under_in=a under_out=a sign=+\ncrossing y over=a under_in=b under_out=b sign=+\n",
    );
    add(
        "trefoil",
        "arc a\narc b\narc c\n\
         crossing x over=c under_in=a under_out=b sign=+\n\
         crossing y over=a under_in=b under_out=c sign=+\n\
         crossing z over=b under_in=c under_out=a sign=+\n",
    );
    add(
        "theta",
        "arc l\narc m\narc r\n\
         vertex u kind=split left=r right=l stem=m\n\
         vertex v kind=merge left=r right=l stem=m\n",
    );
    add(
        "handcuff",
        "arc m\narc p\narc q\n\
         vertex u kind=split left=p right=m stem=p\n\
         vertex v kind=merge left=q right=m stem=q\n",
    );
    add(
        "theta_clasp",
        "arc l\narc l2\narc m\narc r\n\
         crossing c over=r under_in=l under_out=l2 sign=-\n\
         vertex u kind=split left=r right=l stem=m\n\
         vertex v kind=merge left=r right=l2 stem=m\n",
    );
    let base = trivial_base();
    out.push(("Dn_m1".into(), make_dn(-1, &base)));
    out.push(("Dn_1".into(), make_dn(1, &base)));
    out.push(("Dnp_m1".into(), make_dn_prime(-1, &base)));
    out.push(("Dnp_1".into(), make_dn_prime(1, &base)));
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{dihedral_quandle, mgr_from_rack, product_rack, cyclic_rack};
    use crate::coloring::count_colorings;
    use num_bigint::BigUint;

    #[test]
    fn tangles() {
        let t = trivial_base();
        assert_eq!((t.diagram.num_arcs(), t.diagram.num_crossings()), (1, 0));
        let c = t.close();
        assert!(c.is_circle("s"));
        let r3 = dihedral_quandle(3).unwrap();
        assert_eq!(count_colorings(&c, &r3).unwrap(), BigUint::from(3u32));
        assert_eq!(kink_chain(0, true), trivial_base());
        let k = kink_chain(2, true);
        assert_eq!((k.diagram.num_arcs(), k.diagram.num_crossings()), (3, 2));
        k.check().unwrap();
        trefoil_base().check().unwrap();
        assert_eq!(count_colorings(&trefoil_base().close(), &r3).unwrap(), BigUint::from(9u32));
    }

    #[test]
    fn tangle_text_round_trip() {
        for t in [trivial_base(), kink_chain(2, false), trefoil_base()] {
            assert_eq!(Tangle::parse(&t.to_text()).unwrap(), t);
        }
    }

    #[test]
    fn dn_is_valid() {
        for n in -2..=2 {
            for prime in [false, true] {
                let d = build(n, &trivial_base(), prime);
                assert_eq!(d.validate(), vec![], "n={n} prime={prime}");
                assert!(d.satisfies_y());
                assert_eq!(d.num_vertices(), 8);
                assert_eq!(d.edges().len(), 12);
            }
        }
    }

    #[test]
    fn ratio_two() {
        let x = mgr_from_rack(&product_rack(&dihedral_quandle(3).unwrap(), &cyclic_rack(2).unwrap())).unwrap();
        for n in -1..=1 {
            let a = count_colorings(&make_dn(n, &trivial_base()), &x).unwrap();
            let b = count_colorings(&make_dn_prime(n, &trivial_base()), &x).unwrap();
            assert_eq!(b, &a * 2u32, "n={n}: {a} vs {b}");
        }
    }

    #[test]
    fn corpus_is_valid() {
        for (name, d) in corpus() {
            assert_eq!(d.validate(), vec![], "{name}");
        }
    }
}
