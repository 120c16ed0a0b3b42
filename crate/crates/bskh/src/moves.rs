//! Movies of tangle diagrams and their induced chain maps: Reidemeister
//! moves, elementary cobordisms (birth, death, saddle, dot), crossing
//! changes, and the `sep`/`split` movie transformations.
//!
//! A movie is an initial diagram plus a sequence of events; every event
//! rewrites the diagram combinatorially and induces a chain map between the
//! complexes of the two frames.  The composite of these maps is the map of
//! the whole movie.

use crate::cobcat::{all_curves, side_cycles, CobMorphism, Curve};
use crate::ckom::{
    blocks_compose, blocks_insert, blocks_scale, blocks_sub, Blocks, ChainMap, CurvedComplex,
    Homotopy,
};
use crate::coeff::{Elem, Ring};
use crate::diagram::{Component, Crossing, Occ, Resolution, TangleDiagram};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use std::collections::{BTreeMap, BTreeSet};

/// Which side of the strand an R1 kink hangs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum R1Side {
    Left,
    Right,
}

/// One elementary step of a movie.
#[derive(Debug, Clone)]
pub enum MovieEvent {
    /// Add a kink on `edge`; the edge keeps its tail, `new_edges.0` is the
    /// kink loop and `new_edges.1` the continuation toward the old head.
    R1Add {
        edge: String,
        sign: i8,
        side: R1Side,
        new_crossing: String,
        new_edges: (String, String),
    },
    /// Remove the kink at `crossing` (its loop edge occupies two adjacent
    /// slots); the merged edge keeps the incoming edge's name.
    R1Remove { crossing: String },
    /// Poke strand `over` across strand `under`.  The under strand becomes
    /// `under, e1, e2` and the over strand `over, e3, e4` where
    /// `new_edges = (e1, e2, e3, e4)`; `new_crossings.0` comes first along
    /// the under strand.
    R2Add {
        over: String,
        under: String,
        new_crossings: (String, String),
        new_edges: (String, String, String, String),
    },
    /// Cancel the bigon bounded by the two crossings.
    R2Remove { crossings: (String, String) },
    /// Slide a strand across the crossing opposite to `pivot_edge`.  The
    /// three crossings must bound a triangular face containing `pivot_edge`;
    /// the moved strand is the one carrying `pivot_edge` and must pass
    /// entirely over or entirely under the other two.
    R3 {
        crossings: [String; 3],
        pivot_edge: String,
    },
    /// A new crossingless circle (one fresh edge, one fresh component).
    Birth {
        circle_edge: String,
        weight: String,
        component: String,
        part: Option<usize>,
    },
    /// Remove a crossingless circle.
    Death { circle_edge: String },
    /// An oriented band between `edges`; see `apply_event` for the naming of
    /// `new_edges` (one name when a free circle is absorbed, two otherwise).
    Saddle {
        edges: (String, String),
        new_edges: Vec<String>,
    },
    /// Put a dot on the component of `edge` (the diagram is unchanged).
    Dot { edge: String },
    /// A plane isotopy: no combinatorial change.
    Isotopy,
}

/// A movie: an initial diagram, events, and an optional partition of the
/// components into parts (used by `sep_movie`/`split_movie`).
#[derive(Debug, Clone)]
pub struct Movie {
    pub initial: TangleDiagram,
    pub events: Vec<MovieEvent>,
    /// component id -> part index (1-based); `None` when no partition given.
    pub partition: Option<BTreeMap<String, usize>>,
}

fn parse_list(s: &str) -> Option<Vec<String>> {
    let inner = s.trim().strip_prefix('(')?.strip_suffix(')')?;
    if inner.trim().is_empty() {
        return Some(Vec::new());
    }
    Some(inner.split(',').map(|t| t.trim().to_string()).collect())
}

fn kv_map(tokens: &[&str], line: usize) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for tok in tokens {
        let (k, v) = tok.split_once('=').ok_or(Error::Parse {
            line,
            msg: format!("bad event token `{tok}`"),
        })?;
        out.insert(k.to_string(), v.to_string());
    }
    Ok(out)
}

fn parse_event(line_no: usize, rest: &str) -> Result<MovieEvent> {
    let err = |msg: &str| Error::Parse {
        line: line_no,
        msg: msg.to_string(),
    };
    let toks: Vec<&str> = rest.split_whitespace().collect();
    let kind = *toks.first().ok_or_else(|| err("empty event"))?;
    let need = |m: &BTreeMap<String, String>, k: &str| -> Result<String> {
        m.get(k)
            .cloned()
            .ok_or_else(|| err(&format!("event is missing `{k}=`")))
    };
    let need_list = |m: &BTreeMap<String, String>, k: &str, n: usize| -> Result<Vec<String>> {
        let v = parse_list(&need(m, k)?).ok_or_else(|| err(&format!("bad list `{k}=`")))?;
        if v.len() != n {
            return Err(err(&format!("`{k}=` needs {n} entries")));
        }
        Ok(v)
    };
    match kind {
        "r1" | "r2" => {
            let dir = *toks.get(1).ok_or_else(|| err("missing add/remove"))?;
            let m = kv_map(&toks[2..], line_no)?;
            match (kind, dir) {
                ("r1", "add") => {
                    let sign = match need(&m, "sign")?.as_str() {
                        "+" => 1,
                        "-" => -1,
                        _ => return Err(err("sign must be + or -")),
                    };
                    let side = match need(&m, "side")?.as_str() {
                        "l" => R1Side::Left,
                        "r" => R1Side::Right,
                        _ => return Err(err("side must be l or r")),
                    };
                    let ne = need_list(&m, "new_edges", 2)?;
                    Ok(MovieEvent::R1Add {
                        edge: need(&m, "edge")?,
                        sign,
                        side,
                        new_crossing: need(&m, "new_crossing")?,
                        new_edges: (ne[0].clone(), ne[1].clone()),
                    })
                }
                ("r1", "remove") => Ok(MovieEvent::R1Remove {
                    crossing: need(&m, "crossing")?,
                }),
                ("r2", "add") => {
                    let nc = need_list(&m, "new_crossings", 2)?;
                    let ne = need_list(&m, "new_edges", 4)?;
                    Ok(MovieEvent::R2Add {
                        over: need(&m, "over")?,
                        under: need(&m, "under")?,
                        new_crossings: (nc[0].clone(), nc[1].clone()),
                        new_edges: (
                            ne[0].clone(),
                            ne[1].clone(),
                            ne[2].clone(),
                            ne[3].clone(),
                        ),
                    })
                }
                ("r2", "remove") => {
                    let nc = need_list(&m, "crossings", 2)?;
                    Ok(MovieEvent::R2Remove {
                        crossings: (nc[0].clone(), nc[1].clone()),
                    })
                }
                _ => Err(err("expected add or remove")),
            }
        }
        "r3" => {
            let m = kv_map(&toks[1..], line_no)?;
            let c = need_list(&m, "crossings", 3)?;
            Ok(MovieEvent::R3 {
                crossings: [c[0].clone(), c[1].clone(), c[2].clone()],
                pivot_edge: need(&m, "pivot_edge")?,
            })
        }
        "birth" => {
            let m = kv_map(&toks[1..], line_no)?;
            let part = match m.get("part") {
                None => None,
                Some(p) => Some(p.parse::<usize>().map_err(|_| err("bad part index"))?),
            };
            Ok(MovieEvent::Birth {
                circle_edge: need(&m, "circle_edge")?,
                weight: need(&m, "weight")?,
                component: need(&m, "component")?,
                part,
            })
        }
        "death" => {
            let m = kv_map(&toks[1..], line_no)?;
            Ok(MovieEvent::Death {
                circle_edge: need(&m, "circle_edge")?,
            })
        }
        "saddle" => {
            let m = kv_map(&toks[1..], line_no)?;
            let e = need_list(&m, "edges", 2)?;
            let ne = parse_list(&need(&m, "new_edges")?)
                .filter(|v| v.len() == 1 || v.len() == 2)
                .ok_or_else(|| err("`new_edges=` needs 1 or 2 entries"))?;
            Ok(MovieEvent::Saddle {
                edges: (e[0].clone(), e[1].clone()),
                new_edges: ne,
            })
        }
        "dot" => {
            let m = kv_map(&toks[1..], line_no)?;
            Ok(MovieEvent::Dot {
                edge: need(&m, "edge")?,
            })
        }
        "isotopy" => Ok(MovieEvent::Isotopy),
        _ => Err(err(&format!("unknown event kind `{kind}`"))),
    }
}

/// Parse a `.movie` file: a `movie` header, an inline `.tng` block, an
/// optional `part` line, and `event` lines terminated by `end`.
pub fn parse_movie(text: &str) -> Result<Movie> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let err = |line: usize, msg: &str| Error::Parse {
        line,
        msg: msg.to_string(),
    };
    let Some(&(hline, header)) = lines.first() else {
        return Err(err(0, "empty input"));
    };
    if !header.starts_with("movie") {
        return Err(err(hline, "expected `movie` header"));
    }
    let mut ring = None;
    for tok in header.split_whitespace().skip(1) {
        match tok.split_once('=') {
            Some(("ring", val)) => ring = Some(Ring::parse(val)?),
            _ => return Err(err(hline, &format!("unknown header token `{tok}`"))),
        }
    }
    let (mut initial, consumed) = crate::diagram::parse_tangle_block(&lines[1..])?;
    if let Some(r) = ring {
        initial = initial.with_ring(r)?;
    }
    let mut idx = 1 + consumed;
    let mut partition: Option<BTreeMap<String, usize>> = None;
    if let Some(&(lno, line)) = lines.get(idx) {
        if let Some(rest) = line.strip_prefix("part ") {
            let mut map = BTreeMap::new();
            for tok in rest.split_whitespace() {
                let (k, v) = tok
                    .split_once('=')
                    .ok_or_else(|| err(lno, "expected `component=part`"))?;
                let p: usize = v.parse().map_err(|_| err(lno, "bad part index"))?;
                if p == 0 {
                    return Err(err(lno, "part indices are 1-based"));
                }
                map.insert(k.to_string(), p);
            }
            for k in &initial.components {
                if !map.contains_key(&k.id) {
                    return Err(err(lno, &format!("component `{}` has no part", k.id)));
                }
            }
            partition = Some(map);
            idx += 1;
        }
    }
    let mut events = Vec::new();
    let mut ended = false;
    while let Some(&(lno, line)) = lines.get(idx) {
        idx += 1;
        if line == "end" {
            ended = true;
            break;
        }
        let rest = line
            .strip_prefix("event ")
            .ok_or_else(|| err(lno, "expected `event ...` or `end`"))?;
        events.push(parse_event(lno, rest)?);
    }
    if !ended {
        return Err(err(lines.last().unwrap().0, "missing final `end`"));
    }
    if idx != lines.len() {
        return Err(err(lines[idx].0, "trailing content after `end`"));
    }
    Ok(Movie {
        initial,
        events,
        partition,
    })
}

// ---------------------------------------------------------------------------
// Frame surgery
// ---------------------------------------------------------------------------

/// Mutable copy of the diagram data that surgeries rewrite before
/// revalidating through `TangleDiagram::new`.
struct Frame {
    ring: Ring,
    crossings: Vec<Crossing>,
    boundary: Vec<String>,
    basepoint_after: Option<String>,
    shading: crate::diagram::Shading,
    components: Vec<Component>,
    boundary_edge: Vec<String>,
}

impl Frame {
    fn of(d: &TangleDiagram) -> Frame {
        Frame {
            ring: d.ring,
            crossings: d.crossings.clone(),
            boundary: d.boundary.clone(),
            basepoint_after: d.basepoint_after.clone(),
            shading: d.shading,
            components: d.components.clone(),
            boundary_edge: d.boundary_edge.clone(),
        }
    }

    fn build(self) -> Result<TangleDiagram> {
        TangleDiagram::new_attached(
            self.ring,
            self.crossings,
            self.boundary,
            Some(self.boundary_edge),
            self.basepoint_after,
            self.shading,
            self.components,
        )
    }

    fn component_idx(&self, edge: &str) -> Result<usize> {
        self.components
            .iter()
            .position(|k| k.edges.iter().any(|e| e == edge))
            .ok_or_else(|| Error::Invalid(format!("unknown edge `{edge}`")))
    }

    /// Replace the edge at one crossing slot or boundary point.
    fn subst(&mut self, occ: Occ, name: &str) {
        match occ {
            Occ::Slot(ci, si) => self.crossings[ci].slots[si] = name.to_string(),
            Occ::Bnd(bi) => self.boundary_edge[bi] = name.to_string(),
        }
    }

    fn check_fresh_edge(&self, name: &str) -> Result<()> {
        if self.components.iter().any(|k| k.edges.iter().any(|e| e == name)) {
            return Err(Error::Invalid(format!("edge `{name}` is not fresh")));
        }
        Ok(())
    }

    fn check_fresh_crossing(&self, name: &str) -> Result<()> {
        if self.crossings.iter().any(|x| x.id == name) {
            return Err(Error::Invalid(format!("crossing `{name}` is not fresh")));
        }
        Ok(())
    }
}

/// Replace the cyclic subsequence `pat` of `edges` by `rep`.  Returns false
/// if `pat` does not occur.
fn replace_cyclic(edges: &mut Vec<String>, pat: &[&str], rep: &[&str]) -> bool {
    let n = edges.len();
    if pat.len() > n {
        return false;
    }
    for start in 0..n {
        if (0..pat.len()).all(|k| edges[(start + k) % n] == pat[k]) {
            let mut out: Vec<String> = Vec::with_capacity(n);
            if start + pat.len() <= n {
                // No wrap-around: splice in place so the surrounding edges
                // keep their positions exactly.
                out.extend(edges[..start].iter().cloned());
                out.extend(rep.iter().map(|s| s.to_string()));
                out.extend(edges[start + pat.len()..].iter().cloned());
            } else {
                let wrapped = start + pat.len() - n;
                out.extend(edges[wrapped..start].iter().cloned());
                out.extend(rep.iter().map(|s| s.to_string()));
            }
            *edges = out;
            return true;
        }
    }
    false
}

fn apply_r1_add(
    d: &TangleDiagram,
    edge: &str,
    sign: i8,
    side: R1Side,
    new_crossing: &str,
    a: &str,
    b: &str,
) -> Result<TangleDiagram> {
    let mut f = Frame::of(d);
    f.check_fresh_edge(a)?;
    f.check_fresh_edge(b)?;
    f.check_fresh_crossing(new_crossing)?;
    let ki = f.component_idx(edge)?;
    let free = d.free_circles.iter().any(|e| e == edge);
    // Slot patterns, clockwise from the incoming under-strand; `e` is the
    // old edge (keeping its tail), `a` the kink loop, `b` the continuation.
    let e_name = if free { b } else { edge };
    let slots: [&str; 4] = match (sign, side) {
        (1, R1Side::Left) => [e_name, a, a, b],
        (-1, R1Side::Left) => [e_name, b, a, a],
        (1, R1Side::Right) => [a, e_name, b, a],
        (-1, R1Side::Right) => [a, a, b, e_name],
        _ => unreachable!(),
    };
    if free {
        f.components[ki].edges = vec![a.to_string(), b.to_string()];
    } else {
        let head = d
            .edge_dir
            .get(edge)
            .ok_or_else(|| Error::Invalid(format!("edge `{edge}` has no direction")))?
            .1;
        f.subst(head, b);
        if !replace_cyclic(&mut f.components[ki].edges, &[edge], &[edge, a, b]) {
            return Err(Error::Invalid(format!(
                "edge `{edge}` not found in its component"
            )));
        }
    }
    f.crossings.push(Crossing {
        id: new_crossing.to_string(),
        slots: [
            slots[0].to_string(),
            slots[1].to_string(),
            slots[2].to_string(),
            slots[3].to_string(),
        ],
    });
    f.build()
}

/// The four (edge, incoming?) passes of a crossing: under-in, under-out,
/// over-in, over-out.
fn crossing_ports(d: &TangleDiagram, ci: usize) -> [(String, bool); 4] {
    let x = &d.crossings[ci];
    let positive = d.crossing_data().crossings[ci].positive;
    let (oi, oo) = if positive { (1, 3) } else { (3, 1) };
    [
        (x.slots[0].clone(), true),
        (x.slots[2].clone(), false),
        (x.slots[oi].clone(), true),
        (x.slots[oo].clone(), false),
    ]
}

fn apply_r1_remove(d: &TangleDiagram, crossing: &str) -> Result<TangleDiagram> {
    let ci = d
        .crossing_index(crossing)
        .ok_or_else(|| Error::Invalid(format!("unknown crossing `{crossing}`")))?;
    let x = &d.crossings[ci];
    // The loop edge occupies two adjacent slots.
    let loop_edge = (0..4)
        .find_map(|k| {
            let (p, q) = (&x.slots[k], &x.slots[(k + 1) % 4]);
            (p == q).then(|| p.clone())
        })
        .ok_or_else(|| {
            Error::Invalid(format!("crossing `{crossing}` is not a kink"))
        })?;
    let ports = crossing_ports(d, ci);
    let e_in = ports
        .iter()
        .find(|(e, inc)| *inc && *e != loop_edge)
        .map(|(e, _)| e.clone())
        .ok_or_else(|| Error::Invalid("kink has no incoming edge".into()))?;
    let e_out = ports
        .iter()
        .find(|(e, inc)| !*inc && *e != loop_edge)
        .map(|(e, _)| e.clone())
        .ok_or_else(|| Error::Invalid("kink has no outgoing edge".into()))?;
    let mut f = Frame::of(d);
    let ki = f.component_idx(&e_in)?;
    f.crossings.remove(ci);
    if e_in == e_out {
        // A kinked free circle: only the loop and `e_in` remain.
        f.components[ki].edges = vec![e_in.clone()];
    } else {
        // Merge e_in, loop, e_out into e_in: redirect e_out's far end.
        let (_, head) = d.edge_dir[&e_out];
        // The far end is the head of e_out (its tail is at the kink); note
        // the crossing indices shift after the removal.
        let head = match head {
            Occ::Slot(c, s) if c > ci => Occ::Slot(c - 1, s),
            o => o,
        };
        f.subst(head, &e_in);
        if !replace_cyclic(
            &mut f.components[ki].edges,
            &[&e_in, &loop_edge, &e_out],
            &[&e_in],
        ) {
            return Err(Error::Invalid(
                "kink edges are not consecutive in their component".into(),
            ));
        }
    }
    f.build()
}

fn apply_r2_add(
    d: &TangleDiagram,
    over: &str,
    under: &str,
    c1: &str,
    c2: &str,
    e: (&str, &str, &str, &str),
) -> Result<TangleDiagram> {
    let (e1, e2, e3, e4) = e;
    if over == under {
        return Err(Error::Invalid("r2 add needs two distinct edges".into()));
    }
    let base = Frame::of(d);
    for name in [e1, e2, e3, e4] {
        base.check_fresh_edge(name)?;
    }
    base.check_fresh_crossing(c1)?;
    base.check_fresh_crossing(c2)?;
    let under_free = d.free_circles.iter().any(|x| x == under);
    let over_free = d.free_circles.iter().any(|x| x == over);
    // Edges along the under strand: u_in enters the first new crossing, e1
    // sits between them, u_out leaves the second.
    let (u_in, u_out) = if under_free { (e2, e2) } else { (under, e2) };
    let (o_in, o_out) = if over_free { (e4, e4) } else { (over, e4) };
    // Candidates: the over strand may pass c1 or c2 first, and the first
    // crossing may take either handedness (the two crossings always get
    // opposite signs).  The first combination that yields a planar diagram
    // wins.
    for c1_first in [true, false] {
        for c1_positive in [true, false] {
            let mut f = Frame::of(d);
            let over_at = |at_c1: bool| -> (&str, &str) {
                if at_c1 == c1_first {
                    (o_in, e3)
                } else {
                    (e3, o_out)
                }
            };
            let mk = |id: &str, u: (&str, &str), o: (&str, &str), positive: bool| Crossing {
                id: id.to_string(),
                slots: if positive {
                    [u.0.into(), o.0.into(), u.1.into(), o.1.into()]
                } else {
                    [u.0.into(), o.1.into(), u.1.into(), o.0.into()]
                },
            };
            f.crossings.push(mk(c1, (u_in, e1), over_at(true), c1_positive));
            f.crossings.push(mk(c2, (e1, u_out), over_at(false), !c1_positive));
            let kiu = f.component_idx(under)?;
            if under_free {
                f.components[kiu].edges = vec![e1.to_string(), e2.to_string()];
            } else {
                let head = d.edge_dir[under].1;
                f.subst(head, e2);
                replace_cyclic(&mut f.components[kiu].edges, &[under], &[under, e1, e2]);
            }
            let kio = f.component_idx(over)?;
            if over_free {
                f.components[kio].edges = vec![e3.to_string(), e4.to_string()];
            } else {
                let head = d.edge_dir[over].1;
                f.subst(head, e4);
                replace_cyclic(&mut f.components[kio].edges, &[over], &[over, e3, e4]);
            }
            if let Ok(out) = f.build() {
                return Ok(out);
            }
        }
    }
    Err(Error::Invalid(format!(
        "edges `{over}` and `{under}` do not admit an r2 poke"
    )))
}

fn apply_r2_remove(d: &TangleDiagram, c1: &str, c2: &str) -> Result<TangleDiagram> {
    let i1 = d
        .crossing_index(c1)
        .ok_or_else(|| Error::Invalid(format!("unknown crossing `{c1}`")))?;
    let i2 = d
        .crossing_index(c2)
        .ok_or_else(|| Error::Invalid(format!("unknown crossing `{c2}`")))?;
    if i1 == i2 {
        return Err(Error::Invalid("r2 remove needs two crossings".into()));
    }
    let info = &d.crossing_data().crossings;
    if info[i1].positive == info[i2].positive {
        return Err(Error::Invalid(
            "r2 remove needs crossings of opposite sign".into(),
        ));
    }
    // Find a bigon face bounded by exactly these two crossings.
    let mut bigon: Option<(String, String)> = None;
    'faces: for face in d.faces() {
        if face.len() != 2 {
            continue;
        }
        let mut edges = Vec::new();
        for step in face {
            match (&step.edge, &step.from, &step.to) {
                (crate::diagram::MapEdgeRef::Edge(e), a, b) => {
                    let cs: BTreeSet<usize> = [a, b]
                        .iter()
                        .filter_map(|n| match n {
                            crate::diagram::NodeRef::Crossing(c) => Some(*c),
                            _ => None,
                        })
                        .collect();
                    if cs != BTreeSet::from([i1, i2]) {
                        continue 'faces;
                    }
                    edges.push(e.clone());
                }
                _ => continue 'faces,
            }
        }
        if edges.len() == 2 && edges[0] != edges[1] {
            bigon = Some((edges[0].clone(), edges[1].clone()));
            break;
        }
    }
    let (ea, eb) = bigon.ok_or_else(|| {
        Error::Invalid(format!("crossings `{c1}`, `{c2}` do not bound a bigon"))
    })?;
    // Classify the two bigon edges: one runs under at both crossings, the
    // other over at both.
    let slot_of = |ci: usize, e: &str| -> Vec<usize> {
        (0..4).filter(|&s| d.crossings[ci].slots[s] == e).collect()
    };
    let is_under = |e: &str| -> Option<bool> {
        let s1 = slot_of(i1, e);
        let s2 = slot_of(i2, e);
        if s1.len() != 1 || s2.len() != 1 {
            return None;
        }
        let u1 = s1[0] % 2 == 0;
        let u2 = s2[0] % 2 == 0;
        (u1 == u2).then_some(u1)
    };
    let (u_mid, o_mid) = match (is_under(&ea), is_under(&eb)) {
        (Some(true), Some(false)) => (ea, eb),
        (Some(false), Some(true)) => (eb, ea),
        _ => {
            return Err(Error::Invalid(
                "bigon edges are not an under/over pair".into(),
            ))
        }
    };
    // Outer edges of each strand: walk the chain in orientation order.
    let chain = |mid: &str| -> Result<(String, String)> {
        let (tail, head) = d.edge_dir[mid];
        let (Occ::Slot(ct, _), Occ::Slot(ch, _)) = (tail, head) else {
            return Err(Error::Invalid("bigon edge touches the boundary".into()));
        };
        // Incoming edge at the crossing where `mid` starts, on the same pass.
        let pick = |ci: usize, incoming: bool| -> Result<String> {
            let under = slot_of(ci, mid)[0] % 2 == 0;
            let ports = crossing_ports(d, ci);
            let range = if under { 0..2 } else { 2..4 };
            ports[range]
                .iter()
                .find(|(e, inc)| *inc == incoming && e != mid)
                .map(|(e, _)| e.clone())
                .ok_or_else(|| Error::Invalid("bigon strand is degenerate".into()))
        };
        Ok((pick(ct, true)?, pick(ch, false)?))
    };
    let (u_in, u_out) = chain(&u_mid)?;
    let (o_in, o_out) = chain(&o_mid)?;
    let mut f = Frame::of(d);
    let mut merge = |f: &mut Frame, e_in: &str, mid: &str, e_out: &str| -> Result<()> {
        let ki = f.component_idx(e_in)?;
        if e_in == e_out {
            f.components[ki].edges = vec![e_in.to_string()];
        } else {
            let head = d.edge_dir[e_out].1;
            f.subst(head, e_in);
            if !replace_cyclic(&mut f.components[ki].edges, &[e_in, mid, e_out], &[e_in]) {
                return Err(Error::Invalid(
                    "bigon edges are not consecutive in their component".into(),
                ));
            }
        }
        Ok(())
    };
    merge(&mut f, &u_in, &u_mid, &u_out)?;
    merge(&mut f, &o_in, &o_mid, &o_out)?;
    let (hi, lo) = (i1.max(i2), i1.min(i2));
    f.crossings.remove(hi);
    f.crossings.remove(lo);
    f.build()
}

fn apply_r3(d: &TangleDiagram, ids: &[String; 3], pivot: &str) -> Result<TangleDiagram> {
    let mut want = BTreeSet::new();
    for id in ids {
        want.insert(
            d.crossing_index(id)
                .ok_or_else(|| Error::Invalid(format!("unknown crossing `{id}`")))?,
        );
    }
    if want.len() != 3 {
        return Err(Error::Invalid("r3 needs three distinct crossings".into()));
    }
    // Locate the triangular face on these crossings containing the pivot.
    let mut tri: Option<Vec<String>> = None;
    'faces: for face in d.faces() {
        if face.len() != 3 {
            continue;
        }
        let mut edges = Vec::new();
        let mut nodes = BTreeSet::new();
        for step in face {
            let crate::diagram::MapEdgeRef::Edge(e) = &step.edge else {
                continue 'faces;
            };
            for n in [&step.from, &step.to] {
                match n {
                    crate::diagram::NodeRef::Crossing(c) => {
                        nodes.insert(*c);
                    }
                    _ => continue 'faces,
                }
            }
            edges.push(e.clone());
        }
        if nodes == want && edges.iter().any(|e| e == pivot) {
            tri = Some(edges);
            break;
        }
    }
    let tri = tri.ok_or_else(|| {
        Error::Invalid("the three crossings do not bound a triangle with the pivot edge".into())
    })?;
    if tri.iter().filter(|e| *e == pivot).count() != 1 || tri.iter().collect::<BTreeSet<_>>().len() != 3
    {
        return Err(Error::Invalid("degenerate triangle".into()));
    }
    // The moved strand carries the pivot edge and must be over at both its
    // crossings or under at both.
    let pass_kind = |e: &str| -> Result<(bool, bool)> {
        let (Occ::Slot(ct, st), Occ::Slot(ch, sh)) = d.edge_dir[e] else {
            return Err(Error::Invalid("triangle edge touches the boundary".into()));
        };
        let _ = (ct, ch);
        Ok((st % 2 == 0, sh % 2 == 0))
    };
    let (p_tail_under, p_head_under) = pass_kind(pivot)?;
    if p_tail_under != p_head_under {
        return Err(Error::Invalid(
            "the moved strand must pass entirely over or entirely under".into(),
        ));
    }
    // The flip reverses the triangle: every strand swaps its external
    // attachments across its triangle edge (the strand's two triangle
    // crossings trade order along the strand).
    // New per-crossing port assignments: (under_in, under_out, over_in,
    // over_out), edited in place.
    let mut ports: BTreeMap<usize, [String; 4]> = BTreeMap::new();
    for &ci in &want {
        let p = crossing_ports(d, ci);
        ports.insert(
            ci,
            [p[0].0.clone(), p[1].0.clone(), p[2].0.clone(), p[3].0.clone()],
        );
    }
    for t in tri.iter() {
        let (Occ::Slot(ca, sa), Occ::Slot(cb, sb)) = d.edge_dir[t] else {
            unreachable!()
        };
        let a_under = sa % 2 == 0;
        let b_under = sb % 2 == 0;
        // External in-edge at the crossing the strand enters first, and
        // external out-edge where it leaves.
        let (in_slot_a, out_slot_a) = if a_under { (0, 1) } else { (2, 3) };
        let (in_slot_b, out_slot_b) = if b_under { (0, 1) } else { (2, 3) };
        let p_in = ports[&ca][in_slot_a].clone();
        let s_out = ports[&cb][out_slot_b].clone();
        // After the flip the strand traverses `cb` first.
        ports.get_mut(&cb).unwrap()[in_slot_b] = p_in;
        ports.get_mut(&cb).unwrap()[out_slot_b] = t.clone();
        ports.get_mut(&ca).unwrap()[in_slot_a] = t.clone();
        ports.get_mut(&ca).unwrap()[out_slot_a] = s_out;
    }
    let mut f = Frame::of(d);
    for (&ci, p) in &ports {
        let positive = d.crossing_data().crossings[ci].positive;
        f.crossings[ci].slots = if positive {
            [p[0].clone(), p[2].clone(), p[1].clone(), p[3].clone()]
        } else {
            [p[0].clone(), p[3].clone(), p[1].clone(), p[2].clone()]
        };
    }
    f.build()
}

fn apply_birth(
    d: &TangleDiagram,
    circle_edge: &str,
    weight: &str,
    component: &str,
) -> Result<TangleDiagram> {
    let mut f = Frame::of(d);
    f.check_fresh_edge(circle_edge)?;
    if f.components.iter().any(|k| k.id == component) {
        return Err(Error::Invalid(format!(
            "component `{component}` is not fresh"
        )));
    }
    let w = d.ring.elem(weight)?;
    f.components.push(Component {
        id: component.to_string(),
        edges: vec![circle_edge.to_string()],
        weight: w,
    });
    f.build()
}

fn apply_death(d: &TangleDiagram, circle_edge: &str) -> Result<TangleDiagram> {
    if !d.free_circles.iter().any(|e| e == circle_edge) {
        return Err(Error::Invalid(format!(
            "edge `{circle_edge}` is not a crossingless circle"
        )));
    }
    let mut f = Frame::of(d);
    let ki = f.component_idx(circle_edge)?;
    f.components.remove(ki);
    f.build()
}

fn apply_saddle(
    d: &TangleDiagram,
    x: &str,
    y: &str,
    new_edges: &[String],
) -> Result<TangleDiagram> {
    let mut f = Frame::of(d);
    for e in new_edges {
        f.check_fresh_edge(e)?;
    }
    let kx = f.component_idx(x)?;
    let ky = f.component_idx(y)?;
    if f.components[kx].weight != f.components[ky].weight {
        return Err(Error::WeightMismatch);
    }
    let x_free = d.free_circles.iter().any(|e| e == x);
    let y_free = d.free_circles.iter().any(|e| e == y);
    let need = |n: usize| -> Result<()> {
        if new_edges.len() != n {
            return Err(Error::Invalid(format!(
                "this saddle needs {n} new edge name(s)"
            )));
        }
        Ok(())
    };
    let fresh_component_id = |f: &Frame, base: &str| -> Result<String> {
        let id = format!("k.{base}");
        if f.components.iter().any(|k| k.id == id) {
            return Err(Error::Invalid(format!("component id `{id}` collides")));
        }
        Ok(id)
    };
    if x == y {
        // Split one edge: the strand keeps its endpoints through `p`; the
        // middle becomes the free circle `q`.
        need(2)?;
        let (p, q) = (&new_edges[0], &new_edges[1]);
        if x_free {
            f.components[kx].edges = vec![p.clone()];
        } else {
            let (tail, head) = d.edge_dir[x];
            f.subst(tail, p);
            f.subst(head, p);
            replace_cyclic(&mut f.components[kx].edges, &[x], &[p]);
        }
        let id = fresh_component_id(&f, q)?;
        let w = f.components[kx].weight.clone();
        f.components.push(Component {
            id,
            edges: vec![q.clone()],
            weight: w,
        });
        return f.build();
    }
    match (x_free, y_free) {
        (true, true) => {
            // Merge two free circles into one.
            need(1)?;
            let p = &new_edges[0];
            if kx == ky {
                return Err(Error::Invalid("saddle edges are the same circle".into()));
            }
            f.components[kx].edges = vec![p.clone()];
            f.components.remove(ky);
        }
        (true, false) | (false, true) => {
            // Absorb the free circle into the strand: one new edge replaces
            // the strand edge.
            need(1)?;
            let p = &new_edges[0];
            let (circle_k, strand, strand_k) = if x_free { (kx, y, ky) } else { (ky, x, kx) };
            let (tail, head) = d.edge_dir[strand];
            f.subst(tail, p);
            f.subst(head, p);
            replace_cyclic(&mut f.components[strand_k].edges, &[strand], &[p]);
            f.components.remove(circle_k);
        }
        (false, false) => {
            need(2)?;
            let (p, q) = (&new_edges[0], &new_edges[1]);
            // p runs from x's tail to y's head, q from y's tail to x's head.
            let (xt, xh) = d.edge_dir[x];
            let (yt, yh) = d.edge_dir[y];
            f.subst(xt, p);
            f.subst(yh, p);
            f.subst(yt, q);
            f.subst(xh, q);
            let closed = |f: &Frame, k: usize| {
                !f.components[k]
                    .edges
                    .iter()
                    .any(|e| d.boundary_edge.iter().any(|b| b == e))
            };
            if !closed(&f, kx) || !closed(&f, ky) {
                return Err(Error::Invalid(
                    "saddles on boundary components are not supported".into(),
                ));
            }
            if kx == ky {
                // One component splits in two.
                let edges = f.components[kx].edges.clone();
                let n = edges.len();
                let ix = edges.iter().position(|e| e == x).unwrap();
                let iy = edges.iter().position(|e| e == y).unwrap();
                let seg = |from: usize, to: usize| -> Vec<String> {
                    // edges strictly after `from`, up to and including `to`,
                    // cyclically; from == to gives the empty segment.
                    let mut out = Vec::new();
                    let mut k = (from + 1) % n;
                    while k != (to + 1) % n {
                        out.push(edges[k].clone());
                        k = (k + 1) % n;
                    }
                    out
                };
                let mut first = vec![p.clone()];
                first.extend(seg(iy, (ix + n - 1) % n));
                let mut second = vec![q.clone()];
                second.extend(seg(ix, (iy + n - 1) % n));
                f.components[kx].edges = first;
                let id = fresh_component_id(&f, q)?;
                let w = f.components[kx].weight.clone();
                f.components.push(Component {
                    id,
                    edges: second,
                    weight: w,
                });
            } else {
                // Two components merge into the component of x.
                let y_edges = f.components[ky].edges.clone();
                let m = y_edges.len();
                let iy = y_edges.iter().position(|e| e == y).unwrap();
                let mut middle = vec![p.clone()];
                for k in 1..m {
                    middle.push(y_edges[(iy + k) % m].clone());
                }
                middle.push(q.clone());
                let mids: Vec<&str> = middle.iter().map(|s| s.as_str()).collect();
                if !replace_cyclic(&mut f.components[kx].edges, &[x], &mids) {
                    return Err(Error::Invalid("saddle edge not in its component".into()));
                }
                f.components.remove(ky);
            }
        }
    }
    f.build()
}

/// Apply one event to a frame, producing the next frame.  Every result is
/// revalidated (planarity, orientation, weights), so illegal addressing is
/// rejected here.
pub fn apply_event(d: &TangleDiagram, e: &MovieEvent) -> Result<TangleDiagram> {
    match e {
        MovieEvent::R1Add {
            edge,
            sign,
            side,
            new_crossing,
            new_edges,
        } => apply_r1_add(d, edge, *sign, *side, new_crossing, &new_edges.0, &new_edges.1),
        MovieEvent::R1Remove { crossing } => apply_r1_remove(d, crossing),
        MovieEvent::R2Add {
            over,
            under,
            new_crossings,
            new_edges,
        } => apply_r2_add(
            d,
            over,
            under,
            &new_crossings.0,
            &new_crossings.1,
            (&new_edges.0, &new_edges.1, &new_edges.2, &new_edges.3),
        ),
        MovieEvent::R2Remove { crossings } => apply_r2_remove(d, &crossings.0, &crossings.1),
        MovieEvent::R3 {
            crossings,
            pivot_edge,
        } => apply_r3(d, crossings, pivot_edge),
        MovieEvent::Birth {
            circle_edge,
            weight,
            component,
            ..
        } => apply_birth(d, circle_edge, weight, component),
        MovieEvent::Death { circle_edge } => apply_death(d, circle_edge),
        MovieEvent::Saddle { edges, new_edges } => {
            apply_saddle(d, &edges.0, &edges.1, new_edges)
        }
        MovieEvent::Dot { .. } | MovieEvent::Isotopy => Ok(d.clone()),
    }
}

impl Movie {
    /// All frames of the movie, starting with the initial diagram.  Event
    /// failures are wrapped with their index.  When a partition is present,
    /// part labels are threaded through the events and saddles across
    /// distinct parts are rejected.
    pub fn frames(&self) -> Result<Vec<TangleDiagram>> {
        let mut parts = self.partition.clone();
        let mut out = vec![self.initial.clone()];
        for (index, e) in self.events.iter().enumerate() {
            let cur = out.last().unwrap();
            let wrap = |err: Error| Error::BadEvent {
                index,
                msg: err.to_string(),
            };
            if let Some(pm) = &mut parts {
                step_parts(cur, e, pm, index)?;
            }
            let next = apply_event(cur, e).map_err(wrap)?;
            out.push(next);
        }
        Ok(out)
    }
}

pub(crate) fn comp_id(d: &TangleDiagram, edge: &str) -> Result<String> {
    d.edge_component
        .get(edge)
        .map(|&i| d.components[i].id.clone())
        .ok_or_else(|| Error::Invalid(format!("unknown edge `{edge}`")))
}

/// Update the component -> part map across one event; errors on cross-part
/// saddles and on births without a part label.
pub(crate) fn step_parts(
    d: &TangleDiagram,
    e: &MovieEvent,
    parts: &mut BTreeMap<String, usize>,
    index: usize,
) -> Result<()> {
    let bad = |msg: String| Error::BadEvent { index, msg };
    match e {
        MovieEvent::Birth {
            component, part, ..
        } => {
            let p = part.ok_or_else(|| {
                bad("birth in a partitioned movie needs a part label".into())
            })?;
            parts.insert(component.clone(), p);
        }
        MovieEvent::Death { circle_edge } => {
            let k = comp_id(d, circle_edge).map_err(|e| bad(e.to_string()))?;
            parts.remove(&k);
        }
        MovieEvent::Saddle { edges, .. } => {
            let ka = comp_id(d, &edges.0).map_err(|e| bad(e.to_string()))?;
            let kb = comp_id(d, &edges.1).map_err(|e| bad(e.to_string()))?;
            let pa = *parts
                .get(&ka)
                .ok_or_else(|| bad(format!("component `{ka}` has no part")))?;
            let pb = *parts
                .get(&kb)
                .ok_or_else(|| bad(format!("component `{kb}` has no part")))?;
            if pa != pb {
                return Err(bad("saddle joins components of different parts".into()));
            }
            if ka != kb {
                // Merge keeps the component of the first edge.
                parts.remove(&kb);
            } else {
                // Split: the fresh component inherits the part.
                if let MovieEvent::Saddle { new_edges, .. } = e {
                    if new_edges.len() == 2 {
                        parts.insert(format!("k.{}", new_edges[1]), pa);
                    }
                }
            }
        }
        MovieEvent::R2Add { over, under, .. } => {
            // No part bookkeeping change, but record cross-part crossings
            // implicitly; nothing to do here.
            let _ = (over, under);
        }
        _ => {}
    }
    Ok(())
}
