//! Planar tangle diagrams: parsing, validation, orientation, checkerboard
//! shading, sign assignments, and resolutions.
//!
//! # The `.tng` format
//!
//! ```text
//! tangle ring=Q boundary=(b1,b2,b3,b4) basepoint-after=b4 shading=outer-unshaded
//! X c1 = (e1,e2,e3,e4)
//! component k1 edges=(e1,e3) weight=0
//! component k2 edges=(e2,e4) weight=1
//! end
//! ```
//!
//! Crossing slots are listed in cyclic (clockwise) order starting from the
//! incoming under-strand; the over-strand occupies slots 2 and 4.  Links omit
//! `boundary`.  Component edge lists are in orientation order; edge direction
//! is derived from these lists and validated against the slot-1-incoming
//! convention at every crossing.
//!
//! Boundary attachment is positional: the k-th boundary point attaches to the
//! k-th dangling edge end, where dangling ends are enumerated in crossing scan
//! order (edges occurring once among crossing slots), followed by the free
//! ends of crossingless open arcs in component order (tail end first).  An
//! edge occurring in no crossing and belonging to a closed component is a free
//! circle, drawn unnested in the outer region.

use crate::coeff::{Elem, Ring};
use crate::error::{Error, Result};
use std::collections::{BTreeMap, BTreeSet};

/// Which color the anchor face receives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shading {
    OuterUnshaded,
    OuterShaded,
}

impl Shading {
    pub fn parse(s: &str) -> Result<Shading> {
        match s {
            "outer-unshaded" => Ok(Shading::OuterUnshaded),
            "outer-shaded" => Ok(Shading::OuterShaded),
            _ => Err(Error::Invalid(format!("unknown shading convention `{s}`"))),
        }
    }

    pub fn flipped(self) -> Shading {
        match self {
            Shading::OuterUnshaded => Shading::OuterShaded,
            Shading::OuterShaded => Shading::OuterUnshaded,
        }
    }
}

impl std::fmt::Display for Shading {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Shading::OuterUnshaded => write!(f, "outer-unshaded"),
            Shading::OuterShaded => write!(f, "outer-shaded"),
        }
    }
}

/// A crossing with its four edge slots in cyclic order; slot 1 (index 0) is
/// the incoming under-strand, the over-strand occupies slots 2 and 4.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Crossing {
    pub id: String,
    pub slots: [String; 4],
}

/// A link/tangle component: its edges in orientation order and its weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub id: String,
    pub edges: Vec<String>,
    pub weight: Elem,
}

/// One of the two endpoint occurrences of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Occ {
    /// (crossing index, slot index 0..4)
    Slot(usize, usize),
    /// boundary point index
    Bnd(usize),
}

/// Per-crossing derived data.
#[derive(Debug, Clone)]
pub struct CrossingInfo {
    pub id: String,
    pub slots: [String; 4],
    pub positive: bool,
    /// checkerboard sign s(c)
    pub s: i8,
    pub w_over: Elem,
    pub w_under: Elem,
}

#[derive(Debug, Clone)]
pub struct CrossingData {
    pub n_plus: usize,
    pub n_minus: usize,
    pub crossings: Vec<CrossingInfo>,
}

/// Checkerboard signs on crossings and boundary points.
#[derive(Debug, Clone)]
pub struct SignAssignment {
    pub crossing_signs: BTreeMap<String, i8>,
    pub boundary_signs: BTreeMap<String, i8>,
}

/// A boundary-to-boundary strand of a resolution.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ResArc {
    /// Boundary point ids, lower boundary index first.
    pub ends: (String, String),
    pub edges: BTreeSet<String>,
}

/// A crossingless diagram obtained by smoothing every crossing.
///
/// Circles and arcs are identified by the sets of original edge ids they
/// absorb, which makes resolutions of glued diagrams literally comparable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Resolution {
    pub v: Vec<u8>,
    /// Sorted by minimal edge id.
    pub circles: Vec<BTreeSet<String>>,
    /// Sorted by boundary position of the first end.
    pub arcs: Vec<ResArc>,
}

impl Resolution {
    /// Total number of closed circles.
    pub fn k(&self) -> usize {
        self.circles.len()
    }

    /// Index of the circle or arc containing an edge: `Ok(i)` for circle i,
    /// `Err(i)` for arc i.
    pub fn find_edge(&self, edge: &str) -> Option<std::result::Result<usize, usize>> {
        if let Some(i) = self.circles.iter().position(|c| c.contains(edge)) {
            return Some(Ok(i));
        }
        self.arcs
            .iter()
            .position(|a| a.edges.contains(edge))
            .map(Err)
    }
}

/// A node of the embedded graph (crossing or boundary point).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRef {
    Crossing(usize),
    Boundary(usize),
}

/// An edge of the embedded graph (tangle edge or boundary-circle arc).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapEdgeRef {
    Edge(String),
    /// Arc from boundary point i to boundary point i+1.
    BoundaryArc(usize),
}

/// One step of a face boundary walk.
#[derive(Debug, Clone)]
pub struct FaceStep {
    pub edge: MapEdgeRef,
    pub from: NodeRef,
    pub to: NodeRef,
}

/// A validated, oriented, weighted, shaded planar tangle diagram.
#[derive(Debug, Clone)]
pub struct TangleDiagram {
    pub ring: Ring,
    pub crossings: Vec<Crossing>,
    pub boundary: Vec<String>,
    pub basepoint_after: Option<String>,
    pub shading: Shading,
    pub components: Vec<Component>,
    /// Edge attached at boundary point i.
    pub boundary_edge: Vec<String>,
    /// Edges that are crossingless closed circles.
    pub free_circles: Vec<String>,
    /// Edge id -> component index.
    pub edge_component: BTreeMap<String, usize>,
    /// Edge id -> (tail occurrence, head occurrence); absent for free circles.
    pub edge_dir: BTreeMap<String, (Occ, Occ)>,
    signs: SignAssignment,
    data: CrossingData,
    faces: Vec<Vec<FaceStep>>,
    face_shaded: Vec<bool>,
    /// Per crossing, face index at each corner: [12, 23, 34, 41].
    corner_faces: Vec<[usize; 4]>,
}

impl TangleDiagram {
    pub fn signs(&self) -> &SignAssignment {
        &self.signs
    }

    pub fn crossing_data(&self) -> &CrossingData {
        &self.data
    }

    pub fn faces(&self) -> &[Vec<FaceStep>] {
        &self.faces
    }

    pub fn face_shaded(&self, face: usize) -> bool {
        self.face_shaded[face]
    }

    pub fn corner_faces(&self, crossing: usize) -> [usize; 4] {
        self.corner_faces[crossing]
    }

    pub fn n_crossings(&self) -> usize {
        self.crossings.len()
    }

    pub fn crossing_index(&self, id: &str) -> Option<usize> {
        self.crossings.iter().position(|c| c.id == id)
    }

    pub fn boundary_index(&self, id: &str) -> Option<usize> {
        self.boundary.iter().position(|b| b == id)
    }

    pub fn component_of(&self, edge: &str) -> &Component {
        &self.components[self.edge_component[edge]]
    }

    pub fn weight_of_edge(&self, edge: &str) -> &Elem {
        &self.component_of(edge).weight
    }

    /// Weight of the component passing through boundary point p.
    pub fn weight_at(&self, p: &str) -> &Elem {
        let i = self.boundary_index(p).expect("unknown boundary point");
        self.weight_of_edge(&self.boundary_edge[i])
    }

    /// Rebuild with a different coefficient ring (weights re-parsed from
    /// their canonical literal form).
    pub fn with_ring(&self, ring: Ring) -> Result<TangleDiagram> {
        let components = self
            .components
            .iter()
            .map(|k| {
                Ok(Component {
                    id: k.id.clone(),
                    edges: k.edges.clone(),
                    weight: ring.elem(&k.weight.to_string())?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        TangleDiagram::new_attached(
            ring,
            self.crossings.clone(),
            self.boundary.clone(),
            Some(self.boundary_edge.clone()),
            self.basepoint_after.clone(),
            self.shading,
            components,
        )
    }

    /// Rebuild with the opposite shading convention (negates every sign).
    pub fn with_shading(&self, shading: Shading) -> Result<TangleDiagram> {
        TangleDiagram::new_attached(
            self.ring,
            self.crossings.clone(),
            self.boundary.clone(),
            Some(self.boundary_edge.clone()),
            self.basepoint_after.clone(),
            shading,
            self.components.clone(),
        )
    }

    /// Construct and fully validate a diagram, deriving the boundary
    /// attachment positionally.
    pub fn new(
        ring: Ring,
        crossings: Vec<Crossing>,
        boundary: Vec<String>,
        basepoint_after: Option<String>,
        shading: Shading,
        components: Vec<Component>,
    ) -> Result<TangleDiagram> {
        Self::new_attached(
            ring,
            crossings,
            boundary,
            None,
            basepoint_after,
            shading,
            components,
        )
    }

    /// Construct and fully validate a diagram.  When `attachment` is given it
    /// lists the edge attached at each boundary point (in boundary order),
    /// overriding the positional rule; open crossingless arcs appear twice.
    pub fn new_attached(
        ring: Ring,
        crossings: Vec<Crossing>,
        boundary: Vec<String>,
        attachment: Option<Vec<String>>,
        basepoint_after: Option<String>,
        shading: Shading,
        components: Vec<Component>,
    ) -> Result<TangleDiagram> {
        if boundary.len() % 2 != 0 {
            return Err(Error::OddBoundary);
        }
        if let Some(bp) = &basepoint_after {
            if !boundary.contains(bp) {
                return Err(Error::Invalid(format!(
                    "basepoint-after names unknown boundary point `{bp}`"
                )));
            }
        }
        let basepoint_after = match (&basepoint_after, boundary.last()) {
            (Some(bp), _) => Some(bp.clone()),
            (None, Some(last)) => Some(last.clone()),
            (None, None) => None,
        };

        // --- Edge occurrences among crossing slots -----------------------
        let mut occs: BTreeMap<String, Vec<Occ>> = BTreeMap::new();
        for (ci, x) in crossings.iter().enumerate() {
            for (si, e) in x.slots.iter().enumerate() {
                occs.entry(e.clone()).or_default().push(Occ::Slot(ci, si));
            }
        }

        // --- Component membership ----------------------------------------
        let mut edge_component: BTreeMap<String, usize> = BTreeMap::new();
        for (ki, k) in components.iter().enumerate() {
            if k.edges.is_empty() {
                return Err(Error::Invalid(format!("component `{}` has no edges", k.id)));
            }
            for e in &k.edges {
                if edge_component.insert(e.clone(), ki).is_some() {
                    return Err(Error::Invalid(format!(
                        "edge `{e}` belongs to more than one component"
                    )));
                }
            }
        }
        for e in occs.keys() {
            if !edge_component.contains_key(e) {
                return Err(Error::MissingWeight(format!("<edge {e} has no component>")));
            }
        }

        // --- Boundary attachment ------------------------------------------
        // Without an explicit attachment, dangling ends are enumerated
        // positionally: edges with one crossing occurrence (in scan order of
        // that occurrence), then free ends of crossingless edges in component
        // order (two per open arc, tail first).
        let crossingless: Vec<String> = edge_component
            .keys()
            .filter(|e| !occs.contains_key(*e))
            .cloned()
            .collect();
        let mut free_circles: Vec<String> = Vec::new();
        let mut boundary_edge: Vec<String> = Vec::new();
        if let Some(att) = attachment {
            if att.len() != boundary.len() {
                return Err(Error::Invalid(format!(
                    "attachment lists {} edges for {} boundary points",
                    att.len(),
                    boundary.len()
                )));
            }
            for (bi, e) in att.iter().enumerate() {
                if !edge_component.contains_key(e) {
                    return Err(Error::Invalid(format!(
                        "attached edge `{e}` is not in the diagram"
                    )));
                }
                occs.entry(e.clone()).or_default().push(Occ::Bnd(bi));
                boundary_edge.push(e.clone());
            }
            for k in &components {
                for e in &k.edges {
                    if crossingless.contains(e) && !boundary_edge.contains(e) {
                        free_circles.push(e.clone());
                    }
                }
            }
        } else {
            let mut dangling: Vec<String> = Vec::new();
            for x in &crossings {
                for e in &x.slots {
                    if occs[e].len() == 1 && !dangling.contains(e) {
                        dangling.push(e.clone());
                    }
                }
            }
            // Crossingless edges in component order fill the remaining
            // boundary slots (two ends each); leftovers are free circles.
            let mut open_arcs: Vec<String> = Vec::new();
            {
                let mut remaining = boundary.len() as i64 - dangling.len() as i64;
                let mut in_order: Vec<String> = Vec::new();
                for k in &components {
                    for e in &k.edges {
                        if crossingless.contains(e) {
                            in_order.push(e.clone());
                        }
                    }
                }
                for e in in_order {
                    if remaining >= 2 {
                        open_arcs.push(e);
                        remaining -= 2;
                    } else {
                        free_circles.push(e);
                    }
                }
                if remaining != 0 {
                    return Err(Error::Invalid(format!(
                        "boundary has {} points but the diagram exposes {} dangling ends",
                        boundary.len(),
                        boundary.len() as i64 - remaining
                    )));
                }
            }
            let mut bi = 0usize;
            for e in &dangling {
                occs.entry(e.clone()).or_default().push(Occ::Bnd(bi));
                boundary_edge.push(e.clone());
                bi += 1;
            }
            for e in &open_arcs {
                occs.entry(e.clone()).or_default().push(Occ::Bnd(bi));
                boundary_edge.push(e.clone());
                occs.entry(e.clone()).or_default().push(Occ::Bnd(bi + 1));
                boundary_edge.push(e.clone());
                bi += 2;
            }
        }
        for (e, o) in &occs {
            if o.len() != 2 {
                return Err(Error::DanglingEdge(e.clone()));
            }
        }
        for e in &free_circles {
            let k = &components[edge_component[e]];
            if k.edges.len() != 1 {
                return Err(Error::Invalid(format!(
                    "free circle edge `{e}` must be the only edge of its component"
                )));
            }
        }

        // --- Orientation from component edge lists ------------------------
        // Each crossing offers an under pass (slot 1 -> slot 3) and an over
        // pass (slots 2,4, direction set by use).  Consecutive component
        // edges must be joined by an unused pass with compatible direction.
        #[derive(Clone, Copy)]
        enum PassKind {
            Under,
            Over,
        }
        struct Pass {
            ci: usize,
            kind: PassKind,
            used: bool,
        }
        let mut passes: Vec<Pass> = Vec::new();
        for ci in 0..crossings.len() {
            passes.push(Pass {
                ci,
                kind: PassKind::Under,
                used: false,
            });
            passes.push(Pass {
                ci,
                kind: PassKind::Over,
                used: false,
            });
        }
        // edge -> (tail occ, head occ), filled incrementally
        let mut tails: BTreeMap<String, Occ> = BTreeMap::new();
        let mut heads: BTreeMap<String, Occ> = BTreeMap::new();
        let set_dir =
            |map: &mut BTreeMap<String, Occ>, e: &str, o: Occ, kid: &str| -> Result<()> {
                match map.get(e) {
                    None => {
                        map.insert(e.to_string(), o);
                        Ok(())
                    }
                    Some(prev) if *prev == o => Ok(()),
                    Some(_) => Err(Error::BadOrientation(kid.to_string())),
                }
            };
        for k in &components {
            if free_circles.contains(&k.edges[0]) {
                continue;
            }
            let closed = !k.edges.iter().any(|e| {
                occs[e]
                    .iter()
                    .any(|o| matches!(o, Occ::Bnd(_)))
            });
            let m = k.edges.len();
            let pairs: Vec<(usize, usize)> = if closed {
                (0..m).map(|i| (i, (i + 1) % m)).collect()
            } else {
                (0..m - 1).map(|i| (i, i + 1)).collect()
            };
            if !closed {
                // First edge enters from the boundary, last edge exits to it.
                let first = &k.edges[0];
                let last = &k.edges[m - 1];
                let bt = occs[first]
                    .iter()
                    .find(|o| matches!(o, Occ::Bnd(_)))
                    .copied()
                    .ok_or_else(|| Error::BadOrientation(k.id.clone()))?;
                set_dir(&mut tails, first, bt, &k.id)?;
                let bh = occs[last]
                    .iter()
                    .rev()
                    .find(|o| matches!(o, Occ::Bnd(_)))
                    .copied()
                    .ok_or_else(|| Error::BadOrientation(k.id.clone()))?;
                set_dir(&mut heads, last, bh, &k.id)?;
            }
            for (i, j) in pairs {
                let e = &k.edges[i];
                let e2 = &k.edges[j];
                let mut found = false;
                for p in passes.iter_mut().filter(|p| !p.used) {
                    let x = &crossings[p.ci];
                    match p.kind {
                        PassKind::Under => {
                            if &x.slots[0] == e && &x.slots[2] == e2 {
                                p.used = true;
                                set_dir(&mut heads, e, Occ::Slot(p.ci, 0), &k.id)?;
                                set_dir(&mut tails, e2, Occ::Slot(p.ci, 2), &k.id)?;
                                found = true;
                                break;
                            }
                        }
                        PassKind::Over => {
                            let (a, b) = (&x.slots[1], &x.slots[3]);
                            // e comes in at one over slot, e2 leaves at the other.
                            let choice = if a == e && b == e2 {
                                Some((1usize, 3usize))
                            } else if b == e && a == e2 {
                                Some((3, 1))
                            } else {
                                None
                            };
                            if let Some((sin, sout)) = choice {
                                // For a loop edge make sure the occurrences
                                // are actually distinct endpoints.
                                if e == e2 && sin == sout {
                                    continue;
                                }
                                p.used = true;
                                set_dir(&mut heads, e, Occ::Slot(p.ci, sin), &k.id)?;
                                set_dir(&mut tails, e2, Occ::Slot(p.ci, sout), &k.id)?;
                                found = true;
                                break;
                            }
                        }
                    }
                }
                if !found {
                    return Err(Error::BadOrientation(k.id.clone()));
                }
            }
        }
        if passes.iter().any(|p| !p.used) {
            return Err(Error::BadOrientation(
                "<some crossing pass is not traversed by any component>".to_string(),
            ));
        }
        let mut edge_dir: BTreeMap<String, (Occ, Occ)> = BTreeMap::new();
        for e in occs.keys() {
            if free_circles.contains(e) {
                continue;
            }
            let (t, h) = (
                tails
                    .get(e)
                    .ok_or_else(|| Error::BadOrientation(e.clone()))?,
                heads
                    .get(e)
                    .ok_or_else(|| Error::BadOrientation(e.clone()))?,
            );
            if t == h {
                return Err(Error::BadOrientation(e.clone()));
            }
            edge_dir.insert(e.clone(), (*t, *h));
        }

        // --- Planarity via face tracing ------------------------------------
        // Map edges: tangle edges (tail -> head) then boundary-circle arcs.
        let mut map_edges: Vec<(Occ, Occ, MapEdgeRef)> = Vec::new();
        for (e, (t, h)) in &edge_dir {
            map_edges.push((*t, *h, MapEdgeRef::Edge(e.clone())));
        }
        let kb = boundary.len();
        for i in 0..kb {
            map_edges.push((
                Occ::Bnd(i),
                Occ::Bnd((i + 1) % kb),
                MapEdgeRef::BoundaryArc(i),
            ));
        }
        let node_of = |o: Occ| match o {
            Occ::Slot(ci, _) => NodeRef::Crossing(ci),
            Occ::Bnd(i) => NodeRef::Boundary(i),
        };
        // Dart 2e points tail->head, 2e+1 head->tail.  Rotation lists give
        // the clockwise cyclic order of outgoing darts at each node.
        let n_darts = 2 * map_edges.len();
        let dart_target = |d: usize| {
            let (t, h, _) = &map_edges[d / 2];
            if d % 2 == 0 {
                *h
            } else {
                *t
            }
        };
        let dart_source = |d: usize| {
            let (t, h, _) = &map_edges[d / 2];
            if d % 2 == 0 {
                *t
            } else {
                *h
            }
        };
        // Build rotations keyed by node.
        let mut rot_at_crossing: Vec<[Option<usize>; 4]> = vec![[None; 4]; crossings.len()];
        let mut bnd_edge_dart: Vec<Option<usize>> = vec![None; kb];
        let mut arc_out: Vec<usize> = vec![0; kb]; // dart of arc i leaving Bnd(i)
        let mut arc_in: Vec<usize> = vec![0; kb]; // dart of arc i-1... indexed by arc
        for (ei, (t, h, kind)) in map_edges.iter().enumerate() {
            for (d, o) in [(2 * ei, *t), (2 * ei + 1, *h)] {
                match o {
                    Occ::Slot(ci, si) => {
                        if rot_at_crossing[ci][si].is_some() {
                            return Err(Error::Invalid(format!(
                                "slot {si} of crossing {ci} used twice"
                            )));
                        }
                        rot_at_crossing[ci][si] = Some(d);
                    }
                    Occ::Bnd(i) => match kind {
                        MapEdgeRef::Edge(_) => bnd_edge_dart[i] = Some(d),
                        MapEdgeRef::BoundaryArc(a) => {
                            if d % 2 == 0 {
                                arc_out[*a] = d;
                            } else {
                                arc_in[*a] = d;
                            }
                        }
                    },
                }
            }
        }
        // sigma: next outgoing dart clockwise at the same node.
        let mut sigma = vec![usize::MAX; n_darts];
        for rot in &rot_at_crossing {
            let ds: Vec<usize> = rot.iter().map(|d| d.unwrap()).collect();
            for i in 0..4 {
                sigma[ds[i]] = ds[(i + 1) % 4];
            }
        }
        for i in 0..kb {
            // Clockwise at a boundary point: arc to the next point, the
            // tangle edge into the disk, arc to the previous point.
            let e = bnd_edge_dart[i].ok_or_else(|| Error::DanglingEdge(boundary[i].clone()))?;
            let nxt = arc_out[i];
            let prv = arc_in[(i + kb - 1) % kb];
            sigma[nxt] = e;
            sigma[e] = prv;
            sigma[prv] = nxt;
        }
        // Face tracing: next(d) = sigma(twin(d)).
        let twin = |d: usize| d ^ 1;
        let mut face_of = vec![usize::MAX; n_darts];
        let mut faces_darts: Vec<Vec<usize>> = Vec::new();
        for d0 in 0..n_darts {
            if face_of[d0] != usize::MAX {
                continue;
            }
            let f = faces_darts.len();
            let mut walk = Vec::new();
            let mut d = d0;
            loop {
                face_of[d] = f;
                walk.push(d);
                d = sigma[twin(d)];
                if d == d0 {
                    break;
                }
            }
            faces_darts.push(walk);
        }
        // Euler check: V - E + F = 1 + #components of the embedded graph.
        let n_vertices = crossings.len() + kb;
        if n_vertices > 0 {
            let mut uf = UnionFind::new(n_vertices);
            let vid = |o: Occ| match o {
                Occ::Slot(ci, _) => ci,
                Occ::Bnd(i) => crossings.len() + i,
            };
            for (t, h, _) in &map_edges {
                uf.union(vid(*t), vid(*h));
            }
            let c = (0..n_vertices).filter(|&v| uf.find(v) == v).count();
            let euler = n_vertices as i64 - map_edges.len() as i64 + faces_darts.len() as i64;
            if euler != 1 + c as i64 {
                return Err(Error::NonPlanar {
                    got: euler,
                    want: 1 + c as i64,
                });
            }
        }
        let faces: Vec<Vec<FaceStep>> = faces_darts
            .iter()
            .map(|walk| {
                walk.iter()
                    .map(|&d| FaceStep {
                        edge: map_edges[d / 2].2.clone(),
                        from: node_of(dart_source(d)),
                        to: node_of(dart_target(d)),
                    })
                    .collect()
            })
            .collect();

        // Corner faces: corner between slots i and i+1 is the face of the
        // incoming dart at slot i.
        let mut corner_faces: Vec<[usize; 4]> = Vec::new();
        for rot in &rot_at_crossing {
            let mut cf = [0usize; 4];
            for i in 0..4 {
                cf[i] = face_of[twin(rot[i].unwrap())];
            }
            corner_faces.push(cf);
        }

        // --- Checkerboard shading ------------------------------------------
        // Colors flip across tangle edges only; the boundary circle is not a
        // barrier.  Anchor: for tangles, the inner face at the basepoint (the
        // boundary arc after `basepoint-after`); other connected pieces and
        // links anchor at their minimal face index.
        let n_faces = faces_darts.len();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n_faces];
        for (ei, (_, _, kind)) in map_edges.iter().enumerate() {
            if matches!(kind, MapEdgeRef::Edge(_)) {
                let (f1, f2) = (face_of[2 * ei], face_of[2 * ei + 1]);
                adj[f1].push(f2);
                adj[f2].push(f1);
            }
        }
        let anchor_color = match shading {
            Shading::OuterUnshaded => false,
            Shading::OuterShaded => true,
        };
        let mut face_color: Vec<Option<bool>> = vec![None; n_faces];
        let paint = |start: usize, color: bool, face_color: &mut Vec<Option<bool>>| -> Result<()> {
            let mut stack = vec![(start, color)];
            while let Some((f, col)) = stack.pop() {
                match face_color[f] {
                    Some(c) if c == col => continue,
                    Some(_) => {
                        return Err(Error::Integrity(
                            "faces are not checkerboard 2-colorable".to_string(),
                        ))
                    }
                    None => face_color[f] = Some(col),
                }
                for &g in &adj[f] {
                    stack.push((g, !col));
                }
            }
            Ok(())
        };
        if kb > 0 {
            let bp = basepoint_after.as_ref().unwrap();
            let ib = boundary.iter().position(|b| b == bp).unwrap();
            // The basepoint sits on boundary arc ib; its inner face is the
            // one of the arc's two faces that is not the all-arc outer face.
            let is_outer = |f: usize| {
                faces_darts[f]
                    .iter()
                    .all(|&d| matches!(map_edges[d / 2].2, MapEdgeRef::BoundaryArc(_)))
            };
            let (f1, f2) = (face_of[arc_out[ib]], face_of[twin(arc_out[ib])]);
            let inner = if is_outer(f1) { f2 } else { f1 };
            paint(inner, anchor_color, &mut face_color)?;
            // The outer face is the same planar region as the basepoint face.
            for f in 0..n_faces {
                if is_outer(f) && face_color[f].is_none() {
                    face_color[f] = Some(anchor_color);
                }
            }
        }
        for f in 0..n_faces {
            if face_color[f].is_none() {
                paint(f, anchor_color, &mut face_color)?;
            }
        }
        let face_shaded: Vec<bool> = face_color.into_iter().map(|c| c.unwrap()).collect();

        // --- Sign assignment ----------------------------------------------
        let mut crossing_signs = BTreeMap::new();
        for (ci, x) in crossings.iter().enumerate() {
            let cf = corner_faces[ci];
            let (c12, c23, c34, c41) = (
                face_shaded[cf[0]],
                face_shaded[cf[1]],
                face_shaded[cf[2]],
                face_shaded[cf[3]],
            );
            if c12 != c34 || c23 != c41 || c12 == c23 {
                return Err(Error::Integrity(format!(
                    "corner faces of crossing `{}` are not checkerboarded",
                    x.id
                )));
            }
            crossing_signs.insert(x.id.clone(), if c23 { 1 } else { -1 });
        }
        let mut boundary_signs = BTreeMap::new();
        for i in 0..kb {
            // Inner faces of the arcs before and after point i.
            let inner = |a: usize| {
                let (f1, f2) = (face_of[arc_out[a]], face_of[twin(arc_out[a])]);
                let all_arcs = |f: usize| {
                    faces_darts[f]
                        .iter()
                        .all(|&d| matches!(map_edges[d / 2].2, MapEdgeRef::BoundaryArc(_)))
                };
                if all_arcs(f1) && !all_arcs(f2) {
                    f2
                } else {
                    f1
                }
            };
            let before = face_shaded[inner((i + kb - 1) % kb)];
            let after = face_shaded[inner(i)];
            if before == after {
                return Err(Error::Integrity(format!(
                    "faces at boundary point `{}` are not checkerboarded",
                    boundary[i]
                )));
            }
            boundary_signs.insert(boundary[i].clone(), if !before && after { 1 } else { -1 });
        }
        let signs = SignAssignment {
            crossing_signs,
            boundary_signs,
        };

        // --- Per-crossing data ---------------------------------------------
        let mut infos = Vec::new();
        let (mut n_plus, mut n_minus) = (0usize, 0usize);
        for (ci, x) in crossings.iter().enumerate() {
            // Positive iff the over strand comes in at slot 2.
            let over_in = &x.slots[1];
            let positive = edge_dir[over_in].1 == Occ::Slot(ci, 1);
            if positive {
                n_plus += 1;
            } else {
                n_minus += 1;
            }
            let w_over = components[edge_component[&x.slots[1]]].weight.clone();
            let w_under = components[edge_component[&x.slots[0]]].weight.clone();
            infos.push(CrossingInfo {
                id: x.id.clone(),
                slots: x.slots.clone(),
                positive,
                s: signs.crossing_signs[&x.id],
                w_over,
                w_under,
            });
        }
        let data = CrossingData {
            n_plus,
            n_minus,
            crossings: infos,
        };

        Ok(TangleDiagram {
            ring,
            crossings,
            boundary,
            basepoint_after,
            shading,
            components,
            boundary_edge,
            free_circles,
            edge_component,
            edge_dir,
            signs,
            data,
            faces,
            face_shaded,
            corner_faces,
        })
    }

    /// Compute the resolution for a 0/1 vector over the crossings.
    pub fn resolve(&self, v: &[u8]) -> Result<Resolution> {
        if v.len() != self.crossings.len() {
            return Err(Error::BadResolutionLength {
                got: v.len(),
                want: self.crossings.len(),
            });
        }
        let edges: Vec<String> = self.edge_component.keys().cloned().collect();
        let idx: BTreeMap<&str, usize> = edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.as_str(), i))
            .collect();
        let mut uf = UnionFind::new(edges.len());
        for (ci, x) in self.crossings.iter().enumerate() {
            let s = &x.slots;
            let joins: [(usize, usize); 2] = if v[ci] == 0 {
                // 0-smoothing joins slots (1,4) and (2,3)
                [(0, 3), (1, 2)]
            } else {
                // 1-smoothing joins slots (1,2) and (3,4)
                [(0, 1), (2, 3)]
            };
            for (a, b) in joins {
                uf.union(idx[s[a].as_str()], idx[s[b].as_str()]);
            }
        }
        let mut classes: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
        for (i, e) in edges.iter().enumerate() {
            classes.entry(uf.find(i)).or_default().insert(e.clone());
        }
        let mut circles = Vec::new();
        let mut arcs = Vec::new();
        for (_, set) in classes {
            let mut ends: Vec<usize> = (0..self.boundary.len())
                .filter(|&i| set.contains(&self.boundary_edge[i]))
                .collect();
            // An open crossingless arc occupies two boundary slots with the
            // same edge id; treat the two occurrences separately.
            if ends.is_empty() {
                circles.push(set);
            } else {
                ends.sort_unstable();
                if ends.len() != 2 {
                    return Err(Error::Integrity(format!(
                        "resolution strand meets {} boundary points",
                        ends.len()
                    )));
                }
                arcs.push((
                    ends[0],
                    ResArc {
                        ends: (
                            self.boundary[ends[0]].clone(),
                            self.boundary[ends[1]].clone(),
                        ),
                        edges: set,
                    },
                ));
            }
        }
        circles.sort();
        arcs.sort_by_key(|(i, _)| *i);
        let arcs: Vec<ResArc> = arcs.into_iter().map(|(_, a)| a).collect();
        // Non-crossing check for the boundary pairing.
        let pos = |p: &str| self.boundary_index(p).unwrap();
        let mut stack: Vec<usize> = Vec::new();
        let mut open: BTreeMap<usize, usize> = BTreeMap::new();
        for (ai, a) in arcs.iter().enumerate() {
            open.insert(pos(&a.ends.0), ai);
        }
        for i in 0..self.boundary.len() {
            if let Some(&ai) = open.get(&i) {
                stack.push(ai);
            } else {
                let ai = arcs
                    .iter()
                    .position(|a| pos(&a.ends.1) == i)
                    .expect("boundary point not on any arc");
                if stack.pop() != Some(ai) {
                    return Err(Error::Integrity(
                        "resolution arcs cross each other".to_string(),
                    ));
                }
            }
        }
        Ok(Resolution {
            v: v.to_vec(),
            circles,
            arcs,
        })
    }

    /// All 2^n resolutions in lexicographic order of v (v[0] is the most
    /// significant bit of the enumeration index).
    pub fn all_resolutions(&self) -> Result<Vec<Resolution>> {
        let n = self.crossings.len();
        let mut out = Vec::with_capacity(1 << n);
        for mask in 0..(1u64 << n) {
            let v: Vec<u8> = (0..n)
                .map(|i| ((mask >> (n - 1 - i)) & 1) as u8)
                .collect();
            out.push(self.resolve(&v)?);
        }
        Ok(out)
    }
}

/// Parse a `.tng` file.
pub fn parse_tangle(text: &str) -> Result<TangleDiagram> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let (diagram, consumed) = parse_tangle_block(&lines)?;
    if consumed != lines.len() {
        let (line, _) = lines[consumed];
        return Err(Error::Parse {
            line,
            msg: "trailing content after `end`".to_string(),
        });
    }
    Ok(diagram)
}

/// Parse a tangle block from pre-filtered (line number, text) pairs starting
/// at index 0; returns the diagram and the number of lines consumed
/// (including the `end` line).  Used directly by the movie parser.
pub fn parse_tangle_block(lines: &[(usize, &str)]) -> Result<(TangleDiagram, usize)> {
    let err = |line: usize, msg: &str| Error::Parse {
        line,
        msg: msg.to_string(),
    };
    let Some(&(hline, header)) = lines.first() else {
        return Err(err(0, "empty input"));
    };
    if !header.starts_with("tangle") {
        return Err(err(hline, "expected `tangle` header"));
    }
    let mut ring = Ring::Q;
    let mut boundary: Vec<String> = Vec::new();
    let mut basepoint_after = None;
    let mut shading = Shading::OuterUnshaded;
    for tok in header.split_whitespace().skip(1) {
        let (key, val) = tok
            .split_once('=')
            .ok_or_else(|| err(hline, &format!("bad header token `{tok}`")))?;
        match key {
            "ring" => ring = Ring::parse(val)?,
            "boundary" => boundary = parse_id_list(val).ok_or_else(|| err(hline, "bad boundary list"))?,
            "basepoint-after" => basepoint_after = Some(val.to_string()),
            "shading" => shading = Shading::parse(val)?,
            _ => return Err(err(hline, &format!("unknown header key `{key}`"))),
        }
    }
    let mut crossings = Vec::new();
    let mut components = Vec::new();
    let mut consumed = None;
    for (i, &(lno, line)) in lines.iter().enumerate().skip(1) {
        if line == "end" {
            consumed = Some(i + 1);
            break;
        }
        if let Some(rest) = line.strip_prefix("X ") {
            let (id, slots) = rest
                .split_once('=')
                .ok_or_else(|| err(lno, "expected `X <id> = (e,e,e,e)`"))?;
            let slots = parse_id_list(slots.trim())
                .filter(|v| v.len() == 4)
                .ok_or_else(|| err(lno, "expected four edge slots"))?;
            crossings.push(Crossing {
                id: id.trim().to_string(),
                slots: [
                    slots[0].clone(),
                    slots[1].clone(),
                    slots[2].clone(),
                    slots[3].clone(),
                ],
            });
        } else if let Some(rest) = line.strip_prefix("component ") {
            let (head, weight_text) = rest
                .split_once("weight=")
                .ok_or_else(|| err(lno, "component is missing `weight=`"))?;
            let mut head_toks = head.split_whitespace();
            let id = head_toks
                .next()
                .ok_or_else(|| err(lno, "component is missing an id"))?
                .to_string();
            let edges_tok = head_toks
                .next()
                .and_then(|t| t.strip_prefix("edges="))
                .ok_or_else(|| err(lno, "component is missing `edges=`"))?;
            let edges =
                parse_id_list(edges_tok).ok_or_else(|| err(lno, "bad component edge list"))?;
            let weight = ring.elem(weight_text.trim())?;
            components.push(Component { id, edges, weight });
        } else {
            return Err(err(lno, &format!("unrecognized line `{line}`")));
        }
    }
    let consumed = consumed.ok_or_else(|| err(lines.last().unwrap().0, "missing `end`"))?;
    let diagram = TangleDiagram::new(ring, crossings, boundary, basepoint_after, shading, components)?;
    Ok((diagram, consumed))
}

/// Parse `(a,b,c)` into ids; returns `None` on malformed input.
fn parse_id_list(s: &str) -> Option<Vec<String>> {
    let inner = s.trim().strip_prefix('(')?.strip_suffix(')')?;
    if inner.trim().is_empty() {
        return Some(Vec::new());
    }
    Some(
        inner
            .split(',')
            .map(|t| t.trim().to_string())
            .collect(),
    )
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let r = self.find(self.parent[x]);
            self.parent[x] = r;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}
