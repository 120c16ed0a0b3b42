//! The dotted cobordism category: morphisms between resolutions of a tangle,
//! vertical composition, and planar (horizontal) composition.
//!
//! Morphisms are linear combinations of cobordisms modulo the local
//! relations: an undotted sphere is 0, a dotted sphere is 1, two dots on a
//! component kill it, and neck-cutting rewrites a tube as the sum of the two
//! ways of capping it with one dot.  These relations admit a canonical
//! normal form: every connected component of the surface is a disk carrying
//! at most one dot.  A disk is determined by its single boundary curve, so a
//! normal-form configuration between resolutions `S` and `T` is determined
//! by the set of curves that carry a dot.  The curves of a cobordism from
//! `S` to `T` are the circles of `S`, the circles of `T`, and the *side
//! cycles* — closed curves over the boundary points obtained by alternating
//! the arc pairings of `S` and `T` along the vertical boundary.
//!
//! Reduction of a glued, connected, possibly higher-genus piece with `b`
//! boundary curves, genus `g`, and `d` dots: it vanishes when `d + g >= 2`;
//! otherwise it equals `2^g` times the sum over all ways of placing
//! `b - 1 + d + g` dots on the `b` capping disks, one dot per disk at most.
//! A closed piece (`b = 0`) evaluates to `2^g` when `g + d = 1` and to zero
//! otherwise.  Euler characteristic bookkeeping (`χ = 2 - 2g - b`) recovers
//! the genus after gluing.

use crate::coeff::{Elem, Ring};
use crate::diagram::{ResArc, Resolution};
use crate::error::{Error, Result};
use itertools::Itertools;
use std::collections::{BTreeMap, BTreeSet};

/// A boundary curve of a cobordism between two resolutions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Curve {
    /// A source circle, identified by its edge set.
    Src(BTreeSet<String>),
    /// A target circle, identified by its edge set.
    Tgt(BTreeSet<String>),
    /// A side cycle, identified by the set of boundary points it visits.
    Side(BTreeSet<String>),
}

/// A normal-form dotted cobordism configuration: a disjoint union of disks,
/// one per curve of the cobordism, with the listed curves dotted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DottedConfig {
    pub source: Resolution,
    pub target: Resolution,
    pub dots: BTreeSet<Curve>,
}

/// The side cycles between two resolutions with the same boundary points:
/// orbits of the points under alternating the two arc-pairing involutions.
pub fn side_cycles(src: &Resolution, tgt: &Resolution) -> Vec<BTreeSet<String>> {
    let pair = |arcs: &[ResArc]| -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        for a in arcs {
            m.insert(a.ends.0.clone(), a.ends.1.clone());
            m.insert(a.ends.1.clone(), a.ends.0.clone());
        }
        m
    };
    let ps = pair(&src.arcs);
    let pt = pair(&tgt.arcs);
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut cycles = Vec::new();
    for p0 in ps.keys() {
        if seen.contains(p0) {
            continue;
        }
        let mut cyc = BTreeSet::new();
        let mut p = p0.clone();
        loop {
            cyc.insert(p.clone());
            seen.insert(p.clone());
            let q = ps[&p].clone();
            cyc.insert(q.clone());
            seen.insert(q.clone());
            p = pt[&q].clone();
            if cyc.contains(&p) {
                break;
            }
        }
        cycles.push(cyc);
    }
    cycles.sort();
    cycles
}

/// The side cycle through a given boundary point.
pub fn side_containing(src: &Resolution, tgt: &Resolution, point: &str) -> Option<BTreeSet<String>> {
    side_cycles(src, tgt).into_iter().find(|c| c.contains(point))
}

/// The full curve set of a cobordism from `src` to `tgt`.
pub fn all_curves(src: &Resolution, tgt: &Resolution) -> Vec<Curve> {
    let mut out: Vec<Curve> = Vec::new();
    for c in &src.circles {
        out.push(Curve::Src(c.clone()));
    }
    for c in &tgt.circles {
        out.push(Curve::Tgt(c.clone()));
    }
    for s in side_cycles(src, tgt) {
        out.push(Curve::Side(s));
    }
    out
}

impl DottedConfig {
    /// deg = χ - |B|/2 - 2d; every disk contributes χ = 1.
    pub fn degree(&self) -> i64 {
        let curves = self.source.circles.len()
            + self.target.circles.len()
            + side_cycles(&self.source, &self.target).len();
        curves as i64 - self.source.arcs.len() as i64 - 2 * self.dots.len() as i64
    }
}

/// An R-linear combination of normal-form configurations with common source
/// and target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CobMorphism {
    pub ring: Ring,
    pub source: Resolution,
    pub target: Resolution,
    pub terms: BTreeMap<BTreeSet<Curve>, Elem>,
}

/// One glued connected piece before reduction: its boundary curves (in the
/// outer cobordism), Euler characteristic, and dot count.
#[derive(Debug, Clone)]
struct Piece {
    curves: BTreeSet<Curve>,
    chi: i64,
    dots: u32,
}

/// Reduce a glued piece.  Returns `None` if it vanishes; otherwise a scalar
/// multiplier and the list of admissible dot placements on its disks.
fn reduce_piece(ring: Ring, piece: &Piece) -> Option<(Elem, Vec<BTreeSet<Curve>>)> {
    let b = piece.curves.len() as i64;
    let two_g = 2 - b - piece.chi;
    assert!(
        two_g >= 0 && two_g % 2 == 0,
        "non-surface gluing (chi={}, b={b})",
        piece.chi
    );
    let g = (two_g / 2) as u32;
    let d = piece.dots;
    if b == 0 {
        if g + d == 1 {
            return Some((ring.from_i64(1 << g), vec![BTreeSet::new()]));
        }
        return None;
    }
    if d + g >= 2 {
        return None;
    }
    let t = (b - 1) as usize + (d + g) as usize;
    if t > b as usize {
        return None;
    }
    let coeff = ring.from_i64(1 << g);
    let placements: Vec<BTreeSet<Curve>> = piece
        .curves
        .iter()
        .cloned()
        .combinations(t)
        .map(|v| v.into_iter().collect())
        .collect();
    Some((coeff, placements))
}

/// Expand a disjoint union of pieces into a morphism.
fn expand_pieces(
    ring: Ring,
    source: &Resolution,
    target: &Resolution,
    pieces: &[Piece],
    scale: &Elem,
) -> CobMorphism {
    let mut out = CobMorphism::zero(ring, source.clone(), target.clone());
    let mut coeff = scale.clone();
    let mut options: Vec<Vec<BTreeSet<Curve>>> = Vec::new();
    for p in pieces {
        match reduce_piece(ring, p) {
            None => return out,
            Some((c, opts)) => {
                coeff = &coeff * &c;
                options.push(opts);
            }
        }
    }
    let mut idx = vec![0usize; options.len()];
    loop {
        let mut dots: BTreeSet<Curve> = BTreeSet::new();
        for (k, &i) in idx.iter().enumerate() {
            dots.extend(options[k][i].iter().cloned());
        }
        out.add_term(dots, coeff.clone());
        let mut k = 0;
        loop {
            if k == idx.len() {
                return out;
            }
            idx[k] += 1;
            if idx[k] < options[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

impl CobMorphism {
    pub fn zero(ring: Ring, source: Resolution, target: Resolution) -> CobMorphism {
        CobMorphism {
            ring,
            source,
            target,
            terms: BTreeMap::new(),
        }
    }

    /// The identity cobordism on a resolution, in normal form.
    pub fn identity(ring: Ring, res: &Resolution) -> CobMorphism {
        CobMorphism::minimal(ring, res, res)
    }

    /// The elementary cobordism from `src` to `tgt` in which every circle
    /// common to both is a cylinder, every common arc a vertical sheet, and
    /// all remaining curves bound a single connected genus-0 piece.  This
    /// covers identities, cube-edge saddles of every kind, births, and
    /// deaths; the result is fully reduced.
    pub fn minimal(ring: Ring, src: &Resolution, tgt: &Resolution) -> CobMorphism {
        let (pieces, _) = minimal_pieces(src, tgt, None);
        expand_pieces(ring, src, tgt, &pieces, &ring.one())
    }

    /// The identity with a single dot on the component through `edge`.
    pub fn dot(ring: Ring, res: &Resolution, edge: &str) -> Result<CobMorphism> {
        let curve = match res.find_edge(edge) {
            Some(Ok(ci)) => Curve::Src(res.circles[ci].clone()),
            Some(Err(ai)) => {
                let a = &res.arcs[ai];
                Curve::Side(
                    side_containing(res, res, &a.ends.0)
                        .expect("arc endpoint missing from side cycles"),
                )
            }
            None => {
                return Err(Error::Invalid(format!(
                    "edge `{edge}` is not on the resolution"
                )))
            }
        };
        let (pieces, hit) = minimal_pieces(res, res, Some(&curve));
        if !hit {
            return Err(Error::Invalid(format!(
                "dot curve not found for edge `{edge}`"
            )));
        }
        Ok(expand_pieces(ring, res, res, &pieces, &ring.one()))
    }

    /// The identity with a single dot on the sheet through the given side
    /// cycle.
    pub fn dot_on_side(ring: Ring, res: &Resolution, cycle: &BTreeSet<String>) -> CobMorphism {
        let curve = Curve::Side(cycle.clone());
        let (pieces, hit) = minimal_pieces(res, res, Some(&curve));
        assert!(hit, "side cycle not found on resolution");
        expand_pieces(ring, res, res, &pieces, &ring.one())
    }

    /// A single connected genus-0 cobordism with the given dot count,
    /// together with cylinders/sheets on every other curve.  `piece_curves`
    /// must be curves of the cobordism; curves outside it are grouped into
    /// unchanged cylinders and sheets as in [`CobMorphism::minimal`].
    pub fn connected_on(
        ring: Ring,
        src: &Resolution,
        tgt: &Resolution,
        piece_curves: &BTreeSet<Curve>,
        dots: u32,
    ) -> Result<CobMorphism> {
        let (mut pieces, _) = minimal_pieces(src, tgt, None);
        // Extract the named curves from the minimal pieces and fuse them
        // into one connected genus-0 piece with the requested dots.
        let mut fused = Piece {
            curves: BTreeSet::new(),
            chi: 0,
            dots,
        };
        let mut rest: Vec<Piece> = Vec::new();
        for p in pieces.drain(..) {
            if p.curves.iter().any(|c| piece_curves.contains(c)) {
                if !p.curves.iter().all(|c| piece_curves.contains(c)) {
                    return Err(Error::Invalid(
                        "connected_on: curve set splits an unchanged cylinder".to_string(),
                    ));
                }
                fused.curves.extend(p.curves);
            } else {
                rest.push(p);
            }
        }
        if fused.curves != *piece_curves {
            return Err(Error::Invalid(
                "connected_on: unknown curve in piece set".to_string(),
            ));
        }
        fused.chi = 2 - fused.curves.len() as i64;
        rest.push(fused);
        Ok(expand_pieces(ring, src, tgt, &rest, &ring.one()))
    }

    /// A cobordism assembled from an explicit partition of the boundary
    /// curves into connected genus-0 pieces, each with a dot count.  Every
    /// curve of the morphism must appear in exactly one piece.  This covers
    /// the cases [`CobMorphism::minimal`] cannot express, such as two
    /// parallel renaming sheets that must not be fused, or a birth that
    /// stays disjoint from a renamed strand.
    pub fn from_pieces(
        ring: Ring,
        src: &Resolution,
        tgt: &Resolution,
        piece_list: &[(BTreeSet<Curve>, u32)],
    ) -> Result<CobMorphism> {
        let mut seen: BTreeSet<Curve> = BTreeSet::new();
        for (curves, _) in piece_list {
            for c in curves {
                if !seen.insert(c.clone()) {
                    return Err(Error::Invalid(format!(
                        "from_pieces: curve {c:?} appears in two pieces"
                    )));
                }
            }
        }
        let all: BTreeSet<Curve> = all_curves(src, tgt).into_iter().collect();
        if seen != all {
            return Err(Error::Invalid(
                "from_pieces: pieces do not cover the boundary curves exactly".to_string(),
            ));
        }
        let pieces: Vec<Piece> = piece_list
            .iter()
            .map(|(curves, dots)| Piece {
                curves: curves.clone(),
                chi: 2 - curves.len() as i64,
                dots: *dots,
            })
            .collect();
        Ok(expand_pieces(ring, src, tgt, &pieces, &ring.one()))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, dots: BTreeSet<Curve>, coeff: Elem) {
        if coeff.is_zero() {
            return;
        }
        let zero = self.ring.zero();
        let entry = self.terms.entry(dots).or_insert(zero);
        *entry = &*entry + &coeff;
        if entry.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    pub fn add(&self, rhs: &CobMorphism) -> CobMorphism {
        assert_eq!(self.source, rhs.source);
        assert_eq!(self.target, rhs.target);
        let mut out = self.clone();
        for (dots, c) in &rhs.terms {
            out.add_term(dots.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, x: &Elem) -> CobMorphism {
        let mut out = CobMorphism::zero(self.ring, self.source.clone(), self.target.clone());
        for (dots, c) in &self.terms {
            out.add_term(dots.clone(), c * x);
        }
        out
    }

    pub fn neg(&self) -> CobMorphism {
        self.scale(&-&self.ring.one())
    }

    pub fn sub(&self, rhs: &CobMorphism) -> CobMorphism {
        self.add(&rhs.neg())
    }

    /// The common degree of all terms, if homogeneous and nonzero.
    pub fn degree(&self) -> Option<i64> {
        let mut degs = self.terms.keys().map(|dots| {
            DottedConfig {
                source: self.source.clone(),
                target: self.target.clone(),
                dots: dots.clone(),
            }
            .degree()
        });
        let d = degs.next()?;
        degs.all(|x| x == d).then_some(d)
    }

    /// Vertical composition `self ∘ f` (first `f`, then `self`).
    pub fn compose(&self, f: &CobMorphism) -> CobMorphism {
        assert_eq!(
            f.target, self.source,
            "compose: middle resolutions do not match"
        );
        let mut out = CobMorphism::zero(self.ring, f.source.clone(), self.target.clone());
        if f.terms.is_empty() || self.terms.is_empty() {
            return out;
        }
        // The gluing pattern (pieces and their curves/chi) is the same for
        // every pair of terms; only the dot counts differ.
        let f_curves = all_curves(&f.source, &f.target);
        let g_curves = all_curves(&self.source, &self.target);
        let nf = f_curves.len();
        let n = nf + g_curves.len();
        let index_of = |list: &[Curve], c: &Curve| -> usize {
            list.iter().position(|x| x == c).expect("curve missing")
        };
        let f_side_at = |p: &str| -> usize {
            f_curves
                .iter()
                .position(|c| matches!(c, Curve::Side(s) if s.contains(p)))
                .expect("boundary point missing in f")
        };
        let g_side_at = |p: &str| -> usize {
            g_curves
                .iter()
                .position(|c| matches!(c, Curve::Side(s) if s.contains(p)))
                .expect("boundary point missing in g")
        };
        let mut uf = Uf::new(n);
        let mut chi_extra = vec![0i64; n];
        let mid = &f.target;
        for c in &mid.circles {
            uf.union(
                index_of(&f_curves, &Curve::Tgt(c.clone())),
                nf + index_of(&g_curves, &Curve::Src(c.clone())),
            );
        }
        for arc in &mid.arcs {
            let a = f_side_at(&arc.ends.0);
            let b = nf + g_side_at(&arc.ends.0);
            uf.union(a, b);
            chi_extra[a] -= 1;
        }
        // Outer curves per class.
        let mut class_curves: BTreeMap<usize, BTreeSet<Curve>> = BTreeMap::new();
        let mut curve_class: BTreeMap<Curve, usize> = BTreeMap::new();
        for c in &f.source.circles {
            let r = uf.find(index_of(&f_curves, &Curve::Src(c.clone())));
            class_curves
                .entry(r)
                .or_default()
                .insert(Curve::Src(c.clone()));
            curve_class.insert(Curve::Src(c.clone()), r);
        }
        for c in &self.target.circles {
            let r = uf.find(nf + index_of(&g_curves, &Curve::Tgt(c.clone())));
            class_curves
                .entry(r)
                .or_default()
                .insert(Curve::Tgt(c.clone()));
            curve_class.insert(Curve::Tgt(c.clone()), r);
        }
        for cyc in side_cycles(&f.source, &self.target) {
            let p = cyc.iter().next().unwrap();
            let r = uf.find(f_side_at(p));
            class_curves
                .entry(r)
                .or_default()
                .insert(Curve::Side(cyc.clone()));
            curve_class.insert(Curve::Side(cyc), r);
        }
        // Base chi per class: one per disk, plus arc-gluing costs.
        let mut base_chi: BTreeMap<usize, i64> = BTreeMap::new();
        for i in 0..n {
            let r = uf.find(i);
            *base_chi.entry(r).or_insert(0) += 1 + chi_extra[i];
        }
        let classes: Vec<usize> = {
            let s: BTreeSet<usize> = (0..n).map(|i| uf.find(i)).collect();
            s.into_iter().collect()
        };
        for (g_dots, gx) in &self.terms {
            for (f_dots, fx) in &f.terms {
                let mut dots: BTreeMap<usize, u32> = BTreeMap::new();
                for c in f_dots {
                    let r = uf.find(index_of(&f_curves, c));
                    *dots.entry(r).or_insert(0) += 1;
                }
                for c in g_dots {
                    let r = uf.find(nf + index_of(&g_curves, c));
                    *dots.entry(r).or_insert(0) += 1;
                }
                let pieces: Vec<Piece> = classes
                    .iter()
                    .map(|r| Piece {
                        curves: class_curves.get(r).cloned().unwrap_or_default(),
                        chi: base_chi.get(r).copied().unwrap_or(0),
                        dots: dots.get(r).copied().unwrap_or(0),
                    })
                    .collect();
                let term = expand_pieces(
                    self.ring,
                    &f.source,
                    &self.target,
                    &pieces,
                    &(gx * fx),
                );
                for (d, c) in term.terms {
                    out.add_term(d, c);
                }
            }
        }
        out
    }
}

/// The connected pieces of the minimal cobordism from `src` to `tgt`:
/// unchanged circles as cylinders, unchanged arcs as sheets, everything else
/// fused into one genus-0 piece.  If `dot_curve` is given, the piece
/// containing it gets one dot; the `bool` reports whether it was found.
fn minimal_pieces(
    src: &Resolution,
    tgt: &Resolution,
    dot_curve: Option<&Curve>,
) -> (Vec<Piece>, bool) {
    let mut pieces: Vec<Piece> = Vec::new();
    let mut rest: BTreeSet<Curve> = BTreeSet::new();
    let tgt_circles: BTreeSet<_> = tgt.circles.iter().cloned().collect();
    let src_circles: BTreeSet<_> = src.circles.iter().cloned().collect();
    for c in &src.circles {
        if tgt_circles.contains(c) {
            pieces.push(Piece {
                curves: [Curve::Src(c.clone()), Curve::Tgt(c.clone())].into(),
                chi: 0,
                dots: 0,
            });
        } else {
            rest.insert(Curve::Src(c.clone()));
        }
    }
    for c in &tgt.circles {
        if !src_circles.contains(c) {
            rest.insert(Curve::Tgt(c.clone()));
        }
    }
    let unchanged_arc = |cyc: &BTreeSet<String>| {
        if cyc.len() != 2 {
            return false;
        }
        let find = |arcs: &[ResArc]| {
            arcs.iter()
                .find(|a| cyc.contains(&a.ends.0) && cyc.contains(&a.ends.1))
                .cloned()
        };
        match (find(&src.arcs), find(&tgt.arcs)) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    };
    for cyc in side_cycles(src, tgt) {
        if unchanged_arc(&cyc) {
            pieces.push(Piece {
                curves: [Curve::Side(cyc)].into(),
                chi: 1,
                dots: 0,
            });
        } else {
            rest.insert(Curve::Side(cyc));
        }
    }
    if !rest.is_empty() {
        let chi = 2 - rest.len() as i64;
        pieces.push(Piece {
            curves: rest,
            chi,
            dots: 0,
        });
    }
    let mut hit = false;
    if let Some(cv) = dot_curve {
        for p in &mut pieces {
            if p.curves.contains(cv) {
                p.dots += 1;
                hit = true;
                break;
            }
        }
    }
    (pieces, hit)
}

/// Union-find over abstract indices.
struct Uf {
    parent: Vec<usize>,
}

impl Uf {
    fn new(n: usize) -> Uf {
        Uf {
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

/// One endpoint of a planar-arc-diagram arc.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum PadPoint {
    /// Boundary point `p` of input disk `i`.
    In(usize, String),
    /// Output boundary point `p`.
    Out(String),
}

/// An arc of a planar arc diagram, carrying the ambient edge ids it covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DArc {
    pub ends: (PadPoint, PadPoint),
    pub edges: BTreeSet<String>,
}

/// A d-input planar arc diagram.
///
/// `universe` is the set of ambient edge ids: edge sets of glued strands are
/// intersected with it, so throwaway input-disk edge names vanish from the
/// result while genuine ambient names survive.
#[derive(Debug, Clone)]
pub struct PlanarArcDiagram {
    pub inputs: Vec<Vec<String>>,
    pub output: Vec<String>,
    pub arcs: Vec<DArc>,
    /// Closed loops of the diagram with their ambient edge sets.
    pub loops: Vec<BTreeSet<String>>,
    pub universe: BTreeSet<String>,
}

impl PlanarArcDiagram {
    /// The identity arc diagram on one input: every input point is wired
    /// straight to the output point of the same name.
    pub fn identity(boundary: &[String], universe: BTreeSet<String>) -> PlanarArcDiagram {
        PlanarArcDiagram {
            inputs: vec![boundary.to_vec()],
            output: boundary.to_vec(),
            arcs: boundary
                .iter()
                .map(|p| DArc {
                    ends: (PadPoint::In(0, p.clone()), PadPoint::Out(p.clone())),
                    edges: BTreeSet::new(),
                })
                .collect(),
            loops: Vec::new(),
            universe,
        }
    }

    fn arc_at(&self, pt: &PadPoint) -> Result<usize> {
        let hits: Vec<usize> = self
            .arcs
            .iter()
            .enumerate()
            .filter(|(_, a)| a.ends.0 == *pt || a.ends.1 == *pt)
            .map(|(i, _)| i)
            .collect();
        if hits.len() != 1 {
            return Err(Error::Invalid(format!(
                "planar arc diagram point {pt:?} lies on {} arcs",
                hits.len()
            )));
        }
        Ok(hits[0])
    }

    /// Glue input resolutions into an ambient resolution.
    pub fn plug_resolutions(&self, inputs: &[&Resolution]) -> Result<Resolution> {
        if inputs.len() != self.inputs.len() {
            return Err(Error::Invalid(format!(
                "arc diagram expects {} inputs, got {}",
                self.inputs.len(),
                inputs.len()
            )));
        }
        // Strand items: input arcs and D arcs, chained at shared points.
        #[derive(Clone)]
        enum Item {
            InArc(usize, usize),
            DArc(usize),
        }
        let mut items: Vec<Item> = Vec::new();
        let mut point_items: BTreeMap<PadPoint, Vec<usize>> = BTreeMap::new();
        for (i, r) in inputs.iter().enumerate() {
            for (ai, a) in r.arcs.iter().enumerate() {
                let idx = items.len();
                items.push(Item::InArc(i, ai));
                for p in [&a.ends.0, &a.ends.1] {
                    point_items
                        .entry(PadPoint::In(i, p.clone()))
                        .or_default()
                        .push(idx);
                }
            }
        }
        for (di, a) in self.arcs.iter().enumerate() {
            let idx = items.len();
            items.push(Item::DArc(di));
            for p in [&a.ends.0, &a.ends.1] {
                point_items.entry(p.clone()).or_default().push(idx);
            }
        }
        let mut uf = Uf::new(items.len());
        for (pt, its) in &point_items {
            match pt {
                PadPoint::In(_, _) => {
                    if its.len() != 2 {
                        return Err(Error::Invalid(format!(
                            "input point {pt:?} lies on {} strands (want 2)",
                            its.len()
                        )));
                    }
                    uf.union(its[0], its[1]);
                }
                PadPoint::Out(p) => {
                    if its.len() != 1 {
                        return Err(Error::Invalid(format!(
                            "output point {p} lies on {} strands (want 1)",
                            its.len()
                        )));
                    }
                }
            }
        }
        // Collect classes.
        let mut class_edges: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
        let mut class_outs: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for (idx, item) in items.iter().enumerate() {
            let r = uf.find(idx);
            let edges = class_edges.entry(r).or_default();
            match item {
                Item::InArc(i, ai) => {
                    for e in &inputs[*i].arcs[*ai].edges {
                        edges.insert(e.clone());
                    }
                }
                Item::DArc(di) => {
                    for e in &self.arcs[*di].edges {
                        edges.insert(e.clone());
                    }
                    for p in [&self.arcs[*di].ends.0, &self.arcs[*di].ends.1] {
                        if let PadPoint::Out(q) = p {
                            class_outs.entry(r).or_default().push(q.clone());
                        }
                    }
                }
            }
        }
        let mut circles: Vec<BTreeSet<String>> = Vec::new();
        let mut arcs: Vec<(usize, ResArc)> = Vec::new();
        let out_pos = |p: &str| self.output.iter().position(|q| q == p);
        for (r, edges) in &class_edges {
            let edges: BTreeSet<String> = edges.intersection(&self.universe).cloned().collect();
            match class_outs.get(r) {
                None => circles.push(edges),
                Some(outs) => {
                    if outs.len() != 2 {
                        return Err(Error::Invalid(format!(
                            "glued strand meets {} output points",
                            outs.len()
                        )));
                    }
                    let mut ps: Vec<usize> = outs
                        .iter()
                        .map(|p| {
                            out_pos(p).ok_or_else(|| {
                                Error::Invalid(format!("unknown output point `{p}`"))
                            })
                        })
                        .collect::<Result<_>>()?;
                    ps.sort_unstable();
                    arcs.push((
                        ps[0],
                        ResArc {
                            ends: (self.output[ps[0]].clone(), self.output[ps[1]].clone()),
                            edges,
                        },
                    ));
                }
            }
        }
        // Input circles survive unchanged; free loops of D become circles.
        for r in inputs {
            for c in &r.circles {
                circles.push(c.intersection(&self.universe).cloned().collect());
            }
        }
        for l in &self.loops {
            circles.push(l.intersection(&self.universe).cloned().collect());
        }
        circles.sort();
        arcs.sort_by_key(|(i, _)| *i);
        let mut v = Vec::new();
        for r in inputs {
            v.extend_from_slice(&r.v);
        }
        Ok(Resolution {
            v,
            circles,
            arcs: arcs.into_iter().map(|(_, a)| a).collect(),
        })
    }

    /// Horizontal composition of morphisms through the arc diagram.
    pub fn plug_morphisms(&self, inputs: &[&CobMorphism]) -> Result<CobMorphism> {
        if inputs.len() != self.inputs.len() {
            return Err(Error::Invalid(format!(
                "arc diagram expects {} inputs, got {}",
                self.inputs.len(),
                inputs.len()
            )));
        }
        let ring = inputs.first().map(|m| m.ring).unwrap_or(Ring::Z);
        let sources: Vec<&Resolution> = inputs.iter().map(|m| &m.source).collect();
        let targets: Vec<&Resolution> = inputs.iter().map(|m| &m.target).collect();
        let source = self.plug_resolutions(&sources)?;
        let target = self.plug_resolutions(&targets)?;
        let mut out = CobMorphism::zero(ring, source.clone(), target.clone());
        for m in inputs {
            if m.terms.is_empty() {
                return Ok(out);
            }
        }
        // Gluing pattern shared by all term combinations.
        let glue = self.gluing_pattern(ring, inputs, &source, &target)?;
        let choices: Vec<Vec<(&BTreeSet<Curve>, &Elem)>> =
            inputs.iter().map(|m| m.terms.iter().collect()).collect();
        let mut idx = vec![0usize; inputs.len()];
        loop {
            let mut coeff = ring.one();
            let mut dots: BTreeMap<usize, u32> = BTreeMap::new();
            for (i, &k) in idx.iter().enumerate() {
                coeff = &coeff * choices[i][k].1;
                for c in choices[i][k].0 {
                    let r = glue.class_of_input_curve[i][c];
                    *dots.entry(r).or_insert(0) += 1;
                }
            }
            let pieces: Vec<Piece> = glue
                .classes
                .iter()
                .map(|(r, curves, chi)| Piece {
                    curves: curves.clone(),
                    chi: *chi,
                    dots: dots.get(r).copied().unwrap_or(0),
                })
                .collect();
            let term = expand_pieces(ring, &source, &target, &pieces, &coeff);
            for (d, c) in term.terms {
                out.add_term(d, c);
            }
            // Advance the multi-index.
            let mut i = 0;
            loop {
                if i == idx.len() {
                    return Ok(out);
                }
                idx[i] += 1;
                if idx[i] < choices[i].len() {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
        }
    }

    /// The curve-level gluing pattern for horizontal composition: which
    /// classes exist, their outer curves and Euler characteristics, and where
    /// every input curve lands.
    fn gluing_pattern(
        &self,
        _ring: Ring,
        inputs: &[&CobMorphism],
        source: &Resolution,
        target: &Resolution,
    ) -> Result<GluePattern> {
        // Units: one disk per input curve, one sheet per D arc, one cylinder
        // per D loop.
        let input_curves: Vec<Vec<Curve>> = inputs
            .iter()
            .map(|m| all_curves(&m.source, &m.target))
            .collect();
        let mut offsets = Vec::new();
        let mut n = 0usize;
        for cs in &input_curves {
            offsets.push(n);
            n += cs.len();
        }
        let sheet0 = n;
        n += self.arcs.len();
        let loop0 = n;
        n += self.loops.len();
        let mut uf = Uf::new(n);
        let mut chi = vec![0i64; n];
        for (i, cs) in input_curves.iter().enumerate() {
            for (k, _) in cs.iter().enumerate() {
                chi[offsets[i] + k] = 1;
            }
        }
        for di in 0..self.arcs.len() {
            chi[sheet0 + di] = 1;
        }
        // Loops contribute chi 0.
        let side_of = |i: usize, point: &str| -> Option<usize> {
            input_curves[i]
                .iter()
                .position(|c| matches!(c, Curve::Side(s) if s.contains(point)))
        };
        for (di, a) in self.arcs.iter().enumerate() {
            for pt in [&a.ends.0, &a.ends.1] {
                if let PadPoint::In(i, p) = pt {
                    let k = side_of(*i, p).ok_or_else(|| {
                        Error::Invalid(format!("input {i} has no strand at point `{p}`"))
                    })?;
                    uf.union(sheet0 + di, offsets[*i] + k);
                    chi[sheet0 + di] -= 1;
                }
            }
        }
        // Locate each ambient curve.
        let restrict = |s: &BTreeSet<String>| -> BTreeSet<String> {
            s.intersection(&self.universe).cloned().collect()
        };
        let mut class_curves: BTreeMap<usize, BTreeSet<Curve>> = BTreeMap::new();
        {
            let mut locate_circle = |is_src: bool, set: &BTreeSet<String>| -> Result<usize> {
                for (i, m) in inputs.iter().enumerate() {
                    let res = if is_src { &m.source } else { &m.target };
                    for c in &res.circles {
                        if restrict(c) == *set {
                            let curve = if is_src {
                                Curve::Src(c.clone())
                            } else {
                                Curve::Tgt(c.clone())
                            };
                            if let Some(k) = input_curves[i].iter().position(|x| *x == curve) {
                                return Ok(uf.find(offsets[i] + k));
                            }
                        }
                    }
                }
                // A chain of input arcs closed up by D wiring: follow any
                // input arc whose surviving edges sit inside the set.
                for (i, m) in inputs.iter().enumerate() {
                    let res = if is_src { &m.source } else { &m.target };
                    for a in &res.arcs {
                        let ra = restrict(&a.edges);
                        if !ra.is_empty() && ra.is_subset(set) {
                            if let Some(k) = side_of(i, &a.ends.0) {
                                return Ok(uf.find(offsets[i] + k));
                            }
                        }
                    }
                }
                // A free loop of D.
                for (li, l) in self.loops.iter().enumerate() {
                    if restrict(l) == *set {
                        return Ok(uf.find(loop0 + li));
                    }
                }
                // A cycle of D arcs only.
                for (di, a) in self.arcs.iter().enumerate() {
                    let ra = restrict(&a.edges);
                    if !ra.is_empty() && ra.is_subset(set) {
                        return Ok(uf.find(sheet0 + di));
                    }
                }
                Err(Error::Invalid(format!(
                    "cannot locate glued circle with edges {set:?}"
                )))
            };
            for c in &source.circles {
                let r = locate_circle(true, c)?;
                class_curves
                    .entry(r)
                    .or_default()
                    .insert(Curve::Src(c.clone()));
            }
            for c in &target.circles {
                let r = locate_circle(false, c)?;
                class_curves
                    .entry(r)
                    .or_default()
                    .insert(Curve::Tgt(c.clone()));
            }
        }
        for cyc in side_cycles(source, target) {
            let p = cyc.iter().next().unwrap();
            let di = self.arc_at(&PadPoint::Out(p.clone()))?;
            let r = uf.find(sheet0 + di);
            class_curves.entry(r).or_default().insert(Curve::Side(cyc));
        }
        // Per-class chi, input-curve class lookup, class list.
        let mut class_chi: BTreeMap<usize, i64> = BTreeMap::new();
        for i in 0..n {
            let r = uf.find(i);
            *class_chi.entry(r).or_insert(0) += chi[i];
        }
        // Loop cylinders: chi 0, already accounted (chi[loop]=0); but a loop
        // class carries two ambient curves (its source and target copies),
        // which locate_circle assigned above.
        let mut class_of_input_curve: Vec<BTreeMap<Curve, usize>> = Vec::new();
        for (i, cs) in input_curves.iter().enumerate() {
            let mut m = BTreeMap::new();
            for (k, c) in cs.iter().enumerate() {
                m.insert(c.clone(), uf.find(offsets[i] + k));
            }
            class_of_input_curve.push(m);
        }
        let roots: BTreeSet<usize> = (0..n).map(|i| uf.find(i)).collect();
        let classes: Vec<(usize, BTreeSet<Curve>, i64)> = roots
            .into_iter()
            .map(|r| {
                (
                    r,
                    class_curves.get(&r).cloned().unwrap_or_default(),
                    class_chi.get(&r).copied().unwrap_or(0),
                )
            })
            .collect();
        Ok(GluePattern {
            classes,
            class_of_input_curve,
        })
    }
}

struct GluePattern {
    /// (class root, outer curves, Euler characteristic) per glued piece.
    classes: Vec<(usize, BTreeSet<Curve>, i64)>,
    /// For each input, where each of its curves landed.
    class_of_input_curve: Vec<BTreeMap<Curve, usize>>,
}
