//! Chain maps induced by movie events.
//!
//! Each movie event between two tangle diagrams induces a map between their
//! Batson–Seed complexes.  Elementary events (birth, death, saddle, dot,
//! isotopy) act cube-vertex by cube-vertex through explicit cobordism
//! pieces; Reidemeister events use the standard local chain homotopy
//! equivalences, built with the moving crossings placed last in the cube so
//! the ambient sprinkled signs restrict trivially.

use std::collections::{BTreeMap, BTreeSet};

use crate::bs::bs_complex;
use crate::ckom::{blocks_insert, Blocks, ChainMap, CurvedComplex, Homotopy};
use crate::cobcat::{
    all_curves, side_containing, CobMorphism, Curve, DArc, PadPoint, PlanarArcDiagram,
};
use crate::coeff::{Elem, Ring};
use crate::diagram::{Occ, Resolution, TangleDiagram};
use crate::error::{Error, Result};
use crate::moves::{MovieEvent, R1Side};

type PieceList = Vec<(BTreeSet<Curve>, u32)>;

/// Pair each source circle with the target circle sharing an edge id and
/// make every side cycle its own disk sheet.  Circles with no partner are
/// returned separately for the caller to place (as caps or fused pieces).
fn identity_pieces(src: &Resolution, tgt: &Resolution) -> (PieceList, Vec<Curve>) {
    identity_pieces_reserving(src, tgt, &[])
}

/// As [`identity_pieces`], but never pairs up circles whose edge set appears
/// in `reserved` (they are left for the caller, e.g. as caps).
fn identity_pieces_reserving(
    src: &Resolution,
    tgt: &Resolution,
    reserved: &[&BTreeSet<String>],
) -> (PieceList, Vec<Curve>) {
    let is_reserved = |c: &BTreeSet<String>| reserved.iter().any(|r| *r == c);
    let mut pieces = PieceList::new();
    let mut leftover = Vec::new();
    let mut used = vec![false; tgt.circles.len()];
    for c in &src.circles {
        // Pair with the free target circle sharing the most edges.
        let hit = (!is_reserved(c))
            .then(|| {
                tgt.circles
                    .iter()
                    .enumerate()
                    .filter(|(j, c2)| !used[*j] && !is_reserved(c2))
                    .map(|(j, c2)| (c.intersection(c2).count(), j, c2))
                    .filter(|(n, _, _)| *n > 0)
                    .max_by_key(|(n, _, _)| *n)
            })
            .flatten();
        match hit {
            Some((_, j, c2)) => {
                used[j] = true;
                pieces.push((
                    BTreeSet::from([Curve::Src(c.clone()), Curve::Tgt(c2.clone())]),
                    0,
                ));
            }
            None => leftover.push(Curve::Src(c.clone())),
        }
    }
    for (j, c2) in tgt.circles.iter().enumerate() {
        if !used[j] {
            leftover.push(Curve::Tgt(c2.clone()));
        }
    }
    for cyc in crate::cobcat::side_cycles(src, tgt) {
        pieces.push((BTreeSet::from([Curve::Side(cyc)]), 0));
    }
    (pieces, leftover)
}

/// The boundary curve carrying `edge`: a source circle, a target circle, or
/// the side cycle of the arc through it.
fn curve_through_edge(src: &Resolution, tgt: &Resolution, edge: &str) -> Result<Curve> {
    if let Some(c) = src.circles.iter().find(|c| c.contains(edge)) {
        return Ok(Curve::Src(c.clone()));
    }
    if let Some(c) = tgt.circles.iter().find(|c| c.contains(edge)) {
        return Ok(Curve::Tgt(c.clone()));
    }
    let arc = src
        .arcs
        .iter()
        .chain(tgt.arcs.iter())
        .find(|a| a.edges.contains(edge))
        .ok_or_else(|| Error::Invalid(format!("edge `{edge}` not in either resolution")))?;
    side_containing(src, tgt, &arc.ends.0)
        .map(Curve::Side)
        .ok_or_else(|| Error::Invalid(format!("no side cycle through edge `{edge}`")))
}

/// Add one dot to the piece containing `curve`.
fn dot_piece(pieces: &mut PieceList, curve: &Curve) -> Result<()> {
    for (cs, dots) in pieces.iter_mut() {
        if cs.contains(curve) {
            *dots += 1;
            return Ok(());
        }
    }
    Err(Error::Invalid(format!(
        "no piece carries the curve {curve:?}"
    )))
}

/// Place `cap` as its own piece and absorb the remaining unmatched curves:
/// a single leftover source/target pair is a fully renamed circle and
/// becomes a cylinder; anything else is an error.
fn place_cap(
    pieces: &mut PieceList,
    leftover: Vec<Curve>,
    cap: &Curve,
    dots: u32,
) -> Result<()> {
    let mut rest: Vec<Curve> = leftover;
    let pos = rest
        .iter()
        .position(|c| c == cap)
        .ok_or_else(|| {
            Error::Invalid(format!(
                "expected unmatched curve {cap:?} among {rest:?}"
            ))
        })?;
    rest.remove(pos);
    pieces.push((BTreeSet::from([cap.clone()]), dots));
    match rest.as_slice() {
        [] => Ok(()),
        [a @ Curve::Src(_), b @ Curve::Tgt(_)] | [b @ Curve::Tgt(_), a @ Curve::Src(_)] => {
            pieces.push((BTreeSet::from([a.clone(), b.clone()]), 0));
            Ok(())
        }
        other => Err(Error::Invalid(format!(
            "unmatched curves cannot be placed: {other:?}"
        ))),
    }
}

/// Pair all leftover curves (no cap): a single source/target pair becomes a
/// renaming cylinder.
fn pair_leftover(pieces: &mut PieceList, leftover: Vec<Curve>) -> Result<()> {
    match leftover.as_slice() {
        [] => Ok(()),
        [a @ Curve::Src(_), b @ Curve::Tgt(_)] | [b @ Curve::Tgt(_), a @ Curve::Src(_)] => {
            pieces.push((BTreeSet::from([a.clone(), b.clone()]), 0));
            Ok(())
        }
        other => Err(Error::Invalid(format!(
            "unmatched curves cannot be paired: {other:?}"
        ))),
    }
}

/// An identity-shaped cobordism between two resolutions that differ only by
/// edge renaming (every circle must find a partner).
pub fn identity_like(ring: Ring, src: &Resolution, tgt: &Resolution) -> Result<CobMorphism> {
    let (mut pieces, leftover) = identity_pieces(src, tgt);
    pair_leftover(&mut pieces, leftover)?;
    CobMorphism::from_pieces(ring, src, tgt, &pieces)
}

/// An identity-shaped cobordism together with one undotted cap on `cap`.
fn capped_identity(
    ring: Ring,
    src: &Resolution,
    tgt: &Resolution,
    cap: &Curve,
    cap_dots: u32,
) -> Result<CobMorphism> {
    let circle = match cap {
        Curve::Src(c) | Curve::Tgt(c) => c.clone(),
        Curve::Side(_) => return Err(Error::Invalid("cap must be a circle".into())),
    };
    let (mut pieces, leftover) = identity_pieces_reserving(src, tgt, &[&circle]);
    place_cap(&mut pieces, leftover, cap, cap_dots)?;
    CobMorphism::from_pieces(ring, src, tgt, &pieces)
}

/// The block of an elementary event between matching cube vertices.
fn elementary_block(
    ring: Ring,
    rs: &Resolution,
    rt: &Resolution,
    ev: &MovieEvent,
) -> Result<CobMorphism> {
    match ev {
        MovieEvent::Isotopy => identity_like(ring, rs, rt),
        MovieEvent::Birth { circle_edge, .. } => {
            let (mut pieces, leftover) = identity_pieces(rs, rt);
            let cap = Curve::Tgt(
                rt.circles
                    .iter()
                    .find(|c| c.contains(circle_edge.as_str()))
                    .ok_or_else(|| Error::Invalid("born circle missing".into()))?
                    .clone(),
            );
            if leftover != vec![cap.clone()] {
                return Err(Error::Invalid(format!(
                    "birth block: unexpected unmatched curves {leftover:?}"
                )));
            }
            pieces.push((BTreeSet::from([cap]), 0));
            CobMorphism::from_pieces(ring, rs, rt, &pieces)
        }
        MovieEvent::Death { circle_edge } => {
            let (mut pieces, leftover) = identity_pieces(rs, rt);
            let cap = Curve::Src(
                rs.circles
                    .iter()
                    .find(|c| c.contains(circle_edge.as_str()))
                    .ok_or_else(|| Error::Invalid("dying circle missing".into()))?
                    .clone(),
            );
            if leftover != vec![cap.clone()] {
                return Err(Error::Invalid(format!(
                    "death block: unexpected unmatched curves {leftover:?}"
                )));
            }
            pieces.push((BTreeSet::from([cap]), 0));
            CobMorphism::from_pieces(ring, rs, rt, &pieces)
        }
        MovieEvent::Dot { edge } => {
            let (mut pieces, leftover) = identity_pieces(rs, rt);
            if !leftover.is_empty() {
                return Err(Error::Invalid("dot block: resolutions differ".into()));
            }
            let curve = curve_through_edge(rs, rt, edge)?;
            dot_piece(&mut pieces, &curve)?;
            CobMorphism::from_pieces(ring, rs, rt, &pieces)
        }
        MovieEvent::Saddle { edges, new_edges } => {
            let mut touched: BTreeSet<&str> = BTreeSet::new();
            touched.insert(edges.0.as_str());
            touched.insert(edges.1.as_str());
            for e in new_edges {
                touched.insert(e.as_str());
            }
            let is_touched =
                |c: &BTreeSet<String>| c.iter().any(|e| touched.contains(e.as_str()));
            let mut pieces = PieceList::new();
            let mut fused: BTreeSet<Curve> = BTreeSet::new();
            let mut used = vec![false; rt.circles.len()];
            for c in &rs.circles {
                if is_touched(c) {
                    fused.insert(Curve::Src(c.clone()));
                    continue;
                }
                let hit = rt.circles.iter().enumerate().find(|(j, c2)| {
                    !used[*j] && !is_touched(c2) && c.intersection(c2).next().is_some()
                });
                let (j, c2) = hit.ok_or_else(|| {
                    Error::Invalid("saddle block: untouched circle has no partner".into())
                })?;
                used[j] = true;
                pieces.push((
                    BTreeSet::from([Curve::Src(c.clone()), Curve::Tgt(c2.clone())]),
                    0,
                ));
            }
            for (j, c2) in rt.circles.iter().enumerate() {
                if used[j] {
                    continue;
                }
                if !is_touched(c2) {
                    return Err(Error::Invalid(
                        "saddle block: untouched target circle has no partner".into(),
                    ));
                }
                fused.insert(Curve::Tgt(c2.clone()));
            }
            if fused.is_empty() {
                return Err(Error::Invalid(
                    "saddle block: no circle touches the event edges".into(),
                ));
            }
            for cyc in crate::cobcat::side_cycles(rs, rt) {
                pieces.push((BTreeSet::from([Curve::Side(cyc)]), 0));
            }
            pieces.push((fused, 0));
            CobMorphism::from_pieces(ring, rs, rt, &pieces)
        }
        other => Err(Error::Invalid(format!(
            "event {other:?} is not elementary"
        ))),
    }
}

/// The chain map induced by an elementary event (birth, death, saddle, dot,
/// isotopy).  The two diagrams must share their crossing list.
pub fn elementary_map(
    before: &TangleDiagram,
    after: &TangleDiagram,
    ev: &MovieEvent,
) -> Result<ChainMap> {
    let cxb = bs_complex(before)?;
    let cxa = bs_complex(after)?;
    let mut blocks = Blocks::new();
    for (i, g) in cxb.gens.iter().enumerate() {
        let j = cxa.gen_by_v(&g.v).ok_or_else(|| {
            Error::Invalid("elementary event changed the crossing set".into())
        })?;
        let m = elementary_block(cxb.ring, &g.res, &cxa.gens[j].res, ev)?;
        if !m.is_zero() {
            blocks_insert(&mut blocks, (i, j), m);
        }
    }
    ChainMap::new(cxb, cxa, blocks)
}

/// Solve `Σ_k x_k · columns[k][c] = rhs[c]` simultaneously over all
/// constraint channels `c`, by flattening every (block key, dotted
/// configuration) pair into one matrix row.  Returns the coefficients, or
/// `None` if the system has no solution over the ring.
pub fn solve_blocks(ring: Ring, columns: &[Vec<Blocks>], rhs: &[Blocks]) -> Option<Vec<Elem>> {
    type Coord = (usize, (usize, usize), BTreeSet<Curve>);
    let mut coords: BTreeSet<Coord> = BTreeSet::new();
    let mut collect = |c: usize, blocks: &Blocks, coords: &mut BTreeSet<Coord>| {
        for (key, m) in blocks {
            for dots in m.terms.keys() {
                coords.insert((c, *key, dots.clone()));
            }
        }
    };
    for (c, r) in rhs.iter().enumerate() {
        collect(c, r, &mut coords);
        for col in columns {
            collect(c, &col[c], &mut coords);
        }
    }
    let coords: Vec<Coord> = coords.into_iter().collect();
    let entry = |blocks: &Blocks, coord: &Coord| -> Elem {
        blocks
            .get(&coord.1)
            .and_then(|m| m.terms.get(&coord.2))
            .cloned()
            .unwrap_or_else(|| ring.zero())
    };
    let a = crate::linalg::Mat::from_fn(ring, coords.len(), columns.len(), |r, k| {
        entry(&columns[k][coords[r].0], &coords[r])
    });
    let b = crate::linalg::Mat::from_fn(ring, coords.len(), 1, |r, _| {
        entry(&rhs[coords[r].0], &coords[r])
    });
    let x = crate::linalg::solve(&a, &b)?;
    Some((0..columns.len()).map(|k| x.get(k, 0).clone()).collect())
}

/// The residual `d_target ∘ m − m ∘ d_source` of a block matrix.
fn chain_residual(target: &CurvedComplex, source: &CurvedComplex, m: &Blocks) -> Blocks {
    crate::ckom::blocks_sub(
        &crate::ckom::blocks_compose(&target.d_total(), m),
        &crate::ckom::blocks_compose(m, &source.d_total()),
    )
}

/// An identity-shaped cobordism with explicit pairing hints: each hint
/// `(edge_s, edge_t)` pairs the source circle through `edge_s` with the
/// target circle through `edge_t`.  Remaining circles are matched by shared
/// edges and must all find partners.
fn identity_like_hinted(
    ring: Ring,
    src: &Resolution,
    tgt: &Resolution,
    hints: &[(&str, &str)],
) -> Result<CobMorphism> {
    let mut pieces = PieceList::new();
    let mut hinted: Vec<(BTreeSet<String>, BTreeSet<String>)> = Vec::new();
    for (es, et) in hints {
        let cs = src.circles.iter().find(|c| c.contains(*es));
        let ct = tgt.circles.iter().find(|c| c.contains(*et));
        if let (Some(cs), Some(ct)) = (cs, ct) {
            if hinted.iter().any(|(a, b)| a == cs || b == ct) {
                continue;
            }
            pieces.push((
                BTreeSet::from([Curve::Src(cs.clone()), Curve::Tgt(ct.clone())]),
                0,
            ));
            hinted.push((cs.clone(), ct.clone()));
        }
    }
    let reserved: Vec<BTreeSet<String>> = hinted
        .iter()
        .flat_map(|(a, b)| [a.clone(), b.clone()])
        .collect();
    let refs: Vec<&BTreeSet<String>> = reserved.iter().collect();
    let (rest, leftover) = identity_pieces_reserving(src, tgt, &refs);
    // Hinted circles come back in the leftover (they were reserved) and the
    // side cycles in `rest`; drop the ones already placed.
    for c in leftover {
        let circ = match &c {
            Curve::Src(c) | Curve::Tgt(c) => c,
            Curve::Side(_) => unreachable!(),
        };
        if !reserved.contains(circ) {
            return Err(Error::Invalid(format!(
                "hinted identity: unmatched curve {c:?}"
            )));
        }
    }
    pieces.extend(rest);
    CobMorphism::from_pieces(ring, src, tgt, &pieces)
}

/// The saddle-with-birth (or death) correction of an R2 move: every circle
/// through a touched edge is fused into one genus-zero piece, while the
/// small circle between the poke crossings is capped by its own undotted
/// disk.  `cap` names the small circle on the appropriate side.
fn fused_with_cap(
    ring: Ring,
    src: &Resolution,
    tgt: &Resolution,
    touched: &BTreeSet<&str>,
    cap: &Curve,
) -> Result<CobMorphism> {
    let cap_circle = match cap {
        Curve::Src(c) | Curve::Tgt(c) => c,
        Curve::Side(_) => return Err(Error::Invalid("cap must be a circle".into())),
    };
    let is_touched = |c: &BTreeSet<String>| c.iter().any(|e| touched.contains(e.as_str()));
    let mut pieces = PieceList::new();
    let mut fused: BTreeSet<Curve> = BTreeSet::new();
    let mut used = vec![false; tgt.circles.len()];
    for c in &src.circles {
        if c == cap_circle && matches!(cap, Curve::Src(_)) {
            continue;
        }
        if is_touched(c) {
            fused.insert(Curve::Src(c.clone()));
            continue;
        }
        let hit = tgt.circles.iter().enumerate().find(|(j, c2)| {
            !used[*j] && !is_touched(c2) && c.intersection(c2).next().is_some()
        });
        let (j, c2) = hit.ok_or_else(|| {
            Error::Invalid("fused cap: untouched circle has no partner".into())
        })?;
        used[j] = true;
        pieces.push((
            BTreeSet::from([Curve::Src(c.clone()), Curve::Tgt(c2.clone())]),
            0,
        ));
    }
    for (j, c2) in tgt.circles.iter().enumerate() {
        if used[j] || (c2 == cap_circle && matches!(cap, Curve::Tgt(_))) {
            continue;
        }
        if !is_touched(c2) {
            return Err(Error::Invalid(
                "fused cap: untouched target circle has no partner".into(),
            ));
        }
        fused.insert(Curve::Tgt(c2.clone()));
    }
    if fused.is_empty() {
        return Err(Error::Invalid("fused cap: nothing to fuse".into()));
    }
    for cyc in crate::cobcat::side_cycles(src, tgt) {
        pieces.push((BTreeSet::from([Curve::Side(cyc)]), 0));
    }
    pieces.push((fused, 0));
    pieces.push((BTreeSet::from([cap.clone()]), 0));
    CobMorphism::from_pieces(ring, src, tgt, &pieces)
}

/// The chain homotopy equivalence of a Reidemeister 2 poke added as the two
/// last crossings: `f: C(before) → C(after)` and `g: C(after) → C(before)`
/// with `g∘f = id` exactly.
pub struct R2Data {
    pub after: TangleDiagram,
    pub f: ChainMap,
    pub g: ChainMap,
}

pub fn r2_add_maps(before: &TangleDiagram, ev: &MovieEvent) -> Result<R2Data> {
    let MovieEvent::R2Add {
        over,
        under,
        new_edges: (f1, f2, f3, f4),
        ..
    } = ev
    else {
        return Err(Error::Invalid("not an r2 add event".into()));
    };
    let after = crate::moves::apply_event(before, ev)?;
    let cxb = bs_complex(before)?;
    let cxa = bs_complex(&after)?;
    let ring = cxb.ring;
    let circle: BTreeSet<String> = BTreeSet::from([f1.clone(), f3.clone()]);
    let mut f_id = Blocks::new();
    let mut g_id = Blocks::new();
    let mut f_cols: Vec<Blocks> = Vec::new();
    let mut g_cols: Vec<Blocks> = Vec::new();
    for (i, gen) in cxb.gens.iter().enumerate() {
        // Of the two middle corners of the new square, exactly one contains
        // the small circle between the poke crossings.
        let mut jc = None;
        let mut jp = None;
        for bits in [[0u8, 1], [1, 0]] {
            let mut v = gen.v.clone();
            v.extend_from_slice(&bits);
            let j = cxa
                .gen_by_v(&v)
                .ok_or_else(|| Error::Integrity("missing cube vertex".into()))?;
            if cxa.gens[j].res.circles.contains(&circle) {
                jc = Some(j);
            } else {
                jp = Some(j);
            }
        }
        let (jc, jp) = match (jc, jp) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::Integrity(
                    "r2: poke circle not found at exactly one middle corner".into(),
                ))
            }
        };
        let rs = &gen.res;
        let rp = &cxa.gens[jp].res;
        let rc = &cxa.gens[jc].res;
        // At the parallel corner the strands keep their identity: the under
        // strand exits through f2 and the over strand through f4.
        let hints = [(under.as_str(), f2.as_str()), (over.as_str(), f4.as_str())];
        let hints_rev = [(f2.as_str(), under.as_str()), (f4.as_str(), over.as_str())];
        blocks_insert(&mut f_id, (i, jp), identity_like_hinted(ring, rs, rp, &hints)?);
        blocks_insert(&mut g_id, (jp, i), identity_like_hinted(ring, rp, rs, &hints_rev)?);
        // Candidate correction term: the saddle with a birth (resp. death)
        // of the small circle.
        let touched: BTreeSet<&str> = [over, under, f1, f2, f3, f4]
            .iter()
            .map(|e| e.as_str())
            .collect();
        let mut col = Blocks::new();
        blocks_insert(
            &mut col,
            (i, jc),
            fused_with_cap(ring, rs, rc, &touched, &Curve::Tgt(circle.clone()))?,
        );
        f_cols.push(col);
        let mut col = Blocks::new();
        blocks_insert(
            &mut col,
            (jc, i),
            fused_with_cap(ring, rc, rs, &touched, &Curve::Src(circle.clone()))?,
        );
        g_cols.push(col);
    }
    // Solve the chain condition for f around the fixed identity part.
    let minus_one = -&ring.one();
    let f_rhs = vec![crate::ckom::blocks_scale(
        &chain_residual(&cxa, &cxb, &f_id),
        &minus_one,
    )];
    let f_cols_res: Vec<Vec<Blocks>> = f_cols
        .iter()
        .map(|c| vec![chain_residual(&cxa, &cxb, c)])
        .collect();
    let xs = solve_blocks(ring, &f_cols_res, &f_rhs)
        .ok_or_else(|| Error::Integrity("r2: no chain map with identity part".into()))?;
    let mut fb = f_id;
    for (x, col) in xs.iter().zip(&f_cols) {
        for (k, m) in col {
            blocks_insert(&mut fb, *k, m.scale(x));
        }
    }
    // Solve for g: chain condition plus g∘f = id, both linear in g.
    let id_blocks = ChainMap::identity(&cxb).blocks;
    let g_rhs = vec![
        crate::ckom::blocks_scale(&chain_residual(&cxb, &cxa, &g_id), &minus_one),
        crate::ckom::blocks_sub(&id_blocks, &crate::ckom::blocks_compose(&g_id, &fb)),
    ];
    let g_cols_res: Vec<Vec<Blocks>> = g_cols
        .iter()
        .map(|c| {
            vec![
                chain_residual(&cxb, &cxa, c),
                crate::ckom::blocks_compose(c, &fb),
            ]
        })
        .collect();
    let ys = solve_blocks(ring, &g_cols_res, &g_rhs)
        .ok_or_else(|| Error::Integrity("r2: no retraction with g∘f = id".into()))?;
    let mut gb = g_id;
    for (y, col) in ys.iter().zip(&g_cols) {
        for (k, m) in col {
            blocks_insert(&mut gb, *k, m.scale(y));
        }
    }
    let f = ChainMap::new(cxb.clone(), cxa.clone(), fb)?;
    let g = ChainMap::new(cxa, cxb, gb)?;
    Ok(R2Data { after, f, g })
}

/// Reorder the crossings of a diagram into the order given by `order` (a
/// permutation of all crossing ids) and return the induced isomorphism of
/// complexes: a diagonal of `±identity` blocks matching cube vertices, with
/// the signs found by propagating the cube-edge sign rule over a spanning
/// tree.
pub fn reorder_crossings(
    d: &TangleDiagram,
    order: &[String],
) -> Result<(TangleDiagram, ChainMap)> {
    let n = d.crossings.len();
    if order.len() != n {
        return Err(Error::Invalid("reorder: wrong number of crossings".into()));
    }
    let perm: Vec<usize> = order
        .iter()
        .map(|id| {
            d.crossings
                .iter()
                .position(|x| x.id == *id)
                .ok_or_else(|| Error::Invalid(format!("unknown crossing `{id}`")))
        })
        .collect::<Result<_>>()?;
    {
        let mut seen = vec![false; n];
        for &p in &perm {
            if seen[p] {
                return Err(Error::Invalid("reorder: repeated crossing".into()));
            }
            seen[p] = true;
        }
    }
    let crossings = perm.iter().map(|&p| d.crossings[p].clone()).collect();
    let after = TangleDiagram::new_attached(
        d.ring,
        crossings,
        d.boundary.clone(),
        Some(d.boundary_edge.clone()),
        d.basepoint_after.clone(),
        d.shading,
        d.components.clone(),
    )?;
    let cxb = bs_complex(d)?;
    let cxa = bs_complex(&after)?;
    let bits = |mask: usize| -> Vec<u8> { (0..n).map(|k| ((mask >> k) & 1) as u8).collect() };
    let permuted = |v: &[u8]| -> Vec<u8> { perm.iter().map(|&p| v[p]).collect() };
    let rule = crate::ckom::SignRule::Paper;
    let src_info = &d.crossing_data().crossings;
    let tgt_info = &after.crossing_data().crossings;
    let mut phi = vec![0u8; 1 << n];
    for mask in 1usize..(1 << n) {
        let k = mask.trailing_zeros() as usize;
        let prev = mask & !(1 << k);
        let sa = crate::ckom::sign_exponent(rule, src_info, &bits(prev), &bits(mask))?;
        let sb = crate::ckom::sign_exponent(
            rule,
            tgt_info,
            &permuted(&bits(prev)),
            &permuted(&bits(mask)),
        )?;
        phi[mask] = phi[prev] ^ (((sa + sb) % 2) as u8);
    }
    let mut blocks = Blocks::new();
    for (i, g) in cxb.gens.iter().enumerate() {
        let j = cxa
            .gen_by_v(&permuted(&g.v))
            .ok_or_else(|| Error::Integrity("missing cube vertex".into()))?;
        let mask: usize = g
            .v
            .iter()
            .enumerate()
            .map(|(k, &b)| (b as usize) << k)
            .sum();
        let sign = if phi[mask] == 0 {
            d.ring.one()
        } else {
            -&d.ring.one()
        };
        blocks_insert(
            &mut blocks,
            (i, j),
            identity_like(d.ring, &g.res, &cxa.gens[j].res)?.scale(&sign),
        );
    }
    let iso = ChainMap::new(cxb, cxa, blocks)?;
    Ok((after, iso))
}

/// Reconstruct the `R1Add` event that produced the kink at the (last)
/// crossing `crossing` of `d`, so that applying it to the kink-free diagram
/// reproduces `d` exactly.
fn kink_event(d: &TangleDiagram, crossing: &str) -> Result<MovieEvent> {
    let ci = d
        .crossings
        .iter()
        .position(|x| x.id == crossing)
        .ok_or_else(|| Error::Invalid(format!("unknown crossing `{crossing}`")))?;
    let s = &d.crossings[ci].slots;
    // Slot patterns laid down by the kink surgery, by the position of the
    // doubled loop edge: (+1,L) → [e,a,a,b]; (−1,L) → [e,b,a,a];
    // (+1,R) → [a,e,b,a]; (−1,R) → [a,a,b,e].
    let candidates: [(usize, i8, R1Side, usize, usize); 4] = [
        (1, 1, R1Side::Left, 0, 3),
        (2, -1, R1Side::Left, 0, 1),
        (3, 1, R1Side::Right, 1, 2),
        (0, -1, R1Side::Right, 3, 2),
    ];
    let before = crate::moves::apply_event(
        d,
        &MovieEvent::R1Remove {
            crossing: crossing.to_string(),
        },
    )?;
    for (k, sign, side, ei, bi) in candidates {
        if s[k] != s[(k + 1) % 4] {
            continue;
        }
        let ev = MovieEvent::R1Add {
            edge: s[ei].clone(),
            sign,
            side,
            new_crossing: crossing.to_string(),
            new_edges: (s[k].clone(), s[bi].clone()),
        };
        if let Ok(redone) = crate::moves::apply_event(&before, &ev) {
            if redone.crossings == d.crossings && redone.components == d.components {
                return Ok(ev);
            }
        }
    }
    Err(Error::Invalid(format!(
        "crossing `{crossing}` is not a kink laid down by an R1 move"
    )))
}

/// Reconstruct the `R2Add` event that produced the bigon at crossings
/// `(c1, c2)` of `d` (in either order).
fn poke_event(d: &TangleDiagram, c1: &str, c2: &str) -> Result<MovieEvent> {
    let before = crate::moves::apply_event(
        d,
        &MovieEvent::R2Remove {
            crossings: (c1.to_string(), c2.to_string()),
        },
    )?;
    for (a, b) in [(c1, c2), (c2, c1)] {
        let ia = d.crossings.iter().position(|x| x.id == a).unwrap();
        let ib = d.crossings.iter().position(|x| x.id == b).unwrap();
        let pa = crossing_ports_of(d, ia);
        let pb = crossing_ports_of(d, ib);
        // Along the under strand: under → e1 → e2; along the over strand:
        // over → e3 → e4.
        let ev = MovieEvent::R2Add {
            over: pa[2].clone(),
            under: pa[0].clone(),
            new_crossings: (a.to_string(), b.to_string()),
            new_edges: (pa[1].clone(), pb[1].clone(), pa[3].clone(), pb[3].clone()),
        };
        if let Ok(redone) = crate::moves::apply_event(&before, &ev) {
            if redone.crossings == d.crossings && redone.components == d.components {
                return Ok(ev);
            }
        }
    }
    Err(Error::Invalid(format!(
        "crossings `{c1}`, `{c2}` do not bound an R2 bigon"
    )))
}

/// `[under-in, under-out, over-in, over-out]` edge names of a crossing.
fn crossing_ports_of(d: &TangleDiagram, ci: usize) -> [String; 4] {
    let x = &d.crossings[ci];
    let positive = d.crossing_data().crossings[ci].positive;
    let (oi, oo) = if positive { (1, 3) } else { (3, 1) };
    [
        x.slots[0].clone(),
        x.slots[2].clone(),
        x.slots[oi].clone(),
        x.slots[oo].clone(),
    ]
}

/// The chain homotopy equivalence of a Reidemeister 1 or 2 removal:
/// `f: C(d) → C(after)` and `g` back, with `f∘g = id` exactly.
pub struct RemoveData {
    pub after: TangleDiagram,
    pub f: ChainMap,
    pub g: ChainMap,
}

/// Maps of an R1 kink removal: conjugate the kink crossing to the last cube
/// position, then run the addition maps backwards.
pub fn r1_remove_maps(d: &TangleDiagram, crossing: &str) -> Result<RemoveData> {
    let mut order: Vec<String> = d
        .crossings
        .iter()
        .filter(|x| x.id != crossing)
        .map(|x| x.id.clone())
        .collect();
    if order.len() + 1 != d.crossings.len() {
        return Err(Error::Invalid(format!("unknown crossing `{crossing}`")));
    }
    order.push(crossing.to_string());
    let (dr, iso) = reorder_crossings(d, &order)?;
    let back_order: Vec<String> = d.crossings.iter().map(|x| x.id.clone()).collect();
    let (_, iso_back) = reorder_crossings(&dr, &back_order)?;
    let ev = kink_event(&dr, crossing)?;
    let after = crate::moves::apply_event(
        d,
        &MovieEvent::R1Remove {
            crossing: crossing.to_string(),
        },
    )?;
    let add = r1_add_maps(&after, &ev)?;
    if add.after.crossings != dr.crossings {
        return Err(Error::Integrity(
            "r1 remove: reconstructed kink does not match".into(),
        ));
    }
    let f = add.g.compose(&iso);
    let g = iso_back.compose(&add.f);
    Ok(RemoveData { after, f, g })
}

/// Maps of an R2 bigon removal: conjugate the two crossings to the last cube
/// positions, then run the addition maps backwards.
pub fn r2_remove_maps(d: &TangleDiagram, c1: &str, c2: &str) -> Result<RemoveData> {
    let after = crate::moves::apply_event(
        d,
        &MovieEvent::R2Remove {
            crossings: (c1.to_string(), c2.to_string()),
        },
    )?;
    let mut last_err = None;
    for (a, b) in [(c1, c2), (c2, c1)] {
        let mut order: Vec<String> = d
            .crossings
            .iter()
            .filter(|x| x.id != a && x.id != b)
            .map(|x| x.id.clone())
            .collect();
        order.push(a.to_string());
        order.push(b.to_string());
        let (dr, iso) = reorder_crossings(d, &order)?;
        let ev = match poke_event(&dr, a, b) {
            Ok(ev) => ev,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let add = r2_add_maps(&after, &ev)?;
        if add.after.crossings != dr.crossings {
            last_err = Some(Error::Integrity(
                "r2 remove: reconstructed poke does not match".into(),
            ));
            continue;
        }
        let back_order: Vec<String> = d.crossings.iter().map(|x| x.id.clone()).collect();
        let (_, iso_back) = reorder_crossings(&dr, &back_order)?;
        let f = add.g.compose(&iso);
        let g = iso_back.compose(&add.f);
        return Ok(RemoveData { after, f, g });
    }
    Err(last_err.unwrap_or_else(|| Error::Invalid("r2 remove: no bigon".into())))
}

/// Reverse the crossing `c` (swap which strand passes over) and return the
/// crossing-change chain map `CC: C(before) → C(after)`: identity cobordisms
/// The diagram with crossing `ci` reversed (same weights and shading).
fn flipped_crossing_diagram(d: &TangleDiagram, ci: usize) -> Result<TangleDiagram> {
    let positive = d.crossing_data().crossings[ci].positive;
    let mut crossings = d.crossings.clone();
    let s = crossings[ci].slots.clone();
    // Rotate the slots so the old over-strand entrance becomes slot 0.
    crossings[ci].slots = if positive {
        [s[1].clone(), s[2].clone(), s[3].clone(), s[0].clone()]
    } else {
        [s[3].clone(), s[0].clone(), s[1].clone(), s[2].clone()]
    };
    TangleDiagram::new_attached(
        d.ring,
        crossings,
        d.boundary.clone(),
        Some(d.boundary_edge.clone()),
        d.basepoint_after.clone(),
        d.shading,
        d.components.clone(),
    )
}

/// `T_v → T'_{v'}` (`v'` flips the bit of `c`) with coefficient 1 when
/// `v_c = 0` and `s(c)·(w_over − w_under)` when `v_c = 1`.
pub fn crossing_change(d: &TangleDiagram, c: &str) -> Result<(TangleDiagram, ChainMap)> {
    let ci = d
        .crossings
        .iter()
        .position(|x| x.id == c)
        .ok_or_else(|| Error::Invalid(format!("unknown crossing `{c}`")))?;
    let info = d.crossing_data().crossings[ci].clone();
    let after = flipped_crossing_diagram(d, ci)?;
    let cxb = bs_complex(d)?;
    let cxa = bs_complex(&after)?;
    let ring = d.ring;
    let lower = &ring.from_i64(info.s as i64) * &(&info.w_over - &info.w_under);
    let mut blocks = Blocks::new();
    for (i, g) in cxb.gens.iter().enumerate() {
        let mut v = g.v.clone();
        v[ci] = 1 - v[ci];
        let j = cxa
            .gen_by_v(&v)
            .ok_or_else(|| Error::Integrity("missing cube vertex".into()))?;
        let coeff = if g.v[ci] == 0 {
            ring.one()
        } else {
            lower.clone()
        };
        if coeff.is_zero() {
            continue;
        }
        blocks_insert(
            &mut blocks,
            (i, j),
            identity_like(ring, &g.res, &cxa.gens[j].res)?.scale(&coeff),
        );
    }
    let f = ChainMap::new(cxb, cxa, blocks)?;
    Ok((after, f))
}

/// The chain homotopy equivalence induced by a Reidemeister 1 kink added as
/// the last crossing: `f: C(before) → C(after)`, `g: C(after) → C(before)`
/// with `g∘f = id` exactly, and a homotopy `h` on `C(after)` with
/// `f∘g − id = d h + h d`.
pub struct R1Data {
    pub after: TangleDiagram,
    pub f: ChainMap,
    pub g: ChainMap,
    pub h: Homotopy,
}

pub fn r1_add_maps(before: &TangleDiagram, ev: &MovieEvent) -> Result<R1Data> {
    let MovieEvent::R1Add {
        edge,
        sign,
        new_edges: (a, _b),
        ..
    } = ev
    else {
        return Err(Error::Invalid("not an r1 add event".into()));
    };
    let after = crate::moves::apply_event(before, ev)?;
    let cxb = bs_complex(before)?;
    let cxa = bs_complex(&after)?;
    let ring = cxb.ring;
    let bit: u8 = if *sign > 0 { 0 } else { 1 };
    let mut fb = Blocks::new();
    let mut gb = Blocks::new();
    let mut hb = Blocks::new();
    for (i, gen) in cxb.gens.iter().enumerate() {
        let mut va = gen.v.clone();
        va.push(bit);
        let mut v0 = gen.v.clone();
        v0.push(0);
        let mut v1 = gen.v.clone();
        v1.push(1);
        let j = cxa
            .gen_by_v(&va)
            .ok_or_else(|| Error::Integrity("missing cube vertex".into()))?;
        let j0 = cxa.gen_by_v(&v0).unwrap();
        let j1 = cxa.gen_by_v(&v1).unwrap();
        let rs = &gen.res;
        let rt = &cxa.gens[j].res;
        // The kink smoothing on the chosen side splits off the circle {a}.
        let cap_circle = rt
            .circles
            .iter()
            .find(|c| c.contains(a.as_str()))
            .ok_or_else(|| Error::Integrity("kink circle missing".into()))?
            .clone();
        let cap_dotted_with_strand = |src: &Resolution,
                                      tgt: &Resolution,
                                      cap: &Curve|
         -> Result<CobMorphism> {
            // Dotted cap minus an undotted cap with a dot on the strand.
            let dotted = capped_identity(ring, src, tgt, cap, 1)?;
            let (mut p, l) = identity_pieces(src, tgt);
            place_cap(&mut p, l, cap, 0)?;
            let strand = curve_through_edge(src, tgt, edge)?;
            dot_piece(&mut p, &strand)?;
            Ok(dotted.sub(&CobMorphism::from_pieces(ring, src, tgt, &p)?))
        };
        // Forward map block (v → v+[bit]).
        let f_block = if *sign > 0 {
            cap_dotted_with_strand(rs, rt, &Curve::Tgt(cap_circle.clone()))?
        } else {
            capped_identity(ring, rs, rt, &Curve::Tgt(cap_circle.clone()), 0)?
        };
        blocks_insert(&mut fb, (i, j), f_block);
        // Backward map block (v+[bit] → v): mirror the pieces.
        let g_block = if *sign > 0 {
            capped_identity(ring, rt, rs, &Curve::Src(cap_circle.clone()), 0)?
        } else {
            cap_dotted_with_strand(rt, rs, &Curve::Src(cap_circle.clone()))?
        };
        blocks_insert(&mut gb, (j, i), g_block);
        // Homotopy block (v+[1] → v+[0]): Gaussian elimination of the cone
        // on the kink edge cancels the free summand through an undotted
        // birth (positive kink) or death (negative kink) of the kink
        // circle, carrying minus the sprinkled sign of the kink edge.
        let s = ring.from_i64(crate::ckom::sprinkle_sign(&after, &v0, &v1)?);
        let (r1, r0) = (&cxa.gens[j1].res, &cxa.gens[j0].res);
        let hcap = if *sign > 0 {
            Curve::Tgt(cap_circle.clone())
        } else {
            Curve::Src(cap_circle.clone())
        };
        let h_block = capped_identity(ring, r1, r0, &hcap, 0)?.scale(&-&s);
        blocks_insert(&mut hb, (j1, j0), h_block);
    }
    let f = ChainMap::new(cxb.clone(), cxa.clone(), fb)?;
    let g = ChainMap::new(cxa.clone(), cxb, gb)?;
    let h = Homotopy::new(cxa.clone(), cxa, hb)?;
    Ok(R1Data { after, f, g, h })
}

// --------------------------------------------------------------------------
// Reidemeister III
// --------------------------------------------------------------------------

/// The three edges of the triangular face bounded by `ids` containing the
/// pivot edge.
fn triangle_edges(
    d: &TangleDiagram,
    ids: &[String; 3],
    pivot: &str,
) -> Result<BTreeSet<String>> {
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
    'faces: for face in d.faces() {
        if face.len() != 3 {
            continue;
        }
        let mut edges = BTreeSet::new();
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
            edges.insert(e.clone());
        }
        if nodes == want && edges.contains(pivot) && edges.len() == 3 {
            return Ok(edges);
        }
    }
    Err(Error::Invalid(
        "the three crossings do not bound a triangle with the pivot edge".into(),
    ))
}

/// The local 6-ended tangle around an R3 triangle, with bookkeeping for
/// regluing it into the ambient diagram.
struct TriangleSplit {
    /// The triangle disk as a standalone tangle; crossings keep their ids
    /// and relative ambient order, triangle edges keep their names, and the
    /// six external stubs get fresh `~q` names on boundary points `~p`.
    local: TangleDiagram,
    /// Boundary point name at each external (crossing id, slot) occurrence.
    cut: BTreeMap<(String, usize), String>,
    /// The three internal (triangle face) edges.
    tri: BTreeSet<String>,
    /// Ambient indices of the triangle crossings, ascending.
    tix: Vec<usize>,
}

fn split_triangle(d: &TangleDiagram, ids: &[String; 3], pivot: &str) -> Result<TriangleSplit> {
    let tri = triangle_edges(d, ids, pivot)?;
    let data = d.crossing_data();
    let mut tix: Vec<usize> = ids
        .iter()
        .map(|i| d.crossing_index(i).unwrap())
        .collect();
    tix.sort_unstable();
    let in_tri = |ci: usize, s: usize| tri.contains(&d.crossings[ci].slots[s]);
    // Jump through a triangle edge to its occurrence at the other crossing.
    let other_occ = |e: &str, ci: usize, s: usize| -> Result<(usize, usize)> {
        let (t, h) = d.edge_dir[e];
        for occ in [t, h] {
            let Occ::Slot(cj, sj) = occ else {
                return Err(Error::Invalid(
                    "triangle edge touches the boundary".into(),
                ));
            };
            if (cj, sj) != (ci, s) {
                return Ok((cj, sj));
            }
        }
        Err(Error::Integrity("degenerate triangle edge".into()))
    };
    // Boundary walk of the triangle cluster: from an external slot, rotate
    // around the crossing and jump through triangle edges until the next
    // external slot.  `dir` selects the walk orientation; exactly one of the
    // two yields the planar boundary order, detected below by validation
    // and checkerboard-sign matching.
    let next_ext = |mut ci: usize, mut s: usize, dir: usize| -> Result<(usize, usize)> {
        for _ in 0..32 {
            s = (s + dir) % 4;
            if !in_tri(ci, s) {
                return Ok((ci, s));
            }
            let e = d.crossings[ci].slots[s].clone();
            let (cj, sj) = other_occ(&e, ci, s)?;
            ci = cj;
            s = sj;
        }
        Err(Error::Integrity("runaway triangle boundary walk".into()))
    };
    let start = {
        let mut found = None;
        'outer: for &ci in &tix {
            for s in 0..4 {
                if !in_tri(ci, s) {
                    found = Some((ci, s));
                    break 'outer;
                }
            }
        }
        found.ok_or_else(|| Error::Invalid("triangle has no external legs".into()))?
    };
    let mut last_err = Error::Invalid("r3 triangle extraction failed".into());
    for dir in [1usize, 3] {
        // Collect the six external occurrences in boundary order.
        let mut seq = vec![start];
        loop {
            let (ci, s) = *seq.last().unwrap();
            let nxt = next_ext(ci, s, dir)?;
            if nxt == start {
                break;
            }
            seq.push(nxt);
            if seq.len() > 6 {
                break;
            }
        }
        if seq.len() != 6 {
            last_err = Error::Invalid("triangle boundary walk does not close up".into());
            continue;
        }
        let mut cut: BTreeMap<(String, usize), String> = BTreeMap::new();
        let mut stub: BTreeMap<(usize, usize), String> = BTreeMap::new();
        let mut boundary = Vec::new();
        let mut attach = Vec::new();
        for (k, &(ci, s)) in seq.iter().enumerate() {
            let q = format!("~q{}", k + 1);
            let p = format!("~p{}", k + 1);
            cut.insert((d.crossings[ci].id.clone(), s), p.clone());
            stub.insert((ci, s), q.clone());
            boundary.push(p);
            attach.push(q);
        }
        let crossings: Vec<crate::diagram::Crossing> = tix
            .iter()
            .map(|&ci| {
                let x = &d.crossings[ci];
                let mut slots = x.slots.clone();
                for (s, e) in slots.iter_mut().enumerate() {
                    if let Some(q) = stub.get(&(ci, s)) {
                        *e = q.clone();
                    }
                }
                crate::diagram::Crossing {
                    id: x.id.clone(),
                    slots,
                }
            })
            .collect();
        // One local strand per triangle edge: external-in stub, triangle
        // edge, external-out stub, in orientation order.
        let mut comps = Vec::new();
        let mut comp_err = None;
        for t in &tri {
            let (Occ::Slot(ca, sa), Occ::Slot(cb, sb)) = d.edge_dir[t] else {
                unreachable!()
            };
            let pos_a = data.crossings[ca].positive;
            let pos_b = data.crossings[cb].positive;
            // `sa` is an out-slot at `ca`; the pass partner is the in-slot.
            let in_slot = if sa % 2 == 0 {
                0
            } else if pos_a {
                1
            } else {
                3
            };
            // `sb` is an in-slot at `cb`; the pass partner is the out-slot.
            let out_slot = if sb % 2 == 0 {
                2
            } else if pos_b {
                3
            } else {
                1
            };
            let (Some(qin), Some(qout)) = (stub.get(&(ca, in_slot)), stub.get(&(cb, out_slot)))
            else {
                comp_err = Some(Error::Invalid(
                    "a triangle strand re-enters the triangle".into(),
                ));
                break;
            };
            comps.push(crate::diagram::Component {
                id: format!("~k.{t}"),
                edges: vec![qin.clone(), t.clone(), qout.clone()],
                weight: d.weight_of_edge(t).clone(),
            });
        }
        if let Some(e) = comp_err {
            last_err = e;
            continue;
        }
        for shading in [d.shading, d.shading.flipped()] {
            let local = match TangleDiagram::new_attached(
                d.ring,
                crossings.clone(),
                boundary.clone(),
                Some(attach.clone()),
                None,
                shading,
                comps.clone(),
            ) {
                Ok(l) => l,
                Err(e) => {
                    last_err = e;
                    continue;
                }
            };
            // Keep the variant whose checkerboard signs match the ambient
            // ones at all three crossings.
            let ldata = local.crossing_data();
            let ok = ldata.crossings.iter().all(|lx| {
                data.crossings
                    .iter()
                    .find(|ax| ax.id == lx.id)
                    .is_some_and(|ax| ax.s == lx.s && ax.positive == lx.positive)
            });
            if ok {
                return Ok(TriangleSplit {
                    local,
                    cut,
                    tri,
                    tix,
                });
            }
            last_err = Error::Invalid(
                "local triangle checkerboard does not match the ambient one".into(),
            );
        }
    }
    Err(last_err)
}

/// All normal-form dotted configurations of the given cobordism degree
/// between two resolutions.
fn config_basis(ring: Ring, src: &Resolution, tgt: &Resolution, deg: i64) -> Vec<CobMorphism> {
    let curves = all_curves(src, tgt);
    let base = curves.len() as i64 - src.arcs.len() as i64;
    let twice_dots = base - deg;
    if twice_dots < 0 || twice_dots % 2 != 0 {
        return Vec::new();
    }
    let dots = (twice_dots / 2) as usize;
    if dots > curves.len() {
        return Vec::new();
    }
    subsets_of_size(&curves, dots)
        .into_iter()
        .map(|dotset| CobMorphism {
            ring,
            source: src.clone(),
            target: tgt.clone(),
            terms: [(dotset, ring.one())].into_iter().collect(),
        })
        .collect()
}

fn subsets_of_size(curves: &[Curve], k: usize) -> Vec<BTreeSet<Curve>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > curves.len() {
        return out;
    }
    loop {
        out.push(idx.iter().map(|&i| curves[i].clone()).collect());
        // Advance the combination.
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] + 1 <= curves.len() - (k - i) {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Solve for a degree-0 chain map between the local triangle complexes,
/// normalized to the identity block at an anchor vertex where the two
/// resolutions agree.  Unknown blocks sit at homological shifts 0 (the
/// graded part) and −2 (the filtered correction).
fn solve_r3_local(cb: &CurvedComplex, ca: &CurvedComplex) -> Result<Blocks> {
    let ring = cb.ring;
    let mut pos: Vec<((usize, usize), CobMorphism)> = Vec::new();
    for (i, gi) in cb.gens.iter().enumerate() {
        for (j, gj) in ca.gens.iter().enumerate() {
            let dh = gj.h - gi.h;
            if dh != 0 && dh != -2 {
                continue;
            }
            let deg = gi.shift - gj.shift;
            for b in config_basis(ring, &gi.res, &gj.res, deg) {
                pos.push(((i, j), b));
            }
        }
    }
    // Chain-condition channel, shared by every anchor attempt.
    let chain_cols: Vec<Blocks> = pos
        .iter()
        .map(|(key, b)| {
            let mut single = Blocks::new();
            blocks_insert(&mut single, *key, b.clone());
            chain_residual(ca, cb, &single)
        })
        .collect();
    // Anchor vertices: the local tangles literally agree there up to edge
    // renaming (same boundary matching, renamed circles), so the map is
    // normalized to the renaming cylinder at one of them.
    let ends = |r: &Resolution| -> BTreeSet<(String, String)> {
        r.arcs.iter().map(|a| a.ends.clone()).collect()
    };
    let anchors: Vec<(usize, CobMorphism)> = (0..cb.gens.len().min(ca.gens.len()))
        .filter(|&i| {
            ends(&cb.gens[i].res) == ends(&ca.gens[i].res)
                && cb.gens[i].res.circles.len() == ca.gens[i].res.circles.len()
        })
        .filter_map(|i| {
            identity_like(ring, &cb.gens[i].res, &ca.gens[i].res)
                .ok()
                .map(|m| (i, m))
        })
        .collect();
    if anchors.is_empty() {
        return Err(Error::Integrity(
            "triangle complexes share no cube vertex to anchor at".into(),
        ));
    }
    for (i_star, id_block) in &anchors {
        let i_star = *i_star;
        let mut rhs1 = Blocks::new();
        blocks_insert(&mut rhs1, (i_star, i_star), id_block.clone());
        let columns: Vec<Vec<Blocks>> = pos
            .iter()
            .zip(&chain_cols)
            .map(|((key, b), chain)| {
                let anchor_chan = if *key == (i_star, i_star) {
                    let mut s = Blocks::new();
                    blocks_insert(&mut s, *key, b.clone());
                    s
                } else {
                    Blocks::new()
                };
                vec![chain.clone(), anchor_chan]
            })
            .collect();
        let rhs = vec![Blocks::new(), rhs1];
        if let Some(x) = solve_blocks(ring, &columns, &rhs) {
            let mut out = Blocks::new();
            for ((key, b), c) in pos.iter().zip(&x) {
                if !c.is_zero() {
                    blocks_insert(&mut out, *key, b.scale(c));
                }
            }
            return Ok(out);
        }
    }
    Err(Error::Integrity(
        "no normalized R3 chain map exists over this ring".into(),
    ))
}

/// The crossingless rest of the diagram at rest-cube vertex `w`, as a
/// one-input planar arc diagram whose hole receives the triangle tangle.
/// `dr` must list the triangle crossings first.
fn rest_pad(dr: &TangleDiagram, split: &TriangleSplit, w: usize) -> Result<PlanarArcDiagram> {
    let universe: BTreeSet<String> = dr.edge_component.keys().cloned().collect();
    let terminal = |occ: &Occ| -> Option<PadPoint> {
        match occ {
            Occ::Bnd(i) => Some(PadPoint::Out(dr.boundary[*i].clone())),
            Occ::Slot(ci, s) if *ci < 3 => split
                .cut
                .get(&(dr.crossings[*ci].id.clone(), *s))
                .map(|p| PadPoint::In(0, p.clone())),
            _ => None,
        }
    };
    let partner = |ci: usize, s: usize| -> usize {
        let bit = (w >> (ci - 3)) & 1;
        if bit == 0 {
            [3, 2, 1, 0][s]
        } else {
            [1, 0, 3, 2][s]
        }
    };
    let far_end = |e: &str, here: (usize, usize)| -> Result<Occ> {
        let (t, h) = dr.edge_dir[e];
        for occ in [t, h] {
            if occ != Occ::Slot(here.0, here.1) {
                return Ok(occ);
            }
        }
        Err(Error::Integrity(format!("edge `{e}` has no far end")))
    };
    // Traverse `(edge, toward-end)` states across the rest smoothings.
    let step = |e: &str, far: Occ| -> Result<(String, Occ)> {
        let Occ::Slot(ci, s) = far else {
            return Err(Error::Integrity("stepping past a terminal".into()));
        };
        let s2 = partner(ci, s);
        let e2 = dr.crossings[ci].slots[s2].clone();
        let f2 = far_end(&e2, (ci, s2))?;
        Ok((e2, f2))
    };
    let free: BTreeSet<&String> = dr.free_circles.iter().collect();
    let mut visited: BTreeSet<String> = BTreeSet::new();
    let mut arcs: Vec<DArc> = Vec::new();
    let mut loops: Vec<BTreeSet<String>> = Vec::new();
    // Open strands, one per terminal pair.
    for (e, (t, h)) in &dr.edge_dir {
        if split.tri.contains(e) || visited.contains(e) {
            continue;
        }
        for start in [t, h] {
            let Some(p0) = terminal(start) else { continue };
            if visited.contains(e) {
                break;
            }
            let mut edges = BTreeSet::new();
            let mut cur_e = e.clone();
            let mut cur_far = if start == t { *h } else { *t };
            loop {
                visited.insert(cur_e.clone());
                edges.insert(cur_e.clone());
                if let Some(p1) = terminal(&cur_far) {
                    arcs.push(DArc {
                        ends: (p0.clone(), p1),
                        edges,
                    });
                    break;
                }
                let (e2, f2) = step(&cur_e, cur_far)?;
                cur_e = e2;
                cur_far = f2;
            }
        }
    }
    // Closed strands among the remaining rest edges.
    for (e, (_, h)) in &dr.edge_dir {
        if split.tri.contains(e) || visited.contains(e) {
            continue;
        }
        let start_state = (e.clone(), *h);
        let (mut ce, mut cf) = start_state.clone();
        let mut cyc = BTreeSet::new();
        loop {
            visited.insert(ce.clone());
            cyc.insert(ce.clone());
            let (e2, f2) = step(&ce, cf)?;
            ce = e2;
            cf = f2;
            if (ce.clone(), cf) == start_state {
                break;
            }
        }
        loops.push(cyc);
    }
    for e in &free {
        loops.push([(*e).clone()].into_iter().collect());
    }
    Ok(PlanarArcDiagram {
        inputs: vec![split.local.boundary.clone()],
        output: dr.boundary.clone(),
        arcs,
        loops,
        universe,
    })
}

/// Reuse a glued morphism against the ambient complex's own resolution
/// values (which carry the full cube coordinates).
fn retarget(m: CobMorphism, src: &Resolution, tgt: &Resolution) -> Result<CobMorphism> {
    if m.source.circles != src.circles
        || m.source.arcs != src.arcs
        || m.target.circles != tgt.circles
        || m.target.arcs != tgt.arcs
    {
        return Err(Error::Integrity(
            "glued triangle block does not match the ambient resolution".into(),
        ));
    }
    Ok(CobMorphism {
        ring: m.ring,
        source: src.clone(),
        target: tgt.clone(),
        terms: m.terms,
    })
}

/// The diagram after an R3 slide together with the induced chain map.
pub struct R3Data {
    pub after: TangleDiagram,
    pub f: ChainMap,
}

/// The chain map induced by sliding a strand across a crossing (R3).
///
/// The map is found on a standalone 6-ended triangle tangle — a degree-0
/// solution of the chain condition for the curved differential, normalized
/// to the identity on a cube vertex where the two local resolutions agree —
/// and then transplanted into the ambient complex by gluing it with the
/// identity on the crossingless rest of each cube vertex.
pub fn r3_maps(d: &TangleDiagram, ev: &MovieEvent) -> Result<R3Data> {
    let MovieEvent::R3 {
        crossings: ids,
        pivot_edge,
    } = ev
    else {
        return Err(Error::Invalid("expected an r3 event".into()));
    };
    let after = crate::moves::apply_event(d, ev)?;
    let split = split_triangle(d, ids, pivot_edge)?;
    let local_after = crate::moves::apply_event(&split.local, ev)?;
    let cb_loc = bs_complex(&split.local)?;
    let ca_loc = bs_complex(&local_after)?;
    let f_loc = solve_r3_local(&cb_loc, &ca_loc)?;
    // Conjugate the ambient complexes so the triangle crossings occupy the
    // low cube coordinates.
    let mut order: Vec<String> = split
        .tix
        .iter()
        .map(|&ci| d.crossings[ci].id.clone())
        .collect();
    for (ci, x) in d.crossings.iter().enumerate() {
        if !split.tix.contains(&ci) {
            order.push(x.id.clone());
        }
    }
    let (dr, iso_b) = reorder_crossings(d, &order)?;
    let (ard, _) = reorder_crossings(&after, &order)?;
    let orig: Vec<String> = after.crossings.iter().map(|x| x.id.clone()).collect();
    let (_, iso_a_back) = reorder_crossings(&ard, &orig)?;
    let cxb = bs_complex(&dr)?;
    let cxa = bs_complex(&ard)?;
    let rest_bits = dr.n_crossings() - 3;
    let mut blocks = Blocks::new();
    for w in 0..(1usize << rest_bits) {
        let pad = rest_pad(&dr, &split, w)?;
        let wv: Vec<u8> = (0..rest_bits).map(|k| ((w >> k) & 1) as u8).collect();
        for ((i, j), m) in &f_loc {
            let glued = pad.plug_morphisms(&[m])?;
            let mut vi = cb_loc.gens[*i].v.clone();
            vi.extend_from_slice(&wv);
            let mut vj = ca_loc.gens[*j].v.clone();
            vj.extend_from_slice(&wv);
            let gi = cxb
                .gen_by_v(&vi)
                .ok_or_else(|| Error::Integrity("missing glued source vertex".into()))?;
            let gj = cxa
                .gen_by_v(&vj)
                .ok_or_else(|| Error::Integrity("missing glued target vertex".into()))?;
            let m2 = retarget(glued, &cxb.gens[gi].res, &cxa.gens[gj].res)?;
            blocks_insert(&mut blocks, (gi, gj), m2);
        }
    }
    let f_r = ChainMap::new(cxb, cxa, blocks)?;
    let f = iso_a_back.compose(&f_r).compose(&iso_b);
    Ok(R3Data { after, f })
}

// --------------------------------------------------------------------------
// Movie maps
// --------------------------------------------------------------------------

fn same_frames(a: &TangleDiagram, b: &TangleDiagram) -> bool {
    a.crossings == b.crossings && a.components == b.components && a.boundary == b.boundary
}

/// The chain map induced by a Reidemeister event relating two frames.
pub fn reidemeister_map(
    before: &TangleDiagram,
    after: &TangleDiagram,
    e: &MovieEvent,
) -> Result<ChainMap> {
    let (built, f) = match e {
        MovieEvent::R1Add { .. } => {
            let r = r1_add_maps(before, e)?;
            (r.after, r.f)
        }
        MovieEvent::R1Remove { crossing } => {
            let r = r1_remove_maps(before, crossing)?;
            (r.after, r.f)
        }
        MovieEvent::R2Add { .. } => {
            let r = r2_add_maps(before, e)?;
            (r.after, r.f)
        }
        MovieEvent::R2Remove { crossings } => {
            let r = r2_remove_maps(before, &crossings.0, &crossings.1)?;
            (r.after, r.f)
        }
        MovieEvent::R3 { .. } => {
            let r = r3_maps(before, e)?;
            (r.after, r.f)
        }
        _ => return Err(Error::Invalid("not a Reidemeister event".into())),
    };
    if !same_frames(&built, after) {
        return Err(Error::Invalid(
            "the frames are not related by this Reidemeister move".into(),
        ));
    }
    Ok(f)
}

/// The chain map induced by any single movie event between two frames.
pub fn event_map(
    before: &TangleDiagram,
    after: &TangleDiagram,
    e: &MovieEvent,
) -> Result<ChainMap> {
    match e {
        MovieEvent::R1Add { .. }
        | MovieEvent::R1Remove { .. }
        | MovieEvent::R2Add { .. }
        | MovieEvent::R2Remove { .. }
        | MovieEvent::R3 { .. } => reidemeister_map(before, after, e),
        MovieEvent::Birth { .. }
        | MovieEvent::Death { .. }
        | MovieEvent::Saddle { .. }
        | MovieEvent::Dot { .. }
        | MovieEvent::Isotopy => elementary_map(before, after, e),
    }
}

/// The composite chain map `BS(initial) → BS(final)` of a movie.
pub fn movie_map(m: &crate::moves::Movie) -> Result<ChainMap> {
    let frames = m.frames()?;
    let mut f = ChainMap::identity(&bs_complex(&frames[0])?);
    for (i, e) in m.events.iter().enumerate() {
        let step = event_map(&frames[i], &frames[i + 1], e).map_err(|err| Error::BadEvent {
            index: i,
            msg: err.to_string(),
        })?;
        f = step.compose(&f);
    }
    Ok(f)
}

/// The part index of the component through `edge`.
fn part_of(d: &TangleDiagram, parts: &BTreeMap<String, usize>, edge: &str) -> Result<usize> {
    let k = crate::moves::comp_id(d, edge)?;
    parts
        .get(&k)
        .copied()
        .ok_or_else(|| Error::Invalid(format!("component `{k}` has no part label")))
}

/// The crossings of `d` where a lower-part strand passes over a higher-part
/// strand, in diagram order.
fn crossings_to_separate(
    d: &TangleDiagram,
    parts: &BTreeMap<String, usize>,
) -> Result<Vec<usize>> {
    let data = d.crossing_data();
    let mut out = Vec::new();
    for (ci, info) in data.crossings.iter().enumerate() {
        let over = if info.positive {
            &info.slots[1]
        } else {
            &info.slots[3]
        };
        let under = &info.slots[0];
        if part_of(d, parts, over)? < part_of(d, parts, under)? {
            out.push(ci);
        }
    }
    Ok(out)
}

/// Change every lower-over-higher cross-part crossing of `d`, without maps.
fn sep_diagram_only(
    d: &TangleDiagram,
    parts: &BTreeMap<String, usize>,
) -> Result<TangleDiagram> {
    let mut cur = d.clone();
    for ci in crossings_to_separate(d, parts)? {
        cur = flipped_crossing_diagram(&cur, ci)?;
    }
    Ok(cur)
}

/// Separate a partitioned diagram: change crossings so higher-part strands
/// always pass over lower-part strands.  Returns the separated diagram and
/// the composite crossing-change map, an isomorphism when every cross-part
/// weight difference is invertible.
pub fn sep_diagram(
    d: &TangleDiagram,
    parts: &BTreeMap<String, usize>,
) -> Result<(TangleDiagram, ChainMap)> {
    let mut cur = d.clone();
    let mut cc: Option<ChainMap> = None;
    for ci in crossings_to_separate(d, parts)? {
        let info = cur.crossing_data().crossings[ci].clone();
        if !(&info.w_over - &info.w_under).is_unit() {
            return Err(Error::Invalid(format!(
                "cross-part weight difference at crossing `{}` is not invertible",
                info.id
            )));
        }
        let (next, m) = crossing_change(&cur, &info.id)?;
        cc = Some(match cc {
            None => m,
            Some(prev) => m.compose(&prev),
        });
        cur = next;
    }
    let cc = match cc {
        Some(c) => c,
        None => ChainMap::identity(&bs_complex(d)?),
    };
    Ok((cur, cc))
}

/// The triangular face bounded by the three crossings, pivot-agnostic.
fn triangle_edges_any(d: &TangleDiagram, ids: &[String; 3]) -> Result<Vec<String>> {
    let mut want = BTreeSet::new();
    for id in ids {
        want.insert(
            d.crossing_index(id)
                .ok_or_else(|| Error::Invalid(format!("unknown crossing `{id}`")))?,
        );
    }
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
        if nodes == want {
            return Ok(edges);
        }
    }
    Err(Error::Invalid(
        "the three crossings do not bound a triangle".into(),
    ))
}

/// A triangle edge usable as an R3 pivot in `d`: its strand passes entirely
/// over or entirely under the other two.
fn valid_pivot(d: &TangleDiagram, e: &str) -> bool {
    match d.edge_dir.get(e) {
        Some((Occ::Slot(_, st), Occ::Slot(_, sh))) => st % 2 == sh % 2,
        _ => false,
    }
}

/// Re-address one movie event for the separated movie playing on `cur`.
/// Candidates are returned in preference order; exactly one of them must
/// reproduce the separated next frame.
fn sep_event_candidates(
    cur: &TangleDiagram,
    parts: &BTreeMap<String, usize>,
    e: &MovieEvent,
) -> Result<Vec<MovieEvent>> {
    match e {
        MovieEvent::R2Add {
            over,
            under,
            new_crossings,
            new_edges,
        } => {
            let po = part_of(cur, parts, over)?;
            let pu = part_of(cur, parts, under)?;
            if po >= pu {
                return Ok(vec![e.clone()]);
            }
            // The higher-part strand must stay on top: swap the roles but
            // keep each strand's fresh edge names; the crossing order along
            // the new under strand depends on orientation, so offer both.
            let (u1, u2, o1, o2) = new_edges.clone();
            let swapped = |c1: String, c2: String| MovieEvent::R2Add {
                over: under.clone(),
                under: over.clone(),
                new_crossings: (c1, c2),
                new_edges: (o1.clone(), o2.clone(), u1.clone(), u2.clone()),
            };
            Ok(vec![
                swapped(new_crossings.0.clone(), new_crossings.1.clone()),
                swapped(new_crossings.1.clone(), new_crossings.0.clone()),
            ])
        }
        MovieEvent::R3 {
            crossings,
            pivot_edge,
        } => {
            if valid_pivot(cur, pivot_edge) {
                return Ok(vec![e.clone()]);
            }
            let tri = triangle_edges_any(cur, crossings)?;
            let mut out = Vec::new();
            for t in tri {
                if valid_pivot(cur, &t) {
                    out.push(MovieEvent::R3 {
                        crossings: crossings.clone(),
                        pivot_edge: t,
                    });
                }
            }
            if out.is_empty() {
                return Err(Error::Invalid(
                    "separated triangle admits no R3 pivot".into(),
                ));
            }
            Ok(out)
        }
        _ => Ok(vec![e.clone()]),
    }
}

/// The vertical separation of a partitioned movie: every frame is rewritten
/// so higher-part strands cross over lower-part strands, with events
/// re-addressed accordingly.  Returns the separated movie and the composite
/// crossing-change isomorphisms at the initial and final frames.
pub fn sep_movie(
    m: &crate::moves::Movie,
) -> Result<(crate::moves::Movie, ChainMap, ChainMap)> {
    let part0 = m
        .partition
        .clone()
        .ok_or_else(|| Error::Invalid("sep_movie needs a partition".into()))?;
    let frames = m.frames()?;
    let (sep0, cc0) = sep_diagram(&frames[0], &part0)?;
    let mut parts = part0;
    let mut cur = sep0.clone();
    let mut events = Vec::new();
    for (i, e) in m.events.iter().enumerate() {
        let wrap = |err: Error| Error::BadEvent {
            index: i,
            msg: err.to_string(),
        };
        let candidates = sep_event_candidates(&cur, &parts, e).map_err(wrap)?;
        crate::moves::step_parts(&frames[i], e, &mut parts, i)?;
        let expect = sep_diagram_only(&frames[i + 1], &parts).map_err(wrap)?;
        let mut hit = None;
        for te in candidates {
            if let Ok(next) = crate::moves::apply_event(&cur, &te) {
                if same_frames(&next, &expect) {
                    hit = Some((te, next));
                    break;
                }
            }
        }
        let (te, next) = hit.ok_or_else(|| Error::BadEvent {
            index: i,
            msg: "separated event does not reproduce the separated frame".into(),
        })?;
        events.push(te);
        cur = next;
    }
    let (_, cc1) = sep_diagram(frames.last().unwrap(), &parts)?;
    let sep = crate::moves::Movie {
        initial: sep0,
        events,
        partition: m.partition.clone(),
    };
    Ok((sep, cc0, cc1))
}

/// Whether a diagram is split along the partition (no cross-part crossings).
fn check_split(d: &TangleDiagram, parts: &BTreeMap<String, usize>) -> Result<()> {
    if crossings_to_separate(d, parts)?.is_empty()
        && crossings_to_separate(d, &flip_parts(parts))?.is_empty()
    {
        Ok(())
    } else {
        Err(Error::Invalid(
            "diagram has cross-part crossings, so the parts are not split".into(),
        ))
    }
}

fn flip_parts(parts: &BTreeMap<String, usize>) -> BTreeMap<String, usize> {
    let top = parts.values().copied().max().unwrap_or(0) + 1;
    parts.iter().map(|(k, &v)| (k.clone(), top - v)).collect()
}

/// The parts touched by one event in the given frame.
fn event_parts(
    d: &TangleDiagram,
    parts: &BTreeMap<String, usize>,
    e: &MovieEvent,
) -> Result<BTreeSet<usize>> {
    let mut out = BTreeSet::new();
    let mut add_edge = |out: &mut BTreeSet<usize>, edge: &str| -> Result<()> {
        out.insert(part_of(d, parts, edge)?);
        Ok(())
    };
    let mut add_crossing = |out: &mut BTreeSet<usize>, id: &str| -> Result<()> {
        let ci = d
            .crossing_index(id)
            .ok_or_else(|| Error::Invalid(format!("unknown crossing `{id}`")))?;
        for e in &d.crossings[ci].slots {
            out.insert(part_of(d, parts, e)?);
        }
        Ok(())
    };
    match e {
        MovieEvent::R1Add { edge, .. } | MovieEvent::Dot { edge } => {
            add_edge(&mut out, edge)?;
        }
        MovieEvent::R1Remove { crossing } => add_crossing(&mut out, crossing)?,
        MovieEvent::R2Add { over, under, .. } => {
            add_edge(&mut out, over)?;
            add_edge(&mut out, under)?;
        }
        MovieEvent::R2Remove { crossings } => {
            add_crossing(&mut out, &crossings.0)?;
            add_crossing(&mut out, &crossings.1)?;
        }
        MovieEvent::R3 { crossings, .. } => {
            for c in crossings {
                add_crossing(&mut out, c)?;
            }
        }
        MovieEvent::Birth { part, .. } => {
            out.insert(part.ok_or_else(|| {
                Error::Invalid("birth in a partitioned movie needs a part label".into())
            })?);
        }
        MovieEvent::Death { circle_edge } => add_edge(&mut out, circle_edge)?,
        MovieEvent::Saddle { edges, .. } => {
            add_edge(&mut out, &edges.0)?;
            add_edge(&mut out, &edges.1)?;
        }
        MovieEvent::Isotopy => {}
    }
    Ok(out)
}

/// The horizontal splitting of a partitioned movie between split frames:
/// events confined to one part are kept, cross-part events (Reidemeister
/// moves between strands of different parts) become plane isotopies.  The
/// result must itself be a valid movie.
pub fn split_movie(m: &crate::moves::Movie) -> Result<crate::moves::Movie> {
    let part0 = m
        .partition
        .clone()
        .ok_or_else(|| Error::Invalid("split_movie needs a partition".into()))?;
    let frames = m.frames()?;
    check_split(&frames[0], &part0)?;
    let mut parts = part0;
    let mut events = Vec::new();
    for (i, e) in m.events.iter().enumerate() {
        let touched = event_parts(&frames[i], &parts, e).map_err(|err| Error::BadEvent {
            index: i,
            msg: err.to_string(),
        })?;
        events.push(if touched.len() > 1 {
            MovieEvent::Isotopy
        } else {
            e.clone()
        });
        crate::moves::step_parts(&frames[i], e, &mut parts, i)?;
    }
    check_split(frames.last().unwrap(), &parts)?;
    let out = crate::moves::Movie {
        initial: frames[0].clone(),
        events,
        partition: m.partition.clone(),
    };
    out.frames().map_err(|err| {
        Error::Invalid(format!("the parts are not separable: {err}"))
    })?;
    Ok(out)
}
