//! Curved complexes over the matrix category of dotted cobordisms: objects,
//! the two differentials `d₊`/`d₋`, curvature, chain maps, homotopies,
//! filtration levels, sign rules, planar gluing, and Gaussian
//! simplification.
//!
//! A curved complex is a finite collection of generators, each a resolution
//! placed in a homological grading `h` with an internal grading shift, and
//! two block matrices of cobordism morphisms: `d₊` raising `h` by one and
//! `d₋` lowering it by one, each homogeneous of internal degree −1 and
//! squaring to zero.  The total differential `d = d₊ + d₋` squares to the
//! diagonal curvature.

use crate::cobcat::{CobMorphism, PlanarArcDiagram};
use crate::coeff::{Elem, Ring};
use crate::diagram::{CrossingInfo, Resolution, TangleDiagram};
use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// One generator of a curved complex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gen {
    /// The cube vertex this generator came from (may be empty for ad hoc
    /// complexes).
    pub v: Vec<u8>,
    pub res: Resolution,
    /// Homological grading (the `−n₋` shift already applied).
    pub h: i64,
    /// Internal grading shift `{m}`.
    pub shift: i64,
}

/// A sparse block matrix of cobordism morphisms keyed by
/// `(source generator, target generator)`.
pub type Blocks = BTreeMap<(usize, usize), CobMorphism>;

/// Add `m` into `blocks[(i,j)]`, dropping the entry if it cancels to zero.
pub fn blocks_insert(blocks: &mut Blocks, key: (usize, usize), m: CobMorphism) {
    if m.is_zero() {
        return;
    }
    match blocks.remove(&key) {
        None => {
            blocks.insert(key, m);
        }
        Some(old) => {
            let sum = old.add(&m);
            if !sum.is_zero() {
                blocks.insert(key, sum);
            }
        }
    }
}

/// Blockwise sum.
pub fn blocks_add(a: &Blocks, b: &Blocks) -> Blocks {
    let mut out = a.clone();
    for (k, m) in b {
        blocks_insert(&mut out, *k, m.clone());
    }
    out
}

/// Blockwise difference `a − b`.
pub fn blocks_sub(a: &Blocks, b: &Blocks) -> Blocks {
    let mut out = a.clone();
    for (k, m) in b {
        blocks_insert(&mut out, *k, m.neg());
    }
    out
}

/// Blockwise scaling.
pub fn blocks_scale(a: &Blocks, x: &Elem) -> Blocks {
    let mut out = Blocks::new();
    for (k, m) in a {
        blocks_insert(&mut out, *k, m.scale(x));
    }
    out
}

/// Block composition: `(a ∘ b)(i→k) = Σ_j a(j→k) ∘ b(i→j)`.
pub fn blocks_compose(a: &Blocks, b: &Blocks) -> Blocks {
    let mut by_from: BTreeMap<usize, Vec<(usize, &CobMorphism)>> = BTreeMap::new();
    for ((j, k), m) in a {
        by_from.entry(*j).or_default().push((*k, m));
    }
    let mut out = Blocks::new();
    for ((i, j), mb) in b {
        if let Some(rows) = by_from.get(j) {
            for (k, ma) in rows {
                blocks_insert(&mut out, (*i, *k), ma.compose(mb));
            }
        }
    }
    out
}

/// A curved complex over `Mat(Cob³_{•/l}(B))`.
#[derive(Debug, Clone)]
pub struct CurvedComplex {
    pub ring: Ring,
    /// Ambient boundary points, in their circular order.
    pub boundary: Vec<String>,
    pub gens: Vec<Gen>,
    pub d_plus: Blocks,
    pub d_minus: Blocks,
}

impl CurvedComplex {
    /// The total differential `d = d₊ + d₋`.
    pub fn d_total(&self) -> Blocks {
        blocks_add(&self.d_plus, &self.d_minus)
    }

    /// The internal degree of a morphism placed between two generators
    /// (`deg(S) + shift_target − shift_source`), if homogeneous.
    pub fn block_degree(&self, key: (usize, usize), m: &CobMorphism) -> Option<i64> {
        let (i, j) = key;
        Some(m.degree()? + self.gens[j].shift - self.gens[i].shift)
    }

    /// Index of the generator with the given cube vertex.
    pub fn gen_by_v(&self, v: &[u8]) -> Option<usize> {
        self.gens.iter().position(|g| g.v == v)
    }

    /// Structural checks: `d₊` raises `h` by one and `d₋` lowers it by one,
    /// both are homogeneous of internal degree −1, and both square to zero.
    pub fn integrity(&self) -> Result<()> {
        for (which, blocks, step) in [("d+", &self.d_plus, 1i64), ("d-", &self.d_minus, -1)] {
            for ((i, j), m) in blocks {
                if self.gens[*j].h - self.gens[*i].h != step {
                    return Err(Error::Integrity(format!(
                        "{which} block {i}->{j} shifts h by {}",
                        self.gens[*j].h - self.gens[*i].h
                    )));
                }
                if !m.is_zero() && self.block_degree((*i, *j), m) != Some(-1) {
                    return Err(Error::Integrity(format!(
                        "{which} block {i}->{j} is not homogeneous of degree -1"
                    )));
                }
            }
            let sq = blocks_compose(blocks, blocks);
            if !sq.is_empty() {
                return Err(Error::Integrity(format!("{which} squared is nonzero")));
            }
        }
        Ok(())
    }

    /// The curvature `λ = d² = d₊d₋ + d₋d₊`, as one endomorphism per
    /// generator.  Errors if `d²` has any off-diagonal entry.
    pub fn curvature(&self) -> Result<Vec<CobMorphism>> {
        let d = self.d_total();
        let sq = blocks_compose(&d, &d);
        let mut out: Vec<CobMorphism> = self
            .gens
            .iter()
            .map(|g| CobMorphism::zero(self.ring, g.res.clone(), g.res.clone()))
            .collect();
        for ((i, j), m) in sq {
            if i != j {
                return Err(Error::Integrity(format!(
                    "off-diagonal curvature entry {i}->{j}"
                )));
            }
            out[i] = out[i].add(&m);
        }
        Ok(out)
    }

    /// Deterministic text dump: generators by homological grading, then the
    /// differential entries in lexicographic vertex order.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let mut order: Vec<usize> = (0..self.gens.len()).collect();
        order.sort_by_key(|&i| (self.gens[i].h, self.gens[i].v.clone(), i));
        for &i in &order {
            let g = &self.gens[i];
            let _ = writeln!(
                s,
                "gen {i} h={} v={:?} circles={} arcs={} shift={}",
                g.h,
                g.v,
                g.res.circles.len(),
                g.res.arcs.len(),
                g.shift
            );
        }
        for (name, blocks) in [("d+", &self.d_plus), ("d-", &self.d_minus)] {
            for ((i, j), m) in blocks {
                let _ = writeln!(s, "{name} {i}->{j}: {} terms", m.terms.len());
            }
        }
        s
    }
}

/// A chain map between curved complexes: blocks with even homological
/// shifts, commuting with the total differentials.
#[derive(Debug, Clone)]
pub struct ChainMap {
    pub source: CurvedComplex,
    pub target: CurvedComplex,
    pub blocks: Blocks,
}

impl ChainMap {
    pub fn new(source: CurvedComplex, target: CurvedComplex, blocks: Blocks) -> Result<ChainMap> {
        for (i, j) in blocks.keys() {
            let shift = target.gens[*j].h - source.gens[*i].h;
            if shift % 2 != 0 {
                return Err(Error::Integrity(format!(
                    "chain map block {i}->{j} has odd homological shift {shift}"
                )));
            }
        }
        Ok(ChainMap {
            source,
            target,
            blocks,
        })
    }

    pub fn identity(cx: &CurvedComplex) -> ChainMap {
        let blocks = (0..cx.gens.len())
            .map(|i| {
                (
                    (i, i),
                    CobMorphism::identity(cx.ring, &cx.gens[i].res),
                )
            })
            .collect();
        ChainMap {
            source: cx.clone(),
            target: cx.clone(),
            blocks,
        }
    }

    pub fn zero(source: CurvedComplex, target: CurvedComplex) -> ChainMap {
        ChainMap {
            source,
            target,
            blocks: Blocks::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn scale(&self, x: &Elem) -> ChainMap {
        ChainMap {
            source: self.source.clone(),
            target: self.target.clone(),
            blocks: blocks_scale(&self.blocks, x),
        }
    }

    pub fn add(&self, rhs: &ChainMap) -> ChainMap {
        ChainMap {
            source: self.source.clone(),
            target: self.target.clone(),
            blocks: blocks_add(&self.blocks, &rhs.blocks),
        }
    }

    pub fn sub(&self, rhs: &ChainMap) -> ChainMap {
        ChainMap {
            source: self.source.clone(),
            target: self.target.clone(),
            blocks: blocks_sub(&self.blocks, &rhs.blocks),
        }
    }

    /// Composition `self ∘ f`.
    pub fn compose(&self, f: &ChainMap) -> ChainMap {
        ChainMap {
            source: f.source.clone(),
            target: self.target.clone(),
            blocks: blocks_compose(&self.blocks, &f.blocks),
        }
    }

    /// The residual `d' ∘ f − f ∘ d`; empty iff `f` is a chain map.
    pub fn residual(&self) -> Blocks {
        blocks_sub(
            &blocks_compose(&self.target.d_total(), &self.blocks),
            &blocks_compose(&self.blocks, &self.source.d_total()),
        )
    }

    /// The common internal degree of all blocks, if homogeneous and nonzero.
    pub fn degree(&self) -> Option<i64> {
        let mut degs = self.blocks.iter().map(|((i, j), m)| {
            Some(m.degree()? + self.target.gens[*j].shift - self.source.gens[*i].shift)
        });
        let d = degs.next()??;
        degs.all(|x| x == Some(d)).then_some(d)
    }
}

/// A report from `verify_chain_map`: the nonzero blocks of `d'f − fd`.
#[derive(Debug)]
pub struct ChainMapReport {
    pub residual_blocks: Vec<(usize, usize, usize)>,
}

impl ChainMapReport {
    pub fn ok(&self) -> bool {
        self.residual_blocks.is_empty()
    }
}

/// Exact check that `f` commutes with the total differentials.
pub fn verify_chain_map(f: &ChainMap) -> ChainMapReport {
    ChainMapReport {
        residual_blocks: f
            .residual()
            .iter()
            .map(|((i, j), m)| (*i, *j, m.terms.len()))
            .collect(),
    }
}

/// A homotopy: blocks with odd homological shifts.
#[derive(Debug, Clone)]
pub struct Homotopy {
    pub source: CurvedComplex,
    pub target: CurvedComplex,
    pub blocks: Blocks,
}

impl Homotopy {
    pub fn new(source: CurvedComplex, target: CurvedComplex, blocks: Blocks) -> Result<Homotopy> {
        for (i, j) in blocks.keys() {
            let shift = target.gens[*j].h - source.gens[*i].h;
            if shift % 2 == 0 {
                return Err(Error::Integrity(format!(
                    "homotopy block {i}->{j} has even homological shift {shift}"
                )));
            }
        }
        Ok(Homotopy {
            source,
            target,
            blocks,
        })
    }

    /// `d'h + hd` as a block matrix from source to target.
    pub fn boundary(&self) -> Blocks {
        blocks_add(
            &blocks_compose(&self.target.d_total(), &self.blocks),
            &blocks_compose(&self.blocks, &self.source.d_total()),
        )
    }

    /// Whether `f − g = d'h + hd` holds exactly.
    pub fn relates(&self, f: &ChainMap, g: &ChainMap) -> bool {
        blocks_sub(&blocks_sub(&f.blocks, &g.blocks), &self.boundary()).is_empty()
    }
}

/// Cube-edge sign rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignRule {
    /// `m(v,v')` counts `j < i` with `v_j = 1` at a positive crossing or
    /// `v_j = 0` at a negative crossing.
    Paper,
    /// `m'(v,v') = Σ_{j<i} v_j`.
    BarNatan,
}

impl SignRule {
    pub fn parse(s: &str) -> Result<SignRule> {
        match s {
            "paper" => Ok(SignRule::Paper),
            "barnatan" => Ok(SignRule::BarNatan),
            _ => Err(Error::Invalid(format!("unknown sign rule `{s}`"))),
        }
    }
}

/// The exponent of the cube-edge sign for an immediate successor pair.
pub fn sign_exponent(
    rule: SignRule,
    crossings: &[CrossingInfo],
    v: &[u8],
    vp: &[u8],
) -> Result<u32> {
    if v.len() != crossings.len() || vp.len() != crossings.len() {
        return Err(Error::BadResolutionLength {
            got: v.len().max(vp.len()),
            want: crossings.len(),
        });
    }
    let mut diff = None;
    for k in 0..v.len() {
        if v[k] != vp[k] {
            if v[k] != 0 || vp[k] != 1 || diff.is_some() {
                return Err(Error::Invalid(
                    "not an immediate successor pair".to_string(),
                ));
            }
            diff = Some(k);
        }
    }
    let i = diff.ok_or_else(|| Error::Invalid("not an immediate successor pair".to_string()))?;
    let mut m = 0u32;
    for j in 0..i {
        let hit = match rule {
            SignRule::Paper => {
                (v[j] == 1 && crossings[j].positive) || (v[j] == 0 && !crossings[j].positive)
            }
            SignRule::BarNatan => v[j] == 1,
        };
        if hit {
            m += 1;
        }
    }
    Ok(m)
}

/// `(−1)^{m(v,v')}` for the default rule.
pub fn sprinkle_sign(diagram: &TangleDiagram, v: &[u8], vp: &[u8]) -> Result<i64> {
    let m = sign_exponent(SignRule::Paper, &diagram.crossing_data().crossings, v, vp)?;
    Ok(if m % 2 == 0 { 1 } else { -1 })
}

/// A vertex-sign assignment `φ` bridging two cube sign rules: on every edge,
/// `(−1)^{m_a} (−1)^{φ(v)} = (−1)^{m_b} (−1)^{φ(v')}`.  Found by propagating
/// along increasing bit order and then verified on every edge; fails if the
/// rules do not differ by a coboundary.
pub fn cube_sign_bridge(
    crossings: &[CrossingInfo],
    rule_a: SignRule,
    rule_b: SignRule,
) -> Result<Vec<u8>> {
    let n = crossings.len();
    let verts = 1usize << n;
    let bits = |mask: usize| -> Vec<u8> { (0..n).map(|k| ((mask >> k) & 1) as u8).collect() };
    let mut phi = vec![0u8; verts];
    for mask in 0..verts {
        if mask == 0 {
            continue;
        }
        let k = mask.trailing_zeros() as usize;
        let prev = mask & !(1 << k);
        let v = bits(prev);
        let vp = bits(mask);
        let ma = sign_exponent(rule_a, crossings, &v, &vp)?;
        let mb = sign_exponent(rule_b, crossings, &v, &vp)?;
        phi[mask] = phi[prev] ^ (((ma + mb) % 2) as u8);
    }
    // Verify every edge.
    for mask in 0..verts {
        for k in 0..n {
            if mask & (1 << k) != 0 {
                continue;
            }
            let up = mask | (1 << k);
            let v = bits(mask);
            let vp = bits(up);
            let ma = sign_exponent(rule_a, crossings, &v, &vp)?;
            let mb = sign_exponent(rule_b, crossings, &v, &vp)?;
            if (ma + mb) % 2 != ((phi[mask] ^ phi[up]) as u32) {
                return Err(Error::Integrity(
                    "sign rules do not differ by a coboundary".to_string(),
                ));
            }
        }
    }
    Ok(phi)
}

/// The diagonal isomorphism with entries `(−1)^{φ(v)}·id`, matching
/// generators of the two complexes by their cube vertices.
pub fn diagonal_sign_iso(
    source: &CurvedComplex,
    target: &CurvedComplex,
    phi: &[u8],
) -> Result<ChainMap> {
    let mut blocks = Blocks::new();
    for (i, g) in source.gens.iter().enumerate() {
        let j = target
            .gen_by_v(&g.v)
            .ok_or_else(|| Error::Integrity(format!("no matching generator for v={:?}", g.v)))?;
        let mask: usize = g
            .v
            .iter()
            .enumerate()
            .map(|(k, &b)| (b as usize) << k)
            .sum();
        let sign = if phi[mask] == 0 {
            source.ring.one()
        } else {
            -&source.ring.one()
        };
        blocks_insert(
            &mut blocks,
            (i, j),
            CobMorphism::identity(source.ring, &g.res).scale(&sign),
        );
    }
    ChainMap::new(source.clone(), target.clone(), blocks)
}

/// The filtration level of a (not necessarily homogeneous) map or homotopy:
/// the largest `n + (homological shift)` over all nonzero blocks and terms,
/// where `n` is the internal degree of the term.  `None` for the zero map.
pub fn filtration_level_blocks(
    source: &CurvedComplex,
    target: &CurvedComplex,
    blocks: &Blocks,
) -> Option<i64> {
    let mut level: Option<i64> = None;
    for ((i, j), m) in blocks {
        let shift = target.gens[*j].h - source.gens[*i].h;
        let shift_deg = target.gens[*j].shift - source.gens[*i].shift;
        for dots in m.terms.keys() {
            let cfg = crate::cobcat::DottedConfig {
                source: m.source.clone(),
                target: m.target.clone(),
                dots: dots.clone(),
            };
            let n = cfg.degree() + shift_deg;
            let l = n + shift;
            level = Some(level.map_or(l, |x| x.max(l)));
        }
    }
    level
}

/// Filtration level of a chain map.
pub fn filtration_level(f: &ChainMap) -> Option<i64> {
    filtration_level_blocks(&f.source, &f.target, &f.blocks)
}

/// Strip a curved complex down to `(Ω, d₊)`.
pub fn plus_part(cx: &CurvedComplex) -> CurvedComplex {
    CurvedComplex {
        ring: cx.ring,
        boundary: cx.boundary.clone(),
        gens: cx.gens.clone(),
        d_plus: cx.d_plus.clone(),
        d_minus: Blocks::new(),
    }
}

/// The associated graded map `f^{(p)}`: the homological-grading-preserving
/// part of `f`, as a chain map for `d₊` alone.  Requires `f` homogeneous of
/// degree `p` and `p`-filtered, or `d₋ = 0` on both sides.
pub fn associated_graded(f: &ChainMap, p: i64) -> Result<ChainMap> {
    let dminus_zero = f.source.d_minus.is_empty() && f.target.d_minus.is_empty();
    if !dminus_zero {
        if f.degree() != Some(p) {
            return Err(Error::Invalid(format!(
                "associated_graded: map is not homogeneous of degree {p}"
            )));
        }
        match filtration_level(f) {
            Some(l) if l <= p => {}
            None => {}
            Some(l) => {
                return Err(Error::Invalid(format!(
                    "associated_graded: map is {l}-filtered, not {p}-filtered"
                )))
            }
        }
    }
    let blocks: Blocks = f
        .blocks
        .iter()
        .filter(|((i, j), _)| f.target.gens[*j].h == f.source.gens[*i].h)
        .map(|(k, m)| (*k, m.clone()))
        .collect();
    ChainMap::new(plus_part(&f.source), plus_part(&f.target), blocks)
}

/// Planar gluing of curved complexes through an arc diagram.
///
/// Generators are tuples of input generators (last slot fastest); gradings
/// and shifts add; each differential acts in one slot with the tensor sign
/// `(−1)^{Σ_{j<i} r_j}`.
pub fn glue(d: &PlanarArcDiagram, inputs: &[&CurvedComplex]) -> Result<CurvedComplex> {
    if inputs.len() != d.inputs.len() {
        return Err(Error::Invalid(format!(
            "arc diagram expects {} inputs, got {}",
            d.inputs.len(),
            inputs.len()
        )));
    }
    let ring = inputs.first().map(|c| c.ring).unwrap_or(Ring::Z);
    let tuples = index_tuples(&inputs.iter().map(|c| c.gens.len()).collect::<Vec<_>>());
    let mut index: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut gens = Vec::new();
    for t in &tuples {
        let rs: Vec<&Resolution> = t
            .iter()
            .enumerate()
            .map(|(i, &g)| &inputs[i].gens[g].res)
            .collect();
        let res = d.plug_resolutions(&rs)?;
        let mut v = Vec::new();
        let mut h = 0;
        let mut shift = 0;
        for (i, &g) in t.iter().enumerate() {
            v.extend_from_slice(&inputs[i].gens[g].v);
            h += inputs[i].gens[g].h;
            shift += inputs[i].gens[g].shift;
        }
        index.insert(t.clone(), gens.len());
        gens.push(Gen { v, res, h, shift });
    }
    let mut d_plus = Blocks::new();
    let mut d_minus = Blocks::new();
    for t in &tuples {
        let from = index[t];
        for (i, _) in inputs.iter().enumerate() {
            let sign_exp: i64 = (0..i).map(|j| inputs[j].gens[t[j]].h).sum();
            let sign = if sign_exp.rem_euclid(2) == 0 {
                ring.one()
            } else {
                -&ring.one()
            };
            for (which, out) in [
                (&inputs[i].d_plus, &mut d_plus),
                (&inputs[i].d_minus, &mut d_minus),
            ] {
                for ((gi, gj), m) in which {
                    if *gi != t[i] {
                        continue;
                    }
                    let mut t2 = t.clone();
                    t2[i] = *gj;
                    let to = index[&t2];
                    let slot_maps: Vec<CobMorphism> = t
                        .iter()
                        .enumerate()
                        .map(|(k, &g)| {
                            if k == i {
                                m.clone()
                            } else {
                                CobMorphism::identity(ring, &inputs[k].gens[g].res)
                            }
                        })
                        .collect();
                    let refs: Vec<&CobMorphism> = slot_maps.iter().collect();
                    let glued = d.plug_morphisms(&refs)?;
                    blocks_insert(out, (from, to), glued.scale(&sign));
                }
            }
        }
    }
    Ok(CurvedComplex {
        ring,
        boundary: d.output.clone(),
        gens,
        d_plus,
        d_minus,
    })
}

/// Planar gluing of chain maps (no extra signs: all blocks have even
/// homological shift).
pub fn glue_maps(d: &PlanarArcDiagram, maps: &[&ChainMap]) -> Result<ChainMap> {
    let sources: Vec<&CurvedComplex> = maps.iter().map(|f| &f.source).collect();
    let targets: Vec<&CurvedComplex> = maps.iter().map(|f| &f.target).collect();
    let source = glue(d, &sources)?;
    let target = glue(d, &targets)?;
    let src_index = tuple_index(&sources);
    let tgt_index = tuple_index(&targets);
    let mut blocks = Blocks::new();
    let block_lists: Vec<Vec<(&(usize, usize), &CobMorphism)>> =
        maps.iter().map(|f| f.blocks.iter().collect()).collect();
    if block_lists.iter().any(|l| l.is_empty()) {
        return ChainMap::new(source, target, blocks);
    }
    let mut idx = vec![0usize; maps.len()];
    loop {
        let mut from = Vec::new();
        let mut to = Vec::new();
        let mut slot_maps = Vec::new();
        for (i, &k) in idx.iter().enumerate() {
            let ((s, t), m) = block_lists[i][k];
            from.push(*s);
            to.push(*t);
            slot_maps.push(m.clone());
        }
        let refs: Vec<&CobMorphism> = slot_maps.iter().collect();
        let glued = d.plug_morphisms(&refs)?;
        blocks_insert(&mut blocks, (src_index[&from], tgt_index[&to]), glued);
        let mut i = 0;
        loop {
            if i == idx.len() {
                return ChainMap::new(source, target, blocks);
            }
            idx[i] += 1;
            if idx[i] < block_lists[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Extend a homotopy in one slot by identities in the others, with the
/// tensor sign `(−1)^{Σ_{j<slot} r_j}` per glued generator.
pub fn glue_homotopy(
    d: &PlanarArcDiagram,
    complexes: &[&CurvedComplex],
    slot: usize,
    h: &Homotopy,
) -> Result<Homotopy> {
    let mut sources: Vec<&CurvedComplex> = complexes.to_vec();
    sources[slot] = &h.source;
    let mut targets: Vec<&CurvedComplex> = complexes.to_vec();
    targets[slot] = &h.target;
    let source = glue(d, &sources)?;
    let target = glue(d, &targets)?;
    let src_index = tuple_index(&sources);
    let tgt_index = tuple_index(&targets);
    let ring = source.ring;
    let mut blocks = Blocks::new();
    let tuples = index_tuples(&sources.iter().map(|c| c.gens.len()).collect::<Vec<_>>());
    for t in &tuples {
        let sign_exp: i64 = (0..slot).map(|j| sources[j].gens[t[j]].h).sum();
        let sign = if sign_exp.rem_euclid(2) == 0 {
            ring.one()
        } else {
            -&ring.one()
        };
        for ((gi, gj), m) in &h.blocks {
            if *gi != t[slot] {
                continue;
            }
            let mut t2 = t.clone();
            t2[slot] = *gj;
            let slot_maps: Vec<CobMorphism> = t
                .iter()
                .enumerate()
                .map(|(k, &g)| {
                    if k == slot {
                        m.clone()
                    } else {
                        CobMorphism::identity(ring, &sources[k].gens[g].res)
                    }
                })
                .collect();
            let refs: Vec<&CobMorphism> = slot_maps.iter().collect();
            let glued = d.plug_morphisms(&refs)?;
            blocks_insert(
                &mut blocks,
                (src_index[t], tgt_index[&t2]),
                glued.scale(&sign),
            );
        }
    }
    Homotopy::new(source, target, blocks)
}

fn index_tuples(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &s in sizes {
        let mut next = Vec::new();
        for t in &out {
            for k in 0..s {
                let mut t2 = t.clone();
                t2.push(k);
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

fn tuple_index(inputs: &[&CurvedComplex]) -> BTreeMap<Vec<usize>, usize> {
    index_tuples(&inputs.iter().map(|c| c.gens.len()).collect::<Vec<_>>())
        .into_iter()
        .enumerate()
        .map(|(i, t)| (t, i))
        .collect()
}

/// If `m` is a unit multiple of the identity cobordism on `res`, return the
/// unit.
fn unit_identity_coefficient(ring: Ring, res: &Resolution, m: &CobMorphism) -> Option<Elem> {
    if m.source != *res || m.target != *res {
        return None;
    }
    let id = CobMorphism::identity(ring, res);
    let (dots0, _) = id.terms.iter().next()?;
    let u = m.terms.get(dots0)?.clone();
    if !u.is_unit() {
        return None;
    }
    if *m == id.scale(&u) {
        Some(u)
    } else {
        None
    }
}

/// Gaussian simplification of a curvature-free complex: repeatedly cancel
/// differential entries that are unit multiples of identity cobordisms.
/// Returns the smaller complex with the homotopy equivalence
/// `(project: big → small, include: small → big)`.
pub fn gaussian_simplify(cx: &CurvedComplex) -> Result<(CurvedComplex, ChainMap, ChainMap)> {
    for lam in cx.curvature()? {
        if !lam.is_zero() {
            return Err(Error::CurvedNotSupported(
                "gaussian_simplify requires vanishing curvature".to_string(),
            ));
        }
    }
    let mut current = cx.clone();
    let mut project = ChainMap::identity(cx); // big → current
    let mut include = ChainMap::identity(cx); // current → big
    loop {
        let d = current.d_total();
        let hit = d.iter().find_map(|((i, j), m)| {
            if current.gens[*i].res == current.gens[*j].res {
                unit_identity_coefficient(current.ring, &current.gens[*i].res, m)
                    .map(|u| (*i, *j, u))
            } else {
                None
            }
        });
        let Some((a, b, u)) = hit else {
            project.target = current.clone();
            include.source = current.clone();
            return Ok((current, project, include));
        };
        // Cancel generators a (source) and b (target) of the unit entry.
        let uinv = u.inv().expect("unit");
        let ring = current.ring;
        // Old-to-new index map.
        let keep: Vec<usize> = (0..current.gens.len())
            .filter(|&k| k != a && k != b)
            .collect();
        let renum: BTreeMap<usize, usize> =
            keep.iter().enumerate().map(|(n, &o)| (o, n)).collect();
        let split = |blocks: &Blocks, step: i64| -> Blocks {
            // d'(x→y) = d(x→y) − d(a→y) ∘ u⁻¹·id ∘ d(x→b), restricted to the
            // kept generators and to the given homological step.
            let mut out = Blocks::new();
            for ((i, j), m) in blocks {
                if renum.contains_key(i)
                    && renum.contains_key(j)
                    && current.gens[*j].h - current.gens[*i].h == step
                {
                    blocks_insert(&mut out, (renum[i], renum[j]), m.clone());
                }
            }
            out
        };
        let d_all = &d;
        let mut correction = Blocks::new();
        for ((i, jb), mb) in d_all {
            if *jb != b || !renum.contains_key(i) {
                continue;
            }
            for ((ia, j), ma) in d_all {
                if *ia != a || !renum.contains_key(j) {
                    continue;
                }
                let term = ma.compose(mb).scale(&uinv).neg();
                blocks_insert(&mut correction, (renum[i], renum[j]), term);
            }
        }
        let mut new_dp = split(&current.d_plus, 1);
        let mut new_dm = split(&current.d_minus, -1);
        for ((i, j), m) in correction {
            let step =
                current.gens[keep[j]].h - current.gens[keep[i]].h;
            match step {
                1 => blocks_insert(&mut new_dp, (i, j), m),
                -1 => blocks_insert(&mut new_dm, (i, j), m),
                _ => {
                    if !m.is_zero() {
                        return Err(Error::Integrity(format!(
                            "gaussian elimination produced a differential of step {step}"
                        )));
                    }
                }
            }
        }
        let new_cx = CurvedComplex {
            ring,
            boundary: current.boundary.clone(),
            gens: keep.iter().map(|&o| current.gens[o].clone()).collect(),
            d_plus: new_dp,
            d_minus: new_dm,
        };
        // Step maps between `current` and `new_cx`.
        // π: current → new: identity on kept generators, and on b the
        // correction −d(a→y) ∘ u⁻¹ routed to kept y.
        let mut pi = Blocks::new();
        for (&o, &nn) in &renum {
            blocks_insert(
                &mut pi,
                (o, nn),
                CobMorphism::identity(ring, &current.gens[o].res),
            );
        }
        for ((ia, j), ma) in d_all {
            if *ia != a || !renum.contains_key(j) {
                continue;
            }
            blocks_insert(&mut pi, (b, renum[j]), ma.scale(&uinv).neg());
        }
        // ι: new → current: identity on kept generators, plus on x the
        // correction −u⁻¹ d(x→b) routed into a.
        let mut inc = Blocks::new();
        for (&o, &nn) in &renum {
            blocks_insert(
                &mut inc,
                (nn, o),
                CobMorphism::identity(ring, &current.gens[o].res),
            );
        }
        for ((i, jb), mb) in d_all {
            if *jb != b || !renum.contains_key(i) {
                continue;
            }
            blocks_insert(&mut inc, (renum[i], a), mb.scale(&uinv).neg());
        }
        let step_pi = ChainMap::new(current.clone(), new_cx.clone(), pi)?;
        let step_inc = ChainMap::new(new_cx.clone(), current.clone(), inc)?;
        project = step_pi.compose(&project);
        include = include.compose(&step_inc);
        current = new_cx;
    }
}
