//! The Khovanov TQFT functor and everything downstream of it: module-carrier
//! complexes, graded homology (with torsion over the integers), induced maps
//! on homology in deterministic bases, the homotopy-existence solver on both
//! carriers, spectral-sequence pages for the quantum filtration, and
//! Khovanov–Jacobsson numbers of closed movies.
//!
//! The TQFT sends a circle to the free rank-2 module `V = R[X]/(X²)` with
//! `deg(1) = 1`, `deg(X) = −1`.  A normal-form cobordism config caps every
//! circle of the source and target with a disk carrying at most one dot, so
//! its matrix has exactly one entry: the source label is forced (`X` on an
//! undotted cap, `1` on a dotted cap — the counit `ε` with `ε(1)=0`,
//! `ε(X)=1`), and the target label is the dot content of the target cap (the
//! unit `1 ↦ 1`, dotted `1 ↦ X`).  Merges, splits, dotted cylinders, and all
//! other maps arise as sums of such configs and reproduce the Frobenius
//! structure: `m(1⊗X) = X`, `Δ(1) = 1⊗X + X⊗1`, dotted cylinder `1 ↦ X,
//! X ↦ 0`.

use crate::ckom::{associated_graded, verify_chain_map, ChainMap, CurvedComplex, Gen, Homotopy};
use crate::cobcat::{all_curves, Curve};
use crate::coeff::{Elem, Ring};
use crate::error::{Error, Result};
use crate::linalg::{kernel, rank, HomologyBasis, Mat};
use num_bigint::BigInt;
use std::collections::{BTreeMap, BTreeSet};

/// A module-carrier generator: a cube generator together with a labeling of
/// its circles by `1` or `X` (bit set = `X`), and the derived bigrading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModGen {
    /// Index of the underlying cube generator.
    pub cube: usize,
    /// Bit `c` set means circle `c` (in sorted order) carries the label `X`.
    pub labels: usize,
    /// Homological grading.
    pub i: i64,
    /// Quantum grading.
    pub j: i64,
}

impl ModGen {
    /// The internal grading `l = j − i`.
    pub fn l(&self) -> i64 {
        self.j - self.i
    }
}

/// Sparse matrix over the ring, keyed `(from, to)` by global generator index.
pub type SparseMat = BTreeMap<(usize, usize), Elem>;

/// Add an entry into a sparse matrix, dropping it if the sum is zero.
pub fn mat_insert(m: &mut SparseMat, key: (usize, usize), x: &Elem) {
    if x.is_zero() {
        return;
    }
    match m.get(&key) {
        Some(old) => {
            let s = old + x;
            if s.is_zero() {
                m.remove(&key);
            } else {
                m.insert(key, s);
            }
        }
        None => {
            m.insert(key, x.clone());
        }
    }
}

/// Entrywise sum of sparse matrices.
pub fn mat_add(a: &SparseMat, b: &SparseMat) -> SparseMat {
    let mut out = a.clone();
    for (k, x) in b {
        mat_insert(&mut out, *k, x);
    }
    out
}

/// Scale a sparse matrix.
pub fn mat_scale(a: &SparseMat, x: &Elem) -> SparseMat {
    let mut out = SparseMat::new();
    for (k, y) in a {
        mat_insert(&mut out, *k, &(y * x));
    }
    out
}

/// Composite `after ∘ before` of sparse matrices keyed `(from, to)`.
pub fn mat_compose(after: &SparseMat, before: &SparseMat) -> SparseMat {
    // Index `after` by its source for the join.
    let mut by_from: BTreeMap<usize, Vec<(usize, &Elem)>> = BTreeMap::new();
    for ((f, t), x) in after {
        by_from.entry(*f).or_default().push((*t, x));
    }
    let mut out = SparseMat::new();
    for ((i, mid), x) in before {
        if let Some(conts) = by_from.get(mid) {
            for (k, y) in conts {
                mat_insert(&mut out, (*i, *k), &(x * *y));
            }
        }
    }
    out
}

/// A chain complex of free modules obtained by applying the TQFT to a formal
/// complex of a closed diagram.
#[derive(Debug, Clone)]
pub struct ModuleComplex {
    pub ring: Ring,
    /// The formal cube generators, kept for grading and block evaluation.
    pub cube: Vec<Gen>,
    /// Global index of the first module generator of each cube generator.
    pub offsets: Vec<usize>,
    pub gens: Vec<ModGen>,
    pub d_plus: SparseMat,
    pub d_minus: SparseMat,
}

impl ModuleComplex {
    /// Total differential `d₊ + d₋`.
    pub fn d_total(&self) -> SparseMat {
        mat_add(&self.d_plus, &self.d_minus)
    }

    /// Check gradings and that `d₊² = d₋² = 0` and `(d₊+d₋)² = 0`.
    pub fn integrity(&self) -> Result<()> {
        for ((f, t), _) in &self.d_plus {
            let (a, b) = (&self.gens[*f], &self.gens[*t]);
            if b.i != a.i + 1 || b.j != a.j {
                return Err(Error::Integrity(format!(
                    "d+ entry {f}->{t} has bidegree ({}, {})",
                    b.i - a.i,
                    b.j - a.j
                )));
            }
        }
        for ((f, t), _) in &self.d_minus {
            let (a, b) = (&self.gens[*f], &self.gens[*t]);
            if b.i != a.i - 1 || b.j != a.j - 2 {
                return Err(Error::Integrity(format!(
                    "d- entry {f}->{t} has bidegree ({}, {})",
                    b.i - a.i,
                    b.j - a.j
                )));
            }
        }
        for (name, d) in [("d+", &self.d_plus), ("d-", &self.d_minus)] {
            if !mat_compose(d, d).is_empty() {
                return Err(Error::Integrity(format!("{name} does not square to zero")));
            }
        }
        let d = self.d_total();
        if !mat_compose(&d, &d).is_empty() {
            return Err(Error::Integrity("total differential does not square to zero".into()));
        }
        Ok(())
    }

    /// Global indices of generators grouped by a key function.
    fn grouped_by<K: Ord>(&self, key: impl Fn(&ModGen) -> K) -> BTreeMap<K, Vec<usize>> {
        let mut out: BTreeMap<K, Vec<usize>> = BTreeMap::new();
        for (idx, g) in self.gens.iter().enumerate() {
            out.entry(key(g)).or_default().push(idx);
        }
        out
    }

    /// Dense block of a sparse matrix: rows indexed by `rows`, columns by
    /// `cols` (columns are the map's source).
    fn block_mat(&self, m: &SparseMat, rows: &[usize], cols: &[usize]) -> Mat {
        Mat::from_fn(self.ring, rows.len(), cols.len(), |r, c| {
            m.get(&(cols[c], rows[r])).cloned().unwrap_or_else(|| self.ring.zero())
        })
    }
}

/// Evaluate one normal-form config between closed resolutions: returns the
/// source and target label masks of its single matrix entry.
fn eval_config(
    src: &crate::diagram::Resolution,
    tgt: &crate::diagram::Resolution,
    dots: &BTreeSet<Curve>,
) -> Result<(usize, usize)> {
    let mut src_mask = 0usize;
    let mut tgt_mask = 0usize;
    for (c, circ) in src.circles.iter().enumerate() {
        if !dots.contains(&Curve::Src(circ.clone())) {
            src_mask |= 1 << c;
        }
    }
    for (c, circ) in tgt.circles.iter().enumerate() {
        if dots.contains(&Curve::Tgt(circ.clone())) {
            tgt_mask |= 1 << c;
        }
    }
    for d in dots {
        if matches!(d, Curve::Side(_)) {
            return Err(Error::Invalid(
                "cannot apply the TQFT to a morphism with boundary".into(),
            ));
        }
    }
    Ok((src_mask, tgt_mask))
}

/// Apply the TQFT to a formal curved complex of a closed diagram.
pub fn apply_tqft(cx: &CurvedComplex) -> Result<ModuleComplex> {
    if !cx.boundary.is_empty() {
        return Err(Error::Invalid(
            "the TQFT is only defined for closed diagrams".into(),
        ));
    }
    let ring = cx.ring;
    let mut offsets = Vec::with_capacity(cx.gens.len());
    let mut gens = Vec::new();
    for (cube, g) in cx.gens.iter().enumerate() {
        if !g.res.arcs.is_empty() {
            return Err(Error::Invalid("resolution has open arcs".into()));
        }
        offsets.push(gens.len());
        let k = g.res.k();
        for mask in 0usize..(1 << k) {
            let qdeg = k as i64 - 2 * (mask.count_ones() as i64);
            let i = g.h;
            let j = qdeg + g.h + g.shift;
            gens.push(ModGen {
                cube,
                labels: mask,
                i,
                j,
            });
        }
    }
    let mut mc = ModuleComplex {
        ring,
        cube: cx.gens.clone(),
        offsets,
        gens,
        d_plus: SparseMat::new(),
        d_minus: SparseMat::new(),
    };
    let dp = eval_blocks(&mc, &mc, &cx.d_plus, &cx.gens, &cx.gens)?;
    let dm = eval_blocks(&mc, &mc, &cx.d_minus, &cx.gens, &cx.gens)?;
    mc.d_plus = dp;
    mc.d_minus = dm;
    #[cfg(debug_assertions)]
    mc.integrity()?;
    Ok(mc)
}

/// Evaluate a block matrix of formal morphisms into a sparse module matrix.
fn eval_blocks(
    src_mc: &ModuleComplex,
    tgt_mc: &ModuleComplex,
    blocks: &crate::ckom::Blocks,
    src_gens: &[Gen],
    tgt_gens: &[Gen],
) -> Result<SparseMat> {
    let mut out = SparseMat::new();
    for ((a, b), m) in blocks {
        let src = &src_gens[*a].res;
        let tgt = &tgt_gens[*b].res;
        for (dots, coeff) in &m.terms {
            let (ms, mt) = eval_config(src, tgt, dots)?;
            mat_insert(
                &mut out,
                (src_mc.offsets[*a] + ms, tgt_mc.offsets[*b] + mt),
                coeff,
            );
        }
    }
    Ok(out)
}

/// Apply the TQFT to a chain map between closed-diagram complexes: returns
/// the two module complexes and the chain-level matrix.
pub fn apply_tqft_map(f: &ChainMap) -> Result<(ModuleComplex, ModuleComplex, SparseMat)> {
    let src = apply_tqft(&f.source)?;
    let tgt = apply_tqft(&f.target)?;
    let m = eval_blocks(&src, &tgt, &f.blocks, &f.source.gens, &f.target.gens)?;
    Ok((src, tgt, m))
}

/// Which homology to compute: bigraded Khovanov homology of `d₊`, or the
/// `l`-graded homology of the total differential.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HomologyKind {
    Kh,
    Bs,
}

/// A grading block label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Grading {
    Ij(i64, i64),
    L(i64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub grading: Grading,
    pub rank: usize,
    pub torsion: Vec<BigInt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedHomology {
    pub ring: Ring,
    pub kind: HomologyKind,
    pub groups: Vec<Group>,
}

impl GradedHomology {
    /// Total rank over all gradings.
    pub fn total_rank(&self) -> usize {
        self.groups.iter().map(|g| g.rank).sum()
    }

    /// Rank at a grading (zero if absent).
    pub fn rank_at(&self, grading: Grading) -> usize {
        self.groups
            .iter()
            .find(|g| g.grading == grading)
            .map_or(0, |g| g.rank)
    }

    /// Ranks keyed by grading, for dimension comparisons.
    pub fn rank_table(&self) -> BTreeMap<Grading, usize> {
        self.groups
            .iter()
            .filter(|g| g.rank > 0)
            .map(|g| (g.grading, g.rank))
            .collect()
    }

    /// The JSON result value (deterministic key order).
    pub fn to_json(&self) -> serde_json::Value {
        let grading = match self.kind {
            HomologyKind::Kh => "ij",
            HomologyKind::Bs => "l",
        };
        let groups: Vec<serde_json::Value> = self
            .groups
            .iter()
            .map(|g| {
                let torsion: Vec<serde_json::Value> =
                    g.torsion.iter().map(|t| json_int(t)).collect();
                match g.grading {
                    Grading::Ij(i, j) => serde_json::json!({
                        "i": i, "j": j, "rank": g.rank, "torsion": torsion,
                    }),
                    Grading::L(l) => serde_json::json!({
                        "l": l, "rank": g.rank, "torsion": torsion,
                    }),
                }
            })
            .collect();
        serde_json::json!({
            "ring": self.ring.to_string(),
            "grading": grading,
            "groups": groups,
        })
    }
}

fn json_int(t: &BigInt) -> serde_json::Value {
    match i64::try_from(t.clone()) {
        Ok(n) => serde_json::json!(n),
        Err(_) => serde_json::json!(t.to_string()),
    }
}

/// The grading blocks relevant to a homology computation, with the pair of
/// differential matrices (incoming, outgoing) for each.
fn homology_blocks(
    mc: &ModuleComplex,
    kind: HomologyKind,
) -> Result<Vec<(Grading, Vec<usize>, Mat, Mat)>> {
    let mut out = Vec::new();
    match kind {
        HomologyKind::Kh => {
            let groups = mc.grouped_by(|g| (g.i, g.j));
            for (&(i, j), cols) in &groups {
                let empty = Vec::new();
                let rows_out = groups.get(&(i + 1, j)).unwrap_or(&empty);
                let rows_in = groups.get(&(i - 1, j)).unwrap_or(&empty);
                let d_out = mc.block_mat(&mc.d_plus, rows_out, cols);
                let d_in = mc.block_mat(&mc.d_plus, cols, rows_in);
                out.push((Grading::Ij(i, j), cols.clone(), d_out, d_in));
            }
        }
        HomologyKind::Bs => {
            let d = mc.d_total();
            if !mat_compose(&d, &d).is_empty() {
                return Err(Error::Integrity(
                    "total differential does not square to zero".into(),
                ));
            }
            let groups = mc.grouped_by(|g| g.l());
            for (&l, cols) in &groups {
                let empty = Vec::new();
                let rows_out = groups.get(&(l - 1)).unwrap_or(&empty);
                let rows_in = groups.get(&(l + 1)).unwrap_or(&empty);
                let d_out = mc.block_mat(&d, rows_out, cols);
                let d_in = mc.block_mat(&d, cols, rows_in);
                out.push((Grading::L(l), cols.clone(), d_out, d_in));
            }
        }
    }
    Ok(out)
}

/// Graded homology of a module complex.
pub fn homology(mc: &ModuleComplex, kind: HomologyKind) -> Result<GradedHomology> {
    let mut groups = Vec::new();
    for (grading, _, d_out, d_in) in homology_blocks(mc, kind)? {
        let (rank, torsion) = crate::linalg::homology_group(&d_out, &d_in);
        if rank > 0 || !torsion.is_empty() {
            groups.push(Group {
                grading,
                rank,
                torsion,
            });
        }
    }
    Ok(GradedHomology {
        ring: mc.ring,
        kind,
        groups,
    })
}

/// The map induced on homology by a verified chain map, in deterministic
/// bases (column-echelon over fields, SNF-adapted over the integers).
#[derive(Debug)]
pub struct InducedMap {
    pub kind: HomologyKind,
    pub degree: i64,
    pub source: GradedHomology,
    pub target: GradedHomology,
    /// One matrix per source grading block with generators; rows index the
    /// target homology basis at the shifted grading, columns the source one.
    pub blocks: BTreeMap<Grading, Mat>,
}

pub fn induced_map(f: &ChainMap, kind: HomologyKind) -> Result<InducedMap> {
    let report = verify_chain_map(f);
    if !report.ok() {
        return Err(Error::Integrity("not a chain map".into()));
    }
    let degree = match f.degree() {
        Some(p) => p,
        None if f.is_zero() => 0,
        None => return Err(Error::Invalid("inhomogeneous chain map".into())),
    };
    let (src_cx, tgt_cx, blocks) = match kind {
        HomologyKind::Kh => {
            let g = associated_graded(f, degree)?;
            (g.source.clone(), g.target.clone(), g.blocks.clone())
        }
        HomologyKind::Bs => (f.source.clone(), f.target.clone(), f.blocks.clone()),
    };
    let src_mc = apply_tqft(&src_cx)?;
    let tgt_mc = apply_tqft(&tgt_cx)?;
    let fm = eval_blocks(&src_mc, &tgt_mc, &blocks, &src_cx.gens, &tgt_cx.gens)?;

    let src_blocks = homology_blocks(&src_mc, kind)?;
    let tgt_blocks = homology_blocks(&tgt_mc, kind)?;
    let mut tgt_bases: BTreeMap<Grading, (Vec<usize>, HomologyBasis)> = BTreeMap::new();
    let mut tgt_groups = Vec::new();
    for (grading, idxs, d_out, d_in) in tgt_blocks {
        let basis = HomologyBasis::new(&d_out, &d_in);
        push_group(&mut tgt_groups, grading, &basis);
        tgt_bases.insert(grading, (idxs, basis));
    }
    let mut src_groups = Vec::new();
    let mut out_blocks = BTreeMap::new();
    for (grading, idxs, d_out, d_in) in src_blocks {
        let basis = HomologyBasis::new(&d_out, &d_in);
        push_group(&mut src_groups, grading, &basis);
        if basis.is_empty() {
            continue;
        }
        let shifted = match grading {
            Grading::Ij(i, j) => Grading::Ij(i, j + degree),
            Grading::L(l) => Grading::L(l + degree),
        };
        let (tgt_idxs, tgt_basis): (&Vec<usize>, &HomologyBasis) = match tgt_bases.get(&shifted) {
            Some((ti, tb)) => (ti, tb),
            None => {
                out_blocks.insert(grading, Mat::zero(src_mc.ring, 0, basis.len()));
                continue;
            }
        };
        let mut cols = Vec::new();
        for c in 0..basis.len() {
            // Chain representative in block coordinates → global → image →
            // target block coordinates → homology coordinates.
            let mut image = vec![src_mc.ring.zero(); tgt_mc.gens.len()];
            for (r, &gi) in idxs.iter().enumerate() {
                let x = basis.reps.get(r, c);
                if x.is_zero() {
                    continue;
                }
                for ((from, to), y) in &fm {
                    if *from == gi {
                        let s = &image[*to] + &(x * y);
                        image[*to] = s;
                    }
                }
            }
            let restricted: Vec<Elem> = tgt_idxs.iter().map(|&t| image[t].clone()).collect();
            let coords = tgt_basis
                .project(&restricted)
                .ok_or_else(|| Error::Integrity("image of a cycle is not a cycle".into()))?;
            cols.push(coords);
        }
        out_blocks.insert(
            grading,
            Mat::from_columns(src_mc.ring, tgt_basis.len(), &cols),
        );
    }
    Ok(InducedMap {
        kind,
        degree,
        source: GradedHomology {
            ring: src_mc.ring,
            kind,
            groups: src_groups,
        },
        target: GradedHomology {
            ring: tgt_mc.ring,
            kind,
            groups: tgt_groups,
        },
        blocks: out_blocks,
    })
}

fn push_group(groups: &mut Vec<Group>, grading: Grading, basis: &HomologyBasis) {
    let rank = basis.orders.iter().filter(|o| num_traits::Zero::is_zero(*o)).count();
    let torsion: Vec<BigInt> = basis
        .orders
        .iter()
        .filter(|o| !num_traits::Zero::is_zero(*o))
        .cloned()
        .collect();
    if rank > 0 || !torsion.is_empty() {
        groups.push(Group {
            grading,
            rank,
            torsion,
        });
    }
}

/// The Khovanov–Jacobsson number of a chain map between empty-diagram
/// complexes: the single entry of the induced `R → R`.
pub fn kj_number(f: &ChainMap) -> Result<Elem> {
    for cx in [&f.source, &f.target] {
        if cx.gens.len() != 1
            || !cx.gens[0].res.circles.is_empty()
            || !cx.gens[0].res.arcs.is_empty()
        {
            return Err(Error::Invalid(
                "Khovanov-Jacobsson numbers need empty initial and final links".into(),
            ));
        }
    }
    let ring = f.source.ring;
    match f.blocks.get(&(0, 0)) {
        Some(m) => Ok(m
            .terms
            .get(&BTreeSet::new())
            .cloned()
            .unwrap_or_else(|| ring.zero())),
        None => Ok(ring.zero()),
    }
}

/// Unit handling for the homotopy solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitMode {
    /// Solve `f − u·g = dh + hd` with a fixed `u = ±1`.
    Fixed(i64),
    /// Treat the unit as an extra scalar unknown.
    Unknown,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// If set to `p`, restrict the homotopy to filtration level ≤ `p + 1`.
    pub filtered_level: Option<i64>,
    pub unit: UnitMode,
}

impl Default for SolveOptions {
    fn default() -> SolveOptions {
        SolveOptions {
            filtered_level: None,
            unit: UnitMode::Fixed(1),
        }
    }
}

#[derive(Debug)]
pub struct SolveResult {
    pub homotopy: Homotopy,
    pub unit: Elem,
}

/// Solve `f − u·g = dh + hd` on the formal carrier over a field.  Returns
/// `None` if no homotopy exists under the given constraints.
pub fn homotopy_solve(
    f: &ChainMap,
    g: &ChainMap,
    opts: &SolveOptions,
) -> Result<Option<SolveResult>> {
    let ring = f.source.ring;
    if !ring.is_field() {
        return Err(Error::Invalid("homotopy solving requires a field".into()));
    }
    if f.source.gens != g.source.gens || f.target.gens != g.target.gens {
        return Err(Error::Invalid(
            "homotopy solving needs maps with identical ends".into(),
        ));
    }
    let degree = match f.degree().or_else(|| g.degree()) {
        Some(p) => p,
        None => {
            // Both zero: the zero homotopy works with u = 1.
            let h = Homotopy::new(f.source.clone(), f.target.clone(), Default::default())?;
            return Ok(Some(SolveResult {
                homotopy: h,
                unit: ring.one(),
            }));
        }
    };
    // Candidate basis: per odd-shift generator pair, the configs of internal
    // degree `degree + 1`.
    let mut candidates: Vec<((usize, usize), BTreeSet<Curve>)> = Vec::new();
    for (a, ga) in f.source.gens.iter().enumerate() {
        for (b, gb) in f.target.gens.iter().enumerate() {
            if (gb.h - ga.h).rem_euclid(2) != 1 {
                continue;
            }
            if let Some(p) = opts.filtered_level {
                if degree + 1 + (gb.h - ga.h) > p + 1 {
                    continue;
                }
            }
            let curves = all_curves(&ga.res, &gb.res);
            if curves.len() > 20 {
                return Err(Error::Guard(format!(
                    "homotopy candidate space too large ({} curves)",
                    curves.len()
                )));
            }
            let base: i64 = curves.len() as i64 - ga.res.arcs.len() as i64;
            let want = degree + 1 - (gb.shift - ga.shift);
            // degree(config) = base − 2·#dots, so solve for the dot count.
            if (base - want) % 2 != 0 || base < want {
                continue;
            }
            let ndots = ((base - want) / 2) as usize;
            if ndots > curves.len() {
                continue;
            }
            for mask in 0usize..(1 << curves.len()) {
                if mask.count_ones() as usize != ndots {
                    continue;
                }
                let dots: BTreeSet<Curve> = curves
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask & (1 << k) != 0)
                    .map(|(_, c)| c.clone())
                    .collect();
                candidates.push(((a, b), dots));
            }
        }
    }
    // Columns: boundary of each single-candidate homotopy, vectorized over
    // (block, config) rows.
    let mut rows: BTreeMap<((usize, usize), BTreeSet<Curve>), usize> = BTreeMap::new();
    let vectorize = |blocks: &crate::ckom::Blocks,
                     rows: &mut BTreeMap<((usize, usize), BTreeSet<Curve>), usize>|
     -> Vec<(usize, Elem)> {
        let mut out = Vec::new();
        for (key, m) in blocks {
            for (dots, coeff) in &m.terms {
                let next = rows.len();
                let r = *rows.entry((*key, dots.clone())).or_insert(next);
                out.push((r, coeff.clone()));
            }
        }
        out
    };
    let mut cols: Vec<Vec<(usize, Elem)>> = Vec::new();
    for ((a, b), dots) in &candidates {
        let mut blocks = crate::ckom::Blocks::new();
        let mut m = crate::cobcat::CobMorphism::zero(
            ring,
            f.source.gens[*a].res.clone(),
            f.target.gens[*b].res.clone(),
        );
        m.add_term(dots.clone(), ring.one());
        blocks.insert((*a, *b), m);
        let h = Homotopy::new(f.source.clone(), f.target.clone(), blocks)?;
        cols.push(vectorize(&h.boundary(), &mut rows));
    }
    let f_vec = vectorize(&f.blocks, &mut rows);
    let g_vec = vectorize(&g.blocks, &mut rows);
    let nrows = rows.len();
    let solve_with = |rhs: &[(usize, Elem)],
                      extra: Option<&[(usize, Elem)]>|
     -> Option<Vec<Elem>> {
        let ncols = cols.len() + extra.map_or(0, |_| 1);
        let mut a = Mat::zero(ring, nrows, ncols);
        for (c, col) in cols.iter().enumerate() {
            for (r, x) in col {
                a.add_to(*r, c, x);
            }
        }
        if let Some(e) = extra {
            for (r, x) in e {
                a.add_to(*r, cols.len(), x);
            }
        }
        let mut b = Mat::zero(ring, nrows, 1);
        for (r, x) in rhs {
            b.add_to(*r, 0, x);
        }
        crate::linalg::solve(&a, &b).map(|x| x.column(0))
    };

    let (x, unit) = match opts.unit {
        UnitMode::Fixed(s) => {
            // rhs = f − s·g
            let mut rhs = f_vec.clone();
            let sign = ring.from_i64(-s);
            for (r, v) in &g_vec {
                rhs.push((*r, v * &sign));
            }
            match solve_with(&rhs, None) {
                Some(x) => (x, ring.from_i64(s)),
                None => return Ok(None),
            }
        }
        UnitMode::Unknown => {
            // dh + hd + u·g = f, with u the last unknown.
            match solve_with(&f_vec, Some(&g_vec)) {
                Some(x) => {
                    let u = x[cols.len()].clone();
                    (x, u)
                }
                None => return Ok(None),
            }
        }
    };
    let mut blocks = crate::ckom::Blocks::new();
    for (k, ((a, b), dots)) in candidates.iter().enumerate() {
        if x[k].is_zero() {
            continue;
        }
        let entry = blocks.entry((*a, *b)).or_insert_with(|| {
            crate::cobcat::CobMorphism::zero(
                ring,
                f.source.gens[*a].res.clone(),
                f.target.gens[*b].res.clone(),
            )
        });
        entry.add_term(dots.clone(), x[k].clone());
    }
    blocks.retain(|_, m| !m.is_zero());
    let h = Homotopy::new(f.source.clone(), f.target.clone(), blocks)?;
    // Exact check of the solution.
    let residual = crate::ckom::blocks_sub(
        &crate::ckom::blocks_sub(&f.blocks, &crate::ckom::blocks_scale(&g.blocks, &unit)),
        &h.boundary(),
    );
    if !residual.is_empty() {
        return Err(Error::Integrity("homotopy solver produced a bad solution".into()));
    }
    Ok(Some(SolveResult { homotopy: h, unit }))
}

/// Solve `F − u·G = Dh + hD` on the module carrier over a field.
pub fn module_homotopy_solve(
    src: &ModuleComplex,
    tgt: &ModuleComplex,
    f: &SparseMat,
    g: &SparseMat,
    degree: i64,
    opts: &SolveOptions,
) -> Result<Option<(SparseMat, Elem)>> {
    let ring = src.ring;
    if !ring.is_field() {
        return Err(Error::Invalid("homotopy solving requires a field".into()));
    }
    let d_src = src.d_total();
    let d_tgt = tgt.d_total();
    let mut candidates: Vec<(usize, usize)> = Vec::new();
    for (a, ga) in src.gens.iter().enumerate() {
        for (b, gb) in tgt.gens.iter().enumerate() {
            if (gb.i - ga.i).rem_euclid(2) != 1 || gb.l() - ga.l() != degree + 1 {
                continue;
            }
            if let Some(p) = opts.filtered_level {
                if degree + 1 + (gb.i - ga.i) > p + 1 {
                    continue;
                }
            }
            candidates.push((a, b));
        }
    }
    let mut rows: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let vectorize = |m: &SparseMat, rows: &mut BTreeMap<(usize, usize), usize>| {
        let mut out = Vec::new();
        for (key, x) in m {
            let next = rows.len();
            let r = *rows.entry(*key).or_insert(next);
            out.push((r, x.clone()));
        }
        out
    };
    let mut cols = Vec::new();
    for &(a, b) in &candidates {
        let mut e = SparseMat::new();
        e.insert((a, b), ring.one());
        let boundary = mat_add(&mat_compose(&d_tgt, &e), &mat_compose(&e, &d_src));
        cols.push(vectorize(&boundary, &mut rows));
    }
    let f_vec = vectorize(f, &mut rows);
    let g_vec = vectorize(g, &mut rows);
    let nrows = rows.len();
    let build = |extra: Option<&Vec<(usize, Elem)>>, rhs: &Vec<(usize, Elem)>| {
        let ncols = cols.len() + extra.map_or(0, |_| 1);
        let mut a = Mat::zero(ring, nrows, ncols);
        for (c, col) in cols.iter().enumerate() {
            for (r, x) in col {
                a.add_to(*r, c, x);
            }
        }
        if let Some(e) = extra {
            for (r, x) in e {
                a.add_to(*r, cols.len(), x);
            }
        }
        let mut b = Mat::zero(ring, nrows, 1);
        for (r, x) in rhs {
            b.add_to(*r, 0, x);
        }
        crate::linalg::solve(&a, &b).map(|x| x.column(0))
    };
    let (x, unit) = match opts.unit {
        UnitMode::Fixed(s) => {
            let mut rhs = f_vec.clone();
            let sign = ring.from_i64(-s);
            for (r, v) in &g_vec {
                rhs.push((*r, v * &sign));
            }
            match build(None, &rhs) {
                Some(x) => (x, ring.from_i64(s)),
                None => return Ok(None),
            }
        }
        UnitMode::Unknown => match build(Some(&g_vec), &f_vec) {
            Some(x) => {
                let u = x[cols.len()].clone();
                (x, u)
            }
            None => return Ok(None),
        },
    };
    let mut h = SparseMat::new();
    for (k, &(a, b)) in candidates.iter().enumerate() {
        mat_insert(&mut h, (a, b), &x[k]);
    }
    Ok(Some((h, unit)))
}

/// One page of the spectral sequence of the quantum filtration; entries are
/// dimensions keyed by `(i, j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectralPage {
    pub r: usize,
    pub dims: BTreeMap<(i64, i64), usize>,
}

#[derive(Debug)]
pub struct SpectralReport {
    pub ring: Ring,
    /// Pages starting at `E₂` (the Khovanov page).
    pub pages: Vec<SpectralPage>,
    /// First recorded page from which all later pages agree.
    pub collapse_page: usize,
}

impl SpectralReport {
    /// The last computed page (stable, `E_∞`).
    pub fn e_infinity(&self) -> &SpectralPage {
        self.pages.last().expect("at least one page")
    }

    pub fn to_json(&self) -> serde_json::Value {
        let pages: Vec<serde_json::Value> = self
            .pages
            .iter()
            .map(|p| {
                let dims: Vec<serde_json::Value> = p
                    .dims
                    .iter()
                    .map(|(&(i, j), &d)| serde_json::json!({"i": i, "j": j, "dim": d}))
                    .collect();
                serde_json::json!({"page": p.r, "dims": dims})
            })
            .collect();
        serde_json::json!({
            "ring": self.ring.to_string(),
            "pages": pages,
            "collapse_page": self.collapse_page,
        })
    }
}

/// Pages of the spectral sequence induced by the quantum (`j`) filtration of
/// the total differential, labeled so that the homology of `d₊` is `E₂`.
pub fn spectral_pages(mc: &ModuleComplex) -> Result<SpectralReport> {
    let ring = mc.ring;
    if !ring.is_field() {
        return Err(Error::Invalid("spectral pages require a field".into()));
    }
    let d = mc.d_total();
    if !mat_compose(&d, &d).is_empty() {
        return Err(Error::Integrity(
            "total differential does not square to zero".into(),
        ));
    }
    let by_l = mc.grouped_by(|g| g.l());
    let empty: Vec<usize> = Vec::new();
    let gens_at = |l: i64| by_l.get(&l).unwrap_or(&empty);
    // d restricted C_l → C_{l−1}, as a dense matrix in the listed orders.
    let d_from = |l: i64| mc.block_mat(&d, gens_at(l - 1), gens_at(l));

    // Basis of Z_r^{p,l} = { x ∈ F_p C_l : dx ∈ F_{p−2r} C_{l−1} }, as
    // columns in the coordinates of C_l.
    let z_basis = |r: i64, p: i64, l: i64| -> Mat {
        let cols: Vec<usize> = gens_at(l)
            .iter()
            .enumerate()
            .filter(|(_, &g)| mc.gens[g].j <= p)
            .map(|(k, _)| k)
            .collect();
        if r <= 0 {
            // No condition on dx: all of F_p.
            let mut m = Mat::zero(ring, gens_at(l).len(), cols.len());
            for (c, &k) in cols.iter().enumerate() {
                m.set(k, c, ring.one());
            }
            return m;
        }
        let rows: Vec<usize> = gens_at(l - 1)
            .iter()
            .enumerate()
            .filter(|(_, &g)| mc.gens[g].j > p - 2 * r)
            .map(|(k, _)| k)
            .collect();
        let dl = d_from(l);
        let constraint = Mat::from_fn(ring, rows.len(), cols.len(), |rr, cc| {
            dl.get(rows[rr], cols[cc]).clone()
        });
        let kern = kernel(&constraint);
        let mut m = Mat::zero(ring, gens_at(l).len(), kern.cols);
        for c in 0..kern.cols {
            for (rr, &k) in cols.iter().enumerate() {
                m.set(k, c, kern.get(rr, c).clone());
            }
        }
        m
    };

    let j_vals: Vec<i64> = mc.gens.iter().map(|g| g.j).collect();
    if j_vals.is_empty() {
        return Ok(SpectralReport {
            ring,
            pages: vec![SpectralPage {
                r: 2,
                dims: BTreeMap::new(),
            }],
            collapse_page: 2,
        });
    }
    let (j_min, j_max) = (
        *j_vals.iter().min().unwrap(),
        *j_vals.iter().max().unwrap(),
    );
    let a_max = ((j_max - j_min) / 2 + 2) as i64;

    let mut pages = Vec::new();
    for a in 1..=a_max {
        let mut dims = BTreeMap::new();
        for (&l, idxs) in &by_l {
            let ps: BTreeSet<i64> = idxs.iter().map(|&g| mc.gens[g].j).collect();
            for &p in &ps {
                let zn = z_basis(a, p, l);
                let den1 = z_basis(a - 1, p - 2, l);
                let zin = z_basis(a - 1, p + 2 * (a - 1), l + 1);
                let den2 = d_from(l + 1).mul(&zin);
                let denom_rank = rank(&den1.hstack(&den2));
                let dim = zn.cols - denom_rank;
                if dim > 0 {
                    dims.insert((p - l, p), dim);
                }
            }
        }
        pages.push(SpectralPage {
            r: (a + 1) as usize,
            dims,
        });
    }
    // Page dimensions shrink monotonically, so the collapse page is the
    // first one matching the stable final page.
    let last = pages.last().unwrap().dims.clone();
    let collapse_page = pages.iter().find(|p| p.dims == last).unwrap().r;
    Ok(SpectralReport {
        ring,
        pages,
        collapse_page,
    })
}

/// Build the Batson–Seed module complex of a closed weighted link diagram.
pub fn bs_link_module(diagram: &crate::diagram::TangleDiagram) -> Result<ModuleComplex> {
    if !diagram.boundary.is_empty() {
        return Err(Error::Invalid(
            "link module requires an empty boundary".into(),
        ));
    }
    apply_tqft(&crate::bs::bs_complex(diagram)?)
}

/// Repeatedly cancel unit entries of the total differential of a module
/// complex.  Over a field this reduces the complex to its homology with zero
/// differential.
pub fn module_gaussian_simplify(mc: &ModuleComplex) -> ModuleComplex {
    let ring = mc.ring;
    let mut gens: Vec<ModGen> = mc.gens.clone();
    let mut alive: Vec<bool> = vec![true; gens.len()];
    let mut d = mc.d_total();
    loop {
        let Some((&(a, b), u)) = d.iter().find(|((_, _), x)| x.is_unit()) else {
            break;
        };
        let u_inv = u.inv().expect("unit");
        let ins: Vec<(usize, Elem)> = d
            .iter()
            .filter(|((x, y), _)| *y == b && *x != a)
            .map(|((x, _), v)| (*x, v.clone()))
            .collect();
        let outs: Vec<(usize, Elem)> = d
            .iter()
            .filter(|((x, y), _)| *x == a && *y != b)
            .map(|((_, y), v)| (*y, v.clone()))
            .collect();
        d.retain(|(x, y), _| *x != a && *y != a && *x != b && *y != b);
        for (x, vx) in &ins {
            for (y, vy) in &outs {
                let corr = -&(&(vx * &u_inv) * vy);
                mat_insert(&mut d, (*x, *y), &corr);
            }
        }
        alive[a] = false;
        alive[b] = false;
    }
    let mut renumber = vec![usize::MAX; gens.len()];
    let mut new_gens = Vec::new();
    for (k, g) in gens.drain(..).enumerate() {
        if alive[k] {
            renumber[k] = new_gens.len();
            new_gens.push(g);
        }
    }
    let mut split_plus = SparseMat::new();
    let mut split_minus = SparseMat::new();
    for ((x, y), v) in &d {
        let key = (renumber[*x], renumber[*y]);
        let (gi, gj) = (&mc.gens[*x], &mc.gens[*y]);
        if gj.i > gi.i {
            mat_insert(&mut split_plus, key, v);
        } else {
            mat_insert(&mut split_minus, key, v);
        }
    }
    ModuleComplex {
        ring,
        cube: mc.cube.clone(),
        offsets: Vec::new(),
        gens: new_gens,
        d_plus: split_plus,
        d_minus: split_minus,
    }
}
