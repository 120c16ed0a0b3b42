//! Independent brute-force Khovanov homology oracle.
//!
//! This file deliberately shares no code with the main library.  It computes
//! Khovanov homology over the integers from a PD code by the most naive route
//! possible: enumerate all resolutions, build dense integer differentials with
//! the classical `(-1)^{#1s before i}` edge signs, and run a small-integer
//! Smith normal form per bigraded block.  It exists only so that test results
//! can be cross-checked against an implementation with a different shape.
//!
//! Conventions (shared with the rest of the test suite by necessity, since a
//! PD code means nothing without them):
//!   * slot 1 of `X(a,b,c,d)` is the incoming under-strand edge, slots listed
//!     clockwise;
//!   * a crossing is positive when its slot-2 edge is the incoming over-strand;
//!   * the 0-smoothing joins slots (1,4) and (2,3), the 1-smoothing joins
//!     slots (1,2) and (3,4).
//!
//! Crossing signs are supplied by the caller (worked out by hand for each test
//! diagram) rather than inferred, to keep this module free of orientation
//! plumbing.

/// One homology group in bigrading `(i, j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleGroup {
    pub i: i64,
    pub j: i64,
    pub rank: usize,
    /// Invariant factors > 1, in divisibility order.
    pub torsion: Vec<i128>,
}

/// Dense Khovanov homology over the integers of the PD code `pd` whose
/// crossing signs are `signs` (`+1` / `-1`, hand-computed by the caller).
pub fn kh_oracle(pd: &[[usize; 4]], signs: &[i64]) -> Vec<OracleGroup> {
    assert_eq!(pd.len(), signs.len());
    let n = pd.len();
    let n_plus = signs.iter().filter(|&&s| s > 0).count() as i64;
    let n_minus = n as i64 - n_plus;

    // Circles of every resolution, as a sorted list of sorted edge sets.
    let circles: Vec<Vec<Vec<usize>>> = (0..1u32 << n).map(|v| resolve(pd, v)).collect();

    // Generators: (vertex, labeling) with labeling bit 1 meaning the degree
    // -1 algebra generator on that circle.  Enumerate in a fixed order and
    // record the bigrading of each.
    #[derive(Clone, PartialEq, Eq, Hash)]
    struct Gen {
        v: u32,
        lab: u32,
    }
    let mut gens: Vec<Gen> = Vec::new();
    let mut index: std::collections::HashMap<(u32, u32), usize> = std::collections::HashMap::new();
    for v in 0..1u32 << n {
        let k = circles[v as usize].len();
        for lab in 0..1u32 << k {
            index.insert((v, lab), gens.len());
            gens.push(Gen { v, lab });
        }
    }
    let grading = |g: &Gen| -> (i64, i64) {
        let weight = g.v.count_ones() as i64;
        let k = circles[g.v as usize].len() as i64;
        let x_count = g.lab.count_ones() as i64;
        let q = (k - x_count) - x_count; // deg(1)=+1, deg(X)=-1 summed
        let i = weight - n_minus;
        let j = q + weight + n_plus - 2 * n_minus;
        (i, j)
    };

    // Dense differential as a list of (row, col, coeff) with the classical
    // sign rule (-1)^{# of 1s in v before position c}.
    let mut entries: Vec<(usize, usize, i128)> = Vec::new();
    for v in 0..1u32 << n {
        for c in 0..n {
            if v >> c & 1 == 1 {
                continue;
            }
            let v2 = v | 1 << c;
            let sign = if (v & ((1 << c) - 1)).count_ones() % 2 == 0 {
                1i128
            } else {
                -1i128
            };
            let src = &circles[v as usize];
            let dst = &circles[v2 as usize];
            // The circles of `src` not surviving into `dst` merged; a circle
            // of `src` splitting produces two new circles in `dst`.
            for lab in 0..1u32 << src.len() {
                let col = index[&(v, lab)];
                for (dlab, coeff) in frobenius(src, dst, lab) {
                    let row = index[&(v2, dlab)];
                    entries.push((row, col, sign * coeff));
                }
            }
        }
    }

    // Split generators by bigrading and extract per-block dense matrices.
    let mut out = Vec::new();
    let bigradings: Vec<(i64, i64)> = gens.iter().map(grading).collect();
    let mut all: Vec<(i64, i64)> = bigradings.clone();
    all.sort();
    all.dedup();
    for &(i, j) in &all {
        // d_out: from (i,j) to (i+1,j); d_in: from (i-1,j) to (i,j).
        let here: Vec<usize> = (0..gens.len()).filter(|&g| bigradings[g] == (i, j)).collect();
        let next: Vec<usize> = (0..gens.len())
            .filter(|&g| bigradings[g] == (i + 1, j))
            .collect();
        let prev: Vec<usize> = (0..gens.len())
            .filter(|&g| bigradings[g] == (i - 1, j))
            .collect();
        let a = dense(&entries, &next, &here); // outgoing
        let b = dense(&entries, &here, &prev); // incoming
        let rank_a = {
            let mut m = a.clone();
            smith(&mut m)
        };
        let (rank_b, torsion) = {
            let mut m = b.clone();
            let r = smith(&mut m);
            let tors: Vec<i128> = (0..r)
                .map(|k| m[k][k].abs())
                .filter(|&d| d > 1)
                .collect();
            (r, tors)
        };
        let rank = here.len() - rank_a.min(here.len()) - rank_b;
        if rank > 0 || !torsion.is_empty() {
            out.push(OracleGroup {
                i,
                j,
                rank,
                torsion,
            });
        }
    }
    out.sort_by_key(|g| (g.i, g.j));
    out
}

/// Circles of the resolution `v`: union-find over edge ids using the slot
/// pairing convention, returned as sorted edge sets sorted by minimum edge.
pub fn resolve(pd: &[[usize; 4]], v: u32) -> Vec<Vec<usize>> {
    let mut max_edge = 0usize;
    for x in pd {
        for &e in x {
            max_edge = max_edge.max(e);
        }
    }
    let mut parent: Vec<usize> = (0..=max_edge).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let union = |parent: &mut Vec<usize>, a: usize, b: usize| {
        let (ra, rb) = (find(parent, a), find(parent, b));
        parent[ra] = rb;
    };
    for (c, x) in pd.iter().enumerate() {
        let [a, b, cc, d] = *x;
        if v >> c & 1 == 0 {
            union(&mut parent, a, d);
            union(&mut parent, b, cc);
        } else {
            union(&mut parent, a, b);
            union(&mut parent, cc, d);
        }
    }
    let mut used: Vec<usize> = pd.iter().flatten().copied().collect();
    used.sort();
    used.dedup();
    let mut classes: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for e in used {
        let r = find(&mut parent, e);
        classes.entry(r).or_default().push(e);
    }
    let mut circles: Vec<Vec<usize>> = classes.into_values().collect();
    for c in &mut circles {
        c.sort();
    }
    circles.sort();
    circles
}

/// Frobenius algebra action of one saddle: given circles before/after and a
/// labeling of the source circles, return (target labeling, coefficient)
/// pairs.  Label bit 1 = X.  Merge is multiplication, split is
/// comultiplication.
fn frobenius(src: &[Vec<usize>], dst: &[Vec<usize>], lab: u32) -> Vec<(u32, i128)> {
    // Identify circles by their edge sets.  Unchanged circles carry their
    // label across; merged circles multiply; a split circle comultiplies.
    let changed_src: Vec<usize> = (0..src.len()).filter(|&k| !dst.contains(&src[k])).collect();
    let changed_dst: Vec<usize> = (0..dst.len()).filter(|&k| !src.contains(&dst[k])).collect();
    let carry = |lab: u32, dlab_bits: &mut u32| {
        for (k, c) in src.iter().enumerate() {
            if let Some(pos) = dst.iter().position(|d| d == c) {
                if lab >> k & 1 == 1 {
                    *dlab_bits |= 1 << pos;
                }
            }
        }
    };
    match (changed_src.len(), changed_dst.len()) {
        (2, 1) => {
            // merge: m(1,1)=1, m(1,X)=m(X,1)=X, m(X,X)=0
            let xa = lab >> changed_src[0] & 1;
            let xb = lab >> changed_src[1] & 1;
            if xa == 1 && xb == 1 {
                return vec![];
            }
            let mut dlab = 0u32;
            carry(lab, &mut dlab);
            if xa + xb == 1 {
                dlab |= 1 << changed_dst[0];
            }
            vec![(dlab, 1)]
        }
        (1, 2) => {
            // split: D(1) = 1 x X + X x 1, D(X) = X x X
            let x = lab >> changed_src[0] & 1;
            let mut base = 0u32;
            carry(lab, &mut base);
            let (p, q) = (changed_dst[0], changed_dst[1]);
            if x == 1 {
                vec![(base | 1 << p | 1 << q, 1)]
            } else {
                vec![(base | 1 << p, 1), (base | 1 << q, 1)]
            }
        }
        other => panic!("saddle changed {:?} circles", other),
    }
}

fn dense(entries: &[(usize, usize, i128)], rows: &[usize], cols: &[usize]) -> Vec<Vec<i128>> {
    let rpos: std::collections::HashMap<usize, usize> =
        rows.iter().enumerate().map(|(k, &g)| (g, k)).collect();
    let cpos: std::collections::HashMap<usize, usize> =
        cols.iter().enumerate().map(|(k, &g)| (g, k)).collect();
    let mut m = vec![vec![0i128; cols.len()]; rows.len()];
    for &(r, c, x) in entries {
        if let (Some(&ri), Some(&ci)) = (rpos.get(&r), cpos.get(&c)) {
            m[ri][ci] += x;
        }
    }
    m
}

/// In-place Smith normal form (diagonal with divisibility); returns the rank.
/// Plain textbook pivoting; entries stay tiny for the diagrams tested here,
/// but overflow would panic in debug builds rather than corrupt results.
pub fn smith(m: &mut Vec<Vec<i128>>) -> usize {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut t = 0usize;
    while t < rows.min(cols) {
        // Find a pivot of minimal absolute value in the remaining block.
        let mut pivot: Option<(usize, usize)> = None;
        for r in t..rows {
            for c in t..cols {
                if m[r][c] != 0
                    && pivot.map_or(true, |(pr, pc)| m[r][c].abs() < m[pr][pc].abs())
                {
                    pivot = Some((r, c));
                }
            }
        }
        let Some((pr, pc)) = pivot else { break };
        m.swap(t, pr);
        for row in m.iter_mut() {
            row.swap(t, pc);
        }
        // Reduce row and column against the pivot until clean.
        loop {
            let mut dirty = false;
            for r in t + 1..rows {
                let q = m[r][t].div_euclid(m[t][t]);
                if q != 0 {
                    for c in t..cols {
                        m[r][c] -= q.checked_mul(m[t][c]).unwrap();
                    }
                }
                if m[r][t] != 0 {
                    // Remainder smaller than pivot: swap up and restart.
                    m.swap(t, r);
                    dirty = true;
                }
            }
            for c in t + 1..cols {
                let q = m[t][c].div_euclid(m[t][t]);
                if q != 0 {
                    for r in t..rows {
                        let sub = q.checked_mul(m[r][t]).unwrap();
                        m[r][c] -= sub;
                    }
                }
                if m[t][c] != 0 {
                    for r in 0..rows {
                        let tmp = m[r][t];
                        m[r][t] = m[r][c];
                        m[r][c] = tmp;
                    }
                    dirty = true;
                }
            }
            if !dirty {
                break;
            }
        }
        t += 1;
    }
    // Enforce divisibility d_k | d_{k+1}.
    let rank = (0..rows.min(cols)).take_while(|&k| m[k][k] != 0).count();
    let mut changed = true;
    while changed {
        changed = false;
        for k in 0..rank.saturating_sub(1) {
            let (a, b) = (m[k][k].abs(), m[k + 1][k + 1].abs());
            if b % a != 0 {
                let g = gcd(a, b);
                let l = a / g * b;
                m[k][k] = g;
                m[k + 1][k + 1] = l;
                changed = true;
            }
        }
    }
    for k in 0..rank {
        m[k][k] = m[k][k].abs();
    }
    rank
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}
