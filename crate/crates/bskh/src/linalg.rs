//! Dense exact linear algebra over the supported rings.
//!
//! Matrices are dense `Vec<Elem>` in row-major order; everything in this
//! crate works at desk scale, where clarity beats asymptotics.  The two
//! workhorses are Smith normal form with unimodular transforms (over the
//! integers) and Gaussian elimination (over fields); on top of these sit
//! exact linear solving, kernels, and homology of a two-step complex.

use crate::coeff::{Elem, Ring};
use num_bigint::BigInt;
use num_traits::{Euclid, Signed, Zero};

/// A dense matrix over a fixed ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mat {
    pub ring: Ring,
    pub rows: usize,
    pub cols: usize,
    data: Vec<Elem>,
}

impl Mat {
    pub fn zero(ring: Ring, rows: usize, cols: usize) -> Mat {
        Mat {
            ring,
            rows,
            cols,
            data: vec![ring.zero(); rows * cols],
        }
    }

    pub fn identity(ring: Ring, n: usize) -> Mat {
        let mut m = Mat::zero(ring, n, n);
        for i in 0..n {
            m.set(i, i, ring.one());
        }
        m
    }

    pub fn from_fn(ring: Ring, rows: usize, cols: usize, f: impl Fn(usize, usize) -> Elem) -> Mat {
        let mut m = Mat::zero(ring, rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, f(r, c));
            }
        }
        m
    }

    pub fn get(&self, r: usize, c: usize) -> &Elem {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, x: Elem) {
        self.data[r * self.cols + c] = x;
    }

    pub fn add_to(&mut self, r: usize, c: usize, x: &Elem) {
        let cur = self.get(r, c) + x;
        self.set(r, c, cur);
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn mul(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows);
        let mut out = Mat::zero(self.ring, self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    let b = rhs.get(k, c);
                    if b.is_zero() {
                        continue;
                    }
                    out.add_to(r, c, &(a * b));
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat::from_fn(self.ring, self.rows, self.cols, |r, c| {
            self.get(r, c) + rhs.get(r, c)
        })
    }

    pub fn sub(&self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat::from_fn(self.ring, self.rows, self.cols, |r, c| {
            self.get(r, c) - rhs.get(r, c)
        })
    }

    pub fn scale(&self, x: &Elem) -> Mat {
        Mat::from_fn(self.ring, self.rows, self.cols, |r, c| self.get(r, c) * x)
    }

    pub fn neg(&self) -> Mat {
        Mat::from_fn(self.ring, self.rows, self.cols, |r, c| -self.get(r, c))
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.ring, self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    pub fn column(&self, c: usize) -> Vec<Elem> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn from_columns(ring: Ring, rows: usize, cols: &[Vec<Elem>]) -> Mat {
        let mut m = Mat::zero(ring, rows, cols.len());
        for (c, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (r, x) in col.iter().enumerate() {
                m.set(r, c, x.clone());
            }
        }
        m
    }

    /// Glue `rhs` to the right of `self`.
    pub fn hstack(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.rows, rhs.rows);
        Mat::from_fn(self.ring, self.rows, self.cols + rhs.cols, |r, c| {
            if c < self.cols {
                self.get(r, c).clone()
            } else {
                rhs.get(r, c - self.cols).clone()
            }
        })
    }
}

/// Smith normal form `u * a * v = d` with `u`, `v` unimodular and `d`
/// diagonal with each diagonal entry dividing the next.
pub struct Snf {
    pub d: Mat,
    pub u: Mat,
    pub v: Mat,
    pub rank: usize,
}

impl Snf {
    /// The invariant factors (nonzero diagonal entries) as integers.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.rank)
            .map(|k| self.d.get(k, k).as_bigint().unwrap().clone())
            .collect()
    }
}

/// Compute the Smith normal form of an integer matrix.
pub fn snf(a: &Mat) -> Snf {
    assert_eq!(a.ring, Ring::Z, "snf requires integer entries");
    let ring = Ring::Z;
    let (rows, cols) = (a.rows, a.cols);
    let mut d = a.clone();
    let mut u = Mat::identity(ring, rows);
    let mut v = Mat::identity(ring, cols);
    let big = |m: &Mat, r: usize, c: usize| m.get(r, c).as_bigint().unwrap().clone();

    let mut t = 0usize;
    while t < rows.min(cols) {
        // Pivot: minimal nonzero absolute value in the trailing block.
        let mut pivot: Option<(usize, usize, BigInt)> = None;
        for r in t..rows {
            for c in t..cols {
                let x = big(&d, r, c);
                if !x.is_zero() {
                    let ax = x.abs();
                    if pivot.as_ref().map_or(true, |(_, _, p)| ax < *p) {
                        pivot = Some((r, c, ax));
                    }
                }
            }
        }
        let Some((pr, pc, _)) = pivot else { break };
        swap_rows(&mut d, &mut u, t, pr);
        swap_cols(&mut d, &mut v, t, pc);
        loop {
            let mut dirty = false;
            for r in t + 1..rows {
                let q = big(&d, r, t).div_euclid(&big(&d, t, t));
                if !q.is_zero() {
                    row_op(&mut d, &mut u, r, t, &-q);
                }
                if !big(&d, r, t).is_zero() {
                    swap_rows(&mut d, &mut u, t, r);
                    dirty = true;
                }
            }
            for c in t + 1..cols {
                let q = big(&d, t, c).div_euclid(&big(&d, t, t));
                if !q.is_zero() {
                    col_op(&mut d, &mut v, c, t, &-q);
                }
                if !big(&d, t, c).is_zero() {
                    swap_cols(&mut d, &mut v, t, c);
                    dirty = true;
                }
            }
            if !dirty {
                // Row and column of the pivot are clear; ensure the pivot
                // divides the remaining block, else fold a bad entry in.
                let p = big(&d, t, t);
                let mut fixed = true;
                'scan: for r in t + 1..rows {
                    for c in t + 1..cols {
                        if !(big(&d, r, c) % &p).is_zero() {
                            // Add row r to row t and restart the cleanup.
                            row_op(&mut d, &mut u, t, r, &BigInt::from(1));
                            fixed = false;
                            break 'scan;
                        }
                    }
                }
                if fixed {
                    break;
                }
            }
        }
        if d.get(t, t).as_bigint().unwrap().is_negative() {
            negate_row(&mut d, &mut u, t);
        }
        t += 1;
    }
    let rank = (0..rows.min(cols))
        .take_while(|&k| !d.get(k, k).is_zero())
        .count();
    Snf { d, u, v, rank }
}

fn swap_rows(d: &mut Mat, u: &mut Mat, a: usize, b: usize) {
    if a == b {
        return;
    }
    for c in 0..d.cols {
        let (x, y) = (d.get(a, c).clone(), d.get(b, c).clone());
        d.set(a, c, y);
        d.set(b, c, x);
    }
    for c in 0..u.cols {
        let (x, y) = (u.get(a, c).clone(), u.get(b, c).clone());
        u.set(a, c, y);
        u.set(b, c, x);
    }
}

fn swap_cols(d: &mut Mat, v: &mut Mat, a: usize, b: usize) {
    if a == b {
        return;
    }
    for r in 0..d.rows {
        let (x, y) = (d.get(r, a).clone(), d.get(r, b).clone());
        d.set(r, a, y);
        d.set(r, b, x);
    }
    for r in 0..v.rows {
        let (x, y) = (v.get(r, a).clone(), v.get(r, b).clone());
        v.set(r, a, y);
        v.set(r, b, x);
    }
}

/// `row[a] += q * row[b]`, mirrored in `u`.
fn row_op(d: &mut Mat, u: &mut Mat, a: usize, b: usize, q: &BigInt) {
    let qe = Ring::Z.from_bigint(q.clone());
    for c in 0..d.cols {
        let x = d.get(a, c) + &(d.get(b, c) * &qe);
        d.set(a, c, x);
    }
    for c in 0..u.cols {
        let x = u.get(a, c) + &(u.get(b, c) * &qe);
        u.set(a, c, x);
    }
}

/// `col[a] += q * col[b]`, mirrored in `v`.
fn col_op(d: &mut Mat, v: &mut Mat, a: usize, b: usize, q: &BigInt) {
    let qe = Ring::Z.from_bigint(q.clone());
    for r in 0..d.rows {
        let x = d.get(r, a) + &(d.get(r, b) * &qe);
        d.set(r, a, x);
    }
    for r in 0..v.rows {
        let x = v.get(r, a) + &(v.get(r, b) * &qe);
        v.set(r, a, x);
    }
}

fn negate_row(d: &mut Mat, u: &mut Mat, r: usize) {
    for c in 0..d.cols {
        let x = -d.get(r, c);
        d.set(r, c, x);
    }
    for c in 0..u.cols {
        let x = -u.get(r, c);
        u.set(r, c, x);
    }
}

/// Row-reduced echelon form over a field; returns (rref, pivot columns).
pub fn rref(a: &Mat) -> (Mat, Vec<usize>) {
    assert!(a.ring.is_field(), "rref requires a field");
    let mut m = a.clone();
    let mut pivots = Vec::new();
    let mut r = 0usize;
    for c in 0..m.cols {
        if r == m.rows {
            break;
        }
        let Some(pr) = (r..m.rows).find(|&rr| !m.get(rr, c).is_zero()) else {
            continue;
        };
        for cc in 0..m.cols {
            let (x, y) = (m.get(r, cc).clone(), m.get(pr, cc).clone());
            m.set(r, cc, y);
            m.set(pr, cc, x);
        }
        let inv = m.get(r, c).inv().unwrap();
        for cc in 0..m.cols {
            let x = m.get(r, cc) * &inv;
            m.set(r, cc, x);
        }
        for rr in 0..m.rows {
            if rr != r && !m.get(rr, c).is_zero() {
                let f = m.get(rr, c).clone();
                for cc in 0..m.cols {
                    let x = m.get(rr, cc) - &(m.get(r, cc) * &f);
                    m.set(rr, cc, x);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (m, pivots)
}

/// Rank over any of the supported rings (over Z, the rank over Q).
pub fn rank(a: &Mat) -> usize {
    if a.ring.is_field() {
        rref(a).1.len()
    } else {
        snf(a).rank
    }
}

/// Kernel basis as matrix columns.  Over the integers this is a basis of the
/// full (saturated) integer kernel lattice.
pub fn kernel(a: &Mat) -> Mat {
    if a.ring.is_field() {
        let (m, pivots) = rref(a);
        let free: Vec<usize> = (0..a.cols).filter(|c| !pivots.contains(c)).collect();
        let mut k = Mat::zero(a.ring, a.cols, free.len());
        for (kc, &fc) in free.iter().enumerate() {
            k.set(fc, kc, a.ring.one());
            for (pr, &pc) in pivots.iter().enumerate() {
                k.set(pc, kc, -m.get(pr, fc));
            }
        }
        k
    } else {
        let s = snf(a);
        // a * v = u^{-1} * d, so the columns of v past the rank span ker(a).
        let cols: Vec<Vec<Elem>> = (s.rank..a.cols).map(|c| s.v.column(c)).collect();
        Mat::from_columns(a.ring, a.cols, &cols)
    }
}

/// Solve `a x = b` exactly for a matrix of right-hand sides; `None` if any
/// column has no solution over the ring.
pub fn solve(a: &Mat, b: &Mat) -> Option<Mat> {
    assert_eq!(a.rows, b.rows);
    if a.ring.is_field() {
        let (m, pivots) = rref(&a.hstack(b));
        // A pivot in the b-part means inconsistency.
        if pivots.iter().any(|&c| c >= a.cols) {
            return None;
        }
        let mut x = Mat::zero(a.ring, a.cols, b.cols);
        for (pr, &pc) in pivots.iter().enumerate() {
            for c in 0..b.cols {
                x.set(pc, c, m.get(pr, a.cols + c).clone());
            }
        }
        Some(x)
    } else {
        let s = snf(a);
        let ub = s.u.mul(b);
        let mut y = Mat::zero(a.ring, a.cols, b.cols);
        for c in 0..b.cols {
            for r in 0..a.rows {
                let val = ub.get(r, c);
                if r < s.rank {
                    let d = s.d.get(r, r).as_bigint().unwrap();
                    let (q, rem) = num_integer::Integer::div_rem(val.as_bigint().unwrap(), d);
                    if !rem.is_zero() {
                        return None;
                    }
                    y.set(r, c, Ring::Z.from_bigint(q));
                } else if !val.is_zero() {
                    return None;
                }
            }
        }
        Some(s.v.mul(&y))
    }
}

/// Full affine solution of `a x = b` over a field for a single right-hand
/// side: a particular solution plus a kernel basis.
pub fn solve_affine(a: &Mat, b: &[Elem]) -> Option<(Vec<Elem>, Mat)> {
    let bm = Mat::from_columns(a.ring, a.rows, &[b.to_vec()]);
    let x = solve(a, &bm)?;
    Some((x.column(0), kernel(a)))
}

/// Free rank and torsion (invariant factors > 1) of `ker(d_out) / im(d_in)`.
///
/// `d_out` maps this block forward, `d_in` maps the previous block in; the
/// caller guarantees `d_out * d_in = 0`.
pub fn homology_group(d_out: &Mat, d_in: &Mat) -> (usize, Vec<BigInt>) {
    assert_eq!(d_out.cols, d_in.rows);
    let n = d_out.cols;
    if d_out.ring.is_field() {
        let r_out = rank(d_out);
        let r_in = rank(d_in);
        (n - r_out - r_in, Vec::new())
    } else {
        let r_out = rank(d_out);
        let s_in = snf(d_in);
        let torsion: Vec<BigInt> = s_in
            .invariant_factors()
            .into_iter()
            .filter(|d| !num_traits::One::is_one(d))
            .collect();
        (n - r_out - s_in.rank, torsion)
    }
}

/// A homology presentation with an explicit adapted basis, for computing
/// induced maps.  The basis vectors live in the chain group; `orders[k]` is
/// zero for a free generator and `d > 1` for a Z/d generator (torsion
/// generators only occur over the integers).
pub struct HomologyBasis {
    pub ring: Ring,
    /// Chain-level representatives, one column per homology generator.
    pub reps: Mat,
    pub orders: Vec<BigInt>,
    /// Kernel basis used for coordinates.
    kernel: Mat,
    /// Expression of the adapted kernel basis: kernel * change = adapted.
    change: Mat,
    /// Orders of every adapted kernel basis vector (1 = killed, 0 = free).
    all_orders: Vec<BigInt>,
}

impl HomologyBasis {
    pub fn new(d_out: &Mat, d_in: &Mat) -> HomologyBasis {
        let ring = d_out.ring;
        let k = kernel(d_out);
        // Express the image of d_in in kernel coordinates; always solvable.
        let m = solve(&k, d_in).expect("image not inside kernel");
        if ring.is_field() {
            let (echelon, pivots) = rref(&m.transpose());
            // Column space of m = row space of m^T; quotient basis: kernel
            // coordinates not pivotal in the echelon form.
            let free: Vec<usize> = (0..k.cols).filter(|c| !pivots.contains(c)).collect();
            let mut change = Mat::zero(ring, k.cols, k.cols);
            let mut all_orders = vec![BigInt::from(1); k.cols];
            // Adapted basis: first the image directions (echelon rows), then
            // the free representatives.
            let mut col = 0usize;
            for r in 0..pivots.len() {
                for kk in 0..k.cols {
                    change.set(kk, col, echelon.get(r, kk).clone());
                }
                col += 1;
            }
            for &f in &free {
                change.set(f, col, ring.one());
                all_orders[col] = BigInt::zero();
                col += 1;
            }
            let adapted = k.mul(&change);
            let rep_cols: Vec<Vec<Elem>> = (pivots.len()..k.cols)
                .map(|c| adapted.column(c))
                .collect();
            let reps = Mat::from_columns(ring, k.rows, &rep_cols);
            let orders = vec![BigInt::zero(); rep_cols.len()];
            HomologyBasis {
                ring,
                reps,
                orders,
                kernel: k,
                change,
                all_orders,
            }
        } else {
            let s = snf(&m);
            // kernel * (v-transform of coordinates): new kernel basis k * u^{-1}
            // where u is the row transform of m.  u m v = d means the basis
            // adapted to the image is k * u^{-1}, with orders d_i.
            let u_inv = invert_unimodular(&s.u);
            let adapted = k.mul(&u_inv);
            let mut all_orders = vec![BigInt::zero(); k.cols];
            for i in 0..s.rank {
                all_orders[i] = s.d.get(i, i).as_bigint().unwrap().clone();
            }
            let keep: Vec<usize> = (0..k.cols)
                .filter(|&i| !num_traits::One::is_one(&all_orders[i]))
                .collect();
            let rep_cols: Vec<Vec<Elem>> = keep.iter().map(|&c| adapted.column(c)).collect();
            let reps = Mat::from_columns(ring, k.rows, &rep_cols);
            let orders: Vec<BigInt> = keep.iter().map(|&c| all_orders[c].clone()).collect();
            HomologyBasis {
                ring,
                reps,
                orders,
                kernel: k,
                change: u_inv,
                all_orders,
            }
        }
    }

    /// Number of homology generators (free and torsion).
    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    /// Coordinates of a cycle in the adapted homology basis, with torsion
    /// coordinates reduced mod their order.  `None` if the vector is not a
    /// cycle or (over Z) not expressible (which would indicate a bug).
    pub fn project(&self, cycle: &[Elem]) -> Option<Vec<Elem>> {
        let bm = Mat::from_columns(self.ring, self.kernel.rows, &[cycle.to_vec()]);
        let y = solve(&self.kernel, &bm)?;
        // Coordinates in the adapted basis: change^{-1} would be needed in
        // general; over a field `change` is square invertible, over Z it is
        // unimodular, so solve instead of inverting.
        let coords = solve(&self.change, &y)?;
        let mut out = Vec::new();
        for (i, ord) in self.all_orders.iter().enumerate() {
            let x = coords.get(i, 0);
            if num_traits::One::is_one(ord) {
                continue; // killed generator, coordinate irrelevant
            }
            if ord.is_zero() {
                out.push(x.clone());
            } else {
                // torsion: reduce mod ord
                match self.ring {
                    Ring::Z => {
                        let r = num_integer::Integer::mod_floor(x.as_bigint().unwrap(), ord);
                        out.push(Ring::Z.from_bigint(r));
                    }
                    _ => out.push(x.clone()),
                }
            }
        }
        Some(out)
    }
}

/// Invert a unimodular integer matrix (used for SNF-adapted bases).
pub fn invert_unimodular(u: &Mat) -> Mat {
    solve(u, &Mat::identity(u.ring, u.rows)).expect("matrix not unimodular")
}
