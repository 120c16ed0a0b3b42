//! Exact coefficient rings: the integers, the rationals, and prime fields.
//!
//! A [`Ring`] is a small tag; a [`Elem`] carries its ring together with a
//! canonical exact value (arbitrary-precision integer, reduced fraction, or
//! residue in `[0, p)`).  Arithmetic between elements of different rings is a
//! programming error and panics.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// One of the supported coefficient rings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ring {
    /// The integers.
    Z,
    /// The rationals.
    Q,
    /// The field with `p` elements, `p` prime.
    Fp(u64),
}

impl Ring {
    /// Parse a ring spec: `"Z"`, `"Q"`, or `"Fp:<prime>"`.
    pub fn parse(spec: &str) -> Result<Ring> {
        match spec {
            "Z" => Ok(Ring::Z),
            "Q" => Ok(Ring::Q),
            _ => {
                if let Some(p) = spec.strip_prefix("Fp:") {
                    let p: u64 = p
                        .parse()
                        .map_err(|_| Error::UnknownRing(spec.to_string()))?;
                    if !is_prime(p) {
                        return Err(Error::NonPrimeModulus(p));
                    }
                    Ok(Ring::Fp(p))
                } else {
                    Err(Error::UnknownRing(spec.to_string()))
                }
            }
        }
    }

    pub fn is_field(self) -> bool {
        !matches!(self, Ring::Z)
    }

    pub fn zero(self) -> Elem {
        self.from_i64(0)
    }

    pub fn one(self) -> Elem {
        self.from_i64(1)
    }

    pub fn from_i64(self, n: i64) -> Elem {
        let val = match self {
            Ring::Z => Val::Int(BigInt::from(n)),
            Ring::Q => Val::Rat(BigRational::from(BigInt::from(n))),
            Ring::Fp(p) => Val::Res(n.rem_euclid(p as i64) as u64),
        };
        Elem { ring: self, val }
    }

    /// Parse an element literal: integers `-3`, rationals `3/2`, residues
    /// `4 mod 7`.  The literal must be valid for this ring (a residue literal
    /// must name this ring's modulus; plain integers are accepted everywhere).
    pub fn elem(self, text: &str) -> Result<Elem> {
        let text = text.trim();
        let bad = || Error::BadElem(text.to_string());
        if let Some((lhs, rhs)) = text.split_once("mod") {
            let Ring::Fp(p) = self else { return Err(bad()) };
            let m: u64 = rhs.trim().parse().map_err(|_| bad())?;
            if m != p {
                return Err(bad());
            }
            let n: i64 = lhs.trim().parse().map_err(|_| bad())?;
            return Ok(self.from_i64(n));
        }
        if let Some((num, den)) = text.split_once('/') {
            if self != Ring::Q {
                return Err(bad());
            }
            let num: BigInt = num.trim().parse().map_err(|_| bad())?;
            let den: BigInt = den.trim().parse().map_err(|_| bad())?;
            if den.is_zero() {
                return Err(bad());
            }
            return Ok(Elem {
                ring: self,
                val: Val::Rat(BigRational::new(num, den)),
            });
        }
        let n: BigInt = text.parse().map_err(|_| bad())?;
        Ok(self.from_bigint(n))
    }

    pub fn from_bigint(self, n: BigInt) -> Elem {
        let val = match self {
            Ring::Z => Val::Int(n),
            Ring::Q => Val::Rat(BigRational::from(n)),
            Ring::Fp(p) => {
                let r = n % BigInt::from(p);
                let r = if r.is_negative() { r + BigInt::from(p) } else { r };
                Val::Res(u64::try_from(r).unwrap())
            }
        };
        Elem { ring: self, val }
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ring::Z => write!(f, "Z"),
            Ring::Q => write!(f, "Q"),
            Ring::Fp(p) => write!(f, "Fp:{p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Val {
    Int(BigInt),
    Rat(BigRational),
    Res(u64),
}

/// An exact element of one of the supported rings.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Elem {
    ring: Ring,
    val: Val,
}

impl Elem {
    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn is_zero(&self) -> bool {
        match &self.val {
            Val::Int(n) => n.is_zero(),
            Val::Rat(q) => q.is_zero(),
            Val::Res(r) => *r == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match &self.val {
            Val::Int(n) => n.is_one(),
            Val::Rat(q) => q.is_one(),
            Val::Res(r) => *r == 1,
        }
    }

    /// True iff the element is a unit of its ring.
    pub fn is_unit(&self) -> bool {
        match &self.val {
            Val::Int(n) => n.abs().is_one(),
            _ => !self.is_zero(),
        }
    }

    /// Multiplicative inverse, if the element is a unit.
    pub fn inv(&self) -> Option<Elem> {
        match &self.val {
            Val::Int(n) => n.abs().is_one().then(|| self.clone()),
            Val::Rat(q) => (!q.is_zero()).then(|| Elem {
                ring: self.ring,
                val: Val::Rat(q.recip()),
            }),
            Val::Res(r) => {
                let Ring::Fp(p) = self.ring else { unreachable!() };
                (*r != 0).then(|| Elem {
                    ring: self.ring,
                    val: Val::Res(mod_pow(*r, p - 2, p)),
                })
            }
        }
    }

    /// The underlying integer, if the element is an integer (for display and
    /// for exact integer algorithms).
    pub fn as_bigint(&self) -> Option<&BigInt> {
        match &self.val {
            Val::Int(n) => Some(n),
            _ => None,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match &self.val {
            Val::Rat(q) => Some(q),
            _ => None,
        }
    }

    pub fn as_residue(&self) -> Option<u64> {
        match &self.val {
            Val::Res(r) => Some(*r),
            _ => None,
        }
    }
}

fn check(a: &Elem, b: &Elem) {
    assert_eq!(a.ring, b.ring, "mixed-ring arithmetic");
}

impl Add for &Elem {
    type Output = Elem;
    fn add(self, rhs: &Elem) -> Elem {
        check(self, rhs);
        let val = match (&self.val, &rhs.val) {
            (Val::Int(a), Val::Int(b)) => Val::Int(a + b),
            (Val::Rat(a), Val::Rat(b)) => Val::Rat(a + b),
            (Val::Res(a), Val::Res(b)) => {
                let Ring::Fp(p) = self.ring else { unreachable!() };
                Val::Res(((*a as u128 + *b as u128) % p as u128) as u64)
            }
            _ => unreachable!(),
        };
        Elem {
            ring: self.ring,
            val,
        }
    }
}

impl Sub for &Elem {
    type Output = Elem;
    fn sub(self, rhs: &Elem) -> Elem {
        self + &-rhs
    }
}

impl Mul for &Elem {
    type Output = Elem;
    fn mul(self, rhs: &Elem) -> Elem {
        check(self, rhs);
        let val = match (&self.val, &rhs.val) {
            (Val::Int(a), Val::Int(b)) => Val::Int(a * b),
            (Val::Rat(a), Val::Rat(b)) => Val::Rat(a * b),
            (Val::Res(a), Val::Res(b)) => {
                let Ring::Fp(p) = self.ring else { unreachable!() };
                Val::Res(((*a as u128 * *b as u128) % p as u128) as u64)
            }
            _ => unreachable!(),
        };
        Elem {
            ring: self.ring,
            val,
        }
    }
}

impl Neg for &Elem {
    type Output = Elem;
    fn neg(self) -> Elem {
        let val = match &self.val {
            Val::Int(a) => Val::Int(-a),
            Val::Rat(a) => Val::Rat(-a),
            Val::Res(a) => {
                let Ring::Fp(p) = self.ring else { unreachable!() };
                Val::Res(if *a == 0 { 0 } else { p - a })
            }
        };
        Elem {
            ring: self.ring,
            val,
        }
    }
}

impl Add for Elem {
    type Output = Elem;
    fn add(self, rhs: Elem) -> Elem {
        &self + &rhs
    }
}

impl Sub for Elem {
    type Output = Elem;
    fn sub(self, rhs: Elem) -> Elem {
        &self - &rhs
    }
}

impl Mul for Elem {
    type Output = Elem;
    fn mul(self, rhs: Elem) -> Elem {
        &self * &rhs
    }
}

impl Neg for Elem {
    type Output = Elem;
    fn neg(self) -> Elem {
        -&self
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.val {
            Val::Int(n) => write!(f, "{n}"),
            Val::Rat(q) => {
                if q.denom().is_one() {
                    write!(f, "{}", q.numer())
                } else {
                    write!(f, "{}/{}", q.numer(), q.denom())
                }
            }
            Val::Res(r) => {
                let Ring::Fp(p) = self.ring else { unreachable!() };
                write!(f, "{r} mod {p}")
            }
        }
    }
}

fn mod_pow(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc: u128 = 1;
    let mut b: u128 = base as u128 % p as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % p as u128;
        }
        b = b * b % p as u128;
        exp >>= 1;
    }
    base = acc as u64;
    base
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}
