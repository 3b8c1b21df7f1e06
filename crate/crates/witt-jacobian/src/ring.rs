//! Commutative ring abstraction used by polynomials, circuits and Witt vectors.
//!
//! Rings follow the ring-object pattern: a cheap-to-clone context value owns
//! the structure constants and elements are passed to its methods. Containers
//! (polynomials, circuits, Witt vectors) store one copy of the ring tag.

use num::bigint::Sign;
use num::{BigInt, BigRational, One, Zero};
use std::fmt::Debug;

use crate::error::{Error, Result};

pub trait Ring: Clone + PartialEq + Debug {
    type Elem: Clone + PartialEq + Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    fn is_zero(&self, a: &Self::Elem) -> bool {
        *a == self.zero()
    }

    /// Additive order of 1, or 0 in characteristic zero.
    fn characteristic(&self) -> u128;

    /// Image of an integer under the unique map Z -> R (double-and-add on 1;
    /// no canonical integer embedding is assumed).
    #[allow(clippy::wrong_self_convention)]
    fn from_bigint(&self, n: &BigInt) -> Self::Elem {
        let mag = n.magnitude();
        let mut acc = self.zero();
        for i in (0..mag.bits()).rev() {
            acc = self.add(&acc, &acc);
            if mag.bit(i) {
                acc = self.add(&acc, &self.one());
            }
        }
        if n.sign() == Sign::Minus {
            acc = self.neg(&acc);
        }
        acc
    }

    #[allow(clippy::wrong_self_convention)]
    fn from_i64(&self, n: i64) -> Self::Elem {
        self.from_bigint(&BigInt::from(n))
    }

    fn pow(&self, a: &Self::Elem, e: u64) -> Self::Elem {
        let mut acc = self.one();
        let mut base = a.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    fn elem_string(&self, a: &Self::Elem) -> String;

    fn parse_elem(&self, s: &str) -> Result<Self::Elem>;

    /// One Witt-vector coordinate operation over this ring. The default
    /// evaluates the universal polynomials; rings with a faster equivalent
    /// route may override (the two are cross-checked in tests).
    fn witt_op(
        &self,
        p: u64,
        op: crate::witt::WittOp,
        xs: &[Self::Elem],
        ys: &[Self::Elem],
    ) -> Result<Vec<Self::Elem>>
    where
        Self: Sized,
    {
        crate::witt::witt_op_universal(self, p, op, xs, ys)
    }
}

/// The ring of integers with arbitrary-precision elements.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct IntRing;

impl Ring for IntRing {
    type Elem = BigInt;

    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        BigInt::one()
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn neg(&self, a: &BigInt) -> BigInt {
        -a
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn is_zero(&self, a: &BigInt) -> bool {
        a.is_zero()
    }
    fn characteristic(&self) -> u128 {
        0
    }
    fn from_bigint(&self, n: &BigInt) -> BigInt {
        n.clone()
    }
    fn elem_string(&self, a: &BigInt) -> String {
        a.to_string()
    }
    fn parse_elem(&self, s: &str) -> Result<BigInt> {
        s.trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad integer {s:?}")))
    }
}

/// The field of rationals, used while deriving universal Witt polynomials.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct RatRing;

impl Ring for RatRing {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn characteristic(&self) -> u128 {
        0
    }
    fn from_bigint(&self, n: &BigInt) -> BigRational {
        BigRational::from_integer(n.clone())
    }
    fn elem_string(&self, a: &BigRational) -> String {
        a.to_string()
    }
    fn parse_elem(&self, s: &str) -> Result<BigRational> {
        s.trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad rational {s:?}")))
    }
}

impl RatRing {
    /// Exact division, erroring on division by zero.
    pub fn div(&self, a: &BigRational, b: &BigRational) -> Result<BigRational> {
        if b.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(a / b)
    }

    pub fn is_integer(&self, a: &BigRational) -> bool {
        a.denom().is_one() || a.denom() == &BigInt::from(-1)
    }
}
