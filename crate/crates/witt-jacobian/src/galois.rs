//! Galois rings G_{m,t} = (Z/p^m)[x]/(h), the unramified lifts of F_{p^t}.
//!
//! h is the coordinatewise lift of the field modulus. The distinguished unit
//! xi is the Teichmueller lift of the class of x, computed by iterating
//! z -> z^{p^t}; it is a primitive (p^t - 1)-th root of unity and reduces to
//! the field generator mod p.

use smallvec::smallvec;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fq::{Coords, FqContext, FqElem};
use crate::ring::Ring;

/// p^m must stay below this so u128 products never overflow.
const MAX_MODULUS: u64 = 1 << 62;

#[derive(Debug)]
struct GrData {
    base: FqContext,
    m: usize,
    /// p^m
    pm: u64,
    /// Monic lift of the field modulus, t+1 coefficients mod p^m.
    lift_modulus: Vec<u64>,
    xi: Coords,
}

/// Context for the Galois ring G_{m,t} of characteristic p^m and size p^{mt}.
#[derive(Clone, Debug)]
pub struct GrContext {
    data: Arc<GrData>,
}

impl PartialEq for GrContext {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.data, &other.data)
            || (self.data.base == other.data.base && self.data.m == other.data.m)
    }
}
impl Eq for GrContext {}

/// Element of G_{m,t}; coordinates in the power basis, entries in [0, p^m).
#[derive(Clone, Debug)]
pub struct GrElem {
    ctx: GrContext,
    coords: Coords,
}

impl PartialEq for GrElem {
    fn eq(&self, other: &Self) -> bool {
        self.ctx == other.ctx && self.coords == other.coords
    }
}
impl Eq for GrElem {}

impl Hash for GrElem {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.coords.hash(state);
    }
}

impl GrContext {
    /// Builds G_{m,t} over the given residue field at precision m.
    pub fn new(base: &FqContext, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("precision m must be at least 1".into()));
        }
        let p = base.p();
        let mut pm: u64 = 1;
        for _ in 0..m {
            pm = pm
                .checked_mul(p)
                .filter(|&v| v <= MAX_MODULUS)
                .ok_or_else(|| Error::TooLarge(format!("p^m = {p}^{m} exceeds the modulus cap")))?;
        }
        let lift_modulus: Vec<u64> = base.modulus().to_vec();
        let data = GrData {
            base: base.clone(),
            m,
            pm,
            lift_modulus,
            xi: Coords::new(),
        };
        let mut ctx = GrContext { data: Arc::new(data) };
        // xi = Teichmueller lift of the class of x; m - 1 iterations of
        // z -> z^{p^t} starting from the coordinatewise lift suffice, each
        // gaining one p-adic digit of the fixed point.
        let class_x = ctx.lift(&base.generator())?;
        let xi = ctx.teichmuller_iterate(class_x);
        let data = GrData {
            base: base.clone(),
            m,
            pm,
            lift_modulus: base.modulus().to_vec(),
            xi: xi.coords,
        };
        ctx = GrContext { data: Arc::new(data) };
        Ok(ctx)
    }

    pub fn base(&self) -> &FqContext {
        &self.data.base
    }

    pub fn p(&self) -> u64 {
        self.data.base.p()
    }

    pub fn t(&self) -> usize {
        self.data.base.t()
    }

    /// Precision m: the ring has characteristic p^m.
    pub fn precision(&self) -> usize {
        self.data.m
    }

    /// p^m as an integer.
    pub fn char_pm(&self) -> u64 {
        self.data.pm
    }

    /// The Teichmueller unit of order p^t - 1 lifting the field generator.
    pub fn xi(&self) -> GrElem {
        GrElem {
            ctx: self.clone(),
            coords: self.data.xi.clone(),
        }
    }

    pub fn zero_elem(&self) -> GrElem {
        GrElem {
            ctx: self.clone(),
            coords: smallvec![0; self.t()],
        }
    }

    pub fn one_elem(&self) -> GrElem {
        self.scalar(1)
    }

    pub fn scalar(&self, n: u64) -> GrElem {
        let mut coords: Coords = smallvec![0; self.t()];
        coords[0] = n % self.data.pm;
        GrElem {
            ctx: self.clone(),
            coords,
        }
    }

    pub fn elem(&self, coords: &[u64]) -> Result<GrElem> {
        if coords.len() != self.t() {
            return Err(Error::ArityMismatch {
                expected: self.t(),
                got: coords.len(),
            });
        }
        Ok(GrElem {
            ctx: self.clone(),
            coords: coords.iter().map(|&c| c % self.data.pm).collect(),
        })
    }

    /// Coordinatewise lift of a residue-field element.
    pub fn lift(&self, a: &FqElem) -> Result<GrElem> {
        if *a.ctx() != self.data.base {
            return Err(Error::ContextMismatch("element not in the residue field"));
        }
        Ok(GrElem {
            ctx: self.clone(),
            coords: Coords::from_slice(a.coords()),
        })
    }

    /// Reduction modulo the maximal ideal (p).
    pub fn reduce(&self, a: &GrElem) -> FqElem {
        assert!(a.ctx == *self, "element from a different Galois ring");
        let p = self.p();
        let coords: Vec<u64> = a.coords.iter().map(|&c| c % p).collect();
        self.data.base.elem(&coords).unwrap()
    }

    /// Teichmueller lift: the unique root of z^{p^t} = z reducing to a.
    pub fn teichmuller(&self, a: &FqElem) -> Result<GrElem> {
        let z = self.lift(a)?;
        Ok(self.teichmuller_iterate(z))
    }

    fn teichmuller_iterate(&self, mut z: GrElem) -> GrElem {
        let q = self.data.base.size();
        for _ in 1..self.data.m {
            z = z.pow(q);
        }
        z
    }

    /// All ring elements in coordinate-lex order (p^{mt} of them).
    pub fn elements(&self) -> impl Iterator<Item = GrElem> + '_ {
        let t = self.t();
        let pm = self.data.pm;
        let total = (0..t).try_fold(1u64, |acc, _| acc.checked_mul(pm));
        let total = total.expect("ring too large to enumerate");
        (0..total).map(move |mut k| {
            let mut coords: Coords = smallvec![0; t];
            for c in coords.iter_mut() {
                *c = k % pm;
                k /= pm;
            }
            GrElem {
                ctx: self.clone(),
                coords,
            }
        })
    }

    #[allow(clippy::wrong_self_convention)]
    pub(crate) fn from_coords(&self, coords: Coords) -> GrElem {
        debug_assert_eq!(coords.len(), self.t());
        GrElem {
            ctx: self.clone(),
            coords,
        }
    }

    pub(crate) fn raw_add(&self, a: &[u64], b: &[u64]) -> Coords {
        let pm = self.data.pm;
        a.iter().zip(b).map(|(&x, &y)| (x + y) % pm).collect()
    }

    pub(crate) fn raw_sub(&self, a: &[u64], b: &[u64]) -> Coords {
        let pm = self.data.pm;
        a.iter().zip(b).map(|(&x, &y)| (x + pm - y) % pm).collect()
    }

    pub(crate) fn raw_neg(&self, a: &[u64]) -> Coords {
        let pm = self.data.pm;
        a.iter().map(|&x| (pm - x) % pm).collect()
    }

    pub(crate) fn raw_scale(&self, c: u64, a: &[u64]) -> Coords {
        let pm = self.data.pm as u128;
        a.iter()
            .map(|&x| ((c as u128 * x as u128) % pm) as u64)
            .collect()
    }

    pub(crate) fn raw_mul(&self, a: &[u64], b: &[u64]) -> Coords {
        let t = self.t();
        let pm = self.data.pm as u128;
        let h = &self.data.lift_modulus;
        let mut r = vec![0u128; 2 * t - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                r[i + j] = (r[i + j] + x as u128 * y as u128) % pm;
            }
        }
        // reduce modulo the monic lift of the field modulus
        for k in (t..2 * t - 1).rev() {
            let c = r[k];
            if c != 0 {
                for j in 0..t {
                    let sub = (c * h[j] as u128) % pm;
                    r[k - t + j] = (r[k - t + j] + pm - sub) % pm;
                }
                r[k] = 0;
            }
        }
        r[..t].iter().map(|&x| x as u64).collect()
    }
}

impl GrElem {
    pub fn ctx(&self) -> &GrContext {
        &self.ctx
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    fn same_ctx(&self, other: &GrElem) {
        assert!(
            self.ctx == other.ctx,
            "Galois ring elements from different contexts"
        );
    }

    pub fn add(&self, other: &GrElem) -> GrElem {
        self.same_ctx(other);
        self.ctx.from_coords(self.ctx.raw_add(&self.coords, &other.coords))
    }

    pub fn sub(&self, other: &GrElem) -> GrElem {
        self.same_ctx(other);
        self.ctx.from_coords(self.ctx.raw_sub(&self.coords, &other.coords))
    }

    pub fn neg(&self) -> GrElem {
        self.ctx.from_coords(self.ctx.raw_neg(&self.coords))
    }

    pub fn mul(&self, other: &GrElem) -> GrElem {
        self.same_ctx(other);
        self.ctx.from_coords(self.ctx.raw_mul(&self.coords, &other.coords))
    }

    pub fn scale(&self, c: u64) -> GrElem {
        self.ctx.from_coords(self.ctx.raw_scale(c, &self.coords))
    }

    pub fn pow(&self, mut e: u64) -> GrElem {
        let mut acc = self.ctx.one_elem();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    /// True iff the reduction mod p is nonzero.
    pub fn is_unit(&self) -> bool {
        let p = self.ctx.p();
        self.coords.iter().any(|&c| c % p != 0)
    }

    /// Inverse of a unit by Hensel lifting from the residue field.
    pub fn unit_inv(&self) -> Result<GrElem> {
        if !self.is_unit() {
            return Err(Error::NonUnit);
        }
        let red = self.ctx.reduce(self);
        let mut b = self.ctx.lift(&red.inv().expect("unit reduces to a unit"))?;
        // each step doubles the p-adic precision of the inverse
        let two = self.ctx.scalar(2);
        let mut bits = 1usize;
        while bits < self.ctx.precision() {
            let corr = two.sub(&self.mul(&b));
            b = b.mul(&corr);
            bits *= 2;
        }
        debug_assert_eq!(self.mul(&b), self.ctx.one_elem());
        Ok(b)
    }

    /// p-adic valuation: the largest v <= m with p^v dividing the element,
    /// so 0 maps to m.
    pub fn val_p(&self) -> usize {
        let p = self.ctx.p();
        let m = self.ctx.precision();
        let mut best = m;
        for &c in &self.coords {
            if c == 0 {
                continue;
            }
            let mut v = 0;
            let mut c = c;
            while c % p == 0 {
                c /= p;
                v += 1;
            }
            best = best.min(v);
        }
        best
    }

    /// Exact division by p^k; the input must be divisible coordinatewise.
    pub(crate) fn exact_div_p_pow(&self, k: usize) -> GrElem {
        let mut pk: u64 = 1;
        for _ in 0..k {
            pk *= self.ctx.p();
        }
        let coords: Coords = self
            .coords
            .iter()
            .map(|&c| {
                assert!(c % pk == 0, "ghost numerator not divisible by p^{k}");
                c / pk
            })
            .collect();
        self.ctx.from_coords(coords)
    }
}

// elements of Z/p^m print bare; proper Galois rings as [c0,..,c_{t-1}]
impl fmt::Display for GrElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coords.len() == 1 {
            return write!(f, "{}", self.coords[0]);
        }
        write!(f, "[")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

impl Ring for GrContext {
    type Elem = GrElem;

    fn zero(&self) -> GrElem {
        self.zero_elem()
    }
    fn one(&self) -> GrElem {
        self.one_elem()
    }
    fn add(&self, a: &GrElem, b: &GrElem) -> GrElem {
        a.add(b)
    }
    fn neg(&self, a: &GrElem) -> GrElem {
        a.neg()
    }
    fn mul(&self, a: &GrElem, b: &GrElem) -> GrElem {
        a.mul(b)
    }
    fn is_zero(&self, a: &GrElem) -> bool {
        a.is_zero()
    }
    fn characteristic(&self) -> u128 {
        self.data.pm as u128
    }
    fn from_bigint(&self, n: &num::BigInt) -> GrElem {
        let pm = num::BigInt::from(self.data.pm);
        let r = ((n % &pm) + &pm) % &pm;
        let r: u64 = r.try_into().unwrap();
        self.scalar(r)
    }
    fn elem_string(&self, a: &GrElem) -> String {
        a.to_string()
    }
    fn parse_elem(&self, s: &str) -> Result<GrElem> {
        let s = s.trim();
        if let Some(body) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let mut coords = Vec::new();
            for part in body.split(',') {
                let part = part.trim();
                if part.is_empty() {
                    continue;
                }
                let v: i64 = part
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad coordinate {part:?}")))?;
                let pm = self.data.pm as i128;
                coords.push((((v as i128 % pm) + pm) % pm) as u64);
            }
            self.elem(&coords)
        } else {
            let v: i64 = s
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad ring element {s:?}")))?;
            Ok(self.from_bigint(&num::BigInt::from(v)))
        }
    }
}
