//! Finite fields F_{p^t} in the power basis of a primitive modulus.
//!
//! A context owns p, t, the modulus and a generator; elements are coordinate
//! vectors of length t with entries in [0, p). Construction is deterministic:
//! the modulus is the lexicographically smallest monic irreducible polynomial
//! whose residue class of x is primitive, and the generator is that class.

use smallvec::{smallvec, SmallVec};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ring::Ring;

pub(crate) type Coords = SmallVec<[u64; 4]>;

/// Largest field size we are willing to search exhaustively.
const MAX_FIELD_SIZE: u64 = 1 << 20;

#[derive(Debug)]
struct FqData {
    p: u64,
    t: usize,
    /// Monic modulus, t+1 coefficients, little-endian.
    modulus: Vec<u64>,
    /// Coordinates of the residue class of x (a primitive element).
    generator: Coords,
}

/// Context for the field F_{p^t}.
#[derive(Clone, Debug)]
pub struct FqContext {
    data: Arc<FqData>,
}

impl PartialEq for FqContext {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.data, &other.data)
            || (self.data.p == other.data.p
                && self.data.t == other.data.t
                && self.data.modulus == other.data.modulus)
    }
}
impl Eq for FqContext {}

/// Element of F_{p^t}; coordinates in the power basis 1, x, ..., x^{t-1}.
#[derive(Clone, Debug)]
pub struct FqElem {
    ctx: FqContext,
    coords: Coords,
}

impl PartialEq for FqElem {
    fn eq(&self, other: &Self) -> bool {
        self.ctx == other.ctx && self.coords == other.coords
    }
}
impl Eq for FqElem {}

impl Hash for FqElem {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.coords.hash(state);
    }
}

pub(crate) fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn factor_u64(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

// Dense univariate arithmetic over Z/p used for modulus search and reduction.

fn upoly_rem(r: &mut Vec<u64>, g: &[u64], p: u64) {
    // g monic; reduces r in place to degree < deg g
    let dg = g.len() - 1;
    while r.len() > dg {
        let c = *r.last().unwrap();
        let k = r.len() - 1;
        if c != 0 {
            for j in 0..dg {
                let sub = (c as u128 * g[j] as u128) % p as u128;
                r[k - dg + j] = ((r[k - dg + j] as u128 + p as u128 - sub) % p as u128) as u64;
            }
        }
        r.pop();
    }
}

fn upoly_mulmod(a: &[u64], b: &[u64], h: &[u64], p: u64) -> Coords {
    let t = h.len() - 1;
    let mut r = vec![0u64; 2 * t - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            r[i + j] = ((r[i + j] as u128 + x as u128 * y as u128) % p as u128) as u64;
        }
    }
    upoly_rem(&mut r, h, p);
    r.resize(t, 0);
    Coords::from_slice(&r)
}

fn upoly_powmod(a: &[u64], mut e: u64, h: &[u64], p: u64) -> Coords {
    let t = h.len() - 1;
    let mut acc: Coords = smallvec![0; t];
    acc[0] = 1;
    let mut base = Coords::from_slice(a);
    while e > 0 {
        if e & 1 == 1 {
            acc = upoly_mulmod(&acc, &base, h, p);
        }
        e >>= 1;
        if e > 0 {
            base = upoly_mulmod(&base, &base, h, p);
        }
    }
    acc
}

/// Monic h of degree t is irreducible over F_p iff it has no monic factor of
/// degree at most t/2, checked by trial division.
fn upoly_irreducible(h: &[u64], p: u64) -> bool {
    let t = h.len() - 1;
    for d in 1..=t / 2 {
        let mut g = vec![0u64; d + 1];
        g[d] = 1;
        loop {
            let mut r = h.to_vec();
            upoly_rem(&mut r, &g, p);
            if r.iter().take(d).all(|&c| c == 0) {
                return false;
            }
            // next candidate tail in lex order
            let mut k = 0;
            loop {
                if k == d {
                    break;
                }
                g[k] += 1;
                if g[k] < p {
                    break;
                }
                g[k] = 0;
                k += 1;
            }
            if k == d {
                break;
            }
        }
    }
    true
}

impl FqContext {
    /// Builds F_{p^t}. Deterministic for fixed (p, t).
    pub fn new(p: u64, t: usize) -> Result<Self> {
        if !is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        if t == 0 {
            return Err(Error::InvalidInput("t must be at least 1".into()));
        }
        let mut size: u64 = 1;
        for _ in 0..t {
            size = size
                .checked_mul(p)
                .filter(|&s| s <= MAX_FIELD_SIZE)
                .ok_or(Error::FieldTooLarge { p, t })?;
        }
        let order = size - 1;
        let order_factors = factor_u64(order);
        let one: Coords = {
            let mut c: Coords = smallvec![0; t];
            c[0] = 1;
            c
        };
        // candidate moduli in lex order on (c_0, ..., c_{t-1})
        let mut tail = vec![0u64; t];
        loop {
            let mut h = tail.clone();
            h.push(1);
            if upoly_irreducible(&h, p) {
                let class_x: Coords = if t >= 2 {
                    let mut c: Coords = smallvec![0; t];
                    c[1] = 1;
                    c
                } else {
                    smallvec![(p - h[0] % p) % p]
                };
                let primitive = if order == 1 {
                    class_x == one
                } else {
                    upoly_powmod(&class_x, order, &h, p) == one
                        && order_factors
                            .iter()
                            .all(|&q| upoly_powmod(&class_x, order / q, &h, p) != one)
                };
                if primitive {
                    let data = FqData {
                        p,
                        t,
                        modulus: h,
                        generator: class_x,
                    };
                    return Ok(FqContext { data: Arc::new(data) });
                }
            }
            let mut k = 0;
            loop {
                if k == t {
                    break;
                }
                tail[k] += 1;
                if tail[k] < p {
                    break;
                }
                tail[k] = 0;
                k += 1;
            }
            if k == t {
                return Err(Error::NoPrimitivePolynomial { p, t });
            }
        }
    }

    pub fn p(&self) -> u64 {
        self.data.p
    }

    pub fn t(&self) -> usize {
        self.data.t
    }

    /// Field size p^t.
    pub fn size(&self) -> u64 {
        self.data.p.pow(self.data.t as u32)
    }

    /// Multiplicative group order p^t - 1.
    pub fn unit_order(&self) -> u64 {
        self.size() - 1
    }

    pub fn modulus(&self) -> &[u64] {
        &self.data.modulus
    }

    /// The residue class of x, a primitive element.
    pub fn generator(&self) -> FqElem {
        FqElem {
            ctx: self.clone(),
            coords: self.data.generator.clone(),
        }
    }

    pub fn elem(&self, coords: &[u64]) -> Result<FqElem> {
        if coords.len() != self.data.t {
            return Err(Error::ArityMismatch {
                expected: self.data.t,
                got: coords.len(),
            });
        }
        Ok(FqElem {
            ctx: self.clone(),
            coords: coords.iter().map(|&c| c % self.data.p).collect(),
        })
    }

    /// The image of an integer residue in the prime field inside F_{p^t}.
    pub fn scalar(&self, n: u64) -> FqElem {
        let mut coords: Coords = smallvec![0; self.data.t];
        coords[0] = n % self.data.p;
        FqElem {
            ctx: self.clone(),
            coords,
        }
    }

    /// All field elements in coordinate-lex order, 0 first.
    pub fn elements(&self) -> impl Iterator<Item = FqElem> + '_ {
        let t = self.data.t;
        let p = self.data.p;
        let total = self.size();
        (0..total).map(move |mut k| {
            let mut coords: Coords = smallvec![0; t];
            for c in coords.iter_mut() {
                *c = k % p;
                k /= p;
            }
            FqElem {
                ctx: self.clone(),
                coords,
            }
        })
    }

    /// Powers 1, g, g^2, ... of the generator (the nonzero elements).
    pub fn generator_powers(&self) -> impl Iterator<Item = FqElem> + '_ {
        let mut cur = self.one();
        let g = self.generator();
        (0..self.unit_order()).map(move |_| {
            let out = cur.clone();
            cur = cur.mul(&g);
            out
        })
    }

    pub(crate) fn raw_add(&self, a: &[u64], b: &[u64]) -> Coords {
        let p = self.data.p;
        a.iter().zip(b).map(|(&x, &y)| (x + y) % p).collect()
    }

    pub(crate) fn raw_sub(&self, a: &[u64], b: &[u64]) -> Coords {
        let p = self.data.p;
        a.iter().zip(b).map(|(&x, &y)| (x + p - y) % p).collect()
    }

    pub(crate) fn raw_neg(&self, a: &[u64]) -> Coords {
        let p = self.data.p;
        a.iter().map(|&x| (p - x) % p).collect()
    }

    pub(crate) fn raw_mul(&self, a: &[u64], b: &[u64]) -> Coords {
        upoly_mulmod(a, b, &self.data.modulus, self.data.p)
    }

    pub(crate) fn raw_pow(&self, a: &[u64], e: u64) -> Coords {
        upoly_powmod(a, e, &self.data.modulus, self.data.p)
    }

    pub(crate) fn raw_inv(&self, a: &[u64]) -> Result<Coords> {
        if a.iter().all(|&c| c == 0) {
            return Err(Error::DivisionByZero);
        }
        // a^(p^t - 2); for p^t = 2 the only unit is 1 and the exponent is 0
        Ok(self.raw_pow(a, self.unit_order() - 1))
    }

    #[allow(clippy::wrong_self_convention)]
    pub(crate) fn from_coords(&self, coords: Coords) -> FqElem {
        debug_assert!(coords.len() == self.data.t);
        FqElem {
            ctx: self.clone(),
            coords,
        }
    }
}

impl FqElem {
    pub fn ctx(&self) -> &FqContext {
        &self.ctx
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    fn same_ctx(&self, other: &FqElem) {
        assert!(
            self.ctx == other.ctx,
            "field elements from different contexts"
        );
    }

    pub fn add(&self, other: &FqElem) -> FqElem {
        self.same_ctx(other);
        self.ctx.from_coords(self.ctx.raw_add(&self.coords, &other.coords))
    }

    pub fn sub(&self, other: &FqElem) -> FqElem {
        self.same_ctx(other);
        self.ctx.from_coords(self.ctx.raw_sub(&self.coords, &other.coords))
    }

    pub fn neg(&self) -> FqElem {
        self.ctx.from_coords(self.ctx.raw_neg(&self.coords))
    }

    pub fn mul(&self, other: &FqElem) -> FqElem {
        self.same_ctx(other);
        self.ctx.from_coords(self.ctx.raw_mul(&self.coords, &other.coords))
    }

    pub fn pow(&self, e: u64) -> FqElem {
        self.ctx.from_coords(self.ctx.raw_pow(&self.coords, e))
    }

    pub fn inv(&self) -> Result<FqElem> {
        Ok(self.ctx.from_coords(self.ctx.raw_inv(&self.coords)?))
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    /// The p-power Frobenius a -> a^p.
    pub fn frobenius(&self) -> FqElem {
        self.pow(self.ctx.p())
    }

    /// Inverse Frobenius a -> a^{p^{t-1}}.
    pub fn inv_frobenius(&self) -> FqElem {
        let p = self.ctx.p();
        let t = self.ctx.t() as u32;
        if t == 1 {
            return self.clone();
        }
        self.pow(p.pow(t - 1))
    }

    /// Embeds self into a target field F_{p^T} with t | T, mapping the class
    /// of x to the first root of the source modulus in coordinate-lex order.
    pub fn embed(&self, target: &FqContext) -> Result<FqElem> {
        let e = self.ctx.t();
        let t = target.t();
        if self.ctx.p() != target.p() {
            return Err(Error::ContextMismatch("different characteristic"));
        }
        if !t.is_multiple_of(e) {
            return Err(Error::NoEmbedding { e, t });
        }
        if self.ctx == *target {
            return Ok(self.clone());
        }
        let root = embedding_root(&self.ctx, target)?;
        // evaluate the coordinate polynomial at the root
        let mut acc = target.zero_elem();
        for &c in self.coords.iter().rev() {
            acc = acc.mul(&root);
            acc = acc.add(&target.scalar(c));
        }
        Ok(acc)
    }
}

/// First root of the source modulus inside the target field, coordinate-lex
/// order; deterministic, so repeated embeddings agree.
fn embedding_root(src: &FqContext, target: &FqContext) -> Result<FqElem> {
    let h = src.modulus();
    for cand in target.elements() {
        let mut acc = target.zero_elem();
        for &c in h.iter().rev() {
            acc = acc.mul(&cand);
            acc = acc.add(&target.scalar(c));
        }
        if acc.is_zero() {
            return Ok(cand);
        }
    }
    Err(Error::NoEmbedding {
        e: src.t(),
        t: target.t(),
    })
}

impl FqContext {
    pub fn zero_elem(&self) -> FqElem {
        FqElem {
            ctx: self.clone(),
            coords: smallvec![0; self.data.t],
        }
    }

    pub fn one_elem(&self) -> FqElem {
        self.scalar(1)
    }
}

impl fmt::Display for FqElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // prime-field elements print bare; extensions as [c0,..,c_{t-1}]
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

impl Ring for FqContext {
    type Elem = FqElem;

    fn zero(&self) -> FqElem {
        self.zero_elem()
    }
    fn one(&self) -> FqElem {
        self.one_elem()
    }
    fn add(&self, a: &FqElem, b: &FqElem) -> FqElem {
        a.add(b)
    }
    fn neg(&self, a: &FqElem) -> FqElem {
        a.neg()
    }
    fn mul(&self, a: &FqElem, b: &FqElem) -> FqElem {
        a.mul(b)
    }
    fn is_zero(&self, a: &FqElem) -> bool {
        a.is_zero()
    }
    fn characteristic(&self) -> u128 {
        self.data.p as u128
    }
    fn from_bigint(&self, n: &num::BigInt) -> FqElem {
        let p = num::BigInt::from(self.data.p);
        let r = ((n % &p) + &p) % &p;
        let r: u64 = r.try_into().unwrap();
        self.scalar(r)
    }
    fn elem_string(&self, a: &FqElem) -> String {
        a.to_string()
    }
    fn parse_elem(&self, s: &str) -> Result<FqElem> {
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
                let p = self.data.p as i64;
                coords.push(((v % p) + p) as u64 % self.data.p);
            }
            self.elem(&coords)
        } else {
            let v: i64 = s
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad field element {s:?}")))?;
            Ok(self.from_bigint(&num::BigInt::from(v)))
        }
    }

    /// Fast route: run the ghost recursion numerically in the Galois-ring
    /// lift instead of expanding universal polynomials.
    fn witt_op(
        &self,
        p: u64,
        op: crate::witt::WittOp,
        xs: &[FqElem],
        ys: &[FqElem],
    ) -> Result<Vec<FqElem>> {
        if p != self.data.p {
            return Err(Error::BadCharacteristic {
                p,
                found: self.data.p as u128,
            });
        }
        crate::witt::witt_op_ghost_lift(self, op, xs, ys)
    }
}
