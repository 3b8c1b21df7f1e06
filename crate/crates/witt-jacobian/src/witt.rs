//! Truncated Witt vectors over a commutative ring.
//!
//! Two evaluation routes implement the same arithmetic. The generic route
//! derives the universal addition/multiplication/negation polynomials by
//! inverting the ghost map over the rationals (their integrality is checked,
//! then they are cached). Finite-field coefficients get a much faster route:
//! the same ghost recursion is run numerically inside the Galois-ring lift,
//! where dividing a canonical representative by p^n loses exactly n digits
//! of precision, which still leaves the mod-p coordinate intact.

use num::BigInt;
use num::BigRational;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::fq::{is_prime_u64, FqContext, FqElem};
use crate::galois::{GrContext, GrElem};
use crate::poly::{ExponentVec, SparsePoly};
use crate::ring::{IntRing, RatRing, Ring};

/// The three ring operations with universal coordinate formulas.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum WittOp {
    Add,
    Mul,
    Neg,
}

/// Default cap on the symbolic level: term counts explode super-exponentially.
pub const WITT_LEVEL_CAP: usize = 4;

/// Universal Witt coordinate polynomials for a fixed prime, levels 0..=level.
///
/// Binary families use variables x_0..x_level, y_0..y_level in that order;
/// negation uses x_0..x_level only.
#[derive(Debug)]
pub struct UniversalWittPolys {
    pub p: u64,
    pub level: usize,
    pub sums: Vec<SparsePoly<IntRing>>,
    pub prods: Vec<SparsePoly<IntRing>>,
    pub negs: Vec<SparsePoly<IntRing>>,
}

/// Ghost component w_n = sum_j p^j x_{offset+j}^{p^(n-j)} over the rationals.
fn ghost_component(
    arity: usize,
    offset: usize,
    n: usize,
    p: u64,
) -> Result<SparsePoly<RatRing>> {
    let q = RatRing;
    let mut g = SparsePoly::zero(&q, arity);
    for j in 0..=n {
        let e = (p as u128)
            .checked_pow((n - j) as u32)
            .filter(|&e| e <= u32::MAX as u128)
            .ok_or(Error::ExponentOverflow)? as u32;
        let mut alpha = vec![0u32; arity];
        alpha[offset + j] = e;
        let coeff = BigRational::from_integer(num::pow(BigInt::from(p), j));
        g.add_term(ExponentVec::from_slice(&alpha), coeff);
    }
    Ok(g)
}

fn derive_family(p: u64, level: usize, op: WittOp) -> Result<Vec<SparsePoly<IntRing>>> {
    let nvars = level + 1;
    let arity = match op {
        WittOp::Neg => nvars,
        _ => 2 * nvars,
    };
    let mut fam: Vec<SparsePoly<RatRing>> = Vec::new();
    for n in 0..=level {
        let gx = ghost_component(arity, 0, n, p)?;
        let phi = match op {
            WittOp::Add => gx.add(&ghost_component(arity, nvars, n, p)?)?,
            WittOp::Mul => gx.mul(&ghost_component(arity, nvars, n, p)?)?,
            WittOp::Neg => gx.neg(),
        };
        // p^n * fam_n = phi_n - sum_{j<n} p^j fam_j^(p^(n-j))
        let mut rhs = phi;
        for (j, fj) in fam.iter().enumerate().take(n) {
            let e = (p as u128).pow((n - j) as u32) as u64;
            let scaled = fj
                .pow(e)?
                .scale(&BigRational::from_integer(num::pow(BigInt::from(p), j)));
            rhs = rhs.sub(&scaled)?;
        }
        let inv = BigRational::from_integer(num::pow(BigInt::from(p), n)).recip();
        fam.push(rhs.scale(&inv));
    }
    fam.iter()
        .map(|f| {
            f.map_ring(&IntRing, |c| {
                assert!(c.is_integer(), "ghost inversion must yield integers");
                Ok(c.to_integer())
            })
        })
        .collect()
}

/// Universal polynomials through the requested level, memoized per prime.
pub fn universal_witt_polys(p: u64, level: usize) -> Result<Arc<UniversalWittPolys>> {
    universal_witt_polys_with_cap(p, level, WITT_LEVEL_CAP)
}

pub fn universal_witt_polys_with_cap(
    p: u64,
    level: usize,
    cap: usize,
) -> Result<Arc<UniversalWittPolys>> {
    if level > cap {
        return Err(Error::LevelCapExceeded {
            requested: level,
            cap,
        });
    }
    if !is_prime_u64(p) {
        return Err(Error::NotPrime(p));
    }
    type Cache = Mutex<HashMap<(u64, usize), Arc<UniversalWittPolys>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().unwrap().get(&(p, level)) {
        return Ok(hit.clone());
    }
    let built = Arc::new(UniversalWittPolys {
        p,
        level,
        sums: derive_family(p, level, WittOp::Add)?,
        prods: derive_family(p, level, WittOp::Mul)?,
        negs: derive_family(p, level, WittOp::Neg)?,
    });
    cache
        .lock()
        .unwrap()
        .insert((p, level), built.clone());
    Ok(built)
}

/// Coordinate formulas evaluated over an arbitrary coefficient ring.
pub fn witt_op_universal<R: Ring>(
    ring: &R,
    p: u64,
    op: WittOp,
    xs: &[R::Elem],
    ys: &[R::Elem],
) -> Result<Vec<R::Elem>> {
    let len = xs.len();
    if op != WittOp::Neg && ys.len() != len {
        return Err(Error::ArityMismatch {
            expected: len,
            got: ys.len(),
        });
    }
    if len == 0 {
        return Ok(Vec::new());
    }
    let up = universal_witt_polys(p, len - 1)?;
    let fam = match op {
        WittOp::Add => &up.sums,
        WittOp::Mul => &up.prods,
        WittOp::Neg => &up.negs,
    };
    let mut point: Vec<R::Elem> = xs.to_vec();
    if op != WittOp::Neg {
        point.extend_from_slice(ys);
    }
    let mut out = Vec::with_capacity(len);
    for f in fam.iter().take(len) {
        let fr = f.map_ring(ring, |c| Ok(ring.from_bigint(c)))?;
        out.push(fr.eval_at(&point)?);
    }
    Ok(out)
}

pub(crate) fn cached_gr(fq: &FqContext, m: usize) -> Result<GrContext> {
    type Cache = Mutex<HashMap<(u64, usize, usize), GrContext>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (fq.p(), fq.t(), m);
    if let Some(hit) = cache.lock().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let g = GrContext::new(fq, m)?;
    cache.lock().unwrap().insert(key, g.clone());
    Ok(g)
}

/// Fast route for finite-field coefficients: run the ghost recursion in the
/// Galois-ring lift of precision len and read coordinates off mod p.
///
/// Accuracy: the lift of z_j is only determined mod p^(len-j), but raising
/// to the p^(n-j)-th power regains those digits, so every right-hand side
/// below is correct mod p^len and the quotient by p^n is correct mod p.
pub(crate) fn witt_op_ghost_lift(
    fq: &FqContext,
    op: WittOp,
    xs: &[FqElem],
    ys: &[FqElem],
) -> Result<Vec<FqElem>> {
    let len = xs.len();
    if op != WittOp::Neg && ys.len() != len {
        return Err(Error::ArityMismatch {
            expected: len,
            got: ys.len(),
        });
    }
    if len == 0 {
        return Ok(Vec::new());
    }
    let g = cached_gr(fq, len)?;
    let p = fq.p();
    let ppow = |k: usize| (p as u128).pow(k as u32) as u64; // < p^len <= modulus cap
    let lift_all = |v: &[FqElem]| -> Result<Vec<GrElem>> { v.iter().map(|a| g.lift(a)).collect() };
    let xl = lift_all(xs)?;
    let yl = if op == WittOp::Neg {
        Vec::new()
    } else {
        lift_all(ys)?
    };
    let ghost = |lifts: &[GrElem], n: usize| {
        let mut acc = g.zero_elem();
        for (j, a) in lifts.iter().enumerate().take(n + 1) {
            acc = acc.add(&a.pow(ppow(n - j)).scale(ppow(j)));
        }
        acc
    };
    let mut lifted_out: Vec<GrElem> = Vec::with_capacity(len);
    let mut out = Vec::with_capacity(len);
    for n in 0..len {
        let phi = match op {
            WittOp::Add => ghost(&xl, n).add(&ghost(&yl, n)),
            WittOp::Mul => ghost(&xl, n).mul(&ghost(&yl, n)),
            WittOp::Neg => ghost(&xl, n).neg(),
        };
        let mut rhs = phi;
        for (j, z) in lifted_out.iter().enumerate() {
            rhs = rhs.sub(&z.pow(ppow(n - j)).scale(ppow(j)));
        }
        let zn = rhs.exact_div_p_pow(n);
        out.push(g.reduce(&zn));
        lifted_out.push(zn);
    }
    Ok(out)
}

/// The ring of Witt vectors of a fixed length over a base ring.
#[derive(Clone, PartialEq, Debug)]
pub struct WittRing<R: Ring> {
    base: R,
    p: u64,
    len: usize,
}

impl<R: Ring> WittRing<R> {
    /// Base characteristic must be 0 or p itself.
    pub fn new(base: &R, p: u64, len: usize) -> Result<Self> {
        if !is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        if len == 0 {
            return Err(Error::InvalidInput("witt length must be at least 1".into()));
        }
        let ch = base.characteristic();
        if ch != 0 && ch != p as u128 {
            return Err(Error::BadCharacteristic { p, found: ch });
        }
        Ok(WittRing {
            base: base.clone(),
            p,
            len,
        })
    }

    pub fn base(&self) -> &R {
        &self.base
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn zero(&self) -> WittVec<R> {
        WittVec {
            ring: self.clone(),
            coords: vec![self.base.zero(); self.len],
        }
    }

    pub fn one(&self) -> WittVec<R> {
        self.teichmuller(&self.base.one())
    }

    pub fn from_coords(&self, coords: Vec<R::Elem>) -> Result<WittVec<R>> {
        if coords.len() != self.len {
            return Err(Error::ArityMismatch {
                expected: self.len,
                got: coords.len(),
            });
        }
        Ok(WittVec {
            ring: self.clone(),
            coords,
        })
    }

    /// Multiplicative lift (a, 0, ..., 0).
    pub fn teichmuller(&self, a: &R::Elem) -> WittVec<R> {
        let mut coords = vec![self.base.zero(); self.len];
        coords[0] = a.clone();
        WittVec {
            ring: self.clone(),
            coords,
        }
    }
}

/// A truncated Witt vector; coordinate 0 is the mod-p coordinate.
#[derive(Clone, PartialEq, Debug)]
pub struct WittVec<R: Ring> {
    ring: WittRing<R>,
    coords: Vec<R::Elem>,
}

impl<R: Ring> WittVec<R> {
    pub fn ring(&self) -> &WittRing<R> {
        &self.ring
    }

    pub fn coords(&self) -> &[R::Elem] {
        &self.coords
    }

    pub fn get(&self, i: usize) -> &R::Elem {
        &self.coords[i]
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| self.ring.base.is_zero(c))
    }

    fn check_ring(&self, other: &Self) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::ContextMismatch("witt vectors from different rings"));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let coords =
            self.ring
                .base
                .witt_op(self.ring.p, WittOp::Add, &self.coords, &other.coords)?;
        self.ring.from_coords(coords)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let coords =
            self.ring
                .base
                .witt_op(self.ring.p, WittOp::Mul, &self.coords, &other.coords)?;
        self.ring.from_coords(coords)
    }

    pub fn neg(&self) -> Result<Self> {
        let coords = self
            .ring
            .base
            .witt_op(self.ring.p, WittOp::Neg, &self.coords, &[])?;
        self.ring.from_coords(coords)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg()?)
    }

    /// Shift: (a_0, ..) -> (0, a_0, ..), dropping the last coordinate.
    pub fn verschiebung(&self) -> Self {
        let mut coords = Vec::with_capacity(self.ring.len);
        coords.push(self.ring.base.zero());
        coords.extend_from_slice(&self.coords[..self.ring.len - 1]);
        WittVec {
            ring: self.ring.clone(),
            coords,
        }
    }

    /// Truncation to the first k coordinates.
    pub fn restriction(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.ring.len {
            return Err(Error::InvalidInput(format!(
                "cannot restrict length {} to {k}",
                self.ring.len
            )));
        }
        let ring = WittRing::new(&self.ring.base, self.ring.p, k)?;
        ring.from_coords(self.coords[..k].to_vec())
    }

    /// Coordinatewise p-th power; valid over perfect base rings of
    /// characteristic p.
    pub fn frobenius(&self) -> Result<Self> {
        let ch = self.ring.base.characteristic();
        if ch != self.ring.p as u128 {
            return Err(Error::BadCharacteristic {
                p: self.ring.p,
                found: ch,
            });
        }
        let coords = self
            .coords
            .iter()
            .map(|c| self.ring.base.pow(c, self.ring.p))
            .collect();
        self.ring.from_coords(coords)
    }

    /// Multiplication by p as the composite V(F(x)).
    pub fn pmul(&self) -> Result<Self> {
        Ok(self.frobenius()?.verschiebung())
    }
}

impl<R: Ring> fmt::Display for WittVec<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .coords
            .iter()
            .map(|c| self.ring.base.elem_string(c))
            .collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// The coordinatewise isomorphism W_m(F_q) -> Galois ring of precision m:
/// a maps to sum_i p^i [a_i^(p^-i)] with [.] the Teichmuller lift.
pub fn witt_to_galois(w: &WittVec<FqContext>, g: &GrContext) -> Result<GrElem> {
    let fq = w.ring().base();
    if g.base() != fq || g.p() != w.ring().p() {
        return Err(Error::ContextMismatch("witt vector and galois ring disagree"));
    }
    if g.precision() != w.ring().len() {
        return Err(Error::PrecisionTooSmall {
            need: w.ring().len(),
            have: g.precision(),
        });
    }
    let p = g.p();
    let mut acc = g.zero_elem();
    for (i, a) in w.coords().iter().enumerate() {
        let mut b = a.clone();
        for _ in 0..i {
            b = b.inv_frobenius();
        }
        let pi = (p as u128).pow(i as u32) as u64;
        acc = acc.add(&g.teichmuller(&b)?.scale(pi));
    }
    Ok(acc)
}
