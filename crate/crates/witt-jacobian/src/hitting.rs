//! Explicit hitting sets for circuits composed with sparse polynomial
//! systems of small transcendence degree.
//!
//! The construction has three moving parts: a variable reduction that
//! substitutes powers of a single scalar for all but r variables while
//! preserving independence, a non-degeneracy-preserving search that does the
//! same for lifted witness polynomials, and the final point generator that
//! scatters trial values over every r-subset of the coordinates. Certified
//! set sizes come from explicit formulas; they are astronomically large for
//! all but toy parameters, so every size can be overridden downward at the
//! price of losing the guarantee.

use std::collections::HashSet;

use num::BigUint;

use crate::error::{Error, Result};
use crate::fq::{FqContext, FqElem};
use crate::galois::GrElem;
use crate::poly::SparsePoly;
use crate::ring::Ring;
use crate::wj::{
    common_context, is_degenerate, witt_jacobian_independent, ColexSubsets, DegeneracyMode,
};
use crate::ExponentVec;

/// Largest prime bound the point generator will sieve.
pub const PRIME_SIEVE_CAP: u64 = 1_000_000;

/// All primes up to and including `limit`, ascending.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for q in 2..=n {
        if !composite[q] {
            out.push(q as u64);
            let mut k = q * q;
            while k <= n {
                composite[k] = true;
                k += q;
            }
        }
    }
    out
}

/// Smallest integer L with 2^L >= x (x >= 1).
fn ceil_log2(x: u64) -> u32 {
    assert!(x >= 1);
    if x == 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

fn checked_d_base(r: usize, delta: u64) -> Result<u64> {
    let too_large = || Error::TooLarge("degree budget r*delta^(r+1)+1 overflows u64".into());
    delta
        .checked_pow(r as u32 + 1)
        .and_then(|dp| dp.checked_mul(r as u64))
        .and_then(|m| m.checked_add(1))
        .ok_or_else(too_large)
}

/// (2*delta*r*s)^(k*r^2*s) as a big integer; the shared core of every bound.
fn sparsity_power(r: usize, s: u64, delta: u64, k: u32) -> Result<BigUint> {
    let too_large = || Error::TooLarge("exponent k*r^2*s overflows".into());
    let base = 2u64
        .checked_mul(delta)
        .and_then(|b| b.checked_mul(r as u64))
        .and_then(|b| b.checked_mul(s))
        .ok_or_else(too_large)?;
    let exp: u32 = (r as u64)
        .checked_mul(r as u64)
        .and_then(|rr| rr.checked_mul(s))
        .and_then(|e| e.checked_mul(k as u64))
        .and_then(|e| u32::try_from(e).ok())
        .ok_or_else(too_large)?;
    Ok(BigUint::from(base).pow(exp))
}

/// Prime modulus bound for the variable reduction: n^2 (2 delta r s)^(4 r^2 s) ceil(log2 D)^2.
pub fn reduction_prime_bound(n: usize, r: usize, s: u64, delta: u64) -> Result<BigUint> {
    let d_base = checked_d_base(r, delta)?;
    let log = BigUint::from(ceil_log2(d_base));
    Ok(BigUint::from(n as u64 * n as u64) * sparsity_power(r, s, delta, 4)? * log.pow(2))
}

/// Scalar candidate bound for the variable reduction: the prime bound times D.
pub fn reduction_candidate_bound(n: usize, r: usize, s: u64, delta: u64) -> Result<BigUint> {
    Ok(reduction_prime_bound(n, r, s, delta)? * BigUint::from(checked_d_base(r, delta)?))
}

/// Prime modulus bound for the non-degeneracy-preserving substitution on an
/// s-sparse n-variate witness of degree below `d_base`: (n s ceil(log2 D))^2.
pub fn preserve_prime_bound(n: usize, s: u64, d_base: u64) -> BigUint {
    BigUint::from(n as u64 * s * ceil_log2(d_base) as u64).pow(2)
}

/// Unit candidate bound for the same substitution: the prime bound times D.
pub fn preserve_candidate_bound(n: usize, s: u64, d_base: u64) -> BigUint {
    preserve_prime_bound(n, s, d_base) * BigUint::from(d_base)
}

/// Instance parameters for hitting-set generation.
///
/// `n` variables, transcendence degree at most `r`, inner polynomials with at
/// most `s` terms of degree at most `delta`, outer circuit of degree at most
/// `d`. Certified sizes follow from the formulas below; overrides shrink the
/// enumeration but demote the result to a heuristic.
#[derive(Debug, Clone)]
pub struct HittingParams {
    n: usize,
    r: usize,
    s: u64,
    delta: u64,
    d: u64,
    d_base: u64,
    override_s1: Option<u64>,
    override_s2: Option<u64>,
    override_prime_limit: Option<u64>,
}

impl HittingParams {
    pub fn new(n: usize, r: usize, s: u64, delta: u64, d: u64) -> Result<Self> {
        if r == 0 || r > n || s == 0 || delta == 0 {
            return Err(Error::InvalidInput(format!(
                "need 1 <= r <= n and s, delta >= 1, got n={n} r={r} s={s} delta={delta}"
            )));
        }
        let d_base = checked_d_base(r, delta)?;
        Ok(HittingParams {
            n,
            r,
            s,
            delta,
            d,
            d_base,
            override_s1: None,
            override_s2: None,
            override_prime_limit: None,
        })
    }

    /// Shrink the enumerated sets. Each override must stay within its
    /// certified bound; any override switches the generator to override mode.
    pub fn with_overrides(
        mut self,
        s1: Option<u64>,
        s2: Option<u64>,
        prime_limit: Option<u64>,
    ) -> Result<Self> {
        let check = |name: &str, v: u64, min: u64, bound: &BigUint| -> Result<()> {
            if v < min || BigUint::from(v) > *bound {
                return Err(Error::InvalidInput(format!(
                    "override {name}={v} outside [{min}, {bound}]"
                )));
            }
            Ok(())
        };
        if let Some(v) = s1 {
            check("s1", v, 1, &self.s1_bound())?;
        }
        if let Some(v) = s2 {
            check("s2", v, 1, &self.s2_bound()?)?;
        }
        if let Some(v) = prime_limit {
            check("prime-limit", v, 2, &self.prime_bound()?)?;
        }
        self.override_s1 = s1;
        self.override_s2 = s2;
        self.override_prime_limit = prime_limit;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Exponent base for trailing coordinates: D = r*delta^(r+1) + 1.
    pub fn d_base(&self) -> u64 {
        self.d_base
    }

    /// Certified size of the per-coordinate set: d + 1.
    pub fn s1_bound(&self) -> BigUint {
        BigUint::from(self.d) + BigUint::from(1u32)
    }

    /// Certified size of the scalar set: n^2 (2 delta r s)^(9 r^2 s).
    pub fn s2_bound(&self) -> Result<BigUint> {
        Ok(BigUint::from((self.n * self.n) as u64) * sparsity_power(self.r, self.s, self.delta, 9)?)
    }

    /// Certified prime modulus bound: n^2 (2 delta r s)^(7 r^2 s).
    pub fn prime_bound(&self) -> Result<BigUint> {
        Ok(BigUint::from((self.n * self.n) as u64) * sparsity_power(self.r, self.s, self.delta, 7)?)
    }

    pub fn certified(&self) -> bool {
        self.override_s1.is_none()
            && self.override_s2.is_none()
            && self.override_prime_limit.is_none()
    }

    pub fn mode(&self) -> &'static str {
        if self.certified() {
            "certified"
        } else {
            "override"
        }
    }

    fn effective(&self, over: Option<u64>, bound: BigUint, name: &str) -> Result<u64> {
        match over {
            Some(v) => Ok(v),
            None => u64::try_from(&bound).map_err(|_| {
                Error::TooLarge(format!(
                    "certified {name} bound {bound} exceeds u64; pass an override"
                ))
            }),
        }
    }

    pub fn effective_s1(&self) -> Result<u64> {
        self.effective(self.override_s1, self.s1_bound(), "s1")
    }

    pub fn effective_s2(&self) -> Result<u64> {
        self.effective(self.override_s2, self.s2_bound()?, "s2")
    }

    pub fn effective_prime_limit(&self) -> Result<u64> {
        self.effective(self.override_prime_limit, self.prime_bound()?, "prime-limit")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "r": self.r,
            "s": self.s,
            "delta": self.delta,
            "d": self.d,
            "d_base": self.d_base,
            "s1_bound": self.s1_bound().to_string(),
            "s2_bound": self.s2_bound().map(|b| b.to_string()).unwrap_or_else(|_| "overflow".into()),
            "prime_bound": self.prime_bound().map(|b| b.to_string()).unwrap_or_else(|_| "overflow".into()),
            "override_s1": self.override_s1,
            "override_s2": self.override_s2,
            "override_prime_limit": self.override_prime_limit,
            "mode": self.mode(),
        })
    }
}

/// Exponents D^0 mod q, D^1 mod q, ..., D^(count-1) mod q.
pub fn substitution_exponents(d_base: u64, q: u64, count: usize) -> Vec<u64> {
    assert!(q >= 2, "modulus must be at least 2");
    let d = d_base % q;
    let mut acc = 1 % q;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(acc);
        acc = acc * d % q;
    }
    out
}

/// Trailing coordinate values c^(D^i mod q) for i = 0..count. With c = 0 the
/// zero exponent still contributes 1, matching the convention 0^0 = 1.
pub fn substitution_point(c: &FqElem, d_base: u64, q: u64, count: usize) -> Vec<FqElem> {
    substitution_exponents(d_base, q, count)
        .into_iter()
        .map(|e| c.pow(e))
        .collect()
}

/// Drop the trailing variables of a polynomial known not to use them.
fn shrink_arity<R: Ring>(f: &SparsePoly<R>, r: usize) -> SparsePoly<R> {
    let mut out = SparsePoly::zero(f.ring(), r);
    for (e, c) in f.terms() {
        let mut head = vec![0u32; r];
        for (j, h) in head.iter_mut().enumerate() {
            *h = e.get(j);
        }
        for j in r..f.arity() {
            assert_eq!(e.get(j), 0, "variable x{} still in use", j + 1);
        }
        out.add_term(ExponentVec::from_slice(&head), c.clone());
    }
    out
}

/// Search for a prime q and unit c such that substituting c^(D^i mod q) for
/// the trailing variables keeps `g` non-degenerate at the given level.
///
/// Preconditions: `g` is non-degenerate at `level`, deg g < d_base, and every
/// candidate is a unit. Over the certified candidate sets exhaustion is
/// impossible for inputs meeting the sparsity bound, so `SearchExhausted`
/// only arises from overridden (heuristic) sets or violated preconditions.
/// Returns the witness pair and the substituted r-variate polynomial.
pub fn preserve_nondegeneracy_search(
    g: &SparsePoly<crate::galois::GrContext>,
    r: usize,
    level: usize,
    d_base: u64,
    candidates: &[GrElem],
    prime_limit: u64,
) -> Result<(GrElem, u64, SparsePoly<crate::galois::GrContext>)> {
    let n = g.arity();
    let gr = g.ring().clone();
    if r == 0 || r > n {
        return Err(Error::InvalidInput(format!("need 1 <= r <= arity, got r={r} arity={n}")));
    }
    if d_base < 2 || g.degree() >= d_base {
        return Err(Error::InvalidInput(format!(
            "need deg g < d_base and d_base >= 2, got deg={} d_base={}",
            g.degree(),
            d_base
        )));
    }
    if n == r {
        return Ok((gr.one_elem(), 2, g.clone()));
    }
    if candidates.is_empty() {
        return Err(Error::InvalidInput("empty candidate set".into()));
    }
    for c in candidates {
        if c.val_p() > 0 {
            return Err(Error::InvalidInput(
                "candidate set must consist of units".into(),
            ));
        }
    }
    for q in primes_up_to(prime_limit) {
        let exps = substitution_exponents(d_base, q, n - r);
        for c in candidates {
            let assignment: Vec<(usize, GrElem)> = exps
                .iter()
                .enumerate()
                .map(|(i, &e)| (r + i, c.pow(e)))
                .collect();
            let h = shrink_arity(&g.evaluate(&assignment)?, r);
            if !is_degenerate(&h, level, DegeneracyMode::Bounded)?.degenerate {
                return Ok((c.clone(), q, h));
            }
        }
    }
    Err(Error::SearchExhausted(format!(
        "no (c, q) with prime q <= {prime_limit} preserves non-degeneracy"
    )))
}

/// Search for a prime q and scalar c such that substituting c^(D^i mod q) for
/// the trailing variables keeps f_1..f_r algebraically independent. Success
/// is certified by rerunning the independence criterion on the reduced
/// r-variate system, which is returned alongside the witness pair.
pub fn variable_reduction_search(
    fs: &[SparsePoly<FqContext>],
    d_base: u64,
    candidates: &[FqElem],
    prime_limit: u64,
) -> Result<(FqElem, u64, Vec<SparsePoly<FqContext>>)> {
    let (ctx, n) = common_context(fs)?;
    let r = fs.len();
    if r > n {
        return Err(Error::InvalidInput(format!(
            "cannot reduce {r} polynomials onto fewer variables than r (arity {n})"
        )));
    }
    if n == r {
        // nothing to substitute, but the postcondition still demands an
        // independent result
        if witt_jacobian_independent(fs)?.independent {
            return Ok((ctx.one(), 2, fs.to_vec()));
        }
        return Err(Error::SearchExhausted(
            "system on r variables is already dependent".into(),
        ));
    }
    if candidates.is_empty() {
        return Err(Error::InvalidInput("empty candidate set".into()));
    }
    let ctx = ctx.clone();
    for q in primes_up_to(prime_limit) {
        let exps = substitution_exponents(d_base, q, n - r);
        for c in candidates {
            let assignment: Vec<(usize, FqElem)> = exps
                .iter()
                .enumerate()
                .map(|(i, &e)| (r + i, c.pow(e)))
                .collect();
            let gs: Vec<SparsePoly<FqContext>> = fs
                .iter()
                .map(|f| Ok(shrink_arity(&f.evaluate(&assignment)?, r)))
                .collect::<Result<_>>()?;
            if witt_jacobian_independent(&gs)?.independent {
                return Ok((c.clone(), q, gs));
            }
        }
    }
    let _ = ctx;
    Err(Error::SearchExhausted(format!(
        "no (c, q) with prime q <= {prime_limit} preserves independence"
    )))
}

/// One trial point together with the choices that produced it.
#[derive(Debug, Clone)]
pub struct HitPoint {
    /// Field values, one per variable.
    pub point: Vec<FqElem>,
    /// The r-subset (0-based, ascending) that received values from S_1.
    pub index_set: Vec<usize>,
    /// Scalar whose powers filled the remaining coordinates; None when r = n.
    pub c: Option<FqElem>,
    /// Prime modulus for the exponents; None when r = n.
    pub q: Option<u64>,
}

impl HitPoint {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "point": self.point.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "I": self.index_set.iter().map(|i| i + 1).collect::<Vec<_>>(),
            "c": self.c.as_ref().map(|v| v.to_string()),
            "q": self.q,
        })
    }
}

/// Lazy enumeration of the hitting set, deduplicated by coordinates.
///
/// Iteration order: index sets in colexicographic order, then the S_1^r
/// odometer, then scalars c in generator-power order, then primes q
/// ascending. Callers typically stop at the first point where the composed
/// circuit evaluates to a nonzero value.
pub struct HittingSetStream {
    s1: Vec<FqElem>,
    cs: Vec<Option<FqElem>>,
    qs: Vec<Option<u64>>,
    subsets: Vec<Vec<usize>>,
    n: usize,
    r: usize,
    d_base: u64,
    i_subset: usize,
    b_digits: Vec<usize>,
    i_c: usize,
    i_q: usize,
    done: bool,
    seen: HashSet<Vec<u64>>,
}

impl HittingSetStream {
    fn advance(&mut self) {
        self.i_q += 1;
        if self.i_q < self.qs.len() {
            return;
        }
        self.i_q = 0;
        self.i_c += 1;
        if self.i_c < self.cs.len() {
            return;
        }
        self.i_c = 0;
        for d in (0..self.r).rev() {
            self.b_digits[d] += 1;
            if self.b_digits[d] < self.s1.len() {
                return;
            }
            self.b_digits[d] = 0;
        }
        self.i_subset += 1;
        if self.i_subset >= self.subsets.len() {
            self.done = true;
        }
    }
}

impl Iterator for HittingSetStream {
    type Item = HitPoint;

    fn next(&mut self) -> Option<HitPoint> {
        while !self.done {
            let index_set = self.subsets[self.i_subset].clone();
            let c = self.cs[self.i_c].clone();
            let q = self.qs[self.i_q];
            let tail = match (&c, q) {
                (Some(c), Some(q)) => substitution_point(c, self.d_base, q, self.n - self.r),
                _ => Vec::new(),
            };
            let mut point: Vec<Option<FqElem>> = vec![None; self.n];
            for (k, &pos) in index_set.iter().enumerate() {
                point[pos] = Some(self.s1[self.b_digits[k]].clone());
            }
            let mut t = tail.into_iter();
            for slot in point.iter_mut() {
                if slot.is_none() {
                    *slot = Some(t.next().expect("tail length matches complement"));
                }
            }
            let point: Vec<FqElem> = point.into_iter().map(|v| v.unwrap()).collect();
            self.advance();
            let key: Vec<u64> = point.iter().flat_map(|v| v.coords().to_vec()).collect();
            if self.seen.insert(key) {
                return Some(HitPoint { point, index_set, c, q });
            }
        }
        None
    }
}

/// Build the hitting-set point stream for `params` with coordinates in `ctx`.
///
/// S_1 and S_2 are initial segments of the generator-power sequence
/// 1, g, g^2, ... so the field must have at least max(|S_1|, |S_2|) nonzero
/// elements. When r = n the trailing substitution disappears and the stream
/// is just S_1^n scattered over the (single) full index set.
pub fn hitting_set(params: &HittingParams, ctx: &FqContext) -> Result<HittingSetStream> {
    let n = params.n();
    let r = params.r();
    let s1_len = params.effective_s1()?;
    let (s2_len, prime_limit) = if r < n {
        (params.effective_s2()?, params.effective_prime_limit()?)
    } else {
        (0, 0)
    };
    let need = s1_len.max(s2_len);
    if need > ctx.unit_order() {
        return Err(Error::FieldTooSmall {
            need: need.to_string(),
            have: ctx.unit_order().to_string(),
        });
    }
    if prime_limit > PRIME_SIEVE_CAP {
        return Err(Error::TooLarge(format!(
            "prime limit {prime_limit} exceeds sieve cap {PRIME_SIEVE_CAP}; pass an override"
        )));
    }
    let s1: Vec<FqElem> = ctx.generator_powers().take(s1_len as usize).collect();
    let (cs, qs) = if r < n {
        let cs: Vec<Option<FqElem>> = ctx
            .generator_powers()
            .take(s2_len as usize)
            .map(Some)
            .collect();
        let qs: Vec<Option<u64>> = primes_up_to(prime_limit).into_iter().map(Some).collect();
        if qs.is_empty() {
            return Err(Error::InvalidInput(
                "prime limit below 2 leaves no moduli".into(),
            ));
        }
        (cs, qs)
    } else {
        (vec![None], vec![None])
    };
    Ok(HittingSetStream {
        s1,
        cs,
        qs,
        subsets: ColexSubsets::new(n, r).collect(),
        n,
        r,
        d_base: params.d_base(),
        i_subset: 0,
        b_digits: vec![0; r],
        i_c: 0,
        i_q: 0,
        done: false,
        seen: HashSet::new(),
    })
}

/// First stream point at which the circuit, composed with fs, is nonzero.
pub fn hits(
    circuit: &crate::circuit::Circuit<FqContext>,
    fs: &[SparsePoly<FqContext>],
    stream: impl Iterator<Item = HitPoint>,
) -> Result<Option<HitPoint>> {
    let (_, n) = common_context(fs)?;
    if circuit.arity() != fs.len() {
        return Err(Error::ArityMismatch {
            expected: circuit.arity(),
            got: fs.len(),
        });
    }
    for pt in stream {
        if pt.point.len() != n {
            return Err(Error::ArityMismatch { expected: n, got: pt.point.len() });
        }
        let vals: Vec<FqElem> = fs
            .iter()
            .map(|f| f.eval_at(&pt.point))
            .collect::<Result<_>>()?;
        if !circuit.eval(&vals)?.is_zero() {
            return Ok(Some(pt));
        }
    }
    Ok(None)
}
