//! The p-adic independence criterion and its drivers.
//!
//! For polynomials f_1..f_r over F_q with degrees at most d, pick the level
//! l as the largest integer with p^l <= d^r, lift the system coordinatewise
//! into the Galois ring of precision l+1, and form, per r-subset I of the
//! variables, the scaled determinant
//!
//!   (g_1 ... g_r)^(p^l - 1) * (prod_{j in I} x_j) * det J_{x_I}(g)
//!
//! The system is algebraically independent if and only if some I makes this
//! polynomial non-degenerate: some coefficient survives division by
//! p^(min(v_p(alpha), l) + 1). A classical Jacobian driver (valid only for
//! p > d^r) and a cheap one-sided p-adic screen round out the module.

use num::BigUint;

use crate::error::{Error, Result};
use crate::fq::FqContext;
use crate::galois::{GrContext, GrElem};
use crate::poly::{exp_vp, jacobian_matrix, ExponentVec, SparsePoly};
use crate::ring::Ring;

/// Default term-count cap for expanded scaled determinants, whose sparsity
/// can be exponential in the level.
pub const WJP_TERM_CAP: usize = 1_000_000;

/// Iterator over the r-subsets of {0..n-1} in colexicographic order.
pub struct ColexSubsets {
    n: usize,
    current: Option<Vec<usize>>,
}

impl ColexSubsets {
    pub fn new(n: usize, r: usize) -> Self {
        let current = if r <= n { Some((0..r).collect()) } else { None };
        ColexSubsets { n, current }
    }
}

impl Iterator for ColexSubsets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.current.take()?;
        let r = cur.len();
        // successor: bump the first entry with head room, reset the prefix
        let mut next = cur.clone();
        let mut advanced = false;
        for i in 0..r {
            let limit = if i + 1 < r { next[i + 1] } else { self.n };
            if next[i] + 1 < limit {
                next[i] += 1;
                for (k, slot) in next.iter_mut().enumerate().take(i) {
                    *slot = k;
                }
                advanced = true;
                break;
            }
        }
        if advanced {
            self.current = Some(next);
        }
        Some(cur)
    }
}

/// Method tag carried by verdicts.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Method {
    WittJacobian,
    ClassicalJacobian,
    Perron,
    Algo5,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::WittJacobian => "wj",
            Method::ClassicalJacobian => "jacobian",
            Method::Perron => "perron",
            Method::Algo5 => "algo5",
        }
    }
}

/// Witness for an independence verdict: the index set and the surviving
/// coefficient. Variable indices are 1-based for reporting.
#[derive(Clone, PartialEq, Debug)]
pub struct WjWitness {
    pub index_set: Vec<usize>,
    pub alpha: Vec<u32>,
    pub coeff_valuation: usize,
    pub threshold: usize,
}

#[derive(Clone, PartialEq, Debug)]
pub struct IndependenceVerdict {
    pub independent: bool,
    pub method: Method,
    pub level: Option<usize>,
    pub witness: Option<WjWitness>,
}

impl IndependenceVerdict {
    pub fn to_json(&self) -> serde_json::Value {
        let witness = match &self.witness {
            None => serde_json::Value::Null,
            Some(w) => serde_json::json!({
                "I": w.index_set,
                "alpha": w.alpha,
                "coeff_valuation": w.coeff_valuation,
                "threshold": w.threshold,
            }),
        };
        serde_json::json!({
            "independent": self.independent,
            "method": self.method.as_str(),
            "level": self.level,
            "witness": witness,
        })
    }
}

/// Minimal admissible level: the largest l with p^l <= delta^r, by exact
/// integer comparison.
pub fn choose_level(r: usize, delta: u64, p: u64) -> Result<usize> {
    if delta == 0 {
        return Err(Error::InvalidInput(
            "level undefined for constant (degree-0) systems".into(),
        ));
    }
    let bound = BigUint::from(delta).pow(r as u32);
    let p = BigUint::from(p);
    let mut l = 0usize;
    let mut power = p.clone();
    while power <= bound {
        l += 1;
        power *= &p;
    }
    Ok(l)
}

/// Coordinatewise lift into a Galois ring, embedding F_{p^e} into the
/// residue field F_{p^t} first.
pub fn lift_poly(f: &SparsePoly<FqContext>, gr: &GrContext) -> Result<SparsePoly<GrContext>> {
    f.map_ring(gr, |c| gr.lift(&c.embed(gr.base())?))
}

/// The scaled Jacobian determinant for one index set, expanded exactly.
///
/// I is 0-based and strictly increasing; the coefficient ring must have
/// precision at least level+1.
pub fn wjp(
    gs: &[SparsePoly<GrContext>],
    index_set: &[usize],
    level: usize,
    cap: usize,
) -> Result<SparsePoly<GrContext>> {
    let r = gs.len();
    if r == 0 || index_set.len() != r {
        return Err(Error::ArityMismatch {
            expected: r,
            got: index_set.len(),
        });
    }
    let gr = gs[0].ring().clone();
    if gr.precision() < level + 1 {
        return Err(Error::PrecisionTooSmall {
            need: level + 1,
            have: gr.precision(),
        });
    }
    let arity = gs[0].arity();
    assert!(
        index_set.windows(2).all(|w| w[0] < w[1]) && *index_set.last().unwrap() < arity,
        "index set must be strictly increasing and within arity"
    );
    let p = gr.p() as u128;
    let pl = p
        .checked_pow(level as u32)
        .filter(|&v| v <= u64::MAX as u128)
        .ok_or(Error::ExponentOverflow)? as u64;
    // (g_1 ... g_r)^(p^l - 1)
    let mut prod = gs[0].clone();
    for g in &gs[1..] {
        prod = prod.mul_capped(g, cap)?;
    }
    let scaled = prod.pow_capped(pl - 1, cap)?;
    // * prod_{j in I} x_j
    let mut mono = vec![0u32; arity];
    for &j in index_set {
        mono[j] = 1;
    }
    let shifted = scaled.mul_monomial(&ExponentVec::from_slice(&mono), &gr.one());
    // * det J_{x_I}
    let det = jacobian_matrix(gs, index_set)?.det_division_free()?;
    shifted.mul_capped(&det, cap)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DegeneracyMode {
    /// Thresholds capped at the level: p^(min(v_p(alpha), l) + 1).
    Bounded,
    /// Uncapped thresholds p^(v_p(alpha) + 1); needs enough precision.
    Unbounded,
}

#[derive(Clone, PartialEq, Debug)]
pub struct DegeneracyReport {
    pub degenerate: bool,
    /// First term (graded-lex) whose coefficient beats its threshold:
    /// (alpha, coefficient valuation, threshold). Present iff non-degenerate.
    pub witness: Option<(ExponentVec, usize, usize)>,
}

/// Coefficient-wise degeneracy test. The zero polynomial is degenerate.
///
/// All thresholds are clamped to the ring precision m: requiring division by
/// p^m or more means the coefficient must vanish, and vanished coefficients
/// are never stored, so the clamp preserves the verdict.
pub fn is_degenerate(
    f: &SparsePoly<GrContext>,
    level: usize,
    mode: DegeneracyMode,
) -> Result<DegeneracyReport> {
    let gr = f.ring();
    let m = gr.precision();
    let p = gr.p();
    if mode == DegeneracyMode::Bounded && m < level + 1 {
        return Err(Error::PrecisionTooSmall {
            need: level + 1,
            have: m,
        });
    }
    if mode == DegeneracyMode::Unbounded {
        // faithfulness precondition: every stored threshold decidable mod p^m
        let deg = f.degree();
        let log_deg = if deg == 0 {
            0
        } else {
            let mut l = 0usize;
            let mut pw = p as u128;
            while pw <= deg as u128 {
                l += 1;
                pw *= p as u128;
            }
            l
        };
        let need = f
            .terms()
            .map(|(e, _)| match exp_vp(e, p) {
                None => 1, // constant term: decidable for any precision
                Some(v) => (v as usize).min(log_deg) + 1,
            })
            .max()
            .unwrap_or(1);
        if m < need {
            return Err(Error::PrecisionTooSmall { need, have: m });
        }
    }
    for (alpha, coeff) in f.terms() {
        let threshold = match (exp_vp(alpha, p), mode) {
            (None, _) => m, // v_p(0) infinite; clamp (see doc comment)
            (Some(v), DegeneracyMode::Bounded) => ((v as usize).min(level) + 1).min(m),
            (Some(v), DegeneracyMode::Unbounded) => (v as usize + 1).min(m),
        };
        let val = coeff_valuation(gr, coeff);
        if val < threshold {
            return Ok(DegeneracyReport {
                degenerate: false,
                witness: Some((alpha.clone(), val, threshold)),
            });
        }
    }
    Ok(DegeneracyReport {
        degenerate: true,
        witness: None,
    })
}

fn coeff_valuation(_gr: &GrContext, c: &GrElem) -> usize {
    c.val_p()
}

pub(crate) fn common_context(fs: &[SparsePoly<FqContext>]) -> Result<(&FqContext, usize)> {
    if fs.is_empty() {
        return Err(Error::InvalidInput("empty polynomial system".into()));
    }
    let ctx = fs[0].ring();
    let n = fs[0].arity();
    for f in fs {
        if f.ring() != ctx {
            return Err(Error::ContextMismatch("system spans different fields"));
        }
        if f.arity() != n {
            return Err(Error::ArityMismatch {
                expected: n,
                got: f.arity(),
            });
        }
    }
    Ok((ctx, n))
}

fn max_degree(fs: &[SparsePoly<FqContext>]) -> u64 {
    fs.iter().map(|f| f.degree()).max().unwrap_or(0)
}

/// The full criterion: sound and complete in any characteristic.
pub fn witt_jacobian_independent(fs: &[SparsePoly<FqContext>]) -> Result<IndependenceVerdict> {
    witt_jacobian_independent_capped(fs, WJP_TERM_CAP)
}

pub fn witt_jacobian_independent_capped(
    fs: &[SparsePoly<FqContext>],
    cap: usize,
) -> Result<IndependenceVerdict> {
    let (ctx, n) = common_context(fs)?;
    let r = fs.len();
    let dependent = |level| IndependenceVerdict {
        independent: false,
        method: Method::WittJacobian,
        level,
        witness: None,
    };
    // a constant f_i admits the annihilator y_i - c; more polynomials than
    // variables always admit one
    if fs.iter().any(|f| f.is_constant()) || r > n {
        return Ok(dependent(None));
    }
    let delta = max_degree(fs);
    let level = choose_level(r, delta, ctx.p())?;
    let gr = crate::witt::cached_gr(ctx, level + 1)?;
    let gs: Vec<SparsePoly<GrContext>> =
        fs.iter().map(|f| lift_poly(f, &gr)).collect::<Result<_>>()?;
    for index_set in ColexSubsets::new(n, r) {
        let w = wjp(&gs, &index_set, level, cap)?;
        let report = is_degenerate(&w, level, DegeneracyMode::Bounded)?;
        if let Some((alpha, val, threshold)) = report.witness {
            return Ok(IndependenceVerdict {
                independent: true,
                method: Method::WittJacobian,
                level: Some(level),
                witness: Some(WjWitness {
                    index_set: index_set.iter().map(|j| j + 1).collect(),
                    alpha: alpha.as_slice().to_vec(),
                    coeff_valuation: val,
                    threshold,
                }),
            });
        }
    }
    Ok(dependent(Some(level)))
}

/// The textbook Jacobian criterion, valid only when p > delta^r; smaller
/// characteristics are refused rather than answered one-sidedly.
pub fn classical_jacobian_independent(
    fs: &[SparsePoly<FqContext>],
) -> Result<IndependenceVerdict> {
    let (ctx, n) = common_context(fs)?;
    let r = fs.len();
    let delta = max_degree(fs);
    let bound = BigUint::from(delta).pow(r as u32);
    if BigUint::from(ctx.p()) <= bound {
        return Err(Error::CharacteristicTooSmall {
            p: ctx.p(),
            bound: bound.to_string(),
        });
    }
    let verdict = |independent| IndependenceVerdict {
        independent,
        method: Method::ClassicalJacobian,
        level: None,
        witness: None,
    };
    if r > n {
        return Ok(verdict(false));
    }
    for index_set in ColexSubsets::new(n, r) {
        let det = jacobian_matrix(fs, &index_set)?.det_division_free()?;
        if !det.is_zero() {
            return Ok(verdict(true));
        }
    }
    Ok(verdict(false))
}

/// Outcome of the one-sided p-adic screen.
#[derive(Clone, PartialEq, Debug)]
pub enum NecessityVerdict {
    /// The scaled determinant is non-degenerate, certifying independence.
    Independent(WjWitness),
    /// Degenerate; says nothing (dependence makes it degenerate for all I,
    /// but independent systems can be degenerate too).
    Inconclusive,
}

/// Cheap necessity screen: no (p^l - 1)-th power, unbounded degeneracy on
/// (prod_{j in I} x_j) * det J_{x_I} alone. Non-degenerate implies
/// independent; degenerate is inconclusive.
pub fn padic_jacobian_necessity(
    fs: &[SparsePoly<FqContext>],
    index_set: &[usize],
) -> Result<NecessityVerdict> {
    let (ctx, n) = common_context(fs)?;
    let r = fs.len();
    if index_set.len() != r {
        return Err(Error::ArityMismatch {
            expected: r,
            got: index_set.len(),
        });
    }
    if r > n || fs.iter().any(|f| f.is_constant()) {
        return Ok(NecessityVerdict::Inconclusive);
    }
    let p = ctx.p();
    let delta = max_degree(fs);
    // precision covering every threshold of a degree <= r*delta polynomial
    let mut log = 0usize;
    let mut pw = p as u128;
    while pw <= (r as u128) * (delta as u128) {
        log += 1;
        pw *= p as u128;
    }
    let m = log + 2;
    let gr = crate::witt::cached_gr(ctx, m)?;
    let gs: Vec<SparsePoly<GrContext>> =
        fs.iter().map(|f| lift_poly(f, &gr)).collect::<Result<_>>()?;
    let arity = gs[0].arity();
    let det = jacobian_matrix(&gs, index_set)?.det_division_free()?;
    let mut mono = vec![0u32; arity];
    for &j in index_set {
        mono[j] = 1;
    }
    let jhat = det.mul_monomial(&ExponentVec::from_slice(&mono), &gr.one());
    let report = is_degenerate(&jhat, 0, DegeneracyMode::Unbounded)?;
    match report.witness {
        Some((alpha, val, threshold)) => Ok(NecessityVerdict::Independent(WjWitness {
            index_set: index_set.iter().map(|j| j + 1).collect(),
            alpha: alpha.as_slice().to_vec(),
            coeff_valuation: val,
            threshold,
        })),
        None => Ok(NecessityVerdict::Inconclusive),
    }
}
