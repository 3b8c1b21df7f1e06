//! Coefficient extraction over Galois rings by root-of-unity interpolation,
//! and the circuit-level independence decision built on it.
//!
//! With xi of multiplicative order N = p^t - 1 and a univariate f of degree
//! below N, each coefficient is a finite inverse transform:
//!
//!   coeff(z^d, f) = N^{-1} * sum_{j=0}^{N-2} xi^{-jd} f(xi^j)
//!
//! The circuit driver lifts the inputs into a Galois ring whose residue
//! field is large enough for a Kronecker substitution x_i -> z^(D^(i-1)) to
//! preserve terms, assembles the scaled Jacobian determinant as a circuit,
//! and reads coefficients off evaluations at the powers of xi, never
//! expanding anything in the exhaustive mode.

use crate::circuit::{Circuit, CircuitBuilder, Node};
use crate::error::{Error, Result};
use crate::fq::{FqContext, FqElem};
use crate::galois::{GrContext, GrElem};
use crate::poly::{exp_vp, ExponentVec, SparsePoly};
use crate::ring::Ring;
use crate::wj::{
    choose_level, is_degenerate, ColexSubsets, DegeneracyMode, IndependenceVerdict, Method,
    WjWitness, WJP_TERM_CAP,
};

/// Interpolation needs all p^t - 1 powers of xi; refuse beyond this.
pub const INTERP_POINT_CAP: u64 = 1_000_000;

/// Exhaustive-mode cap on the number D^n of candidate exponent vectors.
pub const ALGO5_EXHAUSTIVE_CAP: u64 = 1 << 14;

/// Shared data for interpolating coefficients over one Galois ring.
pub struct InterpPlan {
    gr: GrContext,
    order: u64,
    xi_pows: Vec<GrElem>,
    inv_order: GrElem,
}

impl InterpPlan {
    pub fn new(gr: &GrContext) -> Result<InterpPlan> {
        let t = gr.t() as u32;
        let order = gr
            .p()
            .checked_pow(t)
            .and_then(|q| q.checked_sub(1))
            .filter(|&n| n <= INTERP_POINT_CAP)
            .ok_or_else(|| {
                Error::TooLarge(format!(
                    "interpolation needs p^t - 1 <= {INTERP_POINT_CAP} points"
                ))
            })?;
        let xi = gr.xi();
        let mut xi_pows = Vec::with_capacity(order as usize);
        let mut acc = gr.one();
        for _ in 0..order {
            xi_pows.push(acc.clone());
            acc = acc.mul(&xi);
        }
        debug_assert!(acc == gr.one(), "xi must have order p^t - 1");
        let inv_order = gr.scalar(order).unit_inv()?;
        Ok(InterpPlan {
            gr: gr.clone(),
            order,
            xi_pows,
            inv_order,
        })
    }

    pub fn gr(&self) -> &GrContext {
        &self.gr
    }

    /// p^t - 1, the number of evaluation points.
    pub fn order(&self) -> u64 {
        self.order
    }

    /// xi^e for any exponent, reduced mod the order.
    pub fn xi_pow(&self, e: u128) -> &GrElem {
        &self.xi_pows[(e % self.order as u128) as usize]
    }

    /// Coefficient of z^d from the evaluations f(xi^0), .., f(xi^(N-2)).
    pub fn coeff_from_values(&self, values: &[GrElem], d: u64) -> Result<GrElem> {
        if values.len() as u64 != self.order || d >= self.order {
            return Err(Error::InvalidInput(format!(
                "need {} evaluations and d < {}",
                self.order, self.order
            )));
        }
        let mut sum = self.gr.zero();
        for (j, v) in values.iter().enumerate() {
            let e = (j as u128 * d as u128) % self.order as u128;
            let inv_idx = ((self.order as u128 - e) % self.order as u128) as usize;
            sum = sum.add(&self.xi_pows[inv_idx].mul(v));
        }
        Ok(sum.mul(&self.inv_order))
    }
}

/// Exact coefficient of z^d in a stored univariate polynomial, recomputed
/// through the evaluation formula. deg f must stay below p^t - 1.
pub fn interp_coeff(plan: &InterpPlan, f: &SparsePoly<GrContext>, d: u64) -> Result<GrElem> {
    if f.arity() != 1 {
        return Err(Error::ArityMismatch {
            expected: 1,
            got: f.arity(),
        });
    }
    if f.degree() >= plan.order() {
        return Err(Error::TooLarge(format!(
            "degree {} not below interpolation order {}",
            f.degree(),
            plan.order()
        )));
    }
    let values: Vec<GrElem> = (0..plan.order() as usize)
        .map(|j| f.eval_at(std::slice::from_ref(&plan.xi_pows[j])))
        .collect::<Result<_>>()?;
    plan.coeff_from_values(&values, d)
}

/// Exact coefficient of x^alpha in the polynomial a circuit computes,
/// recovered by interpolation after a Kronecker substitution
/// x_i -> z^(D^(i-1)); the circuit is never expanded.
pub fn circuit_coeff(c: &Circuit<FqContext>, alpha: &[u32]) -> Result<FqElem> {
    let ctx = c.ring().clone();
    let n = c.arity();
    if alpha.len() != n {
        return Err(Error::ArityMismatch {
            expected: n,
            got: alpha.len(),
        });
    }
    let db = c.degree_bound();
    // outside the syntactic degree bound every coefficient is zero, and the
    // early exit keeps the packing base at db + 1 injective on the query
    if alpha.iter().any(|&a| u128::from(a) > db) {
        return Ok(ctx.zero());
    }
    let d_base = u64::try_from(db + 1).map_err(|_| Error::ExponentOverflow)?;
    let t = choose_t(ctx.t(), d_base, n.max(1), ctx.p())?;
    let fq_t = FqContext::new(ctx.p(), t)?;
    let gr = GrContext::new(&fq_t, 1)?;
    let lifted = c.map_ring(&gr, |a| gr.lift(&a.embed(&fq_t)?))?;
    let plan = InterpPlan::new(&gr)?;
    let dpows: Vec<u128> = (0..n)
        .scan(1u128, |acc, _| {
            let cur = *acc;
            *acc = acc.checked_mul(d_base as u128)?;
            Some(cur)
        })
        .collect();
    if dpows.len() != n {
        return Err(Error::ExponentOverflow);
    }
    let packed: u128 = alpha
        .iter()
        .zip(&dpows)
        .map(|(&a, &w)| u128::from(a) * w)
        .sum();
    let packed = u64::try_from(packed).map_err(|_| Error::ExponentOverflow)?;
    let values: Vec<GrElem> = (0..plan.order())
        .map(|j| {
            let args: Vec<GrElem> = dpows
                .iter()
                .map(|&w| plan.xi_pow(j as u128 * w).clone())
                .collect();
            lifted.eval(&args)
        })
        .collect::<Result<_>>()?;
    let big = gr.reduce(&plan.coeff_from_values(&values, packed)?);
    // the coefficient lies in the original field; pull it back through the
    // subfield embedding
    for cand in ctx.elements() {
        if cand.embed(&fq_t)? == big {
            return Ok(cand);
        }
    }
    unreachable!("interpolated coefficient escaped the base field");
}

/// Minimal multiple t of e with p^t - 1 >= D^n, by exact big-integer
/// comparison; refuses when the point count would exceed the cap.
pub fn choose_t(e: usize, d_base: u64, n: usize, p: u64) -> Result<usize> {
    use num::BigUint;
    let target = BigUint::from(d_base).pow(n as u32);
    let p_big = BigUint::from(p);
    let mut t = e;
    loop {
        let points = p_big.pow(t as u32) - 1u32;
        if points >= target {
            if points > BigUint::from(INTERP_POINT_CAP) {
                return Err(Error::TooLarge(format!(
                    "interpolation would need {points} points (cap {INTERP_POINT_CAP})"
                )));
            }
            return Ok(t);
        }
        t += e;
        if t > 64 {
            return Err(Error::TooLarge(
                "no admissible ring degree below 2^64 points".into(),
            ));
        }
    }
}

/// Append a copy of a circuit to the builder, returning its output node.
fn import_circuit<R: Ring>(builder: &mut CircuitBuilder<R>, c: &Circuit<R>) -> usize {
    let mut map = Vec::with_capacity(c.size());
    for node in c.nodes() {
        let id = match node {
            Node::Const(e) => builder.constant(e.clone()),
            Node::Var(j) => builder.var(*j),
            Node::Add(a, b) => builder.add(map[*a], map[*b]),
            Node::Mul(a, b) => builder.mul(map[*a], map[*b]),
        };
        map.push(id);
    }
    map[c.output()]
}

/// Determinant of a square matrix of builder nodes, division-free minor
/// expansion with memoized column masks. Signs mirror the polynomial-level
/// determinant exactly.
fn det_circuit<R: Ring>(
    ring: &R,
    builder: &mut CircuitBuilder<R>,
    entries: &[Vec<usize>],
) -> usize {
    let r = entries.len();
    if r == 0 {
        return builder.constant(ring.one());
    }
    let neg_one = builder.constant(ring.neg(&ring.one()));
    let full: u32 = (1u32 << r) - 1;
    let mut memo: std::collections::HashMap<u32, usize> = std::collections::HashMap::new();
    det_minor(builder, entries, full, &mut memo, neg_one)
}

fn det_minor<R: Ring>(
    builder: &mut CircuitBuilder<R>,
    entries: &[Vec<usize>],
    mask: u32,
    memo: &mut std::collections::HashMap<u32, usize>,
    neg_one: usize,
) -> usize {
    if let Some(&id) = memo.get(&mask) {
        return id;
    }
    let k = mask.count_ones() as usize;
    let row = k - 1;
    let mut acc: Option<usize> = None;
    // expansion along the last row of the submatrix; entry at ascending
    // column position idx gets sign (-1)^((k - 1) + idx)
    let mut sign_flip = (k - 1) % 2 == 1;
    for c in 0..entries.len() {
        if mask & (1 << c) == 0 {
            continue;
        }
        let sub = mask & !(1 << c);
        let term = if sub == 0 {
            entries[row][c]
        } else {
            let minor = det_minor(builder, entries, sub, memo, neg_one);
            builder.mul(entries[row][c], minor)
        };
        let signed = if sign_flip {
            builder.mul(neg_one, term)
        } else {
            term
        };
        acc = Some(match acc {
            None => signed,
            Some(a) => builder.add(a, signed),
        });
        sign_flip = !sign_flip;
    }
    let id = acc.expect("nonempty mask");
    memo.insert(mask, id);
    id
}

/// Assemble the scaled Jacobian determinant as one circuit:
/// (C_1 .. C_r)^(p^l - 1) * (prod_{j in I} x_j) * det(dC_i/dx_{I_j}).
pub fn wjp_circuit(
    cs: &[Circuit<GrContext>],
    index_set: &[usize],
    level: usize,
) -> Result<Circuit<GrContext>> {
    let r = cs.len();
    if r == 0 || index_set.len() != r {
        return Err(Error::ArityMismatch {
            expected: r,
            got: index_set.len(),
        });
    }
    let gr = cs[0].ring().clone();
    let arity = cs[0].arity();
    let p = gr.p() as u128;
    let pl = p
        .checked_pow(level as u32)
        .filter(|&v| v <= u64::MAX as u128)
        .ok_or(Error::ExponentOverflow)? as u64;
    let mut b = CircuitBuilder::new(&gr, arity);
    // (C_1 ... C_r)^(p^l - 1)
    let outs: Vec<usize> = cs.iter().map(|c| import_circuit(&mut b, c)).collect();
    let mut prod = outs[0];
    for &o in &outs[1..] {
        prod = b.mul(prod, o);
    }
    let mut acc = b.pow(prod, pl - 1);
    // * prod_{j in I} x_j
    for &j in index_set {
        let v = b.var(j);
        acc = b.mul(acc, v);
    }
    // * det of the derivative entries
    let entries: Vec<Vec<usize>> = cs
        .iter()
        .map(|c| {
            index_set
                .iter()
                .map(|&j| import_circuit(&mut b, &c.derivative_circuit(j)))
                .collect()
        })
        .collect();
    let det = det_circuit(&gr, &mut b, &entries);
    let out = b.mul(acc, det);
    Ok(b.finish(out))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Algo5Mode {
    /// Every (I, alpha) with alpha in [0, D)^n is enumerated; a faithful,
    /// fully expansion-free decision procedure.
    Exhaustive,
    /// Alphas come from sparsely expanding the assembled circuit; a
    /// cross-check of the polynomial-level criterion, not a simulation.
    SupportGuided,
}

impl Algo5Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algo5Mode::Exhaustive => "exhaustive",
            Algo5Mode::SupportGuided => "support-guided",
        }
    }
}

/// Everything the driver decided along the way, for reporting.
#[derive(Clone, Debug)]
pub struct Algo5Report {
    pub mode: Algo5Mode,
    pub level: usize,
    pub ring_degree: usize,
    pub d_base: u64,
    pub points: u64,
    pub degree_bound: u128,
    pub degree_guard: u128,
    pub alphas_checked: u64,
}

impl Algo5Report {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "mode": self.mode.as_str(),
            "level": self.level,
            "ring_degree": self.ring_degree,
            "kronecker_base": self.d_base,
            "points": self.points,
            "degree_bound": self.degree_bound.to_string(),
            "degree_guard": self.degree_guard.to_string(),
            "alphas_checked": self.alphas_checked,
        })
    }
}

pub fn algo5_independence(
    cs: &[Circuit<FqContext>],
    mode: Algo5Mode,
) -> Result<IndependenceVerdict> {
    algo5_independence_full(cs, mode).map(|(v, _)| v)
}

/// Circuit-level independence: lift to a big enough Galois ring, assemble
/// the scaled determinant per index set, and hunt for a coefficient that
/// beats its divisibility threshold.
pub fn algo5_independence_full(
    cs: &[Circuit<FqContext>],
    mode: Algo5Mode,
) -> Result<(IndependenceVerdict, Algo5Report)> {
    if cs.is_empty() {
        return Err(Error::InvalidInput("empty circuit system".into()));
    }
    let ctx = cs[0].ring().clone();
    let n = cs[0].arity();
    for c in cs {
        if c.ring() != &ctx {
            return Err(Error::ContextMismatch("circuits span different fields"));
        }
        if c.arity() != n {
            return Err(Error::ArityMismatch {
                expected: n,
                got: c.arity(),
            });
        }
    }
    let r = cs.len();
    let p = ctx.p();
    let delta_bound = cs.iter().map(|c| c.degree_bound()).max().unwrap_or(0);
    let mut report = Algo5Report {
        mode,
        level: 0,
        ring_degree: 0,
        d_base: 0,
        points: 0,
        degree_bound: 0,
        degree_guard: 0,
        alphas_checked: 0,
    };
    let dependent = |report: Algo5Report| {
        Ok((
            IndependenceVerdict {
                independent: false,
                method: Method::Algo5,
                level: None,
                witness: None,
            },
            report,
        ))
    };
    if r > n || delta_bound == 0 || cs.iter().any(|c| c.degree_bound() == 0) {
        return dependent(report);
    }
    let delta = u64::try_from(delta_bound).map_err(|_| Error::ExponentOverflow)?;
    // D = r * delta^(r+1) + 1 makes Kronecker packing injective on
    // everything the scaled determinant can produce
    let d_base_128 = (r as u128)
        .checked_mul((delta as u128).checked_pow(r as u32 + 1).ok_or(Error::ExponentOverflow)?)
        .and_then(|v| v.checked_add(1))
        .ok_or(Error::ExponentOverflow)?;
    let d_base = u64::try_from(d_base_128).map_err(|_| Error::ExponentOverflow)?;
    let level = choose_level(r, delta, p)?;
    let t = choose_t(ctx.t(), d_base, n, p)?;
    report.level = level;
    report.ring_degree = t;
    report.d_base = d_base;

    let fq_t = FqContext::new(p, t)?;
    let gr = GrContext::new(&fq_t, level + 1)?;
    let lifted: Vec<Circuit<GrContext>> = cs
        .iter()
        .map(|c| c.map_ring(&gr, |a| gr.lift(&a.embed(&fq_t)?)))
        .collect::<Result<_>>()?;

    let guard = (r as u128) * (delta as u128) * (p as u128).pow(level as u32).saturating_sub(1)
        + r as u128
        + (r as u128) * (delta as u128 - 1);
    report.degree_guard = guard;

    if mode == Algo5Mode::Exhaustive {
        let total = (d_base as u128).checked_pow(n as u32).ok_or(Error::ExponentOverflow)?;
        if total > ALGO5_EXHAUSTIVE_CAP as u128 {
            return Err(Error::TooLarge(format!(
                "exhaustive mode would enumerate {total} exponent vectors (cap {ALGO5_EXHAUSTIVE_CAP})"
            )));
        }
    }

    let plan = InterpPlan::new(&gr)?;
    report.points = plan.order();
    // x_i -> z^(D^(i-1)): evaluation points for variable i at step j
    let dpows: Vec<u128> = (0..n)
        .scan(1u128, |acc, _| {
            let v = *acc;
            *acc *= d_base as u128;
            Some(v)
        })
        .collect();

    for index_set in ColexSubsets::new(n, r) {
        let wc = wjp_circuit(&lifted, &index_set, level)?;
        let db = wc.degree_bound();
        report.degree_bound = report.degree_bound.max(db);
        assert!(
            db <= guard && guard < d_base as u128,
            "degree guard violated: {db} > {guard} or {guard} >= {d_base}"
        );
        match mode {
            Algo5Mode::SupportGuided => {
                let poly = wc.to_sparse_poly(WJP_TERM_CAP)?;
                report.alphas_checked += poly.num_terms() as u64;
                let rep = is_degenerate(&poly, level, DegeneracyMode::Bounded)?;
                if let Some((alpha, val, threshold)) = rep.witness {
                    return Ok((
                        independent_verdict(&index_set, &alpha, val, threshold, level),
                        report,
                    ));
                }
            }
            Algo5Mode::Exhaustive => {
                // evaluate once per point, then one inverse transform per
                // candidate exponent vector
                let values: Vec<GrElem> = (0..plan.order())
                    .map(|j| {
                        let args: Vec<GrElem> = dpows
                            .iter()
                            .map(|dp| plan.xi_pow(j as u128 * dp).clone())
                            .collect();
                        wc.eval(&args)
                    })
                    .collect::<Result<_>>()?;
                for alpha in alpha_candidates(n, d_base, db) {
                    report.alphas_checked += 1;
                    let d: u128 = alpha
                        .as_slice()
                        .iter()
                        .zip(&dpows)
                        .map(|(&a, dp)| a as u128 * dp)
                        .sum();
                    let coeff = plan.coeff_from_values(&values, d as u64)?;
                    let threshold = match exp_vp(&alpha, p) {
                        None => level + 1,
                        Some(v) => (v as usize).min(level) + 1,
                    };
                    let val = coeff.val_p();
                    if val < threshold {
                        return Ok((
                            independent_verdict(&index_set, &alpha, val, threshold, level),
                            report,
                        ));
                    }
                }
            }
        }
    }
    dependent(report)
}

fn independent_verdict(
    index_set: &[usize],
    alpha: &ExponentVec,
    val: usize,
    threshold: usize,
    level: usize,
) -> IndependenceVerdict {
    IndependenceVerdict {
        independent: true,
        method: Method::Algo5,
        level: Some(level),
        witness: Some(WjWitness {
            index_set: index_set.iter().map(|j| j + 1).collect(),
            alpha: alpha.as_slice().to_vec(),
            coeff_valuation: val,
            threshold,
        }),
    }
}

/// Exponent vectors in [0, D)^n with total degree at most the syntactic
/// bound, ascending graded-lex. Everything outside has coefficient zero.
fn alpha_candidates(n: usize, d_base: u64, degree_bound: u128) -> Vec<ExponentVec> {
    let per_var = (d_base - 1).min(u32::MAX as u64) as u32;
    let budget = degree_bound.min(u32::MAX as u128) as u32;
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fn rec(out: &mut Vec<ExponentVec>, cur: &mut Vec<u32>, pos: usize, left: u32, per_var: u32) {
        if pos == cur.len() {
            out.push(ExponentVec::from_slice(cur));
            return;
        }
        for e in 0..=left.min(per_var) {
            cur[pos] = e;
            rec(out, cur, pos + 1, left - e, per_var);
        }
        cur[pos] = 0;
    }
    rec(&mut out, &mut cur, 0, budget, per_var);
    out.sort();
    out
}
