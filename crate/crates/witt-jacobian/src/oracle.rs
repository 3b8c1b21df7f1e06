//! Brute-force referee: search for an annihilating polynomial by plain
//! linear algebra.
//!
//! A dependence among f_1..f_r is a nonzero F with F(f_1,..,f_r) = 0.
//! Fixing a total-degree bound d, the coefficients of F are unknowns, one
//! per y-monomial of degree at most d, and expanding F(f) and equating every
//! x-coefficient to zero is a linear system. Iterative deepening up to
//! D = prod max(deg f_i, 1) gives the referee verdict the fast criterion is
//! measured against; "independent" always means "no annihilator up to D".

use crate::error::{Error, Result};
use crate::fq::{Coords, FqContext, FqElem};
use crate::poly::{poly_to_json, ExponentVec, SparsePoly};
use crate::ring::Ring;
use crate::wj::{common_context, IndependenceVerdict, Method};

/// Hard cap on the number of unknown coefficients in one search.
pub const ORACLE_UNKNOWNS_CAP: usize = 20_000;

/// A verified dependence witness.
#[derive(Clone, PartialEq, Debug)]
pub struct Annihilator {
    /// Nonzero polynomial in y_1..y_r composing with the system to zero.
    pub poly: SparsePoly<FqContext>,
    /// Degree bound the search ran at when it was found.
    pub degree_bound: u64,
}

impl Annihilator {
    pub fn to_json(&self) -> serde_json::Value {
        let names: Vec<String> = (1..=self.poly.arity()).map(|i| format!("y{i}")).collect();
        let mut j = poly_to_json(&self.poly);
        j["text"] = serde_json::Value::String(self.poly.to_text(&names));
        serde_json::json!({ "F": j, "degree_bound": self.degree_bound })
    }
}

/// Incremental reduced row echelon form over F_{p^t}, raw coordinates.
///
/// Rows are pushed one at a time; the basis stays fully reduced, so a kernel
/// vector can be read off as soon as all rows are in. Flattened layout: each
/// row is cols * t words.
struct Eliminator<'a> {
    ctx: &'a FqContext,
    cols: usize,
    t: usize,
    /// pivot column of each stored basis row, strictly increasing is not
    /// required; pivot_of_col[c] = index into basis
    pivot_of_col: Vec<Option<usize>>,
    basis: Vec<Vec<u64>>,
    basis_pivot: Vec<usize>,
}

impl<'a> Eliminator<'a> {
    fn new(ctx: &'a FqContext, cols: usize) -> Self {
        Eliminator {
            ctx,
            cols,
            t: ctx.t(),
            pivot_of_col: vec![None; cols],
            basis: Vec::new(),
            basis_pivot: Vec::new(),
        }
    }

    fn rank(&self) -> usize {
        self.basis.len()
    }

    fn entry<'r>(&self, row: &'r [u64], c: usize) -> &'r [u64] {
        &row[c * self.t..(c + 1) * self.t]
    }

    fn is_zero_entry(row: &[u64], c: usize, t: usize) -> bool {
        row[c * t..(c + 1) * t].iter().all(|&w| w == 0)
    }

    /// Reduce a row against the basis and absorb it if independent.
    fn push_row(&mut self, mut row: Vec<u64>) -> Result<()> {
        debug_assert_eq!(row.len(), self.cols * self.t);
        let t = self.t;
        // reduce against every pivot first; inserting at the first pivotless
        // column before clearing later pivot columns would break the reduced
        // shape the kernel read-off depends on
        for c in 0..self.cols {
            if Self::is_zero_entry(&row, c, t) {
                continue;
            }
            if let Some(b) = self.pivot_of_col[c] {
                // row -= row[c] * basis[b]  (basis pivot entry is 1)
                let factor = self.entry(&row, c).to_vec();
                let basis_row = &self.basis[b];
                for cc in c..self.cols {
                    if Self::is_zero_entry(basis_row, cc, t) {
                        continue;
                    }
                    let prod = self.ctx.raw_mul(&factor, self.entry(basis_row, cc));
                    let diff = self.ctx.raw_sub(self.entry(&row, cc), &prod);
                    row[cc * t..(cc + 1) * t].copy_from_slice(&diff);
                }
            }
        }
        let c = match (0..self.cols).find(|&c| !Self::is_zero_entry(&row, c, t)) {
            Some(c) => c,
            None => return Ok(()), // row reduced to zero
        };
        debug_assert!(self.pivot_of_col[c].is_none());
        // normalize and back-eliminate column c everywhere
        let inv = self.ctx.raw_inv(self.entry(&row, c))?;
        for cc in c..self.cols {
            if !Self::is_zero_entry(&row, cc, t) {
                let scaled = self.ctx.raw_mul(&inv, self.entry(&row, cc));
                row[cc * t..(cc + 1) * t].copy_from_slice(&scaled);
            }
        }
        for b in 0..self.basis.len() {
            if Self::is_zero_entry(&self.basis[b], c, t) {
                continue;
            }
            let factor = self.entry(&self.basis[b], c).to_vec();
            for cc in c..self.cols {
                if Self::is_zero_entry(&row, cc, t) {
                    continue;
                }
                let prod = self.ctx.raw_mul(&factor, self.entry(&row, cc));
                let diff = self.ctx.raw_sub(self.entry(&self.basis[b], cc), &prod);
                self.basis[b][cc * t..(cc + 1) * t].copy_from_slice(&diff);
            }
        }
        self.pivot_of_col[c] = Some(self.basis.len());
        self.basis.push(row);
        self.basis_pivot.push(c);
        Ok(())
    }

    /// Kernel vector with 1 at the first pivot-free column, if any.
    fn kernel(&self) -> Option<Vec<Coords>> {
        let free = (0..self.cols).find(|&c| self.pivot_of_col[c].is_none())?;
        let t = self.t;
        let mut v: Vec<Coords> = (0..self.cols)
            .map(|_| std::iter::repeat_n(0u64, t).collect())
            .collect();
        v[free][0] = 1; // little-endian power basis: 1 = [1, 0, ..]
        for (b, &pc) in self.basis_pivot.iter().enumerate() {
            if !Self::is_zero_entry(&self.basis[b], free, t) {
                v[pc] = self.ctx.raw_neg(self.entry(&self.basis[b], free));
            }
        }
        Some(v)
    }
}

/// First kernel vector of a matrix, or None when it has full column rank.
/// Deterministic: first-nonzero pivots, kernel at the first free column.
pub fn nullspace(ctx: &FqContext, rows: &[Vec<FqElem>]) -> Result<Option<Vec<FqElem>>> {
    let cols = match rows.first() {
        Some(r) => r.len(),
        None => return Ok(None),
    };
    let t = ctx.t();
    let mut elim = Eliminator::new(ctx, cols);
    for row in rows {
        if row.len() != cols {
            return Err(Error::ArityMismatch {
                expected: cols,
                got: row.len(),
            });
        }
        let mut flat = vec![0u64; cols * t];
        for (c, e) in row.iter().enumerate() {
            flat[c * t..(c + 1) * t].copy_from_slice(e.coords());
        }
        elim.push_row(flat)?;
    }
    Ok(elim
        .kernel()
        .map(|v| v.into_iter().map(|c| ctx.from_coords(c)).collect()))
}

/// All exponent vectors in r variables of total degree <= d, ascending.
fn monomials_up_to(r: usize, d: u64) -> Vec<ExponentVec> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; r];
    fn rec(out: &mut Vec<ExponentVec>, cur: &mut Vec<u32>, pos: usize, left: u32) {
        if pos == cur.len() {
            out.push(ExponentVec::from_slice(cur));
            return;
        }
        for e in 0..=left {
            cur[pos] = e;
            rec(out, cur, pos + 1, left - e);
        }
        cur[pos] = 0;
    }
    rec(&mut out, &mut cur, 0, d as u32);
    out.sort();
    out
}

fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)?;
        acc /= (i + 1) as u128;
    }
    Some(acc)
}

/// Search for an annihilator of total degree at most d. Returns a verified
/// annihilator, normalized so its leading coefficient is 1, or None when the
/// constraint matrix has full column rank.
pub fn annihilating_search(
    fs: &[SparsePoly<FqContext>],
    d: u64,
) -> Result<Option<Annihilator>> {
    let (ctx, _n) = common_context(fs)?;
    let r = fs.len();
    if d == 0 {
        return Err(Error::InvalidInput("degree bound must be at least 1".into()));
    }
    let count = binomial_u128(d + r as u64, r as u64).ok_or(Error::ExponentOverflow)?;
    if count > ORACLE_UNKNOWNS_CAP as u128 {
        return Err(Error::MatrixCapExceeded {
            dim: count.min(usize::MAX as u128) as usize,
            cap: ORACLE_UNKNOWNS_CAP,
        });
    }
    let monomials = monomials_up_to(r, d);
    debug_assert_eq!(monomials.len() as u128, count);

    // f_i^a for every needed power, then one composed column per y-monomial
    let mut powers: Vec<Vec<SparsePoly<FqContext>>> = Vec::with_capacity(r);
    for f in fs {
        let mut pw = vec![SparsePoly::one(ctx, f.arity())];
        for a in 1..=d {
            pw.push(pw[(a - 1) as usize].mul(f)?);
        }
        powers.push(pw);
    }
    let columns: Vec<SparsePoly<FqContext>> = monomials
        .iter()
        .map(|m| {
            let mut acc = SparsePoly::one(ctx, fs[0].arity());
            for (i, &e) in m.as_slice().iter().enumerate() {
                if e > 0 {
                    acc = acc.mul(&powers[i][e as usize])?;
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;

    // union x-support, ascending, one constraint row per x-monomial
    let mut support = std::collections::BTreeSet::new();
    for col in &columns {
        for (e, _) in col.terms() {
            support.insert(e.clone());
        }
    }
    let cols = monomials.len();
    let t = ctx.t();
    let mut elim = Eliminator::new(ctx, cols);
    for alpha in &support {
        let mut row = vec![0u64; cols * t];
        for (c, col) in columns.iter().enumerate() {
            let e = col.coeff(alpha);
            row[c * t..(c + 1) * t].copy_from_slice(e.coords());
        }
        elim.push_row(row)?;
        if elim.rank() == cols {
            return Ok(None); // full column rank, nothing at this degree
        }
    }
    let kernel = match elim.kernel() {
        Some(v) => v,
        None => return Ok(None),
    };

    let mut poly = SparsePoly::zero(ctx, r);
    for (k, coords) in kernel.iter().enumerate() {
        let e = ctx.from_coords(coords.clone());
        if !e.is_zero() {
            poly.add_term(monomials[k].clone(), e);
        }
    }
    assert!(!poly.is_zero(), "kernel vector cannot be zero");
    // monic in the leading (graded-lex largest) term
    let lead = poly
        .terms()
        .last()
        .map(|(_, c)| c.clone())
        .expect("nonzero polynomial has a leading term");
    let poly = poly.scale(&lead.inv()?);
    let composed = poly.compose(fs)?;
    assert!(
        composed.is_zero(),
        "annihilator failed verification: {composed:?}"
    );
    Ok(Some(Annihilator {
        poly,
        degree_bound: d,
    }))
}

/// Referee verdict by iterative deepening up to D = prod max(deg f_i, 1).
pub fn independence_oracle(fs: &[SparsePoly<FqContext>]) -> Result<IndependenceVerdict> {
    independence_oracle_full(fs).map(|(v, _)| v)
}

pub fn independence_oracle_full(
    fs: &[SparsePoly<FqContext>],
) -> Result<(IndependenceVerdict, Option<Annihilator>)> {
    let (ctx, _n) = common_context(fs)?;
    let r = fs.len();
    let verdict = |independent| IndependenceVerdict {
        independent,
        method: Method::Perron,
        level: None,
        witness: None,
    };
    // constant f_i: y_i - c annihilates without any search
    for (i, f) in fs.iter().enumerate() {
        if f.is_constant() {
            let c = f.coeff(&ExponentVec::zeros(f.arity()));
            let mut poly = SparsePoly::variable(ctx, r, i);
            poly.add_term(ExponentVec::zeros(r), ctx.neg(&c));
            debug_assert!(poly.compose(fs).unwrap().is_zero());
            return Ok((
                verdict(false),
                Some(Annihilator {
                    poly,
                    degree_bound: 1,
                }),
            ));
        }
    }
    let mut bound: u64 = 1;
    for f in fs {
        bound = bound
            .checked_mul(f.degree().max(1))
            .ok_or(Error::ExponentOverflow)?;
    }
    // refuse up front when the deepest search could not run: certifying
    // independence requires reaching the bound
    let deepest = binomial_u128(bound + r as u64, r as u64).ok_or(Error::ExponentOverflow)?;
    if deepest > ORACLE_UNKNOWNS_CAP as u128 {
        return Err(Error::MatrixCapExceeded {
            dim: deepest.min(usize::MAX as u128) as usize,
            cap: ORACLE_UNKNOWNS_CAP,
        });
    }
    for d in 1..=bound {
        if let Some(a) = annihilating_search(fs, d)? {
            return Ok((verdict(false), Some(a)));
        }
    }
    Ok((verdict(true), None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    fn fq(p: u64) -> FqContext {
        FqContext::new(p, 1).unwrap()
    }

    fn polys(ctx: &FqContext, n: usize, texts: &[&str]) -> Vec<SparsePoly<FqContext>> {
        let vars: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        texts
            .iter()
            .map(|t| parse_poly(ctx, &vars, t).unwrap())
            .collect()
    }

    #[test]
    fn test_nullspace_frozen() {
        let f2 = fq(2);
        let one = f2.one();
        let zero = f2.zero();
        // identity: trivial kernel only
        let id = vec![
            vec![one.clone(), zero.clone()],
            vec![zero.clone(), one.clone()],
        ];
        assert!(nullspace(&f2, &id).unwrap().is_none());
        // zero 1x1: kernel (1)
        let z = vec![vec![zero.clone()]];
        assert_eq!(nullspace(&f2, &z).unwrap().unwrap(), vec![one.clone()]);
        // [1 1]: kernel (1, 1) over F_2
        let m = vec![vec![one.clone(), one.clone()]];
        assert_eq!(
            nullspace(&f2, &m).unwrap().unwrap(),
            vec![one.clone(), one.clone()]
        );
    }

    #[test]
    fn test_nullspace_deterministic_first_free() {
        // over F_3: two proportional columns among three; the kernel must
        // use the first pivot-free column
        let f3 = fq(3);
        let e = |n: u64| f3.scalar(n);
        let rows = vec![
            vec![e(1), e(2), e(1)],
            vec![e(0), e(0), e(0)],
        ];
        let v = nullspace(&f3, &rows).unwrap().unwrap();
        // col 0 pivots; col 1 is free first: v = (-2, 1, 0) = (1, 1, 0)
        assert_eq!(v, vec![e(1), e(1), e(0)]);
    }

    #[test]
    fn test_annihilating_search_frozen() {
        let f3 = fq(3);
        // (x, x^2) at d = 2: y1^2 - y2
        let fs = polys(&f3, 1, &["x1", "x1^2"]);
        let a = annihilating_search(&fs, 2).unwrap().unwrap();
        let y = polys(&f3, 2, &["x1^2 + 2*x2"]).remove(0); // y1^2 - y2
        assert_eq!(a.poly, y);
        assert_eq!(a.degree_bound, 2);
        // nothing at d = 1
        assert!(annihilating_search(&fs, 1).unwrap().is_none());
        // independent coordinates: none through d = 3
        let fs = polys(&f3, 2, &["x1", "x2"]);
        for d in 1..=3 {
            assert!(annihilating_search(&fs, d).unwrap().is_none());
        }
        // duplicated polynomial: y1 - y2 exactly (monic leading y1)
        let f = polys(&f3, 2, &["x1*x2 + 2*x1"]).remove(0);
        let a = annihilating_search(&[f.clone(), f], 1).unwrap().unwrap();
        let y = polys(&f3, 2, &["x1 + 2*x2"]).remove(0);
        assert_eq!(a.poly, y);
    }

    #[test]
    fn test_elimination_order_regression() {
        // constraint rows here force a pivot into a column left of an
        // existing pivot; inserting before clearing the later pivot column
        // once produced an unsound kernel vector
        let f3 = fq(3);
        let fs = polys(&f3, 2, &["x1^2 + 2*x1", "2*x1^2"]);
        let (v, a) = independence_oracle_full(&fs).unwrap();
        assert!(!v.independent);
        let a = a.unwrap();
        assert_eq!(a.degree_bound, 2);
        assert_eq!(
            a.poly,
            polys(&f3, 2, &["x1^2 + 2*x1*x2 + x2^2 + x2"]).remove(0)
        );
        assert!(a.poly.compose(&fs).unwrap().is_zero());
    }

    #[test]
    fn test_oracle_frozen_verdicts() {
        let f2 = fq(2);
        // frobenius powers: no annihilator through D = 4
        let v = independence_oracle(&polys(&f2, 2, &["x1^2", "x2^2"])).unwrap();
        assert!(v.independent);
        assert_eq!(v.method, Method::Perron);
        // (g, g^2) dependent with y1^2 - y2
        let (v, a) =
            independence_oracle_full(&polys(&f2, 2, &["x1 + x2", "x1^2 + x2^2"])).unwrap();
        assert!(!v.independent);
        let a = a.unwrap();
        assert_eq!(a.poly, polys(&f2, 2, &["x1^2 + x2"]).remove(0));
        // single nonconstant polynomial
        let v = independence_oracle(&polys(&f2, 3, &["x1*x2*x3"])).unwrap();
        assert!(v.independent);
        // constants are dependent via y - c
        let (v, a) = independence_oracle_full(&polys(&f2, 1, &["x1", "1"])).unwrap();
        assert!(!v.independent);
        assert!(a.unwrap().poly.compose(&polys(&f2, 1, &["x1", "1"])).unwrap().is_zero());
    }

    #[test]
    fn test_oracle_permutation_stable() {
        let f3 = fq(3);
        let cases = [
            vec!["x1^2 + x2", "x2^2"],
            vec!["x1*x2", "x1^2*x2^2"],
            vec!["x1 + 2*x2", "x1^2"],
        ];
        for texts in &cases {
            let fs = polys(&f3, 2, texts);
            let swapped: Vec<_> = fs.iter().rev().cloned().collect();
            let v1 = independence_oracle(&fs).unwrap().independent;
            let v2 = independence_oracle(&swapped).unwrap().independent;
            assert_eq!(v1, v2, "verdict changed under permutation: {texts:?}");
        }
    }

    #[test]
    fn test_oracle_cap_is_refusal() {
        let f2 = fq(2);
        // C(d + r, r) past the cap refuses instead of guessing
        let fs = polys(&f2, 1, &["x1^300", "x1^301"]);
        match annihilating_search(&fs, 300) {
            Err(Error::MatrixCapExceeded { .. }) => {}
            other => panic!("expected cap refusal, got {other:?}"),
        }
        // the driver refuses up front: its deepest search would blow the cap
        match independence_oracle(&fs) {
            Err(Error::MatrixCapExceeded { .. }) => {}
            other => panic!("expected cap refusal, got {other:?}"),
        }
    }

    #[test]
    fn test_annihilator_json_shape() {
        let f3 = fq(3);
        let fs = polys(&f3, 1, &["x1", "x1^2"]);
        let a = annihilating_search(&fs, 2).unwrap().unwrap();
        let j = a.to_json();
        assert_eq!(j["degree_bound"], serde_json::json!(2));
        assert_eq!(j["F"]["arity"], serde_json::json!(2));
        assert_eq!(j["F"]["text"], serde_json::json!("y1^2 + 2*y2"));
    }
}
