//! Sparse multivariate polynomials over a generic coefficient ring.
//!
//! Terms live in a BTreeMap keyed by exponent vectors in graded-lex order,
//! which makes every traversal and printed form canonical. Exponent vectors
//! are dense (one u32 slot per variable).

use smallvec::SmallVec;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::ring::Ring;

/// Dense exponent vector; ordered by total degree, then lexicographically.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct ExponentVec(SmallVec<[u32; 8]>);

impl ExponentVec {
    pub fn zeros(n: usize) -> Self {
        ExponentVec(SmallVec::from_elem(0, n))
    }

    pub fn from_slice(e: &[u32]) -> Self {
        ExponentVec(SmallVec::from_slice(e))
    }

    pub fn unit(n: usize, j: usize) -> Self {
        let mut e = Self::zeros(n);
        e.0[j] = 1;
        e
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, j: usize) -> u32 {
        self.0[j]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn total_degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    fn checked_add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.0.len(), other.0.len());
        ExponentVec(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| a.checked_add(b).expect("exponent overflow"))
                .collect(),
        )
    }

    fn with_decremented(&self, j: usize) -> Self {
        let mut e = self.clone();
        e.0[j] -= 1;
        e
    }
}

impl Ord for ExponentVec {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for ExponentVec {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// p-adic valuation of an exponent vector: the largest v such that p^v
/// divides every component. None encodes infinity (the zero vector).
pub fn exp_vp(alpha: &ExponentVec, p: u64) -> Option<u32> {
    let mut best: Option<u32> = None;
    for &e in alpha.as_slice() {
        if e == 0 {
            continue;
        }
        let mut v = 0u32;
        let mut e = e as u64;
        while e.is_multiple_of(p) {
            e /= p;
            v += 1;
        }
        best = Some(best.map_or(v, |b| b.min(v)));
    }
    best
}

/// Sparse polynomial with a coefficient-ring tag and fixed arity.
#[derive(Clone, PartialEq, Debug)]
pub struct SparsePoly<R: Ring> {
    ring: R,
    arity: usize,
    terms: BTreeMap<ExponentVec, R::Elem>,
}

impl<R: Ring> SparsePoly<R> {
    pub fn zero(ring: &R, arity: usize) -> Self {
        SparsePoly {
            ring: ring.clone(),
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ring: &R, arity: usize, c: R::Elem) -> Self {
        let mut f = Self::zero(ring, arity);
        f.add_term(ExponentVec::zeros(arity), c);
        f
    }

    pub fn one(ring: &R, arity: usize) -> Self {
        Self::constant(ring, arity, ring.one())
    }

    pub fn variable(ring: &R, arity: usize, j: usize) -> Self {
        assert!(j < arity, "variable index out of range");
        let mut f = Self::zero(ring, arity);
        f.add_term(ExponentVec::unit(arity, j), ring.one());
        f
    }

    pub fn monomial(ring: &R, alpha: ExponentVec, c: R::Elem) -> Self {
        let mut f = Self::zero(ring, alpha.len());
        f.add_term(alpha, c);
        f
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Max total degree of a stored term; 0 for the zero polynomial.
    pub fn degree(&self) -> u64 {
        self.terms
            .keys()
            .map(|e| e.total_degree())
            .max()
            .unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.is_zero())
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&ExponentVec, &R::Elem)> {
        self.terms.iter()
    }

    pub fn coeff(&self, alpha: &ExponentVec) -> R::Elem {
        self.terms
            .get(alpha)
            .cloned()
            .unwrap_or_else(|| self.ring.zero())
    }

    /// Adds c * x^alpha, dropping the term if the sum vanishes.
    pub fn add_term(&mut self, alpha: ExponentVec, c: R::Elem) {
        assert_eq!(alpha.len(), self.arity, "exponent arity mismatch");
        if self.ring.is_zero(&c) {
            return;
        }
        match self.terms.remove(&alpha) {
            None => {
                self.terms.insert(alpha, c);
            }
            Some(old) => {
                let s = self.ring.add(&old, &c);
                if !self.ring.is_zero(&s) {
                    self.terms.insert(alpha, s);
                }
            }
        }
    }

    fn check_compat(&self, other: &Self) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::ContextMismatch("polynomials over different rings"));
        }
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: other.arity,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compat(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero(&self.ring, self.arity);
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), self.ring.neg(c));
        }
        out
    }

    pub fn scale(&self, c: &R::Elem) -> Self {
        let mut out = Self::zero(&self.ring, self.arity);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), self.ring.mul(v, c));
        }
        out
    }

    pub fn mul_monomial(&self, alpha: &ExponentVec, c: &R::Elem) -> Self {
        assert_eq!(alpha.len(), self.arity);
        let mut out = Self::zero(&self.ring, self.arity);
        for (e, v) in &self.terms {
            out.add_term(e.checked_add(alpha), self.ring.mul(v, c));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.mul_capped(other, usize::MAX)
    }

    /// Product that fails once the intermediate term count exceeds the cap.
    pub fn mul_capped(&self, other: &Self, cap: usize) -> Result<Self> {
        self.check_compat(other)?;
        let mut out = Self::zero(&self.ring, self.arity);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(ea.checked_add(eb), self.ring.mul(ca, cb));
                if out.terms.len() > cap {
                    return Err(Error::TermCapExceeded { cap });
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u64) -> Result<Self> {
        self.pow_capped(e, usize::MAX)
    }

    pub fn pow_capped(&self, mut e: u64, cap: usize) -> Result<Self> {
        let mut acc = Self::one(&self.ring, self.arity);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_capped(&base, cap)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_capped(&base, cap)?;
            }
        }
        Ok(acc)
    }

    /// Partial derivative; the exponent multiplier maps into the ring via
    /// the additive image of the integer, so x^p differentiates to 0 in
    /// characteristic p.
    pub fn partial_derivative(&self, j: usize) -> Self {
        assert!(j < self.arity, "variable index out of range");
        let mut out = Self::zero(&self.ring, self.arity);
        for (e, c) in &self.terms {
            let k = e.get(j);
            if k == 0 {
                continue;
            }
            let mult = self.ring.from_i64(k as i64);
            out.add_term(e.with_decremented(j), self.ring.mul(c, &mult));
        }
        out
    }

    /// Substitutes values for a subset of the variables.
    pub fn evaluate(&self, assignment: &[(usize, R::Elem)]) -> Result<Self> {
        for (j, _) in assignment {
            if *j >= self.arity {
                return Err(Error::InvalidInput(format!("variable x{} out of range", j + 1)));
            }
        }
        let mut out = Self::zero(&self.ring, self.arity);
        for (e, c) in &self.terms {
            let mut coeff = c.clone();
            let mut newexp = e.clone();
            for (j, v) in assignment {
                let k = e.get(*j);
                if k > 0 {
                    coeff = self.ring.mul(&coeff, &self.ring.pow(v, k as u64));
                    newexp.0[*j] = 0;
                }
            }
            out.add_term(newexp, coeff);
        }
        Ok(out)
    }

    /// Full evaluation at a point.
    pub fn eval_at(&self, point: &[R::Elem]) -> Result<R::Elem> {
        if point.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: point.len(),
            });
        }
        let mut acc = self.ring.zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (j, &k) in e.as_slice().iter().enumerate() {
                if k > 0 {
                    term = self.ring.mul(&term, &self.ring.pow(&point[j], k as u64));
                }
            }
            acc = self.ring.add(&acc, &term);
        }
        Ok(acc)
    }

    /// Composition: substitutes a polynomial for each variable.
    pub fn compose(&self, args: &[Self]) -> Result<Self> {
        if args.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: args.len(),
            });
        }
        let target_arity = if args.is_empty() { 0 } else { args[0].arity };
        for a in args {
            if a.arity != target_arity || a.ring != self.ring {
                return Err(Error::ContextMismatch("composition arguments disagree"));
            }
        }
        // memoize powers of each argument
        let mut pows: Vec<Vec<Self>> = args
            .iter()
            .map(|a| vec![Self::one(&self.ring, target_arity), a.clone()])
            .collect();
        let mut out = Self::zero(&self.ring, target_arity);
        for (e, c) in &self.terms {
            let mut term = Self::constant(&self.ring, target_arity, c.clone());
            for (i, &k) in e.as_slice().iter().enumerate() {
                while pows[i].len() <= k as usize {
                    let next = pows[i].last().unwrap().mul(&args[i])?;
                    pows[i].push(next);
                }
                if k > 0 {
                    term = term.mul(&pows[i][k as usize])?;
                }
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Kronecker substitution x_i -> z^{D^{i-1}}; with check_bijective the
    /// map is injective on exponent vectors with all entries below D.
    pub fn kronecker_substitute(&self, d_base: u64, check_bijective: bool) -> Result<Self> {
        let mut out = Self::zero(&self.ring, 1);
        for (e, c) in &self.terms {
            let mut packed: u128 = 0;
            let mut weight: u128 = 1;
            for (i, &k) in e.as_slice().iter().enumerate() {
                if check_bijective && k as u64 >= d_base {
                    return Err(Error::InvalidInput(format!(
                        "exponent {k} of x{} not below the Kronecker base {d_base}",
                        i + 1
                    )));
                }
                packed += k as u128 * weight;
                if i + 1 < e.len() {
                    weight = weight
                        .checked_mul(d_base as u128)
                        .ok_or(Error::ExponentOverflow)?;
                }
            }
            let packed: u32 = packed.try_into().map_err(|_| Error::ExponentOverflow)?;
            out.add_term(ExponentVec::from_slice(&[packed]), c.clone());
        }
        Ok(out)
    }

    /// Reduces every exponent of a univariate polynomial mod q, merging any
    /// colliding terms.
    pub fn reduce_exponents_mod(&self, q: u64) -> Result<Self> {
        if self.arity != 1 {
            return Err(Error::ArityMismatch {
                expected: 1,
                got: self.arity,
            });
        }
        if q == 0 {
            return Err(Error::DivisionByZero);
        }
        let mut out = Self::zero(&self.ring, 1);
        for (e, c) in &self.terms {
            let r = (e.get(0) as u64 % q) as u32;
            out.add_term(ExponentVec::from_slice(&[r]), c.clone());
        }
        Ok(out)
    }

    /// Maps coefficients into another ring.
    pub fn map_ring<S: Ring>(
        &self,
        ring: &S,
        f: impl Fn(&R::Elem) -> Result<S::Elem>,
    ) -> Result<SparsePoly<S>> {
        let mut out = SparsePoly::zero(ring, self.arity);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), f(c)?);
        }
        Ok(out)
    }

    /// Canonical text form, leading term first.
    pub fn to_text(&self, vars: &[String]) -> String {
        assert_eq!(vars.len(), self.arity);
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (e, c) in self.terms.iter().rev() {
            let mut factors = Vec::new();
            let cs = self.ring.elem_string(c);
            let one = self.ring.elem_string(&self.ring.one());
            if cs != one || e.is_zero() {
                factors.push(cs);
            }
            for (j, &k) in e.as_slice().iter().enumerate() {
                match k {
                    0 => {}
                    1 => factors.push(vars[j].clone()),
                    _ => factors.push(format!("{}^{}", vars[j], k)),
                }
            }
            parts.push(factors.join("*"));
        }
        parts.join(" + ")
    }
}

impl<R: Ring> fmt::Display for SparsePoly<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vars: Vec<String> = (1..=self.arity).map(|i| format!("x{i}")).collect();
        write!(f, "{}", self.to_text(&vars))
    }
}

/// Row-major matrix of polynomials over a shared ring.
#[derive(Clone, Debug)]
pub struct PolyMatrix<R: Ring> {
    pub rows: usize,
    pub cols: usize,
    entries: Vec<SparsePoly<R>>,
}

/// Hard cap on determinant dimension: cofactor expansion is exponential.
pub const DET_DIM_CAP: usize = 5;

impl<R: Ring> PolyMatrix<R> {
    pub fn new(rows: usize, cols: usize, entries: Vec<SparsePoly<R>>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::InvalidInput("matrix shape mismatch".into()));
        }
        Ok(PolyMatrix { rows, cols, entries })
    }

    pub fn at(&self, i: usize, j: usize) -> &SparsePoly<R> {
        &self.entries[i * self.cols + j]
    }

    /// Determinant by cofactor expansion, memoized over column subsets.
    /// Works over any commutative ring: zero divisors rule out elimination.
    pub fn det_division_free(&self) -> Result<SparsePoly<R>> {
        if self.rows != self.cols {
            return Err(Error::InvalidInput("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        if n > DET_DIM_CAP {
            return Err(Error::MatrixCapExceeded {
                dim: n,
                cap: DET_DIM_CAP,
            });
        }
        if n == 0 {
            let ring = self.entries.first().map(|e| e.ring().clone());
            return match ring {
                Some(r) => Ok(SparsePoly::one(&r, 0)),
                None => Err(Error::InvalidInput("empty matrix needs a ring".into())),
            };
        }
        let ring = self.entries[0].ring().clone();
        let arity = self.entries[0].arity();
        // minors[mask] = det of rows 0..k-1 against the column set in mask
        let mut memo: std::collections::HashMap<u32, SparsePoly<R>> =
            std::collections::HashMap::new();
        let full: u32 = (1 << n) - 1;
        let det = self.minor(full, &mut memo, &ring, arity)?;
        Ok(det)
    }

    fn minor(
        &self,
        mask: u32,
        memo: &mut std::collections::HashMap<u32, SparsePoly<R>>,
        ring: &R,
        arity: usize,
    ) -> Result<SparsePoly<R>> {
        if mask == 0 {
            return Ok(SparsePoly::one(ring, arity));
        }
        if let Some(hit) = memo.get(&mask) {
            return Ok(hit.clone());
        }
        let k = mask.count_ones() as usize; // expanding along row k-1
        let mut acc = SparsePoly::zero(ring, arity);
        // cofactor sign (-1)^(row + col position) with row = k-1
        let mut sign_flip = (k - 1) % 2 == 1;
        for j in 0..self.cols {
            if mask & (1 << j) == 0 {
                continue;
            }
            let sub = self.minor(mask & !(1 << j), memo, ring, arity)?;
            let term = self.at(k - 1, j).mul(&sub)?;
            acc = if sign_flip { acc.sub(&term)? } else { acc.add(&term)? };
            sign_flip = !sign_flip;
        }
        memo.insert(mask, acc.clone());
        Ok(acc)
    }
}

/// Jacobian matrix of fs with respect to the listed variables; entry (i, j)
/// is the derivative of fs[i] by vars[j].
pub fn jacobian_matrix<R: Ring>(fs: &[SparsePoly<R>], vars: &[usize]) -> Result<PolyMatrix<R>> {
    if fs.is_empty() {
        return Err(Error::InvalidInput("empty polynomial list".into()));
    }
    let mut entries = Vec::with_capacity(fs.len() * vars.len());
    for f in fs {
        for &j in vars {
            entries.push(f.partial_derivative(j));
        }
    }
    PolyMatrix::new(fs.len(), vars.len(), entries)
}

// ---- text and JSON forms ----

/// Parses the `coeff*x1^a1*x2^a2 + ...` format. Variable names are matched
/// against `vars`; coefficients use the ring's element syntax.
pub fn parse_poly<R: Ring>(ring: &R, vars: &[String], input: &str) -> Result<SparsePoly<R>> {
    let arity = vars.len();
    let mut out = SparsePoly::zero(ring, arity);
    let s = input.trim();
    if s.is_empty() || s == "0" {
        return Ok(out);
    }
    // split on + and - at top level, keeping signs
    let mut terms: Vec<(bool, String)> = Vec::new();
    let mut cur = String::new();
    let mut neg = false;
    let mut depth = 0i32;
    for ch in s.chars() {
        match ch {
            '[' => {
                depth += 1;
                cur.push(ch);
            }
            ']' => {
                depth -= 1;
                cur.push(ch);
            }
            '+' | '-' if depth == 0 && !cur.trim().is_empty() => {
                terms.push((neg, cur.trim().to_string()));
                cur = String::new();
                neg = ch == '-';
            }
            '-' if depth == 0 && cur.trim().is_empty() => {
                neg = !neg;
            }
            _ => cur.push(ch),
        }
    }
    if !cur.trim().is_empty() {
        terms.push((neg, cur.trim().to_string()));
    }
    for (is_neg, term) in terms {
        let mut coeff = ring.one();
        let mut exp = ExponentVec::zeros(arity);
        for factor in split_factors(&term) {
            let factor = factor.trim();
            if factor.is_empty() {
                continue;
            }
            let (base, power) = match factor.split_once('^') {
                Some((b, p)) => {
                    let pw: u32 = p.trim().parse().map_err(|_| {
                        Error::InvalidInput(format!("bad exponent in {factor:?}"))
                    })?;
                    (b.trim(), pw)
                }
                None => (factor, 1),
            };
            if let Some(j) = vars.iter().position(|v| v == base) {
                let cur = exp.get(j);
                let mut e2 = exp.clone();
                e2.0[j] = cur.checked_add(power).expect("exponent overflow");
                exp = e2;
            } else {
                // a coefficient factor, possibly repeated
                let c = ring.parse_elem(base)?;
                let c = if power == 1 {
                    c
                } else {
                    let mut acc = ring.one();
                    for _ in 0..power {
                        acc = ring.mul(&acc, &c);
                    }
                    acc
                };
                coeff = ring.mul(&coeff, &c);
            }
        }
        if is_neg {
            coeff = ring.neg(&coeff);
        }
        out.add_term(exp, coeff);
    }
    Ok(out)
}

/// Splits a term on `*` while respecting bracketed coefficient lists.
fn split_factors(term: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0i32;
    for ch in term.chars() {
        match ch {
            '[' => {
                depth += 1;
                cur.push(ch);
            }
            ']' => {
                depth -= 1;
                cur.push(ch);
            }
            '*' if depth == 0 => {
                out.push(cur.clone());
                cur.clear();
            }
            _ => cur.push(ch),
        }
    }
    out.push(cur);
    out
}

/// JSON form: {"arity": n, "exps": [[..], ..], "coeffs": ["[..]", ..]}.
pub fn poly_to_json<R: Ring>(f: &SparsePoly<R>) -> serde_json::Value {
    let mut exps = Vec::new();
    let mut coeffs = Vec::new();
    for (e, c) in f.terms() {
        exps.push(serde_json::Value::Array(
            e.as_slice()
                .iter()
                .map(|&k| serde_json::Value::from(k))
                .collect(),
        ));
        coeffs.push(serde_json::Value::from(f.ring().elem_string(c)));
    }
    serde_json::json!({
        "arity": f.arity(),
        "exps": exps,
        "coeffs": coeffs,
    })
}

pub fn poly_from_json<R: Ring>(ring: &R, v: &serde_json::Value) -> Result<SparsePoly<R>> {
    let arity = v
        .get("arity")
        .and_then(|a| a.as_u64())
        .ok_or_else(|| Error::InvalidInput("poly json missing arity".into()))? as usize;
    let exps = v
        .get("exps")
        .and_then(|a| a.as_array())
        .ok_or_else(|| Error::InvalidInput("poly json missing exps".into()))?;
    let coeffs = v
        .get("coeffs")
        .and_then(|a| a.as_array())
        .ok_or_else(|| Error::InvalidInput("poly json missing coeffs".into()))?;
    if exps.len() != coeffs.len() {
        return Err(Error::InvalidInput("exps/coeffs length mismatch".into()));
    }
    let mut out = SparsePoly::zero(ring, arity);
    for (e, c) in exps.iter().zip(coeffs) {
        let ev: Vec<u32> = e
            .as_array()
            .ok_or_else(|| Error::InvalidInput("bad exponent vector".into()))?
            .iter()
            .map(|x| x.as_u64().map(|v| v as u32))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::InvalidInput("bad exponent vector".into()))?;
        if ev.len() != arity {
            return Err(Error::InvalidInput("exponent arity mismatch".into()));
        }
        let cs = c
            .as_str()
            .ok_or_else(|| Error::InvalidInput("coefficients must be strings".into()))?;
        out.add_term(ExponentVec::from_slice(&ev), ring.parse_elem(cs)?);
    }
    Ok(out)
}
