//! Shared helpers for the integration suites: a seeded generator and the
//! small polynomial families the cross-validation criteria run over.

use witt_jacobian::fq::FqContext;
use witt_jacobian::poly::{ExponentVec, SparsePoly};

/// Splitmix-seeded LCG; deterministic across platforms, no dev-dependency.
pub struct Lcg64 {
    state: u64,
}

impl Lcg64 {
    pub fn new(seed: u64) -> Self {
        Lcg64 {
            state: seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self
            .state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.state >> 33
    }

    pub fn below(&mut self, m: u64) -> u64 {
        self.next_u64() % m
    }
}

/// Random sparse system: r polynomials in n variables, at most s terms each,
/// total degree at most delta per term.
pub fn random_system(
    rng: &mut Lcg64,
    ctx: &FqContext,
    n: usize,
    r: usize,
    delta: u32,
    s: usize,
) -> Vec<SparsePoly<FqContext>> {
    let elem = |rng: &mut Lcg64| {
        let k = rng.below(ctx.size());
        ctx.elements().nth(k as usize).unwrap()
    };
    (0..r)
        .map(|_| {
            let mut f = SparsePoly::zero(ctx, n);
            for _ in 0..s {
                let mut alpha = vec![0u32; n];
                loop {
                    for a in alpha.iter_mut() {
                        *a = rng.below(delta as u64 + 1) as u32;
                    }
                    if alpha.iter().map(|&a| a as u64).sum::<u64>() <= delta as u64 {
                        break;
                    }
                }
                f.add_term(ExponentVec::from_slice(&alpha), elem(rng));
            }
            f
        })
        .collect()
}

/// All exponent vectors in n variables with total degree in [1, delta].
pub fn nonconstant_exponents(n: usize, delta: u32) -> Vec<ExponentVec> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fn rec(out: &mut Vec<ExponentVec>, cur: &mut Vec<u32>, pos: usize, left: u32) {
        if pos == cur.len() {
            if cur.iter().any(|&e| e > 0) {
                out.push(ExponentVec::from_slice(cur));
            }
            return;
        }
        for e in 0..=left {
            cur[pos] = e;
            rec(out, cur, pos + 1, left - e);
        }
        cur[pos] = 0;
    }
    rec(&mut out, &mut cur, 0, delta);
    out.sort();
    out
}

/// Monic monomials and binomials in n variables of total degree <= delta:
/// x^a, and x^a + c*x^b for graded-lex a > b (b may be constant), c != 0.
pub fn monomials_and_binomials(ctx: &FqContext, n: usize, delta: u32) -> Vec<SparsePoly<FqContext>> {
    let heads = nonconstant_exponents(n, delta);
    let mut tails = vec![ExponentVec::zeros(n)];
    tails.extend(heads.iter().cloned());
    let units: Vec<_> = ctx
        .elements()
        .filter(|c| !c.is_zero())
        .collect();
    let mut out = Vec::new();
    for a in &heads {
        out.push(SparsePoly::monomial(ctx, a.clone(), ctx.one_elem()));
        for b in &tails {
            if b < a {
                for c in &units {
                    let mut f = SparsePoly::monomial(ctx, a.clone(), ctx.one_elem());
                    f.add_term(b.clone(), c.clone());
                    out.push(f);
                }
            }
        }
    }
    out
}

/// True when every variable index below n occurs in some term of the system;
/// systems failing this are relabelings of smaller-n instances.
pub fn uses_all_variables(fs: &[SparsePoly<FqContext>], n: usize) -> bool {
    let mut seen = vec![false; n];
    for f in fs {
        for (alpha, _) in f.terms() {
            for (j, flag) in seen.iter_mut().enumerate() {
                if alpha.get(j) > 0 {
                    *flag = true;
                }
            }
        }
    }
    seen.into_iter().all(|b| b)
}
