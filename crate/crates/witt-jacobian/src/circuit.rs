//! Arithmetic circuits: DAGs of constant, variable, add and mul gates.
//!
//! Circuits are immutable after construction and evaluable over their ring;
//! there are no division or power gates (powers are repeated-squaring
//! subgraphs), which keeps every construction valid over Galois rings.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::poly::SparsePoly;
use crate::ring::Ring;

#[derive(Clone, PartialEq, Debug)]
pub enum Node<E> {
    Const(E),
    Var(usize),
    Add(usize, usize),
    Mul(usize, usize),
}

/// Single-output arithmetic circuit; nodes are topologically ordered.
#[derive(Clone, PartialEq, Debug)]
pub struct Circuit<R: Ring> {
    ring: R,
    arity: usize,
    nodes: Vec<Node<R::Elem>>,
    output: usize,
}

/// Incremental circuit construction; node ids are indices into the DAG.
pub struct CircuitBuilder<R: Ring> {
    ring: R,
    arity: usize,
    nodes: Vec<Node<R::Elem>>,
}

impl<R: Ring> CircuitBuilder<R> {
    pub fn new(ring: &R, arity: usize) -> Self {
        CircuitBuilder {
            ring: ring.clone(),
            arity,
            nodes: Vec::new(),
        }
    }

    fn push(&mut self, node: Node<R::Elem>) -> usize {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    pub fn constant(&mut self, c: R::Elem) -> usize {
        self.push(Node::Const(c))
    }

    pub fn var(&mut self, j: usize) -> usize {
        assert!(j < self.arity, "variable index out of range");
        self.push(Node::Var(j))
    }

    pub fn add(&mut self, a: usize, b: usize) -> usize {
        assert!(a < self.nodes.len() && b < self.nodes.len());
        self.push(Node::Add(a, b))
    }

    pub fn mul(&mut self, a: usize, b: usize) -> usize {
        assert!(a < self.nodes.len() && b < self.nodes.len());
        self.push(Node::Mul(a, b))
    }

    /// Power by a repeated-squaring subgraph; e = 0 gives the constant 1.
    pub fn pow(&mut self, a: usize, e: u64) -> usize {
        if e == 0 {
            return self.constant(self.ring.one());
        }
        // square-and-multiply, most significant bit first
        let mut acc = a;
        for i in (0..63 - e.leading_zeros() as u64).rev() {
            acc = self.mul(acc, acc);
            if (e >> i) & 1 == 1 {
                acc = self.mul(acc, a);
            }
        }
        acc
    }

    pub fn finish(self, output: usize) -> Circuit<R> {
        assert!(output < self.nodes.len(), "output node out of range");
        Circuit {
            ring: self.ring,
            arity: self.arity,
            nodes: self.nodes,
            output,
        }
    }
}

impl<R: Ring> Circuit<R> {
    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Node<R::Elem>] {
        &self.nodes
    }

    pub fn output(&self) -> usize {
        self.output
    }

    /// Topological sweep evaluation.
    pub fn eval(&self, point: &[R::Elem]) -> Result<R::Elem> {
        if point.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: point.len(),
            });
        }
        let mut vals: Vec<R::Elem> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = match node {
                Node::Const(c) => c.clone(),
                Node::Var(j) => point[*j].clone(),
                Node::Add(a, b) => self.ring.add(&vals[*a], &vals[*b]),
                Node::Mul(a, b) => self.ring.mul(&vals[*a], &vals[*b]),
            };
            vals.push(v);
        }
        Ok(vals[self.output].clone())
    }

    /// Syntactic degree: const 0, var 1, add max, mul sum. Always an upper
    /// bound for the degree of the computed polynomial.
    pub fn degree_bound(&self) -> u128 {
        let mut deg: Vec<u128> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let d = match node {
                Node::Const(_) => 0,
                Node::Var(_) => 1,
                Node::Add(a, b) => deg[*a].max(deg[*b]),
                Node::Mul(a, b) => deg[*a].saturating_add(deg[*b]),
            };
            deg.push(d);
        }
        deg[self.output]
    }

    /// Forward-mode derivative circuit for x_j. Zero and one summands or
    /// factors are folded away, which keeps the size within 4x the input
    /// and the syntactic degree at most max(degree_bound - 1, 0).
    pub fn derivative_circuit(&self, j: usize) -> Circuit<R> {
        assert!(j < self.arity, "variable index out of range");
        let mut nodes = self.nodes.clone();
        let zero = {
            nodes.push(Node::Const(self.ring.zero()));
            nodes.len() - 1
        };
        let is_zero = |nodes: &[Node<R::Elem>], i: usize| match &nodes[i] {
            Node::Const(c) => self.ring.is_zero(c),
            _ => false,
        };
        let is_one = |nodes: &[Node<R::Elem>], i: usize| match &nodes[i] {
            Node::Const(c) => *c == self.ring.one(),
            _ => false,
        };
        let mut d: Vec<usize> = Vec::with_capacity(self.nodes.len());
        for (i, node) in self.nodes.iter().enumerate() {
            let di = match node {
                Node::Const(_) => zero,
                Node::Var(k) => {
                    if *k == j {
                        nodes.push(Node::Const(self.ring.one()));
                        nodes.len() - 1
                    } else {
                        zero
                    }
                }
                Node::Add(a, b) => {
                    let (da, db) = (d[*a], d[*b]);
                    if is_zero(&nodes, da) {
                        db
                    } else if is_zero(&nodes, db) {
                        da
                    } else {
                        nodes.push(Node::Add(da, db));
                        nodes.len() - 1
                    }
                }
                Node::Mul(a, b) => {
                    let term = |nodes: &mut Vec<Node<R::Elem>>, df: usize, g: usize| {
                        if is_zero(nodes, df) {
                            None
                        } else if is_one(nodes, df) {
                            Some(g)
                        } else {
                            nodes.push(Node::Mul(df, g));
                            Some(nodes.len() - 1)
                        }
                    };
                    let t1 = term(&mut nodes, d[*a], *b);
                    let t2 = term(&mut nodes, d[*b], *a);
                    match (t1, t2) {
                        (None, None) => zero,
                        (Some(t), None) | (None, Some(t)) => t,
                        (Some(t1), Some(t2)) => {
                            nodes.push(Node::Add(t1, t2));
                            nodes.len() - 1
                        }
                    }
                }
            };
            d.push(di);
            let _ = i;
        }
        Circuit {
            ring: self.ring.clone(),
            arity: self.arity,
            output: d[self.output],
            nodes,
        }
    }

    /// Exact expansion into a sparse polynomial, capped by term count.
    pub fn to_sparse_poly(&self, cap: usize) -> Result<SparsePoly<R>> {
        let mut vals: Vec<SparsePoly<R>> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = match node {
                Node::Const(c) => SparsePoly::constant(&self.ring, self.arity, c.clone()),
                Node::Var(j) => SparsePoly::variable(&self.ring, self.arity, *j),
                Node::Add(a, b) => {
                    let s = vals[*a].add(&vals[*b])?;
                    if s.num_terms() > cap {
                        return Err(Error::TermCapExceeded { cap });
                    }
                    s
                }
                Node::Mul(a, b) => vals[*a].mul_capped(&vals[*b], cap)?,
            };
            vals.push(v);
        }
        Ok(vals[self.output].clone())
    }

    /// Rebuilds the circuit over another ring by mapping each constant.
    pub fn map_ring<S: Ring>(
        &self,
        ring: &S,
        f: impl Fn(&R::Elem) -> Result<S::Elem>,
    ) -> Result<Circuit<S>> {
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            nodes.push(match node {
                Node::Const(c) => Node::Const(f(c)?),
                Node::Var(j) => Node::Var(*j),
                Node::Add(a, b) => Node::Add(*a, *b),
                Node::Mul(a, b) => Node::Mul(*a, *b),
            });
        }
        Ok(Circuit {
            ring: ring.clone(),
            arity: self.arity,
            nodes,
            output: self.output,
        })
    }

    /// Straightforward circuit for a sparse polynomial: one repeated-squaring
    /// subgraph per variable power, terms summed left to right.
    pub fn from_sparse_poly(f: &SparsePoly<R>) -> Circuit<R> {
        let ring = f.ring().clone();
        let mut b = CircuitBuilder::new(&ring, f.arity());
        let vars: Vec<usize> = (0..f.arity()).map(|j| b.var(j)).collect();
        let mut sum: Option<usize> = None;
        for (e, c) in f.terms() {
            let mut term = b.constant(c.clone());
            for (j, &k) in e.as_slice().iter().enumerate() {
                if k > 0 {
                    let pw = b.pow(vars[j], k as u64);
                    term = b.mul(term, pw);
                }
            }
            sum = Some(match sum {
                None => term,
                Some(s) => b.add(s, term),
            });
        }
        let out = sum.unwrap_or_else(|| b.constant(ring.zero()));
        b.finish(out)
    }
}

// ---- text format ----
//
// One node per line: `n<i> = const <coeff> | var <j> | add n<a> n<b> |
// mul n<a> n<b>`, then `out n<i>`. Variables are 1-based (`var 1` is x1).
// A file may hold several circuits: each `out` line closes one block and
// resets the node namespace.

impl<R: Ring> Circuit<R> {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, node) in self.nodes.iter().enumerate() {
            match node {
                Node::Const(c) => writeln!(s, "n{i} = const {}", self.ring.elem_string(c)),
                Node::Var(j) => writeln!(s, "n{i} = var {}", j + 1),
                Node::Add(a, b) => writeln!(s, "n{i} = add n{a} n{b}"),
                Node::Mul(a, b) => writeln!(s, "n{i} = mul n{a} n{b}"),
            }
            .unwrap();
        }
        writeln!(s, "out n{}", self.output).unwrap();
        s
    }
}

/// Parses every circuit block in the text; arity is inferred from the
/// largest variable index unless fixed by the caller.
pub fn parse_circuits<R: Ring>(
    ring: &R,
    text: &str,
    arity: Option<usize>,
) -> Result<Vec<Circuit<R>>> {
    let mut out = Vec::new();
    let mut labels: HashMap<String, usize> = HashMap::new();
    let mut nodes: Vec<Node<R::Elem>> = Vec::new();
    let mut max_var = 0usize;
    let perr = |line: usize, msg: String| Error::Parse { line, msg };
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        if let Some(rest) = s.strip_prefix("out") {
            let name = rest.trim();
            let &output = labels
                .get(name)
                .ok_or_else(|| perr(line, format!("unknown node {name:?}")))?;
            out.push((std::mem::take(&mut nodes), output));
            labels.clear();
            continue;
        }
        let (lhs, rhs) = s
            .split_once('=')
            .ok_or_else(|| perr(line, "expected `n<i> = ...` or `out n<i>`".into()))?;
        let name = lhs.trim().to_string();
        if !name.starts_with('n') {
            return Err(perr(line, format!("node name {name:?} must start with n")));
        }
        if labels.contains_key(&name) {
            return Err(perr(line, format!("duplicate node {name:?}")));
        }
        let rhs = rhs.trim();
        let (kind, args) = rhs.split_once(char::is_whitespace).unwrap_or((rhs, ""));
        let args = args.trim();
        let resolve = |labels: &HashMap<String, usize>, tok: &str| {
            labels
                .get(tok)
                .copied()
                .ok_or_else(|| perr(line, format!("unknown node {tok:?}")))
        };
        let node = match kind {
            "const" => Node::Const(
                ring.parse_elem(args)
                    .map_err(|e| perr(line, e.to_string()))?,
            ),
            "var" => {
                let j: usize = args
                    .parse()
                    .map_err(|_| perr(line, format!("bad variable index {args:?}")))?;
                if j == 0 {
                    return Err(perr(line, "variables are 1-based".into()));
                }
                max_var = max_var.max(j);
                if let Some(n) = arity {
                    if j > n {
                        return Err(perr(line, format!("variable {j} exceeds arity {n}")));
                    }
                }
                Node::Var(j - 1)
            }
            "add" | "mul" => {
                let mut it = args.split_whitespace();
                let (a, b) = (it.next().unwrap_or(""), it.next().unwrap_or(""));
                if it.next().is_some() || b.is_empty() {
                    return Err(perr(line, "add/mul take exactly two nodes".into()));
                }
                let (a, b) = (resolve(&labels, a)?, resolve(&labels, b)?);
                if kind == "add" {
                    Node::Add(a, b)
                } else {
                    Node::Mul(a, b)
                }
            }
            other => return Err(perr(line, format!("unknown gate {other:?}"))),
        };
        nodes.push(node);
        labels.insert(name, nodes.len() - 1);
    }
    if !nodes.is_empty() {
        return Err(Error::Parse {
            line: text.lines().count(),
            msg: "circuit block missing its `out` line".into(),
        });
    }
    let arity = arity.unwrap_or(max_var);
    Ok(out
        .into_iter()
        .map(|(nodes, output)| Circuit {
            ring: ring.clone(),
            arity,
            nodes,
            output,
        })
        .collect())
}

/// Parses a file expected to hold exactly one circuit.
pub fn parse_circuit<R: Ring>(ring: &R, text: &str, arity: Option<usize>) -> Result<Circuit<R>> {
    let mut cs = parse_circuits(ring, text, arity)?;
    if cs.len() != 1 {
        return Err(Error::InvalidInput(format!(
            "expected one circuit, found {}",
            cs.len()
        )));
    }
    Ok(cs.pop().unwrap())
}
