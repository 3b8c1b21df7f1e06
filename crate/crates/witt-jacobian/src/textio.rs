//! Problem-file parsing: polynomial systems and circuit lists with a small
//! shared header.
//!
//! A file starts with optional header lines made entirely of `key=value`
//! tokens (keys: `p`, `e`, `vars`), followed by the payload. Polynomial
//! payload lines are either `name = <poly>` or a bare `<poly>` (auto-named
//! f1, f2, ...); circuit payloads use the gate-list format of the circuit
//! module. `#` starts a comment. Header values can instead be supplied by
//! the caller, e.g. from command-line flags; explicit header entries win.

use crate::circuit::{parse_circuits, Circuit};
use crate::error::{Error, Result};
use crate::fq::FqContext;
use crate::poly::{parse_poly, SparsePoly};

pub(crate) struct Header {
    pub(crate) p: Option<u64>,
    pub(crate) e: Option<usize>,
    pub(crate) vars: Option<Vec<String>>,
    pub(crate) body_start: usize,
}

/// Header lines come first and consist solely of key=value tokens; the first
/// line that does not parse that way begins the payload.
fn scan_header(text: &str) -> Result<Header> {
    let mut h = Header { p: None, e: None, vars: None, body_start: 0 };
    for (lineno, raw) in text.lines().enumerate() {
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            h.body_start = lineno + 1;
            continue;
        }
        let tokens: Vec<&str> = s.split_whitespace().collect();
        let all_header = tokens.iter().all(|t| {
            matches!(t.split_once('='), Some((k, _)) if ["p", "e", "vars"].contains(&k))
        });
        if !all_header {
            break;
        }
        for t in &tokens {
            let (k, v) = t.split_once('=').unwrap();
            let line = lineno + 1;
            match k {
                "p" => {
                    h.p = Some(v.parse().map_err(|_| Error::Parse {
                        line,
                        msg: format!("bad characteristic {v:?}"),
                    })?)
                }
                "e" => {
                    h.e = Some(v.parse().map_err(|_| Error::Parse {
                        line,
                        msg: format!("bad extension degree {v:?}"),
                    })?)
                }
                "vars" => {
                    let vs: Vec<String> =
                        v.split(',').map(|x| x.trim().to_string()).collect();
                    if vs.iter().any(|x| x.is_empty()) {
                        return Err(Error::Parse { line, msg: "empty variable name".into() });
                    }
                    h.vars = Some(vs);
                }
                _ => unreachable!(),
            }
        }
        h.body_start = lineno + 1;
    }
    Ok(h)
}

/// Header values plus the payload's first line index, for callers that parse
/// their own payload format.
pub(crate) fn header_fields(text: &str) -> Result<Header> {
    scan_header(text)
}

fn resolve_context(h: &Header, cli_p: Option<u64>, cli_e: Option<usize>) -> Result<FqContext> {
    let p = h.p.or(cli_p).ok_or_else(|| {
        Error::InvalidInput("characteristic not given (header p=... or a flag)".into())
    })?;
    let e = h.e.or(cli_e).unwrap_or(1);
    FqContext::new(p, e)
}

/// Largest index k such that a token `x<k>` appears outside comments.
pub(crate) fn max_var_index(text: &str) -> usize {
    let mut max = 0usize;
    for raw in text.lines() {
        let s = raw.split('#').next().unwrap_or("");
        let bytes = s.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            if bytes[i] == b'x'
                && (i == 0 || !bytes[i - 1].is_ascii_alphanumeric())
                && i + 1 < bytes.len()
                && bytes[i + 1].is_ascii_digit()
            {
                let mut j = i + 1;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                if j >= bytes.len() || !bytes[j].is_ascii_alphabetic() {
                    if let Ok(k) = s[i + 1..j].parse::<usize>() {
                        max = max.max(k);
                    }
                }
                i = j;
            } else {
                i += 1;
            }
        }
    }
    max
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A parsed polynomial-system file.
#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub ctx: FqContext,
    pub vars: Vec<String>,
    pub polys: Vec<(String, SparsePoly<FqContext>)>,
}

impl ProblemFile {
    /// Parses a polynomial file; `cli_p`/`cli_e` fill in a missing header.
    /// Without a `vars` header the variables are x1..xk for the largest
    /// index k mentioned anywhere in the payload.
    pub fn parse(text: &str, cli_p: Option<u64>, cli_e: Option<usize>) -> Result<ProblemFile> {
        let h = scan_header(text)?;
        let ctx = resolve_context(&h, cli_p, cli_e)?;
        let body: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .skip(h.body_start)
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        let vars = match h.vars {
            Some(v) => v,
            None => {
                let k = body
                    .iter()
                    .map(|(_, l)| max_var_index(l))
                    .max()
                    .unwrap_or(0);
                (1..=k).map(|i| format!("x{i}")).collect()
            }
        };
        let mut polys = Vec::new();
        for (line, l) in body {
            let (name, src) = match l.split_once('=') {
                Some((lhs, rhs)) if is_identifier(lhs.trim()) => {
                    (lhs.trim().to_string(), rhs.trim())
                }
                Some(_) => {
                    return Err(Error::Parse {
                        line,
                        msg: "left of `=` must be a name".into(),
                    })
                }
                None => (format!("f{}", polys.len() + 1), l),
            };
            if polys.iter().any(|(n, _)| *n == name) {
                return Err(Error::Parse { line, msg: format!("duplicate name {name:?}") });
            }
            let f = parse_poly(&ctx, &vars, src).map_err(|e| match e {
                Error::Parse { msg, .. } => Error::Parse { line, msg },
                other => Error::Parse { line, msg: other.to_string() },
            })?;
            polys.push((name, f));
        }
        if polys.is_empty() {
            return Err(Error::InvalidInput("no polynomials in input".into()));
        }
        Ok(ProblemFile { ctx, vars, polys })
    }

    pub fn systems(&self) -> Vec<SparsePoly<FqContext>> {
        self.polys.iter().map(|(_, f)| f.clone()).collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "p={} e={} vars={}\n",
            self.ctx.p(),
            self.ctx.t(),
            self.vars.join(",")
        );
        for (name, f) in &self.polys {
            s.push_str(&format!("{} = {}\n", name, f.to_text(&self.vars)));
        }
        s
    }
}

/// A parsed circuit-list file (same header, gate-list payload).
#[derive(Debug, Clone)]
pub struct CircuitFile {
    pub ctx: FqContext,
    pub circuits: Vec<Circuit<FqContext>>,
}

impl CircuitFile {
    pub fn parse(
        text: &str,
        cli_p: Option<u64>,
        cli_e: Option<usize>,
        arity: Option<usize>,
    ) -> Result<CircuitFile> {
        let h = scan_header(text)?;
        let ctx = resolve_context(&h, cli_p, cli_e)?;
        let body: String = text
            .lines()
            .skip(h.body_start)
            .collect::<Vec<_>>()
            .join("\n");
        let circuits = parse_circuits(&ctx, &body, arity)?;
        if circuits.is_empty() {
            return Err(Error::InvalidInput("no circuits in input".into()));
        }
        Ok(CircuitFile { ctx, circuits })
    }
}
