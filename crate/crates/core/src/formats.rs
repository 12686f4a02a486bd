//! Plain-text instance formats.
//!
//! * Knapsack: `n K` on the first line, then `n` coefficients.
//! * ILP: `d n` on the first line, then `d` lines of `n` coefficients, a
//!   relation token (`<=` or `=`) and the right-hand side.
//! * CNF: DIMACS (`p cnf n m` header, zero-terminated clauses, `c` comments).

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::instances::{CnfFormula, IlpInstance, KnapsackInstance};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Non-empty lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_int<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("expected integer {what}, found `{tok}`")))
}

pub fn parse_knapsack(text: &str) -> Result<KnapsackInstance> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 2 {
        return Err(parse_err(hl, "header must be `n K`"));
    }
    let n: usize = parse_int(toks[0], hl, "n")?;
    let target: i64 = parse_int(toks[1], hl, "K")?;
    let mut coefficients = Vec::with_capacity(n);
    let mut last = hl;
    for (ln, l) in lines {
        last = ln;
        for tok in l.split_whitespace() {
            coefficients.push(parse_int(tok, ln, "coefficient")?);
        }
    }
    if coefficients.len() != n {
        return Err(parse_err(
            last,
            format!("expected {n} coefficients, found {}", coefficients.len()),
        ));
    }
    KnapsackInstance::new(coefficients, target).map_err(|e| parse_err(hl, e.to_string()))
}

pub fn write_knapsack(k: &KnapsackInstance) -> String {
    let coeffs: Vec<String> = k.coefficients().iter().map(i64::to_string).collect();
    format!("{} {}\n{}\n", k.n(), k.target(), coeffs.join(" "))
}

pub fn parse_ilp(text: &str) -> Result<IlpInstance> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 2 {
        return Err(parse_err(hl, "header must be `d n`"));
    }
    let d: usize = parse_int(toks[0], hl, "d")?;
    let n: usize = parse_int(toks[1], hl, "n")?;
    let mut rows = Vec::with_capacity(d);
    let mut rhs = Vec::with_capacity(d);
    let mut eq = Vec::with_capacity(d);
    for _ in 0..d {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| parse_err(hl, format!("expected {d} constraint rows")))?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != n + 2 {
            return Err(parse_err(
                ln,
                format!("expected {n} coefficients, a relation and a bound"),
            ));
        }
        let row = toks[..n]
            .iter()
            .map(|t| parse_int(t, ln, "coefficient"))
            .collect::<Result<Vec<i64>>>()?;
        let is_eq = match toks[n] {
            "<=" => false,
            "=" => true,
            other => return Err(parse_err(ln, format!("unknown relation `{other}`"))),
        };
        rows.push(row);
        eq.push(is_eq);
        rhs.push(parse_int(toks[n + 1], ln, "bound")?);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, "trailing content after constraint rows"));
    }
    let inst = if d == 0 {
        IlpInstance::empty(n)
    } else {
        IlpInstance::with_relations(rows, rhs, eq)
    };
    inst.map_err(|e| parse_err(hl, e.to_string()))
}

pub fn write_ilp(inst: &IlpInstance) -> String {
    let mut out = format!("{} {}\n", inst.d(), inst.n());
    for (i, row) in inst.rows().iter().enumerate() {
        for a in row {
            let _ = write!(out, "{a} ");
        }
        let rel = if inst.is_equality(i) { "=" } else { "<=" };
        let _ = writeln!(out, "{rel} {}", inst.rhs()[i]);
    }
    out
}

pub fn parse_dimacs(text: &str) -> Result<CnfFormula> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    let mut current_line = 0;
    for (ln, l) in content_lines(text) {
        if l.starts_with('c') {
            continue;
        }
        if l.starts_with('%') {
            break;
        }
        if l.starts_with('p') {
            if header.is_some() {
                return Err(parse_err(ln, "duplicate problem line"));
            }
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks.len() != 4 || toks[0] != "p" || toks[1] != "cnf" {
                return Err(parse_err(ln, "problem line must be `p cnf <n> <m>`"));
            }
            let n = parse_int(toks[2], ln, "variable count")?;
            let m = parse_int(toks[3], ln, "clause count")?;
            header = Some((n, m, ln));
            continue;
        }
        let Some((n, _, _)) = header else {
            return Err(parse_err(ln, "clause before `p cnf` header"));
        };
        for tok in l.split_whitespace() {
            let lit: i32 = parse_int(tok, ln, "literal")?;
            if lit == 0 {
                if current.is_empty() {
                    return Err(parse_err(ln, "empty clause"));
                }
                clauses.push(std::mem::take(&mut current));
            } else {
                if lit.unsigned_abs() as usize > n {
                    return Err(parse_err(ln, format!("literal {lit} exceeds variable count {n}")));
                }
                if current.is_empty() {
                    current_line = ln;
                }
                current.push(lit);
            }
        }
    }
    let (n, m, hl) = header.ok_or_else(|| parse_err(1, "missing `p cnf` header"))?;
    if !current.is_empty() {
        return Err(parse_err(current_line, "clause not terminated by 0"));
    }
    if clauses.len() != m {
        return Err(parse_err(
            hl,
            format!("header declares {m} clauses, found {}", clauses.len()),
        ));
    }
    CnfFormula::new(n, clauses).map_err(|e| parse_err(hl, e.to_string()))
}

pub fn write_dimacs(f: &CnfFormula) -> String {
    let mut out = format!("p cnf {} {}\n", f.n(), f.m());
    for c in f.clauses() {
        for lit in c {
            let _ = write!(out, "{lit} ");
        }
        out.push_str("0\n");
    }
    out
}
