//! Exhaustive reference solvers.
//!
//! These evaluate constraints directly from the instance data and share no
//! evaluation code with the solvers, so agreement between the two is a real
//! check.

use serde::Serialize;

use crate::claw::{ClawFamily, FunctionFamilyOracle};
use crate::error::{guard, Result};
use crate::exec;
use crate::instances::{Assignment, CnfFormula, IlpInstance};

/// Largest variable count enumerated.
pub const MAX_BRUTE_VARS: usize = 24;
/// Largest domain side for pair enumeration.
pub const MAX_PAIR_SIDE: u64 = 1 << 12;
/// Witness lists are truncated here; `count` stays exact.
pub const WITNESS_CAP: usize = 1 << 16;

const CHUNK: u64 = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BruteResult<W> {
    pub feasible: bool,
    pub witnesses: Vec<W>,
    pub count: u64,
    pub enumeration_cost: u64,
}

impl<W> BruteResult<W> {
    pub fn is_capped(&self) -> bool {
        (self.witnesses.len() as u64) < self.count
    }
}

fn scan<W, P, M>(total: u64, pred: P, make: M) -> BruteResult<W>
where
    P: Fn(u64) -> bool + Sync + Send,
    M: Fn(u64) -> W,
{
    let mut witnesses = Vec::new();
    let mut count = 0u64;
    let mut start = 0u64;
    while start < total {
        let len = CHUNK.min(total - start);
        let hits = exec::filter_range(len, |i| pred(start + i));
        count += hits.len() as u64;
        for i in hits {
            if witnesses.len() < WITNESS_CAP {
                witnesses.push(make(start + i));
            }
        }
        start += len;
    }
    BruteResult {
        feasible: count > 0,
        witnesses,
        count,
        enumeration_cost: total,
    }
}

fn bit(x: u64, j: usize) -> i64 {
    ((x >> j) & 1) as i64
}

fn assignment(n: usize) -> impl Fn(u64) -> Assignment {
    move |x| Assignment::from_mask(n, x).expect("mask fits")
}

pub fn brute_ilp(inst: &IlpInstance) -> Result<BruteResult<Assignment>> {
    let n = inst.n();
    guard("brute-force variable count", n as u64, MAX_BRUTE_VARS as u64)?;
    let ok = |x: u64| {
        inst.rows().iter().enumerate().all(|(i, row)| {
            let lhs: i64 = row.iter().enumerate().map(|(j, &a)| a * bit(x, j)).sum();
            if inst.is_equality(i) {
                lhs == inst.rhs()[i]
            } else {
                lhs <= inst.rhs()[i]
            }
        })
    };
    Ok(scan(1 << n, ok, assignment(n)))
}

fn literal_true(x: u64, lit: i32) -> bool {
    let v = (x >> (lit.unsigned_abs() - 1)) & 1 == 1;
    v == (lit > 0)
}

pub fn brute_cnf(f: &CnfFormula) -> Result<BruteResult<Assignment>> {
    let n = f.n();
    guard("brute-force variable count", n as u64, MAX_BRUTE_VARS as u64)?;
    let ok = |x: u64| f.clauses().iter().all(|c| c.iter().any(|&l| literal_true(x, l)));
    Ok(scan(1 << n, ok, assignment(n)))
}

/// Assignments making exactly one literal of every clause true.
pub fn brute_exactly_one(f: &CnfFormula) -> Result<BruteResult<Assignment>> {
    let n = f.n();
    guard("brute-force variable count", n as u64, MAX_BRUTE_VARS as u64)?;
    let ok = |x: u64| {
        f.clauses()
            .iter()
            .all(|c| c.iter().filter(|&&l| literal_true(x, l)).count() == 1)
    };
    Ok(scan(1 << n, ok, assignment(n)))
}

pub fn brute_subset_sum(a: &[i64], t: i64) -> Result<BruteResult<Assignment>> {
    let n = a.len();
    guard("brute-force variable count", n as u64, MAX_BRUTE_VARS as u64)?;
    let ok = |x: u64| a.iter().enumerate().map(|(j, &c)| c * bit(x, j)).sum::<i64>() == t;
    Ok(scan(1 << n, ok, assignment(n)))
}

/// All `(x, y)` with `f_i(x) = g_i(y)` for every `i`.
pub fn brute_pair_claw(fam: &ClawFamily) -> Result<BruteResult<(u64, u64)>> {
    let n = fam.domain();
    guard("pair enumeration side", n, MAX_PAIR_SIDE)?;
    let d = fam.d();
    let ok = |p: u64| {
        let (x, y) = (p / n, p % n);
        (0..d).all(|i| fam.f.peek(i, x) == fam.g.peek(i, y))
    };
    Ok(scan(n * n, ok, |p| (p / n, p % n)))
}

/// Same-point claws: `x` with `f_i(x) = g_i(x)` for every `i`.
pub fn brute_samepoint_claw(fam: &ClawFamily) -> Result<BruteResult<u64>> {
    let n = fam.domain();
    guard("domain size", n, 1 << MAX_BRUTE_VARS)?;
    let d = fam.d();
    Ok(scan(n, |x| (0..d).all(|i| fam.f.peek(i, x) == fam.g.peek(i, x)), |x| x))
}

/// All `x < y` with `f_i(x) = f_i(y)` for every `i`.
pub fn brute_collision(fam: &FunctionFamilyOracle) -> Result<BruteResult<(u64, u64)>> {
    let n = fam.domain();
    guard("pair enumeration side", n, MAX_PAIR_SIDE)?;
    let d = fam.d();
    let ok = |p: u64| {
        let (x, y) = (p / n, p % n);
        x < y && (0..d).all(|i| fam.peek(i, x) == fam.peek(i, y))
    };
    Ok(scan(n * n, ok, |p| (p / n, p % n)))
}
