//! Satisfiability for CNF formulas with at most `c n` clauses of unbounded width.
//!
//! The variables are cut into `k` contiguous blocks. For a satisfying
//! assignment `a*`, some block `A_i` is such that `a*` restricted to the other
//! variables already satisfies all but at most `alpha m` clauses. For each
//! block the solver tabulates, per popcount level `l <= ceil(alpha m)`, every
//! clause set `u` with `|u| = l` that some assignment of `A_i` satisfies
//! entirely. Grover then searches the complement assignments `v` whose
//! unsatisfied clause set is small and present in the table.

use std::collections::HashMap;
use std::time::Instant;

use serde::Serialize;
use statrs::function::factorial::ln_binomial;

use crate::error::{guard, Error, Result};
use crate::exec;
use crate::instances::{full_mask, Assignment, ClauseMask, CnfFormula};
use crate::qsearch::{self, MarkedSetSummary};

/// Largest block or complement enumerated explicitly.
pub const MAX_ENUM_VARS: usize = 24;
/// Default cap on `sum_b 2^{|S(b)|}` before switching to the pair-filter build.
pub const DEFAULT_SUBSET_CAP: u64 = 1 << 22;
/// Cap on the number of candidate keys the pair-filter build may examine.
pub const PAIR_FILTER_CAP: u64 = 1 << 26;

const ALPHA_BISECTION_STEPS: usize = 50;

/// Base-2 binary entropy.
pub fn entropy2(alpha: f64) -> f64 {
    if alpha <= 0.0 || alpha >= 1.0 {
        return 0.0;
    }
    -alpha * alpha.log2() - (1.0 - alpha) * (1.0 - alpha).log2()
}

/// `(1 - alpha)/2 - (c H2(alpha) + alpha)`; nonnegative when `alpha` is admissible.
pub fn alpha_slack(c: f64, alpha: f64) -> f64 {
    (1.0 - alpha) / 2.0 - (c * entropy2(alpha) + alpha)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AlphaParams {
    pub c: f64,
    pub alpha: f64,
    /// `ceil(1/alpha)`, before clamping to the variable count.
    pub k: usize,
    pub entropy: f64,
}

impl AlphaParams {
    /// Parameters for an explicitly chosen block fraction.
    pub fn from_alpha(c: f64, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("alpha {alpha} outside (0, 1)")));
        }
        Ok(Self {
            c,
            alpha,
            k: (1.0 / alpha).ceil() as usize,
            entropy: entropy2(alpha),
        })
    }

    /// Resolves block count and table budget for a formula with `n` variables
    /// and `m` clauses. When `ceil(1/alpha)` exceeds `n`, `k = n` singleton
    /// blocks are used and the effective fraction becomes `1/k`, so that
    /// `k alpha >= 1` still holds.
    pub fn plan(&self, n: usize, m: usize) -> Result<BlockPlan> {
        if n == 0 {
            return Err(Error::InvalidParameter("formula has no variables".into()));
        }
        let k = self.k.min(n).max(1);
        let alpha_eff = if k < self.k { 1.0 / k as f64 } else { self.alpha };
        let budget = (alpha_eff * m as f64 - 1e-9).ceil().max(0.0) as usize;
        Ok(BlockPlan {
            n,
            m,
            k,
            alpha: alpha_eff,
            budget,
            blocks: partition_blocks(n, k)?,
        })
    }
}

/// Largest `alpha < 1/6` with `(1 - alpha)/2 >= c H2(alpha) + alpha`, by bisection.
pub fn choose_alpha(c: f64) -> Result<AlphaParams> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidParameter(format!("clause density c = {c} must be > 0")));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0 / 6.0);
    for _ in 0..ALPHA_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if alpha_slack(c, mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    AlphaParams::from_alpha(c, lo)
}

/// A contiguous range of variables `start .. start + len`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Block {
    pub start: usize,
    pub len: usize,
}

impl Block {
    pub fn mask(&self) -> u64 {
        full_mask(self.len) << self.start
    }

    pub fn variables(&self) -> Vec<usize> {
        (self.start..self.start + self.len).collect()
    }

    /// Values on the block from a block-local assignment index.
    pub fn expand(&self, b: u64) -> u64 {
        b << self.start
    }

    /// Values on the complement from a complement-local index.
    pub fn expand_complement(&self, v: u64) -> u64 {
        let low = v & full_mask(self.start);
        low | ((v >> self.start) << (self.start + self.len))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockPlan {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub alpha: f64,
    pub budget: usize,
    pub blocks: Vec<Block>,
}

/// `k` contiguous blocks whose sizes differ by at most one, larger ones first.
pub fn partition_blocks(n: usize, k: usize) -> Result<Vec<Block>> {
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "cannot split {n} variables into {k} non-empty blocks"
        )));
    }
    let (base, extra) = (n / k, n % k);
    let mut start = 0;
    Ok((0..k)
        .map(|i| {
            let len = base + usize::from(i < extra);
            let b = Block { start, len };
            start += len;
            b
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TableStrategy {
    /// Enumerate `b`, insert every small subset of the clauses it satisfies.
    SubsetsOfSatisfied,
    /// Enumerate every small clause set `u`, keep it if some `b` covers it.
    PairFilter,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableStats {
    pub strategy: TableStrategy,
    pub entries: u64,
    /// Candidate `(u, b)` pairs examined.
    pub work: u64,
    /// `C(m, budget) 2^{|A_i|}`.
    pub predicted_cost: f64,
}

/// Sorted tables `T_1 .. T_budget` for one block.
#[derive(Clone, Debug)]
pub struct CoverTables {
    block: Block,
    budget: usize,
    levels: Vec<Vec<(ClauseMask, u32)>>,
    stats: TableStats,
}

impl CoverTables {
    pub fn block(&self) -> Block {
        self.block
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Entries of `T_l`, sorted by key; `l` ranges over `1..=budget`.
    pub fn level(&self, l: usize) -> &[(ClauseMask, u32)] {
        &self.levels[l - 1]
    }

    pub fn stats(&self) -> &TableStats {
        &self.stats
    }

    pub fn lookup(&self, u: ClauseMask) -> Option<u32> {
        let l = u.popcount() as usize;
        if l == 0 || l > self.budget {
            return None;
        }
        let level = &self.levels[l - 1];
        level
            .binary_search_by(|(k, _)| k.cmp(&u))
            .ok()
            .map(|i| level[i].1)
    }
}

fn check_formula(f: &CnfFormula) -> Result<()> {
    guard("variable count", f.n() as u64, 63)?;
    guard("clause count", f.m() as u64, ClauseMask::MAX_CLAUSES as u64)
}

/// Calls `visit` for every non-empty subset of `items` with at most `max_l` elements.
fn for_each_small_subset<F: FnMut(u128)>(items: &[u32], max_l: usize, visit: &mut F) {
    fn rec<F: FnMut(u128)>(items: &[u32], start: usize, left: usize, acc: u128, visit: &mut F) {
        for i in start..items.len() {
            let next = acc | (1u128 << items[i]);
            visit(next);
            if left > 1 {
                rec(items, i + 1, left - 1, next, visit);
            }
        }
    }
    if max_l > 0 {
        rec(items, 0, max_l, 0, visit);
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        0.0
    } else {
        ln_binomial(n as u64, k as u64).exp()
    }
}

/// Builds the cover tables for `block`, choosing the construction by the
/// `sum_b 2^{|S(b)|}` measure against [`DEFAULT_SUBSET_CAP`].
pub fn build_tables(f: &CnfFormula, block: Block, budget: usize) -> Result<CoverTables> {
    build_tables_capped(f, block, budget, DEFAULT_SUBSET_CAP)
}

pub fn build_tables_capped(f: &CnfFormula, block: Block, budget: usize, subset_cap: u64) -> Result<CoverTables> {
    check_formula(f)?;
    guard("block size", block.len as u64, MAX_ENUM_VARS as u64)?;
    let satisfied = satisfied_sets(f, block);
    let measure = satisfied
        .iter()
        .fold(0u64, |acc, s| acc.saturating_add(1u64.checked_shl(s.popcount()).unwrap_or(u64::MAX)));
    let strategy = if measure <= subset_cap {
        TableStrategy::SubsetsOfSatisfied
    } else {
        TableStrategy::PairFilter
    };
    build_with(f, block, budget, strategy, &satisfied)
}

/// Builds the tables with an explicit construction strategy.
pub fn build_tables_with(f: &CnfFormula, block: Block, budget: usize, strategy: TableStrategy) -> Result<CoverTables> {
    check_formula(f)?;
    guard("block size", block.len as u64, MAX_ENUM_VARS as u64)?;
    let satisfied = satisfied_sets(f, block);
    build_with(f, block, budget, strategy, &satisfied)
}

fn satisfied_sets(f: &CnfFormula, block: Block) -> Vec<ClauseMask> {
    let support = block.mask();
    exec::map_range(1u64 << block.len, |b| {
        f.satisfied_by_mask(support, block.expand(b))
    })
}

fn build_with(
    f: &CnfFormula,
    block: Block,
    budget: usize,
    strategy: TableStrategy,
    satisfied: &[ClauseMask],
) -> Result<CoverTables> {
    let m = f.m();
    let budget = budget.min(m);
    let mut maps: Vec<HashMap<u128, u32>> = vec![HashMap::new(); budget];
    let mut work = 0u64;
    match strategy {
        TableStrategy::SubsetsOfSatisfied => {
            for (b, s) in satisfied.iter().enumerate() {
                let items: Vec<u32> = (0..m as u32).filter(|&j| s.contains(j as usize)).collect();
                for_each_small_subset(&items, budget, &mut |u| {
                    work += 1;
                    let l = u.count_ones() as usize;
                    maps[l - 1].entry(u).or_insert(b as u32);
                });
            }
        }
        TableStrategy::PairFilter => {
            let candidates: f64 = (1..=budget).map(|l| binomial(m, l)).sum();
            guard("pair-filter candidate keys", candidates as u64, PAIR_FILTER_CAP)?;
            let all: Vec<u32> = (0..m as u32).collect();
            for_each_small_subset(&all, budget, &mut |u| {
                let key = ClauseMask(u);
                for (b, s) in satisfied.iter().enumerate() {
                    work += 1;
                    if key.is_subset_of(s) {
                        maps[u.count_ones() as usize - 1].insert(u, b as u32);
                        break;
                    }
                }
            });
        }
    }
    let levels: Vec<Vec<(ClauseMask, u32)>> = maps
        .into_iter()
        .map(|mp| {
            let mut v: Vec<(ClauseMask, u32)> = mp.into_iter().map(|(k, b)| (ClauseMask(k), b)).collect();
            v.sort_unstable_by_key(|e| e.0);
            v
        })
        .collect();
    let entries = levels.iter().map(|l| l.len() as u64).sum();
    Ok(CoverTables {
        block,
        budget,
        levels,
        stats: TableStats {
            strategy,
            entries,
            work,
            predicted_cost: binomial(m, budget) * (block.len as f64).exp2(),
        },
    })
}

/// Grover predicate for a complement assignment `v` (complement-local index).
/// Returns the block-local witness index `b` such that `(v, b)` satisfies `f`.
pub fn cnf_oracle(v: u64, tables: &CoverTables, f: &CnfFormula) -> Option<u32> {
    let block = tables.block;
    let support = full_mask(f.n()) & !block.mask();
    let unsat = ClauseMask(ClauseMask::full(f.m()).0 & !f.satisfied_by_mask(support, block.expand_complement(v)).0);
    match unsat.popcount() as usize {
        0 => Some(0),
        l if l > tables.budget => None,
        _ => tables.lookup(unsat),
    }
}

/// Combines complement and block parts into a full assignment.
pub fn combine(f: &CnfFormula, block: Block, v: u64, b: u32) -> Assignment {
    Assignment::from_mask(f.n(), block.expand_complement(v) | block.expand(b as u64))
        .expect("parts fit the formula")
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BlockStats {
    pub block: usize,
    pub size: usize,
    pub table_entries: u64,
    pub table_work: u64,
    pub predicted_table_cost: f64,
    pub search_domain: u64,
    pub marked_count: u64,
    pub quantum_queries: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CnfStats {
    pub n: usize,
    pub m: usize,
    pub c: f64,
    pub alpha: f64,
    pub alpha_effective: f64,
    pub k: usize,
    pub budget: usize,
    pub blocks: Vec<BlockStats>,
    pub quantum_queries: u64,
    pub classical_setup_evals: u64,
    pub attempts: u32,
    pub retries_used: u32,
    pub solved_block: Option<usize>,
    #[serde(skip)]
    pub wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CnfSolution {
    pub assignment: Option<Assignment>,
    pub stats: CnfStats,
}

/// Runs the block loop. `alpha_override` replaces [`choose_alpha`] when set.
pub fn solve_cnf(
    f: &CnfFormula,
    c: f64,
    seed: u64,
    retries: u32,
    alpha_override: Option<f64>,
) -> Result<CnfSolution> {
    let start = Instant::now();
    check_formula(f)?;
    if !f.in_cnf_c(c) {
        return Err(Error::InvalidParameter(format!(
            "formula has m = {} > c n = {}",
            f.m(),
            c * f.n() as f64
        )));
    }
    let params = match alpha_override {
        Some(a) => AlphaParams::from_alpha(c, a)?,
        None => choose_alpha(c)?,
    };
    let plan = params.plan(f.n(), f.m())?;
    for b in &plan.blocks {
        guard("complement size", (f.n() - b.len) as u64, MAX_ENUM_VARS as u64)?;
    }
    let mut stats = CnfStats {
        n: f.n(),
        m: f.m(),
        c,
        alpha: params.alpha,
        alpha_effective: plan.alpha,
        k: plan.k,
        budget: plan.budget,
        ..Default::default()
    };
    let mut prepared: Vec<Option<(CoverTables, MarkedSetSummary)>> = vec![None; plan.k];
    let mut assignment = None;
    'attempts: for attempt in 0..=retries {
        stats.attempts += 1;
        if attempt > 0 {
            stats.retries_used += 1;
        }
        for (i, &block) in plan.blocks.iter().enumerate() {
            if prepared[i].is_none() {
                let tables = build_tables(f, block, plan.budget)?;
                let domain = 1u64 << (f.n() - block.len);
                let summary = qsearch::enumerate_marked(domain, |v| cnf_oracle(v, &tables, f).is_some())?;
                stats.classical_setup_evals += summary.classical_setup_evals();
                stats.blocks.push(BlockStats {
                    block: i,
                    size: block.len,
                    table_entries: tables.stats.entries,
                    table_work: tables.stats.work,
                    predicted_table_cost: tables.stats.predicted_cost,
                    search_domain: domain,
                    marked_count: summary.marked_count(),
                    quantum_queries: 0,
                });
                prepared[i] = Some((tables, summary));
            }
            let (tables, summary) = prepared[i].as_ref().unwrap();
            let run_seed = seed.wrapping_add(attempt as u64).wrapping_add((i as u64) << 32);
            let outcome = qsearch::bbht_search(summary, run_seed);
            stats.quantum_queries += outcome.quantum_queries;
            if let Some(bs) = stats.blocks.iter_mut().find(|s| s.block == i) {
                bs.quantum_queries += outcome.quantum_queries;
            }
            if let Some(v) = outcome.found {
                let b = cnf_oracle(v, tables, f).ok_or_else(|| {
                    Error::InvalidInstance("search returned an unmarked assignment".into())
                })?;
                let x = combine(f, block, v, b);
                if !f.is_satisfied_by(&x) {
                    return Err(Error::InvalidInstance(format!(
                        "combined assignment {x} does not satisfy the formula"
                    )));
                }
                stats.solved_block = Some(i);
                assignment = Some(x);
                break 'attempts;
            }
        }
    }
    stats.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(CnfSolution { assignment, stats })
}

/// The first block `i` (0-based) such that `a_star` restricted to the
/// complement of `A_i` satisfies at least `(1 - alpha) m` clauses. Failing to
/// find one is an error: it would contradict the pigeonhole argument.
pub fn verify_claim(f: &CnfFormula, a_star: &Assignment, plan: &BlockPlan) -> Result<usize> {
    check_formula(f)?;
    if !f.is_satisfied_by(a_star) {
        return Err(Error::InvalidParameter("assignment does not satisfy the formula".into()));
    }
    let threshold = (1.0 - plan.alpha) * f.m() as f64 - 1e-9;
    let full = full_mask(f.n());
    plan.blocks
        .iter()
        .position(|b| {
            let support = full & !b.mask();
            let sat = f.satisfied_by_mask(support, a_star.mask() & support);
            sat.popcount() as f64 >= threshold
        })
        .ok_or_else(|| Error::InvalidInstance("no block satisfies the covering claim".into()))
}
