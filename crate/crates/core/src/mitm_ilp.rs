//! Meet-in-the-middle plus Grover search for 0-1 integer linear programs.
//!
//! The first `floor(n/3)` variables (block A) are enumerated up front; each
//! partial assignment `I` contributes the tuple `y_I(i) = sum_{j in A} a_ij I_j`.
//! Inequality systems store the tuples in a [`RangeTree`]; pure equality
//! systems only need exact lookups and use a sorted table. The remaining
//! variables (block B) are searched with simulated Grover: `u` is marked when
//! some stored tuple is dominated by (or equal to) `b - z(u)`.

use std::time::Instant;

use serde::Serialize;

use crate::error::{guard, Error, Result};
use crate::exec;
use crate::instances::{
    bisect_minimum, coefficient_cap, objective_value, Assignment, IlpInstance, Optimum, Sense,
};
use crate::qsearch::{self, MarkedSetSummary};
use crate::rangetree::{RangePoint, RangeTree};

/// Largest block that is enumerated explicitly (for either side).
pub const MAX_BLOCK: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SplitPlan {
    n: usize,
    a_size: usize,
}

impl SplitPlan {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a_size(&self) -> usize {
        self.a_size
    }

    pub fn b_size(&self) -> usize {
        self.n - self.a_size
    }

    /// Variable indices of block A (a prefix).
    pub fn set_a(&self) -> Vec<usize> {
        (0..self.a_size).collect()
    }

    pub fn set_b(&self) -> Vec<usize> {
        (self.a_size..self.n).collect()
    }

    /// Full assignment from an A-part index and a B-part index.
    pub fn combine(&self, a_index: u64, b_index: u64) -> Assignment {
        Assignment::from_mask(self.n, a_index | (b_index << self.a_size))
            .expect("block indices fit the plan")
    }

    pub fn split(&self, x: &Assignment) -> (u64, u64) {
        let a_mask = (1u64 << self.a_size) - 1;
        (x.mask() & a_mask, x.mask() >> self.a_size)
    }
}

pub fn split_variables(n: usize) -> Result<SplitPlan> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "meet-in-the-middle split needs n >= 3, got {n}"
        )));
    }
    Ok(SplitPlan { n, a_size: n / 3 })
}

/// Sum of `row[offset + k]` over the set bits `k` of `index`.
#[inline]
fn partial_sum(row: &[i64], offset: usize, mut index: u64) -> i64 {
    let mut s = 0i64;
    while index != 0 {
        let k = index.trailing_zeros() as usize;
        s += row[offset + k];
        index &= index - 1;
    }
    s
}

/// The tuples `y_I` for every A-assignment `I`, in binary counting order of `I`.
pub fn enumerate_partial_tuples(inst: &IlpInstance, plan: &SplitPlan) -> Result<Vec<(Vec<i64>, u64)>> {
    check_plan(inst, plan)?;
    guard("block A size", plan.a_size as u64, MAX_BLOCK as u64)?;
    let rows = inst.rows();
    Ok(exec::map_range(1u64 << plan.a_size, |i| {
        (rows.iter().map(|r| partial_sum(r, 0, i)).collect(), i)
    }))
}

fn check_plan(inst: &IlpInstance, plan: &SplitPlan) -> Result<()> {
    if plan.n != inst.n() {
        return Err(Error::LengthMismatch {
            expected: inst.n(),
            got: plan.n,
        });
    }
    Ok(())
}

/// Exact-match table for pure equality systems: sorted keys, each with the
/// preferred A-assignment among those producing it.
#[derive(Clone, Debug)]
pub struct ExactTable {
    entries: Vec<(Vec<i64>, u64)>,
}

impl ExactTable {
    /// Keeps, per key, the A-assignment minimizing `score` (ties: smallest index).
    fn build<S>(tuples: Vec<(Vec<i64>, u64)>, score: S) -> Self
    where
        S: Fn(u64) -> i64,
    {
        let mut entries = tuples;
        entries.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| score(a.1).cmp(&score(b.1))).then(a.1.cmp(&b.1)));
        entries.dedup_by(|later, first| later.0 == first.0);
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, key: &[i64]) -> Option<u64> {
        self.entries
            .binary_search_by(|(k, _)| k.as_slice().cmp(key))
            .ok()
            .map(|i| self.entries[i].1)
    }
}

#[derive(Debug)]
pub enum SearchIndex {
    Range(RangeTree),
    Exact(ExactTable),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BuildCost {
    pub tuples: u64,
    pub stored_entries: u64,
}

#[derive(Debug)]
pub struct PreprocessedIlp {
    plan: SplitPlan,
    index: SearchIndex,
    build_cost: BuildCost,
}

impl PreprocessedIlp {
    pub fn plan(&self) -> &SplitPlan {
        &self.plan
    }

    pub fn index(&self) -> &SearchIndex {
        &self.index
    }

    pub fn build_cost(&self) -> BuildCost {
        self.build_cost
    }

    pub fn path(&self) -> &'static str {
        match self.index {
            SearchIndex::Range(_) => "range_tree",
            SearchIndex::Exact(_) => "sorted_table",
        }
    }

    pub fn tree_visits(&self) -> u64 {
        match &self.index {
            SearchIndex::Range(t) => t.visits(),
            SearchIndex::Exact(_) => 0,
        }
    }
}

/// Builds the search structure over block A. Pure equality systems get a
/// sorted exact-match table; everything else a range tree in which every
/// equality row contributes two axes (`y <= z` and `-y <= -z`).
pub fn preprocess(inst: &IlpInstance, plan: &SplitPlan) -> Result<PreprocessedIlp> {
    preprocess_scored(inst, plan, |_| 0)
}

fn preprocess_scored<S>(inst: &IlpInstance, plan: &SplitPlan, score: S) -> Result<PreprocessedIlp>
where
    S: Fn(u64) -> i64,
{
    let tuples = enumerate_partial_tuples(inst, plan)?;
    let count = tuples.len() as u64;
    if inst.is_pure_equality() {
        let table = ExactTable::build(tuples, score);
        let stored = table.len() as u64;
        return Ok(PreprocessedIlp {
            plan: *plan,
            index: SearchIndex::Exact(table),
            build_cost: BuildCost {
                tuples: count,
                stored_entries: stored,
            },
        });
    }
    let eq_rows: Vec<usize> = (0..inst.d()).filter(|&i| inst.is_equality(i)).collect();
    let points = exec::map_vec(tuples, |(mut y, idx)| {
        let extra: Vec<i64> = eq_rows.iter().map(|&i| -y[i]).collect();
        y.extend(extra);
        RangePoint::new(y, idx)
    });
    let tree = RangeTree::build(points, inst.d() + eq_rows.len())?;
    let stored = tree.stored_entries();
    Ok(PreprocessedIlp {
        plan: *plan,
        index: SearchIndex::Range(tree),
        build_cost: BuildCost {
            tuples: count,
            stored_entries: stored,
        },
    })
}

/// The Grover predicate: the A-assignment index completing B-assignment `u`
/// to a feasible assignment, if any.
pub fn oracle_f(u: u64, prep: &PreprocessedIlp, inst: &IlpInstance) -> Option<u64> {
    let plan = &prep.plan;
    debug_assert!(u < 1u64 << plan.b_size());
    // remaining slack b_i - z_i(u)
    let slack = inst
        .rows()
        .iter()
        .zip(inst.rhs())
        .map(|(row, &b)| b - partial_sum(row, plan.a_size, u));
    match &prep.index {
        SearchIndex::Exact(table) => {
            let key: Vec<i64> = slack.collect();
            table.lookup(&key)
        }
        SearchIndex::Range(tree) => {
            let mut bounds: Vec<i64> = slack.collect();
            for i in 0..inst.d() {
                if inst.is_equality(i) {
                    bounds.push(-bounds[i]);
                }
            }
            tree.query_dominated(&bounds)
                .expect("bounds match tree dimension")
                .map(|p| p.payload)
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SolveStats {
    pub n: usize,
    pub d: usize,
    pub a_size: usize,
    pub b_size: usize,
    pub path: &'static str,
    pub build: BuildCost,
    pub search_domain: u64,
    pub marked_count: u64,
    pub quantum_queries: u64,
    pub classical_setup_evals: u64,
    pub tree_visits: u64,
    pub attempts: u32,
    pub retries_used: u32,
    pub search_calls: u32,
    #[serde(skip)]
    pub wall_ms: f64,
}

impl SolveStats {
    fn absorb(&mut self, other: &SolveStats) {
        self.quantum_queries += other.quantum_queries;
        self.classical_setup_evals += other.classical_setup_evals;
        self.tree_visits += other.tree_visits;
        self.attempts += other.attempts;
        self.retries_used += other.retries_used;
        self.search_calls += other.search_calls;
        self.build.tuples += other.build.tuples;
        self.build.stored_entries += other.build.stored_entries;
        self.wall_ms += other.wall_ms;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IlpSolution {
    pub assignment: Option<Assignment>,
    pub stats: SolveStats,
}

/// Simulated Grover over the marked B-assignments with up to `retries`
/// reruns (seeds `seed + k`). Returns the recombined, re-verified assignment.
fn search_marked<F>(
    inst: &IlpInstance,
    plan: &SplitPlan,
    summary: &MarkedSetSummary,
    witness: F,
    seed: u64,
    retries: u32,
    stats: &mut SolveStats,
) -> Result<Option<Assignment>>
where
    F: Fn(u64) -> Option<u64>,
{
    for k in 0..=retries {
        stats.attempts += 1;
        if k > 0 {
            stats.retries_used += 1;
        }
        let outcome = qsearch::bbht_search(summary, seed.wrapping_add(k as u64));
        stats.quantum_queries += outcome.quantum_queries;
        if let Some(u) = outcome.found {
            let a = witness(u).ok_or_else(|| {
                Error::InvalidInstance("search returned an unmarked element".into())
            })?;
            let x = plan.combine(a, u);
            if !inst.is_feasible(&x)? {
                return Err(Error::InvalidInstance(format!(
                    "recombined assignment {x} fails verification"
                )));
            }
            return Ok(Some(x));
        }
    }
    Ok(None)
}

fn base_stats(inst: &IlpInstance, prep: &PreprocessedIlp) -> SolveStats {
    SolveStats {
        n: inst.n(),
        d: inst.d(),
        a_size: prep.plan.a_size,
        b_size: prep.plan.b_size(),
        path: prep.path(),
        build: prep.build_cost,
        search_domain: 1u64 << prep.plan.b_size(),
        ..Default::default()
    }
}

/// Decides feasibility; `None` means no solution was found within the retries.
pub fn solve_ilp(inst: &IlpInstance, seed: u64, retries: u32) -> Result<IlpSolution> {
    let start = Instant::now();
    let plan = split_variables(inst.n())?;
    guard("block B size", plan.b_size() as u64, MAX_BLOCK as u64)?;
    let prep = preprocess(inst, &plan)?;
    let mut stats = base_stats(inst, &prep);
    let summary = qsearch::enumerate_marked(1u64 << plan.b_size(), |u| {
        oracle_f(u, &prep, inst).is_some()
    })?;
    stats.marked_count = summary.marked_count();
    stats.classical_setup_evals = summary.classical_setup_evals();
    stats.search_calls = 1;
    let assignment = search_marked(
        inst,
        &plan,
        &summary,
        |u| oracle_f(u, &prep, inst),
        seed,
        retries,
        &mut stats,
    )?;
    stats.tree_visits = prep.tree_visits();
    stats.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(IlpSolution { assignment, stats })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupSolution {
    pub optimum: Option<Optimum>,
    pub stats: SolveStats,
}

/// Optimizes `objective` over a pure equality system with the sorted-table
/// path. Each table key keeps its best-objective A-part, so for a fixed B-part
/// the stored completion is optimal; the global optimum comes from bisecting
/// an objective threshold inside the Grover predicate.
pub fn solve_group_problem(
    inst: &IlpInstance,
    objective: &[i64],
    sense: Sense,
    seed: u64,
    retries: u32,
) -> Result<GroupSolution> {
    let start = Instant::now();
    if !inst.is_pure_equality() {
        return Err(Error::InvalidInstance(
            "group problem requires every row to be an equality".into(),
        ));
    }
    if objective.len() != inst.n() {
        return Err(Error::LengthMismatch {
            expected: inst.n(),
            got: objective.len(),
        });
    }
    let cap = coefficient_cap(inst.n());
    if objective.iter().any(|c| c.abs() > cap) {
        return Err(Error::InvalidParameter(format!(
            "objective coefficient exceeds magnitude cap {cap}"
        )));
    }
    let sign = match sense {
        Sense::Minimize => 1,
        Sense::Maximize => -1,
    };
    let signed: Vec<i64> = objective.iter().map(|c| sign * c).collect();
    let plan = split_variables(inst.n())?;
    guard("block B size", plan.b_size() as u64, MAX_BLOCK as u64)?;
    let a_size = plan.a_size;
    let prep = preprocess_scored(inst, &plan, |i| partial_sum(&signed, 0, i))?;
    let mut stats = base_stats(inst, &prep);
    let domain = 1u64 << plan.b_size();

    // signed value of the best completion of u, if u has one
    let completion = |u: u64| -> Option<(u64, i64)> {
        oracle_f(u, &prep, inst)
            .map(|a| (a, partial_sum(&signed, 0, a) + partial_sum(&signed, a_size, u)))
    };
    let span: i64 = objective.iter().map(|c| c.abs()).sum();
    let mut probe = 0u64;
    let found = bisect_minimum(span, |t| {
        let summary = qsearch::enumerate_marked(domain, |u| {
            completion(u).is_some_and(|(_, v)| v <= t)
        })?;
        if probe == 0 {
            stats.marked_count = summary.marked_count();
        }
        stats.classical_setup_evals += summary.classical_setup_evals();
        stats.search_calls += 1;
        let x = search_marked(
            inst,
            &plan,
            &summary,
            |u| completion(u).map(|(a, _)| a),
            seed.wrapping_add(probe.wrapping_mul(1 << 20)),
            retries,
            &mut stats,
        )?;
        probe += 1;
        Ok(x.map(|x| (x, objective_value(&signed, &x))))
    })?;
    stats.tree_visits = prep.tree_visits();
    stats.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let optimum = found.map(|(witness, calls)| Optimum {
        value: objective_value(objective, &witness),
        witness,
        solve_calls: calls,
    });
    Ok(GroupSolution { optimum, stats })
}

/// General optimization through [`crate::instances::optimize_by_bisection`]
/// with [`solve_ilp`] as the feasibility procedure.
pub fn optimize_ilp(
    inst: &IlpInstance,
    objective: &[i64],
    sense: Sense,
    seed: u64,
    retries: u32,
) -> Result<(Option<Optimum>, SolveStats)> {
    let mut total = SolveStats {
        n: inst.n(),
        d: inst.d() + 1,
        ..Default::default()
    };
    let mut call = 0u64;
    let opt = crate::instances::optimize_by_bisection(inst, objective, sense, |thresholded| {
        let sol = solve_ilp(thresholded, seed.wrapping_add(call.wrapping_mul(1 << 20)), retries)?;
        call += 1;
        total.a_size = sol.stats.a_size;
        total.b_size = sol.stats.b_size;
        total.path = sol.stats.path;
        total.search_domain = sol.stats.search_domain;
        total.absorb(&sol.stats);
        Ok(sol.assignment)
    })?;
    Ok((opt, total))
}
