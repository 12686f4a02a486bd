//! Black-box claw and collision solvers with counted oracles.
//!
//! Sort phases and verification evaluate the oracle through counted calls.
//! Grover phases are simulated: the marked set is found by uncounted `peek`
//! calls (reported as classical setup work) and the simulated query count is
//! charged to the oracle counters afterwards, so the counters always hold the
//! full quantum query cost of a run.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;
use statrs::function::factorial::ln_binomial;

use crate::error::{guard, Error, Result};
use crate::exec;
use crate::instances::{coefficient_cap, full_mask, MAX_VARS};
use crate::qsearch;
use crate::rng::SplitMix64;

/// Largest `n` accepted by [`validate_promise`].
pub const MAX_PROMISE_BITS: usize = 8;
/// Largest function domain handled by the claw and collision solvers.
pub const MAX_DOMAIN: u64 = 1 << 20;
/// Largest half of a symmetric-claw split that is enumerated.
pub const MAX_SYMMETRIC_HALF: usize = 24;
/// Cap on `classes * subset_size` in the exact inner-probability computation.
pub const MAX_CLASS_WORK: u64 = 1 << 24;

type PairFn = dyn Fn(u64, u64) -> (i64, i64) + Send + Sync;

/// A counted black box `(x, y) -> (P1(x, y), P2(x, y))` over `n`-bit strings.
pub struct SymmetricClawOracle {
    n: usize,
    eval: Box<PairFn>,
    queries: AtomicU64,
}

impl fmt::Debug for SymmetricClawOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymmetricClawOracle")
            .field("n", &self.n)
            .field("queries", &self.query_count())
            .finish()
    }
}

impl SymmetricClawOracle {
    pub fn new<F>(n: usize, eval: F) -> Result<Self>
    where
        F: Fn(u64, u64) -> (i64, i64) + Send + Sync + 'static,
    {
        if n == 0 || n > MAX_VARS {
            return Err(Error::InvalidParameter(format!("bit length {n} outside 1..={MAX_VARS}")));
        }
        Ok(Self {
            n,
            eval: Box::new(eval),
            queries: AtomicU64::new(0),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Counted evaluation.
    pub fn evaluate(&self, x: u64, y: u64) -> (i64, i64) {
        self.queries.fetch_add(1, Ordering::Relaxed);
        self.peek(x, y)
    }

    /// Uncounted evaluation, used by the classical simulation only.
    pub fn peek(&self, x: u64, y: u64) -> (i64, i64) {
        let m = full_mask(self.n);
        (self.eval)(x & m, y & m)
    }

    /// Adds simulated Grover queries to the counter.
    pub fn charge(&self, queries: u64) {
        self.queries.fetch_add(queries, Ordering::Relaxed);
    }

    pub fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.queries.store(0, Ordering::Relaxed);
    }
}

/// `P1(x, y) = sum_{y_i = 1} a_i x_i`, `P2(x, y) = t - sum_{y_i = 0} a_i x_i`.
/// A claw at `x` exists iff `sum a_i x_i = t`.
pub fn knapsack_claw(a: &[i64], t: i64) -> Result<SymmetricClawOracle> {
    let n = a.len();
    if n == 0 || n > MAX_VARS {
        return Err(Error::InvalidInstance(format!("need 1..={MAX_VARS} coefficients, got {n}")));
    }
    let cap = coefficient_cap(n);
    if let Some(c) = a.iter().find(|c| c.abs() > cap) {
        return Err(Error::InvalidInstance(format!("coefficient {c} exceeds {cap}")));
    }
    if t.abs() > crate::instances::MAGNITUDE_CAP {
        return Err(Error::InvalidInstance(format!("target {t} out of range")));
    }
    let a = a.to_vec();
    SymmetricClawOracle::new(n, move |x, y| {
        let (mut p1, mut p2) = (0i64, t);
        for (i, &c) in a.iter().enumerate() {
            if (x >> i) & 1 == 1 {
                if (y >> i) & 1 == 1 {
                    p1 += c;
                } else {
                    p2 -= c;
                }
            }
        }
        (p1, p2)
    })
}

/// Counterexamples from an exhaustive promise scan, capped per condition.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PromiseReport {
    pub n: usize,
    pub pairs_checked: u64,
    pub condition1_violations: u64,
    pub condition2_violations: u64,
    /// `(x, y_equal, y_unequal)`.
    pub condition1_examples: Vec<(u64, u64, u64)>,
    /// `(x, y)` where a projection rule fails.
    pub condition2_examples: Vec<(u64, u64)>,
}

impl PromiseReport {
    pub fn is_clean(&self) -> bool {
        self.condition1_violations == 0 && self.condition2_violations == 0
    }
}

const MAX_EXAMPLES: usize = 16;

/// Exhaustive check of both symmetry conditions over all `(x, y)` pairs.
pub fn validate_promise(o: &SymmetricClawOracle) -> Result<PromiseReport> {
    guard("promise scan bit length", o.n as u64, MAX_PROMISE_BITS as u64)?;
    let size = 1u64 << o.n;
    let mut report = PromiseReport {
        n: o.n,
        pairs_checked: size * size,
        ..Default::default()
    };
    for x in 0..size {
        let (mut eq, mut ne) = (None, None);
        for y in 0..size {
            let (p1, p2) = o.peek(x, y);
            if p1 == p2 {
                eq.get_or_insert(y);
            } else {
                ne.get_or_insert(y);
            }
            let ok = o.peek(x & y, y).0 == p1 && o.peek(x & !y, y).1 == p2;
            if !ok {
                report.condition2_violations += 1;
                if report.condition2_examples.len() < MAX_EXAMPLES {
                    report.condition2_examples.push((x, y));
                }
            }
        }
        if let (Some(e), Some(n)) = (eq, ne) {
            report.condition1_violations += 1;
            if report.condition1_examples.len() < MAX_EXAMPLES {
                report.condition1_examples.push((x, e, n));
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ClawStats {
    pub sort_queries: u64,
    pub search_queries: u64,
    pub verify_queries: u64,
    /// Oracle counter delta over the run; equals the sum of the three above.
    pub total_queries: u64,
    pub classical_setup_evals: u64,
    pub search_domain: u64,
    pub marked_count: u64,
    pub subset_size: u64,
    pub outer_rounds: u64,
    pub inner_success_probability: f64,
    pub attempts: u32,
    pub retries_used: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymmetricClawSolution {
    pub x: Option<u64>,
    pub stats: ClawStats,
}

/// Sorts `P1(., y)` over the assignments of the low `floor(n/3)` bits with
/// `y = 1^{floor(n/3)} 0^{n - floor(n/3)}`, then searches the remaining bits
/// for a `P2` value present in the sorted list.
pub fn solve_symmetric_claw(o: &SymmetricClawOracle, seed: u64, retries: u32) -> Result<SymmetricClawSolution> {
    let n = o.n;
    if n < 3 {
        return Err(Error::InvalidParameter(format!("symmetric claw needs n >= 3, got {n}")));
    }
    let a = n / 3;
    guard("symmetric claw search half", (n - a) as u64, MAX_SYMMETRIC_HALF as u64)?;
    let start = o.query_count();
    let y = full_mask(a);
    let mut list: Vec<(i64, u64)> = (0..1u64 << a).map(|xa| (o.evaluate(xa, y).0, xa)).collect();
    list.sort_unstable();
    list.dedup_by_key(|e| e.0);
    let lookup = |v: i64| list.binary_search_by_key(&v, |e| e.0).ok().map(|i| list[i].1);

    let mut stats = ClawStats {
        sort_queries: 1 << a,
        search_domain: 1 << (n - a),
        ..Default::default()
    };
    let summary = qsearch::enumerate_marked(1 << (n - a), |xb| lookup(o.peek(xb << a, y).1).is_some())?;
    stats.marked_count = summary.marked_count();
    stats.classical_setup_evals = summary.classical_setup_evals();

    let mut found = None;
    for k in 0..=retries {
        stats.attempts += 1;
        if k > 0 {
            stats.retries_used += 1;
        }
        let outcome = qsearch::bbht_search(&summary, seed.wrapping_add(k as u64));
        o.charge(outcome.quantum_queries);
        stats.search_queries += outcome.quantum_queries;
        if let Some(xb) = outcome.found {
            let x = xb << a;
            let xa = lookup(o.peek(x, y).1)
                .ok_or_else(|| Error::InvalidInstance("search returned an unmarked element".into()))?;
            let joined = xa | x;
            let (p1, p2) = o.evaluate(joined, y);
            stats.verify_queries += 1;
            if p1 != p2 {
                return Err(Error::InvalidInstance(format!(
                    "recombined x = {joined:#b} is not a claw; the oracle breaks the promise"
                )));
            }
            found = Some(joined);
            break;
        }
    }
    stats.total_queries = o.query_count() - start;
    Ok(SymmetricClawSolution { x: found, stats })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Promise {
    None,
    AllOneToOne,
    AllTwoToOne,
}

/// `d` functions over the domain `[0, N)`, each with its own query counter.
#[derive(Debug)]
pub struct FunctionFamilyOracle {
    domain: u64,
    tables: Vec<Vec<u64>>,
    counters: Vec<AtomicU64>,
    promise: Promise,
}

impl FunctionFamilyOracle {
    pub fn new(tables: Vec<Vec<u64>>, promise: Promise) -> Result<Self> {
        let d = tables.len();
        if d == 0 {
            return Err(Error::InvalidParameter("family needs at least one function".into()));
        }
        let domain = tables[0].len() as u64;
        if domain == 0 {
            return Err(Error::InvalidParameter("function domain must be non-empty".into()));
        }
        guard("function domain", domain, MAX_DOMAIN)?;
        if let Some(t) = tables.iter().find(|t| t.len() as u64 != domain) {
            return Err(Error::LengthMismatch {
                expected: domain as usize,
                got: t.len(),
            });
        }
        Ok(Self {
            domain,
            tables,
            counters: (0..d).map(|_| AtomicU64::new(0)).collect(),
            promise,
        })
    }

    pub fn d(&self) -> usize {
        self.tables.len()
    }

    pub fn domain(&self) -> u64 {
        self.domain
    }

    pub fn promise(&self) -> Promise {
        self.promise
    }

    /// Counted evaluation of `f_i(x)`.
    pub fn evaluate(&self, i: usize, x: u64) -> u64 {
        self.counters[i].fetch_add(1, Ordering::Relaxed);
        self.tables[i][x as usize]
    }

    /// All `d` values at `x`; costs `d` counted queries.
    pub fn tuple(&self, x: u64) -> Vec<u64> {
        (0..self.d()).map(|i| self.evaluate(i, x)).collect()
    }

    pub fn peek(&self, i: usize, x: u64) -> u64 {
        self.tables[i][x as usize]
    }

    pub fn peek_tuple(&self, x: u64) -> Vec<u64> {
        self.tables.iter().map(|t| t[x as usize]).collect()
    }

    /// Charges `q` simulated queries to every function.
    pub fn charge_each(&self, q: u64) {
        for c in &self.counters {
            c.fetch_add(q, Ordering::Relaxed);
        }
    }

    pub fn queries(&self, i: usize) -> u64 {
        self.counters[i].load(Ordering::Relaxed)
    }

    pub fn total_queries(&self) -> u64 {
        (0..self.d()).map(|i| self.queries(i)).sum()
    }
}

/// Function pairs `(f_i, g_i)`, `i = 1..d`, on a common domain.
#[derive(Debug)]
pub struct ClawFamily {
    pub f: FunctionFamilyOracle,
    pub g: FunctionFamilyOracle,
}

impl ClawFamily {
    pub fn new(f: FunctionFamilyOracle, g: FunctionFamilyOracle) -> Result<Self> {
        if f.d() != g.d() {
            return Err(Error::DimensionMismatch {
                expected: f.d(),
                got: g.d(),
            });
        }
        if f.domain() != g.domain() {
            return Err(Error::LengthMismatch {
                expected: f.domain() as usize,
                got: g.domain() as usize,
            });
        }
        Ok(Self { f, g })
    }

    pub fn d(&self) -> usize {
        self.f.d()
    }

    pub fn domain(&self) -> u64 {
        self.f.domain()
    }

    pub fn total_queries(&self) -> u64 {
        self.f.total_queries() + self.g.total_queries()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairSolution {
    /// 0-based `(x, y)`.
    pub pair: Option<(u64, u64)>,
    pub stats: ClawStats,
}

/// `ceil(sqrt(N))`.
pub fn default_subset_size(domain: u64) -> u64 {
    let mut s = (domain as f64).sqrt().floor() as u64;
    while s * s < domain {
        s += 1;
    }
    s.max(1)
}

fn check_subset(domain: u64, s: u64) -> Result<()> {
    if s == 0 || s > domain {
        return Err(Error::InvalidParameter(format!("subset size {s} outside 1..={domain}")));
    }
    Ok(())
}

/// Distribution of the marked count `M(A) = sum_{v : F_v meets A} |G_v|` for a
/// uniform `s`-subset `A` of `[N]`, where each claw class `v` has `|F_v|` x's
/// and `|G_v|` y's. Computed exactly by a dynamic program over classes.
fn marked_count_distribution(domain: u64, s: u64, classes: &[(u64, u64)]) -> Result<Vec<(u64, f64)>> {
    guard(
        "claw classes times subset size",
        (classes.len() as u64).saturating_mul(s),
        MAX_CLASS_WORK,
    )?;
    let in_classes: u64 = classes.iter().map(|c| c.0).sum();
    let rest = domain - in_classes;
    // ln(ways) keyed by (points drawn from claw classes, marked count)
    let mut states: HashMap<(u64, u64), f64> = HashMap::from([((0, 0), 0.0)]);
    for &(a, g) in classes {
        let mut next: HashMap<(u64, u64), f64> = HashMap::with_capacity(states.len() * 2);
        for (&(j, m), &w) in &states {
            add_ln(&mut next, (j, m), w);
            for k in 1..=a.min(s - j) {
                add_ln(&mut next, (j + k, m + g), w + ln_binomial(a, k));
            }
        }
        states = next;
    }
    let total = ln_binomial(domain, s);
    let mut by_m: HashMap<u64, f64> = HashMap::new();
    for ((j, m), w) in states {
        if s - j <= rest {
            *by_m.entry(m).or_insert(0.0) += (w + ln_binomial(rest, s - j) - total).exp();
        }
    }
    let mut out: Vec<(u64, f64)> = by_m.into_iter().collect();
    out.sort_unstable_by_key(|e| e.0);
    Ok(out)
}

fn add_ln(map: &mut HashMap<(u64, u64), f64>, key: (u64, u64), w: f64) {
    map.entry(key)
        .and_modify(|cur| {
            let hi = cur.max(w);
            *cur = hi + ((*cur - hi).exp() + (w - hi).exp()).ln();
        })
        .or_insert(w);
}

/// Claw pairs `(f_i(x) = g_i(y) for all i)` grouped by value tuple.
struct ClawClasses {
    /// `(f-preimages, g-preimages)` per shared tuple.
    classes: Vec<(Vec<u64>, Vec<u64>)>,
}

fn claw_classes(fam: &ClawFamily) -> ClawClasses {
    let n = fam.domain();
    let mut f_keys: Vec<(Vec<u64>, u64)> = exec::map_range(n, |x| (fam.f.peek_tuple(x), x));
    f_keys.sort_unstable();
    let mut g_keys: Vec<(Vec<u64>, u64)> = exec::map_range(n, |y| (fam.g.peek_tuple(y), y));
    g_keys.sort_unstable();
    let mut classes = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < f_keys.len() && j < g_keys.len() {
        match f_keys[i].0.cmp(&g_keys[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                let key = f_keys[i].0.clone();
                let (mut xs, mut ys) = (Vec::new(), Vec::new());
                while i < f_keys.len() && f_keys[i].0 == key {
                    xs.push(f_keys[i].1);
                    i += 1;
                }
                while j < g_keys.len() && g_keys[j].0 == key {
                    ys.push(g_keys[j].1);
                    j += 1;
                }
                classes.push((xs, ys));
            }
        }
    }
    ClawClasses { classes }
}

/// Claw search for a single pair `(f, g)`: find `x, y` with `f(x) = g(y)`.
pub fn solve_pair_claw(fam: &ClawFamily, subset_size: Option<u64>, seed: u64, retries: u32) -> Result<PairSolution> {
    if fam.d() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: fam.d(),
        });
    }
    solve_simultaneous_claw(fam, subset_size, seed, retries)
}

/// Simultaneous claw search: `f_i(x) = g_i(y)` for every `i`.
///
/// The inner procedure queries all `f_i` on a random `s`-subset `A`, sorts the
/// tuples, and runs `floor((pi/4) sqrt(N))` Grover iterations over `y` against
/// the table. Its exact success probability comes from the claw structure;
/// the outer amplitude amplification over the choice of `A` is simulated at
/// distribution level.
pub fn solve_simultaneous_claw(
    fam: &ClawFamily,
    subset_size: Option<u64>,
    seed: u64,
    retries: u32,
) -> Result<PairSolution> {
    let n = fam.domain();
    let d = fam.d() as u64;
    let s = subset_size.unwrap_or_else(|| default_subset_size(n));
    check_subset(n, s)?;
    let start = fam.total_queries();
    let claws = claw_classes(fam);
    let t = (FRAC_PI_4 * (n as f64).sqrt()).floor() as u64;
    let sizes: Vec<(u64, u64)> = claws
        .classes
        .iter()
        .map(|(xs, ys)| (xs.len() as u64, ys.len() as u64))
        .collect();
    let mut p = 0.0;
    for (m, prob) in marked_count_distribution(n, s, &sizes)? {
        p += prob * qsearch::grover_success_prob(n, m.min(n), t)?;
    }
    let p = p.clamp(0.0, 1.0);
    let p_min = (s as f64 / n as f64) * qsearch::grover_success_prob(n, 1, t)?;
    let inner_cost = d * (s + t + 1);

    let mut stats = ClawStats {
        subset_size: s,
        search_domain: n,
        marked_count: sizes.iter().map(|c| c.1).sum(),
        classical_setup_evals: 2 * d * n,
        inner_success_probability: p,
        ..Default::default()
    };
    let mut pair = None;
    for k in 0..=retries {
        stats.attempts += 1;
        if k > 0 {
            stats.retries_used += 1;
        }
        let out = qsearch::amplitude_amplify(
            p,
            inner_cost,
            p_min,
            |rng: &mut SplitMix64| {
                let total: u64 = claws.classes.iter().map(|c| c.1.len() as u64).sum();
                let mut r = rng.below(total);
                let (xs, ys) = claws
                    .classes
                    .iter()
                    .find(|c| {
                        let len = c.1.len() as u64;
                        if r < len {
                            true
                        } else {
                            r -= len;
                            false
                        }
                    })
                    .expect("sample falls in some class");
                (xs[rng.below(xs.len() as u64) as usize], ys[r as usize])
            },
            seed.wrapping_add(k as u64),
        )?;
        stats.outer_rounds += out.outer_rounds;
        stats.sort_queries += out.outer_rounds * d * s;
        stats.search_queries += out.outer_rounds * d * (t + 1);
        fam.f.charge_each(out.outer_rounds * s);
        fam.g.charge_each(out.outer_rounds * (t + 1));
        if let Some((x, y)) = out.witness {
            stats.verify_queries += 2 * d;
            if fam.f.tuple(x) != fam.g.tuple(y) {
                return Err(Error::InvalidInstance(format!("pair ({x}, {y}) is not a claw")));
            }
            pair = Some((x, y));
            break;
        }
    }
    stats.total_queries = fam.total_queries() - start;
    Ok(PairSolution { pair, stats })
}

/// Same-point variant: find `x` with `f_i(x) = g_i(x)` for every `i`, by plain
/// Grover search over `[N]`. Each search query evaluates all `2d` functions.
pub fn solve_samepoint_claw(fam: &ClawFamily, seed: u64, retries: u32) -> Result<PairSolution> {
    let n = fam.domain();
    let start = fam.total_queries();
    let summary = qsearch::enumerate_marked(n, |x| fam.f.peek_tuple(x) == fam.g.peek_tuple(x))?;
    let d = fam.d() as u64;
    let mut stats = ClawStats {
        search_domain: n,
        marked_count: summary.marked_count(),
        classical_setup_evals: 2 * d * n,
        ..Default::default()
    };
    let mut pair = None;
    for k in 0..=retries {
        stats.attempts += 1;
        if k > 0 {
            stats.retries_used += 1;
        }
        let out = qsearch::bbht_search(&summary, seed.wrapping_add(k as u64));
        fam.f.charge_each(out.quantum_queries);
        fam.g.charge_each(out.quantum_queries);
        stats.search_queries += 2 * d * out.quantum_queries;
        if let Some(x) = out.found {
            stats.verify_queries += 2 * d;
            if fam.f.tuple(x) != fam.g.tuple(x) {
                return Err(Error::InvalidInstance(format!("{x} is not a same-point claw")));
            }
            pair = Some((x, x));
            break;
        }
    }
    stats.total_queries = fam.total_queries() - start;
    Ok(PairSolution { pair, stats })
}

/// Simultaneous collision: `x != y` with `f_i(x) = f_i(y)` for every `i`.
///
/// Each attempt queries all functions on a fresh random `s`-subset `A`. An
/// internal collision in `A` is returned directly; otherwise Grover searches
/// `[N] \ A` for a point whose tuple is stored.
pub fn solve_simultaneous_collision(
    fam: &FunctionFamilyOracle,
    subset_size: Option<u64>,
    seed: u64,
    retries: u32,
) -> Result<PairSolution> {
    let n = fam.domain();
    let d = fam.d() as u64;
    let s = subset_size.unwrap_or_else(|| default_subset_size(n));
    check_subset(n, s)?;
    let start = fam.total_queries();
    let mut stats = ClawStats {
        subset_size: s,
        ..Default::default()
    };
    let mut pair = None;
    for k in 0..=retries {
        stats.attempts += 1;
        if k > 0 {
            stats.retries_used += 1;
        }
        let run_seed = seed.wrapping_add(k as u64);
        let mut rng = SplitMix64::new(run_seed);
        let mut subset = rng.sample_distinct(n, s);
        subset.sort_unstable();
        let mut table: Vec<(Vec<u64>, u64)> = subset.iter().map(|&x| (fam.tuple(x), x)).collect();
        stats.sort_queries += d * s;
        table.sort_unstable();
        let internal = table
            .windows(2)
            .find(|w| w[0].0 == w[1].0)
            .map(|w| (w[0].1, w[1].1));
        let candidate = match internal {
            Some(c) => Some(c),
            None => {
                let rest: Vec<u64> = (0..n).filter(|x| subset.binary_search(x).is_err()).collect();
                if rest.is_empty() {
                    None
                } else {
                    let find = |y: u64| {
                        let key = fam.peek_tuple(y);
                        table
                            .binary_search_by(|e| e.0.cmp(&key))
                            .ok()
                            .map(|i| table[i].1)
                    };
                    let summary =
                        qsearch::enumerate_marked(rest.len() as u64, |i| find(rest[i as usize]).is_some())?;
                    stats.search_domain = summary.domain();
                    stats.marked_count = summary.marked_count();
                    stats.classical_setup_evals += d * summary.classical_setup_evals();
                    let out = qsearch::bbht_search(&summary, rng.next_u64());
                    fam.charge_each(out.quantum_queries);
                    stats.search_queries += d * out.quantum_queries;
                    out.found.map(|i| {
                        let y = rest[i as usize];
                        (find(y).expect("marked point has a stored partner"), y)
                    })
                }
            }
        };
        if let Some((x, y)) = candidate {
            stats.verify_queries += 2 * d;
            if x == y || fam.tuple(x) != fam.tuple(y) {
                return Err(Error::InvalidInstance(format!("({x}, {y}) is not a collision")));
            }
            pair = Some((x.min(y), x.max(y)));
            break;
        }
    }
    stats.total_queries = fam.total_queries() - start;
    Ok(PairSolution { pair, stats })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FamilyPromiseReport {
    pub promise: Option<Promise>,
    pub functions_checked: usize,
    /// `(function, value, preimage count)` for each offending value.
    pub violations: Vec<(usize, u64, u64)>,
}

impl FamilyPromiseReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Largest domain for [`validate_family_promise`], which compares all pairs.
pub const MAX_FAMILY_SCAN: u64 = 1 << 12;

/// Exhaustive pairwise check that every value of every function has exactly
/// `r` preimages, `r` being fixed by the promise tag.
pub fn validate_family_promise(fam: &FunctionFamilyOracle) -> Result<FamilyPromiseReport> {
    guard("family promise scan domain", fam.domain(), MAX_FAMILY_SCAN)?;
    let r = match fam.promise() {
        Promise::None => {
            return Ok(FamilyPromiseReport {
                promise: Some(Promise::None),
                ..Default::default()
            })
        }
        Promise::AllOneToOne => 1,
        Promise::AllTwoToOne => 2,
    };
    let n = fam.domain();
    let mut report = FamilyPromiseReport {
        promise: Some(fam.promise()),
        functions_checked: fam.d(),
        ..Default::default()
    };
    for i in 0..fam.d() {
        for x in 0..n {
            let v = fam.peek(i, x);
            let first = (0..x).all(|z| fam.peek(i, z) != v);
            if first {
                let count = (0..n).filter(|&z| fam.peek(i, z) == v).count() as u64;
                if count != r {
                    report.violations.push((i, v, count));
                }
            }
        }
    }
    Ok(report)
}
