//! Seeded instance generators and the query-count scaling harness.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::claw::{self, ClawFamily, FunctionFamilyOracle, Promise};
use crate::cnfsat;
use crate::error::{guard, Error, Result};
use crate::exec;
use crate::instances::{
    coefficient_cap, exactly_one_sat_to_group_ilp, knapsack_to_ilp, CnfFormula, IlpInstance, KnapsackInstance,
};
use crate::mitm_ilp;
use crate::qsearch::{self, MarkedSetSummary};
use crate::rng::{derive_seed, SplitMix64};

/// Largest `n` for the 2^n baselines.
pub const MAX_BASELINE_VARS: usize = 26;
const KNAPSACK_COEFF_MAX: i64 = 1 << 16;
const CNF_MAX_WIDTH: u64 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    Knapsack,
    Ilp,
    Cnf,
    Exact1,
    SymmetricClaw,
    PairClaw,
    Collision,
}

impl Problem {
    pub const ALL: [Problem; 7] = [
        Problem::Knapsack,
        Problem::Ilp,
        Problem::Cnf,
        Problem::Exact1,
        Problem::SymmetricClaw,
        Problem::PairClaw,
        Problem::Collision,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Problem::Knapsack => "knapsack",
            Problem::Ilp => "ilp",
            Problem::Cnf => "cnf",
            Problem::Exact1 => "exact1",
            Problem::SymmetricClaw => "symmetric-claw",
            Problem::PairClaw => "pair-claw",
            Problem::Collision => "collision",
        }
    }

    /// Sizes are bit lengths `n`, except for function families where the
    /// size is `log2 N`.
    pub fn size_is_log_domain(self) -> bool {
        matches!(self, Problem::PairClaw | Problem::Collision)
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Problem::ALL
            .into_iter()
            .find(|p| p.name() == s || (s == "claw" && *p == Problem::PairClaw))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown problem '{s}'")))
    }
}

/// Parameters of one generated instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratorSpec {
    pub problem: Problem,
    /// `n`, or `log2 N` for function families.
    pub size: usize,
    /// Rows for ILP, functions (or pairs) for families.
    pub d: usize,
    /// Clause density for CNF and exactly-one instances.
    pub c: f64,
    pub plant: bool,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(problem: Problem, size: usize, seed: u64) -> Self {
        let d = match problem {
            Problem::Ilp => 3,
            _ => 1,
        };
        Self {
            problem,
            size,
            d,
            c: 1.0,
            plant: true,
            seed,
        }
    }

    pub fn generate(&self) -> Result<Generated> {
        Ok(match self.problem {
            Problem::Knapsack => Generated::Knapsack(gen_knapsack(self.size, self.plant, self.seed)?),
            Problem::Ilp => Generated::Ilp(gen_ilp(self.size, self.d, self.plant, self.seed)?),
            Problem::Cnf => Generated::Cnf(gen_cnf(self.size, self.c, self.plant, self.seed)?),
            Problem::Exact1 => {
                let m = ((self.c * self.size as f64).floor() as usize).max(1);
                Generated::Exact1(gen_exactly_one(self.size, m, self.plant, self.seed)?)
            }
            Problem::SymmetricClaw => {
                let (a, t) = gen_knapsack_claw(self.size, self.plant, self.seed)?;
                Generated::SymmetricClaw { a, t }
            }
            Problem::PairClaw => {
                Generated::PairClaw(gen_claw_family(domain_of(self.size)?, self.d, self.plant, self.seed)?)
            }
            Problem::Collision => {
                Generated::Collision(gen_collision_family(domain_of(self.size)?, self.d, self.plant, self.seed)?)
            }
        })
    }
}

fn domain_of(log_n: usize) -> Result<u64> {
    guard("log2 of the function domain", log_n as u64, 20)?;
    Ok(1u64 << log_n)
}

#[derive(Debug)]
pub enum Generated {
    Knapsack(KnapsackInstance),
    Ilp(IlpInstance),
    Cnf(CnfFormula),
    Exact1(CnfFormula),
    SymmetricClaw { a: Vec<i64>, t: i64 },
    PairClaw(ClawFamily),
    Collision(FunctionFamilyOracle),
}

/// Positive coefficients; planted targets sum a random non-empty subset,
/// unplanted targets are `sum c + 1`.
pub fn gen_knapsack(n: usize, plant: bool, seed: u64) -> Result<KnapsackInstance> {
    guard("knapsack generator n", n as u64, 30)?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let mut r = SplitMix64::new(seed);
    let c: Vec<i64> = (0..n).map(|_| r.range_i64(1, KNAPSACK_COEFF_MAX)).collect();
    let k = if plant {
        let subset = planted_mask(&mut r, n);
        c.iter().enumerate().filter(|(j, _)| (subset >> j) & 1 == 1).map(|(_, v)| v).sum()
    } else {
        c.iter().sum::<i64>() + 1
    };
    KnapsackInstance::new(c, k)
}

fn planted_mask(r: &mut SplitMix64, n: usize) -> u64 {
    loop {
        let x = r.below(1u64 << n);
        if x != 0 {
            return x;
        }
    }
}

/// Default coefficient bound: as large as the magnitude cap allows, so that
/// planted solutions are unique with overwhelming probability.
pub fn default_ilp_coeff_bound(n: usize, d: usize) -> i64 {
    coefficient_cap(n) / d.max(1) as i64
}

pub fn gen_ilp(n: usize, d: usize, plant: bool, seed: u64) -> Result<IlpInstance> {
    gen_ilp_with(n, d, plant, default_ilp_coeff_bound(n, d), seed)
}

/// Planted, `d >= 2`: `d - 1` random rows and their negated sum, all tight at
/// `x*`; the feasible set is `{x : r_i x = r_i x*}`. Planted with `d = 1`: one
/// random row tight at `x*`. Unplanted: random rows with each right-hand side
/// uniform between the row's extreme activities.
pub fn gen_ilp_with(n: usize, d: usize, plant: bool, bound: i64, seed: u64) -> Result<IlpInstance> {
    if n == 0 || d == 0 || bound < 1 {
        return Err(Error::InvalidParameter(format!("need n, d, bound >= 1 (n={n}, d={d}, bound={bound})")));
    }
    let mut r = SplitMix64::new(seed);
    let random_row = |r: &mut SplitMix64| (0..n).map(|_| r.range_i64(-bound, bound)).collect::<Vec<i64>>();
    let activity = |row: &[i64], x: u64| -> i64 {
        row.iter().enumerate().filter(|(j, _)| (x >> j) & 1 == 1).map(|(_, a)| a).sum()
    };
    if plant {
        let x = r.below(1u64 << n);
        let free = if d >= 2 { d - 1 } else { 1 };
        let mut rows: Vec<Vec<i64>> = (0..free).map(|_| random_row(&mut r)).collect();
        if d >= 2 {
            let neg = (0..n).map(|j| -rows.iter().map(|row| row[j]).sum::<i64>()).collect();
            rows.push(neg);
        }
        let rhs = rows.iter().map(|row| activity(row, x)).collect();
        IlpInstance::new(rows, rhs)
    } else {
        let rows: Vec<Vec<i64>> = (0..d).map(|_| random_row(&mut r)).collect();
        let rhs = rows
            .iter()
            .map(|row| {
                let lo: i64 = row.iter().filter(|&&a| a < 0).sum();
                let hi: i64 = row.iter().filter(|&&a| a > 0).sum();
                r.range_i64(lo, hi)
            })
            .collect();
        IlpInstance::new(rows, rhs)
    }
}

fn random_clause_vars(r: &mut SplitMix64, n: usize) -> Vec<u64> {
    let w = 1 + r.below(CNF_MAX_WIDTH.min(n as u64));
    r.sample_distinct(n as u64, w)
}

/// `floor(c n)` clauses of width 1 to 4 over distinct variables. Planted: each
/// clause has at least one literal true under a hidden `a*`.
pub fn gen_cnf(n: usize, c: f64, plant: bool, seed: u64) -> Result<CnfFormula> {
    Ok(gen_cnf_planted(n, c, plant, seed)?.0)
}

/// As [`gen_cnf`], also returning the planted assignment mask.
pub fn gen_cnf_planted(n: usize, c: f64, plant: bool, seed: u64) -> Result<(CnfFormula, Option<u64>)> {
    if n == 0 || n > crate::instances::MAX_VARS || c.is_nan() || c <= 0.0 {
        return Err(Error::InvalidParameter(format!("need 1 <= n <= 63 and c > 0 (n={n}, c={c})")));
    }
    let m = (c * n as f64 + 1e-9).floor() as usize;
    guard("clause count", m as u64, crate::instances::ClauseMask::MAX_CLAUSES as u64)?;
    let mut r = SplitMix64::new(seed);
    let a = plant.then(|| r.below(1u64 << n));
    let clauses = (0..m)
        .map(|_| {
            let vars = random_clause_vars(&mut r, n);
            let mut lits: Vec<i32> = vars
                .iter()
                .map(|&v| if r.bernoulli(0.5) { v as i32 + 1 } else { -(v as i32 + 1) })
                .collect();
            if let Some(a) = a {
                let sat = |l: i32| ((a >> (l.unsigned_abs() - 1)) & 1 == 1) == (l > 0);
                if !lits.iter().any(|&l| sat(l)) {
                    let k = r.below(lits.len() as u64) as usize;
                    lits[k] = -lits[k];
                }
            }
            lits
        })
        .collect();
    Ok((CnfFormula::new(n, clauses)?, a))
}

/// Exactly-one instances: planted clauses have exactly one literal true under `a*`.
pub fn gen_exactly_one(n: usize, m: usize, plant: bool, seed: u64) -> Result<CnfFormula> {
    if n == 0 || n > crate::instances::MAX_VARS {
        return Err(Error::InvalidParameter(format!("n = {n} outside 1..=63")));
    }
    let mut r = SplitMix64::new(seed);
    let a = plant.then(|| r.below(1u64 << n));
    let clauses = (0..m)
        .map(|_| {
            let vars = random_clause_vars(&mut r, n);
            let pick = r.below(vars.len() as u64) as usize;
            vars.iter()
                .enumerate()
                .map(|(i, &v)| {
                    let var = v as i32 + 1;
                    match a {
                        Some(a) => {
                            let val = (a >> v) & 1 == 1;
                            // the picked literal is true under a*, the rest false
                            if (i == pick) == val {
                                var
                            } else {
                                -var
                            }
                        }
                        None => {
                            if r.bernoulli(0.5) {
                                var
                            } else {
                                -var
                            }
                        }
                    }
                })
                .collect()
        })
        .collect();
    CnfFormula::new(n, clauses)
}

/// Coefficients and a nonzero target for [`claw::knapsack_claw`]. Planted
/// targets sum a random non-empty subset; unplanted targets exceed the total.
pub fn gen_knapsack_claw(n: usize, plant: bool, seed: u64) -> Result<(Vec<i64>, i64)> {
    if n == 0 || n > 40 {
        return Err(Error::InvalidParameter(format!("n = {n} outside 1..=40")));
    }
    let mut r = SplitMix64::new(seed);
    let bound = coefficient_cap(n).min(1 << 32);
    let a: Vec<i64> = (0..n).map(|_| r.range_i64(1, bound)).collect();
    let t = if plant {
        let x = planted_mask(&mut r, n);
        a.iter().enumerate().filter(|(j, _)| (x >> j) & 1 == 1).map(|(_, v)| v).sum()
    } else {
        a.iter().sum::<i64>() + 1
    };
    Ok((a, t))
}

fn permutation(r: &mut SplitMix64, n: u64) -> Vec<u64> {
    let mut p: Vec<u64> = (0..n).collect();
    r.shuffle(&mut p);
    p
}

/// `d` pairs of injective functions with disjoint images (`f` even, `g` odd).
/// Planted: one random `(x*, y*)` gets `g_i(y*) = f_i(x*)` for every `i`,
/// which is then the unique claw.
pub fn gen_claw_family(domain: u64, d: usize, plant: bool, seed: u64) -> Result<ClawFamily> {
    if domain == 0 || d == 0 {
        return Err(Error::InvalidParameter("need N >= 1 and d >= 1".into()));
    }
    guard("function domain", domain, claw::MAX_DOMAIN)?;
    let mut r = SplitMix64::new(seed);
    let mut f = Vec::with_capacity(d);
    let mut g = Vec::with_capacity(d);
    for _ in 0..d {
        f.push(permutation(&mut r, domain).into_iter().map(|v| 2 * v).collect::<Vec<u64>>());
        g.push(permutation(&mut r, domain).into_iter().map(|v| 2 * v + 1).collect::<Vec<u64>>());
    }
    if plant {
        let (x, y) = (r.below(domain), r.below(domain));
        for i in 0..d {
            g[i][y as usize] = f[i][x as usize];
        }
    }
    ClawFamily::new(
        FunctionFamilyOracle::new(f, Promise::AllOneToOne)?,
        FunctionFamilyOracle::new(g, Promise::AllOneToOne)?,
    )
}

/// `d` functions on `[N]`. 2-to-1: all functions share one random perfect
/// matching, each pair getting a per-function random value. Otherwise every
/// function is a random permutation.
pub fn gen_collision_family(domain: u64, d: usize, two_to_one: bool, seed: u64) -> Result<FunctionFamilyOracle> {
    if domain == 0 || d == 0 {
        return Err(Error::InvalidParameter("need N >= 1 and d >= 1".into()));
    }
    guard("function domain", domain, claw::MAX_DOMAIN)?;
    let mut r = SplitMix64::new(seed);
    if !two_to_one {
        let tables = (0..d).map(|_| permutation(&mut r, domain)).collect();
        return FunctionFamilyOracle::new(tables, Promise::AllOneToOne);
    }
    if domain % 2 == 1 {
        return Err(Error::InvalidParameter(format!("2-to-1 needs an even domain, got {domain}")));
    }
    let order = permutation(&mut r, domain);
    let tables = (0..d)
        .map(|_| {
            let values = permutation(&mut r, domain / 2);
            let mut t = vec![0u64; domain as usize];
            for (k, pair) in order.chunks(2).enumerate() {
                t[pair[0] as usize] = values[k];
                t[pair[1] as usize] = values[k];
            }
            t
        })
        .collect();
    FunctionFamilyOracle::new(tables, Promise::AllTwoToOne)
}

/// Marked set of `[0, 2^n)` enumerated in Gray-code order with an
/// incrementally updated state; `flip(state, j, on)` toggles variable `j`.
fn gray_marked<S, F, P>(n: usize, mut state: S, flip: F, marked: P) -> Result<MarkedSetSummary>
where
    F: Fn(&mut S, usize, bool),
    P: Fn(&S) -> bool,
{
    guard("baseline variable count", n as u64, MAX_BASELINE_VARS as u64)?;
    let mut out = Vec::new();
    let mut x = 0u64;
    if marked(&state) {
        out.push(0);
    }
    for i in 1..1u64 << n {
        let j = i.trailing_zeros() as usize;
        x ^= 1 << j;
        flip(&mut state, j, (x >> j) & 1 == 1);
        if marked(&state) {
            out.push(x);
        }
    }
    MarkedSetSummary::new(1 << n, out, 1 << n)
}

fn ilp_baseline(inst: &IlpInstance) -> Result<MarkedSetSummary> {
    let d = inst.d();
    gray_marked(
        inst.n(),
        vec![0i64; d],
        |act, j, on| {
            for (i, row) in inst.rows().iter().enumerate() {
                act[i] += if on { row[j] } else { -row[j] };
            }
        },
        |act| {
            (0..d).all(|i| {
                if inst.is_equality(i) {
                    act[i] == inst.rhs()[i]
                } else {
                    act[i] <= inst.rhs()[i]
                }
            })
        },
    )
}

fn sum_baseline(a: &[i64], t: i64) -> Result<MarkedSetSummary> {
    gray_marked(a.len(), 0i64, |s, j, on| *s += if on { a[j] } else { -a[j] }, |s| *s == t)
}

fn formula_baseline(f: &CnfFormula, exactly_one: bool) -> Result<MarkedSetSummary> {
    guard("baseline variable count", f.n() as u64, MAX_BASELINE_VARS as u64)?;
    let lit = |x: u64, l: i32| ((x >> (l.unsigned_abs() - 1)) & 1 == 1) == (l > 0);
    let marked = exec::filter_range(1 << f.n(), |x| {
        f.clauses().iter().all(|c| {
            let k = c.iter().filter(|&&l| lit(x, l)).count();
            if exactly_one {
                k == 1
            } else {
                k >= 1
            }
        })
    });
    MarkedSetSummary::new(1 << f.n(), marked, 1 << f.n())
}

fn pair_baseline(domain: u64, pairs: Vec<u64>) -> Result<MarkedSetSummary> {
    let n2 = domain * domain;
    MarkedSetSummary::new(n2, pairs, n2)
}

fn claw_pairs(fam: &ClawFamily) -> Vec<u64> {
    let n = fam.domain();
    let mut f: Vec<(Vec<u64>, u64)> = (0..n).map(|x| (fam.f.peek_tuple(x), x)).collect();
    f.sort_unstable();
    let mut out = Vec::new();
    for y in 0..n {
        let key = fam.g.peek_tuple(y);
        let start = f.partition_point(|e| e.0 < key);
        for e in f[start..].iter().take_while(|e| e.0 == key) {
            out.push(e.1 * n + y);
        }
    }
    out
}

fn collision_pairs(fam: &FunctionFamilyOracle) -> Vec<u64> {
    let n = fam.domain();
    let mut t: Vec<(Vec<u64>, u64)> = (0..n).map(|x| (fam.peek_tuple(x), x)).collect();
    t.sort_unstable();
    let mut out = Vec::new();
    let mut i = 0;
    while i < t.len() {
        let mut j = i + 1;
        while j < t.len() && t[j].0 == t[i].0 {
            j += 1;
        }
        for a in i..j {
            for b in a + 1..j {
                let (x, y) = (t[a].1.min(t[b].1), t[a].1.max(t[b].1));
                out.push(x * n + y);
            }
        }
        i = j;
    }
    out
}

/// Repeats BBHT with seeds `seed + k` until success or `retries` reruns.
fn baseline_search(summary: &MarkedSetSummary, seed: u64, retries: u32) -> (u64, bool) {
    let mut queries = 0;
    for k in 0..=retries {
        let out = qsearch::bbht_search(summary, seed.wrapping_add(k as u64));
        queries += out.quantum_queries;
        if out.found.is_some() {
            return (queries, true);
        }
    }
    (queries, false)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingConfig {
    pub problem: Problem,
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub d: usize,
    pub c: f64,
    pub subset_size: Option<u64>,
    pub retries: u32,
    pub baseline: bool,
}

impl ScalingConfig {
    pub fn new(problem: Problem, sizes: Vec<usize>, trials: usize, seed: u64) -> Self {
        Self {
            problem,
            sizes,
            trials,
            seed,
            d: GeneratorSpec::new(problem, 0, 0).d,
            c: 1.0,
            subset_size: None,
            retries: 5,
            baseline: true,
        }
    }
}

/// One solver run and its baseline on the same instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRow {
    pub problem: Problem,
    pub size: usize,
    pub seed: u64,
    pub queries: u64,
    pub setup_evals: u64,
    pub success: bool,
    pub baseline_queries: Option<u64>,
    pub baseline_success: Option<bool>,
    #[serde(skip)]
    pub ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeSummary {
    pub size: usize,
    pub trials: usize,
    pub median_queries: f64,
    pub mean_queries: f64,
    pub median_setup_evals: f64,
    pub success_rate: f64,
    pub baseline_median_queries: Option<f64>,
    pub baseline_success_rate: Option<f64>,
    #[serde(skip)]
    pub mean_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    /// Slope of `log2(median queries)` against size.
    pub beta: f64,
    pub intercept: f64,
    /// Root mean square of the fit residuals.
    pub residual: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingReport {
    pub problem: Problem,
    pub size_unit: &'static str,
    pub seed: u64,
    pub trials: usize,
    pub sizes: Vec<SizeSummary>,
    pub solver_fit: Option<ExponentFit>,
    pub baseline_fit: Option<ExponentFit>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub rows: Vec<TrialRow>,
}

/// Median of a non-empty sample.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    }
}

/// Least-squares line through `(x, log2 y)`; `None` with fewer than two distinct sizes.
pub fn fit_exponent(points: &[(f64, f64)]) -> Option<ExponentFit> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.1 > 0.0).map(|&(x, y)| (x, y.log2())).collect();
    let k = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let beta = sxy / sxx;
    let intercept = my - beta * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - intercept - beta * p.0).powi(2)).sum();
    Some(ExponentFit {
        beta,
        intercept,
        residual: (rss / k).sqrt(),
        points: pts.len(),
    })
}

fn run_trial(cfg: &ScalingConfig, size: usize, seed: u64) -> Result<TrialRow> {
    let spec = GeneratorSpec {
        problem: cfg.problem,
        size,
        d: cfg.d,
        c: cfg.c,
        plant: true,
        seed,
    };
    let instance = spec.generate()?;
    let search_seed = derive_seed(seed, 1);
    let baseline_seed = derive_seed(seed, 2);
    let start = Instant::now();
    let (queries, setup_evals, success) = match &instance {
        Generated::Knapsack(k) => {
            let s = mitm_ilp::solve_ilp(&knapsack_to_ilp(k), search_seed, cfg.retries)?;
            (s.stats.quantum_queries, s.stats.classical_setup_evals, s.assignment.is_some())
        }
        Generated::Ilp(inst) => {
            let s = mitm_ilp::solve_ilp(inst, search_seed, cfg.retries)?;
            (s.stats.quantum_queries, s.stats.classical_setup_evals, s.assignment.is_some())
        }
        Generated::Exact1(f) => {
            let s = mitm_ilp::solve_ilp(&exactly_one_sat_to_group_ilp(f)?, search_seed, cfg.retries)?;
            (s.stats.quantum_queries, s.stats.classical_setup_evals, s.assignment.is_some())
        }
        Generated::Cnf(f) => {
            let s = cnfsat::solve_cnf(f, cfg.c, search_seed, cfg.retries, None)?;
            (s.stats.quantum_queries, s.stats.classical_setup_evals, s.assignment.is_some())
        }
        Generated::SymmetricClaw { a, t } => {
            let o = claw::knapsack_claw(a, *t)?;
            let s = claw::solve_symmetric_claw(&o, search_seed, cfg.retries)?;
            (s.stats.total_queries, s.stats.classical_setup_evals, s.x.is_some())
        }
        Generated::PairClaw(fam) => {
            let s = claw::solve_simultaneous_claw(fam, cfg.subset_size, search_seed, cfg.retries)?;
            (s.stats.total_queries, s.stats.classical_setup_evals, s.pair.is_some())
        }
        Generated::Collision(fam) => {
            let s = claw::solve_simultaneous_collision(fam, cfg.subset_size, search_seed, cfg.retries)?;
            (s.stats.total_queries, s.stats.classical_setup_evals, s.pair.is_some())
        }
    };
    let ms = start.elapsed().as_secs_f64() * 1e3;
    let (baseline_queries, baseline_success) = if cfg.baseline {
        let summary = match &instance {
            Generated::Knapsack(k) => sum_baseline(k.coefficients(), k.target())?,
            Generated::Ilp(inst) => ilp_baseline(inst)?,
            Generated::Exact1(f) => formula_baseline(f, true)?,
            Generated::Cnf(f) => formula_baseline(f, false)?,
            Generated::SymmetricClaw { a, t } => sum_baseline(a, *t)?,
            Generated::PairClaw(fam) => pair_baseline(fam.domain(), claw_pairs(fam))?,
            Generated::Collision(fam) => pair_baseline(fam.domain(), collision_pairs(fam))?,
        };
        let (q, ok) = baseline_search(&summary, baseline_seed, cfg.retries);
        (Some(q), Some(ok))
    } else {
        (None, None)
    };
    Ok(TrialRow {
        problem: cfg.problem,
        size,
        seed,
        queries,
        setup_evals,
        success,
        baseline_queries,
        baseline_success,
        ms,
    })
}

/// Seed of trial `t` at `size`.
pub fn trial_seed(seed: u64, size: usize, trial: usize) -> u64 {
    derive_seed(seed, ((size as u64) << 32) | trial as u64)
}

/// Runs the solver and the full-domain Grover baseline on `trials` planted
/// instances per size, then fits exponents to the per-size medians.
pub fn run_scaling(cfg: &ScalingConfig) -> Result<ScalingReport> {
    if cfg.trials == 0 || cfg.sizes.is_empty() {
        return Err(Error::InvalidParameter("need at least one size and one trial".into()));
    }
    let jobs: Vec<(usize, u64)> = cfg
        .sizes
        .iter()
        .flat_map(|&s| (0..cfg.trials).map(move |t| (s, trial_seed(cfg.seed, s, t))))
        .collect();
    let rows: Vec<TrialRow> = exec::map_vec(jobs, |(size, seed)| run_trial(cfg, size, seed))
        .into_iter()
        .collect::<Result<_>>()?;

    let mut sizes = Vec::new();
    for &size in &cfg.sizes {
        let rs: Vec<&TrialRow> = rows.iter().filter(|r| r.size == size).collect();
        let q: Vec<f64> = rs.iter().map(|r| r.queries as f64).collect();
        let e: Vec<f64> = rs.iter().map(|r| r.setup_evals as f64).collect();
        let k = rs.len() as f64;
        let bq: Vec<f64> = rs.iter().filter_map(|r| r.baseline_queries.map(|v| v as f64)).collect();
        let bs = rs.iter().filter(|r| r.baseline_success == Some(true)).count() as f64;
        sizes.push(SizeSummary {
            size,
            trials: rs.len(),
            median_queries: median(&q),
            mean_queries: q.iter().sum::<f64>() / k,
            median_setup_evals: median(&e),
            success_rate: rs.iter().filter(|r| r.success).count() as f64 / k,
            baseline_median_queries: (!bq.is_empty()).then(|| median(&bq)),
            baseline_success_rate: (!bq.is_empty()).then_some(bs / k),
            mean_ms: rs.iter().map(|r| r.ms).sum::<f64>() / k,
        });
    }
    let solver_fit = fit_exponent(&sizes.iter().map(|s| (s.size as f64, s.median_queries)).collect::<Vec<_>>());
    let baseline_fit = fit_exponent(
        &sizes
            .iter()
            .filter_map(|s| s.baseline_median_queries.map(|b| (s.size as f64, b)))
            .collect::<Vec<_>>(),
    );
    let mut notes = Vec::new();
    if solver_fit.is_none() {
        notes.push("insufficient points for an exponent fit (need two or more sizes)".to_string());
    }
    Ok(ScalingReport {
        problem: cfg.problem,
        size_unit: if cfg.problem.size_is_log_domain() { "log2 N" } else { "n" },
        seed: cfg.seed,
        trials: cfg.trials,
        sizes,
        solver_fit,
        baseline_fit,
        notes,
        rows,
    })
}

impl ScalingReport {
    /// One CSV row per size and trial; the `ms` column only when `timing` is set.
    pub fn to_csv(&self, timing: bool) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec![
            "problem",
            "size",
            "seed",
            "queries",
            "setup_evals",
            "success",
            "baseline_queries",
            "baseline_success",
        ];
        if timing {
            header.push("ms");
        }
        let io = |e: csv::Error| Error::InvalidParameter(format!("csv output: {e}"));
        w.write_record(&header).map_err(io)?;
        for r in &self.rows {
            let mut rec = vec![
                r.problem.to_string(),
                r.size.to_string(),
                r.seed.to_string(),
                r.queries.to_string(),
                r.setup_evals.to_string(),
                r.success.to_string(),
                r.baseline_queries.map_or(String::new(), |v| v.to_string()),
                r.baseline_success.map_or(String::new(), |v| v.to_string()),
            ];
            if timing {
                rec.push(format!("{:.3}", r.ms));
            }
            w.write_record(&rec).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidParameter(format!("csv output: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brute;
    use crate::instances::Assignment;

    #[test]
    fn knapsack_generator() {
        for seed in 0..100 {
            let k = gen_knapsack(10, true, seed).unwrap();
            assert!(brute::brute_subset_sum(k.coefficients(), k.target()).unwrap().feasible);
        }
        let k = gen_knapsack(10, false, 1).unwrap();
        assert_eq!(k.target(), k.coefficients().iter().sum::<i64>() + 1);
        assert_eq!(gen_knapsack(12, true, 9).unwrap(), gen_knapsack(12, true, 9).unwrap());
    }

    #[test]
    fn ilp_generator() {
        for seed in 0..30 {
            let inst = gen_ilp(12, 3, true, seed).unwrap();
            let r = brute::brute_ilp(&inst).unwrap();
            assert_eq!(r.count, 1, "seed {seed}");
            let small = gen_ilp_with(10, 1, true, 5, seed).unwrap();
            assert!(brute::brute_ilp(&small).unwrap().feasible);
        }
        let inst = gen_ilp(20, 3, true, 4).unwrap();
        assert!(inst.rows().iter().flatten().all(|c| c.abs() <= coefficient_cap(20)));
    }

    #[test]
    fn cnf_generator() {
        for seed in 0..50 {
            let (f, a) = gen_cnf_planted(12, 1.0, true, seed).unwrap();
            assert_eq!(f.m(), 12);
            assert!(f.is_satisfied_by(&Assignment::from_mask(12, a.unwrap()).unwrap()));
            let f = gen_exactly_one(10, 10, true, seed).unwrap();
            assert!(brute::brute_exactly_one(&f).unwrap().feasible);
        }
        assert!(gen_cnf(14, 2.0, true, 3).unwrap().in_cnf_c(2.0));
    }

    #[test]
    fn family_generators() {
        for seed in 0..10 {
            let fam = gen_claw_family(64, 2, true, seed).unwrap();
            assert_eq!(brute::brute_pair_claw(&fam).unwrap().count, 1);
            let fam = gen_claw_family(64, 1, false, seed).unwrap();
            assert_eq!(brute::brute_pair_claw(&fam).unwrap().count, 0);
            let fam = gen_collision_family(256, 2, true, seed).unwrap();
            assert!(claw::validate_family_promise(&fam).unwrap().is_clean());
            assert_eq!(brute::brute_collision(&fam).unwrap().count, 128);
            let fam = gen_collision_family(256, 2, false, seed).unwrap();
            assert!(claw::validate_family_promise(&fam).unwrap().is_clean());
        }
    }

    #[test]
    fn knapsack_claw_generator() {
        for seed in 0..10 {
            let (a, t) = gen_knapsack_claw(8, true, seed).unwrap();
            assert_ne!(t, 0);
            assert!(claw::validate_promise(&claw::knapsack_claw(&a, t).unwrap()).unwrap().is_clean());
            assert!(brute::brute_subset_sum(&a, t).unwrap().feasible);
        }
    }

    #[test]
    fn baselines_match_brute_force() {
        for seed in 0..10 {
            let inst = gen_ilp_with(10, 2, false, 6, seed).unwrap();
            let b = brute::brute_ilp(&inst).unwrap();
            let masks: Vec<u64> = b.witnesses.iter().map(|w| w.mask()).collect();
            assert_eq!(ilp_baseline(&inst).unwrap().marked(), masks.as_slice());
            let k = gen_knapsack(10, true, seed).unwrap();
            let b = brute::brute_subset_sum(k.coefficients(), k.target()).unwrap();
            assert_eq!(sum_baseline(k.coefficients(), k.target()).unwrap().marked_count(), b.count);
        }
    }

    #[test]
    fn fit_examples() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 2f64.powf(0.5 * i as f64 + 1.0))).collect();
        let fit = fit_exponent(&pts).unwrap();
        assert!((fit.beta - 0.5).abs() < 1e-12 && fit.residual < 1e-12);
        assert!(fit_exponent(&pts[..1]).is_none());
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn scaling_is_deterministic() {
        let cfg = ScalingConfig::new(Problem::Ilp, vec![9, 12], 4, 17);
        let a = run_scaling(&cfg).unwrap();
        let b = run_scaling(&cfg).unwrap();
        assert_eq!(a.to_csv(false).unwrap(), b.to_csv(false).unwrap());
        assert_eq!(a.to_csv(false).unwrap().lines().count(), 9);
        assert!(a.solver_fit.is_some());
        let single = run_scaling(&ScalingConfig::new(Problem::Knapsack, vec![10], 2, 1)).unwrap();
        assert!(single.solver_fit.is_none());
        assert!(!single.notes.is_empty());
    }
}
