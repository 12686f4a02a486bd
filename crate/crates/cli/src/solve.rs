use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use qmitm::brute;
use qmitm::claw;
use qmitm::cnfsat;
use qmitm::formats;
use qmitm::genbench::{Generated, GeneratorSpec, Problem};
use qmitm::instances::{exactly_one_sat_to_group_ilp, knapsack_to_ilp, Assignment, CnfFormula, IlpInstance};
use qmitm::mitm_ilp;

use crate::report::{digest, print_json};
use crate::{SolveArgs, SolveKind};

const VERIFY_MAX_VARS: usize = 20;
const VERIFY_MAX_DOMAIN: u64 = 1 << 12;

#[derive(Serialize)]
struct Verification {
    brute_feasible: bool,
    brute_count: u64,
    agrees: bool,
}

#[derive(Serialize)]
struct RunReport {
    command: Vec<String>,
    kind: &'static str,
    instance_digest: String,
    size: usize,
    result: &'static str,
    witness: Option<Value>,
    quantum_queries: u64,
    classical_setup_evals: u64,
    tree_visits: Option<u64>,
    retries_used: u32,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verification: Option<Verification>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
    stats: Value,
}

/// Solver output before verification and reporting.
struct Solved {
    size: usize,
    digest: String,
    witness: Option<Value>,
    quantum_queries: u64,
    classical_setup_evals: u64,
    tree_visits: Option<u64>,
    retries_used: u32,
    wall_ms: f64,
    stats: Value,
    /// `(feasible, count)` from the exhaustive solver when requested.
    brute: Option<(bool, u64)>,
}

fn kind_name(k: SolveKind) -> &'static str {
    match k {
        SolveKind::Knapsack => "knapsack",
        SolveKind::Ilp => "ilp",
        SolveKind::Cnf => "cnf",
        SolveKind::Exact1 => "exact1",
        SolveKind::Claw => "claw",
        SolveKind::SymmetricClaw => "symmetric-claw",
        SolveKind::Collision => "collision",
    }
}

fn problem_of(k: SolveKind) -> Problem {
    match k {
        SolveKind::Knapsack => Problem::Knapsack,
        SolveKind::Ilp => Problem::Ilp,
        SolveKind::Cnf => Problem::Cnf,
        SolveKind::Exact1 => Problem::Exact1,
        SolveKind::Claw => Problem::PairClaw,
        SolveKind::SymmetricClaw => Problem::SymmetricClaw,
        SolveKind::Collision => Problem::Collision,
    }
}

fn load(a: &SolveArgs) -> Result<Generated> {
    if let Some(size) = a.generate {
        let mut spec = GeneratorSpec::new(problem_of(a.kind), size, a.common.seed);
        spec.plant = !a.no_plant;
        if let Some(d) = a.d {
            spec.d = d;
        }
        if let Some(c) = a.c {
            spec.c = c;
        }
        return Ok(spec.generate()?);
    }
    let Some(path) = &a.input else {
        bail!("either an input file or --generate SIZE is required");
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let ctx = || format!("parsing {}", path.display());
    Ok(match a.kind {
        SolveKind::Knapsack => Generated::Knapsack(formats::parse_knapsack(&text).with_context(ctx)?),
        SolveKind::Ilp => Generated::Ilp(formats::parse_ilp(&text).with_context(ctx)?),
        SolveKind::Cnf => Generated::Cnf(formats::parse_dimacs(&text).with_context(ctx)?),
        SolveKind::Exact1 => Generated::Exact1(formats::parse_dimacs(&text).with_context(ctx)?),
        SolveKind::Claw | SolveKind::SymmetricClaw | SolveKind::Collision => {
            bail!("{} instances are generated in-process; use --generate", kind_name(a.kind))
        }
    })
}

fn exactly_one_holds(f: &CnfFormula, x: &Assignment) -> bool {
    f.clauses().iter().all(|c| {
        c.iter()
            .filter(|&&l| x.get(l.unsigned_abs() as usize - 1) == (l > 0))
            .count()
            == 1
    })
}

fn check_verify_size(n: u64, limit: u64, what: &str) -> Result<()> {
    if n > limit {
        bail!("--verify supports {what} up to {limit}, got {n}");
    }
    Ok(())
}

fn ilp_run(inst: &IlpInstance, a: &SolveArgs) -> Result<(Option<Assignment>, mitm_ilp::SolveStats)> {
    let s = mitm_ilp::solve_ilp(inst, a.common.seed, a.common.retries)?;
    Ok((s.assignment, s.stats))
}

fn from_ilp(size: usize, digest: String, x: Option<Assignment>, st: mitm_ilp::SolveStats) -> Result<Solved> {
    Ok(Solved {
        size,
        digest,
        witness: x.map(|x| json!(x)),
        quantum_queries: st.quantum_queries,
        classical_setup_evals: st.classical_setup_evals,
        tree_visits: Some(st.tree_visits),
        retries_used: st.retries_used,
        wall_ms: st.wall_ms,
        stats: serde_json::to_value(&st)?,
        brute: None,
    })
}

fn solve(inst: &Generated, a: &SolveArgs) -> Result<Solved> {
    let verify = a.verify;
    Ok(match inst {
        Generated::Knapsack(k) => {
            let (x, st) = ilp_run(&knapsack_to_ilp(k), a)?;
            if let Some(x) = &x {
                if k.subset_sum(x) != k.target() {
                    bail!("internal error: knapsack witness failed re-verification");
                }
            }
            let mut s = from_ilp(k.n(), digest(&formats::write_knapsack(k)), x, st)?;
            if verify {
                check_verify_size(k.n() as u64, VERIFY_MAX_VARS as u64, "n")?;
                let b = brute::brute_subset_sum(k.coefficients(), k.target())?;
                s.brute = Some((b.feasible, b.count));
            }
            s
        }
        Generated::Ilp(inst) => {
            let (x, st) = ilp_run(inst, a)?;
            if let Some(x) = &x {
                if !inst.is_feasible(x)? {
                    bail!("internal error: ILP witness failed re-verification");
                }
            }
            let mut s = from_ilp(inst.n(), digest(&formats::write_ilp(inst)), x, st)?;
            if verify {
                check_verify_size(inst.n() as u64, VERIFY_MAX_VARS as u64, "n")?;
                let b = brute::brute_ilp(inst)?;
                s.brute = Some((b.feasible, b.count));
            }
            s
        }
        Generated::Exact1(f) => {
            let (x, st) = ilp_run(&exactly_one_sat_to_group_ilp(f)?, a)?;
            if let Some(x) = &x {
                if !exactly_one_holds(f, x) {
                    bail!("internal error: exactly-one witness failed re-verification");
                }
            }
            let mut s = from_ilp(f.n(), digest(&formats::write_dimacs(f)), x, st)?;
            if verify {
                check_verify_size(f.n() as u64, VERIFY_MAX_VARS as u64, "n")?;
                let b = brute::brute_exactly_one(f)?;
                s.brute = Some((b.feasible, b.count));
            }
            s
        }
        Generated::Cnf(f) => {
            let c = a.c.unwrap_or_else(|| (f.m() as f64 / f.n() as f64).max(1.0 / f.n() as f64));
            let sol = cnfsat::solve_cnf(f, c, a.common.seed, a.common.retries, a.alpha_override)?;
            if let Some(x) = &sol.assignment {
                if !f.is_satisfied_by(x) {
                    bail!("internal error: CNF witness failed re-verification");
                }
            }
            let st = sol.stats;
            let brute = if verify {
                check_verify_size(f.n() as u64, VERIFY_MAX_VARS as u64, "n")?;
                let b = brute::brute_cnf(f)?;
                Some((b.feasible, b.count))
            } else {
                None
            };
            Solved {
                size: f.n(),
                digest: digest(&formats::write_dimacs(f)),
                witness: sol.assignment.map(|x| json!(x)),
                quantum_queries: st.quantum_queries,
                classical_setup_evals: st.classical_setup_evals,
                tree_visits: None,
                retries_used: st.retries_used,
                wall_ms: st.wall_ms,
                stats: serde_json::to_value(&st)?,
                brute,
            }
        }
        Generated::SymmetricClaw { a: coeffs, t } => {
            let o = claw::knapsack_claw(coeffs, *t)?;
            let start = std::time::Instant::now();
            let sol = claw::solve_symmetric_claw(&o, a.common.seed, a.common.retries)?;
            let witness = match sol.x {
                Some(x) => {
                    let (p1, p2) = o.peek(x, 0);
                    if p1 != p2 {
                        bail!("internal error: symmetric-claw witness failed re-verification");
                    }
                    let bits: Vec<u8> = (0..coeffs.len()).map(|i| ((x >> i) & 1) as u8).collect();
                    Some(json!(bits))
                }
                None => None,
            };
            let brute = if verify {
                check_verify_size(coeffs.len() as u64, VERIFY_MAX_VARS as u64, "n")?;
                let b = brute::brute_subset_sum(coeffs, *t)?;
                Some((b.feasible, b.count))
            } else {
                None
            };
            let canonical = format!("{coeffs:?} {t}");
            claw_solved(coeffs.len(), digest(&canonical), witness, sol.stats, start, brute)?
        }
        Generated::PairClaw(fam) => {
            let start = std::time::Instant::now();
            let sol = claw::solve_simultaneous_claw(fam, a.subset_size, a.common.seed, a.common.retries)?;
            let witness = match sol.pair {
                Some((x, y)) => {
                    if fam.f.peek_tuple(x) != fam.g.peek_tuple(y) {
                        bail!("internal error: claw witness failed re-verification");
                    }
                    Some(json!({ "x": x + 1, "y": y + 1 }))
                }
                None => None,
            };
            let brute = if verify {
                check_verify_size(fam.domain(), VERIFY_MAX_DOMAIN, "N")?;
                let b = brute::brute_pair_claw(fam)?;
                Some((b.feasible, b.count))
            } else {
                None
            };
            let canonical = format!("claw N={} d={} plant={} seed={}", fam.domain(), fam.d(), !a.no_plant, a.common.seed);
            let size = fam.domain().trailing_zeros() as usize;
            claw_solved(size, digest(&canonical), witness, sol.stats, start, brute)?
        }
        Generated::Collision(fam) => {
            let start = std::time::Instant::now();
            let sol = claw::solve_simultaneous_collision(fam, a.subset_size, a.common.seed, a.common.retries)?;
            let witness = match sol.pair {
                Some((x, y)) => {
                    if x == y || fam.peek_tuple(x) != fam.peek_tuple(y) {
                        bail!("internal error: collision witness failed re-verification");
                    }
                    Some(json!({ "x": x + 1, "y": y + 1 }))
                }
                None => None,
            };
            let brute = if verify {
                check_verify_size(fam.domain(), VERIFY_MAX_DOMAIN, "N")?;
                let b = brute::brute_collision(fam)?;
                Some((b.feasible, b.count))
            } else {
                None
            };
            let canonical = format!("collision N={} d={} two_to_one={} seed={}", fam.domain(), fam.d(), !a.no_plant, a.common.seed);
            let size = fam.domain().trailing_zeros() as usize;
            claw_solved(size, digest(&canonical), witness, sol.stats, start, brute)?
        }
    })
}

fn claw_solved(
    size: usize,
    digest: String,
    witness: Option<Value>,
    st: claw::ClawStats,
    start: std::time::Instant,
    brute: Option<(bool, u64)>,
) -> Result<Solved> {
    Ok(Solved {
        size,
        digest,
        witness,
        quantum_queries: st.total_queries,
        classical_setup_evals: st.classical_setup_evals,
        tree_visits: None,
        retries_used: st.retries_used,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        stats: serde_json::to_value(&st)?,
        brute,
    })
}

pub fn run(a: &SolveArgs, echo: &[String]) -> Result<u8> {
    let inst = load(a)?;
    let s = solve(&inst, a)?;
    let found = s.witness.is_some();
    let result = match (found, s.brute) {
        (true, _) => "feasible",
        (false, Some((false, _))) => "infeasible",
        (false, _) => "unknown",
    };
    let note = (!found).then(|| {
        format!(
            "no solution found within {} retries; the search is probabilistic, so this is not a proof of infeasibility{}",
            a.common.retries,
            if result == "infeasible" { " (the exhaustive check confirms none exists)" } else { "" }
        )
    });
    let report = RunReport {
        command: echo.to_vec(),
        kind: kind_name(a.kind),
        instance_digest: s.digest,
        size: s.size,
        result,
        witness: s.witness,
        quantum_queries: s.quantum_queries,
        classical_setup_evals: s.classical_setup_evals,
        tree_visits: s.tree_visits,
        retries_used: s.retries_used,
        seed: a.common.seed,
        wall_ms: a.common.timing.then_some(s.wall_ms),
        verification: s.brute.map(|(f, c)| Verification {
            brute_feasible: f,
            brute_count: c,
            agrees: f == found,
        }),
        note,
        stats: s.stats,
    };
    eprintln!("{:<16} {:<10} {:>12} {:>14} {:>8}", "kind", "result", "queries", "setup_evals", "retries");
    eprintln!(
        "{:<16} {:<10} {:>12} {:>14} {:>8}",
        report.kind, report.result, report.quantum_queries, report.classical_setup_evals, report.retries_used
    );
    if let Some(n) = &report.note {
        eprintln!("note: {n}");
    }
    print_json(&report)?;
    Ok(if found { 0 } else { 1 })
}
