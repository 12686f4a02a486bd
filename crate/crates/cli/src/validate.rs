use anyhow::Result;
use serde::Serialize;
use serde_json::{json, Value};

use qmitm::claw;
use qmitm::cnfsat;
use qmitm::genbench;
use qmitm::instances::Assignment;
use qmitm::rng::derive_seed;

use crate::report::print_json;
use crate::{ValidateArgs, ValidateKind};

#[derive(Serialize)]
struct ValidationReport<'a> {
    command: &'a [String],
    kind: &'static str,
    instances: usize,
    violations: u64,
    counterexamples: Vec<Value>,
}

const MAX_LISTED: usize = 16;

pub fn run(a: &ValidateArgs, echo: &[String]) -> Result<u8> {
    let mut violations = 0u64;
    let mut examples = Vec::new();
    let kind = match a.kind {
        ValidateKind::Claw => {
            for i in 0..a.count {
                let seed = derive_seed(a.seed, i as u64);
                let (coeffs, t) = genbench::gen_knapsack_claw(a.n, true, seed)?;
                let rep = claw::validate_promise(&claw::knapsack_claw(&coeffs, t)?)?;
                violations += rep.condition1_violations + rep.condition2_violations;
                if !rep.is_clean() && examples.len() < MAX_LISTED {
                    examples.push(json!({ "seed": seed, "report": rep }));
                }
            }
            "claw-promise"
        }
        ValidateKind::Family => {
            for i in 0..a.count {
                let seed = derive_seed(a.seed, i as u64);
                let fam = genbench::gen_collision_family(1u64 << a.n.min(63), a.d, true, seed)?;
                let rep = claw::validate_family_promise(&fam)?;
                violations += rep.violations.len() as u64;
                if !rep.is_clean() && examples.len() < MAX_LISTED {
                    examples.push(json!({ "seed": seed, "report": rep }));
                }
            }
            "family-promise"
        }
        ValidateKind::CnfClaim => {
            let params = cnfsat::choose_alpha(a.c)?;
            for i in 0..a.count {
                let seed = derive_seed(a.seed, i as u64);
                let (f, star) = genbench::gen_cnf_planted(a.n, a.c, true, seed)?;
                let plan = params.plan(a.n, f.m())?;
                let x = Assignment::from_mask(a.n, star.expect("planted"))?;
                if let Err(e) = cnfsat::verify_claim(&f, &x, &plan) {
                    violations += 1;
                    if examples.len() < MAX_LISTED {
                        examples.push(json!({ "seed": seed, "error": e.to_string() }));
                    }
                }
            }
            "cnf-claim"
        }
    };
    eprintln!("{kind}: {} instances, {violations} violations", a.count);
    print_json(&ValidationReport {
        command: echo,
        kind,
        instances: a.count,
        violations,
        counterexamples: examples,
    })?;
    Ok(if violations == 0 { 0 } else { 1 })
}
