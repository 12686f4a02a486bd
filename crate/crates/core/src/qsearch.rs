//! Grover search and amplitude amplification simulated in the two-dimensional
//! invariant subspace.
//!
//! With `M` marked elements out of `N` and `theta = asin(sqrt(M/N))`, `t`
//! Grover iterations succeed with probability `sin^2((2t+1) theta)`. The
//! simulator samples that outcome from a seeded splitmix64 stream and counts
//! oracle queries: one per iteration plus one to verify the measured
//! candidate. Discovering the marked set is classical simulation overhead and
//! is reported separately.

use std::f64::consts::FRAC_PI_4;
use std::sync::Mutex;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::rng::SplitMix64;

/// Growth factor of the unknown-`M` iteration bound.
pub const BBHT_LAMBDA: f64 = 6.0 / 5.0;
/// The unknown-`M` search gives up once queries would exceed this many `sqrt(N)`.
pub const BBHT_CUTOFF_FACTOR: f64 = 9.0;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MarkedSetSummary {
    domain: u64,
    marked: Vec<u64>,
    classical_setup_evals: u64,
}

impl MarkedSetSummary {
    pub fn new(domain: u64, mut marked: Vec<u64>, classical_setup_evals: u64) -> Result<Self> {
        if domain == 0 {
            return Err(Error::InvalidParameter("search domain must be non-empty".into()));
        }
        marked.sort_unstable();
        marked.dedup();
        if marked.last().is_some_and(|&m| m >= domain) {
            return Err(Error::InvalidParameter(format!(
                "marked index outside domain [0, {domain})"
            )));
        }
        Ok(Self {
            domain,
            marked,
            classical_setup_evals,
        })
    }

    pub fn domain(&self) -> u64 {
        self.domain
    }

    pub fn marked(&self) -> &[u64] {
        &self.marked
    }

    pub fn marked_count(&self) -> u64 {
        self.marked.len() as u64
    }

    pub fn classical_setup_evals(&self) -> u64 {
        self.classical_setup_evals
    }

    pub fn is_marked(&self, x: u64) -> bool {
        self.marked.binary_search(&x).is_ok()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RoundTrace {
    pub iterations: u64,
    pub success: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchOutcome {
    pub found: Option<u64>,
    pub quantum_queries: u64,
    pub classical_setup_evals: u64,
    pub seed: u64,
    pub rounds: Vec<RoundTrace>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AmplificationOutcome<W> {
    pub success: bool,
    pub outer_rounds: u64,
    pub total_queries: u64,
    pub success_probability: f64,
    pub witness: Option<W>,
}

/// Evaluates the predicate on every point of `[0, n)`.
pub fn enumerate_marked<F>(n: u64, predicate: F) -> Result<MarkedSetSummary>
where
    F: Fn(u64) -> bool + Sync + Send,
{
    if n == 0 {
        return Err(Error::InvalidParameter("search domain must be non-empty".into()));
    }
    let marked = exec::filter_range(n, predicate);
    MarkedSetSummary::new(n, marked, n)
}

/// Fallible variant of [`enumerate_marked`]; the first predicate error is returned.
pub fn try_enumerate_marked<F>(n: u64, predicate: F) -> Result<MarkedSetSummary>
where
    F: Fn(u64) -> Result<bool> + Sync + Send,
{
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let summary = enumerate_marked(n, |x| match predicate(x) {
        Ok(b) => b,
        Err(e) => {
            failure.lock().unwrap().get_or_insert(e);
            false
        }
    })?;
    match failure.into_inner().unwrap() {
        Some(e) => Err(e),
        None => Ok(summary),
    }
}

/// `sin^2((2t+1) asin(sqrt(M/N)))`.
pub fn grover_success_prob(n: u64, m: u64, t: u64) -> Result<f64> {
    if n == 0 || m > n {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= M <= N and N >= 1, got N={n}, M={m}"
        )));
    }
    if m == 0 {
        return Ok(0.0);
    }
    if t == 0 {
        return Ok(m as f64 / n as f64);
    }
    Ok(rotation_prob((m as f64 / n as f64).sqrt().asin(), t))
}

fn rotation_prob(theta: f64, t: u64) -> f64 {
    let s = ((2 * t + 1) as f64 * theta).sin();
    (s * s).clamp(0.0, 1.0)
}

/// Iteration count `floor((pi/4) sqrt(N/M))` for a known marked count.
pub fn optimal_iterations(n: u64, m: u64) -> u64 {
    (FRAC_PI_4 * (n as f64 / m as f64).sqrt()).floor() as u64
}

/// Grover search with the marked count known in advance.
pub fn grover_known_m(summary: &MarkedSetSummary, seed: u64) -> Result<SearchOutcome> {
    let m = summary.marked_count();
    if m == 0 {
        return Err(Error::InvalidParameter(
            "known-M Grover search needs at least one marked element".into(),
        ));
    }
    let mut rng = SplitMix64::new(seed);
    let t = optimal_iterations(summary.domain, m);
    let p = grover_success_prob(summary.domain, m, t)?;
    let success = rng.bernoulli(p);
    let found = success.then(|| summary.marked[rng.below(m) as usize]);
    Ok(SearchOutcome {
        found,
        quantum_queries: t + 1,
        classical_setup_evals: summary.classical_setup_evals,
        seed,
        rounds: vec![RoundTrace {
            iterations: t,
            success,
        }],
    })
}

/// Grover search for an unknown marked count with an exponentially growing
/// iteration bound; returns `found = None` once the query cutoff is reached.
pub fn bbht_search(summary: &MarkedSetSummary, seed: u64) -> SearchOutcome {
    let n = summary.domain;
    let m = summary.marked_count();
    let sqrt_n = (n as f64).sqrt();
    let budget = (BBHT_CUTOFF_FACTOR * sqrt_n).floor() as u64;
    let theta = (m as f64 / n as f64).sqrt().asin();
    let mut rng = SplitMix64::new(seed);
    let mut bound = 1.0f64;
    let mut queries = 0u64;
    let mut rounds = Vec::new();
    let mut found = None;
    loop {
        let t = rng.below(bound.ceil() as u64);
        if queries + t + 1 > budget {
            break;
        }
        queries += t + 1;
        let p = if t == 0 {
            m as f64 / n as f64
        } else {
            rotation_prob(theta, t)
        };
        let success = m > 0 && rng.bernoulli(p);
        rounds.push(RoundTrace {
            iterations: t,
            success,
        });
        if success {
            found = Some(summary.marked[rng.below(m) as usize]);
            break;
        }
        bound = (BBHT_LAMBDA * bound).min(sqrt_n);
    }
    SearchOutcome {
        found,
        quantum_queries: queries,
        classical_setup_evals: summary.classical_setup_evals,
        seed,
        rounds,
    }
}

/// Number of outer rounds `ceil((pi/4) / sqrt(p))` for inner success probability `p > 0`.
pub fn amplification_rounds(p: f64) -> u64 {
    (FRAC_PI_4 / p.sqrt()).ceil() as u64
}

/// Distribution-level amplitude amplification of an inner procedure with exact
/// success probability `p` and a fixed query cost per invocation.
///
/// With `p = 0` the run fails after `ceil(9 / sqrt(p_min))` rounds, `p_min`
/// being the smallest success probability the caller wants to detect.
pub fn amplitude_amplify<W, S>(
    p: f64,
    inner_query_cost: u64,
    p_min: f64,
    witness_sampler: S,
    seed: u64,
) -> Result<AmplificationOutcome<W>>
where
    S: FnOnce(&mut SplitMix64) -> W,
{
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "success probability {p} outside [0, 1]"
        )));
    }
    if !(p_min > 0.0 && p_min <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "minimum detectable probability {p_min} outside (0, 1]"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    if p == 0.0 {
        let rounds = (BBHT_CUTOFF_FACTOR / p_min.sqrt()).ceil() as u64;
        return Ok(AmplificationOutcome {
            success: false,
            outer_rounds: rounds,
            total_queries: rounds * inner_query_cost,
            success_probability: 0.0,
            witness: None,
        });
    }
    let rounds = amplification_rounds(p);
    let amplified = rotation_prob(p.sqrt().asin(), rounds).clamp(p, 1.0);
    let success = rng.bernoulli(amplified);
    let witness = success.then(|| witness_sampler(&mut rng));
    Ok(AmplificationOutcome {
        success,
        outer_rounds: rounds,
        total_queries: rounds * inner_query_cost,
        success_probability: amplified,
        witness,
    })
}
