//! Hybrid classical/quantum search for 0-1 integer programs, Knapsack,
//! CNF satisfiability with linearly many clauses, and claw/collision problems.
//!
//! Each solver enumerates part of the variables classically into a searchable
//! structure and runs a simulated Grover search over the rest. Quantum costs
//! are reported as exact oracle-query counts; the classical work needed to
//! simulate the search is reported separately.

pub mod brute;
pub mod claw;
pub mod cnfsat;
pub mod error;
pub mod exec;
pub mod formats;
pub mod genbench;
pub mod instances;
pub mod mitm_ilp;
pub mod qsearch;
pub mod rangetree;
pub mod rng;

pub use error::{Error, Result};
