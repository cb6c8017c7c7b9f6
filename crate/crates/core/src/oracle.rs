//! Eager ground truth: enumerate every ReLU phase pattern and decide each as
//! a pure LP.
//!
//! This is the procedure the lazy search is designed to avoid — 2^R
//! feasibility checks for R pairs — kept deliberately free of propagation,
//! fixing, or pruning so it can serve as an independent reference. Every
//! pattern is executed even after a satisfying one is found; the first
//! feasible pattern in lexicographic order (pair 0 most significant,
//! Inactive before Active) supplies the verdict.

use crate::problem::VerificationProblem;
use crate::search::{check_relus, phase_assertions, Phase, Verdict};
use crate::simplex::{FeasResult, Tableau};
use serde::Serialize;
use std::time::{Duration, Instant};
use thiserror::Error;

/// One phase per pair; no pair is left undecided.
pub type PhasePattern = Vec<Phase>;

pub const DEFAULT_MAX_ORACLE_PAIRS: usize = 10;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("problem has {got} ReLU pairs, above the eager-enumeration cap of {cap}")]
    TooManyPairs { got: usize, cap: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct OracleStats {
    /// Always exactly 2^R — eagerness is the point.
    pub patterns_executed: u64,
    /// One feasibility check per pattern.
    pub lp_checks: u64,
    /// Pivots summed over all patterns.
    pub pivots: u64,
    pub wall_time: Duration,
}

/// The phase pattern at `index` in lexicographic order over `num_pairs`
/// pairs, with pair 0 as the most significant position and Inactive ordered
/// before Active.
pub fn pattern_at(index: u64, num_pairs: usize) -> PhasePattern {
    (0..num_pairs)
        .map(|i| {
            if index >> (num_pairs - 1 - i) & 1 == 1 {
                Phase::Active
            } else {
                Phase::Inactive
            }
        })
        .collect()
}

/// Decide `p` by brute force. Requires the pair count to be within
/// `max_pairs` (see [`DEFAULT_MAX_ORACLE_PAIRS`]).
pub fn oracle_solve(
    p: &VerificationProblem,
    max_pairs: usize,
) -> Result<(Verdict, OracleStats), OracleError> {
    let num_pairs = p.pairs.len();
    if num_pairs > max_pairs {
        return Err(OracleError::TooManyPairs {
            got: num_pairs,
            cap: max_pairs,
        });
    }
    let start = Instant::now();
    let mut stats = OracleStats::default();
    let mut first_feasible: Option<Vec<crate::rat::Rat>> = None;
    for index in 0..(1u64 << num_pairs) {
        let pattern = pattern_at(index, num_pairs);
        let mut tableau = Tableau::new(p);
        for (pair, phase) in p.pairs.iter().zip(&pattern) {
            for (v, kind, value) in phase_assertions(pair, *phase) {
                // A conflicting assertion just empties some interval; the
                // feasibility check below reports it. The pattern still
                // counts as executed.
                let _ = tableau.assert_bound(v, kind, value);
            }
        }
        stats.lp_checks += 1;
        let result = tableau.check_feasible();
        stats.patterns_executed += 1;
        stats.pivots += tableau.pivot_count();
        if let FeasResult::Feasible(assignment) = result {
            log::debug!("oracle: pattern {index:0width$b} feasible", width = num_pairs);
            debug_assert!(check_relus(&assignment, &p.pairs).is_empty());
            first_feasible.get_or_insert(assignment);
        }
    }
    stats.wall_time = start.elapsed();
    let verdict = match first_feasible {
        Some(assignment) => {
            let counterexample = p
                .input_vars()
                .into_iter()
                .map(|v| assignment[v.0].clone())
                .collect();
            Verdict::Sat {
                assignment,
                counterexample,
            }
        }
        None => Verdict::Unsat,
    };
    Ok((verdict, stats))
}
