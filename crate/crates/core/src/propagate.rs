//! Forward interval propagation over the encoded rows, with the ReLU image
//! rule applied per pair.
//!
//! Propagation only tightens: row intervals flow from a row's term variables
//! into its defined variable, and each pair's post-activation is clipped to
//! the image of `max(0, ·)` over the pre-activation's interval. Passes repeat
//! until a fixpoint. The search reruns the same pass on its own bound copies
//! after each split, so tightening stays consistent between the pre-search
//! pass and in-search use.

use crate::problem::{ReluPair, Row, VarId, VerificationProblem};
use crate::rat::Rat;
use num_traits::Zero;
use std::fmt;

/// Some variable's lower bound exceeds its upper bound. A verdict (the
/// problem has no solutions), not a malfunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Infeasible {
    pub var: VarId,
}

impl fmt::Display for Infeasible {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bounds on {} cross", self.var)
    }
}

/// Tighten all bounds to a propagation fixpoint. Returns the tightened
/// problem, or [`Infeasible`] when some variable's interval becomes empty.
/// Never widens a bound; every valuation satisfying the rows, the original
/// bounds and `f = max(0, b)` per pair also satisfies the result.
pub fn propagate_bounds(p: &VerificationProblem) -> Result<VerificationProblem, Infeasible> {
    let mut tightened = p.clone();
    tighten_to_fixpoint(
        &tightened.rows,
        &tightened.pairs,
        &mut tightened.lower,
        &mut tightened.upper,
    )?;
    Ok(tightened)
}

/// One full propagation pass repeated until nothing changes, operating on
/// caller-owned bound vectors. Returns whether anything was tightened.
pub fn tighten_to_fixpoint(
    rows: &[Row],
    pairs: &[ReluPair],
    lower: &mut [Option<Rat>],
    upper: &mut [Option<Rat>],
) -> Result<bool, Infeasible> {
    let mut changed_ever = false;
    loop {
        let changed = pass(rows, pairs, lower, upper)?;
        changed_ever |= changed;
        if !changed {
            return Ok(changed_ever);
        }
    }
}

fn pass(
    rows: &[Row],
    pairs: &[ReluPair],
    lower: &mut [Option<Rat>],
    upper: &mut [Option<Rat>],
) -> Result<bool, Infeasible> {
    let mut changed = false;
    for row in rows {
        let (lo, hi) = row_interval(row, lower, upper);
        changed |= tighten(row.defined, lo, hi, lower, upper)?;
        // Once a pre-activation's interval moves, clip its post-activation
        // to the ReLU image before the slack row and later layers read it.
        if let Some(pair) = pairs.iter().find(|p| p.b == row.defined) {
            let f_lo = lower[pair.b.0]
                .clone()
                .map(|lb| lb.max(Rat::zero()))
                .or_else(|| Some(Rat::zero()));
            let f_hi = upper[pair.b.0].clone().map(|ub| ub.max(Rat::zero()));
            changed |= tighten(pair.f, f_lo, f_hi, lower, upper)?;
        }
    }
    Ok(changed)
}

/// Interval of `sum(coeff * var) + constant` under the current bounds;
/// `None` ends mean unbounded.
fn row_interval(
    row: &Row,
    lower: &[Option<Rat>],
    upper: &[Option<Rat>],
) -> (Option<Rat>, Option<Rat>) {
    let mut lo = Some(row.constant.clone());
    let mut hi = Some(row.constant.clone());
    for (v, c) in &row.terms {
        let (term_lo, term_hi) = if c >= &Rat::zero() {
            (&lower[v.0], &upper[v.0])
        } else {
            (&upper[v.0], &lower[v.0])
        };
        lo = match (lo, term_lo) {
            (Some(acc), Some(b)) => Some(acc + c * b),
            _ => None,
        };
        hi = match (hi, term_hi) {
            (Some(acc), Some(b)) => Some(acc + c * b),
            _ => None,
        };
    }
    (lo, hi)
}

fn tighten(
    var: VarId,
    lo: Option<Rat>,
    hi: Option<Rat>,
    lower: &mut [Option<Rat>],
    upper: &mut [Option<Rat>],
) -> Result<bool, Infeasible> {
    let mut changed = false;
    if let Some(lo) = lo {
        if lower[var.0].as_ref().is_none_or(|cur| lo > *cur) {
            lower[var.0] = Some(lo);
            changed = true;
        }
    }
    if let Some(hi) = hi {
        if upper[var.0].as_ref().is_none_or(|cur| hi < *cur) {
            upper[var.0] = Some(hi);
            changed = true;
        }
    }
    if let (Some(lo), Some(hi)) = (&lower[var.0], &upper[var.0]) {
        if lo > hi {
            return Err(Infeasible { var });
        }
    }
    Ok(changed)
}
