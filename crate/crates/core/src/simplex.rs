//! Bound-satisfaction simplex over exact rationals.
//!
//! There is no objective function: the engine only decides whether the
//! equality rows admit an assignment inside the current bounds, in the style
//! of the general simplex used by SMT solvers. Variables are split into a
//! basic set (each defined by a row over the nonbasic variables) and a
//! nonbasic set; nonbasic variables always sit inside their bounds, and a
//! violated basic variable is repaired by pivoting against a nonbasic one
//! with slack. Both the violated and the entering variable are chosen by
//! minimal index, which rules out cycling and so guarantees termination.
//!
//! All arithmetic is exact; a `Feasible` answer carries an assignment that
//! satisfies every row and bound with rational equality, and `Infeasible`
//! names a variable whose bound violation cannot be repaired.

use crate::problem::{bounds_crossed, VarId, VerificationProblem};
use crate::rat::{DisplayRat, Rat};
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Lower,
    Upper,
}

/// Tightening a bound made some variable's interval empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImmediateConflict {
    pub var: VarId,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum UpdateError {
    #[error("{var} is basic; only nonbasic variables can be set directly")]
    NotNonbasic { var: VarId },
    #[error("value for {var} lies outside its bounds")]
    OutOfBounds { var: VarId },
}

/// Outcome of a feasibility check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeasResult {
    /// Every row and bound is satisfied by this assignment.
    Feasible(Vec<Rat>),
    /// The named variable's bound violation cannot be repaired.
    Infeasible(VarId),
}

/// Bounds state captured for backtracking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundsSnapshot {
    pub lower: Vec<Option<Rat>>,
    pub upper: Vec<Option<Rat>>,
}

/// A row of the tableau: `var = sum(coeffs[j] * x_j) + constant`, where every
/// nonzero coefficient belongs to a nonbasic variable.
#[derive(Debug, Clone)]
struct TableauRow {
    var: VarId,
    coeffs: Vec<Rat>,
    constant: Rat,
}

#[derive(Debug, Clone)]
pub struct Tableau {
    lower: Vec<Option<Rat>>,
    upper: Vec<Option<Rat>>,
    assignment: Vec<Rat>,
    rows: Vec<TableauRow>,
    /// Index into `rows` for basic variables, `None` for nonbasic ones.
    row_of: Vec<Option<usize>>,
    pivots: u64,
}

impl Tableau {
    /// Build the initial tableau: every row's defined variable starts basic,
    /// everything else (inputs and post-activations) nonbasic. Nonbasic
    /// variables start at their lower bound when finite, else their upper
    /// bound when finite, else 0; basic values follow from the rows.
    pub fn new(p: &VerificationProblem) -> Tableau {
        let n = p.num_vars();
        let mut t = Tableau {
            lower: p.lower.clone(),
            upper: p.upper.clone(),
            assignment: vec![Rat::zero(); n],
            rows: Vec::with_capacity(p.rows.len()),
            row_of: vec![None; n],
            pivots: 0,
        };
        // Problem rows may reference earlier defined (basic) variables;
        // substitute so tableau rows mention only nonbasic ones.
        for row in &p.rows {
            let mut coeffs = vec![Rat::zero(); n];
            let mut constant = row.constant.clone();
            for (v, c) in &row.terms {
                match t.row_of[v.0] {
                    Some(r) => {
                        let basic_row = &t.rows[r];
                        constant += c * &basic_row.constant;
                        for (j, cj) in basic_row.coeffs.iter().enumerate() {
                            if !cj.is_zero() {
                                coeffs[j] += c * cj;
                            }
                        }
                    }
                    None => coeffs[v.0] += c,
                }
            }
            t.row_of[row.defined.0] = Some(t.rows.len());
            t.rows.push(TableauRow {
                var: row.defined,
                coeffs,
                constant,
            });
        }
        for v in 0..n {
            if t.row_of[v].is_none() {
                t.assignment[v] = match (&t.lower[v], &t.upper[v]) {
                    (Some(lo), _) => lo.clone(),
                    (None, Some(hi)) => hi.clone(),
                    (None, None) => Rat::zero(),
                };
            }
        }
        t.recompute_basics();
        t
    }

    pub fn num_vars(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_basic(&self, v: VarId) -> bool {
        self.row_of[v.0].is_some()
    }

    pub fn value(&self, v: VarId) -> &Rat {
        &self.assignment[v.0]
    }

    pub fn assignment(&self) -> &[Rat] {
        &self.assignment
    }

    pub fn lower(&self, v: VarId) -> Option<&Rat> {
        self.lower[v.0].as_ref()
    }

    pub fn upper(&self, v: VarId) -> Option<&Rat> {
        self.upper[v.0].as_ref()
    }

    pub fn bounds(&self) -> (&[Option<Rat>], &[Option<Rat>]) {
        (&self.lower, &self.upper)
    }

    /// Cumulative pivot count since construction.
    pub fn pivot_count(&self) -> u64 {
        self.pivots
    }

    /// Tighten a bound. Looser values are ignored. A nonbasic variable
    /// pushed outside its interval is snapped to the violated bound (basic
    /// dependents follow); a basic one is left for [`Self::check_feasible`]
    /// to repair. Reports a conflict when the interval becomes empty — the
    /// tightening still sticks, on the assumption that the caller backtracks.
    pub fn assert_bound(
        &mut self,
        v: VarId,
        kind: BoundKind,
        value: Rat,
    ) -> Result<(), ImmediateConflict> {
        let slot = match kind {
            BoundKind::Lower => &mut self.lower[v.0],
            BoundKind::Upper => &mut self.upper[v.0],
        };
        let stricter = match (&kind, &*slot) {
            (BoundKind::Lower, Some(cur)) => value > *cur,
            (BoundKind::Upper, Some(cur)) => value < *cur,
            (_, None) => true,
        };
        if !stricter {
            return Ok(());
        }
        log::trace!("bound: {} {:?} := {}", v, kind, DisplayRat(&value));
        *slot = Some(value);
        let crossed = bounds_crossed(&self.lower[v.0], &self.upper[v.0]);
        if !self.is_basic(v) {
            let val = &self.assignment[v.0];
            let snapped = if matches!(&self.lower[v.0], Some(lo) if val < lo) {
                Some(self.lower[v.0].clone().unwrap())
            } else if matches!(&self.upper[v.0], Some(hi) if val > hi) {
                Some(self.upper[v.0].clone().unwrap())
            } else {
                None
            };
            if let Some(value) = snapped {
                self.assignment[v.0] = value;
                self.recompute_basics();
            }
        }
        if crossed {
            return Err(ImmediateConflict { var: v });
        }
        Ok(())
    }

    /// Set a nonbasic variable to an in-bounds value and propagate through
    /// the rows.
    pub fn update_nonbasic(&mut self, v: VarId, value: Rat) -> Result<(), UpdateError> {
        if self.is_basic(v) {
            return Err(UpdateError::NotNonbasic { var: v });
        }
        if !crate::problem::within_bounds(&value, &self.lower[v.0], &self.upper[v.0]) {
            return Err(UpdateError::OutOfBounds { var: v });
        }
        if self.assignment[v.0] != value {
            log::trace!("update: {} := {}", v, DisplayRat(&value));
            self.assignment[v.0] = value;
            self.recompute_basics();
        }
        Ok(())
    }

    pub fn snapshot(&self) -> BoundsSnapshot {
        BoundsSnapshot {
            lower: self.lower.clone(),
            upper: self.upper.clone(),
        }
    }

    /// Reinstate the bounds of `snap`. The basic/nonbasic partition is kept
    /// as-is (any partition is valid tableau state); nonbasic variables that
    /// the restored bounds exclude are snapped back inside.
    pub fn restore(&mut self, snap: &BoundsSnapshot) {
        self.lower.clone_from(&snap.lower);
        self.upper.clone_from(&snap.upper);
        let mut moved = false;
        for v in 0..self.num_vars() {
            if self.row_of[v].is_some() {
                continue;
            }
            let val = &self.assignment[v];
            if let Some(lo) = &self.lower[v] {
                if val < lo {
                    self.assignment[v] = lo.clone();
                    moved = true;
                    continue;
                }
            }
            if let Some(hi) = &self.upper[v] {
                if val > hi {
                    self.assignment[v] = hi.clone();
                    moved = true;
                }
            }
        }
        if moved {
            self.recompute_basics();
        }
    }

    /// Decide feasibility of the rows under the current bounds.
    ///
    /// Repeatedly picks the lowest-indexed basic variable that violates a
    /// bound and the lowest-indexed nonbasic variable with slack in the
    /// repairing direction, pivots them, and snaps the leaving variable to
    /// the violated bound. No such nonbasic variable means the violation is
    /// unrepairable and the problem is infeasible.
    pub fn check_feasible(&mut self) -> FeasResult {
        for v in 0..self.num_vars() {
            if bounds_crossed(&self.lower[v], &self.upper[v]) {
                return FeasResult::Infeasible(VarId(v));
            }
        }
        loop {
            let Some((leave, target, need_increase)) = self.first_violation() else {
                return FeasResult::Feasible(self.assignment.clone());
            };
            let Some(enter) = self.first_entering(leave, need_increase) else {
                return FeasResult::Infeasible(leave);
            };
            self.pivot(leave, enter);
            self.assignment[leave.0] = target;
            self.recompute_basics();
        }
    }

    /// Lowest-indexed basic variable outside its bounds, with the bound to
    /// snap it to and the direction of the needed move.
    fn first_violation(&self) -> Option<(VarId, Rat, bool)> {
        for v in 0..self.num_vars() {
            if self.row_of[v].is_none() {
                continue;
            }
            let val = &self.assignment[v];
            if let Some(lo) = &self.lower[v] {
                if val < lo {
                    return Some((VarId(v), lo.clone(), true));
                }
            }
            if let Some(hi) = &self.upper[v] {
                if val > hi {
                    return Some((VarId(v), hi.clone(), false));
                }
            }
        }
        None
    }

    /// Lowest-indexed nonbasic variable of `leave`'s row that can move in
    /// the direction that shifts `leave` toward its violated bound.
    fn first_entering(&self, leave: VarId, need_increase: bool) -> Option<VarId> {
        let row = &self.rows[self.row_of[leave.0].unwrap()];
        for (j, c) in row.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let coeff_positive = c > &Rat::zero();
            // Raising x_j raises leave iff the coefficient is positive.
            let must_increase = coeff_positive == need_increase;
            let has_slack = if must_increase {
                match &self.upper[j] {
                    Some(hi) => &self.assignment[j] < hi,
                    None => true,
                }
            } else {
                match &self.lower[j] {
                    Some(lo) => &self.assignment[j] > lo,
                    None => true,
                }
            };
            if has_slack {
                return Some(VarId(j));
            }
        }
        None
    }

    /// Swap `leave` (basic) with `enter` (nonbasic): solve `leave`'s row for
    /// `enter` and substitute into every other row.
    fn pivot(&mut self, leave: VarId, enter: VarId) {
        let r = self.row_of[leave.0].unwrap();
        let a_e = self.rows[r].coeffs[enter.0].clone();
        debug_assert!(!a_e.is_zero());
        let old = &self.rows[r];
        let mut coeffs: Vec<Rat> = old.coeffs.iter().map(|c| -(c / &a_e)).collect();
        coeffs[enter.0] = Rat::zero();
        coeffs[leave.0] = a_e.recip();
        let constant = -(&old.constant / &a_e);
        self.rows[r] = TableauRow {
            var: enter,
            coeffs,
            constant,
        };
        self.row_of[enter.0] = Some(r);
        self.row_of[leave.0] = None;
        let (pivot_row, rest) = extract(&mut self.rows, r);
        for row in rest {
            let factor = std::mem::replace(&mut row.coeffs[enter.0], Rat::zero());
            if factor.is_zero() {
                continue;
            }
            for (j, c) in pivot_row.coeffs.iter().enumerate() {
                if !c.is_zero() {
                    row.coeffs[j] += &factor * c;
                }
            }
            row.constant += &factor * &pivot_row.constant;
        }
        self.pivots += 1;
        log::trace!("pivot #{}: {} leaves, {} enters", self.pivots, leave, enter);
    }

    /// Recompute every basic value from its row; nonbasic values are the
    /// independent quantities.
    fn recompute_basics(&mut self) {
        for r in 0..self.rows.len() {
            let mut val = self.rows[r].constant.clone();
            for (j, c) in self.rows[r].coeffs.iter().enumerate() {
                if !c.is_zero() {
                    val += c * &self.assignment[j];
                }
            }
            self.assignment[self.rows[r].var.0] = val;
        }
    }

    /// All rows hold exactly under the current assignment. Debug aid.
    pub fn rows_hold(&self) -> bool {
        self.rows.iter().all(|row| {
            let mut val = row.constant.clone();
            for (j, c) in row.coeffs.iter().enumerate() {
                if !c.is_zero() {
                    val += c * &self.assignment[j];
                }
            }
            val == self.assignment[row.var.0]
        })
    }
}

/// Mutable access to every row except `r`, alongside shared access to `r`.
fn extract<'a>(
    rows: &'a mut [TableauRow],
    r: usize,
) -> (&'a TableauRow, impl Iterator<Item = &'a mut TableauRow> + 'a) {
    let (before, rest) = rows.split_at_mut(r);
    let (row, after) = rest.split_first_mut().unwrap();
    (&*row, before.iter_mut().chain(after))
}
