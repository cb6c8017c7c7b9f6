//! Feasibility of linear inequality systems by Fourier–Motzkin elimination.
//!
//! The point is an implementation so direct it can arbitrate disputes with
//! the simplex, so the only concessions to efficiency are the classic ones
//! that do not change the mathematics: eliminate the cheapest variable
//! first, keep constraints in a canonical scale so duplicates collapse,
//! drop tautologies, and stop early on a contradiction. On feasible systems
//! a rational witness is recovered by back-substitution and re-checked
//! against every constraint before being returned.

use num_traits::{Signed, Zero};
use relusat_core::problem::VerificationProblem;
use relusat_core::rat::{rat_int, Rat};
use std::collections::HashSet;

/// One non-strict inequality `sum(coeffs[i] * x_i) <= constant`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub coeffs: Vec<Rat>,
    pub constant: Rat,
}

/// A conjunction of non-strict linear inequalities over `num_vars`
/// variables. Equalities are stored as opposing inequality pairs.
#[derive(Debug, Clone, Default)]
pub struct LinearSystem {
    pub num_vars: usize,
    pub constraints: Vec<Constraint>,
}

impl LinearSystem {
    pub fn new(num_vars: usize) -> Self {
        LinearSystem {
            num_vars,
            constraints: Vec::new(),
        }
    }

    fn densify(&self, terms: &[(usize, Rat)]) -> Vec<Rat> {
        let mut coeffs = vec![Rat::zero(); self.num_vars];
        for (v, c) in terms {
            coeffs[*v] += c;
        }
        coeffs
    }

    /// Adds `sum(terms) <= constant`.
    pub fn le(&mut self, terms: &[(usize, Rat)], constant: Rat) {
        let coeffs = self.densify(terms);
        self.constraints.push(Constraint { coeffs, constant });
    }

    /// Adds `sum(terms) >= constant`.
    pub fn ge(&mut self, terms: &[(usize, Rat)], constant: Rat) {
        let coeffs = self.densify(terms).into_iter().map(|c| -c).collect();
        self.constraints.push(Constraint {
            coeffs,
            constant: -constant,
        });
    }

    /// Adds `sum(terms) == constant`.
    pub fn eq(&mut self, terms: &[(usize, Rat)], constant: Rat) {
        self.le(terms, constant.clone());
        self.ge(terms, constant);
    }

    /// Exact truth of every constraint at `point`.
    pub fn holds(&self, point: &[Rat]) -> bool {
        self.constraints.iter().all(|c| {
            let mut lhs = Rat::zero();
            for (coeff, value) in c.coeffs.iter().zip(point) {
                if !coeff.is_zero() {
                    lhs += coeff * value;
                }
            }
            lhs <= c.constant
        })
    }
}

/// A variable-free constraint `0 <= c` failed.
struct Contradiction;

/// Scales so the first nonzero coefficient is ±1; classifies variable-free
/// constraints instead of keeping them.
fn normalize(mut c: Constraint) -> Result<Option<Constraint>, Contradiction> {
    match c.coeffs.iter().find(|a| !a.is_zero()) {
        None => {
            if c.constant >= Rat::zero() {
                Ok(None)
            } else {
                Err(Contradiction)
            }
        }
        Some(first) => {
            let scale = first.abs();
            if scale != rat_int(1) {
                for a in &mut c.coeffs {
                    if !a.is_zero() {
                        *a /= &scale;
                    }
                }
                c.constant /= &scale;
            }
            Ok(Some(c))
        }
    }
}

/// Decides feasibility by eliminating one variable at a time; returns a
/// witness point when the system is feasible, `None` when it is not.
pub fn fm_feasible(system: &LinearSystem) -> Option<Vec<Rat>> {
    let mut seen: HashSet<Constraint> = HashSet::new();
    let mut current: Vec<Constraint> = Vec::new();
    for c in &system.constraints {
        match normalize(c.clone()) {
            Ok(Some(n)) => {
                if seen.insert(n.clone()) {
                    current.push(n);
                }
            }
            Ok(None) => {}
            Err(Contradiction) => return None,
        }
    }

    // Eliminate the variable with the fewest (upper, lower) product pairs
    // first; ties go to the smallest index so runs are reproducible.
    let mut remaining: Vec<usize> = (0..system.num_vars).collect();
    let mut order: Vec<usize> = Vec::with_capacity(system.num_vars);
    let mut stages: Vec<Vec<Constraint>> = Vec::with_capacity(system.num_vars);
    while !remaining.is_empty() {
        let (pos, _) = remaining
            .iter()
            .enumerate()
            .map(|(pos, &v)| {
                let uppers = current.iter().filter(|c| c.coeffs[v] > Rat::zero()).count();
                let lowers = current.iter().filter(|c| c.coeffs[v] < Rat::zero()).count();
                (pos, uppers * lowers)
            })
            .min_by_key(|&(_, score)| score)
            .expect("remaining is nonempty");
        let v = remaining.remove(pos);
        order.push(v);
        stages.push(current.clone());
        current = match eliminate(&current, v) {
            Ok(next) => next,
            Err(Contradiction) => return None,
        };
    }
    assert!(
        current.is_empty(),
        "all variables eliminated but constraints remain"
    );

    // Back-substitute in reverse elimination order. At each stage every
    // other mentioned variable was eliminated later, hence already fixed,
    // so each constraint mentioning v contributes one side of an interval
    // that elimination proved nonempty.
    let mut point = vec![Rat::zero(); system.num_vars];
    for (v, stage) in order.iter().zip(&stages).rev() {
        let v = *v;
        let mut lower: Option<Rat> = None;
        let mut upper: Option<Rat> = None;
        for c in stage {
            let a = &c.coeffs[v];
            if a.is_zero() {
                continue;
            }
            let mut rest = c.constant.clone();
            for (u, coeff) in c.coeffs.iter().enumerate() {
                if u != v && !coeff.is_zero() {
                    rest -= coeff * &point[u];
                }
            }
            let bound = rest / a;
            if a > &Rat::zero() {
                upper = Some(match upper {
                    Some(u) => u.min(bound),
                    None => bound,
                });
            } else {
                lower = Some(match lower {
                    Some(l) => l.max(bound),
                    None => bound,
                });
            }
        }
        point[v] = match (lower, upper) {
            (Some(l), Some(u)) => {
                assert!(l <= u, "elimination left an empty interval for x{v}");
                (l + u) / rat_int(2)
            }
            (Some(l), None) => l,
            (None, Some(u)) => u,
            (None, None) => Rat::zero(),
        };
    }
    assert!(
        system.holds(&point),
        "back-substituted witness violates the system"
    );
    Some(point)
}

/// Eliminates variable `v`: constraints not mentioning it pass through, and
/// every (upper bound, lower bound) pair combines into one v-free
/// constraint. Duplicates collapse; a variable-free falsehood aborts.
fn eliminate(constraints: &[Constraint], v: usize) -> Result<Vec<Constraint>, Contradiction> {
    let mut out = Vec::new();
    let mut seen: HashSet<Constraint> = HashSet::new();
    let mut keep = |c: Constraint, out: &mut Vec<Constraint>| -> Result<(), Contradiction> {
        if let Some(n) = normalize(c)? {
            if seen.insert(n.clone()) {
                out.push(n);
            }
        }
        Ok(())
    };
    let mut uppers = Vec::new();
    let mut lowers = Vec::new();
    for c in constraints {
        let a = &c.coeffs[v];
        if a.is_zero() {
            keep(c.clone(), &mut out)?;
        } else if a > &Rat::zero() {
            uppers.push(c);
        } else {
            lowers.push(c);
        }
    }
    for up in &uppers {
        for down in &lowers {
            let a = &up.coeffs[v]; // positive
            let b = &down.coeffs[v]; // negative
            // (-b)*up + a*down is a nonnegative combination cancelling v.
            let coeffs = up
                .coeffs
                .iter()
                .zip(&down.coeffs)
                .map(|(cu, cd)| -(b * cu) + a * cd)
                .collect();
            let constant = -(b * &up.constant) + a * &down.constant;
            keep(Constraint { coeffs, constant }, &mut out)?;
        }
    }
    assert!(
        out.len() <= 200_000,
        "elimination exploded past 200k constraints; shrink the instance"
    );
    Ok(out)
}

/// The pure linear part of a verification problem — bounds and equality rows
/// — as an inequality system. ReLU pairs are ignored, so on problems that
/// have them this is the relaxation, not the problem.
pub fn lp_relaxation(problem: &VerificationProblem) -> LinearSystem {
    let n = problem.num_vars();
    let mut sys = LinearSystem::new(n);
    for v in 0..n {
        if let Some(lo) = &problem.lower[v] {
            sys.ge(&[(v, rat_int(1))], lo.clone());
        }
        if let Some(hi) = &problem.upper[v] {
            sys.le(&[(v, rat_int(1))], hi.clone());
        }
    }
    for row in &problem.rows {
        // defined = sum(terms) + constant, rewritten defined - sum = constant.
        let mut terms = vec![(row.defined.0, rat_int(1))];
        for (var, coeff) in &row.terms {
            terms.push((var.0, -coeff.clone()));
        }
        sys.eq(&terms, row.constant.clone());
    }
    sys
}
