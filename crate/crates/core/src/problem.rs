//! The solver's input: variables with bounds, linear equality rows, and ReLU
//! pairs.

use crate::rat::{format_exact, Rat};
use std::fmt;

/// Dense variable index into a [`VerificationProblem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// What a variable stands for. Roles partition the index space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarRole {
    /// Network input `x<i>`.
    Input(usize),
    /// Pre-activation of a neuron (weighted sum before ReLU).
    PreAct { layer: usize, neuron: usize },
    /// Post-activation of a neuron (after ReLU).
    PostAct { layer: usize, neuron: usize },
    /// Slack `d = f - b` for a ReLU pair.
    Slack { layer: usize, neuron: usize },
    /// Network output `y<i>`.
    Output(usize),
    /// Auxiliary variable standing for a multi-term property atom.
    Aux(usize),
}

impl fmt::Display for VarRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarRole::Input(i) => write!(f, "x{i}"),
            VarRole::PreAct { layer, neuron } => write!(f, "b{layer}_{neuron}"),
            VarRole::PostAct { layer, neuron } => write!(f, "f{layer}_{neuron}"),
            VarRole::Slack { layer, neuron } => write!(f, "d{layer}_{neuron}"),
            VarRole::Output(i) => write!(f, "y{i}"),
            VarRole::Aux(i) => write!(f, "a{i}"),
        }
    }
}

/// One ReLU constraint `f = max(0, b)`, with slack `d = f - b` so the active
/// split is expressible purely through bounds (`d` pinned to 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReluPair {
    pub b: VarId,
    pub f: VarId,
    pub d: VarId,
}

/// A linear equality `defined = sum(coeff * var) + constant`.
///
/// Rows are emitted in dependency order: the terms of a row refer only to
/// variables that are never defined by any row (inputs, post-activations) or
/// that are defined by an earlier row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub defined: VarId,
    pub terms: Vec<(VarId, Rat)>,
    pub constant: Rat,
}

impl Row {
    /// Exact value of the right-hand side under `values`.
    pub fn rhs_value(&self, values: &[Rat]) -> Rat {
        let mut acc = self.constant.clone();
        for (v, c) in &self.terms {
            acc += c * &values[v.0];
        }
        acc
    }
}

/// Variables, bounds, equality rows and ReLU pairs; the unit the simplex and
/// the search operate on. `None` bounds mean unbounded on that side.
///
/// Crossed bounds (`lower > upper`) may be present in a freshly encoded
/// problem; they are detected by propagation or the solver and reported as
/// infeasibility rather than rejected here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationProblem {
    pub roles: Vec<VarRole>,
    pub lower: Vec<Option<Rat>>,
    pub upper: Vec<Option<Rat>>,
    pub rows: Vec<Row>,
    pub pairs: Vec<ReluPair>,
}

impl VerificationProblem {
    pub fn num_vars(&self) -> usize {
        self.roles.len()
    }

    pub fn var_name(&self, v: VarId) -> String {
        self.roles[v.0].to_string()
    }

    /// Input variable ids in `x0, x1, ...` order. Relies on the encoder
    /// laying inputs out first.
    pub fn input_vars(&self) -> Vec<VarId> {
        self.vars_with(|r| matches!(r, VarRole::Input(_)))
    }

    /// Output variable ids in `y0, y1, ...` order.
    pub fn output_vars(&self) -> Vec<VarId> {
        self.vars_with(|r| matches!(r, VarRole::Output(_)))
    }

    fn vars_with(&self, pred: impl Fn(&VarRole) -> bool) -> Vec<VarId> {
        self.roles
            .iter()
            .enumerate()
            .filter(|(_, r)| pred(r))
            .map(|(i, _)| VarId(i))
            .collect()
    }

    /// Plain-text dump of the encoded problem for cross-implementation
    /// diffing: a `var` line per variable with role and bounds, a `row` line
    /// per equality, and a `pair` line per ReLU, all in index order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("vars {}\n", self.num_vars()));
        for i in 0..self.num_vars() {
            out.push_str(&format!(
                "var {} {} [{}, {}]\n",
                i,
                self.roles[i],
                fmt_bound(&self.lower[i], "-inf"),
                fmt_bound(&self.upper[i], "inf"),
            ));
        }
        for row in &self.rows {
            out.push_str(&format!("row {} =", self.var_name(row.defined)));
            for (v, c) in &row.terms {
                out.push_str(&format!(" {}*{}", format_exact(c), self.var_name(*v)));
            }
            out.push_str(&format!(" + {}\n", format_exact(&row.constant)));
        }
        for p in &self.pairs {
            out.push_str(&format!(
                "pair b={} f={} d={}\n",
                self.var_name(p.b),
                self.var_name(p.f),
                self.var_name(p.d)
            ));
        }
        out
    }
}

fn fmt_bound(b: &Option<Rat>, inf: &str) -> String {
    match b {
        Some(v) => format_exact(v),
        None => inf.to_string(),
    }
}

/// `value` is within `[lower, upper]` where `None` is unbounded.
pub fn within_bounds(value: &Rat, lower: &Option<Rat>, upper: &Option<Rat>) -> bool {
    if let Some(lo) = lower {
        if value < lo {
            return false;
        }
    }
    if let Some(hi) = upper {
        if value > hi {
            return false;
        }
    }
    true
}

/// True when both bounds are finite and cross.
pub fn bounds_crossed(lower: &Option<Rat>, upper: &Option<Rat>) -> bool {
    matches!((lower, upper), (Some(lo), Some(hi)) if lo > hi)
}
