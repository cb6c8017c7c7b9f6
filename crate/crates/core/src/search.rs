//! The ReLU theory solver: a trail-based search that interleaves LP
//! feasibility with ReLU constraint checking.
//!
//! ReLU constraints are not encoded into the linear fragment up front.
//! Instead the solver checks the simplex assignment against `f = max(0, b)`
//! for every pair, repairs violations by nudging nonbasic variables, and only
//! when a pair keeps thrashing does it commit to one of the pair's two linear
//! cases — Active (`b >= 0`, `d = 0`) or Inactive (`b <= 0`, `f = 0`) — as
//! pure bound assertions. Decisions are tracked on a trail of frames;
//! conflicts flip the most recent untried case or backtrack chronologically.
//! Bound propagation runs before the search and again after every decision,
//! fixing phases whose pre-activation sign is already determined so they are
//! never split at all.

use crate::network::Network;
use crate::problem::{within_bounds, ReluPair, VarId, VerificationProblem};
use crate::propagate::{propagate_bounds, tighten_to_fixpoint, Infeasible};
use crate::property::Property;
use crate::rat::Rat;
use crate::simplex::{BoundKind, BoundsSnapshot, FeasResult, ImmediateConflict, Tableau};
use num_traits::Zero;
use serde::Serialize;
use std::fmt;
use std::time::{Duration, Instant};

pub const DEFAULT_SPLIT_THRESHOLD: u64 = 5;
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

/// One of the two linear cases of `f = max(0, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    /// `b >= 0` and `d = 0` (so `f = b`).
    Active,
    /// `b <= 0` and `f = 0`.
    Inactive,
}

impl Phase {
    pub fn other(self) -> Phase {
        match self {
            Phase::Active => Phase::Inactive,
            Phase::Inactive => Phase::Active,
        }
    }
}

/// How a pair's phase became fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseOrigin {
    /// Forced by bounds during propagation; never needs backtracking.
    Propagated,
    /// Chosen by a split (or a flip of one); owned by a trail frame.
    SplitDecision,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseState {
    Undecided,
    Fixed(Phase, PhaseOrigin),
}

impl PhaseState {
    pub fn phase(self) -> Option<Phase> {
        match self {
            PhaseState::Undecided => None,
            PhaseState::Fixed(p, _) => Some(p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ResourceLimit {
    Timeout,
    SplitLimit,
}

impl fmt::Display for ResourceLimit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ResourceLimit::Timeout => "timeout",
            ResourceLimit::SplitLimit => "split-limit",
        })
    }
}

/// Final answer for a verification query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// The constraints are satisfiable: `assignment` covers every encoded
    /// variable and `counterexample` is its input sub-vector.
    Sat {
        assignment: Vec<Rat>,
        counterexample: Vec<Rat>,
    },
    Unsat,
    ResourceOut(ResourceLimit),
}

impl Verdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, Verdict::Sat { .. })
    }
}

#[derive(Debug, Clone)]
pub struct SolveConfig {
    /// Violation-fix attempts a pair gets before it is split (at least 1).
    pub split_threshold: u64,
    pub timeout: Duration,
    pub max_splits: Option<u64>,
    /// Statistics are cheap to keep, so this is advisory; collection always
    /// happens and the flag is retained for configuration compatibility.
    pub stats: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            split_threshold: DEFAULT_SPLIT_THRESHOLD,
            timeout: DEFAULT_TIMEOUT,
            max_splits: None,
            stats: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SolveStats {
    /// Simplex feasibility checks — the number the eager oracle pays 2^R for.
    pub lp_checks: u64,
    pub pivots: u64,
    /// Successful violation repairs by assignment update.
    pub fixes: u64,
    pub splits: u64,
    pub max_trail_depth: usize,
    pub wall_time: Duration,
}

/// Result of a backtracking request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backtrack {
    /// Some frame had an untried phase; the search resumed there.
    Flipped,
    /// Every branch is exhausted: the problem is unsatisfiable.
    Exhausted,
}

/// One decision on the trail. The snapshot holds the bounds and phase labels
/// from just before the decision's bounds were asserted.
#[derive(Debug, Clone)]
struct Frame {
    pair: usize,
    #[allow(dead_code)] // recorded for debugging; only `remaining` drives flow
    tried: Phase,
    remaining: Option<Phase>,
    snapshot: BoundsSnapshot,
    phases: Vec<PhaseState>,
}

/// In-progress search over one verification problem.
///
/// [`solve`] drives this to completion; the stepping methods ([`Self::split`],
/// [`Self::backtrack`]) are public so tests can exercise trail discipline
/// directly.
pub struct SearchState {
    problem: VerificationProblem,
    tableau: Tableau,
    phases: Vec<PhaseState>,
    /// Per-pair violation counters; global across the whole search, never
    /// reset on backtracking.
    violations: Vec<u64>,
    trail: Vec<Frame>,
    config: SolveConfig,
    stats: SolveStats,
    started: Instant,
    deadline: Option<Instant>,
}

impl SearchState {
    /// Propagate bounds to a fixpoint, fix phases the bounds force, and set
    /// up the tableau. `Err` means the problem is already unsatisfiable.
    pub fn new(p: &VerificationProblem, config: SolveConfig) -> Result<SearchState, Infeasible> {
        let started = Instant::now();
        let problem = propagate_bounds(p)?;
        let tableau = Tableau::new(&problem);
        let num_pairs = problem.pairs.len();
        let mut state = SearchState {
            problem,
            tableau,
            phases: vec![PhaseState::Undecided; num_pairs],
            violations: vec![0; num_pairs],
            trail: Vec::new(),
            deadline: started.checked_add(config.timeout),
            config,
            stats: SolveStats::default(),
            started,
        };
        state.config.split_threshold = state.config.split_threshold.max(1);
        state
            .propagate_and_fix()
            .map_err(|c| Infeasible { var: c.var })?;
        Ok(state)
    }

    pub fn problem(&self) -> &VerificationProblem {
        &self.problem
    }

    pub fn tableau(&self) -> &Tableau {
        &self.tableau
    }

    pub fn phases(&self) -> &[PhaseState] {
        &self.phases
    }

    pub fn violation_counts(&self) -> &[u64] {
        &self.violations
    }

    pub fn trail_depth(&self) -> usize {
        self.trail.len()
    }

    pub fn stats(&self) -> &SolveStats {
        &self.stats
    }

    /// Commit `pair` to `first` by pushing a trail frame and asserting the
    /// phase's bounds, then re-propagate. `Err` means this branch is already
    /// dead; the caller is expected to [`Self::backtrack`].
    pub fn split(&mut self, pair: usize, first: Phase) -> Result<(), ImmediateConflict> {
        debug_assert!(matches!(self.phases[pair], PhaseState::Undecided));
        self.trail.push(Frame {
            pair,
            tried: first,
            remaining: Some(first.other()),
            snapshot: self.tableau.snapshot(),
            phases: self.phases.clone(),
        });
        self.stats.splits += 1;
        self.stats.max_trail_depth = self.stats.max_trail_depth.max(self.trail.len());
        log::debug!(
            "split #{}: pair {} tries {:?} at depth {}",
            self.stats.splits,
            pair,
            first,
            self.trail.len()
        );
        self.assert_phase(pair, first, PhaseOrigin::SplitDecision)?;
        self.propagate_and_fix()
    }

    /// Pop frames until one still has an untried phase, restore its bounds
    /// and phase labels, and branch into that phase. A flip whose bound
    /// assertions immediately conflict counts as tried and popping continues.
    pub fn backtrack(&mut self) -> Backtrack {
        while let Some(frame) = self.trail.pop() {
            self.tableau.restore(&frame.snapshot);
            self.phases.clone_from(&frame.phases);
            let Some(phase) = frame.remaining else {
                continue;
            };
            let pair = frame.pair;
            log::debug!("backtrack: pair {pair} flips to {phase:?}");
            self.trail.push(Frame {
                pair,
                tried: phase,
                remaining: None,
                snapshot: frame.snapshot,
                phases: frame.phases,
            });
            let committed = self
                .assert_phase(pair, phase, PhaseOrigin::SplitDecision)
                .and_then(|()| self.propagate_and_fix());
            if committed.is_ok() {
                return Backtrack::Flipped;
            }
        }
        Backtrack::Exhausted
    }

    /// Run to a verdict.
    pub fn run(&mut self) -> Verdict {
        loop {
            if self.deadline.is_some_and(|d| Instant::now() >= d) {
                return self.finish(Verdict::ResourceOut(ResourceLimit::Timeout));
            }
            self.stats.lp_checks += 1;
            let assignment = match self.tableau.check_feasible() {
                FeasResult::Infeasible(v) => {
                    log::debug!("LP infeasible at {v}, backtracking");
                    match self.backtrack() {
                        Backtrack::Exhausted => return self.finish(Verdict::Unsat),
                        Backtrack::Flipped => continue,
                    }
                }
                FeasResult::Feasible(a) => a,
            };
            let violated = check_relus(&assignment, &self.problem.pairs);
            if violated.is_empty() {
                let counterexample = self
                    .problem
                    .input_vars()
                    .into_iter()
                    .map(|v| assignment[v.0].clone())
                    .collect();
                debug_assert!(self.tableau.rows_hold());
                return self.finish(Verdict::Sat {
                    assignment,
                    counterexample,
                });
            }
            for &i in &violated {
                if self.try_fix(i) {
                    self.stats.fixes += 1;
                }
            }
            let ripe = violated.iter().copied().find(|&i| {
                matches!(self.phases[i], PhaseState::Undecided)
                    && self.violations[i] >= self.config.split_threshold
            });
            if let Some(pair) = ripe {
                if self
                    .config
                    .max_splits
                    .is_some_and(|cap| self.stats.splits >= cap)
                {
                    return self.finish(Verdict::ResourceOut(ResourceLimit::SplitLimit));
                }
                let first = self.preferred_phase(pair);
                if self.split(pair, first).is_err() {
                    match self.backtrack() {
                        Backtrack::Exhausted => return self.finish(Verdict::Unsat),
                        Backtrack::Flipped => {}
                    }
                }
            }
        }
    }

    /// Attempt to repair a violated pair without pivoting:
    /// first move `f` to `max(0, b)` if `f` is nonbasic and the value fits
    /// its bounds; otherwise move `b` up to `f` if `b` is nonbasic, `f` is
    /// positive and the value fits. Counts the attempt against the pair
    /// whether or not a rule applied.
    pub fn try_fix(&mut self, pair_idx: usize) -> bool {
        self.violations[pair_idx] += 1;
        let pair = self.problem.pairs[pair_idx];
        let b_val = self.tableau.value(pair.b).clone();
        let f_val = self.tableau.value(pair.f).clone();
        let target_f = b_val.max(Rat::zero());
        if !self.tableau.is_basic(pair.f)
            && within_bounds(
                &target_f,
                &self.tableau.lower(pair.f).cloned(),
                &self.tableau.upper(pair.f).cloned(),
            )
        {
            self.tableau
                .update_nonbasic(pair.f, target_f)
                .expect("checked nonbasic and in bounds");
            return true;
        }
        if !self.tableau.is_basic(pair.b)
            && f_val > Rat::zero()
            && within_bounds(
                &f_val,
                &self.tableau.lower(pair.b).cloned(),
                &self.tableau.upper(pair.b).cloned(),
            )
        {
            self.tableau
                .update_nonbasic(pair.b, f_val)
                .expect("checked nonbasic and in bounds");
            return true;
        }
        false
    }

    /// Phase suggested by the current assignment: the sign of `b`, with 0
    /// breaking toward Active.
    fn preferred_phase(&self, pair_idx: usize) -> Phase {
        let b = self.problem.pairs[pair_idx].b;
        if *self.tableau.value(b) >= Rat::zero() {
            Phase::Active
        } else {
            Phase::Inactive
        }
    }

    fn assert_phase(
        &mut self,
        pair_idx: usize,
        phase: Phase,
        origin: PhaseOrigin,
    ) -> Result<(), ImmediateConflict> {
        self.phases[pair_idx] = PhaseState::Fixed(phase, origin);
        let pair = self.problem.pairs[pair_idx];
        for (v, kind, value) in phase_assertions(&pair, phase) {
            self.tableau.assert_bound(v, kind, value)?;
        }
        Ok(())
    }

    /// Interval propagation over the tableau's current bounds, plus phase
    /// fixing for pairs whose pre-activation sign the bounds now determine.
    /// Repeats until no further phase gets fixed.
    fn propagate_and_fix(&mut self) -> Result<(), ImmediateConflict> {
        loop {
            let (lo, hi) = self.tableau.bounds();
            let mut lo = lo.to_vec();
            let mut hi = hi.to_vec();
            tighten_to_fixpoint(&self.problem.rows, &self.problem.pairs, &mut lo, &mut hi)
                .map_err(|inf| ImmediateConflict { var: inf.var })?;
            for v in 0..self.problem.num_vars() {
                if let Some(l) = lo[v].take() {
                    self.tableau.assert_bound(VarId(v), BoundKind::Lower, l)?;
                }
                if let Some(h) = hi[v].take() {
                    self.tableau.assert_bound(VarId(v), BoundKind::Upper, h)?;
                }
            }
            let mut fixed_any = false;
            for i in 0..self.problem.pairs.len() {
                if !matches!(self.phases[i], PhaseState::Undecided) {
                    continue;
                }
                let b = self.problem.pairs[i].b;
                let forced = if self.tableau.lower(b).is_some_and(|lo| *lo >= Rat::zero()) {
                    Some(Phase::Active)
                } else if self.tableau.upper(b).is_some_and(|hi| *hi <= Rat::zero()) {
                    Some(Phase::Inactive)
                } else {
                    None
                };
                if let Some(phase) = forced {
                    log::debug!("propagation fixes pair {i} {phase:?}");
                    self.assert_phase(i, phase, PhaseOrigin::Propagated)?;
                    fixed_any = true;
                }
            }
            if !fixed_any {
                return Ok(());
            }
        }
    }

    fn finish(&mut self, verdict: Verdict) -> Verdict {
        self.stats.pivots = self.tableau.pivot_count();
        self.stats.wall_time = self.started.elapsed();
        verdict
    }
}

/// The bounds a phase decision asserts, shared by the search and the eager
/// enumeration oracle.
pub(crate) fn phase_assertions(pair: &ReluPair, phase: Phase) -> [(VarId, BoundKind, Rat); 3] {
    let zero = Rat::zero;
    match phase {
        Phase::Active => [
            (pair.b, BoundKind::Lower, zero()),
            (pair.d, BoundKind::Lower, zero()),
            (pair.d, BoundKind::Upper, zero()),
        ],
        Phase::Inactive => [
            (pair.b, BoundKind::Upper, zero()),
            (pair.f, BoundKind::Lower, zero()),
            (pair.f, BoundKind::Upper, zero()),
        ],
    }
}

/// Indices of pairs whose assignment breaks `f = max(0, b)`, in pair order.
pub fn check_relus(assignment: &[Rat], pairs: &[ReluPair]) -> Vec<usize> {
    pairs
        .iter()
        .enumerate()
        .filter(|(_, p)| {
            assignment[p.f.0] != assignment[p.b.0].clone().max(Rat::zero())
        })
        .map(|(i, _)| i)
        .collect()
}

/// Decide the problem: propagate, then alternate LP checks with lazy ReLU
/// fixing and splitting until Sat, Unsat, or a resource limit.
pub fn solve(p: &VerificationProblem, config: &SolveConfig) -> (Verdict, SolveStats) {
    let started = Instant::now();
    match SearchState::new(p, config.clone()) {
        Err(inf) => {
            log::debug!("infeasible during initial propagation: {inf}");
            let stats = SolveStats {
                wall_time: started.elapsed(),
                ..SolveStats::default()
            };
            (Verdict::Unsat, stats)
        }
        Ok(mut state) => {
            let verdict = state.run();
            (verdict, state.stats)
        }
    }
}

/// Outcome of replaying a Sat verdict against the real network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validation {
    Pass,
    /// Verdict was not Sat, or the counterexample has the wrong arity.
    NotApplicable,
    /// The counterexample input escapes the network's own input bounds.
    InputOutOfBounds { index: usize },
    /// A property atom does not hold on the replayed execution.
    AtomViolated { index: usize },
    /// The network's outputs differ from the assignment's output variables.
    OutputMismatch { index: usize },
}

impl Validation {
    pub fn passed(&self) -> bool {
        matches!(self, Validation::Pass)
    }
}

impl fmt::Display for Validation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Validation::Pass => write!(f, "pass"),
            Validation::NotApplicable => write!(f, "not applicable: verdict is not Sat"),
            Validation::InputOutOfBounds { index } => {
                write!(f, "fail: input x{index} outside the network's input bounds")
            }
            Validation::AtomViolated { index } => {
                write!(f, "fail: property atom #{index} does not hold on replay")
            }
            Validation::OutputMismatch { index } => {
                write!(f, "fail: output y{index} differs from the solver assignment")
            }
        }
    }
}

/// Replay a Sat verdict's counterexample through the network with exact
/// arithmetic: the input must respect the network's input bounds, every
/// property atom must hold on (input, outputs), and the solver's output
/// variables must equal the replayed outputs exactly.
pub fn validate_counterexample(
    net: &Network,
    prop: &Property,
    problem: &VerificationProblem,
    verdict: &Verdict,
) -> Validation {
    let Verdict::Sat {
        assignment,
        counterexample,
    } = verdict
    else {
        return Validation::NotApplicable;
    };
    if counterexample.len() != net.num_inputs() {
        return Validation::NotApplicable;
    }
    for (i, value) in counterexample.iter().enumerate() {
        if !within_bounds(value, &net.input_lower[i], &net.input_upper[i]) {
            return Validation::InputOutOfBounds { index: i };
        }
    }
    let outputs = match net.evaluate(counterexample) {
        Ok(out) => out,
        Err(_) => return Validation::NotApplicable,
    };
    for (index, atom) in prop.atoms.iter().enumerate() {
        if !atom.holds(counterexample, &outputs) {
            return Validation::AtomViolated { index };
        }
    }
    for (index, v) in problem.output_vars().into_iter().enumerate() {
        if assignment[v.0] != outputs[index] {
            return Validation::OutputMismatch { index };
        }
    }
    Validation::Pass
}

/// Full re-check of an assignment: every row holds exactly, every variable
/// is within bounds, and every pair satisfies `f = max(0, b)`.
pub fn assignment_consistent(problem: &VerificationProblem, assignment: &[Rat]) -> bool {
    if assignment.len() != problem.num_vars() {
        return false;
    }
    let rows_ok = problem
        .rows
        .iter()
        .all(|row| assignment[row.defined.0] == row.rhs_value(assignment));
    let bounds_ok = (0..problem.num_vars())
        .all(|v| within_bounds(&assignment[v], &problem.lower[v], &problem.upper[v]));
    let relus_ok = check_relus(assignment, &problem.pairs).is_empty();
    rows_ok && bounds_ok && relus_ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::{concrete_valuation, encode};
    use crate::problem::{Row, VarRole};
    use crate::property::parse_property;
    use crate::rat::{rat, rat_int};

    fn relu_identity_net(lo: i64, hi: i64) -> Network {
        Network::new(
            vec![1, 1, 1],
            vec![vec![vec![rat_int(1)]], vec![vec![rat_int(1)]]],
            vec![vec![rat_int(0)], vec![rat_int(0)]],
            vec![Some(rat_int(lo))],
            vec![Some(rat_int(hi))],
        )
        .unwrap()
    }

    fn abs_net() -> Network {
        Network::new(
            vec![1, 2, 1],
            vec![
                vec![vec![rat_int(1)], vec![rat_int(-1)]],
                vec![vec![rat_int(1), rat_int(1)]],
            ],
            vec![vec![rat_int(0), rat_int(0)], vec![rat_int(0)]],
            vec![Some(rat_int(-1))],
            vec![Some(rat_int(1))],
        )
        .unwrap()
    }

    fn solve_query(net: &Network, prop_text: &str) -> (Verdict, SolveStats, VerificationProblem) {
        let prop = parse_property(prop_text).unwrap();
        let problem = encode(net, &prop).unwrap();
        let (verdict, stats) = solve(&problem, &SolveConfig::default());
        (verdict, stats, problem)
    }

    #[test]
    fn check_relus_flags_exactly_the_broken_pairs() {
        let pairs = vec![
            ReluPair { b: VarId(0), f: VarId(1), d: VarId(2) },
            ReluPair { b: VarId(3), f: VarId(4), d: VarId(5) },
            ReluPair { b: VarId(6), f: VarId(7), d: VarId(8) },
        ];
        let assignment = vec![
            rat_int(3), rat_int(3), rat_int(0),  // active, satisfied
            rat_int(-2), rat_int(0), rat_int(2), // inactive, satisfied
            rat_int(3), rat_int(0), rat_int(-3), // f should be 3
        ];
        assert_eq!(check_relus(&assignment, &pairs), vec![2]);
    }

    #[test]
    fn positive_input_region_is_unsat_below_the_line() {
        // y = ReLU(x) with x in [1,2] forces y = x >= 1.
        let (verdict, _, _) = solve_query(&relu_identity_net(1, 2), "y0 <= 1/2");
        assert_eq!(verdict, Verdict::Unsat);
    }

    #[test]
    fn negative_input_region_is_sat_at_zero() {
        let net = relu_identity_net(-2, -1);
        let (verdict, _, problem) = solve_query(&net, "y0 <= 1/2");
        let Verdict::Sat { ref assignment, ref counterexample } = verdict else {
            panic!("expected Sat, got {verdict:?}");
        };
        assert_eq!(counterexample.len(), 1);
        assert!(counterexample[0] >= rat_int(-2) && counterexample[0] <= rat_int(-1));
        let y = problem.output_vars()[0];
        assert_eq!(assignment[y.0], rat_int(0));
        let prop = parse_property("y0 <= 1/2").unwrap();
        assert_eq!(
            validate_counterexample(&net, &prop, &problem, &verdict),
            Validation::Pass
        );
    }

    #[test]
    fn absolute_value_cannot_be_negative() {
        let (verdict, _, _) = solve_query(&abs_net(), "y0 <= -1/10");
        assert_eq!(verdict, Verdict::Unsat);
    }

    #[test]
    fn absolute_value_reaches_small_values() {
        let net = abs_net();
        let (verdict, _, problem) = solve_query(&net, "y0 <= 1/2");
        assert!(verdict.is_sat());
        let prop = parse_property("y0 <= 1/2").unwrap();
        assert!(validate_counterexample(&net, &prop, &problem, &verdict).passed());
        if let Verdict::Sat { assignment, .. } = &verdict {
            assert!(assignment_consistent(&problem, assignment));
        }
    }

    #[test]
    fn forced_positive_phase_needs_no_splits() {
        let (verdict, stats, _) = solve_query(&relu_identity_net(1, 2), "y0 >= 0");
        assert!(verdict.is_sat());
        assert_eq!(stats.splits, 0);
    }

    #[test]
    fn forced_negative_phase_needs_no_splits() {
        let (verdict, stats, _) = solve_query(&relu_identity_net(-5, -1), "y0 = 0");
        assert!(verdict.is_sat());
        assert_eq!(stats.splits, 0);
    }

    fn undecided_search(lo: i64, hi: i64) -> (SearchState, VerificationProblem) {
        let net = relu_identity_net(lo, hi);
        let prop = parse_property("y0 <= 100").unwrap();
        let problem = encode(&net, &prop).unwrap();
        let state = SearchState::new(&problem, SolveConfig::default()).unwrap();
        (state, problem)
    }

    #[test]
    fn split_inactive_caps_the_preactivation() {
        let (mut s, problem) = undecided_search(-1, 1);
        assert_eq!(s.phases()[0], PhaseState::Undecided);
        let pair = problem.pairs[0];
        s.split(0, Phase::Inactive).unwrap();
        assert_eq!(s.tableau().upper(pair.b), Some(&rat_int(0)));
        assert_eq!(s.tableau().lower(pair.b), Some(&rat_int(-1)));
        assert_eq!(s.tableau().upper(pair.f), Some(&rat_int(0)));
        assert_eq!(s.tableau().lower(pair.f), Some(&rat_int(0)));
        assert_eq!(
            s.phases()[0],
            PhaseState::Fixed(Phase::Inactive, PhaseOrigin::SplitDecision)
        );
        assert_eq!(s.trail_depth(), 1);
    }

    #[test]
    fn split_active_pins_the_slack() {
        let (mut s, problem) = undecided_search(-1, 1);
        let pair = problem.pairs[0];
        s.split(0, Phase::Active).unwrap();
        assert_eq!(s.tableau().lower(pair.b), Some(&rat_int(0)));
        assert_eq!(s.tableau().upper(pair.b), Some(&rat_int(1)));
        assert_eq!(s.tableau().lower(pair.d), Some(&rat_int(0)));
        assert_eq!(s.tableau().upper(pair.d), Some(&rat_int(0)));
    }

    #[test]
    fn split_into_emptied_interval_conflicts() {
        // ReLU on the output with y0 >= 1/2: the Inactive case would need
        // y0 = 0, conflicting with the property's lower bound.
        let mut net = Network::new(
            vec![1, 1],
            vec![vec![vec![rat_int(1)]]],
            vec![vec![rat_int(0)]],
            vec![Some(rat_int(-1))],
            vec![Some(rat_int(1))],
        )
        .unwrap();
        net.output_relu = true;
        let prop = parse_property("y0 >= 1/2").unwrap();
        let problem = encode(&net, &prop).unwrap();
        let mut s = SearchState::new(&problem, SolveConfig::default()).unwrap();
        assert_eq!(s.phases()[0], PhaseState::Undecided);
        assert!(s.split(0, Phase::Inactive).is_err());
        // The frame is on the trail, so backtracking flips to Active.
        assert_eq!(s.backtrack(), Backtrack::Flipped);
        assert_eq!(
            s.phases()[0],
            PhaseState::Fixed(Phase::Active, PhaseOrigin::SplitDecision)
        );
        let verdict = s.run();
        assert!(verdict.is_sat());
    }

    #[test]
    fn backtrack_restores_bounds_exactly() {
        let (mut s, _) = undecided_search(-1, 1);
        let before = s.tableau().snapshot();
        s.split(0, Phase::Inactive).unwrap();
        assert_ne!(s.tableau().snapshot(), before);
        assert_eq!(s.backtrack(), Backtrack::Flipped);
        // Flipping asserted the Active bounds on top of the restored state;
        // backtracking once more exhausts the frame and restores exactly.
        assert_eq!(s.backtrack(), Backtrack::Exhausted);
        assert_eq!(s.tableau().snapshot(), before);
        assert_eq!(s.phases()[0], PhaseState::Undecided);
        assert_eq!(s.trail_depth(), 0);
    }

    #[test]
    fn backtrack_on_empty_trail_is_exhausted() {
        let (mut s, _) = undecided_search(-1, 1);
        assert_eq!(s.backtrack(), Backtrack::Exhausted);
    }

    #[test]
    fn try_fix_moves_nonbasic_f_to_relu_value() {
        // Fresh tableau for y = ReLU(x): b, d, y basic; x, f nonbasic.
        let net = relu_identity_net(0, 5);
        let prop = parse_property("y0 <= 100").unwrap();
        let problem = encode(&net, &prop).unwrap();
        let mut s = SearchState::new(&problem, SolveConfig::default()).unwrap();
        let pair = s.problem().pairs[0];
        // x starts at 0; push it so b = 3 while f still sits at 0.
        // (x is nonbasic: move it directly through the public tableau ops.)
        assert!(!s.tableau().is_basic(VarId(0)));
        s.tableau.update_nonbasic(VarId(0), rat_int(3)).unwrap();
        assert_eq!(*s.tableau().value(pair.b), rat_int(3));
        assert_eq!(*s.tableau().value(pair.f), rat_int(0));
        assert_eq!(check_relus(s.tableau.assignment(), &s.problem.pairs), vec![0]);
        assert!(s.try_fix(0));
        assert_eq!(*s.tableau().value(pair.f), rat_int(3));
        assert_eq!(s.violation_counts()[0], 1);
    }

    #[test]
    fn try_fix_raises_nonbasic_b_to_a_positive_f() {
        // Hand-built problem where f is defined by a row (basic) and b is a
        // free variable: f = x1 + 2, d = f - x0, pair (x0, f, d).
        let problem = VerificationProblem {
            roles: vec![
                VarRole::Input(0),
                VarRole::Input(1),
                VarRole::PostAct { layer: 1, neuron: 0 },
                VarRole::Slack { layer: 1, neuron: 0 },
            ],
            lower: vec![Some(rat_int(-5)), Some(rat_int(0)), None, None],
            upper: vec![Some(rat_int(5)), Some(rat_int(0)), None, None],
            rows: vec![
                Row {
                    defined: VarId(2),
                    terms: vec![(VarId(1), rat_int(1))],
                    constant: rat_int(2),
                },
                Row {
                    defined: VarId(3),
                    terms: vec![(VarId(2), rat_int(1)), (VarId(0), rat_int(-1))],
                    constant: rat_int(0),
                },
            ],
            pairs: vec![ReluPair { b: VarId(0), f: VarId(2), d: VarId(3) }],
        };
        let mut s = SearchState::new(&problem, SolveConfig::default()).unwrap();
        s.tableau.update_nonbasic(VarId(0), rat_int(-1)).unwrap();
        assert!(s.tableau().is_basic(VarId(2)));
        assert!(!s.tableau().is_basic(VarId(0)));
        assert_eq!(*s.tableau().value(VarId(2)), rat_int(2));
        assert_eq!(check_relus(s.tableau.assignment(), &s.problem.pairs), vec![0]);
        assert!(s.try_fix(0));
        assert_eq!(*s.tableau().value(VarId(0)), rat_int(2));
        assert!(check_relus(s.tableau.assignment(), &s.problem.pairs).is_empty());
    }

    #[test]
    fn try_fix_gives_up_when_both_sides_are_basic() {
        // b = x0 - 1 and f = x1 are both defined by rows, so neither repair
        // rule applies.
        let problem = VerificationProblem {
            roles: vec![
                VarRole::Input(0),
                VarRole::Input(1),
                VarRole::PreAct { layer: 1, neuron: 0 },
                VarRole::PostAct { layer: 1, neuron: 0 },
                VarRole::Slack { layer: 1, neuron: 0 },
            ],
            lower: vec![Some(rat_int(0)), Some(rat_int(0)), None, None, None],
            upper: vec![Some(rat_int(4)), Some(rat_int(5)), None, None, None],
            rows: vec![
                Row {
                    defined: VarId(2),
                    terms: vec![(VarId(0), rat_int(1))],
                    constant: rat_int(-1),
                },
                Row {
                    defined: VarId(3),
                    terms: vec![(VarId(1), rat_int(1))],
                    constant: rat_int(0),
                },
                Row {
                    defined: VarId(4),
                    terms: vec![(VarId(3), rat_int(1)), (VarId(2), rat_int(-1))],
                    constant: rat_int(0),
                },
            ],
            pairs: vec![ReluPair { b: VarId(2), f: VarId(3), d: VarId(4) }],
        };
        let mut s = SearchState::new(&problem, SolveConfig::default()).unwrap();
        assert_eq!(s.phases()[0], PhaseState::Undecided);
        s.tableau.update_nonbasic(VarId(1), rat_int(2)).unwrap();
        assert_eq!(*s.tableau().value(VarId(2)), rat_int(-1));
        assert_eq!(*s.tableau().value(VarId(3)), rat_int(2));
        assert_eq!(check_relus(s.tableau.assignment(), &s.problem.pairs), vec![0]);
        assert!(!s.try_fix(0));
        assert_eq!(s.violation_counts()[0], 1);
    }

    #[test]
    fn resource_out_on_zero_split_budget() {
        // |x| = 0 pins y without deciding either pair, so the search must
        // eventually ask for a split; a zero budget trips the limit.
        let prop = parse_property("y0 = 0").unwrap();
        let problem = encode(&abs_net(), &prop).unwrap();
        let config = SolveConfig {
            max_splits: Some(0),
            ..SolveConfig::default()
        };
        let (verdict, stats) = solve(&problem, &config);
        assert_eq!(verdict, Verdict::ResourceOut(ResourceLimit::SplitLimit));
        assert_eq!(stats.splits, 0);
    }

    #[test]
    fn immediate_timeout_reports_resource_out() {
        let prop = parse_property("y0 = 0").unwrap();
        let problem = encode(&abs_net(), &prop).unwrap();
        let config = SolveConfig {
            timeout: Duration::from_secs(0),
            ..SolveConfig::default()
        };
        let (verdict, _) = solve(&problem, &config);
        assert_eq!(verdict, Verdict::ResourceOut(ResourceLimit::Timeout));
    }

    #[test]
    fn validation_rejects_forged_outputs() {
        let net = relu_identity_net(-2, -1);
        let prop = parse_property("y0 <= 1/2").unwrap();
        let problem = encode(&net, &prop).unwrap();
        let (verdict, _) = solve(&problem, &SolveConfig::default());
        let Verdict::Sat { mut assignment, counterexample } = verdict else {
            panic!("expected Sat");
        };
        let y = problem.output_vars()[0];
        assignment[y.0] = rat_int(5);
        let forged = Verdict::Sat { assignment, counterexample };
        assert_eq!(
            validate_counterexample(&net, &prop, &problem, &forged),
            Validation::OutputMismatch { index: 0 }
        );
    }

    #[test]
    fn validation_rejects_out_of_range_inputs() {
        let net = relu_identity_net(-2, -1);
        let prop = parse_property("y0 <= 1/2").unwrap();
        let problem = encode(&net, &prop).unwrap();
        let forged = Verdict::Sat {
            assignment: vec![rat_int(7); problem.num_vars()],
            counterexample: vec![rat_int(7)],
        };
        assert_eq!(
            validate_counterexample(&net, &prop, &problem, &forged),
            Validation::InputOutOfBounds { index: 0 }
        );
    }

    #[test]
    fn validation_rejects_inputs_violating_input_atoms() {
        let net = relu_identity_net(-2, 2);
        let prop = parse_property("x0 >= 1\ny0 <= 100").unwrap();
        let problem = encode(&net, &prop).unwrap();
        // In-range input that breaks the x0 >= 1 atom.
        let replay = concrete_valuation(&problem, &[rat_int(0)]);
        let forged = Verdict::Sat {
            assignment: replay,
            counterexample: vec![rat_int(0)],
        };
        assert_eq!(
            validate_counterexample(&net, &prop, &problem, &forged),
            Validation::AtomViolated { index: 0 }
        );
    }

    #[test]
    fn boundary_equality_is_sat_exactly() {
        // x in [-1, 1], y = ReLU(x), y = 1 reachable only at x = 1.
        let net = relu_identity_net(-1, 1);
        let (verdict, _, problem) = solve_query(&net, "y0 = 1");
        let Verdict::Sat { assignment, counterexample } = &verdict else {
            panic!("expected Sat, got {verdict:?}");
        };
        assert_eq!(counterexample[0], rat_int(1));
        let y = problem.output_vars()[0];
        assert_eq!(assignment[y.0], rat_int(1));
    }

    #[test]
    fn rational_boundary_is_respected_exactly() {
        // y <= 1/3 with x in [1/3 - tiny, 1]: only tiny sliver is Sat; the
        // exact arithmetic must find it.
        let net = Network::new(
            vec![1, 1, 1],
            vec![vec![vec![rat_int(1)]], vec![vec![rat_int(1)]]],
            vec![vec![rat_int(0)], vec![rat_int(0)]],
            vec![Some(rat(1, 3))],
            vec![Some(rat_int(1))],
        )
        .unwrap();
        let prop = parse_property("y0 <= 1/3").unwrap();
        let problem = encode(&net, &prop).unwrap();
        let (verdict, _) = solve(&problem, &SolveConfig::default());
        let Verdict::Sat { counterexample, .. } = &verdict else {
            panic!("expected Sat, got {verdict:?}");
        };
        assert_eq!(counterexample[0], rat(1, 3));
        // And strictly below 1/3 there is nothing.
        let prop = parse_property("y0 <= 33333/100000").unwrap();
        let problem = encode(&net, &prop).unwrap();
        let (verdict, _) = solve(&problem, &SolveConfig::default());
        assert_eq!(verdict, Verdict::Unsat);
    }
}
