//! Cross-checks against independent references: the simplex against
//! Fourier–Motzkin elimination, the lazy search against the eager
//! phase-enumeration oracle, and the encoding against the network's own
//! forward pass.

use relusat_core::encode::{concrete_valuation, encode};
use relusat_core::oracle::oracle_solve;
use relusat_core::problem::within_bounds;
use relusat_core::propagate::propagate_bounds;
use relusat_core::rat::{rat, rat_int};
use relusat_core::search::{assignment_consistent, solve, validate_counterexample, SolveConfig, Verdict};
use relusat_core::simplex::{FeasResult, Tableau};
use relusat_core::{parse_property, NetGenSpec};
use relusat_testkit::{fm_feasible, lp_relaxation, random_instance, random_lp, rng};

#[test]
fn simplex_matches_fourier_motzkin_on_random_lps() {
    let mut r = rng(0x51317);
    let mut feasible = 0usize;
    let mut infeasible = 0usize;
    for case in 0..150 {
        let lp = random_lp(&mut r);
        let system = lp_relaxation(&lp);
        let reference = fm_feasible(&system);
        let mut tableau = Tableau::new(&lp);
        match tableau.check_feasible() {
            FeasResult::Feasible(assignment) => {
                assert!(
                    reference.is_some(),
                    "case {case}: simplex feasible, elimination says not\n{}",
                    lp.dump()
                );
                assert!(
                    system.holds(&assignment),
                    "case {case}: simplex point violates the system\n{}",
                    lp.dump()
                );
                feasible += 1;
            }
            FeasResult::Infeasible(var) => {
                assert!(
                    reference.is_none(),
                    "case {case}: simplex infeasible at {var}, elimination found {reference:?}\n{}",
                    lp.dump()
                );
                infeasible += 1;
            }
        }
    }
    // The generator should produce a meaningful mix, not one degenerate kind.
    assert!(feasible >= 20, "only {feasible} feasible cases");
    assert!(infeasible >= 20, "only {infeasible} infeasible cases");
}

#[test]
fn solver_matches_eager_oracle_on_random_instances() {
    let mut r = rng(0xACED);
    let config = SolveConfig::default();
    let mut sat = 0usize;
    let mut unsat = 0usize;
    for case in 0..80 {
        let (net, prop) = random_instance(&mut r, 8);
        let problem = encode(&net, &prop).expect("generated instances are in range");
        let (verdict, _) = solve(&problem, &config);
        let (oracle_verdict, oracle_stats) =
            oracle_solve(&problem, 10).expect("at most 8 pairs by construction");
        assert_eq!(
            oracle_stats.patterns_executed,
            1u64 << problem.pairs.len(),
            "case {case}: oracle must execute every pattern"
        );
        match (&verdict, &oracle_verdict) {
            (Verdict::Sat { .. }, Verdict::Sat { .. }) => {
                let check = validate_counterexample(&net, &prop, &problem, &verdict);
                assert!(check.passed(), "case {case}: {check}");
                sat += 1;
            }
            (Verdict::Unsat, Verdict::Unsat) => unsat += 1,
            other => panic!(
                "case {case}: solver and oracle disagree: {other:?}\n{}",
                problem.dump()
            ),
        }
    }
    assert!(sat >= 10, "only {sat} sat cases");
    assert!(unsat >= 10, "only {unsat} unsat cases");
}

/// Every concrete forward pass of the network, lifted to the full variable
/// space, satisfies the encoded rows, ReLU pairs and bounds — provided the
/// property places no constraints of its own (a tautology is used here).
#[test]
fn concrete_executions_satisfy_the_encoding() {
    let mut r = rng(0xE0C0DE);
    let grid = [rat_int(-1), rat(-1, 3), rat_int(0), rat(1, 2), rat_int(1)];
    for _ in 0..20 {
        let (net, _) = random_instance(&mut r, 8);
        let prop = parse_property("y0 <= 1000000").unwrap();
        let problem = encode(&net, &prop).unwrap();
        for point in &grid {
            let input = vec![point.clone(); net.num_inputs()];
            let valuation = concrete_valuation(&problem, &input);
            assert!(
                assignment_consistent(&problem, &valuation),
                "execution at {point} violates the encoding\n{}",
                problem.dump()
            );
            // And the valuation's outputs are the network's outputs.
            let outputs = net.evaluate(&input).unwrap();
            for (idx, var) in problem.output_vars().iter().enumerate() {
                assert_eq!(valuation[var.0], outputs[idx]);
            }
        }
    }
}

/// Propagated bounds only ever tighten toward the truth: no real execution
/// of the network is excluded.
#[test]
fn propagation_never_excludes_a_real_execution() {
    let mut r = rng(0xB0BB1E);
    let grid = [rat_int(-1), rat(-2, 3), rat_int(0), rat(3, 4), rat_int(1)];
    for _ in 0..20 {
        let (net, _) = random_instance(&mut r, 8);
        let prop = parse_property("y0 <= 1000000").unwrap();
        let problem = encode(&net, &prop).unwrap();
        let tightened = propagate_bounds(&problem).expect("tautology stays feasible");
        for point in &grid {
            let input = vec![point.clone(); net.num_inputs()];
            let valuation = concrete_valuation(&problem, &input);
            for v in 0..tightened.num_vars() {
                assert!(
                    within_bounds(&valuation[v], &tightened.lower[v], &tightened.upper[v]),
                    "propagation cut off {} = {} at input {point}",
                    tightened.var_name(relusat_core::VarId(v)),
                    valuation[v]
                );
            }
        }
    }
}

/// The generated-network seed contract: equal specs make equal networks,
/// different seeds almost surely differ.
#[test]
fn generation_is_a_pure_function_of_the_spec() {
    let spec = NetGenSpec {
        layer_dims: vec![2, 3, 1],
        weight_range: (rat_int(-1), rat_int(1)),
        seed: 77,
    };
    let a = relusat_core::generate_network(&spec).unwrap();
    let b = relusat_core::generate_network(&spec).unwrap();
    assert_eq!(a.weights, b.weights);
    assert_eq!(a.biases, b.biases);
    let other = relusat_core::generate_network(&NetGenSpec { seed: 78, ..spec }).unwrap();
    assert_ne!(a.weights, other.weights);
}

/// A zero-pair problem is decided without any splitting machinery engaged,
/// and the full solver still agrees with both references.
#[test]
fn zero_pair_problems_never_split() {
    let mut r = rng(0x1F01);
    for _ in 0..40 {
        let lp = random_lp(&mut r);
        let (verdict, stats) = solve(&lp, &SolveConfig::default());
        assert_eq!(stats.splits, 0);
        let reference = fm_feasible(&lp_relaxation(&lp));
        match verdict {
            Verdict::Sat { assignment, .. } => {
                assert!(reference.is_some());
                assert!(lp_relaxation(&lp).holds(&assignment));
            }
            Verdict::Unsat => assert!(reference.is_none()),
            Verdict::ResourceOut(limit) => panic!("zero-pair LP hit {limit}"),
        }
    }
}
