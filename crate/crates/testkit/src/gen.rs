//! Seeded random instances: raw linear programs for the simplex, and
//! network/property pairs for the end-to-end engine.
//!
//! All randomness flows through a ChaCha stream seeded by the caller, so a
//! failing instance is reproducible from its seed alone on any platform.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relusat_core::network::{generate_network, NetGenSpec};
use relusat_core::problem::{Row, VarId, VarRole, VerificationProblem};
use relusat_core::property::{LinearAtom, Property, Relation, VarRef};
use relusat_core::rat::{rat, rat_int};

/// The one true way to make a generator RNG.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random pure linear program: 2–6 variables, the last few defined by
/// equality rows over earlier variables, a mix of one-sided, two-sided and
/// missing bounds. No ReLU pairs. Occasionally the bounds cross — that is a
/// legitimate (infeasible) input and both solvers must agree on it.
pub fn random_lp(rng: &mut ChaCha8Rng) -> VerificationProblem {
    let num_vars = rng.gen_range(2..=6);
    let num_rows = rng.gen_range(1..=(num_vars - 1).min(3));
    let first_defined = num_vars - num_rows;

    let mut roles = Vec::with_capacity(num_vars);
    for i in 0..first_defined {
        roles.push(VarRole::Input(i));
    }
    for i in 0..num_rows {
        roles.push(VarRole::Aux(i));
    }

    let mut rows = Vec::with_capacity(num_rows);
    for defined in first_defined..num_vars {
        // Terms range over strictly earlier variables, including earlier
        // row-defined ones, to exercise the tableau's forward substitution.
        let mut terms = Vec::new();
        for v in 0..defined {
            if rng.gen_bool(0.7) {
                let numer = rng.gen_range(-3..=3);
                if numer == 0 {
                    continue;
                }
                terms.push((VarId(v), rat(numer, rng.gen_range(1..=2))));
            }
        }
        if terms.is_empty() {
            terms.push((VarId(0), rat_int(1)));
        }
        let constant = rat(rng.gen_range(-4..=4), rng.gen_range(1..=2));
        rows.push(Row {
            defined: VarId(defined),
            terms,
            constant,
        });
    }

    let mut lower = vec![None; num_vars];
    let mut upper = vec![None; num_vars];
    for v in 0..num_vars {
        if rng.gen_bool(0.7) {
            lower[v] = Some(rat(rng.gen_range(-6..=2), rng.gen_range(1..=2)));
        }
        if rng.gen_bool(0.7) {
            upper[v] = Some(rat(rng.gen_range(-2..=6), rng.gen_range(1..=2)));
        }
    }

    VerificationProblem {
        roles,
        lower,
        upper,
        rows,
        pairs: vec![],
    }
}

/// A random property over `num_inputs`/`num_outputs`: one or two atoms,
/// biased toward single-term output thresholds with an occasional multi-term
/// or equality atom.
pub fn random_property(rng: &mut ChaCha8Rng, num_inputs: usize, num_outputs: usize) -> Property {
    let num_atoms = rng.gen_range(1..=2);
    let mut atoms = Vec::new();
    for _ in 0..num_atoms {
        let num_terms = if rng.gen_bool(0.3) { 2 } else { 1 };
        let mut terms = Vec::new();
        for _ in 0..num_terms {
            let mut coeff = rat(rng.gen_range(-2..=2), 1);
            if coeff.is_zero() {
                coeff = rat_int(1);
            }
            let var = if rng.gen_bool(0.8) {
                VarRef::Output(rng.gen_range(0..num_outputs))
            } else {
                VarRef::Input(rng.gen_range(0..num_inputs))
            };
            terms.push((coeff, var));
        }
        let relation = match rng.gen_range(0..6) {
            0 => Relation::Ge,
            1 => Relation::Eq,
            _ => Relation::Le,
        };
        let constant = rat(rng.gen_range(-8..=8), rng.gen_range(1..=4));
        // Duplicate variables can cancel to nothing; drop such atoms.
        if let Ok(atom) = LinearAtom::new(terms, relation, constant) {
            atoms.push(atom);
        }
    }
    if atoms.is_empty() {
        atoms.push(
            LinearAtom::new(
                vec![(rat_int(1), VarRef::Output(0))],
                Relation::Le,
                rat_int(0),
            )
            .expect("single nonzero term"),
        );
    }
    Property { atoms }
}

/// A random end-to-end instance: a network with 1–3 inputs, 1–3 hidden
/// layers of 1–4 neurons (at most `max_pairs` ReLUs total), 1–2 outputs,
/// hundredth-grid weights in [-1, 1], plus a property to check against it.
pub fn random_instance(rng: &mut ChaCha8Rng, max_pairs: usize) -> (relusat_core::Network, Property) {
    loop {
        let num_inputs = rng.gen_range(1..=3);
        let num_hidden_layers = rng.gen_range(1..=3);
        let hidden: Vec<usize> = (0..num_hidden_layers)
            .map(|_| rng.gen_range(1..=4))
            .collect();
        if hidden.iter().sum::<usize>() > max_pairs {
            continue;
        }
        let num_outputs = rng.gen_range(1..=2);
        let mut layer_dims = vec![num_inputs];
        layer_dims.extend(&hidden);
        layer_dims.push(num_outputs);
        let net = generate_network(&NetGenSpec {
            layer_dims,
            weight_range: (rat_int(-1), rat_int(1)),
            seed: rng.gen(),
        })
        .expect("instance dims are always valid");
        let prop = random_property(rng, num_inputs, num_outputs);
        return (net, prop);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_lp() {
        let a = random_lp(&mut rng(42));
        let b = random_lp(&mut rng(42));
        assert_eq!(a, b);
    }

    #[test]
    fn lp_shape_invariants() {
        let mut r = rng(7);
        for _ in 0..50 {
            let lp = random_lp(&mut r);
            assert!((2..=6).contains(&lp.num_vars()));
            assert!(!lp.rows.is_empty());
            assert!(lp.pairs.is_empty());
            for row in &lp.rows {
                assert!(!row.terms.is_empty());
                for (v, c) in &row.terms {
                    assert!(v.0 < row.defined.0, "terms must precede the defined var");
                    assert!(!c.is_zero());
                }
            }
        }
    }

    #[test]
    fn instance_respects_the_recipe() {
        let mut r = rng(3);
        for _ in 0..30 {
            let (net, prop) = random_instance(&mut r, 8);
            assert!((1..=3).contains(&net.num_inputs()));
            assert!((1..=2).contains(&net.num_outputs()));
            assert!(net.num_relus() <= 8);
            assert!(!prop.atoms.is_empty());
            let (max_in, max_out) = prop.max_indices();
            assert!(max_in.is_none_or(|i| i < net.num_inputs()));
            assert!(max_out.is_none_or(|o| o < net.num_outputs()));
        }
    }

    #[test]
    fn same_seed_same_instance() {
        let (net_a, prop_a) = random_instance(&mut rng(9), 8);
        let (net_b, prop_b) = random_instance(&mut rng(9), 8);
        assert_eq!(net_a.layer_dims, net_b.layer_dims);
        assert_eq!(net_a.weights, net_b.weights);
        assert_eq!(prop_a, prop_b);
    }
}
