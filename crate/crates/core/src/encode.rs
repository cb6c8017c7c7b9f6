//! Translation of a network plus a property into bounds, equality rows and
//! ReLU pairs.
//!
//! Variable layout, in index order:
//!
//! 1. one variable per network input (`x0, x1, ...`),
//! 2. for each hidden layer, for each neuron: pre-activation `b`,
//!    post-activation `f`, slack `d` (where `d = f - b`),
//! 3. one variable per network output (`y0, y1, ...`),
//! 4. one auxiliary variable per multi-term property atom.
//!
//! Layer numbers in variable roles match positions in `layer_dims`, so the
//! first hidden layer is layer 1. Rows are emitted in dependency order:
//! pre-activation and slack rows layer by layer, then output rows, then
//! auxiliary rows. Single-term property atoms become bounds on the referenced
//! variable (intersected with the network's own input bounds); multi-term
//! atoms become an auxiliary variable defined by an equality row, carrying the
//! atom's relation as a one-sided (or, for `=`, two-sided) bound. Every
//! post-activation gets the lower bound 0 implied by ReLU. Contradictory
//! bounds are deliberately let through; the solver reports them as
//! infeasibility.

use crate::network::Network;
use crate::problem::{ReluPair, Row, VarId, VarRole, VerificationProblem};
use crate::property::{Property, Relation, VarRef};
use crate::rat::{rat_int, Rat};
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EncodeError {
    #[error("property references {var} but the network has {limit} {kind} variable(s)")]
    IndexOutOfRange {
        var: String,
        limit: usize,
        kind: &'static str,
    },
}

/// Build the verification problem for `net` constrained by `prop`.
///
/// Pure: neither argument is modified, and the result carries its own copies
/// of all bounds.
pub fn encode(net: &Network, prop: &Property) -> Result<VerificationProblem, EncodeError> {
    check_indices(net, prop)?;

    let n_in = net.num_inputs();
    let n_out = net.num_outputs();
    let num_affine = net.weights.len();
    // Affine layers whose outputs get ReLU pairs. With `output_relu` the
    // final layer is included and its post-activations double as the
    // network outputs.
    let num_relu_layers = if net.output_relu {
        num_affine
    } else {
        num_affine - 1
    };

    let mut vars = VarTable::default();

    let inputs: Vec<VarId> = (0..n_in)
        .map(|i| {
            vars.alloc(
                VarRole::Input(i),
                net.input_lower[i].clone(),
                net.input_upper[i].clone(),
            )
        })
        .collect();

    // (b, f, d) per neuron, per ReLU layer. `layer` in the role is the
    // position in layer_dims, so the k-th affine layer produces layer k+1.
    let mut triples: Vec<Vec<(VarId, VarId, VarId)>> = Vec::new();
    for k in 0..num_relu_layers {
        let layer = k + 1;
        let width = net.layer_dims[layer];
        let mut layer_triples = Vec::with_capacity(width);
        for neuron in 0..width {
            let b = vars.alloc(VarRole::PreAct { layer, neuron }, None, None);
            let f_role = if net.output_relu && k == num_affine - 1 {
                VarRole::Output(neuron)
            } else {
                VarRole::PostAct { layer, neuron }
            };
            let f = vars.alloc(f_role, Some(Rat::zero()), None);
            let d = vars.alloc(VarRole::Slack { layer, neuron }, None, None);
            layer_triples.push((b, f, d));
        }
        triples.push(layer_triples);
    }

    let outputs: Vec<VarId> = if net.output_relu {
        triples[num_affine - 1].iter().map(|&(_, f, _)| f).collect()
    } else {
        (0..n_out)
            .map(|i| vars.alloc(VarRole::Output(i), None, None))
            .collect()
    };

    let mut rows = Vec::new();
    let mut pairs = Vec::new();
    let mut prev: Vec<VarId> = inputs.clone();
    for k in 0..num_affine {
        let relu_layer = k < num_relu_layers;
        let width = net.layer_dims[k + 1];
        for neuron in 0..width {
            let terms: Vec<(VarId, Rat)> = prev
                .iter()
                .zip(&net.weights[k][neuron])
                .filter(|(_, w)| !w.is_zero())
                .map(|(&v, w)| (v, w.clone()))
                .collect();
            let constant = net.biases[k][neuron].clone();
            if relu_layer {
                let (b, f, d) = triples[k][neuron];
                rows.push(Row {
                    defined: b,
                    terms,
                    constant,
                });
                rows.push(Row {
                    defined: d,
                    terms: vec![(f, rat_int(1)), (b, rat_int(-1))],
                    constant: Rat::zero(),
                });
                pairs.push(ReluPair { b, f, d });
            } else {
                rows.push(Row {
                    defined: outputs[neuron],
                    terms,
                    constant,
                });
            }
        }
        prev = if relu_layer {
            triples[k].iter().map(|&(_, f, _)| f).collect()
        } else {
            outputs.clone()
        };
    }

    let resolve = |v: &VarRef| -> VarId {
        match v {
            VarRef::Input(i) => inputs[*i],
            VarRef::Output(i) => outputs[*i],
        }
    };

    // Property atoms: single-term ones tighten the referenced variable's
    // bounds, multi-term ones get an auxiliary variable and a defining row.
    let mut num_aux = 0;
    for atom in &prop.atoms {
        if let [(coeff, var)] = atom.terms.as_slice() {
            let target = resolve(var);
            let threshold = &atom.constant / coeff;
            apply_relation(
                scaled_relation(atom.relation, coeff),
                &threshold,
                &mut vars.lower[target.0],
                &mut vars.upper[target.0],
            );
        } else {
            let (lo, hi) = relation_bounds(atom.relation, &atom.constant);
            let aux = vars.alloc(VarRole::Aux(num_aux), lo, hi);
            num_aux += 1;
            rows.push(Row {
                defined: aux,
                terms: atom
                    .terms
                    .iter()
                    .map(|(c, v)| (resolve(v), c.clone()))
                    .collect(),
                constant: Rat::zero(),
            });
        }
    }

    Ok(VerificationProblem {
        roles: vars.roles,
        lower: vars.lower,
        upper: vars.upper,
        rows,
        pairs,
    })
}

#[derive(Default)]
struct VarTable {
    roles: Vec<VarRole>,
    lower: Vec<Option<Rat>>,
    upper: Vec<Option<Rat>>,
}

impl VarTable {
    fn alloc(&mut self, role: VarRole, lo: Option<Rat>, hi: Option<Rat>) -> VarId {
        let id = VarId(self.roles.len());
        self.roles.push(role);
        self.lower.push(lo);
        self.upper.push(hi);
        id
    }
}

fn check_indices(net: &Network, prop: &Property) -> Result<(), EncodeError> {
    let (max_in, max_out) = prop.max_indices();
    if let Some(i) = max_in {
        if i >= net.num_inputs() {
            return Err(EncodeError::IndexOutOfRange {
                var: VarRef::Input(i).to_string(),
                limit: net.num_inputs(),
                kind: "input",
            });
        }
    }
    if let Some(i) = max_out {
        if i >= net.num_outputs() {
            return Err(EncodeError::IndexOutOfRange {
                var: VarRef::Output(i).to_string(),
                limit: net.num_outputs(),
                kind: "output",
            });
        }
    }
    Ok(())
}

/// Dividing an atom's sides by a negative coefficient flips the relation.
fn scaled_relation(rel: Relation, coeff: &Rat) -> Relation {
    if coeff < &Rat::zero() {
        match rel {
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
            Relation::Eq => Relation::Eq,
        }
    } else {
        rel
    }
}

fn relation_bounds(rel: Relation, value: &Rat) -> (Option<Rat>, Option<Rat>) {
    match rel {
        Relation::Le => (None, Some(value.clone())),
        Relation::Ge => (Some(value.clone()), None),
        Relation::Eq => (Some(value.clone()), Some(value.clone())),
    }
}

fn apply_relation(rel: Relation, value: &Rat, lower: &mut Option<Rat>, upper: &mut Option<Rat>) {
    let (lo, hi) = relation_bounds(rel, value);
    if let Some(lo) = lo {
        tighten_lower(lower, lo);
    }
    if let Some(hi) = hi {
        tighten_upper(upper, hi);
    }
}

fn tighten_lower(bound: &mut Option<Rat>, candidate: Rat) {
    match bound {
        Some(cur) if *cur >= candidate => {}
        _ => *bound = Some(candidate),
    }
}

fn tighten_upper(bound: &mut Option<Rat>, candidate: Rat) {
    match bound {
        Some(cur) if *cur <= candidate => {}
        _ => *bound = Some(candidate),
    }
}

/// Full variable valuation obtained by feeding `input` through the network:
/// rows are evaluated in order and each post-activation is set to
/// `max(0, b)` as soon as its pre-activation is known. Used to check that
/// concrete executions satisfy everything `encode` emits, and to rebuild
/// hidden-variable values when validating counterexamples.
pub fn concrete_valuation(
    problem: &VerificationProblem,
    input: &[Rat],
) -> Vec<Rat> {
    let mut values = vec![Rat::zero(); problem.num_vars()];
    for (i, v) in problem.input_vars().into_iter().enumerate() {
        values[v.0] = input[i].clone();
    }
    for row in &problem.rows {
        values[row.defined.0] = row.rhs_value(&values);
        if let Some(pair) = problem.pairs.iter().find(|p| p.b == row.defined) {
            let b = values[pair.b.0].clone();
            values[pair.f.0] = b.max(Rat::zero());
        }
    }
    values
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::within_bounds;
    use crate::property::parse_property;
    use crate::rat::{rat, rat_int};

    /// [1, 2, 1] network: b0 = x, b1 = -x, y = f0 + f1 (computes |x|).
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

    #[test]
    fn one_two_one_layout() {
        let net = abs_net();
        let prop = parse_property("y0 <= 1/2").unwrap();
        let p = encode(&net, &prop).unwrap();

        assert_eq!(p.num_vars(), 8);
        let names: Vec<String> = (0..8).map(|i| p.var_name(VarId(i))).collect();
        assert_eq!(
            names,
            ["x0", "b1_0", "f1_0", "d1_0", "b1_1", "f1_1", "d1_1", "y0"]
        );
        // Rows: two pre-activations, two slacks, one output.
        assert_eq!(p.rows.len(), 5);
        assert_eq!(p.pairs.len(), 2);
        // ReLU lower bound on the post-activations, property bound on y0.
        assert_eq!(p.lower[2], Some(rat_int(0)));
        assert_eq!(p.lower[5], Some(rat_int(0)));
        assert_eq!(p.upper[7], Some(rat(1, 2)));
        assert_eq!(p.lower[7], None);
    }

    #[test]
    fn input_atoms_tighten_network_bounds() {
        let net = abs_net();
        let prop = parse_property("x0 >= 0\nx0 <= 3").unwrap();
        let p = encode(&net, &prop).unwrap();
        // Network gave [-1, 1]; x0 >= 0 tightens the lower side while the
        // looser x0 <= 3 leaves the upper side alone.
        assert_eq!(p.lower[0], Some(rat_int(0)));
        assert_eq!(p.upper[0], Some(rat_int(1)));
    }

    #[test]
    fn negative_coefficient_flips_the_bound_side() {
        let net = abs_net();
        let prop = parse_property("-2*y0 <= 1").unwrap();
        let p = encode(&net, &prop).unwrap();
        // -2*y0 <= 1 is y0 >= -1/2.
        assert_eq!(p.lower[7], Some(rat(-1, 2)));
        assert_eq!(p.upper[7], None);
    }

    #[test]
    fn multi_term_atom_gets_aux_row() {
        let net = abs_net();
        let prop = parse_property("x0 + y0 <= 1").unwrap();
        let p = encode(&net, &prop).unwrap();
        assert_eq!(p.num_vars(), 9);
        let aux = VarId(8);
        assert_eq!(p.var_name(aux), "a0");
        assert_eq!(p.upper[8], Some(rat_int(1)));
        assert_eq!(p.lower[8], None);
        let row = p.rows.last().unwrap();
        assert_eq!(row.defined, aux);
        assert_eq!(
            row.terms,
            vec![(VarId(0), rat_int(1)), (VarId(7), rat_int(1))]
        );
        assert_eq!(row.constant, rat_int(0));
    }

    #[test]
    fn equality_atom_pins_both_sides() {
        let net = abs_net();
        let prop = parse_property("x0 = 1/4").unwrap();
        let p = encode(&net, &prop).unwrap();
        assert_eq!(p.lower[0], Some(rat(1, 4)));
        assert_eq!(p.upper[0], Some(rat(1, 4)));
    }

    #[test]
    fn out_of_range_reference_is_rejected() {
        let net = abs_net();
        let prop = parse_property("x1 >= 0").unwrap();
        assert_eq!(
            encode(&net, &prop),
            Err(EncodeError::IndexOutOfRange {
                var: "x1".into(),
                limit: 1,
                kind: "input",
            })
        );
        let prop = parse_property("y3 >= 0").unwrap();
        assert!(matches!(
            encode(&net, &prop),
            Err(EncodeError::IndexOutOfRange { kind: "output", .. })
        ));
    }

    #[test]
    fn contradictory_bounds_are_let_through() {
        let net = abs_net();
        let prop = parse_property("y0 <= 0\ny0 >= 1").unwrap();
        let p = encode(&net, &prop).unwrap();
        assert_eq!(p.lower[7], Some(rat_int(1)));
        assert_eq!(p.upper[7], Some(rat_int(0)));
    }

    #[test]
    fn output_relu_reuses_post_activations_as_outputs() {
        let mut net = abs_net();
        net.output_relu = true;
        let prop = parse_property("y0 <= 1/2").unwrap();
        let p = encode(&net, &prop).unwrap();
        // Inputs + three (b, f, d) triples; the last f is y0.
        assert_eq!(p.num_vars(), 10);
        assert_eq!(p.pairs.len(), 3);
        let outs = p.output_vars();
        assert_eq!(outs, vec![VarId(8)]);
        assert_eq!(p.var_name(VarId(8)), "y0");
        // ReLU zero floor and the property cap on the same variable.
        assert_eq!(p.lower[8], Some(rat_int(0)));
        assert_eq!(p.upper[8], Some(rat(1, 2)));
    }

    /// Any in-bounds execution of the network satisfies every row and every
    /// bound the encoder produced, except possibly bounds from output atoms
    /// (which the solver, not the network, is responsible for).
    #[test]
    fn concrete_executions_satisfy_the_encoding() {
        let net = abs_net();
        let prop = parse_property("x0 + y0 <= 10").unwrap();
        let p = encode(&net, &prop).unwrap();
        for num in -4..=4 {
            let input = vec![rat(num, 4)];
            let values = concrete_valuation(&p, &input);
            for row in &p.rows {
                assert_eq!(values[row.defined.0], row.rhs_value(&values));
            }
            for (i, value) in values.iter().enumerate() {
                assert!(
                    within_bounds(value, &p.lower[i], &p.upper[i]),
                    "variable {} = {} escapes its bounds",
                    p.var_name(VarId(i)),
                    value
                );
            }
            let outputs = net.evaluate(&input).unwrap();
            let out_vars = p.output_vars();
            assert_eq!(values[out_vars[0].0], outputs[0]);
        }
    }
}
