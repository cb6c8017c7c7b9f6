//! Shared fixtures for the criterion benchmarks: deterministic networks and
//! properties representative of the workloads the solver sees.

use relusat_core::encode::encode;
use relusat_core::network::{generate_network, NetGenSpec};
use relusat_core::problem::VerificationProblem;
use relusat_core::property::parse_property;
use relusat_core::rat::rat_int;
use relusat_core::topology::{DEEP_DIMS, WIDE_DIMS};
use relusat_core::{serialize_network, Network, Property};

fn instance(dims: &[usize], seed: u64, property: &str) -> (Network, Property) {
    let net = generate_network(&NetGenSpec {
        layer_dims: dims.to_vec(),
        weight_range: (rat_int(-1), rat_int(1)),
        seed,
    })
    .expect("fixture dims are valid");
    let prop = parse_property(property).expect("fixture property parses");
    (net, prop)
}

/// Narrow-and-deep problem: 12 ReLU pairs spread over four hidden layers.
pub fn deep_problem() -> VerificationProblem {
    let (net, prop) = instance(DEEP_DIMS, 7, "y0 <= 1/4");
    encode(&net, &prop).expect("fixture encodes")
}

/// Shallow-and-wide problem: 12 ReLU pairs in one hidden layer.
pub fn wide_problem() -> VerificationProblem {
    let (net, prop) = instance(WIDE_DIMS, 7, "y0 <= 1/4");
    encode(&net, &prop).expect("fixture encodes")
}

/// Small problem (6 pairs) where exhausting all 64 phase patterns is still
/// affordable, for lazy-versus-eager comparisons.
pub fn small_problem() -> VerificationProblem {
    let (net, prop) = instance(&[2, 3, 3, 1], 11, "y0 >= 1/2");
    encode(&net, &prop).expect("fixture encodes")
}

/// Serialized mid-size network (1,980 weights) for parser benchmarks.
pub fn medium_network_text() -> String {
    let net = generate_network(&NetGenSpec {
        layer_dims: vec![3, 30, 30, 30, 3],
        weight_range: (rat_int(-1), rat_int(1)),
        seed: 3,
    })
    .expect("fixture dims are valid");
    serialize_network(&net)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_well_formed() {
        assert_eq!(deep_problem().pairs.len(), 12);
        assert_eq!(wide_problem().pairs.len(), 12);
        assert_eq!(small_problem().pairs.len(), 6);
        assert!(medium_network_text().contains("3,30,30,30,3"));
    }
}
