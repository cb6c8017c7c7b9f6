//! Feed-forward ReLU networks: in-memory representation, exact forward
//! evaluation, and a seed-reproducible random generator.

use crate::rat::{rat_int, Rat};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};

/// Input normalization constants carried by the network file.
///
/// These are metadata: they are parsed and re-serialized but play no role in
/// evaluation or encoding unless explicitly applied via
/// [`Network::with_input_normalization`]. `means` and `ranges` have one entry
/// per input plus a final entry for the outputs, following the file layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalization {
    pub means: Vec<Rat>,
    pub ranges: Vec<Rat>,
}

impl Normalization {
    /// Identity normalization (means 0, ranges 1) for `num_inputs` inputs.
    pub fn identity(num_inputs: usize) -> Self {
        Normalization {
            means: vec![Rat::zero(); num_inputs + 1],
            ranges: vec![rat_int(1); num_inputs + 1],
        }
    }
}

/// A layered feed-forward network with ReLU hidden activations and an affine
/// output layer (optionally ReLU-activated for synthetic tests).
///
/// `weights[k]` maps layer `k` activations (layer 0 = inputs) to layer `k+1`
/// pre-activations; it has `layer_dims[k+1]` rows of `layer_dims[k]` entries.
/// Values are immutable after construction and safe to share across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    pub layer_dims: Vec<usize>,
    pub weights: Vec<Vec<Vec<Rat>>>,
    pub biases: Vec<Vec<Rat>>,
    /// Per-input lower bounds; `None` means unbounded below.
    pub input_lower: Vec<Option<Rat>>,
    /// Per-input upper bounds; `None` means unbounded above.
    pub input_upper: Vec<Option<Rat>>,
    pub normalization: Normalization,
    /// When set, the final layer applies ReLU as well. Off for the standard
    /// file convention.
    pub output_relu: bool,
}

/// Shape or arity violations when assembling or evaluating a network.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NetworkError {
    #[error("network needs at least an input and an output layer, got {0} layer dims")]
    TooFewLayers(usize),
    #[error("expected {expected} weight blocks, got {got}")]
    WeightBlockCount { expected: usize, got: usize },
    #[error("layer {layer}: expected {expected} x {expected_cols} weight matrix, got {rows} x {cols}")]
    WeightShape {
        layer: usize,
        expected: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },
    #[error("layer {layer}: expected {expected} biases, got {got}")]
    BiasShape {
        layer: usize,
        expected: usize,
        got: usize,
    },
    #[error("expected {expected} input bounds, got {got}")]
    BoundShape { expected: usize, got: usize },
    #[error("input {index}: lower bound exceeds upper bound")]
    CrossedInputBounds { index: usize },
    #[error("input arity mismatch: network takes {expected} inputs, got {got}")]
    ArityMismatch { expected: usize, got: usize },
}

impl Network {
    /// Builds a network and checks that all shapes chain.
    pub fn new(
        layer_dims: Vec<usize>,
        weights: Vec<Vec<Vec<Rat>>>,
        biases: Vec<Vec<Rat>>,
        input_lower: Vec<Option<Rat>>,
        input_upper: Vec<Option<Rat>>,
    ) -> Result<Self, NetworkError> {
        if layer_dims.len() < 2 {
            return Err(NetworkError::TooFewLayers(layer_dims.len()));
        }
        let steps = layer_dims.len() - 1;
        if weights.len() != steps || biases.len() != steps {
            return Err(NetworkError::WeightBlockCount {
                expected: steps,
                got: weights.len().min(biases.len()),
            });
        }
        for k in 0..steps {
            let rows = weights[k].len();
            let cols = weights[k].first().map_or(0, |r| r.len());
            if rows != layer_dims[k + 1] || weights[k].iter().any(|r| r.len() != layer_dims[k]) {
                return Err(NetworkError::WeightShape {
                    layer: k,
                    expected: layer_dims[k + 1],
                    expected_cols: layer_dims[k],
                    rows,
                    cols,
                });
            }
            if biases.get(k).map_or(0, |b| b.len()) != layer_dims[k + 1] {
                return Err(NetworkError::BiasShape {
                    layer: k,
                    expected: layer_dims[k + 1],
                    got: biases.get(k).map_or(0, |b| b.len()),
                });
            }
        }
        let n_in = layer_dims[0];
        if input_lower.len() != n_in || input_upper.len() != n_in {
            return Err(NetworkError::BoundShape {
                expected: n_in,
                got: input_lower.len().max(input_upper.len()),
            });
        }
        for i in 0..n_in {
            if let (Some(lo), Some(hi)) = (&input_lower[i], &input_upper[i]) {
                if lo > hi {
                    return Err(NetworkError::CrossedInputBounds { index: i });
                }
            }
        }
        Ok(Network {
            normalization: Normalization::identity(n_in),
            layer_dims,
            weights,
            biases,
            input_lower,
            input_upper,
            output_relu: false,
        })
    }

    pub fn num_inputs(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn num_outputs(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    /// Number of hidden neurons, i.e. ReLU pairs the encoder will introduce
    /// (plus the outputs when `output_relu` is set).
    pub fn num_relus(&self) -> usize {
        let hidden: usize = self.layer_dims[1..self.layer_dims.len() - 1].iter().sum();
        if self.output_relu {
            hidden + self.num_outputs()
        } else {
            hidden
        }
    }

    /// Exact forward pass. Hidden layers apply `max(0, .)` elementwise; the
    /// final layer is affine unless `output_relu` is set.
    pub fn evaluate(&self, input: &[Rat]) -> Result<Vec<Rat>, NetworkError> {
        if input.len() != self.num_inputs() {
            return Err(NetworkError::ArityMismatch {
                expected: self.num_inputs(),
                got: input.len(),
            });
        }
        let mut acts: Vec<Rat> = input.to_vec();
        let steps = self.layer_dims.len() - 1;
        for k in 0..steps {
            let mut next = Vec::with_capacity(self.layer_dims[k + 1]);
            for (row, bias) in self.weights[k].iter().zip(&self.biases[k]) {
                let mut v = bias.clone();
                for (w, a) in row.iter().zip(&acts) {
                    v += w * a;
                }
                next.push(v);
            }
            let is_last = k + 1 == steps;
            if !is_last || self.output_relu {
                for v in &mut next {
                    if v.is_negative() {
                        *v = Rat::zero();
                    }
                }
            }
            acts = next;
        }
        Ok(acts)
    }

    /// Returns a network equivalent to `self` applied to normalized inputs
    /// `(x - mean) / range`, folded into the first layer as an affine
    /// pre-transform. Input bounds keep their raw units.
    pub fn with_input_normalization(&self) -> Network {
        let n_in = self.num_inputs();
        let mut out = self.clone();
        let means = &self.normalization.means[..n_in];
        let ranges = &self.normalization.ranges[..n_in];
        for (row, bias) in out.weights[0].iter_mut().zip(out.biases[0].iter_mut()) {
            for j in 0..n_in {
                let scaled = &row[j] / &ranges[j];
                *bias -= &scaled * &means[j];
                row[j] = scaled;
            }
        }
        out
    }
}

/// Recipe for a reproducible random network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetGenSpec {
    pub layer_dims: Vec<usize>,
    /// Closed interval the weights and biases are drawn from.
    pub weight_range: (Rat, Rat),
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("generation needs at least 2 layer dims, got {0}")]
    TooFewLayers(usize),
    #[error("layer dims must be positive")]
    ZeroDim,
    #[error("weight range is empty")]
    EmptyRange,
    #[error("weight range contains no multiple of 1/{denom}")]
    NoRepresentableWeight { denom: u64 },
}

// 64-bit linear congruential generator (Knuth's MMIX constants). The stream
// is part of the generator's contract: identical specs must give identical
// networks across builds and platforms.
const LCG_MUL: u64 = 6364136223846793005;
const LCG_INC: u64 = 1442695040888963407;

/// Denominator of all generated weights and biases.
pub const GEN_DENOMINATOR: u64 = 100;

#[derive(Debug, Clone)]
struct Lcg {
    state: u64,
}

impl Lcg {
    fn new(seed: u64) -> Self {
        Lcg { state: seed }
    }

    /// Advances the state and returns the top 31 bits.
    fn next(&mut self) -> u64 {
        self.state = self.state.wrapping_mul(LCG_MUL).wrapping_add(LCG_INC);
        self.state >> 33
    }

    fn in_range(&mut self, lo: i64, hi: i64) -> i64 {
        let span = (hi - lo + 1) as u64;
        lo + (self.next() % span) as i64
    }
}

/// Deterministic per-instance seed stream: instance `i` uses the `i+1`-th
/// state of the LCG run from `seed`.
pub fn derive_seed(seed: u64, instance: usize) -> u64 {
    let mut s = seed;
    for _ in 0..=instance {
        s = s.wrapping_mul(LCG_MUL).wrapping_add(LCG_INC);
    }
    s
}

/// Generates a network as a pure function of the spec.
///
/// Weights and biases are `numerator / 100` with the numerator drawn
/// uniformly (modulo reduction) from the integers that keep the value inside
/// `weight_range`. Draw order is layer by layer: all weight rows in row-major
/// order, then that layer's biases. Input bounds default to `[-1, 1]`.
pub fn generate_network(spec: &NetGenSpec) -> Result<Network, GenError> {
    if spec.layer_dims.len() < 2 {
        return Err(GenError::TooFewLayers(spec.layer_dims.len()));
    }
    if spec.layer_dims.iter().any(|&d| d == 0) {
        return Err(GenError::ZeroDim);
    }
    let (lo, hi) = &spec.weight_range;
    if lo > hi {
        return Err(GenError::EmptyRange);
    }
    let denom = BigInt::from(GEN_DENOMINATOR);
    let lo_n = (lo * Rat::from_integer(denom.clone())).ceil().to_integer();
    let hi_n = (hi * Rat::from_integer(denom.clone())).floor().to_integer();
    if lo_n > hi_n {
        return Err(GenError::NoRepresentableWeight {
            denom: GEN_DENOMINATOR,
        });
    }
    let lo_n = i64::try_from(&lo_n).map_err(|_| GenError::EmptyRange)?;
    let hi_n = i64::try_from(&hi_n).map_err(|_| GenError::EmptyRange)?;

    let mut rng = Lcg::new(spec.seed);
    let draw = |rng: &mut Lcg| Rat::new(BigInt::from(rng.in_range(lo_n, hi_n)), denom.clone());

    let dims = &spec.layer_dims;
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for k in 0..dims.len() - 1 {
        let mut mat = Vec::with_capacity(dims[k + 1]);
        for _ in 0..dims[k + 1] {
            mat.push((0..dims[k]).map(|_| draw(&mut rng)).collect::<Vec<_>>());
        }
        weights.push(mat);
        biases.push((0..dims[k + 1]).map(|_| draw(&mut rng)).collect());
    }
    let n_in = dims[0];
    Ok(Network::new(
        dims.clone(),
        weights,
        biases,
        vec![Some(rat_int(-1)); n_in],
        vec![Some(rat_int(1)); n_in],
    )
    .expect("generated shapes chain by construction"))
}
