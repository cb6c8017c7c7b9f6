//! Text format for feed-forward networks, following the layout used by the
//! published ACAS Xu controller files.
//!
//! Layout, in order (comma-separated values, `//` comment lines and blank
//! lines ignored):
//!
//! ```text
//! numLayers, inputSize, outputSize, maxLayerSize
//! layer sizes (numLayers + 1 values)
//! flag (unused, conventionally 0)
//! input minimums                     (inputSize values)
//! input maximums                     (inputSize values)
//! normalization means                (inputSize + 1 values)
//! normalization ranges               (inputSize + 1 values)
//! per layer: weight rows (one row per line), then biases (one per line)
//! ```
//!
//! All numeric literals are decimals and convert exactly to rationals. As an
//! extension over the published files, the serializer may emit `p/q` fraction
//! literals for values with no finite decimal expansion and `inf` / `-inf`
//! for missing input bounds; the parser reads all of these back exactly, so
//! parse-serialize round-trips are lossless.

use crate::network::{Network, Normalization};
use crate::rat::{format_exact, parse_number, Rat};

/// Parse-time options.
#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    /// Treat the output layer as ReLU-activated instead of affine. Off for
    /// the standard file convention; used by synthetic tests.
    pub output_relu: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NnetError {
    #[error("empty network file")]
    Empty,
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: dimension mismatch: {reason}")]
    DimensionMismatch { line: usize, reason: String },
    #[error("line {line}: non-numeric token `{token}`")]
    NonNumeric { line: usize, token: String },
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
    /// Number of the last physical line, for end-of-file diagnostics.
    last_line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            iter: text.lines().enumerate(),
            last_line: text.lines().count(),
        }
    }

    /// Next non-comment, non-blank line as (1-based number, trimmed text).
    fn next_data(&mut self) -> Option<(usize, &'a str)> {
        for (idx, raw) in self.iter.by_ref() {
            let t = raw.trim();
            if t.is_empty() || t.starts_with("//") {
                continue;
            }
            return Some((idx + 1, t));
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str), NnetError> {
        self.next_data().ok_or_else(|| NnetError::DimensionMismatch {
            line: self.last_line,
            reason: format!("unexpected end of file, expected {what}"),
        })
    }
}

fn tokens(line: &str) -> impl Iterator<Item = &str> {
    line.split(',').map(str::trim).filter(|t| !t.is_empty())
}

fn parse_usize_row(line: &str, lineno: usize, what: &str) -> Result<Vec<usize>, NnetError> {
    let mut out = Vec::new();
    for tok in tokens(line) {
        out.push(tok.parse::<usize>().map_err(|_| NnetError::NonNumeric {
            line: lineno,
            token: tok.to_string(),
        })?);
    }
    if out.is_empty() {
        return Err(NnetError::Malformed {
            line: lineno,
            reason: format!("expected {what}"),
        });
    }
    Ok(out)
}

fn parse_rat_row(
    line: &str,
    lineno: usize,
    expected: usize,
    what: &str,
) -> Result<Vec<Rat>, NnetError> {
    let mut out = Vec::new();
    for tok in tokens(line) {
        out.push(parse_number(tok).map_err(|_| NnetError::NonNumeric {
            line: lineno,
            token: tok.to_string(),
        })?);
    }
    if out.len() != expected {
        return Err(NnetError::DimensionMismatch {
            line: lineno,
            reason: format!("expected {expected} values for {what}, got {}", out.len()),
        });
    }
    Ok(out)
}

/// Like [`parse_rat_row`] but admits `inf` / `-inf` for unbounded entries.
fn parse_bound_row(
    line: &str,
    lineno: usize,
    expected: usize,
    what: &str,
) -> Result<Vec<Option<Rat>>, NnetError> {
    let mut out = Vec::new();
    for tok in tokens(line) {
        let lower = tok.to_ascii_lowercase();
        if matches!(lower.as_str(), "inf" | "+inf" | "-inf") {
            out.push(None);
            continue;
        }
        out.push(Some(parse_number(tok).map_err(|_| NnetError::NonNumeric {
            line: lineno,
            token: tok.to_string(),
        })?));
    }
    if out.len() != expected {
        return Err(NnetError::DimensionMismatch {
            line: lineno,
            reason: format!("expected {expected} values for {what}, got {}", out.len()),
        });
    }
    Ok(out)
}

/// Parses a network file with default options (affine output layer).
pub fn parse_network(text: &str) -> Result<Network, NnetError> {
    parse_network_with(text, &ParseOptions::default())
}

pub fn parse_network_with(text: &str, opts: &ParseOptions) -> Result<Network, NnetError> {
    let mut lines = Lines::new(text);

    let (lineno, header) = lines.next_data().ok_or(NnetError::Empty)?;
    let header = parse_usize_row(header, lineno, "header")?;
    if header.len() != 4 {
        return Err(NnetError::Malformed {
            line: lineno,
            reason: format!("header needs 4 values (layers, inputs, outputs, max layer size), got {}", header.len()),
        });
    }
    let (num_layers, input_size, output_size) = (header[0], header[1], header[2]);
    if num_layers == 0 || input_size == 0 || output_size == 0 {
        return Err(NnetError::Malformed {
            line: lineno,
            reason: "header sizes must be positive".to_string(),
        });
    }

    let (lineno, sizes_line) = lines.expect("layer sizes")?;
    let layer_dims = parse_usize_row(sizes_line, lineno, "layer sizes")?;
    if layer_dims.len() != num_layers + 1 {
        return Err(NnetError::DimensionMismatch {
            line: lineno,
            reason: format!(
                "header declares {} layers so {} sizes are required, got {}",
                num_layers,
                num_layers + 1,
                layer_dims.len()
            ),
        });
    }
    if layer_dims[0] != input_size || layer_dims[num_layers] != output_size {
        return Err(NnetError::DimensionMismatch {
            line: lineno,
            reason: format!(
                "layer sizes {:?} disagree with declared input/output sizes {}/{}",
                layer_dims, input_size, output_size
            ),
        });
    }
    if layer_dims.iter().any(|&d| d == 0) {
        return Err(NnetError::Malformed {
            line: lineno,
            reason: "layer sizes must be positive".to_string(),
        });
    }

    // Unused flag line, conventionally "0".
    let (lineno, flag_line) = lines.expect("flag line")?;
    parse_usize_row(flag_line, lineno, "flag")?;

    let (lineno, mins) = lines.expect("input minimums")?;
    let input_lower = parse_bound_row(mins, lineno, input_size, "input minimums")?;
    let (lineno, maxs) = lines.expect("input maximums")?;
    let input_upper = parse_bound_row(maxs, lineno, input_size, "input maximums")?;
    for i in 0..input_size {
        if let (Some(lo), Some(hi)) = (&input_lower[i], &input_upper[i]) {
            if lo > hi {
                return Err(NnetError::Malformed {
                    line: lineno,
                    reason: format!("input {i}: minimum exceeds maximum"),
                });
            }
        }
    }

    let (lineno, means_line) = lines.expect("normalization means")?;
    let means = parse_rat_row(means_line, lineno, input_size + 1, "normalization means")?;
    let (lineno, ranges_line) = lines.expect("normalization ranges")?;
    let ranges = parse_rat_row(ranges_line, lineno, input_size + 1, "normalization ranges")?;

    let mut weights = Vec::with_capacity(num_layers);
    let mut biases = Vec::with_capacity(num_layers);
    for k in 0..num_layers {
        let (rows, cols) = (layer_dims[k + 1], layer_dims[k]);
        let mut mat = Vec::with_capacity(rows);
        for i in 0..rows {
            let (lineno, row) = lines.expect(&format!("weight row {i} of layer {}", k + 1))?;
            mat.push(parse_rat_row(row, lineno, cols, &format!("weight row of layer {}", k + 1))?);
        }
        let mut bias = Vec::with_capacity(rows);
        for i in 0..rows {
            let (lineno, b) = lines.expect(&format!("bias {i} of layer {}", k + 1))?;
            let vals = parse_rat_row(b, lineno, 1, &format!("bias of layer {}", k + 1))?;
            bias.push(vals.into_iter().next().unwrap());
        }
        weights.push(mat);
        biases.push(bias);
    }

    if let Some((lineno, _)) = lines.next_data() {
        return Err(NnetError::DimensionMismatch {
            line: lineno,
            reason: "trailing data after final bias block".to_string(),
        });
    }

    let mut net = Network::new(layer_dims, weights, biases, input_lower, input_upper)
        .map_err(|e| NnetError::Malformed {
            line: 0,
            reason: e.to_string(),
        })?;
    net.normalization = Normalization { means, ranges };
    net.output_relu = opts.output_relu;
    Ok(net)
}

fn push_row<'a>(out: &mut String, vals: impl Iterator<Item = &'a Rat>) {
    for v in vals {
        out.push_str(&format_exact(v));
        out.push(',');
    }
    out.push('\n');
}

/// Serializes a network in the same text layout the parser reads.
///
/// Parsing the result yields a network equal field by field to the input
/// (except for the `output_relu` flag, which is a parse option rather than
/// file content).
pub fn serialize_network(net: &Network) -> String {
    let dims = &net.layer_dims;
    let num_layers = dims.len() - 1;
    let mut out = String::new();
    out.push_str("// Feed-forward ReLU network\n");
    out.push_str(&format!(
        "{},{},{},{},\n",
        num_layers,
        dims[0],
        dims[num_layers],
        dims.iter().copied().max().unwrap()
    ));
    for d in dims {
        out.push_str(&format!("{d},"));
    }
    out.push('\n');
    out.push_str("0,\n");
    for (bound, inf) in [(&net.input_lower, "-inf"), (&net.input_upper, "inf")] {
        for b in bound {
            match b {
                Some(v) => out.push_str(&format_exact(v)),
                None => out.push_str(inf),
            }
            out.push(',');
        }
        out.push('\n');
    }
    push_row(&mut out, net.normalization.means.iter());
    push_row(&mut out, net.normalization.ranges.iter());
    for k in 0..num_layers {
        for row in &net.weights[k] {
            push_row(&mut out, row.iter());
        }
        for b in &net.biases[k] {
            push_row(&mut out, std::iter::once(b));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{generate_network, NetGenSpec};
    use crate::rat::{rat, rat_int};
    use num_traits::Zero;

    const IDENTITY: &str = "\
// y = ReLU(x)
2,1,1,1,
1,1,1,
0,
-inf,
inf,
0,0,
1,1,
1.0,
0.0,
1.0,
0.0,
";

    #[test]
    fn parses_identity_network() {
        let net = parse_network(IDENTITY).unwrap();
        assert_eq!(net.layer_dims, vec![1, 1, 1]);
        assert_eq!(net.evaluate(&[rat_int(-3)]).unwrap(), vec![Rat::zero()]);
        assert_eq!(net.evaluate(&[rat_int(2)]).unwrap(), vec![rat_int(2)]);
    }

    #[test]
    fn decimal_weights_parse_exactly() {
        let text = IDENTITY.replace("1.0", "0.1");
        let net = parse_network(&text).unwrap();
        assert_eq!(net.weights[0][0][0], rat(1, 10));
        assert_eq!(net.weights[1][0][0], rat(1, 10));
    }

    #[test]
    fn missing_weight_block_is_dimension_mismatch() {
        // header claims 3 layers but only 2 weight blocks are present
        let text = "\
3,1,1,1,
1,1,1,1,
0,
-1,
1,
0,0,
1,1,
1.0,
0.0,
1.0,
0.0,
";
        match parse_network(text) {
            Err(NnetError::DimensionMismatch { .. }) => {}
            other => panic!("expected dimension mismatch, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_reported() {
        assert_eq!(parse_network(""), Err(NnetError::Empty));
        assert_eq!(parse_network("// only comments\n"), Err(NnetError::Empty));
    }

    #[test]
    fn non_numeric_token_carries_line() {
        let text = IDENTITY.replace("0.0,\n1.0", "zebra,\n1.0");
        match parse_network(&text) {
            Err(NnetError::NonNumeric { line, token }) => {
                assert!(line > 0);
                assert_eq!(token, "zebra");
            }
            other => panic!("expected non-numeric error, got {other:?}"),
        }
    }

    #[test]
    fn header_layer_size_disagreement() {
        let text = IDENTITY.replace("1,1,1,\n", "1,2,1,\n");
        assert!(matches!(
            parse_network(&text),
            Err(NnetError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn round_trip_generated_network() {
        let net = generate_network(&NetGenSpec {
            layer_dims: vec![3, 4, 2, 2],
            weight_range: (rat_int(-1), rat_int(1)),
            seed: 99,
        })
        .unwrap();
        let text = serialize_network(&net);
        let back = parse_network(&text).unwrap();
        assert_eq!(net, back);
        // serializing again is stable
        assert_eq!(text, serialize_network(&back));
    }

    #[test]
    fn round_trip_unbounded_inputs_and_fractions() {
        let mut net = generate_network(&NetGenSpec {
            layer_dims: vec![2, 2, 1],
            weight_range: (rat_int(-1), rat_int(1)),
            seed: 5,
        })
        .unwrap();
        net.input_lower[0] = None;
        net.input_upper[1] = None;
        net.weights[0][0][0] = rat(1, 3); // no finite decimal expansion
        let back = parse_network(&serialize_network(&net)).unwrap();
        assert_eq!(net, back);
    }

    #[test]
    fn output_relu_parse_option() {
        let opts = ParseOptions { output_relu: true };
        let net = parse_network_with(IDENTITY, &opts).unwrap();
        assert!(net.output_relu);
        assert_eq!(net.num_relus(), 2);
    }
}
