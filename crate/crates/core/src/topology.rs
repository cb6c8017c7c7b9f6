//! Deep-narrow versus shallow-wide benchmark.
//!
//! Generates matched pairs of networks — `[2,3,3,3,3,1]` against `[2,12,1]`,
//! both 12 hidden ReLUs — from the same per-index seed, runs the same
//! output-threshold queries on each, and reports per-instance and aggregate
//! solver effort. The report states the comparison; it does not assert a
//! winner.
//!
//! Determinism: verdicts and counter statistics depend only on `(seed, cfg)`.
//! Wall-clock fields naturally differ between runs, so
//! [`BenchReport::comparable_json`] serializes the report with timing zeroed
//! for byte-for-byte comparisons. Termination is bounded by a split cap
//! rather than a wall clock, which would make verdicts machine-dependent.

use crate::encode::encode;
use crate::network::{derive_seed, generate_network, NetGenSpec};
use crate::property::{LinearAtom, Property, Relation, VarRef};
use crate::rat::{format_exact, rat, rat_int, Rat};
use crate::search::{solve, validate_counterexample, SolveConfig, SolveStats, Verdict};
use serde::Serialize;
use std::fmt::Write as _;
use std::time::Duration;

pub const DEEP_DIMS: &[usize] = &[2, 3, 3, 3, 3, 1];
pub const WIDE_DIMS: &[usize] = &[2, 12, 1];

/// Split cap applied when the caller sets none; keeps every instance finite
/// without involving the wall clock.
pub const DEFAULT_BENCH_MAX_SPLITS: u64 = 10_000;

/// Upper thresholds for the query family `y0 <= t`, cycled by instance
/// index. Chosen to straddle the output ranges that ±1-bounded weights on
/// [-1, 1] inputs typically produce.
fn thresholds() -> Vec<Rat> {
    vec![
        rat_int(1),
        rat(1, 2),
        rat(1, 4),
        rat_int(0),
        rat(-1, 4),
        rat(-1, 2),
        rat_int(-1),
        rat_int(-2),
    ]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InstanceRecord {
    pub topology: String,
    pub layer_dims: Vec<usize>,
    pub pair_count: usize,
    pub instance: usize,
    pub seed: u64,
    /// Exact rendering of the query threshold in `y0 <= t`.
    pub threshold: String,
    pub verdict: String,
    /// `Some(true)` when a Sat verdict replayed exactly; `None` otherwise.
    pub validated: Option<bool>,
    pub stats: SolveStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopologyAggregate {
    pub topology: String,
    pub layer_dims: Vec<usize>,
    pub instances: usize,
    pub sat: usize,
    pub unsat: usize,
    pub resource_out: usize,
    /// Medians over completed (non-ResourceOut) instances; `None` when
    /// nothing completed.
    pub median_splits: Option<f64>,
    pub median_pivots: Option<f64>,
    pub median_lp_checks: Option<f64>,
    pub median_wall_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub seed: u64,
    pub instances_per_topology: usize,
    pub split_threshold: u64,
    pub max_splits: Option<u64>,
    pub records: Vec<InstanceRecord>,
    pub aggregates: Vec<TopologyAggregate>,
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// JSON with every wall-clock field zeroed: equal for equal `(seed, cfg)`
    /// runs, byte for byte.
    pub fn comparable_json(&self) -> String {
        let mut copy = self.clone();
        for record in &mut copy.records {
            record.stats.wall_time = Duration::ZERO;
        }
        for agg in &mut copy.aggregates {
            agg.median_wall_ms = agg.median_wall_ms.map(|_| 0.0);
        }
        copy.to_json()
    }

    /// Aligned plain-text summary table.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<6} {:>16} {:>5} {:>5} {:>7} {:>10} {:>10} {:>10} {:>12}",
            "label", "dims", "sat", "unsat", "res-out", "med.splits", "med.pivots", "med.lp", "med.wall-ms"
        );
        for agg in &self.aggregates {
            let dims = agg
                .layer_dims
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join("x");
            let _ = writeln!(
                out,
                "{:<6} {:>16} {:>5} {:>5} {:>7} {:>10} {:>10} {:>10} {:>12}",
                agg.topology,
                dims,
                agg.sat,
                agg.unsat,
                agg.resource_out,
                fmt_median(agg.median_splits),
                fmt_median(agg.median_pivots),
                fmt_median(agg.median_lp_checks),
                fmt_median(agg.median_wall_ms),
            );
        }
        out
    }
}

fn fmt_median(m: Option<f64>) -> String {
    match m {
        Some(v) => format!("{v:.1}"),
        None => "-".to_string(),
    }
}

fn verdict_label(v: &Verdict) -> String {
    match v {
        Verdict::Sat { .. } => "sat".to_string(),
        Verdict::Unsat => "unsat".to_string(),
        Verdict::ResourceOut(limit) => format!("resource-out:{limit}"),
    }
}

/// Run the benchmark: `instances_per_topology` seeded instances for each of
/// the deep and wide shapes, identical seeds and queries across the pair.
/// Sat verdicts are replay-validated before entering the report.
///
/// The configured timeout is ignored (verdicts must not depend on machine
/// speed); when `cfg.max_splits` is unset, [`DEFAULT_BENCH_MAX_SPLITS`]
/// bounds each instance instead.
pub fn run_bench(seed: u64, instances_per_topology: usize, cfg: &SolveConfig) -> BenchReport {
    assert!(instances_per_topology >= 1, "need at least one instance");
    let mut config = cfg.clone();
    config.timeout = Duration::MAX;
    if config.max_splits.is_none() {
        config.max_splits = Some(DEFAULT_BENCH_MAX_SPLITS);
    }
    let sweep = thresholds();
    let topologies: [(&str, &[usize]); 2] = [("deep", DEEP_DIMS), ("wide", WIDE_DIMS)];
    let mut records = Vec::new();
    for (label, dims) in topologies {
        for instance in 0..instances_per_topology {
            let instance_seed = derive_seed(seed, instance);
            let net = generate_network(&NetGenSpec {
                layer_dims: dims.to_vec(),
                weight_range: (rat_int(-1), rat_int(1)),
                seed: instance_seed,
            })
            .expect("benchmark topology specs are valid");
            let threshold = sweep[instance % sweep.len()].clone();
            let atom = LinearAtom::new(
                vec![(rat_int(1), VarRef::Output(0))],
                Relation::Le,
                threshold.clone(),
            )
            .expect("single-term atom is never degenerate");
            let prop = Property { atoms: vec![atom] };
            let problem = encode(&net, &prop).expect("y0 exists in both topologies");
            let (verdict, stats) = solve(&problem, &config);
            let validated = match &verdict {
                Verdict::Sat { .. } => {
                    let v = validate_counterexample(&net, &prop, &problem, &verdict);
                    assert!(
                        v.passed(),
                        "instance {label}/{instance}: Sat verdict failed validation: {v}"
                    );
                    Some(true)
                }
                _ => None,
            };
            log::info!(
                "bench {label}/{instance}: verdict {} after {} splits, {} pivots",
                verdict_label(&verdict),
                stats.splits,
                stats.pivots
            );
            records.push(InstanceRecord {
                topology: label.to_string(),
                layer_dims: dims.to_vec(),
                pair_count: problem.pairs.len(),
                instance,
                seed: instance_seed,
                threshold: format_exact(&threshold),
                verdict: verdict_label(&verdict),
                validated,
                stats,
            });
        }
    }
    let aggregates = topologies
        .iter()
        .map(|(label, dims)| aggregate(label, dims, &records))
        .collect();
    BenchReport {
        seed,
        instances_per_topology,
        split_threshold: config.split_threshold,
        max_splits: config.max_splits,
        records,
        aggregates,
    }
}

fn aggregate(label: &str, dims: &[usize], records: &[InstanceRecord]) -> TopologyAggregate {
    let mine: Vec<&InstanceRecord> = records.iter().filter(|r| r.topology == label).collect();
    let completed: Vec<&InstanceRecord> = mine
        .iter()
        .copied()
        .filter(|r| !r.verdict.starts_with("resource-out"))
        .collect();
    TopologyAggregate {
        topology: label.to_string(),
        layer_dims: dims.to_vec(),
        instances: mine.len(),
        sat: mine.iter().filter(|r| r.verdict == "sat").count(),
        unsat: mine.iter().filter(|r| r.verdict == "unsat").count(),
        resource_out: mine.len() - completed.len(),
        median_splits: median(completed.iter().map(|r| r.stats.splits as f64)),
        median_pivots: median(completed.iter().map(|r| r.stats.pivots as f64)),
        median_lp_checks: median(completed.iter().map(|r| r.stats.lp_checks as f64)),
        median_wall_ms: median(
            completed
                .iter()
                .map(|r| r.stats.wall_time.as_secs_f64() * 1000.0),
        ),
    }
}

fn median(values: impl Iterator<Item = f64>) -> Option<f64> {
    let mut v: Vec<f64> = values.collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in medians"));
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    })
}
