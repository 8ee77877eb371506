//! Seeded Monte-Carlo execution of protocols.
//!
//! Trial `i` draws its outcomes from a ChaCha8 stream keyed by `(seed, i)`, and trials are
//! reduced in fixed-size batches in index order, so a report is bit-identical whatever the
//! thread count or execution mode.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};
use crate::monotones::monotone_profile;
use crate::scalar::{round_sig12, Scalar, Tolerance};
use crate::schmidt::{schmidt_decompose, BipartiteState};

use super::exhaustive::{advance, Branch};
use super::protocol::{LoccProtocol, LoccStep};

const BATCH: u64 = 2048;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloConfig {
    pub trials: u64,
    pub seed: u64,
    pub execution: Execution,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditEntry {
    pub step: usize,
    pub k: usize,
    #[serde(rename = "avg_E")]
    pub avg_e: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub trials: u64,
    pub successes: u64,
    #[serde(rename = "empirical")]
    pub empirical_probability: f64,
    pub std_error: f64,
    pub predicted: Option<f64>,
    pub seed: u64,
    /// Trial-averaged `E_k` after each step (`step` 0 is the initial state).
    pub audit: Vec<AuditEntry>,
}

impl SimulationReport {
    /// `|p̂ − predicted| ≤ sigmas · std_error`; `None` without a prediction.
    pub fn within(&self, sigmas: f64) -> Option<bool> {
        self.predicted
            .map(|p| (self.empirical_probability - p).abs() <= sigmas * self.std_error.max(f64::EPSILON))
    }

    /// Pretty JSON with floats rounded to 12 significant digits.
    pub fn to_json(&self) -> serde_json::Value {
        let mut rounded = self.clone();
        rounded.empirical_probability = round_sig12(rounded.empirical_probability);
        rounded.std_error = round_sig12(rounded.std_error);
        rounded.predicted = rounded.predicted.map(round_sig12);
        for e in &mut rounded.audit {
            e.avg_e = round_sig12(e.avg_e);
        }
        serde_json::to_value(rounded).expect("report serializes")
    }
}

struct BatchTally {
    successes: u64,
    /// `sums[step * n + (k - 1)]`
    sums: Vec<f64>,
}

/// Samples `trials` independent executions of `protocol` from `initial`.
pub fn monte_carlo_run<S: Scalar>(
    protocol: &LoccProtocol<S>,
    initial: &BipartiteState,
    cfg: &MonteCarloConfig,
    tol: Tolerance,
) -> Result<SimulationReport> {
    if cfg.trials == 0 {
        return Err(Error::Invariant("at least one trial is required".into()));
    }
    let norm = initial.norm_squared();
    if (norm - 1.0).abs() > tol.0 {
        return Err(Error::NotNormalized { total: norm, tolerance: tol.0 });
    }
    let n = initial.dim_a().min(initial.dim_b());
    let levels = protocol.steps().len() + 1;
    let batches = cfg.trials.div_ceil(BATCH);
    let tallies: Vec<Result<BatchTally>> = map_range(batches as usize, cfg.execution, |b| {
        let start = b as u64 * BATCH;
        let end = (start + BATCH).min(cfg.trials);
        let mut tally = BatchTally { successes: 0, sums: vec![0.0; levels * n] };
        for trial in start..end {
            run_trial(protocol, initial, cfg.seed, trial, n, &mut tally)?;
        }
        Ok(tally)
    });

    let mut successes = 0;
    let mut sums = vec![0.0; levels * n];
    for t in tallies {
        let t = t?;
        successes += t.successes;
        for (acc, x) in sums.iter_mut().zip(&t.sums) {
            *acc += x;
        }
    }
    let trials = cfg.trials;
    let p = successes as f64 / trials as f64;
    let audit = (0..levels)
        .flat_map(|step| (1..=n).map(move |k| (step, k)))
        .map(|(step, k)| AuditEntry { step, k, avg_e: sums[step * n + k - 1] / trials as f64 })
        .collect();
    Ok(SimulationReport {
        trials,
        successes,
        empirical_probability: p,
        std_error: (p * (1.0 - p) / trials as f64).sqrt(),
        predicted: protocol.predicted().map(Scalar::to_f64),
        seed: cfg.seed,
        audit,
    })
}

fn run_trial<S: Scalar>(
    protocol: &LoccProtocol<S>,
    initial: &BipartiteState,
    seed: u64,
    trial: u64,
    n: usize,
    tally: &mut BatchTally,
) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let mut branch: Branch<S> =
        Branch { history: Vec::new(), probability: 1.0, state: initial.clone(), exact: None };
    record(&branch.state, 0, n, &mut tally.sums)?;
    for (index, step) in protocol.steps().iter().enumerate() {
        let mut children = advance(&branch, index, step);
        branch = if children.len() == 1 {
            children.pop().unwrap()
        } else {
            debug_assert!(matches!(step, LoccStep::Measure { .. }));
            let total: f64 = children.iter().map(|c| c.probability).sum();
            let u: f64 = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = children.len() - 1;
            for (i, c) in children.iter().enumerate() {
                acc += c.probability;
                if u < acc {
                    chosen = i;
                    break;
                }
            }
            children.swap_remove(chosen)
        };
        // keep conditional probabilities relative to this trial's path
        branch.probability = 1.0;
        record(&branch.state, index + 1, n, &mut tally.sums)?;
    }
    if protocol.success().holds(&branch.history) {
        tally.successes += 1;
    }
    Ok(())
}

fn record(state: &BipartiteState, level: usize, n: usize, sums: &mut [f64]) -> Result<()> {
    let sv = schmidt_decompose(state, Tolerance(1e-6), false)?;
    for (k, e) in monotone_profile(&sv).values().iter().enumerate() {
        sums[level * n + k] += e;
    }
    Ok(())
}
