//! Monte Carlo simulation of the estimation protocol.
//!
//! Each trial draws `α` uniformly from `[0, π/2]`, prepares the output state
//! by explicit dilation, samples a POVM outcome and scores the squared error.
//!
//! Trials are split into fixed-size chunks. Chunk `k` draws from ChaCha8
//! seeded with the user seed on stream `k`, so a report depends only on
//! `(seed, trials)` and not on the number of worker threads. Chunk sums are
//! combined in chunk order.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::{average_cost_with, DiscretePovm, DEFAULT_NODES};
use crate::channel::{
    output_state_bruteforce, probe_state_of, DensityMatrix4, ProbeConfig, ProbeForm, PureState8,
};
use crate::gate_family::Edge;
use crate::{Error, Result};

/// Trials per RNG stream.
pub const CHUNK: u64 = 1 << 14;
/// Largest tolerated deviation of outcome probabilities from normalization.
pub const PROB_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub edge: Edge,
    pub probe: ProbeConfig,
    pub form: ProbeForm,
    pub povm_source: String,
    pub trials: u64,
    pub empirical_cost: f64,
    pub standard_error: f64,
    pub seed: u64,
}

/// Generator for chunk `stream` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Outcome probabilities, clipped and renormalized when within [`PROB_TOL`].
pub fn outcome_probabilities(povm: &DiscretePovm, rho: &DensityMatrix4) -> Result<Vec<f64>> {
    let raw = povm.probabilities(rho);
    let sum: f64 = raw.iter().sum();
    if !sum.is_finite() || (sum - 1.0).abs() > PROB_TOL {
        return Err(Error::ProbabilityMismatch { sum });
    }
    let clipped: Vec<f64> = raw.iter().map(|p| p.clamp(0.0, 1.0)).collect();
    let total: f64 = clipped.iter().sum();
    Ok(clipped.into_iter().map(|p| p / total).collect())
}

fn sample_index<R: Rng>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // u landed in the rounding gap above the last partial sum
    probs
        .iter()
        .rposition(|&p| p > 0.0)
        .unwrap_or(probs.len() - 1)
}

#[derive(Debug, Clone, Copy, Default)]
struct Accumulator {
    sum: f64,
    sum_sq: f64,
}

fn run_chunk(
    e: Edge,
    psi: &PureState8,
    povm: &DiscretePovm,
    seed: u64,
    chunk: u64,
    count: u64,
) -> Result<Accumulator> {
    let mut rng = stream_rng(seed, chunk);
    let mut acc = Accumulator::default();
    for _ in 0..count {
        let alpha = rng.random::<f64>() * FRAC_PI_2;
        let rho = output_state_bruteforce(&e.map(alpha), psi);
        let probs = outcome_probabilities(povm, &rho)?;
        let outcome = sample_index(&probs, &mut rng);
        let err = (alpha - povm.outcomes[outcome].estimate).powi(2);
        acc.sum += err;
        acc.sum_sq += err * err;
    }
    Ok(acc)
}

pub fn simulate_protocol(
    e: Edge,
    cfg: &ProbeConfig,
    povm: &DiscretePovm,
    trials: u64,
    seed: u64,
) -> Result<McReport> {
    simulate_protocol_with(e, cfg, ProbeForm::Standard, povm, "supplied", trials, seed)
}

pub fn simulate_protocol_with(
    e: Edge,
    cfg: &ProbeConfig,
    form: ProbeForm,
    povm: &DiscretePovm,
    povm_source: &str,
    trials: u64,
    seed: u64,
) -> Result<McReport> {
    if trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    if povm.is_empty() {
        return Err(Error::Domain("POVM has no outcomes".into()));
    }
    cfg.validate()?;
    let psi = probe_state_of(cfg, form);
    let chunks = trials.div_ceil(CHUNK);
    let parts: Vec<Accumulator> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let count = CHUNK.min(trials - k * CHUNK);
            run_chunk(e, &psi, povm, seed, k, count)
        })
        .collect::<Result<_>>()?;
    let total = parts
        .iter()
        .fold(Accumulator::default(), |a, b| Accumulator {
            sum: a.sum + b.sum,
            sum_sq: a.sum_sq + b.sum_sq,
        });

    let n = trials as f64;
    let mean = total.sum / n;
    let standard_error = if trials > 1 {
        let var = ((total.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(McReport {
        edge: e,
        probe: *cfg,
        form,
        povm_source: povm_source.to_owned(),
        trials,
        empirical_cost: mean,
        standard_error,
        seed,
    })
}

/// `|empirical − analytic| / standard_error` for one simulation.
pub fn empirical_vs_analytic(
    e: Edge,
    cfg: &ProbeConfig,
    povm: &DiscretePovm,
    trials: u64,
    seed: u64,
) -> Result<f64> {
    let report = simulate_protocol(e, cfg, povm, trials, seed)?;
    let analytic = average_cost_with(povm, e, cfg, ProbeForm::Standard, DEFAULT_NODES);
    Ok(z_score(
        report.empirical_cost,
        analytic,
        report.standard_error,
    ))
}

pub fn z_score(empirical: f64, analytic: f64, standard_error: f64) -> f64 {
    let diff = (empirical - analytic).abs();
    if standard_error > 0.0 {
        diff / standard_error
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Outcome counts from `n` measurements of the output state at a fixed `α`.
pub fn outcome_counts(
    e: Edge,
    cfg: &ProbeConfig,
    povm: &DiscretePovm,
    alpha: f64,
    n: u64,
    seed: u64,
) -> Result<Vec<u64>> {
    let rho = output_state_bruteforce(
        &crate::gate_family::edge_point(e, alpha)?,
        &probe_state_of(cfg, ProbeForm::Standard),
    );
    let probs = outcome_probabilities(povm, &rho)?;
    let mut rng = stream_rng(seed, 0);
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..n {
        counts[sample_index(&probs, &mut rng)] += 1;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayes::PovmOutcome;
    use crate::linalg::{c, Mat4};

    fn cfg() -> ProbeConfig {
        ProbeConfig::new(0.4, 0.6, 0.0, 1.0).unwrap()
    }

    #[test]
    fn same_seed_same_report() {
        let povm = DiscretePovm::blind();
        let a = simulate_protocol(Edge::E2, &cfg(), &povm, 40_000, 9).unwrap();
        let b = simulate_protocol(Edge::E2, &cfg(), &povm, 40_000, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.empirical_cost.to_bits(), b.empirical_cost.to_bits());
        let c = simulate_protocol(Edge::E2, &cfg(), &povm, 40_000, 10).unwrap();
        assert_ne!(a.empirical_cost, c.empirical_cost);
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(simulate_protocol(Edge::E1, &cfg(), &DiscretePovm::blind(), 0, 0).is_err());
    }

    #[test]
    fn single_trial_has_zero_error_bar() {
        let r = simulate_protocol(Edge::E1, &cfg(), &DiscretePovm::blind(), 1, 3).unwrap();
        assert_eq!(r.standard_error, 0.0);
        assert!(r.empirical_cost >= 0.0);
    }

    #[test]
    fn incomplete_povm_is_a_numerical_error() {
        let half = DiscretePovm {
            outcomes: vec![PovmOutcome {
                estimate: 0.5,
                effect: Mat4::identity() * c(0.5, 0.0),
            }],
        };
        let err = simulate_protocol(Edge::E3, &cfg(), &half, 10, 0).unwrap_err();
        assert!(matches!(err, Error::ProbabilityMismatch { .. }));
        assert!(err.is_numerical());
    }

    #[test]
    fn sampler_respects_zero_probabilities() {
        let mut rng = stream_rng(1, 0);
        for _ in 0..1000 {
            assert_eq!(sample_index(&[0.0, 1.0, 0.0], &mut rng), 1);
        }
    }

    #[test]
    fn streams_differ() {
        let a: f64 = stream_rng(5, 0).random();
        let b: f64 = stream_rng(5, 1).random();
        assert_ne!(a, b);
    }
}
