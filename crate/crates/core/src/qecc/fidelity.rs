use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{ErrorSet, RecoveryPlan, RecoveryResult};
use crate::error::Result;
use crate::hilbert::StateVector;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorFidelity {
    pub error: String,
    pub worst: f64,
    pub mean: f64,
    pub abstentions: usize,
    /// Smallest Born probability of any measured outcome; 1 when every
    /// syndrome was deterministic.
    pub min_outcome_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityReport {
    pub per_error: Vec<ErrorFidelity>,
    pub evaluations: usize,
    pub worst: f64,
    pub mean: f64,
    pub abstentions: usize,
    pub min_outcome_probability: f64,
}

/// Applies every error to every test state, recovers, and records
/// `|<psi|recovered>|^2`. Test states are the code basis followed by
/// `n_random` seeded random superpositions of it. Abstentions count as
/// fidelity 0.
pub fn evaluate_recovery(
    errors: &ErrorSet,
    plan: &RecoveryPlan,
    code_basis: &[StateVector],
    n_random: usize,
    seed: u64,
) -> Result<FidelityReport> {
    let space = plan.space();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tests: Vec<StateVector> = code_basis.to_vec();
    for _ in 0..n_random {
        tests.push(StateVector::random_superposition(space, code_basis, &mut rng)?);
    }

    let per_error: Vec<ErrorFidelity> = errors
        .entries
        .par_iter()
        .enumerate()
        .map(|(e, (label, op))| -> Result<ErrorFidelity> {
            let mut worst = f64::INFINITY;
            let mut sum = 0.0;
            let mut abstentions = 0;
            let mut min_p = 1.0f64;
            for (t, psi) in tests.iter().enumerate() {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(((e as u64) << 32) | t as u64);
                let damaged = op.apply(psi);
                let f = if damaged.is_zero() {
                    0.0
                } else {
                    let damaged = damaged.normalized()?;
                    let result = plan.run(&damaged, &mut rng)?;
                    for ev in result.events() {
                        if let super::Event::MeasuredCharges { probability, .. }
                        | super::Event::MeasuredParity { probability, .. } = ev
                        {
                            min_p = min_p.min(*probability);
                        }
                    }
                    match result {
                        RecoveryResult::Corrected { state, .. } => psi.inner(&state)?.norm_sqr(),
                        RecoveryResult::Abstain { .. } => {
                            abstentions += 1;
                            0.0
                        }
                    }
                };
                worst = worst.min(f);
                sum += f;
            }
            Ok(ErrorFidelity {
                error: label.describe(),
                worst,
                mean: sum / tests.len() as f64,
                abstentions,
                min_outcome_probability: min_p,
            })
        })
        .collect::<Result<_>>()?;

    let evaluations = per_error.len() * tests.len();
    let worst = per_error.iter().map(|e| e.worst).fold(f64::INFINITY, f64::min);
    let mean = per_error.iter().map(|e| e.mean).sum::<f64>() / per_error.len().max(1) as f64;
    Ok(FidelityReport {
        abstentions: per_error.iter().map(|e| e.abstentions).sum(),
        min_outcome_probability: per_error.iter().map(|e| e.min_outcome_probability).fold(1.0, f64::min),
        per_error,
        evaluations,
        worst,
        mean,
    })
}
