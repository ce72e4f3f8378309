//! Monte Carlo simulation of the independent protocol: y-basis measurement,
//! moment inversion for the channel parameter and the classical
//! Cramer-Rao comparison.

use rand::distributions::{Bernoulli, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channels::{apply_pauli_channel, bloch_state, Axis, ChannelSpec};
use crate::error::{check_lambda, check_range, Error, Result};
use crate::linop::{BlochVector, Operator};
use crate::qfi::{check_invocations, single_qubit_channel_derivative};

/// Outcome probabilities `Tr[rho P_k]` and their derivatives
/// `Tr[drho P_k]` for the projectors `(I +- s)/2` along `axis`.
pub fn born_probs(rho: &Operator, drho: &Operator, axis: Axis) -> Result<([f64; 2], [f64; 2])> {
    if rho.dim() != 2 || drho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: if rho.dim() != 2 {
                rho.dim()
            } else {
                drho.dim()
            },
        });
    }
    let id = Operator::identity(2)?;
    let s = axis.pauli();
    let proj = [id.add(&s).scale_re(0.5), id.sub(&s).scale_re(0.5)];
    let p = proj.clone().map(|pk| rho.mul(&pk).trace().re);
    let dp = proj.map(|pk| drho.mul(&pk).trace().re);
    Ok((p, dp))
}

/// Single-use output `(I + r sigma_y)/2` dephased once, with its
/// derivative in `lambda`.
fn single_use_state(r: f64, lambda: f64) -> Result<(Operator, Operator)> {
    check_range("r", r, 0.0, 1.0, "0 <= r <= 1")?;
    check_lambda(lambda)?;
    let rho0 = bloch_state(BlochVector::new(0.0, r, 0.0)?);
    let rho = apply_pauli_channel(&rho0, &ChannelSpec::dephasing(lambda, 1)?, &[1])?;
    Ok((rho, single_qubit_channel_derivative(&rho0)))
}

/// `(p_plus, p_minus)` for the `+-y` measurement after one channel use.
pub fn outcome_probs(r: f64, lambda: f64) -> Result<(f64, f64)> {
    let (rho, drho) = single_use_state(r, lambda)?;
    let (p, _) = born_probs(&rho, &drho, Axis::Y)?;
    Ok((p[0], p[1]))
}

/// `(dp_plus, dp_minus)` with respect to `lambda`.
pub fn outcome_prob_derivatives(r: f64, lambda: f64) -> Result<(f64, f64)> {
    let (rho, drho) = single_use_state(r, lambda)?;
    let (_, dp) = born_probs(&rho, &drho, Axis::Y)?;
    Ok((dp[0], dp[1]))
}

/// Classical Fisher information of one single-use measurement along `axis`.
pub fn single_use_fisher(r: f64, lambda: f64, axis: Axis) -> Result<f64> {
    let (rho, drho) = single_use_state(r, lambda)?;
    let (p, dp) = born_probs(&rho, &drho, axis)?;
    classical_fisher(&p, &dp)
}

/// Probabilities below this count as zero.
const ZERO_PROB: f64 = 1e-300;
/// Derivatives below this count as zero next to a vanishing probability.
const ZERO_DERIV: f64 = 1e-12;

/// `sum_k dp_k^2 / p_k`.
pub fn classical_fisher(p: &[f64], dp: &[f64]) -> Result<f64> {
    if p.len() != dp.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            found: dp.len(),
        });
    }
    let total: f64 = p.iter().sum();
    if p.iter().any(|&x| x < 0.0) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::Invalid(format!(
            "probabilities sum to {total}, or one is negative"
        )));
    }
    let dtotal: f64 = dp.iter().sum();
    if dtotal.abs() > 1e-9 {
        return Err(Error::Invalid(format!(
            "probability derivatives sum to {dtotal}"
        )));
    }
    let mut f = 0.0;
    for (k, (&pk, &dk)) in p.iter().zip(dp).enumerate() {
        if pk <= ZERO_PROB {
            if dk.abs() > ZERO_DERIV {
                return Err(Error::InfiniteInformation { index: k });
            }
            continue;
        }
        f += dk * dk / pk;
    }
    Ok(f)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub r: f64,
    pub lambda_true: f64,
    /// Channel uses per shot; each use is measured separately.
    pub m: usize,
    pub trials: usize,
    pub shots_per_trial: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r <= 1.0) {
            return Err(Error::Parameter {
                name: "r",
                value: self.r,
                constraint: "0 < r <= 1",
            });
        }
        if !(self.lambda_true > 0.0 && self.lambda_true < 1.0) {
            return Err(Error::Parameter {
                name: "lambda",
                value: self.lambda_true,
                constraint: "0 < lambda < 1",
            });
        }
        check_invocations(self.m)?;
        for (name, v) in [("trials", self.trials), ("shots", self.shots_per_trial)] {
            if v == 0 {
                return Err(Error::Parameter {
                    name,
                    value: 0.0,
                    constraint: "at least 1",
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub estimates: Vec<f64>,
    pub mean: f64,
    /// Unbiased sample variance; zero for a single trial.
    pub sample_variance: f64,
    /// `1 / (shots m F)`.
    pub crb: f64,
    /// Per-use classical Fisher information of the `+-y` measurement.
    pub fisher_classical: f64,
    /// Number of estimates that fell outside `[0, 1]` before clamping.
    pub clamped: usize,
}

impl ExperimentResult {
    pub fn variance_ratio(&self) -> f64 {
        self.sample_variance / self.crb
    }
}

/// `lambda_hat = (1 - (2 p_hat - 1)/r) / 2`, unclamped.
pub fn invert_frequency(p_hat: f64, r: f64) -> f64 {
    0.5 * (1.0 - (2.0 * p_hat - 1.0) / r)
}

/// Each trial draws from its own ChaCha8 stream `(seed, trial)`, so the
/// result does not depend on scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let (p_plus, _) = outcome_probs(cfg.r, cfg.lambda_true)?;
    let (dp_plus, dp_minus) = outcome_prob_derivatives(cfg.r, cfg.lambda_true)?;
    let fisher = classical_fisher(&[p_plus, 1.0 - p_plus], &[dp_plus, dp_minus])?;
    let coin = Bernoulli::new(p_plus.clamp(0.0, 1.0)).map_err(|e| Error::Invalid(e.to_string()))?;
    let draws = cfg.shots_per_trial * cfg.m;

    let raw: Vec<f64> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(trial as u64);
            let hits = (0..draws).filter(|_| coin.sample(&mut rng)).count();
            invert_frequency(hits as f64 / draws as f64, cfg.r)
        })
        .collect();

    let clamped = raw.iter().filter(|&&l| !(0.0..=1.0).contains(&l)).count();
    let estimates: Vec<f64> = raw.into_iter().map(|l| l.clamp(0.0, 1.0)).collect();
    let k = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / k;
    let sample_variance = if estimates.len() > 1 {
        estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    Ok(ExperimentResult {
        estimates,
        mean,
        sample_variance,
        crb: 1.0 / (draws as f64 * fisher),
        fisher_classical: fisher,
        clamped,
    })
}
