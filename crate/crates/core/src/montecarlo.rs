//! Seed-parallel Monte Carlo estimators.
//!
//! Trial `t` always sees the prime signs of `(master_seed, t)` from
//! [`crate::sampler`], whatever the thread count. Counts are merged as
//! integers and real-valued samples are reduced in trial order, so results
//! are bitwise identical across thread pools.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sampler::{fill_sign_words, FTable, Mode};
use crate::series::{power_weight, scan_positivity, Positivity, Trajectory, WeightTable};
use crate::sieve::{self, arith_signature};
use crate::stats::{normal_quantile, sample_moments, wilson_interval, EstimateWithCI};

/// Excess kurtosis above which a moment estimate is flagged heavy-tailed.
pub const HEAVY_TAIL_KURTOSIS: f64 = 50.0;

#[derive(Debug, Clone)]
pub struct PositivityEstimate {
    pub estimate: EstimateWithCI,
    pub passed: u64,
    pub failed: u64,
    pub indeterminate: u64,
    pub warnings: Vec<String>,
}

/// Outcome of one positivity trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub trial: u64,
    pub passed: bool,
    pub indeterminate: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct PositivityParams {
    pub sigma: f64,
    pub x: u64,
    pub n_max: u64,
    pub trials: u64,
    pub master_seed: u64,
    pub mode: Mode,
    pub level: f64,
}

fn validate_positivity(p: &PositivityParams) -> Result<Vec<String>> {
    if p.trials == 0 {
        return Err(Error::domain("mc_positivity", "trials must be ≥ 1"));
    }
    if p.x >= p.n_max {
        return Err(Error::domain("mc_positivity", format!("need x < N, got x = {}, N = {}", p.x, p.n_max)));
    }
    if !(p.sigma > 0.0) {
        return Err(Error::domain("mc_positivity", format!("sigma must be positive, got {}", p.sigma)));
    }
    let mut warnings = Vec::new();
    if p.sigma <= 0.5 {
        warnings.push(format!(
            "sigma = {} ≤ 1/2: partial sums change sign infinitely often almost surely",
            p.sigma
        ));
    }
    Ok(warnings)
}

/// Per-trial outcomes in trial order.
pub fn positivity_trials(p: &PositivityParams) -> Result<Vec<TrialOutcome>> {
    validate_positivity(p)?;
    let table = FTable::new(p.n_max, p.mode);
    let weights = WeightTable::new(p.n_max, p.sigma);
    let len = p.n_max as usize + 1;
    Ok((0..p.trials)
        .into_par_iter()
        .map_init(
            || (Vec::new(), vec![0i8; len]),
            |(words, f), trial| {
                table.evaluate_trial(p.master_seed, trial, words, f);
                let outcome = scan_positivity(f, &weights, p.x);
                TrialOutcome {
                    trial,
                    passed: outcome.is_positive(),
                    indeterminate: outcome.is_indeterminate(),
                }
            },
        )
        .collect())
}

/// Fraction of trials whose partial sums stay positive on `(x, N]`, with the
/// Wilson interval widened upward by the indeterminate fraction.
pub fn mc_positivity(p: &PositivityParams) -> Result<PositivityEstimate> {
    let warnings = validate_positivity(p)?;
    let table = FTable::new(p.n_max, p.mode);
    let weights = WeightTable::new(p.n_max, p.sigma);
    let len = p.n_max as usize + 1;
    let (passed, indeterminate) = (0..p.trials)
        .into_par_iter()
        .map_init(
            || (Vec::new(), vec![0i8; len]),
            |(words, f), trial| {
                table.evaluate_trial(p.master_seed, trial, words, f);
                match scan_positivity(f, &weights, p.x) {
                    Positivity::Positive => (1u64, 0u64),
                    Positivity::Indeterminate { .. } => (0, 1),
                    Positivity::Negative { .. } => (0, 0),
                }
            },
        )
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let (lo, hi) = wilson_interval(passed, p.trials, p.level)?;
    let widen = indeterminate as f64 / p.trials as f64;
    Ok(PositivityEstimate {
        estimate: EstimateWithCI {
            estimate: passed as f64 / p.trials as f64,
            trials: p.trials,
            ci_low: lo,
            ci_high: (hi + widen).min(1.0),
            level: p.level,
            master_seed: p.master_seed,
        },
        passed,
        failed: p.trials - passed - indeterminate,
        indeterminate,
        warnings,
    })
}

/// Writes the per-trial CSV `trial,passed,indeterminate`.
pub fn write_trials_csv<W: std::io::Write>(trials: &[TrialOutcome], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["trial", "passed", "indeterminate"])?;
    for t in trials {
        w.write_record([t.trial.to_string(), (t.passed as u8).to_string(), (t.indeterminate as u8).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct MomentEstimate {
    pub estimate: EstimateWithCI,
    pub std_error: f64,
    pub excess_kurtosis: f64,
    pub heavy_tailed: bool,
}

/// Sample mean of `|Σ a(n) f(n)|^m` with a normal-approximation interval.
pub fn mc_moment(coeffs: &[(u64, f64)], m: f64, trials: u64, master_seed: u64, level: f64) -> Result<MomentEstimate> {
    if trials < 2 {
        return Err(Error::domain("mc_moment", "trials must be ≥ 2"));
    }
    if !(m >= 2.0) || !m.is_finite() {
        return Err(Error::domain("mc_moment", format!("m must be a real ≥ 2, got {m}")));
    }
    if coeffs.iter().any(|&(n, a)| n == 0 || !a.is_finite()) {
        return Err(Error::domain("mc_moment", "coefficients must be finite and indexed from 1"));
    }
    let n_max = coeffs.iter().map(|&(n, _)| n).max().unwrap_or(1);
    let primes = sieve::primes_up_to(n_max);
    // sign-flipping prime ranks per coefficient; `None` where f(n) = 0
    let support: Vec<(Option<Vec<usize>>, f64)> = coeffs
        .iter()
        .map(|&(n, a)| {
            let sig = arith_signature(n).expect("n ≥ 1");
            let ranks = sig
                .is_squarefree
                .then(|| sig.distinct_primes.iter().map(|&p| primes.rank_of(p).unwrap()).collect());
            (ranks, a)
        })
        .collect();
    let words_len = primes.len().div_ceil(64).max(1);
    let samples: Vec<f64> = (0..trials)
        .into_par_iter()
        .map_init(
            || vec![0u64; words_len],
            |words, trial| {
                fill_sign_words(master_seed, trial, words);
                let mut s = crate::summation::CompensatedSum::new();
                for (ranks, a) in &support {
                    if let Some(ranks) = ranks {
                        let neg = ranks.iter().filter(|&&r| (words[r / 64] >> (r % 64)) & 1 == 1).count();
                        s.add(if neg % 2 == 1 { -a } else { *a });
                    }
                }
                s.value().abs().powf(m)
            },
        )
        .collect();
    let stats = sample_moments(&samples);
    let std_error = (stats.variance / trials as f64).sqrt();
    let z = normal_quantile(level)?;
    Ok(MomentEstimate {
        estimate: EstimateWithCI {
            estimate: stats.mean,
            trials,
            ci_low: stats.mean - z * std_error,
            ci_high: stats.mean + z * std_error,
            level,
            master_seed,
        },
        std_error,
        excess_kurtosis: stats.excess_kurtosis,
        heavy_tailed: stats.excess_kurtosis > HEAVY_TAIL_KURTOSIS,
    })
}

/// Empirical `P(Σ_{p≤P} f(p) p^{-σ} ≥ λ)`.
pub fn mc_prime_tail(sigma: f64, lambda: f64, p_max: u64, trials: u64, master_seed: u64, level: f64) -> Result<EstimateWithCI> {
    if trials == 0 {
        return Err(Error::domain("mc_prime_tail", "trials must be ≥ 1"));
    }
    if p_max < 2 {
        return Err(Error::domain("mc_prime_tail", "P must be ≥ 2"));
    }
    if !(sigma > 0.0) {
        return Err(Error::domain("mc_prime_tail", format!("sigma must be positive, got {sigma}")));
    }
    let primes = sieve::primes_up_to(p_max);
    let weights: Vec<f64> = primes.primes().iter().map(|&p| power_weight(p, sigma).0).collect();
    let words_len = primes.len().div_ceil(64);
    let hits: u64 = (0..trials)
        .into_par_iter()
        .map_init(
            || vec![0u64; words_len],
            |words, trial| {
                fill_sign_words(master_seed, trial, words);
                let mut s = crate::summation::CompensatedSum::new();
                for (r, &w) in weights.iter().enumerate() {
                    s.add(if (words[r / 64] >> (r % 64)) & 1 == 1 { -w } else { w });
                }
                (s.value() >= lambda) as u64
            },
        )
        .sum();
    let (lo, hi) = wilson_interval(hits, trials, level)?;
    Ok(EstimateWithCI {
        estimate: hits as f64 / trials as f64,
        trials,
        ci_low: lo,
        ci_high: hi,
        level,
        master_seed,
    })
}

/// Number of strict sign flips between consecutive nonzero values.
pub fn sign_changes_in(values: &[f64]) -> u64 {
    let mut last: Option<bool> = None;
    let mut changes = 0;
    for &v in values {
        if v == 0.0 {
            continue;
        }
        let positive = v > 0.0;
        if last.is_some_and(|l| l != positive) {
            changes += 1;
        }
        last = Some(positive);
    }
    changes
}

/// Sign changes of a stride-1 trajectory.
pub fn sign_changes(t: &Trajectory) -> Result<u64> {
    if t.stride != 1 {
        return Err(Error::domain("sign_changes", "stride-1 trajectory required"));
    }
    let values: Vec<f64> = t.checkpoints.iter().map(|c| c.value).collect();
    Ok(sign_changes_in(&values))
}
