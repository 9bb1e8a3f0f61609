//! Weighted partial sums `S_σ(y) = Σ_{n≤y} f(n) n^{-σ}`, prime sums, truncated
//! Euler products and the log-decomposition of the Euler product.
//!
//! All series use [`CompensatedSum`] and carry a certified error bound. A
//! partial sum whose magnitude does not exceed its bound is never classified
//! as positive or negative; it is reported as indeterminate instead.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::stats::csv_float;
use crate::sampler::{Mode, SignAssignment};
use crate::sieve::{self, DEFAULT_BLOCK_SIZE};
use crate::summation::{power_weight_rel_error, CompensatedSum};

/// `n^{-σ}` and an absolute error bound for it.
#[inline]
pub fn power_weight(n: u64, sigma: f64) -> (f64, f64) {
    let ln = (n as f64).ln();
    let w = (-sigma * ln).exp();
    (w, w * power_weight_rel_error(sigma, ln))
}

/// Precomputed weights `n^{-σ}` for `0 ≤ n ≤ N` (index 0 unused).
#[derive(Debug, Clone)]
pub struct WeightTable {
    sigma: f64,
    weights: Vec<f64>,
    errors: Vec<f64>,
}

impl WeightTable {
    pub fn new(n_max: u64, sigma: f64) -> WeightTable {
        let (weights, errors): (Vec<f64>, Vec<f64>) = (0..=n_max)
            .into_par_iter()
            .map(|n| if n == 0 { (0.0, 0.0) } else { power_weight(n, sigma) })
            .unzip();
        WeightTable {
            sigma,
            weights,
            errors,
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn n_max(&self) -> u64 {
        self.weights.len() as u64 - 1
    }

    #[inline]
    pub fn weight(&self, n: usize) -> f64 {
        self.weights[n]
    }

    #[inline]
    pub fn error(&self, n: usize) -> f64 {
        self.errors[n]
    }
}

/// Outcome of the truncated positivity test on `(x, N]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Positivity {
    /// `S(y) > 0` certified for every integer `y ∈ (x, N]`.
    Positive,
    /// `S(y) < 0` certified at `y` (the first such point).
    Negative { y: u64 },
    /// No certified negative value, but `|S(y)|` is within the error bound
    /// at `y` (the first such point).
    Indeterminate { y: u64 },
}

impl Positivity {
    pub fn is_positive(&self) -> bool {
        matches!(self, Positivity::Positive)
    }

    pub fn is_indeterminate(&self) -> bool {
        matches!(self, Positivity::Indeterminate { .. })
    }
}

/// Scans `S(y)` for `y ∈ (x, N]` where `f[n]` holds `f(n)` for `n ≤ N`
/// (index 0 ignored) and stops at the first certified negative value.
pub fn scan_positivity(f: &[i8], weights: &WeightTable, x: u64) -> Positivity {
    let n_max = f.len() as u64 - 1;
    assert!(weights.n_max() >= n_max);
    let mut acc = CompensatedSum::new();
    let mut undecided = None;
    for n in 1..=n_max as usize {
        match f[n] {
            0 => {}
            1 => acc.add_inexact(weights.weight(n), weights.error(n)),
            _ => acc.add_inexact(-weights.weight(n), weights.error(n)),
        }
        if n as u64 > x {
            let v = acc.value();
            let e = acc.error_bound();
            if v < -e {
                return Positivity::Negative { y: n as u64 };
            }
            if v <= e && undecided.is_none() {
                undecided = Some(n as u64);
            }
        }
    }
    match undecided {
        Some(y) => Positivity::Indeterminate { y },
        None => Positivity::Positive,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    pub y: u64,
    pub value: f64,
    pub err_bound: f64,
}

/// Running values of `S_σ(y)` at checkpoints.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub sigma: f64,
    pub master_seed: u64,
    pub trial_index: u64,
    pub mode: Mode,
    pub n_max: u64,
    pub stride: u64,
    pub checkpoints: Vec<Checkpoint>,
    /// Error bound of the final partial sum (bounds at earlier checkpoints are
    /// no larger).
    pub summation_error_bound: f64,
}

fn checked_sigma(op: &'static str, sigma: f64) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::domain(op, format!("sigma must be a positive real, got {sigma}")));
    }
    Ok(())
}

/// Visits `f(n)` for `1 ≤ n ≤ n_max` in ascending order, sieving groups of
/// blocks in parallel.
fn for_each_f(a: &SignAssignment, n_max: u64, mut visit: impl FnMut(u64, i8)) -> Result<()> {
    let limit = a.limit();
    if n_max > limit.saturating_mul(limit).max(1) {
        return Err(Error::domain(
            "partial_sum_trajectory",
            format!("N = {n_max} exceeds limit² for an assignment on primes ≤ {limit}"),
        ));
    }
    let bounds = sieve::block_bounds(1, n_max, DEFAULT_BLOCK_SIZE);
    let group = rayon::current_num_threads().max(1) * 2;
    for chunk in bounds.chunks(group) {
        let values: Vec<Result<Vec<i8>>> = chunk
            .par_iter()
            .map(|&(lo, hi)| Ok(a.stream_f(lo, hi)?.into_iter().map(|v| v.get()).collect()))
            .collect();
        for (&(lo, _), vals) in chunk.iter().zip(values) {
            for (i, v) in vals?.into_iter().enumerate() {
                visit(lo + i as u64, v);
            }
        }
    }
    Ok(())
}

/// `S_σ(y)` at `y = 1`, every multiple of `stride`, and `y = N`.
pub fn partial_sum_trajectory(a: &SignAssignment, sigma: f64, n_max: u64, stride: u64) -> Result<Trajectory> {
    checked_sigma("partial_sum_trajectory", sigma)?;
    if stride == 0 {
        return Err(Error::domain("partial_sum_trajectory", "checkpoint stride must be ≥ 1"));
    }
    if n_max == 0 {
        return Err(Error::domain("partial_sum_trajectory", "N must be ≥ 1"));
    }
    let mut acc = CompensatedSum::new();
    let mut checkpoints = Vec::with_capacity((n_max / stride) as usize + 2);
    for_each_f(a, n_max, |n, f| {
        if f != 0 {
            let (w, e) = power_weight(n, sigma);
            acc.add_inexact(if f > 0 { w } else { -w }, e);
        }
        if n == 1 || n % stride == 0 || n == n_max {
            checkpoints.push(Checkpoint {
                y: n,
                value: acc.value(),
                err_bound: acc.error_bound(),
            });
        }
    })?;
    Ok(Trajectory {
        sigma,
        master_seed: a.master_seed(),
        trial_index: a.trial_index(),
        mode: a.mode(),
        n_max,
        stride,
        checkpoints,
        summation_error_bound: acc.error_bound(),
    })
}

impl Trajectory {
    pub fn value_at(&self, y: u64) -> Option<f64> {
        self.checkpoints
            .binary_search_by_key(&y, |c| c.y)
            .ok()
            .map(|i| self.checkpoints[i].value)
    }

    /// Truncated positivity event on `(x, N]`; requires a stride-1 trajectory.
    pub fn positivity_check(&self, x: u64) -> Result<Positivity> {
        if self.stride != 1 {
            return Err(Error::domain("positivity_check", "stride-1 trajectory required"));
        }
        if x >= self.n_max {
            return Err(Error::domain(
                "positivity_check",
                format!("x = {x} must be below the horizon N = {}", self.n_max),
            ));
        }
        let mut undecided = None;
        for c in self.checkpoints.iter().filter(|c| c.y > x) {
            if c.value < -c.err_bound {
                return Ok(Positivity::Negative { y: c.y });
            }
            if c.value <= c.err_bound && undecided.is_none() {
                undecided = Some(c.y);
            }
        }
        Ok(match undecided {
            Some(y) => Positivity::Indeterminate { y },
            None => Positivity::Positive,
        })
    }

    /// CSV with header `y,value,err_bound`; floats use shortest round-trip form.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["y", "value", "err_bound"])?;
        for c in &self.checkpoints {
            w.write_record([c.y.to_string(), csv_float(c.value), csv_float(c.err_bound)])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn checked_prime_bound(op: &'static str, a: &SignAssignment, p_max: u64) -> Result<usize> {
    if p_max > a.limit() {
        return Err(Error::domain(
            op,
            format!("P = {p_max} exceeds the assignment limit {}", a.limit()),
        ));
    }
    Ok(a.primes().count_up_to(p_max))
}

/// `Σ_{p≤P} f(p) p^{-σ}` with its error bound.
pub fn prime_sum_with_error(a: &SignAssignment, sigma: f64, p_max: u64) -> Result<(f64, f64)> {
    checked_sigma("prime_sum", sigma)?;
    let count = checked_prime_bound("prime_sum", a, p_max)?;
    let mut acc = CompensatedSum::new();
    for (r, &p) in a.primes().primes()[..count].iter().enumerate() {
        let (w, e) = power_weight(p, sigma);
        acc.add_inexact(if a.is_negative_rank(r) { -w } else { w }, e);
    }
    Ok((acc.value(), acc.error_bound()))
}

pub fn prime_sum(a: &SignAssignment, sigma: f64, p_max: u64) -> Result<f64> {
    prime_sum_with_error(a, sigma, p_max).map(|(v, _)| v)
}

/// `log` of the truncated Euler product, summed as `Σ log(factor)`.
fn log_euler_product(a: &SignAssignment, sigma: f64, p_max: u64) -> Result<f64> {
    checked_sigma("euler_product_partial", sigma)?;
    let count = checked_prime_bound("euler_product_partial", a, p_max)?;
    let mut acc = CompensatedSum::new();
    for (r, &p) in a.primes().primes()[..count].iter().enumerate() {
        let w = (-sigma * (p as f64).ln()).exp();
        let s = if a.is_negative_rank(r) { -1.0 } else { 1.0 };
        let term = match a.mode() {
            Mode::SquarefreeMult => {
                if 1.0 + s * w == 0.0 {
                    return Err(Error::Pole { prime: p });
                }
                (s * w).ln_1p()
            }
            Mode::CompletelyMult => {
                if 1.0 - s * w == 0.0 {
                    return Err(Error::Pole { prime: p });
                }
                -(-s * w).ln_1p()
            }
        };
        acc.add(term);
    }
    Ok(acc.value())
}

/// Truncated Euler product: `∏_{p≤P}(1 + f(p)p^{-σ})` for squarefree-supported
/// `f`, `∏_{p≤P}(1 − f(p)p^{-σ})^{-1}` in completely multiplicative mode.
///
/// Convergence as `P → ∞` needs `σ > 1/2`; finite truncations are evaluated
/// for any `σ > 0`.
pub fn euler_product_partial(a: &SignAssignment, sigma: f64, p_max: u64) -> Result<f64> {
    log_euler_product(a, sigma, p_max).map(f64::exp)
}

/// `log E_P = prime_sum − half_log_term + remainder`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDecomposition {
    pub prime_sum: f64,
    /// `½ log(1/(σ − 1/2))`.
    pub half_log_term: f64,
    pub remainder: f64,
    pub log_product: f64,
}

pub fn log_decomposition(a: &SignAssignment, sigma: f64, p_max: u64) -> Result<LogDecomposition> {
    if !(sigma > 0.5 && sigma <= 1.0) {
        return Err(Error::domain("log_decomposition", format!("sigma must lie in (1/2, 1], got {sigma}")));
    }
    let log_product = log_euler_product(a, sigma, p_max)?;
    let product = log_product.exp();
    if !(product > 0.0) {
        return Err(Error::LogDomain {
            op: "log_decomposition",
            value: product,
        });
    }
    let ps = prime_sum(a, sigma, p_max)?;
    let half_log_term = 0.5 * (1.0 / (sigma - 0.5)).ln();
    Ok(LogDecomposition {
        prime_sum: ps,
        half_log_term,
        remainder: log_product - ps + half_log_term,
        log_product,
    })
}

/// Convergence of `Σ n^{-2σ}(log n)²`: holds iff `σ > 1/2`; margin `2σ − 1`.
pub fn rademacher_menshov_check(sigma: f64) -> (bool, f64) {
    let margin = 2.0 * sigma - 1.0;
    (margin > 0.0, margin)
}
