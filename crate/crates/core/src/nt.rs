//! Explicit number-theoretic sums: `Σ μ²(n)(m−1)^{ω(n)}`, its weighted tail,
//! and the Mertens and Chebyshev prime sums.
//!
//! Sums over `n ≤ x` are driven by squarefree ω-histograms: integer counts of
//! squarefree `n` by number of prime factors. Counts are exact, so
//! `t_sum(x, m) = Σ_k count_k (m−1)^k` involves at most 16 floating terms.

use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::stats::csv_float;
use crate::sieve::{self, block_bounds, isqrt, sieve_block, DEFAULT_BLOCK_SIZE};
use crate::summation::{compensated_sum, power_weight_rel_error, CompensatedSum, UNIT_ROUNDOFF};

/// ω(n) ≤ 15 for every `n < 2^64`.
const OMEGA_SLOTS: usize = 16;

/// Upper bound for the Meissel–Mertens constant.
pub const MERTENS_B_UPPER: f64 = 0.261_497_212_9;

/// Upper bound for `Σ_p p^{-2}`.
const PRIME_ZETA_TWO_UPPER: f64 = 0.452_247_420_1;

type Histogram = [u64; OMEGA_SLOTS];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumRecord {
    pub x: u64,
    pub m: f64,
    pub value: f64,
    /// Number of squarefree `n ≤ x`.
    pub terms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundMargin {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

impl BoundMargin {
    fn from_logs(lhs: f64, log_lhs: f64, log_rhs: f64) -> BoundMargin {
        BoundMargin {
            lhs,
            rhs: log_rhs.exp(),
            ratio: if lhs == 0.0 { 0.0 } else { (log_lhs - log_rhs).exp() },
        }
    }

    pub fn holds(&self) -> bool {
        self.ratio <= 1.0
    }
}

/// Squarefree ω-histograms of `[1, x]` at every `x` of the ascending `marks`.
fn omega_histograms(marks: &[u64]) -> Vec<Histogram> {
    let Some(&top) = marks.last() else {
        return Vec::new();
    };
    let base = sieve::primes_up_to(isqrt(top));
    let blocks = block_bounds(1, top, DEFAULT_BLOCK_SIZE);
    // per block, histogram of each segment between consecutive marks
    let segments: Vec<Vec<(usize, Histogram)>> = blocks
        .par_iter()
        .map(|&(lo, hi)| {
            let block = sieve_block(lo, hi, &base).expect("base covers √top");
            let mut out: Vec<(usize, Histogram)> = Vec::new();
            let mut seg = marks.partition_point(|&x| x < lo);
            let mut h = [0u64; OMEGA_SLOTS];
            for n in lo..=hi {
                while n > marks[seg] {
                    out.push((seg, h));
                    h = [0; OMEGA_SLOTS];
                    seg += 1;
                }
                if block.is_squarefree(n) {
                    h[block.omega(n) as usize] += 1;
                }
            }
            out.push((seg, h));
            out
        })
        .collect();
    let mut per_mark = vec![[0u64; OMEGA_SLOTS]; marks.len()];
    for block in segments {
        for (seg, h) in block {
            for k in 0..OMEGA_SLOTS {
                per_mark[seg][k] += h[k];
            }
        }
    }
    for i in 1..per_mark.len() {
        for k in 0..OMEGA_SLOTS {
            per_mark[i][k] += per_mark[i - 1][k];
        }
    }
    per_mark
}

fn weighted_count(h: &Histogram, m: f64) -> f64 {
    let k = m - 1.0;
    // 0^0 = 1: n = 1 always counts
    compensated_sum(h.iter().enumerate().map(|(w, &c)| c as f64 * k.powi(w as i32)))
}

fn check_t_args(x: u64, m: f64) -> Result<()> {
    if x < 1 {
        return Err(Error::domain("t_sum", "x must be ≥ 1"));
    }
    if !(m >= 1.0) || !m.is_finite() {
        return Err(Error::domain("t_sum", format!("m must be ≥ 1, got {m}")));
    }
    Ok(())
}

/// `Σ_{n≤x} μ²(n)(m−1)^{ω(n)}`.
pub fn t_sum(x: u64, m: f64) -> Result<SumRecord> {
    check_t_args(x, m)?;
    let h = omega_histograms(&[x])[0];
    Ok(SumRecord {
        x,
        m,
        value: weighted_count(&h, m),
        terms: h.iter().sum(),
    })
}

/// [`t_sum`] on every `(x, m)` of the grids from a single sieve pass, ordered
/// by `x` then `m`.
pub fn t_sums(x_grid: &[u64], m_grid: &[f64]) -> Result<Vec<SumRecord>> {
    let mut xs = x_grid.to_vec();
    xs.sort_unstable();
    xs.dedup();
    for &x in &xs {
        for &m in m_grid {
            check_t_args(x, m)?;
        }
    }
    let hs = omega_histograms(&xs);
    Ok(xs
        .iter()
        .zip(&hs)
        .flat_map(|(&x, h)| {
            m_grid.iter().map(move |&m| SumRecord {
                x,
                m,
                value: weighted_count(h, m),
                terms: h.iter().sum(),
            })
        })
        .collect())
}

fn check_lemma31(x: u64, m: f64, c3: f64, c5: f64) -> Result<()> {
    if x < 2 {
        return Err(Error::domain("lemma31_margin", format!("need x ≥ 2, got {x}")));
    }
    if !(m > 2.0) || !m.is_finite() {
        return Err(Error::domain("lemma31_margin", format!("need m > 2, got {m}")));
    }
    if !(c3 > 0.0 && c5 > 0.0) {
        return Err(Error::domain("lemma31_margin", "constants must be positive"));
    }
    Ok(())
}

/// `log(m x (log x)^{c5 m})`.
fn lemma31_log_shape(x: u64, m: f64, c5: f64) -> f64 {
    let lx = (x as f64).ln();
    m.ln() + lx + c5 * m * lx.ln()
}

fn lemma31_from_record(rec: &SumRecord, c3: f64, c5: f64) -> BoundMargin {
    let log_rhs = c3.ln() + lemma31_log_shape(rec.x, rec.m, c5);
    BoundMargin::from_logs(rec.value, rec.value.ln(), log_rhs)
}

/// `lhs = t_sum(x, m)` against `rhs = c3·m·x·(log x)^{c5·m}`.
pub fn lemma31_margin(x: u64, m: f64, c3: f64, c5: f64) -> Result<BoundMargin> {
    check_lemma31(x, m, c3, c5)?;
    Ok(lemma31_from_record(&t_sum(x, m)?, c3, c5))
}

#[derive(Debug, Clone)]
pub struct Lemma31Fit {
    pub c3: f64,
    pub c5: f64,
    pub max_ratio: f64,
    pub points: Vec<(SumRecord, BoundMargin)>,
}

/// Search grid for `c5`: 50 points per decade over `[1e-3, 1e2]`.
pub fn c5_search_grid() -> Vec<f64> {
    (0..=250).map(|i| 10f64.powf(-3.0 + i as f64 / 50.0)).collect()
}

/// Smallest `c5` on [`c5_search_grid`] for which some `c3 ≤ 10` makes every
/// margin of the grid hold, with that minimal `c3`. Falls back to `c3 ≤ 1e10`.
pub fn fit_lemma31_constants(x_grid: &[u64], m_grid: &[f64]) -> Result<Lemma31Fit> {
    if x_grid.is_empty() || m_grid.is_empty() {
        return Err(Error::domain("fit_lemma31_constants", "grids must be nonempty"));
    }
    for &x in x_grid {
        for &m in m_grid {
            check_lemma31(x, m, 1.0, 1.0)?;
        }
    }
    let records = t_sums(x_grid, m_grid)?;
    let required_c3 = |c5: f64| {
        records
            .iter()
            .map(|r| (r.value.ln() - lemma31_log_shape(r.x, r.m, c5)).exp())
            .fold(0.0f64, f64::max)
    };
    let grid = c5_search_grid();
    let pick = |cap: f64| grid.iter().map(|&c5| (c5, required_c3(c5))).find(|&(_, c3)| c3 <= cap);
    let (c5, mut c3) = pick(10.0)
        .or_else(|| pick(1e10))
        .ok_or_else(|| Error::NoWitness("no c3 ≤ 1e10 on the c5 search grid".into()))?;
    loop {
        let points: Vec<_> = records.iter().map(|r| (*r, lemma31_from_record(r, c3, c5))).collect();
        let max_ratio = points.iter().map(|(_, b)| b.ratio).fold(0.0, f64::max);
        if max_ratio <= 1.0 {
            return Ok(Lemma31Fit { c3, c5, max_ratio, points });
        }
        c3 *= 1.0 + 4.0 * f64::EPSILON;
    }
}

/// Partial sum of a weighted tail with a certified enclosure of the rest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailSeries {
    pub x: u64,
    pub m: f64,
    pub sigma: f64,
    pub cutoff: u64,
    /// Σ over `x < n ≤ cutoff`.
    pub partial: f64,
    /// Absolute floating error bound of `partial`.
    pub partial_error: f64,
    /// The part over `n > cutoff` lies in `[0, remainder]`.
    pub remainder: f64,
}

impl TailSeries {
    pub fn lower(&self) -> f64 {
        (self.partial - self.partial_error).max(0.0)
    }

    pub fn upper(&self) -> f64 {
        self.partial + self.partial_error + self.remainder
    }
}

/// `μ²(n)(m−1)^{ω(n)} n^{-2σ}` summed over `lo ≤ n ≤ hi`, plus the squarefree
/// ω-histogram of the same range.
fn weighted_block(lo: u64, hi: u64, base: &sieve::PrimeList, k: f64, s: f64) -> (CompensatedSum, Histogram) {
    let block = sieve_block(lo, hi, base).expect("base covers √hi");
    let mut acc = CompensatedSum::new();
    let mut h = [0u64; OMEGA_SLOTS];
    for n in lo..=hi {
        if !block.is_squarefree(n) {
            continue;
        }
        let w = block.omega(n);
        h[w as usize] += 1;
        let ln_n = (n as f64).ln();
        let v = k.powi(w as i32) * (-s * ln_n).exp();
        let rel = power_weight_rel_error(s, ln_n) + (w as f64 + 2.0) * UNIT_ROUNDOFF;
        acc.add_inexact(v, v * rel);
    }
    (acc, h)
}

/// Upper bound on `Σ_{n>C} μ²(n) k^{ω(n)} n^{-s}` given `G(C) = Σ_{n≤C}`.
///
/// Partial summation gives `s∫_C^∞ G(t)t^{-s-1}dt − G(C)C^{-s}` for any
/// majorant `G(t)` of the counting function on `t ≥ C`:
///
/// * `k ≤ 1`: `G(t) ≤ #{n ≤ t : 4, 9, 25 ∤ n} ≤ 0.64t + 8`.
/// * `k > 1`: writing `μ²k^ω = 1 * h` with `h(p) = k−1`, `h(p²) = −k`,
///   `G(t) ≤ t Σ_{d≤t} |h(d)|/d ≤ t exp((k−1)Σ_{p≤t} 1/p + k Σ_p p^{-2})`,
///   and `Σ_{p≤t} 1/p < log log t + B + 1/log² t`.
fn tail_remainder(k: f64, s: f64, cutoff: u64, g_at_cutoff: f64) -> f64 {
    let c = cutoff as f64;
    let lc = c.ln();
    let integral = if k <= 1.0 {
        // s∫ (0.64t + 8) t^{-s-1}
        s * (0.64 * c.powf(1.0 - s) / (s - 1.0) + 8.0 * c.powf(-s) / s)
    } else {
        // G(t) ≤ A t (log t)^j with j = k−1
        let j = k - 1.0;
        let log_a = j * (MERTENS_B_UPPER + 1.0 / (lc * lc)) + k * PRIME_ZETA_TWO_UPPER;
        // ∫_C^∞ t^{-s}(log t)^j dt = Γ(j+1, (s−1)log C)/(s−1)^{j+1}
        let a = j + 1.0;
        let z = (s - 1.0) * lc;
        let log_int = ln_gamma(a) + gamma_ur(a, z).ln() - a * (s - 1.0).ln();
        s * (log_a + log_int).exp()
    };
    let r = integral - g_at_cutoff * c.powf(-s);
    // the subtraction is of two nearly-known quantities; pad relatively
    (r + 1e-12 * integral).max(0.0) * (1.0 + 1e-9)
}

/// `Σ_{n>x} μ²(n)(m−1)^{ω(n)} n^{-2σ}`: exact partial sum to `cutoff` and an
/// analytic remainder for `n > cutoff`.
pub fn tail_series(x: u64, m: f64, sigma: f64, cutoff: u64) -> Result<TailSeries> {
    if !(sigma > 0.5) || !sigma.is_finite() {
        return Err(Error::domain("tail_series", format!("need sigma > 1/2, got {sigma}")));
    }
    if !(m >= 1.0) || !m.is_finite() {
        return Err(Error::domain("tail_series", format!("need m ≥ 1, got {m}")));
    }
    if x < 1 || cutoff <= x {
        return Err(Error::domain("tail_series", format!("need 1 ≤ x < cutoff, got x = {x}, cutoff = {cutoff}")));
    }
    let k = m - 1.0;
    let s = 2.0 * sigma;
    if k == 0.0 {
        return Ok(TailSeries { x, m, sigma, cutoff, partial: 0.0, partial_error: 0.0, remainder: 0.0 });
    }
    let base = sieve::primes_up_to(isqrt(cutoff));
    let parts: Vec<(u64, CompensatedSum, Histogram)> = block_bounds(1, cutoff, DEFAULT_BLOCK_SIZE)
        .into_par_iter()
        .map(|(lo, hi)| {
            let lo_tail = lo.max(x + 1);
            if lo_tail > hi {
                let (_, h) = weighted_block(lo, hi, &base, 0.0, s);
                return (lo, CompensatedSum::new(), h);
            }
            let (_, mut h) = if lo < lo_tail {
                weighted_block(lo, lo_tail - 1, &base, 0.0, s)
            } else {
                (CompensatedSum::new(), [0; OMEGA_SLOTS])
            };
            let (acc, h2) = weighted_block(lo_tail, hi, &base, k, s);
            for i in 0..OMEGA_SLOTS {
                h[i] += h2[i];
            }
            (lo, acc, h)
        })
        .collect();
    let mut total = CompensatedSum::new();
    let mut hist = [0u64; OMEGA_SLOTS];
    // largest terms first for accuracy: blocks were produced in ascending n
    for (_, acc, h) in parts.iter().rev() {
        total.merge(acc);
        for i in 0..OMEGA_SLOTS {
            hist[i] += h[i];
        }
    }
    let g_cutoff = weighted_count(&hist, m);
    Ok(TailSeries {
        x,
        m,
        sigma,
        cutoff,
        partial: total.value(),
        partial_error: total.error_bound(),
        remainder: tail_remainder(k, s, cutoff, g_cutoff),
    })
}

/// `Σ_{n≤x} μ²(n)(m−1)^{ω(n)} n^{-2σ}` with its error bound.
pub fn head_series(x: u64, m: f64, sigma: f64) -> Result<(f64, f64)> {
    if x < 1 {
        return Err(Error::domain("head_series", "x must be ≥ 1"));
    }
    let base = sieve::primes_up_to(isqrt(x));
    let parts: Vec<CompensatedSum> = block_bounds(1, x, DEFAULT_BLOCK_SIZE)
        .into_par_iter()
        .map(|(lo, hi)| weighted_block(lo, hi, &base, m - 1.0, 2.0 * sigma).0)
        .collect();
    let mut total = CompensatedSum::new();
    for p in parts.iter().rev() {
        total.merge(p);
    }
    Ok((total.value(), total.error_bound()))
}

/// Default truncation point used by [`lemma32_bound`].
pub fn default_tail_cutoff(x: u64) -> u64 {
    x.saturating_mul(64).max(1 << 20)
}

/// `log` of `m^{c5 m}(σ−½)^{−c8 m}(log x)^{c5 m} x^{1−2σ}`.
fn lemma32_log_shape(x: u64, m: f64, sigma: f64, c5: f64, c8: f64) -> f64 {
    let lx = (x as f64).ln();
    c5 * m * m.ln() - c8 * m * (sigma - 0.5).ln() + c5 * m * lx.ln() + (1.0 - 2.0 * sigma) * lx
}

fn check_lemma32(x: u64, m: f64, sigma: f64, constants: [f64; 3]) -> Result<()> {
    if x < 2 {
        return Err(Error::domain("lemma32_bound", format!("need x ≥ 2, got {x}")));
    }
    if !(m > 2.0) || !m.is_finite() {
        return Err(Error::domain("lemma32_bound", format!("need m > 2, got {m}")));
    }
    if !(sigma > 0.5 && sigma < 1.0) {
        return Err(Error::domain("lemma32_bound", format!("need sigma in (1/2, 1), got {sigma}")));
    }
    if constants.iter().any(|&c| !(c > 0.0)) {
        return Err(Error::domain("lemma32_bound", "constants must be positive"));
    }
    Ok(())
}

/// Upper edge of [`tail_series`] against `c7^m m^{c5 m}(σ−½)^{−c8 m}(log x)^{c5 m} x^{1−2σ}`.
pub fn lemma32_bound(x: u64, m: f64, sigma: f64, c7: f64, c5: f64, c8: f64) -> Result<BoundMargin> {
    lemma32_bound_with_cutoff(x, m, sigma, c7, c5, c8, default_tail_cutoff(x))
}

pub fn lemma32_bound_with_cutoff(
    x: u64,
    m: f64,
    sigma: f64,
    c7: f64,
    c5: f64,
    c8: f64,
    cutoff: u64,
) -> Result<BoundMargin> {
    check_lemma32(x, m, sigma, [c7, c5, c8])?;
    let lhs = tail_series(x, m, sigma, cutoff)?.upper();
    let log_rhs = m * c7.ln() + lemma32_log_shape(x, m, sigma, c5, c8);
    Ok(BoundMargin::from_logs(lhs, lhs.ln(), log_rhs))
}

#[derive(Debug, Clone)]
pub struct Lemma32Fit {
    pub c7: f64,
    pub c5: f64,
    pub c8: f64,
    pub max_ratio: f64,
    /// `(x, m, sigma, margin)` per grid point.
    pub points: Vec<(u64, f64, f64, BoundMargin)>,
}

/// Minimal `c7` making every margin of the grid hold for the given `c5, c8`.
pub fn fit_lemma32_constants(x_grid: &[u64], m_grid: &[f64], sigma_grid: &[f64], c5: f64, c8: f64) -> Result<Lemma32Fit> {
    if x_grid.is_empty() || m_grid.is_empty() || sigma_grid.is_empty() {
        return Err(Error::domain("fit_lemma32_constants", "grids must be nonempty"));
    }
    let mut cells = Vec::new();
    for &x in x_grid {
        for &m in m_grid {
            for &sigma in sigma_grid {
                check_lemma32(x, m, sigma, [1.0, c5, c8])?;
                cells.push((x, m, sigma));
            }
        }
    }
    let uppers: Vec<f64> = cells
        .iter()
        .map(|&(x, m, sigma)| tail_series(x, m, sigma, default_tail_cutoff(x)).map(|t| t.upper()))
        .collect::<Result<_>>()?;
    let mut c7 = cells
        .iter()
        .zip(&uppers)
        .map(|(&(x, m, sigma), &u)| ((u.ln() - lemma32_log_shape(x, m, sigma, c5, c8)) / m).exp())
        .fold(0.0f64, f64::max);
    if !(c7 > 0.0 && c7.is_finite()) {
        return Err(Error::NoWitness(format!("weighted tail fit produced c7 = {c7}")));
    }
    loop {
        let points: Vec<_> = cells
            .iter()
            .zip(&uppers)
            .map(|(&(x, m, sigma), &u)| {
                let log_rhs = m * c7.ln() + lemma32_log_shape(x, m, sigma, c5, c8);
                (x, m, sigma, BoundMargin::from_logs(u, u.ln(), log_rhs))
            })
            .collect();
        let max_ratio = points.iter().map(|p| p.3.ratio).fold(0.0, f64::max);
        if max_ratio <= 1.0 {
            return Ok(Lemma32Fit { c7, c5, c8, max_ratio, points });
        }
        c7 *= 1.0 + 4.0 * f64::EPSILON;
    }
}

/// `Σ_{p≤x} 1/p`.
pub fn mertens_sum(x: u64) -> Result<f64> {
    if x < 2 {
        return Err(Error::domain("mertens_sum", format!("need x ≥ 2, got {x}")));
    }
    let primes = sieve::primes_up_to(x);
    Ok(compensated_sum(primes.primes().iter().rev().map(|&p| 1.0 / p as f64)))
}

/// `Σ_{p≤x} 1/p` as an exact rational.
pub fn mertens_sum_exact(x: u64) -> Result<BigRational> {
    if x < 2 {
        return Err(Error::domain("mertens_sum", format!("need x ≥ 2, got {x}")));
    }
    let primes = sieve::primes_up_to(x);
    // Σ 1/p = (Σ_p Π_{q≠p} q) / Π q
    let mut num = BigInt::from(0);
    let mut den = BigInt::from(1);
    for &p in primes.primes() {
        num = num * p + &den;
        den *= p;
    }
    Ok(BigRational::new(num, den))
}

/// `θ(x) = Σ_{p≤x} log p`.
pub fn chebyshev_theta(x: u64) -> f64 {
    let primes = sieve::primes_up_to(x);
    compensated_sum(primes.primes().iter().map(|&p| (p as f64).ln()))
}

/// `(m−1)θ(x)` against `c2 (m−1) x`.
pub fn chebyshev_sum(x: u64, m: f64, c2: f64) -> Result<BoundMargin> {
    if x < 2 {
        return Err(Error::domain("chebyshev_sum", format!("need x ≥ 2, got {x}")));
    }
    if !(m > 1.0) || !m.is_finite() {
        return Err(Error::domain("chebyshev_sum", format!("need m > 1, got {m}")));
    }
    if !(c2 > 0.0) {
        return Err(Error::domain("chebyshev_sum", "c2 must be positive"));
    }
    let theta = chebyshev_theta(x);
    let lhs = (m - 1.0) * theta;
    let rhs = c2 * (m - 1.0) * x as f64;
    Ok(BoundMargin { lhs, rhs, ratio: theta / (c2 * x as f64) })
}

pub const DEFAULT_CHEBYSHEV_C2: f64 = 1.04;

/// Largest `θ(x)/x` over real `x ∈ [2, x_max]` and where it is attained.
///
/// `θ(x)/x` decreases between primes, so the supremum is taken at a prime.
pub fn chebyshev_sweep(x_max: u64) -> Result<(u64, f64)> {
    if x_max < 2 {
        return Err(Error::domain("chebyshev_sweep", "need x_max ≥ 2"));
    }
    let primes = sieve::primes_up_to(x_max);
    let mut theta = CompensatedSum::new();
    let mut best = (2, 0.0);
    for &p in primes.primes() {
        theta.add((p as f64).ln());
        let r = theta.value() / p as f64;
        if r > best.1 {
            best = (p, r);
        }
    }
    Ok(best)
}

/// One row of a grid report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRow {
    pub x: u64,
    pub m: f64,
    pub sigma: Option<f64>,
    pub margin: BoundMargin,
}

/// Writes `x,m,sigma,lhs,rhs,ratio`; `sigma` is empty for unweighted sums.
pub fn write_grid_csv<W: Write>(rows: &[GridRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "m", "sigma", "lhs", "rhs", "ratio"])?;
    for r in rows {
        w.write_record([
            r.x.to_string(),
            csv_float(r.m),
            r.sigma.map(csv_float).unwrap_or_default(),
            csv_float(r.margin.lhs),
            csv_float(r.margin.rhs),
            csv_float(r.margin.ratio),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sieve::arith_signature;

    fn brute_t(x: u64, m: f64) -> f64 {
        (1..=x)
            .map(|n| arith_signature(n).unwrap())
            .filter(|s| s.is_squarefree)
            .map(|s| (m - 1.0).powi(s.omega as i32))
            .sum()
    }

    #[test]
    fn t_sum_examples() {
        assert_eq!(t_sum(10, 3.0).unwrap().value, 17.0);
        assert_eq!(t_sum(10, 3.0).unwrap().terms, 7);
        for x in [1, 2, 10, 1000] {
            assert_eq!(t_sum(x, 1.0).unwrap().value, 1.0);
        }
        assert_eq!(t_sum(1, 5.0).unwrap().value, 1.0);
        for x in [1, 17, 500, 3000] {
            for m in [2.0, 2.5, 3.0, 7.0] {
                assert_eq!(t_sum(x, m).unwrap().value, brute_t(x, m), "x = {x}, m = {m}");
            }
        }
        assert!(t_sum(0, 3.0).is_err());
    }

    #[test]
    fn squarefree_counts() {
        assert_eq!(t_sum(100, 2.0).unwrap().value, 61.0);
        assert_eq!(t_sum(1_000_000, 2.0).unwrap().value, 607_926.0);
        let grid = t_sums(&[1000, 10, 100_000, 100], &[2.0, 3.0]).unwrap();
        assert_eq!(grid.len(), 8);
        assert_eq!((grid[0].x, grid[1].m), (10, 3.0));
        assert_eq!(grid[1].value, 17.0);
        assert_eq!(grid[6].value, 60_794.0);
    }

    #[test]
    fn lemma31_example() {
        let b = lemma31_margin(10, 3.0, 1.0, 1.0).unwrap();
        assert_eq!(b.lhs, 17.0);
        assert!((b.rhs - 366.2).abs() < 0.1, "{}", b.rhs);
        assert!((b.ratio - 0.0464).abs() < 1e-4);
        assert!(lemma31_margin(1, 3.0, 1.0, 1.0).is_err());
        assert!(lemma31_margin(10, 2.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn lemma31_fit_small() {
        let fit = fit_lemma31_constants(&[10], &[3.0]).unwrap();
        assert_eq!(fit.c5, 1e-3);
        assert!(fit.max_ratio <= 1.0 && fit.max_ratio > 1.0 - 1e-12, "{}", fit.max_ratio);
        let fit = fit_lemma31_constants(&[2, 3, 5], &[2.5]).unwrap();
        assert!(fit.max_ratio <= 1.0);
        let fit = fit_lemma31_constants(&[100, 1000, 10_000], &[3.0, 5.0]).unwrap();
        assert!(fit.c3 <= 10.0);
        assert!(fit.points.iter().all(|(_, b)| b.holds()));
    }

    #[test]
    fn tail_example() {
        let t = tail_series(1, 2.0, 1.0, 1_000_000).unwrap();
        let closed = 15.0 / (std::f64::consts::PI * std::f64::consts::PI) - 1.0;
        assert!(t.remainder < 1e-6, "{}", t.remainder);
        assert!((t.partial - 0.519817).abs() < 1e-6, "{}", t.partial);
        assert!(t.lower() <= closed && closed <= t.upper(), "{t:?} vs {closed}");
        let zero = tail_series(5, 1.0, 0.75, 100).unwrap();
        assert_eq!((zero.partial, zero.remainder), (0.0, 0.0));
        assert!(tail_series(5, 2.0, 0.5, 100).is_err());
        assert!(tail_series(5, 2.0, 0.75, 5).is_err());
    }

    #[test]
    fn tail_remainder_is_an_upper_bound() {
        // compare the certified remainder at a small cutoff to a much longer partial sum
        for (m, sigma) in [(2.0, 1.0), (3.0, 0.9), (5.0, 1.0), (2.5, 0.8), (1.5, 0.9)] {
            let short = tail_series(1, m, sigma, 1000).unwrap();
            let long = tail_series(1000, m, sigma, 1_000_000).unwrap();
            assert!(long.lower() <= short.remainder, "m = {m}, σ = {sigma}: {} > {}", long.lower(), short.remainder);
        }
    }

    #[test]
    fn partition_consistency() {
        for (m, sigma) in [(3.0, 0.75), (5.0, 0.6)] {
            let cutoff = 200_000;
            let mut totals = Vec::new();
            for x in [10, 1000, 50_000] {
                let (h, he) = head_series(x, m, sigma).unwrap();
                let t = tail_series(x, m, sigma, cutoff).unwrap();
                totals.push((h + t.partial, he + t.partial_error));
            }
            for w in totals.windows(2) {
                assert!((w[0].0 - w[1].0).abs() <= w[0].1 + w[1].1, "{w:?}");
            }
        }
    }

    #[test]
    fn tail_decreasing_in_x() {
        let a = tail_series(10, 3.0, 0.75, 10_000).unwrap().partial;
        let b = tail_series(100, 3.0, 0.75, 10_000).unwrap().partial;
        assert!(a > b && b > 0.0);
    }

    #[test]
    fn lemma32_shape() {
        let near = lemma32_bound_with_cutoff(100, 3.0, 0.5001, 1.0, 1.0, 1.0, 10_000).unwrap();
        let far = lemma32_bound_with_cutoff(100, 3.0, 0.6, 1.0, 1.0, 1.0, 10_000).unwrap();
        assert!(near.rhs > far.rhs);
        assert!(lemma32_bound(100, 3.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn mertens_examples() {
        assert_eq!(mertens_sum_exact(10).unwrap(), BigRational::new(247.into(), 210.into()));
        assert!((mertens_sum(10).unwrap() - 247.0 / 210.0).abs() < 1e-15);
        assert_eq!(mertens_sum(2).unwrap(), 0.5);
        let m = mertens_sum(1_000_000).unwrap() - (1e6f64).ln().ln();
        assert!((0.26..=0.27).contains(&m), "{m}");
    }

    #[test]
    fn chebyshev_examples() {
        let b = chebyshev_sum(10, 4.0, 1.0).unwrap();
        assert!((b.lhs / 3.0 - 210f64.ln()).abs() < 1e-12);
        assert!((b.ratio - 0.5347).abs() < 1e-4);
        let b = chebyshev_sum(2, 2.0, 1.0).unwrap();
        assert!((b.ratio - 0.3466).abs() < 1e-4);
        let (_, worst) = chebyshev_sweep(100_000).unwrap();
        assert!(worst < 1.04);
    }

    #[test]
    fn grid_csv_header() {
        let b = lemma31_margin(10, 3.0, 1.0, 1.0).unwrap();
        let mut buf = Vec::new();
        write_grid_csv(&[GridRow { x: 10, m: 3.0, sigma: None, margin: b }], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("x,m,sigma,lhs,rhs,ratio\n10,3.0,,17.0,"), "{s}");
    }
}
