//! Exact enumeration over every sign assignment of a small prime universe.
//!
//! With `k = π(N) ≤ 24` primes there are `2^k` equally likely assignments, so
//! probabilities are exact dyadic fractions. Partial sums are decided with
//! outward-rounded interval arithmetic; at `σ = 1` any interval that straddles
//! zero is re-decided in exact rational arithmetic, so ties such as
//! `1 − 1/2 − 1/3 − 1/6 = 0` are classified correctly. For other `σ` an
//! undecided interval is reported as an error rather than guessed.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sampler::Mode;
use crate::sieve::{self, PrimeList};
use crate::summation::power_weight_rel_error;

/// Largest universe the oracle will enumerate: `2^24` assignments.
pub const MAX_UNIVERSE_BITS: usize = 24;

/// Exact rational coefficients `a(n)`.
pub type ExactCoeffs = BTreeMap<u64, BigRational>;

/// `a(n) = 1/n` for `1 ≤ n ≤ N`.
pub fn reciprocal_coeffs(n_max: u64) -> ExactCoeffs {
    (1..=n_max)
        .map(|n| (n, BigRational::new(BigInt::one(), BigInt::from(n))))
        .collect()
}

/// How the oracle certified its answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactMethod {
    /// Interval filtering with a rational tie-breaker; exact.
    Rational,
    /// Outward-rounded interval arithmetic; every decision certified.
    CertifiedInterval,
}

/// A probability `numerator / denominator` over `2^universe_bits` assignments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactResult {
    pub numerator: u64,
    pub denominator: u64,
    pub universe_bits: usize,
    pub method: ExactMethod,
}

impl ExactResult {
    fn from_count(count: u64, bits: usize, method: ExactMethod) -> ExactResult {
        let total = 1u64 << bits;
        let g = count.gcd(&total);
        let g = if g == 0 { total } else { g };
        ExactResult {
            numerator: count / g,
            denominator: total / g,
            universe_bits: bits,
            method,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    pub fn as_rational(&self) -> BigRational {
        BigRational::new(self.numerator.into(), self.denominator.into())
    }
}

impl fmt::Display for ExactResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

/// Per-n data for a universe on primes `≤ N`: which prime ranks flip the sign
/// of `f(n)`, or `None` when `f(n) = 0`.
struct Universe {
    primes: PrimeList,
    masks: Vec<Option<u32>>,
}

impl Universe {
    fn new(n_max: u64, mode: Mode) -> Result<Universe> {
        let primes = sieve::primes_up_to(n_max);
        if primes.len() > MAX_UNIVERSE_BITS {
            return Err(Error::EnumerationTooLarge {
                primes: primes.len(),
                max: MAX_UNIVERSE_BITS,
            });
        }
        let mut masks = vec![None; n_max as usize + 1];
        for n in 1..=n_max {
            let sig = sieve::arith_signature(n)?;
            if mode == Mode::SquarefreeMult && !sig.is_squarefree {
                continue;
            }
            let mut mask = 0u32;
            for (&p, &e) in sig.distinct_primes.iter().zip(&sig.exponents) {
                if e % 2 == 1 {
                    mask |= 1 << primes.rank_of(p).expect("prime within universe");
                }
            }
            masks[n as usize] = Some(mask);
        }
        Ok(Universe { primes, masks })
    }

    fn bits(&self) -> usize {
        self.primes.len()
    }

    #[inline]
    fn f(&self, n: usize, assignment: u32) -> i8 {
        match self.masks[n] {
            None => 0,
            Some(m) if (m & assignment).count_ones() % 2 == 1 => -1,
            Some(_) => 1,
        }
    }
}

/// Outward-rounded enclosures of `n^{-σ}`.
fn weight_intervals(n_max: u64, sigma: f64) -> Vec<(f64, f64)> {
    (0..=n_max)
        .map(|n| {
            if n == 0 {
                return (0.0, 0.0);
            }
            let ln = (n as f64).ln();
            let w = if sigma == 1.0 { 1.0 / n as f64 } else { (-sigma * ln).exp() };
            let e = w * power_weight_rel_error(sigma, ln);
            ((w - e).next_down(), (w + e).next_up())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sign {
    Positive,
    NotPositive,
}

/// Decides `S(y) > 0` for all `y ∈ (x, N]` given values `f(1..=N)` produced by
/// `f_at`.
fn decide_positivity(
    n_max: u64,
    x: u64,
    sigma: f64,
    weights: &[(f64, f64)],
    f_at: impl Fn(usize) -> i8,
) -> Result<Sign> {
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    for n in 1..=n_max as usize {
        let (wl, wh) = weights[n];
        match f_at(n) {
            0 => {}
            1 => {
                lo = (lo + wl).next_down();
                hi = (hi + wh).next_up();
            }
            _ => {
                lo = (lo - wh).next_down();
                hi = (hi - wl).next_up();
            }
        }
        if n as u64 > x {
            if hi <= 0.0 {
                return Ok(Sign::NotPositive);
            }
            if lo <= 0.0 {
                if sigma == 1.0 {
                    return Ok(decide_sigma_one_exact(n_max, x, &f_at));
                }
                return Err(Error::Undecided { y: n as u64 });
            }
        }
    }
    Ok(Sign::Positive)
}

/// Exact rational decision at `σ = 1`.
fn decide_sigma_one_exact(n_max: u64, x: u64, f_at: &impl Fn(usize) -> i8) -> Sign {
    let mut lcm = BigUint::one();
    for n in 1..=n_max {
        lcm = lcm.lcm(&BigUint::from(n));
    }
    let lcm = BigInt::from(lcm);
    let mut s = BigInt::zero();
    for n in 1..=n_max as usize {
        match f_at(n) {
            0 => {}
            1 => s += &lcm / BigInt::from(n),
            _ => s -= &lcm / BigInt::from(n),
        }
        if n as u64 > x && !s.is_positive() {
            return Sign::NotPositive;
        }
    }
    Sign::Positive
}

fn method_for(sigma: f64) -> ExactMethod {
    if sigma == 1.0 {
        ExactMethod::Rational
    } else {
        ExactMethod::CertifiedInterval
    }
}

/// Exact probability that `S_σ(y) > 0` for every integer `y ∈ (x, N]`.
pub fn exact_probability(n_max: u64, sigma: f64, x: u64, mode: Mode) -> Result<ExactResult> {
    if n_max == 0 {
        return Err(Error::domain("exact_probability", "N must be ≥ 1"));
    }
    if x >= n_max {
        return Err(Error::domain("exact_probability", format!("need x < N, got x = {x}, N = {n_max}")));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::domain("exact_probability", format!("sigma must be positive, got {sigma}")));
    }
    let universe = Universe::new(n_max, mode)?;
    let weights = weight_intervals(n_max, sigma);
    let bits = universe.bits();
    let count = (0..1u64 << bits)
        .into_par_iter()
        .map(|a| decide_positivity(n_max, x, sigma, &weights, |n| universe.f(n, a as u32)))
        .try_fold(|| 0u64, |acc, s| s.map(|s| acc + (s == Sign::Positive) as u64))
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(ExactResult::from_count(count, bits, method_for(sigma)))
}

/// Exact `P(S > 0)`, `P(S < 0)`, `P(S = 0)` counts for `S = Σ_{n≤N} X_n n^{-σ}`
/// with i.i.d. Rademacher `X_n` (one bit per `n`, `N ≤ 24`), at `σ = 1`.
pub fn exact_iid_sign_counts(n_max: u64) -> Result<(u64, u64, u64)> {
    if n_max as usize > MAX_UNIVERSE_BITS {
        return Err(Error::EnumerationTooLarge {
            primes: n_max as usize,
            max: MAX_UNIVERSE_BITS,
        });
    }
    let mut lcm = 1u128;
    for n in 1..=n_max as u128 {
        lcm = lcm / gcd_u128(lcm, n) * n;
    }
    let weights: Vec<i128> = (1..=n_max as u128).map(|n| (lcm / n) as i128).collect();
    let (pos, neg, zero) = (0..1u64 << n_max)
        .into_par_iter()
        .map(|a| {
            let s: i128 = weights
                .iter()
                .enumerate()
                .map(|(i, &w)| if (a >> i) & 1 == 1 { -w } else { w })
                .sum();
            ((s > 0) as u64, (s < 0) as u64, (s == 0) as u64)
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    Ok((pos, neg, zero))
}

fn gcd_u128(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd_u128(b, a % b)
    }
}

/// Common denominator and integer numerators of the coefficients.
fn integerize(coeffs: &ExactCoeffs) -> (BigInt, Vec<(u64, BigInt)>) {
    let mut d = BigInt::one();
    for c in coeffs.values() {
        d = d.lcm(c.denom());
    }
    let nums = coeffs
        .iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(&n, c)| (n, c.numer() * (&d / c.denom())))
        .collect();
    (d, nums)
}

fn moment_enumeration(n_max: u64, coeffs: &ExactCoeffs, m: u32, absolute: bool) -> Result<BigRational> {
    if let Some((&n, _)) = coeffs.iter().find(|(&n, _)| n == 0 || n > n_max) {
        return Err(Error::domain("exact_moment", format!("coefficient index {n} outside [1, {n_max}]")));
    }
    let universe = Universe::new(n_max, Mode::SquarefreeMult)?;
    let bits = universe.bits();
    let (d, nums) = integerize(coeffs);
    let total: BigInt = (0..1u64 << bits)
        .into_par_iter()
        .map(|a| {
            let mut s = BigInt::zero();
            for (n, c) in &nums {
                match universe.f(*n as usize, a as u32) {
                    0 => {}
                    1 => s += c,
                    _ => s -= c,
                }
            }
            let s = if absolute { s.abs() } else { s };
            num_traits::pow(s, m as usize)
        })
        .reduce(BigInt::zero, |a, b| a + b);
    let denom = num_traits::pow(d, m as usize) << bits;
    Ok(BigRational::new(total, denom))
}

/// Exact `E (Σ_{n≤N} a(n) f(n))^m` over all `2^{π(N)}` assignments.
///
/// Odd `m` gives the signed moment; use [`exact_abs_moment`] for `E|·|^m`.
pub fn exact_moment(n_max: u64, coeffs: &ExactCoeffs, m: u32) -> Result<BigRational> {
    moment_enumeration(n_max, coeffs, m, false)
}

/// Exact `E |Σ_{n≤N} a(n) f(n)|^m`; exact for every integer `m`, odd included.
pub fn exact_abs_moment(n_max: u64, coeffs: &ExactCoeffs, m: u32) -> Result<BigRational> {
    moment_enumeration(n_max, coeffs, m, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::SignAssignment;
    use crate::series::partial_sum_trajectory;
    use std::sync::Arc;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn seven_eighths_at_ten() {
        let r = exact_probability(10, 1.0, 1, Mode::SquarefreeMult).unwrap();
        assert_eq!((r.numerator, r.denominator), (7, 8));
        assert_eq!(r.universe_bits, 4);
        assert_eq!(r.to_string(), "7/8");
        assert_eq!(r.method, ExactMethod::Rational);
    }

    #[test]
    fn trivial_universes() {
        let r = exact_probability(1, 1.0, 0, Mode::SquarefreeMult).unwrap();
        assert_eq!((r.numerator, r.denominator), (1, 1));
        let r = exact_probability(2, 1.0, 1, Mode::SquarefreeMult).unwrap();
        assert_eq!((r.numerator, r.denominator), (1, 1));
        assert!(exact_probability(10, 1.0, 10, Mode::SquarefreeMult).is_err());
    }

    #[test]
    fn refuses_large_universe() {
        let err = exact_probability(97, 1.0, 1, Mode::SquarefreeMult).unwrap_err();
        assert_eq!(err, Error::EnumerationTooLarge { primes: 25, max: 24 });
    }

    /// Brute force through the series engine: one trajectory per assignment.
    fn brute_probability(n: u64, sigma: f64, x: u64, mode: Mode) -> f64 {
        let primes = Arc::new(sieve::primes_up_to(n));
        let k = primes.len();
        let mut pass = 0;
        for mask in 0..1u64 << k {
            let a = SignAssignment::from_mask(primes.clone(), mask, mode);
            let t = partial_sum_trajectory(&a, sigma, n, 1).unwrap();
            if t.positivity_check(x).unwrap().is_positive() {
                pass += 1;
            }
        }
        pass as f64 / (1u64 << k) as f64
    }

    #[test]
    fn agrees_with_trajectory_brute_force() {
        for &(n, sigma) in &[(30u64, 1.0), (30, 0.75), (30, 0.6), (20, 0.55)] {
            for mode in [Mode::SquarefreeMult, Mode::CompletelyMult] {
                let r = exact_probability(n, sigma, 1, mode).unwrap();
                assert_eq!(r.to_f64(), brute_probability(n, sigma, 1, mode), "N={n} σ={sigma} {mode:?}");
            }
        }
    }

    #[test]
    fn rational_ties_resolved() {
        // 1 − 1/2 − 1/3 − 1/6 = 0 exactly, while the float enclosure straddles 0
        let f = [0i8, 1, -1, -1, 0, 0, -1];
        let weights = weight_intervals(6, 1.0);
        let sign = decide_positivity(6, 5, 1.0, &weights, |n| f[n]).unwrap();
        assert_eq!(sign, Sign::NotPositive);
        assert_eq!(decide_sigma_one_exact(6, 5, &|n| f[n]), Sign::NotPositive);
        let g = [0i8, 1, -1, -1, 0, 0, 1];
        assert_eq!(decide_positivity(6, 5, 1.0, &weights, |n| g[n]).unwrap(), Sign::Positive);
        // the same cancellation at σ ≠ 1 cannot be decided by intervals alone
        let w = weight_intervals(6, 1.0 - 1e-17);
        assert!(matches!(
            decide_positivity(6, 5, 1.0 - 1e-17, &w, |n| f[n]),
            Ok(Sign::NotPositive) | Err(Error::Undecided { y: 6 })
        ));
    }

    #[test]
    fn iid_signs_are_symmetric() {
        for n in 1..=16 {
            let (pos, neg, zero) = exact_iid_sign_counts(n).unwrap();
            assert_eq!(pos, neg);
            assert_eq!(pos + neg + zero, 1 << n);
        }
    }

    #[test]
    fn moment_examples() {
        let a = reciprocal_coeffs(3);
        assert_eq!(exact_moment(3, &a, 2).unwrap(), q(49, 36));
        assert_eq!(exact_moment(3, &a, 4).unwrap(), q(4417, 1296));
        let mut single = ExactCoeffs::new();
        single.insert(1, q(3, 2));
        for m in 0..6 {
            assert_eq!(exact_moment(1, &single, m).unwrap(), num_traits::pow(q(3, 2), m as usize));
        }
        let mut bad = ExactCoeffs::new();
        bad.insert(5, q(1, 1));
        assert!(exact_moment(3, &bad, 2).is_err());
    }

    #[test]
    fn odd_moments_vanish_on_odd_omega_support() {
        // flipping every prime sign negates f(n) when ω(n) is odd
        let mut a = ExactCoeffs::new();
        for (i, n) in [2u64, 3, 5, 7, 11, 13, 30].into_iter().enumerate() {
            a.insert(n, q(i as i64 + 1, 7));
        }
        for m in [1, 3, 5] {
            assert!(exact_moment(30, &a, m).unwrap().is_zero());
            assert!(exact_abs_moment(30, &a, m).unwrap().is_positive());
        }
    }
}
