//! Seed-reproducible Rademacher random multiplicative functions.
//!
//! # Sign derivation
//!
//! The sign of the prime with zero-based rank `r` in trial `t` under master
//! seed `s` is fixed as follows and will not change between versions:
//!
//! 1. key = 32 bytes: `s` as little-endian u64, followed by the 24 ASCII bytes
//!    of [`SIGN_KEY_TAG`];
//! 2. a ChaCha12 stream is opened with that key and stream id `t`;
//! 3. the stream's `r / 64`-th u64 word (little-endian from the keystream,
//!    via `next_u64`) is read; bit `r % 64` set means `f(p) = -1`.
//!
//! Because ChaCha is counter based, any `(s, t, r)` is addressable directly
//! and trials never share generator state.

use std::sync::Arc;

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::sieve::{self, ArithSignature, PrimeList, DEFAULT_BLOCK_SIZE};

pub const SIGN_KEY_TAG: &[u8; 24] = b"rmf-lab/prime-signs/v1\0\0";

/// How prime signs extend to all integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// `f(n) = μ²(n) ∏_{p|n} f(p)`.
    SquarefreeMult,
    /// `f*(n) = ∏_{p^k || n} f(p)^k`.
    CompletelyMult,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::SquarefreeMult => "squarefree",
            Mode::CompletelyMult => "complete",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "squarefree" | "SQUAREFREE_MULT" => Ok(Mode::SquarefreeMult),
            "complete" | "completely" | "COMPLETELY_MULT" => Ok(Mode::CompletelyMult),
            _ => Err(Error::domain("mode", format!("unknown mode {s:?}"))),
        }
    }
}

/// A value of `f(n)`: one of −1, 0, +1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FValue(i8);

impl FValue {
    pub const ZERO: FValue = FValue(0);
    pub const ONE: FValue = FValue(1);
    pub const MINUS_ONE: FValue = FValue(-1);

    pub fn get(self) -> i8 {
        self.0
    }
}

/// Prime signs for one trial, bit-packed over prime ranks.
#[derive(Debug, Clone)]
pub struct SignAssignment {
    master_seed: u64,
    trial_index: u64,
    mode: Mode,
    primes: Arc<PrimeList>,
    negative: Vec<u64>,
}

fn key_for(master_seed: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..].copy_from_slice(SIGN_KEY_TAG);
    key
}

/// Fills `words` with the sign bits of trial `trial_index`.
pub fn fill_sign_words(master_seed: u64, trial_index: u64, words: &mut [u64]) {
    let mut rng = ChaCha12Rng::from_seed(key_for(master_seed));
    rng.set_stream(trial_index);
    for w in words.iter_mut() {
        *w = rng.next_u64();
    }
}

impl SignAssignment {
    /// Samples the signs of all primes `≤ n`.
    pub fn sample(master_seed: u64, trial_index: u64, n: u64, mode: Mode) -> SignAssignment {
        Self::sample_with_primes(master_seed, trial_index, Arc::new(sieve::primes_up_to(n)), mode)
    }

    /// Samples signs over an existing prime list (shared between trials).
    pub fn sample_with_primes(
        master_seed: u64,
        trial_index: u64,
        primes: Arc<PrimeList>,
        mode: Mode,
    ) -> SignAssignment {
        let mut negative = vec![0u64; primes.len().div_ceil(64)];
        fill_sign_words(master_seed, trial_index, &mut negative);
        if let Some(last) = negative.last_mut() {
            let used = primes.len() % 64;
            if used != 0 {
                *last &= (1u64 << used) - 1;
            }
        }
        SignAssignment {
            master_seed,
            trial_index,
            mode,
            primes,
            negative,
        }
    }

    /// An assignment from explicit signs, one per prime `≤ primes.limit()`.
    pub fn from_signs(primes: Arc<PrimeList>, signs: &[i8], mode: Mode) -> Result<SignAssignment> {
        if signs.len() != primes.len() {
            return Err(Error::domain(
                "from_signs",
                format!("{} signs given for {} primes", signs.len(), primes.len()),
            ));
        }
        let mut negative = vec![0u64; primes.len().div_ceil(64)];
        for (r, &s) in signs.iter().enumerate() {
            match s {
                1 => {}
                -1 => negative[r / 64] |= 1 << (r % 64),
                _ => return Err(Error::domain("from_signs", format!("sign {s} is not ±1"))),
            }
        }
        Ok(SignAssignment {
            master_seed: 0,
            trial_index: 0,
            mode,
            primes,
            negative,
        })
    }

    /// Assignment whose prime signs are given by the low bits of `mask`
    /// (bit `r` set ⇒ the `r`-th prime is negative). The mask is recorded as
    /// the trial index.
    pub fn from_mask(primes: Arc<PrimeList>, mask: u64, mode: Mode) -> SignAssignment {
        assert!(primes.len() <= 64);
        let used = primes.len();
        let keep = if used == 64 { u64::MAX } else { (1u64 << used) - 1 };
        SignAssignment {
            master_seed: 0,
            trial_index: mask,
            mode,
            primes,
            negative: if used == 0 { Vec::new() } else { vec![mask & keep] },
        }
    }

    /// `f(1)` through `f(n)` all +1 primes.
    pub fn all_positive(n: u64, mode: Mode) -> SignAssignment {
        let primes = Arc::new(sieve::primes_up_to(n));
        let negative = vec![0u64; primes.len().div_ceil(64)];
        SignAssignment {
            master_seed: 0,
            trial_index: 0,
            mode,
            primes,
            negative,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn trial_index(&self) -> u64 {
        self.trial_index
    }

    pub fn limit(&self) -> u64 {
        self.primes.limit()
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn primes(&self) -> &PrimeList {
        &self.primes
    }

    pub fn shared_primes(&self) -> Arc<PrimeList> {
        Arc::clone(&self.primes)
    }

    /// The same signs under a different extension mode.
    pub fn with_mode(&self, mode: Mode) -> SignAssignment {
        SignAssignment {
            mode,
            ..self.clone()
        }
    }

    /// Sign of the prime with rank `r`, as ±1.
    #[inline]
    pub fn sign_by_rank(&self, r: usize) -> i8 {
        if self.is_negative_rank(r) {
            -1
        } else {
            1
        }
    }

    #[inline]
    pub fn is_negative_rank(&self, r: usize) -> bool {
        (self.negative[r / 64] >> (r % 64)) & 1 == 1
    }

    /// Sign of prime `p`, if `p` is a prime `≤ limit`.
    pub fn sign_of_prime(&self, p: u64) -> Option<i8> {
        self.primes.rank_of(p).map(|r| self.sign_by_rank(r))
    }

    /// Sign vector in prime order.
    pub fn signs(&self) -> Vec<i8> {
        (0..self.primes.len()).map(|r| self.sign_by_rank(r)).collect()
    }

    /// Raw bitset words (bit set ⇒ negative).
    pub fn sign_words(&self) -> &[u64] {
        &self.negative
    }

    fn sign_checked(&self, n: u64, p: u64) -> Result<i8> {
        self.sign_of_prime(p).ok_or(Error::OutOfRange {
            n,
            prime: p,
            limit: self.limit(),
        })
    }

    fn value_from_parts(&self, n: u64, primes: &[u64], exps: impl Iterator<Item = u32>, squarefree: bool) -> Result<FValue> {
        if self.mode == Mode::SquarefreeMult && !squarefree {
            // still validate the range contract
            for &p in primes {
                self.sign_checked(n, p)?;
            }
            return Ok(FValue::ZERO);
        }
        let mut v = 1i8;
        for (&p, e) in primes.iter().zip(exps) {
            let s = self.sign_checked(n, p)?;
            if e % 2 == 1 {
                v *= s;
            }
        }
        Ok(FValue(v))
    }

    /// `f(n)` from a precomputed signature of `n`.
    pub fn f_value(&self, n: u64, sig: &ArithSignature) -> Result<FValue> {
        if n == 0 {
            return Err(Error::domain("f_value", "n must be positive"));
        }
        debug_assert_eq!(sig.n, n);
        self.value_from_parts(n, &sig.distinct_primes, sig.exponents.iter().copied(), sig.is_squarefree)
    }

    /// `f(n)` by direct factorization.
    pub fn f_at(&self, n: u64) -> Result<FValue> {
        let sig = sieve::arith_signature(n)?;
        self.f_value(n, &sig)
    }

    /// `f(lo), …, f(hi)` through the segmented sieve.
    pub fn stream_f(&self, lo: u64, hi: u64) -> Result<Vec<FValue>> {
        let limit = self.limit();
        if hi > limit.saturating_mul(limit).max(1) {
            return Err(Error::domain(
                "stream_f",
                format!("hi = {hi} exceeds limit² = {}", limit.saturating_mul(limit)),
            ));
        }
        let mut out = Vec::with_capacity((hi.saturating_sub(lo) + 1) as usize);
        for block in sieve::sieve_range(lo, hi, DEFAULT_BLOCK_SIZE, &self.primes)? {
            for n in block.lo()..=block.hi() {
                out.push(self.value_from_parts(
                    n,
                    block.primes_of(n),
                    block.exponents_of(n).iter().map(|&e| e as u32),
                    block.is_squarefree(n),
                )?);
            }
        }
        Ok(out)
    }
}

/// Precomputed recurrence `f(n) = f(p)·f(n/p)` (p the least prime factor of
/// `n`) for `1 ≤ n ≤ N`, shared across many trials.
#[derive(Debug, Clone)]
pub struct FTable {
    n_max: u64,
    mode: Mode,
    primes: Arc<PrimeList>,
    /// Rank of the least prime factor, or `u32::MAX` when `f(n) = 0` forced.
    rank: Vec<u32>,
    parent: Vec<u32>,
}

const ZERO_RANK: u32 = u32::MAX;

impl FTable {
    pub fn new(n_max: u64, mode: Mode) -> FTable {
        assert!(n_max < u32::MAX as u64, "FTable supports n < 2^32");
        let primes = Arc::new(sieve::primes_up_to(n_max));
        let len = n_max as usize + 1;
        let mut lpf_rank = vec![ZERO_RANK; len];
        for (r, &p) in primes.primes().iter().enumerate() {
            let p = p as usize;
            let mut m = p;
            while m < len {
                if lpf_rank[m] == ZERO_RANK {
                    lpf_rank[m] = r as u32;
                }
                m += p;
            }
        }
        let mut rank = vec![ZERO_RANK; len];
        let mut parent = vec![0u32; len];
        for n in 2..len {
            let r = lpf_rank[n];
            let p = primes.primes()[r as usize] as usize;
            let m = n / p;
            parent[n] = m as u32;
            rank[n] = if mode == Mode::SquarefreeMult && m % p == 0 { ZERO_RANK } else { r };
        }
        FTable {
            n_max,
            mode,
            primes,
            rank,
            parent,
        }
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn primes(&self) -> Arc<PrimeList> {
        Arc::clone(&self.primes)
    }

    /// Writes `f(0..=N)` into `out` (index 0 is set to 0).
    pub fn evaluate_words(&self, negative: &[u64], out: &mut [i8]) {
        assert_eq!(out.len(), self.rank.len());
        out[0] = 0;
        if out.len() > 1 {
            out[1] = 1;
        }
        for n in 2..out.len() {
            let r = self.rank[n];
            out[n] = if r == ZERO_RANK {
                0
            } else {
                let r = r as usize;
                let s = if (negative[r / 64] >> (r % 64)) & 1 == 1 { -1 } else { 1 };
                s * out[self.parent[n] as usize]
            };
        }
    }

    /// Samples trial `trial_index` and evaluates it into `out`, reusing `words`.
    pub fn evaluate_trial(&self, master_seed: u64, trial_index: u64, words: &mut Vec<u64>, out: &mut [i8]) {
        words.resize(self.primes.len().div_ceil(64), 0);
        fill_sign_words(master_seed, trial_index, words);
        self.evaluate_words(words, out);
    }

    pub fn evaluate(&self, a: &SignAssignment, out: &mut [i8]) {
        assert!(a.primes().len() >= self.primes.len(), "assignment covers fewer primes than the table");
        self.evaluate_words(a.sign_words(), out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }

    #[test]
    fn deterministic_and_trial_sensitive() {
        let a = SignAssignment::sample(42, 7, 10_000, Mode::SquarefreeMult);
        let b = SignAssignment::sample(42, 7, 10_000, Mode::SquarefreeMult);
        assert_eq!(a.signs(), b.signs());
        let c = SignAssignment::sample(42, 8, 10_000, Mode::SquarefreeMult);
        assert_ne!(a.signs(), c.signs());
        let d = SignAssignment::sample(43, 7, 10_000, Mode::SquarefreeMult);
        assert_ne!(a.signs(), d.signs());
        let small = SignAssignment::sample(1, 0, 10, Mode::SquarefreeMult);
        assert_eq!(small.signs().len(), 4);
        assert!(small.signs().iter().all(|&s| s == 1 || s == -1));
    }

    #[test]
    fn prefix_stable_across_limits() {
        let a = SignAssignment::sample(9, 3, 100, Mode::SquarefreeMult);
        let b = SignAssignment::sample(9, 3, 100_000, Mode::SquarefreeMult);
        assert_eq!(a.signs()[..], b.signs()[..a.signs().len()]);
    }

    #[test]
    fn mean_of_f2_is_near_zero() {
        let trials = 100_000u64;
        let primes = Arc::new(sieve::primes_up_to(2));
        let sum: i64 = (0..trials)
            .map(|t| SignAssignment::sample_with_primes(5, t, primes.clone(), Mode::SquarefreeMult).sign_by_rank(0) as i64)
            .sum();
        let mean = sum as f64 / trials as f64;
        assert!(mean.abs() <= 0.02, "mean {mean}");
    }

    #[test]
    fn f_value_examples() {
        let a = SignAssignment::sample(3, 1, 100, Mode::SquarefreeMult);
        let star = a.with_mode(Mode::CompletelyMult);
        assert_eq!(a.f_at(1).unwrap(), FValue::ONE);
        assert_eq!(star.f_at(1).unwrap(), FValue::ONE);
        assert_eq!(a.f_at(4).unwrap(), FValue::ZERO);
        assert_eq!(star.f_at(4).unwrap(), FValue::ONE);
        let err = a.f_at(202).unwrap_err();
        assert_eq!(err, Error::OutOfRange { n: 202, prime: 101, limit: 100 });
    }

    #[test]
    fn stream_matches_pointwise() {
        let a = SignAssignment::sample(11, 2, 10_000, Mode::SquarefreeMult);
        let s = a.stream_f(1, 10_000).unwrap();
        for (i, v) in s.iter().enumerate() {
            assert_eq!(*v, a.f_at(i as u64 + 1).unwrap());
        }
        assert_eq!(a.stream_f(1, 1).unwrap(), vec![FValue::ONE]);
        let narrow = SignAssignment::sample(11, 2, 100, Mode::SquarefreeMult);
        assert!(narrow.stream_f(1, 10_001).is_err());
        // cofactor above the assignment limit
        let small = SignAssignment::sample(11, 2, 10, Mode::SquarefreeMult);
        assert!(matches!(small.stream_f(1, 22), Err(Error::OutOfRange { prime: 11, .. })));
    }

    #[test]
    fn all_positive_is_mu_squared() {
        let a = SignAssignment::all_positive(10, Mode::SquarefreeMult);
        let v: Vec<i8> = a.stream_f(1, 10).unwrap().into_iter().map(FValue::get).collect();
        assert_eq!(v, vec![1, 1, 1, 0, 1, 1, 1, 0, 0, 1]);
    }

    #[test]
    fn multiplicative_on_coprimes() {
        for mode in [Mode::SquarefreeMult, Mode::CompletelyMult] {
            for seed in 0..10 {
                let a = SignAssignment::sample(seed, 0, 1000, mode);
                let f = a.stream_f(1, 1000).unwrap();
                let f = |n: u64| f[n as usize - 1].get();
                for x in 1..=1000u64 {
                    for y in 1..=(1000 / x) {
                        if gcd(x, y) == 1 {
                            assert_eq!(f(x * y), f(x) * f(y), "mode {mode:?} {x}·{y}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn table_matches_stream() {
        for mode in [Mode::SquarefreeMult, Mode::CompletelyMult] {
            let table = FTable::new(5000, mode);
            let mut out = vec![0i8; 5001];
            let mut words = Vec::new();
            table.evaluate_trial(77, 12, &mut words, &mut out);
            let a = SignAssignment::sample(77, 12, 5000, mode);
            let s = a.stream_f(1, 5000).unwrap();
            for n in 1..=5000usize {
                assert_eq!(out[n], s[n - 1].get());
            }
        }
    }

    #[test]
    fn zero_iff_not_squarefree() {
        let a = SignAssignment::sample(1, 1, 3000, Mode::SquarefreeMult);
        let f = a.stream_f(1, 3000).unwrap();
        for n in 1..=3000u64 {
            let sq = sieve::arith_signature(n).unwrap().is_squarefree;
            assert_eq!(f[n as usize - 1] == FValue::ZERO, !sq);
        }
    }
}
