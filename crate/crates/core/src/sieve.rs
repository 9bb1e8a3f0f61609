//! Primes and arithmetic signatures (μ², ω, distinct prime factors).
//!
//! Large ranges are handled by a segmented sieve: a block `[lo, hi]` needs only
//! the base primes up to `√hi`, so memory stays at `O(√N + block)`. Any
//! cofactor left after dividing out the base primes is a single prime above
//! `√hi`.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};

pub const DEFAULT_BLOCK_SIZE: u64 = 1 << 16;

/// Magic header of the on-disk prime cache.
pub const PRIME_CACHE_MAGIC: &[u8; 8] = b"RMFPRIM1";

/// All primes up to `limit`, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeList {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeList {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Zero-based rank of `p` in the list, if `p` is a listed prime.
    pub fn rank_of(&self, p: u64) -> Option<usize> {
        self.primes.binary_search(&p).ok()
    }

    /// Number of listed primes `≤ y`.
    pub fn count_up_to(&self, y: u64) -> usize {
        self.primes.partition_point(|&p| p <= y)
    }

    /// The sublist of primes `≤ n` (requires `n ≤ limit`).
    pub fn truncated(&self, n: u64) -> PrimeList {
        assert!(n <= self.limit, "cannot extend a prime list by truncation");
        PrimeList {
            limit: n,
            primes: self.primes[..self.count_up_to(n)].to_vec(),
        }
    }

    /// Writes the cache format: magic, then each prime as a little-endian u64.
    pub fn write_cache(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(8 + 8 * self.primes.len());
        buf.extend_from_slice(PRIME_CACHE_MAGIC);
        for &p in &self.primes {
            buf.extend_from_slice(&p.to_le_bytes());
        }
        let mut f = fs::File::create(path)?;
        f.write_all(&buf)?;
        Ok(())
    }

    /// Reads a cache file. The file records only primes, so the recovered list
    /// is valid up to its largest prime.
    pub fn read_cache(path: &Path) -> Result<PrimeList> {
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        if bytes.len() < 8 || &bytes[..8] != PRIME_CACHE_MAGIC {
            return Err(Error::Io(format!("{}: bad prime cache header", path.display())));
        }
        let body = &bytes[8..];
        if body.len() % 8 != 0 {
            return Err(Error::Io(format!("{}: truncated prime cache", path.display())));
        }
        let primes: Vec<u64> = body
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if primes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Io(format!("{}: cache not strictly increasing", path.display())));
        }
        let limit = primes.last().copied().unwrap_or(1);
        Ok(PrimeList { limit, primes })
    }
}

/// Primes up to `n` using a cache file when it already covers `n`; otherwise
/// sieves and rewrites the cache.
pub fn primes_up_to_cached(n: u64, cache: &Path) -> Result<PrimeList> {
    if let Ok(cached) = PrimeList::read_cache(cache) {
        if cached.limit() >= n {
            return Ok(cached.truncated(n));
        }
    }
    let list = primes_up_to(n);
    list.write_cache(cache)?;
    Ok(list)
}

pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).map_or(true, |sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

fn simple_sieve(n: usize) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// All primes `≤ n`, ascending.
pub fn primes_up_to(n: u64) -> PrimeList {
    if n < DEFAULT_BLOCK_SIZE {
        let primes = simple_sieve(n as usize);
        return PrimeList { limit: n, primes };
    }
    let root = isqrt(n);
    let base = simple_sieve(root as usize);
    let mut primes = base.clone();
    let mut lo = root + 1;
    let mut mark = vec![false; DEFAULT_BLOCK_SIZE as usize];
    while lo <= n {
        let hi = (lo + DEFAULT_BLOCK_SIZE - 1).min(n);
        let len = (hi - lo + 1) as usize;
        mark[..len].fill(false);
        for &p in &base {
            if p * p > hi {
                break;
            }
            let mut m = (p * p).max(lo.div_ceil(p) * p);
            while m <= hi {
                mark[(m - lo) as usize] = true;
                m += p;
            }
        }
        primes.extend((0..len).filter(|&i| !mark[i]).map(|i| lo + i as u64));
        lo = hi + 1;
    }
    PrimeList { limit: n, primes }
}

/// Squarefree flag, ω(n) and the distinct prime factors of `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArithSignature {
    pub n: u64,
    pub is_squarefree: bool,
    pub omega: u32,
    pub distinct_primes: Vec<u64>,
    /// Multiplicity of each entry of `distinct_primes`.
    pub exponents: Vec<u32>,
}

/// Signature of a single integer by trial division.
pub fn arith_signature(n: u64) -> Result<ArithSignature> {
    if n == 0 {
        return Err(Error::domain("arith_signature", "n must be positive"));
    }
    let mut rem = n;
    let mut distinct_primes = Vec::new();
    let mut exponents = Vec::new();
    let mut p = 2u64;
    while p.checked_mul(p).is_some_and(|sq| sq <= rem) {
        if rem % p == 0 {
            let mut e = 0;
            while rem % p == 0 {
                rem /= p;
                e += 1;
            }
            distinct_primes.push(p);
            exponents.push(e);
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rem > 1 {
        distinct_primes.push(rem);
        exponents.push(1);
    }
    Ok(ArithSignature {
        n,
        is_squarefree: exponents.iter().all(|&e| e == 1),
        omega: distinct_primes.len() as u32,
        distinct_primes,
        exponents,
    })
}

/// Sieved signatures for every integer of `[lo, hi]`, stored flat.
#[derive(Debug, Clone)]
pub struct SieveBlock {
    lo: u64,
    hi: u64,
    squarefree: Vec<bool>,
    offsets: Vec<u32>,
    factors: Vec<u64>,
    exponents: Vec<u8>,
}

impl SieveBlock {
    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    fn index(&self, n: u64) -> usize {
        assert!(n >= self.lo && n <= self.hi, "{n} outside block [{}, {}]", self.lo, self.hi);
        (n - self.lo) as usize
    }

    #[inline]
    pub fn is_squarefree(&self, n: u64) -> bool {
        self.squarefree[self.index(n)]
    }

    #[inline]
    pub fn omega(&self, n: u64) -> u32 {
        let i = self.index(n);
        self.offsets[i + 1] - self.offsets[i]
    }

    /// Distinct primes of `n`, ascending.
    #[inline]
    pub fn primes_of(&self, n: u64) -> &[u64] {
        let i = self.index(n);
        &self.factors[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    #[inline]
    pub fn exponents_of(&self, n: u64) -> &[u8] {
        let i = self.index(n);
        &self.exponents[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    pub fn signature(&self, n: u64) -> ArithSignature {
        ArithSignature {
            n,
            is_squarefree: self.is_squarefree(n),
            omega: self.omega(n),
            distinct_primes: self.primes_of(n).to_vec(),
            exponents: self.exponents_of(n).iter().map(|&e| e as u32).collect(),
        }
    }

    pub fn signatures(&self) -> impl Iterator<Item = ArithSignature> + '_ {
        (self.lo..=self.hi).map(move |n| self.signature(n))
    }
}

/// Sieves `[lo, hi]` against `base`, which must contain every prime `≤ √hi`.
pub fn sieve_block(lo: u64, hi: u64, base: &PrimeList) -> Result<SieveBlock> {
    if lo == 0 || lo > hi {
        return Err(Error::domain("sieve_block", format!("need 1 ≤ lo ≤ hi, got [{lo}, {hi}]")));
    }
    let root = isqrt(hi);
    if base.limit() < root {
        return Err(Error::InsufficientBase {
            needed: root,
            covered: base.limit(),
        });
    }
    let len = (hi - lo + 1) as usize;
    let mut rem: Vec<u64> = (lo..=hi).collect();
    let mut squarefree = vec![true; len];
    let mut counts = vec![0u32; len];
    // (index, prime, exponent) in ascending prime order
    let mut hits: Vec<(u32, u64, u8)> = Vec::with_capacity(len * 3);
    for &p in base.primes() {
        if p > root {
            break;
        }
        let mut m = lo.div_ceil(p) * p;
        while m <= hi {
            let i = (m - lo) as usize;
            let mut e = 0u8;
            while rem[i] % p == 0 {
                rem[i] /= p;
                e += 1;
            }
            if e > 1 {
                squarefree[i] = false;
            }
            counts[i] += 1;
            hits.push((i as u32, p, e));
            m += p;
        }
    }
    for (i, &r) in rem.iter().enumerate() {
        if r > 1 {
            counts[i] += 1;
            hits.push((i as u32, r, 1));
        }
    }
    let mut offsets = Vec::with_capacity(len + 1);
    offsets.push(0u32);
    for &c in &counts {
        offsets.push(offsets.last().unwrap() + c);
    }
    let total = *offsets.last().unwrap() as usize;
    let mut factors = vec![0u64; total];
    let mut exponents = vec![0u8; total];
    let mut cursor: Vec<u32> = offsets[..len].to_vec();
    // stable placement keeps primes ascending; cofactors were pushed last
    for (i, p, e) in hits {
        let slot = cursor[i as usize] as usize;
        factors[slot] = p;
        exponents[slot] = e;
        cursor[i as usize] += 1;
    }
    Ok(SieveBlock {
        lo,
        hi,
        squarefree,
        offsets,
        factors,
        exponents,
    })
}

/// Sieves `[lo, hi]` in blocks of `block_size`, in parallel, returning the
/// blocks in ascending order.
pub fn sieve_range(lo: u64, hi: u64, block_size: u64, base: &PrimeList) -> Result<Vec<SieveBlock>> {
    block_bounds(lo, hi, block_size)
        .into_par_iter()
        .map(|(a, b)| sieve_block(a, b, base))
        .collect()
}

/// Splits `[lo, hi]` into consecutive blocks of at most `block_size` integers.
pub fn block_bounds(lo: u64, hi: u64, block_size: u64) -> Vec<(u64, u64)> {
    assert!(block_size > 0);
    let mut out = Vec::new();
    let mut a = lo;
    while a <= hi {
        let b = a.saturating_add(block_size - 1).min(hi);
        out.push((a, b));
        if b == u64::MAX {
            break;
        }
        a = b + 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_prime_trial(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    #[test]
    fn small_prime_lists() {
        assert_eq!(primes_up_to(10).primes(), &[2, 3, 5, 7]);
        assert!(primes_up_to(1).is_empty());
        assert!(primes_up_to(0).is_empty());
        let brute: Vec<u64> = (0..=30).filter(|&n| is_prime_trial(n)).collect();
        assert_eq!(brute.len(), 10);
        assert_eq!(primes_up_to(30).primes(), brute.as_slice());
    }

    #[test]
    fn segmented_path_matches_simple() {
        let n = 300_007;
        assert_eq!(primes_up_to(n).primes(), simple_sieve(n as usize).as_slice());
        assert_eq!(primes_up_to(1_000_000).len(), 78_498);
    }

    #[test]
    fn signature_examples() {
        let base = primes_up_to(100);
        let block = sieve_block(1, 40, &base).unwrap();
        let s12 = block.signature(12);
        assert!(!s12.is_squarefree);
        assert_eq!((s12.omega, s12.distinct_primes.clone()), (2, vec![2, 3]));
        let s30 = block.signature(30);
        assert!(s30.is_squarefree);
        assert_eq!(s30.distinct_primes, vec![2, 3, 5]);
        let s1 = block.signature(1);
        assert!(s1.is_squarefree && s1.omega == 0 && s1.distinct_primes.is_empty());
    }

    #[test]
    fn trial_division_examples() {
        let s = arith_signature(49).unwrap();
        assert!(!s.is_squarefree);
        assert_eq!(s.omega, 1);
        let s = arith_signature(2310).unwrap();
        assert_eq!(s.omega, 5);
        assert!(s.is_squarefree);
        assert_eq!(arith_signature(1).unwrap().omega, 0);
        assert!(arith_signature(0).is_err());
    }

    #[test]
    fn insufficient_base_is_an_error() {
        let base = primes_up_to(10);
        // √200 ≈ 14.1 needs primes up to 14
        let err = sieve_block(150, 200, &base).unwrap_err();
        assert_eq!(err, Error::InsufficientBase { needed: 14, covered: 10 });
        assert!(sieve_block(0, 5, &base).is_err());
        assert!(sieve_block(6, 5, &base).is_err());
    }

    #[test]
    fn cofactor_primes_recognized() {
        let hi = 10_000_019;
        let base = primes_up_to(isqrt(hi));
        let block = sieve_block(10_000_000, hi, &base).unwrap();
        for n in block.lo()..=block.hi() {
            assert_eq!(block.signature(n), arith_signature(n).unwrap(), "n = {n}");
        }
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.bin");
        let list = primes_up_to(1000);
        list.write_cache(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..8], b"RMFPRIM1");
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 2);
        let back = PrimeList::read_cache(&path).unwrap();
        assert_eq!(back.primes(), list.primes());
        assert_eq!(back.limit(), 997);
        let via = primes_up_to_cached(500, &path).unwrap();
        assert_eq!(via, primes_up_to(500));
        let grown = primes_up_to_cached(2000, &path).unwrap();
        assert_eq!(grown, primes_up_to(2000));
        std::fs::write(&path, b"BADMAGIC").unwrap();
        assert!(PrimeList::read_cache(&path).is_err());
    }

    #[test]
    fn isqrt_edges() {
        for n in [0u64, 1, 2, 3, 4, 15, 16, 17, u64::MAX, (1 << 32) * ((1 << 32) - 1), 999_999_999_999_999_999] {
            let r = isqrt(n);
            assert!(r.checked_mul(r).unwrap() <= n);
            assert!((r + 1).checked_mul(r + 1).map_or(true, |sq| sq > n));
        }
    }
}
