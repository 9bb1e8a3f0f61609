//! Riemann zeta and the prime zeta function for real `s > 1`.

use crate::error::{Error, Result};
use crate::summation::{CompensatedSum, UNIT_ROUNDOFF};

/// B_2, B_4, ..., B_18.
const BERNOULLI: [f64; 9] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
];

/// Euler–Maclaurin correction terms used before the remainder.
const CORRECTION_TERMS: usize = 8;

const TARGET_ERROR: f64 = 1e-13;

/// `(B_{2k}/(2k)!) s(s+1)…(s+2k-2) N^{-s-2k+1}` for k = 1..=9.
fn em_terms(s: f64, n: f64) -> [f64; 9] {
    let mut out = [0.0; 9];
    let mut rising = s; // s(s+1)…(s+2k-2)
    let mut fact = 2.0; // (2k)!
    let mut pow = n.powf(-s - 1.0);
    for k in 0..9 {
        out[k] = BERNOULLI[k] / fact * rising * pow;
        let j = 2.0 * k as f64;
        rising *= (s + j + 1.0) * (s + j + 2.0);
        fact *= (j + 3.0) * (j + 4.0);
        pow /= n * n;
    }
    out
}

/// `ζ(s) − 1` with a bound on its absolute error.
pub fn zeta_minus_one_with_error(s: f64) -> Result<(f64, f64)> {
    if !(s > 1.0) || s.is_nan() {
        return Err(Error::domain("zeta", format!("need s > 1, got {s}")));
    }
    if s > 200.0 {
        // 2^{-s} + 3^{-s} + … with tail ≤ 3^{-s}·3/(s-1) far below 2^{-s}·ε
        let lead = 2f64.powf(-s);
        let rest = 3f64.powf(-s) * (1.0 + 3.0 / (s - 1.0));
        return Ok((lead + rest, rest + lead * UNIT_ROUNDOFF));
    }
    // the remainder after 8 corrections is below the 9th term; grow N until it is tiny
    let mut n = 10u64;
    loop {
        let nf = n as f64;
        let terms = em_terms(s, nf);
        let head: f64 = nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s);
        let scale = 1.0 + head.abs();
        if terms[CORRECTION_TERMS].abs() <= TARGET_ERROR * scale.min(1.0) || n >= 1 << 20 {
            let mut acc = CompensatedSum::new();
            for k in (2..n).rev() {
                acc.add((k as f64).powf(-s));
            }
            acc.add(head);
            for t in terms[..CORRECTION_TERMS].iter().rev() {
                acc.add(*t);
            }
            let rounding = acc.error_bound() + 8.0 * UNIT_ROUNDOFF * (acc.abs_sum() + s.abs() * head.abs());
            return Ok((acc.value(), terms[CORRECTION_TERMS].abs() + rounding));
        }
        n *= 2;
    }
}

/// `ζ(s)` with an absolute error bound.
pub fn zeta_with_error(s: f64) -> Result<(f64, f64)> {
    let (v, e) = zeta_minus_one_with_error(s)?;
    Ok((1.0 + v, e + UNIT_ROUNDOFF * (1.0 + v)))
}

/// Riemann `ζ(s)` for real `s > 1`.
pub fn zeta(s: f64) -> Result<f64> {
    Ok(zeta_with_error(s)?.0)
}

/// Möbius function by trial division.
fn mobius(k: u64) -> i32 {
    let sig = crate::sieve::arith_signature(k).expect("k ≥ 1");
    if !sig.is_squarefree {
        0
    } else if sig.omega % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `P(s) = Σ_p p^{-s}` with an absolute error bound.
///
/// Uses `P(s) = Σ_k μ(k)/k · log ζ(ks)`, truncated once `2^{-ks}` is
/// negligible. The discarded terms are bounded by `Σ_{k>K} 2·2^{-ks}/k`
/// since `log ζ(t) ≤ ζ(t) − 1 ≤ 2^{-t}(1 + 2/(t−1))`.
pub fn prime_zeta_with_error(s: f64) -> Result<(f64, f64)> {
    if !(s > 1.0) || s.is_nan() {
        return Err(Error::domain("prime_zeta", format!("need s > 1, got {s}")));
    }
    let mut acc = CompensatedSum::new();
    let mut err = 0.0;
    let mut k = 1u64;
    loop {
        let t = k as f64 * s;
        if k > 1 && t >= 3.0 && 2f64.powf(-t) < 1e-20 * UNIT_ROUNDOFF {
            break;
        }
        let mu = mobius(k);
        if mu != 0 {
            let (zm1, e) = zeta_minus_one_with_error(t)?;
            let term = zm1.ln_1p() / k as f64;
            // d/dz log(1+z) = 1/(1+z) ≤ 1
            acc.add_inexact(mu as f64 * term, e / k as f64 + 2.0 * UNIT_ROUNDOFF * term.abs());
        }
        k += 1;
    }
    // tail over k > K with t = ks ≥ 3
    let q = 2f64.powf(-s);
    let tail = 2.0 * q.powf(k as f64) / (k as f64 * (1.0 - q));
    err += tail + acc.error_bound();
    Ok((acc.value(), err))
}

/// Prime zeta function `P(s)` for real `s > 1`.
pub fn prime_zeta(s: f64) -> Result<f64> {
    Ok(prime_zeta_with_error(s)?.0)
}
