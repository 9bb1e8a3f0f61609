//! Compensated summation with a running a-priori error bound.
//!
//! [`CompensatedSum`] is the Kahan–Babuška–Neumaier accumulator. Alongside the
//! compensated value it tracks `Σ|x_i|` and the number of terms, from which
//! [`CompensatedSum::error_bound`] produces the standard bound
//! `2u|s| + 4nu²Σ|x_i|` (u the unit roundoff). Callers whose terms are
//! themselves inexact (for instance `exp(-σ log n)`) pass the per-term
//! absolute error to [`CompensatedSum::add_inexact`]; it is accumulated
//! separately and included in the bound.

/// Unit roundoff for `f64`.
pub const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
    abs_sum: f64,
    input_error: f64,
    terms: u64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
        self.abs_sum += x.abs();
        self.terms += 1;
    }

    /// Adds a term known only to within `abs_err`.
    #[inline]
    pub fn add_inexact(&mut self, x: f64, abs_err: f64) {
        self.add(x);
        self.input_error += abs_err;
    }

    /// Merges another accumulator that summed the terms following ours.
    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.compensation);
        // two merge additions are bookkeeping, not terms
        self.terms = self.terms - 2 + other.terms;
        self.abs_sum += other.abs_sum - other.sum.abs() - other.compensation.abs();
        self.abs_sum = self.abs_sum.max(0.0);
        self.input_error += other.input_error;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }

    pub fn terms(&self) -> u64 {
        self.terms
    }

    pub fn abs_sum(&self) -> f64 {
        self.abs_sum
    }

    /// Upper bound on `|value() − exact sum of the intended terms|`.
    pub fn error_bound(&self) -> f64 {
        let u = UNIT_ROUNDOFF;
        let n = self.terms.max(1) as f64;
        let rounding = 2.0 * u * self.value().abs() + 4.0 * n * u * u * self.abs_sum;
        (self.input_error + rounding) * (1.0 + 4.0 * u)
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        s.extend(iter);
        s
    }
}

/// Compensated sum of an iterator of terms.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Relative error bound for `exp(-sigma * ln(n))` evaluated in `f64`.
///
/// `ln` and `exp` are each faithfully rounded; the error of the argument is
/// amplified by its magnitude.
#[inline]
pub fn power_weight_rel_error(sigma: f64, ln_n: f64) -> f64 {
    (4.0 + 2.0 * (sigma * ln_n).abs()) * f64::EPSILON
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancels_where_naive_fails() {
        let terms = [1.0, 1e100, 1.0, -1e100];
        let naive: f64 = terms.iter().sum();
        assert_eq!(naive, 0.0);
        assert_eq!(compensated_sum(terms), 2.0);
    }

    #[test]
    fn bound_covers_harmonic_error() {
        // exact H_n for n = 2000 via rationals is too slow; compare against a
        // reversed-order summation in extended form (pairwise).
        let n = 200_000u64;
        let s: CompensatedSum = (1..=n).map(|k| 1.0 / k as f64).collect();
        let mut backward = CompensatedSum::new();
        for k in (1..=n).rev() {
            backward.add(1.0 / k as f64);
        }
        assert!((s.value() - backward.value()).abs() <= s.error_bound() + backward.error_bound());
        assert!(s.error_bound() < 1e-13);
    }

    #[test]
    fn merge_matches_sequential() {
        let xs: Vec<f64> = (1..1000).map(|k| ((k * 7919) % 113) as f64 / 17.0 - 3.0).collect();
        let all: CompensatedSum = xs.iter().copied().collect();
        let mut left: CompensatedSum = xs[..400].iter().copied().collect();
        let right: CompensatedSum = xs[400..].iter().copied().collect();
        left.merge(&right);
        assert!((left.value() - all.value()).abs() <= all.error_bound());
        assert_eq!(left.terms(), all.terms());
    }
}
