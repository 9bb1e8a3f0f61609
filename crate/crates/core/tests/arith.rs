use proptest::prelude::*;
use rmf_lab::nt::{t_sum, t_sums};
use rmf_lab::sieve::{arith_signature, isqrt, primes_up_to, sieve_block, sieve_range};

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn blocks_match_trial_division(lo in 1u64..10_000_000, len in 1u64..3000) {
        let hi = lo + len - 1;
        let base = primes_up_to(isqrt(hi));
        let block = sieve_block(lo, hi, &base).unwrap();
        for n in lo..=hi {
            prop_assert_eq!(block.signature(n), arith_signature(n).unwrap());
        }
    }

    #[test]
    fn segmented_range_matches_single_block(lo in 1u64..1_000_000, len in 1u64..5000, bs in 1u64..700) {
        let hi = lo + len - 1;
        let base = primes_up_to(isqrt(hi));
        let whole = sieve_block(lo, hi, &base).unwrap();
        let parts = sieve_range(lo, hi, bs, &base).unwrap();
        let mut n = lo;
        for p in &parts {
            prop_assert_eq!(p.lo(), n);
            for k in p.lo()..=p.hi() {
                prop_assert_eq!(p.signature(k), whole.signature(k));
            }
            n = p.hi() + 1;
        }
        prop_assert_eq!(n, hi + 1);
    }

    #[test]
    fn omega_and_squarefree_multiplicative(a in 1u64..=10_000, b in 1u64..=10_000) {
        prop_assume!(gcd(a, b) == 1);
        let (sa, sb, sab) = (arith_signature(a).unwrap(), arith_signature(b).unwrap(), arith_signature(a * b).unwrap());
        prop_assert_eq!(sab.omega, sa.omega + sb.omega);
        prop_assert_eq!(sab.is_squarefree, sa.is_squarefree && sb.is_squarefree);
    }

    #[test]
    fn squarefree_density_bracket(x in 1_000u64..2_000_000) {
        let d = t_sum(x, 2.0).unwrap().value / x as f64;
        prop_assert!((0.55..=0.68).contains(&d), "{}", d);
    }

    #[test]
    fn t_sum_monotone(x in 1u64..50_000, dx in 0u64..5000, m in 1.0f64..12.0, dm in 0.0f64..4.0) {
        let grid = t_sums(&[x, x + dx], &[m, m + dm]).unwrap();
        prop_assert!(grid[0].value <= grid[1].value);
        prop_assert!(grid[0].value <= grid[2].value);
        prop_assert!(grid[1].value <= grid[3].value);
    }
}

#[test]
fn squarefree_density_at_decades() {
    let xs = [1_000, 10_000, 100_000, 1_000_000, 10_000_000];
    for r in t_sums(&xs, &[2.0]).unwrap() {
        let d = r.value / r.x as f64;
        assert!((0.55..=0.68).contains(&d), "x = {}: {d}", r.x);
        assert_eq!(r.value, r.terms as f64);
    }
}

#[test]
fn squarefree_count_matches_direct_sieve() {
    // direct count: strike multiples of p² for p ≤ √x
    let x = 1_000_000usize;
    let mut sf = vec![true; x + 1];
    for p in primes_up_to(1000).primes() {
        let q = (p * p) as usize;
        for k in (q..=x).step_by(q) {
            sf[k] = false;
        }
    }
    let direct = sf[1..].iter().filter(|&&b| b).count();
    assert_eq!(t_sum(x as u64, 2.0).unwrap().value, direct as f64);
}
