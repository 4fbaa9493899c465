//! Binomial step probabilities against exact big-rational arithmetic.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};
use oqw_core::analytic::{exact_binomial_pmf_pq, log_binomial_pmf_pq};

fn choose(n: u64, m: u64) -> BigInt {
    let mut c = BigInt::one();
    for i in 0..m {
        c = c * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    c
}

/// `C(n, m) p^m q^(n-m)` with `p`, `q` taken as the exact rationals their
/// f64 values represent.
fn rational_pmf(n: u64, k: i64, p: f64, q: f64) -> f64 {
    let m = ((n as i64 + k) / 2) as u64;
    let p = BigRational::from_float(p).unwrap();
    let q = BigRational::from_float(q).unwrap();
    // Accumulate numerator and denominator separately; one reduction at the end.
    let numer = choose(n, m) * p.numer().pow(m as u32) * q.numer().pow((n - m) as u32);
    let denom = p.denom().pow(m as u32) * q.denom().pow((n - m) as u32);
    let value = BigRational::new(numer, denom);
    if value.is_zero() {
        0.0
    } else {
        value.to_f64().unwrap()
    }
}

fn rel_err(x: f64, exact: f64) -> f64 {
    if exact == 0.0 {
        x.abs()
    } else {
        ((x - exact) / exact).abs()
    }
}

const PROBABILITIES: [f64; 7] = [0.5, 0.25, 0.75, 0.1, 0.9, 0.3, 0.5000000000000001];

#[test]
fn both_paths_match_rational_oracle_up_to_fifty_steps() {
    let mut worst_exact: f64 = 0.0;
    let mut worst_log: f64 = 0.0;
    for &p in &PROBABILITIES {
        let q = 1.0 - p;
        for n in 0..=50u64 {
            for m in 0..=n {
                let k = 2 * m as i64 - n as i64;
                let oracle = rational_pmf(n, k, p, q);
                worst_exact =
                    worst_exact.max(rel_err(exact_binomial_pmf_pq(n, k, p, q).unwrap(), oracle));
                worst_log =
                    worst_log.max(rel_err(log_binomial_pmf_pq(n, k, p, q).unwrap(), oracle));
            }
        }
    }
    assert!(
        worst_exact <= 1e-12,
        "direct path relative error {worst_exact:e}"
    );
    assert!(
        worst_log <= 1e-12,
        "log-space path relative error {worst_log:e}"
    );
}

#[test]
fn thousand_steps_center_matches_big_integer() {
    // C(1000, 500) / 2^1000
    let exact = BigRational::new(choose(1000, 500), BigInt::one() << 1000u32)
        .to_f64()
        .unwrap();
    let got = log_binomial_pmf_pq(1000, 0, 0.5, 0.5).unwrap();
    assert!(rel_err(got, exact) <= 1e-12, "{got} vs {exact}");
}

#[test]
fn thousand_steps_off_center_matches_rational_oracle() {
    for &(p, k) in &[
        (0.3, -400i64),
        (0.75, 500),
        (0.9, 800),
        (0.1, -1000),
        (0.25, 2),
    ] {
        let q = 1.0 - p;
        let oracle = rational_pmf(1000, k, p, q);
        let got = log_binomial_pmf_pq(1000, k, p, q).unwrap();
        assert!(
            rel_err(got, oracle) <= 1e-12,
            "p = {p}, k = {k}: {got:e} vs {oracle:e}"
        );
    }
}
