//! Binomial step probabilities for walks on the line.
//!
//! After `n` steps with right-step probability `p`, the walker sits at `k`
//! with probability `C(n, m) p^m q^(n-m)` where `m = (n + k)/2` is the
//! number of right steps. Two evaluation paths are provided: a direct
//! product for small `n`, and a log-space form built from Stirling-series
//! remainders and the binomial deviance, which stays accurate to a few ulp
//! for any `n` (C. Loader, "Fast and Accurate Computation of Binomial
//! Probabilities", 2000).

use std::f64::consts::PI;

use thiserror::Error;

/// Largest step count evaluated on the direct-product path.
pub const EXACT_MAX_STEPS: u64 = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BinomialError {
    #[error("position {k} is unreachable in {n} steps: n + k must be even")]
    Parity { n: u64, k: i64 },
    #[error("position {k} lies outside [-{n}, {n}]")]
    OutOfRange { n: u64, k: i64 },
    #[error("step probabilities ({p}, {q}) are not a valid pair")]
    Probability { p: f64, q: f64 },
    #[error("direct evaluation supports at most {EXACT_MAX_STEPS} steps, got {0}")]
    TooManyStepsForExact(u64),
}

/// Number of right steps needed to reach `k` in `n` steps.
pub fn right_steps(n: u64, k: i64) -> Result<u64, BinomialError> {
    if k.unsigned_abs() > n {
        return Err(BinomialError::OutOfRange { n, k });
    }
    let sum = n as i128 + k as i128;
    if sum % 2 != 0 {
        return Err(BinomialError::Parity { n, k });
    }
    Ok((sum / 2) as u64)
}

fn check_pq(p: f64, q: f64) -> Result<(), BinomialError> {
    let ok = (0.0..=1.0).contains(&p) && (0.0..=1.0).contains(&q) && (p + q - 1.0).abs() <= 1e-9;
    if ok {
        Ok(())
    } else {
        Err(BinomialError::Probability { p, q })
    }
}

/// Walk pmf with right-step probability `p_right`: direct product for
/// `n <= 50`, log space above.
pub fn binomial_pmf(n: u64, k: i64, p_right: f64) -> Result<f64, BinomialError> {
    binomial_pmf_pq(n, k, p_right, 1.0 - p_right)
}

/// As [`binomial_pmf`], with the left-step probability supplied separately
/// so that `q` keeps full relative precision when `p` is close to 1.
pub fn binomial_pmf_pq(n: u64, k: i64, p: f64, q: f64) -> Result<f64, BinomialError> {
    if n <= EXACT_MAX_STEPS {
        exact_binomial_pmf_pq(n, k, p, q)
    } else {
        log_binomial_pmf_pq(n, k, p, q)
    }
}

pub fn exact_binomial_pmf(n: u64, k: i64, p_right: f64) -> Result<f64, BinomialError> {
    exact_binomial_pmf_pq(n, k, p_right, 1.0 - p_right)
}

/// `C(n, m) p^m q^(n-m)` with the binomial coefficient formed exactly.
/// Uses `0^0 = 1`.
pub fn exact_binomial_pmf_pq(n: u64, k: i64, p: f64, q: f64) -> Result<f64, BinomialError> {
    if n > EXACT_MAX_STEPS {
        return Err(BinomialError::TooManyStepsForExact(n));
    }
    let m = right_steps(n, k)?;
    check_pq(p, q)?;
    let coeff = choose_exact(n, m) as f64;
    Ok(coeff * p.powi(m as i32) * q.powi((n - m) as i32))
}

// Exact in u64 well past EXACT_MAX_STEPS; every intermediate is itself a
// binomial coefficient times a small factor.
fn choose_exact(n: u64, m: u64) -> u64 {
    let m = m.min(n - m);
    let mut c: u128 = 1;
    for i in 0..m {
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    c as u64
}

pub fn log_binomial_pmf(n: u64, k: i64, p_right: f64) -> Result<f64, BinomialError> {
    log_binomial_pmf_pq(n, k, p_right, 1.0 - p_right)
}

/// Log-space evaluation, exponentiated once at the end.
pub fn log_binomial_pmf_pq(n: u64, k: i64, p: f64, q: f64) -> Result<f64, BinomialError> {
    let m = right_steps(n, k)?;
    check_pq(p, q)?;
    Ok(ln_pmf(n, m, p, q).exp())
}

/// `ln P(m right steps out of n)`; `-inf` where the probability is exactly zero.
fn ln_pmf(n: u64, m: u64, p: f64, q: f64) -> f64 {
    if p == 0.0 {
        return if m == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if q == 0.0 {
        return if m == n { 0.0 } else { f64::NEG_INFINITY };
    }
    let nf = n as f64;
    if m == 0 {
        if n == 0 {
            return 0.0;
        }
        // the smaller of p and q carries the most accurate logarithm
        return if p < q {
            nf * (-p).ln_1p()
        } else {
            nf * q.ln()
        };
    }
    if m == n {
        return if q < p {
            nf * (-q).ln_1p()
        } else {
            nf * p.ln()
        };
    }
    let x = m as f64;
    let y = nf - x;
    let lc = stirlerr(n) - stirlerr(m) - stirlerr(n - m) - bd0(x, nf * p) - bd0(y, nf * q);
    let lf = (2.0 * PI).ln() + x.ln() + (-x / nf).ln_1p();
    lc - 0.5 * lf
}

const S0: f64 = 1.0 / 12.0;
const S1: f64 = 1.0 / 360.0;
const S2: f64 = 1.0 / 1260.0;
const S3: f64 = 1.0 / 1680.0;
const S4: f64 = 1.0 / 1188.0;

// ln(n!) - [ln(√(2π n)) + n ln(n) - n] for n = 0..=15.
#[allow(clippy::excessive_precision)]
const STIRLERR_SMALL: [f64; 16] = [
    0.0,
    0.0810614667953272582196702,
    0.0413406959554092940938221,
    0.02767792568499833914878929,
    0.02079067210376509311152277,
    0.01664469118982119216319487,
    0.01387612882307074799874573,
    0.01189670994589177009505572,
    0.010411265261972096497478567,
    0.009255462182712732917728637,
    0.008330563433362871256469318,
    0.007573675487951840794972024,
    0.006942840107209529865664152,
    0.006408994188004207068439631,
    0.005951370112758847735624416,
    0.005554733551962801371038690,
];

/// Error of the Stirling approximation to `ln(n!)`.
fn stirlerr(n: u64) -> f64 {
    if n <= 15 {
        return STIRLERR_SMALL[n as usize];
    }
    let nf = n as f64;
    let nn = nf * nf;
    if n > 500 {
        return (S0 - S1 / nn) / nf;
    }
    if n > 80 {
        return (S0 - (S1 - S2 / nn) / nn) / nf;
    }
    if n > 35 {
        return (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / nf;
    }
    (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / nf
}

/// Deviance term `x ln(x / np) + np - x`, evaluated by series when the
/// two arguments are close.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        if s.abs() < f64::MIN_POSITIVE {
            return s;
        }
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
    }
    x * (x / np).ln() + np - x
}
