//! Closed-form distribution for commuting line coins.
//!
//! When `B` and `C` share an orthonormal eigenbasis `{|b_i⟩}` with
//! eigenvalues `(λ_i, φ_i)`, each eigen-level walks independently: it steps
//! right with probability `|λ_i|²` and left with `|φ_i|²`. The position
//! distribution is therefore a mixture of binomials weighted by the initial
//! populations `p_i = ⟨b_i|ρ₀|b_i⟩`. Levels with `|λ_i| = 1` or `|λ_i| = 0`
//! degenerate into non-dispersing fronts moving at speed ±1.

pub mod binomial;

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::SpectralDecomposition;
use crate::walk::DensityBlock;

pub use binomial::{
    binomial_pmf, binomial_pmf_pq, exact_binomial_pmf, exact_binomial_pmf_pq, log_binomial_pmf,
    log_binomial_pmf_pq, BinomialError, EXACT_MAX_STEPS,
};

/// Tolerance on weight sums and `|λ|² + |φ|² = 1`.
pub const WEIGHT_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("initial state trace {trace} differs from 1 by {residual:e}")]
    InitialTrace { trace: f64, residual: f64 },
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("eigenvalue pair violates |λ|² + |φ|² = 1 by {residual:e}")]
    Unnormalized { residual: f64 },
    #[error(transparent)]
    Binomial(#[from] BinomialError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComponentKind {
    Gaussian,
    SolitonRight,
    SolitonLeft,
}

/// One asymptotic contribution to the position distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub kind: ComponentKind,
    pub weight: f64,
    /// Right-step probability `|λ|²`.
    pub lambda_abs2: f64,
    /// Left-step probability `|φ|²`.
    pub phi_abs2: f64,
}

impl ComponentSpec {
    /// Drift per step, `|λ|² - |φ|²`.
    pub fn mean_per_step(&self) -> f64 {
        self.lambda_abs2 - self.phi_abs2
    }

    pub fn mean(&self, n: u64) -> f64 {
        n as f64 * self.mean_per_step()
    }

    /// Standard deviation after `n` steps, `2|λ||φ|√n`.
    pub fn spread(&self, n: u64) -> f64 {
        2.0 * (self.lambda_abs2 * self.phi_abs2).sqrt() * (n as f64).sqrt()
    }
}

/// Closed-form distribution after `n` steps plus its component breakdown.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionProfile {
    pub n: u64,
    /// `P_k` for every `k` in `[-n, n]` with `n + k` even.
    pub probabilities: BTreeMap<i64, f64>,
    pub components: Vec<ComponentSpec>,
}

impl DistributionProfile {
    pub fn total(&self) -> f64 {
        self.probabilities.values().sum()
    }
}

/// Populations `p_i = ⟨b_i|ρ₀|b_i⟩` of the initial state in the joint eigenbasis.
pub fn initial_projections(
    decomp: &SpectralDecomposition,
    rho0: &DensityBlock,
) -> Result<Vec<f64>, AnalyticError> {
    if rho0.dim() != decomp.dim() {
        return Err(AnalyticError::DimensionMismatch {
            expected: decomp.dim(),
            found: rho0.dim(),
        });
    }
    let trace = rho0.trace();
    let residual = (trace - 1.0).abs();
    if residual > WEIGHT_TOL {
        return Err(AnalyticError::InitialTrace { trace, residual });
    }
    Ok(decomp
        .basis()
        .iter()
        .map(|b| rho0.matrix().expectation(b).re)
        .collect())
}

fn check_weights(decomp: &SpectralDecomposition, weights: &[f64]) -> Result<(), AnalyticError> {
    if weights.len() != decomp.dim() {
        return Err(AnalyticError::DimensionMismatch {
            expected: decomp.dim(),
            found: weights.len(),
        });
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < -WEIGHT_TOL) {
        return Err(AnalyticError::InvalidWeights(format!(
            "weight {w} is negative or not finite"
        )));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_TOL {
        return Err(AnalyticError::InvalidWeights(format!(
            "weights sum to {sum}, not 1"
        )));
    }
    Ok(())
}

/// Step probabilities of one eigen-level, rescaled so they sum to exactly 1
/// in exact arithmetic.
fn step_probabilities(lambda: Complex64, phi: Complex64) -> (f64, f64) {
    let right = lambda.norm_sqr();
    let left = phi.norm_sqr();
    let total = right + left;
    (right / total, left / total)
}

pub fn analytic_distribution(
    decomp: &SpectralDecomposition,
    weights: &[f64],
    n: u64,
) -> Result<DistributionProfile, AnalyticError> {
    check_weights(decomp, weights)?;
    let mut probabilities: BTreeMap<i64, f64> =
        (0..=n).map(|m| (2 * m as i64 - n as i64, 0.0)).collect();
    for ((&w, &lambda), &phi) in weights.iter().zip(decomp.lambda()).zip(decomp.phi()) {
        if w == 0.0 {
            continue;
        }
        let (p, q) = step_probabilities(lambda, phi);
        for (&k, slot) in probabilities.iter_mut() {
            *slot += w * binomial_pmf_pq(n, k, p, q)?;
        }
    }
    let components = classify_spectrum(decomp, weights, &ClassifyTolerances::default())?;
    Ok(DistributionProfile {
        n,
        probabilities,
        components,
    })
}

/// Mean and standard deviation of one eigen-level's displacement after `n` steps.
pub fn component_stats(
    lambda: Complex64,
    phi: Complex64,
    n: u64,
) -> Result<(f64, f64), AnalyticError> {
    let (l2, p2) = (lambda.norm_sqr(), phi.norm_sqr());
    let residual = (l2 + p2 - 1.0).abs();
    if residual > WEIGHT_TOL {
        return Err(AnalyticError::Unnormalized { residual });
    }
    let nf = n as f64;
    Ok((nf * (l2 - p2), 2.0 * lambda.norm() * phi.norm() * nf.sqrt()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifyTolerances {
    /// Levels whose `|λ|` differ by at most this are merged into one component.
    pub grouping: f64,
    /// `|λ|²` within this of 1 (or 0) makes a right (left) soliton.
    pub soliton: f64,
    /// Groups with aggregate weight at or below this are dropped.
    pub weight_floor: f64,
}

impl Default for ClassifyTolerances {
    fn default() -> Self {
        Self {
            grouping: 1e-8,
            soliton: 1e-12,
            weight_floor: 1e-12,
        }
    }
}

/// One component per distinct `|λ|` carrying weight, ordered by the first
/// eigen-level in each group.
pub fn classify_spectrum(
    decomp: &SpectralDecomposition,
    weights: &[f64],
    tol: &ClassifyTolerances,
) -> Result<Vec<ComponentSpec>, AnalyticError> {
    check_weights(decomp, weights)?;
    let dim = decomp.dim();
    let abs: Vec<f64> = decomp.lambda().iter().map(|l| l.norm()).collect();
    let mut by_abs: Vec<usize> = (0..dim).collect();
    by_abs.sort_by(|&i, &j| abs[i].total_cmp(&abs[j]).then(i.cmp(&j)));

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in &by_abs {
        match groups.last_mut() {
            Some(g) if abs[i] - abs[*g.last().unwrap()] <= tol.grouping => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups.sort_by_key(|g| *g.iter().min().unwrap());

    let components = groups
        .into_iter()
        .filter_map(|g| {
            let weight: f64 = g.iter().map(|&i| weights[i]).sum();
            if weight <= tol.weight_floor {
                return None;
            }
            let size = g.len() as f64;
            let lambda_abs2 = g
                .iter()
                .map(|&i| decomp.lambda()[i].norm_sqr())
                .sum::<f64>()
                / size;
            let phi_abs2 = g.iter().map(|&i| decomp.phi()[i].norm_sqr()).sum::<f64>() / size;
            let kind = if lambda_abs2 >= 1.0 - tol.soliton {
                ComponentKind::SolitonRight
            } else if lambda_abs2 <= tol.soliton {
                ComponentKind::SolitonLeft
            } else {
                ComponentKind::Gaussian
            };
            Some(ComponentSpec {
                kind,
                weight,
                lambda_abs2,
                phi_abs2,
            })
        })
        .collect();
    Ok(components)
}
