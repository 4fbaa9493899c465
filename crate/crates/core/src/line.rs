//! Homogeneous open quantum walk on the integer line.
//!
//! Every site jumps right with the operator `B` and left with `C`. Starting
//! from a single site, only sites with `n + k` even can be occupied after
//! `n` steps, so the state stores just those `n + 1` blocks in one
//! contiguous buffer: slot `j` holds site `origin - n + 2j`. A step then
//! reads as
//!
//! ```text
//! new[j] = B old[j-1] B† + C old[j] C†
//! ```
//!
//! which keeps the inner loop streaming through memory.

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::kernel;
use crate::linalg::{ComplexMatrix, C64};
use crate::walk::{
    BlockViolation, DensityBlock, NodeId, TransitionSet, WalkError, WalkState, DEFAULT_PRUNE_FLOOR,
    VALIDATION_TOL,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LineError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("coin violates B†B + C†C = I: max residual {residual:e}")]
    Unnormalized { residual: f64 },
    #[error("invalid initial block: {0}")]
    InvalidInitial(#[from] BlockViolation),
    #[error("initial block trace {trace} differs from 1 by {residual:e}")]
    InitialTrace { trace: f64, residual: f64 },
    #[error(transparent)]
    Walk(#[from] WalkError),
}

/// The pair `(B, C)`: `B` moves the walker one site right, `C` one site left.
#[derive(Clone, Debug, PartialEq)]
pub struct LineCoin {
    right: ComplexMatrix,
    left: ComplexMatrix,
}

impl LineCoin {
    pub fn new(right: ComplexMatrix, left: ComplexMatrix) -> Result<Self, LineError> {
        Self::with_tolerance(right, left, VALIDATION_TOL)
    }

    pub fn with_tolerance(
        right: ComplexMatrix,
        left: ComplexMatrix,
        tol: f64,
    ) -> Result<Self, LineError> {
        if right.dim() != left.dim() {
            return Err(LineError::DimensionMismatch {
                expected: right.dim(),
                found: left.dim(),
            });
        }
        let coin = Self { right, left };
        let residual = coin.normalization_residual();
        if residual > tol {
            return Err(LineError::Unnormalized { residual });
        }
        Ok(coin)
    }

    /// `B = diag(1, cos θ)`, `C = diag(0, sin θ)`: the first level is
    /// trapped and moves right deterministically, the second performs a
    /// biased binomial walk.
    pub fn two_level(theta: f64) -> Self {
        let d = |a: f64, b: f64| {
            ComplexMatrix::from_diagonal(&[C64::new(a, 0.0), C64::new(b, 0.0)])
                .expect("finite diagonal")
        };
        Self {
            right: d(1.0, theta.cos()),
            left: d(0.0, theta.sin()),
        }
    }

    pub fn right(&self) -> &ComplexMatrix {
        &self.right
    }

    pub fn left(&self) -> &ComplexMatrix {
        &self.left
    }

    pub fn dim(&self) -> usize {
        self.right.dim()
    }

    /// `max |B†B + C†C - I|`.
    pub fn normalization_residual(&self) -> f64 {
        let sum = &(&self.right.adjoint() * &self.right) + &(&self.left.adjoint() * &self.left);
        (&sum - &ComplexMatrix::identity(self.dim())).max_abs()
    }

    /// The same walk as an explicit graph on `first..=last`.
    pub fn to_transition_set(&self, first: i64, last: i64) -> TransitionSet {
        TransitionSet::homogeneous_path(&self.right, &self.left, first, last)
            .expect("coin operators share one dimension")
    }
}

/// Walk state on the line, holding only the parity-active sites.
#[derive(Clone, Debug, PartialEq)]
pub struct LineState {
    origin: i64,
    dim: usize,
    step_count: u64,
    blocks: Vec<C64>,
}

impl LineState {
    /// All mass on `origin` in the internal state `rho0`, which must have unit trace.
    pub fn new(origin: i64, rho0: &DensityBlock) -> Result<Self, LineError> {
        let trace = rho0.trace();
        let residual = (trace - 1.0).abs();
        if residual > VALIDATION_TOL {
            return Err(LineError::InitialTrace { trace, residual });
        }
        Ok(Self {
            origin,
            dim: rho0.dim(),
            step_count: 0,
            blocks: rho0.matrix().as_slice().to_vec(),
        })
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    fn block_len(&self) -> usize {
        self.dim * self.dim
    }

    fn slot_count(&self) -> usize {
        self.blocks.len() / self.block_len()
    }

    fn site_of_slot(&self, j: usize) -> i64 {
        self.origin - self.step_count as i64 + 2 * j as i64
    }

    /// Occupiable sites with their column-major blocks, ascending in `k`.
    pub fn sites(&self) -> impl Iterator<Item = (i64, &[C64])> {
        self.blocks
            .chunks_exact(self.block_len())
            .enumerate()
            .map(|(j, b)| (self.site_of_slot(j), b))
    }

    /// Block at site `k`; `None` where the site cannot be occupied at this step.
    pub fn block(&self, k: i64) -> Option<ComplexMatrix> {
        let offset = k - (self.origin - self.step_count as i64);
        if offset < 0 || offset % 2 != 0 {
            return None;
        }
        let j = (offset / 2) as usize;
        if j >= self.slot_count() {
            return None;
        }
        let dd = self.block_len();
        Some(ComplexMatrix::from_column_slice(
            self.dim,
            &self.blocks[j * dd..(j + 1) * dd],
        ))
    }

    /// `P_k` for every occupiable site, zeros included.
    pub fn position_distribution(&self) -> BTreeMap<i64, f64> {
        self.sites()
            .map(|(k, b)| (k, kernel::trace(b, self.dim)))
            .collect()
    }

    pub fn total_trace(&self) -> f64 {
        self.sites().map(|(_, b)| kernel::trace(b, self.dim)).sum()
    }

    /// Sparse graph-engine view; all-zero blocks are omitted.
    pub fn to_walk_state(&self) -> WalkState {
        let blocks = self
            .sites()
            .filter(|(_, b)| b.iter().any(|z| *z != C64::new(0.0, 0.0)))
            .map(|(k, b)| {
                (
                    NodeId(k),
                    DensityBlock::from_unchecked(ComplexMatrix::from_column_slice(self.dim, b)),
                )
            })
            .collect();
        WalkState::from_parts(self.dim, blocks, self.step_count)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineOptions {
    pub prune_floor: f64,
    /// Split each step across the rayon pool. Results are bit-identical to
    /// the sequential path.
    pub parallel: bool,
}

impl Default for LineOptions {
    fn default() -> Self {
        Self {
            prune_floor: DEFAULT_PRUNE_FLOOR,
            parallel: false,
        }
    }
}

// Below this many slots per task the rayon overhead dominates.
const PAR_MIN_SLOTS: usize = 512;

struct CoinBuffers<'a> {
    right: &'a [C64],
    left: &'a [C64],
}

fn step_into(
    old: &[C64],
    new: &mut [C64],
    d: usize,
    coin: &CoinBuffers<'_>,
    options: &LineOptions,
) {
    let dd = d * d;
    let old_slots = old.len() / dd;
    let fill = |j: usize, out: &mut [C64]| {
        out.fill(C64::new(0.0, 0.0));
        if j >= 1 {
            kernel::sandwich_add(coin.right, &old[(j - 1) * dd..j * dd], out, d);
        }
        if j < old_slots {
            kernel::sandwich_add(coin.left, &old[j * dd..(j + 1) * dd], out, d);
        }
        kernel::finish_block(out, d, options.prune_floor);
    };
    if options.parallel {
        new.par_chunks_mut(dd)
            .enumerate()
            .with_min_len(PAR_MIN_SLOTS)
            .for_each(|(j, out)| fill(j, out));
    } else {
        new.chunks_mut(dd)
            .enumerate()
            .for_each(|(j, out)| fill(j, out));
    }
}

fn check_dims(state: &LineState, coin: &LineCoin) -> Result<(), LineError> {
    if coin.dim() != state.dim {
        return Err(LineError::DimensionMismatch {
            expected: state.dim,
            found: coin.dim(),
        });
    }
    Ok(())
}

pub fn line_step(state: &LineState, coin: &LineCoin) -> Result<LineState, LineError> {
    line_step_with(state, coin, &LineOptions::default())
}

pub fn line_step_with(
    state: &LineState,
    coin: &LineCoin,
    options: &LineOptions,
) -> Result<LineState, LineError> {
    check_dims(state, coin)?;
    let mut next = vec![C64::new(0.0, 0.0); state.blocks.len() + state.block_len()];
    let buffers = CoinBuffers {
        right: coin.right.as_slice(),
        left: coin.left.as_slice(),
    };
    step_into(&state.blocks, &mut next, state.dim, &buffers, options);
    Ok(LineState {
        origin: state.origin,
        dim: state.dim,
        step_count: state.step_count + 1,
        blocks: next,
    })
}

/// Advance `state` by `steps`, reusing two buffers.
pub fn evolve_line(
    state: &LineState,
    coin: &LineCoin,
    steps: u64,
    options: &LineOptions,
) -> Result<LineState, LineError> {
    check_dims(state, coin)?;
    let dd = state.block_len();
    let final_len = state.blocks.len() + steps as usize * dd;
    let mut current = Vec::with_capacity(final_len);
    current.extend_from_slice(&state.blocks);
    let mut scratch = Vec::with_capacity(final_len);
    let buffers = CoinBuffers {
        right: coin.right.as_slice(),
        left: coin.left.as_slice(),
    };
    for _ in 0..steps {
        scratch.resize(current.len() + dd, C64::new(0.0, 0.0));
        step_into(&current, &mut scratch, state.dim, &buffers, options);
        std::mem::swap(&mut current, &mut scratch);
    }
    Ok(LineState {
        origin: state.origin,
        dim: state.dim,
        step_count: state.step_count + steps,
        blocks: current,
    })
}

/// `steps` iterations from all mass at site 0 in internal state `rho0`.
pub fn run_line(coin: &LineCoin, rho0: &DensityBlock, steps: u64) -> Result<LineState, LineError> {
    run_line_with(coin, rho0, steps, &LineOptions::default())
}

pub fn run_line_with(
    coin: &LineCoin,
    rho0: &DensityBlock,
    steps: u64,
    options: &LineOptions,
) -> Result<LineState, LineError> {
    evolve_line(&LineState::new(0, rho0)?, coin, steps, options)
}
