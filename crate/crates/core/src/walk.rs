//! Open quantum walks on explicit graphs.
//!
//! A walk is a set of transition operators `B_j^i` on the edges of a graph,
//! acting on a state that is block-diagonal in position:
//! `ρ = Σ_i ρ_i ⊗ |i⟩⟨i|`. One step maps
//! `ρ_i ← Σ_j B_j^i ρ_j (B_j^i)†`.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::kernel;
use crate::linalg::{ComplexMatrix, C64};

/// Tolerance used by the state and coin validators.
pub const VALIDATION_TOL: f64 = 1e-10;
/// Blocks whose trace drops below this after a step are discarded.
pub const DEFAULT_PRUNE_FLOOR: f64 = 1e-300;

/// Vertex label. On the line this is the lattice coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub i64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<i64> for NodeId {
    fn from(k: i64) -> Self {
        NodeId(k)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BlockViolation {
    #[error("block is not Hermitian (max |ρ - ρ†| = {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("block is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("block trace {trace} outside [0, 1]")]
    TraceOutOfRange { trace: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid density block: {0}")]
    InvalidBlock(#[from] BlockViolation),
    #[error("invalid density block at node {node}: {violation}")]
    InvalidBlockAt {
        node: NodeId,
        violation: BlockViolation,
    },
    #[error("total trace {total} differs from 1 by {residual:e}")]
    TotalTrace { total: f64, residual: f64 },
    #[error("state has no occupied nodes")]
    EmptyState,
    #[error("position coherence between nodes {a} and {b} (magnitude {magnitude:e}); only position-diagonal states are accepted")]
    PositionCoherence {
        a: NodeId,
        b: NodeId,
        magnitude: f64,
    },
    #[error("node {0} carries probability but has no outgoing transitions")]
    UnroutedMass(NodeId),
}

/// Conditional density operator `ρ_i` on one node. Its trace is the
/// occupation probability of that node.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityBlock {
    matrix: ComplexMatrix,
}

impl DensityBlock {
    /// Validate Hermiticity, positivity and `0 <= Tr ρ <= 1` at [`VALIDATION_TOL`].
    pub fn new(matrix: ComplexMatrix) -> Result<Self, BlockViolation> {
        let residual = matrix.hermitian_residual();
        if residual > VALIDATION_TOL {
            return Err(BlockViolation::NotHermitian { residual });
        }
        let min_eigenvalue = matrix.min_hermitian_eigenvalue();
        if min_eigenvalue < -VALIDATION_TOL {
            return Err(BlockViolation::NotPositive { min_eigenvalue });
        }
        let trace = matrix.trace().re;
        if !(-VALIDATION_TOL..=1.0 + VALIDATION_TOL).contains(&trace) {
            return Err(BlockViolation::TraceOutOfRange { trace });
        }
        Ok(Self { matrix })
    }

    /// The two-level state `[[p, z], [z*, q]]`.
    pub fn two_level(p: f64, q: f64, z: C64) -> Result<Self, BlockViolation> {
        let m = ComplexMatrix::from_rows(&[
            vec![C64::new(p, 0.0), z],
            vec![z.conj(), C64::new(q, 0.0)],
        ])
        .map_err(|_| BlockViolation::NotHermitian {
            residual: f64::INFINITY,
        })?;
        Self::new(m)
    }

    pub(crate) fn from_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix.min_hermitian_eigenvalue()
    }
}

/// Transition operators keyed by `(source, target)`.
#[derive(Clone, Debug)]
pub struct TransitionSet {
    dim: usize,
    edges: BTreeMap<NodeId, BTreeMap<NodeId, ComplexMatrix>>,
}

/// A source node whose outgoing operators violate `Σ_i B†B = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub source: NodeId,
    pub residual: f64,
}

impl TransitionSet {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            edges: BTreeMap::new(),
        }
    }

    /// Set the operator for the jump `source -> target`, replacing any previous one.
    pub fn insert(
        &mut self,
        source: NodeId,
        target: NodeId,
        op: ComplexMatrix,
    ) -> Result<(), WalkError> {
        if op.dim() != self.dim {
            return Err(WalkError::DimensionMismatch {
                expected: self.dim,
                found: op.dim(),
            });
        }
        self.edges.entry(source).or_default().insert(target, op);
        Ok(())
    }

    /// Nearest-neighbour path on `first..=last`: every node jumps right with
    /// `right` and left with `left`. Nodes outside the range are sinks.
    pub fn homogeneous_path(
        right: &ComplexMatrix,
        left: &ComplexMatrix,
        first: i64,
        last: i64,
    ) -> Result<Self, WalkError> {
        let mut t = Self::new(right.dim());
        for j in first..=last {
            t.insert(NodeId(j), NodeId(j + 1), right.clone())?;
            t.insert(NodeId(j), NodeId(j - 1), left.clone())?;
        }
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outgoing(&self, source: NodeId) -> impl Iterator<Item = (NodeId, &ComplexMatrix)> {
        self.edges
            .get(&source)
            .into_iter()
            .flat_map(|m| m.iter().map(|(t, op)| (*t, op)))
    }

    pub fn sources(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.edges.keys().copied()
    }

    /// `max |Σ_i (B_j^i)† B_j^i - I|` for one source.
    pub fn normalization_residual(&self, source: NodeId) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.dim);
        for (_, op) in self.outgoing(source) {
            sum = &sum + &(&op.adjoint() * op);
        }
        (&sum - &ComplexMatrix::identity(self.dim)).max_abs()
    }
}

pub fn validate_transitions(t: &TransitionSet) -> Vec<Violation> {
    validate_transitions_with(t, VALIDATION_TOL)
}

pub fn validate_transitions_with(t: &TransitionSet, tol: f64) -> Vec<Violation> {
    t.sources()
        .filter_map(|source| {
            let residual = t.normalization_residual(source);
            (residual > tol).then_some(Violation { source, residual })
        })
        .collect()
}

/// Position-diagonal walk state, stored sparsely.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkState {
    dim: usize,
    blocks: BTreeMap<NodeId, DensityBlock>,
    step_count: u64,
}

impl WalkState {
    /// Checks matching dimensions and a total trace of 1.
    pub fn new(blocks: BTreeMap<NodeId, DensityBlock>) -> Result<Self, WalkError> {
        let dim = blocks
            .values()
            .next()
            .map(DensityBlock::dim)
            .ok_or(WalkError::EmptyState)?;
        for block in blocks.values() {
            if block.dim() != dim {
                return Err(WalkError::DimensionMismatch {
                    expected: dim,
                    found: block.dim(),
                });
            }
        }
        let state = Self {
            dim,
            blocks,
            step_count: 0,
        };
        let total = state.total_trace();
        let residual = (total - 1.0).abs();
        if residual > VALIDATION_TOL {
            return Err(WalkError::TotalTrace { total, residual });
        }
        Ok(state)
    }

    pub fn localized(node: NodeId, block: DensityBlock) -> Result<Self, WalkError> {
        Self::new(BTreeMap::from([(node, block)]))
    }

    /// Split a density matrix on `H ⊗ K` (node-major: index `node * dim + level`)
    /// into per-node blocks. Coherences between different nodes are rejected.
    pub fn from_joint_density(
        nodes: &[NodeId],
        dim: usize,
        rho: &ComplexMatrix,
    ) -> Result<Self, WalkError> {
        let total = nodes.len() * dim;
        if rho.dim() != total {
            return Err(WalkError::DimensionMismatch {
                expected: total,
                found: rho.dim(),
            });
        }
        for (a, &na) in nodes.iter().enumerate() {
            for (b, &nb) in nodes.iter().enumerate() {
                if a == b {
                    continue;
                }
                let mut magnitude: f64 = 0.0;
                for r in 0..dim {
                    for c in 0..dim {
                        magnitude = magnitude.max(rho[(a * dim + r, b * dim + c)].norm());
                    }
                }
                if magnitude > VALIDATION_TOL {
                    return Err(WalkError::PositionCoherence {
                        a: na,
                        b: nb,
                        magnitude,
                    });
                }
            }
        }
        let mut blocks = BTreeMap::new();
        for (a, &node) in nodes.iter().enumerate() {
            let rows: Vec<Vec<C64>> = (0..dim)
                .map(|r| (0..dim).map(|c| rho[(a * dim + r, a * dim + c)]).collect())
                .collect();
            let m = ComplexMatrix::from_rows(&rows).map_err(|_| WalkError::DimensionMismatch {
                expected: dim,
                found: 0,
            })?;
            let block = DensityBlock::new(m)
                .map_err(|violation| WalkError::InvalidBlockAt { node, violation })?;
            blocks.insert(node, block);
        }
        Self::new(blocks)
    }

    pub(crate) fn from_parts(
        dim: usize,
        blocks: BTreeMap<NodeId, DensityBlock>,
        step_count: u64,
    ) -> Self {
        Self {
            dim,
            blocks,
            step_count,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn blocks(&self) -> &BTreeMap<NodeId, DensityBlock> {
        &self.blocks
    }

    pub fn block(&self, node: NodeId) -> Option<&DensityBlock> {
        self.blocks.get(&node)
    }

    pub fn total_trace(&self) -> f64 {
        self.blocks.values().map(DensityBlock::trace).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOptions {
    pub prune_floor: f64,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self {
            prune_floor: DEFAULT_PRUNE_FLOOR,
        }
    }
}

pub fn apply_step(state: &WalkState, t: &TransitionSet) -> Result<WalkState, WalkError> {
    apply_step_with(state, t, &StepOptions::default())
}

/// One application of the walk map. Contributions to each target are summed
/// in ascending source order.
pub fn apply_step_with(
    state: &WalkState,
    t: &TransitionSet,
    options: &StepOptions,
) -> Result<WalkState, WalkError> {
    let d = state.dim;
    if t.dim() != d {
        return Err(WalkError::DimensionMismatch {
            expected: d,
            found: t.dim(),
        });
    }
    let mut acc: BTreeMap<NodeId, Vec<C64>> = BTreeMap::new();
    for (&source, block) in &state.blocks {
        let mut routed = false;
        for (target, op) in t.outgoing(source) {
            routed = true;
            let buf = acc
                .entry(target)
                .or_insert_with(|| vec![C64::new(0.0, 0.0); d * d]);
            kernel::sandwich_add(op.as_slice(), block.matrix().as_slice(), buf, d);
        }
        if !routed && block.trace() > 0.0 {
            return Err(WalkError::UnroutedMass(source));
        }
    }
    let blocks = acc
        .into_iter()
        .filter_map(|(node, mut buf)| {
            kernel::finish_block(&mut buf, d, options.prune_floor).then(|| {
                (
                    node,
                    DensityBlock::from_unchecked(ComplexMatrix::from_column_slice(d, &buf)),
                )
            })
        })
        .collect();
    Ok(WalkState::from_parts(d, blocks, state.step_count + 1))
}

pub fn evolve(state: &WalkState, t: &TransitionSet, steps: u64) -> Result<WalkState, WalkError> {
    evolve_with(state, t, steps, &StepOptions::default())
}

pub fn evolve_with(
    state: &WalkState,
    t: &TransitionSet,
    steps: u64,
    options: &StepOptions,
) -> Result<WalkState, WalkError> {
    let mut current = state.clone();
    for _ in 0..steps {
        current = apply_step_with(&current, t, options)?;
    }
    Ok(current)
}

/// `P_k = Tr ρ_k` for every stored node.
pub fn position_distribution(state: &WalkState) -> BTreeMap<NodeId, f64> {
    state
        .blocks
        .iter()
        .map(|(&node, block)| (node, block.trace()))
        .collect()
}
