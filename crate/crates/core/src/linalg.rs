//! Dense complex linear algebra for coin operators and density blocks.
//!
//! Everything here works on small square matrices (the coin dimension is
//! typically 2 to 8). The heavy lifting of Hermitian eigensolving is done by
//! `nalgebra`; this module adds the pieces the walk needs on top of it:
//! normality and commutation checks, and a joint eigendecomposition of a
//! commuting pair of normal operators.

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

/// Default tolerance used when clustering eigenvalues during joint diagonalization.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;
/// Default tolerance on reconstruction residuals and basis orthonormality.
pub const DEFAULT_RECONSTRUCTION_TOL: f64 = 1e-10;
/// Default tolerance on `|λ|² + |φ|² = 1`.
pub const DEFAULT_NORMALIZATION_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix must be square with dimension >= 1, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operators do not commute: max |[B, C]| = {norm:e} exceeds tolerance {tol:e}")]
    Commutation { norm: f64, tol: f64 },
    #[error("operator {which} is not normal: max |M M† - M† M| = {residual:e} exceeds tolerance {tol:e}")]
    NonNormal {
        which: &'static str,
        residual: f64,
        tol: f64,
    },
    #[error("spectral decomposition failed: {reason} (residual {residual:e}, tolerance {tol:e})")]
    Decomposition {
        reason: &'static str,
        residual: f64,
        tol: f64,
    },
    #[error("eigenvalue pair {index} violates |λ|² + |φ|² = 1 by {residual:e}")]
    Unnormalized { index: usize, residual: f64 },
}

/// Square complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<C64>,
}

impl ComplexMatrix {
    pub fn new(inner: DMatrix<C64>) -> Result<Self, LinalgError> {
        let (rows, cols) = inner.shape();
        if rows != cols || rows == 0 {
            return Err(LinalgError::NotSquare { rows, cols });
        }
        for c in 0..cols {
            for r in 0..rows {
                let z = inner[(r, c)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(LinalgError::NonFinite { row: r, col: c });
                }
            }
        }
        Ok(Self { inner })
    }

    /// Build from row-major rows.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self, LinalgError> {
        let n = rows.len();
        for row in rows {
            if row.len() != n {
                return Err(LinalgError::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
        }
        Self::new(DMatrix::from_fn(n, n, |r, c| rows[r][c]))
    }

    /// Build from real row-major rows.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_diagonal(entries: &[C64]) -> Result<Self, LinalgError> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(entries)))
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        Self {
            inner: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        Self {
            inner: DMatrix::zeros(dim, dim),
        }
    }

    /// Rank-one projector `|v⟩⟨v|`.
    pub fn projector(v: &DVector<C64>) -> Result<Self, LinalgError> {
        Self::new(v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.inner
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.inner
    }

    /// Column-major entry storage.
    pub fn as_slice(&self) -> &[C64] {
        self.inner.as_slice()
    }

    pub(crate) fn from_column_slice(dim: usize, data: &[C64]) -> Self {
        Self {
            inner: DMatrix::from_column_slice(dim, dim, data),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            inner: &self.inner * s,
        }
    }

    pub fn trace(&self) -> C64 {
        self.inner.trace()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.inner)
    }

    /// `max |M - M†|`.
    pub fn hermitian_residual(&self) -> f64 {
        max_abs(&(&self.inner - self.inner.adjoint()))
    }

    /// Real eigenvalues of the Hermitian part `(M + M†)/2`, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let h = hermitian_part(&self.inner);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_hermitian_eigenvalue(&self) -> f64 {
        self.hermitian_eigenvalues()[0]
    }

    /// Quadratic form `⟨v|M|v⟩`.
    pub fn expectation(&self, v: &DVector<C64>) -> C64 {
        v.dotc(&(&self.inner * v))
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{}", self.inner)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.inner[idx]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner * &rhs.inner,
        }
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// `(M - M†) / 2i`, Hermitian for any `M`.
fn skew_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m - m.adjoint()) * C64::new(0.0, -0.5)
}

/// Max-entry magnitude of `BC - CB`.
pub fn commutator_norm(b: &ComplexMatrix, c: &ComplexMatrix) -> Result<f64, LinalgError> {
    if b.dim() != c.dim() {
        return Err(LinalgError::DimensionMismatch {
            expected: b.dim(),
            found: c.dim(),
        });
    }
    Ok(max_abs(&(&b.inner * &c.inner - &c.inner * &b.inner)))
}

fn normality_residual(m: &ComplexMatrix) -> f64 {
    let adj = m.inner.adjoint();
    max_abs(&(&m.inner * &adj - &adj * &m.inner))
}

pub fn is_normal(m: &ComplexMatrix, tol: f64) -> bool {
    normality_residual(m) <= tol
}

/// Joint orthonormal eigenbasis `{|b_i⟩}` of a commuting pair `(B, C)` with
/// paired eigenvalues: `B|b_i⟩ = λ_i|b_i⟩`, `C|b_i⟩ = φ_i|b_i⟩`.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    basis: Vec<DVector<C64>>,
    lambda: Vec<C64>,
    phi: Vec<C64>,
}

impl SpectralDecomposition {
    /// Assemble a decomposition from explicit parts, checking orthonormality
    /// of the basis and the per-pair normalization `|λ|² + |φ|² = 1`.
    pub fn new(
        basis: Vec<DVector<C64>>,
        lambda: Vec<C64>,
        phi: Vec<C64>,
    ) -> Result<Self, LinalgError> {
        let dim = basis.len();
        if dim == 0 {
            return Err(LinalgError::NotSquare { rows: 0, cols: 0 });
        }
        for len in [lambda.len(), phi.len()] {
            if len != dim {
                return Err(LinalgError::DimensionMismatch {
                    expected: dim,
                    found: len,
                });
            }
        }
        for v in &basis {
            if v.len() != dim {
                return Err(LinalgError::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
        }
        let decomp = Self { basis, lambda, phi };
        let residual = decomp.orthonormality_residual();
        if residual > DEFAULT_RECONSTRUCTION_TOL {
            return Err(LinalgError::Decomposition {
                reason: "basis is not orthonormal",
                residual,
                tol: DEFAULT_RECONSTRUCTION_TOL,
            });
        }
        decomp.check_normalization(DEFAULT_NORMALIZATION_TOL)?;
        Ok(decomp)
    }

    /// Decomposition in the standard basis.
    pub fn from_diagonal(lambda: Vec<C64>, phi: Vec<C64>) -> Result<Self, LinalgError> {
        let dim = lambda.len();
        let basis = (0..dim)
            .map(|i| {
                let mut v = DVector::zeros(dim);
                v[i] = C64::new(1.0, 0.0);
                v
            })
            .collect();
        Self::new(basis, lambda, phi)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[DVector<C64>] {
        &self.basis
    }

    pub fn lambda(&self) -> &[C64] {
        &self.lambda
    }

    pub fn phi(&self) -> &[C64] {
        &self.phi
    }

    /// `max |⟨b_i|b_j⟩ - δ_ij|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, bi) in self.basis.iter().enumerate() {
            for (j, bj) in self.basis.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((bi.dotc(bj) - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    fn reassemble(&self, values: &[C64]) -> ComplexMatrix {
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for (v, &ev) in self.basis.iter().zip(values) {
            m += v * v.adjoint() * ev;
        }
        ComplexMatrix { inner: m }
    }

    /// `Σ λ_i |b_i⟩⟨b_i|`.
    pub fn reconstruct_b(&self) -> ComplexMatrix {
        self.reassemble(&self.lambda)
    }

    /// `Σ φ_i |b_i⟩⟨b_i|`.
    pub fn reconstruct_c(&self) -> ComplexMatrix {
        self.reassemble(&self.phi)
    }

    fn check_normalization(&self, tol: f64) -> Result<(), LinalgError> {
        for (index, (l, p)) in self.lambda.iter().zip(&self.phi).enumerate() {
            let residual = (l.norm_sqr() + p.norm_sqr() - 1.0).abs();
            if residual > tol {
                return Err(LinalgError::Unnormalized { index, residual });
            }
        }
        Ok(())
    }
}

/// Tolerances for [`joint_eigendecomposition_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralConfig {
    /// Bound on the commutator and normality residuals accepted as zero.
    pub tol: f64,
    /// Eigenvalues closer than this are treated as one degenerate cluster.
    pub cluster_tol: f64,
    /// Bound on reconstruction and orthonormality residuals of the result.
    pub reconstruction_tol: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            tol: DEFAULT_RECONSTRUCTION_TOL,
            cluster_tol: DEFAULT_CLUSTER_TOL,
            reconstruction_tol: DEFAULT_RECONSTRUCTION_TOL,
        }
    }
}

pub fn joint_eigendecomposition(
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    tol: f64,
) -> Result<SpectralDecomposition, LinalgError> {
    joint_eigendecomposition_with(
        b,
        c,
        &SpectralConfig {
            tol,
            ..SpectralConfig::default()
        },
    )
}

/// Jointly diagonalize a commuting pair of normal operators.
///
/// `B` is diagonalized first through its Hermitian and skew-Hermitian parts;
/// inside every degenerate eigenvalue cluster the restriction of `C` is then
/// diagonalized, so degenerate `λ` with distinct `φ` are split correctly.
pub fn joint_eigendecomposition_with(
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    config: &SpectralConfig,
) -> Result<SpectralDecomposition, LinalgError> {
    let norm = commutator_norm(b, c)?;
    if norm > config.tol {
        return Err(LinalgError::Commutation {
            norm,
            tol: config.tol,
        });
    }
    for (which, m) in [("B", b), ("C", c)] {
        let residual = normality_residual(m);
        if residual > config.tol {
            return Err(LinalgError::NonNormal {
                which,
                residual,
                tol: config.tol,
            });
        }
    }

    let dim = b.dim();
    // For commuting normal B, C all four Hermitian parts commute pairwise.
    let hermitians = [
        hermitian_part(&b.inner),
        skew_part(&b.inner),
        hermitian_part(&c.inner),
        skew_part(&c.inner),
    ];
    let mut columns = Vec::with_capacity(dim);
    refine_subspace(
        DMatrix::identity(dim, dim),
        &hermitians,
        config.cluster_tol,
        &mut columns,
    );

    let mut parts: Vec<(DVector<C64>, C64, C64)> = columns
        .into_iter()
        .map(|v| {
            let v = fix_phase(v);
            let lambda = b.expectation(&v);
            let phi = c.expectation(&v);
            (v, lambda, phi)
        })
        .collect();
    // Canonical order: largest |λ| first; stable for ties.
    parts.sort_by(|x, y| y.1.norm().total_cmp(&x.1.norm()));

    let mut basis = Vec::with_capacity(dim);
    let mut lambda = Vec::with_capacity(dim);
    let mut phi = Vec::with_capacity(dim);
    for (v, l, p) in parts {
        basis.push(v);
        lambda.push(l);
        phi.push(p);
    }
    let decomp = SpectralDecomposition { basis, lambda, phi };

    let tol = config.reconstruction_tol;
    let ortho = decomp.orthonormality_residual();
    if ortho > tol {
        return Err(LinalgError::Decomposition {
            reason: "eigenbasis is not orthonormal",
            residual: ortho,
            tol,
        });
    }
    for (reason, original, rebuilt) in [
        (
            "B is not reproduced by its spectral sum",
            b,
            decomp.reconstruct_b(),
        ),
        (
            "C is not reproduced by its spectral sum",
            c,
            decomp.reconstruct_c(),
        ),
    ] {
        let residual = (original - &rebuilt).max_abs();
        if residual > tol {
            return Err(LinalgError::Decomposition {
                reason,
                residual,
                tol,
            });
        }
    }
    decomp.check_normalization(DEFAULT_NORMALIZATION_TOL)?;
    Ok(decomp)
}

/// Split the subspace spanned by the orthonormal columns of `q` along the
/// eigenspaces of `mats[0]` restricted to it, then recurse with the rest.
fn refine_subspace(
    q: DMatrix<C64>,
    mats: &[DMatrix<C64>],
    cluster_tol: f64,
    out: &mut Vec<DVector<C64>>,
) {
    let m = q.ncols();
    let Some((first, rest)) = mats.split_first() else {
        out.extend(q.column_iter().map(|c| c.into_owned()));
        return;
    };
    if m == 1 {
        out.push(q.column(0).into_owned());
        return;
    }
    let restricted = hermitian_part(&(q.adjoint() * first * &q));
    let eig = restricted.symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let mut start = 0;
    while start < m {
        let mut end = start + 1;
        while end < m
            && eig.eigenvalues[order[end]] - eig.eigenvalues[order[end - 1]] <= cluster_tol
        {
            end += 1;
        }
        let cluster = &order[start..end];
        let vecs = DMatrix::from_fn(m, cluster.len(), |r, c| eig.eigenvectors[(r, cluster[c])]);
        refine_subspace(&q * vecs, rest, cluster_tol, out);
        start = end;
    }
}

/// Rotate the global phase so the first largest-modulus component is real positive.
fn fix_phase(v: DVector<C64>) -> DVector<C64> {
    let max = v.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
    let pivot = v
        .iter()
        .find(|z| z.norm() >= max - 1e-12)
        .copied()
        .unwrap_or(C64::new(1.0, 0.0));
    let phase = pivot.conj() / pivot.norm();
    v * phase
}
