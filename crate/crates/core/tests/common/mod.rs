//! Random coins, states and independent checks shared by the integration tests.

#![allow(dead_code)]

use nalgebra::DMatrix;
use oqw_core::{ComplexMatrix, DensityBlock, LineCoin, C64};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_unitary(rng: &mut impl Rng, dim: usize) -> DMatrix<C64> {
    gaussian_matrix(rng, dim, dim).qr().q()
}

/// Full-rank random density matrix with unit trace.
pub fn random_density(rng: &mut impl Rng, dim: usize) -> DensityBlock {
    let g = gaussian_matrix(rng, dim, dim);
    let mut rho = &g * g.adjoint();
    let tr = rho.trace();
    rho /= tr;
    // exact Hermitian symmetry
    let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    DensityBlock::new(ComplexMatrix::new(rho).unwrap()).unwrap()
}

/// Generic normalized pair: the two `d×d` halves of a random `2d×d` isometry.
/// Almost surely neither commuting nor normal.
pub fn random_general_coin(rng: &mut impl Rng, dim: usize) -> LineCoin {
    let v = gaussian_matrix(rng, 2 * dim, dim).qr().q();
    let b = v.rows(0, dim).into_owned();
    let c = v.rows(dim, dim).into_owned();
    LineCoin::new(
        ComplexMatrix::new(b).unwrap(),
        ComplexMatrix::new(c).unwrap(),
    )
    .unwrap()
}

/// Eigenvalue pair `(cos t · e^{ia}, sin t · e^{ib})`.
pub fn spectral_pair(t: f64, a: f64, b: f64) -> (C64, C64) {
    (C64::from_polar(t.cos(), a), C64::from_polar(t.sin(), b))
}

/// Random angles in `[0, π/2]`, occasionally pinned to the soliton endpoints
/// or repeated to create degeneracies.
pub fn random_angles(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    let mut angles: Vec<f64> = Vec::with_capacity(dim);
    for _ in 0..dim {
        let roll: f64 = rng.random();
        let t = if roll < 0.1 {
            0.0
        } else if roll < 0.2 {
            std::f64::consts::FRAC_PI_2
        } else if roll < 0.3 && !angles.is_empty() {
            angles[rng.random_range(0..angles.len())]
        } else {
            rng.random_range(0.0..std::f64::consts::FRAC_PI_2)
        };
        angles.push(t);
    }
    angles
}

/// `U diag(λ) U†`, `U diag(φ) U†` for the given eigenvalue pairs.
pub fn commuting_coin_from(u: &DMatrix<C64>, pairs: &[(C64, C64)]) -> LineCoin {
    let conj = |vals: Vec<C64>| {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vals));
        ComplexMatrix::new(u * d * u.adjoint()).unwrap()
    };
    let b = conj(pairs.iter().map(|p| p.0).collect());
    let c = conj(pairs.iter().map(|p| p.1).collect());
    LineCoin::new(b, c).unwrap()
}

pub fn random_commuting_coin(rng: &mut impl Rng, dim: usize) -> (LineCoin, Vec<(C64, C64)>) {
    let u = random_unitary(rng, dim);
    let pairs: Vec<(C64, C64)> = random_angles(rng, dim)
        .into_iter()
        .map(|t| spectral_pair(t, rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)))
        .collect();
    (commuting_coin_from(&u, &pairs), pairs)
}

/// Whether the Hermitian column-major block `m` has all eigenvalues `>= -shift`.
///
/// Attempts a Cholesky factorization of `m + shift·I`; only if that fails is
/// the exact minimum eigenvalue computed.
pub fn psd_within(m: &[C64], d: usize, shift: f64) -> bool {
    if cholesky_ok(m, d, shift) {
        return true;
    }
    let full = ComplexMatrix::new(DMatrix::from_column_slice(d, d, m)).unwrap();
    full.min_hermitian_eigenvalue() >= -shift
}

fn cholesky_ok(m: &[C64], d: usize, shift: f64) -> bool {
    let mut l = vec![C64::new(0.0, 0.0); d * d];
    for j in 0..d {
        let mut diag = m[j + j * d].re + shift;
        for k in 0..j {
            diag -= l[j + k * d].norm_sqr();
        }
        if diag <= 0.0 {
            return false;
        }
        let ljj = diag.sqrt();
        l[j + j * d] = C64::new(ljj, 0.0);
        for i in (j + 1)..d {
            let mut s = m[i + j * d];
            for k in 0..j {
                s -= l[i + k * d] * l[j + k * d].conj();
            }
            l[i + j * d] = s / ljj;
        }
    }
    true
}

pub fn max_hermitian_residual(m: &[C64], d: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            worst = worst.max((m[i + j * d] - m[j + i * d].conj()).norm());
        }
    }
    worst
}
