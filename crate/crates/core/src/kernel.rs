//! Flat-buffer block kernels shared by the graph and line engines.
//!
//! Blocks are `d×d` column-major slices. Both engines call the same routines
//! in the same order, so their results agree bit for bit.

use crate::linalg::C64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// `out += a · rho · a†`.
#[inline]
pub(crate) fn sandwich_add(a: &[C64], rho: &[C64], out: &mut [C64], d: usize) {
    match d {
        2 => sandwich_add_fixed::<2, 4>(a, rho, out),
        3 => sandwich_add_fixed::<3, 9>(a, rho, out),
        4 => sandwich_add_fixed::<4, 16>(a, rho, out),
        _ => sandwich_add_dyn(a, rho, out, d),
    }
}

// Same loop order as `sandwich_add_dyn`, with the sizes known at compile time.
#[inline(always)]
fn sandwich_add_fixed<const D: usize, const DD: usize>(a: &[C64], rho: &[C64], out: &mut [C64]) {
    let a: &[C64; DD] = a.try_into().expect("operator block size");
    let rho: &[C64; DD] = rho.try_into().expect("density block size");
    let out: &mut [C64; DD] = out.try_into().expect("output block size");
    let mut tmp = [ZERO; DD];
    for j in 0..D {
        for l in 0..D {
            let r = rho[l + j * D];
            for i in 0..D {
                tmp[i + j * D] += a[i + l * D] * r;
            }
        }
    }
    for j in 0..D {
        for l in 0..D {
            let ac = a[j + l * D].conj();
            for i in 0..D {
                out[i + j * D] += tmp[i + l * D] * ac;
            }
        }
    }
}

fn sandwich_add_dyn(a: &[C64], rho: &[C64], out: &mut [C64], d: usize) {
    let mut tmp = vec![ZERO; d * d];
    for j in 0..d {
        for l in 0..d {
            let r = rho[l + j * d];
            for i in 0..d {
                tmp[i + j * d] += a[i + l * d] * r;
            }
        }
    }
    for j in 0..d {
        for l in 0..d {
            let ac = a[j + l * d].conj();
            for i in 0..d {
                out[i + j * d] += tmp[i + l * d] * ac;
            }
        }
    }
}

/// Replace `m` by `(m + m†)/2` in place.
#[inline]
pub(crate) fn hermitize(m: &mut [C64], d: usize) {
    for j in 0..d {
        let diag = &mut m[j + j * d];
        *diag = C64::new(diag.re, 0.0);
        for i in (j + 1)..d {
            let lower = m[i + j * d];
            let upper = m[j + i * d];
            let avg = (lower + upper.conj()) * 0.5;
            m[i + j * d] = avg;
            m[j + i * d] = avg.conj();
        }
    }
}

/// Real part of the trace.
#[inline]
pub(crate) fn trace(m: &[C64], d: usize) -> f64 {
    (0..d).map(|i| m[i + i * d].re).sum()
}

/// Hermitize, then zero the block if its trace falls below `floor`.
/// Returns whether the block survived.
#[inline]
pub(crate) fn finish_block(m: &mut [C64], d: usize, floor: f64) -> bool {
    hermitize(m, d);
    if trace(m, d) < floor {
        m.fill(ZERO);
        false
    } else {
        true
    }
}
