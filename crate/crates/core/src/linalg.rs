//! Small dense linear-algebra helpers shared across modules.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{ComplexMatrix, C64};

/// Default relative threshold for numerical ranks.
pub const RANK_TOLERANCE: f64 = 1e-8;

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    // Wide matrices are handled through their adjoint; the spectrum is shared.
    let sv = if m.nrows() >= m.ncols() {
        m.clone().singular_values()
    } else {
        m.adjoint().singular_values()
    };
    let mut sv: Vec<f64> = sv.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Number of singular values above `rel_tol * sigma_max`. Expects a
/// descending spectrum.
pub fn numerical_rank(spectrum: &[f64], rel_tol: f64) -> usize {
    match spectrum.first() {
        Some(&max) if max > 0.0 => spectrum.iter().take_while(|&&s| s > rel_tol * max).count(),
        _ => 0,
    }
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a base seed with a list of tags (SplitMix64 finalizer) so that
/// independent jobs draw from independent, schedule-free streams.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut x = base;
    for &t in tags {
        x ^= t.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(x << 6).wrapping_add(x >> 2);
        x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = x;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        x = z ^ (z >> 31);
    }
    x
}

/// Standard complex Gaussian, `E|z|^2 = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with iid standard complex Gaussian entries (Ginibre ensemble).
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    // Row-major draw order; changing it changes every seeded result.
    let mut m = ComplexMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = complex_gaussian(rng);
        }
    }
    m
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let z = ginibre(n, n, rng);
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random contraction: a Ginibre matrix rescaled so its largest singular
/// value is `scale` (< 1 gives a strictly lossy device).
pub fn random_subunitary<R: Rng + ?Sized>(rows: usize, cols: usize, scale: f64, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(rows, cols, rng);
    let smax = singular_values(&g)[0];
    g * C64::new(scale / smax, 0.0)
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Largest entry of `|M^† M - I|`.
pub fn unitarity_deviation(m: &ComplexMatrix) -> f64 {
    let g = m.adjoint() * m;
    let mut dev: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((g[(i, j)] - target).norm());
        }
    }
    dev
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// A `d × d` unitary whose first row is `v / |v|`, completed by Gram-Schmidt
/// against the standard basis. Used to prepare a particle in internal state
/// `v` starting from internal state 1.
pub fn unitary_with_first_row(v: &[C64]) -> ComplexMatrix {
    let d = v.len();
    let mut rows: Vec<DVector<C64>> = Vec::with_capacity(d);
    let first = DVector::from_column_slice(v);
    let norm = first.norm();
    rows.push(first / C64::new(norm, 0.0));
    for k in 0..d {
        if rows.len() == d {
            break;
        }
        let mut e = DVector::<C64>::zeros(d);
        e[k] = C64::new(1.0, 0.0);
        for r in &rows {
            let proj = r.dotc(&e);
            e -= r * proj;
        }
        let n = e.norm();
        if n > 1e-8 {
            rows.push(e / C64::new(n, 0.0));
        }
    }
    ComplexMatrix::from_fn(d, d, |i, j| rows[i][j])
}
