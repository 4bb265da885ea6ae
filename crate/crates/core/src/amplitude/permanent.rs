//! Permanent and determinant kernels.
//!
//! The hot paths work on row-major slices so that callers evaluating many
//! small sub-matrices can reuse one buffer.

use crate::{ComplexMatrix, Error, Result, C64};

/// Largest matrix accepted by [`permanent`].
pub const MAX_PERMANENT_SIZE: usize = 24;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Permanent by Ryser's inclusion-exclusion formula, visiting column
/// subsets in Gray-code order so that each step updates the row sums with a
/// single column. `O(2^n · n)`.
pub fn permanent(a: &ComplexMatrix) -> Result<C64> {
    let n = square_size(a)?;
    if n > MAX_PERMANENT_SIZE {
        return Err(Error::SizeLimit(format!("permanent of a {n}×{n} matrix (limit {MAX_PERMANENT_SIZE})")));
    }
    Ok(ryser_flat(&row_major(a), n))
}

/// Permanent by Glynn's formula with Gray-code sign flips. Independent of
/// [`permanent`]; used for cross-checks.
pub fn glynn_permanent(a: &ComplexMatrix) -> Result<C64> {
    let n = square_size(a)?;
    if n > MAX_PERMANENT_SIZE {
        return Err(Error::SizeLimit(format!("permanent of a {n}×{n} matrix (limit {MAX_PERMANENT_SIZE})")));
    }
    Ok(glynn_flat(&row_major(a), n))
}

/// Determinant by LU decomposition with partial pivoting.
pub fn determinant(a: &ComplexMatrix) -> Result<C64> {
    let n = square_size(a)?;
    let mut buf = row_major(a);
    Ok(det_flat_in_place(&mut buf, n))
}

pub(crate) fn row_major(a: &ComplexMatrix) -> Vec<C64> {
    let (r, c) = a.shape();
    let mut out = Vec::with_capacity(r * c);
    for i in 0..r {
        for j in 0..c {
            out.push(a[(i, j)]);
        }
    }
    out
}

fn square_size(a: &ComplexMatrix) -> Result<usize> {
    let (r, c) = a.shape();
    if r != c {
        return Err(Error::dim(format!("expected a square matrix, got {r}×{c}")));
    }
    Ok(r)
}

/// Ryser permanent of the row-major `n × n` matrix in `a`.
pub(crate) fn ryser_flat(a: &[C64], n: usize) -> C64 {
    match n {
        0 => return ONE,
        1 => return a[0],
        2 => return a[0] * a[3] + a[1] * a[2],
        _ => {}
    }
    let mut row_sums = vec![ZERO; n];
    let mut in_set = vec![false; n];
    let mut total = ZERO;
    let mut size = 0usize;
    for k in 1u64..(1u64 << n) {
        let j = k.trailing_zeros() as usize;
        if in_set[j] {
            in_set[j] = false;
            size -= 1;
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= a[i * n + j];
            }
        } else {
            in_set[j] = true;
            size += 1;
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += a[i * n + j];
            }
        }
        let prod = row_sums.iter().fold(ONE, |p, s| p * s);
        if size.is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    if n % 2 == 1 {
        -total
    } else {
        total
    }
}

/// Glynn permanent of the row-major `n × n` matrix in `a`.
pub(crate) fn glynn_flat(a: &[C64], n: usize) -> C64 {
    if n == 0 {
        return ONE;
    }
    // Column sums of δ_i a_{ij}, starting from δ = (1, …, 1).
    let mut col_sums: Vec<C64> = (0..n).map(|j| (0..n).map(|i| a[i * n + j]).sum()).collect();
    let mut delta = vec![1.0f64; n];
    let mut sign = 1.0f64;
    let mut total = col_sums.iter().fold(ONE, |p, s| p * s);
    for k in 1u64..(1u64 << (n - 1)) {
        // Flip δ_{i+1}; δ_0 stays fixed at +1.
        let i = k.trailing_zeros() as usize + 1;
        let step = -2.0 * delta[i];
        for (j, s) in col_sums.iter_mut().enumerate() {
            *s += a[i * n + j] * step;
        }
        delta[i] = -delta[i];
        sign = -sign;
        let prod = col_sums.iter().fold(ONE, |p, s| p * s);
        total += prod * sign;
    }
    total / (1u64 << (n - 1)) as f64
}

/// Determinant of the row-major `n × n` matrix in `a`; `a` is overwritten
/// by its LU factors.
pub(crate) fn det_flat_in_place(a: &mut [C64], n: usize) -> C64 {
    let mut det = ONE;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x * n + col].norm().total_cmp(&a[y * n + col].norm()))
            .expect("non-empty pivot range");
        let p = a[pivot * n + col];
        if p == ZERO {
            return ZERO;
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            det = -det;
        }
        det *= p;
        let inv = ONE / p;
        for row in col + 1..n {
            let factor = a[row * n + col] * inv;
            if factor == ZERO {
                continue;
            }
            for j in col + 1..n {
                let v = a[col * n + j];
                a[row * n + j] -= factor * v;
            }
        }
    }
    det
}
