//! Brute-force reference implementations.
//!
//! Everything here enumerates permutations explicitly and shares no code
//! with the fast kernels, so the two can be checked against each other.
//! Intended for tests and the `verify` harness; all routines are factorial
//! in cost.

use crate::{ComplexMatrix, CoefficientTensor, Species, C64};

/// All permutations of `0..n` with their parity (`true` = odd), generated
/// by Heap's algorithm.
pub fn permutations(n: usize) -> Vec<(Vec<usize>, bool)> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut out = vec![(perm.clone(), false)];
    let mut odd = false;
    let mut c = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            odd = !odd;
            out.push((perm.clone(), odd));
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Parity by counting inversions.
pub fn parity_by_inversions(perm: &[usize]) -> bool {
    let mut inv = 0usize;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inv += 1;
            }
        }
    }
    inv % 2 == 1
}

/// `Σ_σ sgn(σ) ∏_i a_{i,σ(i)}` with the sign chosen by species.
pub fn permutation_sum(a: &ComplexMatrix, species: Species) -> C64 {
    let n = a.nrows();
    permutations(n)
        .into_iter()
        .map(|(p, odd)| {
            let prod: C64 = (0..n).map(|i| a[(i, p[i])]).product();
            prod * species.sign(odd)
        })
        .sum()
}

pub fn permanent_naive(a: &ComplexMatrix) -> C64 {
    permutation_sum(a, Species::Boson)
}

pub fn determinant_naive(a: &ComplexMatrix) -> C64 {
    permutation_sum(a, Species::Fermion)
}

/// Post-selected coefficients as an explicit sum over many-particle paths:
/// `g̃_{j} = Σ_σ sgn(σ) ∏_k W[src_{σ(k)}, d(k-1)+j_k]`. `source_rows` are
/// 1-based.
pub fn coefficient_tensor_by_paths(
    w: &ComplexMatrix,
    species: Species,
    d: usize,
    source_rows: &[usize],
) -> CoefficientTensor {
    let n = source_rows.len();
    let perms = permutations(n);
    let mut out = CoefficientTensor::zeros(d, n);
    for flat in 0..out.len() {
        let j = out.multi_index(flat);
        let mut acc = C64::new(0.0, 0.0);
        for (sigma, odd) in &perms {
            let mut prod = C64::new(species.sign(*odd), 0.0);
            for k in 0..n {
                prod *= w[(source_rows[sigma[k]] - 1, d * k + j[k] - 1)];
            }
            acc += prod;
        }
        out.amplitudes_mut()[flat] = acc;
    }
    out
}

/// Same sum as [`coefficient_tensor_by_paths`], but visiting only one
/// representative per coset of permutations that exchange identical source
/// rows, weighted by the coset size `∏ r_j!`. Bosons only.
pub fn coefficient_tensor_by_distinct_paths(
    w: &ComplexMatrix,
    d: usize,
    source_rows: &[usize],
) -> CoefficientTensor {
    let n = source_rows.len();
    let mut seen: Vec<Vec<usize>> = Vec::new();
    for (sigma, _) in permutations(n) {
        let path: Vec<usize> = sigma.iter().map(|&s| source_rows[s]).collect();
        if !seen.contains(&path) {
            seen.push(path);
        }
    }
    let multiplicity: f64 = {
        let mut sorted = source_rows.to_vec();
        sorted.sort_unstable();
        let mut m = 1.0;
        let mut run = 1usize;
        for i in 1..=sorted.len() {
            if i < sorted.len() && sorted[i] == sorted[i - 1] {
                run += 1;
            } else {
                m *= (1..=run).map(|x| x as f64).product::<f64>();
                run = 1;
            }
        }
        m
    };
    let mut out = CoefficientTensor::zeros(d, n);
    for flat in 0..out.len() {
        let j = out.multi_index(flat);
        let mut acc = C64::new(0.0, 0.0);
        for path in &seen {
            let mut prod = C64::new(1.0, 0.0);
            for k in 0..n {
                prod *= w[(path[k] - 1, d * k + j[k] - 1)];
            }
            acc += prod;
        }
        out.amplitudes_mut()[flat] = acc * multiplicity;
    }
    out
}

/// Kronecker product written out index by index.
pub fn kron_naive(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = ComplexMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Principal minor on the 0-based index subset, via the signed permutation
/// sum.
pub fn principal_minor_naive(c: &ComplexMatrix, subset: &[usize]) -> C64 {
    let sub = ComplexMatrix::from_fn(subset.len(), subset.len(), |i, j| c[(subset[i], subset[j])]);
    determinant_naive(&sub)
}
