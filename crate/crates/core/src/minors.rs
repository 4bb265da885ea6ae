//! Fermionic coefficients as a prefactor times principal minors.
//!
//! Every column of `W′` is expanded in a basis of `N` pivot columns,
//! `W′ = P X`. The selected sub-matrix for an index `(j_1, …, j_N)` is then
//! `P X_j`, so `g̃_j = det(P) · det(X_j)`. With the default pivots
//! `1, d+1, …` and `d = 2`, `X_j` has unit columns wherever `j_k = 1` and
//! `det(X_j)` collapses to the principal minor of `C` on `{k : j_k = 2}`.

use rayon::prelude::*;
use serde::Serialize;

use crate::amplitude::det_flat_in_place;
use crate::linalg::{derive_seed, ginibre, numerical_rank, seeded_rng, singular_values, RANK_TOLERANCE};
use crate::{ComplexMatrix, CoefficientTensor, Error, Result, C64};

/// Pivot matrices with a larger condition number are not trusted.
pub const MAX_PIVOT_CONDITION: f64 = 1e12;
/// Relative singular-value threshold for declaring `W′` rank deficient.
const DEFICIENCY_TOLERANCE: f64 = 1e-12;
pub const MAX_MINOR_ORDER: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinorDecomposition {
    pub d: usize,
    #[serde(rename = "N")]
    pub particles: usize,
    /// `det` of the pivot columns; zero when `W′` is rank deficient.
    #[serde(with = "crate::json::complex")]
    pub prefactor: C64,
    /// Coordinates of the non-pivot columns in the pivot basis, one row per
    /// column: shape `(d-1)N × N`. `None` when rank deficient.
    #[serde(skip)]
    pub c: Option<ComplexMatrix>,
    /// Coordinates of every column of `W′`, shape `N × dN`.
    #[serde(skip)]
    pub coordinates: Option<ComplexMatrix>,
    /// 1-based pivot columns of `W′`, ascending.
    pub pivot_columns: Vec<usize>,
    pub default_pivots: bool,
    pub rank_deficient: bool,
    pub pivot_condition: f64,
}

impl MinorDecomposition {
    /// `D · det(X_j)` for a 1-based index.
    pub fn reconstruct(&self, indices: &[usize]) -> Result<C64> {
        if indices.len() != self.particles || indices.iter().any(|&j| j == 0 || j > self.d) {
            return Err(Error::InvalidArgument(format!("index {indices:?} outside d={} N={}", self.d, self.particles)));
        }
        let Some(x) = &self.coordinates else { return Ok(C64::new(0.0, 0.0)) };
        let n = self.particles;
        let mut buf = vec![C64::new(0.0, 0.0); n * n];
        for (k, &j) in indices.iter().enumerate() {
            let col = self.d * k + j - 1;
            for r in 0..n {
                buf[r * n + k] = x[(r, col)];
            }
        }
        Ok(self.prefactor * det_flat_in_place(&mut buf, n))
    }

    /// Every coefficient, as a tensor.
    pub fn reconstruct_tensor(&self) -> Result<CoefficientTensor> {
        let mut out = CoefficientTensor::zeros(self.d, self.particles);
        for flat in 0..out.len() {
            let idx = out.multi_index(flat);
            out.amplitudes_mut()[flat] = self.reconstruct(&idx)?;
        }
        Ok(out)
    }

    /// Qubit form `D · minor_S(C)` with `S = {k : j_k = 2}`; available only
    /// with default pivots and `d = 2`.
    pub fn reconstruct_by_minor(&self, indices: &[usize]) -> Result<C64> {
        if self.d != 2 || !self.default_pivots {
            return Err(Error::InvalidArgument("principal-minor form needs d = 2 and default pivots".into()));
        }
        let Some(c) = &self.c else { return Ok(C64::new(0.0, 0.0)) };
        if indices.len() != self.particles || indices.iter().any(|&j| j != 1 && j != 2) {
            return Err(Error::InvalidArgument(format!("index {indices:?} is not a qubit index")));
        }
        let subset: Vec<usize> = (0..self.particles).filter(|&k| indices[k] == 2).collect();
        Ok(self.prefactor * principal_minor(c, &subset))
    }
}

/// Splits `W′` (`N × dN`) into a pivot determinant and coordinates.
pub fn decompose(w: &ComplexMatrix, d: usize) -> Result<MinorDecomposition> {
    let n = w.nrows();
    if d == 0 || n == 0 || w.ncols() != d * n {
        return Err(Error::dim(format!("W′ must be N×dN with d={d}, got {:?}", w.shape())));
    }
    let deficient = |pivots: Vec<usize>, default_pivots: bool| MinorDecomposition {
        d,
        particles: n,
        prefactor: C64::new(0.0, 0.0),
        c: None,
        coordinates: None,
        pivot_columns: pivots.iter().map(|p| p + 1).collect(),
        default_pivots,
        rank_deficient: true,
        pivot_condition: f64::INFINITY,
    };
    if numerical_rank(&singular_values(w), DEFICIENCY_TOLERANCE) < n {
        return Ok(deficient(default_pivots(d, n), true));
    }
    let mut pivots = default_pivots(d, n);
    let mut condition = condition_number(&select_columns(w, &pivots));
    let mut is_default = true;
    if condition > MAX_PIVOT_CONDITION {
        pivots = greedy_pivots(w, n);
        condition = condition_number(&select_columns(w, &pivots));
        is_default = pivots == default_pivots(d, n);
        log::debug!("default pivots ill-conditioned; using columns {pivots:?}");
        if condition > MAX_PIVOT_CONDITION {
            return Ok(deficient(pivots, is_default));
        }
    }
    let p = select_columns(w, &pivots);
    let lu = p.clone().lu();
    let prefactor = lu.determinant();
    let coordinates = lu.solve(w).ok_or_else(|| Error::dim("pivot matrix is singular"))?;
    let non_pivot: Vec<usize> = (0..d * n).filter(|c| !pivots.contains(c)).collect();
    let c = ComplexMatrix::from_fn(non_pivot.len(), n, |r, k| coordinates[(k, non_pivot[r])]);
    Ok(MinorDecomposition {
        d,
        particles: n,
        prefactor,
        c: Some(c),
        coordinates: Some(coordinates),
        pivot_columns: pivots.iter().map(|p| p + 1).collect(),
        default_pivots: is_default,
        rank_deficient: false,
        pivot_condition: condition,
    })
}

fn default_pivots(d: usize, n: usize) -> Vec<usize> {
    (0..n).map(|k| d * k).collect()
}

fn select_columns(w: &ComplexMatrix, cols: &[usize]) -> ComplexMatrix {
    ComplexMatrix::from_fn(w.nrows(), cols.len(), |r, k| w[(r, cols[k])])
}

fn condition_number(m: &ComplexMatrix) -> f64 {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&max), Some(&min)) if min > 0.0 => max / min,
        _ => f64::INFINITY,
    }
}

/// Column-pivoted Gram–Schmidt: repeatedly takes the column with the largest
/// residual norm. Returned ascending, 0-based.
fn greedy_pivots(w: &ComplexMatrix, count: usize) -> Vec<usize> {
    let mut residual = w.clone();
    let mut chosen = Vec::with_capacity(count);
    for _ in 0..count {
        let best = (0..residual.ncols())
            .filter(|c| !chosen.contains(c))
            .max_by(|&a, &b| residual.column(a).norm().total_cmp(&residual.column(b).norm()))
            .expect("enough columns");
        let q = residual.column(best).normalize();
        for c in 0..residual.ncols() {
            let proj = q.dotc(&residual.column(c));
            let update = &q * proj;
            let mut col = residual.column_mut(c);
            col -= update;
        }
        chosen.push(best);
    }
    chosen.sort_unstable();
    chosen
}

/// Determinant of the principal sub-matrix on a 0-based subset; the empty
/// subset gives 1.
pub fn principal_minor(c: &ComplexMatrix, subset: &[usize]) -> C64 {
    let k = subset.len();
    let mut buf: Vec<C64> = subset.iter().flat_map(|&i| subset.iter().map(move |&j| c[(i, j)])).collect();
    det_flat_in_place(&mut buf, k)
}

/// All `2^N` principal minors. Entry `mask` holds the minor on
/// `{k : bit k-1 of mask set}`, so entry 0 is the empty minor.
pub fn principal_minors(c: &ComplexMatrix) -> Result<Vec<C64>> {
    let n = c.nrows();
    if c.ncols() != n {
        return Err(Error::dim(format!("principal minors need a square matrix, got {:?}", c.shape())));
    }
    if n > MAX_MINOR_ORDER {
        return Err(Error::SizeLimit(format!("{n}×{n} has too many principal minors")));
    }
    Ok((0u32..1 << n).into_par_iter().map(|mask| principal_minor(c, &mask_to_subset(mask, n))).collect())
}

fn mask_to_subset(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|k| mask >> k & 1 == 1).collect()
}

/// The subsets (0-based) of the spanning family: every singleton, every
/// pair, and every triple containing the first index.
pub fn spanning_subsets(n: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0..n).map(|k| vec![k]).collect();
    for i in 0..n {
        for j in i + 1..n {
            out.push(vec![i, j]);
        }
    }
    for i in 1..n {
        for j in i + 1..n {
            out.push(vec![0, i, j]);
        }
    }
    out
}

/// Minors of the spanning family, paired with their 1-based subsets.
pub fn spanning_minors(c: &ComplexMatrix) -> Result<Vec<(Vec<usize>, C64)>> {
    let n = c.nrows();
    if c.ncols() != n {
        return Err(Error::dim(format!("principal minors need a square matrix, got {:?}", c.shape())));
    }
    if n > MAX_MINOR_ORDER {
        return Err(Error::SizeLimit(format!("{n}×{n}")));
    }
    Ok(spanning_subsets(n)
        .into_iter()
        .map(|s| {
            let m = principal_minor(c, &s);
            (s.into_iter().map(|k| k + 1).collect(), m)
        })
        .collect())
}

/// Jacobian of `C ↦ (minor_S(C))_S` with respect to the entries of `C`
/// (column `a·N + b` for `C[a, b]`).
pub fn minor_jacobian(c: &ComplexMatrix, subsets: &[Vec<usize>]) -> ComplexMatrix {
    let n = c.nrows();
    let mut j = ComplexMatrix::zeros(subsets.len(), n * n);
    for (row, s) in subsets.iter().enumerate() {
        for (pa, &a) in s.iter().enumerate() {
            for (pb, &b) in s.iter().enumerate() {
                let rows: Vec<usize> = s.iter().copied().filter(|&x| x != a).collect();
                let cols: Vec<usize> = s.iter().copied().filter(|&x| x != b).collect();
                let mut buf: Vec<C64> = rows.iter().flat_map(|&r| cols.iter().map(move |&q| c[(r, q)])).collect();
                let sign = if (pa + pb) % 2 == 0 { 1.0 } else { -1.0 };
                j[(row, a * n + b)] = det_flat_in_place(&mut buf, rows.len()) * sign;
            }
        }
    }
    j
}

fn max_rank_over_trials(n: usize, trials: usize, seed: u64, tag: u64, subsets: &[Vec<usize>]) -> Result<usize> {
    if n == 0 || n > 6 {
        return Err(Error::SizeLimit(format!("minor-map rank for N={n} (1..=6)")));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    let ranks: Vec<usize> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = seeded_rng(derive_seed(seed, &[tag, n as u64, t as u64]));
            let c = ginibre(n, n, &mut rng);
            numerical_rank(&singular_values(&minor_jacobian(&c, subsets)), RANK_TOLERANCE)
        })
        .collect();
    Ok(ranks.into_iter().max().unwrap_or(0))
}

/// Jacobian rank of the map to all non-empty principal minors at random
/// Ginibre `C`; the maximum over trials.
pub fn minor_map_rank(n: usize, trials: usize, seed: u64) -> Result<usize> {
    let subsets: Vec<Vec<usize>> = (1u32..1 << n).map(|m| mask_to_subset(m, n)).collect();
    max_rank_over_trials(n, trials, seed, 0, &subsets)
}

/// Same rank restricted to the spanning family.
pub fn spanning_minor_rank(n: usize, trials: usize, seed: u64) -> Result<usize> {
    max_rank_over_trials(n, trials, seed, 0, &spanning_subsets(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitude::block_coefficient_tensor;
    use crate::oracle::principal_minor_naive;
    use crate::Species;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn identity_minors() {
        let m = principal_minors(&ComplexMatrix::identity(4, 4)).unwrap();
        assert_eq!(m.len(), 16);
        assert!(m.iter().all(|&x| (x - c(1.0)).norm() < 1e-15));
    }

    #[test]
    fn two_by_two_minors() {
        let m = ComplexMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(3.0), c(4.0)]);
        let minors = principal_minors(&m).unwrap();
        let expected = [c(1.0), c(1.0), c(4.0), c(-2.0)];
        for (a, b) in minors.iter().zip(expected) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn minors_match_brute_force() {
        let mut rng = seeded_rng(5);
        let m = ginibre(4, 4, &mut rng);
        for (mask, v) in principal_minors(&m).unwrap().into_iter().enumerate() {
            let s = mask_to_subset(mask as u32, 4);
            assert!((v - principal_minor_naive(&m, &s)).norm() < 1e-12);
        }
    }

    #[test]
    fn interleaved_identity() {
        let w = ComplexMatrix::from_fn(3, 6, |r, k| if k / 2 == r { c(1.0) } else { c(0.0) });
        let dec = decompose(&w, 2).unwrap();
        assert_eq!(dec.prefactor, c(1.0));
        assert_eq!(dec.c.unwrap(), ComplexMatrix::identity(3, 3));
        assert_eq!(dec.pivot_columns, vec![1, 3, 5]);
    }

    #[test]
    fn reconstruction_matches_determinants() {
        let mut rng = seeded_rng(6);
        for (d, n) in [(2, 4), (2, 5), (3, 3), (4, 2)] {
            let w = ginibre(n, d * n, &mut rng);
            let dec = decompose(&w, d).unwrap();
            let direct = block_coefficient_tensor(&w, Species::Fermion, d).unwrap();
            let rebuilt = dec.reconstruct_tensor().unwrap();
            let scale = direct.amplitudes().iter().map(|a| a.norm()).fold(0.0, f64::max);
            assert!(rebuilt.max_abs_diff(&direct).unwrap() < 1e-10 * scale);
            if d == 2 {
                for flat in 0..direct.len() {
                    let idx = direct.multi_index(flat);
                    let v = dec.reconstruct_by_minor(&idx).unwrap();
                    assert!((v - direct.amplitudes()[flat]).norm() < 1e-10 * scale);
                }
            }
        }
    }

    #[test]
    fn rank_deficient_input() {
        let mut rng = seeded_rng(7);
        let a = ginibre(4, 3, &mut rng);
        let b = ginibre(3, 8, &mut rng);
        let w = a * b;
        let dec = decompose(&w, 2).unwrap();
        assert!(dec.rank_deficient);
        assert_eq!(dec.prefactor, c(0.0));
        assert!(dec.c.is_none());
        let g = block_coefficient_tensor(&w, Species::Fermion, 2).unwrap();
        let scale = w.iter().map(|z| z.norm()).fold(0.0, f64::max).powi(4);
        assert!(g.amplitudes().iter().all(|z| z.norm() < 1e-12 * scale));
    }

    #[test]
    fn singular_default_pivots_fall_back() {
        let mut rng = seeded_rng(8);
        let mut w = ginibre(3, 6, &mut rng);
        // Column 3 (0-based 2) copies column 1 so the default pivots are singular.
        let col = w.column(0).clone_owned();
        w.set_column(2, &col);
        let dec = decompose(&w, 2).unwrap();
        assert!(!dec.rank_deficient);
        assert!(!dec.default_pivots);
        let direct = block_coefficient_tensor(&w, Species::Fermion, 2).unwrap();
        assert!(dec.reconstruct_tensor().unwrap().max_abs_diff(&direct).unwrap() < 1e-10);
        assert!(dec.reconstruct_by_minor(&[1, 1, 1]).is_err());
    }

    #[test]
    fn spanning_counts() {
        assert_eq!(spanning_subsets(2).len(), 3);
        assert_eq!(spanning_subsets(3).len(), 7);
        assert_eq!(spanning_subsets(4).len(), 13);
        let mut rng = seeded_rng(9);
        let m = ginibre(3, 3, &mut rng);
        let s = spanning_minors(&m).unwrap();
        assert_eq!(s.last().unwrap().0, vec![1, 2, 3]);
    }

    #[test]
    fn minor_map_ranks() {
        for n in 2..=4 {
            let expected = n * n - n + 1;
            assert_eq!(minor_map_rank(n, 2, 1).unwrap(), expected);
            assert_eq!(spanning_minor_rank(n, 2, 1).unwrap(), expected);
        }
    }
}
