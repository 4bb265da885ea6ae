//! Schmidt-rank diagnostics for generated states.
//!
//! The generalized Schmidt rank is bracketed rather than computed: the
//! combinatorial count of many-particle paths bounds it from above, and the
//! largest matrix rank over all bipartitions bounds it from below.

use serde::{Deserialize, Serialize};

use crate::fock::ModeOccupation;
use crate::linalg::{numerical_rank, singular_values, RANK_TOLERANCE};
use crate::oracle::permutations;
use crate::{ComplexMatrix, CoefficientTensor, Error, Result, Species, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    /// `R_in · N! / ∏ r_j!`.
    pub combinatorial_upper: u128,
    /// Largest bipartite matrix rank.
    pub bipartite_lower: usize,
    /// 1-based parties on one side of the achieving cut.
    pub bipartition_achieving_lower: Vec<usize>,
    pub input_rank_factor: u128,
    /// Singular values across the achieving cut, descending.
    pub spectrum: Vec<f64>,
    /// Ratio of the smallest retained to the largest discarded singular
    /// value, when anything was discarded.
    pub gap: Option<f64>,
    pub tolerance: f64,
}

/// `R_in · N! / ∏_j r_j!`.
pub fn combinatorial_bound(particles: usize, input_occupation: &ModeOccupation, input_rank: u128) -> Result<u128> {
    if input_occupation.particles() != particles {
        return Err(Error::InvalidArgument(format!(
            "occupation holds {} particles, expected {particles}",
            input_occupation.particles()
        )));
    }
    if input_rank == 0 {
        return Err(Error::InvalidArgument("input rank must be at least 1".into()));
    }
    let fact = |k: usize| (1..=k as u128).product::<u128>();
    let paths = fact(particles) / input_occupation.counts().iter().map(|&r| fact(r)).product::<u128>();
    input_rank
        .checked_mul(paths)
        .ok_or_else(|| Error::SizeLimit("combinatorial bound overflows u128".into()))
}

/// Matricization of `g` with the parties in `partition` (1-based) as rows.
pub fn matricize(g: &CoefficientTensor, partition: &[usize]) -> Result<ComplexMatrix> {
    let parties = g.parties();
    let mut in_part = vec![false; parties];
    for &p in partition {
        if p == 0 || p > parties || in_part[p - 1] {
            return Err(Error::InvalidArgument(format!("bad partition {partition:?} for {parties} parties")));
        }
        in_part[p - 1] = true;
    }
    if partition.is_empty() || partition.len() == parties {
        return Err(Error::InvalidArgument("partition must be a nonempty proper subset".into()));
    }
    let d = g.d();
    let rows = d.pow(partition.len() as u32);
    let cols = d.pow((parties - partition.len()) as u32);
    let mut m = ComplexMatrix::zeros(rows, cols);
    for (flat, &amp) in g.amplitudes().iter().enumerate() {
        let idx = g.multi_index(flat);
        let (mut r, mut c) = (0, 0);
        for (k, &j) in idx.iter().enumerate() {
            if in_part[k] {
                r = r * d + (j - 1);
            } else {
                c = c * d + (j - 1);
            }
        }
        m[(r, c)] = amp;
    }
    Ok(m)
}

pub fn bipartite_spectrum(g: &CoefficientTensor, partition: &[usize]) -> Result<Vec<f64>> {
    if g.norm_sqr() == 0.0 {
        return Err(Error::UndefinedRank);
    }
    Ok(singular_values(&matricize(g, partition)?))
}

/// Rank of the matricization, counting singular values above
/// `tolerance · σ_max`.
pub fn bipartite_rank(g: &CoefficientTensor, partition: &[usize], tolerance: f64) -> Result<usize> {
    Ok(numerical_rank(&bipartite_spectrum(g, partition)?, tolerance))
}

/// All cuts as the side containing party 1, in lexicographic order.
pub fn bipartitions(parties: usize) -> Vec<Vec<usize>> {
    if parties < 2 {
        return Vec::new();
    }
    let mut out: Vec<Vec<usize>> = (0u64..(1u64 << (parties - 1)) - 1)
        .map(|mask| {
            let mut s = vec![1];
            s.extend((0..parties - 1).filter(|b| mask >> b & 1 == 1).map(|b| b + 2));
            s
        })
        .collect();
    out.sort();
    out
}

/// Largest bipartite rank and the first cut (lexicographically) attaining it.
pub fn max_bipartite_rank(g: &CoefficientTensor, tolerance: f64) -> Result<(usize, Vec<usize>)> {
    let (rank, cut, _) = scan_bipartitions(g, tolerance)?;
    Ok((rank, cut))
}

fn scan_bipartitions(g: &CoefficientTensor, tolerance: f64) -> Result<(usize, Vec<usize>, Vec<f64>)> {
    if g.norm_sqr() == 0.0 {
        return Err(Error::UndefinedRank);
    }
    if g.parties() > 12 {
        return Err(Error::SizeLimit(format!("{} parties", g.parties())));
    }
    let mut best: Option<(usize, Vec<usize>, Vec<f64>)> = None;
    for cut in bipartitions(g.parties()) {
        let spectrum = bipartite_spectrum(g, &cut)?;
        let rank = numerical_rank(&spectrum, tolerance);
        if best.as_ref().is_none_or(|(r, _, _)| rank > *r) {
            best = Some((rank, cut, spectrum));
        }
    }
    best.ok_or_else(|| Error::InvalidArgument("a single party has no bipartitions".into()))
}

/// Brackets the Schmidt rank of a state produced from an input with the
/// given occupation and Schmidt rank.
pub fn rank_report(
    g: &CoefficientTensor,
    input_occupation: &ModeOccupation,
    input_rank: u128,
    tolerance: f64,
) -> Result<RankReport> {
    let combinatorial_upper = combinatorial_bound(g.parties(), input_occupation, input_rank)?;
    let (bipartite_lower, cut, spectrum) = if g.parties() < 2 {
        if g.norm_sqr() == 0.0 {
            return Err(Error::UndefinedRank);
        }
        (1, vec![1], vec![g.norm_sqr().sqrt()])
    } else {
        scan_bipartitions(g, tolerance)?
    };
    let gap = (bipartite_lower < spectrum.len() && spectrum[bipartite_lower] > 0.0)
        .then(|| spectrum[bipartite_lower - 1] / spectrum[bipartite_lower]);
    Ok(RankReport {
        combinatorial_upper,
        bipartite_lower,
        bipartition_achieving_lower: cut,
        input_rank_factor: input_rank,
        spectrum,
        gap,
        tolerance,
    })
}

pub fn default_tolerance() -> f64 {
    RANK_TOLERANCE
}

/// Coefficients `ḡ_σ` of a non-polarizing setup and the state they build.
#[derive(Clone, Debug)]
pub struct PermutationRepresentation {
    /// `(σ, ḡ_σ)` with `σ` 0-based: the particle from input `σ(j)` lands
    /// in output `j`.
    pub coefficients: Vec<(Vec<usize>, C64)>,
    /// `Σ_σ ḡ_σ ⊗_k |ε_{σ(k)}⟩`.
    pub tensor: CoefficientTensor,
}

/// `ḡ_σ = sgn(σ) ∏_j V_{σ(j), j}` for particles prepared in the internal
/// states `internal_states[k]`.
pub fn permutation_representation(
    v: &ComplexMatrix,
    internal_states: &[Vec<C64>],
    species: Species,
) -> Result<PermutationRepresentation> {
    let n = v.nrows();
    if v.ncols() != n || internal_states.len() != n {
        return Err(Error::dim(format!(
            "need a square V and one internal state per particle, got {:?} and {}",
            v.shape(),
            internal_states.len()
        )));
    }
    if n > 8 {
        return Err(Error::SizeLimit(format!("{n}! permutations")));
    }
    let d = internal_states.first().map_or(1, Vec::len);
    let mut tensor = CoefficientTensor::zeros(d, n);
    let mut coefficients = Vec::new();
    for (sigma, odd) in permutations(n) {
        let coeff = (0..n).map(|j| v[(sigma[j], j)]).product::<C64>() * species.sign(odd);
        let locals: Vec<Vec<C64>> = (0..n).map(|k| internal_states[sigma[k]].clone()).collect();
        let term = CoefficientTensor::product(&locals)?;
        for (t, a) in tensor.amplitudes_mut().iter_mut().zip(term.amplitudes()) {
            *t += coeff * a;
        }
        coefficients.push((sigma, coeff));
    }
    Ok(PermutationRepresentation { coefficients, tensor })
}
