//! Many-particle amplitudes: permanents for bosons, determinants for
//! fermions, and the state-level operations built on them.
//!
//! A particle entering input mode `j` leaves in output mode `k` with
//! amplitude `W[j, k]`. The amplitude for a set of input particles to end
//! up in a set of output modes is the permanent (bosons) or determinant
//! (fermions) of the sub-matrix with one row per input particle and one
//! column per output particle.

mod permanent;

use std::collections::BTreeMap;

use rayon::prelude::*;

pub use crate::fock::{FockSuperposition, FockTerm};
pub use permanent::{determinant, glynn_permanent, permanent, MAX_PERMANENT_SIZE};
pub(crate) use permanent::{det_flat_in_place, ryser_flat};

use crate::fock::{factorial, is_post_selected, occupation_to_assignment, omega, omega_inverse, ModeOccupation};
use crate::{ComplexMatrix, CoefficientTensor, Error, Result, Species, C64};

/// Particle-number limit for full output enumeration.
pub const MAX_EVOLVE_PARTICLES: usize = 8;
/// Output-mode limit for full output enumeration.
pub const MAX_EVOLVE_MODES: usize = 16;

/// Permanent or determinant of a row-major `n × n` buffer. The buffer is
/// clobbered.
pub(crate) fn kernel_in_place(species: Species, buf: &mut [C64], n: usize) -> C64 {
    match species {
        Species::Boson => ryser_flat(buf, n),
        Species::Fermion => det_flat_in_place(buf, n),
    }
}

/// Default source rows `(1, d+1, …, (N-1)d+1)`: every particle enters in
/// internal state 1 of its own spatial mode.
pub fn default_source_rows(d: usize, particles: usize) -> Vec<usize> {
    (0..particles).map(|k| d * k + 1).collect()
}

/// Unnormalized post-selected tensor `g̃` for particles entering at the
/// 1-based rows `source_rows` of `w`.
///
/// Entry `(j_1, …, j_N)` is the permanent (bosons) or determinant (fermions)
/// of `A[m][k] = W[source_rows[m], d(k-1)+j_k]`. Fermions with a repeated
/// source row give the zero tensor.
pub fn coefficient_tensor(
    w: &ComplexMatrix,
    species: Species,
    d: usize,
    particles: usize,
    source_rows: Option<&[usize]>,
) -> Result<CoefficientTensor> {
    let defaults;
    let rows = match source_rows {
        Some(r) => r,
        None => {
            defaults = default_source_rows(d, particles);
            &defaults
        }
    };
    if rows.len() != particles {
        return Err(Error::dim(format!("{} source rows given for {particles} particles", rows.len())));
    }
    if w.ncols() < d * particles {
        return Err(Error::dim(format!(
            "scattering matrix has {} columns, need at least {}",
            w.ncols(),
            d * particles
        )));
    }
    if let Some(&bad) = rows.iter().find(|&&r| r == 0 || r > w.nrows()) {
        return Err(Error::dim(format!("source row {bad} outside 1..={}", w.nrows())));
    }
    if particles > MAX_PERMANENT_SIZE {
        return Err(Error::SizeLimit(format!("{particles} particles")));
    }
    let mut out = CoefficientTensor::zeros(d, particles);
    if species == Species::Fermion && has_repeats(rows) {
        return Ok(out);
    }
    let n = particles;
    let amps: Vec<C64> = (0..out.len())
        .into_par_iter()
        .map_init(
            || vec![C64::new(0.0, 0.0); n * n],
            |buf, flat| {
                let j = out.multi_index(flat);
                for (m, &src) in rows.iter().enumerate() {
                    for k in 0..n {
                        buf[m * n + k] = w[(src - 1, d * k + j[k] - 1)];
                    }
                }
                kernel_in_place(species, buf, n)
            },
        )
        .collect();
    out.amplitudes_mut().copy_from_slice(&amps);
    Ok(out)
}

/// `g̃` for a block `W′` whose `N` rows are the source rows themselves.
pub fn block_coefficient_tensor(w_prime: &ComplexMatrix, species: Species, d: usize) -> Result<CoefficientTensor> {
    let n = w_prime.nrows();
    if w_prime.ncols() != d * n {
        return Err(Error::dim(format!("W′ must be {n}×{}, got {:?}", d * n, w_prime.shape())));
    }
    let rows: Vec<usize> = (1..=n).collect();
    coefficient_tensor(w_prime, species, d, n, Some(&rows))
}

fn has_repeats(rows: &[usize]) -> bool {
    let mut sorted = rows.to_vec();
    sorted.sort_unstable();
    sorted.windows(2).any(|w| w[0] == w[1])
}

/// All occupations of `modes` modes by `particles` particles, in ascending
/// lexicographic order of the occupation vector.
pub fn enumerate_occupations(modes: usize, particles: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, modes: usize, left: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() + 1 == modes {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for c in 0..=left {
            prefix.push(c);
            rec(prefix, modes, left - c, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if modes == 0 {
        if particles == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(&mut Vec::with_capacity(modes), modes, particles, &mut out);
    out
}

struct PreparedInput {
    rows: Vec<usize>,
    weight: C64,
}

fn prepare_input(input: &FockSuperposition, w: &ComplexMatrix) -> Result<Vec<PreparedInput>> {
    if input.modes() != w.nrows() {
        return Err(Error::dim(format!(
            "input state has {} modes but the scattering matrix has {} rows",
            input.modes(),
            w.nrows()
        )));
    }
    Ok(input
        .terms()
        .iter()
        .filter(|t| t.amplitude != C64::new(0.0, 0.0))
        .map(|t| PreparedInput {
            rows: occupation_to_assignment(&t.occupation).modes().iter().map(|m| m - 1).collect(),
            weight: t.amplitude / t.occupation.factorial_product().sqrt(),
        })
        .collect())
}

/// Amplitude of the output arrangement `cols` (0-based output modes with
/// multiplicity), before the output normalization `1/√∏ r̄_j!`.
fn output_amplitude(
    inputs: &[PreparedInput],
    w: &ComplexMatrix,
    species: Species,
    cols: &[usize],
    buf: &mut [C64],
) -> C64 {
    let n = cols.len();
    let mut acc = C64::new(0.0, 0.0);
    for term in inputs {
        for (m, &row) in term.rows.iter().enumerate() {
            for (k, &col) in cols.iter().enumerate() {
                buf[m * n + k] = w[(row, col)];
            }
        }
        acc += term.weight * kernel_in_place(species, buf, n);
    }
    acc
}

/// Full output state of `input` scattered by `w`: every output occupation,
/// in ascending lexicographic order, with amplitude
/// `Σ_terms c · perm/det(A) / √(∏ r̄_j! ∏ s_j!)`.
pub fn evolve_fock(input: &FockSuperposition, w: &ComplexMatrix, species: Species) -> Result<FockSuperposition> {
    let particles = input.particles();
    if particles > MAX_EVOLVE_PARTICLES || w.ncols() > MAX_EVOLVE_MODES {
        return Err(Error::SizeLimit(format!(
            "full evolution of {particles} particles over {} output modes (limits {MAX_EVOLVE_PARTICLES}, {MAX_EVOLVE_MODES})",
            w.ncols()
        )));
    }
    let inputs = prepare_input(input, w)?;
    let outputs = enumerate_occupations(w.ncols(), particles);
    let amps: Vec<C64> = outputs
        .par_iter()
        .map_init(
            || vec![C64::new(0.0, 0.0); particles * particles],
            |buf, occ| {
                let occ = ModeOccupation::new(occ.clone());
                let cols: Vec<usize> = occupation_to_assignment(&occ).modes().iter().map(|m| m - 1).collect();
                output_amplitude(&inputs, w, species, &cols, buf) / occ.factorial_product().sqrt()
            },
        )
        .collect();
    FockSuperposition::from_terms(w.ncols(), particles, outputs.into_iter().zip(amps))
}

/// Keeps the post-selected part of `state` and maps it to an N-qudit tensor.
/// Returns the unnormalized tensor and its squared norm, the success
/// probability.
pub fn post_select(state: &FockSuperposition, d: usize, particles: usize) -> Result<(CoefficientTensor, f64)> {
    if state.modes() != d * particles {
        return Err(Error::dim(format!(
            "state over {} modes cannot be post-selected for d={d}, N={particles}",
            state.modes()
        )));
    }
    let mut kept = FockSuperposition::empty(state.modes(), particles);
    for t in state.terms() {
        if is_post_selected(&t.occupation, d)? {
            kept.add(t.occupation.clone(), t.amplitude)?;
        }
    }
    let tensor = omega_inverse(&kept, d, particles)?;
    let success = tensor.norm_sqr();
    if success > 1.0 + 1e-9 {
        log::warn!("success probability {success} exceeds 1; is the scattering matrix sub-unitary?");
    }
    Ok((tensor, success))
}

/// Post-selected tensor of `input` scattered by `w`, evaluating only the
/// `d^N` post-selected outputs. Requires `w` to have exactly `d·N` columns.
pub fn post_selected_state(
    input: &FockSuperposition,
    w: &ComplexMatrix,
    species: Species,
    d: usize,
) -> Result<CoefficientTensor> {
    let particles = input.particles();
    if w.ncols() != d * particles {
        return Err(Error::dim(format!(
            "scattering matrix has {} columns, post-selection needs {}",
            w.ncols(),
            d * particles
        )));
    }
    if particles > MAX_PERMANENT_SIZE {
        return Err(Error::SizeLimit(format!("{particles} particles")));
    }
    let inputs = prepare_input(input, w)?;
    let mut out = CoefficientTensor::zeros(d, particles);
    let amps: Vec<C64> = (0..out.len())
        .into_par_iter()
        .map_init(
            || vec![C64::new(0.0, 0.0); particles * particles],
            |buf, flat| {
                let cols: Vec<usize> = out.multi_index(flat).iter().enumerate().map(|(k, j)| d * k + j - 1).collect();
                output_amplitude(&inputs, w, species, &cols, buf)
            },
        )
        .collect();
    out.amplitudes_mut().copy_from_slice(&amps);
    Ok(out)
}

/// Post-selected state created from the N-qudit input `c` by `w`.
pub fn create(c: &CoefficientTensor, w: &ComplexMatrix, species: Species) -> Result<CoefficientTensor> {
    post_selected_state(&omega(c), w, species, c.d())
}

/// `⟨Ψ(signal)| M(W†) |Ψ(target)⟩`: the amplitude for `target`, sent
/// backwards through the setup described by `w`, to be detected as
/// `signal`.
pub fn detection_overlap(
    signal: &CoefficientTensor,
    w: &ComplexMatrix,
    target: &CoefficientTensor,
    species: Species,
) -> Result<C64> {
    if signal.d() != target.d() || signal.parties() != target.parties() {
        return Err(Error::dim("signal and target shapes differ"));
    }
    let n = target.d() * target.parties();
    if w.shape() != (n, n) {
        return Err(Error::dim(format!("expected a {n}×{n} scattering matrix, got {:?}", w.shape())));
    }
    let reversed = crate::scatter::reverse(w);
    let detected = create(target, &reversed, species)?;
    signal.inner(&detected)
}

/// Slices `g` at fixed `(party → outcome)` pairs (both 1-based) and
/// renormalizes. Returns the state of the remaining parties, in their
/// original order, and the conditional probability of the outcome.
pub fn conditional_state(g: &CoefficientTensor, fixed: &BTreeMap<usize, usize>) -> Result<(CoefficientTensor, f64)> {
    let parties = g.parties();
    for (&p, &o) in fixed {
        if p == 0 || p > parties {
            return Err(Error::InvalidArgument(format!("party {p} outside 1..={parties}")));
        }
        if o == 0 || o > g.d() {
            return Err(Error::InvalidArgument(format!("outcome {o} outside 1..={}", g.d())));
        }
    }
    let rest: Vec<usize> = (1..=parties).filter(|p| !fixed.contains_key(p)).collect();
    let mut out = CoefficientTensor::zeros(g.d(), rest.len());
    for flat in 0..out.len() {
        let idx = out.multi_index(flat);
        let mut full = vec![0; parties];
        for (&p, &o) in fixed {
            full[p - 1] = o;
        }
        for (k, &p) in rest.iter().enumerate() {
            full[p - 1] = idx[k];
        }
        out.amplitudes_mut()[flat] = g.get(&full)?;
    }
    let slice_norm = out.norm_sqr();
    let total = g.norm_sqr();
    if slice_norm <= 0.0 || total <= 0.0 {
        return Err(Error::ImpossibleCondition);
    }
    Ok((out.normalized(), slice_norm / total))
}

/// `1 / √(∏ r_j!)` for a normalized Fock state.
pub fn fock_normalization(occupation: &[usize]) -> f64 {
    1.0 / occupation.iter().map(|&r| factorial(r)).product::<f64>().sqrt()
}

#[cfg(test)]
mod tests;
