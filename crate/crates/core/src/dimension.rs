//! Dimensionality of the manifolds of reachable post-selected states,
//! estimated as the complex rank of the Jacobian of `W′ ↦ g̃` at random
//! scattering matrices.
//!
//! `W′` is the `N × dN` block of source rows. Column `l·dN + k` of the
//! Jacobian is the derivative with respect to `W′[l, k]` (both 0-based).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amplitude::kernel_in_place;
use crate::linalg::{derive_seed, ginibre, numerical_rank, seeded_rng, RANK_TOLERANCE};
use crate::oracle::permutations;
use crate::{ComplexMatrix, Error, Result, Species, C64};

pub const MAX_JACOBIAN_PARTICLES: usize = 8;
pub const MAX_JACOBIAN_D: usize = 5;

/// Spectra with a singular value inside `[σ_max·tol/WINDOW, σ_max·tol·WINDOW]`
/// are treated as borderline and reassembled with compensated sums.
const BORDERLINE_WINDOW: f64 = 100.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobianReport {
    pub d: usize,
    #[serde(rename = "N")]
    pub particles: usize,
    pub species: Species,
    /// Maximum rank over all trials.
    pub rank: usize,
    /// Rank of each trial, in trial order.
    pub trial_ranks: Vec<usize>,
    /// Spectrum of the first trial attaining the maximum.
    pub singular_values: Vec<f64>,
    pub bound: usize,
    pub trials: usize,
    pub tolerance: f64,
    /// Whether any trial needed the compensated reassembly.
    pub borderline: bool,
}

impl JacobianReport {
    /// `min(bound, d^N)`.
    pub fn ceiling(&self) -> usize {
        self.bound.min(self.d.pow(self.particles as u32))
    }

    pub fn is_tight(&self) -> bool {
        self.rank == self.ceiling()
    }
}

fn check_sizes(w: &ComplexMatrix, d: usize, particles: usize) -> Result<()> {
    if particles == 0 || d == 0 {
        return Err(Error::InvalidArgument("d and N must be positive".into()));
    }
    if particles > MAX_JACOBIAN_PARTICLES || d > MAX_JACOBIAN_D {
        return Err(Error::SizeLimit(format!(
            "Jacobian for d={d}, N={particles} (limits d ≤ {MAX_JACOBIAN_D}, N ≤ {MAX_JACOBIAN_PARTICLES})"
        )));
    }
    if w.shape() != (particles, d * particles) {
        return Err(Error::dim(format!("W′ must be {particles}×{}, got {:?}", d * particles, w.shape())));
    }
    Ok(())
}

/// Selected columns of `W′` for the tensor entry with flat index `flat`.
fn selected_columns(mut flat: usize, d: usize, particles: usize) -> Vec<usize> {
    let mut cols = vec![0; particles];
    for m in (0..particles).rev() {
        cols[m] = d * m + flat % d;
        flat /= d;
    }
    cols
}

/// Jacobian of `g̃` with respect to the entries of `W′`, shape
/// `d^N × dN²`.
///
/// The derivative with respect to `W′[l, c_m]`, where `c_m` is the column
/// selected for particle `m`, is the permanent of the minor with row `l`
/// and column `m` removed (bosons) or the signed cofactor (fermions). All
/// other entries vanish.
pub fn analytic_jacobian(w: &ComplexMatrix, species: Species, d: usize, particles: usize) -> Result<ComplexMatrix> {
    check_sizes(w, d, particles)?;
    assemble(w, species, d, particles, kernel_in_place)
}

/// Same Jacobian with every cofactor evaluated as an explicit permutation
/// sum accumulated with compensated (Neumaier) summation.
pub fn compensated_jacobian(w: &ComplexMatrix, species: Species, d: usize, particles: usize) -> Result<ComplexMatrix> {
    check_sizes(w, d, particles)?;
    let perms = permutations(particles.saturating_sub(1));
    assemble(w, species, d, particles, |species, buf, n| compensated_permutation_sum(&perms, species, buf, n))
}

fn assemble<F>(w: &ComplexMatrix, species: Species, d: usize, particles: usize, kernel: F) -> Result<ComplexMatrix>
where
    F: Fn(Species, &mut [C64], usize) -> C64 + Sync,
{
    let n = particles;
    let rows = d.pow(n as u32);
    let cols = d * n * n;
    let row_data: Vec<Vec<C64>> = (0..rows)
        .into_par_iter()
        .map_init(
            || vec![C64::new(0.0, 0.0); n.saturating_sub(1).pow(2)],
            |buf, flat| {
                let selected = selected_columns(flat, d, n);
                let mut row = vec![C64::new(0.0, 0.0); cols];
                for l in 0..n {
                    for m in 0..n {
                        let minor = if n == 1 {
                            C64::new(1.0, 0.0)
                        } else {
                            let mut t = 0;
                            for r in (0..n).filter(|&r| r != l) {
                                for &c in selected.iter().enumerate().filter(|&(k, _)| k != m).map(|(_, c)| c) {
                                    buf[t] = w[(r, c)];
                                    t += 1;
                                }
                            }
                            kernel(species, buf, n - 1)
                        };
                        row[l * d * n + selected[m]] = minor * species.sign((l + m) % 2 == 1);
                    }
                }
                row
            },
        )
        .collect();
    Ok(ComplexMatrix::from_fn(rows, cols, |r, c| row_data[r][c]))
}

fn compensated_permutation_sum(perms: &[(Vec<usize>, bool)], species: Species, a: &[C64], n: usize) -> C64 {
    let mut re = Neumaier::default();
    let mut im = Neumaier::default();
    for (p, odd) in perms {
        let prod = (0..n).map(|i| a[i * n + p[i]]).product::<C64>() * species.sign(*odd);
        re.add(prod.re);
        im.add(prod.im);
    }
    C64::new(re.total(), im.total())
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    carry: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Singular values of a tall matrix, reduced through QR first.
fn jacobian_spectrum(j: &ComplexMatrix) -> Vec<f64> {
    if j.nrows() > 2 * j.ncols() {
        crate::linalg::singular_values(&j.clone().qr().r())
    } else {
        crate::linalg::singular_values(j)
    }
}

fn is_borderline(spectrum: &[f64], tolerance: f64) -> bool {
    let Some(&max) = spectrum.first() else { return false };
    let (lo, hi) = (max * tolerance / BORDERLINE_WINDOW, max * tolerance * BORDERLINE_WINDOW);
    spectrum.iter().any(|&s| s > lo && s < hi)
}

struct Trial {
    rank: usize,
    spectrum: Vec<f64>,
    borderline: bool,
}

fn run_trial(d: usize, particles: usize, species: Species, seed: u64, tolerance: f64) -> Result<Trial> {
    let mut rng = seeded_rng(seed);
    let w = ginibre(particles, d * particles, &mut rng);
    let mut spectrum = jacobian_spectrum(&analytic_jacobian(&w, species, d, particles)?);
    let borderline = is_borderline(&spectrum, tolerance);
    if borderline && particles <= 7 {
        spectrum = jacobian_spectrum(&compensated_jacobian(&w, species, d, particles)?);
        if is_borderline(&spectrum, tolerance) {
            log::warn!("d={d} N={particles} {species}: singular value near the rank threshold after compensated reassembly");
        }
    }
    Ok(Trial { rank: numerical_rank(&spectrum, tolerance), spectrum, borderline })
}

/// Jacobian rank at `trials` independent Ginibre draws of `W′`, keeping the
/// maximum.
pub fn manifold_rank(d: usize, particles: usize, species: Species, trials: usize, seed: u64) -> Result<JacobianReport> {
    manifold_rank_with_tolerance(d, particles, species, trials, seed, RANK_TOLERANCE)
}

pub fn manifold_rank_with_tolerance(
    d: usize,
    particles: usize,
    species: Species,
    trials: usize,
    seed: u64,
    tolerance: f64,
) -> Result<JacobianReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    let species_tag = match species {
        Species::Boson => 0,
        Species::Fermion => 1,
    };
    let results: Vec<Trial> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = derive_seed(seed, &[d as u64, particles as u64, species_tag, t as u64]);
            run_trial(d, particles, species, s, tolerance)
        })
        .collect::<Result<_>>()?;
    let trial_ranks: Vec<usize> = results.iter().map(|t| t.rank).collect();
    let rank = trial_ranks.iter().copied().max().unwrap_or(0);
    if trial_ranks.iter().any(|&r| r != rank) {
        log::warn!("d={d} N={particles} {species}: ranks differ across trials {trial_ranks:?}; keeping {rank}");
    }
    let best = results.iter().find(|t| t.rank == rank).expect("at least one trial");
    Ok(JacobianReport {
        d,
        particles,
        species,
        rank,
        trial_ranks,
        singular_values: best.spectrum.clone(),
        bound: species_bound(species, d, particles),
        trials,
        tolerance,
        borderline: results.iter().any(|t| t.borderline),
    })
}

/// `(d-1)N² - N + 2`.
pub fn fermion_bound(d: usize, particles: usize) -> usize {
    ((d.saturating_sub(1)) * particles * particles + 2).saturating_sub(particles)
}

/// `dN² - 2N + 2`.
pub fn boson_bound(d: usize, particles: usize) -> usize {
    (d * particles * particles + 2).saturating_sub(2 * particles)
}

pub fn species_bound(species: Species, d: usize, particles: usize) -> usize {
    match species {
        Species::Boson => boson_bound(d, particles),
        Species::Fermion => fermion_bound(d, particles),
    }
}

/// Euler-angle count `K = (d - 1/2)N² - N/2` of lossless setups, kept as
/// `2K` so it stays an integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LosslessCount {
    pub twice_k: usize,
    pub boson_bound: usize,
}

impl LosslessCount {
    pub fn k(&self) -> f64 {
        self.twice_k as f64 / 2.0
    }

    /// `boson_bound - K`; positive when lossy setups reach further.
    pub fn boson_excess(&self) -> f64 {
        self.boson_bound as f64 - self.k()
    }
}

pub fn lossless_parameter_count(d: usize, particles: usize) -> LosslessCount {
    LosslessCount {
        twice_k: ((2 * d).saturating_sub(1) * particles * particles).saturating_sub(particles),
        boson_bound: boson_bound(d, particles),
    }
}

/// One cell of the dimensionality table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableCell {
    pub d: usize,
    #[serde(rename = "N")]
    pub particles: usize,
    pub species: Species,
    /// `None` when the cell was outside the budget.
    pub report: Option<JacobianReport>,
    pub bound: usize,
    pub dn_power: u128,
    pub seconds: Option<f64>,
}

impl TableCell {
    pub fn rank(&self) -> Option<usize> {
        self.report.as_ref().map(|r| r.rank)
    }

    pub fn tight(&self) -> Option<bool> {
        self.report.as_ref().map(JacobianReport::is_tight)
    }

    pub fn skipped(&self) -> bool {
        self.report.is_none()
    }
}

/// Limits on the cells `table2` will compute.
#[derive(Clone, Copy, Debug)]
pub struct TableBudget {
    /// Largest Jacobian, in entries, that will be assembled.
    pub max_jacobian_entries: usize,
    pub trials: usize,
}

impl Default for TableBudget {
    fn default() -> Self {
        TableBudget { max_jacobian_entries: 4_000_000, trials: 5 }
    }
}

impl TableBudget {
    pub fn admits(&self, d: usize, particles: usize) -> bool {
        d <= MAX_JACOBIAN_D
            && particles <= MAX_JACOBIAN_PARTICLES
            && d.checked_pow(particles as u32)
                .and_then(|rows| rows.checked_mul(d * particles * particles))
                .is_some_and(|entries| entries <= self.max_jacobian_entries)
    }
}

/// Computes every `(d, N)` cell in order. Cells outside the budget are kept
/// with no report.
pub fn table2(cells: &[(usize, usize)], species: Species, budget: TableBudget, seed: u64) -> Result<Vec<TableCell>> {
    cells
        .iter()
        .map(|&(d, particles)| {
            let dn_power = (d as u128).pow(particles as u32);
            let bound = species_bound(species, d, particles);
            if !budget.admits(d, particles) {
                log::info!("skipping d={d} N={particles}: outside budget");
                return Ok(TableCell { d, particles, species, report: None, bound, dn_power, seconds: None });
            }
            let start = std::time::Instant::now();
            let report = manifold_rank(d, particles, species, budget.trials, seed)?;
            let seconds = start.elapsed().as_secs_f64();
            log::info!("d={d} N={particles} {species}: rank {} in {seconds:.2}s", report.rank);
            Ok(TableCell { d, particles, species, report: Some(report), bound, dn_power, seconds: Some(seconds) })
        })
        .collect()
}
