//! Cross-module property suites.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use iforge_core::amplitude::{
    block_coefficient_tensor, coefficient_tensor, default_source_rows, evolve_fock, glynn_permanent, post_selected_state,
};
use iforge_core::dimension::analytic_jacobian;
use iforge_core::entanglement::{combinatorial_bound, max_bipartite_rank};
use iforge_core::fock::omega;
use iforge_core::json::matrix_to_rows;
use iforge_core::linalg::{derive_seed, ginibre, haar_unitary, kron, seeded_rng, RANK_TOLERANCE};
use iforge_core::minors::{decompose, minor_map_rank, spanning_minor_rank};
use iforge_core::oracle::{coefficient_tensor_by_paths, determinant_naive, permanent_naive};
use iforge_core::scatter::beam_splitter_2x2;
use iforge_core::{
    determinant, permanent, CoefficientTensor, ComplexMatrix, FockSuperposition, ModeOccupation, Species, C64,
};

use crate::commands::CommandOutput;
use crate::error::CliResult;
use crate::output::to_json;

pub const ORACLE_TOLERANCE: f64 = 1e-10;
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;
pub const SUPPRESSION_TOLERANCE: f64 = 1e-12;
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-9;
pub const JACOBIAN_TOLERANCE: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sizes {
    Small,
    Large,
}

/// Deliberate defects for checking that the suites catch them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Negates every fast determinant before it is compared.
    DetSign,
}

#[derive(Clone, Copy, Debug)]
pub struct SuiteParams {
    pub oracle_instances: usize,
    pub oracle_max_particles: usize,
    pub oracle_max_d: usize,
    pub permanent_max_size: usize,
    pub unitary_setups: usize,
    pub max_modes: usize,
    pub rank_pipelines: usize,
    pub reconstructions: usize,
    pub max_minor_order: usize,
    pub minor_trials: usize,
}

impl SuiteParams {
    pub fn for_sizes(sizes: Sizes) -> Self {
        match sizes {
            Sizes::Small => SuiteParams {
                oracle_instances: 500,
                oracle_max_particles: 5,
                oracle_max_d: 3,
                permanent_max_size: 8,
                unitary_setups: 100,
                max_modes: 8,
                rank_pipelines: 500,
                reconstructions: 200,
                max_minor_order: 5,
                minor_trials: 3,
            },
            Sizes::Large => SuiteParams {
                oracle_instances: 2000,
                oracle_max_particles: 6,
                oracle_max_d: 3,
                permanent_max_size: 9,
                unitary_setups: 400,
                max_modes: 10,
                rank_pipelines: 2000,
                reconstructions: 1000,
                max_minor_order: 6,
                minor_trials: 5,
            },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest error seen, in the suite's own metric.
    pub max_error: f64,
    pub tolerance: f64,
    /// First failing case.
    pub counterexample: Option<Value>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifySummary {
    pub seed: u64,
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

/// One checked case: its error and, when it fails, a description.
struct Case {
    error: f64,
    failure: Option<Value>,
}

impl Case {
    fn check(error: f64, tolerance: f64, describe: impl FnOnce() -> Value) -> Self {
        let failure = (error.is_nan() || error > tolerance).then(describe);
        Case { error, failure }
    }
}

fn collect(name: &'static str, tolerance: f64, cases: Vec<Case>) -> SuiteResult {
    SuiteResult {
        name,
        cases: cases.len(),
        failures: cases.iter().filter(|c| c.failure.is_some()).count(),
        max_error: cases.iter().map(|c| c.error).fold(0.0, f64::max),
        tolerance,
        counterexample: cases.into_iter().find_map(|c| c.failure),
    }
}

fn relative(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

fn tensor_relative(a: &CoefficientTensor, b: &CoefficientTensor) -> f64 {
    let scale = b.amplitudes().iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    a.max_abs_diff(b).unwrap_or(f64::INFINITY) / scale
}

fn z(v: C64) -> Value {
    json!({"re": v.re, "im": v.im})
}

fn rng_for(seed: u64, suite: u64, case: usize) -> impl Rng {
    seeded_rng(derive_seed(seed, &[suite, case as u64]))
}

/// Fast permanents and determinants against the naive permutation sums,
/// then `coefficient_tensor` against the explicit path sum.
pub fn oracle_suite(p: &SuiteParams, seed: u64, fault: Option<Fault>) -> SuiteResult {
    let sign = if fault == Some(Fault::DetSign) { -1.0 } else { 1.0 };
    let mut cases: Vec<Case> = (1..=p.permanent_max_size)
        .into_par_iter()
        .flat_map_iter(|n| {
            let a = ginibre(n, n, &mut rng_for(seed, 1, n));
            let (ryser, glynn, naive) = (permanent(&a).unwrap(), glynn_permanent(&a).unwrap(), permanent_naive(&a));
            let det = determinant(&a).unwrap() * sign;
            let det_naive = determinant_naive(&a);
            let rows = matrix_to_rows(&a);
            [
                Case::check(relative(ryser, naive).max(relative(glynn, naive)), ORACLE_TOLERANCE, || {
                    json!({"kind": "permanent", "matrix": rows, "ryser": z(ryser), "glynn": z(glynn), "naive": z(naive)})
                }),
                Case::check(relative(det, det_naive), ORACLE_TOLERANCE, || {
                    json!({"kind": "determinant", "matrix": matrix_to_rows(&a), "fast": z(det), "naive": z(det_naive)})
                }),
            ]
        })
        .collect();
    cases.par_extend((0..p.oracle_instances).into_par_iter().map(|i| {
        let mut rng = rng_for(seed, 2, i);
        let n = rng.random_range(1..=p.oracle_max_particles);
        let d = rng.random_range(1..=p.oracle_max_d);
        let species = if i % 2 == 0 { Species::Boson } else { Species::Fermion };
        let w = ginibre(d * n, d * n, &mut rng);
        let rows = default_source_rows(d, n);
        let mut fast = coefficient_tensor(&w, species, d, n, Some(&rows)).unwrap();
        if species == Species::Fermion && sign < 0.0 {
            fast = fast.scaled(C64::new(-1.0, 0.0));
        }
        let slow = coefficient_tensor_by_paths(&w, species, d, &rows);
        Case::check(tensor_relative(&fast, &slow), ORACLE_TOLERANCE, || {
            json!({"kind": "coefficient_tensor", "species": species, "d": d, "N": n, "matrix": matrix_to_rows(&w)})
        })
    }));
    collect("oracle", ORACLE_TOLERANCE, cases)
}

fn random_basis_input<R: Rng>(d: usize, n: usize, rng: &mut R) -> CoefficientTensor {
    let idx: Vec<usize> = (0..n).map(|_| rng.random_range(1..=d)).collect();
    CoefficientTensor::basis(d, &idx).expect("valid index")
}

/// Random unitary setups conserve total probability, for both species.
pub fn unitarity_suite(p: &SuiteParams, seed: u64) -> SuiteResult {
    let cases = (0..p.unitary_setups)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, 3, i);
            let n = rng.random_range(1..=4usize.min(p.max_modes));
            let d = rng.random_range(1..=p.max_modes / n);
            let species = if i % 2 == 0 { Species::Boson } else { Species::Fermion };
            let w = haar_unitary(d * n, &mut rng);
            let input = omega(&random_basis_input(d, n, &mut rng));
            let total = evolve_fock(&input, &w, species).unwrap().norm_sqr();
            Case::check((total - 1.0).abs(), PROBABILITY_TOLERANCE, || {
                json!({"species": species, "d": d, "N": n, "total": total, "matrix": matrix_to_rows(&w)})
            })
        })
        .collect();
    collect("unitarity", PROBABILITY_TOLERANCE, cases)
}

/// No fermionic output ever holds two particles in one mode.
pub fn pauli_suite(p: &SuiteParams, seed: u64) -> SuiteResult {
    let cases = (0..p.unitary_setups)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, 4, i);
            let n = rng.random_range(2..=4usize.min(p.max_modes / 2));
            let d = rng.random_range(2..=p.max_modes / n);
            let w = haar_unitary(d * n, &mut rng);
            let input = omega(&random_basis_input(d, n, &mut rng));
            let out = evolve_fock(&input, &w, Species::Fermion).unwrap();
            let worst = out
                .terms()
                .iter()
                .filter(|t| t.occupation.counts().iter().any(|&c| c > 1))
                .map(|t| t.amplitude.norm())
                .fold(0.0, f64::max);
            Case::check(worst, SUPPRESSION_TOLERANCE, || {
                json!({"d": d, "N": n, "largest_double_occupation": worst, "matrix": matrix_to_rows(&w)})
            })
        })
        .collect();
    collect("pauli", SUPPRESSION_TOLERANCE, cases)
}

/// Two particles in identical internal states meeting at a balanced beam
/// splitter: bosons never leave in separate modes, fermions always do.
pub fn hom_suite() -> SuiteResult {
    let bs = beam_splitter_2x2();
    let mut cases = Vec::new();
    for d in 1..=3usize {
        let w = kron(&bs, &ComplexMatrix::identity(d, d));
        for state in 1..=d {
            let input = omega(&CoefficientTensor::basis(d, &[state, state]).unwrap());
            for species in [Species::Boson, Species::Fermion] {
                let p = post_selected_state(&input, &w, species, d).unwrap().norm_sqr();
                let error = match species {
                    Species::Boson => p,
                    Species::Fermion => (p - 1.0).abs(),
                };
                cases.push(Case::check(error, SUPPRESSION_TOLERANCE, || {
                    json!({"species": species, "d": d, "internal_state": state, "coincidence": p})
                }));
            }
        }
    }
    collect("hom", SUPPRESSION_TOLERANCE, cases)
}

/// `D · det(X_j)` reproduces every fermionic qubit coefficient, and the
/// principal-minor form agrees when the default pivots are used.
pub fn reconstruction_suite(p: &SuiteParams, seed: u64) -> SuiteResult {
    let cases = (0..p.reconstructions)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, 5, i);
            let n = 2 + i % (p.max_minor_order - 1);
            let w = ginibre(n, 2 * n, &mut rng);
            let direct = block_coefficient_tensor(&w, Species::Fermion, 2).unwrap();
            let dec = decompose(&w, 2).unwrap();
            let mut error = tensor_relative(&dec.reconstruct_tensor().unwrap(), &direct);
            if dec.default_pivots {
                let mut by_minor = CoefficientTensor::zeros(2, n);
                for flat in 0..by_minor.len() {
                    let idx = by_minor.multi_index(flat);
                    by_minor.amplitudes_mut()[flat] = dec.reconstruct_by_minor(&idx).unwrap();
                }
                error = error.max(tensor_relative(&by_minor, &direct));
            }
            Case::check(error, RECONSTRUCTION_TOLERANCE, || json!({"N": n, "matrix": matrix_to_rows(&w)}))
        })
        .collect();
    collect("reconstruction", RECONSTRUCTION_TOLERANCE, cases)
}

/// The principal-minor map has Jacobian rank `N² − N + 1`, and the spanning
/// family reaches the same rank.
pub fn minor_rank_suite(p: &SuiteParams, seed: u64) -> SuiteResult {
    let cases = (2..=p.max_minor_order)
        .map(|n| {
            let full = minor_map_rank(n, p.minor_trials, seed).unwrap();
            let spanning = spanning_minor_rank(n, p.minor_trials, seed).unwrap();
            let expected = n * n - n + 1;
            let error = full.abs_diff(expected).max(spanning.abs_diff(expected)) as f64;
            Case::check(error, 0.0, || json!({"N": n, "minor_map_rank": full, "spanning_rank": spanning, "expected": expected}))
        })
        .collect();
    collect("minor_ranks", 0.0, cases)
}

/// Analytic Jacobian against central differences of `g̃`.
pub fn jacobian_suite(seed: u64) -> SuiteResult {
    let h = 1e-6;
    let shapes = [(2, 2), (2, 3), (3, 2), (2, 4), (3, 3)];
    let cases = shapes
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, &(d, n))| {
            [Species::Boson, Species::Fermion].map(|species| {
                let w = ginibre(n, d * n, &mut rng_for(seed, 6, 2 * i + (species == Species::Fermion) as usize));
                let a = analytic_jacobian(&w, species, d, n).unwrap();
                let g = |m: &ComplexMatrix| block_coefficient_tensor(m, species, d).unwrap().into_amplitudes();
                let mut worst = 0.0f64;
                for l in 0..n {
                    for k in 0..d * n {
                        let (mut plus, mut minus) = (w.clone(), w.clone());
                        plus[(l, k)] += h;
                        minus[(l, k)] -= h;
                        let (gp, gm) = (g(&plus), g(&minus));
                        for r in 0..gp.len() {
                            let fd = (gp[r] - gm[r]) / (2.0 * h);
                            worst = worst.max(relative(a[(r, l * d * n + k)], fd));
                        }
                    }
                }
                Case::check(worst, JACOBIAN_TOLERANCE, || {
                    json!({"species": species, "d": d, "N": n, "matrix": matrix_to_rows(&w)})
                })
            })
        })
        .collect();
    collect("jacobian", JACOBIAN_TOLERANCE, cases)
}

/// Largest bipartite rank of the post-selected output, or `None` when
/// nothing is post-selected.
fn output_rank(input: &FockSuperposition, w: &ComplexMatrix, species: Species, d: usize) -> Option<usize> {
    let g = post_selected_state(input, w, species, d).unwrap();
    (g.norm_sqr() > 1e-24).then(|| max_bipartite_rank(&g.normalized(), RANK_TOLERANCE).unwrap().0)
}

/// Output Schmidt ranks never exceed the path-counting bound: random product
/// inputs, condensates (rank 1) and the doubly occupied input `r = (2, 2)`.
pub fn rank_bound_suite(p: &SuiteParams, seed: u64) -> SuiteResult {
    let mut cases: Vec<Case> = (0..p.rank_pipelines)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, 7, i);
            let n = rng.random_range(2..=4usize);
            let d = rng.random_range(2..=4usize);
            let species = if i % 2 == 0 { Species::Boson } else { Species::Fermion };
            let locals: Vec<Vec<C64>> = (0..n).map(|_| (0..d).map(|_| iforge_core::linalg::complex_gaussian(&mut rng)).collect()).collect();
            let input = CoefficientTensor::product(&locals).unwrap().normalized();
            let w = haar_unitary(d * n, &mut rng);
            let bound = combinatorial_bound(n, &ModeOccupation::new(vec![1; n]), 1).unwrap();
            let rank = output_rank(&omega(&input), &w, species, d).unwrap_or(0);
            let excess = (rank as u128).saturating_sub(bound) as f64;
            Case::check(excess, 0.0, || json!({"kind": "product", "species": species, "d": d, "N": n, "rank": rank, "bound": bound}))
        })
        .collect();
    let multi = |counts: &[(usize, usize)], d: usize, n: usize| {
        let mut occ = vec![0; d * n];
        for &(mode, c) in counts {
            occ[mode] = c;
        }
        FockSuperposition::from_terms(d * n, n, [(occ, C64::new(1.0, 0.0))]).unwrap()
    };
    cases.par_extend((0..p.rank_pipelines / 10).into_par_iter().flat_map_iter(|i| {
        let mut rng = rng_for(seed, 8, i);
        let n = rng.random_range(2..=4usize);
        let d = rng.random_range(2..=4usize);
        let w = haar_unitary(d * n, &mut rng);
        let bec = output_rank(&multi(&[(0, n)], d, n), &w, Species::Boson, d).unwrap_or(1);
        let w4 = haar_unitary(4 * d, &mut rng);
        let pairs = output_rank(&multi(&[(0, 2), (d, 2)], d, 4), &w4, Species::Boson, d).unwrap_or(0);
        [
            Case::check(bec.abs_diff(1) as f64, 0.0, || json!({"kind": "condensate", "d": d, "N": n, "rank": bec})),
            Case::check(pairs.saturating_sub(6) as f64, 0.0, || json!({"kind": "pairs", "d": d, "rank": pairs, "bound": 6})),
        ]
    }));
    collect("rank_bound", 0.0, cases)
}

pub fn verify(sizes: Sizes, seed: u64, fault: Option<Fault>) -> VerifySummary {
    let p = SuiteParams::for_sizes(sizes);
    let suites = vec![
        oracle_suite(&p, seed, fault),
        unitarity_suite(&p, seed),
        pauli_suite(&p, seed),
        hom_suite(),
        reconstruction_suite(&p, seed),
        minor_rank_suite(&p, seed),
        jacobian_suite(seed),
        rank_bound_suite(&p, seed),
    ];
    for s in &suites {
        log::info!("{}: {}/{} passed, max error {:e}", s.name, s.cases - s.failures, s.cases, s.max_error);
    }
    VerifySummary { seed, passed: suites.iter().all(SuiteResult::passed), suites }
}

pub fn run(sizes: Sizes, seed: u64, fault: Option<Fault>) -> CliResult<CommandOutput> {
    let summary = verify(sizes, seed, fault);
    let failed: Vec<&str> = summary.suites.iter().filter(|s| !s.passed()).map(|s| s.name).collect();
    let failure = (!failed.is_empty()).then(|| format!("failing suites: {}", failed.join(", ")));
    Ok(CommandOutput { body: to_json(&summary), failure })
}
