//! Acceptance gate: one PASS/FAIL line per criterion.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::time::{Duration, Instant};

use iforge_cli::commands::family::family_sweep;
use iforge_cli::commands::ghz_swap::{ghz_swap, phi_plus};
use iforge_cli::commands::table2::{compute, CellStatus, Table2Args, Table2Row};
use iforge_cli::commands::verify::{
    hom_suite, minor_rank_suite, oracle_suite, pauli_suite, rank_bound_suite, reconstruction_suite, unitarity_suite,
    Sizes, SuiteParams, SuiteResult,
};
use iforge_core::dimension::{boson_bound, fermion_bound};
use iforge_core::linalg::{ginibre, seeded_rng};
use iforge_core::{permanent, CoefficientTensor, Species, C64};

const SEED: u64 = 20240611;

/// Expected ranks, by `(species, d, first N, ranks)`.
const TABLE: &[(Species, usize, usize, &[usize])] = &[
    (Species::Fermion, 2, 2, &[4, 8, 14, 22, 32, 44]),
    (Species::Fermion, 3, 2, &[8, 17, 30, 47, 68]),
    (Species::Fermion, 4, 2, &[12, 26, 46, 72]),
    (Species::Fermion, 5, 2, &[16, 35, 62, 97]),
    (Species::Boson, 2, 2, &[4, 8, 16, 32, 62]),
    (Species::Boson, 3, 3, &[23, 42, 67]),
    (Species::Boson, 4, 3, &[32]),
    (Species::Boson, 5, 3, &[41]),
];

const CELL_BUDGET: Duration = Duration::from_secs(60);
const FAMILY_BUDGET: Duration = Duration::from_secs(10);
const RYSER_BUDGET: Duration = Duration::from_secs(1);

type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn with_problems(detail: String, problems: &[String]) -> String {
    if problems.is_empty() { detail } else { format!("{detail}; {}", problems.join("; ")) }
}

fn suites(results: &[SuiteResult]) -> Outcome {
    let detail = results
        .iter()
        .map(|s| format!("{} {}/{} max_err={:.1e}", s.name, s.cases - s.failures, s.cases, s.max_error))
        .collect::<Vec<_>>()
        .join("; ");
    outcome(results.iter().all(SuiteResult::passed), detail)
}

/// Every cell of the bundled reference table, with timings.
fn reference_rows() -> Vec<Table2Row> {
    let args = Table2Args { seed: SEED, timings: true, ..Default::default() };
    compute(&args).expect("table computes")
}

fn table_reproduction(rows: &[Table2Row]) -> Outcome {
    let mut bad = Vec::new();
    let mut cells = 0;
    let mut slowest = 0.0f64;
    for &(species, d, n0, ranks) in TABLE {
        for (i, &expected) in ranks.iter().enumerate() {
            let n = n0 + i;
            cells += 1;
            let row = rows.iter().find(|r| r.cell.species == species && r.cell.d == d && r.cell.particles == n);
            let (rank, secs) = row.map_or((None, None), |r| (r.cell.rank(), r.cell.seconds));
            slowest = slowest.max(secs.unwrap_or(f64::INFINITY));
            if rank != Some(expected) || secs.is_none_or(|s| s > CELL_BUDGET.as_secs_f64()) {
                bad.push(format!("{species} d={d} N={n}: got {rank:?}, want {expected}"));
            }
        }
    }
    outcome(bad.is_empty(), with_problems(format!("{cells} cells, slowest {slowest:.2}s"), &bad))
}

fn bound_formulas(rows: &[Table2Row]) -> Outcome {
    let mut bad = Vec::new();
    for d in 1..=10usize {
        for n in 1..=10usize {
            let (d_, n_) = (d as i64, n as i64);
            if fermion_bound(d, n) as i64 != ((d_ - 1) * n_ * n_ - n_ + 2).max(0) {
                bad.push(format!("fermion d={d} N={n}"));
            }
            if boson_bound(d, n) as i64 != (d_ * n_ * n_ - 2 * n_ + 2).max(0) {
                bad.push(format!("boson d={d} N={n}"));
            }
        }
    }
    let mut checked = 0;
    for r in rows.iter().filter(|r| !r.red) {
        let ceiling = (r.cell.bound as u128).min(r.cell.dn_power);
        checked += 1;
        if r.cell.rank().map(|x| x as u128) != Some(ceiling) || r.status != CellStatus::Match {
            bad.push(format!("{} d={} N={}: rank {:?}, ceiling {ceiling}", r.cell.species, r.cell.d, r.cell.particles, r.cell.rank()));
        }
    }
    outcome(bad.is_empty(), with_problems(format!("100-point grid, {checked} non-red cells at min(bound, d^N)"), &bad))
}

fn four_photon_family() -> Outcome {
    let points: Vec<f64> = (0..33).map(|k| PI / 4.0 * k as f64 / 32.0).collect();
    let start = Instant::now();
    let rows = family_sweep(&points, Species::Boson).expect("family runs");
    let elapsed = start.elapsed();
    let worst_fid = rows.iter().map(|r| 1.0 - r.fidelity).fold(0.0, f64::max);
    let worst_p = rows
        .iter()
        .map(|r| {
            let g = r.gamma;
            let expected = ((4.0 * g).cos().powi(2) + 2.0 * (2.0 * g).sin().powi(4)) / 12.0;
            (r.success_probability - expected).abs()
        })
        .fold(0.0, f64::max);
    outcome(
        rows.len() == 33 && worst_fid <= 1e-9 && worst_p <= 1e-10 && elapsed <= FAMILY_BUDGET,
        format!("33 points, 1-F ≤ {worst_fid:.1e}, |Δp| ≤ {worst_p:.1e}, {:.2}s", elapsed.as_secs_f64()),
    )
}

fn ghz_projection() -> Outcome {
    let report = ghz_swap(&phi_plus(), Species::Boson).expect("swap runs");
    let mut ghz = CoefficientTensor::zeros(2, 3);
    ghz.set(&[1, 1, 1], C64::new(FRAC_1_SQRT_2, 0.0)).unwrap();
    ghz.set(&[2, 2, 2], C64::new(FRAC_1_SQRT_2, 0.0)).unwrap();
    let state = report.conditional_state.expect("herald fires");
    let overlap = state.inner(&ghz).unwrap().norm_sqr() / state.norm_sqr();
    outcome(
        overlap >= 1.0 - 1e-9 && report.fidelity_with_ghz >= 1.0 - 1e-9,
        format!("fidelity {overlap:.15}, heralding probability {:.6}", report.heralding_probability),
    )
}

fn ryser_timing() -> Outcome {
    let a = ginibre(20, 20, &mut seeded_rng(SEED));
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let (value, elapsed) = pool.install(|| {
        let start = Instant::now();
        let v = permanent(&a).unwrap();
        (v, start.elapsed())
    });
    outcome(
        value.is_finite() && elapsed <= RYSER_BUDGET,
        format!("20×20 in {:.3}s single-threaded", elapsed.as_secs_f64()),
    )
}

fn main() {
    let p = SuiteParams::for_sizes(Sizes::Small);
    let rows = reference_rows();
    let criteria: Vec<(&str, Check)> = vec![
        ("table reproduction", Box::new(|| table_reproduction(&rows))),
        ("bound formulas and tightness", Box::new(|| bound_formulas(&rows))),
        ("four-photon family", Box::new(four_photon_family)),
        ("GHZ projection", Box::new(ghz_projection)),
        (
            "physics properties",
            Box::new(|| suites(&[hom_suite(), pauli_suite(&p, SEED), unitarity_suite(&p, SEED)])),
        ),
        ("oracle equivalence", Box::new(|| suites(&[oracle_suite(&p, SEED, None)]))),
        ("rank bounds", Box::new(|| suites(&[rank_bound_suite(&p, SEED)]))),
        (
            "minor decomposition",
            Box::new(|| suites(&[reconstruction_suite(&p, SEED), minor_rank_suite(&p, SEED)])),
        ),
        ("permanent performance", Box::new(ryser_timing)),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += usize::from(!o.pass);
        println!("criterion {} {} {name}: {}", k + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
