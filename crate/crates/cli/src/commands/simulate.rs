use serde::Serialize;

use iforge_core::amplitude::{evolve_fock, post_selected_state, MAX_EVOLVE_MODES, MAX_EVOLVE_PARTICLES};
use iforge_core::entanglement::{rank_report, RankReport};
use iforge_core::fock::omega;
use iforge_core::linalg::RANK_TOLERANCE;
use iforge_core::{CoefficientTensor, FockSuperposition, ModeOccupation, Species};

use crate::commands::CommandOutput;
use crate::config::{ExperimentConfig, InputState};
use crate::error::{CliError, CliResult};
use crate::output::to_json;

/// Post-selected states with a smaller squared norm count as no output.
const NO_OUTPUT: f64 = 1e-24;

#[derive(Clone, Debug, Serialize)]
pub struct SimulationReport {
    pub species: Species,
    pub d: usize,
    #[serde(rename = "N")]
    pub particles: usize,
    pub success_probability: f64,
    /// Probability summed over every output arrangement, when the full
    /// output was enumerated.
    pub total_probability: Option<f64>,
    /// Normalized post-selected state with its canonical phase.
    pub state: Option<CoefficientTensor>,
    pub global_phase: Option<f64>,
    pub rank_report: Option<RankReport>,
}

/// Compile, propagate, post-select and analyse.
pub fn simulate(config: &ExperimentConfig, species: Species) -> CliResult<SimulationReport> {
    let spec = config.resolve_setup()?;
    let w = spec.compile()?;
    let (d, n) = (spec.d, spec.particles);

    let (input, occupation, input_rank) = if let Some(occ) = &spec.input_occupation {
        if config.input.is_some() {
            return Err(CliError::Config(
                "`input` must be omitted when the setup fixes `input_occupation`".into(),
            ));
        }
        let t = CoefficientTensor::basis(d, &vec![1; n])?;
        (omega(&t), occ.clone(), 1u128)
    } else {
        let input = config.input.clone().unwrap_or(InputState::Basis(vec![1; n]));
        match &input {
            InputState::Fock(f) => fock_bound_inputs(f)?,
            other => {
                let t = other.tensor(d)?.expect("non-Fock inputs have a tensor");
                if t.d() != d || t.parties() != n {
                    return Err(CliError::Config(format!(
                        "input tensor has d={}, N={}, setup expects d={d}, N={n}",
                        t.d(),
                        t.parties()
                    )));
                }
                let rank = match other {
                    InputState::Basis(_) | InputState::Product(_) => 1,
                    _ => t.amplitudes().iter().filter(|z| z.norm() > 0.0).count().max(1) as u128,
                };
                (omega(&t), ModeOccupation::new(vec![1; n]), rank)
            }
        }
    };
    if input.particles() != n {
        return Err(CliError::Config(format!("input holds {} particles, setup has {n}", input.particles())));
    }
    if w.ncols() < d * n {
        return Err(CliError::Config(format!("scattering matrix has {} columns, need {}", w.ncols(), d * n)));
    }
    let selected = w.columns(0, d * n).clone_owned();
    let g = post_selected_state(&input, &selected, species, d)?;
    let success = g.norm_sqr();
    let total_probability = (n <= MAX_EVOLVE_PARTICLES && w.ncols() <= MAX_EVOLVE_MODES)
        .then(|| evolve_fock(&input, &w, species).map(|s| s.norm_sqr()))
        .transpose()?;

    let mut report = SimulationReport {
        species,
        d,
        particles: n,
        success_probability: success,
        total_probability,
        state: None,
        global_phase: None,
        rank_report: None,
    };
    if success > NO_OUTPUT {
        let (state, phase) = g.normalized().canonical_phase();
        let tol = config.tolerance.unwrap_or(RANK_TOLERANCE);
        report.rank_report = Some(rank_report(&state, &occupation, input_rank, tol)?);
        report.state = Some(state);
        report.global_phase = Some(phase);
    }
    Ok(report)
}

/// Input state plus the occupation and multiplicity used for the
/// path-counting bound: every term contributes at most `N!/∏ r_j!` paths,
/// so the largest such term times the number of terms bounds the rank.
fn fock_bound_inputs(f: &FockSuperposition) -> CliResult<(FockSuperposition, ModeOccupation, u128)> {
    let terms: Vec<_> = f.terms().iter().filter(|t| t.amplitude.norm() > 0.0).collect();
    let occupation = terms
        .iter()
        .map(|t| t.occupation.clone())
        .min_by(|a, b| a.factorial_product().total_cmp(&b.factorial_product()))
        .ok_or_else(|| CliError::Config("input Fock state has no terms".into()))?;
    Ok((f.clone(), occupation, terms.len() as u128))
}

pub fn run(config: &ExperimentConfig, species: Species) -> CliResult<CommandOutput> {
    let report = simulate(config, species)?;
    let failure = report.rank_report.as_ref().and_then(|r| {
        (r.bipartite_lower as u128 > r.combinatorial_upper).then(|| {
            format!(
                "bipartite rank {} exceeds the path-counting bound {}",
                r.bipartite_lower, r.combinatorial_upper
            )
        })
    });
    Ok(CommandOutput { body: to_json(&report), failure })
}
