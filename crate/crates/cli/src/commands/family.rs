use std::f64::consts::FRAC_PI_4;
use std::fmt::Write as _;

use serde::Serialize;

use iforge_core::amplitude::post_selected_state;
use iforge_core::scatter::NamedDevice;
use iforge_core::{CoefficientTensor, FockSuperposition, Species, C64};

use crate::commands::CommandOutput;
use crate::config::{ExperimentConfig, Sweep};
use crate::error::{CliError, CliResult};
use crate::output::csv_float;

pub const FIDELITY_TOLERANCE: f64 = 1e-9;
pub const SUCCESS_TOLERANCE: f64 = 1e-10;

/// Basis states carrying the family, as 1-based qubit indices (1 = H).
pub const SUPPORT: [(&str, [usize; 4]); 6] = [
    ("HHVV", [1, 1, 2, 2]),
    ("VVHH", [2, 2, 1, 1]),
    ("HVHV", [1, 2, 1, 2]),
    ("HVVH", [1, 2, 2, 1]),
    ("VHHV", [2, 1, 1, 2]),
    ("VHVH", [2, 1, 2, 1]),
];

pub fn default_sweep() -> Sweep {
    Sweep { name: "gamma".into(), start: 0.0, stop: FRAC_PI_4, steps: 33 }
}

/// Down-converted input over modes `1H, 1V, 2H, 2V` (padded to eight modes):
/// two photons of each polarization, as normalized Fock amplitudes.
pub fn family_input() -> FockSuperposition {
    let a = C64::new(1.0 / 3f64.sqrt(), 0.0);
    FockSuperposition::from_terms(
        8,
        4,
        [
            (vec![2, 0, 0, 2, 0, 0, 0, 0], a),
            (vec![0, 2, 2, 0, 0, 0, 0, 0], a),
            (vec![1, 1, 1, 1, 0, 0, 0, 0], a),
        ],
    )
    .expect("valid input")
}

/// `(√2 sin²2γ |GHZ₄⟩ + cos 4γ |Ψ⁺⟩|Ψ⁺⟩) / (2√3)` with
/// `|GHZ₄⟩ = (|HHVV⟩ + |VVHH⟩)/√2`.
pub fn analytic_state(gamma: f64) -> CoefficientTensor {
    // √2·sin²2γ times the 1/√2 inside |GHZ₄⟩, and cos 4γ times 1/2 from |Ψ⁺⟩|Ψ⁺⟩.
    let ghz = (2.0 * gamma).sin().powi(2);
    let bell = (4.0 * gamma).cos() / 2.0;
    let scale = 1.0 / (2.0 * 3f64.sqrt());
    let mut t = CoefficientTensor::zeros(2, 4);
    for (k, (_, idx)) in SUPPORT.iter().enumerate() {
        let v = if k < 2 { ghz } else { bell };
        t.set(idx, C64::new(v * scale, 0.0)).expect("valid index");
    }
    t
}

pub fn analytic_success(gamma: f64) -> f64 {
    ((4.0 * gamma).cos().powi(2) + 2.0 * (2.0 * gamma).sin().powi(4)) / 12.0
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyRow {
    pub gamma: f64,
    pub success_probability: f64,
    pub analytic_success: f64,
    /// Fidelity of the normalized simulated state with the normalized
    /// analytic state; zero when nothing is post-selected.
    pub fidelity: f64,
    /// Unnormalized post-selected amplitudes on [`SUPPORT`].
    pub support_amplitudes: Vec<C64>,
    /// Largest amplitude outside [`SUPPORT`].
    pub off_support: f64,
}

impl FamilyRow {
    pub fn passes(&self) -> bool {
        self.fidelity >= 1.0 - FIDELITY_TOLERANCE && (self.success_probability - self.analytic_success).abs() <= SUCCESS_TOLERANCE
    }
}

pub fn family_point(gamma: f64, species: Species) -> CliResult<FamilyRow> {
    let w = NamedDevice::FourPhotonFamily { gamma }.setup()?.compile()?;
    let g = post_selected_state(&family_input(), &w, species, 2)?;
    let target = analytic_state(gamma);
    let success = g.norm_sqr();
    let fidelity = if success > 0.0 { g.fidelity(&target)? } else { 0.0 };
    let support: Vec<C64> = SUPPORT.iter().map(|(_, idx)| g.get(idx)).collect::<Result<_, _>>()?;
    let support_flat: Vec<usize> = SUPPORT.iter().map(|(_, idx)| g.flat_index(idx)).collect::<Result<_, _>>()?;
    let off_support = g
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(k, _)| !support_flat.contains(k))
        .map(|(_, z)| z.norm())
        .fold(0.0, f64::max);
    Ok(FamilyRow {
        gamma,
        success_probability: success,
        analytic_success: analytic_success(gamma),
        fidelity,
        support_amplitudes: support,
        off_support,
    })
}

pub fn family_sweep(points: &[f64], species: Species) -> CliResult<Vec<FamilyRow>> {
    points.iter().map(|&g| family_point(g, species)).collect()
}

pub fn family_csv(rows: &[FamilyRow]) -> String {
    let mut out = String::from("gamma,success_probability,analytic_success,fidelity");
    for (name, _) in SUPPORT {
        write!(out, ",re_{name},im_{name}").unwrap();
    }
    out.push_str(",off_support\n");
    for r in rows {
        write!(
            out,
            "{},{},{},{}",
            csv_float(r.gamma),
            csv_float(r.success_probability),
            csv_float(r.analytic_success),
            csv_float(r.fidelity)
        )
        .unwrap();
        for z in &r.support_amplitudes {
            write!(out, ",{},{}", csv_float(z.re), csv_float(z.im)).unwrap();
        }
        writeln!(out, ",{}", csv_float(r.off_support)).unwrap();
    }
    out
}

pub fn run(config: &ExperimentConfig, species: Species) -> CliResult<CommandOutput> {
    let sweep = config.sweep.clone().unwrap_or_else(default_sweep);
    if sweep.name != "gamma" {
        return Err(CliError::Config(format!("field `sweep.name`: the family sweeps `gamma`, not `{}`", sweep.name)));
    }
    let rows = family_sweep(&sweep.points(), species)?;
    let failure = if species == Species::Boson {
        rows.iter().find(|r| !r.passes()).map(|r| {
            format!(
                "gamma={}: fidelity {} and success {} (expected {})",
                r.gamma, r.fidelity, r.success_probability, r.analytic_success
            )
        })
    } else {
        None
    };
    Ok(CommandOutput { body: family_csv(&rows), failure })
}
