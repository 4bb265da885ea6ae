use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use serde::Serialize;

use iforge_core::amplitude::{conditional_state, create};
use iforge_core::scatter::ghz_analyzer_padded as analyzer;
use iforge_core::{CoefficientTensor, ComplexMatrix, Error, Species, C64};

use crate::commands::CommandOutput;
use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::output::to_json;

pub const FIDELITY_TOLERANCE: f64 = 1e-9;

/// Detectors fire in internal state 1 of groups 1, 3 and 5.
const HERALD: [(usize, usize); 3] = [(1, 1), (3, 1), (5, 1)];

#[derive(Clone, Debug, Serialize)]
pub struct SwapReport {
    pub species: Species,
    /// Probability that each of the three detectors registers one photon
    /// and photons 2, 4, 6 leave in their own modes.
    pub heralding_probability: f64,
    /// State of photons 2, 4, 6 given the herald, with canonical phase.
    pub conditional_state: Option<CoefficientTensor>,
    pub fidelity_with_ghz: f64,
    /// Whether the nominal fidelity requirement was enforced.
    pub checked: bool,
}

/// `(|HH⟩ + |VV⟩)/√2`.
pub fn phi_plus() -> CoefficientTensor {
    let a = C64::new(FRAC_1_SQRT_2, 0.0);
    CoefficientTensor::new(2, 2, vec![a, C64::new(0.0, 0.0), C64::new(0.0, 0.0), a]).expect("valid")
}

pub fn ghz3() -> CoefficientTensor {
    let mut t = CoefficientTensor::zeros(2, 3);
    t.set(&[1, 1, 1], C64::new(FRAC_1_SQRT_2, 0.0)).expect("valid");
    t.set(&[2, 2, 2], C64::new(FRAC_1_SQRT_2, 0.0)).expect("valid");
    t
}

/// 12×12 setup: the analyzer acts on photons 1, 3, 5 and photons 2, 4, 6
/// pass untouched.
pub fn swap_setup() -> ComplexMatrix {
    let block = analyzer();
    let mut w = ComplexMatrix::zeros(12, 12);
    for p in 0..3 {
        for pol in 0..2 {
            for k in 0..3 {
                for l in 0..2 {
                    w[(4 * p + pol, 4 * k + l)] = block[(2 * p + pol, 2 * k + l)];
                }
            }
            let idle = 4 * p + 2 + pol;
            w[(idle, idle)] = C64::new(1.0, 0.0);
        }
    }
    w
}

/// Tensor product with `a`'s parties first.
pub fn tensor_kron(a: &CoefficientTensor, b: &CoefficientTensor) -> CliResult<CoefficientTensor> {
    if a.d() != b.d() {
        return Err(CliError::Config("pair states must share d".into()));
    }
    let amps = a.amplitudes().iter().flat_map(|&x| b.amplitudes().iter().map(move |&y| x * y)).collect();
    Ok(CoefficientTensor::new(a.d(), a.parties() + b.parties(), amps)?)
}

pub fn ghz_swap(pair: &CoefficientTensor, species: Species) -> CliResult<SwapReport> {
    if pair.d() != 2 || pair.parties() != 2 {
        return Err(CliError::Config("field `pair_state`: expected a two-qubit tensor (d=2, N=2)".into()));
    }
    let input = tensor_kron(&tensor_kron(pair, pair)?, pair)?;
    let g = create(&input.normalized(), &swap_setup(), species)?;
    let herald: BTreeMap<usize, usize> = HERALD.into_iter().collect();
    let mut report = SwapReport {
        species,
        heralding_probability: 0.0,
        conditional_state: None,
        fidelity_with_ghz: 0.0,
        checked: false,
    };
    match conditional_state(&g, &herald) {
        Ok((state, conditional)) => {
            report.heralding_probability = conditional * g.norm_sqr();
            report.fidelity_with_ghz = state.fidelity(&ghz3())?;
            report.conditional_state = Some(state.canonical_phase().0);
        }
        Err(Error::ImpossibleCondition) => {}
        Err(e) => return Err(e.into()),
    }
    Ok(report)
}

pub fn run(config: &ExperimentConfig, species: Species) -> CliResult<CommandOutput> {
    let nominal = config.pair_state.is_none() && species == Species::Boson;
    let pair = config.pair_state.clone().unwrap_or_else(phi_plus);
    let mut report = ghz_swap(&pair, species)?;
    report.checked = nominal;
    let failure = (nominal && report.fidelity_with_ghz < 1.0 - FIDELITY_TOLERANCE)
        .then(|| format!("fidelity with GHZ is {}", report.fidelity_with_ghz));
    Ok(CommandOutput { body: to_json(&report), failure })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nominal_swap_produces_ghz() {
        let r = ghz_swap(&phi_plus(), Species::Boson).unwrap();
        assert!(r.fidelity_with_ghz > 1.0 - 1e-12);
        assert!((r.heralding_probability - 1.0 / 32.0).abs() < 1e-14);
    }

    #[test]
    fn product_pairs_do_not_swap() {
        let hh = CoefficientTensor::basis(2, &[1, 1]).unwrap();
        let r = ghz_swap(&hh, Species::Boson).unwrap();
        assert!((r.fidelity_with_ghz - 0.5).abs() < 1e-12);
        let plus = CoefficientTensor::product(&[vec![C64::new(FRAC_1_SQRT_2, 0.0); 2], vec![C64::new(FRAC_1_SQRT_2, 0.0); 2]]).unwrap();
        let r = ghz_swap(&plus, Species::Boson).unwrap();
        assert!((r.fidelity_with_ghz - 0.25).abs() < 1e-12);
    }

    #[test]
    fn fermions_run() {
        let out = run(&ExperimentConfig::default(), Species::Fermion).unwrap();
        assert!(out.failure.is_none());
    }
}
