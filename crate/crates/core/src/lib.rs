//! Simulation of post-selected N-qudit states produced when N identical,
//! non-interacting bosons or fermions scatter through a linear
//! single-particle network.
//!
//! Particles are described in two pictures. The *physical* picture lists
//! mode occupations over `n = d·N` modes, the first `d` modes being the
//! internal states of the particle in spatial mode 1, the next `d` those of
//! spatial mode 2, and so on. The *qudit* picture is a coefficient tensor
//! over `d^N` amplitudes, available whenever exactly one particle sits in
//! each group of `d` modes. [`fock`] converts between the two,
//! [`scatter`] builds scattering matrices, [`amplitude`] evaluates
//! permanents and determinants to propagate states, and [`entanglement`],
//! [`dimension`] and [`minors`] analyse what can be reached.
//!
//! All mode, party and qudit indices that appear in public interfaces are
//! 1-based.

pub mod amplitude;
pub mod dimension;
pub mod entanglement;
pub mod error;
pub mod fock;
pub mod json;
pub mod linalg;
pub mod minors;
pub mod oracle;
pub mod scatter;
pub mod tensor;

pub use num_complex::Complex64 as C64;

/// Dense complex matrix used for scattering matrices and their sub-blocks.
pub type ComplexMatrix = nalgebra::DMatrix<C64>;

pub use amplitude::{determinant, permanent, FockSuperposition, FockTerm};
pub use error::{Error, Result};
pub use fock::{ModeAssignment, ModeOccupation};
pub use scatter::{SetupKind, SetupSpec};
pub use tensor::CoefficientTensor;

use serde::{Deserialize, Serialize};

/// Particle statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Species {
    Boson,
    Fermion,
}

impl Species {
    /// Sign attached to a many-particle path with the given permutation
    /// parity: always `+1` for bosons, the permutation signature for fermions.
    pub fn sign(self, odd: bool) -> f64 {
        match (self, odd) {
            (Species::Fermion, true) => -1.0,
            _ => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Species::Boson => "boson",
            Species::Fermion => "fermion",
        }
    }
}

impl std::fmt::Display for Species {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Species {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "boson" | "bosons" | "b" => Ok(Species::Boson),
            "fermion" | "fermions" | "f" => Ok(Species::Fermion),
            other => Err(Error::Parse(format!("unknown species `{other}`"))),
        }
    }
}
