use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use super::{SetupKind, SetupSpec};
use crate::{ComplexMatrix, Error, Result, C64};

/// Devices with closed-form scattering matrices.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "device", rename_all = "snake_case")]
pub enum NamedDevice {
    /// Fourier multiport `V_{jk} = e^{2πi(j-1)(k-1)/N} / √N`.
    Fourier {
        #[serde(rename = "N")]
        particles: usize,
        d: usize,
    },
    /// Free-space propagation onto `N` detectors: `V_{jk} = √p`.
    FreeSpace {
        #[serde(rename = "N")]
        particles: usize,
        d: usize,
        p: f64,
    },
    /// Three-photon GHZ analyzer (polarizing beam splitters followed by
    /// `|+⟩` polarizers).
    GhzAnalyzer,
    /// Tunable four-photon setup; `gamma` is the half-wave-plate angle in
    /// radians.
    FourPhotonFamily { gamma: f64 },
    /// 50:50 non-polarizing beam splitter for two particles.
    BeamSplitter { d: usize },
    /// Polarizing beam splitter: transmits H, splits V evenly.
    Pbs,
}

impl NamedDevice {
    pub fn setup(&self) -> Result<SetupSpec> {
        Ok(match *self {
            NamedDevice::Fourier { particles, d } => {
                check_positive(particles, d)?;
                SetupSpec::new(SetupKind::NonPolarizing(fourier_matrix(particles)), d, particles)
            }
            NamedDevice::FreeSpace { particles, d, p } => {
                check_positive(particles, d)?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidArgument(format!("detection probability {p} outside [0, 1]")));
                }
                let v = ComplexMatrix::from_element(particles, particles, C64::new(p.sqrt(), 0.0));
                SetupSpec::new(SetupKind::NonPolarizing(v), d, particles)
            }
            NamedDevice::GhzAnalyzer => SetupSpec::new(SetupKind::General(ghz_analyzer_padded()), 2, 3),
            NamedDevice::FourPhotonFamily { gamma } => {
                let block = four_photon_family_block(gamma);
                let mut w = ComplexMatrix::zeros(8, 8);
                w.view_mut((0, 0), (4, 8)).copy_from(&block);
                SetupSpec::new(SetupKind::General(w), 2, 4)
            }
            NamedDevice::BeamSplitter { d } => {
                check_positive(2, d)?;
                SetupSpec::new(SetupKind::NonPolarizing(beam_splitter_2x2()), d, 2)
            }
            NamedDevice::Pbs => {
                let swap = ComplexMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
                SetupSpec::new(SetupKind::Polarizing(vec![beam_splitter_2x2(), swap]), 2, 2)
            }
        })
    }
}

fn check_positive(particles: usize, d: usize) -> Result<()> {
    if particles == 0 || d == 0 {
        return Err(Error::InvalidArgument("N and d must be positive".into()));
    }
    Ok(())
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Looks a device up by name with positional numeric parameters:
/// `fourier [N, d]`, `freespace [N, d, p]`, `ghz_analyzer []`,
/// `four_photon_family [gamma]`, `beamsplitter [d]`, `pbs []`.
pub fn named_device(name: &str, params: &[f64]) -> Result<SetupSpec> {
    let int = |i: usize| -> Result<usize> {
        let v = params[i];
        if v < 0.0 || v.fract() != 0.0 {
            return Err(Error::InvalidArgument(format!("parameter {} of `{name}` must be a non-negative integer", i + 1)));
        }
        Ok(v as usize)
    };
    let arity = |n: usize| -> Result<()> {
        if params.len() != n {
            return Err(Error::InvalidArgument(format!("`{name}` takes {n} parameters, got {}", params.len())));
        }
        Ok(())
    };
    let device = match name {
        "fourier" => {
            arity(2)?;
            NamedDevice::Fourier { particles: int(0)?, d: int(1)? }
        }
        "freespace" | "free_space" => {
            arity(3)?;
            NamedDevice::FreeSpace { particles: int(0)?, d: int(1)?, p: params[2] }
        }
        "ghz_analyzer" => {
            arity(0)?;
            NamedDevice::GhzAnalyzer
        }
        "four_photon_family" => {
            arity(1)?;
            NamedDevice::FourPhotonFamily { gamma: params[0] }
        }
        "beamsplitter" | "beam_splitter" => {
            arity(1)?;
            NamedDevice::BeamSplitter { d: int(0)? }
        }
        "pbs" => {
            arity(0)?;
            NamedDevice::Pbs
        }
        other => return Err(Error::UnknownDevice(other.to_string())),
    };
    device.setup()
}

pub fn beam_splitter_2x2() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(1.0), c(-1.0)]) * c(FRAC_1_SQRT_2)
}

pub fn fourier_matrix(n: usize) -> ComplexMatrix {
    let norm = 1.0 / (n as f64).sqrt();
    ComplexMatrix::from_fn(n, n, |j, k| C64::from_polar(norm, 2.0 * PI * ((j * k) % n) as f64 / n as f64))
}

/// The 6×3 analyzer block: rows `1H, 1V, 3H, 3V, 5H, 5V`, columns the
/// detectors `D1, D3, D5`.
pub fn ghz_analyzer_block() -> ComplexMatrix {
    #[rustfmt::skip]
    let entries = [
        0.0, 0.0, 1.0,
        1.0, 0.0, 0.0,
        1.0, 0.0, 0.0,
        0.0, 1.0, 0.0,
        0.0, 1.0, 0.0,
        0.0, 0.0, 1.0,
    ];
    ComplexMatrix::from_row_slice(6, 3, &entries.map(c)) * c(FRAC_1_SQRT_2)
}

/// Analyzer block padded to 6×6: detector `Dk` becomes internal state 1 of
/// output group `k`, and internal state 2 of every group is never reached.
pub fn ghz_analyzer_padded() -> ComplexMatrix {
    let block = ghz_analyzer_block();
    let mut w = ComplexMatrix::zeros(6, 6);
    for det in 0..3 {
        w.set_column(2 * det, &block.column(det));
    }
    w
}

/// The 4×8 family matrix: rows `1H, 1V, 2H, 2V`, columns
/// `1H, 1V, …, 4H, 4V`, with `s = sin 2γ`, `c = cos 2γ`.
pub fn four_photon_family_block(gamma: f64) -> ComplexMatrix {
    let s = (2.0 * gamma).sin();
    let co = (2.0 * gamma).cos();
    let i = C64::new(0.0, 1.0);
    let z = c(0.0);
    #[rustfmt::skip]
    let entries = [
        i * s, z,       i * s, z,       c(co),  z,     c(co),  z,
        i * co, z,      i * co, z,      c(-s),  z,     c(-s),  z,
        z,     c(-1.0), z,     c(-1.0), z,      z,     z,      z,
        z,     z,       z,     z,       z,      i,     z,      i,
    ];
    ComplexMatrix::from_row_slice(4, 8, &entries) * c(FRAC_1_SQRT_2)
}
