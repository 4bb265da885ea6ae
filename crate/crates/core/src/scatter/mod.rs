//! Scattering matrices: the three setup classes, local unitaries, row
//! replication for multiply occupied sources, unitary embedding of lossy
//! devices, and a small library of named devices.

mod devices;

use serde::{Deserialize, Serialize};

pub use devices::{
    beam_splitter_2x2, four_photon_family_block, fourier_matrix, ghz_analyzer_block, ghz_analyzer_padded, named_device,
    NamedDevice,
};

use crate::fock::{occupation_to_assignment, ModeOccupation};
use crate::json::{matrix_from_rows, matrix_to_rows, JsonComplex};
use crate::linalg::{singular_values, unitarity_deviation};
use crate::{ComplexMatrix, Error, Result, C64};

/// Tolerance for accepting a local operator as unitary.
pub const LOCAL_UNITARITY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum SetupKind {
    /// `W = V ⊗ 1_d`: every internal state is routed identically.
    NonPolarizing(ComplexMatrix),
    /// `W = Σ_k V^(k) ⊗ diag(e_k)`: routing depends on the internal state,
    /// which is never changed.
    Polarizing(Vec<ComplexMatrix>),
    /// Unrestricted `W`, rows are input modes and columns output modes.
    General(ComplexMatrix),
}

/// Declarative description of a scattering network for `N` particles with
/// `d` internal states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SetupDoc", into = "SetupDoc")]
pub struct SetupSpec {
    pub kind: SetupKind,
    pub d: usize,
    pub particles: usize,
    /// One `d × d` unitary per spatial input mode, applied before `W`.
    pub input_locals: Option<Vec<ComplexMatrix>>,
    /// One `d × d` unitary per spatial output mode, applied after `W`.
    pub output_locals: Option<Vec<ComplexMatrix>>,
    /// Occupation of the input modes when sources are multiply occupied.
    pub input_occupation: Option<ModeOccupation>,
}

impl SetupSpec {
    pub fn new(kind: SetupKind, d: usize, particles: usize) -> Self {
        SetupSpec { kind, d, particles, input_locals: None, output_locals: None, input_occupation: None }
    }

    pub fn with_input_locals(mut self, locals: Vec<ComplexMatrix>) -> Self {
        self.input_locals = Some(locals);
        self
    }

    pub fn with_output_locals(mut self, locals: Vec<ComplexMatrix>) -> Self {
        self.output_locals = Some(locals);
        self
    }

    pub fn with_input_occupation(mut self, occupation: ModeOccupation) -> Self {
        self.input_occupation = Some(occupation);
        self
    }

    pub fn compile(&self) -> Result<ComplexMatrix> {
        compile(self)
    }
}

/// Compiles a setup into its `dN`-row scattering matrix.
///
/// Local unitaries are absorbed as `(⊕ L_in) W (⊕ L_out)`. With an input
/// occupation, row group `p` of the result is the row group of the spatial
/// mode holding particle `p`, rotated so the occupied internal state comes
/// first; the result is then driven by the default input `|1, …, 1⟩`.
pub fn compile(spec: &SetupSpec) -> Result<ComplexMatrix> {
    let d = spec.d;
    let n = spec.particles;
    if d == 0 || n == 0 {
        return Err(Error::dim("d and N must be positive"));
    }
    let mut w = match &spec.kind {
        SetupKind::NonPolarizing(v) => {
            check_shape(v, n, n, "non-polarizing V")?;
            v.kronecker(&ComplexMatrix::identity(d, d))
        }
        SetupKind::Polarizing(vs) => {
            if vs.len() != d {
                return Err(Error::dim(format!("polarizing setup needs {d} matrices, got {}", vs.len())));
            }
            let mut w = ComplexMatrix::zeros(d * n, d * n);
            for (k, v) in vs.iter().enumerate() {
                check_shape(v, n, n, "polarizing V^(k)")?;
                let mut e = ComplexMatrix::zeros(d, d);
                e[(k, k)] = C64::new(1.0, 0.0);
                w += v.kronecker(&e);
            }
            w
        }
        SetupKind::General(w) => {
            let rows = spec.input_occupation.as_ref().map_or(d * n, ModeOccupation::modes);
            if w.nrows() != rows {
                return Err(Error::dim(format!("general W has {} rows, expected {rows}", w.nrows())));
            }
            if w.ncols() < d * n {
                return Err(Error::dim(format!("general W has {} columns, need at least {}", w.ncols(), d * n)));
            }
            w.clone()
        }
    };
    if let Some(locals) = &spec.input_locals {
        let block = block_diagonal(locals, d, w.nrows() / d.max(1), "input")?;
        if block.ncols() != w.nrows() {
            return Err(Error::dim("input locals do not cover the input modes"));
        }
        w = block * w;
    }
    if let Some(locals) = &spec.output_locals {
        let block = block_diagonal(locals, d, w.ncols() / d.max(1), "output")?;
        if block.nrows() != w.ncols() {
            return Err(Error::dim("output locals do not cover the output modes"));
        }
        w *= block;
    }
    if let Some(occ) = &spec.input_occupation {
        w = replicate_rows(&w, occ, d, n)?;
    }
    Ok(w)
}

fn check_shape(m: &ComplexMatrix, rows: usize, cols: usize, what: &str) -> Result<()> {
    if m.shape() != (rows, cols) {
        return Err(Error::dim(format!("{what} must be {rows}×{cols}, got {}×{}", m.nrows(), m.ncols())));
    }
    Ok(())
}

fn block_diagonal(locals: &[ComplexMatrix], d: usize, count: usize, side: &str) -> Result<ComplexMatrix> {
    if locals.len() != count {
        return Err(Error::dim(format!("{count} {side} locals expected, got {}", locals.len())));
    }
    let mut out = ComplexMatrix::zeros(d * count, d * count);
    for (k, l) in locals.iter().enumerate() {
        check_shape(l, d, d, "local operator")?;
        let deviation = unitarity_deviation(l);
        if deviation > LOCAL_UNITARITY_TOLERANCE {
            return Err(Error::InvalidLocal { index: k + 1, deviation });
        }
        out.view_mut((d * k, d * k), (d, d)).copy_from(l);
    }
    Ok(out)
}

fn replicate_rows(w: &ComplexMatrix, occ: &ModeOccupation, d: usize, n: usize) -> Result<ComplexMatrix> {
    if occ.particles() != n {
        return Err(Error::dim(format!("input occupation holds {} particles, setup has {n}", occ.particles())));
    }
    if occ.modes() != w.nrows() || !w.nrows().is_multiple_of(d) {
        return Err(Error::dim(format!(
            "input occupation over {} modes does not match {} grouped input rows",
            occ.modes(),
            w.nrows()
        )));
    }
    let mut out = ComplexMatrix::zeros(d * n, w.ncols());
    for (p, &mode) in occupation_to_assignment(occ).modes().iter().enumerate() {
        let group = (mode - 1) / d;
        let internal = (mode - 1) % d;
        for l in 0..d {
            // Swap the occupied internal state into the first slot.
            let src = match l {
                0 => internal,
                l if l == internal => 0,
                l => l,
            };
            out.row_mut(d * p + l).copy_from(&w.row(d * group + src));
        }
    }
    Ok(out)
}

/// Largest singular value exceeds `1 + tolerance`?
pub fn check_physical(w: &ComplexMatrix, tolerance: f64) -> Result<()> {
    let smax = singular_values(w).first().copied().unwrap_or(0.0);
    if smax > 1.0 + tolerance {
        return Err(Error::Unphysical { singular_value: smax });
    }
    Ok(())
}

/// Embeds a square contraction `W` as the top-left block of a unitary.
///
/// With `W = P Σ Q†`, every singular value below one contributes an
/// auxiliary mode carrying the defect `√(1 - σ²)`. The result is padded
/// with identity up to `(2n-1) × (2n-1)`; a strictly contractive `W`
/// (all `σ < 1`) needs `2n` modes and gets them.
pub fn embed_unitary(w: &ComplexMatrix, tolerance: f64) -> Result<ComplexMatrix> {
    let n = w.nrows();
    if w.ncols() != n || n == 0 {
        return Err(Error::dim(format!("embedding needs a non-empty square matrix, got {:?}", w.shape())));
    }
    let svd = w.clone().svd(true, true);
    let p = svd.u.as_ref().expect("requested U");
    let qt = svd.v_t.as_ref().expect("requested V^T");
    let sigma = &svd.singular_values;
    if let Some(&smax) = sigma.iter().max_by(|a, b| a.total_cmp(b)) {
        if smax > 1.0 + tolerance {
            return Err(Error::Unphysical { singular_value: smax });
        }
    }
    let defects: Vec<(usize, f64)> = sigma
        .iter()
        .enumerate()
        .filter_map(|(i, &s)| {
            let gap = 1.0 - s * s;
            (gap > 1e-14).then(|| (i, gap.sqrt()))
        })
        .collect();
    let k = defects.len();
    let size = (n + k).max(2 * n - 1);
    let mut u = ComplexMatrix::identity(size, size);
    u.view_mut((0, 0), (n, n)).copy_from(w);
    for (t, &(i, delta)) in defects.iter().enumerate() {
        let col = n + t;
        for r in 0..n {
            u[(r, col)] = p[(r, i)] * delta;
            u[(col, r)] = qt[(i, r)] * delta;
        }
        u[(col, col)] = C64::new(-sigma[i], 0.0);
    }
    Ok(u)
}

/// Conjugate transpose: the same device traversed from outputs to inputs.
pub fn reverse(w: &ComplexMatrix) -> ComplexMatrix {
    w.adjoint()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SetupDoc {
    kind: String,
    d: usize,
    #[serde(rename = "N")]
    particles: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<JsonComplex>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrices: Option<Vec<Vec<Vec<JsonComplex>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    input_locals: Option<Vec<Vec<Vec<JsonComplex>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output_locals: Option<Vec<Vec<Vec<JsonComplex>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    input_occupation: Option<Vec<usize>>,
}

fn matrices_from(docs: &[Vec<Vec<JsonComplex>>]) -> Result<Vec<ComplexMatrix>> {
    docs.iter().map(|m| matrix_from_rows(m)).collect()
}

impl TryFrom<SetupDoc> for SetupSpec {
    type Error = Error;

    fn try_from(doc: SetupDoc) -> Result<Self> {
        let need_matrix = |what: &str| Error::Parse(format!("`{what}` setup requires a `matrix` field"));
        let kind = match doc.kind.as_str() {
            "non_polarizing" => SetupKind::NonPolarizing(matrix_from_rows(doc.matrix.as_ref().ok_or_else(|| need_matrix("non_polarizing"))?)?),
            "general" => SetupKind::General(matrix_from_rows(doc.matrix.as_ref().ok_or_else(|| need_matrix("general"))?)?),
            "polarizing" => SetupKind::Polarizing(matrices_from(
                doc.matrices
                    .as_ref()
                    .ok_or_else(|| Error::Parse("`polarizing` setup requires a `matrices` field".into()))?,
            )?),
            other => {
                return Err(Error::Parse(format!(
                    "unknown setup kind `{other}` (expected non_polarizing, polarizing or general)"
                )))
            }
        };
        Ok(SetupSpec {
            kind,
            d: doc.d,
            particles: doc.particles,
            input_locals: doc.input_locals.as_deref().map(matrices_from).transpose()?,
            output_locals: doc.output_locals.as_deref().map(matrices_from).transpose()?,
            input_occupation: doc.input_occupation.map(ModeOccupation::new),
        })
    }
}

impl From<SetupSpec> for SetupDoc {
    fn from(spec: SetupSpec) -> Self {
        let (kind, matrix, matrices) = match &spec.kind {
            SetupKind::NonPolarizing(v) => ("non_polarizing", Some(matrix_to_rows(v)), None),
            SetupKind::Polarizing(vs) => ("polarizing", None, Some(vs.iter().map(matrix_to_rows).collect())),
            SetupKind::General(w) => ("general", Some(matrix_to_rows(w)), None),
        };
        SetupDoc {
            kind: kind.to_string(),
            d: spec.d,
            particles: spec.particles,
            matrix,
            matrices,
            input_locals: spec.input_locals.as_ref().map(|ls| ls.iter().map(matrix_to_rows).collect()),
            output_locals: spec.output_locals.as_ref().map(|ls| ls.iter().map(matrix_to_rows).collect()),
            input_occupation: spec.input_occupation.map(|o| o.counts().to_vec()),
        }
    }
}
