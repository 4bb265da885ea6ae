//! Dense N-qudit coefficient tensors.
//!
//! Amplitudes are stored row-major with `j_1` the most significant index.
//! Indices passed to the public accessors are 1-based (`1..=d`).

use serde::{Deserialize, Serialize};

use crate::{json, Error, Result, C64};

/// Amplitudes below this magnitude count as absent.
pub const ZERO_AMPLITUDE: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TensorDoc")]
pub struct CoefficientTensor {
    d: usize,
    #[serde(rename = "N")]
    parties: usize,
    #[serde(with = "json::complex_vec")]
    amplitudes: Vec<C64>,
}

#[derive(Deserialize)]
struct TensorDoc {
    d: usize,
    #[serde(rename = "N")]
    parties: usize,
    #[serde(with = "json::complex_vec")]
    amplitudes: Vec<C64>,
}

impl TryFrom<TensorDoc> for CoefficientTensor {
    type Error = Error;

    fn try_from(doc: TensorDoc) -> Result<Self> {
        CoefficientTensor::new(doc.d, doc.parties, doc.amplitudes)
    }
}

impl CoefficientTensor {
    pub fn new(d: usize, parties: usize, amplitudes: Vec<C64>) -> Result<Self> {
        let expected = checked_len(d, parties)?;
        if amplitudes.len() != expected {
            return Err(Error::dim(format!(
                "tensor with d={d}, N={parties} needs {expected} amplitudes, got {}",
                amplitudes.len()
            )));
        }
        Ok(CoefficientTensor { d, parties, amplitudes })
    }

    pub fn zeros(d: usize, parties: usize) -> Self {
        let len = d.pow(parties as u32);
        CoefficientTensor { d, parties, amplitudes: vec![C64::new(0.0, 0.0); len] }
    }

    /// Computational basis state `|j_1, …, j_N⟩`.
    pub fn basis(d: usize, indices: &[usize]) -> Result<Self> {
        let mut t = Self::zeros(d, indices.len());
        let at = t.flat_index(indices)?;
        t.amplitudes[at] = C64::new(1.0, 0.0);
        Ok(t)
    }

    /// Tensor product of single-party vectors, all of length `d`.
    pub fn product(locals: &[Vec<C64>]) -> Result<Self> {
        let d = locals.first().map_or(1, Vec::len);
        if locals.iter().any(|v| v.len() != d) {
            return Err(Error::dim("product factors must share one local dimension"));
        }
        let mut amplitudes = vec![C64::new(1.0, 0.0)];
        for v in locals {
            amplitudes = amplitudes
                .iter()
                .flat_map(|a| v.iter().map(move |b| a * b))
                .collect();
        }
        Ok(CoefficientTensor { d, parties: locals.len(), amplitudes })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of parties `N`.
    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Flat position of the 1-based multi-index `(j_1, …, j_N)`.
    pub fn flat_index(&self, indices: &[usize]) -> Result<usize> {
        if indices.len() != self.parties {
            return Err(Error::dim(format!(
                "expected {} indices, got {}",
                self.parties,
                indices.len()
            )));
        }
        let mut flat = 0;
        for &j in indices {
            if j == 0 || j > self.d {
                return Err(Error::dim(format!("qudit index {j} outside 1..={}", self.d)));
            }
            flat = flat * self.d + (j - 1);
        }
        Ok(flat)
    }

    /// 1-based multi-index of a flat position.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.parties];
        for slot in out.iter_mut().rev() {
            *slot = flat % self.d + 1;
            flat /= self.d;
        }
        out
    }

    pub fn get(&self, indices: &[usize]) -> Result<C64> {
        Ok(self.amplitudes[self.flat_index(indices)?])
    }

    pub fn set(&mut self, indices: &[usize], value: C64) -> Result<()> {
        let at = self.flat_index(indices)?;
        self.amplitudes[at] = value;
        Ok(())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= 1e-12
    }

    /// Unit-norm copy; the zero tensor is returned unchanged.
    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return self.clone();
        }
        self.scaled(C64::new(1.0 / n, 0.0))
    }

    pub fn scaled(&self, factor: C64) -> Self {
        CoefficientTensor {
            d: self.d,
            parties: self.parties,
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.check_same_shape(other)?;
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|⟨a|b⟩|² / (⟨a|a⟩⟨b|b⟩)`; zero when either tensor vanishes.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        let overlap = self.inner(other)?;
        let denom = self.norm_sqr() * other.norm_sqr();
        Ok(if denom == 0.0 { 0.0 } else { overlap.norm_sqr() / denom })
    }

    /// Rotates the global phase so that the first amplitude (in storage
    /// order) with magnitude above [`ZERO_AMPLITUDE`] is real and positive.
    /// Returns the rotated tensor and the phase angle that was applied.
    pub fn canonical_phase(&self) -> (Self, f64) {
        match self.amplitudes.iter().find(|a| a.norm() > ZERO_AMPLITUDE) {
            Some(first) => {
                let angle = -first.arg();
                (self.scaled(C64::from_polar(1.0, angle)), angle)
            }
            None => (self.clone(), 0.0),
        }
    }

    /// Reorders parties: party `k` of the result is party `order[k]` of
    /// `self` (both 1-based).
    pub fn permute_parties(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.parties];
        if order.len() != self.parties
            || order.iter().any(|&p| p == 0 || p > self.parties || std::mem::replace(&mut seen[p - 1], true))
        {
            return Err(Error::InvalidArgument(format!("{order:?} is not a permutation of 1..={}", self.parties)));
        }
        let mut out = Self::zeros(self.d, self.parties);
        for flat in 0..self.len() {
            let idx = out.multi_index(flat);
            let mut src = vec![0; self.parties];
            for (k, &p) in order.iter().enumerate() {
                src[p - 1] = idx[k];
            }
            out.amplitudes[flat] = self.amplitudes[self.flat_index(&src)?];
        }
        Ok(out)
    }

    /// Largest entrywise deviation between two tensors of equal shape.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.d != other.d || self.parties != other.parties {
            return Err(Error::dim(format!(
                "tensor shapes differ: (d={}, N={}) vs (d={}, N={})",
                self.d, self.parties, other.d, other.parties
            )));
        }
        Ok(())
    }
}

fn checked_len(d: usize, parties: usize) -> Result<usize> {
    if d == 0 {
        return Err(Error::dim("local dimension must be positive"));
    }
    d.checked_pow(parties as u32)
        .filter(|&n| n <= 1 << 26)
        .ok_or_else(|| Error::SizeLimit(format!("d^N for d={d}, N={parties}")))
}
