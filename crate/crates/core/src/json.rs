//! JSON representation of complex numbers and matrices as `{"re": .., "im": ..}`
//! objects.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{ComplexMatrix, Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JsonComplex {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<C64> for JsonComplex {
    fn from(z: C64) -> Self {
        JsonComplex { re: z.re, im: z.im }
    }
}

impl From<JsonComplex> for C64 {
    fn from(z: JsonComplex) -> Self {
        C64::new(z.re, z.im)
    }
}

pub fn matrix_to_rows(m: &ComplexMatrix) -> Vec<Vec<JsonComplex>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].into()).collect())
        .collect()
}

pub fn matrix_from_rows(rows: &[Vec<JsonComplex>]) -> Result<ComplexMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err(Error::Parse("matrix must be non-empty".into()));
    }
    if let Some(bad) = rows.iter().position(|r| r.len() != ncols) {
        return Err(Error::Parse(format!(
            "matrix row {} has {} entries, expected {ncols}",
            bad + 1,
            rows[bad].len()
        )));
    }
    Ok(ComplexMatrix::from_fn(nrows, ncols, |i, j| rows[i][j].into()))
}

/// `serde(with = ...)` adapter for a `Vec<C64>`.
pub mod complex_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<JsonComplex> = v.iter().copied().map(Into::into).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<C64>, D::Error> {
        let v = Vec::<JsonComplex>::deserialize(d)?;
        Ok(v.into_iter().map(Into::into).collect())
    }
}

/// `serde(with = ...)` adapter for a single `C64`.
pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
        JsonComplex::from(*z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<C64, D::Error> {
        Ok(JsonComplex::deserialize(d)?.into())
    }
}
