//! Shared JSON/CSV encodings: complex numbers are `[re, im]` pairs and
//! matrices are flattened row-major.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::Result;

pub mod complex_pairs {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Entry {
        Pair([f64; 2]),
        Real(f64),
    }

    pub fn serialize<S: Serializer>(values: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(values.iter().map(|v| [v.re, v.im]))
    }

    /// Accepts `[re, im]` pairs or bare reals.
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let raw = Vec::<Entry>::deserialize(d)?;
        Ok(raw
            .into_iter()
            .map(|e| match e {
                Entry::Pair([re, im]) => Complex64::new(re, im),
                Entry::Real(re) => Complex64::new(re, 0.0),
            })
            .collect())
    }
}

/// Serde helper for a square complex matrix stored as `{dim, data}`.
pub mod square_matrix {
    use nalgebra::DMatrix;
    use num_complex::Complex64;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Raw {
        dim: usize,
        #[serde(with = "super::complex_pairs")]
        data: Vec<Complex64>,
    }

    pub fn serialize<S: Serializer>(m: &DMatrix<Complex64>, s: S) -> Result<S::Ok, S::Error> {
        Raw { dim: m.nrows(), data: super::row_major(m) }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<Complex64>, D::Error> {
        let raw = Raw::deserialize(d)?;
        if raw.data.len() != raw.dim * raw.dim {
            return Err(D::Error::custom(format!(
                "matrix of dim {} needs {} entries, got {}",
                raw.dim,
                raw.dim * raw.dim,
                raw.data.len()
            )));
        }
        Ok(DMatrix::from_row_slice(raw.dim, raw.dim, &raw.data))
    }
}

pub fn row_major(m: &nalgebra::DMatrix<num_complex::Complex64>) -> Vec<num_complex::Complex64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
