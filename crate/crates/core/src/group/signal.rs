use std::ops::Index;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A complex signal indexed by group elements.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Signal(Vec<Complex64>);

impl Signal {
    pub fn new(values: Vec<Complex64>) -> Self {
        Signal(values)
    }

    pub fn zeros(n: usize) -> Self {
        Signal(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn delta(n: usize, g: usize) -> Self {
        let mut s = Signal::zeros(n);
        s.0[g] = Complex64::new(1.0, 0.0);
        s
    }

    pub fn from_real(values: &[f64]) -> Self {
        Signal(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn conj(&self) -> Signal {
        Signal(self.0.iter().map(Complex64::conj).collect())
    }

    pub fn scaled(&self, s: f64) -> Signal {
        Signal(self.0.iter().map(|v| v * s).collect())
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.0.iter().all(|v| v.im.abs() <= tol)
    }

    pub fn max_abs_diff(&self, other: &Signal) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

impl Index<usize> for Signal {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl From<Vec<Complex64>> for Signal {
    fn from(v: Vec<Complex64>) -> Self {
        Signal(v)
    }
}

impl Serialize for Signal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        crate::io::complex_pairs::serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for Signal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        crate::io::complex_pairs::deserialize(d).map(Signal)
    }
}
