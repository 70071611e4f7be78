use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{WeightSlot, WeightTensor};
use crate::error::{Error, Result};
use crate::group::{FiniteGroup, Signal};
use crate::linalg::{frobenius_diff, kron_power, CMatrix};

/// Activation applied to the complex pairing `Wx` of a McCulloch–Pitts neuron.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Activation {
    /// `|z|²`, the commutative power-spectral unit.
    AbsSquare,
    /// `1 / (1 + e^{-|z|}) + bias`.
    SigmoidAbs { bias: f64 },
    /// `LeakyReLU(|z| + bias)` with the given negative slope.
    LeakyReluAbs { slope: f64, bias: f64 },
}

impl Activation {
    pub fn eval(&self, z: Complex64) -> f64 {
        match *self {
            Activation::AbsSquare => z.norm_sqr(),
            Activation::SigmoidAbs { bias } => 1.0 / (1.0 + (-z.norm()).exp()) + bias,
            Activation::LeakyReluAbs { slope, bias } => {
                let t = z.norm() + bias;
                if t >= 0.0 {
                    t
                } else {
                    slope * t
                }
            }
        }
    }

    /// Constants `(C, n)` with `|σ(0) − σ(z)| ≥ C |z|^n` for all `z`, when known.
    pub fn coercivity(&self) -> Option<(f64, u32)> {
        match self {
            Activation::AbsSquare => Some((1.0, 2)),
            _ => None,
        }
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "abs_square" => Ok(Activation::AbsSquare),
            "sigmoid_abs" => Ok(Activation::SigmoidAbs { bias: 0.0 }),
            "leaky_relu_abs" => Ok(Activation::LeakyReluAbs { slope: 0.01, bias: -0.5 }),
            other => Err(Error::UnknownActivation(other.to_string())),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::AbsSquare => "abs_square",
            Activation::SigmoidAbs { .. } => "sigmoid_abs",
            Activation::LeakyReluAbs { .. } => "leaky_relu_abs",
        })
    }
}

/// A parametric model `φ(W, ·)` built on a [`WeightTensor`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    /// Order-`n` Spectral Network with constant multi-index `(i, …, i)` per slot.
    Spectral { order: usize },
    /// Commutative Spectral Network for one multi-index of 1-dim slots.
    Commutative { multi_index: Vec<usize> },
    /// One McCulloch–Pitts neuron per 1-dim slot.
    McCulloch { activation: Activation },
}

impl Model {
    pub fn power_spectral() -> Self {
        Model::Spectral { order: 1 }
    }

    /// All outputs of the model, one matrix per unit.
    pub fn outputs(&self, w: &WeightTensor, x: &Signal) -> Result<Vec<CMatrix>> {
        w.check_signal(x)?;
        match self {
            Model::Spectral { order } => (0..w.num_slots()).map(|i| forward_nc(w, i, *order, x)).collect(),
            Model::Commutative { multi_index } => {
                Ok(vec![CMatrix::from_element(1, 1, forward_commutative(w, multi_index, x)?)])
            }
            Model::McCulloch { activation } => w
                .slots()
                .iter()
                .map(|s| {
                    mcculloch_forward(s, x, *activation).map(|v| CMatrix::from_element(1, 1, Complex64::new(v, 0.0)))
                })
                .collect(),
        }
    }
}

/// Largest Frobenius distance between corresponding outputs.
pub fn output_distance(a: &[CMatrix], b: &[CMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| frobenius_diff(x, y)).fold(0.0, f64::max)
}

/// `Π_k (W_{i_k} x) · conj((W_{i_1} ⊙ ⋯ ⊙ W_{i_n}) x)` for scalar slots.
pub fn forward_commutative(w: &WeightTensor, multi_index: &[usize], x: &Signal) -> Result<Complex64> {
    w.check_signal(x)?;
    if multi_index.is_empty() {
        return Err(Error::Precondition("multi-index must be nonempty".into()));
    }
    for &i in multi_index {
        if i >= w.num_slots() {
            return Err(Error::Shape { expected: w.num_slots(), got: i });
        }
        if w.slot(i).dim() != 1 {
            return Err(Error::Shape { expected: 1, got: w.slot(i).dim() });
        }
    }
    let xs = x.values();
    let pairing = |i: usize| -> Complex64 { w.slot(i).data().iter().zip(xs).map(|(a, b)| a * b).sum() };
    let head: Complex64 = multi_index.iter().map(|&i| pairing(i)).product();
    let hadamard: Complex64 = (0..w.order())
        .map(|g| multi_index.iter().map(|&i| w.slot(i).get(0, 0, g)).product::<Complex64>() * xs[g])
        .sum();
    Ok(head * hadamard.conj())
}

/// `W_i(x)^{⊗n} · Σ_g (W_i(g)^†)^{⊗n} conj(x_g)`.
pub fn forward_nc(w: &WeightTensor, slot: usize, n: usize, x: &Signal) -> Result<CMatrix> {
    w.check_signal(x)?;
    if slot >= w.num_slots() {
        return Err(Error::Shape { expected: w.num_slots(), got: slot });
    }
    if n == 0 {
        return Err(Error::Precondition("spectral order must be at least 1".into()));
    }
    let s = w.slot(slot);
    let a = s.apply(x.values());
    if n == 1 {
        let adj = a.adjoint();
        return Ok(a * adj);
    }
    Ok(kron_power(&a, n) * conj_tensor_sum(s, n, x.values()))
}

pub(crate) fn conj_tensor_sum(s: &WeightSlot, n: usize, x: &[Complex64]) -> CMatrix {
    let d = s.dim().pow(n as u32);
    let mut acc = CMatrix::zeros(d, d);
    for (g, v) in x.iter().enumerate() {
        if *v != Complex64::new(0.0, 0.0) {
            acc += kron_power(&s.block(g).adjoint(), n) * v.conj();
        }
    }
    acc
}

/// `σ(Wx)` for a single scalar slot.
pub fn mcculloch_forward(w: &WeightSlot, x: &Signal, activation: Activation) -> Result<f64> {
    if w.dim() != 1 {
        return Err(Error::Shape { expected: 1, got: w.dim() });
    }
    if x.len() != w.order() {
        return Err(Error::Shape { expected: w.order(), got: x.len() });
    }
    let z: Complex64 = w.data().iter().zip(x.values()).map(|(a, b)| a * b).sum();
    Ok(activation.eval(z))
}

/// `max ‖φ(W, g·x) − φ(g⁻¹·W, x)‖`; zero for models with the adjunction property.
pub fn adjunction_check(model: &Model, group: &FiniteGroup, w: &WeightTensor, x: &Signal, g: usize) -> Result<f64> {
    let moved_x = group.act(g, x)?;
    let moved_w = w.act(group, group.inv(g))?;
    Ok(output_distance(&model.outputs(w, &moved_x)?, &model.outputs(&moved_w, x)?))
}
