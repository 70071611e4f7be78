use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specnet::WeightTensor;

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// First and second moment estimates over the interleaved real view.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        AdamState { m: vec![0.0; len], v: vec![0.0; len], t: 0 }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }
}

/// One Adam update of `w`; afterwards `W_i(identity)` is reset to `I` when requested.
pub fn adam_step(
    state: &mut AdamState,
    w: &mut WeightTensor,
    grad: &[f64],
    lr: f64,
    identity: Option<usize>,
) -> Result<()> {
    let len = 2 * w.len();
    if grad.len() != len || state.m.len() != len {
        return Err(Error::Shape { expected: len, got: grad.len() });
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Diverged { step: state.t as usize });
    }
    state.t += 1;
    let c1 = 1.0 - BETA1.powi(state.t as i32);
    let c2 = 1.0 - BETA2.powi(state.t as i32);
    let mut params = w.to_real();
    for (k, p) in params.iter_mut().enumerate() {
        let g = grad[k];
        state.m[k] = BETA1 * state.m[k] + (1.0 - BETA1) * g;
        state.v[k] = BETA2 * state.v[k] + (1.0 - BETA2) * g * g;
        let m_hat = state.m[k] / c1;
        let v_hat = state.v[k] / c2;
        *p -= lr * m_hat / (v_hat.sqrt() + EPSILON);
    }
    w.set_from_real(&params);
    if let Some(e) = identity {
        w.force_identity_slice(e);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specnet::WeightSlot;
    use crate::linalg::CMatrix;
    use num_complex::Complex64;

    fn scalar_tensor(v: Complex64) -> WeightTensor {
        WeightTensor::new("C1", vec![WeightSlot::from_blocks(&[CMatrix::from_element(1, 1, v)])]).unwrap()
    }

    #[test]
    fn zero_gradient_leaves_weights_unchanged() {
        let mut w = scalar_tensor(Complex64::new(0.3, -0.2));
        let before = w.clone();
        let mut st = AdamState::new(2);
        adam_step(&mut st, &mut w, &[0.0, 0.0], 0.1, None).unwrap();
        assert_eq!(w, before);
    }

    #[test]
    fn first_step_has_unit_scale() {
        let mut w = scalar_tensor(Complex64::new(1.0, 0.0));
        let mut st = AdamState::new(2);
        let grad: Vec<f64> = w.to_real().iter().map(|p| 2.0 * p).collect();
        adam_step(&mut st, &mut w, &grad, 1e-2, None).unwrap();
        let re = w.to_real()[0];
        assert!((re - (1.0 - 1e-2)).abs() < 1e-9, "{re}");
    }

    #[test]
    fn non_finite_gradient_diverges() {
        let mut w = scalar_tensor(Complex64::new(1.0, 0.0));
        let mut st = AdamState::new(2);
        assert!(matches!(adam_step(&mut st, &mut w, &[f64::NAN, 0.0], 1e-2, None), Err(Error::Diverged { .. })));
        assert!(matches!(adam_step(&mut st, &mut w, &[0.0], 1e-2, None), Err(Error::Shape { .. })));
    }

    #[test]
    fn identity_slice_is_restored() {
        let mut w = WeightTensor::zeros("C2", &[2], 2);
        w.force_identity_slice(0);
        let mut st = AdamState::new(16);
        adam_step(&mut st, &mut w, &[1.0; 16], 0.5, Some(0)).unwrap();
        assert_eq!(w.identity_slice_defect(0), 0.0);
        assert!(w.slot(0).get(0, 0, 1).re < 0.0);
    }
}
