use num_complex::Complex64;
use rand::Rng;
use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::group::{FiniteGroup, Signal};
use crate::linalg::{random_complex_gaussian, CMatrix, ZERO};

/// One slot `W_i ∈ End(V_i)^{⊕G}`, stored as a `dim x dim x order` array
/// in row-major order (group index fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSlot {
    dim: usize,
    order: usize,
    data: Vec<Complex64>,
}

impl WeightSlot {
    pub fn zeros(dim: usize, order: usize) -> Self {
        WeightSlot { dim, order, data: vec![ZERO; dim * dim * order] }
    }

    pub fn from_blocks(blocks: &[CMatrix]) -> Self {
        let order = blocks.len();
        let dim = blocks.first().map_or(0, |b| b.nrows());
        let mut slot = WeightSlot::zeros(dim, order);
        for (g, b) in blocks.iter().enumerate() {
            slot.set_block(g, b);
        }
        slot
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, g: usize) -> Complex64 {
        self.data[(a * self.dim + b) * self.order + g]
    }

    #[inline]
    pub fn get_mut(&mut self, a: usize, b: usize, g: usize) -> &mut Complex64 {
        &mut self.data[(a * self.dim + b) * self.order + g]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// The block `W_i(g)`.
    pub fn block(&self, g: usize) -> CMatrix {
        CMatrix::from_fn(self.dim, self.dim, |a, b| self.get(a, b, g))
    }

    pub fn set_block(&mut self, g: usize, m: &CMatrix) {
        assert_eq!(m.shape(), (self.dim, self.dim));
        for a in 0..self.dim {
            for b in 0..self.dim {
                *self.get_mut(a, b, g) = m[(a, b)];
            }
        }
    }

    /// `W_i(x) = sum_g W_i(g) x_g`.
    pub fn apply(&self, x: &[Complex64]) -> CMatrix {
        CMatrix::from_fn(self.dim, self.dim, |a, b| {
            let row = &self.data[(a * self.dim + b) * self.order..][..self.order];
            row.iter().zip(x).map(|(w, v)| w * v).sum()
        })
    }

    /// `sum_g W_i(g)^† conj(x_g)`, i.e. `W_i(x)^†`.
    pub fn apply_adjoint_conj(&self, x: &[Complex64]) -> CMatrix {
        self.apply(x).adjoint()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }
}

/// Weights `W = ⊕_i W_i` viewed as a linear map `C[G] -> ⊕_i End(V_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightTensor {
    group_spec: String,
    order: usize,
    slots: Vec<WeightSlot>,
}

impl WeightTensor {
    pub fn new(group_spec: impl Into<String>, slots: Vec<WeightSlot>) -> Result<Self> {
        let order = slots.first().map_or(0, WeightSlot::order);
        if order == 0 {
            return Err(Error::Precondition("weight tensor needs at least one nonempty slot".into()));
        }
        for s in &slots {
            if s.order != order {
                return Err(Error::Shape { expected: order, got: s.order });
            }
        }
        Ok(WeightTensor { group_spec: group_spec.into(), order, slots })
    }

    pub fn zeros(group_spec: impl Into<String>, dims: &[usize], order: usize) -> Self {
        WeightTensor {
            group_spec: group_spec.into(),
            order,
            slots: dims.iter().map(|&d| WeightSlot::zeros(d, order)).collect(),
        }
    }

    /// Complex Gaussian entries scaled by `scale`.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        group_spec: impl Into<String>,
        dims: &[usize],
        order: usize,
        scale: f64,
    ) -> Self {
        let slots = dims
            .iter()
            .map(|&d| {
                let blocks: Vec<CMatrix> =
                    (0..order).map(|_| random_complex_gaussian(rng, d, d, scale)).collect();
                WeightSlot::from_blocks(&blocks)
            })
            .collect();
        WeightTensor { group_spec: group_spec.into(), order, slots }
    }

    pub fn group_spec(&self) -> &str {
        &self.group_spec
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn slots(&self) -> &[WeightSlot] {
        &self.slots
    }

    pub fn slots_mut(&mut self) -> &mut [WeightSlot] {
        &mut self.slots
    }

    pub fn slot(&self, i: usize) -> &WeightSlot {
        &self.slots[i]
    }

    pub fn dims(&self) -> Vec<usize> {
        self.slots.iter().map(WeightSlot::dim).collect()
    }

    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }

    /// Number of complex parameters.
    pub fn len(&self) -> usize {
        self.slots.iter().map(|s| s.data.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Per-element blocks `W(g) = (W_i(g))_i`.
    pub fn element(&self, g: usize) -> Vec<CMatrix> {
        self.slots.iter().map(|s| s.block(g)).collect()
    }

    pub fn check_signal(&self, x: &Signal) -> Result<()> {
        if x.len() != self.order {
            return Err(Error::Shape { expected: self.order, got: x.len() });
        }
        Ok(())
    }

    /// Gram matrix `⟨W(g), W(h)⟩ = sum_i d_i tr(W_i(g)^† W_i(h))`.
    pub fn gram(&self) -> CMatrix {
        let n = self.order;
        let mut gram = CMatrix::zeros(n, n);
        for s in &self.slots {
            let weight = s.dim as f64;
            for ab in 0..s.dim * s.dim {
                let row = &s.data[ab * n..][..n];
                for g in 0..n {
                    let wg = row[g].conj() * weight;
                    for h in 0..n {
                        gram[(g, h)] += wg * row[h];
                    }
                }
            }
        }
        gram
    }

    /// `(g . W)_i(h) = W_i(g^-1 h)`.
    pub fn act(&self, group: &FiniteGroup, g: usize) -> Result<WeightTensor> {
        if group.order() != self.order {
            return Err(Error::Shape { expected: self.order, got: group.order() });
        }
        group.check_element(g)?;
        let gi = group.inv(g);
        let mut out = self.clone();
        for (src, dst) in self.slots.iter().zip(out.slots.iter_mut()) {
            for ab in 0..src.dim * src.dim {
                for h in 0..self.order {
                    dst.data[ab * self.order + h] = src.data[ab * self.order + group.mul(gi, h)];
                }
            }
        }
        Ok(out)
    }

    /// Interleaved `[re, im, re, im, ...]` view over all slots.
    pub fn to_real(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.len());
        for s in &self.slots {
            for v in &s.data {
                out.push(v.re);
                out.push(v.im);
            }
        }
        out
    }

    pub fn set_from_real(&mut self, real: &[f64]) {
        assert_eq!(real.len(), 2 * self.len());
        let mut k = 0;
        for s in &mut self.slots {
            for v in &mut s.data {
                *v = Complex64::new(real[k], real[k + 1]);
                k += 2;
            }
        }
    }

    /// Sets `W_i(identity) = I` in every slot.
    pub fn force_identity_slice(&mut self, identity: usize) {
        for s in &mut self.slots {
            for a in 0..s.dim {
                for b in 0..s.dim {
                    *s.get_mut(a, b, identity) = if a == b { Complex64::new(1.0, 0.0) } else { ZERO };
                }
            }
        }
    }

    /// Largest entrywise deviation of `W_i(identity)` from `I`.
    pub fn identity_slice_defect(&self, identity: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for s in &self.slots {
            for a in 0..s.dim {
                for b in 0..s.dim {
                    let target = if a == b { 1.0 } else { 0.0 };
                    worst = worst.max((s.get(a, b, identity) - target).norm());
                }
            }
        }
        worst
    }

    pub fn scaled(&self, factor: f64) -> WeightTensor {
        let mut out = self.clone();
        for s in &mut out.slots {
            for v in &mut s.data {
                *v *= factor;
            }
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct RawSlot {
    dim: usize,
    #[serde(with = "crate::io::complex_pairs")]
    data: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct RawTensor {
    group_spec: String,
    slots: Vec<RawSlot>,
}

impl Serialize for WeightTensor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawTensor {
            group_spec: self.group_spec.clone(),
            slots: self.slots.iter().map(|sl| RawSlot { dim: sl.dim, data: sl.data.clone() }).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for WeightTensor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawTensor::deserialize(d)?;
        let slots = raw
            .slots
            .into_iter()
            .map(|r| {
                let dd = r.dim * r.dim;
                if dd == 0 || r.data.len() % dd != 0 {
                    return Err(D::Error::custom(format!(
                        "slot of dim {} has {} entries, not a multiple of {dd}",
                        r.dim,
                        r.data.len()
                    )));
                }
                Ok(WeightSlot { dim: r.dim, order: r.data.len() / dd, data: r.data })
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        WeightTensor::new(raw.group_spec, slots).map_err(D::Error::custom)
    }
}
