use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::forward::{output_distance, Model};
use super::{WeightSlot, WeightTensor};
use crate::error::{Error, Result};
use crate::group::{FiniteGroup, Signal};
use crate::linalg::{closest_unitary, frobenius, frobenius_diff, random_complex_gaussian, CMatrix};
use crate::repr::IrrepSet;

pub const WITNESS_PROBES: usize = 64;
pub const WITNESS_OUTPUT_TOL: f64 = 1e-8;
pub const WITNESS_NORM_TOL: f64 = 1e-8;
pub const WITNESS_ALIGN_TOL: f64 = 1e-6;

/// Unitary `U` minimising `‖A − B U‖` for matrices with `A^†A`-compatible Gram data.
#[derive(Clone, Debug)]
pub struct Alignment {
    pub unitary: CMatrix,
    pub residual: f64,
    /// Dimension of `ker B`; `U` is unique only when this is zero.
    pub kernel_dim: usize,
}

impl Alignment {
    pub fn is_ambiguous(&self) -> bool {
        self.kernel_dim > 0
    }
}

/// Solves `A = B U` for unitary `U`, given `A A^† ≈ B B^†` up to `tol`.
pub fn align_unitary(a: &CMatrix, b: &CMatrix, tol: f64) -> Result<Alignment> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(a.nrows() * a.ncols(), b.nrows() * b.ncols()));
    }
    let gram_gap = frobenius_diff(&(a * a.adjoint()), &(b * b.adjoint()));
    if gram_gap > tol {
        return Err(Error::Precondition(format!("A A^† and B B^† differ by {gram_gap:.3e}")));
    }
    let svd = b.clone().svd(false, false);
    let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = 1e-10 * top.max(1.0);
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    let kernel_dim = b.ncols() - rank;
    if kernel_dim > 0 {
        log::warn!("alignment is not unique: B has a {kernel_dim}-dimensional kernel");
    }
    let unitary = closest_unitary(&(b.adjoint() * a));
    let residual = frobenius_diff(a, &(b * &unitary));
    Ok(Alignment { unitary, residual, kernel_dim })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum WitnessOutcome {
    /// `W_i = W'_i U_i` for every slot.
    Aligned {
        #[serde(skip)]
        unitaries: Vec<CMatrix>,
        residuals: Vec<f64>,
        kernel_dims: Vec<usize>,
    },
    Failed { reason: String, max_output_gap: f64 },
}

impl WitnessOutcome {
    pub fn is_aligned(&self) -> bool {
        matches!(self, WitnessOutcome::Aligned { .. })
    }
}

fn stacked(slot: &WeightSlot) -> CMatrix {
    let d = slot.dim();
    let mut out = CMatrix::zeros(d * slot.order(), d);
    for g in 0..slot.order() {
        out.view_mut((g * d, 0), (d, d)).copy_from(&slot.block(g));
    }
    out
}

fn probe(rng: &mut impl Rng, n: usize) -> Signal {
    Signal::new((0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
}

/// Checks that two weight tensors with the same outputs differ by a unitary
/// factor in each slot, and returns those factors.
pub fn unitary_symmetry_witness(model: &Model, w: &WeightTensor, w2: &WeightTensor, seed: u64) -> Result<WitnessOutcome> {
    if w.dims() != w2.dims() || w.order() != w2.order() {
        return Err(Error::Shape { expected: w.len(), got: w2.len() });
    }
    for (i, (a, b)) in w.slots().iter().zip(w2.slots()).enumerate() {
        let (na, nb) = (a.frobenius(), b.frobenius());
        if (na - nb).abs() > WITNESS_NORM_TOL * na.max(1.0) {
            return Err(Error::Precondition(format!("slot {i} norms differ: {na} vs {nb}")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gap: f64 = 0.0;
    for _ in 0..WITNESS_PROBES {
        let x = probe(&mut rng, w.order());
        let (p, q) = (model.outputs(w, &x)?, model.outputs(w2, &x)?);
        let scale = p.iter().map(frobenius).fold(1.0, f64::max);
        gap = gap.max(output_distance(&p, &q) / scale);
    }
    if gap > WITNESS_OUTPUT_TOL {
        return Ok(WitnessOutcome::Failed { reason: "outputs differ on probes".into(), max_output_gap: gap });
    }
    let mut unitaries = Vec::new();
    let mut residuals = Vec::new();
    let mut kernel_dims = Vec::new();
    for (a, b) in w.slots().iter().zip(w2.slots()) {
        let al = align_unitary(&stacked(a), &stacked(b), f64::INFINITY)?;
        let worst = (0..a.order())
            .map(|g| frobenius_diff(&a.block(g), &(b.block(g) * &al.unitary)))
            .fold(0.0, f64::max);
        if worst > WITNESS_ALIGN_TOL * a.frobenius().max(1.0) {
            return Ok(WitnessOutcome::Failed {
                reason: format!("slot alignment residual {worst:.3e}"),
                max_output_gap: gap,
            });
        }
        unitaries.push(al.unitary);
        residuals.push(worst);
        kernel_dims.push(al.kernel_dim);
    }
    Ok(WitnessOutcome::Aligned { unitaries, residuals, kernel_dims })
}

/// How closely a slot matches a conjugated copy of an irrep.
#[derive(Clone, Debug)]
pub struct IrrepAlignment {
    pub irrep: usize,
    /// `Q` with `W(g) ≈ W(1) Q ρ(g)^† Q^†`.
    pub intertwiner: CMatrix,
    /// `‖W − W(1) Q ρ^† Q^†‖ / ‖W‖` over all group elements.
    pub relative_residual: f64,
}

fn conjugated_residual(slot: &WeightSlot, base: &CMatrix, q: &CMatrix, irreps: &IrrepSet, j: usize) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for g in 0..slot.order() {
        let target = base * q * irreps.get(j).at(g).adjoint() * q.adjoint();
        num += frobenius_diff(&slot.block(g), &target).powi(2);
        den += frobenius(&slot.block(g)).powi(2);
    }
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}

/// Best match of a slot against the irreps of its dimension.
pub fn irrep_alignment(group: &FiniteGroup, slot: &WeightSlot, irreps: &IrrepSet, seed: u64) -> Option<IrrepAlignment> {
    let d = slot.dim();
    let e = group.identity();
    let base = slot.block(e);
    let base_inv = base.clone().try_inverse()?;
    let sigma: Vec<CMatrix> = (0..group.order()).map(|g| (&base_inv * slot.block(g)).adjoint()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<IrrepAlignment> = None;
    for (j, irrep) in irreps.iter().enumerate() {
        if irrep.dim != d {
            continue;
        }
        for _ in 0..4 {
            let m = random_complex_gaussian(&mut rng, d, d, 1.0);
            let mut t = CMatrix::zeros(d, d);
            for (g, s) in sigma.iter().enumerate() {
                t += s * &m * irrep.at(g).adjoint();
            }
            if frobenius(&t) < 1e-12 {
                continue;
            }
            let q = closest_unitary(&t);
            let r = conjugated_residual(slot, &base, &q, irreps, j);
            if best.as_ref().is_none_or(|b| r < b.relative_residual) {
                best = Some(IrrepAlignment { irrep: j, intertwiner: q, relative_residual: r });
            }
        }
    }
    best
}
