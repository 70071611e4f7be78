//! Reading a multiplication table off learned weights, and the quantities
//! that certify when that reading is correct.

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{is_latin_square, parse_group_spec, tables_isomorphic, FiniteGroup, MultiplicationTable, Permutation, Signal};
use crate::linalg::CMatrix;
use crate::repr::{fourier_weight_tensor, irreps};
use crate::specnet::{output_distance, Activation, Model, WeightTensor};
use crate::train::{train, ModelSpec, TrainConfig};

pub const IDENTITY_WARN_TOL: f64 = 1e-3;
pub const IDENTITY_PREMISE_TOL: f64 = 1e-9;
pub const DEFAULT_PROBES: usize = 256;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsomorphismVerdict {
    pub isomorphic: bool,
    pub witness: Option<Permutation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub table: MultiplicationTable,
    /// Gap between the best and second-best candidate norm for each `(g, h)`.
    pub margins: Vec<Vec<f64>>,
    /// `‖W^†W − |G|I‖_∞`.
    pub l_defect: f64,
    pub identity_defect: f64,
    pub isomorphic_to_truth: Option<IsomorphismVerdict>,
}

impl RecoveryReport {
    pub fn min_margin(&self) -> f64 {
        self.margins.iter().flatten().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Records whether the recovered table is isomorphic to `truth`.
    pub fn compare(&mut self, truth: &MultiplicationTable) -> Result<bool> {
        if truth.size() != self.table.size() {
            return Err(Error::DimensionMismatch(truth.size(), self.table.size()));
        }
        let witness = if is_latin_square(&self.table) { tables_isomorphic(&self.table, truth)? } else { None };
        let isomorphic = witness.is_some();
        self.isomorphic_to_truth = Some(IsomorphismVerdict { isomorphic, witness });
        Ok(isomorphic)
    }

    pub fn is_isomorphic(&self) -> bool {
        self.isomorphic_to_truth.as_ref().is_some_and(|v| v.isomorphic)
    }
}

/// `‖W(h) ⊙ W(g) − W(l)‖` for every candidate `l`, with slotwise products
/// and the dimension-weighted Frobenius norm.
pub fn candidate_norms(w: &WeightTensor, g: usize, h: usize) -> Vec<f64> {
    let order = w.order();
    let mut sq = vec![0.0; order];
    for s in w.slots() {
        let d = s.dim() as f64;
        let prod = s.block(h) * s.block(g);
        for (l, acc) in sq.iter_mut().enumerate() {
            let target = s.block(l);
            *acc += d * prod.iter().zip(target.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
        }
    }
    sq.into_iter().map(f64::sqrt).collect()
}

/// Argmin table over composed weight blocks. Element 0 is taken as the
/// identity, as in every group constructor here.
///
/// Blocks are composed as `W(h) W(g)` for the entry `gh`: Fourier weights
/// satisfy `W(g) W(h) = W(hg)`, so this order reproduces the group's own table.
pub fn recover_table(w: &WeightTensor) -> RecoveryReport {
    let order = w.order();
    let identity_defect = w.identity_slice_defect(0);
    if identity_defect > IDENTITY_WARN_TOL {
        log::warn!("identity slice deviates from I by {identity_defect:.3e}; recovery may be unreliable");
    }
    let mut entries = vec![vec![0; order]; order];
    let mut margins = vec![vec![0.0; order]; order];
    for g in 0..order {
        for h in 0..order {
            let norms = candidate_norms(w, g, h);
            let mut best = 0;
            for (l, &v) in norms.iter().enumerate() {
                if v < norms[best] {
                    best = l;
                }
            }
            let second = norms
                .iter()
                .enumerate()
                .filter(|&(l, _)| l != best)
                .map(|(_, &v)| v)
                .fold(f64::INFINITY, f64::min);
            entries[g][h] = best;
            margins[g][h] = if second.is_finite() { second - norms[best] } else { 0.0 };
        }
    }
    RecoveryReport {
        table: MultiplicationTable::new(entries),
        margins,
        l_defect: compute_l(w),
        identity_defect,
        isomorphic_to_truth: None,
    }
}

/// Largest entry of `|W^†W − |G|I|` under the weighted Hilbert–Schmidt Gram matrix.
pub fn compute_l(w: &WeightTensor) -> f64 {
    let mut gram = w.gram();
    let order = w.order() as f64;
    for g in 0..w.order() {
        gram[(g, g)] -= Complex64::new(order, 0.0);
    }
    gram.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Checks that exact Fourier weights of a non-commutative group reproduce
/// its table entry for entry.
pub fn composition_self_test() -> Result<()> {
    let group = parse_group_spec("D3")?;
    let w = fourier_weight_tensor(&group, &irreps(&group)?)?;
    let report = recover_table(&w);
    if report.table != group.table() {
        return Err(Error::Precondition("composition convention does not reproduce the D3 table".into()));
    }
    Ok(())
}

/// `√(2(1 − √(1 − (δ/C)^{2/n})))`, defined for `0 ≤ δ < C`.
pub fn mcculloch_bound(delta: f64, c: f64, n: u32) -> Option<f64> {
    if !(c > 0.0) || n == 0 || !(delta >= 0.0) || delta >= c {
        return None;
    }
    let t = (delta / c).powf(2.0 / n as f64);
    Some((2.0 * (1.0 - (1.0 - t).sqrt())).sqrt())
}

/// Right-hand side `√(1/2 − L/|G|) / (√(|G| + L) + 1)`; zero once `L > |G|/2`.
pub fn relaxation_rhs(l: f64, order: usize) -> f64 {
    let n = order as f64;
    (0.5 - l / n).max(0.0).sqrt() / ((n + l).sqrt() + 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PremiseChecks {
    /// `None` when no defect bound exists for the model.
    pub defect_below_bound: Option<bool>,
    pub l_at_most_half_order: bool,
    pub identity_fixed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectBound {
    /// `max_g Δ(φ(g·W), φ(W))` used in the premise.
    pub delta: f64,
    /// The same distance estimated on the probe set; a lower bound of the sup.
    pub delta_probe: f64,
    /// Whether `delta` is the exact uniform distance or the probe estimate.
    pub delta_exact: bool,
    pub l_defect: f64,
    pub bound_rhs: f64,
    /// Upper bound on the unitarity defect at `delta`, if one is known.
    pub omega: Option<f64>,
    pub premises: PremiseChecks,
    /// `Some(true)` iff every premise holds; `None` if undecidable.
    pub satisfied: Option<bool>,
    pub note: Option<String>,
}

fn abs_square_model(model: &Model, w: &WeightTensor) -> bool {
    let scalar = w.dims().iter().all(|&d| d == 1);
    scalar
        && matches!(model, Model::Spectral { order: 1 } | Model::McCulloch { activation: Activation::AbsSquare })
}

/// Exact `sup_{‖x‖=1} | |⟨a, x⟩|² − |⟨b, x⟩|² |` for bilinear pairings `Σ a_g x_g`.
fn rank_one_gap(a: &[Complex64], b: &[Complex64]) -> f64 {
    let n = a.len();
    let m = CMatrix::from_fn(n, n, |r, c| a[r].conj() * a[c] - b[r].conj() * b[c]);
    m.symmetric_eigen().eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

fn unit_probe(rng: &mut impl Rng, n: usize) -> Signal {
    let raw: Vec<Complex64> =
        (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let norm = raw.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    Signal::new(raw.into_iter().map(|v| v / norm).collect())
}

/// Evaluates the three premises of the relaxed recovery guarantee.
///
/// For abs-square neurons on scalar slots `Δ` is computed exactly and the
/// defect bound is applied per slot after rescaling to unit norm; every other
/// model reports the bound as unavailable.
pub fn relaxation_premises(
    group: &FiniteGroup,
    w: &WeightTensor,
    model: &Model,
    probes: usize,
    seed: u64,
) -> Result<DefectBound> {
    if w.order() != group.order() {
        return Err(Error::Shape { expected: group.order(), got: w.order() });
    }
    let l = compute_l(w);
    let rhs = relaxation_rhs(l, group.order());
    let identity_fixed = w.identity_slice_defect(group.identity()) <= IDENTITY_PREMISE_TOL;
    let l_ok = l <= group.order() as f64 / 2.0;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<Signal> = (0..probes).map(|_| unit_probe(&mut rng, group.order())).collect();
    let moved: Vec<WeightTensor> = (0..group.order()).map(|g| w.act(group, g)).collect::<Result<_>>()?;
    let mut delta_probe: f64 = 0.0;
    for x in &xs {
        let base = model.outputs(w, x)?;
        for mw in &moved {
            delta_probe = delta_probe.max(output_distance(&model.outputs(mw, x)?, &base));
        }
    }

    if !abs_square_model(model, w) {
        return Ok(DefectBound {
            delta: delta_probe,
            delta_probe,
            delta_exact: false,
            l_defect: l,
            bound_rhs: rhs,
            omega: None,
            premises: PremiseChecks { defect_below_bound: None, l_at_most_half_order: l_ok, identity_fixed },
            satisfied: None,
            note: Some("bound unavailable: no unitarity defect bound is known for this model".into()),
        });
    }

    let mut delta: f64 = 0.0;
    let mut omega: f64 = 0.0;
    for (i, s) in w.slots().iter().enumerate() {
        let scale = s.frobenius();
        for mw in &moved {
            let gap = rank_one_gap(mw.slot(i).data(), s.data());
            delta = delta.max(gap);
            let local = if scale > 0.0 {
                mcculloch_bound(gap / (scale * scale), 1.0, 2).map_or(f64::INFINITY, |b| scale * b)
            } else {
                0.0
            };
            omega = omega.max(local);
        }
    }
    let below = omega < rhs;
    Ok(DefectBound {
        delta,
        delta_probe,
        delta_exact: true,
        l_defect: l,
        bound_rhs: rhs,
        omega: Some(omega),
        premises: PremiseChecks { defect_below_bound: Some(below), l_at_most_half_order: l_ok, identity_fixed },
        satisfied: Some(below && l_ok && identity_fixed),
        note: None,
    })
}

/// Fraction of runs whose table is isomorphic to `truth`.
pub fn table_accuracy(runs: &[RecoveryReport], truth: &MultiplicationTable) -> Result<f64> {
    if runs.is_empty() {
        return Err(Error::Precondition("table accuracy needs at least one run".into()));
    }
    let mut hits = 0;
    for r in runs {
        if r.table.size() != truth.size() {
            return Err(Error::DimensionMismatch(truth.size(), r.table.size()));
        }
        let mut r = r.clone();
        if r.compare(truth)? {
            hits += 1;
        }
    }
    Ok(hits as f64 / runs.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracyPoint {
    pub sigma: f64,
    pub accuracy: f64,
    pub runs: usize,
}

/// Seed of run `run` at the `sigma_index`-th noise level.
pub fn sweep_seed(base: u64, run: usize, sigma_index: usize) -> u64 {
    base.wrapping_add(run as u64).wrapping_add(1_000_000 * sigma_index as u64)
}

/// `min, min + step, …` up to `max` inclusive (with a small tolerance).
pub fn sigma_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(min >= 0.0 && max >= min && step > 0.0 && min.is_finite() && max.is_finite()) {
        return Err(Error::Precondition(format!("empty noise range [{min}, {max}] with step {step}")));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| min + k as f64 * step).collect())
}

/// Table accuracy over `runs` seeded trainings per noise level. A run that
/// errors or diverges counts as a failed recovery.
pub fn noise_sweep(
    group: &FiniteGroup,
    base: &TrainConfig,
    model: &ModelSpec,
    sigmas: &[f64],
    runs: usize,
) -> Result<Vec<AccuracyPoint>> {
    if runs == 0 || sigmas.is_empty() {
        return Err(Error::Precondition("sweep needs at least one run and one noise level".into()));
    }
    base.validate()?;
    let truth = group.table();
    let jobs: Vec<(usize, usize)> = (0..sigmas.len()).flat_map(|s| (0..runs).map(move |r| (s, r))).collect();
    let outcomes: Vec<bool> = jobs
        .par_iter()
        .map(|&(s, r)| {
            let config = TrainConfig { noise_sigma: sigmas[s], seed: sweep_seed(base.seed, r, s), ..base.clone() };
            match train(group, &config, model) {
                Ok(report) if report.diverged_at.is_none() => {
                    let mut rec = recover_table(&report.weights);
                    rec.compare(&truth).unwrap_or(false)
                }
                Ok(_) => false,
                Err(e) => {
                    log::warn!("sweep run sigma={} run={r} failed: {e}", sigmas[s]);
                    false
                }
            }
        })
        .collect();
    Ok(sigmas
        .iter()
        .enumerate()
        .map(|(s, &sigma)| {
            let hits = outcomes[s * runs..(s + 1) * runs].iter().filter(|&&ok| ok).count();
            AccuracyPoint { sigma, accuracy: hits as f64 / runs as f64, runs }
        })
        .collect())
}

pub fn write_accuracy_csv<W: Write>(out: W, points: &[AccuracyPoint]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["sigma", "accuracy", "runs"])?;
    for p in points {
        wtr.serialize((p.sigma, p.accuracy, p.runs))?;
    }
    wtr.flush()?;
    Ok(())
}
