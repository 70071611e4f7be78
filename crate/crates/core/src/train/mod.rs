//! Contrastive training of Spectral Networks on orbit pairs.

mod adam;
mod dataset;
mod loss;

use std::io::Write;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use adam::{adam_step, AdamState, BETA1, BETA2, EPSILON};
pub use dataset::{gen_dataset, OrbitPair};
pub use loss::{loss, loss_and_grad, LossTerms};

use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::repr::irreps;
use crate::specnet::WeightTensor;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Weight of the orthogonality penalty.
    pub eta: f64,
    pub lr: f64,
    pub steps: usize,
    pub batch: usize,
    pub dataset_size: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    pub fix_identity_slice: bool,
    /// Independent initializations; the one with the lowest objective on the
    /// whole dataset is kept.
    pub restarts: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            eta: 1.0,
            lr: 1e-2,
            steps: 5000,
            batch: 64,
            dataset_size: 4096,
            noise_sigma: 0.0,
            seed: 0,
            fix_identity_slice: true,
            restarts: 3,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [("eta", self.eta), ("lr", self.lr)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Precondition(format!("{name} must be positive, got {v}")));
            }
        }
        if self.batch == 0 || self.dataset_size == 0 || self.restarts == 0 {
            return Err(Error::Precondition("batch, dataset_size and restarts must be positive".into()));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::Precondition(format!("noise_sigma must be nonnegative, got {}", self.noise_sigma)));
        }
        Ok(())
    }
}

/// Architecture of the trained network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSpec {
    /// Spectral order `n`; 1 is the power-spectral network.
    pub order: usize,
    /// Matrix slots sized by the irreps; `None` picks capsules for non-commutative groups.
    pub capsule: Option<bool>,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec { order: 1, capsule: None }
    }
}

impl ModelSpec {
    pub fn power_spectral() -> Self {
        ModelSpec::default()
    }

    pub fn uses_capsules(&self, group: &FiniteGroup) -> bool {
        self.capsule.unwrap_or(!group.is_commutative())
    }

    pub fn slot_dims(&self, group: &FiniteGroup) -> Result<Vec<usize>> {
        if self.uses_capsules(group) {
            Ok(irreps(group)?.dims())
        } else {
            Ok(vec![1; group.order()])
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub step: usize,
    pub invariance: f64,
    pub orthogonality: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub wall_time_s: f64,
    pub timestamp: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub seed: u64,
    pub config: TrainConfig,
    pub model: ModelSpec,
    pub curve: Vec<LossRecord>,
    pub weights: WeightTensor,
    /// Step at which a non-finite loss or gradient stopped the kept run.
    pub diverged_at: Option<usize>,
    /// Index of the kept restart.
    pub restart: usize,
    /// Objective of each attempted restart on the whole dataset.
    pub restart_losses: Vec<Option<f64>>,
    pub metadata: RunMetadata,
}

impl TrainReport {
    pub fn final_loss(&self) -> Option<LossRecord> {
        self.curve.last().copied()
    }

    pub fn write_curve_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["step", "invariance", "orthogonality"])?;
        for r in &self.curve {
            wtr.serialize((r.step, r.invariance, r.orthogonality))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Complex Gaussian weights of scale `1/√|G|`, identity slice forced if requested.
pub fn initial_weights(group: &FiniteGroup, dims: &[usize], rng: &mut impl Rng, fix_identity: bool) -> WeightTensor {
    let scale = 1.0 / (group.order() as f64).sqrt();
    let mut w = WeightTensor::random(rng, group.kind().to_string(), dims, group.order(), scale);
    if fix_identity {
        w.force_identity_slice(group.identity());
    }
    w
}

/// Objective below which a restart counts as converged and no further
/// restarts are tried.
pub const CONVERGED_LOSS: f64 = 1e-8;

struct Run {
    curve: Vec<LossRecord>,
    weights: WeightTensor,
    diverged_at: Option<usize>,
}

fn run_once(
    group: &FiniteGroup,
    config: &TrainConfig,
    model: &ModelSpec,
    dims: &[usize],
    data: &[OrbitPair],
    stream: u64,
) -> Result<Run> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(stream);
    let mut w = initial_weights(group, dims, &mut rng, config.fix_identity_slice);
    let identity = config.fix_identity_slice.then(|| group.identity());
    let mut state = AdamState::new(2 * w.len());
    let mut curve = Vec::with_capacity(config.steps);
    let mut batch = Vec::with_capacity(config.batch);
    for step in 0..config.steps {
        batch.clear();
        batch.extend((0..config.batch).map(|_| &data[rng.random_range(0..data.len())]));
        let (terms, grad) = loss_and_grad(group, &w, &batch, model.order, config.eta)?;
        if !terms.is_finite() {
            return Ok(Run { curve, weights: w, diverged_at: Some(step) });
        }
        curve.push(LossRecord { step, invariance: terms.invariance, orthogonality: terms.orthogonality });
        match adam_step(&mut state, &mut w, &grad, config.lr, identity) {
            Ok(()) => {}
            Err(Error::Diverged { .. }) => return Ok(Run { curve, weights: w, diverged_at: Some(step) }),
            Err(e) => return Err(e),
        }
    }
    Ok(Run { curve, weights: w, diverged_at: None })
}

/// Minibatch Adam on the contrastive objective, with restarts selected by
/// their objective on the full dataset.
pub fn train(group: &FiniteGroup, config: &TrainConfig, model: &ModelSpec) -> Result<TrainReport> {
    config.validate()?;
    let started = Instant::now();
    let dims = model.slot_dims(group)?;
    let data = gen_dataset(group, config.dataset_size, config.noise_sigma, config.seed);
    let mut best: Option<(usize, f64, Run)> = None;
    let mut fallback: Option<(usize, Run)> = None;
    let mut restart_losses = Vec::with_capacity(config.restarts);
    for r in 0..config.restarts {
        let run = run_once(group, config, model, &dims, &data, r as u64 + 1)?;
        if let Some(step) = run.diverged_at {
            log::warn!("restart {r} diverged at step {step}");
            restart_losses.push(None);
            fallback.get_or_insert((r, run));
            continue;
        }
        let objective = loss(group, &run.weights, &data, model.order, config.eta)?.total();
        restart_losses.push(Some(objective));
        if best.as_ref().is_none_or(|(_, b, _)| objective < *b) {
            best = Some((r, objective, run));
        }
        if objective <= CONVERGED_LOSS {
            break;
        }
    }
    let (restart, run) = match (best, fallback) {
        (Some((r, _, run)), _) => (r, run),
        (None, Some(f)) => f,
        (None, None) => unreachable!("at least one restart runs"),
    };
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    Ok(TrainReport {
        seed: config.seed,
        config: config.clone(),
        model: model.clone(),
        curve: run.curve,
        weights: run.weights,
        diverged_at: run.diverged_at,
        restart,
        restart_losses,
        metadata: RunMetadata { wall_time_s: started.elapsed().as_secs_f64(), timestamp },
    })
}
