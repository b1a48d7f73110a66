//! Numeric ground truth for the structural verdicts: exact simulation of
//! the fault-augmented cascade and generic-rank probing of the
//! fault-to-output transfer matrix under random weight draws. A scenario is
//! structurally diagnosable exactly when that matrix generically has full
//! column rank, so sampled ranks cross-check the linking computations.
//!
//! Draws are seeded and the per-trial seed schedule is derived up front, so
//! results are reproducible and identical between the sequential and
//! parallel trial runners.

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{
    block_transfer, compose_mcn, fault_transfer, fir_realization, plant_realization, StateSpace,
    TransferError,
};
use crate::fdi::{fdi_solvable_mlambda, FaultScenario, FdiError, FdiReport};
use crate::model::{Mcn, Side};
use crate::structured::BuildError;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(transparent)]
    Fdi(#[from] FdiError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Transfer(#[from] TransferError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("no well-conditioned draw after {attempts} attempts")]
    IllConditioned { attempts: usize },
}

/// Shape of an injected failure signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalShape {
    Impulse,
    Step,
    Sinusoid,
    Random,
}

/// A failure signal: zero before `onset`, then the chosen shape scaled by
/// `amplitude`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FaultSignalSpec {
    pub shape: SignalShape,
    pub amplitude: f64,
    pub onset: usize,
}

impl FaultSignalSpec {
    pub fn new(shape: SignalShape, amplitude: f64, onset: usize) -> Result<Self, OracleError> {
        if amplitude == 0.0 && shape != SignalShape::Random {
            return Err(OracleError::Dimension("amplitude must be non-zero".into()));
        }
        Ok(FaultSignalSpec { shape, amplitude, onset })
    }

    fn value_at(&self, frame: usize, rng: &mut StdRng) -> f64 {
        if frame < self.onset {
            return 0.0;
        }
        let k = (frame - self.onset) as f64;
        match self.shape {
            SignalShape::Impulse => {
                if frame == self.onset {
                    self.amplitude
                } else {
                    0.0
                }
            }
            SignalShape::Step => self.amplitude,
            SignalShape::Sinusoid => self.amplitude * (0.7 * k).sin(),
            SignalShape::Random => rng.random_range(-self.amplitude.abs()..=self.amplitude.abs()),
        }
    }
}

/// Frame-indexed record of a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub horizon: usize,
    pub fault_labels: Vec<String>,
    pub u: Vec<Vec<f64>>,
    pub faults: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    /// Tab-delimited dump, one frame per row, with a label header. Pinned
    /// in `docs/formats.md`.
    pub fn to_delimited(&self) -> String {
        let mut header = vec!["frame".to_string()];
        header.extend((1..=self.u.first().map_or(0, Vec::len)).map(|i| format!("u{i}")));
        header.extend(self.fault_labels.iter().cloned());
        header.extend((1..=self.y.first().map_or(0, Vec::len)).map(|i| format!("y{i}")));
        header.extend((1..=self.states.first().map_or(0, Vec::len)).map(|i| format!("x{i}")));
        let mut out = header.join("\t");
        out.push('\n');
        for k in 0..self.horizon {
            let mut row = vec![k.to_string()];
            let cells = self.u[k]
                .iter()
                .chain(&self.faults[k])
                .chain(&self.y[k])
                .chain(&self.states[k]);
            row.extend(cells.map(|v| format!("{v}")));
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        out
    }
}

/// Exact linear recursion `x(k+1) = A x + B u + F f`, `y(k) = C x`, from
/// zero initial state. Inputs shorter than the horizon are zero-padded;
/// `seed` drives random-shaped fault signals only.
pub fn simulate(
    system: &StateSpace,
    u: &[Vec<f64>],
    fault_specs: &[FaultSignalSpec],
    horizon: usize,
    seed: u64,
) -> Result<Trajectory, OracleError> {
    let m = system.input_dim();
    if fault_specs.len() != system.fault_dim() {
        return Err(OracleError::Dimension(format!(
            "{} fault specs for {} fault inputs",
            fault_specs.len(),
            system.fault_dim()
        )));
    }
    for (k, row) in u.iter().enumerate() {
        if row.len() != m {
            return Err(OracleError::Dimension(format!(
                "input frame {k} has {} entries, expected {m}",
                row.len()
            )));
        }
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let mut x = DVector::zeros(system.state_dim());
    let mut trajectory = Trajectory {
        horizon,
        fault_labels: system.fault_labels.clone(),
        u: Vec::with_capacity(horizon),
        faults: Vec::with_capacity(horizon),
        y: Vec::with_capacity(horizon),
        states: Vec::with_capacity(horizon),
    };
    for k in 0..horizon {
        let u_k = DVector::from_fn(m, |i, _| u.get(k).map_or(0.0, |row| row[i]));
        let f_k =
            DVector::from_fn(fault_specs.len(), |j, _| fault_specs[j].value_at(k, &mut rng));
        let y_k = &system.c * &x;
        trajectory.u.push(u_k.iter().copied().collect());
        trajectory.faults.push(f_k.iter().copied().collect());
        trajectory.y.push(y_k.iter().copied().collect());
        trajectory.states.push(x.iter().copied().collect());
        x = &system.a * &x + &system.b * &u_k;
        if let Some(f) = &system.f {
            x += f * &f_k;
        }
    }
    Ok(trajectory)
}

/// Realizes the full cascade with one fault input per failure signal of the
/// scenario. Fault labels follow the structured-graph naming, so a merged
/// signal spans every component its node routes.
pub fn compose_with_faults(mcn: &Mcn, scenario: &FaultScenario) -> Result<StateSpace, OracleError> {
    let mut blocks = Vec::new();
    for side in [Side::Controllability, Side::Observability] {
        let mut side_blocks = Vec::new();
        for i in 0..mcn.schedules(side).len() {
            let sub = mcn.induced_subgraph(side, i);
            let fir = block_transfer(
                &sub,
                &mcn.weights(side)[i],
                &mcn.schedules(side)[i],
                &sub.source.clone(),
                &sub.sink.clone(),
            )?;
            let mut faults = Vec::new();
            for node in scenario.nodes.iter().filter(|f| f.side == side) {
                if !mcn.phi(side, &node.node).map_err(FdiError::from)?.contains(&i) {
                    continue;
                }
                let channel = fault_transfer(
                    &sub,
                    &mcn.weights(side)[i],
                    &mcn.schedules(side)[i],
                    &node.node,
                )?;
                let label = if scenario.assumption1 {
                    format!("f:{}:{}", side.tag(), node.node)
                } else {
                    format!("f:{}:{}:{}", side.tag(), node.node, i + 1)
                };
                faults.push((label, channel));
            }
            side_blocks.push(fir_realization(&fir, &faults)?);
        }
        blocks.push(side_blocks);
    }
    let o_blocks = blocks.pop().expect("two sides");
    let r_blocks = blocks.pop().expect("two sides");
    let plant_d = plant_realization(&mcn.plant, mcn.frame_duration())?;
    Ok(compose_mcn(&r_blocks, &plant_d, &o_blocks)?)
}

/// Options for the randomized rank probe.
#[derive(Debug, Clone)]
pub struct RankOptions {
    pub trials: usize,
    /// Relative singular-value threshold.
    pub tol: f64,
    pub seed: u64,
    /// Attempts per trial before giving up on ill-conditioned draws.
    pub retry_cap: usize,
}

impl RankOptions {
    pub fn seeded(seed: u64) -> Self {
        RankOptions { trials: 5, tol: 1e-8, seed, retry_cap: 20 }
    }
}

/// Rank samples of the fault-to-output transfer matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankOutcome {
    pub seed: u64,
    pub per_trial: Vec<usize>,
    /// Most frequent sampled rank (ties break to the smaller value).
    pub modal: usize,
}

fn modal_rank(per_trial: &[usize]) -> usize {
    let mut best = (0usize, 0usize);
    for &value in per_trial {
        let count = per_trial.iter().filter(|&&v| v == value).count();
        if count > best.1 || (count == best.1 && value < best.0) {
            best = (value, count);
        }
    }
    best.0
}

fn rank_one_trial(mcn: &Mcn, scenario: &FaultScenario, tol: f64, seed: u64, retry_cap: usize) -> Result<usize, OracleError> {
    let mut rng = StdRng::seed_from_u64(seed);
    for _ in 0..retry_cap {
        // Fresh generic weights: magnitudes in [0.5, 2], random signs.
        let redrawn = mcn.with_weights(|_, _, _| {
            let mag: f64 = rng.random_range(0.5..2.0);
            if rng.random_bool(0.5) {
                mag
            } else {
                -mag
            }
        });
        let composed = match compose_with_faults(&redrawn, scenario) {
            Ok(sys) => sys,
            // A cancelling draw is measure-zero; redraw.
            Err(OracleError::Transfer(TransferError::DegenerateCancellation)) => continue,
            Err(other) => return Err(other),
        };
        // Real evaluation point beyond the spectral radius.
        let radius = composed
            .a
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0_f64, f64::max)
            .max(1.0);
        let z = radius * rng.random_range(1.5..3.0);
        let transfer = match composed.fault_transfer_at(z) {
            Ok(t) => t,
            Err(TransferError::SingularResolvent { .. }) => continue,
            Err(other) => return Err(other.into()),
        };
        if transfer.iter().any(|v| !v.is_finite()) {
            continue;
        }
        let singular = transfer.svd(false, false).singular_values;
        let largest = singular.iter().copied().fold(0.0_f64, f64::max);
        let rank = if largest == 0.0 {
            0
        } else {
            singular.iter().filter(|&&s| s > tol * largest).count()
        };
        return Ok(rank);
    }
    Err(OracleError::IllConditioned { attempts: retry_cap })
}

fn trial_seeds(options: &RankOptions) -> Vec<u64> {
    let mut rng = StdRng::seed_from_u64(options.seed);
    (0..options.trials).map(|_| rng.random()).collect()
}

/// Sequential rank probe over `options.trials` weight/evaluation draws.
pub fn fault_transfer_rank_seq(
    mcn: &Mcn,
    scenario: &FaultScenario,
    options: &RankOptions,
) -> Result<RankOutcome, OracleError> {
    let per_trial: Result<Vec<usize>, OracleError> = trial_seeds(options)
        .into_iter()
        .map(|seed| rank_one_trial(mcn, scenario, options.tol, seed, options.retry_cap))
        .collect();
    let per_trial = per_trial?;
    Ok(RankOutcome { seed: options.seed, modal: modal_rank(&per_trial), per_trial })
}

/// Rank probe with trials on the rayon pool; output equals the sequential
/// runner for the same options.
#[cfg(feature = "parallel")]
pub fn fault_transfer_rank_par(
    mcn: &Mcn,
    scenario: &FaultScenario,
    options: &RankOptions,
) -> Result<RankOutcome, OracleError> {
    use rayon::prelude::*;
    let per_trial: Result<Vec<usize>, OracleError> = trial_seeds(options)
        .into_par_iter()
        .map(|seed| rank_one_trial(mcn, scenario, options.tol, seed, options.retry_cap))
        .collect();
    let per_trial = per_trial?;
    Ok(RankOutcome { seed: options.seed, modal: modal_rank(&per_trial), per_trial })
}

/// Modal numeric rank of the fault-to-output transfer matrix under random
/// parameter draws; parallel when the `parallel` feature is enabled.
pub fn fault_transfer_rank(
    mcn: &Mcn,
    scenario: &FaultScenario,
    options: &RankOptions,
) -> Result<RankOutcome, OracleError> {
    #[cfg(feature = "parallel")]
    {
        fault_transfer_rank_par(mcn, scenario, options)
    }
    #[cfg(not(feature = "parallel"))]
    {
        fault_transfer_rank_seq(mcn, scenario, options)
    }
}

/// Structural verdict against numeric rank for one scenario.
#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyReport {
    pub structural: FdiReport,
    pub rank: RankOutcome,
    /// True iff the linking criterion is met exactly when the modal rank
    /// is full.
    pub consistent: bool,
}

/// Cross-checks the structural linking criterion against the sampled
/// generic rank: a scenario is structurally linkable iff the modal rank
/// equals the scenario size.
pub fn consistency_check(
    mcn: &Mcn,
    scenario: &FaultScenario,
    options: &RankOptions,
) -> Result<ConsistencyReport, OracleError> {
    let structural = fdi_solvable_mlambda(mcn, scenario)?;
    let rank = fault_transfer_rank(mcn, scenario, options)?;
    let linked = structural.achieved == structural.required;
    let full_rank = rank.modal == scenario.r();
    Ok(ConsistencyReport { structural, rank, consistent: linked == full_rank })
}
