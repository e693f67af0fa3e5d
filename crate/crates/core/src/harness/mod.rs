//! Sweeps of sycophancy rate and condition, with per-cell spiral rates.
//!
//! Every trial draws from its own ChaCha stream keyed by
//! `(master seed, condition index, pi index, trial index)`, and cells are
//! reduced in trial order, so results do not depend on the worker count.

pub mod oracle;
pub mod stats;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bots::{BotFamily, BotPolicy};
use crate::conversation::{run_conversation, simulate, ConversationConfig, ConversationOutcome, Trajectory, UserKind};
use crate::error::{check_probability, Result, SimError};

pub use oracle::{dp_supports, enumerate_spiral_probability, exact_spiral_probability_naive, DEFAULT_ENUMERATION_CAP};
pub use stats::{compare_proportions, wilson_interval, Proportion, SignificanceReport, DEFAULT_ALPHA};

pub const DEFAULT_TRIALS: usize = 10_000;
pub const FAST_TRIALS: usize = 2_000;
pub const CONFIDENCE: f64 = 0.95;

/// `0.0, 0.1, ..., 1.0`.
pub fn default_pi_values() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

/// Parses `start:stop:step`, inclusive of `stop` up to rounding.
pub fn pi_sweep(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    check_probability(start)?;
    check_probability(stop)?;
    if step.is_nan() || step <= 0.0 || stop < start {
        return Err(SimError::InvalidConfig(format!(
            "sweep {start}:{stop}:{step} is empty or has a non-positive step"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=count)
        // Snap to 12 decimals so 0.1 * 3 prints and compares as 0.3.
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Condition {
    pub bot: BotFamily,
    pub user: UserKind,
    /// Family an informed user assumes; `None` for the true one.
    pub user_model: Option<BotFamily>,
}

impl Condition {
    pub fn new(bot: BotFamily, user: UserKind) -> Self {
        Condition {
            bot,
            user,
            user_model: None,
        }
    }

    pub fn label(&self) -> String {
        match self.user_model {
            Some(m) if self.user == UserKind::Informed && m != self.bot => {
                format!("{}-{}-as-{}", self.bot, self.user, m)
            }
            _ => format!("{}-{}", self.bot, self.user),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    /// World, rounds, epsilon, grid size and master seed. Policy and user
    /// fields are replaced per cell.
    pub base: ConversationConfig,
    pub pi_values: Vec<f64>,
    pub trials: usize,
    pub conditions: Vec<Condition>,
    /// Full trajectories kept for the first this-many trials of every cell.
    pub trajectories: usize,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            base: ConversationConfig {
                seed: 42,
                ..ConversationConfig::default()
            },
            pi_values: default_pi_values(),
            trials: DEFAULT_TRIALS,
            conditions: vec![Condition::new(BotFamily::SycophanticHallucinating, UserKind::Naive)],
            trajectories: 0,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.trials == 0 {
            return Err(SimError::InvalidConfig("trials must be at least 1".into()));
        }
        if self.trials > u32::MAX as usize {
            return Err(SimError::InvalidConfig("at most 2^32 - 1 trials per cell".into()));
        }
        if self.pi_values.is_empty() || self.conditions.is_empty() {
            return Err(SimError::InvalidConfig(
                "need at least one pi value and one condition".into(),
            ));
        }
        if self.pi_values.len() > u16::MAX as usize || self.conditions.len() > u16::MAX as usize {
            return Err(SimError::InvalidConfig("too many pi values or conditions".into()));
        }
        for &pi in &self.pi_values {
            check_probability(pi)?;
        }
        for c in &self.conditions {
            if c.bot == BotFamily::Impartial && self.pi_values.iter().any(|&pi| pi != 0.0) {
                return Err(SimError::InvalidConfig(
                    "an impartial bot can only be run at pi = 0".into(),
                ));
            }
        }
        Ok(())
    }

    /// The conversation configuration of one cell.
    pub fn cell_config(&self, condition: &Condition, pi: f64) -> Result<ConversationConfig> {
        Ok(ConversationConfig {
            policy: BotPolicy::new(condition.bot, pi)?,
            user: condition.user,
            user_model: condition.user_model,
            ..self.base.clone()
        })
    }
}

/// The generator for one trial.
pub fn trial_rng(master_seed: u64, condition: usize, pi_index: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream((condition as u64) << 48 | (pi_index as u64) << 32 | trial as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub condition: String,
    pub bot: BotFamily,
    pub user: UserKind,
    pub pi: f64,
    pub trials: u64,
    pub spirals: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

impl RateEstimate {
    pub fn proportion(&self) -> Proportion {
        Proportion::new(self.spirals, self.trials)
    }
}

pub fn compare_rates(a: &RateEstimate, b: &RateEstimate) -> Result<SignificanceReport> {
    compare_proportions(a.proportion(), b.proportion(), DEFAULT_ALPHA)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialFailure {
    pub trial: usize,
    pub error: SimError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub condition_index: usize,
    pub pi_index: usize,
    pub estimate: RateEstimate,
    pub mean_final_p_h1: f64,
    /// Informed users only.
    pub mean_final_e_pi: Option<f64>,
    pub failures: Vec<TrialFailure>,
    /// `(trial index, trajectory)` for the first requested trials.
    pub trajectories: Vec<(usize, Trajectory)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub conditions: Vec<Condition>,
    pub pi_values: Vec<f64>,
    /// Condition-major, then pi.
    pub cells: Vec<CellResult>,
}

impl ExperimentReport {
    pub fn estimates(&self) -> Vec<RateEstimate> {
        self.cells.iter().map(|c| c.estimate.clone()).collect()
    }

    pub fn cell(&self, condition: usize, pi_index: usize) -> &CellResult {
        &self.cells[condition * self.pi_values.len() + pi_index]
    }

    pub fn find(&self, condition: &Condition, pi: f64) -> Option<&CellResult> {
        let ci = self.conditions.iter().position(|c| c == condition)?;
        let pi_index = self.pi_values.iter().position(|&p| (p - pi).abs() < 1e-9)?;
        Some(self.cell(ci, pi_index))
    }

    pub fn failure_count(&self) -> usize {
        self.cells.iter().map(|c| c.failures.len()).sum()
    }
}

enum TrialResult {
    Done(ConversationOutcome, Option<Trajectory>),
    Failed(SimError),
}

fn run_trial(cfg: &ConversationConfig, mut rng: ChaCha8Rng, keep: bool) -> TrialResult {
    if keep {
        match run_conversation(cfg, &mut rng) {
            Ok(t) => {
                let last = t.final_record().expect("at least one round");
                let outcome = ConversationOutcome {
                    spiral_round: t.spiral_round,
                    final_p_h1: last.p_h1,
                    final_e_pi: last.e_pi,
                };
                TrialResult::Done(outcome, Some(t))
            }
            Err(e) => TrialResult::Failed(e),
        }
    } else {
        match simulate(cfg, &mut rng, |_| {}) {
            Ok(o) => TrialResult::Done(o, None),
            Err(e) => TrialResult::Failed(e),
        }
    }
}

fn run_cell(spec: &ExperimentSpec, condition_index: usize, pi_index: usize) -> Result<CellResult> {
    let condition = &spec.conditions[condition_index];
    let pi = spec.pi_values[pi_index];
    let cfg = spec.cell_config(condition, pi)?;
    let seed = spec.base.seed;

    let results: Vec<TrialResult> = (0..spec.trials)
        .into_par_iter()
        .map(|trial| {
            run_trial(
                &cfg,
                trial_rng(seed, condition_index, pi_index, trial),
                trial < spec.trajectories,
            )
        })
        .collect();

    let mut spirals = 0u64;
    let mut completed = 0u64;
    let mut sum_p_h1 = 0.0;
    let mut sum_e_pi = 0.0;
    let mut failures = Vec::new();
    let mut trajectories = Vec::new();
    for (trial, result) in results.into_iter().enumerate() {
        match result {
            TrialResult::Done(outcome, traj) => {
                completed += 1;
                spirals += u64::from(outcome.spiral_round.is_some());
                sum_p_h1 += outcome.final_p_h1;
                sum_e_pi += outcome.final_e_pi.unwrap_or(0.0);
                if let Some(t) = traj {
                    trajectories.push((trial, t));
                }
            }
            TrialResult::Failed(error) => failures.push(TrialFailure { trial, error }),
        }
    }
    if completed == 0 {
        return Err(failures.remove(0).error);
    }

    let (ci_low, ci_high) = wilson_interval(spirals, completed, CONFIDENCE)?;
    let n = completed as f64;
    Ok(CellResult {
        condition_index,
        pi_index,
        estimate: RateEstimate {
            condition: condition.label(),
            bot: condition.bot,
            user: condition.user,
            pi,
            trials: completed,
            spirals,
            rate: spirals as f64 / n,
            ci_low,
            ci_high,
            seed,
        },
        mean_final_p_h1: sum_p_h1 / n,
        mean_final_e_pi: (condition.user == UserKind::Informed).then(|| sum_e_pi / n),
        failures,
        trajectories,
    })
}

/// Runs every `(condition, pi)` cell on `workers` threads (0 for one per core).
pub fn run_experiment(spec: &ExperimentSpec, workers: usize) -> Result<ExperimentReport> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SimError::InvalidConfig(format!("cannot start worker pool: {e}")))?;

    let cells = pool.install(|| {
        (0..spec.conditions.len())
            .flat_map(|ci| (0..spec.pi_values.len()).map(move |pi| (ci, pi)))
            .map(|(ci, pi)| run_cell(spec, ci, pi))
            .collect::<Result<Vec<_>>>()
    })?;

    Ok(ExperimentReport {
        conditions: spec.conditions.clone(),
        pi_values: spec.pi_values.clone(),
        cells,
    })
}
