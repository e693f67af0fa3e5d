//! One conversation: `rounds` iterations of voice, sample, respond, update.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::belief::{
    logistic, naive_increment, sample_utterance, HypothesisMarginal, InformedBelief, NaiveBelief, ResponseModel,
    DEFAULT_GRID_SIZE,
};
use crate::bots::{bot_step, sample_data, BotFamily, BotPolicy};
use crate::error::{Result, SimError};
use crate::world::{Bit, BotResponse, WorldModel};

pub const DEFAULT_ROUNDS: usize = 100;
pub const DEFAULT_EPSILON: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UserKind {
    /// Believes the bot is impartial.
    Naive,
    /// Infers the bot's sycophancy rate jointly with the hypothesis.
    Informed,
}

impl UserKind {
    pub fn name(self) -> &'static str {
        match self {
            UserKind::Naive => "naive",
            UserKind::Informed => "informed",
        }
    }
}

impl fmt::Display for UserKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for UserKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(UserKind::Naive),
            "informed" => Ok(UserKind::Informed),
            other => Err(SimError::InvalidConfig(format!("unknown user kind `{other}`"))),
        }
    }
}

/// The catastrophic-spiral event: the user holds `p(H=0) >= 1 - epsilon` and
/// actually leans toward `H = 0`. The second clause only matters at
/// `epsilon = 0.5`, where an even belief is not a spiral.
pub fn spiral_reached(p_h1: f64, epsilon: f64) -> bool {
    p_h1 <= epsilon && p_h1 < 0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversationConfig {
    pub world: WorldModel,
    pub policy: BotPolicy,
    pub user: UserKind,
    /// The bot family an informed user assumes. `None` means the true family.
    pub user_model: Option<BotFamily>,
    pub rounds: usize,
    pub epsilon: f64,
    pub grid_size: usize,
    pub seed: u64,
}

impl Default for ConversationConfig {
    fn default() -> Self {
        ConversationConfig {
            world: WorldModel::default(),
            policy: BotPolicy::impartial(),
            user: UserKind::Naive,
            user_model: None,
            rounds: DEFAULT_ROUNDS,
            epsilon: DEFAULT_EPSILON,
            grid_size: DEFAULT_GRID_SIZE,
            seed: 0,
        }
    }
}

impl ConversationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(SimError::InvalidConfig("rounds must be at least 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 0.5) {
            return Err(SimError::InvalidConfig(format!(
                "epsilon must lie in (0, 0.5], got {}",
                self.epsilon
            )));
        }
        if self.grid_size < 2 {
            return Err(SimError::InvalidConfig(format!(
                "grid size must be at least 2, got {}",
                self.grid_size
            )));
        }
        Ok(())
    }

    pub fn resolved_user_model(&self) -> BotFamily {
        self.user_model.unwrap_or(self.policy.family())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub t: usize,
    pub h_star: Bit,
    pub response: BotResponse,
    pub p_h1: f64,
    pub e_pi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub user: UserKind,
    pub records: Vec<RoundRecord>,
    pub spiral_round: Option<usize>,
}

impl Trajectory {
    pub fn spiraled(&self) -> bool {
        self.spiral_round.is_some()
    }

    pub fn final_record(&self) -> Option<&RoundRecord> {
        self.records.last()
    }
}

/// What the harness keeps from a conversation it does not record in full.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConversationOutcome {
    pub spiral_round: Option<usize>,
    pub final_p_h1: f64,
    pub final_e_pi: Option<f64>,
}

/// The user's side of the conversation.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum UserState {
    Naive(NaiveBelief),
    Informed {
        belief: InformedBelief,
        model: ResponseModel,
    },
}

impl UserState {
    pub fn new(cfg: &ConversationConfig) -> Result<Self> {
        Ok(match cfg.user {
            UserKind::Naive => UserState::Naive(NaiveBelief::uniform()),
            UserKind::Informed => UserState::Informed {
                belief: InformedBelief::uniform(cfg.grid_size)?,
                model: ResponseModel::new(&cfg.world, cfg.resolved_user_model()),
            },
        })
    }

    pub fn observe(&mut self, world: &WorldModel, h_star: Bit, resp: BotResponse) -> Result<()> {
        match self {
            UserState::Naive(b) => {
                if !b.is_degenerate() {
                    b.log_odds += naive_increment(world, resp);
                }
                Ok(())
            }
            UserState::Informed { belief, model } => belief.observe(model, h_star, resp),
        }
    }

    pub fn e_pi(&self) -> Option<f64> {
        match self {
            UserState::Naive(_) => None,
            UserState::Informed { belief, .. } => Some(belief.marginals().1),
        }
    }
}

impl HypothesisMarginal for UserState {
    fn p_h1(&self) -> f64 {
        match self {
            UserState::Naive(b) => b.p_h1(),
            UserState::Informed { belief, .. } => belief.p_h1(),
        }
    }
}

/// Runs every round, calling `on_round` after each user update. Spiraling is
/// recorded, never halts the conversation.
pub fn simulate<R, F>(cfg: &ConversationConfig, rng: &mut R, mut on_round: F) -> Result<ConversationOutcome>
where
    R: Rng + ?Sized,
    F: FnMut(RoundRecord),
{
    cfg.validate()?;
    let mut user = UserState::new(cfg)?;
    let mut spiral_round = None;
    let mut e_pi = user.e_pi();

    for t in 1..=cfg.rounds {
        let h_star = sample_utterance(&user, rng).h_star;
        let data = sample_data(&cfg.world, rng);
        let response = bot_step(&cfg.policy, &cfg.world, &data, h_star, rng);
        user.observe(&cfg.world, h_star, response)?;

        let p_h1 = user.p_h1();
        e_pi = user.e_pi();
        if spiral_round.is_none() && spiral_reached(p_h1, cfg.epsilon) {
            spiral_round = Some(t);
        }
        on_round(RoundRecord {
            t,
            h_star,
            response,
            p_h1,
            e_pi,
        });
    }

    Ok(ConversationOutcome {
        spiral_round,
        final_p_h1: user.p_h1(),
        final_e_pi: e_pi,
    })
}

pub fn run_conversation<R: Rng + ?Sized>(cfg: &ConversationConfig, rng: &mut R) -> Result<Trajectory> {
    let mut records = Vec::with_capacity(cfg.rounds);
    let outcome = simulate(cfg, rng, |r| records.push(r))?;
    Ok(Trajectory {
        user: cfg.user,
        records,
        spiral_round: outcome.spiral_round,
    })
}

/// Runs with a generator seeded from `cfg.seed`.
pub fn run_seeded(cfg: &ConversationConfig) -> Result<Trajectory> {
    run_conversation(cfg, &mut ChaCha8Rng::seed_from_u64(cfg.seed))
}

/// Smallest net count `n >= 1` of `d=0` over `d=1` reports that takes a naive
/// user from even odds to a spiral.
pub fn spiral_threshold_netcount(world: &WorldModel, epsilon: f64) -> Result<i64> {
    if !world.is_count_symmetric() {
        return Err(SimError::UnsupportedOracle(
            "net counts are sufficient only for slot-symmetric likelihoods with p(1|0) + p(1|1) = 1".into(),
        ));
    }
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(SimError::InvalidConfig(format!(
            "epsilon must lie in (0, 0.5], got {epsilon}"
        )));
    }
    let step = net_step(world)?;
    // Bounded: step is at least one quantum and the threshold log-odds is finite.
    let mut n: i64 = 1;
    loop {
        if spiral_reached(logistic(-(n as f64) * step), epsilon) {
            return Ok(n);
        }
        n += 1;
    }
}

/// Naive log-odds gained from one `d=1` report under count-symmetric likelihoods.
pub(crate) fn net_step(world: &WorldModel) -> Result<f64> {
    let step = naive_increment(
        world,
        BotResponse {
            slot: 1,
            value: Bit::One,
        },
    );
    if step == 0.0 || !step.is_finite() {
        return Err(SimError::DegenerateLikelihoods(format!(
            "a single report shifts the log-odds by {step}"
        )));
    }
    Ok(step)
}
