//! Simulation of a Bayesian user talking to a possibly sycophantic chatbot.
//!
//! Each round the user voices a hypothesis sampled from her belief, the bot
//! samples private data and answers with a single claim, and the user updates.
//! A *catastrophic spiral* is the user reaching `p(H=0) >= 1 - epsilon` while
//! the truth is `H = 1`.
//!
//! * [`belief`]: naive and informed beliefs, update rules, target sets.
//! * [`bots`]: impartial, hallucinating and factual bot behaviours.
//! * [`conversation`]: the round loop and spiral detection.
//! * [`harness`]: parallel sweeps, Wilson intervals, z-tests and exact oracles.

pub mod belief;
pub mod bots;
pub mod conversation;
pub mod error;
pub mod harness;
pub mod world;

pub use belief::{HypothesisMarginal, InformedBelief, NaiveBelief, ResponseModel};
pub use bots::{BotFamily, BotPolicy};
pub use conversation::{run_conversation, ConversationConfig, RoundRecord, Trajectory, UserKind};
pub use error::{Result, SimError};
pub use harness::{run_experiment, Condition, ExperimentReport, ExperimentSpec, RateEstimate};
pub use world::{Bit, BotResponse, DataConfig, Utterance, WorldModel};
