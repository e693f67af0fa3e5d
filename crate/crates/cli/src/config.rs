//! Flags, JSON config files and their resolution into an [`ExperimentSpec`].
//!
//! Resolution order is defaults, then the config file, then flags. A config
//! file may also be a run manifest, in which case its `config` object is used.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Deserializer, Serialize};
use spiral_core::belief::DEFAULT_GRID_SIZE;
use spiral_core::conversation::{DEFAULT_EPSILON, DEFAULT_ROUNDS};
use spiral_core::harness::{default_pi_values, pi_sweep, DEFAULT_TRIALS};
use spiral_core::{BotFamily, Condition, ConversationConfig, ExperimentSpec, UserKind};

use crate::error::{CliError, Result};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// The bot family an informed user assumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum UserModel {
    /// Whatever the bot actually is.
    Auto,
    Family(BotFamily),
}

impl UserModel {
    fn for_bot(self, bot: BotFamily) -> Option<BotFamily> {
        match self {
            UserModel::Family(f) if f != bot => Some(f),
            _ => None,
        }
    }
}

impl fmt::Display for UserModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UserModel::Auto => f.write_str("auto"),
            UserModel::Family(b) => b.fmt(f),
        }
    }
}

impl FromStr for UserModel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(UserModel::Auto);
        }
        s.parse().map(UserModel::Family).map_err(|e| e.to_string())
    }
}

impl TryFrom<String> for UserModel {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl From<UserModel> for String {
    fn from(m: UserModel) -> String {
        m.to_string()
    }
}

fn parse_bot(s: &str) -> std::result::Result<BotFamily, String> {
    s.parse().map_err(|e: spiral_core::SimError| e.to_string())
}

fn parse_user(s: &str) -> std::result::Result<UserKind, String> {
    s.parse().map_err(|e: spiral_core::SimError| e.to_string())
}

fn parse_probability(s: &str) -> std::result::Result<f64, String> {
    let p: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(format!("{p} is outside [0, 1]"))
    }
}

fn parse_epsilon(s: &str) -> std::result::Result<f64, String> {
    let e: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if e > 0.0 && e <= 0.5 {
        Ok(e)
    } else {
        Err(format!("{e} is outside (0, 0.5]"))
    }
}

/// An expanded `start:stop:step` sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep(pub Vec<f64>);

fn parse_sweep_flag(s: &str) -> std::result::Result<Sweep, String> {
    parse_sweep(s).map(Sweep)
}

fn parse_sweep(s: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [start, stop, step] = parts[..] else {
        return Err(format!("`{s}` is not of the form start:stop:step"));
    };
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("`{x}` is not a number"));
    pi_sweep(num(start)?, num(stop)?, num(step)?).map_err(|e| e.to_string())
}

/// Simulates conversations between a Bayesian user and a sycophantic chatbot
/// and reports how often the user ends up confidently wrong.
#[derive(Debug, Parser)]
#[command(name = "spiral", version)]
pub struct Cli {
    /// JSON config file or run manifest; flags override it.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Bot families, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_bot, value_name = "impartial|syc-halluc|rand-halluc|syc-factual")]
    pub bot: Option<Vec<BotFamily>>,

    /// User kinds, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_user, value_name = "naive|informed")]
    pub user: Option<Vec<UserKind>>,

    /// Bot families an informed user may assume, comma separated.
    #[arg(long, value_delimiter = ',', value_name = "auto|FAMILY")]
    pub user_model: Option<Vec<UserModel>>,

    /// Sycophancy rates, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_probability, conflicts_with = "pi_sweep")]
    pub pi: Option<Vec<f64>>,

    /// Inclusive sweep of sycophancy rates.
    #[arg(long, value_parser = parse_sweep_flag, value_name = "START:STOP:STEP")]
    pub pi_sweep: Option<Sweep>,

    /// Conversations per (condition, pi) cell.
    #[arg(long)]
    pub trials: Option<usize>,

    /// Rounds per conversation.
    #[arg(long)]
    pub rounds: Option<usize>,

    /// A spiral is p(H=1) falling to this or below.
    #[arg(long, value_parser = parse_epsilon)]
    pub epsilon: Option<f64>,

    /// Points on the informed user's grid over pi.
    #[arg(long)]
    pub grid_size: Option<usize>,

    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Worker threads, 0 for one per core.
    #[arg(long)]
    pub workers: Option<usize>,

    /// Write the full trajectories of the first N trials of every cell.
    #[arg(long, value_name = "N")]
    pub trajectories: Option<usize>,

    /// Rates file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// One layer of settings; every field optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    #[serde(default, deserialize_with = "one_or_many")]
    pub bot: Option<Vec<BotFamily>>,
    #[serde(default, deserialize_with = "one_or_many")]
    pub user: Option<Vec<UserKind>>,
    #[serde(default, deserialize_with = "one_or_many")]
    pub user_model: Option<Vec<UserModel>>,
    #[serde(default, deserialize_with = "one_or_many")]
    pub pi: Option<Vec<f64>>,
    pub pi_sweep: Option<String>,
    pub trials: Option<usize>,
    pub rounds: Option<usize>,
    pub epsilon: Option<f64>,
    pub grid_size: Option<usize>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub trajectories: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

fn one_or_many<'de, D, T>(d: D) -> std::result::Result<Option<Vec<T>>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    Ok(Option::<OneOrMany<T>>::deserialize(d)?.map(|v| match v {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(xs) => xs,
    }))
}

impl PartialConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        let value = match value {
            serde_json::Value::Object(mut map) if map.contains_key("config") => map.remove("config").unwrap(),
            v => v,
        };
        serde_json::from_value(value).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// The sycophancy rates this layer sets, if any.
    fn pi_values(&self) -> Result<Option<Vec<f64>>> {
        match (&self.pi, &self.pi_sweep) {
            (Some(_), Some(_)) => Err(CliError::Usage("pi and pi_sweep are mutually exclusive".into())),
            (Some(pi), None) => Ok(Some(pi.clone())),
            (None, Some(sweep)) => parse_sweep(sweep).map(Some).map_err(CliError::Usage),
            (None, None) => Ok(None),
        }
    }
}

impl From<&Cli> for PartialConfig {
    fn from(cli: &Cli) -> Self {
        PartialConfig {
            bot: cli.bot.clone(),
            user: cli.user.clone(),
            user_model: cli.user_model.clone(),
            // The sweep is already expanded by the flag parser.
            pi: cli.pi.clone().or_else(|| cli.pi_sweep.clone().map(|s| s.0)),
            pi_sweep: None,
            trials: cli.trials,
            rounds: cli.rounds,
            epsilon: cli.epsilon,
            grid_size: cli.grid_size,
            seed: cli.seed,
            workers: cli.workers,
            trajectories: cli.trajectories,
            out: cli.out.clone(),
            format: cli.format,
        }
    }
}

/// Every setting of a run, defaults materialized. This is what a manifest
/// records, and loading it back as a config reproduces the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub bot: Vec<BotFamily>,
    pub user: Vec<UserKind>,
    pub user_model: Vec<UserModel>,
    pub pi: Vec<f64>,
    pub trials: usize,
    pub rounds: usize,
    pub epsilon: f64,
    pub grid_size: usize,
    pub seed: u64,
    pub workers: usize,
    pub trajectories: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            bot: vec![BotFamily::SycophanticHallucinating],
            user: vec![UserKind::Naive],
            user_model: vec![UserModel::Auto],
            pi: default_pi_values(),
            trials: DEFAULT_TRIALS,
            rounds: DEFAULT_ROUNDS,
            epsilon: DEFAULT_EPSILON,
            grid_size: DEFAULT_GRID_SIZE,
            seed: DEFAULT_SEED,
            workers: 0,
            trajectories: 0,
            out: None,
            format: Format::Csv,
        }
    }
}

impl RunConfig {
    /// Defaults overlaid with each layer in turn, then validated.
    pub fn resolve(layers: &[PartialConfig]) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for layer in layers {
            if let Some(pi) = layer.pi_values()? {
                cfg.pi = pi;
            }
            macro_rules! overlay {
                ($($field:ident),*) => {
                    $(if let Some(v) = &layer.$field { cfg.$field = v.clone(); })*
                };
            }
            overlay!(
                bot,
                user,
                user_model,
                trials,
                rounds,
                epsilon,
                grid_size,
                seed,
                workers,
                trajectories,
                format
            );
            if layer.out.is_some() {
                cfg.out = layer.out.clone();
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let mut layers = Vec::new();
        if let Some(path) = &cli.config {
            layers.push(PartialConfig::load(path)?);
        }
        layers.push(PartialConfig::from(cli));
        Self::resolve(&layers)
    }

    fn validate(&self) -> Result<()> {
        let usage = |m: String| Err(CliError::Usage(m));
        if self.bot.is_empty() || self.user.is_empty() || self.user_model.is_empty() {
            return usage("bot, user and user_model lists must be nonempty".into());
        }
        if let Some(p) = self.pi.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return usage(format!("pi {p} is outside [0, 1]"));
        }
        if self.trajectories > self.trials {
            return usage(format!(
                "cannot keep {} trajectories out of {} trials",
                self.trajectories, self.trials
            ));
        }
        if self.trajectories > 0 && self.out.is_none() {
            return usage("trajectories are written next to --out, which is missing".into());
        }
        self.spec().validate().map_err(|e| CliError::Usage(e.to_string()))
    }

    /// Every distinct (bot, user, user model) condition, in flag order.
    pub fn conditions(&self) -> Vec<Condition> {
        let mut out: Vec<Condition> = Vec::new();
        for &bot in &self.bot {
            for &user in &self.user {
                for &model in &self.user_model {
                    let user_model = match user {
                        UserKind::Naive => None,
                        UserKind::Informed => model.for_bot(bot),
                    };
                    let c = Condition { bot, user, user_model };
                    if !out.contains(&c) {
                        out.push(c);
                    }
                }
            }
        }
        out
    }

    pub fn spec(&self) -> ExperimentSpec {
        ExperimentSpec {
            base: ConversationConfig {
                rounds: self.rounds,
                epsilon: self.epsilon,
                grid_size: self.grid_size,
                seed: self.seed,
                ..ConversationConfig::default()
            },
            pi_values: self.pi.clone(),
            trials: self.trials,
            conditions: self.conditions(),
            trajectories: self.trajectories,
        }
    }
}
