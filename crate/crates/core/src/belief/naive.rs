use crate::error::{check_probability, Result};
use crate::world::{Bit, BotResponse, WorldModel};

use super::HypothesisMarginal;

/// Log-odds increments are snapped to multiples of 2^-40. Sums of a few
/// thousand such increments with magnitude below 2^12 are then exact, so the
/// running log-odds depend only on the multiset of responses heard.
const INCREMENT_QUANTUM: f64 = 1.0 / (1u64 << 40) as f64;

pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Belief of a user who models the bot as purely impartial, kept as
/// `ln(p(H=1) / p(H=0))`. Infinite log-odds are absorbing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaiveBelief {
    pub log_odds: f64,
}

impl Default for NaiveBelief {
    fn default() -> Self {
        NaiveBelief::uniform()
    }
}

impl NaiveBelief {
    pub fn uniform() -> Self {
        NaiveBelief { log_odds: 0.0 }
    }

    pub fn from_log_odds(log_odds: f64) -> Self {
        NaiveBelief { log_odds }
    }

    pub fn from_probability(p_h1: f64) -> Result<Self> {
        let p = check_probability(p_h1)?;
        Ok(NaiveBelief {
            log_odds: p.ln() - (-p).ln_1p(),
        })
    }

    pub fn is_degenerate(&self) -> bool {
        self.log_odds.is_infinite()
    }
}

impl HypothesisMarginal for NaiveBelief {
    fn p_h1(&self) -> f64 {
        logistic(self.log_odds)
    }
}

/// Change in naive log-odds from hearing `resp`, assuming an impartial bot
/// that reports a uniformly chosen slot truthfully.
pub fn naive_increment(world: &WorldModel, resp: BotResponse) -> f64 {
    let raw = world.response_prob(resp, Bit::One).ln() - world.response_prob(resp, Bit::Zero).ln();
    if raw.is_nan() {
        0.0
    } else if raw.is_infinite() {
        raw
    } else {
        (raw / INCREMENT_QUANTUM).round() * INCREMENT_QUANTUM
    }
}

pub fn naive_update(belief: NaiveBelief, world: &WorldModel, resp: BotResponse) -> NaiveBelief {
    if belief.is_degenerate() {
        return belief;
    }
    NaiveBelief {
        log_odds: belief.log_odds + naive_increment(world, resp),
    }
}
