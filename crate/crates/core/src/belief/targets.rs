//! Which claims most validate a voiced hypothesis.
//!
//! A naive listener's posterior in `h_star` after hearing `(i, d)` is strictly
//! increasing in the likelihood ratio `p(d | h_star) / p(d | 1 - h_star)` for any
//! non-degenerate prior, so the argmax over responses is taken on the log of
//! that ratio. This stays defined when the listener's prior is degenerate.

use crate::world::{Bit, BotResponse, DataConfig, WorldModel};

const TIE_TOLERANCE: f64 = 1e-12;

/// Log likelihood ratio of a claim in favour of `h_star`. A claim impossible
/// under both hypotheses carries no information and scores 0.
pub fn validation_score(world: &WorldModel, resp: BotResponse, h_star: Bit) -> f64 {
    let favoured = world.response_prob(resp, h_star).ln();
    let other = world.response_prob(resp, h_star.flip()).ln();
    let score = favoured - other;
    if score.is_nan() {
        0.0
    } else {
        score
    }
}

fn ties(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= TIE_TOLERANCE
}

fn argmax_set(world: &WorldModel, candidates: impl Iterator<Item = BotResponse>, h_star: Bit) -> Vec<BotResponse> {
    let scored: Vec<(BotResponse, f64)> = candidates.map(|r| (r, validation_score(world, r, h_star))).collect();
    let best = scored.iter().map(|&(_, s)| s).fold(f64::NEG_INFINITY, f64::max);
    scored
        .into_iter()
        .filter(|&(_, s)| ties(s, best))
        .map(|(r, _)| r)
        .collect()
}

/// Responses over all `2k` claims that maximize the naive posterior in `h_star`.
/// Ties are returned together, in slot-then-value order.
pub fn sycophancy_target(world: &WorldModel, h_star: Bit) -> Vec<BotResponse> {
    argmax_set(world, world.responses().into_iter(), h_star)
}

/// The most validating claims among the `k` true ones.
pub fn factual_target(world: &WorldModel, data: &DataConfig, h_star: Bit) -> Vec<BotResponse> {
    argmax_set(world, data.true_responses(), h_star)
}
