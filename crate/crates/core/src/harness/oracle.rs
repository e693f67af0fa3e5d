//! Exact spiral probabilities, used to check the Monte Carlo engine.
//!
//! Two independent routes:
//! * [`exact_spiral_probability_naive`] runs a dynamic program on the naive
//!   user's net count of `d=1` over `d=0` reports, which determines her belief
//!   when likelihoods are count-symmetric.
//! * [`enumerate_spiral_probability`] walks the complete outcome tree (voiced
//!   hypothesis, sycophancy coin, data, tie-breaks) for a short conversation.
//!   It works for informed users too, and finds the bot's choices by brute-force
//!   posterior maximization rather than through the bot policy code.

use std::collections::BTreeMap;

use crate::belief::{factual_target, logistic, naive_increment, sycophancy_target, HypothesisMarginal};
use crate::bots::BotFamily;
use crate::conversation::{
    net_step, spiral_reached, spiral_threshold_netcount, ConversationConfig, UserKind, UserState,
};
use crate::error::{check_probability, Result, SimError};
use crate::world::{Bit, BotResponse, DataConfig, WorldModel};

pub const DEFAULT_ENUMERATION_CAP: usize = 6;

fn zero_share(choices: &[BotResponse]) -> f64 {
    choices.iter().filter(|r| r.value == Bit::Zero).count() as f64 / choices.len() as f64
}

/// Probability that the biased branch reports `d = 0`, given the voiced hypothesis.
fn biased_zero_prob(world: &WorldModel, family: BotFamily, h_star: Bit) -> f64 {
    let truth = world.true_h();
    match family {
        BotFamily::Impartial => world.datum_prob(0, Bit::Zero, truth),
        BotFamily::RandomHallucinating => 0.5,
        BotFamily::SycophanticHallucinating => zero_share(&sycophancy_target(world, h_star)),
        BotFamily::FactualSycophantic => world
            .data_configs()
            .map(|d| world.data_prob(&d, truth) * zero_share(&factual_target(world, &d, h_star)))
            .sum(),
    }
}

/// Probability that a naive user from even odds spirals within `rounds`,
/// computed exactly on the net-count Markov chain.
pub fn exact_spiral_probability_naive(
    world: &WorldModel,
    family: BotFamily,
    pi: f64,
    rounds: usize,
    epsilon: f64,
) -> Result<f64> {
    check_probability(pi)?;
    let barrier = spiral_threshold_netcount(world, epsilon)?;
    let step = net_step(world)?;
    if naive_increment(
        world,
        BotResponse {
            slot: 1,
            value: Bit::Zero,
        },
    ) != -step
    {
        return Err(SimError::UnsupportedOracle(
            "d=0 and d=1 reports are not mirror images".into(),
        ));
    }
    let pi = if family == BotFamily::Impartial { 0.0 } else { pi };
    let impartial_zero = world.datum_prob(0, Bit::Zero, world.true_h());
    let biased_zero = Bit::BOTH.map(|h| biased_zero_prob(world, family, h));

    // mass[n + rounds] is the probability of net count n without a spiral so far.
    let width = 2 * rounds + 1;
    let offset = rounds as i64;
    let mut mass = vec![0.0; width];
    mass[rounds] = 1.0;
    let mut absorbed = 0.0;

    for _ in 0..rounds {
        let mut next = vec![0.0; width];
        for (idx, &m) in mass.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let n = idx as i64 - offset;
            let p_h1 = logistic(n as f64 * step);
            let syc_zero = (1.0 - p_h1) * biased_zero[0] + p_h1 * biased_zero[1];
            let down = (1.0 - pi) * impartial_zero + pi * syc_zero;

            if n - 1 <= -barrier {
                absorbed += m * down;
            } else {
                next[idx - 1] += m * down;
            }
            next[idx + 1] += m * (1.0 - down);
        }
        mass = next;
    }
    Ok(absorbed)
}

/// Literal naive posterior `p(H = h_star | resp)` at even prior odds.
fn naive_posterior(world: &WorldModel, resp: BotResponse, h_star: Bit) -> f64 {
    let evidence = |h: Bit| -> f64 {
        world
            .data_configs()
            .filter(|d| d.values[resp.slot_index()] == resp.value)
            .map(|d| world.data_prob(&d, h))
            .sum::<f64>()
            / world.k() as f64
    };
    let (favoured, other) = (evidence(h_star), evidence(h_star.flip()));
    if favoured + other == 0.0 {
        0.5
    } else {
        favoured / (favoured + other)
    }
}

fn brute_argmax(world: &WorldModel, candidates: Vec<BotResponse>, h_star: Bit) -> Vec<BotResponse> {
    let scored: Vec<(BotResponse, f64)> = candidates
        .into_iter()
        .map(|r| (r, naive_posterior(world, r, h_star)))
        .collect();
    let best = scored.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    scored
        .into_iter()
        .filter(|s| (s.1 - best).abs() <= 1e-12)
        .map(|s| s.0)
        .collect()
}

/// Full distribution of the bot's claim given the voiced hypothesis.
fn response_distribution(world: &WorldModel, family: BotFamily, pi: f64, h_star: Bit) -> BTreeMap<BotResponse, f64> {
    let mut dist = BTreeMap::new();
    let mut add = |r: BotResponse, p: f64| {
        if p > 0.0 {
            *dist.entry(r).or_insert(0.0) += p;
        }
    };
    let biased_weight = if family == BotFamily::Impartial { 0.0 } else { pi };
    let k = world.k();
    let halluc_targets = brute_argmax(world, world.responses(), h_star);

    for mask in 0..1u64 << k {
        let data = DataConfig::from_mask(mask, k);
        let p_data = world.data_prob(&data, world.true_h());
        if p_data == 0.0 {
            continue;
        }
        for r in data.true_responses() {
            add(r, p_data * (1.0 - biased_weight) / k as f64);
        }
        let choices = match family {
            BotFamily::Impartial => continue,
            BotFamily::SycophanticHallucinating => halluc_targets.clone(),
            BotFamily::RandomHallucinating => world.responses(),
            BotFamily::FactualSycophantic => brute_argmax(world, data.true_responses().collect(), h_star),
        };
        let share = p_data * biased_weight / choices.len() as f64;
        for r in choices {
            add(r, share);
        }
    }
    dist
}

/// Exact spiral probability by summing over every path of a short conversation.
pub fn enumerate_spiral_probability(cfg: &ConversationConfig, cap: usize) -> Result<f64> {
    cfg.validate()?;
    if cfg.rounds > cap {
        return Err(SimError::EnumerationTooDeep {
            rounds: cfg.rounds,
            cap,
        });
    }
    let dists = Bit::BOTH.map(|h| response_distribution(&cfg.world, cfg.policy.family(), cfg.policy.pi(), h));
    let user = UserState::new(cfg)?;
    descend(cfg, &dists, user, 1.0, cfg.rounds)
}

fn descend(
    cfg: &ConversationConfig,
    dists: &[BTreeMap<BotResponse, f64>; 2],
    user: UserState,
    path_prob: f64,
    remaining: usize,
) -> Result<f64> {
    if remaining == 0 {
        return Ok(0.0);
    }
    let p_h1 = user.p_h1();
    let mut total = 0.0;
    for h_star in Bit::BOTH {
        let p_voice = if h_star == Bit::One { p_h1 } else { 1.0 - p_h1 };
        if p_voice == 0.0 {
            continue;
        }
        for (&resp, &p_resp) in &dists[h_star.index()] {
            let p = path_prob * p_voice * p_resp;
            let mut next = user.clone();
            next.observe(&cfg.world, h_star, resp)?;
            if spiral_reached(next.p_h1(), cfg.epsilon) {
                total += p;
            } else {
                total += descend(cfg, dists, next, p, remaining - 1)?;
            }
        }
    }
    Ok(total)
}

/// Naive conditions only: the user's belief must be a function of the net count.
pub fn dp_supports(cfg: &ConversationConfig) -> bool {
    cfg.user == UserKind::Naive && cfg.world.is_count_symmetric()
}
