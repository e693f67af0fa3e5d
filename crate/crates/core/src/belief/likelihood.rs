//! The informed user's model of the bot: `P(resp | h, pi, h_star)` with the
//! bot's private data marginalized out.

use crate::bots::BotFamily;
use crate::error::{check_probability, Result};
use crate::world::{Bit, BotResponse, WorldModel};

use super::targets::{factual_target, sycophancy_target};

/// Precomputed response probabilities for one bot family in one world.
///
/// For every `(h, h_star, resp)` it stores the probability of `resp` from the
/// biased branch and from the impartial branch; the mixture at sycophancy
/// `pi` is `pi * biased + (1 - pi) * impartial`, linear in `pi`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseModel {
    family: BotFamily,
    n_responses: usize,
    // [h][resp]
    impartial: [Vec<f64>; 2],
    // [h][h_star][resp]
    biased: [[Vec<f64>; 2]; 2],
}

impl ResponseModel {
    pub fn new(world: &WorldModel, family: BotFamily) -> Self {
        let responses = world.responses();
        let n = responses.len();
        let k = world.k() as f64;

        let impartial = Bit::BOTH.map(|h| {
            responses
                .iter()
                .map(|&r| world.response_prob(r, h) / k)
                .collect::<Vec<_>>()
        });

        let biased = Bit::BOTH.map(|h| {
            Bit::BOTH.map(|h_star| match family {
                BotFamily::Impartial => impartial[h.index()].clone(),
                BotFamily::RandomHallucinating => vec![1.0 / n as f64; n],
                BotFamily::SycophanticHallucinating => {
                    let targets = sycophancy_target(world, h_star);
                    let share = 1.0 / targets.len() as f64;
                    let mut probs = vec![0.0; n];
                    for t in targets {
                        probs[t.dense_index()] = share;
                    }
                    probs
                }
                BotFamily::FactualSycophantic => {
                    let mut probs = vec![0.0; n];
                    for data in world.data_configs() {
                        let weight = world.data_prob(&data, h);
                        if weight == 0.0 {
                            continue;
                        }
                        let choices = factual_target(world, &data, h_star);
                        let share = weight / choices.len() as f64;
                        for c in choices {
                            probs[c.dense_index()] += share;
                        }
                    }
                    probs
                }
            })
        });

        ResponseModel {
            family,
            n_responses: n,
            impartial,
            biased,
        }
    }

    pub fn family(&self) -> BotFamily {
        self.family
    }

    pub fn n_responses(&self) -> usize {
        self.n_responses
    }

    /// `(biased, impartial)` probabilities of `resp`.
    pub fn components(&self, h: Bit, h_star: Bit, resp: BotResponse) -> (f64, f64) {
        let i = resp.dense_index();
        (self.biased[h.index()][h_star.index()][i], self.impartial[h.index()][i])
    }

    pub fn likelihood(&self, h: Bit, pi: f64, h_star: Bit, resp: BotResponse) -> f64 {
        let (biased, impartial) = self.components(h, h_star, resp);
        pi * biased + (1.0 - pi) * impartial
    }
}

pub fn informed_response_likelihood(
    world: &WorldModel,
    family: BotFamily,
    h: Bit,
    pi: f64,
    h_star: Bit,
    resp: BotResponse,
) -> Result<f64> {
    check_probability(pi)?;
    Ok(ResponseModel::new(world, family).likelihood(h, pi, h_star, resp))
}
