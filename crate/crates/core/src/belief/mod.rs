//! User beliefs and the Bayesian updates applied to them.

mod informed;
mod likelihood;
mod naive;
mod targets;

use rand::Rng;

use crate::world::{Bit, Utterance};

pub use informed::{informed_update, marginals, InformedBelief, DEFAULT_GRID_SIZE};
pub use likelihood::{informed_response_likelihood, ResponseModel};
pub use naive::{logistic, naive_increment, naive_update, NaiveBelief};
pub use targets::{factual_target, sycophancy_target, validation_score};

/// Anything that can report the user's current `p(H = 1)`.
pub trait HypothesisMarginal {
    fn p_h1(&self) -> f64;
}

/// Voices `H* = 1` with probability equal to the belief's marginal. Voicing
/// an opinion does not change the belief.
pub fn sample_utterance<B, R>(belief: &B, rng: &mut R) -> Utterance
where
    B: HypothesisMarginal + ?Sized,
    R: Rng + ?Sized,
{
    Utterance {
        h_star: Bit::sample(belief.p_h1(), rng),
    }
}
