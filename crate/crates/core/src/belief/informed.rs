use crate::bots::BotFamily;
use crate::error::{Result, SimError};
use crate::world::{Bit, BotResponse, WorldModel};

use super::likelihood::ResponseModel;
use super::HypothesisMarginal;

pub const DEFAULT_GRID_SIZE: usize = 101;

/// Joint belief over the hypothesis and the bot's sycophancy rate, on a grid
/// of equally spaced `pi` values covering `[0, 1]` including both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct InformedBelief {
    grid: Vec<f64>,
    // [h][g]
    weights: [Vec<f64>; 2],
}

impl InformedBelief {
    /// Uniform over every `(h, pi)` cell.
    pub fn uniform(grid_size: usize) -> Result<Self> {
        if grid_size < 2 {
            return Err(SimError::InvalidConfig(format!(
                "grid size must be at least 2, got {grid_size}"
            )));
        }
        let last = (grid_size - 1) as f64;
        let grid = (0..grid_size).map(|g| g as f64 / last).collect();
        let cell = 1.0 / (2 * grid_size) as f64;
        Ok(InformedBelief {
            grid,
            weights: [vec![cell; grid_size], vec![cell; grid_size]],
        })
    }

    /// Arbitrary nonnegative weights on the standard grid, normalized.
    pub fn from_weights(weights_h0: Vec<f64>, weights_h1: Vec<f64>) -> Result<Self> {
        if weights_h0.len() != weights_h1.len() {
            return Err(SimError::InvalidConfig("weight rows differ in length".into()));
        }
        if weights_h0.iter().chain(&weights_h1).any(|&w| w.is_nan() || w < 0.0) {
            return Err(SimError::InvalidConfig("weights must be nonnegative".into()));
        }
        let mut belief = InformedBelief::uniform(weights_h0.len())?;
        belief.weights = [weights_h0, weights_h1];
        belief.normalize()?;
        Ok(belief)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn weights(&self, h: Bit) -> &[f64] {
        &self.weights[h.index()]
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().flatten().sum()
    }

    /// `(p(H=1), E[pi])`.
    pub fn marginals(&self) -> (f64, f64) {
        let p_h1 = self.weights[1].iter().sum();
        let e_pi = self
            .grid
            .iter()
            .zip(self.weights[0].iter().zip(&self.weights[1]))
            .map(|(pi, (w0, w1))| pi * (w0 + w1))
            .sum();
        (p_h1, e_pi)
    }

    fn normalize(&mut self) -> Result<()> {
        let total = self.total_mass();
        if !(total > 0.0 && total.is_finite()) {
            return Err(SimError::CorruptedBelief(total));
        }
        for w in self.weights.iter_mut().flatten() {
            *w /= total;
        }
        Ok(())
    }

    /// Bayes update on one observed claim, in place. On error the belief is
    /// left unnormalized and should be discarded.
    pub fn observe(&mut self, model: &ResponseModel, h_star: Bit, resp: BotResponse) -> Result<()> {
        for h in Bit::BOTH {
            let (biased, impartial) = model.components(h, h_star, resp);
            let slope = biased - impartial;
            for (w, &pi) in self.weights[h.index()].iter_mut().zip(&self.grid) {
                *w *= impartial + pi * slope;
            }
        }
        self.normalize()
    }
}

impl HypothesisMarginal for InformedBelief {
    fn p_h1(&self) -> f64 {
        self.weights[1].iter().sum()
    }
}

pub fn informed_update(
    belief: &InformedBelief,
    world: &WorldModel,
    family: BotFamily,
    h_star: Bit,
    resp: BotResponse,
) -> Result<InformedBelief> {
    let mut next = belief.clone();
    next.observe(&ResponseModel::new(world, family), h_star, resp)?;
    Ok(next)
}

pub fn marginals(belief: &InformedBelief) -> (f64, f64) {
    belief.marginals()
}
