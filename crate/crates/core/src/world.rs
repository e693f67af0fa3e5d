//! The shared world: the binary hypothesis, the bot's private data slots and
//! the claims it can make about them.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Result, SimError};

/// A binary value: a hypothesis about the world, a datum, or a voiced opinion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Bit {
    Zero,
    One,
}

impl Bit {
    pub const BOTH: [Bit; 2] = [Bit::Zero, Bit::One];

    pub fn index(self) -> usize {
        match self {
            Bit::Zero => 0,
            Bit::One => 1,
        }
    }

    pub fn flip(self) -> Bit {
        match self {
            Bit::Zero => Bit::One,
            Bit::One => Bit::Zero,
        }
    }

    pub fn from_bool(b: bool) -> Bit {
        if b {
            Bit::One
        } else {
            Bit::Zero
        }
    }

    /// Draws `One` with probability `p_one`.
    pub fn sample<R: Rng + ?Sized>(p_one: f64, rng: &mut R) -> Bit {
        Bit::from_bool(rng.random::<f64>() < p_one)
    }
}

impl From<Bit> for u8 {
    fn from(b: Bit) -> u8 {
        b.index() as u8
    }
}

impl TryFrom<u8> for Bit {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Bit, String> {
        match v {
            0 => Ok(Bit::Zero),
            1 => Ok(Bit::One),
            other => Err(format!("not a bit: {other}")),
        }
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// The hypothesis the user voices at the start of a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Utterance {
    pub h_star: Bit,
}

/// A claim `D_slot = value`, possibly false. Slots are numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BotResponse {
    pub slot: usize,
    pub value: Bit,
}

impl BotResponse {
    pub fn new(slot: usize, value: Bit, k: usize) -> Result<Self> {
        if slot == 0 || slot > k {
            return Err(SimError::InvalidConfig(format!("response slot {slot} outside 1..={k}")));
        }
        Ok(BotResponse { slot, value })
    }

    /// Zero-based slot position.
    pub fn slot_index(&self) -> usize {
        self.slot - 1
    }

    /// Dense index in `0..2k`, matching the order of [`WorldModel::responses`].
    pub fn dense_index(&self) -> usize {
        2 * self.slot_index() + self.value.index()
    }
}

/// The bot's privately sampled data `D_1..D_k` for one round.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DataConfig {
    pub values: Vec<Bit>,
}

impl DataConfig {
    pub fn new(values: Vec<Bit>) -> Self {
        DataConfig { values }
    }

    pub fn k(&self) -> usize {
        self.values.len()
    }

    /// The truthful response for each slot.
    pub fn true_responses(&self) -> impl Iterator<Item = BotResponse> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &value)| BotResponse { slot: i + 1, value })
    }

    pub fn from_mask(mask: u64, k: usize) -> Self {
        DataConfig::new((0..k).map(|i| Bit::from_bool(mask >> i & 1 == 1)).collect())
    }
}

/// Hypothesis space, data slots and the per-slot data likelihoods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldModel {
    /// `p_one[i][h]` is `p(D_{i+1} = 1 | H = h)`.
    p_one: Vec<[f64; 2]>,
    true_h: Bit,
}

/// Largest slot count for which data configurations are enumerated exactly.
pub const MAX_ENUMERABLE_SLOTS: usize = 20;

impl Default for WorldModel {
    /// Two slots, `p(D=1|H=0) = 2/5`, `p(D=1|H=1) = 3/5`, truth `H = 1`.
    fn default() -> Self {
        WorldModel::symmetric(2, 0.4, 0.6, Bit::One).expect("default world is valid")
    }
}

impl WorldModel {
    pub fn new(p_one: Vec<[f64; 2]>, true_h: Bit) -> Result<Self> {
        if p_one.is_empty() {
            return Err(SimError::InvalidConfig("k must be at least 1".into()));
        }
        if p_one.len() > MAX_ENUMERABLE_SLOTS {
            return Err(SimError::InvalidConfig(format!(
                "k = {} exceeds the supported maximum of {MAX_ENUMERABLE_SLOTS}",
                p_one.len()
            )));
        }
        for row in &p_one {
            for &p in row {
                check_probability(p)?;
            }
        }
        Ok(WorldModel { p_one, true_h })
    }

    /// Every slot shares the same likelihood table.
    pub fn symmetric(k: usize, p_one_given_h0: f64, p_one_given_h1: f64, true_h: Bit) -> Result<Self> {
        WorldModel::new(vec![[p_one_given_h0, p_one_given_h1]; k], true_h)
    }

    pub fn k(&self) -> usize {
        self.p_one.len()
    }

    pub fn true_h(&self) -> Bit {
        self.true_h
    }

    pub fn with_true_h(&self, true_h: Bit) -> WorldModel {
        WorldModel {
            p_one: self.p_one.clone(),
            true_h,
        }
    }

    pub fn p_one_table(&self) -> &[[f64; 2]] {
        &self.p_one
    }

    /// `p(D_slot = value | H = h)` for a zero-based slot.
    pub fn datum_prob(&self, slot_index: usize, value: Bit, h: Bit) -> f64 {
        let p1 = self.p_one[slot_index][h.index()];
        match value {
            Bit::One => p1,
            Bit::Zero => 1.0 - p1,
        }
    }

    /// Probability of the bot's claim under a truthful report of that slot.
    pub fn response_prob(&self, resp: BotResponse, h: Bit) -> f64 {
        self.datum_prob(resp.slot_index(), resp.value, h)
    }

    /// `p(D | H = h)` for a full data configuration.
    pub fn data_prob(&self, data: &DataConfig, h: Bit) -> f64 {
        data.values
            .iter()
            .enumerate()
            .map(|(i, &v)| self.datum_prob(i, v, h))
            .product()
    }

    /// All `2k` responses, ordered by slot then value.
    pub fn responses(&self) -> Vec<BotResponse> {
        (1..=self.k())
            .flat_map(|slot| Bit::BOTH.map(|value| BotResponse { slot, value }))
            .collect()
    }

    /// All `2^k` data configurations.
    pub fn data_configs(&self) -> impl Iterator<Item = DataConfig> + '_ {
        let k = self.k();
        (0..1u64 << k).map(move |mask| DataConfig::from_mask(mask, k))
    }

    pub fn is_slot_symmetric(&self) -> bool {
        self.p_one.windows(2).all(|w| w[0] == w[1])
    }

    /// Slot-symmetric with `p(D=1|H=0) + p(D=1|H=1) = 1`, so that a `d=1`
    /// report and a `d=0` report move the naive log-odds by opposite amounts.
    pub fn is_count_symmetric(&self) -> bool {
        self.is_slot_symmetric() && {
            let [a, b] = self.p_one[0];
            (a + b - 1.0).abs() < 1e-12
        }
    }
}
