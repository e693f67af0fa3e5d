//! Bot behaviours: samplers from the bot's private data and the user's voiced
//! hypothesis to a single claim. The bot never sees the true hypothesis.

use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::belief::{factual_target, sycophancy_target};
use crate::error::{check_probability, Result, SimError};
use crate::world::{Bit, BotResponse, DataConfig, WorldModel};

/// What the bot does when its per-round sycophancy coin comes up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BotFamily {
    /// Always reports a uniformly chosen slot truthfully.
    #[serde(rename = "impartial")]
    Impartial,
    /// Claims whatever most validates the user, true or not.
    #[serde(rename = "syc-halluc")]
    SycophanticHallucinating,
    /// Claims a uniformly random `(slot, value)` regardless of the user.
    #[serde(rename = "rand-halluc")]
    RandomHallucinating,
    /// Reports the true datum that most validates the user.
    #[serde(rename = "syc-factual")]
    FactualSycophantic,
}

impl BotFamily {
    pub const ALL: [BotFamily; 4] = [
        BotFamily::Impartial,
        BotFamily::SycophanticHallucinating,
        BotFamily::RandomHallucinating,
        BotFamily::FactualSycophantic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BotFamily::Impartial => "impartial",
            BotFamily::SycophanticHallucinating => "syc-halluc",
            BotFamily::RandomHallucinating => "rand-halluc",
            BotFamily::FactualSycophantic => "syc-factual",
        }
    }
}

impl fmt::Display for BotFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BotFamily {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        BotFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| SimError::InvalidConfig(format!("unknown bot family `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BotPolicy {
    family: BotFamily,
    pi: f64,
}

impl BotPolicy {
    pub fn new(family: BotFamily, pi: f64) -> Result<Self> {
        check_probability(pi)?;
        if family == BotFamily::Impartial && pi != 0.0 {
            return Err(SimError::InvalidConfig(format!(
                "an impartial bot has sycophancy 0, got {pi}"
            )));
        }
        Ok(BotPolicy { family, pi })
    }

    pub fn impartial() -> Self {
        BotPolicy {
            family: BotFamily::Impartial,
            pi: 0.0,
        }
    }

    pub fn family(&self) -> BotFamily {
        self.family
    }

    pub fn pi(&self) -> f64 {
        self.pi
    }
}

pub fn sample_data<R: Rng + ?Sized>(world: &WorldModel, rng: &mut R) -> DataConfig {
    let h = world.true_h();
    DataConfig::new(
        (0..world.k())
            .map(|i| Bit::sample(world.datum_prob(i, Bit::One, h), rng))
            .collect(),
    )
}

pub fn impartial_response<R: Rng + ?Sized>(data: &DataConfig, rng: &mut R) -> BotResponse {
    let i = rng.random_range(0..data.k());
    BotResponse {
        slot: i + 1,
        value: data.values[i],
    }
}

fn uniform_choice<R: Rng + ?Sized>(options: &[BotResponse], rng: &mut R) -> BotResponse {
    *options.choose(rng).expect("target sets are never empty")
}

pub fn sycophantic_halluc_response<R: Rng + ?Sized>(world: &WorldModel, h_star: Bit, rng: &mut R) -> BotResponse {
    uniform_choice(&sycophancy_target(world, h_star), rng)
}

pub fn random_halluc_response<R: Rng + ?Sized>(world: &WorldModel, rng: &mut R) -> BotResponse {
    BotResponse {
        slot: rng.random_range(1..=world.k()),
        value: Bit::from_bool(rng.random::<bool>()),
    }
}

pub fn factual_syc_response<R: Rng + ?Sized>(
    world: &WorldModel,
    data: &DataConfig,
    h_star: Bit,
    rng: &mut R,
) -> BotResponse {
    uniform_choice(&factual_target(world, data, h_star), rng)
}

/// One round of the bot: with probability `pi` the family's biased behaviour,
/// otherwise an impartial report. The coin is flipped fresh every round.
pub fn bot_step<R: Rng + ?Sized>(
    policy: &BotPolicy,
    world: &WorldModel,
    data: &DataConfig,
    h_star: Bit,
    rng: &mut R,
) -> BotResponse {
    if policy.family == BotFamily::Impartial || rng.random::<f64>() >= policy.pi {
        return impartial_response(data, rng);
    }
    match policy.family {
        BotFamily::Impartial => unreachable!(),
        BotFamily::SycophanticHallucinating => sycophantic_halluc_response(world, h_star, rng),
        BotFamily::RandomHallucinating => random_halluc_response(world, rng),
        BotFamily::FactualSycophantic => factual_syc_response(world, data, h_star, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    fn bits(v: &[u8]) -> DataConfig {
        DataConfig::new(v.iter().map(|&b| Bit::try_from(b).unwrap()).collect())
    }

    #[test]
    fn policy_validation() {
        assert!(BotPolicy::new(BotFamily::SycophanticHallucinating, 1.5).is_err());
        assert!(BotPolicy::new(BotFamily::Impartial, 0.3).is_err());
        assert!(BotPolicy::new(BotFamily::Impartial, 0.0).is_ok());
        assert_eq!(
            "syc-factual".parse::<BotFamily>().unwrap(),
            BotFamily::FactualSycophantic
        );
        assert!("sycophant".parse::<BotFamily>().is_err());
    }

    #[test]
    fn degenerate_bernoulli_data() {
        let mut r = rng();
        let ones = WorldModel::symmetric(3, 0.2, 1.0, Bit::One).unwrap();
        let zeros = WorldModel::symmetric(3, 0.2, 0.0, Bit::One).unwrap();
        for _ in 0..100 {
            assert_eq!(sample_data(&ones, &mut r), bits(&[1, 1, 1]));
            assert_eq!(sample_data(&zeros, &mut r), bits(&[0, 0, 0]));
        }
    }

    #[test]
    fn data_frequency_matches_truth() {
        let w = WorldModel::default();
        let mut r = rng();
        let n = 100_000;
        let mut ones = [0usize; 2];
        for _ in 0..n {
            let d = sample_data(&w, &mut r);
            for (i, v) in d.values.iter().enumerate() {
                ones[i] += v.index();
            }
        }
        for c in ones {
            assert!((c as f64 / n as f64 - 0.6).abs() < 0.005);
        }
    }

    #[test]
    fn impartial_reports() {
        let mut r = rng();
        let mixed = bits(&[0, 1]);
        let mut first = 0;
        for _ in 0..10_000 {
            let resp = impartial_response(&mixed, &mut r);
            assert_eq!(resp.value, mixed.values[resp.slot_index()]);
            first += usize::from(resp.slot == 1);
        }
        assert!((first as f64 / 10_000.0 - 0.5).abs() < 0.02);
        assert_eq!(
            impartial_response(&bits(&[1]), &mut r),
            BotResponse {
                slot: 1,
                value: Bit::One
            }
        );
        for _ in 0..100 {
            assert_eq!(impartial_response(&bits(&[1, 1]), &mut r).value, Bit::One);
        }
    }

    #[test]
    fn hallucinating_sycophant_validates() {
        let w = WorldModel::default();
        let mut r = rng();
        for h in Bit::BOTH {
            for _ in 0..200 {
                assert_eq!(sycophantic_halluc_response(&w, h, &mut r).value, h);
            }
        }
        let flat = WorldModel::symmetric(2, 0.5, 0.5, Bit::One).unwrap();
        let mut counts = [0usize; 4];
        for _ in 0..40_000 {
            counts[sycophantic_halluc_response(&flat, Bit::One, &mut r).dense_index()] += 1;
        }
        for c in counts {
            assert!((c as f64 / 40_000.0 - 0.25).abs() < 0.01);
        }
    }

    #[test]
    fn random_hallucination_is_uniform() {
        let mut r = rng();
        for k in [1usize, 2] {
            let w = WorldModel::symmetric(k, 0.4, 0.6, Bit::One).unwrap();
            let mut counts = vec![0usize; 2 * k];
            let n = 40_000;
            for _ in 0..n {
                counts[random_halluc_response(&w, &mut r).dense_index()] += 1;
            }
            let expected = 1.0 / (2 * k) as f64;
            for c in counts {
                assert!((c as f64 / n as f64 - expected).abs() < 0.01);
            }
        }
    }

    #[test]
    fn factual_sycophant_cherry_picks() {
        let w = WorldModel::default();
        let mut r = rng();
        for _ in 0..200 {
            assert_eq!(
                factual_syc_response(&w, &bits(&[0, 1]), Bit::Zero, &mut r),
                BotResponse {
                    slot: 1,
                    value: Bit::Zero
                }
            );
            assert_eq!(
                factual_syc_response(&w, &bits(&[0, 1]), Bit::One, &mut r),
                BotResponse {
                    slot: 2,
                    value: Bit::One
                }
            );
            assert_eq!(
                factual_syc_response(&w, &bits(&[1, 1]), Bit::Zero, &mut r).value,
                Bit::One
            );
        }
    }

    #[test]
    fn mixture_collapses_at_extremes() {
        let w = WorldModel::default();
        let mut r = rng();
        let data = bits(&[0, 0]);
        let zero = BotPolicy::new(BotFamily::SycophanticHallucinating, 0.0).unwrap();
        let one = BotPolicy::new(BotFamily::SycophanticHallucinating, 1.0).unwrap();
        for _ in 0..500 {
            assert_eq!(bot_step(&zero, &w, &data, Bit::One, &mut r).value, Bit::Zero);
            assert_eq!(bot_step(&one, &w, &data, Bit::One, &mut r).value, Bit::One);
        }
    }

    #[test]
    fn half_sycophantic_mixture() {
        // 0.5 * 1 (sycophantic branch claims d=1) + 0.5 * 0 (data are all zero).
        let w = WorldModel::default();
        let mut r = rng();
        let half = BotPolicy::new(BotFamily::SycophanticHallucinating, 0.5).unwrap();
        let data = bits(&[0, 0]);
        let n = 100_000;
        let ones = (0..n)
            .filter(|_| bot_step(&half, &w, &data, Bit::One, &mut r).value == Bit::One)
            .count();
        assert!((ones as f64 / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn hallucinating_sycophant_ignores_data() {
        let w = WorldModel::default();
        let policy = BotPolicy::new(BotFamily::SycophanticHallucinating, 1.0).unwrap();
        for d in w.data_configs() {
            let mut a = rng();
            let mut b = rng();
            for _ in 0..50 {
                assert_eq!(
                    bot_step(&policy, &w, &d, Bit::Zero, &mut a),
                    bot_step(&policy, &w, &bits(&[1, 1]), Bit::Zero, &mut b)
                );
            }
        }
    }

    proptest! {
        #[test]
        fn truthful_families_never_lie(mask in 0u64..256, k in 1usize..=8, h in any::<bool>(), seed in any::<u64>()) {
            let w = WorldModel::symmetric(k, 0.35, 0.7, Bit::One).unwrap();
            let data = DataConfig::from_mask(mask, k);
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            let h_star = Bit::from_bool(h);
            for _ in 0..20 {
                let a = impartial_response(&data, &mut r);
                prop_assert_eq!(a.value, data.values[a.slot_index()]);
                let f = factual_syc_response(&w, &data, h_star, &mut r);
                prop_assert_eq!(f.value, data.values[f.slot_index()]);
            }
        }
    }
}
