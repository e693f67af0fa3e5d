//! Wilson score intervals and the pooled two-proportion z-test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Result, SimError};

pub const DEFAULT_ALPHA: f64 = 0.05;

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Wilson score interval for `successes` out of `trials` at two-sided
/// `confidence`, clamped to `[0, 1]` and always containing the point estimate.
pub fn wilson_interval(successes: u64, trials: u64, confidence: f64) -> Result<(f64, f64)> {
    if trials == 0 || successes > trials {
        return Err(SimError::InvalidProportion { successes, trials });
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(SimError::InvalidConfig(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    let z = standard_normal().inverse_cdf(0.5 + confidence / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();

    let low = if successes == 0 {
        0.0
    } else {
        (center - half).clamp(0.0, p)
    };
    let high = if successes == trials {
        1.0
    } else {
        (center + half).clamp(p, 1.0)
    };
    Ok((low, high))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
}

impl Proportion {
    pub fn new(successes: u64, trials: u64) -> Self {
        Proportion { successes, trials }
    }

    pub fn rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceReport {
    /// Positive when the first proportion is larger.
    pub z: f64,
    /// Two-sided.
    pub p_value: f64,
    pub alpha: f64,
    pub significant: bool,
    /// Set when the pooled rate is 0 or 1 and the test has nothing to say.
    pub no_evidence: bool,
}

impl SignificanceReport {
    /// `a` is significantly larger than `b`.
    pub fn significantly_higher(&self) -> bool {
        self.significant && self.z > 0.0
    }

    pub fn significantly_lower(&self) -> bool {
        self.significant && self.z < 0.0
    }
}

/// Pooled two-proportion z-test at level `alpha`.
pub fn compare_proportions(a: Proportion, b: Proportion, alpha: f64) -> Result<SignificanceReport> {
    for p in [a, b] {
        if p.trials == 0 || p.successes > p.trials {
            return Err(SimError::InvalidProportion {
                successes: p.successes,
                trials: p.trials,
            });
        }
    }
    let (na, nb) = (a.trials as f64, b.trials as f64);
    let pooled = (a.successes + b.successes) as f64 / (na + nb);
    let se = (pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb)).sqrt();
    if se == 0.0 {
        return Ok(SignificanceReport {
            z: 0.0,
            p_value: 1.0,
            alpha,
            significant: false,
            no_evidence: true,
        });
    }
    let z = (a.rate() - b.rate()) / se;
    let p_value = (2.0 * (1.0 - standard_normal().cdf(z.abs()))).min(1.0);
    Ok(SignificanceReport {
        z,
        p_value,
        alpha,
        significant: p_value < alpha,
        no_evidence: false,
    })
}
