//! End-to-end acceptance checks at full scale: 10,000 trials per cell,
//! 100 rounds, epsilon 0.01, two data slots with likelihoods 0.4 and 0.6.
//!
//! Runs without the libtest harness and prints one PASS/FAIL line per check.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::OnceLock;

use clap::Parser;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spiral_cli::{execute, Cli, RunConfig};
use spiral_core::belief::informed_response_likelihood;
use spiral_core::bots::{bot_step, sample_data};
use spiral_core::harness::{
    compare_rates, default_pi_values, enumerate_spiral_probability, exact_spiral_probability_naive, CellResult,
    DEFAULT_TRIALS,
};
use spiral_core::{
    BotFamily, BotPolicy, Condition, ConversationConfig, ExperimentReport, ExperimentSpec, RateEstimate, UserKind,
    WorldModel,
};

const SEED: u64 = 42;
const SYC: BotFamily = BotFamily::SycophanticHallucinating;
const RAND: BotFamily = BotFamily::RandomHallucinating;
const FACT: BotFamily = BotFamily::FactualSycophantic;
const FAMILIES: [BotFamily; 3] = [SYC, RAND, FACT];

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn sweep(user: UserKind) -> ExperimentReport {
    let spec = ExperimentSpec {
        conditions: FAMILIES.iter().map(|&b| Condition::new(b, user)).collect(),
        pi_values: default_pi_values(),
        trials: DEFAULT_TRIALS,
        ..ExperimentSpec::default()
    };
    assert_eq!(spec.base.seed, SEED);
    spiral_core::run_experiment(&spec, 0).expect("sweep runs")
}

fn naive() -> &'static ExperimentReport {
    static R: OnceLock<ExperimentReport> = OnceLock::new();
    R.get_or_init(|| sweep(UserKind::Naive))
}

fn informed() -> &'static ExperimentReport {
    static R: OnceLock<ExperimentReport> = OnceLock::new();
    R.get_or_init(|| sweep(UserKind::Informed))
}

fn cell(report: &ExperimentReport, bot: BotFamily, tenths: usize) -> &CellResult {
    let ci = FAMILIES.iter().position(|&b| b == bot).unwrap();
    let c = report.cell(ci, tenths);
    assert!((c.estimate.pi - tenths as f64 / 10.0).abs() < 1e-12);
    c
}

fn est(report: &ExperimentReport, bot: BotFamily, tenths: usize) -> &RateEstimate {
    &cell(report, bot, tenths).estimate
}

fn show(e: &RateEstimate) -> String {
    format!("{}/{}", e.spirals, e.trials)
}

fn dp(family: BotFamily, pi: f64) -> f64 {
    exact_spiral_probability_naive(&WorldModel::default(), family, pi, 100, 0.01).unwrap()
}

/// `a` significantly above `b` at the 5% level.
fn above(a: &RateEstimate, b: &RateEstimate) -> (bool, String) {
    let r = compare_rates(a, b).unwrap();
    (
        r.significantly_higher(),
        format!(
            "pi={:.1} {} vs {} z={:.2} p={:.3}",
            a.pi,
            show(a),
            show(b),
            r.z,
            r.p_value
        ),
    )
}

/// Collects per-pi verdicts into one result listing the misses.
fn all_of(items: impl IntoIterator<Item = (bool, String)>) -> Check {
    let (mut ok, mut bad) = (Vec::new(), Vec::new());
    for (pass, what) in items {
        if pass {
            ok.push(what)
        } else {
            bad.push(what)
        }
    }
    if bad.is_empty() {
        Ok(format!("{} checks hold", ok.len()))
    } else {
        Err(format!(
            "{} of {} fail: {}",
            bad.len(),
            ok.len() + bad.len(),
            bad.join("; ")
        ))
    }
}

fn verdict(pass: bool, detail: String) -> Check {
    if pass {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c01() -> Check {
    let e = est(naive(), SYC, 10);
    let exact = dp(SYC, 1.0);
    verdict(
        (e.rate - 0.5).abs() <= 0.02 && (exact - 0.5).abs() <= 0.005,
        format!(
            "rate {:.4} [{:.4}, {:.4}], exact {:.6}",
            e.rate, e.ci_low, e.ci_high, exact
        ),
    )
}

fn c02() -> Check {
    let e = est(naive(), SYC, 0);
    let exact = dp(SYC, 0.0);
    verdict(
        e.rate < 0.02 && exact > 0.0,
        format!("rate {:.4}, exact {:.6}", e.rate, exact),
    )
}

fn c03() -> Check {
    let r = naive();
    all_of((1..=10).map(|i| above(est(r, SYC, i), est(r, SYC, 0))))
}

fn c04() -> Check {
    let r = naive();
    all_of((1..=9).map(|i| above(est(r, SYC, i), est(r, RAND, i))))
}

fn c05() -> Check {
    let r = naive();
    // At pi = 0 both bots are the same impartial bot, so matched pi starts at 0.1.
    let lower = (1..=10).map(|i| {
        let (f, s) = (est(r, FACT, i), est(r, SYC, i));
        (
            f.rate < s.rate,
            format!("pi={:.1} factual {} vs hallucinating {}", f.pi, show(f), show(s)),
        )
    });
    all_of(lower.chain([above(est(r, FACT, 1), est(r, FACT, 0))]))
}

fn c06() -> Check {
    let (r, n) = (informed(), naive());
    let below = (0..=10).map(|i| {
        let (a, b) = (est(r, SYC, i), est(n, SYC, i));
        (
            a.rate < b.rate,
            format!("pi={:.1} informed {} vs naive {}", a.pi, show(a), show(b)),
        )
    });
    let sig = (1..=5).map(|i| above(est(r, SYC, i), est(r, SYC, 0)));
    let (hi, mid) = (est(r, SYC, 9), est(r, SYC, 5));
    let decline = (
        hi.rate < mid.rate,
        format!("pi=0.9 {} vs pi=0.5 {}", show(hi), show(mid)),
    );
    all_of(below.chain(sig).chain([decline]))
}

fn c07() -> Check {
    let r = informed();
    all_of((8..=10).map(|i| {
        let (a, b) = (est(r, RAND, i), est(r, SYC, i));
        (
            a.rate > b.rate,
            format!("pi={:.1} non-sycophantic {} vs sycophantic {}", a.pi, show(a), show(b)),
        )
    }))
}

fn c08() -> Check {
    let r = informed();
    let sig = (2..=10).map(|i| above(est(r, FACT, i), est(r, FACT, 0)));
    let beats = [SYC, RAND].into_iter().flat_map(|h| {
        (8..=10).map(move |i| {
            let (f, o) = (est(r, FACT, i), est(r, h, i));
            (
                f.rate > o.rate,
                format!("pi={:.1} factual {} vs {} {}", f.pi, show(f), h, show(o)),
            )
        })
    });
    all_of(sig.chain(beats))
}

fn c09() -> Check {
    let r = informed();
    let cells: Vec<&CellResult> = (1..=9).map(|i| cell(r, SYC, i)).collect();
    let e_pi: Vec<f64> = cells.iter().map(|c| c.mean_final_e_pi.unwrap()).collect();
    let p_h1: Vec<f64> = cells.iter().map(|c| c.mean_final_p_h1).collect();
    let rising = e_pi.windows(2).all(|w| w[1] > w[0]);
    let falling = p_h1.windows(2).all(|w| w[1] < w[0]);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ");
    verdict(
        rising && falling,
        format!("E[pi]: {}; p(H=1): {}", fmt(&e_pi), fmt(&p_h1)),
    )
}

fn c10() -> Check {
    let mut worst = 0.0f64;
    let mut nontrivial = 0;
    let mut cases = 0;
    for family in FAMILIES {
        for pi in [0.0, 0.3, 0.7, 1.0] {
            for rounds in 1..=6 {
                for epsilon in [0.01, 0.2, 0.3, 0.5] {
                    let cfg = ConversationConfig {
                        policy: BotPolicy::new(family, pi).unwrap(),
                        rounds,
                        epsilon,
                        ..ConversationConfig::default()
                    };
                    let exact = exact_spiral_probability_naive(&cfg.world, family, pi, rounds, epsilon).unwrap();
                    let enumerated = enumerate_spiral_probability(&cfg, 6).unwrap();
                    worst = worst.max((exact - enumerated).abs());
                    nontrivial += usize::from(exact > 0.0);
                    cases += 1;
                }
            }
        }
    }
    verdict(
        worst <= 1e-12 && nontrivial > cases / 2,
        format!("{cases} cases ({nontrivial} with nonzero probability), max difference {worst:.1e}"),
    )
}

fn c11() -> Check {
    const TRIALS: usize = 1_000_000;
    let mut items = Vec::new();
    for (family, pi) in [(SYC, 0.3), (FACT, 0.7), (RAND, 0.5)] {
        let cfg = ConversationConfig {
            policy: BotPolicy::new(family, pi).unwrap(),
            user: UserKind::Informed,
            rounds: 3,
            epsilon: 0.4,
            grid_size: 2,
            ..ConversationConfig::default()
        };
        let exact = enumerate_spiral_probability(&cfg, 6).unwrap();
        let spec = ExperimentSpec {
            base: ConversationConfig {
                seed: 11,
                ..cfg.clone()
            },
            pi_values: vec![pi],
            trials: TRIALS,
            conditions: vec![Condition::new(family, UserKind::Informed)],
            trajectories: 0,
        };
        let mc = spiral_core::run_experiment(&spec, 0).unwrap().cells[0].estimate.rate;
        let se = (exact * (1.0 - exact) / TRIALS as f64).sqrt();
        let z = (mc - exact) / se;
        items.push((
            exact > 0.0 && z.abs() <= 4.0,
            format!("{family} pi={pi}: exact {exact:.6} MC {mc:.6} ({z:+.2} SE)"),
        ));
    }
    let detail: Vec<String> = items.iter().map(|(_, d)| d.clone()).collect();
    verdict(items.iter().all(|(p, _)| *p), detail.join("; "))
}

fn random_world(rng: &mut ChaCha8Rng) -> WorldModel {
    let k = rng.random_range(1..=4);
    let mut draw = || match rng.random_range(0..10) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.random::<f64>(),
    };
    let table = (0..k).map(|_| [draw(), draw()]).collect();
    WorldModel::new(table, spiral_core::Bit::One).unwrap()
}

fn c12() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst = 0.0f64;
    let mut sums = 0;
    for _ in 0..1000 {
        let world = random_world(&mut rng);
        let pis = [0.0, 1.0, rng.random::<f64>(), rng.random::<f64>()];
        for family in BotFamily::ALL {
            for h in spiral_core::Bit::BOTH {
                for h_star in spiral_core::Bit::BOTH {
                    for pi in pis {
                        let total: f64 = world
                            .responses()
                            .into_iter()
                            .map(|r| informed_response_likelihood(&world, family, h, pi, h_star, r).unwrap())
                            .sum();
                        worst = worst.max((total - 1.0).abs());
                        sums += 1;
                    }
                }
            }
        }
    }
    verdict(
        worst <= 1e-12,
        format!("{sums} sums over 1000 tables, max |sum - 1| = {worst:.1e}"),
    )
}

fn c13() -> Check {
    const SAMPLES: usize = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst = 0.0f64;
    let mut items = Vec::new();
    for family in FAMILIES {
        let pi = 0.6;
        let policy = BotPolicy::new(family, pi).unwrap();
        for h in spiral_core::Bit::BOTH {
            let world = WorldModel::default().with_true_h(h);
            let responses = world.responses();
            for h_star in spiral_core::Bit::BOTH {
                let mut counts = vec![0usize; responses.len()];
                for _ in 0..SAMPLES {
                    let data = sample_data(&world, &mut rng);
                    counts[bot_step(&policy, &world, &data, h_star, &mut rng).dense_index()] += 1;
                }
                for (r, &count) in responses.iter().zip(&counts) {
                    let p = informed_response_likelihood(&world, family, h, pi, h_star, *r).unwrap();
                    let freq = count as f64 / SAMPLES as f64;
                    let se = (p * (1.0 - p) / SAMPLES as f64).sqrt();
                    let z = if se > 0.0 {
                        (freq - p) / se
                    } else if freq == p {
                        0.0
                    } else {
                        f64::INFINITY
                    };
                    worst = worst.max(z.abs());
                    items.push((
                        z.abs() <= 4.0,
                        format!(
                            "{family} h={} h*={} resp={}:{} p={p:.4} freq={freq:.4}",
                            h.index(),
                            h_star.index(),
                            r.slot,
                            r.value.index()
                        ),
                    ));
                }
            }
        }
    }
    let n = items.len();
    all_of(items).map(|_| format!("{n} response probabilities, worst deviation {worst:.2} SE"))
}

fn c14() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let run = |workers: &str, name: &str| {
        let out = dir.path().join(name);
        let cli = Cli::try_parse_from([
            "spiral",
            "--bot",
            "syc-halluc,rand-halluc",
            "--user",
            "naive",
            "--pi-sweep",
            "0:1:0.1",
            "--trials",
            "10000",
            "--rounds",
            "100",
            "--epsilon",
            "0.01",
            "--seed",
            "42",
            "--workers",
            workers,
            "--out",
            out.to_str().unwrap(),
        ])
        .unwrap();
        execute(&RunConfig::from_cli(&cli).unwrap()).unwrap();
        std::fs::read(out).unwrap()
    };
    let one = run("1", "one.csv");
    let four = run("4", "four.csv");
    let rows = one.iter().filter(|&&b| b == b'\n').count() - 1;
    verdict(one == four, format!("{rows} rows, {} bytes, 1 vs 4 workers", one.len()))
}

fn main() -> ExitCode {
    // Listing or filtering requests from the test runner have nothing to select.
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let checks: [Criterion; 14] = [
        ("naive, sycophantic hallucination at pi=1 spirals half the time", c01),
        ("naive, impartial baseline is rare but possible", c02),
        ("naive, every pi>=0.1 above baseline", c03),
        ("naive, sycophantic above non-sycophantic hallucination", c04),
        (
            "naive, factual sycophant below hallucinating, above baseline at 0.1",
            c05,
        ),
        ("informed, below naive, above baseline for 0.1..0.5, declining", c06),
        ("informed, non-sycophantic above sycophantic at pi>=0.8", c07),
        (
            "informed, factual above baseline for pi>=0.2 and above hallucinating",
            c08,
        ),
        ("informed, final E[pi] rises and p(H=1) falls with pi", c09),
        ("exact chain equals path enumeration", c10),
        ("Monte Carlo matches enumeration for an informed user", c11),
        ("response likelihoods sum to one", c12),
        ("sampled bot responses match their likelihood", c13),
        ("worker count does not change output bytes", c14),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (title, check)) in checks.iter().enumerate() {
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let (tag, detail) = match result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag}  {title}: {detail}", i + 1);
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
