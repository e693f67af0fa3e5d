//! Spiral rates for every bot family against both user kinds, with the exact
//! naive-user probability alongside the Monte Carlo estimate.
//!
//! cargo run --release -p spiral-core --example all_conditions -- [trials]

use spiral_core::harness::exact_spiral_probability_naive;
use spiral_core::{run_experiment, BotFamily, Condition, ExperimentSpec, UserKind};

fn main() {
    let trials = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("trials must be a positive integer"))
        .unwrap_or(2_000);
    let mut conditions = Vec::new();
    for user in [UserKind::Naive, UserKind::Informed] {
        for bot in [
            BotFamily::SycophanticHallucinating,
            BotFamily::RandomHallucinating,
            BotFamily::FactualSycophantic,
        ] {
            conditions.push(Condition::new(bot, user));
        }
    }
    let spec = ExperimentSpec {
        trials,
        conditions,
        ..ExperimentSpec::default()
    };
    let report = run_experiment(&spec, 0).expect("valid spec");

    println!(
        "{:22} {:>4} {:>8} {:>19} {:>8} {:>7} {:>6}",
        "condition", "pi", "rate", "95% CI", "exact", "p(H=1)", "E[pi]"
    );
    for cell in &report.cells {
        let e = &cell.estimate;
        let exact = match e.user {
            UserKind::Naive => {
                let c = &spec.base;
                let p = exact_spiral_probability_naive(&c.world, e.bot, e.pi, c.rounds, c.epsilon)
                    .expect("symmetric world");
                format!("{p:.4}")
            }
            UserKind::Informed => "-".into(),
        };
        let e_pi = cell.mean_final_e_pi.map_or("-".into(), |x| format!("{x:.3}"));
        println!(
            "{:22} {:>4.1} {:>8.4} [{:.4}, {:.4}] {:>8} {:>7.3} {:>6}",
            e.condition, e.pi, e.rate, e.ci_low, e.ci_high, exact, cell.mean_final_p_h1, e_pi
        );
    }
}
