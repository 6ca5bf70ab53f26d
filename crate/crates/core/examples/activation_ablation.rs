//! Multi-activation versus tanh-only on the same problem, points, seeds and
//! budget; prints per-seed errors and the ratio of medians.
//!
//! cargo run --release --example activation_ablation [problem] [steps] [seeds]

use interface_pinn::cli::median;
use interface_pinn::network::ActivationMode;
use interface_pinn::problems::find;
use interface_pinn::training::{train, TrainConfig};

fn main() -> interface_pinn::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let problem = find(args.get(1).map_or("ellipse2d", String::as_str))?;
    let steps = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let seeds: u64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(3);
    let mut medians = Vec::new();
    for mode in [ActivationMode::MultiActivation, ActivationMode::TanhOnly] {
        let mut errs = Vec::new();
        for seed in 0..seeds {
            let mut config = TrainConfig::for_problem(&problem, problem.density_triples[1], steps).with_seed(seed);
            config.mode = mode;
            config.log_every = steps.max(1);
            let out = train(&problem, &config)?;
            println!("{} seed {seed}: {:.3e} ({:.1}s)", mode.name(), out.record.final_val_rel_l2(), out.record.wall_clock_s);
            errs.push(out.record.final_val_rel_l2());
        }
        medians.push(median(&mut errs));
    }
    println!(
        "median multi-activation {:.3e}, tanh-only {:.3e}, ratio {:.3}",
        medians[0],
        medians[1],
        medians[0] / medians[1]
    );
    Ok(())
}
