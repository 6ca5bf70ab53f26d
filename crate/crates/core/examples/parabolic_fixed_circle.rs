//! Space-time training for the parabolic problem with a static circular
//! interface at (400, 40, 40) plus 100 initial points.
//!
//! cargo run --release --example parabolic_fixed_circle [steps] [problem]

use interface_pinn::problems::find;
use interface_pinn::training::{train_with, TrainConfig};

fn main() -> interface_pinn::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let steps = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let problem = find(args.get(2).map_or("fixed_circle", String::as_str))?;
    let mut config = TrainConfig::for_problem(&problem, problem.density_triples[1], steps);
    config.log_every = (steps / 10).max(1);
    let out = train_with(&problem, &config, |row| {
        println!(
            "step {:>6}  loss {:.3e}  init {:.3e}  space-time rel L2 {:.3e}",
            row.step,
            row.total,
            row.components.init.unwrap_or(f64::NAN),
            row.val_rel_l2
        )
    })?;
    print!("{}", out.record.summary());
    Ok(())
}
