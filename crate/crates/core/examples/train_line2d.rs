//! Desk-scale training on the straight-line problem at (400, 80, 50), printing
//! the loss components as training goes and the error at the end.
//!
//! cargo run --release --example train_line2d [steps] [maf|tanh] [seed]

use interface_pinn::network::ActivationMode;
use interface_pinn::problems::{find, Counts};
use interface_pinn::training::{train_with, TrainConfig, CSV_HEADER};

fn main() -> interface_pinn::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let steps = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let mode = args.get(2).and_then(|s| ActivationMode::parse(s)).unwrap_or(ActivationMode::MultiActivation);
    let seed = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(0);
    let problem = find("line2d")?;
    let mut config = TrainConfig::for_problem(&problem, Counts::new(400, 80, 50, 0), steps).with_seed(seed);
    config.mode = mode;
    config.log_every = (steps / 20).max(1);
    println!("{CSV_HEADER}");
    let outcome = train_with(&problem, &config, |row| println!("{}", row.csv_line()))?;
    print!("{}", outcome.record.summary());
    Ok(())
}
