//! Sweeps the three density triples of a problem over a few seeds, writing
//! each run under `<out>/sweep/` and the table to `<out>/sweep.csv`.
//!
//! cargo run --release --example density_sweep [problem] [steps] [seeds] [out]

use std::path::PathBuf;

use interface_pinn::cli::{sweep, RunConfig};
use interface_pinn::network::ActivationMode;
use interface_pinn::problems::find;

fn main() -> interface_pinn::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let problem = find(args.get(1).map_or("line2d", String::as_str))?;
    let steps = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1000);
    let seeds = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(2);
    let mut base = RunConfig::for_problem(&problem);
    base.train.steps = steps;
    base.train.log_every = steps.max(1);
    base.output = PathBuf::from(args.get(4).cloned().unwrap_or_else(|| format!("runs/sweep_{}", problem.name)));
    let result = sweep(&base, &problem.density_triples, &[ActivationMode::MultiActivation], seeds, |r| {
        eprintln!("{:?} seed {}: {:e}", (r.counts.interior, r.counts.boundary, r.counts.interface), r.seed, r.final_val_rel_l2)
    })?;
    std::fs::create_dir_all(&base.output)?;
    std::fs::write(base.output.join("sweep.csv"), result.to_csv())?;
    print!("{}", result.to_csv());
    println!("monotone in density: {}", result.monotone(ActivationMode::MultiActivation));
    Ok(())
}
