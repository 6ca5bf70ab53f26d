//! Short run, checkpoint to disk, reload, and export a u_exact/u_nn/abs_err grid;
//! the reloaded values match `forward()` bit for bit.
//!
//! cargo run --release --example export_solution_grid [problem] [steps] [dir]

use std::path::PathBuf;

use interface_pinn::cli::{export_grid, run, GridSpec, RunConfig};
use interface_pinn::network::{forward, Checkpoint};
use interface_pinn::problems::find;

fn main() -> interface_pinn::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let problem = find(args.get(1).map_or("ellipse2d", String::as_str))?;
    let mut cfg = RunConfig::for_problem(&problem);
    cfg.train.steps = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(500);
    cfg.train.log_every = 100;
    cfg.output = PathBuf::from(args.get(3).cloned().unwrap_or_else(|| format!("runs/export_{}", problem.name)));
    let artifacts = run(&cfg)?;
    println!("trained: rel L2 {:.3e}", artifacts.record.final_val_rel_l2());

    let checkpoint = Checkpoint::load(&artifacts.checkpoint)?;
    let spec = GridSpec {
        resolution: 41,
        axes: (0, 1),
        point: None,
        t: problem.parabolic.then_some(problem.horizon),
    };
    let csv = export_grid(&checkpoint, &problem, &spec)?;
    let path = cfg.output.join("grid.csv");
    std::fs::write(&path, &csv)?;

    // Spot-check the round trip on the first data row.
    let row: Vec<&str> = csv.lines().nth(1).expect("grid has points").split(',').collect();
    let x = [row[0].parse::<f64>().unwrap_or(0.0), row[1].parse::<f64>().unwrap_or(0.0)];
    let region_col = if problem.parabolic { 3 } else { 2 };
    let net = if row[region_col] == "omega1" { &checkpoint.networks[0] } else { &checkpoint.networks[1] };
    let direct = forward(net, &x, spec.t, Some(&problem.interface))?;
    let exported: f64 = row[region_col + 2].parse().unwrap_or(f64::NAN);
    println!("{} rows → {}; first row u_nn {exported:e} vs forward {direct:e} (equal: {})", csv.lines().count() - 1, path.display(), exported == direct);
    Ok(())
}
