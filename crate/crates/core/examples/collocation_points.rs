//! Samples collocation points for a problem and writes them as CSV
//! (`x1..xd[,t],set_tag,region`).
//!
//! cargo run --example collocation_points [problem] [grid|lhs] [out.csv]

use std::path::PathBuf;

use interface_pinn::problems::find;
use interface_pinn::sampling::{sample_problem, Strategy};

fn main() -> interface_pinn::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let problem = find(args.get(1).map_or("ellipse2d", String::as_str))?;
    let strategy = match args.get(2) {
        Some(s) => Strategy::parse(s).expect("grid or lhs"),
        None => problem.default_strategy,
    };
    let counts = problem.density_triples[1];
    let set = sample_problem(&problem, counts, strategy, 0)?;
    println!(
        "{} ({}): Ω₁ {}, Ω₂ {}, ∂Ω {}, Γ {}, t=0 {}",
        problem.name,
        strategy.name(),
        set.interior1.len(),
        set.interior2.len(),
        set.boundary.len(),
        set.interface.len(),
        set.initial.as_ref().map_or(0, Vec::len)
    );
    let out = PathBuf::from(args.get(3).cloned().unwrap_or_else(|| format!("{}_points.csv", problem.name)));
    set.write_csv(&out)?;
    println!("wrote {}", out.display());
    Ok(())
}
