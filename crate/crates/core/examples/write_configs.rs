//! Regenerates the shipped run configs under `configs/`.
//!
//! `full/` holds one full-budget config per problem and density triple;
//! `desk/` holds reduced-step variants at the middle triple.
//!
//! cargo run --example write_configs [dir]

use std::fs;
use std::path::PathBuf;

use interface_pinn::cli::RunConfig;
use interface_pinn::problems::catalog;

const DESK_STEPS: usize = 20_000;

fn main() -> interface_pinn::Result<()> {
    let root = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "configs".into()));
    fs::create_dir_all(root.join("full"))?;
    fs::create_dir_all(root.join("desk"))?;
    for problem in catalog() {
        for counts in problem.density_triples {
            let mut cfg = RunConfig::for_problem(&problem);
            cfg.train.counts = counts;
            let tag = format!("{}_{}_{}_{}", problem.name, counts.interior, counts.boundary, counts.interface);
            cfg.output = PathBuf::from(format!("runs/full/{tag}"));
            let header = format!("# {} — {}\n", problem.name, problem.title);
            fs::write(root.join("full").join(format!("{tag}.cfg")), header + &cfg.to_text())?;
        }
        let mut cfg = RunConfig::for_problem(&problem);
        cfg.train.steps = DESK_STEPS;
        cfg.train.log_every = 500;
        cfg.output = PathBuf::from(format!("runs/desk/{}", problem.name));
        let header = format!("# {} — {} (desk budget)\n", problem.name, problem.title);
        fs::write(root.join("desk").join(format!("{}.cfg", problem.name)), header + &cfg.to_text())?;
    }
    println!("wrote configs under {}", root.display());
    Ok(())
}
