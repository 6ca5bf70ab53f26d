//! Checks the analytic loss gradient (both networks) against central finite
//! differences on a small collocation set.
//!
//! cargo run --release --example gradient_check [problem]

use interface_pinn::autodiff::{check_gradient, CheckOptions};
use interface_pinn::network::{initialize, ActivationMode, Arch, NetworkOptions, OmegaMode};
use interface_pinn::problems::{find, Counts};
use interface_pinn::sampling::{sample_problem, Strategy};
use interface_pinn::training::{LossData, LossWeights};

fn main() -> interface_pinn::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "ellipse2d".into());
    let problem = find(&name)?;
    let colloc = sample_problem(&problem, Counts::new(80, 16, 12, 12), Strategy::LatinHypercube, 1)?;
    let arch = Arch::new(problem.dim, problem.parabolic, vec![10, 10])?;
    for mode in [ActivationMode::MultiActivation, ActivationMode::TanhOnly] {
        for omega in [OmegaMode::Differentiated, OmegaMode::Frozen] {
            let p1 = initialize(&arch, mode, NetworkOptions::default(), 1)?;
            let p2 = initialize(&arch, mode, NetworkOptions::default(), 2)?;
            let data = LossData::new(&problem, &colloc, LossWeights::default(), &p1, omega)?;
            let report = check_gradient(&data, &p1, &p2, CheckOptions { max_entries: 200, ..CheckOptions::default() })?;
            println!("{name} {} ω {}: {}", mode.name(), omega.name(), report.summary());
        }
    }
    Ok(())
}
