//! Milliseconds per Adam step for each activation/ω mode at the problem's
//! middle density.
//!
//! cargo run --release --example step_timing [problem] [steps]

use interface_pinn::network::{ActivationMode, OmegaMode};
use interface_pinn::problems::find;
use interface_pinn::training::{train, TrainConfig};

fn main() -> interface_pinn::Result<()> {
    let mut args = std::env::args().skip(1);
    let problem = find(&args.next().unwrap_or_else(|| "line2d".into()))?;
    let steps: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(200);
    let modes = [
        (ActivationMode::MultiActivation, OmegaMode::Differentiated),
        (ActivationMode::MultiActivation, OmegaMode::Frozen),
        (ActivationMode::TanhOnly, OmegaMode::Frozen),
    ];
    for (mode, omega) in modes {
        let mut c = TrainConfig::for_problem(&problem, problem.density_triples[1], steps);
        c.mode = mode;
        c.omega_mode = omega;
        c.log_every = steps.max(1);
        let out = train(&problem, &c)?;
        println!(
            "{} / ω {}: {:.2} ms/step, points {:?}",
            mode.name(),
            omega.name(),
            out.record.wall_clock_s * 1e3 / steps.max(1) as f64,
            out.record.sizes
        );
    }
    Ok(())
}
