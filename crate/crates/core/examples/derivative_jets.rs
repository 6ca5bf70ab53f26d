//! Value, gradient, Laplacian and time derivative of a space-time network at
//! one point, next to central finite differences.
//!
//! cargo run --example derivative_jets

use interface_pinn::autodiff::eval_jet;
use interface_pinn::network::{initialize, ActivationMode, Arch, NetworkOptions};

fn main() -> interface_pinn::Result<()> {
    let arch = Arch::new(2, true, vec![20, 20])?;
    let net = initialize(&arch, ActivationMode::MultiActivation, NetworkOptions::default(), 3)?;
    let (x, t, omega) = ([0.3, -0.4], 0.25, (0.7, 0.3));
    let jet = eval_jet(&net, &x, Some(t), omega)?;
    let u = |x: [f64; 2], t: f64| eval_jet(&net, &x, Some(t), omega).map(|j| j.value);
    let h = 1e-4;
    let mut lap = 0.0;
    for i in 0..2 {
        let (mut p, mut m) = (x, x);
        p[i] += h;
        m[i] -= h;
        let (up, um, u0) = (u(p, t)?, u(m, t)?, jet.value);
        println!("∂u/∂x{}: jet {:+.10}  FD {:+.10}", i + 1, jet.grad[i], (up - um) / (2.0 * h));
        lap += (up - 2.0 * u0 + um) / (h * h);
    }
    println!("Δu:     jet {:+.10}  FD {:+.10}", jet.lap, lap);
    let dt = (u(x, t + h)? - u(x, t - h)?) / (2.0 * h);
    println!("∂u/∂t:  jet {:+.10}  FD {:+.10}", jet.dt.unwrap_or(f64::NAN), dt);
    Ok(())
}
