//! Builds a multi-activation network, shows the interface weights ω₁/ω₂, the
//! blended activation, parameter counts and forward values in both modes.
//!
//! cargo run --example network_forward

use interface_pinn::network::{
    blended_activation, forward, initialize, weight_functions, ActivationMode, Arch, NetworkOptions,
};
use interface_pinn::problems::find;

fn main() -> interface_pinn::Result<()> {
    let problem = find("ellipse2d")?;
    let arch = Arch::new(2, false, vec![50, 50, 50])?;
    println!("architecture {}", arch.describe());
    for d in [0.0, 0.05, 0.1, 0.3, 1.0] {
        let x = [0.2 + d, 0.0];
        let (w1, w2) = weight_functions(&x, &problem.interface, 0.0, 10.0)?;
        println!("d={d:<5} ω₁={w1:.6} ω₂={w2:.6}");
    }
    println!("blend at ω=(0.5,0.5), z=0: {:?}", blended_activation(&[0.0], &[0.0], 0.5, 0.5, 1.0));

    let maf = initialize(&arch, ActivationMode::MultiActivation, NetworkOptions::default(), 0)?;
    let tanh = initialize(&arch, ActivationMode::TanhOnly, NetworkOptions::default(), 0)?;
    println!(
        "parameters per network: tanh branch + output {}, Gaussian branch {}, total {}",
        maf.tanh_count(),
        maf.gauss_count(),
        maf.len()
    );
    for x in [[0.2, 0.0], [0.5, 0.5], [0.9, -0.9]] {
        let a = forward(&maf, &x, None, Some(&problem.interface))?;
        let b = forward(&tanh, &x, None, None)?;
        println!("u({:?}): multi-activation {a:+.6}, tanh-only {b:+.6}", x);
    }
    Ok(())
}
