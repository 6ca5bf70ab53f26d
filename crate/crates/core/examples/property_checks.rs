//! Runs the derivative, distance-oracle and manufactured-data suites.
//!
//! cargo run --release --example property_checks [seed]

use interface_pinn::checks::run_all;

fn main() -> interface_pinn::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let mut ok = true;
    for report in run_all(seed)? {
        println!("{}", report.line());
        ok &= report.passed;
    }
    if !ok {
        std::process::exit(3);
    }
    Ok(())
}
