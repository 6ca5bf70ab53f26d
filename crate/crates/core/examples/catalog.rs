//! Prints the manufactured problem catalog: domains, interfaces, β, exact
//! solutions and density triples.
//!
//! cargo run --example catalog [name]

use interface_pinn::problems::{catalog_report, find};

fn main() -> interface_pinn::Result<()> {
    match std::env::args().nth(1) {
        Some(name) => print!("{}", find(&name)?.report()),
        None => print!("{}", catalog_report()),
    }
    Ok(())
}
