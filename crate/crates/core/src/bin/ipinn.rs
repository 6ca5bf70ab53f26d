fn main() {
    std::process::exit(interface_pinn::cli::main_with_args(std::env::args_os()));
}
