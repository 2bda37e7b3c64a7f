fn main() {
    std::process::exit(hyperrule_core::cli::cli(std::env::args_os()));
}
