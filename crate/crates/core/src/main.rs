fn main() {
    std::process::exit(higgs_workbench::cli::run(std::env::args_os()));
}
