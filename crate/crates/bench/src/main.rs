fn main() {
    std::process::exit(mfg_bench::cli::main_exit_code());
}
