fn main() {
    std::process::exit(kdv_bench::cli::main_with(std::env::args_os()));
}
