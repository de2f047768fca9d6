fn main() {
    std::process::exit(dataflow_kit::cli::run(std::env::args_os()));
}
