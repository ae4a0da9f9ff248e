fn main() {
    std::process::exit(ncgraph_cli::main_with(std::env::args_os()));
}
