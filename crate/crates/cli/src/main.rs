fn main() {
    let code = span_lattice_cli::run(std::env::args_os(), &mut std::io::stdout().lock());
    std::process::exit(code);
}
