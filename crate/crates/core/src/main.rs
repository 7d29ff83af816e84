fn main() {
    std::process::exit(photon_sql::cli::run(std::env::args_os()));
}
