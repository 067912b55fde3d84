fn main() {
    std::process::exit(semfill_cli::commands::main());
}
