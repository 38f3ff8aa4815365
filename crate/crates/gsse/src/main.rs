fn main() {
    std::process::exit(gsse::runner::main_entry());
}
