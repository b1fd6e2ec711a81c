fn main() {
    std::process::exit(grushinlab::main_with_args(std::env::args_os()));
}
