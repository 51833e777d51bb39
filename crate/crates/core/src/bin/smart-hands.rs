fn main() -> std::process::ExitCode {
    smart_hands::cli::main_with_args(std::env::args_os())
}
