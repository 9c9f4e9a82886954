use std::io::{stderr, stdout};

fn main() {
    let code = krrlab_cli::run_command(std::env::args_os(), &mut stdout().lock(), &mut stderr().lock());
    std::process::exit(code);
}
