use std::io;

fn main() {
    let code = instanton_lab::commands::run_cli(std::env::args(), &mut io::stdout(), &mut io::stderr());
    std::process::exit(code);
}
