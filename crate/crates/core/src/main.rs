use std::io::{self, Read};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mut stdin = io::stdin().lock();
    let mut stdout = io::stdout().lock();
    let mut stderr = io::stderr().lock();
    let status = crocopat::cli::run(&args, &mut stdin as &mut dyn Read, &mut stdout, &mut stderr);
    std::process::exit(status);
}
