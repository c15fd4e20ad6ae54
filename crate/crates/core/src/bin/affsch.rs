use std::io::{stderr, stdout};

use affine_schubert::cli;

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let code = cli::run(&argv, &mut stdout(), &mut stderr());
    std::process::exit(code);
}
