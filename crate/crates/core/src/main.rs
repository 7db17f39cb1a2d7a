use clap::Parser;

use rpq_urn::cli::{self, Cli};

fn main() {
    let parsed = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { cli::EXIT_INVALID } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(f) = cli::run(&parsed, &mut std::io::stdout().lock()) {
        eprintln!("error: {f}");
        std::process::exit(f.exit_code());
    }
}
