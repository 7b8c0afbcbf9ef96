use std::io::Write;

use clap::Parser;

fn main() {
    let run = tpgabor_cli::run(tpgabor_cli::Cli::parse());
    eprint!("{}", run.stderr);
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(run.stdout.as_bytes());
    let _ = out.flush();
    std::process::exit(run.exit_code);
}
