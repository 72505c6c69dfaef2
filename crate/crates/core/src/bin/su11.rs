use clap::Parser;

use su11::cli::{run, Cli, CliError};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        match &e {
            CliError::OracleFailure(r) => eprintln!(
                "su11: oracle tolerances not met (G0 {}, |G1| {}, gamma1 {}, residuals {})",
                r.g0.pass, r.g1_abs.pass, r.gamma1.pass, r.residuals.pass
            ),
            other => eprintln!("su11: {other}"),
        }
        std::process::exit(e.exit_code());
    }
}
