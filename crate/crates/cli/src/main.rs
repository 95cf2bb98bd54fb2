use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use perimlab::scenario::{list_scenarios, load, Options};
use perimlab::Error;

/// Run nonlocal-perimeter experiments from a JSON scenario.
#[derive(Parser, Debug)]
#[command(name = "perimlab", version)]
struct Args {
    /// Scenario file, or `bundled:<id>` for a bundled scenario.
    #[arg(long, required_unless_present = "list")]
    config: Option<String>,
    /// Output directory; files go to `<out>/<scenario id>/`.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Replace the scenario seeds by `N, N+1, ...`.
    #[arg(long, value_name = "N")]
    seed_override: Option<u64>,
    /// Multiply every grid cell count by F.
    #[arg(long, value_name = "F", default_value_t = 1.0)]
    resolution_scale: f64,
    /// Print the bundled scenarios and exit.
    #[arg(long)]
    list: bool,
}

const VALIDATION: u8 = 2;
const NUMERICAL: u8 = 3;
const IO: u8 = 1;

fn fail(code: u8, e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(VALIDATION) } else { ExitCode::SUCCESS };
        }
    };
    if args.list {
        print!("{}", list_scenarios());
        return ExitCode::SUCCESS;
    }
    let path = args.config.expect("required unless --list");
    let scenario = match load(&path) {
        Ok(s) => s,
        Err(e @ Error::Io(_)) => return fail(IO, &e),
        Err(e) => return fail(VALIDATION, &e),
    };
    let options = Options { seed_override: args.seed_override, resolution_scale: args.resolution_scale };
    let prepared = match scenario.prepare(&options) {
        Ok(p) => p,
        Err(e) => return fail(VALIDATION, &e),
    };
    let outputs = match prepared.run() {
        Ok(o) => o,
        Err(e @ Error::Io(_)) => return fail(IO, &e),
        Err(e) => return fail(NUMERICAL, &e),
    };
    match outputs.write(&args.out) {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => fail(IO, &e),
    }
}
