use std::process::ExitCode;

use clap::Parser;
use crystalflow::benchmark::NAMES;
use crystalflow::Benchmark;
use crystalflow_cli::config::{Cli, Command};
use crystalflow_cli::{parse_config, run_sweep};

const USAGE: u8 = 2;
const UNCONVERGED: u8 = 3;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let args = match cli.command {
        Command::List => {
            for name in NAMES {
                let b = Benchmark::get(name).expect("registered");
                println!("{name:10} n={} sigma={} beta={} t_max={}", b.dim(), b.sigma, b.beta, b.t_max);
            }
            return ExitCode::SUCCESS;
        }
        Command::Run(args) => args,
    };
    let cfg = match parse_config(&args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("usage error: {e}");
            return ExitCode::from(USAGE);
        }
    };
    let mut status = ExitCode::SUCCESS;
    let mut unconverged = false;
    for (run, result) in run_sweep(&cfg) {
        match result {
            Ok(s) => {
                let err = s.max_error.map_or("none".to_string(), |e| format!("{e:.6e}"));
                let ext = s.extinction.map_or("none".to_string(), |t| format!("{t:.6}"));
                println!(
                    "{}: M={} h={:e} steps={} iterations={} extinction={ext} max dist_{}={err}",
                    run.out.display(),
                    run.m,
                    run.h,
                    s.steps,
                    s.iterations,
                    run.metric
                );
                unconverged |= !s.all_converged;
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                status = ExitCode::FAILURE;
            }
        }
    }
    if unconverged && status == ExitCode::SUCCESS {
        eprintln!("some resolvent solves did not converge; see run.log");
        status = ExitCode::from(UNCONVERGED);
    }
    status
}
