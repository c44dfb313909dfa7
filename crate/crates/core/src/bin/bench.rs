use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use opfem::bench::{bench_seed, run_custom_kernel, run_mixed_check, run_poisson, run_wave, RunReport, WaveParams};
use opfem::parloop::set_default_threads;

#[derive(Parser)]
#[command(name = "bench", about = "Poisson, wave and mixed-system experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Poisson convergence study
    Poisson {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 1)]
        degree: usize,
        #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Timed repetitions after the warm-up run
        #[arg(long, default_value_t = 3)]
        runs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Explicit wave equation with boundary forcing
    Wave {
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long = "T", default_value_t = 1.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Blockwise against monolithic assembly of a mixed system
    Mixed {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Every case at its acceptance parameters
    All {
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn all_cases() -> opfem::Result<Vec<RunReport>> {
    let mut reports = Vec::new();
    reports.extend(run_poisson(2, 1, &[8, 16, 32], 3)?);
    reports.extend(run_poisson(2, 2, &[8, 16, 32], 3)?);
    reports.extend(run_poisson(3, 1, &[4, 8], 3)?);
    reports.push(run_wave(&WaveParams::new(32, 1e-3, 1.0))?.report);
    for n in [1, 2, 4] {
        reports.push(run_mixed_check(n)?.0);
    }
    reports.push(run_custom_kernel(32, bench_seed())?);
    Ok(reports)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, out) = match cli.command {
        Command::Poisson {
            dim,
            degree,
            n,
            threads,
            runs,
            out,
        } => {
            set_default_threads(threads);
            (run_poisson(dim, degree, &n, runs), out)
        }
        Command::Wave {
            n,
            dt,
            t_end,
            threads,
            out,
        } => {
            set_default_threads(threads);
            (run_wave(&WaveParams::new(n, dt, t_end)).map(|r| vec![r.report]), out)
        }
        Command::Mixed { n, out } => (run_mixed_check(n).map(|r| vec![r.0]), out),
        Command::All { threads, out } => {
            set_default_threads(threads);
            (all_cases(), out)
        }
    };
    let reports = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    for r in &reports {
        let status = if r.passed() { "ok  " } else { "FAIL" };
        let err = r.l2_error.map(|e| format!(" l2={e:.3e}")).unwrap_or_default();
        let rate = r.rate.map(|e| format!(" rate={e:.3}")).unwrap_or_default();
        let its = r.iterations.map(|e| format!(" its={e}")).unwrap_or_default();
        println!(
            "{status} {:<16} n={:<3} dofs={:<6}{err}{rate}{its} total={:.3}s",
            r.case, r.n, r.dofs, r.times.total
        );
        for c in r.checks.iter().filter(|c| !c.pass) {
            println!("       {} = {} outside [{}, {}]", c.name, c.value, c.lo, c.hi);
        }
    }
    if let Some(path) = out {
        let json = serde_json::to_string_pretty(&reports).expect("reports serialize");
        if let Err(e) = std::fs::write(&path, json) {
            eprintln!("error: writing {}: {e}", path.display());
            return ExitCode::FAILURE;
        }
    }
    if reports.iter().all(RunReport::passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
