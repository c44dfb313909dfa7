//! The experiment drivers behind the `bench` binary.
//!
//! Each driver returns [`RunReport`]s carrying timings, diagnostics and the
//! pass/fail outcome of its acceptance checks.

mod mixed;
mod poisson;
mod wave;

use std::time::Instant;

use serde::Serialize;

pub use mixed::{run_mixed_check, MixedCheck};
pub use poisson::{poisson_exact, poisson_markers, poisson_source, run_poisson, solve_poisson, solve_poisson_on, PoissonSolution};
pub use wave::{late_energy_ratio, run_wave, WaveParams, WaveRun, WaveSample};

use crate::error::Result;
use crate::fem::{custom_parloop, perturbation_kernel, CustomArg, Function, FunctionSpace, Iterate};
use crate::data::Access;
use crate::mesh::unit_square_mesh;

/// Wall time per phase in seconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PhaseTimes {
    pub assemble_lhs: f64,
    pub assemble_rhs: f64,
    pub solve: f64,
    pub total: f64,
}

impl PhaseTimes {
    /// Elementwise minimum.
    pub fn min(self, o: PhaseTimes) -> PhaseTimes {
        PhaseTimes {
            assemble_lhs: self.assemble_lhs.min(o.assemble_lhs),
            assemble_rhs: self.assemble_rhs.min(o.assemble_rhs),
            solve: self.solve.min(o.solve),
            total: self.total.min(o.total),
        }
    }
}

/// One acceptance band and whether the run met it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub pass: bool,
}

impl Check {
    /// `lo <= value <= hi`; NaN fails.
    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Check {
        Check {
            name: name.into(),
            value,
            lo,
            hi,
            pass: value >= lo && value <= hi,
        }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Check {
        Check {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            lo: 1.0,
            hi: 1.0,
            pass: ok,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunReport {
    pub case: String,
    pub n: usize,
    pub dofs: usize,
    pub degree: usize,
    pub threads: usize,
    pub times: PhaseTimes,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l2_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    /// Convergence rate against the previous (coarser) report of a series.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<Check>,
    /// Case-specific diagnostics.
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub extra: serde_json::Value,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// `log(e_k / e_{k+1}) / log(h_k / h_{k+1})` with `h = 1/n`.
pub fn convergence_rate(n0: usize, e0: f64, n1: usize, e1: f64) -> f64 {
    (e0 / e1).ln() / (n1 as f64 / n0 as f64).ln()
}

/// Runs `f` once untimed, then `runs` more times, returning the last result
/// and the elementwise minimum of the reported phase times.
pub fn timed_min<T>(runs: usize, mut f: impl FnMut() -> Result<(T, PhaseTimes)>) -> Result<(T, PhaseTimes)> {
    let (mut out, mut best) = f()?;
    for k in 0..runs {
        let (o, t) = f()?;
        best = if k == 0 { t } else { best.min(t) };
        out = o;
    }
    Ok((out, best))
}

pub(crate) fn seconds_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

/// Seed of the custom-kernel perturbation: `BENCH_SEED` if set and numeric,
/// else 0.
pub fn bench_seed() -> u64 {
    std::env::var("BENCH_SEED").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(0)
}

/// Fills a P1 field on `unit_square_mesh(n)` with the perturbation kernel and
/// checks the band `[0.61, 0.65]`.
pub fn run_custom_kernel(n: usize, seed: u64) -> Result<RunReport> {
    let start = Instant::now();
    let mesh = std::sync::Arc::new(unit_square_mesh(n)?);
    let v = FunctionSpace::new(&mesh, 1)?;
    let mut c = Function::new(&v, "c");
    custom_parloop(
        &perturbation_kernel(seed),
        vec![CustomArg::Function(&mut c, Access::Write)],
        Iterate::Nodes(&v),
    )?;
    let lo = c.values().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = c.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(RunReport {
        case: "custom_kernel".into(),
        n,
        dofs: v.num_nodes(),
        degree: 1,
        threads: crate::parloop::default_threads(),
        times: PhaseTimes {
            total: seconds_since(start),
            ..Default::default()
        },
        checks: vec![
            Check::within("perturbation_min", lo, 0.61, 0.65),
            Check::within("perturbation_max", hi, 0.61, 0.65),
        ],
        extra: serde_json::json!({ "seed": seed }),
        ..Default::default()
    })
}
