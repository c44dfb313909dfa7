use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use super::{seconds_since, Check, PhaseTimes, RunReport};
use crate::error::{Error, Result};
use crate::fem::{
    assemble_matrix, assemble_vector_into, pointwise, AssignOp, DirichletBC, Form, Function, FunctionSpace, PExpr,
};
use crate::mesh::unit_square_mesh;
use crate::solver::lumped_mass;

#[derive(Debug, Clone, Copy)]
pub struct WaveParams {
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    /// Amplitude of the boundary forcing `p = a sin(10 pi t)` on marker 1.
    pub amplitude: f64,
    /// The forcing is switched off (boundary value 0) after this time.
    pub forcing_until: f64,
}

impl WaveParams {
    pub fn new(n: usize, dt: f64, t_end: f64) -> WaveParams {
        WaveParams {
            n,
            dt,
            t_end,
            amplitude: 1.0,
            forcing_until: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WaveSample {
    pub step: usize,
    pub t: f64,
    pub p_max: f64,
    pub phi_max: f64,
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct WaveRun {
    pub report: RunReport,
    /// Energy after every step.
    pub energy: Vec<f64>,
    /// Field norms every 100 steps, and after the last step.
    pub samples: Vec<WaveSample>,
    pub p: Function,
    pub phi: Function,
}

fn inf_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// max/min of the energy over steps with `t >= t_end / 2`.
pub fn late_energy_ratio(energy: &[f64]) -> f64 {
    let late = &energy[energy.len() / 2..];
    let hi = late.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = late.iter().copied().fold(f64::INFINITY, f64::min);
    hi / lo
}

/// The explicit wave scheme on `unit_square_mesh(n)`: `phi` and `p` are
/// staggered by half a step, the mass is lumped so every update is
/// pointwise, and only `grad v . grad phi dx` is assembled per step.
///
/// Stops with `InstabilityDetected` once `|p|_inf` exceeds 1000 times its
/// maximum over the first forcing period (0.2 time units).
pub fn run_wave(params: &WaveParams) -> Result<WaveRun> {
    let WaveParams {
        n,
        dt,
        t_end,
        amplitude,
        forcing_until,
    } = *params;
    if !(dt > 0.0) || t_end < dt {
        return Err(Error::ShapeMismatch(format!("need dt > 0 and T >= dt, got dt={dt}, T={t_end}")));
    }
    let start = Instant::now();
    let mesh = Arc::new(unit_square_mesh(n)?);
    let v = FunctionSpace::new(&mesh, 1)?;
    let mut p = Function::new(&v, "p");
    let mut phi = Function::new(&v, "phi");
    let mut bc = DirichletBC::new(&v, 0.0, &[1])?;

    let ml = lumped_mass(&v)?;
    let mut p_constant = Function::new(&v, "p_constant");
    pointwise(&mut p_constant, AssignOp::Assign, dt / PExpr::from(&ml))?;
    // energy diagnostic only
    let k = assemble_matrix(&Form::stiffness(&v), &[])?;
    let mut kphi = vec![0.0; v.num_nodes()];
    let mut rhs = Function::new(&v, "rhs");

    let period = 0.2;
    let mut first_period_max: f64 = 0.0;
    let steps = (t_end / dt).round() as usize;
    let mut energy = Vec::with_capacity(steps + 1);
    let mut samples = Vec::new();
    let mut assemble_time = 0.0;

    for step in 0..=steps {
        let t = step as f64 * dt;
        let forcing = if t <= forcing_until { amplitude } else { 0.0 };
        bc.set_value(forcing * (10.0 * PI * t).sin());
        pointwise(&mut phi, AssignOp::SubAssign, dt / 2.0 * PExpr::from(&p))?;
        let ta = Instant::now();
        assemble_vector_into(&Form::stiffness_action(&v, &phi), &mut rhs)?;
        assemble_time += seconds_since(ta);
        pointwise(&mut p, AssignOp::AddAssign, PExpr::from(&rhs) * &p_constant)?;
        bc.apply(&mut p)?;
        pointwise(&mut phi, AssignOp::SubAssign, dt / 2.0 * PExpr::from(&p))?;

        let p_max = inf_norm(p.values());
        if t <= period {
            first_period_max = first_period_max.max(p_max);
        } else if !p_max.is_finite() || (first_period_max > 0.0 && p_max > 1e3 * first_period_max) {
            return Err(Error::InstabilityDetected {
                step,
                norm: p_max,
                bound: 1e3 * first_period_max,
            });
        }
        k.spmv_into(phi.values(), &mut kphi)?;
        let e = 0.5
            * (p.values().iter().zip(ml.values()).map(|(a, m)| m * a * a).sum::<f64>()
                + phi.values().iter().zip(&kphi).map(|(a, b)| a * b).sum::<f64>());
        energy.push(e);
        if step % 100 == 0 || step == steps {
            samples.push(WaveSample {
                step,
                t,
                p_max,
                phi_max: inf_norm(phi.values()),
                energy: e,
            });
        }
    }

    let ratio = late_energy_ratio(&energy);
    let mut checks = vec![Check::flag("stable", true)];
    if amplitude != 0.0 {
        checks.push(Check::within("late_energy_max_over_min", ratio, 1.0, 1.5));
    }
    let report = RunReport {
        case: "wave".into(),
        n,
        dofs: v.num_nodes(),
        degree: 1,
        threads: crate::parloop::default_threads(),
        times: PhaseTimes {
            assemble_rhs: assemble_time,
            total: seconds_since(start),
            ..Default::default()
        },
        checks,
        extra: serde_json::json!({
            "dt": dt,
            "T": t_end,
            "forcing_until": if forcing_until.is_finite() { Some(forcing_until) } else { None },
            "steps": steps + 1,
            "late_energy_ratio": ratio,
            "final_energy": energy.last(),
            "samples": samples,
        }),
        ..Default::default()
    };
    Ok(WaveRun {
        report,
        energy,
        samples,
        p,
        phi,
    })
}
