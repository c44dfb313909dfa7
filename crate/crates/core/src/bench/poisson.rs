use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use super::{convergence_rate, seconds_since, timed_min, Check, PhaseTimes, RunReport};
use crate::data::Mat;
use crate::error::{Error, Result};
use crate::fem::{assemble_matrix, assemble_vector, l2_error, Coefficient, DirichletBC, Form, Function, FunctionSpace};
use crate::mesh::{unit_cube_mesh, unit_square_mesh, Mesh};
use crate::solver::{cg_solve, CgParams, Precond, SolveReport};

/// Exact solution: `sin(pi x) sin(pi y)` in 2D,
/// `cos(4 pi x) sin(4 pi y) cos(4 pi z)` in 3D.
pub fn poisson_exact(dim: usize) -> fn(&[f64]) -> f64 {
    if dim == 2 {
        |x| (PI * x[0]).sin() * (PI * x[1]).sin()
    } else {
        |x| (4.0 * PI * x[0]).cos() * (4.0 * PI * x[1]).sin() * (4.0 * PI * x[2]).cos()
    }
}

/// `-laplace(u)` for [`poisson_exact`].
pub fn poisson_source(dim: usize) -> fn(&[f64]) -> f64 {
    if dim == 2 {
        |x| 2.0 * PI * PI * (PI * x[0]).sin() * (PI * x[1]).sin()
    } else {
        |x| 48.0 * PI * PI * (4.0 * PI * x[0]).cos() * (4.0 * PI * x[1]).sin() * (4.0 * PI * x[2]).cos()
    }
}

/// Boundary markers carrying homogeneous Dirichlet data: all four sides in
/// 2D, the faces `y = 0` and `y = 1` in 3D (where the exact solution
/// vanishes; its normal derivative vanishes on the others).
pub fn poisson_markers(dim: usize) -> &'static [u32] {
    if dim == 2 {
        &[1, 2, 3, 4]
    } else {
        &[3, 4]
    }
}

/// Everything a Poisson run produces.
#[derive(Debug, Clone)]
pub struct PoissonSolution {
    pub space: FunctionSpace,
    pub a: Mat,
    pub b: Function,
    pub u: Function,
    pub bc: DirichletBC,
    pub solve: SolveReport,
    pub l2_error: f64,
    pub times: PhaseTimes,
}

/// Solves the Poisson problem of [`poisson_exact`] on `mesh` with the
/// source interpolated into the solution space, CG with Jacobi,
/// `rtol = 1e-8`, `atol = 1e-14`, at most `10 * dofs` iterations.
pub fn solve_poisson_on(mesh: &Arc<Mesh>, degree: usize) -> Result<PoissonSolution> {
    let start = Instant::now();
    let dim = mesh.dim();
    let v = FunctionSpace::new(mesh, degree)?;
    let bc = DirichletBC::new(&v, 0.0, poisson_markers(dim))?;

    let t = Instant::now();
    let a = assemble_matrix(&Form::stiffness(&v), &[&bc])?;
    let assemble_lhs = seconds_since(t);

    let t = Instant::now();
    let mut f = Function::new(&v, "f");
    f.interpolate(poisson_source(dim))?;
    let b = assemble_vector(&Form::source(&v, Coefficient::Function(&f)), &[&bc])?;
    let assemble_rhs = seconds_since(t);

    let t = Instant::now();
    let params = CgParams {
        rtol: 1e-8,
        atol: 1e-14,
        max_iter: 10 * v.num_nodes(),
        precond: Precond::Jacobi,
    };
    let mut x0 = Function::new(&v, "x0");
    bc.apply(&mut x0)?;
    let (x, report) = cg_solve(&a, b.values(), Some(x0.values()), &params)?;
    let u = Function::from_vec(&v, "u", x)?;
    let solve = seconds_since(t);

    let err = l2_error(&u, poisson_exact(dim))?;
    Ok(PoissonSolution {
        space: v,
        a,
        b,
        u,
        bc,
        solve: report,
        l2_error: err,
        times: PhaseTimes {
            assemble_lhs,
            assemble_rhs,
            solve,
            total: seconds_since(start),
        },
    })
}

/// [`solve_poisson_on`] the unit square or cube with `n` subdivisions.
pub fn solve_poisson(dim: usize, degree: usize, n: usize) -> Result<PoissonSolution> {
    let mesh = match dim {
        2 => unit_square_mesh(n)?,
        3 => unit_cube_mesh(n)?,
        _ => return Err(Error::UnsupportedElement(format!("{dim}-dimensional Poisson"))),
    };
    solve_poisson_on(&Arc::new(mesh), degree)
}

/// One report per `n` (ascending), each timed as the minimum of `runs`
/// repetitions after a warm-up. Bands: the finest-pair rate for 2D
/// (`[1.9, 2.1]` for P1, `[2.9, 3.1]` for P2) or the coarse-to-fine error
/// ratio for 3D (`[3.2, 4.8]`), plus convergence of every solve.
pub fn run_poisson(dim: usize, degree: usize, n_list: &[usize], runs: usize) -> Result<Vec<RunReport>> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::ShapeMismatch("n values must be strictly ascending".into()));
    }
    let threads = crate::parloop::default_threads();
    let mut reports: Vec<RunReport> = Vec::new();
    for &n in n_list {
        let (sol, times) = timed_min(runs, || {
            let s = solve_poisson(dim, degree, n)?;
            let t = s.times;
            Ok((s, t))
        })?;
        let rate = reports
            .last()
            .map(|prev| convergence_rate(prev.n, prev.l2_error.unwrap(), n, sol.l2_error));
        let mut checks = vec![Check::flag("cg_converged", sol.solve.converged)];
        if let (Some(prev), Some(rate)) = (reports.last(), rate) {
            let ratio = prev.l2_error.unwrap() / sol.l2_error;
            checks.push(match (dim, degree) {
                (2, 1) => Check::within("l2_rate", rate, 1.9, 2.1),
                (2, _) => Check::within("l2_rate", rate, 2.9, 3.1),
                _ => Check::within("l2_error_ratio", ratio, 3.2, 4.8),
            });
        }
        reports.push(RunReport {
            case: format!("poisson_{dim}d_p{degree}"),
            n,
            dofs: sol.space.num_nodes(),
            degree,
            threads,
            times,
            l2_error: Some(sol.l2_error),
            iterations: Some(sol.solve.iterations),
            converged: Some(sol.solve.converged),
            rate,
            checks,
            extra: serde_json::json!({ "final_residual_norm": sol.solve.final_residual_norm }),
        });
    }
    // only the finest pair carries the band
    let len = reports.len();
    for r in reports.iter_mut().take(len.saturating_sub(1)) {
        r.checks.retain(|c| c.name == "cg_converged");
    }
    Ok(reports)
}
