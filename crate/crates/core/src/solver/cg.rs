use serde::{Deserialize, Serialize};

use super::LinearOperator;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Precond {
    None,
    Jacobi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StopReason {
    Rtol,
    Atol,
    Maxit,
}

#[derive(Debug, Clone, Copy)]
pub struct CgParams {
    pub rtol: f64,
    pub atol: f64,
    pub max_iter: usize,
    pub precond: Precond,
}

impl Default for CgParams {
    fn default() -> Self {
        CgParams {
            rtol: 1e-8,
            atol: 1e-14,
            max_iter: 10_000,
            precond: Precond::Jacobi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// `||b - A x||_2` of the returned iterate.
    pub final_residual_norm: f64,
    pub converged: bool,
    pub reason: StopReason,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn true_residual(a: &dyn LinearOperator, b: &[f64], x: &[f64], r: &mut [f64]) -> Result<f64> {
    a.apply(x, r)?;
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    Ok(norm(r))
}

/// Preconditioned conjugate gradients.
///
/// Iterates until the recurrence residual satisfies
/// `||r|| <= max(rtol ||b||, atol)`, then confirms the bound on the true
/// residual `b - A x` (resuming from it if the recurrence has drifted).
/// Running out of iterations is not an error: the iterate with the smallest
/// residual seen is returned with `converged = false`.
pub fn cg_solve(
    a: &dyn LinearOperator,
    b: &[f64],
    x0: Option<&[f64]>,
    params: &CgParams,
) -> Result<(Vec<f64>, SolveReport)> {
    let n = a.size();
    for len in [Some(b.len()), x0.map(<[f64]>::len)].into_iter().flatten() {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, got: len });
        }
    }
    let inv_diag = match params.precond {
        Precond::None => None,
        Precond::Jacobi => {
            let d = a.diagonal();
            if let Some(row) = d.iter().position(|&v| v == 0.0 || !v.is_finite()) {
                return Err(Error::ZeroDiagonal(row));
            }
            Some(d.iter().map(|v| 1.0 / v).collect::<Vec<_>>())
        }
    };
    let precondition = |r: &[f64], z: &mut [f64]| match &inv_diag {
        Some(d) => {
            for ((zi, ri), di) in z.iter_mut().zip(r).zip(d) {
                *zi = ri * di;
            }
        }
        None => z.copy_from_slice(r),
    };

    let bnorm = norm(b);
    let tol = (params.rtol * bnorm).max(params.atol);
    let reason_for = |res: f64| {
        if res <= params.rtol * bnorm {
            StopReason::Rtol
        } else {
            StopReason::Atol
        }
    };

    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut r = vec![0.0; n];
    let mut rnorm = true_residual(a, b, &x, &mut r)?;
    if rnorm <= tol {
        return Ok((
            x,
            SolveReport {
                iterations: 0,
                final_residual_norm: rnorm,
                converged: true,
                reason: reason_for(rnorm),
            },
        ));
    }
    let mut z = vec![0.0; n];
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut best = (rnorm, x.clone());

    for it in 1..=params.max_iter {
        a.apply(&p, &mut ap)?;
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::IndefiniteBreakdown {
                iteration: it,
                curvature: pap,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rnorm = norm(&r);
        if rnorm <= tol {
            let true_norm = true_residual(a, b, &x, &mut r)?;
            if true_norm <= tol {
                return Ok((
                    x,
                    SolveReport {
                        iterations: it,
                        final_residual_norm: true_norm,
                        converged: true,
                        reason: reason_for(true_norm),
                    },
                ));
            }
            // drifted: carry on from the true residual
            rnorm = true_norm;
        }
        if rnorm < best.0 {
            best.0 = rnorm;
            best.1.copy_from_slice(&x);
        }
        precondition(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let x = best.1;
    let final_norm = true_residual(a, b, &x, &mut r)?;
    Ok((
        x,
        SolveReport {
            iterations: params.max_iter,
            final_residual_norm: final_norm,
            converged: false,
            reason: StopReason::Maxit,
        },
    ))
}
