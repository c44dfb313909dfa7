//! Conjugate gradients, lumped mass and nested block operators.

mod block;
mod cg;

pub use block::{block_spmv, BlockMat};
pub use cg::{cg_solve, CgParams, Precond, SolveReport, StopReason};

use crate::data::Mat;
use crate::error::{Error, Result};
use crate::fem::{assemble_vector, Coefficient, DirichletBC, Form, Function, FunctionSpace};

/// A square operator `y = A x`.
pub trait LinearOperator {
    fn size(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()>;
    fn diagonal(&self) -> Vec<f64>;
}

impl LinearOperator for Mat {
    fn size(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if self.nrows() != self.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.nrows(),
                got: self.ncols(),
            });
        }
        self.spmv_into(x, y)
    }

    fn diagonal(&self) -> Vec<f64> {
        Mat::diagonal(self)
    }
}

/// `integral of phi_i dx` for every node: the lumped (row-sum) mass.
pub fn lumped_mass(v: &FunctionSpace) -> Result<Function> {
    if v.components() != 1 {
        return Err(Error::UnsupportedForm("lumped mass needs a scalar space".into()));
    }
    assemble_vector(&Form::source(v, Coefficient::Constant(1.0)), &[])
}

/// Solves `A u = b` for a system assembled with `bcs`.
///
/// CG starts from zero with the boundary values already in place. The
/// constrained rows are identity rows and `b` holds the boundary values, so
/// those entries of the residual and search directions stay exactly zero and
/// the boundary values come out untouched.
pub fn solve(a: &Mat, b: &Function, bcs: &[&DirichletBC], params: &CgParams) -> Result<(Function, SolveReport)> {
    let mut x0 = Function::new(b.space(), "u");
    for bc in bcs {
        bc.apply(&mut x0)?;
    }
    let (x, report) = cg_solve(a, b.values(), Some(x0.values()), params)?;
    Ok((Function::from_vec(b.space(), "u", x)?, report))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::fem::assemble_matrix;
    use crate::mesh::{unit_square_mesh, Mesh};

    #[test]
    fn lumped_mass_oracles() {
        let tri = Arc::new(Mesh::from_cells(2, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0], vec![0, 1, 2], |_| 1).unwrap());
        let ml = lumped_mass(&FunctionSpace::new(&tri, 1).unwrap()).unwrap();
        for x in ml.values() {
            assert!((x - 1.0 / 6.0).abs() < 1e-15);
        }
        let mesh = Arc::new(unit_square_mesh(5).unwrap());
        let v = FunctionSpace::new(&mesh, 1).unwrap();
        let ml = lumped_mass(&v).unwrap();
        assert!((ml.values().iter().sum::<f64>() - 1.0).abs() < 1e-13);
        assert!(ml.values().iter().all(|&x| x > 0.0));
        let rows = assemble_matrix(&Form::mass(&v), &[]).unwrap().row_sums();
        for (a, b) in ml.values().iter().zip(&rows) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn all_boundary_constant_solution() {
        // every node constrained: the solution is the boundary value
        let mesh = Arc::new(unit_square_mesh(3).unwrap());
        let v = FunctionSpace::new(&mesh, 1).unwrap();
        let bc = DirichletBC::on_nodes(&v, 5.0, (0..v.num_nodes()).collect()).unwrap();
        let a = assemble_matrix(&Form::stiffness(&v), &[&bc]).unwrap();
        let b = assemble_vector(&Form::source(&v, Coefficient::Constant(1.0)), &[&bc]).unwrap();
        let (u, rep) = solve(&a, &b, &[&bc], &CgParams::default()).unwrap();
        assert!(rep.converged);
        assert!(u.values().iter().all(|&x| x == 5.0));
    }

    #[test]
    fn boundary_values_survive_the_solve_exactly() {
        let mesh = Arc::new(unit_square_mesh(6).unwrap());
        let v = FunctionSpace::new(&mesh, 2).unwrap();
        let bc = DirichletBC::new(&v, 0.3, &[1, 3]).unwrap();
        let a = assemble_matrix(&Form::stiffness(&v), &[&bc]).unwrap();
        let b = assemble_vector(&Form::source(&v, Coefficient::Constant(10.0)), &[&bc]).unwrap();
        let (u, rep) = solve(&a, &b, &[&bc], &CgParams::default()).unwrap();
        assert!(rep.converged);
        assert!(bc.nodes().iter().all(|&n| u.values()[n] == 0.3));
        assert!(rep.final_residual_norm <= 1e-8 * b.values().iter().map(|x| x * x).sum::<f64>().sqrt());
    }
}
