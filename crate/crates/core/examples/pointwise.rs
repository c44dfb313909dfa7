//! Pointwise updates on Functions, compiled to direct parallel loops.

use std::sync::Arc;

use opfem::fem::{pointwise, AssignOp, Function, FunctionSpace, PExpr};
use opfem::mesh::unit_square_mesh;

fn main() -> opfem::Result<()> {
    let mesh = Arc::new(unit_square_mesh(8)?);
    let v = FunctionSpace::new(&mesh, 2)?;
    let mut a = Function::new(&v, "a");
    a.interpolate(|x| x[0] + 2.0 * x[1])?;
    let mut b = Function::new(&v, "b");
    b.interpolate(|x| 1.0 + x[0] * x[1])?;

    // c = (a - 1) / b
    let mut c = Function::new(&v, "c");
    pointwise(&mut c, AssignOp::Assign, (PExpr::from(&a) - 1.0) / &b)?;
    // c += 0.5 * c * a, reading the target
    pointwise(&mut c, AssignOp::AddAssign, 0.5 * PExpr::Target * &a)?;
    // relaxation towards b
    pointwise(&mut c, AssignOp::Assign, 0.999 * PExpr::Target + 0.001 * PExpr::from(&b))?;

    let max = c.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    println!("{} nodes, max c = {max:.6}", v.num_nodes());
    Ok(())
}
