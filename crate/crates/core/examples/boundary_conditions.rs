//! Forms, Dirichlet conditions and CG: `-lap u = 1` with a value taken from a
//! Function on two edges and a constant on a third, plus a flux on the last.

use std::sync::Arc;

use opfem::fem::{assemble_matrix, assemble_vector, BcValue, Coefficient, DirichletBC, Form, Function, FunctionSpace};
use opfem::mesh::unit_square_mesh;
use opfem::solver::{solve, CgParams};

fn main() -> opfem::Result<()> {
    let mesh = Arc::new(unit_square_mesh(16)?);
    let v = FunctionSpace::new(&mesh, 2)?;
    let mut g = Function::new(&v, "g");
    g.interpolate(|x| x[0] * x[1])?;
    let left_right = DirichletBC::new(&v, BcValue::Function(g), &[1, 2])?;
    let bottom = DirichletBC::new(&v, 0.25, &[3])?;
    let bcs = [&left_right, &bottom];

    let a = assemble_matrix(&Form::stiffness(&v), &bcs)?;
    let mut b = assemble_vector(&Form::source(&v, Coefficient::Constant(1.0)), &[])?;
    let flux = assemble_vector(&Form::facet_source(&v, Coefficient::Constant(-0.5), &[4]), &[])?;
    for (x, y) in b.values_mut().iter_mut().zip(flux.values()) {
        *x += y;
    }
    for bc in bcs {
        bc.apply(&mut b)?;
    }
    let (u, report) = solve(&a, &b, &bcs, &CgParams::default())?;
    println!("{report:?}");
    // corners shared by two conditions take the later one's value
    let mut prescribed = std::collections::BTreeMap::new();
    for bc in bcs {
        for &n in bc.nodes() {
            prescribed.insert(n, bc.value_at(n));
        }
    }
    let exact = prescribed.iter().all(|(&n, &val)| u.values()[n].to_bits() == val.to_bits());
    println!("boundary values kept exactly: {exact}");
    Ok(())
}
