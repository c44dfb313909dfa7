//! Kernels written by hand: a seeded host kernel that perturbs a field and an
//! AST kernel that reduces cell areas into a Global.

use std::sync::Arc;

use opfem::bench::bench_seed;
use opfem::data::{Access, Global};
use opfem::fem::{custom_parloop, l2_error, perturbation_kernel, CustomArg, Function, FunctionSpace, Iterate};
use opfem::kernel_ir::{Expr, Kernel, KernelAst, Param, Stmt};
use opfem::mesh::unit_square_mesh;
use opfem::place;

fn main() -> opfem::Result<()> {
    let mesh = Arc::new(unit_square_mesh(16)?);
    let v = FunctionSpace::new(&mesh, 1)?;

    let seed = bench_seed();
    let mut c = Function::new(&v, "c");
    custom_parloop(&perturbation_kernel(seed), vec![CustomArg::Function(&mut c, Access::Write)], Iterate::Nodes(&v))?;
    let err = l2_error(&c, |_| 0.63)?;
    println!("seed {seed}: ||c - 0.63|| = {err:.3e}");

    // area of a triangle from its vertex coordinates
    let ld = |i: i64, d: i64| Expr::Load(place!("C", i, d));
    let area = 0.5 * ((ld(1, 0) - ld(0, 0)) * (ld(2, 1) - ld(0, 1)) - (ld(2, 0) - ld(0, 0)) * (ld(1, 1) - ld(0, 1)));
    let k = Kernel::from_ast(KernelAst::new(
        "area",
        vec![Param::new("g", &[1]), Param::new("C", &[3, 2])],
        vec![Stmt::add_assign(place!("g", 0), area)],
    ))?;
    let mut total = Global::scalar("area", 0.0);
    custom_parloop(
        &k,
        vec![CustomArg::Global(&mut total, Access::Sum), CustomArg::Coordinates],
        Iterate::Cells(&mesh),
    )?;
    println!("total area {}", total.get());
    Ok(())
}
