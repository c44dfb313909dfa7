//! A P1 x P2 mixed space: each block of the form is assembled on its own,
//! then compared with a single monolithic assembly.

use std::sync::Arc;

use opfem::fem::{assemble_mixed, assemble_monolithic, FormKind, FunctionSpace, MixedForm, MixedSpace};
use opfem::mesh::unit_square_mesh;
use opfem::solver::block_spmv;

fn main() -> opfem::Result<()> {
    let mesh = Arc::new(unit_square_mesh(4)?);
    let v = FunctionSpace::new(&mesh, 1)?;
    let q = FunctionSpace::new(&mesh, 2)?;
    let w = MixedSpace::new(&v, &q)?;
    let form = MixedForm::new(&w, &w)
        .with_block(0, 0, FormKind::Stiffness)
        .with_block(0, 1, FormKind::Mass)
        .with_block(1, 0, FormKind::Mass)
        .with_block(1, 1, FormKind::Helmholtz(1.0));

    let nested = assemble_mixed(&form)?;
    let mono = assemble_monolithic(&form)?;
    println!("sizes {:?}, total {}", w.sizes(), w.num_nodes());
    for i in 0..2 {
        for j in 0..2 {
            let nnz = nested.block(i, j).map(|m| m.sparsity().nnz()).unwrap_or(0);
            println!("  block ({i},{j}) nnz={nnz}");
        }
    }
    println!("monolithic nnz={}", mono.sparsity().nnz());

    let x: Vec<f64> = (0..w.num_nodes()).map(|i| (i as f64 * 0.7).sin()).collect();
    let (x0, x1) = w.split(&x);
    let (y0, y1) = block_spmv(&nested, (x0, x1))?;
    let y = mono.spmv(&x)?;
    let same = y0.iter().chain(&y1).zip(&y).all(|(a, b)| a.to_bits() == b.to_bits());
    println!("block spmv bitwise equal to monolithic: {same}");
    Ok(())
}
