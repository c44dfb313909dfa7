//! The local stiffness kernel as generated, then hoisted, folded, unrolled
//! and padded. Every variant is run on the same input.

use std::sync::Arc;

use opfem::fem::{compile_local_kernel, Form, FunctionSpace};
use opfem::kernel_ir::{emit_source, fold_constants, hoist_invariants, pad_extents, unroll, KernelAst, Program};
use opfem::mesh::unit_square_mesh;

fn run(ast: &KernelAst, coords: &[f64]) -> opfem::Result<Vec<f64>> {
    let mut a = vec![0.0; 36];
    let mut c = coords.to_vec();
    Program::compile(ast)?.run(&mut [&mut a, &mut c])?;
    Ok(a)
}

fn main() -> opfem::Result<()> {
    let mesh = Arc::new(unit_square_mesh(1)?);
    let v = FunctionSpace::new(&mesh, 2)?;
    let raw = compile_local_kernel(&Form::stiffness(&v))?;
    let opt = fold_constants(&hoist_invariants(&raw));
    let first = opt.loops()[0].trip_count();
    let variants = [
        ("hoisted + folded", opt.clone()),
        ("unrolled", unroll(&opt, 0, first)?),
        ("padded to 4", pad_extents(&opt, 4)?),
    ];

    println!("{}", emit_source(&opt));
    let coords = [0.1, 0.0, 1.2, 0.3, 0.2, 0.9];
    let reference = run(&raw, &coords)?;
    println!("generated: {} ops", raw.op_count());
    for (name, ast) in &variants {
        let out = run(ast, &coords)?;
        let dev = out.iter().zip(&reference).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        println!("{name:<17} {:>5} ops, max deviation {dev:.1e}", ast.op_count());
    }
    Ok(())
}
