//! User kernels over Functions, and the L2 error functional.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::element::tabulate_at;
use super::form::{c, geometry, ld, table, v};
use super::quadrature::QuadratureRule;
use super::space::{Function, FunctionSpace};
use crate::data::{Access, Dat, Global};
use crate::error::{Error, Result};
use crate::kernel_ir::{fold_constants, hoist_invariants, Expr, Kernel, KernelAst, Param, Place, Stmt};
use crate::mesh::Mesh;
use crate::parloop::{Arg, Parloop};

/// Where a custom kernel runs.
#[derive(Debug, Clone, Copy)]
pub enum Iterate<'s> {
    /// Once per node of the space; Function arguments are passed directly.
    Nodes(&'s FunctionSpace),
    /// Once per cell; Function arguments are gathered through their
    /// cell-node maps.
    Cells(&'s Arc<Mesh>),
}

/// An argument of [`custom_parloop`].
#[derive(Debug)]
pub enum CustomArg<'a> {
    Read(&'a Function),
    Function(&'a mut Function, Access),
    GlobalRead(&'a Global),
    Global(&'a mut Global, Access),
    /// The mesh coordinates, read through the cell-vertex map (cells only).
    Coordinates,
}

/// Runs a user kernel, extracting Dats and maps from the Functions.
pub fn custom_parloop(kernel: &Kernel, args: Vec<CustomArg<'_>>, iterate: Iterate<'_>) -> Result<()> {
    let (set, mesh) = match iterate {
        Iterate::Nodes(space) => (space.node_set().clone(), space.mesh().clone()),
        Iterate::Cells(mesh) => (mesh.cells().clone(), mesh.clone()),
    };
    let check = |f: &Function| -> Result<()> {
        let ok = match iterate {
            Iterate::Nodes(space) => f.space() == space,
            Iterate::Cells(mesh) => Arc::ptr_eq(f.space().mesh(), mesh),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    };
    let cells = matches!(iterate, Iterate::Cells(_));
    let mut out = Vec::with_capacity(args.len());
    for arg in args {
        out.push(match arg {
            CustomArg::Read(f) => {
                check(f)?;
                let a = Arg::read(f.dat());
                if cells {
                    a.via(f.space().cell_node_map())
                } else {
                    a
                }
            }
            CustomArg::Function(f, access) => {
                check(f)?;
                let map = f.space().cell_node_map().clone();
                let a = Arg::dat(f.dat_mut(), access);
                if cells {
                    a.via(&map)
                } else {
                    a
                }
            }
            CustomArg::GlobalRead(g) => Arg::global_read(g),
            CustomArg::Global(g, access) => Arg::global(g, access),
            CustomArg::Coordinates => {
                if !cells {
                    return Err(Error::IllegalAccess("coordinates are only available on cells".into()));
                }
                Arg::read(mesh.coordinates()).via(mesh.cell_vertex_map())
            }
        });
    }
    Parloop::new(kernel, &set, out).run()
}

/// Host kernel writing `0.63 + 0.02 * (0.5 - r)` to its single argument,
/// with `r` uniform in [0, 1) drawn from a stream keyed by `(seed, entity)`.
/// Values therefore do not depend on scheduling.
pub fn perturbation_kernel(seed: u64) -> Kernel {
    Kernel::from_host("perturbation", Some(vec![1]), move |e, args| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(e as u64);
        args[0][0] = 0.63 + 0.02 * (0.5 - rng.gen::<f64>());
    })
}

/// `sqrt(integral (u - exact)^2 dx)` with a rule of degree `2p + 2`.
///
/// `exact` is sampled on the host at the physical quadrature points; the
/// cellwise integrals are summed by a kernel into a SUM Global.
pub fn l2_error(u: &Function, exact: impl Fn(&[f64]) -> f64) -> Result<f64> {
    let space = u.space();
    if space.components() != 1 {
        return Err(Error::ShapeMismatch("l2_error needs a scalar space".into()));
    }
    let mesh = space.mesh();
    let el = *space.element();
    let cell = el.cell();
    let (dim, nv, n) = (mesh.dim(), cell.num_vertices(), el.num_nodes());
    let rule = QuadratureRule::new(cell, (2 * el.degree() + 2).min(if dim == 2 { 6 } else { 5 }))?;
    let nq = rule.len();

    let ncells = mesh.cells().size();
    let mut samples = Vec::with_capacity(ncells * nq);
    let mut x = vec![0.0; dim];
    for cidx in 0..ncells {
        let verts = mesh.cell_vertex_map().row(cidx);
        for p in rule.points() {
            let lam0 = 1.0 - p.iter().sum::<f64>();
            for (d, xd) in x.iter_mut().enumerate() {
                *xd = lam0 * mesh.vertex(verts[0])[d]
                    + p.iter().enumerate().map(|(k, l)| l * mesh.vertex(verts[k + 1])[d]).sum::<f64>();
            }
            samples.push(exact(&x));
        }
    }
    let samples = Dat::from_vec("exact_at_quadrature", mesh.cells(), nq, samples)?;

    let params = vec![
        Param::new("G", &[1]),
        Param::new("C", &[nv, dim]),
        Param::new("w", &[n]),
        Param::new("E", &[nq]),
    ];
    let mut body = vec![
        Stmt::table("W", &[nq], rule.weights().to_vec()),
        table("PHI", &tabulate_at(&el, rule.points()).values),
    ];
    body.extend(geometry(dim));
    let uq = Expr::sum((0..n).map(|k| ld("w", vec![c(k)]) * ld("PHI", vec![v("q"), c(k)])));
    body.push(Stmt::for_loop(
        "q",
        0,
        nq as i64,
        vec![
            Stmt::scalar("d", uq - ld("E", vec![v("q")])),
            Stmt::add_assign(
                Place::new("G", vec![c(0)]),
                ld("W", vec![v("q")]) * ld("adet", vec![]) * ld("d", vec![]) * ld("d", vec![]),
            ),
        ],
    ));
    let ast = KernelAst::new("l2_error", params, body);
    let kernel = Kernel::from_ast(fold_constants(&hoist_invariants(&ast)))?;

    let mut g = Global::scalar("l2_squared", 0.0);
    let args = vec![
        Arg::global(&mut g, Access::Sum),
        Arg::read(mesh.coordinates()).via(mesh.cell_vertex_map()),
        Arg::read(u.dat()).via(space.cell_node_map()),
        Arg::read(&samples),
    ];
    Parloop::new(&kernel, mesh.cells(), args).run()?;
    Ok(g.get().max(0.0).sqrt())
}
