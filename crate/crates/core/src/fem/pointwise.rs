//! Nodewise arithmetic on Functions, lowered to direct parallel loops.

use std::ops;

use super::space::Function;
use crate::data::Access;
use crate::error::{Error, Result};
use crate::kernel_ir::{Expr, Index, Kernel, KernelAst, Param, Place, Stmt};
use crate::parloop::{Arg, Parloop};

/// An expression over Functions sharing one space, evaluated per node and
/// per component.
#[derive(Debug, Clone)]
pub enum PExpr<'a> {
    Const(f64),
    Func(&'a Function),
    /// The current value of the output Function.
    Target,
    Add(Box<PExpr<'a>>, Box<PExpr<'a>>),
    Sub(Box<PExpr<'a>>, Box<PExpr<'a>>),
    Mul(Box<PExpr<'a>>, Box<PExpr<'a>>),
    Div(Box<PExpr<'a>>, Box<PExpr<'a>>),
    Neg(Box<PExpr<'a>>),
}

impl<'a> From<&'a Function> for PExpr<'a> {
    fn from(f: &'a Function) -> Self {
        PExpr::Func(f)
    }
}

impl From<f64> for PExpr<'_> {
    fn from(v: f64) -> Self {
        PExpr::Const(v)
    }
}

macro_rules! pbinop {
    ($tr:ident, $method:ident, $variant:ident) => {
        impl<'a, R: Into<PExpr<'a>>> ops::$tr<R> for PExpr<'a> {
            type Output = PExpr<'a>;
            fn $method(self, rhs: R) -> PExpr<'a> {
                PExpr::$variant(Box::new(self), Box::new(rhs.into()))
            }
        }
        impl<'a> ops::$tr<PExpr<'a>> for f64 {
            type Output = PExpr<'a>;
            fn $method(self, rhs: PExpr<'a>) -> PExpr<'a> {
                PExpr::$variant(Box::new(PExpr::Const(self)), Box::new(rhs))
            }
        }
    };
}

pbinop!(Add, add, Add);
pbinop!(Sub, sub, Sub);
pbinop!(Mul, mul, Mul);
pbinop!(Div, div, Div);

impl<'a> ops::Neg for PExpr<'a> {
    type Output = PExpr<'a>;
    fn neg(self) -> PExpr<'a> {
        PExpr::Neg(Box::new(self))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssignOp {
    Assign,
    AddAssign,
    SubAssign,
}

impl<'a> PExpr<'a> {
    fn uses_target(&self) -> bool {
        match self {
            PExpr::Target => true,
            PExpr::Const(_) | PExpr::Func(_) => false,
            PExpr::Neg(a) => a.uses_target(),
            PExpr::Add(a, b) | PExpr::Sub(a, b) | PExpr::Mul(a, b) | PExpr::Div(a, b) => {
                a.uses_target() || b.uses_target()
            }
        }
    }

    fn collect(&self, out: &mut Vec<&'a Function>) {
        match self {
            PExpr::Func(f) => {
                if !out.iter().any(|g| std::ptr::eq(*g, *f)) {
                    out.push(f);
                }
            }
            PExpr::Neg(a) => a.collect(out),
            PExpr::Add(a, b) | PExpr::Sub(a, b) | PExpr::Mul(a, b) | PExpr::Div(a, b) => {
                a.collect(out);
                b.collect(out);
            }
            _ => {}
        }
    }

    fn lower(&self, funcs: &[&Function], comp: &Index) -> Expr {
        let load = |name: &str| Expr::Load(Place::new(name, vec![comp.clone()]));
        let bin = |a: &PExpr<'a>, b: &PExpr<'a>| (a.lower(funcs, comp), b.lower(funcs, comp));
        match self {
            PExpr::Const(v) => Expr::Lit(*v),
            PExpr::Target => load("out"),
            PExpr::Func(f) => {
                let k = funcs.iter().position(|g| std::ptr::eq(*g, *f)).unwrap();
                load(&format!("a{k}"))
            }
            PExpr::Neg(a) => -a.lower(funcs, comp),
            PExpr::Add(a, b) => {
                let (a, b) = bin(a, b);
                a + b
            }
            PExpr::Sub(a, b) => {
                let (a, b) = bin(a, b);
                a - b
            }
            PExpr::Mul(a, b) => {
                let (a, b) = bin(a, b);
                a * b
            }
            PExpr::Div(a, b) => {
                let (a, b) = bin(a, b);
                a / b
            }
        }
    }
}

/// Kernel for `out op expr` on one node with `dim` components. Parameters
/// are `out` followed by one block per distinct Function in `funcs`.
fn pointwise_kernel(op: AssignOp, expr: &PExpr<'_>, funcs: &[&Function], dim: usize) -> KernelAst {
    let k = Index::var("k");
    let target = Place::new("out", vec![k.clone()]);
    let value = expr.lower(funcs, &k);
    let stmt = match op {
        AssignOp::Assign => Stmt::assign(target, value),
        AssignOp::AddAssign => Stmt::add_assign(target, value),
        AssignOp::SubAssign => Stmt::assign(target.clone(), Expr::Load(target) - value),
    };
    let mut params = vec![Param::new("out", &[dim])];
    params.extend((0..funcs.len()).map(|i| Param::new(format!("a{i}"), &[dim])));
    KernelAst::new("pointwise", params, vec![Stmt::for_loop("k", 0, dim as i64, vec![stmt])])
}

/// `out op expr`, node by node. Every Function in `expr` must live on the
/// space of `out`; use [`PExpr::Target`] to read `out` itself.
pub fn pointwise<'a>(out: &mut Function, op: AssignOp, expr: impl Into<PExpr<'a>>) -> Result<()> {
    let expr = expr.into();
    let mut funcs = Vec::new();
    expr.collect(&mut funcs);
    if funcs.iter().any(|f| f.space() != out.space()) {
        return Err(Error::SpaceMismatch);
    }
    let dim = out.space().components();
    let kernel = Kernel::from_ast(pointwise_kernel(op, &expr, &funcs, dim))?;
    let access = if op == AssignOp::Assign && !expr.uses_target() {
        Access::Write
    } else {
        Access::Rw
    };
    let set = out.space().node_set().clone();
    let mut args = vec![Arg::dat(out.dat_mut(), access)];
    args.extend(funcs.iter().map(|f| Arg::read(f.dat())));
    Parloop::new(&kernel, &set, args).run()
}
