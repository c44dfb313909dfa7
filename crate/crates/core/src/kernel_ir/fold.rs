//! Constant folding and algebraic identity removal.

use super::ast::{map_stmt_exprs, Expr, KernelAst};

/// Replaces literal-only subexpressions by their value and removes
/// multiplications by one and additions of zero.
pub fn fold_constants(ast: &KernelAst) -> KernelAst {
    KernelAst {
        body: map_stmt_exprs(&ast.body, &mut fold_expr, &|p| p.clone()),
        ..ast.clone()
    }
}

pub fn fold_expr(e: &Expr) -> Expr {
    e.map_bottom_up(&mut simplify)
}

fn lit(e: &Expr) -> Option<f64> {
    match e {
        Expr::Lit(v) => Some(*v),
        _ => None,
    }
}

fn simplify(e: Expr) -> Expr {
    match e {
        Expr::Add(a, b) => match (lit(&a), lit(&b)) {
            (Some(x), Some(y)) => Expr::Lit(x + y),
            (Some(x), _) if x == 0.0 => *b,
            (_, Some(y)) if y == 0.0 => *a,
            _ => Expr::Add(a, b),
        },
        Expr::Sub(a, b) => match (lit(&a), lit(&b)) {
            (Some(x), Some(y)) => Expr::Lit(x - y),
            (_, Some(y)) if y == 0.0 => *a,
            _ => Expr::Sub(a, b),
        },
        Expr::Mul(a, b) => match (lit(&a), lit(&b)) {
            (Some(x), Some(y)) => Expr::Lit(x * y),
            (Some(x), _) if x == 1.0 => *b,
            (_, Some(y)) if y == 1.0 => *a,
            _ => Expr::Mul(a, b),
        },
        Expr::Div(a, b) => match (lit(&a), lit(&b)) {
            (Some(x), Some(y)) => Expr::Lit(x / y),
            (_, Some(y)) if y == 1.0 => *a,
            _ => Expr::Div(a, b),
        },
        Expr::Neg(a) => match lit(&a) {
            Some(x) => Expr::Lit(-x),
            None => Expr::Neg(a),
        },
        Expr::Sqrt(a) => match lit(&a) {
            Some(x) => Expr::Lit(x.sqrt()),
            None => Expr::Sqrt(a),
        },
        Expr::Sin(a) => match lit(&a) {
            Some(x) => Expr::Lit(x.sin()),
            None => Expr::Sin(a),
        },
        Expr::Cos(a) => match lit(&a) {
            Some(x) => Expr::Lit(x.cos()),
            None => Expr::Cos(a),
        },
        other => other,
    }
}
