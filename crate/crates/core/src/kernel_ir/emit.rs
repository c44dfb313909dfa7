//! C-like rendering of kernels, for inspection only.

use std::fmt::Write;

use super::ast::{Expr, Index, Init, KernelAst, Place, Stmt};

/// Renders `ast` as C-like source text. The output is deterministic.
pub fn emit_source(ast: &KernelAst) -> String {
    let mut out = String::new();
    let params: Vec<String> = ast
        .params
        .iter()
        .map(|p| format!("double {}{}", p.name, dims(&p.storage)))
        .collect();
    let _ = writeln!(out, "void {}({})", ast.name, params.join(", "));
    out.push_str("{\n");
    for p in ast.params.iter().filter(|p| p.storage != p.extents) {
        let _ = writeln!(out, "  /* {}: logical extents {} */", p.name, dims(&p.extents));
    }
    block(&mut out, &ast.body, 1);
    out.push_str("}\n");
    out
}

fn dims(extents: &[usize]) -> String {
    extents.iter().map(|e| format!("[{e}]")).collect()
}

fn block(out: &mut String, stmts: &[Stmt], depth: usize) {
    let pad = "  ".repeat(depth);
    for s in stmts {
        match s {
            Stmt::Decl(d) => {
                let logical = if d.storage != d.extents {
                    format!(" /* logical {} */", dims(&d.extents))
                } else {
                    String::new()
                };
                match &d.init {
                    Init::Zero => {
                        let _ = writeln!(out, "{pad}double {}{} = {{0}};{logical}", d.name, dims(&d.storage));
                    }
                    Init::Expr(e) => {
                        let _ = writeln!(out, "{pad}double {} = {};", d.name, expr(e));
                    }
                    Init::Table(values) => {
                        let vals: Vec<String> = values.iter().map(|v| literal(*v)).collect();
                        let _ = writeln!(
                            out,
                            "{pad}static const double {}{} = {{{}}};{logical}",
                            d.name,
                            dims(&d.storage),
                            vals.join(", ")
                        );
                    }
                }
            }
            Stmt::For(l) => {
                let _ = writeln!(
                    out,
                    "{pad}for (int {v} = {}; {v} < {}; {v}++)",
                    l.lo,
                    l.hi,
                    v = l.var
                );
                let _ = writeln!(out, "{pad}{{");
                block(out, &l.body, depth + 1);
                let _ = writeln!(out, "{pad}}}");
            }
            Stmt::Assign { target, value } => {
                let _ = writeln!(out, "{pad}{} = {};", place(target), expr(value));
            }
            Stmt::AddAssign { target, value } => {
                let _ = writeln!(out, "{pad}{} += {};", place(target), expr(value));
            }
        }
    }
}

fn literal(v: f64) -> String {
    let s = format!("{v:?}");
    if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

fn index(i: &Index) -> String {
    let mut parts: Vec<String> = i
        .terms
        .iter()
        .map(|(v, c)| if *c == 1 { v.clone() } else { format!("{c}*{v}") })
        .collect();
    if i.offset != 0 || parts.is_empty() {
        parts.push(i.offset.to_string());
    }
    parts.join(" + ")
}

fn place(p: &Place) -> String {
    let mut s = p.name.clone();
    for i in &p.index {
        s.push('[');
        s.push_str(&index(i));
        s.push(']');
    }
    s
}

fn expr(e: &Expr) -> String {
    match e {
        Expr::Lit(v) => literal(*v),
        Expr::Load(p) => place(p),
        Expr::Add(a, b) => format!("({} + {})", expr(a), expr(b)),
        Expr::Sub(a, b) => format!("({} - {})", expr(a), expr(b)),
        Expr::Mul(a, b) => format!("({} * {})", expr(a), expr(b)),
        Expr::Div(a, b) => format!("({} / {})", expr(a), expr(b)),
        Expr::Neg(a) => format!("(-{})", expr(a)),
        Expr::Sqrt(a) => format!("sqrt({})", expr(a)),
        Expr::Sin(a) => format!("sin({})", expr(a)),
        Expr::Cos(a) => format!("cos({})", expr(a)),
    }
}
