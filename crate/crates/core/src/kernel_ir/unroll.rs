//! Loop unrolling.

use std::collections::BTreeSet;

use super::ast::{map_stmt_exprs, map_place, Decl, Expr, KernelAst, Loop, Stmt};
use crate::error::{Error, Result};

/// Unrolls the loop with pre-order id `loop_id` by `factor`.
///
/// The body is replicated `factor` times per iteration with the loop variable
/// substituted, preserving the original iteration order, so results are
/// bitwise identical. When `factor` equals the trip count the loop disappears.
/// Locals declared inside the replicated body are renamed per copy.
pub fn unroll(ast: &KernelAst, loop_id: usize, factor: usize) -> Result<KernelAst> {
    let mut counter = 0;
    let mut taken = ast.identifiers();
    let mut found = None;
    let body = rewrite(&ast.body, loop_id, factor, &mut counter, &mut taken, &mut found)?;
    match found {
        Some(()) => Ok(KernelAst {
            body,
            ..ast.clone()
        }),
        None => Err(Error::NoSuchLoop(loop_id)),
    }
}

fn rewrite(
    stmts: &[Stmt],
    target: usize,
    factor: usize,
    counter: &mut usize,
    taken: &mut BTreeSet<String>,
    found: &mut Option<()>,
) -> Result<Vec<Stmt>> {
    let mut out = Vec::with_capacity(stmts.len());
    for s in stmts {
        match s {
            Stmt::For(l) => {
                let id = *counter;
                *counter += 1;
                if id == target {
                    // skip ids of loops nested in the unrolled one
                    *counter += Loop::count_nested(&l.body);
                    *found = Some(());
                    out.extend(unroll_loop(l, factor, taken)?);
                } else {
                    let body = rewrite(&l.body, target, factor, counter, taken, found)?;
                    out.push(Stmt::For(Loop { body, ..l.clone() }));
                }
            }
            other => out.push(other.clone()),
        }
    }
    Ok(out)
}

impl Loop {
    fn count_nested(body: &[Stmt]) -> usize {
        body.iter()
            .map(|s| match s {
                Stmt::For(l) => 1 + Loop::count_nested(&l.body),
                _ => 0,
            })
            .sum()
    }
}

fn declared_in(body: &[Stmt]) -> Vec<String> {
    let mut names = Vec::new();
    super::ast::visit_stmts(body, &mut |s| {
        if let Stmt::Decl(d) = s {
            names.push(d.name.clone());
        }
    });
    names
}

fn unroll_loop(l: &Loop, factor: usize, taken: &mut BTreeSet<String>) -> Result<Vec<Stmt>> {
    let trip = l.trip_count();
    if factor == 0 || trip % factor != 0 {
        return Err(Error::NonDividingFactor {
            factor,
            trip_count: trip,
        });
    }
    let straight = factor == trip;
    let locals = declared_in(&l.body);
    let mut copies = Vec::with_capacity(factor * l.body.len());
    for k in 0..factor {
        // var -> lo + factor*var + k  (or lo + k when fully unrolled)
        let shift = l.lo + k as i64;
        let sub = |i: &super::ast::Index| i.substitute(&l.var, factor as i64, shift, !straight);
        let mut body = map_stmt_exprs(&l.body, &mut |e: &Expr| e.map_indices(&sub), &|p| {
            map_place(p, &sub)
        });
        if k > 0 {
            for name in &locals {
                let mut fresh = format!("{name}_{k}");
                while taken.contains(&fresh) {
                    fresh.push('_');
                }
                taken.insert(fresh.clone());
                body = rename_all(&body, name, &fresh);
            }
        }
        copies.extend(body);
    }
    if straight {
        Ok(copies)
    } else {
        Ok(vec![Stmt::For(Loop {
            var: l.var.clone(),
            lo: 0,
            hi: (trip / factor) as i64,
            body: copies,
        })])
    }
}

fn rename_all(body: &[Stmt], from: &str, to: &str) -> Vec<Stmt> {
    let renamed = map_stmt_exprs(body, &mut |e: &Expr| e.rename(from, to), &|p| {
        let mut p = p.clone();
        if p.name == from {
            p.name = to.to_string();
        }
        p
    });
    fn decls(stmts: Vec<Stmt>, from: &str, to: &str) -> Vec<Stmt> {
        stmts
            .into_iter()
            .map(|s| match s {
                Stmt::Decl(d) if d.name == from => Stmt::Decl(Decl {
                    name: to.to_string(),
                    ..d
                }),
                Stmt::For(l) => Stmt::For(Loop {
                    body: decls(l.body, from, to),
                    ..l
                }),
                other => other,
            })
            .collect()
    }
    decls(renamed, from, to)
}
