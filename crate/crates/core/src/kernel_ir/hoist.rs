//! Loop-invariant code motion.
//!
//! Loops are processed innermost first. For each loop, scalar declarations
//! whose initialiser does not depend on the loop are moved in front of it;
//! then every maximal loop-invariant subexpression that performs arithmetic
//! on at least one load is bound to a fresh local declared immediately before
//! the loop. Identical subexpressions share one local.

use std::collections::BTreeSet;

use super::ast::{map_stmt_exprs, visit_stmts, Decl, Expr, Init, KernelAst, Loop, Stmt};

struct Fresh {
    taken: BTreeSet<String>,
    next: usize,
}

impl Fresh {
    fn name(&mut self) -> String {
        loop {
            let candidate = format!("t{}", self.next);
            self.next += 1;
            if self.taken.insert(candidate.clone()) {
                return candidate;
            }
        }
    }
}

pub fn hoist_invariants(ast: &KernelAst) -> KernelAst {
    let mut fresh = Fresh {
        taken: ast.identifiers(),
        next: 0,
    };
    KernelAst {
        body: hoist_block(&ast.body, &mut fresh),
        ..ast.clone()
    }
}

fn hoist_block(stmts: &[Stmt], fresh: &mut Fresh) -> Vec<Stmt> {
    let mut out = Vec::with_capacity(stmts.len());
    for s in stmts {
        match s {
            Stmt::For(l) => {
                let inner = Loop {
                    body: hoist_block(&l.body, fresh),
                    ..l.clone()
                };
                let (pre, lp) = hoist_loop(inner, fresh);
                out.extend(pre);
                out.push(Stmt::For(lp));
            }
            other => out.push(other.clone()),
        }
    }
    out
}

/// Names whose value may differ between iterations of a loop with variable
/// `var` and body `body`.
fn variant_names(var: &str, body: &[Stmt]) -> BTreeSet<String> {
    let mut v = BTreeSet::new();
    v.insert(var.to_string());
    visit_stmts(body, &mut |s| match s {
        Stmt::Decl(d) => {
            v.insert(d.name.clone());
        }
        Stmt::For(l) => {
            v.insert(l.var.clone());
        }
        Stmt::Assign { target, .. } | Stmt::AddAssign { target, .. } => {
            v.insert(target.name.clone());
        }
    });
    v
}

fn written_names(body: &[Stmt]) -> BTreeSet<String> {
    let mut w = BTreeSet::new();
    visit_stmts(body, &mut |s| {
        if let Stmt::Assign { target, .. } | Stmt::AddAssign { target, .. } = s {
            w.insert(target.name.clone());
        }
    });
    w
}

fn is_invariant(e: &Expr, variant: &BTreeSet<String>) -> bool {
    let mut ok = true;
    e.for_each_load(&mut |p| {
        if variant.contains(&p.name)
            || p
                .index
                .iter()
                .any(|i| i.terms.iter().any(|(v, _)| variant.contains(v)))
        {
            ok = false;
        }
    });
    ok
}

fn has_load(e: &Expr) -> bool {
    let mut found = false;
    e.for_each_load(&mut |_| found = true);
    found
}

fn hoist_loop(mut l: Loop, fresh: &mut Fresh) -> (Vec<Stmt>, Loop) {
    let mut pre = Vec::new();

    // move whole declarations that do not change between iterations
    loop {
        let variant = variant_names(&l.var, &l.body);
        let written = written_names(&l.body);
        let movable = l.body.iter().position(|s| match s {
            Stmt::Decl(Decl { name, init, .. }) if !written.contains(name) => match init {
                Init::Expr(e) => {
                    let mut others = variant.clone();
                    others.remove(name);
                    is_invariant(e, &others)
                }
                Init::Table(_) | Init::Zero => true,
            },
            _ => false,
        });
        match movable {
            Some(k) => pre.push(l.body.remove(k)),
            None => break,
        }
    }

    // bind maximal invariant subexpressions to fresh locals
    let variant = variant_names(&l.var, &l.body);
    let mut temps: Vec<(Expr, String)> = Vec::new();
    let mut rewrite = |e: &Expr| extract(e, &variant, &mut temps, fresh);
    l.body = map_stmt_exprs(&l.body, &mut rewrite, &|p| p.clone());
    for (e, name) in temps {
        pre.push(Stmt::scalar(&name, e));
    }
    (pre, l)
}

fn extract(
    e: &Expr,
    variant: &BTreeSet<String>,
    temps: &mut Vec<(Expr, String)>,
    fresh: &mut Fresh,
) -> Expr {
    if matches!(e, Expr::Lit(_) | Expr::Load(_)) {
        return e.clone();
    }
    if has_load(e) && is_invariant(e, variant) {
        let name = match temps.iter().find(|(t, _)| t == e) {
            Some((_, n)) => n.clone(),
            None => {
                let n = fresh.name();
                temps.push((e.clone(), n.clone()));
                n
            }
        };
        return Expr::Load(super::ast::Place::scalar(&name));
    }
    let mut rec = |x: &Expr| Box::new(extract(x, variant, temps, fresh));
    match e {
        Expr::Add(a, b) => Expr::Add(rec(a), rec(b)),
        Expr::Sub(a, b) => Expr::Sub(rec(a), rec(b)),
        Expr::Mul(a, b) => Expr::Mul(rec(a), rec(b)),
        Expr::Div(a, b) => Expr::Div(rec(a), rec(b)),
        Expr::Neg(a) => Expr::Neg(rec(a)),
        Expr::Sqrt(a) => Expr::Sqrt(rec(a)),
        Expr::Sin(a) => Expr::Sin(rec(a)),
        Expr::Cos(a) => Expr::Cos(rec(a)),
        Expr::Lit(_) | Expr::Load(_) => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel_ir::{interpret, Param};
    use crate::place;

    fn ld(p: crate::kernel_ir::Place) -> Expr {
        Expr::Load(p)
    }

    #[test]
    fn product_of_invariants_is_hoisted() {
        // for j: A[j] += (x*y)*D[j]
        let ast = KernelAst::new(
            "k",
            vec![
                Param::new("A", &[4]),
                Param::scalar("x"),
                Param::scalar("y"),
                Param::new("D", &[4]),
            ],
            vec![Stmt::for_loop(
                "j",
                0,
                4,
                vec![Stmt::add_assign(
                    place!("A", "j"),
                    (ld(place!("x")) * ld(place!("y"))) * ld(place!("D", "j")),
                )],
            )],
        );
        let h = hoist_invariants(&ast);
        let expected = vec![
            Stmt::scalar("t0", ld(place!("x")) * ld(place!("y"))),
            Stmt::for_loop(
                "j",
                0,
                4,
                vec![Stmt::add_assign(
                    place!("A", "j"),
                    ld(place!("t0")) * ld(place!("D", "j")),
                )],
            ),
        ];
        assert_eq!(h.body, expected);

        let mut a1 = [0.5, 1.0, -1.0, 2.0];
        let mut a2 = a1;
        let mut d = [1.0, 2.0, 3.0, 4.0];
        let mut d2 = d;
        interpret(&ast, &mut [&mut a1, &mut [3.0], &mut [0.7], &mut d]).unwrap();
        interpret(&h, &mut [&mut a2, &mut [3.0], &mut [0.7], &mut d2]).unwrap();
        assert_eq!(a1, a2);
    }

    #[test]
    fn nothing_to_hoist_is_a_fixpoint() {
        let ast = KernelAst::new(
            "k",
            vec![Param::new("A", &[3]), Param::new("B", &[3])],
            vec![Stmt::for_loop(
                "i",
                0,
                3,
                vec![Stmt::assign(place!("A", "i"), 2.0 * ld(place!("B", "i")))],
            )],
        );
        assert_eq!(hoist_invariants(&ast), ast);
    }

    #[test]
    fn outer_dependent_factor_lands_between_loops() {
        // for i: for j: A[i][j] += (W[i]*s) * B[j]
        let ast = KernelAst::new(
            "k",
            vec![
                Param::new("A", &[2, 3]),
                Param::new("W", &[2]),
                Param::scalar("s"),
                Param::new("B", &[3]),
            ],
            vec![Stmt::for_loop(
                "i",
                0,
                2,
                vec![Stmt::for_loop(
                    "j",
                    0,
                    3,
                    vec![Stmt::add_assign(
                        place!("A", "i", "j"),
                        (ld(place!("W", "i")) * ld(place!("s"))) * ld(place!("B", "j")),
                    )],
                )],
            )],
        );
        let h = hoist_invariants(&ast);
        match &h.body[..] {
            [Stmt::For(outer)] => {
                assert!(matches!(&outer.body[0], Stmt::Decl(d) if d.name == "t0"));
                assert!(matches!(&outer.body[1], Stmt::For(_)));
            }
            other => panic!("unexpected structure {other:?}"),
        }
        assert_eq!(hoist_invariants(&h), h);
    }

    #[test]
    fn values_written_in_the_loop_are_not_hoisted() {
        // for i: s += 1; A[i] = s*s
        let ast = KernelAst::new(
            "k",
            vec![Param::new("A", &[3]), Param::scalar("s")],
            vec![Stmt::for_loop(
                "i",
                0,
                3,
                vec![
                    Stmt::add_assign(place!("s"), Expr::Lit(1.0)),
                    Stmt::assign(place!("A", "i"), ld(place!("s")) * ld(place!("s"))),
                ],
            )],
        );
        assert_eq!(hoist_invariants(&ast), ast);
    }
}
