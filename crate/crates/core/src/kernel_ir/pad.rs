//! Padding of local array storage to the vector width.

use super::ast::{Decl, KernelAst, Loop, Param, Stmt};
use crate::error::{Error, Result};

fn round_up(n: usize, w: usize) -> usize {
    n.div_ceil(w) * w
}

fn padded(extents: &[usize], width: usize) -> Vec<usize> {
    let mut s = extents.to_vec();
    if let Some(last) = s.last_mut() {
        *last = round_up(*last, width);
    }
    s
}

/// Rounds the innermost storage extent of every parameter and local array up
/// to a multiple of `vector_width`. Logical extents and loop bounds are left
/// alone, so the kernel computes exactly what it did before.
pub fn pad_extents(ast: &KernelAst, vector_width: usize) -> Result<KernelAst> {
    if ![2, 4, 8].contains(&vector_width) {
        return Err(Error::InvalidVectorWidth(vector_width));
    }
    let params = ast
        .params
        .iter()
        .map(|p| Param {
            storage: padded(&p.extents, vector_width),
            ..p.clone()
        })
        .collect();
    Ok(KernelAst {
        params,
        body: pad_block(&ast.body, vector_width),
        ..ast.clone()
    })
}

fn pad_block(stmts: &[Stmt], width: usize) -> Vec<Stmt> {
    stmts
        .iter()
        .map(|s| match s {
            Stmt::Decl(d) => Stmt::Decl(Decl {
                storage: padded(&d.extents, width),
                ..d.clone()
            }),
            Stmt::For(l) => Stmt::For(Loop {
                body: pad_block(&l.body, width),
                ..l.clone()
            }),
            other => other.clone(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(n: usize) -> KernelAst {
        KernelAst::new("k", vec![Param::new("A", &[3, 3]), Param::new("v", &[n])], vec![])
    }

    #[test]
    fn three_by_three_to_width_four() {
        let p = pad_extents(&block(4), 4).unwrap();
        assert_eq!(p.params[0].storage, vec![3, 4]);
        assert_eq!(p.params[0].extents, vec![3, 3]);
        assert_eq!(p.params[1].storage, vec![4]);
    }

    #[test]
    fn width_two_on_five() {
        let p = pad_extents(&block(5), 2).unwrap();
        assert_eq!(p.params[1].storage, vec![6]);
    }

    #[test]
    fn invalid_width() {
        assert_eq!(pad_extents(&block(5), 3), Err(Error::InvalidVectorWidth(3)));
    }

    #[test]
    fn scalars_and_locals() {
        let ast = KernelAst::new(
            "k",
            vec![Param::scalar("s")],
            vec![Stmt::array("G", &[3, 2])],
        );
        let p = pad_extents(&ast, 8).unwrap();
        assert!(p.params[0].storage.is_empty());
        match &p.body[0] {
            Stmt::Decl(d) => assert_eq!(d.storage, vec![3, 8]),
            _ => unreachable!(),
        }
    }
}
