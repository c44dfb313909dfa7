//! Kernel abstract syntax tree.
//!
//! Kernels are straight-line code plus constant-trip-count `for` loops over
//! dense local arrays. Array subscripts are affine in the enclosing loop
//! variables, which is all the optimization passes need to reason about.

use std::collections::BTreeSet;
use std::ops;

/// A kernel parameter: a staged local buffer of shape `extents`.
///
/// `storage` is the allocated shape; it equals `extents` unless padding has
/// rounded up the innermost dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub extents: Vec<usize>,
    pub storage: Vec<usize>,
}

impl Param {
    pub fn new(name: impl Into<String>, extents: &[usize]) -> Self {
        Param {
            name: name.into(),
            extents: extents.to_vec(),
            storage: extents.to_vec(),
        }
    }

    pub fn scalar(name: impl Into<String>) -> Self {
        Param::new(name, &[])
    }

    /// Number of logical values (the staged buffer length).
    pub fn len(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    /// Zero-filled on every execution of the declaration.
    Zero,
    /// Scalar initialised from an expression.
    Expr(Expr),
    /// Constant table, row-major over the logical extents.
    Table(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decl {
    pub name: String,
    pub extents: Vec<usize>,
    pub storage: Vec<usize>,
    pub init: Init,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Loop {
    pub var: String,
    pub lo: i64,
    pub hi: i64,
    pub body: Vec<Stmt>,
}

impl Loop {
    pub fn trip_count(&self) -> usize {
        (self.hi - self.lo).max(0) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Decl(Decl),
    For(Loop),
    Assign { target: Place, value: Expr },
    AddAssign { target: Place, value: Expr },
}

impl Stmt {
    pub fn for_loop(var: &str, lo: i64, hi: i64, body: Vec<Stmt>) -> Stmt {
        Stmt::For(Loop {
            var: var.to_string(),
            lo,
            hi,
            body,
        })
    }

    pub fn assign(target: Place, value: Expr) -> Stmt {
        Stmt::Assign { target, value }
    }

    pub fn add_assign(target: Place, value: Expr) -> Stmt {
        Stmt::AddAssign { target, value }
    }

    pub fn scalar(name: &str, value: Expr) -> Stmt {
        Stmt::Decl(Decl {
            name: name.to_string(),
            extents: vec![],
            storage: vec![],
            init: Init::Expr(value),
        })
    }

    pub fn array(name: &str, extents: &[usize]) -> Stmt {
        Stmt::Decl(Decl {
            name: name.to_string(),
            extents: extents.to_vec(),
            storage: extents.to_vec(),
            init: Init::Zero,
        })
    }

    pub fn table(name: &str, extents: &[usize], values: Vec<f64>) -> Stmt {
        assert_eq!(extents.iter().product::<usize>(), values.len());
        Stmt::Decl(Decl {
            name: name.to_string(),
            extents: extents.to_vec(),
            storage: extents.to_vec(),
            init: Init::Table(values),
        })
    }
}

/// An affine subscript: `offset + sum(coef * var)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Index {
    pub terms: Vec<(String, i64)>,
    pub offset: i64,
}

impl Index {
    pub fn var(name: &str) -> Index {
        Index {
            terms: vec![(name.to_string(), 1)],
            offset: 0,
        }
    }

    pub fn constant(c: i64) -> Index {
        Index {
            terms: vec![],
            offset: c,
        }
    }

    pub fn plus(mut self, c: i64) -> Index {
        self.offset += c;
        self
    }

    /// Replaces `var` by `scale * var + shift`.
    pub fn substitute(&self, var: &str, scale: i64, shift: i64, keep_var: bool) -> Index {
        let mut out = Index {
            terms: Vec::with_capacity(self.terms.len()),
            offset: self.offset,
        };
        for (v, c) in &self.terms {
            if v == var {
                out.offset += c * shift;
                if keep_var && c * scale != 0 {
                    out.terms.push((v.clone(), c * scale));
                }
            } else {
                out.terms.push((v.clone(), *c));
            }
        }
        out
    }

    pub fn mentions(&self, var: &str) -> bool {
        self.terms.iter().any(|(v, _)| v == var)
    }
}

impl From<&str> for Index {
    fn from(v: &str) -> Self {
        Index::var(v)
    }
}

impl From<i64> for Index {
    fn from(c: i64) -> Self {
        Index::constant(c)
    }
}

/// A scalar location: a parameter or local, subscripted per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Place {
    pub name: String,
    pub index: Vec<Index>,
}

impl Place {
    pub fn new(name: &str, index: Vec<Index>) -> Place {
        Place {
            name: name.to_string(),
            index,
        }
    }

    pub fn scalar(name: &str) -> Place {
        Place::new(name, vec![])
    }
}

/// Builds a [`Place`] from a name and subscripts convertible to [`Index`].
#[macro_export]
macro_rules! place {
    ($name:expr) => { $crate::kernel_ir::Place::scalar($name) };
    ($name:expr, $($idx:expr),+ $(,)?) => {
        $crate::kernel_ir::Place::new($name, vec![$($crate::kernel_ir::Index::from($idx)),+])
    };
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Lit(f64),
    Load(Place),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Sqrt(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
}

impl Expr {
    pub fn lit(v: f64) -> Expr {
        Expr::Lit(v)
    }

    pub fn load(p: Place) -> Expr {
        Expr::Load(p)
    }

    pub fn sqrt(self) -> Expr {
        Expr::Sqrt(Box::new(self))
    }

    pub fn sin(self) -> Expr {
        Expr::Sin(Box::new(self))
    }

    pub fn cos(self) -> Expr {
        Expr::Cos(Box::new(self))
    }

    /// Sum of the given terms, associated left to right. Empty sums are 0.
    pub fn sum(terms: impl IntoIterator<Item = Expr>) -> Expr {
        terms
            .into_iter()
            .reduce(|a, b| a + b)
            .unwrap_or(Expr::Lit(0.0))
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Lit(_) | Expr::Load(_) => vec![],
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => vec![a, b],
            Expr::Neg(a) | Expr::Sqrt(a) | Expr::Sin(a) | Expr::Cos(a) => vec![a],
        }
    }

    /// Applies `f` to every load in the expression.
    pub fn for_each_load<'a>(&'a self, f: &mut impl FnMut(&'a Place)) {
        match self {
            Expr::Load(p) => f(p),
            _ => {
                for c in self.children() {
                    c.for_each_load(f);
                }
            }
        }
    }

    /// Rebuilds the expression bottom-up with `f` applied at every node.
    pub fn map_bottom_up(&self, f: &mut impl FnMut(Expr) -> Expr) -> Expr {
        let rebuilt = match self {
            Expr::Lit(_) | Expr::Load(_) => self.clone(),
            Expr::Add(a, b) => Expr::Add(Box::new(a.map_bottom_up(f)), Box::new(b.map_bottom_up(f))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.map_bottom_up(f)), Box::new(b.map_bottom_up(f))),
            Expr::Mul(a, b) => Expr::Mul(Box::new(a.map_bottom_up(f)), Box::new(b.map_bottom_up(f))),
            Expr::Div(a, b) => Expr::Div(Box::new(a.map_bottom_up(f)), Box::new(b.map_bottom_up(f))),
            Expr::Neg(a) => Expr::Neg(Box::new(a.map_bottom_up(f))),
            Expr::Sqrt(a) => Expr::Sqrt(Box::new(a.map_bottom_up(f))),
            Expr::Sin(a) => Expr::Sin(Box::new(a.map_bottom_up(f))),
            Expr::Cos(a) => Expr::Cos(Box::new(a.map_bottom_up(f))),
        };
        f(rebuilt)
    }

    /// Rewrites every subscript in the expression.
    pub fn map_indices(&self, f: &impl Fn(&Index) -> Index) -> Expr {
        self.map_bottom_up(&mut |e| match e {
            Expr::Load(p) => Expr::Load(map_place(&p, f)),
            other => other,
        })
    }

    pub fn rename(&self, from: &str, to: &str) -> Expr {
        self.map_bottom_up(&mut |e| match e {
            Expr::Load(mut p) if p.name == from => {
                p.name = to.to_string();
                Expr::Load(p)
            }
            other => other,
        })
    }

    pub fn op_count(&self) -> usize {
        match self {
            Expr::Lit(_) | Expr::Load(_) => 0,
            _ => 1 + self.children().iter().map(|c| c.op_count()).sum::<usize>(),
        }
    }
}

pub(crate) fn map_place(p: &Place, f: &impl Fn(&Index) -> Index) -> Place {
    Place {
        name: p.name.clone(),
        index: p.index.iter().map(f).collect(),
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Self {
        Expr::Lit(v)
    }
}

impl From<Place> for Expr {
    fn from(p: Place) -> Self {
        Expr::Load(p)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $variant:ident) => {
        impl ops::$tr for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(self), Box::new(rhs))
            }
        }
        impl ops::$tr<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::$variant(Box::new(self), Box::new(Expr::Lit(rhs)))
            }
        }
        impl ops::$tr<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(Expr::Lit(self)), Box::new(rhs))
            }
        }
    };
}

binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

/// A whole kernel: signature plus body.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelAst {
    pub name: String,
    pub params: Vec<Param>,
    pub body: Vec<Stmt>,
}

impl KernelAst {
    pub fn new(name: impl Into<String>, params: Vec<Param>, body: Vec<Stmt>) -> Self {
        KernelAst {
            name: name.into(),
            params,
            body,
        }
    }

    /// Logical buffer length of each parameter, in order.
    pub fn param_lens(&self) -> Vec<usize> {
        self.params.iter().map(Param::len).collect()
    }

    /// Every identifier in use: parameters, locals and loop variables.
    pub fn identifiers(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.params.iter().map(|p| p.name.clone()).collect();
        visit_stmts(&self.body, &mut |s| match s {
            Stmt::Decl(d) => {
                out.insert(d.name.clone());
            }
            Stmt::For(l) => {
                out.insert(l.var.clone());
            }
            _ => {}
        });
        out
    }

    /// Loops in pre-order; a loop's position in this list is its id.
    pub fn loops(&self) -> Vec<&Loop> {
        let mut out = Vec::new();
        collect_loops(&self.body, &mut out);
        out
    }

    /// Total number of arithmetic operations appearing in the source text.
    pub fn op_count(&self) -> usize {
        let mut n = 0;
        visit_stmts(&self.body, &mut |s| match s {
            Stmt::Assign { value, .. } | Stmt::AddAssign { value, .. } => n += value.op_count(),
            Stmt::Decl(Decl {
                init: Init::Expr(e), ..
            }) => n += e.op_count(),
            _ => {}
        });
        n
    }
}

fn collect_loops<'a>(stmts: &'a [Stmt], out: &mut Vec<&'a Loop>) {
    for s in stmts {
        if let Stmt::For(l) = s {
            out.push(l);
            collect_loops(&l.body, out);
        }
    }
}

/// Pre-order walk over statements, descending into loop bodies.
pub(crate) fn visit_stmts<'a>(stmts: &'a [Stmt], f: &mut impl FnMut(&'a Stmt)) {
    for s in stmts {
        f(s);
        if let Stmt::For(l) = s {
            visit_stmts(&l.body, f);
        }
    }
}

/// Rewrites every expression (values, decl initialisers and the subscripts of
/// assignment targets are left to `place_fn`).
pub(crate) fn map_stmt_exprs(
    stmts: &[Stmt],
    expr_fn: &mut impl FnMut(&Expr) -> Expr,
    place_fn: &impl Fn(&Place) -> Place,
) -> Vec<Stmt> {
    stmts
        .iter()
        .map(|s| match s {
            Stmt::Decl(d) => Stmt::Decl(Decl {
                init: match &d.init {
                    Init::Expr(e) => Init::Expr(expr_fn(e)),
                    other => other.clone(),
                },
                ..d.clone()
            }),
            Stmt::For(l) => Stmt::For(Loop {
                body: map_stmt_exprs(&l.body, expr_fn, place_fn),
                ..l.clone()
            }),
            Stmt::Assign { target, value } => Stmt::Assign {
                target: place_fn(target),
                value: expr_fn(value),
            },
            Stmt::AddAssign { target, value } => Stmt::AddAssign {
                target: place_fn(target),
                value: expr_fn(value),
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operators_build_left_associated_trees() {
        let e = Expr::from(place!("x")) * Expr::from(place!("y")) + 1.0;
        match e {
            Expr::Add(l, r) => {
                assert!(matches!(*l, Expr::Mul(..)));
                assert_eq!(*r, Expr::Lit(1.0));
            }
            _ => panic!("unexpected shape"),
        }
    }

    #[test]
    fn index_substitution() {
        let i = Index::var("i").plus(1);
        let s = i.substitute("i", 2, 1, true);
        assert_eq!(s.terms, vec![("i".to_string(), 2)]);
        assert_eq!(s.offset, 2);
        let s = i.substitute("i", 2, 3, false);
        assert!(s.terms.is_empty());
        assert_eq!(s.offset, 4);
    }

    #[test]
    fn loops_are_numbered_in_preorder() {
        let body = vec![
            Stmt::for_loop("i", 0, 2, vec![Stmt::for_loop("j", 0, 3, vec![])]),
            Stmt::for_loop("k", 0, 4, vec![]),
        ];
        let ast = KernelAst::new("k", vec![], body);
        let vars: Vec<&str> = ast.loops().iter().map(|l| l.var.as_str()).collect();
        assert_eq!(vars, vec!["i", "j", "k"]);
    }
}
