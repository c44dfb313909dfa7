//! The form catalogue and its translation into local assembly kernels.
//!
//! Every kernel takes the local output block first, then the cell vertex
//! coordinates `C[nv][dim]`, then one block per Function coefficient. The
//! body computes the affine Jacobian `J`, `detJ`, `|detJ|` and the inverse
//! `K`, then accumulates the integrand over a quadrature loop.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::element::{tabulate_at, Element};
use super::quadrature::{Cell, QuadratureRule};
use super::space::{Function, FunctionSpace};
use crate::error::{Error, Result};
use crate::kernel_ir::{fold_constants, hoist_invariants, Expr, Index, Kernel, KernelAst, Param, Place, Stmt};

/// A coefficient appearing in a linear form.
#[derive(Debug, Clone)]
pub enum Coefficient<'a> {
    Constant(f64),
    Function(&'a Function),
    /// An expression in the physical coordinates, written with loads of
    /// [`coord`]`(d)`; evaluated at the quadrature points.
    Spatial(Expr),
}

/// Physical coordinate `d` for use inside [`Coefficient::Spatial`].
pub fn coord(d: usize) -> Expr {
    Expr::Load(Place::new("x", vec![Index::constant(d as i64)]))
}

#[derive(Debug, Clone)]
pub enum FormKind<'a> {
    /// `u v dx`
    Mass,
    /// `grad u . grad v dx`
    Stiffness,
    /// `grad u . grad v dx + kappa u v dx`
    Helmholtz(f64),
    /// `f v dx`
    Source(Coefficient<'a>),
    /// `g v ds` over exterior facets with the given markers
    FacetSource(Coefficient<'a>, Vec<u32>),
    /// `grad v . grad phi dx` for a known `phi`
    StiffnessAction(&'a Function),
}

#[derive(Debug, Clone)]
pub struct Form<'a> {
    kind: FormKind<'a>,
    test: FunctionSpace,
    trial: Option<FunctionSpace>,
}

impl<'a> Form<'a> {
    pub fn mass(v: &FunctionSpace) -> Form<'a> {
        Self::bilinear(FormKind::Mass, v, v)
    }

    pub fn stiffness(v: &FunctionSpace) -> Form<'a> {
        Self::bilinear(FormKind::Stiffness, v, v)
    }

    pub fn helmholtz(v: &FunctionSpace, kappa: f64) -> Form<'a> {
        Self::bilinear(FormKind::Helmholtz(kappa), v, v)
    }

    /// A bilinear form with distinct test and trial spaces.
    pub fn bilinear(kind: FormKind<'a>, test: &FunctionSpace, trial: &FunctionSpace) -> Form<'a> {
        Form {
            kind,
            test: test.clone(),
            trial: Some(trial.clone()),
        }
    }

    pub fn source(v: &FunctionSpace, f: Coefficient<'a>) -> Form<'a> {
        Self::linear(FormKind::Source(f), v)
    }

    pub fn facet_source(v: &FunctionSpace, g: Coefficient<'a>, markers: &[u32]) -> Form<'a> {
        Self::linear(FormKind::FacetSource(g, markers.to_vec()), v)
    }

    pub fn stiffness_action(v: &FunctionSpace, phi: &'a Function) -> Form<'a> {
        Self::linear(FormKind::StiffnessAction(phi), v)
    }

    pub fn linear(kind: FormKind<'a>, test: &FunctionSpace) -> Form<'a> {
        Form {
            kind,
            test: test.clone(),
            trial: None,
        }
    }

    pub fn kind(&self) -> &FormKind<'a> {
        &self.kind
    }

    pub fn test(&self) -> &FunctionSpace {
        &self.test
    }

    pub fn trial(&self) -> Option<&FunctionSpace> {
        self.trial.as_ref()
    }

    pub fn is_bilinear(&self) -> bool {
        self.trial.is_some()
    }

    pub fn is_facet_integral(&self) -> bool {
        matches!(self.kind, FormKind::FacetSource(..))
    }

    /// Function coefficients in kernel argument order.
    pub fn coefficients(&self) -> Vec<&'a Function> {
        match &self.kind {
            FormKind::Source(Coefficient::Function(f))
            | FormKind::FacetSource(Coefficient::Function(f), _)
            | FormKind::StiffnessAction(f) => vec![*f],
            _ => vec![],
        }
    }

    /// Quadrature degree used for the form.
    ///
    /// Mass-type terms use the sum of the test and trial degrees, pure
    /// stiffness twice the degree minus one (at least 1). Linear forms add the
    /// coefficient degree to the test degree; spatial expressions count as
    /// degree + 2.
    pub fn quadrature_degree(&self) -> usize {
        let p = self.test.degree();
        let coef = |c: &Coefficient<'_>| match c {
            Coefficient::Constant(_) => 0,
            Coefficient::Function(f) => f.space().degree(),
            Coefficient::Spatial(_) => p + 2,
        };
        let d = match &self.kind {
            FormKind::Mass | FormKind::Helmholtz(_) => p + self.trial.as_ref().map_or(p, |t| t.degree()),
            FormKind::Stiffness => p + self.trial.as_ref().map_or(p, |t| t.degree()) - 2,
            FormKind::StiffnessAction(phi) => p + phi.space().degree() - 2,
            FormKind::Source(c) | FormKind::FacetSource(c, _) => p + coef(c),
        };
        let cap = match (self.is_facet_integral(), self.test.element().cell()) {
            (false, Cell::Triangle) | (true, Cell::Tetrahedron) => 6,
            _ => 5,
        };
        d.clamp(1, cap)
    }

    fn validate(&self) -> Result<()> {
        let mesh = self.test.mesh();
        let mut spaces = vec![&self.test];
        spaces.extend(self.trial.as_ref());
        let coefs = self.coefficients();
        spaces.extend(coefs.iter().map(|f| f.space()));
        for s in &spaces {
            if !Arc::ptr_eq(s.mesh(), mesh) {
                return Err(Error::SpaceMismatch);
            }
            if s.components() != 1 {
                return Err(Error::UnsupportedForm("forms are defined on scalar spaces only".into()));
            }
        }
        let ok = match &self.kind {
            FormKind::Mass | FormKind::Stiffness | FormKind::Helmholtz(_) => self.trial.is_some(),
            _ => self.trial.is_none(),
        };
        if !ok {
            return Err(Error::UnsupportedForm(format!(
                "{:?} with {} trial space",
                self.kind,
                if self.trial.is_some() { "a" } else { "no" }
            )));
        }
        Ok(())
    }

    /// Identifies the generated code: equal keys give identical kernels.
    pub(crate) fn signature(&self) -> String {
        let el = |s: &FunctionSpace| format!("{:?}{}", s.element().cell(), s.degree());
        let coef = |c: &Coefficient<'_>| match c {
            Coefficient::Constant(v) => format!("c{:e}", v),
            Coefficient::Function(f) => format!("f{}", el(f.space())),
            Coefficient::Spatial(e) => format!("x{e:?}"),
        };
        let kind = match &self.kind {
            FormKind::Mass => "mass".to_string(),
            FormKind::Stiffness => "stiffness".to_string(),
            FormKind::Helmholtz(k) => format!("helmholtz{k:e}"),
            FormKind::Source(c) => format!("source({})", coef(c)),
            FormKind::FacetSource(c, _) => format!("facet({})", coef(c)),
            FormKind::StiffnessAction(f) => format!("action({})", el(f.space())),
        };
        format!(
            "{kind}|{}|{}",
            el(&self.test),
            self.trial.as_ref().map(el).unwrap_or_default()
        )
    }
}

pub(super) fn ld(name: &str, idx: Vec<Index>) -> Expr {
    Expr::Load(Place::new(name, idx))
}

pub(super) fn c(k: usize) -> Index {
    Index::constant(k as i64)
}

pub(super) fn v(name: &str) -> Index {
    Index::var(name)
}

pub(super) fn table(name: &str, rows: &[Vec<f64>]) -> Stmt {
    let cols = rows.first().map_or(0, Vec::len);
    Stmt::table(name, &[rows.len(), cols], rows.concat())
}

fn table3(name: &str, data: &[Vec<Vec<f64>>]) -> Stmt {
    let n1 = data.first().map_or(0, Vec::len);
    let n2 = data.first().and_then(|r| r.first()).map_or(0, Vec::len);
    let flat: Vec<f64> = data.iter().flat_map(|r| r.iter().flatten().copied()).collect();
    Stmt::table(name, &[data.len(), n1, n2], flat)
}

/// Jacobian, its determinant, absolute determinant and inverse.
pub(super) fn geometry(dim: usize) -> Vec<Stmt> {
    let j = |r: usize, s: usize| ld("J", vec![c(r), c(s)]);
    let mut out = vec![
        Stmt::array("J", &[dim, dim]),
        Stmt::for_loop(
            "r",
            0,
            dim as i64,
            vec![Stmt::for_loop(
                "s",
                0,
                dim as i64,
                vec![Stmt::assign(
                    Place::new("J", vec![v("r"), v("s")]),
                    ld("C", vec![v("s").plus(1), v("r")]) - ld("C", vec![c(0), v("r")]),
                )],
            )],
        ),
    ];
    let det = if dim == 2 {
        j(0, 0) * j(1, 1) - j(0, 1) * j(1, 0)
    } else {
        j(0, 0) * (j(1, 1) * j(2, 2) - j(1, 2) * j(2, 1)) - j(0, 1) * (j(1, 0) * j(2, 2) - j(1, 2) * j(2, 0))
            + j(0, 2) * (j(1, 0) * j(2, 1) - j(1, 1) * j(2, 0))
    };
    out.push(Stmt::scalar("detJ", det));
    out.push(Stmt::scalar(
        "adet",
        (ld("detJ", vec![]) * ld("detJ", vec![])).sqrt(),
    ));
    out.push(Stmt::array("K", &[dim, dim]));
    let d = || ld("detJ", vec![]);
    for r in 0..dim {
        for s in 0..dim {
            let val = if dim == 2 {
                let sign = if r == s { 1.0 } else { -1.0 };
                let num = if r == s { j(1 - r, 1 - s) } else { j(r, s) };
                if sign > 0.0 {
                    num / d()
                } else {
                    -num / d()
                }
            } else {
                let (r1, r2, s1, s2) = ((r + 1) % 3, (r + 2) % 3, (s + 1) % 3, (s + 2) % 3);
                (j(s1, r1) * j(s2, r2) - j(s1, r2) * j(s2, r1)) / d()
            };
            out.push(Stmt::assign(Place::new("K", vec![c(r), c(s)]), val));
        }
    }
    out
}

/// `G[i][r] = sum_c D[q][i][c] K[c][r]` for all basis functions `i`.
fn physical_gradients(g: &str, d: &str, n: usize, dim: usize) -> Vec<Stmt> {
    let sum = Expr::sum((0..dim).map(|s| ld(d, vec![v("q"), v("i"), c(s)]) * ld("K", vec![c(s), v("r")])));
    vec![
        Stmt::array(g, &[n, dim]),
        Stmt::for_loop(
            "i",
            0,
            n as i64,
            vec![Stmt::for_loop(
                "r",
                0,
                dim as i64,
                vec![Stmt::assign(Place::new(g, vec![v("i"), v("r")]), sum)],
            )],
        ),
    ]
}

fn dot(a: &str, ai: Index, b: &str, bi: Index, dim: usize) -> Expr {
    Expr::sum((0..dim).map(|r| ld(a, vec![ai.clone(), c(r)]) * ld(b, vec![bi.clone(), c(r)])))
}

struct Tables {
    stmts: Vec<Stmt>,
}

impl Tables {
    fn new() -> Self {
        Tables { stmts: vec![] }
    }

    fn values(&mut self, name: &str, e: &Element, pts: &[Vec<f64>]) {
        self.stmts.push(table(name, &tabulate_at(e, pts).values));
    }

    fn grads(&mut self, name: &str, e: &Element, pts: &[Vec<f64>]) {
        self.stmts.push(table3(name, &tabulate_at(e, pts).grads));
    }
}

/// Value of a coefficient at the current quadrature point, declared as the
/// scalar `fname`. `at` subscripts the tables down to the basis index.
struct CoefAt<'n> {
    at: Vec<Index>,
    fname: &'n str,
    xname: &'n str,
}

impl CoefAt<'_> {
    fn stmts(&self, coef: &Coefficient<'_>, nw: usize, nv: usize, dim: usize) -> Vec<Stmt> {
        let tab = |name: &str, k: usize| {
            let mut idx = self.at.clone();
            idx.push(c(k));
            ld(name, idx)
        };
        match coef {
            Coefficient::Constant(val) => vec![Stmt::scalar(self.fname, Expr::Lit(*val))],
            Coefficient::Function(_) => {
                let terms = (0..nw).map(|k| ld("w0", vec![c(k)]) * tab("PHIW", k));
                vec![Stmt::scalar(self.fname, Expr::sum(terms))]
            }
            Coefficient::Spatial(e) => {
                let mut out = vec![Stmt::array(self.xname, &[dim])];
                for r in 0..dim {
                    let terms = (0..nv).map(|k| ld("C", vec![c(k), c(r)]) * tab("PHIX", k));
                    out.push(Stmt::assign(Place::new(self.xname, vec![c(r)]), Expr::sum(terms)));
                }
                out.push(Stmt::scalar(self.fname, e.rename("x", self.xname)));
                out
            }
        }
    }
}

/// Translates a catalogued form into its unoptimised local assembly kernel.
pub fn compile_local_kernel(form: &Form<'_>) -> Result<KernelAst> {
    form.validate()?;
    let test = *form.test.element();
    let cell = test.cell();
    let dim = cell.dim();
    let nv = cell.num_vertices();
    let n = test.num_nodes();
    let p1 = Element::lagrange(cell, 1)?;
    let mut params = Vec::new();
    let mut tabs = Tables::new();
    let mut body = Vec::new();
    let wq = || ld("W", vec![v("q")]) * ld("adet", vec![]);

    if form.is_facet_integral() {
        return compile_facet_kernel(form);
    }
    let rule = QuadratureRule::new(cell, form.quadrature_degree())?;
    let pts = rule.points();
    let nq = rule.len();
    tabs.stmts.push(Stmt::table("W", &[nq], rule.weights().to_vec()));

    match &form.kind {
        FormKind::Mass | FormKind::Stiffness | FormKind::Helmholtz(_) => {
            let trial = *form.trial.as_ref().unwrap().element();
            let m = trial.num_nodes();
            let same = trial == test;
            params.push(Param::new("A", &[n, m]));
            params.push(Param::new("C", &[nv, dim]));
            let (pu, du) = if same { ("PHI", "DPHI") } else { ("PHIU", "DPHIU") };
            let needs_grad = !matches!(form.kind, FormKind::Mass);
            let needs_val = !matches!(form.kind, FormKind::Stiffness);
            if needs_val {
                tabs.values("PHI", &test, pts);
                if !same {
                    tabs.values(pu, &trial, pts);
                }
            }
            if needs_grad {
                tabs.grads("DPHI", &test, pts);
                if !same {
                    tabs.grads(du, &trial, pts);
                }
            }
            let mut qbody = Vec::new();
            if needs_grad {
                qbody.extend(physical_gradients("GV", "DPHI", n, dim));
                if !same {
                    qbody.extend(physical_gradients("GU", du, m, dim));
                }
            }
            let gu = if same { "GV" } else { "GU" };
            let mass = || ld("PHI", vec![v("q"), v("i")]) * ld(pu, vec![v("q"), v("j")]);
            let stiff = || dot("GV", v("i"), gu, v("j"), dim);
            let integrand = match &form.kind {
                FormKind::Mass => mass(),
                FormKind::Stiffness => stiff(),
                FormKind::Helmholtz(k) => stiff() + *k * mass(),
                _ => unreachable!(),
            };
            qbody.push(Stmt::for_loop(
                "i",
                0,
                n as i64,
                vec![Stmt::for_loop(
                    "j",
                    0,
                    m as i64,
                    vec![Stmt::add_assign(Place::new("A", vec![v("i"), v("j")]), wq() * integrand)],
                )],
            ));
            body.push(Stmt::for_loop("q", 0, nq as i64, qbody));
        }
        FormKind::Source(coef) => {
            params.push(Param::new("A", &[n]));
            params.push(Param::new("C", &[nv, dim]));
            tabs.values("PHI", &test, pts);
            let mut nw = 0;
            match coef {
                Coefficient::Function(f) => {
                    let e = *f.space().element();
                    nw = e.num_nodes();
                    params.push(Param::new("w0", &[nw]));
                    tabs.values("PHIW", &e, pts);
                }
                Coefficient::Spatial(_) => tabs.values("PHIX", &p1, pts),
                Coefficient::Constant(_) => {}
            }
            let at = CoefAt {
                at: vec![v("q")],
                fname: "f",
                xname: "x",
            };
            let mut qbody = at.stmts(coef, nw, nv, dim);
            qbody.push(Stmt::for_loop(
                "i",
                0,
                n as i64,
                vec![Stmt::add_assign(
                    Place::new("A", vec![v("i")]),
                    wq() * ld("f", vec![]) * ld("PHI", vec![v("q"), v("i")]),
                )],
            ));
            body.push(Stmt::for_loop("q", 0, nq as i64, qbody));
        }
        FormKind::StiffnessAction(phi) => {
            let e = *phi.space().element();
            let nw = e.num_nodes();
            params.push(Param::new("A", &[n]));
            params.push(Param::new("C", &[nv, dim]));
            params.push(Param::new("w0", &[nw]));
            tabs.grads("DPHI", &test, pts);
            let mut qbody = physical_gradients("GV", "DPHI", n, dim);
            let gw = if e == test {
                "GV"
            } else {
                tabs.grads("DPHIW", &e, pts);
                qbody.extend(physical_gradients("GW", "DPHIW", nw, dim));
                "GW"
            };
            qbody.push(Stmt::array("g", &[dim]));
            qbody.push(Stmt::for_loop(
                "k",
                0,
                nw as i64,
                vec![Stmt::for_loop(
                    "r",
                    0,
                    dim as i64,
                    vec![Stmt::add_assign(
                        Place::new("g", vec![v("r")]),
                        ld("w0", vec![v("k")]) * ld(gw, vec![v("k"), v("r")]),
                    )],
                )],
            ));
            let grad_dot = Expr::sum((0..dim).map(|r| ld("GV", vec![v("i"), c(r)]) * ld("g", vec![c(r)])));
            qbody.push(Stmt::for_loop(
                "i",
                0,
                n as i64,
                vec![Stmt::add_assign(Place::new("A", vec![v("i")]), wq() * grad_dot)],
            ));
            body.push(Stmt::for_loop("q", 0, nq as i64, qbody));
        }
        FormKind::FacetSource(..) => unreachable!(),
    }

    let mut stmts = tabs.stmts;
    stmts.extend(geometry(dim));
    stmts.extend(body);
    Ok(KernelAst::new(kernel_name(form), params, stmts))
}

fn kernel_name(form: &Form<'_>) -> String {
    let kind = match form.kind {
        FormKind::Mass => "mass",
        FormKind::Stiffness => "stiffness",
        FormKind::Helmholtz(_) => "helmholtz",
        FormKind::Source(_) => "source",
        FormKind::FacetSource(..) => "facet_source",
        FormKind::StiffnessAction(_) => "stiffness_action",
    };
    format!("{kind}_p{}_{}d", form.test.degree(), form.test.mesh().dim())
}

/// Facet integrals run over marked exterior facets. The kernel receives the
/// cell block, the cell coordinates, a one-hot selector `S[nv]` naming the
/// local facet, and coefficient blocks; it evaluates every local facet and
/// weights each by its selector entry.
fn compile_facet_kernel(form: &Form<'_>) -> Result<KernelAst> {
    let FormKind::FacetSource(coef, _) = &form.kind else {
        unreachable!()
    };
    let test = *form.test.element();
    let cell = test.cell();
    let dim = cell.dim();
    let nv = cell.num_vertices();
    let n = test.num_nodes();
    let p1 = Element::lagrange(cell, 1)?;
    let rule = QuadratureRule::new(cell.facet().unwrap(), form.quadrature_degree())?;
    let nq = rule.len();
    let refv = cell.vertices();

    // quadrature points of every local facet, in reference-cell coordinates
    let mut facet_pts: Vec<Vec<Vec<f64>>> = Vec::with_capacity(nv);
    for f in 0..nv {
        let fv: Vec<usize> = (0..nv).filter(|&k| k != f).collect();
        facet_pts.push(
            rule.points()
                .iter()
                .map(|p| {
                    let mut lam = vec![1.0 - p.iter().sum::<f64>()];
                    lam.extend_from_slice(p);
                    (0..dim)
                        .map(|d| lam.iter().zip(&fv).map(|(l, &k)| l * refv[k][d]).sum())
                        .collect()
                })
                .collect(),
        );
    }
    let tab3 = |e: &Element| -> Vec<Vec<Vec<f64>>> { facet_pts.iter().map(|pts| tabulate_at(e, pts).values).collect() };

    let mut params = vec![Param::new("A", &[n]), Param::new("C", &[nv, dim]), Param::new("S", &[nv])];
    let mut stmts = vec![
        Stmt::table("W", &[nq], rule.weights().to_vec()),
        table3("PHI", &tab3(&test)),
    ];
    let mut nw = 0;
    match coef {
        Coefficient::Function(fun) => {
            let e = *fun.space().element();
            nw = e.num_nodes();
            params.push(Param::new("w0", &[nw]));
            stmts.push(table3("PHIW", &tab3(&e)));
        }
        Coefficient::Spatial(_) => stmts.push(table3("PHIX", &tab3(&p1))),
        Coefficient::Constant(_) => {}
    }

    let diff = |a: usize, b: usize, d: usize| ld("C", vec![c(a), c(d)]) - ld("C", vec![c(b), c(d)]);
    for f in 0..nv {
        let fv: Vec<usize> = (0..nv).filter(|&k| k != f).collect();
        // facet Jacobian: edge length in 2D, twice the face area in 3D
        let jac = if dim == 2 {
            (diff(fv[1], fv[0], 0) * diff(fv[1], fv[0], 0) + diff(fv[1], fv[0], 1) * diff(fv[1], fv[0], 1)).sqrt()
        } else {
            let (a, b, o) = (fv[1], fv[2], fv[0]);
            let cross = |i: usize, j: usize| diff(a, o, i) * diff(b, o, j) - diff(a, o, j) * diff(b, o, i);
            (cross(1, 2) * cross(1, 2) + cross(2, 0) * cross(2, 0) + cross(0, 1) * cross(0, 1)).sqrt()
        };
        let sname = format!("sf{f}");
        let (fname, xname) = (format!("f{f}"), format!("x{f}"));
        let at = CoefAt {
            at: vec![c(f), v("q")],
            fname: &fname,
            xname: &xname,
        };
        let mut qbody = at.stmts(coef, nw, nv, dim);
        qbody.push(Stmt::for_loop(
            "i",
            0,
            n as i64,
            vec![Stmt::add_assign(
                Place::new("A", vec![v("i")]),
                (ld("W", vec![v("q")]) * ld(&sname, vec![])) * ld(&fname, vec![]) * ld("PHI", vec![c(f), v("q"), v("i")]),
            )],
        ));
        stmts.push(Stmt::scalar(&sname, ld("S", vec![c(f)]) * jac));
        stmts.push(Stmt::for_loop("q", 0, nq as i64, qbody));
    }
    Ok(KernelAst::new(kernel_name(form), params, stmts))
}

type KernelCache = Mutex<HashMap<String, Arc<Kernel>>>;

/// The optimised (hoisted and folded) kernel for `form`, cached on the
/// form's signature.
pub fn local_kernel(form: &Form<'_>) -> Result<Arc<Kernel>> {
    static CACHE: OnceLock<KernelCache> = OnceLock::new();
    let key = form.signature();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(k) = cache.lock().unwrap().get(&key) {
        return Ok(k.clone());
    }
    let ast = fold_constants(&hoist_invariants(&compile_local_kernel(form)?));
    let k = Arc::new(Kernel::from_ast(ast)?);
    cache.lock().unwrap().insert(key, k.clone());
    Ok(k)
}
