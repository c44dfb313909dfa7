use std::sync::Arc;

use super::form::{local_kernel, Form, FormKind};
use super::space::{Function, FunctionSpace};
use crate::data::{build_sparsity, Access, Dat, Mat};
use crate::error::{Error, Result};
use crate::parloop::{Arg, Parloop};
use crate::topology::{Map, Set};

/// Result of [`assemble`]: a matrix for bilinear forms, a vector otherwise.
#[derive(Debug)]
pub enum Assembled {
    Matrix(Mat),
    Vector(Function),
}

impl Assembled {
    pub fn into_matrix(self) -> Option<Mat> {
        match self {
            Assembled::Matrix(m) => Some(m),
            Assembled::Vector(_) => None,
        }
    }

    pub fn into_vector(self) -> Option<Function> {
        match self {
            Assembled::Vector(f) => Some(f),
            Assembled::Matrix(_) => None,
        }
    }
}

pub fn assemble(form: &Form<'_>, bcs: &[&DirichletBC]) -> Result<Assembled> {
    if form.is_bilinear() {
        assemble_matrix(form, bcs).map(Assembled::Matrix)
    } else {
        assemble_vector(form, bcs).map(Assembled::Vector)
    }
}

/// Assembles a bilinear form. Each boundary condition zeroes its rows and
/// puts 1 on the diagonal.
pub fn assemble_matrix(form: &Form<'_>, bcs: &[&DirichletBC]) -> Result<Mat> {
    let trial = form
        .trial()
        .ok_or_else(|| Error::UnsupportedForm("matrix assembly needs a bilinear form".into()))?;
    let sparsity = if trial == form.test() {
        form.test().sparsity()?
    } else {
        build_sparsity(form.test().cell_node_map(), trial.cell_node_map(), 1, 1)?
    };
    let mut mat = Mat::new(sparsity);
    assemble_matrix_into(form, trial.cell_node_map(), &mut mat)?;
    for bc in bcs {
        bc.zero_rows(&mut mat)?;
    }
    Ok(mat)
}

/// Adds the cell contributions of `form` to `mat`, with `cols` as the
/// trial-side map (usually the trial space's cell-node map).
pub(crate) fn assemble_matrix_into(form: &Form<'_>, cols: &Map, mat: &mut Mat) -> Result<()> {
    let kernel = local_kernel(form)?;
    let mesh = form.test().mesh();
    let rows = form.test().cell_node_map();
    let args = vec![
        Arg::mat(mat, Access::Inc, rows, cols),
        Arg::read(mesh.coordinates()).via(mesh.cell_vertex_map()),
    ];
    Parloop::new(&kernel, mesh.cells(), args).run()
}

/// Assembles a linear form into a fresh Function on the test space; boundary
/// conditions then overwrite their nodes with the prescribed values.
pub fn assemble_vector(form: &Form<'_>, bcs: &[&DirichletBC]) -> Result<Function> {
    let mut out = Function::new(form.test(), "assembled");
    assemble_vector_into(form, &mut out)?;
    for bc in bcs {
        bc.apply(&mut out)?;
    }
    Ok(out)
}

/// Overwrites `out` with the assembled linear form.
pub fn assemble_vector_into(form: &Form<'_>, out: &mut Function) -> Result<()> {
    if form.is_bilinear() {
        return Err(Error::UnsupportedForm("vector assembly needs a linear form".into()));
    }
    if out.space() != form.test() {
        return Err(Error::SpaceMismatch);
    }
    let kernel = local_kernel(form)?;
    let mesh = form.test().mesh().clone();
    let coefs = form.coefficients();
    out.dat_mut().fill(0.0);

    if let FormKind::FacetSource(_, markers) = form.kind() {
        let facets = mesh.facets_with_markers(markers);
        let nv = mesh.dim() + 1;
        let set = Set::new("marked_facets", facets.len());
        let cell_of = |f: usize| mesh.facet_cell_map().row(f)[0];
        let restrict = |m: &Map, name: &str| -> Result<Map> {
            let vals = facets.iter().flat_map(|&f| m.row(cell_of(f)).iter().copied()).collect();
            Map::new(name, &set, m.target(), m.arity(), vals)
        };
        let nodes = restrict(form.test().cell_node_map(), "facet_nodes")?;
        let verts = restrict(mesh.cell_vertex_map(), "facet_vertices")?;
        let mut sel = vec![0.0; facets.len() * nv];
        for (k, &f) in facets.iter().enumerate() {
            sel[k * nv + mesh.facet_local_index(f)] = 1.0;
        }
        let sel = Dat::from_vec("facet_selector", &set, nv, sel)?;
        let coef_maps: Vec<Map> = coefs
            .iter()
            .map(|c| restrict(c.space().cell_node_map(), "facet_coefficient"))
            .collect::<Result<_>>()?;
        let mut args = vec![
            Arg::dat(out.dat_mut(), Access::Inc).via(&nodes),
            Arg::read(mesh.coordinates()).via(&verts),
            Arg::read(&sel),
        ];
        for (c, m) in coefs.iter().zip(&coef_maps) {
            args.push(Arg::read(c.dat()).via(m));
        }
        return Parloop::new(&kernel, &set, args).run();
    }

    let test_map = form.test().cell_node_map().clone();
    let mut args = vec![
        Arg::dat(out.dat_mut(), Access::Inc).via(&test_map),
        Arg::read(mesh.coordinates()).via(mesh.cell_vertex_map()),
    ];
    for c in &coefs {
        args.push(Arg::read(c.dat()).via(c.space().cell_node_map()));
    }
    Parloop::new(&kernel, mesh.cells(), args).run()
}

/// Boundary value of a [`DirichletBC`].
#[derive(Debug, Clone)]
pub enum BcValue {
    Constant(f64),
    /// Nodal values taken from a Function on the same space.
    Function(Function),
}

impl From<f64> for BcValue {
    fn from(v: f64) -> Self {
        BcValue::Constant(v)
    }
}

/// Strong Dirichlet condition on the nodes of marked exterior facets.
#[derive(Debug, Clone)]
pub struct DirichletBC {
    space: FunctionSpace,
    value: BcValue,
    markers: Vec<u32>,
    nodes: Arc<Vec<usize>>,
}

impl DirichletBC {
    pub fn new(space: &FunctionSpace, value: impl Into<BcValue>, markers: &[u32]) -> Result<DirichletBC> {
        let nodes = space.boundary_nodes(markers);
        Self::on_nodes(space, value, nodes).map(|mut bc| {
            bc.markers = markers.to_vec();
            bc
        })
    }

    /// A condition on an explicit node list.
    pub fn on_nodes(space: &FunctionSpace, value: impl Into<BcValue>, mut nodes: Vec<usize>) -> Result<DirichletBC> {
        let value = value.into();
        if let BcValue::Function(f) = &value {
            if f.space() != space {
                return Err(Error::SpaceMismatch);
            }
        }
        nodes.sort_unstable();
        nodes.dedup();
        if let Some(&bad) = nodes.iter().find(|&&n| n >= space.num_nodes()) {
            return Err(Error::IndexOutOfRange {
                position: 0,
                value: bad,
                target_size: space.num_nodes(),
            });
        }
        Ok(DirichletBC {
            space: space.clone(),
            value,
            markers: vec![],
            nodes: Arc::new(nodes),
        })
    }

    pub fn space(&self) -> &FunctionSpace {
        &self.space
    }

    pub fn markers(&self) -> &[u32] {
        &self.markers
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn set_value(&mut self, value: impl Into<BcValue>) {
        self.value = value.into();
    }

    pub fn value_at(&self, node: usize) -> f64 {
        match &self.value {
            BcValue::Constant(v) => *v,
            BcValue::Function(f) => f.values()[node],
        }
    }

    /// Overwrites the constrained entries of `u` with the boundary values.
    pub fn apply(&self, u: &mut Function) -> Result<()> {
        if u.space() != &self.space {
            return Err(Error::SpaceMismatch);
        }
        self.apply_to_slice(u.values_mut());
        Ok(())
    }

    pub fn apply_to_slice(&self, b: &mut [f64]) {
        for &n in self.nodes.iter() {
            b[n] = self.value_at(n);
        }
    }

    /// Zeroes each constrained row within its pattern and sets the diagonal
    /// to one. Columns are left alone, so symmetry is lost.
    pub fn zero_rows(&self, a: &mut Mat) -> Result<()> {
        zero_rows(a, &self.nodes)
    }
}

pub(crate) fn zero_rows(a: &mut Mat, rows: &[usize]) -> Result<()> {
    let sp = a.sparsity().clone();
    for &r in rows {
        let diag = sp.position(r, r).ok_or(Error::MissingDiagonal(r))?;
        let (lo, hi) = (sp.row_offsets()[r], sp.row_offsets()[r + 1]);
        let vals = a.values_mut();
        vals[lo..hi].fill(0.0);
        vals[diag] = 1.0;
    }
    Ok(())
}

/// Row-zeroing Dirichlet application on an assembled system: rows of `a`
/// become identity rows and `b` takes the boundary values.
pub fn apply_dirichlet(a: &mut Mat, b: &mut Dat, bc: &DirichletBC) -> Result<()> {
    if b.set() != bc.space().node_set() {
        return Err(Error::SpaceMismatch);
    }
    // check every diagonal before touching anything
    if let Some(&r) = bc.nodes().iter().find(|&&r| a.sparsity().position(r, r).is_none()) {
        return Err(Error::MissingDiagonal(r));
    }
    bc.zero_rows(a)?;
    bc.apply_to_slice(b.data_mut());
    Ok(())
}
