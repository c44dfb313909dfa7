//! Two-field mixed spaces and forms split into per-block sub-forms.

use std::collections::BTreeSet;
use std::sync::Arc;

use super::assemble::assemble_matrix;
use super::form::{compile_local_kernel, Form, FormKind};
use super::space::FunctionSpace;
use crate::data::{Access, Mat, Sparsity};
use crate::error::{Error, Result};
use crate::kernel_ir::{fold_constants, hoist_invariants, Expr, Init, Kernel, KernelAst, Param, Place, Stmt};
use crate::parloop::{Arg, Parloop};
use crate::solver::BlockMat;
use crate::topology::{Map, Set};

/// The concatenation `V0 x V1`. Nodes of `V1` follow those of `V0` in the
/// flattened numbering.
#[derive(Debug, Clone)]
pub struct MixedSpace {
    spaces: [FunctionSpace; 2],
    node_set: Set,
    cell_node: Map,
}

impl MixedSpace {
    pub fn new(v0: &FunctionSpace, v1: &FunctionSpace) -> Result<MixedSpace> {
        if !Arc::ptr_eq(v0.mesh(), v1.mesh()) {
            return Err(Error::SpaceMismatch);
        }
        if v0.components() != 1 || v1.components() != 1 {
            return Err(Error::UnsupportedForm("mixed spaces of scalar subspaces only".into()));
        }
        let offset = v0.num_nodes();
        let node_set = Set::new("mixed_nodes", offset + v1.num_nodes());
        let (m0, m1) = (v0.cell_node_map(), v1.cell_node_map());
        let mut values = Vec::with_capacity(m0.values().len() + m1.values().len());
        for c in 0..v0.mesh().cells().size() {
            values.extend_from_slice(m0.row(c));
            values.extend(m1.row(c).iter().map(|n| n + offset));
        }
        let cell_node = Map::new(
            "mixed_cell_node",
            v0.mesh().cells(),
            &node_set,
            m0.arity() + m1.arity(),
            values,
        )?;
        Ok(MixedSpace {
            spaces: [v0.clone(), v1.clone()],
            node_set,
            cell_node,
        })
    }

    pub fn sub(&self, i: usize) -> &FunctionSpace {
        &self.spaces[i]
    }

    /// First flattened index of each subspace.
    pub fn offsets(&self) -> [usize; 2] {
        [0, self.spaces[0].num_nodes()]
    }

    pub fn sizes(&self) -> [usize; 2] {
        [self.spaces[0].num_nodes(), self.spaces[1].num_nodes()]
    }

    pub fn num_nodes(&self) -> usize {
        self.node_set.size()
    }

    pub fn node_set(&self) -> &Set {
        &self.node_set
    }

    /// Cell map into the flattened numbering: `V0` nodes then `V1` nodes.
    pub fn cell_node_map(&self) -> &Map {
        &self.cell_node
    }

    /// Splits a flattened vector into its two fields.
    pub fn split<'v>(&self, x: &'v [f64]) -> (&'v [f64], &'v [f64]) {
        x.split_at(self.sizes()[0])
    }
}

/// A bilinear form on mixed spaces, declared block by block. Undeclared
/// blocks are zero.
#[derive(Debug, Clone)]
pub struct MixedForm<'a> {
    test: MixedSpace,
    trial: MixedSpace,
    blocks: Vec<(usize, usize, FormKind<'a>)>,
}

impl<'a> MixedForm<'a> {
    pub fn new(test: &MixedSpace, trial: &MixedSpace) -> MixedForm<'a> {
        MixedForm {
            test: test.clone(),
            trial: trial.clone(),
            blocks: vec![],
        }
    }

    /// Adds `kind` on test subspace `i`, trial subspace `j`, replacing any
    /// earlier declaration for that block.
    pub fn with_block(mut self, i: usize, j: usize, kind: FormKind<'a>) -> Self {
        self.blocks.retain(|(a, b, _)| (*a, *b) != (i, j));
        self.blocks.push((i, j, kind));
        self
    }

    pub fn test(&self) -> &MixedSpace {
        &self.test
    }

    pub fn trial(&self) -> &MixedSpace {
        &self.trial
    }
}

/// Block table of sub-forms; entry `(i, j)` couples test subspace `i` with
/// trial subspace `j`.
pub type FormTable<'a> = [[Option<Form<'a>>; 2]; 2];

pub fn split_mixed<'a>(form: &MixedForm<'a>) -> Result<FormTable<'a>> {
    let mut table: FormTable<'a> = Default::default();
    for (i, j, kind) in &form.blocks {
        if *i > 1 || *j > 1 {
            return Err(Error::UnsupportedForm(format!("block ({i}, {j}) of a 2x2 table")));
        }
        if !matches!(kind, FormKind::Mass | FormKind::Stiffness | FormKind::Helmholtz(_)) {
            return Err(Error::UnsupportedForm(format!("{kind:?} as a mixed block")));
        }
        table[*i][*j] = Some(Form::bilinear(kind.clone(), form.test.sub(*i), form.trial.sub(*j)));
    }
    Ok(table)
}

/// Assembles every block separately into a nested matrix.
pub fn assemble_mixed(form: &MixedForm<'_>) -> Result<BlockMat> {
    let table = split_mixed(form)?;
    let mut blocks: [[Option<Mat>; 2]; 2] = Default::default();
    for (i, row) in table.iter().enumerate() {
        for (j, f) in row.iter().enumerate() {
            if let Some(f) = f {
                blocks[i][j] = Some(assemble_matrix(f, &[])?);
            }
        }
    }
    BlockMat::new(blocks, form.test.sizes(), form.trial.sizes())
}

/// Assembles the whole form at once over the flattened numbering, with a
/// single kernel whose local matrix holds every block.
///
/// The pattern is the full union of all four blocks, so undeclared blocks
/// are stored as explicit zeros.
pub fn assemble_monolithic(form: &MixedForm<'_>) -> Result<Mat> {
    let table = split_mixed(form)?;
    let ast = monolithic_kernel(form, &table)?;
    let kernel = Kernel::from_ast(fold_constants(&hoist_invariants(&ast)))?;
    let (rows, cols) = (form.test.cell_node_map(), form.trial.cell_node_map());
    let mut mat = Mat::new(Arc::new(union_pattern(rows, cols)?));
    let mesh = form.test.sub(0).mesh();
    let args = vec![
        Arg::mat(&mut mat, Access::Inc, rows, cols),
        Arg::read(mesh.coordinates()).via(mesh.cell_vertex_map()),
    ];
    Parloop::new(&kernel, mesh.cells(), args).run()?;
    Ok(mat)
}

fn union_pattern(rows: &Map, cols: &Map) -> Result<Sparsity> {
    let mut sets = vec![BTreeSet::new(); rows.target().size()];
    for c in 0..rows.source().size() {
        for &r in rows.row(c) {
            sets[r].extend(cols.row(c).iter().copied());
        }
    }
    let mut offsets = vec![0];
    let mut indices = Vec::new();
    for s in sets {
        indices.extend(s);
        offsets.push(indices.len());
    }
    Sparsity::from_csr(rows.target().size(), cols.target().size(), offsets, indices)
}

/// Concatenates the block kernels: block `(i, j)` writes its local matrix
/// into the rows and columns of subspaces `i` and `j`, and its locals get a
/// block suffix so the combined body declares every name once.
fn monolithic_kernel(form: &MixedForm<'_>, table: &FormTable<'_>) -> Result<KernelAst> {
    let n = [form.test.sub(0).element().num_nodes(), form.test.sub(1).element().num_nodes()];
    let m = [form.trial.sub(0).element().num_nodes(), form.trial.sub(1).element().num_nodes()];
    let mesh = form.test.sub(0).mesh();
    let (dim, nv) = (mesh.dim(), mesh.dim() + 1);
    let mut body = Vec::new();
    for (i, row) in table.iter().enumerate() {
        for (j, f) in row.iter().enumerate() {
            let Some(f) = f else { continue };
            let block = compile_local_kernel(f)?;
            let locals = declared_names(&block.body);
            let shift = [if i == 0 { 0 } else { n[0] }, if j == 0 { 0 } else { m[0] }];
            let rewrite = |p: &Place| -> Place {
                if p.name == "A" {
                    let index = p.index.iter().zip(shift).map(|(ix, s)| ix.clone().plus(s as i64)).collect();
                    Place { name: p.name.clone(), index }
                } else if locals.contains(&p.name) {
                    Place { name: format!("{}_{i}{j}", p.name), index: p.index.clone() }
                } else {
                    p.clone()
                }
            };
            body.extend(block.body.iter().map(|s| rewrite_stmt(s, &rewrite)));
        }
    }
    let params = vec![Param::new("A", &[n[0] + n[1], m[0] + m[1]]), Param::new("C", &[nv, dim])];
    Ok(KernelAst::new("mixed_monolithic", params, body))
}

fn declared_names(stmts: &[Stmt]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for s in stmts {
        match s {
            Stmt::Decl(d) => {
                out.insert(d.name.clone());
            }
            Stmt::For(l) => out.extend(declared_names(&l.body)),
            _ => {}
        }
    }
    out
}

fn rewrite_stmt(s: &Stmt, f: &impl Fn(&Place) -> Place) -> Stmt {
    let expr = |e: &Expr| {
        e.map_bottom_up(&mut |e| match e {
            Expr::Load(p) => Expr::Load(f(&p)),
            other => other,
        })
    };
    match s {
        Stmt::Decl(d) => {
            let mut d = d.clone();
            d.name = f(&Place::scalar(&d.name)).name;
            if let Init::Expr(e) = &d.init {
                d.init = Init::Expr(expr(e));
            }
            Stmt::Decl(d)
        }
        Stmt::For(l) => {
            let mut l = l.clone();
            l.body = l.body.iter().map(|s| rewrite_stmt(s, f)).collect();
            Stmt::For(l)
        }
        Stmt::Assign { target, value } => Stmt::assign(f(target), expr(value)),
        Stmt::AddAssign { target, value } => Stmt::add_assign(f(target), expr(value)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::unit_square_mesh;
    use crate::solver::block_spmv;

    #[test]
    fn mass_on_a_doubled_space_is_block_diagonal() {
        let mesh = Arc::new(unit_square_mesh(2).unwrap());
        let v = FunctionSpace::new(&mesh, 1).unwrap();
        let w = MixedSpace::new(&v, &v).unwrap();
        let form = MixedForm::new(&w, &w).with_block(0, 0, FormKind::Mass).with_block(1, 1, FormKind::Mass);
        let table = split_mixed(&form).unwrap();
        assert!(table[0][1].is_none() && table[1][0].is_none());
        let blocks = assemble_mixed(&form).unwrap();
        let mass = assemble_matrix(&Form::mass(&v), &[]).unwrap();
        assert_eq!(blocks.block(0, 0).unwrap().values(), mass.values());
        assert_eq!(blocks.block(1, 1).unwrap().values(), mass.values());
        let x: Vec<f64> = (0..v.num_nodes()).map(|k| k as f64).collect();
        let (y0, y1) = block_spmv(&blocks, (&x, &x)).unwrap();
        assert_eq!(y0, mass.spmv(&x).unwrap());
        assert_eq!(y1, y0);
    }

    #[test]
    fn monolithic_matches_blockwise_with_coupling() {
        let mesh = Arc::new(unit_square_mesh(2).unwrap());
        let v1 = FunctionSpace::new(&mesh, 1).unwrap();
        let v2 = FunctionSpace::new(&mesh, 2).unwrap();
        let w = MixedSpace::new(&v2, &v1).unwrap();
        let form = MixedForm::new(&w, &w)
            .with_block(0, 0, FormKind::Stiffness)
            .with_block(0, 1, FormKind::Mass)
            .with_block(1, 0, FormKind::Mass)
            .with_block(1, 1, FormKind::Helmholtz(2.0));
        let dense = assemble_monolithic(&form).unwrap().to_dense();
        let nested = assemble_mixed(&form).unwrap().to_dense();
        for (a, b) in dense.iter().flatten().zip(nested.iter().flatten()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn bad_blocks_are_rejected() {
        let mesh = Arc::new(unit_square_mesh(1).unwrap());
        let v = FunctionSpace::new(&mesh, 1).unwrap();
        let w = MixedSpace::new(&v, &v).unwrap();
        let f = crate::fem::Function::new(&v, "f");
        let form = MixedForm::new(&w, &w).with_block(0, 0, FormKind::StiffnessAction(&f));
        assert!(split_mixed(&form).is_err());
        let other = Arc::new(unit_square_mesh(1).unwrap());
        let u = FunctionSpace::new(&other, 1).unwrap();
        assert_eq!(MixedSpace::new(&v, &u).unwrap_err(), Error::SpaceMismatch);
    }
}
