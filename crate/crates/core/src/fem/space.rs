use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use super::element::{Element, TRI_EDGES};
use super::quadrature::Cell;
use crate::data::{build_sparsity, Dat, Sparsity};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::topology::{Map, Set};

/// Degrees of freedom of a Lagrange element over a mesh.
///
/// Nodes are numbered vertices first, then (P2) one node per unique edge with
/// edges keyed by their sorted vertex pair in lexicographic order.
#[derive(Clone)]
pub struct FunctionSpace(Arc<SpaceInner>);

struct SpaceInner {
    mesh: Arc<Mesh>,
    element: Element,
    components: usize,
    node_set: Set,
    cell_node: Map,
    node_coords: Vec<f64>,
    sparsity: OnceLock<Arc<Sparsity>>,
}

impl PartialEq for FunctionSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl fmt::Debug for FunctionSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FunctionSpace(P{} {:?}, {} nodes x {})",
            self.0.element.degree(),
            self.0.element.cell(),
            self.0.node_set.size(),
            self.0.components
        )
    }
}

impl FunctionSpace {
    /// Scalar Lagrange space of the given degree.
    pub fn new(mesh: &Arc<Mesh>, degree: usize) -> Result<FunctionSpace> {
        Self::with_components(mesh, degree, 1)
    }

    /// Vector-valued space with one component per spatial dimension.
    pub fn vector(mesh: &Arc<Mesh>, degree: usize) -> Result<FunctionSpace> {
        Self::with_components(mesh, degree, mesh.dim())
    }

    pub fn with_components(mesh: &Arc<Mesh>, degree: usize, components: usize) -> Result<FunctionSpace> {
        let element = Element::lagrange(Cell::for_dim(mesh.dim())?, degree)?;
        let dim = mesh.dim();
        let nv = mesh.vertices().size();
        let cv = mesh.cell_vertex_map();
        let mut coords = mesh.coordinates().data().to_vec();
        let (node_set, values) = if degree == 1 {
            (Set::new("nodes", nv), cv.values().to_vec())
        } else {
            let mut edges = BTreeMap::new();
            for c in 0..mesh.cells().size() {
                let row = cv.row(c);
                for (a, b) in TRI_EDGES {
                    edges.insert((row[a].min(row[b]), row[a].max(row[b])), 0);
                }
            }
            for (k, (&(a, b), id)) in edges.iter_mut().enumerate() {
                *id = nv + k;
                for d in 0..dim {
                    coords.push(0.5 * (mesh.vertex(a)[d] + mesh.vertex(b)[d]));
                }
            }
            let mut values = Vec::with_capacity(6 * mesh.cells().size());
            for c in 0..mesh.cells().size() {
                let row = cv.row(c);
                values.extend_from_slice(row);
                for (a, b) in TRI_EDGES {
                    values.push(edges[&(row[a].min(row[b]), row[a].max(row[b]))]);
                }
            }
            (Set::new("nodes", nv + edges.len()), values)
        };
        let cell_node = Map::new("cell_node", mesh.cells(), &node_set, element.num_nodes(), values)?;
        Ok(FunctionSpace(Arc::new(SpaceInner {
            mesh: mesh.clone(),
            element,
            components,
            node_set,
            cell_node,
            node_coords: coords,
            sparsity: OnceLock::new(),
        })))
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.0.mesh
    }

    pub fn element(&self) -> &Element {
        &self.0.element
    }

    pub fn degree(&self) -> usize {
        self.0.element.degree()
    }

    pub fn components(&self) -> usize {
        self.0.components
    }

    pub fn node_set(&self) -> &Set {
        &self.0.node_set
    }

    pub fn num_nodes(&self) -> usize {
        self.0.node_set.size()
    }

    pub fn cell_node_map(&self) -> &Map {
        &self.0.cell_node
    }

    /// Physical coordinates of node `n`.
    pub fn node_coordinates(&self, n: usize) -> &[f64] {
        let d = self.0.mesh.dim();
        &self.0.node_coords[n * d..(n + 1) * d]
    }

    /// Square sparsity pattern of this space against itself, built once.
    pub fn sparsity(&self) -> Result<Arc<Sparsity>> {
        if let Some(s) = self.0.sparsity.get() {
            return Ok(s.clone());
        }
        let m = &self.0.cell_node;
        let s = build_sparsity(m, m, self.0.components, self.0.components)?;
        Ok(self.0.sparsity.get_or_init(|| s).clone())
    }

    /// Nodes on exterior facets carrying any of `markers`, ascending.
    pub fn boundary_nodes(&self, markers: &[u32]) -> Vec<usize> {
        let mesh = &self.0.mesh;
        let fc = mesh.facet_cell_map();
        let mut nodes = Vec::new();
        for f in mesh.facets_with_markers(markers) {
            let c = fc.row(f)[0];
            let row = self.0.cell_node.row(c);
            for k in self.0.element.facet_nodes(mesh.facet_local_index(f)) {
                nodes.push(row[k]);
            }
        }
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }
}

/// A field: one Dat over the node set of a space.
#[derive(Debug, Clone)]
pub struct Function {
    space: FunctionSpace,
    dat: Dat,
}

impl Function {
    pub fn new(space: &FunctionSpace, name: impl Into<String>) -> Function {
        Function {
            dat: Dat::zeros(name, space.node_set(), space.components()),
            space: space.clone(),
        }
    }

    pub fn from_vec(space: &FunctionSpace, name: impl Into<String>, values: Vec<f64>) -> Result<Function> {
        Ok(Function {
            dat: Dat::from_vec(name, space.node_set(), space.components(), values)?,
            space: space.clone(),
        })
    }

    pub fn space(&self) -> &FunctionSpace {
        &self.space
    }

    pub fn name(&self) -> &str {
        self.dat.name()
    }

    pub fn dat(&self) -> &Dat {
        &self.dat
    }

    pub fn dat_mut(&mut self) -> &mut Dat {
        &mut self.dat
    }

    pub fn values(&self) -> &[f64] {
        self.dat.data()
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        self.dat.data_mut()
    }

    /// Sets every node to `f(x)` (scalar spaces) or every component to the
    /// matching entry of `f` repeated (vector spaces use `interpolate_vector`).
    pub fn interpolate(&mut self, f: impl Fn(&[f64]) -> f64) -> Result<&mut Self> {
        if self.space.components() != 1 {
            return Err(Error::ShapeMismatch("interpolate needs a scalar space".into()));
        }
        let space = self.space.clone();
        for (n, v) in self.dat.data_mut().iter_mut().enumerate() {
            *v = f(space.node_coordinates(n));
        }
        Ok(self)
    }

    pub fn interpolate_vector(&mut self, f: impl Fn(&[f64], &mut [f64])) -> &mut Self {
        let space = self.space.clone();
        let k = space.components();
        for (n, chunk) in self.dat.data_mut().chunks_mut(k).enumerate() {
            f(space.node_coordinates(n), chunk);
        }
        self
    }

    pub fn assign(&mut self, other: &Function) -> Result<()> {
        if other.space != self.space {
            return Err(Error::SpaceMismatch);
        }
        self.dat.data_mut().copy_from_slice(other.values());
        Ok(())
    }
}
