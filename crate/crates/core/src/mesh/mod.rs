//! Simplicial meshes: entity sets, cell and facet maps, boundary markers and
//! coordinates stored as an ordinary vector-valued [`Dat`].

mod generate;
mod io;

use std::collections::BTreeMap;

use crate::data::Dat;
use crate::error::{Error, Result};
use crate::topology::{bandwidth, rcm_order, Map, Set};

pub use generate::{rectangle_mesh, unit_cube_mesh, unit_square_mesh};
pub use io::{parse_mesh, read_mesh, write_mesh};

#[derive(Debug, Clone)]
pub struct Mesh {
    dim: usize,
    cells: Set,
    vertices: Set,
    exterior_facets: Set,
    cell_vertex: Map,
    facet_vertex: Map,
    facet_cell: Map,
    facet_local: Vec<usize>,
    markers: Vec<u32>,
    coordinates: Dat,
}

impl Mesh {
    /// Builds a mesh from flat coordinate and connectivity tables.
    ///
    /// Exterior facets are the facets incident to exactly one cell, ordered by
    /// their ascending vertex tuple. `marker` labels each of them; it receives
    /// the sorted facet vertices.
    pub fn from_cells(
        dim: usize,
        coords: Vec<f64>,
        cell_vertices: Vec<usize>,
        mut marker: impl FnMut(&[usize]) -> u32,
    ) -> Result<Mesh> {
        if !(2..=3).contains(&dim) {
            return Err(Error::UnsupportedElement(format!("{dim}-dimensional mesh")));
        }
        let nv = coords.len() / dim;
        if coords.len() != nv * dim {
            return Err(Error::DimensionMismatch {
                expected: nv * dim,
                got: coords.len(),
            });
        }
        let arity = dim + 1;
        let vertices = Set::new("vertices", nv);
        let cells = Set::new("cells", cell_vertices.len() / arity);
        let cell_vertex = Map::new("cell_vertex", &cells, &vertices, arity, cell_vertices)?;

        // facet (sorted vertices) -> incident (cell, local facet) pairs
        let mut incidence: BTreeMap<Vec<usize>, Vec<(usize, usize)>> = BTreeMap::new();
        for c in 0..cells.size() {
            let row = cell_vertex.row(c);
            for k in 0..arity {
                let mut f: Vec<usize> = (0..arity).filter(|&j| j != k).map(|j| row[j]).collect();
                f.sort_unstable();
                incidence.entry(f).or_default().push((c, k));
            }
        }
        let mut fv = Vec::new();
        let mut fc = Vec::new();
        let mut facet_local = Vec::new();
        let mut markers = Vec::new();
        for (f, inc) in &incidence {
            match inc.len() {
                1 => {
                    fv.extend_from_slice(f);
                    fc.push(inc[0].0);
                    facet_local.push(inc[0].1);
                    markers.push(marker(f));
                }
                2 => {}
                _ => return Err(Error::NonManifold(f.clone())),
            }
        }
        let exterior_facets = Set::new("exterior_facets", markers.len());
        let facet_vertex = Map::new("facet_vertex", &exterior_facets, &vertices, dim, fv)?;
        let facet_cell = Map::new("facet_cell", &exterior_facets, &cells, 1, fc)?;
        let coordinates = Dat::from_vec("coordinates", &vertices, dim, coords)?;
        Ok(Mesh {
            dim,
            cells,
            vertices,
            exterior_facets,
            cell_vertex,
            facet_vertex,
            facet_cell,
            facet_local,
            markers,
            coordinates,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> &Set {
        &self.cells
    }

    pub fn vertices(&self) -> &Set {
        &self.vertices
    }

    pub fn exterior_facets(&self) -> &Set {
        &self.exterior_facets
    }

    pub fn cell_vertex_map(&self) -> &Map {
        &self.cell_vertex
    }

    pub fn facet_vertex_map(&self) -> &Map {
        &self.facet_vertex
    }

    /// Arity-1 map from each exterior facet to its cell.
    pub fn facet_cell_map(&self) -> &Map {
        &self.facet_cell
    }

    /// Local index of facet `f` within its cell (the facet opposite that
    /// local vertex).
    pub fn facet_local_index(&self, f: usize) -> usize {
        self.facet_local[f]
    }

    pub fn facet_marker(&self, f: usize) -> u32 {
        self.markers[f]
    }

    pub fn facet_markers(&self) -> &[u32] {
        &self.markers
    }

    /// Exterior facets carrying any of `markers`, ascending.
    pub fn facets_with_markers(&self, markers: &[u32]) -> Vec<usize> {
        (0..self.markers.len())
            .filter(|&f| markers.contains(&self.markers[f]))
            .collect()
    }

    pub fn coordinates(&self) -> &Dat {
        &self.coordinates
    }

    pub fn coordinates_mut(&mut self) -> &mut Dat {
        &mut self.coordinates
    }

    pub fn vertex(&self, v: usize) -> &[f64] {
        self.coordinates.entity(v)
    }

    /// Signed area (2D) or volume (3D) of cell `c`.
    pub fn cell_measure(&self, c: usize) -> f64 {
        let row = self.cell_vertex.row(c);
        let x0 = self.vertex(row[0]);
        let d = |k: usize, i: usize| self.vertex(row[k])[i] - x0[i];
        if self.dim == 2 {
            0.5 * (d(1, 0) * d(2, 1) - d(2, 0) * d(1, 1))
        } else {
            let det = d(1, 0) * (d(2, 1) * d(3, 2) - d(3, 1) * d(2, 2))
                - d(2, 0) * (d(1, 1) * d(3, 2) - d(3, 1) * d(1, 2))
                + d(3, 0) * (d(1, 1) * d(2, 2) - d(2, 1) * d(1, 2));
            det / 6.0
        }
    }

    /// Vertex adjacency induced by shared cells, without self loops.
    pub fn vertex_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.size()];
        for c in 0..self.cells.size() {
            let row = self.cell_vertex.row(c);
            for &a in row {
                for &b in row {
                    if a != b {
                        adj[a].push(b);
                    }
                }
            }
        }
        for r in &mut adj {
            r.sort_unstable();
            r.dedup();
        }
        adj
    }

    /// Bandwidth of the vertex graph in the current numbering.
    pub fn vertex_bandwidth(&self) -> usize {
        let order: Vec<usize> = (0..self.vertices.size()).collect();
        bandwidth(&self.vertex_adjacency(), &order)
    }

    /// Renumbers the vertices by reverse Cuthill-McKee and returns the new mesh
    /// together with `order`, where `order[new] = old`.
    pub fn reorder(&self) -> Result<(Mesh, Vec<usize>)> {
        let nv = self.vertices.size();
        let order = rcm_order(nv, &self.vertex_adjacency())?;
        let mut new_of = vec![0; nv];
        for (k, &old) in order.iter().enumerate() {
            new_of[old] = k;
        }
        let dim = self.dim;
        let mut coords = Vec::with_capacity(nv * dim);
        for &old in &order {
            coords.extend_from_slice(self.vertex(old));
        }
        let cells: Vec<usize> = self.cell_vertex.values().iter().map(|&v| new_of[v]).collect();
        let mut by_facet = BTreeMap::new();
        for f in 0..self.exterior_facets.size() {
            let mut key: Vec<usize> = self.facet_vertex.row(f).iter().map(|&v| new_of[v]).collect();
            key.sort_unstable();
            by_facet.insert(key, self.markers[f]);
        }
        let mesh = Mesh::from_cells(dim, coords, cells, |f| by_facet[f])?;
        Ok((mesh, order))
    }
}

/// Convenience wrapper for [`Mesh::reorder`].
pub fn reorder(mesh: &Mesh) -> Result<(Mesh, Vec<usize>)> {
    mesh.reorder()
}
