use super::quadrature::{Cell, QuadratureRule};
use crate::error::{Error, Result};

/// Continuous Lagrange element of degree 1 or 2.
///
/// Node order: the cell vertices, then (degree 2, triangles only) the edge
/// midpoints, edge `k` being the one opposite vertex `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Element {
    cell: Cell,
    degree: usize,
}

/// Vertices of the edge opposite vertex `k` of a triangle.
pub(crate) const TRI_EDGES: [(usize, usize); 3] = [(1, 2), (0, 2), (0, 1)];

impl Element {
    pub fn lagrange(cell: Cell, degree: usize) -> Result<Element> {
        match (cell, degree) {
            (Cell::Triangle, 1 | 2) | (Cell::Tetrahedron, 1) | (Cell::Interval, 1) => {
                Ok(Element { cell, degree })
            }
            _ => Err(Error::UnsupportedElement(format!("P{degree} on {cell:?}"))),
        }
    }

    pub fn cell(&self) -> Cell {
        self.cell
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_nodes(&self) -> usize {
        match self.degree {
            1 => self.cell.num_vertices(),
            _ => 6,
        }
    }

    /// Reference coordinates of the nodes.
    pub fn nodes(&self) -> Vec<Vec<f64>> {
        let mut v = self.cell.vertices();
        if self.degree == 2 {
            for (a, b) in TRI_EDGES {
                let m = v[a].iter().zip(&v[b]).map(|(x, y)| 0.5 * (x + y)).collect();
                v.push(m);
            }
        }
        v
    }

    /// Local nodes lying on the facet opposite vertex `k`.
    pub fn facet_nodes(&self, k: usize) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.cell.num_vertices()).filter(|&j| j != k).collect();
        if self.degree == 2 {
            out.push(3 + k);
        }
        out
    }

    fn barycentric(x: &[f64]) -> Vec<f64> {
        let mut l = Vec::with_capacity(x.len() + 1);
        l.push(1.0 - x.iter().sum::<f64>());
        l.extend_from_slice(x);
        l
    }

    /// Gradient of barycentric coordinate `k` on the reference cell.
    fn bary_grad(&self, k: usize) -> Vec<f64> {
        let d = self.cell.dim();
        if k == 0 {
            vec![-1.0; d]
        } else {
            let mut g = vec![0.0; d];
            g[k - 1] = 1.0;
            g
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let l = Self::barycentric(x);
        match self.degree {
            1 => l,
            _ => {
                let mut v: Vec<f64> = l.iter().map(|&lk| lk * (2.0 * lk - 1.0)).collect();
                for (a, b) in TRI_EDGES {
                    v.push(4.0 * l[a] * l[b]);
                }
                v
            }
        }
    }

    /// Reference gradients, one row per basis function.
    pub fn grad(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let nv = self.cell.num_vertices();
        let dl: Vec<Vec<f64>> = (0..nv).map(|k| self.bary_grad(k)).collect();
        match self.degree {
            1 => dl,
            _ => {
                let l = Self::barycentric(x);
                let mut g: Vec<Vec<f64>> = (0..nv)
                    .map(|k| dl[k].iter().map(|&d| (4.0 * l[k] - 1.0) * d).collect())
                    .collect();
                for (a, b) in TRI_EDGES {
                    g.push(dl[a].iter().zip(&dl[b]).map(|(&da, &db)| 4.0 * (da * l[b] + l[a] * db)).collect());
                }
                g
            }
        }
    }
}

/// Basis values and reference gradients at quadrature points.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulation {
    /// `values[q][i]`
    pub values: Vec<Vec<f64>>,
    /// `grads[q][i][d]`
    pub grads: Vec<Vec<Vec<f64>>>,
}

pub fn tabulate(element: &Element, rule: &QuadratureRule) -> Result<Tabulation> {
    if element.cell() != rule.cell() {
        return Err(Error::CellMismatch);
    }
    Ok(tabulate_at(element, rule.points()))
}

pub(crate) fn tabulate_at(element: &Element, points: &[Vec<f64>]) -> Tabulation {
    Tabulation {
        values: points.iter().map(|p| element.eval(p)).collect(),
        grads: points.iter().map(|p| element.grad(p)).collect(),
    }
}
