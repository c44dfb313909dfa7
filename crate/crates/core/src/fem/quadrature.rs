//! Symmetric quadrature on the reference interval, triangle and tetrahedron.
//!
//! Reference cells: interval [0,1]; triangle (0,0),(1,0),(0,1);
//! tetrahedron (0,0,0),(1,0,0),(0,1,0),(0,0,1). Weights sum to the cell
//! measure (1, 1/2, 1/6).

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Interval,
    Triangle,
    Tetrahedron,
}

impl Cell {
    pub fn dim(self) -> usize {
        match self {
            Cell::Interval => 1,
            Cell::Triangle => 2,
            Cell::Tetrahedron => 3,
        }
    }

    pub fn num_vertices(self) -> usize {
        self.dim() + 1
    }

    pub fn measure(self) -> f64 {
        match self {
            Cell::Interval => 1.0,
            Cell::Triangle => 0.5,
            Cell::Tetrahedron => 1.0 / 6.0,
        }
    }

    /// The simplex of one dimension less.
    pub fn facet(self) -> Option<Cell> {
        match self {
            Cell::Interval => None,
            Cell::Triangle => Some(Cell::Interval),
            Cell::Tetrahedron => Some(Cell::Triangle),
        }
    }

    pub fn for_dim(dim: usize) -> Result<Cell> {
        match dim {
            1 => Ok(Cell::Interval),
            2 => Ok(Cell::Triangle),
            3 => Ok(Cell::Tetrahedron),
            _ => Err(Error::UnsupportedElement(format!("no simplex of dimension {dim}"))),
        }
    }

    pub fn vertices(self) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut vs = vec![vec![0.0; d]];
        for k in 0..d {
            let mut v = vec![0.0; d];
            v[k] = 1.0;
            vs.push(v);
        }
        vs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    cell: Cell,
    degree: usize,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

/// Expands barycentric orbits into Cartesian points.
struct Builder {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            points: vec![],
            weights: vec![],
        }
    }

    /// Adds the point with barycentric coordinates `b` (first entry belongs
    /// to vertex 0, which sits at the origin).
    fn bary(&mut self, w: f64, b: &[f64]) {
        self.points.push(b[1..].to_vec());
        self.weights.push(w);
    }

    fn tri_s3(&mut self, w: f64) {
        let t = 1.0 / 3.0;
        self.bary(w, &[t, t, t]);
    }

    fn tri_s21(&mut self, w: f64, a: f64) {
        let b = 1.0 - 2.0 * a;
        self.bary(w, &[b, a, a]);
        self.bary(w, &[a, b, a]);
        self.bary(w, &[a, a, b]);
    }

    fn tri_s111(&mut self, w: f64, a: f64, b: f64) {
        let c = 1.0 - a - b;
        for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
            self.bary(w, &p);
        }
    }

    fn tet_s4(&mut self, w: f64) {
        self.bary(w, &[0.25; 4]);
    }

    fn tet_s31(&mut self, w: f64, a: f64) {
        let b = 1.0 - 3.0 * a;
        for k in 0..4 {
            let mut p = [a; 4];
            p[k] = b;
            self.bary(w, &p);
        }
    }

    fn tet_s22(&mut self, w: f64, a: f64) {
        let b = 0.5 - a;
        for (i, j) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
            let mut p = [b; 4];
            p[i] = a;
            p[j] = a;
            self.bary(w, &p);
        }
    }
}

impl QuadratureRule {
    /// A rule exact for polynomials of total degree `degree` (degree 0 is
    /// treated as 1).
    ///
    /// Triangles support degree up to 6, tetrahedra up to 5, intervals up to 5.
    pub fn new(cell: Cell, degree: usize) -> Result<QuadratureRule> {
        let degree = degree.max(1);
        let mut b = Builder::new();
        let exact = match cell {
            Cell::Interval => {
                let (pts, wts): (Vec<f64>, Vec<f64>) = match degree {
                    1 => (vec![0.5], vec![1.0]),
                    2 | 3 => {
                        let h = 0.5 / 3f64.sqrt();
                        (vec![0.5 - h, 0.5 + h], vec![0.5, 0.5])
                    }
                    4 | 5 => {
                        let h = 0.5 * 0.6f64.sqrt();
                        (vec![0.5 - h, 0.5, 0.5 + h], vec![5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0])
                    }
                    _ => return Err(unsupported(cell, degree)),
                };
                return Ok(QuadratureRule {
                    cell,
                    degree: if degree == 1 { 1 } else if degree <= 3 { 3 } else { 5 },
                    points: pts.into_iter().map(|x| vec![x]).collect(),
                    weights: wts,
                });
            }
            Cell::Triangle => match degree {
                1 => {
                    b.tri_s3(0.5);
                    1
                }
                2 => {
                    b.tri_s21(1.0 / 6.0, 1.0 / 6.0);
                    2
                }
                3 | 4 => {
                    b.tri_s21(0.111_690_794_839_005_732_8, 0.445_948_490_915_964_886_3);
                    b.tri_s21(0.054_975_871_827_660_933_82, 0.091_576_213_509_770_743_46);
                    4
                }
                5 => {
                    b.tri_s3(0.1125);
                    b.tri_s21(0.066_197_076_394_253_090_37, 0.470_142_064_105_115_089_8);
                    b.tri_s21(0.062_969_590_272_413_576_30, 0.101_286_507_323_456_338_8);
                    5
                }
                6 => {
                    b.tri_s21(0.058_393_137_863_189_683_01, 0.249_286_745_170_910_421_3);
                    b.tri_s21(0.025_422_453_185_103_408_46, 0.063_089_014_491_502_228_34);
                    b.tri_s111(
                        0.041_425_537_809_186_787_60,
                        0.053_145_049_844_816_947_35,
                        0.310_352_451_033_784_405_4,
                    );
                    6
                }
                _ => return Err(unsupported(cell, degree)),
            },
            Cell::Tetrahedron => match degree {
                1 => {
                    b.tet_s4(1.0 / 6.0);
                    1
                }
                2 => {
                    b.tet_s31(1.0 / 24.0, 0.138_196_601_125_010_515_2);
                    2
                }
                3..=5 => {
                    b.tet_s31(0.012_248_840_519_393_658_26, 0.092_735_250_310_891_226_40);
                    b.tet_s31(0.018_781_320_953_002_641_80, 0.310_885_919_263_300_609_8);
                    b.tet_s22(0.007_091_003_462_846_911_073, 0.045_503_704_125_649_649_49);
                    5
                }
                _ => return Err(unsupported(cell, degree)),
            },
        };
        Ok(QuadratureRule {
            cell,
            degree: exact,
            points: b.points,
            weights: b.weights,
        })
    }

    pub fn cell(&self) -> Cell {
        self.cell
    }

    /// Highest total degree integrated exactly.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

fn unsupported(cell: Cell, degree: usize) -> Error {
    Error::UnsupportedElement(format!("no {cell:?} quadrature of degree {degree}"))
}
