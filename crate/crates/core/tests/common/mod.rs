//! Test-side oracles, independent of the library's numerics.
#![allow(dead_code)]

use std::sync::Arc;

use opfem::mesh::Mesh;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Solves `a x = b` by Gaussian elimination with partial pivoting and returns
/// `(x, det(a))`.
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> (Vec<f64>, f64) {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(r, &bi)| r.iter().copied().chain([bi]).collect()).collect();
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs())).unwrap();
        if p != k {
            m.swap(p, k);
            det = -det;
        }
        let piv = m[k][k];
        det *= piv;
        assert!(piv != 0.0, "singular matrix");
        for i in k + 1..n {
            let f = m[i][k] / piv;
            if f != 0.0 {
                for j in k..=n {
                    m[i][j] -= f * m[k][j];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[k][j] * x[j]).sum();
        x[k] = (m[k][n] - s) / m[k][k];
    }
    (x, det)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// A polynomial in the barycentric coordinates `l0..l3`.
#[derive(Debug, Clone, Default)]
pub struct Bary(pub Vec<([usize; 4], f64)>);

impl Bary {
    pub fn lambda(k: usize) -> Bary {
        let mut e = [0; 4];
        e[k] = 1;
        Bary(vec![(e, 1.0)])
    }

    pub fn scale(&self, s: f64) -> Bary {
        Bary(self.0.iter().map(|&(e, c)| (e, c * s)).collect())
    }

    pub fn add(&self, o: &Bary) -> Bary {
        Bary(self.0.iter().chain(&o.0).copied().collect())
    }

    pub fn mul(&self, o: &Bary) -> Bary {
        let mut out = Vec::new();
        for &(a, ca) in &self.0 {
            for &(b, cb) in &o.0 {
                let mut e = [0; 4];
                for k in 0..4 {
                    e[k] = a[k] + b[k];
                }
                out.push((e, ca * cb));
            }
        }
        Bary(out)
    }

    /// Partial derivative with respect to `l_k`.
    pub fn diff(&self, k: usize) -> Bary {
        Bary(
            self.0
                .iter()
                .filter(|(e, _)| e[k] > 0)
                .map(|&(mut e, c)| {
                    let p = e[k] as f64;
                    e[k] -= 1;
                    (e, c * p)
                })
                .collect(),
        )
    }

    /// Exact integral over a `d`-simplex of measure `vol`.
    pub fn integrate(&self, d: usize, vol: f64) -> f64 {
        self.0
            .iter()
            .map(|(e, c)| {
                let num: f64 = e.iter().map(|&a| factorial(a)).product();
                let deg: usize = e.iter().sum();
                c * factorial(d) * vol * num / factorial(deg + d)
            })
            .sum()
    }
}

/// Lagrange basis on a simplex in barycentric form, in the library's local
/// node order (vertices, then triangle edges opposite vertex 0, 1, 2).
pub fn lagrange_basis(dim: usize, degree: usize) -> Vec<Bary> {
    let nv = dim + 1;
    let l = Bary::lambda;
    match degree {
        1 => (0..nv).map(l).collect(),
        2 => {
            assert_eq!(dim, 2);
            let mut b: Vec<Bary> = (0..3).map(|i| l(i).mul(&l(i)).scale(2.0).add(&l(i).scale(-1.0))).collect();
            for (a, c) in [(1, 2), (0, 2), (0, 1)] {
                b.push(l(a).mul(&l(c)).scale(4.0));
            }
            b
        }
        _ => panic!("degree {degree}"),
    }
}

/// Affine geometry of a simplex given by its vertex rows.
pub struct Simplex {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    pub volume: f64,
    /// `grad_lambda[k]` in physical coordinates.
    pub grad_lambda: Vec<Vec<f64>>,
}

impl Simplex {
    pub fn new(vertices: Vec<Vec<f64>>) -> Simplex {
        let dim = vertices.len() - 1;
        let j: Vec<Vec<f64>> = (0..dim)
            .map(|r| (0..dim).map(|c| vertices[c + 1][r] - vertices[0][r]).collect())
            .collect();
        // row k of J^-1 is grad lambda_{k+1}; solve J^T g = e_k
        let jt: Vec<Vec<f64>> = (0..dim).map(|r| (0..dim).map(|c| j[c][r]).collect()).collect();
        let mut grads = vec![vec![0.0; dim]; dim + 1];
        let mut det = 0.0;
        for k in 0..dim {
            let mut e = vec![0.0; dim];
            e[k] = 1.0;
            let (g, d) = dense_solve(&jt, &e);
            det = d;
            for r in 0..dim {
                grads[0][r] -= g[r];
            }
            grads[k + 1] = g;
        }
        Simplex {
            dim,
            vertices,
            volume: det.abs() / factorial(dim),
            grad_lambda: grads,
        }
    }

    /// Row-major `C[nv][dim]`.
    pub fn coords(&self) -> Vec<f64> {
        self.vertices.concat()
    }

    /// Coordinate `d` as a barycentric polynomial.
    pub fn coordinate(&self, d: usize) -> Bary {
        let mut p = Bary::default();
        for (k, v) in self.vertices.iter().enumerate() {
            p = p.add(&Bary::lambda(k).scale(v[d]));
        }
        p
    }

    /// Measure of the facet opposite vertex `k`.
    pub fn facet_measure(&self, k: usize) -> f64 {
        let f: Vec<&Vec<f64>> = self.vertices.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, v)| v).collect();
        let e: Vec<Vec<f64>> = f[1..].iter().map(|v| v.iter().zip(f[0]).map(|(a, b)| a - b).collect()).collect();
        match self.dim {
            2 => e[0].iter().map(|x| x * x).sum::<f64>().sqrt(),
            3 => {
                let (a, b) = (&e[0], &e[1]);
                let c = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
                0.5 * c.iter().map(|x| x * x).sum::<f64>().sqrt()
            }
            _ => unreachable!(),
        }
    }

    pub fn integrate(&self, p: &Bary) -> f64 {
        p.integrate(self.dim, self.volume)
    }

    /// Exact integral over the facet opposite vertex `k`, where `l_k = 0`.
    pub fn integrate_facet(&self, p: &Bary, k: usize) -> f64 {
        let on_facet = Bary(p.0.iter().filter(|(e, _)| e[k] == 0).copied().collect());
        on_facet.integrate(self.dim - 1, self.facet_measure(k))
    }

    /// `int a b dx` for every pair.
    pub fn mass(&self, test: &[Bary], trial: &[Bary]) -> Vec<Vec<f64>> {
        test.iter().map(|a| trial.iter().map(|b| self.integrate(&a.mul(b))).collect()).collect()
    }

    /// `int grad a . grad b dx` via the chain rule through the barycentrics.
    pub fn stiffness(&self, basis: &[Bary]) -> Vec<Vec<f64>> {
        let nv = self.dim + 1;
        let g = &self.grad_lambda;
        let dot = |k: usize, l: usize| g[k].iter().zip(&g[l]).map(|(x, y)| x * y).sum::<f64>();
        basis
            .iter()
            .map(|a| {
                basis
                    .iter()
                    .map(|b| {
                        let mut s = 0.0;
                        for k in 0..nv {
                            for l in 0..nv {
                                s += dot(k, l) * self.integrate(&a.diff(k).mul(&b.diff(l)));
                            }
                        }
                        s
                    })
                    .collect()
            })
            .collect()
    }
}

/// A simplex with vertices uniform in `[-1, 1]^dim`, rejected until its
/// volume is not tiny.
pub fn random_simplex(dim: usize, rng: &mut ChaCha8Rng) -> Simplex {
    loop {
        let v: Vec<Vec<f64>> = (0..=dim).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let s = Simplex::new(v);
        if s.volume > 0.05 {
            return s;
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `unit_square_mesh(n)` with its vertices renumbered by a seeded random
/// permutation. Markers follow the unit square convention.
pub fn scrambled_square(mesh: &Mesh, seed: u64) -> Mesh {
    let nv = mesh.vertices().size();
    let mut perm: Vec<usize> = (0..nv).collect();
    perm.shuffle(&mut rng(seed));
    // perm[new] = old
    let mut new_of = vec![0; nv];
    for (k, &old) in perm.iter().enumerate() {
        new_of[old] = k;
    }
    let coords: Vec<f64> = perm.iter().flat_map(|&old| mesh.vertex(old).to_vec()).collect();
    let cells: Vec<usize> = mesh.cell_vertex_map().values().iter().map(|&v| new_of[v]).collect();
    let xy = coords.clone();
    let (w, _h) = (
        (0..nv).map(|v| xy[2 * v]).fold(0.0, f64::max),
        (0..nv).map(|v| xy[2 * v + 1]).fold(0.0, f64::max),
    );
    Mesh::from_cells(2, coords, cells, move |f| {
        let all = |p: &dyn Fn(f64, f64) -> bool| f.iter().all(|&v| p(xy[2 * v], xy[2 * v + 1]));
        if all(&|x, _| x == 0.0) {
            1
        } else if all(&|x, _| x == w) {
            2
        } else if all(&|_, y| y == 0.0) {
            3
        } else {
            4
        }
    })
    .unwrap()
}

pub fn arc(m: Mesh) -> Arc<Mesh> {
    Arc::new(m)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn bits(a: &[f64]) -> Vec<u64> {
    a.iter().map(|x| x.to_bits()).collect()
}
