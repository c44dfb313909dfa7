use super::Mesh;
use crate::error::{Error, Result};

/// Structured triangulation of `[0,w]x[0,h]` with `nx x ny` squares, each
/// split along its SW-NE diagonal.
///
/// Vertex `(i, j)` has index `j*(nx+1) + i`. Boundary markers: 1 on x=0,
/// 2 on x=w, 3 on y=0, 4 on y=h.
pub fn rectangle_mesh(nx: usize, ny: usize, w: f64, h: f64) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidSubdivision(nx.min(ny)));
    }
    let stride = nx + 1;
    let mut coords = Vec::with_capacity(stride * (ny + 1) * 2);
    for j in 0..=ny {
        for i in 0..=nx {
            coords.push(w * i as f64 / nx as f64);
            coords.push(h * j as f64 / ny as f64);
        }
    }
    let mut cells = Vec::with_capacity(6 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let sw = j * stride + i;
            let (se, nw) = (sw + 1, sw + stride);
            let ne = nw + 1;
            cells.extend_from_slice(&[sw, se, ne, sw, ne, nw]);
        }
    }
    Mesh::from_cells(2, coords, cells, |f| {
        let on = |p: &dyn Fn(usize, usize) -> bool| f.iter().all(|&v| p(v % stride, v / stride));
        if on(&|i, _| i == 0) {
            1
        } else if on(&|i, _| i == nx) {
            2
        } else if on(&|_, j| j == 0) {
            3
        } else if on(&|_, j| j == ny) {
            4
        } else {
            0
        }
    })
}

pub fn unit_square_mesh(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidSubdivision(n));
    }
    rectangle_mesh(n, n, 1.0, 1.0)
}

/// Unit cube split into `n^3` small cubes of six tetrahedra each.
///
/// Every small cube uses the Kuhn triangulation: one tetrahedron per
/// ordering of the three axes, all sharing the main diagonal. Markers 1..6
/// label the faces x=0, x=1, y=0, y=1, z=0, z=1.
pub fn unit_cube_mesh(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidSubdivision(n));
    }
    let s = n + 1;
    let idx = |i: usize, j: usize, k: usize| (k * s + j) * s + i;
    let mut coords = Vec::with_capacity(s * s * s * 3);
    for k in 0..s {
        for j in 0..s {
            for i in 0..s {
                coords.extend([i as f64 / n as f64, j as f64 / n as f64, k as f64 / n as f64]);
            }
        }
    }
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut cells = Vec::with_capacity(24 * n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for (p, perm) in PERMS.iter().enumerate() {
                    let mut at = [i, j, k];
                    let mut tet = [idx(i, j, k), 0, 0, 0];
                    for (step, &axis) in perm.iter().enumerate() {
                        at[axis] += 1;
                        tet[step + 1] = idx(at[0], at[1], at[2]);
                    }
                    // odd permutations come out negatively oriented
                    if matches!(p, 1 | 2 | 5) {
                        tet.swap(2, 3);
                    }
                    cells.extend_from_slice(&tet);
                }
            }
        }
    }
    Mesh::from_cells(3, coords, cells, |f| {
        let ijk = |v: usize| [v % s, (v / s) % s, v / (s * s)];
        for axis in 0..3 {
            if f.iter().all(|&v| ijk(v)[axis] == 0) {
                return 2 * axis as u32 + 1;
            }
            if f.iter().all(|&v| ijk(v)[axis] == n) {
                return 2 * axis as u32 + 2;
            }
        }
        0
    })
}
