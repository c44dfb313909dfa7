//! Plain-text mesh format.
//!
//! ```text
//! # comment
//! dim nv nc
//! x y [z]            (nv lines)
//! v0 v1 v2 [v3]      (nc lines, zero-based)
//! facets nf          (optional)
//! marker v0 v1 [v2]  (nf lines)
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::Mesh;
use crate::error::{Error, Result};

struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, Vec<&'a str>)> + 'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, Vec<&'a str>)>> = Box::new(
            text.lines()
                .enumerate()
                .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").split_whitespace().collect::<Vec<_>>()))
                .filter(|(_, t)| !t.is_empty()),
        );
        Lines {
            inner: it.peekable(),
            last: 0,
        }
    }

    fn next(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        match self.inner.next() {
            Some((n, t)) => {
                self.last = n;
                Ok((n, t))
            }
            None => Err(Error::ParseError {
                line: self.last + 1,
                message: format!("unexpected end of file, expected {what}"),
            }),
        }
    }
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::ParseError {
        line,
        message: message.into(),
    }
}

fn parse_all<T: FromStr>(line: usize, toks: &[&str], count: usize, what: &str) -> Result<Vec<T>> {
    if toks.len() != count {
        return Err(err(line, format!("expected {count} {what}, found {}", toks.len())));
    }
    toks.iter()
        .map(|t| t.parse().map_err(|_| err(line, format!("cannot parse `{t}` as {what}"))))
        .collect()
}

pub fn parse_mesh(text: &str) -> Result<Mesh> {
    let mut lines = Lines::new(text);
    let (ln, head) = lines.next("header `dim nv nc`")?;
    let h: Vec<usize> = parse_all(ln, &head, 3, "integers")?;
    let (dim, nv, nc) = (h[0], h[1], h[2]);
    if !(2..=3).contains(&dim) {
        return Err(err(ln, format!("dimension must be 2 or 3, got {dim}")));
    }
    let mut coords = Vec::with_capacity(nv * dim);
    for _ in 0..nv {
        let (ln, t) = lines.next("vertex coordinates")?;
        coords.extend(parse_all::<f64>(ln, &t, dim, "coordinates")?);
    }
    let mut cells = Vec::with_capacity(nc * (dim + 1));
    for _ in 0..nc {
        let (ln, t) = lines.next("cell vertices")?;
        let vs: Vec<usize> = parse_all(ln, &t, dim + 1, "vertex indices")?;
        if let Some(&bad) = vs.iter().find(|&&v| v >= nv) {
            return Err(err(ln, format!("vertex index {bad} out of range for {nv} vertices")));
        }
        cells.extend(vs);
    }
    let mut listed: BTreeMap<Vec<usize>, (u32, usize)> = BTreeMap::new();
    if lines.inner.peek().is_some() {
        let (ln, t) = lines.next("facet block")?;
        if t.len() != 2 || t[0] != "facets" {
            return Err(err(ln, "expected `facets nf` or end of file"));
        }
        let nf: usize = t[1].parse().map_err(|_| err(ln, "cannot parse facet count"))?;
        for _ in 0..nf {
            let (ln, t) = lines.next("facet record")?;
            if t.len() != dim + 1 {
                return Err(err(ln, format!("expected marker and {dim} vertex indices")));
            }
            let marker: u32 = t[0].parse().map_err(|_| err(ln, "cannot parse facet marker"))?;
            let mut vs: Vec<usize> = parse_all(ln, &t[1..], dim, "vertex indices")?;
            if let Some(&bad) = vs.iter().find(|&&v| v >= nv) {
                return Err(err(ln, format!("vertex index {bad} out of range for {nv} vertices")));
            }
            vs.sort_unstable();
            listed.insert(vs, (marker, ln));
        }
        if let Some((ln, _)) = lines.inner.next() {
            return Err(err(ln, "trailing content after facet block"));
        }
    }
    let mut used = BTreeSet::new();
    let mesh = Mesh::from_cells(dim, coords, cells, |f| match listed.get(f) {
        Some(&(m, _)) => {
            used.insert(f.to_vec());
            m
        }
        None => 0,
    })?;
    if let Some((_, &(_, ln))) = listed.iter().find(|(k, _)| !used.contains(*k)) {
        return Err(err(ln, "listed facet is not an exterior facet of the mesh"));
    }
    Ok(mesh)
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    parse_mesh(&std::fs::read_to_string(path)?)
}

impl Mesh {
    /// Serialises to the text format; coordinates round-trip exactly.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let (nv, nc) = (self.vertices.size(), self.cells.size());
        let _ = writeln!(s, "{} {} {}", self.dim, nv, nc);
        for v in 0..nv {
            let xs: Vec<String> = self.vertex(v).iter().map(|x| format!("{x:?}")).collect();
            let _ = writeln!(s, "{}", xs.join(" "));
        }
        for c in 0..nc {
            let vs: Vec<String> = self.cell_vertex.row(c).iter().map(usize::to_string).collect();
            let _ = writeln!(s, "{}", vs.join(" "));
        }
        let nf = self.exterior_facets.size();
        let _ = writeln!(s, "facets {nf}");
        for f in 0..nf {
            let vs: Vec<String> = self.facet_vertex.row(f).iter().map(usize::to_string).collect();
            let _ = writeln!(s, "{} {}", self.markers[f], vs.join(" "));
        }
        s
    }
}

pub fn write_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, mesh.to_text())?;
    Ok(())
}
