//! Mesh-graph topology: entity sets, constant-arity maps between them,
//! conflict colouring for parallel execution and bandwidth-reducing
//! reordering.
//!
//! A [`Set`] is only a count. A [`Map`] associates every entity of its source
//! set with a fixed-length tuple of entities of its target set. Both are
//! cheap, reference-counted handles and are immutable once built, so they can
//! be shared freely between threads.

mod coloring;
mod rcm;

pub use coloring::{color_iteration, Coloring};
pub use rcm::{bandwidth, rcm_order};

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

pub(crate) fn fresh_id() -> u64 {
    NEXT_ID.fetch_add(1, Ordering::Relaxed)
}

#[derive(Debug)]
struct SetInner {
    id: u64,
    name: String,
    size: usize,
}

/// An abstract collection of entities. Holds no data, only a count.
#[derive(Clone)]
pub struct Set(Arc<SetInner>);

impl Set {
    pub fn new(name: impl Into<String>, size: usize) -> Self {
        Set(Arc::new(SetInner {
            id: fresh_id(),
            name: name.into(),
            size,
        }))
    }

    pub fn size(&self) -> usize {
        self.0.size
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    /// Identity of this set. Two handles compare equal iff they share an id.
    pub fn id(&self) -> u64 {
        self.0.id
    }
}

impl PartialEq for Set {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for Set {}

impl fmt::Debug for Set {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Set({:?}, size={})", self.0.name, self.0.size)
    }
}

struct MapInner {
    id: u64,
    name: String,
    source: Set,
    target: Set,
    arity: usize,
    values: Vec<usize>,
}

/// A constant-arity indirection from `source` entities to `target` entities,
/// stored as a flat row-major table.
#[derive(Clone)]
pub struct Map(Arc<MapInner>);

impl Map {
    pub fn new(
        name: impl Into<String>,
        source: &Set,
        target: &Set,
        arity: usize,
        values: Vec<usize>,
    ) -> Result<Self> {
        let expected = source.size() * arity;
        if arity == 0 || values.len() != expected {
            return Err(Error::ArityMismatch {
                expected,
                got: values.len(),
            });
        }
        if let Some((position, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, &v)| v >= target.size())
        {
            return Err(Error::IndexOutOfRange {
                position,
                value,
                target_size: target.size(),
            });
        }
        Ok(Map(Arc::new(MapInner {
            id: fresh_id(),
            name: name.into(),
            source: source.clone(),
            target: target.clone(),
            arity,
            values,
        })))
    }

    /// The identity map on `set`.
    pub fn identity(name: impl Into<String>, set: &Set) -> Self {
        Map::new(name, set, set, 1, (0..set.size()).collect()).expect("identity map is valid")
    }

    pub fn source(&self) -> &Set {
        &self.0.source
    }

    pub fn target(&self) -> &Set {
        &self.0.target
    }

    pub fn arity(&self) -> usize {
        self.0.arity
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn id(&self) -> u64 {
        self.0.id
    }

    pub fn values(&self) -> &[usize] {
        &self.0.values
    }

    /// Image of source entity `e`.
    #[inline]
    pub fn row(&self, e: usize) -> &[usize] {
        let a = self.0.arity;
        &self.0.values[e * a..(e + 1) * a]
    }

    /// For every target entity, the source entities whose image contains it,
    /// in ascending order.
    pub fn inverse(&self) -> Vec<Vec<usize>> {
        let mut inv = vec![Vec::new(); self.target().size()];
        for e in 0..self.source().size() {
            for &t in self.row(e) {
                if inv[t].last() != Some(&e) {
                    inv[t].push(e);
                }
            }
        }
        inv
    }

    /// True if no target entity is reached from two different source entities.
    pub fn is_injective(&self) -> bool {
        let mut owner = vec![usize::MAX; self.target().size()];
        for e in 0..self.source().size() {
            for &t in self.row(e) {
                if owner[t] != usize::MAX && owner[t] != e {
                    return false;
                }
                owner[t] = e;
            }
        }
        true
    }
}

impl PartialEq for Map {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for Map {}

impl fmt::Debug for Map {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Map({:?}: {} -> {}, arity {})",
            self.0.name,
            self.0.source.name(),
            self.0.target.name(),
            self.0.arity
        )
    }
}

/// Convenience wrapper matching the free-function form used in the docs.
pub fn make_map(source: &Set, target: &Set, arity: usize, values: Vec<usize>) -> Result<Map> {
    Map::new("map", source, target, arity, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_triangles_sharing_an_edge() {
        let cells = Set::new("cells", 2);
        let verts = Set::new("vertices", 4);
        let m = make_map(&cells, &verts, 3, vec![0, 1, 2, 1, 3, 2]).unwrap();
        assert_eq!(m.row(0), &[0, 1, 2]);
        assert_eq!(m.row(1), &[1, 3, 2]);
        assert_eq!(m.inverse()[1], vec![0, 1]);
        assert!(!m.is_injective());
    }

    #[test]
    fn out_of_range_value_is_rejected() {
        let cells = Set::new("cells", 2);
        let verts = Set::new("vertices", 4);
        let err = make_map(&cells, &verts, 3, vec![0, 1, 2, 1, 4, 2]).unwrap_err();
        assert_eq!(
            err,
            Error::IndexOutOfRange {
                position: 4,
                value: 4,
                target_size: 4
            }
        );
    }

    #[test]
    fn wrong_length_is_rejected() {
        let cells = Set::new("cells", 2);
        let verts = Set::new("vertices", 4);
        let err = make_map(&cells, &verts, 3, vec![0, 1, 2]).unwrap_err();
        assert_eq!(err, Error::ArityMismatch { expected: 6, got: 3 });
    }

    #[test]
    fn identity_map() {
        let s = Set::new("nodes", 5);
        let m = make_map(&s, &s, 1, vec![0, 1, 2, 3, 4]).unwrap();
        assert_eq!(m.values(), &[0, 1, 2, 3, 4]);
        assert!(m.is_injective());
        assert_eq!(Map::identity("id", &s).values(), m.values());
    }

    #[test]
    fn set_identity_is_by_handle() {
        let a = Set::new("a", 3);
        let b = Set::new("a", 3);
        assert_eq!(a, a.clone());
        assert_ne!(a, b);
    }
}
