use crate::error::{Error, Result};
use crate::topology::Set;

/// A vector of `dim` values per entity of a [`Set`].
///
/// Mutable access goes through [`Dat::data_mut`], which bumps a version
/// counter so callers can tell whether a Dat has been touched.
#[derive(Debug, Clone)]
pub struct Dat {
    name: String,
    set: Set,
    dim: usize,
    data: Vec<f64>,
    version: u64,
}

impl Dat {
    pub fn zeros(name: impl Into<String>, set: &Set, dim: usize) -> Self {
        assert!(dim > 0, "Dat dim must be positive");
        Dat {
            name: name.into(),
            set: set.clone(),
            dim,
            data: vec![0.0; set.size() * dim],
            version: 0,
        }
    }

    pub fn from_vec(name: impl Into<String>, set: &Set, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.len() != set.size() * dim {
            return Err(Error::DimensionMismatch {
                expected: set.size() * dim,
                got: data.len(),
            });
        }
        Ok(Dat {
            name: name.into(),
            set: set.clone(),
            dim,
            data,
            version: 0,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set(&self) -> &Set {
        &self.set
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        self.version += 1;
        &mut self.data
    }

    /// Values attached to entity `e`.
    pub fn entity(&self, e: usize) -> &[f64] {
        &self.data[e * self.dim..(e + 1) * self.dim]
    }

    pub fn fill(&mut self, value: f64) {
        self.data_mut().fill(value);
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }
}
