use crate::data::Access;
use crate::error::{Error, Result};

/// A small tuple of values not attached to any set; the target of reductions.
#[derive(Debug, Clone, PartialEq)]
pub struct Global {
    name: String,
    value: Vec<f64>,
}

impl Global {
    pub fn new(name: impl Into<String>, value: Vec<f64>) -> Self {
        assert!(!value.is_empty(), "Global dim must be positive");
        Global {
            name: name.into(),
            value,
        }
    }

    pub fn scalar(name: impl Into<String>, value: f64) -> Self {
        Global::new(name, vec![value])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.value.len()
    }

    pub fn value(&self) -> &[f64] {
        &self.value
    }

    pub fn value_mut(&mut self) -> &mut [f64] {
        &mut self.value
    }

    pub fn get(&self) -> f64 {
        self.value[0]
    }
}

/// Left fold of `partials` under a reduction mode, in the order given.
pub fn global_reduce(mode: Access, partials: &[f64]) -> Result<f64> {
    if !mode.is_reduction() {
        return Err(Error::IllegalAccess(format!("{mode} is not a reduction")));
    }
    let (&first, rest) = partials.split_first().ok_or(Error::EmptyPartials)?;
    Ok(rest.iter().fold(first, |acc, &x| mode.combine(acc, x)))
}
