use super::{Map, Set};
use crate::error::{Error, Result};

/// A partition of an iteration set such that entities of equal colour never
/// share a target index under any of the conflict maps it was built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    colors: Vec<u32>,
    num_colors: usize,
}

impl Coloring {
    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    pub fn num_colors(&self) -> usize {
        self.num_colors
    }

    /// Entities grouped colour-major, ascending within each colour, together
    /// with the offsets delimiting each colour in that list.
    pub fn color_major_order(&self) -> (Vec<usize>, Vec<usize>) {
        let mut offsets = vec![0usize; self.num_colors + 1];
        for &c in &self.colors {
            offsets[c as usize + 1] += 1;
        }
        for c in 0..self.num_colors {
            offsets[c + 1] += offsets[c];
        }
        let mut cursor = offsets.clone();
        let mut order = vec![0usize; self.colors.len()];
        for (e, &c) in self.colors.iter().enumerate() {
            order[cursor[c as usize]] = e;
            cursor[c as usize] += 1;
        }
        (order, offsets)
    }
}

/// Greedy first-fit colouring of `iter`.
///
/// Entities are visited in ascending index order and each receives the
/// smallest colour not already held by an earlier entity that shares a target
/// index with it under any of `conflict_maps`. With no conflict maps every
/// entity gets colour 0.
pub fn color_iteration(iter: &Set, conflict_maps: &[Map]) -> Result<Coloring> {
    for m in conflict_maps {
        if m.source() != iter {
            return Err(Error::SourceMismatch {
                map: m.name().to_string(),
                expected: iter.name().to_string(),
                found: m.source().name().to_string(),
            });
        }
    }
    let n = iter.size();
    if conflict_maps.is_empty() {
        return Ok(Coloring {
            colors: vec![0; n],
            num_colors: usize::from(n > 0),
        });
    }

    let inverses: Vec<Vec<Vec<usize>>> = conflict_maps.iter().map(Map::inverse).collect();
    let mut colors = vec![u32::MAX; n];
    // stamp[c] == e + 1 marks colour c as forbidden for entity e
    let mut stamp: Vec<usize> = Vec::new();
    let mut num_colors = 0usize;

    for e in 0..n {
        for (m, inv) in conflict_maps.iter().zip(&inverses) {
            for &t in m.row(e) {
                for &other in &inv[t] {
                    if other >= e {
                        break;
                    }
                    stamp[colors[other] as usize] = e + 1;
                }
            }
        }
        let c = stamp
            .iter()
            .position(|&s| s != e + 1)
            .unwrap_or(stamp.len());
        if c == stamp.len() {
            stamp.push(0);
        }
        colors[e] = c as u32;
        num_colors = num_colors.max(c + 1);
    }

    Ok(Coloring { colors, num_colors })
}
