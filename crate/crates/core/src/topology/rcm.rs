use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Reverse Cuthill-McKee ordering of an undirected graph.
///
/// Returns `order` with `order[k]` = old index of the vertex placed at new
/// position `k`. Each connected component is traversed breadth-first from its
/// minimum-degree vertex (ties to the lowest index), neighbours queued in
/// ascending (degree, index) order; the concatenated traversal is reversed.
pub fn rcm_order(n: usize, adjacency: &[Vec<usize>]) -> Result<Vec<usize>> {
    if adjacency.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: adjacency.len(),
        });
    }
    let mut nbrs: Vec<Vec<usize>> = adjacency
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<usize> = row.iter().copied().filter(|&j| j != i).collect();
            r.sort_unstable();
            r.dedup();
            r
        })
        .collect();
    for (i, row) in nbrs.iter().enumerate() {
        for &j in row {
            if j >= n {
                return Err(Error::IndexOutOfRange {
                    position: i,
                    value: j,
                    target_size: n,
                });
            }
            if nbrs[j].binary_search(&i).is_err() {
                return Err(Error::AsymmetricAdjacency { from: i, to: j });
            }
        }
    }
    let degree: Vec<usize> = nbrs.iter().map(Vec::len).collect();
    for row in &mut nbrs {
        row.sort_by_key(|&j| (degree[j], j));
    }

    let mut seeds: Vec<usize> = (0..n).collect();
    seeds.sort_by_key(|&v| (degree[v], v));

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    for &seed in &seeds {
        if visited[seed] {
            continue;
        }
        visited[seed] = true;
        queue.push_back(seed);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in &nbrs[v] {
                if !visited[w] {
                    visited[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    order.reverse();
    Ok(order)
}

/// Bandwidth max |pos(i) - pos(j)| over edges, where `order` lists old indices
/// in their new positions (the convention of [`rcm_order`]).
pub fn bandwidth(adjacency: &[Vec<usize>], order: &[usize]) -> usize {
    let mut pos = vec![0usize; order.len()];
    for (k, &v) in order.iter().enumerate() {
        pos[v] = k;
    }
    let mut bw = 0;
    for (i, row) in adjacency.iter().enumerate() {
        for &j in row {
            bw = bw.max(pos[i].abs_diff(pos[j]));
        }
    }
    bw
}
