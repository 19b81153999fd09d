//! Brute-force Euclidean nearest-neighbor search.
//!
//! Ties in distance are broken by ascending index so that every neighbor
//! list is a deterministic function of the data.

use std::cmp::Ordering;

#[inline]
pub fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    squared_euclidean(a, b).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

fn by_distance_then_index(a: &Neighbor, b: &Neighbor) -> Ordering {
    a.distance
        .total_cmp(&b.distance)
        .then_with(|| a.index.cmp(&b.index))
}

/// Returns the `k` candidates closest to `query`, nearest first.
///
/// Fewer than `k` neighbors are returned when the candidate set is smaller.
pub fn k_nearest<'a, I>(query: &[f64], candidates: I, k: usize) -> Vec<Neighbor>
where
    I: IntoIterator<Item = (usize, &'a [f64])>,
{
    let mut all: Vec<Neighbor> = candidates
        .into_iter()
        .map(|(index, row)| Neighbor {
            index,
            distance: euclidean(query, row),
        })
        .collect();
    if k == 0 {
        return Vec::new();
    }
    if all.len() > k {
        all.select_nth_unstable_by(k - 1, by_distance_then_index);
        all.truncate(k);
    }
    all.sort_by(by_distance_then_index);
    all
}
