//! Brute-force k-nearest-neighbour queries on row-major data.
//!
//! Distances are Euclidean; ties break toward the lower row index. Queries
//! fan out over rows through the parallel seam.

use crate::linalg::{dist_sq, Matrix};
use crate::par;

/// For each query row index (into `queries`), the indices of its `k` nearest
/// rows in `pool`, nearest first. `exclude_self` skips a pool entry whose
/// index equals the query's mapped index (`self_index`).
pub fn k_nearest(
    queries: &Matrix,
    pool: &Matrix,
    k: usize,
    self_index: impl Fn(usize) -> Option<usize> + Sync + Send,
) -> Vec<Vec<usize>> {
    par::map_range(queries.n_rows(), |qi| {
        let q = queries.row(qi);
        let skip = self_index(qi);
        let mut dists: Vec<(f64, usize)> = (0..pool.n_rows())
            .filter(|&pi| Some(pi) != skip)
            .map(|pi| (dist_sq(q, pool.row(pi)), pi))
            .collect();
        dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        dists.truncate(k);
        dists.into_iter().map(|(_, pi)| pi).collect()
    })
}
