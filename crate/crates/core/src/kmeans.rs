//! Plain Euclidean k-means (k-means++ seeding, Lloyd iterations), used to
//! seed the disjoint feature partition.

use rand::Rng;

use crate::data::DataMatrix;

pub const DEFAULT_MAX_ITERS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansOutcome {
    /// Cluster index per point.
    pub assignment: Vec<usize>,
    pub sizes: Vec<usize>,
    pub iterations: usize,
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means++ seeding: the first center uniformly, each further center with
/// probability proportional to the squared distance to the nearest chosen
/// center. Falls back to a uniform unchosen point when every remaining
/// point coincides with a center.
pub fn kmeans_plus_plus<R: Rng + ?Sized>(points: &DataMatrix, k: usize, rng: &mut R) -> Vec<usize> {
    let n = points.n_rows();
    let mut chosen = Vec::with_capacity(k);
    chosen.push(rng.random_range(0..n));
    let mut nearest: Vec<f64> = (0..n)
        .map(|i| sq_dist(points.row(i), points.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total: f64 = nearest.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in nearest.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // rounding can leave target just above the final sum
            pick.unwrap_or_else(|| nearest.iter().rposition(|&w| w > 0.0).unwrap())
        } else {
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(sq_dist(points.row(i), points.row(next)));
        }
    }
    chosen
}

/// Runs k-means on the rows of `points`. Returns `None` if a cluster is
/// empty after convergence or at any iteration.
pub fn kmeans<R: Rng + ?Sized>(
    points: &DataMatrix,
    k: usize,
    max_iters: usize,
    rng: &mut R,
) -> Option<KMeansOutcome> {
    let n = points.n_rows();
    let dim = points.n_cols();
    if k == 0 || k > n {
        return None;
    }
    let seeds = kmeans_plus_plus(points, k, rng);
    let mut centers: Vec<f64> = seeds.iter().flat_map(|&i| points.row(i).to_vec()).collect();
    let mut assignment = vec![usize::MAX; n];
    let mut iterations = 0;

    for _ in 0..max_iters.max(1) {
        iterations += 1;
        let mut changed = false;
        for (i, slot) in assignment.iter_mut().enumerate() {
            let row = points.row(i);
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for c in 0..k {
                let d = sq_dist(row, &centers[c * dim..(c + 1) * dim]);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if *slot != best {
                *slot = best;
                changed = true;
            }
        }
        let mut sizes = vec![0usize; k];
        centers.iter_mut().for_each(|v| *v = 0.0);
        for (i, &c) in assignment.iter().enumerate() {
            sizes[c] += 1;
            for (acc, v) in centers[c * dim..(c + 1) * dim].iter_mut().zip(points.row(i)) {
                *acc += v;
            }
        }
        if sizes.contains(&0) {
            return None;
        }
        for c in 0..k {
            let inv = 1.0 / sizes[c] as f64;
            centers[c * dim..(c + 1) * dim].iter_mut().for_each(|v| *v *= inv);
        }
        if !changed {
            break;
        }
    }

    let mut sizes = vec![0usize; k];
    for &c in &assignment {
        sizes[c] += 1;
    }
    Some(KMeansOutcome {
        assignment,
        sizes,
        iterations,
    })
}
