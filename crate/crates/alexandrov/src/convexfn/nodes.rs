//! Node sets over polytopal domains with a uniform-bucket spatial index.

use crate::error::{Error, Result};
use crate::geometry::ConvexPolytope;
use crate::vecmath::dist;

fn sub_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}
use std::sync::Arc;

/// Distance below which a node counts as sitting on the boundary.
const BOUNDARY_TOL: f64 = 1e-9;

/// A finite node set on the closure of a convex polytopal domain,
/// partitioned into interior and boundary nodes.
#[derive(Debug)]
pub struct NodeSet {
    dim: usize,
    points: Vec<Vec<f64>>,
    /// Same coordinates, dim-strided, for the cell-evaluation hot loops.
    flat: Vec<f64>,
    boundary: Vec<bool>,
    interior_idx: Vec<usize>,
    boundary_idx: Vec<usize>,
    dist_to_boundary: Vec<f64>,
    domain: ConvexPolytope,
    grid: SpatialGrid,
    /// Precomputed nearest neighbors per node (sorted by distance).
    neighbors: Vec<Vec<usize>>,
    /// Per node and axis direction (+e_k, -e_k alternating): the nearest
    /// exactly-aligned neighbor and its distance, when one exists. Aligned
    /// neighbors turn cell bounding boxes into O(1) lookups on grids.
    axis_neighbors: Vec<Option<Vec<(usize, f64)>>>,
}

impl NodeSet {
    pub fn new(domain: ConvexPolytope, points: Vec<Vec<f64>>) -> Result<Arc<NodeSet>> {
        let dim = domain.dim();
        if points.is_empty() {
            return Err(Error::InvalidInput("empty node set".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::InvalidInput(format!("node {i} has wrong dimension")));
            }
            if !domain.contains(p, 1e-9) {
                return Err(Error::InvalidInput(format!(
                    "node {i} at {p:?} lies outside the domain"
                )));
            }
        }
        let grid = SpatialGrid::build(&points);
        // Reject duplicate nodes: cells would degenerate silently.
        for (i, p) in points.iter().enumerate() {
            for j in grid.candidates_near(p, grid.cell_size * 1e-6) {
                if j != i && dist(p, &points[j]) < 1e-12 {
                    return Err(Error::InvalidInput(format!("duplicate nodes {j} and {i}")));
                }
            }
        }
        let dist_to_boundary: Vec<f64> = points.iter().map(|p| domain.dist_boundary(p).max(0.0)).collect();
        let boundary: Vec<bool> = dist_to_boundary.iter().map(|&d| d <= BOUNDARY_TOL).collect();
        let interior_idx: Vec<usize> = (0..points.len()).filter(|&i| !boundary[i]).collect();
        let boundary_idx: Vec<usize> = (0..points.len()).filter(|&i| boundary[i]).collect();
        if boundary_idx.is_empty() {
            return Err(Error::InvalidInput("node set has no boundary nodes".into()));
        }
        let k = (6 * dim * dim).min(points.len().saturating_sub(1)).max(dim + 1);
        let neighbors = crate::exec::map_range(points.len(), |i| grid.knn(&points, i, k));
        let axis_neighbors = crate::exec::map_range(points.len(), |i| {
            let mut found = vec![None; 2 * dim];
            for &j in &neighbors[i] {
                let d = sub_vec(&points[j], &points[i]);
                let len = dist(&points[j], &points[i]);
                for k in 0..dim {
                    for (sign_idx, sign) in [(0usize, 1.0f64), (1, -1.0)] {
                        let slot = 2 * k + sign_idx;
                        if found[slot].is_some() {
                            continue;
                        }
                        // Alignment with sign * e_k within a tight relative tol.
                        if (d[k] * sign - len).abs() <= 1e-9 * len {
                            found[slot] = Some((j, len));
                        }
                    }
                }
            }
            if found.iter().all(|f| f.is_some()) {
                Some(found.into_iter().map(|f| f.unwrap()).collect())
            } else {
                None
            }
        });
        let flat: Vec<f64> = points.iter().flatten().copied().collect();
        Ok(Arc::new(NodeSet {
            dim,
            points,
            flat,
            boundary,
            interior_idx,
            boundary_idx,
            dist_to_boundary,
            domain,
            grid,
            neighbors,
            axis_neighbors,
        }))
    }

    /// Flat dim-strided coordinate buffer.
    pub fn flat_coords(&self) -> &[f64] {
        &self.flat
    }

    /// Aligned axis neighbors of node `i` as (index, distance) pairs in
    /// the order +e_1, -e_1, +e_2, ... when all 2 dim directions exist.
    pub fn axis_neighbors(&self, i: usize) -> Option<&[(usize, f64)]> {
        self.axis_neighbors[i].as_deref()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.boundary[i]
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior_idx
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary_idx
    }

    /// Distance from node `i` to the domain boundary.
    pub fn boundary_dist(&self, i: usize) -> f64 {
        self.dist_to_boundary[i]
    }

    pub fn domain(&self) -> &ConvexPolytope {
        &self.domain
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// Distance from node `i` to the nearest boundary *node*.
    pub fn nearest_boundary_node_dist(&self, i: usize) -> f64 {
        self.boundary_idx
            .iter()
            .map(|&b| dist(&self.points[i], &self.points[b]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }
}

/// Uniform bucket grid for neighbor queries.
#[derive(Debug)]
pub struct SpatialGrid {
    lo: Vec<f64>,
    counts: Vec<usize>,
    pub cell_size: f64,
    buckets: std::collections::HashMap<u64, Vec<usize>>,
    dim: usize,
}

impl SpatialGrid {
    pub fn build(points: &[Vec<f64>]) -> Self {
        let dim = points[0].len();
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for p in points {
            for k in 0..dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let mut volume = 1.0f64;
        for k in 0..dim {
            volume *= (hi[k] - lo[k]).max(1e-12);
        }
        let cell_size = (volume / points.len() as f64).powf(1.0 / dim as f64).max(1e-12);
        let counts: Vec<usize> = (0..dim)
            .map(|k| (((hi[k] - lo[k]) / cell_size).ceil() as usize + 1).max(1))
            .collect();
        let mut buckets: std::collections::HashMap<u64, Vec<usize>> = Default::default();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(Self::key(&lo, cell_size, &counts, p)).or_default().push(i);
        }
        Self {
            lo,
            counts,
            cell_size,
            buckets,
            dim,
        }
    }

    fn key(lo: &[f64], cell: f64, counts: &[usize], p: &[f64]) -> u64 {
        let mut k = 0u64;
        for d in 0..p.len() {
            let idx = (((p[d] - lo[d]) / cell).floor() as i64).clamp(0, counts[d] as i64 - 1) as u64;
            k = k * (counts[d] as u64) + idx;
        }
        k
    }

    /// Indices in buckets within `radius` of `p` (superset of true hits).
    pub fn candidates_near(&self, p: &[f64], radius: f64) -> Vec<usize> {
        let reach = (radius / self.cell_size).ceil() as i64 + 1;
        let mut out = Vec::new();
        let base: Vec<i64> = (0..self.dim)
            .map(|d| ((p[d] - self.lo[d]) / self.cell_size).floor() as i64)
            .collect();
        let mut offsets = vec![-reach; self.dim];
        loop {
            let mut key = 0u64;
            let mut valid = true;
            for d in 0..self.dim {
                let idx = base[d] + offsets[d];
                if idx < 0 || idx >= self.counts[d] as i64 {
                    valid = false;
                    break;
                }
                key = key * (self.counts[d] as u64) + idx as u64;
            }
            if valid {
                if let Some(b) = self.buckets.get(&key) {
                    out.extend_from_slice(b);
                }
            }
            // advance odometer
            let mut d = 0;
            loop {
                if d == self.dim {
                    return out;
                }
                offsets[d] += 1;
                if offsets[d] <= reach {
                    break;
                }
                offsets[d] = -reach;
                d += 1;
            }
        }
    }

    /// k nearest neighbors of node `i` (excluding itself), sorted by distance.
    pub fn knn(&self, points: &[Vec<f64>], i: usize, k: usize) -> Vec<usize> {
        let p = &points[i];
        let mut radius = self.cell_size * 1.5;
        loop {
            let mut cands = self.candidates_near(p, radius);
            cands.retain(|&j| j != i);
            if cands.len() >= k || cands.len() + 1 >= points.len() {
                let mut keyed: Vec<(f64, usize)> =
                    cands.iter().map(|&j| (dist(p, &points[j]), j)).collect();
                keyed.sort_by(|a, b| a.partial_cmp(b).unwrap());
                keyed.truncate(k);
                // All found candidates within the scanned radius are certain;
                // only accept if the kth distance is inside the safe radius.
                if keyed.len() < k || keyed.last().unwrap().0 <= radius {
                    return keyed.into_iter().map(|(_, j)| j).collect();
                }
            }
            radius *= 2.0;
        }
    }
}
