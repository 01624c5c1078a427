//! Structured simplicial meshes on polytopal domains: tensor-product grids
//! on boxes (with optional geometric refinement toward designated faces,
//! where the boundary-layer experiments live) and fan meshes on polygons.

use crate::convexfn::NodeSet;
use crate::error::{Error, Result};
use crate::geometry::ConvexPolytope;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// A node set plus a simplicial decomposition of the domain.
#[derive(Debug, Clone)]
pub struct SimplicialMesh {
    pub nodes: Arc<NodeSet>,
    /// Each simplex lists dim + 1 node indices.
    pub simplices: Vec<Vec<usize>>,
}

impl SimplicialMesh {
    pub fn dim(&self) -> usize {
        self.nodes.dim()
    }

    /// Volume of one simplex.
    pub fn simplex_volume(&self, s: &[usize]) -> f64 {
        let dim = self.dim();
        let base = self.nodes.point(s[0]);
        let mut m = nalgebra::DMatrix::zeros(dim, dim);
        for (c, &vi) in s[1..].iter().enumerate() {
            let v = self.nodes.point(vi);
            for r in 0..dim {
                m[(r, c)] = v[r] - base[r];
            }
        }
        let fact: f64 = (1..=dim).map(|k| k as f64).product();
        m.determinant().abs() / fact
    }

    pub fn simplex_centroid(&self, s: &[usize]) -> Vec<f64> {
        let dim = self.dim();
        let mut c = vec![0.0; dim];
        for &vi in s {
            for k in 0..dim {
                c[k] += self.nodes.point(vi)[k];
            }
        }
        for v in c.iter_mut() {
            *v /= s.len() as f64;
        }
        c
    }

    /// Gradient of the affine interpolant of `values` on one simplex.
    pub fn simplex_gradient(&self, s: &[usize], values: &[f64]) -> Vec<f64> {
        let dim = self.dim();
        let base = self.nodes.point(s[0]);
        let mut m = nalgebra::DMatrix::zeros(dim, dim);
        let mut rhs = nalgebra::DVector::zeros(dim);
        for (r, &vi) in s[1..].iter().enumerate() {
            let v = self.nodes.point(vi);
            for c in 0..dim {
                m[(r, c)] = v[c] - base[c];
            }
            rhs[r] = values[vi] - values[s[0]];
        }
        match m.lu().solve(&rhs) {
            Some(g) => g.iter().copied().collect(),
            None => vec![0.0; dim],
        }
    }

    pub fn total_volume(&self) -> f64 {
        self.simplices.iter().map(|s| self.simplex_volume(s)).sum()
    }
}

/// Coordinates along one axis of a tensor grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AxisCoords(pub Vec<f64>);

impl AxisCoords {
    pub fn uniform(lo: f64, hi: f64, count: usize) -> Self {
        assert!(count >= 2 && hi > lo);
        AxisCoords(
            (0..count)
                .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
                .collect(),
        )
    }

    /// Geometric spacing refined toward `lo`: the first gap is `min_gap`
    /// and consecutive gaps grow by `ratio` until the interval is filled.
    pub fn geometric_toward_lo(lo: f64, hi: f64, min_gap: f64, ratio: f64) -> Self {
        assert!(hi > lo && min_gap > 0.0 && ratio > 1.0);
        let mut coords = vec![lo];
        let mut gap = min_gap;
        let mut x = lo;
        while x + gap < hi - 0.5 * gap {
            x += gap;
            coords.push(x);
            gap *= ratio;
        }
        coords.push(hi);
        AxisCoords(coords)
    }

    /// Symmetric two-sided refinement toward both endpoints.
    pub fn geometric_both(lo: f64, hi: f64, min_gap: f64, ratio: f64) -> Self {
        let mid = 0.5 * (lo + hi);
        let half = Self::geometric_toward_lo(lo, mid, min_gap, ratio).0;
        let mut coords = half.clone();
        for &c in half.iter().rev().skip(1) {
            coords.push(hi - (c - lo));
        }
        AxisCoords(coords)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Tensor-product simplicial mesh on the box spanned by the axis grids
/// (Kuhn triangulation of every cell).
pub fn tensor_mesh(axes: &[AxisCoords]) -> Result<SimplicialMesh> {
    let dim = axes.len();
    if dim != 2 && dim != 3 {
        return Err(Error::InvalidInput("tensor meshes support n = 2, 3".into()));
    }
    let lo: Vec<f64> = axes.iter().map(|a| a.0[0]).collect();
    let hi: Vec<f64> = axes.iter().map(|a| *a.0.last().unwrap()).collect();
    let domain = ConvexPolytope::cuboid(&lo, &hi)?;
    let counts: Vec<usize> = axes.iter().map(|a| a.len()).collect();
    let mut points = Vec::with_capacity(counts.iter().product());
    match dim {
        2 => {
            for i in 0..counts[0] {
                for j in 0..counts[1] {
                    points.push(vec![axes[0].0[i], axes[1].0[j]]);
                }
            }
        }
        _ => {
            for i in 0..counts[0] {
                for j in 0..counts[1] {
                    for k in 0..counts[2] {
                        points.push(vec![axes[0].0[i], axes[1].0[j], axes[2].0[k]]);
                    }
                }
            }
        }
    }
    let nodes = NodeSet::new(domain, points)?;
    let mut simplices = Vec::new();
    match dim {
        2 => {
            let idx = |i: usize, j: usize| i * counts[1] + j;
            for i in 0..counts[0] - 1 {
                for j in 0..counts[1] - 1 {
                    let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
                    simplices.push(vec![a, b, c]);
                    simplices.push(vec![a, c, d]);
                }
            }
        }
        _ => {
            let idx = |i: usize, j: usize, k: usize| (i * counts[1] + j) * counts[2] + k;
            // Kuhn: six tetrahedra per cell, one per permutation of axes.
            let perms: [[usize; 3]; 6] = [
                [0, 1, 2],
                [0, 2, 1],
                [1, 0, 2],
                [1, 2, 0],
                [2, 0, 1],
                [2, 1, 0],
            ];
            for i in 0..counts[0] - 1 {
                for j in 0..counts[1] - 1 {
                    for k in 0..counts[2] - 1 {
                        for perm in &perms {
                            let mut corner = [i, j, k];
                            let mut tet = vec![idx(corner[0], corner[1], corner[2])];
                            for &ax in perm {
                                corner[ax] += 1;
                                tet.push(idx(corner[0], corner[1], corner[2]));
                            }
                            simplices.push(tet);
                        }
                    }
                }
            }
        }
    }
    Ok(SimplicialMesh { nodes, simplices })
}

/// Fan mesh on a regular polygon: scaled copies of the boundary ring plus
/// the center, triangulated ring by ring.
pub fn polygon_fan_mesh(sides: usize, radius: f64, rings: usize) -> Result<SimplicialMesh> {
    if sides < 3 || rings < 1 {
        return Err(Error::InvalidInput("need >= 3 sides and >= 1 ring".into()));
    }
    let domain = ConvexPolytope::regular_ngon(sides, radius)?;
    let tau = std::f64::consts::TAU;
    let mut points = vec![vec![0.0, 0.0]];
    for ring in 1..=rings {
        let s = radius * ring as f64 / rings as f64;
        for j in 0..sides {
            let th = tau * j as f64 / sides as f64;
            points.push(vec![s * th.cos(), s * th.sin()]);
        }
    }
    let nodes = NodeSet::new(domain, points)?;
    let ring_base = |ring: usize| 1 + (ring - 1) * sides;
    let mut simplices = Vec::new();
    for j in 0..sides {
        simplices.push(vec![0, ring_base(1) + j, ring_base(1) + (j + 1) % sides]);
    }
    for ring in 1..rings {
        let inner = ring_base(ring);
        let outer = ring_base(ring + 1);
        for j in 0..sides {
            let jn = (j + 1) % sides;
            simplices.push(vec![inner + j, outer + j, outer + jn]);
            simplices.push(vec![inner + j, outer + jn, inner + jn]);
        }
    }
    Ok(SimplicialMesh { nodes, simplices })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_mesh_partitions_box() {
        let axes = vec![
            AxisCoords::uniform(0.0, 1.0, 5),
            AxisCoords::uniform(0.0, 2.0, 4),
        ];
        let mesh = tensor_mesh(&axes).unwrap();
        assert!((mesh.total_volume() - 2.0).abs() < 1e-12);
        assert_eq!(mesh.simplices.len(), 4 * 3 * 2);
        // 3D box of volume 6 cut into 6 tets per cell.
        let axes3 = vec![
            AxisCoords::uniform(0.0, 1.0, 3),
            AxisCoords::uniform(0.0, 2.0, 3),
            AxisCoords::uniform(0.0, 3.0, 4),
        ];
        let mesh3 = tensor_mesh(&axes3).unwrap();
        assert!((mesh3.total_volume() - 6.0).abs() < 1e-12);
        assert_eq!(mesh3.simplices.len(), 2 * 2 * 3 * 6);
    }

    #[test]
    fn geometric_axis_refines_toward_zero() {
        let ax = AxisCoords::geometric_toward_lo(0.0, 1.0, 1e-3, 1.4);
        assert_eq!(ax.0[0], 0.0);
        assert_eq!(*ax.0.last().unwrap(), 1.0);
        assert!((ax.0[1] - 1e-3).abs() < 1e-15);
        for w in ax.0.windows(2) {
            assert!(w[1] > w[0]);
        }
        let both = AxisCoords::geometric_both(0.0, 1.0, 1e-3, 1.4);
        let n = both.0.len();
        for k in 0..n {
            let mirror = 1.0 - both.0[n - 1 - k];
            assert!((both.0[k] - mirror).abs() < 1e-12);
        }
    }

    #[test]
    fn fan_mesh_covers_polygon() {
        let mesh = polygon_fan_mesh(16, 1.0, 5).unwrap();
        let poly_area = 0.5 * 16.0 * (std::f64::consts::TAU / 16.0).sin();
        assert!((mesh.total_volume() - poly_area).abs() < 1e-10);
        // Boundary ring nodes flagged boundary, inner rings interior.
        let nodes = &mesh.nodes;
        assert_eq!(nodes.boundary_nodes().len(), 16);
        assert_eq!(nodes.interior().len(), 1 + 16 * 4);
    }

    #[test]
    fn gradient_of_affine_interpolant() {
        let axes = vec![
            AxisCoords::uniform(0.0, 1.0, 4),
            AxisCoords::uniform(0.0, 1.0, 4),
        ];
        let mesh = tensor_mesh(&axes).unwrap();
        let values: Vec<f64> = mesh
            .nodes
            .points()
            .iter()
            .map(|p| 3.0 * p[0] - 1.5 * p[1] + 0.25)
            .collect();
        for s in &mesh.simplices {
            let g = mesh.simplex_gradient(s, &values);
            assert!((g[0] - 3.0).abs() < 1e-12 && (g[1] + 1.5).abs() < 1e-12);
        }
    }
}
