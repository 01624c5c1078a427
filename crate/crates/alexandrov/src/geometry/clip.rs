//! Halfspace clipping kernels.
//!
//! Three engines with different speed/generality trade-offs:
//! - `clip_polygon` / `polygon_area`: ordered 2D polygons, the hot path for
//!   subdifferential cells in the plane.
//! - `Polyhedron3`: face-cycle 3D polyhedra, the hot path for 3D cells.
//! - `DdPolytope`: vertex set + tight constraint sets in any dimension,
//!   used by the cold polytope constructors where generality matters.

use nalgebra::{DMatrix, DVector};

/// Keep the part of `poly` (CCW vertex list) with `a . x <= b`.
pub fn clip_polygon(poly: &[[f64; 2]], a: [f64; 2], b: f64, eps: f64) -> Vec<[f64; 2]> {
    let n = poly.len();
    if n == 0 {
        return Vec::new();
    }
    let s: Vec<f64> = poly.iter().map(|p| a[0] * p[0] + a[1] * p[1] - b).collect();
    if s.iter().all(|&v| v <= eps) {
        return poly.to_vec();
    }
    let mut out = Vec::with_capacity(n + 2);
    for i in 0..n {
        let j = (i + 1) % n;
        let (si, sj) = (s[i], s[j]);
        if si <= eps {
            out.push(poly[i]);
        }
        // Edge crosses the boundary strictly.
        if (si <= eps) != (sj <= eps) {
            let t = si / (si - sj);
            if t.is_finite() && t > 0.0 && t < 1.0 {
                out.push([
                    poly[i][0] + t * (poly[j][0] - poly[i][0]),
                    poly[i][1] + t * (poly[j][1] - poly[i][1]),
                ]);
            }
        }
    }
    dedup_closed(&mut out, eps.max(1e-14));
    if out.len() < 3 {
        return Vec::new();
    }
    out
}

fn dedup_closed(poly: &mut Vec<[f64; 2]>, eps: f64) {
    let mut cleaned: Vec<[f64; 2]> = Vec::with_capacity(poly.len());
    for &p in poly.iter() {
        if let Some(&last) = cleaned.last() {
            if (p[0] - last[0]).abs() <= eps && (p[1] - last[1]).abs() <= eps {
                continue;
            }
        }
        cleaned.push(p);
    }
    while cleaned.len() >= 2 {
        let first = cleaned[0];
        let last = *cleaned.last().unwrap();
        if (first[0] - last[0]).abs() <= eps && (first[1] - last[1]).abs() <= eps {
            cleaned.pop();
        } else {
            break;
        }
    }
    *poly = cleaned;
}

/// Shoelace area of a CCW polygon.
pub fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for i in 0..poly.len() {
        let j = (i + 1) % poly.len();
        twice += poly[i][0] * poly[j][1] - poly[j][0] * poly[i][1];
    }
    0.5 * twice.abs()
}

/// Axis-aligned CCW rectangle used as a clipping seed.
pub fn rect_polygon(lo: [f64; 2], hi: [f64; 2]) -> Vec<[f64; 2]> {
    vec![[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]]
}

/// Convex 3D polyhedron as vertices plus outward-oriented face cycles.
#[derive(Clone, Debug)]
pub struct Polyhedron3 {
    pub vertices: Vec<[f64; 3]>,
    /// Each face is a vertex-index cycle, CCW when seen from outside.
    pub faces: Vec<Vec<u32>>,
}

impl Polyhedron3 {
    /// Axis-aligned box.
    pub fn cuboid(lo: [f64; 3], hi: [f64; 3]) -> Self {
        let mut vertices = Vec::with_capacity(8);
        for i in 0..8u32 {
            vertices.push([
                if i & 1 == 0 { lo[0] } else { hi[0] },
                if i & 2 == 0 { lo[1] } else { hi[1] },
                if i & 4 == 0 { lo[2] } else { hi[2] },
            ]);
        }
        let faces = vec![
            vec![1, 3, 7, 5],
            vec![0, 4, 6, 2],
            vec![2, 6, 7, 3],
            vec![0, 1, 5, 4],
            vec![4, 5, 7, 6],
            vec![0, 2, 3, 1],
        ];
        Self { vertices, faces }
    }

    pub fn is_empty(&self) -> bool {
        self.faces.len() < 4 || self.vertices.len() < 4
    }

    /// Intersect with `a . x <= b`. Returns `None` when nothing remains.
    pub fn clip(&self, a: [f64; 3], b: f64, eps: f64) -> Option<Polyhedron3> {
        let s: Vec<f64> = self
            .vertices
            .iter()
            .map(|v| a[0] * v[0] + a[1] * v[1] + a[2] * v[2] - b)
            .collect();
        if s.iter().all(|&v| v <= eps) {
            return Some(self.clone());
        }
        if s.iter().all(|&v| v > -eps) {
            return None;
        }
        let mut vertices = self.vertices.clone();
        let mut edge_cut: std::collections::HashMap<(u32, u32), u32> =
            std::collections::HashMap::new();
        let mut cut_ids: Vec<u32> = Vec::new();
        let mut faces: Vec<Vec<u32>> = Vec::new();
        for cycle in &self.faces {
            let m = cycle.len();
            let mut kept: Vec<u32> = Vec::with_capacity(m + 2);
            for i in 0..m {
                let (vi, vj) = (cycle[i], cycle[(i + 1) % m]);
                let (si, sj) = (s[vi as usize], s[vj as usize]);
                let i_in = si <= eps;
                let j_in = sj <= eps;
                if i_in {
                    kept.push(vi);
                }
                if i_in != j_in {
                    let key = (vi.min(vj), vi.max(vj));
                    let id = *edge_cut.entry(key).or_insert_with(|| {
                        let t = si / (si - sj);
                        let p = self.vertices[vi as usize];
                        let q = self.vertices[vj as usize];
                        vertices.push([
                            p[0] + t * (q[0] - p[0]),
                            p[1] + t * (q[1] - p[1]),
                            p[2] + t * (q[2] - p[2]),
                        ]);
                        let id = (vertices.len() - 1) as u32;
                        cut_ids.push(id);
                        id
                    });
                    kept.push(id);
                }
            }
            dedup_cycle(&mut kept, &vertices, eps.max(1e-14));
            if kept.len() >= 3 {
                faces.push(kept);
            }
        }
        // Original vertices sitting on the plane also border the section.
        for (i, &si) in s.iter().enumerate() {
            if si.abs() <= eps {
                cut_ids.push(i as u32);
            }
        }
        if let Some(section) = section_cycle(&vertices, &cut_ids, a, eps) {
            faces.push(section);
        }
        if faces.len() < 4 {
            return None;
        }
        let poly = compact(vertices, faces);
        if poly.is_empty() {
            None
        } else {
            Some(poly)
        }
    }

    /// Volume by the divergence theorem over fan-triangulated faces.
    pub fn volume(&self) -> f64 {
        let mut six_v = 0.0;
        for cycle in &self.faces {
            if cycle.len() < 3 {
                continue;
            }
            let v0 = self.vertices[cycle[0] as usize];
            for i in 1..cycle.len() - 1 {
                let v1 = self.vertices[cycle[i] as usize];
                let v2 = self.vertices[cycle[i + 1] as usize];
                six_v += v0[0] * (v1[1] * v2[2] - v1[2] * v2[1])
                    - v0[1] * (v1[0] * v2[2] - v1[2] * v2[0])
                    + v0[2] * (v1[0] * v2[1] - v1[1] * v2[0]);
            }
        }
        (six_v / 6.0).abs()
    }

    pub fn max_vertex_dist(&self, from: &[f64; 3]) -> f64 {
        self.vertices
            .iter()
            .map(|v| {
                ((v[0] - from[0]).powi(2) + (v[1] - from[1]).powi(2) + (v[2] - from[2]).powi(2))
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    pub fn centroid(&self) -> [f64; 3] {
        let mut c = [0.0; 3];
        for v in &self.vertices {
            c[0] += v[0];
            c[1] += v[1];
            c[2] += v[2];
        }
        let n = self.vertices.len() as f64;
        [c[0] / n, c[1] / n, c[2] / n]
    }
}

fn dedup_cycle(cycle: &mut Vec<u32>, vertices: &[[f64; 3]], eps: f64) {
    let close = |p: &[f64; 3], q: &[f64; 3]| {
        (p[0] - q[0]).abs() <= eps && (p[1] - q[1]).abs() <= eps && (p[2] - q[2]).abs() <= eps
    };
    let mut cleaned: Vec<u32> = Vec::with_capacity(cycle.len());
    for &id in cycle.iter() {
        if let Some(&last) = cleaned.last() {
            if last == id || close(&vertices[last as usize], &vertices[id as usize]) {
                continue;
            }
        }
        cleaned.push(id);
    }
    while cleaned.len() >= 2 {
        let first = cleaned[0] as usize;
        let last = *cleaned.last().unwrap() as usize;
        if cleaned[0] == *cleaned.last().unwrap() || close(&vertices[first], &vertices[last]) {
            cleaned.pop();
        } else {
            break;
        }
    }
    *cycle = cleaned;
}

/// Orders the cut vertices into a cycle whose right-hand normal is `+a`.
fn section_cycle(
    vertices: &[[f64; 3]],
    cut_ids: &[u32],
    a: [f64; 3],
    eps: f64,
) -> Option<Vec<u32>> {
    // Deduplicate by position.
    let mut ids: Vec<u32> = Vec::new();
    'outer: for &id in cut_ids {
        let p = vertices[id as usize];
        for &q in &ids {
            let v = vertices[q as usize];
            if (p[0] - v[0]).abs() <= eps && (p[1] - v[1]).abs() <= eps && (p[2] - v[2]).abs() <= eps
            {
                continue 'outer;
            }
        }
        ids.push(id);
    }
    if ids.len() < 3 {
        return None;
    }
    let norm = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    let n = [a[0] / norm, a[1] / norm, a[2] / norm];
    // In-plane orthonormal basis (u, w) with u x w = n.
    let pick = if n[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let mut u = [
        pick[1] * n[2] - pick[2] * n[1],
        pick[2] * n[0] - pick[0] * n[2],
        pick[0] * n[1] - pick[1] * n[0],
    ];
    let ul = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    u = [u[0] / ul, u[1] / ul, u[2] / ul];
    let w = [
        n[1] * u[2] - n[2] * u[1],
        n[2] * u[0] - n[0] * u[2],
        n[0] * u[1] - n[1] * u[0],
    ];
    let mut c = [0.0f64; 3];
    for &id in &ids {
        let p = vertices[id as usize];
        c = [c[0] + p[0], c[1] + p[1], c[2] + p[2]];
    }
    let m = ids.len() as f64;
    c = [c[0] / m, c[1] / m, c[2] / m];
    let mut keyed: Vec<(f64, u32)> = ids
        .iter()
        .map(|&id| {
            let p = vertices[id as usize];
            let d = [p[0] - c[0], p[1] - c[1], p[2] - c[2]];
            let x = d[0] * u[0] + d[1] * u[1] + d[2] * u[2];
            let y = d[0] * w[0] + d[1] * w[1] + d[2] * w[2];
            (y.atan2(x), id)
        })
        .collect();
    keyed.sort_by(|l, r| l.0.partial_cmp(&r.0).unwrap());
    // Basis satisfies u x w = n, so increasing angle already walks CCW with
    // respect to +n; the cross-product checks in the tests confirm this.
    Some(keyed.into_iter().map(|(_, id)| id).collect())
}

fn compact(vertices: Vec<[f64; 3]>, faces: Vec<Vec<u32>>) -> Polyhedron3 {
    let mut used = vec![u32::MAX; vertices.len()];
    let mut new_vertices = Vec::new();
    let mut new_faces = Vec::with_capacity(faces.len());
    for cycle in faces {
        let mut nc = Vec::with_capacity(cycle.len());
        for id in cycle {
            let slot = &mut used[id as usize];
            if *slot == u32::MAX {
                *slot = new_vertices.len() as u32;
                new_vertices.push(vertices[id as usize]);
            }
            nc.push(*slot);
        }
        new_faces.push(nc);
    }
    Polyhedron3 {
        vertices: new_vertices,
        faces: new_faces,
    }
}

/// Vertex-set polytope for arbitrary (small) dimension, maintained under
/// halfspace cuts by the double description step. Tight sets are kept for
/// facet reconstruction and final vertex snapping.
#[derive(Clone, Debug)]
pub struct DdPolytope {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    /// Indices into `constraints` that are active (tight) at each vertex.
    pub tight: Vec<Vec<usize>>,
    pub constraints: Vec<(Vec<f64>, f64)>,
}

impl DdPolytope {
    /// Bounding box seed; the box facets are the first `2 * dim` constraints.
    pub fn from_box(lo: &[f64], hi: &[f64]) -> Self {
        let dim = lo.len();
        assert!(dim >= 1 && dim <= 16);
        let mut constraints = Vec::with_capacity(2 * dim);
        for k in 0..dim {
            let mut a = vec![0.0; dim];
            a[k] = 1.0;
            constraints.push((a.clone(), hi[k]));
            a[k] = -1.0;
            constraints.push((a, -lo[k]));
        }
        let mut vertices = Vec::with_capacity(1 << dim);
        let mut tight = Vec::with_capacity(1 << dim);
        for mask in 0..(1usize << dim) {
            let mut v = Vec::with_capacity(dim);
            let mut t = Vec::with_capacity(dim);
            for k in 0..dim {
                if mask & (1 << k) != 0 {
                    v.push(hi[k]);
                    t.push(2 * k);
                } else {
                    v.push(lo[k]);
                    t.push(2 * k + 1);
                }
            }
            vertices.push(v);
            tight.push(t);
        }
        Self {
            dim,
            vertices,
            tight,
            constraints,
        }
    }

    /// Cut with `a . x <= b`; `false` means the polytope became empty.
    pub fn clip(&mut self, a: Vec<f64>, b: f64, eps: f64) -> bool {
        let ci = self.constraints.len();
        let s: Vec<f64> = self
            .vertices
            .iter()
            .map(|v| dot(&a, v) - b)
            .collect();
        self.constraints.push((a, b));
        let any_out = s.iter().any(|&v| v > eps);
        if !any_out {
            for (i, &si) in s.iter().enumerate() {
                if si.abs() <= eps {
                    self.tight[i].push(ci);
                }
            }
            return true;
        }
        if s.iter().all(|&v| v > -eps) {
            self.vertices.clear();
            self.tight.clear();
            return false;
        }
        let inside: Vec<usize> = (0..s.len()).filter(|&i| s[i] <= eps).collect();
        let outside: Vec<usize> = (0..s.len()).filter(|&i| s[i] > eps).collect();
        let mut vertices = Vec::with_capacity(inside.len() + 4);
        let mut tight = Vec::with_capacity(inside.len() + 4);
        for &i in &inside {
            vertices.push(self.vertices[i].clone());
            let mut t = self.tight[i].clone();
            if s[i].abs() <= eps {
                t.push(ci);
                t.sort_unstable();
            }
            tight.push(t);
        }
        for &i in &inside {
            // A vertex already on the plane is its own cut point.
            if s[i] > -eps {
                continue;
            }
            for &j in &outside {
                let common: Vec<usize> = intersect_sorted(&self.tight[i], &self.tight[j]);
                if common.len() + 1 < self.dim {
                    continue;
                }
                if !self.adjacent(i, j, &common) {
                    continue;
                }
                let t = s[i] / (s[i] - s[j]);
                let p: Vec<f64> = self.vertices[i]
                    .iter()
                    .zip(&self.vertices[j])
                    .map(|(&pi, &pj)| pi + t * (pj - pi))
                    .collect();
                // Skip near-duplicates from degenerate fans and tangencies.
                if vertices
                    .iter()
                    .any(|q: &Vec<f64>| max_abs_diff(q, &p) <= eps.max(1e-13))
                {
                    continue;
                }
                let mut tt = common;
                tt.push(ci);
                tt.sort_unstable();
                vertices.push(p);
                tight.push(tt);
            }
        }
        self.vertices = vertices;
        self.tight = tight;
        !self.vertices.is_empty()
    }

    /// Standard combinatorial adjacency: no third vertex's tight set
    /// contains the common tight set of `i` and `j`.
    fn adjacent(&self, i: usize, j: usize, common: &[usize]) -> bool {
        for k in 0..self.vertices.len() {
            if k == i || k == j {
                continue;
            }
            if contains_sorted(&self.tight[k], common) {
                return false;
            }
        }
        true
    }

    /// Re-solve each vertex from its tight constraints (least squares) to
    /// wash out error accumulated along the clipping cascade.
    pub fn snap(&mut self) {
        for (v, t) in self.vertices.iter_mut().zip(&self.tight) {
            if t.len() < self.dim {
                continue;
            }
            let rows = t.len();
            let mut a = DMatrix::zeros(rows, self.dim);
            let mut b = DVector::zeros(rows);
            for (r, &ci) in t.iter().enumerate() {
                for c in 0..self.dim {
                    a[(r, c)] = self.constraints[ci].0[c];
                }
                b[r] = self.constraints[ci].1;
            }
            let svd = a.svd(true, true);
            if svd.singular_values.iter().all(|&s| s > 1e-9) {
                if let Ok(sol) = svd.solve(&b, 1e-12) {
                    for c in 0..self.dim {
                        v[c] = sol[c];
                    }
                }
            }
        }
    }

    /// Constraint indices tight at enough vertices to form a facet.
    pub fn facet_constraints(&self) -> Vec<usize> {
        let mut count = vec![0usize; self.constraints.len()];
        for t in &self.tight {
            for &ci in t {
                count[ci] += 1;
            }
        }
        (0..self.constraints.len())
            .filter(|&ci| count[ci] >= self.dim)
            .collect()
    }

    /// Vertices tight at the given constraint.
    pub fn facet_vertices(&self, ci: usize) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&i| self.tight[i].binary_search(&ci).is_ok())
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn contains_sorted(haystack: &[usize], needles: &[usize]) -> bool {
    needles.iter().all(|n| haystack.binary_search(n).is_ok())
}
