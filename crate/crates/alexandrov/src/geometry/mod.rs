//! Convex domains and the distance-to-boundary machinery built on them:
//! polytopes in both vertex and halfspace form, affine normalization maps,
//! inner parallel bodies, metric projections, and layer volumes.

pub mod clip;
pub mod lp;
pub mod mvee;

use crate::error::{Error, Result};
use crate::vecmath::{dist, dot, norm, scale};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use clip::DdPolytope;
use lp::LinCon;

/// Feasibility tolerance for "vertex satisfies halfspace" checks.
const VERTEX_FEAS_TOL: f64 = 1e-12;
/// Tightness tolerance for facet/vertex incidence checks.
const TIGHT_TOL: f64 = 1e-9;
/// Below this Chebyshev radius a body counts as lower-dimensional.
const DEGENERATE_RADIUS: f64 = 1e-9;
const LP_BOUND: f64 = 1e9;

/// Closed halfspace `normal . x <= offset` with a unit normal.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Halfspace {
    /// Normalizes to a unit normal; rejects near-zero normals.
    pub fn new(normal: Vec<f64>, offset: f64) -> Result<Self> {
        let n = norm(&normal);
        if n < 1e-12 {
            return Err(Error::Geometry("halfspace with near-zero normal".into()));
        }
        Ok(Self {
            normal: scale(&normal, 1.0 / n),
            offset: offset / n,
        })
    }

    /// Signed slack `offset - normal . x`; nonnegative inside.
    pub fn slack(&self, x: &[f64]) -> f64 {
        self.offset - dot(&self.normal, x)
    }
}

/// Bounded full-dimensional convex polytope carrying synchronized vertex and
/// halfspace representations. The two are cross-validated at construction:
/// MA-measure cells need the vertex form, inner bodies need the halfspaces.
#[derive(Clone, Debug)]
pub struct ConvexPolytope {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    halfspaces: Vec<Halfspace>,
}

/// Result of an inward offset: the offset body can lose full dimension
/// before it vanishes, and callers need to tell the two apart.
#[derive(Clone, Debug)]
pub enum InnerBody {
    Nonempty(ConvexPolytope),
    /// Feasible but with (numerically) zero volume.
    Degenerate,
    Empty,
}

impl ConvexPolytope {
    /// Build from halfspaces alone; vertices are enumerated by incremental
    /// clipping and snapped onto their defining hyperplanes. Redundant
    /// halfspaces (touching fewer than `dim` vertices) are dropped so the
    /// stored pair of representations agrees.
    pub fn from_halfspaces(dim: usize, halfspaces: Vec<Halfspace>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidInput("polytope dimension must be >= 2".into()));
        }
        if halfspaces.len() < dim + 1 {
            return Err(Error::Geometry(
                "need at least dim+1 halfspaces for a bounded polytope".into(),
            ));
        }
        let cons: Vec<LinCon> = halfspaces
            .iter()
            .map(|h| LinCon::new(h.normal.clone(), h.offset))
            .collect();
        // Per-axis extremes give the bounding box and detect unboundedness.
        let mut lo = vec![0.0; dim];
        let mut hi = vec![0.0; dim];
        for k in 0..dim {
            let mut dir = vec![0.0; dim];
            dir[k] = 1.0;
            let up = lp::maximize_direction(dim, &cons, &dir, LP_BOUND)
                .ok_or_else(|| Error::Geometry("empty halfspace intersection".into()))?;
            dir[k] = -1.0;
            let down = lp::maximize_direction(dim, &cons, &dir, LP_BOUND)
                .ok_or_else(|| Error::Geometry("empty halfspace intersection".into()))?;
            if up >= 0.9 * LP_BOUND || down >= 0.9 * LP_BOUND {
                return Err(Error::Geometry("unbounded halfspace intersection".into()));
            }
            hi[k] = up + 1.0;
            lo[k] = -down - 1.0;
        }
        let mut dd = DdPolytope::from_box(&lo, &hi);
        for h in &halfspaces {
            if !dd.clip(h.normal.clone(), h.offset, 1e-12) {
                return Err(Error::Geometry("empty halfspace intersection".into()));
            }
        }
        dd.snap();
        // Facets among the user constraints (skip the 2*dim box seeds).
        let facet: Vec<usize> = dd
            .facet_constraints()
            .into_iter()
            .filter(|&ci| ci >= 2 * dim)
            .collect();
        if facet.is_empty() {
            return Err(Error::Geometry("degenerate halfspace intersection".into()));
        }
        let kept: Vec<Halfspace> = facet
            .iter()
            .map(|&ci| halfspaces[ci - 2 * dim].clone())
            .collect();
        let mut vertices: Vec<Vec<f64>> = Vec::new();
        'dedup: for v in dd.vertices {
            for w in &vertices {
                if dist(v.as_slice(), w.as_slice()) < 1e-10 {
                    continue 'dedup;
                }
            }
            vertices.push(v);
        }
        let poly = Self {
            dim,
            vertices,
            halfspaces: kept,
        };
        poly.validate()?;
        Ok(poly)
    }

    /// Adopt paired representations verbatim after cross-validation.
    pub fn from_representations(
        dim: usize,
        vertices: Vec<Vec<f64>>,
        halfspaces: Vec<Halfspace>,
    ) -> Result<Self> {
        let poly = Self {
            dim,
            vertices,
            halfspaces,
        };
        poly.validate()?;
        Ok(poly)
    }

    /// 2D convex hull (monotone chain) of a point cloud.
    pub fn from_vertices_2d(points: &[Vec<f64>]) -> Result<Self> {
        if points.iter().any(|p| p.len() != 2) {
            return Err(Error::InvalidInput("expected 2D points".into()));
        }
        let mut pts: Vec<[f64; 2]> = points.iter().map(|p| [p[0], p[1]]).collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup_by(|a, b| dist(a, b) < 1e-12);
        if pts.len() < 3 {
            return Err(Error::Geometry("need 3 non-collinear points".into()));
        }
        let cross =
            |o: [f64; 2], p: [f64; 2], q: [f64; 2]| (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0]);
        let mut lower: Vec<[f64; 2]> = Vec::new();
        for &p in &pts {
            while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 1e-14 {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<[f64; 2]> = Vec::new();
        for &p in pts.iter().rev() {
            while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 1e-14 {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        let hull: Vec<[f64; 2]> = lower.into_iter().chain(upper).collect();
        if hull.len() < 3 {
            return Err(Error::Geometry("points are collinear".into()));
        }
        let mut halfspaces = Vec::with_capacity(hull.len());
        for i in 0..hull.len() {
            let p = hull[i];
            let q = hull[(i + 1) % hull.len()];
            // CCW hull: outward normal is the edge direction rotated -90 deg.
            let n = vec![q[1] - p[1], p[0] - q[0]];
            let b = n[0] * p[0] + n[1] * p[1];
            halfspaces.push(Halfspace::new(n, b)?);
        }
        let poly = Self {
            dim: 2,
            vertices: hull.iter().map(|p| vec![p[0], p[1]]).collect(),
            halfspaces,
        };
        poly.validate()?;
        Ok(poly)
    }

    /// Simplex from its `dim + 1` vertices (any dimension).
    pub fn simplex(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let dim = vertices
            .first()
            .map(|v| v.len())
            .ok_or_else(|| Error::InvalidInput("no vertices".into()))?;
        if vertices.len() != dim + 1 {
            return Err(Error::InvalidInput("simplex needs dim+1 vertices".into()));
        }
        let mut halfspaces = Vec::with_capacity(dim + 1);
        for i in 0..vertices.len() {
            // Facet plane through all vertices except i: the normal spans
            // the kernel of the (dim-1) x dim difference matrix. Solve a
            // square system with a pinned coordinate to pick it out.
            let facet: Vec<&Vec<f64>> = vertices
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, v)| v)
                .collect();
            let base = facet[0];
            let mut a: Option<Vec<f64>> = None;
            for pin in 0..dim {
                let mut m = DMatrix::zeros(dim, dim);
                for (r, v) in facet.iter().skip(1).enumerate() {
                    for c in 0..dim {
                        m[(r, c)] = v[c] - base[c];
                    }
                }
                m[(dim - 1, pin)] = 1.0;
                let mut rhs = DVector::zeros(dim);
                rhs[dim - 1] = 1.0;
                if let Some(sol) = m.lu().solve(&rhs) {
                    let cand: Vec<f64> = sol.iter().copied().collect();
                    let n = norm(&cand);
                    if n > 1e-9 && cand.iter().all(|v| v.is_finite()) {
                        a = Some(scale(&cand, 1.0 / n));
                        break;
                    }
                }
            }
            let mut a = a.ok_or_else(|| Error::Geometry("degenerate simplex".into()))?;
            let mut b = dot(&a, base);
            // Orient outward: opposite vertex strictly inside.
            if dot(&a, &vertices[i]) > b {
                a = scale(&a, -1.0);
                b = -b;
            }
            if (dot(&a, &vertices[i]) - b).abs() < 1e-12 {
                return Err(Error::Geometry("flat simplex".into()));
            }
            halfspaces.push(Halfspace::new(a, b)?);
        }
        let poly = Self {
            dim,
            vertices,
            halfspaces,
        };
        poly.validate()?;
        Ok(poly)
    }

    /// Axis-aligned box, any dimension.
    pub fn cuboid(lo: &[f64], hi: &[f64]) -> Result<Self> {
        let dim = lo.len();
        if dim < 2 || hi.len() != dim || lo.iter().zip(hi).any(|(l, h)| l >= h) {
            return Err(Error::InvalidInput("bad box bounds".into()));
        }
        let mut halfspaces = Vec::with_capacity(2 * dim);
        for k in 0..dim {
            let mut a = vec![0.0; dim];
            a[k] = 1.0;
            halfspaces.push(Halfspace::new(a.clone(), hi[k])?);
            a[k] = -1.0;
            halfspaces.push(Halfspace::new(a, -lo[k])?);
        }
        let mut vertices = Vec::with_capacity(1 << dim);
        for mask in 0..(1usize << dim) {
            vertices.push(
                (0..dim)
                    .map(|k| if mask & (1 << k) != 0 { hi[k] } else { lo[k] })
                    .collect(),
            );
        }
        Ok(Self {
            dim,
            vertices,
            halfspaces,
        })
    }

    /// Regular m-gon inscribed in the circle of radius `r`, centered at 0.
    pub fn regular_ngon(m: usize, r: f64) -> Result<Self> {
        if m < 3 || r <= 0.0 {
            return Err(Error::InvalidInput("need m >= 3 sides, r > 0".into()));
        }
        let tau = std::f64::consts::TAU;
        let vertices: Vec<Vec<f64>> = (0..m)
            .map(|j| {
                let th = tau * j as f64 / m as f64;
                vec![r * th.cos(), r * th.sin()]
            })
            .collect();
        let apothem = r * (std::f64::consts::PI / m as f64).cos();
        let halfspaces: Result<Vec<Halfspace>> = (0..m)
            .map(|j| {
                let th = tau * (j as f64 + 0.5) / m as f64;
                Halfspace::new(vec![th.cos(), th.sin()], apothem)
            })
            .collect();
        Ok(Self {
            dim: 2,
            vertices,
            halfspaces: halfspaces?,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.halfspaces.iter().all(|h| h.slack(x) >= -tol)
    }

    /// Distance to the boundary for `x` inside the polytope. For convex sets
    /// this is the minimum slack over facet hyperplanes (unit normals).
    pub fn dist_boundary(&self, x: &[f64]) -> f64 {
        self.halfspaces
            .iter()
            .map(|h| h.slack(x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Chebyshev center and inradius.
    pub fn chebyshev(&self) -> (Vec<f64>, f64) {
        let cons: Vec<LinCon> = self
            .halfspaces
            .iter()
            .map(|h| LinCon::new(h.normal.clone(), h.offset))
            .collect();
        lp::chebyshev_center(self.dim, &cons, LP_BOUND).expect("bounded system")
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for v in &self.vertices {
            for k in 0..self.dim {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }

    /// Radius of the smallest origin-centered ball containing the polytope.
    pub fn circumradius_origin(&self) -> f64 {
        self.vertices.iter().map(|v| norm(v)).fold(0.0, f64::max)
    }

    pub fn centroid_of_vertices(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        for v in &self.vertices {
            for k in 0..self.dim {
                c[k] += v[k];
            }
        }
        scale(&c, 1.0 / self.vertices.len() as f64)
    }

    /// Cross-validation of the paired representations.
    pub fn validate(&self) -> Result<()> {
        if self.vertices.is_empty() || self.halfspaces.is_empty() {
            return Err(Error::Geometry("empty representation".into()));
        }
        for v in &self.vertices {
            for h in &self.halfspaces {
                let tol = VERTEX_FEAS_TOL * (1.0 + h.offset.abs() + norm(v));
                if h.slack(v) < -tol {
                    return Err(Error::Geometry(format!(
                        "vertex {v:?} violates halfspace by {:.3e}",
                        -h.slack(v)
                    )));
                }
            }
        }
        let (_, r) = self.chebyshev();
        if r < DEGENERATE_RADIUS {
            return Err(Error::Geometry(format!(
                "polytope not full-dimensional (inradius {r:.3e})"
            )));
        }
        for (hi, h) in self.halfspaces.iter().enumerate() {
            let tight = self.vertices.iter().filter(|v| h.slack(v).abs() <= TIGHT_TOL).count();
            if tight < self.dim {
                return Err(Error::Geometry(format!(
                    "halfspace {hi} tight at only {tight} vertices"
                )));
            }
        }
        for (vi, v) in self.vertices.iter().enumerate() {
            let tight = self.halfspaces.iter().filter(|h| h.slack(v).abs() <= TIGHT_TOL).count();
            if tight < self.dim {
                return Err(Error::Geometry(format!(
                    "vertex {vi} tight at only {tight} halfspaces"
                )));
            }
        }
        Ok(())
    }

    /// Volume (dimension 2 or 3).
    pub fn volume(&self) -> Result<f64> {
        match self.dim {
            2 => {
                let ring = order_ccw_2d(&self.vertices);
                Ok(clip::polygon_area(&ring))
            }
            3 => {
                let mut vol = 0.0;
                for h in &self.halfspaces {
                    let pts: Vec<[f64; 3]> = self
                        .vertices
                        .iter()
                        .filter(|v| h.slack(v).abs() <= TIGHT_TOL)
                        .map(|v| [v[0], v[1], v[2]])
                        .collect();
                    if pts.len() < 3 {
                        continue;
                    }
                    let area = planar_area_3d(&pts, [h.normal[0], h.normal[1], h.normal[2]]);
                    vol += h.offset * area / 3.0;
                }
                Ok(vol.abs())
            }
            _ => Err(Error::InvalidInput(
                "volume implemented for dimensions 2 and 3".into(),
            )),
        }
    }

    /// Inner parallel body: every facet offset inward by `h` (Minkowski
    /// erosion; exact for polytopes since all faces are flat).
    pub fn inner_body(&self, h: f64) -> Result<InnerBody> {
        if h < 0.0 {
            return Err(Error::InvalidInput("offset must be nonnegative".into()));
        }
        if h == 0.0 {
            return Ok(InnerBody::Nonempty(self.clone()));
        }
        let shifted: Vec<Halfspace> = self
            .halfspaces
            .iter()
            .map(|hs| Halfspace {
                normal: hs.normal.clone(),
                offset: hs.offset - h,
            })
            .collect();
        let cons: Vec<LinCon> = shifted
            .iter()
            .map(|hs| LinCon::new(hs.normal.clone(), hs.offset))
            .collect();
        let (_, r) = lp::chebyshev_center(self.dim, &cons, LP_BOUND)
            .ok_or_else(|| Error::Geometry("chebyshev failed".into()))?;
        if r < -DEGENERATE_RADIUS {
            return Ok(InnerBody::Empty);
        }
        if r < DEGENERATE_RADIUS {
            return Ok(InnerBody::Degenerate);
        }
        Ok(InnerBody::Nonempty(Self::from_halfspaces(self.dim, shifted)?))
    }

    /// Euclidean projection onto the polytope. Exact: enumerates projections
    /// onto the affine hulls of all candidate active sets of size <= dim and
    /// keeps the nearest feasible one.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        if self.contains(x, 1e-12) {
            return x.to_vec();
        }
        let m = self.halfspaces.len();
        let mut best: Option<(f64, Vec<f64>)> = None;
        let mut consider = |y: Vec<f64>| {
            if self.contains(&y, 1e-9) {
                let d = dist(x, &y);
                if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
                    best = Some((d, y));
                }
            }
        };
        let mut subset = Vec::new();
        enumerate_subsets(m, self.dim, &mut subset, &mut |s: &[usize]| {
            if let Some(y) = project_affine(x, &self.halfspaces, s) {
                consider(y);
            }
        });
        best.map(|(_, y)| y).unwrap_or_else(|| x.to_vec())
    }

    /// Volume of the layer `Omega_a \ Omega_b` between two inner bodies.
    pub fn layer_volume(&self, a: f64, b: f64) -> Result<f64> {
        if !(0.0 < a && a < b) {
            return Err(Error::InvalidInput("need 0 < a < b".into()));
        }
        let vol = |ib: InnerBody| -> Result<f64> {
            match ib {
                InnerBody::Nonempty(p) => p.volume(),
                _ => Ok(0.0),
            }
        };
        let va = vol(self.inner_body(a)?)?;
        let vb = vol(self.inner_body(b)?)?;
        Ok(va - vb)
    }

    /// Image under an invertible affine map (both representations mapped).
    pub fn transform(&self, map: &AffineMap) -> Result<ConvexPolytope> {
        let vertices: Vec<Vec<f64>> = self.vertices.iter().map(|v| map.apply(v)).collect();
        let inv_t = map.linear().transpose().try_inverse().ok_or_else(|| {
            Error::Geometry("affine map not invertible".into())
        })?;
        let mut halfspaces = Vec::with_capacity(self.halfspaces.len());
        for h in &self.halfspaces {
            let a = DVector::from_column_slice(&h.normal);
            let a2 = &inv_t * a;
            let a2v: Vec<f64> = a2.iter().copied().collect();
            let b2 = h.offset + dot(&a2v, map.translation_slice());
            halfspaces.push(Halfspace::new(a2v, b2)?);
        }
        let poly = Self {
            dim: self.dim,
            vertices,
            halfspaces,
        };
        poly.validate()?;
        Ok(poly)
    }
}

/// Order 2D points counterclockwise around their centroid.
pub(crate) fn order_ccw_2d(vertices: &[Vec<f64>]) -> Vec<[f64; 2]> {
    let n = vertices.len() as f64;
    let cx = vertices.iter().map(|v| v[0]).sum::<f64>() / n;
    let cy = vertices.iter().map(|v| v[1]).sum::<f64>() / n;
    let mut keyed: Vec<(f64, [f64; 2])> = vertices
        .iter()
        .map(|v| ((v[1] - cy).atan2(v[0] - cx), [v[0], v[1]]))
        .collect();
    keyed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    keyed.into_iter().map(|(_, p)| p).collect()
}

/// Area of a planar convex point set in 3D with the given plane normal.
pub(crate) fn planar_area_3d(pts: &[[f64; 3]], n: [f64; 3]) -> f64 {
    let pick = if n[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let cr = |a: [f64; 3], b: [f64; 3]| {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    };
    let mut u = cr(pick, n);
    let ul = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    u = [u[0] / ul, u[1] / ul, u[2] / ul];
    let w = cr(n, u);
    let c = pts.iter().fold([0.0; 3], |acc, p| {
        [acc[0] + p[0], acc[1] + p[1], acc[2] + p[2]]
    });
    let m = pts.len() as f64;
    let c = [c[0] / m, c[1] / m, c[2] / m];
    let mut flat: Vec<[f64; 2]> = pts
        .iter()
        .map(|p| {
            let d = [p[0] - c[0], p[1] - c[1], p[2] - c[2]];
            [
                d[0] * u[0] + d[1] * u[1] + d[2] * u[2],
                d[0] * w[0] + d[1] * w[1] + d[2] * w[2],
            ]
        })
        .collect();
    flat.sort_by(|a, b| a[1].atan2(a[0]).partial_cmp(&b[1].atan2(b[0])).unwrap());
    clip::polygon_area(&flat)
}

fn enumerate_subsets<F: FnMut(&[usize])>(m: usize, max_size: usize, acc: &mut Vec<usize>, f: &mut F) {
    if !acc.is_empty() {
        f(acc);
    }
    if acc.len() == max_size {
        return;
    }
    let start = acc.last().map_or(0, |&l| l + 1);
    for i in start..m {
        acc.push(i);
        enumerate_subsets(m, max_size, acc, f);
        acc.pop();
    }
}

/// Projection of `x` onto the affine subspace where the listed halfspaces
/// are tight; `None` when the active normals are rank-deficient.
fn project_affine(x: &[f64], halfspaces: &[Halfspace], active: &[usize]) -> Option<Vec<f64>> {
    let dim = x.len();
    let k = active.len();
    let mut a = DMatrix::zeros(k, dim);
    let mut r = DVector::zeros(k);
    for (row, &hi) in active.iter().enumerate() {
        for c in 0..dim {
            a[(row, c)] = halfspaces[hi].normal[c];
        }
        r[row] = dot(&halfspaces[hi].normal, x) - halfspaces[hi].offset;
    }
    let gram = &a * a.transpose();
    let lam = gram.lu().solve(&r)?;
    let corr = a.transpose() * lam;
    Some((0..dim).map(|c| x[c] - corr[c]).collect())
}

/// Invertible affine map `x -> L x + t` with cached determinant and
/// spectral norm (both referring to the linear part).
#[derive(Clone, Debug)]
pub struct AffineMap {
    linear: DMatrix<f64>,
    translation: DVector<f64>,
    det: f64,
    spectral_norm: f64,
}

impl AffineMap {
    pub fn new(linear: DMatrix<f64>, translation: DVector<f64>) -> Result<Self> {
        let dim = linear.nrows();
        if linear.ncols() != dim || translation.len() != dim {
            return Err(Error::InvalidInput("affine map shape mismatch".into()));
        }
        let det = linear.determinant();
        let inv = linear
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Geometry("singular linear part".into()))?;
        let residual = (&linear * &inv - DMatrix::identity(dim, dim)).abs().max();
        if residual > 1e-12 {
            return Err(Error::Geometry(format!(
                "inverse check failed (residual {residual:.3e})"
            )));
        }
        let spectral_norm = linear.clone().svd(false, false).singular_values[0];
        if spectral_norm <= 0.0 {
            return Err(Error::Geometry("zero spectral norm".into()));
        }
        Ok(Self {
            linear,
            translation,
            det,
            spectral_norm,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            linear: DMatrix::identity(dim, dim),
            translation: DVector::zeros(dim),
            det: 1.0,
            spectral_norm: 1.0,
        }
    }

    /// Pure scaling `x -> s x`.
    pub fn scaling(dim: usize, s: f64) -> Result<Self> {
        Self::new(DMatrix::identity(dim, dim) * s, DVector::zeros(dim))
    }

    pub fn dim(&self) -> usize {
        self.linear.nrows()
    }

    pub fn linear(&self) -> &DMatrix<f64> {
        &self.linear
    }

    pub fn translation_slice(&self) -> &[f64] {
        self.translation.as_slice()
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn spectral_norm(&self) -> f64 {
        self.spectral_norm
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let v = &self.linear * DVector::from_column_slice(x) + &self.translation;
        v.iter().copied().collect()
    }

    pub fn inverse(&self) -> Result<AffineMap> {
        let inv = self
            .linear
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Geometry("singular linear part".into()))?;
        let t = -(&inv * &self.translation);
        Self::new(inv, t)
    }

    /// Composition `self(other(x))`.
    pub fn compose(&self, other: &AffineMap) -> Result<AffineMap> {
        let linear = &self.linear * &other.linear;
        let translation = &self.linear * &other.translation + &self.translation;
        Self::new(linear, translation)
    }
}

/// The solid cylinder `(0, h) x B_rho^{n-1}`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Cylinder {
    pub height: f64,
    pub radius: f64,
    pub dim: usize,
}

impl Cylinder {
    pub fn new(height: f64, radius: f64, dim: usize) -> Result<Self> {
        if height <= 0.0 || radius <= 0.0 || dim < 2 {
            return Err(Error::InvalidInput("cylinder needs h, rho > 0, n >= 2".into()));
        }
        Ok(Self {
            height,
            radius,
            dim,
        })
    }

    /// Closed membership test matching the product definition.
    pub fn contains_closed(&self, x: &[f64]) -> bool {
        if x.len() != self.dim {
            return false;
        }
        let radial = norm(&x[1..]);
        (0.0..=self.height).contains(&x[0]) && radial <= self.radius
    }

    /// Polytope inscribed in the cylinder: exact in 2D, an m-gon cross
    /// section in 3D (vertices on the circle, so the polytope is a subset).
    pub fn inscribed_polytope(&self, sides: usize) -> Result<ConvexPolytope> {
        match self.dim {
            2 => ConvexPolytope::cuboid(&[0.0, -self.radius], &[self.height, self.radius]),
            3 => {
                let tau = std::f64::consts::TAU;
                let m = sides.max(3);
                let apothem = self.radius * (std::f64::consts::PI / m as f64).cos();
                let mut halfspaces = vec![
                    Halfspace::new(vec![1.0, 0.0, 0.0], self.height)?,
                    Halfspace::new(vec![-1.0, 0.0, 0.0], 0.0)?,
                ];
                for j in 0..m {
                    let th = tau * (j as f64 + 0.5) / m as f64;
                    halfspaces.push(Halfspace::new(vec![0.0, th.cos(), th.sin()], apothem)?);
                }
                let mut vertices = Vec::with_capacity(2 * m);
                for j in 0..m {
                    let th = tau * j as f64 / m as f64;
                    let (c, s) = (self.radius * th.cos(), self.radius * th.sin());
                    vertices.push(vec![0.0, c, s]);
                    vertices.push(vec![self.height, c, s]);
                }
                let poly = ConvexPolytope {
                    dim: 3,
                    vertices,
                    halfspaces,
                };
                poly.validate()?;
                Ok(poly)
            }
            _ => Err(Error::InvalidInput(
                "cylinder polytopes implemented for n = 2, 3".into(),
            )),
        }
    }
}

/// Surface area of the unit sphere in R^n: `2 pi^{n/2} / Gamma(n/2)`,
/// with the half-integer Gamma evaluated by exact recursion.
pub fn sphere_area(n: usize) -> f64 {
    assert!(n >= 2);
    let pi = std::f64::consts::PI;
    let gamma_half = |twice: usize| -> f64 {
        // Gamma(twice / 2)
        if twice % 2 == 0 {
            let k = twice / 2;
            (1..k).map(|i| i as f64).product::<f64>()
        } else {
            let mut g = pi.sqrt(); // Gamma(1/2)
            let mut arg = 0.5;
            while (arg - twice as f64 / 2.0).abs() > 0.25 {
                g *= arg;
                arg += 1.0;
            }
            g
        }
    };
    2.0 * pi.powf(n as f64 / 2.0) / gamma_half(n)
}
