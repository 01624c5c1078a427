//! Minimum-volume enclosing ellipsoid and John-position normalization.
//!
//! The Khachiyan ascent with away steps converges linearly, which is needed
//! because the inclusion margins demanded downstream (1e-8) sit far below
//! what the plain sublinear ascent reaches in a bounded iteration budget.
//! Simplex input (dim + 1 points) short-circuits to the closed form with
//! uniform weights.

use super::{AffineMap, ConvexPolytope};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

pub struct Ellipsoid {
    pub center: DVector<f64>,
    /// Shape matrix: the ellipsoid is `(x-c)^T A (x-c) <= 1`.
    pub shape: DMatrix<f64>,
}

const MAX_ITERS: usize = 10_000;
const TARGET_GAP: f64 = 1e-9;
const REQUIRED_GAP: f64 = 1e-6;

/// Enclosing ellipsoid of a point set, inflated so containment is exact.
pub fn mvee(points: &[Vec<f64>]) -> Result<Ellipsoid> {
    let dim = points
        .first()
        .map(|p| p.len())
        .ok_or_else(|| Error::InvalidInput("no points".into()))?;
    let n = points.len();
    if n < dim + 1 {
        return Err(Error::Geometry("too few points for a full ellipsoid".into()));
    }
    let d1 = dim + 1;
    // Lifted points (x, 1).
    let q: Vec<DVector<f64>> = points
        .iter()
        .map(|p| {
            let mut v = DVector::zeros(d1);
            for k in 0..dim {
                v[k] = p[k];
            }
            v[dim] = 1.0;
            v
        })
        .collect();

    let mut u = DVector::from_element(n, 1.0 / n as f64);
    if n > d1 {
        let mut gap = f64::INFINITY;
        let mut iters = 0;
        while iters < MAX_ITERS {
            iters += 1;
            let mut m = DMatrix::zeros(d1, d1);
            for (i, qi) in q.iter().enumerate() {
                if u[i] > 0.0 {
                    m += qi * qi.transpose() * u[i];
                }
            }
            let minv = m.try_inverse().ok_or_else(|| {
                Error::Geometry("degenerate point set (lower-dimensional)".into())
            })?;
            let w: Vec<f64> = q.iter().map(|qi| (qi.transpose() * &minv * qi)[0]).collect();
            let (jp, wp) = w
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(i, &v)| (i, v))
                .unwrap();
            let (jm, wm) = w
                .iter()
                .enumerate()
                .filter(|(i, _)| u[*i] > 1e-300)
                .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(i, &v)| (i, v))
                .unwrap();
            let e_plus = wp / d1 as f64 - 1.0;
            let e_minus = 1.0 - wm / d1 as f64;
            gap = e_plus.max(e_minus);
            if gap <= TARGET_GAP {
                break;
            }
            if e_plus >= e_minus {
                let lam = (wp - d1 as f64) / (d1 as f64 * (wp - 1.0));
                u *= 1.0 - lam;
                u[jp] += lam;
            } else {
                let lam_raw = (d1 as f64 - wm) / (d1 as f64 * (wm - 1.0));
                let lam = lam_raw.min(u[jm] / (1.0 - u[jm]));
                u *= 1.0 + lam;
                u[jm] -= lam;
                if u[jm] < 0.0 {
                    u[jm] = 0.0;
                }
            }
        }
        if gap > REQUIRED_GAP {
            return Err(Error::NonConvergence {
                what: "enclosing-ellipsoid iteration",
                iterations: iters,
                residual: gap,
            });
        }
    }

    // Center form from the weights.
    let mut center = DVector::zeros(dim);
    for (i, p) in points.iter().enumerate() {
        for k in 0..dim {
            center[k] += u[i] * p[k];
        }
    }
    let mut sigma = DMatrix::zeros(dim, dim);
    for (i, p) in points.iter().enumerate() {
        let v = DVector::from_column_slice(p);
        sigma += (&v * v.transpose()) * u[i];
    }
    sigma -= &center * center.transpose();
    let mut shape = sigma
        .try_inverse()
        .ok_or_else(|| Error::Geometry("degenerate point set (lower-dimensional)".into()))?
        / dim as f64;
    // Inflate so every point is inside, making containment unconditional.
    let mut worst = 0.0f64;
    for p in points {
        let d = DVector::from_column_slice(p) - &center;
        worst = worst.max((d.transpose() * &shape * &d)[0]);
    }
    if worst > 0.0 {
        shape /= worst;
    }
    Ok(Ellipsoid { center, shape })
}

/// John-position normalization: an affine `L` with `B_1 c L(P) c B_n`.
///
/// `L` maps the enclosing ellipsoid onto the radius-n ball and is then
/// rescaled so the outer inclusion is exact; the inner inclusion margin is
/// verified against every facet and reported as an error if it fails.
pub fn normalize(poly: &ConvexPolytope) -> Result<AffineMap> {
    let dim = poly.dim();
    let ell = mvee(poly.vertices())?;
    let eig = nalgebra::SymmetricEigen::new(ell.shape.clone());
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(Error::Geometry("ellipsoid shape not positive definite".into()));
    }
    let sqrt_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.sqrt()));
    let root = &eig.eigenvectors * sqrt_diag * eig.eigenvectors.transpose();
    let linear = root * dim as f64;
    let translation = -(&linear * &ell.center);
    let candidate = AffineMap::new(linear, translation)?;
    // Rescale so the farthest vertex lands exactly on |y| = n.
    let rmax = poly
        .vertices()
        .iter()
        .map(|v| {
            let y = candidate.apply(v);
            y.iter().map(|c| c * c).sum::<f64>().sqrt()
        })
        .fold(0.0f64, f64::max);
    let s = dim as f64 / rmax;
    let map = AffineMap::new(
        candidate.linear() * s,
        DVector::from_column_slice(candidate.translation_slice()) * s,
    )?;
    let image = poly.transform(&map)?;
    let inner = image
        .halfspaces()
        .iter()
        .map(|h| h.offset)
        .fold(f64::INFINITY, f64::min);
    if inner < 1.0 - 1e-8 {
        return Err(Error::NonConvergence {
            what: "John normalization inner inclusion",
            iterations: MAX_ITERS,
            residual: 1.0 - inner,
        });
    }
    Ok(map)
}
