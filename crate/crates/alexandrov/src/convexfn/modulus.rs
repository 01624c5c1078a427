//! Moduli of continuity for PL convex functions on node sets.
//!
//! For a convex function on a compact domain the modulus reduces to
//! boundary-anchored pairs: omega(d) = sup { u(x) - u(y) : x on the
//! boundary, |x - y| <= d }. On a node set the supremum runs over node
//! pairs, which underestimates the continuum value; the raw curve is then
//! repaired to the smallest majorant satisfying the two structural
//! monotonicity facts (omega nondecreasing, omega(d)/d nonincreasing),
//! which is still a lower bound for the continuum modulus.

use super::PLConvexFunction;
use crate::error::{Error, Result};
use crate::exec;
use crate::vecmath::dist;
use serde::{Deserialize, Serialize};

/// Sampled modulus curve with the convexity-induced monotonicity facts as
/// type invariants.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModulusCurve {
    deltas: Vec<f64>,
    omegas: Vec<f64>,
}

impl ModulusCurve {
    pub fn new(deltas: Vec<f64>, omegas: Vec<f64>) -> Result<Self> {
        if deltas.len() != omegas.len() || deltas.is_empty() {
            return Err(Error::InvalidInput("modulus curve shape mismatch".into()));
        }
        for k in 0..deltas.len() {
            if deltas[k] <= 0.0 || omegas[k] < -1e-12 {
                return Err(Error::InvalidInput("modulus curve needs d > 0, w >= 0".into()));
            }
            if k > 0 {
                if deltas[k] <= deltas[k - 1] {
                    return Err(Error::InvalidInput("deltas must increase".into()));
                }
                let tol = 1e-12 * (1.0 + omegas[k].abs());
                if omegas[k] + tol < omegas[k - 1] {
                    return Err(Error::InvalidInput("omega must be nondecreasing".into()));
                }
                if omegas[k] / deltas[k] > omegas[k - 1] / deltas[k - 1] + 1e-12 {
                    return Err(Error::InvalidInput(
                        "omega(d)/d must be nonincreasing".into(),
                    ));
                }
            }
        }
        Ok(Self { deltas, omegas })
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    /// Piecewise-linear evaluation; before the first sample the curve is the
    /// ray through the first point (consistent with omega(d)/d decreasing),
    /// after the last it stays constant (consistent with monotonicity).
    pub fn eval(&self, delta: f64) -> f64 {
        let d = &self.deltas;
        let w = &self.omegas;
        if delta <= d[0] {
            return w[0] * delta / d[0];
        }
        if delta >= *d.last().unwrap() {
            return *w.last().unwrap();
        }
        let k = d.partition_point(|&x| x < delta);
        let t = (delta - d[k - 1]) / (d[k] - d[k - 1]);
        w[k - 1] + t * (w[k] - w[k - 1])
    }
}

/// Raw node-restricted boundary-anchored modulus at each sample distance.
pub fn raw_boundary_modulus(u: &PLConvexFunction, deltas: &[f64]) -> Vec<f64> {
    let nodes = u.nodes();
    let values = u.values();
    // Per boundary node: (distance, value) to all nodes, sorted by distance,
    // with prefix minima of the values.
    let per_boundary: Vec<(f64, Vec<f64>, Vec<f64>)> =
        exec::map_slice(nodes.boundary_nodes(), |&b| {
            let xb = nodes.point(b);
            let mut pairs: Vec<(f64, f64)> = (0..nodes.len())
                .map(|j| (dist(xb, nodes.point(j)), values[j]))
                .collect();
            pairs.sort_by(|l, r| l.partial_cmp(r).unwrap());
            let dists: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let mut mins = Vec::with_capacity(pairs.len());
            let mut m = f64::INFINITY;
            for p in &pairs {
                m = m.min(p.1);
                mins.push(m);
            }
            (values[b], dists, mins)
        });
    deltas
        .iter()
        .map(|&d| {
            let mut best = 0.0f64;
            for (ub, dists, mins) in &per_boundary {
                let k = dists.partition_point(|&x| x <= d);
                if k > 0 {
                    best = best.max(ub - mins[k - 1]);
                }
            }
            best
        })
        .collect()
}

/// Zero-boundary-data form: sup of -u(y) over nodes within distance d of
/// the boundary node set. Algebraically identical to the boundary-anchored
/// form when u vanishes at boundary nodes.
pub fn raw_zero_boundary_modulus(u: &PLConvexFunction, deltas: &[f64]) -> Vec<f64> {
    let nodes = u.nodes();
    let values = u.values();
    let mut pairs: Vec<(f64, f64)> = (0..nodes.len())
        .map(|i| (nodes.nearest_boundary_node_dist(i), -values[i]))
        .collect();
    pairs.sort_by(|l, r| l.partial_cmp(r).unwrap());
    let dists: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut maxs = Vec::with_capacity(pairs.len());
    let mut m = f64::NEG_INFINITY;
    for p in &pairs {
        m = m.max(p.1);
        maxs.push(m);
    }
    deltas
        .iter()
        .map(|&d| {
            let k = dists.partition_point(|&x| x <= d);
            if k > 0 {
                maxs[k - 1].max(0.0)
            } else {
                0.0
            }
        })
        .collect()
}

/// Modulus curve of a PL convex function on its node set.
pub fn modulus(u: &PLConvexFunction, deltas: &[f64]) -> Result<ModulusCurve> {
    let raw = raw_boundary_modulus(u, deltas);
    Ok(repair(deltas, &raw))
}

/// Enforce the structural invariants on a raw sampled curve: the backward
/// pass extends each sample down-scale along rays (omega(d) >= d/d' *
/// omega(d') for d <= d'), the raw values already being nondecreasing.
pub(crate) fn repair(deltas: &[f64], raw: &[f64]) -> ModulusCurve {
    let n = deltas.len();
    let mut omegas = vec![0.0; n];
    let mut best_ratio = 0.0f64;
    for k in (0..n).rev() {
        best_ratio = best_ratio.max(raw[k] / deltas[k]);
        omegas[k] = raw[k].max(deltas[k] * best_ratio);
    }
    ModulusCurve::new(deltas.to_vec(), omegas).expect("repair yields a valid curve")
}

/// Geometric sample grid for modulus evaluations.
pub fn default_deltas(min: f64, max: f64, count: usize) -> Vec<f64> {
    assert!(min > 0.0 && max > min && count >= 2);
    let ratio = (max / min).powf(1.0 / (count - 1) as f64);
    (0..count).map(|k| min * ratio.powi(k as i32)).collect()
}

/// Exact boundary-anchored pair slopes, queryable as "the largest slope
/// (u(x)-u(y))/|x-y| over pairs at distance at least d". Because
/// omega(d)/d is nonincreasing, every such slope is a lower estimate of
/// omega(d)/d, and at the witness pair it is exact; this avoids the
/// sampling gaps of a fixed delta grid.
pub struct PairSlopes {
    /// Per boundary node: distances ascending and suffix maxima of slopes.
    per_boundary: Vec<(Vec<f64>, Vec<f64>)>,
}

impl PairSlopes {
    pub fn build(u: &PLConvexFunction) -> Self {
        let nodes = u.nodes();
        let values = u.values();
        let per_boundary = exec::map_slice(nodes.boundary_nodes(), |&b| {
            let xb = nodes.point(b);
            let ub = values[b];
            let mut pairs: Vec<(f64, f64)> = (0..nodes.len())
                .filter(|&j| j != b)
                .map(|j| {
                    let d = dist(xb, nodes.point(j));
                    (d, (ub - values[j]) / d)
                })
                .collect();
            pairs.sort_by(|l, r| l.0.partial_cmp(&r.0).unwrap());
            let dists: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let mut suffix = vec![f64::NEG_INFINITY; pairs.len()];
            let mut m = f64::NEG_INFINITY;
            for k in (0..pairs.len()).rev() {
                m = m.max(pairs[k].1);
                suffix[k] = m;
            }
            (dists, suffix)
        });
        Self { per_boundary }
    }

    /// Largest pair slope at distance >= d (0 when no such pair exists).
    pub fn max_slope_at_least(&self, d: f64) -> f64 {
        let mut best = 0.0f64;
        for (dists, suffix) in &self.per_boundary {
            let k = dists.partition_point(|&x| x < d);
            if k < dists.len() {
                best = best.max(suffix[k]);
            }
        }
        best
    }
}
