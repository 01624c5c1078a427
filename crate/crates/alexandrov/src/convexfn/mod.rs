//! Piecewise-linear convex functions, their Alexandrov Monge-Ampère
//! measure, convex envelopes, moduli of continuity, and the comparison /
//! subadditivity checks built on them.

pub mod cells;
pub mod modulus;
pub mod nodes;

pub use modulus::ModulusCurve;
pub use nodes::NodeSet;

use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::lp::{self, LinCon, LpResult};
use crate::vecmath::{dot, norm};
use std::sync::Arc;

const LP_BOUND: f64 = 1e8;
/// Cells with Chebyshev radius above this count as nonempty (node active).
const ACTIVE_TOL: f64 = -1e-8;

/// A piecewise-linear convex function: the lower convex envelope of the
/// lifted node values. Nodes whose lifted point sits strictly above the
/// envelope are flagged inactive.
#[derive(Clone, Debug)]
pub struct PLConvexFunction {
    nodes: Arc<NodeSet>,
    values: Vec<f64>,
    active: Vec<bool>,
}

impl PLConvexFunction {
    /// Wraps a value vector without certifying convexity. Used by iteration
    /// internals; callers that need the invariants checked use
    /// [`PLConvexFunction::from_convex_values`] or [`envelope_of`].
    pub fn from_values_unchecked(nodes: Arc<NodeSet>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), nodes.len());
        let active = vec![true; values.len()];
        Self {
            nodes,
            values,
            active,
        }
    }

    /// Wraps values after certifying that every node is active, i.e. the
    /// values already lie on their own lower convex envelope.
    pub fn from_convex_values(nodes: Arc<NodeSet>, values: Vec<f64>) -> Result<Self> {
        let f = Self::from_values_unchecked(nodes, values);
        for i in 0..f.nodes.len() {
            if !f.is_active(i) {
                return Err(Error::InvalidInput(format!(
                    "node {i} lies strictly above the convex envelope"
                )));
            }
        }
        Ok(f)
    }

    /// Lower convex envelope of arbitrary node values.
    pub fn envelope_of(nodes: Arc<NodeSet>, raw_values: &[f64]) -> Result<Self> {
        let env = convex_envelope(nodes.points(), raw_values)?;
        Ok(Self {
            nodes,
            values: env.values,
            active: env.active,
        })
    }

    pub fn nodes(&self) -> &Arc<NodeSet> {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn active_flags(&self) -> &[bool] {
        &self.active
    }

    /// Exact activity test: is the subdifferential cell of node `i`
    /// nonempty under all constraints?
    pub fn is_active(&self, i: usize) -> bool {
        let cons = cell_constraints(self.nodes.points(), &self.values, i);
        match lp::chebyshev_center(self.nodes.dim(), &cons, LP_BOUND) {
            Some((_, r)) => r >= ACTIVE_TOL,
            None => false,
        }
    }

    /// Pointwise sum on a shared node set.
    pub fn add(&self, other: &PLConvexFunction) -> Result<PLConvexFunction> {
        if !Arc::ptr_eq(&self.nodes, &other.nodes) {
            return Err(Error::InvalidInput("functions live on different node sets".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Ok(PLConvexFunction::from_values_unchecked(
            self.nodes.clone(),
            values,
        ))
    }

    /// Add the affine function `p . x + c`.
    pub fn add_affine(&self, p: &[f64], c: f64) -> PLConvexFunction {
        let values = (0..self.nodes.len())
            .map(|i| self.values[i] + dot(p, self.nodes.point(i)) + c)
            .collect();
        PLConvexFunction {
            nodes: self.nodes.clone(),
            values,
            active: self.active.clone(),
        }
    }

    /// Evaluate the function at an arbitrary point of its domain via the
    /// supporting-plane LP (the PL convex function is the upper envelope of
    /// its affine minorants).
    pub fn eval(&self, x: &[f64]) -> f64 {
        envelope_values_at(self.nodes.points(), &self.values, std::slice::from_ref(&x.to_vec()))[0]
    }
}

/// Diagnostics from a measure computation.
#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct MeasureDiagnostics {
    pub empty_cells: usize,
    pub degenerate_cells: usize,
}

/// The Monge-Ampère measure of a PL convex function: one mass per node
/// (zero at boundary nodes, whose subdifferentials are unbounded).
#[derive(Clone, Debug)]
pub struct MAMeasure {
    masses: Vec<f64>,
    total: f64,
    pub diagnostics: MeasureDiagnostics,
}

impl MAMeasure {
    pub fn mass(&self, i: usize) -> f64 {
        self.masses[i]
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total(&self) -> f64 {
        self.total
    }
}

/// Alexandrov measure: per interior node, the volume of the subdifferential
/// cell. Cells are computed independently (and in parallel); the interiors
/// are pairwise disjoint so the masses sum to the measure of the union.
pub fn ma_measure(u: &PLConvexFunction) -> MAMeasure {
    let nodes = u.nodes();
    let per_interior: Vec<cells::CellEval> = exec::map_slice(nodes.interior(), |&i| {
        cells::eval_cell(nodes, u.values(), i, 0.0)
    });
    assemble_measure(u, per_interior)
}

/// Sequential twin of [`ma_measure`] (benchmark baseline).
pub fn ma_measure_seq(u: &PLConvexFunction) -> MAMeasure {
    let nodes = u.nodes();
    let per_interior: Vec<cells::CellEval> = nodes
        .interior()
        .iter()
        .map(|&i| cells::eval_cell(nodes, u.values(), i, 0.0))
        .collect();
    assemble_measure(u, per_interior)
}

fn assemble_measure(u: &PLConvexFunction, per_interior: Vec<cells::CellEval>) -> MAMeasure {
    let nodes = u.nodes();
    let mut masses = vec![0.0; nodes.len()];
    let mut diagnostics = MeasureDiagnostics::default();
    let mut total = 0.0;
    for (&i, cell) in nodes.interior().iter().zip(&per_interior) {
        masses[i] = cell.volume;
        total += cell.volume;
        if cell.vertices.is_empty() {
            diagnostics.empty_cells += 1;
        } else if cell.degenerate {
            diagnostics.degenerate_cells += 1;
        }
    }
    MAMeasure {
        masses,
        total,
        diagnostics,
    }
}

/// The subdifferential cell of a single node (vertices and volume).
pub fn subdifferential_cell(u: &PLConvexFunction, i: usize) -> cells::CellEval {
    cells::eval_cell(u.nodes(), u.values(), i, 0.0)
}

fn cell_constraints(points: &[Vec<f64>], values: &[f64], i: usize) -> Vec<LinCon> {
    let xi = &points[i];
    let dim = xi.len();
    points
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(j, xj)| {
            let d: Vec<f64> = (0..dim).map(|k| xj[k] - xi[k]).collect();
            LinCon::new(d, values[j] - values[i])
        })
        .collect()
}

/// Result of a convex envelope computation.
#[derive(Clone, Debug)]
pub struct EnvelopeResult {
    pub values: Vec<f64>,
    pub active: Vec<bool>,
}

/// Lower convex envelope of scattered data. Points spanning a proper
/// affine subspace are reduced to intrinsic coordinates first, so the
/// one-dimensional analog embedded in the plane works as expected.
pub fn convex_envelope(points: &[Vec<f64>], values: &[f64]) -> Result<EnvelopeResult> {
    if points.len() != values.len() || points.is_empty() {
        return Err(Error::InvalidInput("points/values mismatch".into()));
    }
    let dim = points[0].len();
    let (coords, rank) = intrinsic_coordinates(points)?;
    if rank == 0 {
        return Err(Error::InvalidInput("all points coincide".into()));
    }
    if rank < dim {
        return envelope_in_dim(&coords, values, rank);
    }
    envelope_in_dim(points, values, dim)
}

fn envelope_in_dim(points: &[Vec<f64>], values: &[f64], dim: usize) -> Result<EnvelopeResult> {
    let n = points.len();
    if n < dim + 1 {
        return Err(Error::InvalidInput(
            "need at least dim+1 points for an envelope".into(),
        ));
    }
    let active: Vec<bool> = exec::map_range(n, |i| {
        let cons = cell_constraints(points, values, i);
        match lp::chebyshev_center(dim, &cons, LP_BOUND) {
            Some((_, r)) => r >= ACTIVE_TOL,
            None => false,
        }
    });
    let bound = slope_box_bound(points, values, dim);
    let env_values: Vec<f64> = exec::map_range(n, |i| {
        if active[i] {
            values[i]
        } else {
            envelope_value_lp(points, values, &points[i], dim, bound)
        }
    });
    Ok(EnvelopeResult {
        values: env_values,
        active,
    })
}

/// Box size for supporting-plane LPs. Optimal faces of the value LP can be
/// unbounded (slopes free to run along a supporting ridge); boxing them at
/// a generous multiple of the data's pairwise slope scale keeps the value
/// arithmetic away from cancellation at huge coordinates.
fn slope_box_bound(points: &[Vec<f64>], values: &[f64], dim: usize) -> f64 {
    let n = points.len();
    let mut s_max = 0.0f64;
    let mut v_max = 1.0f64;
    // Exact pair maximum for modest sets, sampled rows otherwise.
    let step = if n <= 1500 { 1 } else { n / 1200 + 1 };
    for i in (0..n).step_by(step) {
        v_max = v_max.max(values[i].abs());
        for j in (i + 1)..n {
            let d2: f64 = (0..dim)
                .map(|k| (points[i][k] - points[j][k]).powi(2))
                .sum();
            if d2 > 1e-24 {
                s_max = s_max.max((values[i] - values[j]).abs() / d2.sqrt());
            }
        }
    }
    1e5 * (1.0 + s_max + v_max)
}

/// Envelope value at `q`: maximize `c + p . q` over affine minorants of the
/// lifted data.
fn envelope_value_lp(points: &[Vec<f64>], values: &[f64], q: &[f64], dim: usize, bound: f64) -> f64 {
    let cons: Vec<LinCon> = points
        .iter()
        .zip(values)
        .map(|(x, &v)| {
            let mut a: Vec<f64> = x[..dim].to_vec();
            a.push(1.0);
            LinCon::new(a, v)
        })
        .collect();
    let mut obj: Vec<f64> = q[..dim].iter().map(|v| -v).collect();
    obj.push(-1.0);
    match lp::minimize(dim + 1, &cons, &obj, bound) {
        LpResult::Optimal(sol) => dot(&sol[..dim], &q[..dim]) + sol[dim],
        LpResult::Infeasible => f64::NEG_INFINITY,
    }
}

/// Envelope of the support data evaluated at query points (one LP each).
pub fn envelope_values_at(
    support: &[Vec<f64>],
    support_values: &[f64],
    queries: &[Vec<f64>],
) -> Vec<f64> {
    let dim = support[0].len();
    let bound = slope_box_bound(support, support_values, dim);
    exec::map_slice(queries, |q| {
        envelope_value_lp(support, support_values, q, dim, bound)
    })
}

/// Project points onto their affine hull; returns intrinsic coordinates and
/// the affine rank.
fn intrinsic_coordinates(points: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, usize)> {
    let dim = points[0].len();
    let n = points.len();
    let mut mean = vec![0.0; dim];
    for p in points {
        for k in 0..dim {
            mean[k] += p[k];
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    let mut mat = nalgebra::DMatrix::zeros(n, dim);
    for (r, p) in points.iter().enumerate() {
        for c in 0..dim {
            mat[(r, c)] = p[c] - mean[c];
        }
    }
    let svd = mat.clone().svd(false, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    if smax < 1e-12 {
        return Ok((vec![vec![]; n], 0));
    }
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-9 * smax)
        .count()
        .min(dim);
    let vt = svd.v_t.unwrap();
    let coords: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            (0..rank)
                .map(|r| (0..dim).map(|c| vt[(r, c)] * (p[c] - mean[c])).sum())
                .collect()
        })
        .collect();
    Ok((coords, rank))
}

/// Report from the gradient bound check (slopes of cell vertices against
/// the modulus quotient at each node's boundary distance).
#[derive(Clone, Debug)]
pub struct SubgradientReport {
    /// Smallest value of `bound - |p|` over all interior nodes and cell
    /// vertices; nonnegative means the bound holds everywhere.
    pub worst_margin: f64,
    /// Nodes violating the bound beyond the tolerance: (node, |p|, bound).
    pub violations: Vec<(usize, f64, f64)>,
}

/// Check `|p| <= omega(dist)/dist` for every subgradient vertex of every
/// interior node's cell. The quotient is estimated from the sampled curve
/// and sharpened by the exact boundary-anchored pair slopes (both are
/// lower estimates of the true quotient, so the check errs strict).
pub fn subgradient_bound_check(
    u: &PLConvexFunction,
    curve: &ModulusCurve,
    tol: f64,
) -> SubgradientReport {
    let nodes = u.nodes();
    let slopes = modulus::PairSlopes::build(u);
    let per: Vec<(f64, Option<(usize, f64, f64)>)> = exec::map_slice(nodes.interior(), |&i| {
        let d = nodes.boundary_dist(i);
        let bound = (curve.eval(d) / d).max(slopes.max_slope_at_least(d));
        let cell = cells::eval_cell(nodes, u.values(), i, 0.0);
        let mut margin = f64::INFINITY;
        let mut worst_p = 0.0;
        for v in &cell.vertices {
            let p = norm(v);
            if bound - p < margin {
                margin = bound - p;
                worst_p = p;
            }
        }
        if margin < -tol {
            (margin, Some((i, worst_p, bound)))
        } else {
            (margin, None)
        }
    });
    let mut worst_margin = f64::INFINITY;
    let mut violations = Vec::new();
    for (margin, v) in per {
        worst_margin = worst_margin.min(margin);
        if let Some(v) = v {
            violations.push(v);
        }
    }
    SubgradientReport {
        worst_margin,
        violations,
    }
}

/// Report from the measure superadditivity check.
#[derive(Clone, Debug)]
pub struct SuperadditivityReport {
    /// Worst value of `mass(u+v) - mass(u) - mass(v)` (negative = violation).
    pub worst_gap: f64,
    pub violations: Vec<(usize, f64)>,
}

/// Check `mu_{u+v} >= mu_u + mu_v` nodewise.
pub fn superadditivity_check(
    u: &PLConvexFunction,
    v: &PLConvexFunction,
    tol: f64,
) -> Result<SuperadditivityReport> {
    let sum = u.add(v)?;
    let mu = ma_measure(u);
    let mv = ma_measure(v);
    let ms = ma_measure(&sum);
    let mut worst_gap = f64::INFINITY;
    let mut violations = Vec::new();
    for &i in u.nodes().interior() {
        let gap = ms.mass(i) - mu.mass(i) - mv.mass(i);
        worst_gap = worst_gap.min(gap);
        if gap < -tol {
            violations.push((i, gap));
        }
    }
    Ok(SuperadditivityReport {
        worst_gap,
        violations,
    })
}

#[cfg(test)]
mod tests;
