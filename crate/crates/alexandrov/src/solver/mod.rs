//! Dirichlet Monge-Ampère solver in the Alexandrov sense: prescribe the
//! per-node subdifferential cell masses (exact for PL convex functions) and
//! lower node values monotonically from the boundary-data envelope until
//! every interior mass matches its target.
//!
//! One sweep evaluates all cells against the *same* snapshot of values,
//! computes for each deficit node the exact lowering that would match its
//! target with the others frozen, and applies all updates at once. With
//! frozen neighbors above their final values that per-node lowering never
//! crosses the solution, so the iterate sequence decreases pointwise and
//! stays above the fixed point; masses never overshoot their targets after
//! the first sweep. All mass evaluations within a sweep run in parallel;
//! updates are applied by the single coordinating loop.

pub mod mesh;

use crate::convexfn::{self, cells, NodeSet, PLConvexFunction};
use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::AffineMap;
use crate::vecmath::dot;
use mesh::SimplicialMesh;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Analytic density forms with a scale factor (the factor keeps scaling
/// experiments exact).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Density {
    pub form: DensityForm,
    #[serde(default = "one")]
    pub factor: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityForm {
    Zero,
    One,
    OnePlusX1,
}

impl Density {
    pub fn constant(c: f64) -> Self {
        Density {
            form: DensityForm::One,
            factor: c,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let base = match self.form {
            DensityForm::Zero => 0.0,
            DensityForm::One => 1.0,
            DensityForm::OnePlusX1 => 1.0 + x[0],
        };
        self.factor * base
    }
}

/// Boundary data: analytic forms or explicit values at boundary nodes.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryData {
    Zero,
    /// `|x|^2 / 2`
    HalfSquaredNorm,
    Affine { slope: Vec<f64>, offset: f64 },
    /// Values listed in boundary-node order.
    Table(Vec<f64>),
}

impl BoundaryData {
    /// Values at the boundary nodes of `nodes`, in boundary-node order.
    pub fn values(&self, nodes: &NodeSet) -> Result<Vec<f64>> {
        let bd = nodes.boundary_nodes();
        match self {
            BoundaryData::Zero => Ok(vec![0.0; bd.len()]),
            BoundaryData::HalfSquaredNorm => Ok(bd
                .iter()
                .map(|&b| 0.5 * dot(nodes.point(b), nodes.point(b)))
                .collect()),
            BoundaryData::Affine { slope, offset } => Ok(bd
                .iter()
                .map(|&b| dot(slope, nodes.point(b)) + offset)
                .collect()),
            BoundaryData::Table(v) => {
                if v.len() != bd.len() {
                    return Err(Error::InvalidInput(format!(
                        "boundary table has {} entries for {} boundary nodes",
                        v.len(),
                        bd.len()
                    )));
                }
                Ok(v.clone())
            }
        }
    }
}

/// The Dirichlet problem data on a mesh.
#[derive(Clone, Debug)]
pub struct MAProblem {
    pub mesh: SimplicialMesh,
    pub density: Density,
    /// Upper density bound (capital lambda).
    pub lambda_upper: f64,
    /// Optional positive lower bound.
    pub lambda_lower: Option<f64>,
    pub boundary: BoundaryData,
}

impl MAProblem {
    /// Check the density bounds at quadrature points and certify the
    /// boundary data as the restriction of a convex function (envelope
    /// idempotence on the boundary graph).
    pub fn validate(&self) -> Result<()> {
        for s in &self.mesh.simplices {
            let c = self.mesh.simplex_centroid(s);
            let f = self.density.eval(&c);
            if f < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "density negative at {c:?}: {f}"
                )));
            }
            if f > self.lambda_upper + 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "density {f} exceeds upper bound {}",
                    self.lambda_upper
                )));
            }
            if let Some(lo) = self.lambda_lower {
                if f + 1e-12 < lo {
                    return Err(Error::InvalidInput(format!(
                        "density {f} below lower bound {lo}"
                    )));
                }
            }
        }
        let nodes = &self.mesh.nodes;
        let g = self.boundary.values(nodes)?;
        let bpts: Vec<Vec<f64>> = nodes
            .boundary_nodes()
            .iter()
            .map(|&b| nodes.point(b).to_vec())
            .collect();
        let env = convexfn::convex_envelope(&bpts, &g)?;
        for (k, (&gv, ev)) in g.iter().zip(&env.values).enumerate() {
            if (gv - ev).abs() > 1e-9 * (1.0 + gv.abs()) {
                return Err(Error::InvalidInput(format!(
                    "boundary data is not convex at boundary node {k}: g = {gv}, envelope = {ev}"
                )));
            }
        }
        Ok(())
    }

    /// Target cell masses: integral of the density over the barycentric
    /// dual cell of each interior node (midpoint quadrature per simplex;
    /// each simplex donates an equal share to its vertices).
    pub fn target_masses(&self) -> Result<Vec<f64>> {
        let nodes = &self.mesh.nodes;
        let mut masses = vec![0.0; nodes.len()];
        let share = 1.0 / (self.mesh.dim() + 1) as f64;
        for s in &self.mesh.simplices {
            let c = self.mesh.simplex_centroid(s);
            let f = self.density.eval(&c);
            if f < 0.0 {
                return Err(Error::InvalidInput("negative density sample".into()));
            }
            let w = self.mesh.simplex_volume(s) * f * share;
            for &vi in s {
                masses[vi] += w;
            }
        }
        for &b in nodes.boundary_nodes() {
            masses[b] = 0.0;
        }
        Ok(masses)
    }

    /// Full-length boundary value vector (entries at interior nodes unused).
    pub fn boundary_value_vec(&self) -> Result<Vec<f64>> {
        let nodes = &self.mesh.nodes;
        let g = self.boundary.values(nodes)?;
        let mut out = vec![0.0; nodes.len()];
        for (k, &b) in nodes.boundary_nodes().iter().enumerate() {
            out[b] = g[k];
        }
        Ok(out)
    }
}

/// Sweep discipline: Gauss-Seidel applies each lowering immediately
/// (fewer sweeps; the default on a single core), Jacobi evaluates every
/// mass against one snapshot (mass evaluations run in parallel) and lets
/// the coordinator apply all updates at once.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    GaussSeidel,
    Jacobi,
}

/// Iteration controls.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveParams {
    /// Absolute per-node mass residual tolerance.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Fraction of the per-node exact lowering applied per sweep (1 = the
    /// exact coordinatewise solve; < 1 damps).
    #[serde(default = "one")]
    pub damping: f64,
    #[serde(default = "default_mode")]
    pub mode: SweepMode,
}

fn default_mode() -> SweepMode {
    SweepMode::GaussSeidel
}

impl Default for SolveParams {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_sweeps: 20_000,
            damping: 1.0,
            mode: SweepMode::GaussSeidel,
        }
    }
}

/// Result of a solve.
#[derive(Debug)]
pub struct SolveReport {
    pub solution: PLConvexFunction,
    /// Signed residual (mass - target) per node.
    pub residuals: Vec<f64>,
    pub sweeps: usize,
    pub max_residual: f64,
    /// The iterate stayed pointwise nonincreasing (asserted each sweep).
    pub monotone: bool,
}

/// Solve the discrete Dirichlet problem.
pub fn solve(problem: &MAProblem, params: &SolveParams) -> Result<SolveReport> {
    problem.validate()?;
    let targets = problem.target_masses()?;
    solve_with_targets(&problem.mesh.nodes, &targets, &problem.boundary_value_vec()?, params)
}

/// Solve with explicit targets (used directly by the equivariance checks,
/// where targets transform exactly).
pub fn solve_with_targets(
    nodes: &Arc<NodeSet>,
    targets: &[f64],
    boundary_values: &[f64],
    params: &SolveParams,
) -> Result<SolveReport> {
    if !(params.damping > 0.0 && params.damping <= 1.0) {
        return Err(Error::InvalidInput("damping must lie in (0, 1]".into()));
    }
    let interior = nodes.interior().to_vec();
    // Start from the convex envelope of the boundary data: the pointwise
    // largest convex function with these boundary values (the f = 0
    // solution); iterates only descend from here.
    let bpts: Vec<Vec<f64>> = nodes
        .boundary_nodes()
        .iter()
        .map(|&b| nodes.point(b).to_vec())
        .collect();
    let bvals: Vec<f64> = nodes
        .boundary_nodes()
        .iter()
        .map(|&b| boundary_values[b])
        .collect();
    let ipts: Vec<Vec<f64>> = interior.iter().map(|&i| nodes.point(i).to_vec()).collect();
    let env_at_interior = convexfn::envelope_values_at(&bpts, &bvals, &ipts);
    let mut values = boundary_values.to_vec();
    for (&i, &v) in interior.iter().zip(&env_at_interior) {
        values[i] = v;
    }

    let mut deltas_hint = vec![0.0f64; nodes.len()];
    let mut monotone = true;
    let mut sweeps = 0;
    let mut max_residual = f64::INFINITY;
    let mut residuals = vec![0.0; nodes.len()];
    while sweeps < params.max_sweeps {
        sweeps += 1;
        // Root solves run loose while residuals are large and tighten as
        // convergence approaches; the stopping test always uses exact
        // evaluations.
        let node_tol = (0.02 * max_residual).max(0.1 * params.tol).min(1.0);
        match params.mode {
            SweepMode::GaussSeidel => {
                let mut sweep_max = 0.0f64;
                let mut moved = false;
                for &i in &interior {
                    let ev = cells::eval_cell(nodes, &values, i, 0.0);
                    let r = ev.volume - targets[i];
                    residuals[i] = r;
                    sweep_max = sweep_max.max(r.abs());
                    if r < -node_tol {
                        let d = solve_node_lowering(
                            nodes,
                            &values,
                            i,
                            &ev,
                            targets[i],
                            node_tol,
                            deltas_hint[i],
                        );
                        if d > 0.0 {
                            values[i] -= params.damping * d;
                            deltas_hint[i] = d;
                            moved = true;
                        }
                        if d < 0.0 {
                            monotone = false;
                        }
                    }
                }
                max_residual = sweep_max;
                if !moved && max_residual <= params.tol {
                    return Ok(SolveReport {
                        solution: PLConvexFunction::from_values_unchecked(nodes.clone(), values),
                        residuals,
                        sweeps,
                        max_residual,
                        monotone,
                    });
                }
            }
            SweepMode::Jacobi => {
                let evals: Vec<cells::CellEval> =
                    exec::map_slice(&interior, |&i| cells::eval_cell(nodes, &values, i, 0.0));
                max_residual = 0.0;
                for (&i, ev) in interior.iter().zip(&evals) {
                    residuals[i] = ev.volume - targets[i];
                    max_residual = max_residual.max(residuals[i].abs());
                }
                if max_residual <= params.tol {
                    return Ok(SolveReport {
                        solution: PLConvexFunction::from_values_unchecked(nodes.clone(), values),
                        residuals,
                        sweeps,
                        max_residual,
                        monotone,
                    });
                }
                let lowerings: Vec<f64> = {
                    let values_ref = &values;
                    let hints = &deltas_hint;
                    exec::map_range(interior.len(), |k| {
                        let i = interior[k];
                        if targets[i] - evals[k].volume <= node_tol {
                            return 0.0;
                        }
                        solve_node_lowering(
                            nodes,
                            values_ref,
                            i,
                            &evals[k],
                            targets[i],
                            node_tol,
                            hints[i],
                        )
                    })
                };
                for (&i, &d) in interior.iter().zip(&lowerings) {
                    if d < 0.0 {
                        monotone = false;
                    }
                    values[i] -= params.damping * d;
                    if d > 0.0 {
                        deltas_hint[i] = d;
                    }
                }
            }
        }
    }
    Err(Error::NonConvergence {
        what: "mass-matching sweep iteration",
        iterations: sweeps,
        residual: max_residual,
    })
}

/// Find delta >= 0 with cell mass(u_i - delta) = target, via doubling
/// bracket on full evaluations and regula falsi on the binding subset
/// (exact for lowerings inside the bracket, under the bracket-top box).
fn solve_node_lowering(
    nodes: &Arc<NodeSet>,
    values: &[f64],
    i: usize,
    at_zero: &cells::CellEval,
    target: f64,
    tol: f64,
    hint: f64,
) -> f64 {
    // The step is solved on the subset of constraints binding at zero
    // lowering plus the near neighbors. The subset reproduces the zero-
    // lowering cell exactly, and at positive lowerings it can only
    // overestimate the mass, so the computed step never exceeds the exact
    // per-node lowering: conservative and safe. Missed far constraints
    // surface in the next sweep's exact evaluation.
    let mut subset = at_zero.binding.clone();
    for &j in nodes.neighbors(i) {
        if !subset.contains(&j) {
            subset.push(j);
        }
    }
    let h_local = crate::vecmath::dist(nodes.point(i), nodes.point(nodes.neighbors(i)[0]));
    let mut hi = if hint > 0.0 { hint } else { 0.25 * h_local };
    let mut top_box: Option<cells::CellBox> = None;
    let mut m_hi = 0.0;
    let mut guard = 0;
    loop {
        match cells::cell_box(nodes, values, i, hi) {
            cells::BoxOutcome::Bounded(b) => {
                m_hi = cells::eval_cell_subset(nodes, values, i, hi, &subset, &b);
                top_box = Some(b);
            }
            // Still empty at this lowering: keep growing the bracket.
            cells::BoxOutcome::Empty => m_hi = 0.0,
            cells::BoxOutcome::Unbounded => return 0.0,
        }
        if m_hi >= target || guard >= 80 {
            break;
        }
        hi *= 2.0;
        guard += 1;
    }
    let Some(top_box) = top_box else { return 0.0 };
    if m_hi < target {
        return hi; // pathological; sweep-level residual check will catch it
    }
    let m = |delta: f64| cells::eval_cell_subset(nodes, values, i, delta, &subset, &top_box);
    let (mut lo, mut flo) = (0.0, at_zero.volume - target);
    let (mut up, mut fup) = (hi, m_hi - target);
    // Illinois-modified regula falsi: guarantees both endpoints move, which
    // plain false position does not on convex mass profiles.
    let mut side = 0i8;
    for _ in 0..80 {
        if fup - flo <= 0.0 {
            break;
        }
        let mut mid = up - fup * (up - lo) / (fup - flo);
        if !(mid > lo && mid < up) {
            mid = 0.5 * (lo + up);
        }
        let fm = m(mid) - target;
        if fm.abs() <= tol {
            return mid;
        }
        if fm < 0.0 {
            lo = mid;
            flo = fm;
            if side == -1 {
                fup *= 0.5;
            }
            side = -1;
        } else {
            up = mid;
            fup = fm;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
        if up - lo < 1e-15 * (1.0 + up) {
            break;
        }
    }
    0.5 * (lo + up)
}

/// Outcome of the discrete comparison principle check.
#[derive(Debug)]
pub enum ComparisonOutcome {
    /// Preconditions and conclusion hold; carries max(u - v) over nodes.
    Holds { max_excess: f64 },
    PreconditionFailed { detail: String },
    ConclusionFailed { violations: Vec<(usize, f64)> },
}

/// Check: u <= v on boundary nodes and mass(u) >= mass(v) nodewise imply
/// u <= v everywhere (within `tol`).
pub fn comparison_check(u: &PLConvexFunction, v: &PLConvexFunction, tol: f64) -> ComparisonOutcome {
    let nodes = u.nodes();
    if !Arc::ptr_eq(nodes, v.nodes()) {
        return ComparisonOutcome::PreconditionFailed {
            detail: "functions live on different node sets".into(),
        };
    }
    for &b in nodes.boundary_nodes() {
        if u.value(b) > v.value(b) + tol {
            return ComparisonOutcome::PreconditionFailed {
                detail: format!(
                    "u({b}) = {} exceeds v({b}) = {} on the boundary",
                    u.value(b),
                    v.value(b)
                ),
            };
        }
    }
    let mu = convexfn::ma_measure(u);
    let mv = convexfn::ma_measure(v);
    for &i in nodes.interior() {
        if mu.mass(i) + tol < mv.mass(i) {
            return ComparisonOutcome::PreconditionFailed {
                detail: format!(
                    "mass(u) = {} below mass(v) = {} at node {i}",
                    mu.mass(i),
                    mv.mass(i)
                ),
            };
        }
    }
    let mut violations = Vec::new();
    let mut max_excess = f64::NEG_INFINITY;
    for i in 0..nodes.len() {
        let excess = u.value(i) - v.value(i);
        max_excess = max_excess.max(excess);
        if excess > tol {
            violations.push((i, excess));
        }
    }
    if violations.is_empty() {
        ComparisonOutcome::Holds { max_excess }
    } else {
        ComparisonOutcome::ConclusionFailed { violations }
    }
}

/// Report of the affine equivariance check.
#[derive(Debug)]
pub struct EquivarianceReport {
    pub sup_diff: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Solve the problem, then solve its exact affine image and compare the
/// normalized pullback of the two solutions. Targets and boundary data of
/// the image problem are the exact transforms, so the discrete solutions
/// correspond up to iteration tolerances.
pub fn affine_equivariance_check(
    problem: &MAProblem,
    map: &AffineMap,
    params: &SolveParams,
    value_tol: f64,
) -> Result<EquivarianceReport> {
    let report = solve(problem, params)?;
    let nodes = &problem.mesh.nodes;
    let inv = map.inverse()?;
    // Image node set: y = A^{-1} x, so that u' = c * u(A y) lives on it.
    let new_pts: Vec<Vec<f64>> = nodes.points().iter().map(|p| inv.apply(p)).collect();
    let domain = nodes.domain().transform(&inv)?;
    let new_nodes = NodeSet::new(domain, new_pts)?;
    // Scale of Lemma-2.8 type with Lambda = 1: c = |det L|^{-2/n}.
    let n = nodes.dim() as f64;
    let c = map.det().abs().powf(-2.0 / n);
    // Masses transform by c^n |det L|: exact at the PL level.
    let mass_factor = c.powf(n) * map.det().abs();
    let targets = problem.target_masses()?;
    let mut new_targets = vec![0.0; new_nodes.len()];
    for i in 0..nodes.len() {
        new_targets[i] = targets[i] * mass_factor;
    }
    for &b in new_nodes.boundary_nodes() {
        new_targets[b] = 0.0;
    }
    let g = problem.boundary_value_vec()?;
    let mut new_boundary = vec![0.0; new_nodes.len()];
    for &b in new_nodes.boundary_nodes() {
        new_boundary[b] = c * g[b];
    }
    // Interior/boundary partitions must agree for the comparison to be
    // node-by-node; affine maps preserve the boundary so they do.
    if new_nodes.boundary_nodes() != nodes.boundary_nodes() {
        return Err(Error::Geometry(
            "affine image changed the boundary node partition".into(),
        ));
    }
    let scaled_params = SolveParams {
        tol: params.tol * mass_factor,
        ..*params
    };
    let transformed = solve_with_targets(&new_nodes, &new_targets, &new_boundary, &scaled_params)?;
    let mut sup_diff = 0.0f64;
    for i in 0..nodes.len() {
        let expected = c * report.solution.value(i);
        sup_diff = sup_diff.max((transformed.solution.value(i) - expected).abs());
    }
    Ok(EquivarianceReport {
        sup_diff,
        tolerance: value_tol,
        pass: sup_diff <= value_tol,
    })
}

#[cfg(test)]
mod tests;
