//! Subdifferential cell kernels.
//!
//! For an active node x_i of a PL convex function, the subdifferential is
//! exactly the polyhedron
//!
//!     { p : p . (x_j - x_i) <= u_j - u_i  for every node j },
//!
//! by convex duality with the lifted lower hull (a slope supporting the
//! lifted point i under all lifted points is an affine minorant of the
//! envelope touching at x_i, and conversely). Cells of distinct nodes have
//! disjoint interiors for arbitrary value vectors, so per-node volumes can
//! be summed into a measure even mid-iteration in the solver.
//!
//! Cost control: the cell is clipped from a directional-bound box (O(1)
//! from exactly-aligned axis neighbors on grids, a small LP otherwise)
//! using the nearest neighbors first, after which all remaining
//! constraints are scanned with an O(1) enclosing-ball rejection over the
//! flat coordinate buffer. Constraints that do cut are recorded; within a
//! bracket, re-evaluations at smaller lowerings restrict to that binding
//! set exactly.

use super::nodes::NodeSet;
use crate::geometry::clip::{clip_polygon, polygon_area, rect_polygon, Polyhedron3};
use crate::geometry::lp::{self, LinCon};

const LP_BOUND: f64 = 1e8;
/// A constraint is only worth cutting when it removes material deeper than
/// this (relative to the cell box scale). Skipping shallower cuts bounds
/// the volume overestimate by depth times face area, which is far below
/// every mass tolerance in use, and keeps massively tangent configurations
/// (all-equal values at the start of a solve) from exploding the facet
/// count.
const CUT_DEPTH_REL: f64 = 1e-11;

#[derive(Clone, Debug)]
pub struct CellEval {
    pub volume: f64,
    /// Vertices of the cell in gradient space (empty when the cell is empty).
    pub vertices: Vec<Vec<f64>>,
    /// Node indices whose constraints participated in cutting the cell.
    pub binding: Vec<usize>,
    /// Cell came out empty or with (near-)zero volume.
    pub degenerate: bool,
}

impl CellEval {
    fn empty() -> Self {
        CellEval {
            volume: 0.0,
            vertices: Vec::new(),
            binding: Vec::new(),
            degenerate: true,
        }
    }
}

/// A box certified to contain the cell of node `i` at lowering `delta`.
#[derive(Clone, Debug)]
pub struct CellBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// Outcome of a bounding-box computation. An empty cell (infeasible
/// constraints at this lowering) is very different from an unbounded one:
/// empty cells gain volume once the lowering grows, unbounded cells never
/// get measured.
#[derive(Clone, Debug)]
pub enum BoxOutcome {
    Bounded(CellBox),
    Empty,
    Unbounded,
}

/// Directional bounds from exactly-aligned axis neighbors (grids), falling
/// back to LPs over the neighbor constraints, then over all constraints.
pub fn cell_box(nodes: &NodeSet, values: &[f64], i: usize, delta: f64) -> BoxOutcome {
    let dim = nodes.dim();
    if let Some(axis) = nodes.axis_neighbors(i) {
        let ui = values[i] - delta;
        let mut lo = vec![0.0; dim];
        let mut hi = vec![0.0; dim];
        for k in 0..dim {
            let (jp, hp) = axis[2 * k];
            let (jm, hm) = axis[2 * k + 1];
            // p . (h e_k) <= u_j - u_i bounds p_k directly.
            hi[k] = (values[jp] - ui) / hp;
            lo[k] = -(values[jm] - ui) / hm;
            if lo[k] > hi[k] {
                // Empty cell; give the clipper a consistent sliver.
                let mid = 0.5 * (lo[k] + hi[k]);
                lo[k] = mid;
                hi[k] = mid;
            }
            // The box faces here coincide with real constraints; keep the
            // pad below the cut-depth threshold so the exact constraint
            // can supersede the face by tangency, not by a sliver cut.
            let pad = 1e-15 * (1.0 + lo[k].abs() + hi[k].abs());
            lo[k] -= pad;
            hi[k] += pad;
        }
        return BoxOutcome::Bounded(CellBox { lo, hi });
    }
    match seed_box_lp(nodes, values, i, delta, nodes.neighbors(i)) {
        BoxOutcome::Unbounded => {
            let all: Vec<usize> = (0..nodes.len()).collect();
            seed_box_lp(nodes, values, i, delta, &all)
        }
        done => done,
    }
}

fn seed_box_lp(
    nodes: &NodeSet,
    values: &[f64],
    i: usize,
    delta: f64,
    seed: &[usize],
) -> BoxOutcome {
    let dim = nodes.dim();
    let xi = nodes.point(i);
    let ui = values[i] - delta;
    let cons: Vec<LinCon> = seed
        .iter()
        .filter(|&&j| j != i)
        .map(|&j| {
            let xj = nodes.point(j);
            let d: Vec<f64> = (0..dim).map(|k| xj[k] - xi[k]).collect();
            LinCon::new(d, values[j] - ui)
        })
        .collect();
    let mut lo = vec![0.0; dim];
    let mut hi = vec![0.0; dim];
    for k in 0..dim {
        let mut dir = vec![0.0; dim];
        dir[k] = 1.0;
        let Some(up) = lp::maximize_direction(dim, &cons, &dir, LP_BOUND) else {
            return BoxOutcome::Empty;
        };
        dir[k] = -1.0;
        let Some(down) = lp::maximize_direction(dim, &cons, &dir, LP_BOUND) else {
            return BoxOutcome::Empty;
        };
        if up >= 0.9 * LP_BOUND || down >= 0.9 * LP_BOUND {
            return BoxOutcome::Unbounded;
        }
        let pad = 1e-12 * (1.0 + up.abs() + down.abs());
        hi[k] = up + pad;
        lo[k] = -down - pad;
    }
    BoxOutcome::Bounded(CellBox { lo, hi })
}

/// Evaluate the cell of node `i` with its value lowered by `delta >= 0`.
pub fn eval_cell(nodes: &NodeSet, values: &[f64], i: usize, delta: f64) -> CellEval {
    match cell_box(nodes, values, i, delta) {
        BoxOutcome::Bounded(cbox) => eval_cell_with_box(nodes, values, i, delta, &cbox),
        // Empty cell, or unbounded (boundary-like node): nothing to measure.
        BoxOutcome::Empty | BoxOutcome::Unbounded => CellEval::empty(),
    }
}

/// Evaluate with a caller-supplied containing box.
pub fn eval_cell_with_box(
    nodes: &NodeSet,
    values: &[f64],
    i: usize,
    delta: f64,
    cbox: &CellBox,
) -> CellEval {
    match nodes.dim() {
        2 => eval_cell_2d(nodes, values, i, delta, cbox),
        3 => eval_cell_3d(nodes, values, i, delta, cbox),
        d => panic!("subdifferential cells implemented for n = 2, 3 (got {d})"),
    }
}

/// Cell volume using only the constraints in `subset` (plus the box seed).
/// Exact whenever `subset` contains the binding set of a superset cell and
/// the box contains that superset cell.
pub fn eval_cell_subset(
    nodes: &NodeSet,
    values: &[f64],
    i: usize,
    delta: f64,
    subset: &[usize],
    cbox: &CellBox,
) -> f64 {
    let dim = nodes.dim();
    let xi = nodes.point(i);
    let ui = values[i] - delta;
    let eps = 1e-14 * box_scale(cbox);
    let cut_eps = CUT_DEPTH_REL * box_scale(cbox);
    match dim {
        2 => {
            let mut poly = rect_polygon([cbox.lo[0], cbox.lo[1]], [cbox.hi[0], cbox.hi[1]]);
            for &j in subset {
                if j == i || poly.is_empty() {
                    continue;
                }
                let xj = nodes.point(j);
                let a = [xj[0] - xi[0], xj[1] - xi[1]];
                let c = values[j] - ui;
                let sup = poly
                    .iter()
                    .map(|p| a[0] * p[0] + a[1] * p[1])
                    .fold(f64::NEG_INFINITY, f64::max);
                if sup <= c + cut_eps {
                    continue;
                }
                poly = clip_polygon(&poly, a, c, eps);
            }
            polygon_area(&poly)
        }
        3 => {
            let mut poly = Some(Polyhedron3::cuboid(
                [cbox.lo[0], cbox.lo[1], cbox.lo[2]],
                [cbox.hi[0], cbox.hi[1], cbox.hi[2]],
            ));
            for &j in subset {
                if j == i {
                    continue;
                }
                let Some(ref cur) = poly else { return 0.0 };
                let xj = nodes.point(j);
                let a = [xj[0] - xi[0], xj[1] - xi[1], xj[2] - xi[2]];
                let c = values[j] - ui;
                let sup = cur
                    .vertices
                    .iter()
                    .map(|p| a[0] * p[0] + a[1] * p[1] + a[2] * p[2])
                    .fold(f64::NEG_INFINITY, f64::max);
                if sup <= c + cut_eps {
                    continue;
                }
                poly = cur.clip(a, c, eps);
            }
            poly.map(|p| p.volume()).unwrap_or(0.0)
        }
        d => panic!("subdifferential cells implemented for n = 2, 3 (got {d})"),
    }
}

fn box_scale(cbox: &CellBox) -> f64 {
    1.0 + cbox
        .lo
        .iter()
        .chain(cbox.hi.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
}

fn eval_cell_2d(
    nodes: &NodeSet,
    values: &[f64],
    i: usize,
    delta: f64,
    cbox: &CellBox,
) -> CellEval {
    let flat = nodes.flat_coords();
    let xi0 = flat[2 * i];
    let xi1 = flat[2 * i + 1];
    let ui = values[i] - delta;
    let eps = 1e-14 * box_scale(cbox);
    let cut_eps = CUT_DEPTH_REL * box_scale(cbox);
    let mut poly = rect_polygon([cbox.lo[0], cbox.lo[1]], [cbox.hi[0], cbox.hi[1]]);
    let mut binding: Vec<usize> = Vec::new();
    let mut center = [0.0f64; 2];
    let mut radius2 = 0.0f64;
    let update_ball = |poly: &[[f64; 2]], center: &mut [f64; 2], radius2: &mut f64| {
        if poly.is_empty() {
            *radius2 = 0.0;
            return;
        }
        let n = poly.len() as f64;
        center[0] = poly.iter().map(|p| p[0]).sum::<f64>() / n;
        center[1] = poly.iter().map(|p| p[1]).sum::<f64>() / n;
        *radius2 = poly
            .iter()
            .map(|p| {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                dx * dx + dy * dy
            })
            .fold(0.0, f64::max);
    };
    update_ball(&poly, &mut center, &mut radius2);
    // Clip candidates deepest-first with re-checks: massively tangent
    // configurations then reach the true cell in a few cuts and the rest
    // get rejected, instead of shaving sliver after sliver.
    let mut clip_candidates = |cands: &mut Vec<(f64, usize)>,
                               poly: &mut Vec<[f64; 2]>,
                               binding: &mut Vec<usize>,
                               center: &mut [f64; 2],
                               radius2: &mut f64| {
        cands.sort_by(|l, r| r.0.partial_cmp(&l.0).unwrap().then(l.1.cmp(&r.1)));
        for &(_, j) in cands.iter() {
            if poly.is_empty() {
                break;
            }
            let a = [flat[2 * j] - xi0, flat[2 * j + 1] - xi1];
            let c = values[j] - ui;
            let sup = poly
                .iter()
                .map(|p| a[0] * p[0] + a[1] * p[1])
                .fold(f64::NEG_INFINITY, f64::max);
            if sup <= c + cut_eps {
                continue;
            }
            binding.push(j);
            *poly = clip_polygon(poly, a, c, eps);
            update_ball(poly, center, radius2);
        }
    };
    // Neighbor constraints first: they shrink the cell to near-final size.
    let mut cands: Vec<(f64, usize)> = Vec::new();
    for &j in nodes.neighbors(i) {
        let a = [flat[2 * j] - xi0, flat[2 * j + 1] - xi1];
        let c = values[j] - ui;
        let sup = poly
            .iter()
            .map(|p| a[0] * p[0] + a[1] * p[1])
            .fold(f64::NEG_INFINITY, f64::max);
        if sup > c + cut_eps {
            cands.push((sup - c, j));
        }
    }
    clip_candidates(&mut cands, &mut poly, &mut binding, &mut center, &mut radius2);
    // Scan every constraint with the enclosing-ball rejection (neighbors
    // come around again but are rejected in O(1)).
    if !poly.is_empty() {
        let mut cands: Vec<(f64, usize)> = Vec::new();
        for j in 0..nodes.len() {
            if j == i {
                continue;
            }
            let a = [flat[2 * j] - xi0, flat[2 * j + 1] - xi1];
            let c = values[j] - ui;
            let slack = c - (a[0] * center[0] + a[1] * center[1]);
            if slack > 0.0 {
                let n2 = a[0] * a[0] + a[1] * a[1];
                if slack * slack >= radius2 * n2 {
                    continue;
                }
            }
            let sup = poly
                .iter()
                .map(|p| a[0] * p[0] + a[1] * p[1])
                .fold(f64::NEG_INFINITY, f64::max);
            if sup > c + cut_eps {
                cands.push((sup - c, j));
            }
        }
        clip_candidates(&mut cands, &mut poly, &mut binding, &mut center, &mut radius2);
    }
    let volume = polygon_area(&poly);
    CellEval {
        degenerate: poly.len() < 3 || volume < 1e-300,
        vertices: poly.iter().map(|p| vec![p[0], p[1]]).collect(),
        volume,
        binding,
    }
}

fn eval_cell_3d(
    nodes: &NodeSet,
    values: &[f64],
    i: usize,
    delta: f64,
    cbox: &CellBox,
) -> CellEval {
    let flat = nodes.flat_coords();
    let xi = [flat[3 * i], flat[3 * i + 1], flat[3 * i + 2]];
    let ui = values[i] - delta;
    let eps = 1e-14 * box_scale(cbox);
    let cut_eps = CUT_DEPTH_REL * box_scale(cbox);
    let mut poly = Some(Polyhedron3::cuboid(
        [cbox.lo[0], cbox.lo[1], cbox.lo[2]],
        [cbox.hi[0], cbox.hi[1], cbox.hi[2]],
    ));
    let mut binding: Vec<usize> = Vec::new();
    let mut center = poly.as_ref().unwrap().centroid();
    let mut radius = poly.as_ref().unwrap().max_vertex_dist(&center);
    let sup_of = |cur: &Polyhedron3, a: &[f64; 3]| {
        cur.vertices
            .iter()
            .map(|p| a[0] * p[0] + a[1] * p[1] + a[2] * p[2])
            .fold(f64::NEG_INFINITY, f64::max)
    };
    // Deepest-first clipping with re-checks (see the 2D kernel).
    let mut pass = |cands: &mut Vec<(f64, usize)>,
                    poly: &mut Option<Polyhedron3>,
                    binding: &mut Vec<usize>,
                    center: &mut [f64; 3],
                    radius: &mut f64| {
        cands.sort_by(|l, r| r.0.partial_cmp(&l.0).unwrap().then(l.1.cmp(&r.1)));
        for &(_, j) in cands.iter() {
            let Some(ref cur) = poly else { break };
            let a = [
                flat[3 * j] - xi[0],
                flat[3 * j + 1] - xi[1],
                flat[3 * j + 2] - xi[2],
            ];
            let c = values[j] - ui;
            if sup_of(cur, &a) <= c + cut_eps {
                continue;
            }
            binding.push(j);
            *poly = cur.clip(a, c, eps);
            if let Some(ref cur) = poly {
                *center = cur.centroid();
                *radius = cur.max_vertex_dist(center);
            }
        }
    };
    let mut cands: Vec<(f64, usize)> = Vec::new();
    for &j in nodes.neighbors(i) {
        let Some(ref cur) = poly else { break };
        let a = [
            flat[3 * j] - xi[0],
            flat[3 * j + 1] - xi[1],
            flat[3 * j + 2] - xi[2],
        ];
        let c = values[j] - ui;
        let sup = sup_of(cur, &a);
        if sup > c + cut_eps {
            cands.push((sup - c, j));
        }
    }
    pass(&mut cands, &mut poly, &mut binding, &mut center, &mut radius);
    if let Some(ref snapshot) = poly {
        let mut cands: Vec<(f64, usize)> = Vec::new();
        for j in 0..nodes.len() {
            if j == i {
                continue;
            }
            let a = [
                flat[3 * j] - xi[0],
                flat[3 * j + 1] - xi[1],
                flat[3 * j + 2] - xi[2],
            ];
            let c = values[j] - ui;
            let slack = c - (a[0] * center[0] + a[1] * center[1] + a[2] * center[2]);
            if slack > 0.0 {
                let n2 = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
                if slack * slack >= radius * radius * n2 {
                    continue;
                }
            }
            let sup = sup_of(snapshot, &a);
            if sup > c + cut_eps {
                cands.push((sup - c, j));
            }
        }
        pass(&mut cands, &mut poly, &mut binding, &mut center, &mut radius);
    }
    match poly {
        Some(p) if !p.is_empty() => CellEval {
            volume: p.volume(),
            vertices: p.vertices.iter().map(|v| v.to_vec()).collect(),
            binding,
            degenerate: p.volume() < 1e-300,
        },
        _ => CellEval {
            volume: 0.0,
            vertices: Vec::new(),
            binding,
            degenerate: true,
        },
    }
}
