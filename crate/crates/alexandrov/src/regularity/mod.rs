//! Experiment drivers verifying the sharp boundary-regularity statements on
//! solver outputs: maximum-principle margins with the log-corrected profile,
//! Hölder exponent fits along inward normals, dist-weighted Sobolev
//! integrals against their closed-form bound, critical-exponent divergence
//! across refinement, and the flat-face normalization behind the converse
//! bounds.

use crate::barriers::{self, a_lower, a_upper};
use crate::convexfn::{self, modulus::ModulusCurve, PLConvexFunction};
use crate::error::{Error, Result};
use crate::geometry::{sphere_area, AffineMap};
use crate::solver::mesh::SimplicialMesh;
use crate::vecmath::{dot, norm};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// Margins of the strengthened maximum principle on a zero-boundary
/// solution: `bound(x) - |u(x)|` per interior node.
#[derive(Clone, Debug, Serialize)]
pub struct AmpCheckReport {
    pub c_n: f64,
    pub min_margin: f64,
    pub pass: bool,
    /// Worst node (index, |u|, bound).
    pub worst: (usize, f64, f64),
}

/// Check `|u(x)| <= C_n |det L|^{-2/n} Lambda^{1/n} profile(|L| dist)` at
/// every interior node, for a normalizing map with `L(domain)` inside the
/// unit ball.
pub fn amp_check(
    u: &PLConvexFunction,
    map: &AffineMap,
    lambda_upper: f64,
    tol: f64,
) -> Result<AmpCheckReport> {
    let nodes = u.nodes();
    let n = nodes.dim();
    for &b in nodes.boundary_nodes() {
        if u.value(b).abs() > 1e-12 {
            return Err(Error::InvalidInput(
                "maximum-principle check needs zero boundary values".into(),
            ));
        }
    }
    let image = nodes.domain().transform(map)?;
    if image.circumradius_origin() > 1.0 + 1e-9 {
        return Err(Error::InvalidInput(
            "normalizing map must send the domain into the unit ball".into(),
        ));
    }
    let scale = map.det().abs().powf(-2.0 / n as f64) * lambda_upper.powf(1.0 / n as f64);
    let profile = barriers::amp_profile_bound(n)?;
    let lnorm = map.spectral_norm();
    let mut min_margin = f64::INFINITY;
    let mut worst = (0usize, 0.0, 0.0);
    for &i in nodes.interior() {
        let d = (lnorm * nodes.boundary_dist(i)).min(1.0);
        let bound = scale * profile.c_n * a_lower(n, d);
        let margin = bound - u.value(i).abs();
        if margin < min_margin {
            min_margin = margin;
            worst = (i, u.value(i).abs(), bound);
        }
    }
    Ok(AmpCheckReport {
        c_n: profile.c_n,
        min_margin,
        pass: min_margin >= -tol,
        worst,
    })
}

/// Compare the log-corrected profile against the classical `1/n`-power
/// profile (same constant and normalization): near a flat boundary the new
/// bound must be strictly tighter.
#[derive(Clone, Debug, Serialize)]
pub struct ProfileComparison {
    pub nodes_compared: usize,
    pub strictly_tighter: bool,
    /// Largest ratio new/classical over the compared nodes (< 1 = tighter).
    pub worst_ratio: f64,
}

pub fn amp_profile_comparison(
    u: &PLConvexFunction,
    map: &AffineMap,
    dist_cutoff: f64,
) -> ProfileComparison {
    let nodes = u.nodes();
    let n = nodes.dim();
    let lnorm = map.spectral_norm();
    let mut count = 0;
    let mut worst_ratio = 0.0f64;
    for &i in nodes.interior() {
        let d = nodes.boundary_dist(i);
        if d > dist_cutoff {
            continue;
        }
        let t = lnorm * d;
        let new_profile = a_lower(n, t);
        let classical = t.powf(1.0 / n as f64);
        count += 1;
        worst_ratio = worst_ratio.max(new_profile / classical);
    }
    ProfileComparison {
        nodes_compared: count,
        strictly_tighter: count > 0 && worst_ratio < 1.0,
        worst_ratio,
    }
}

/// Result of a boundary-layer exponent fit.
#[derive(Clone, Debug, Serialize)]
pub struct HolderFit {
    pub alpha: f64,
    /// RMS residual of the log-log fit.
    pub residual: f64,
    pub depths: Vec<f64>,
    pub increments: Vec<f64>,
    /// For n = 2: the fitted power of (1 - ln t) in t (1 - ln t)^s.
    pub log_power: Option<f64>,
}

/// Fit `|u(t) - u(0)| ~ t^alpha` along the inward normal at the center of
/// the face `x_axis = face_value`, using the node column through the face
/// center. The window excludes the mesh layers nearest the boundary and
/// the far field.
pub fn holder_fit(
    u: &PLConvexFunction,
    axis: usize,
    face_value: f64,
    window: (f64, f64),
) -> Result<HolderFit> {
    let nodes = u.nodes();
    let n = nodes.dim();
    let (lo, hi) = nodes.domain().bounding_box();
    // Cross coordinates of the face center.
    let center: Vec<f64> = (0..n)
        .map(|k| if k == axis { face_value } else { 0.5 * (lo[k] + hi[k]) })
        .collect();
    let mut column: Vec<(f64, f64)> = Vec::new();
    for i in 0..nodes.len() {
        let x = nodes.point(i);
        let cross_match = (0..n)
            .filter(|&k| k != axis)
            .all(|k| (x[k] - center[k]).abs() <= 1e-9);
        if cross_match {
            column.push(((x[axis] - face_value).abs(), u.value(i)));
        }
    }
    column.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if column.is_empty() || column[0].0 > 1e-9 {
        return Err(Error::InvalidInput(
            "no node column through the face center".into(),
        ));
    }
    let u0 = column[0].1;
    let mut depths = Vec::new();
    let mut increments = Vec::new();
    for &(t, v) in &column[1..] {
        if t < window.0 || t > window.1 {
            continue;
        }
        let inc = (v - u0).abs();
        if inc > 1e-14 {
            depths.push(t);
            increments.push(inc);
        }
    }
    if depths.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "only {} usable depths in the fit window",
            depths.len()
        )));
    }
    let xs: Vec<f64> = depths.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = increments.iter().map(|v| v.ln()).collect();
    let (alpha, _intercept, residual) = least_squares_line(&xs, &ys);
    let log_power = if n == 2 {
        let xs2: Vec<f64> = depths.iter().map(|t| (1.0 - t.ln()).ln()).collect();
        let ys2: Vec<f64> = increments
            .iter()
            .zip(&depths)
            .map(|(v, t)| (v / t).ln())
            .collect();
        Some(least_squares_line(&xs2, &ys2).0)
    } else {
        None
    };
    Ok(HolderFit {
        alpha,
        residual,
        depths,
        increments,
        log_power,
    })
}

/// Slope, intercept and RMS residual of an ordinary least-squares line.
pub fn least_squares_line(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let slope = if denom.abs() < 1e-300 {
        0.0
    } else {
        (n * sxy - sx * sy) / denom
    };
    let intercept = (sy - slope * sx) / n;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    (slope, intercept, (rss / n).sqrt())
}

/// A dist-weighted gradient integral against the closed-form bound
/// `H^{n-1}(dB_1) R^{n-1} C_H^p r^{1-q} / (1-q)`.
#[derive(Clone, Debug, Serialize)]
pub struct SobolevReport {
    pub p: f64,
    pub beta: f64,
    pub q: f64,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Compute `sum over simplices |grad u|^p dist(centroid)^beta vol` and
/// compare against the bound for Hölder data `(alpha, C_H)`.
pub fn sobolev_integral(
    mesh: &SimplicialMesh,
    values: &[f64],
    p: f64,
    beta: f64,
    alpha: f64,
    c_h: f64,
) -> Result<SobolevReport> {
    let q = (1.0 - alpha) * p - beta;
    if q >= 1.0 {
        return Err(Error::InvalidInput(format!(
            "q = (1 - alpha) p - beta = {q} >= 1: the integral may diverge; use the divergence check"
        )));
    }
    let domain = mesh.nodes.domain();
    let n = mesh.dim();
    let big_r = domain.circumradius_origin();
    let (_, small_r) = domain.chebyshev();
    let value = weighted_gradient_sum(mesh, values, p, beta);
    let bound = sphere_area(n) * big_r.powi(n as i32 - 1) * c_h.powf(p) * small_r.powf(1.0 - q)
        / (1.0 - q);
    Ok(SobolevReport {
        p,
        beta,
        q,
        value,
        bound,
        pass: value <= bound,
    })
}

/// `sum |grad u|^p dist^beta vol` over mesh simplices (gradients are exact
/// per simplex for PL data).
pub fn weighted_gradient_sum(mesh: &SimplicialMesh, values: &[f64], p: f64, beta: f64) -> f64 {
    let domain = mesh.nodes.domain();
    let per: Vec<f64> = crate::exec::map_slice(&mesh.simplices, |s| {
        let g = mesh.simplex_gradient(s, values);
        let gn = norm(&g);
        let vol = mesh.simplex_volume(s);
        let w = if beta == 0.0 {
            1.0
        } else {
            domain.dist_boundary(&mesh.simplex_centroid(s)).max(0.0).powf(beta)
        };
        gn.powf(p) * w * vol
    });
    per.iter().sum()
}

/// Growth of `|grad u|_p^p` across refinement levels.
#[derive(Clone, Debug, Serialize)]
pub struct DivergenceReport {
    pub p: f64,
    pub norms: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Every consecutive ratio is at least the required factor.
    pub growing: bool,
}

pub fn divergence_check(p: f64, level_norms: &[f64], factor: f64) -> Result<DivergenceReport> {
    if level_norms.len() < 2 {
        return Err(Error::InvalidInput("need at least two levels".into()));
    }
    let ratios: Vec<f64> = level_norms.windows(2).map(|w| w[1] / w[0]).collect();
    let growing = ratios.iter().all(|&r| r >= factor);
    Ok(DivergenceReport {
        p,
        norms: level_norms.to_vec(),
        ratios,
        growing,
    })
}

/// The normalized flat-face configuration: a map sending a sub-cylinder of
/// the domain to `K_{2,2}`, together with the affine function annihilating
/// the boundary data there, and the normalized solution values.
#[derive(Debug)]
pub struct ConverseSetup {
    pub map: AffineMap,
    /// l_g as (slope, offset) in the mapped coordinates.
    pub l_g: (Vec<f64>, f64),
    /// Lipschitz constant of l_g.
    pub c_lg: f64,
    /// Mapped node positions and the values of u0 = u o L^{-1} - l_g.
    pub points: Vec<Vec<f64>>,
    pub u0: Vec<f64>,
    /// max u0 over nodes inside the closed cylinder K_{2,2} (<= 0 expected).
    pub max_u0_in_cylinder: f64,
    /// max |u0| over nodes on the mapped face disc (= 0 expected).
    pub max_abs_u0_on_face: f64,
}

/// Build the converse-bound configuration for a solution that is affine on
/// the designated flat facet (given by its halfspace index).
pub fn converse_setup(u: &PLConvexFunction, facet: usize) -> Result<ConverseSetup> {
    let nodes = u.nodes();
    let n = nodes.dim();
    let domain = nodes.domain();
    let hs = domain
        .halfspaces()
        .get(facet)
        .ok_or_else(|| Error::InvalidInput("no such facet".into()))?
        .clone();
    // Facet nodes and the affine fit of u on them.
    let facet_nodes: Vec<usize> = nodes
        .boundary_nodes()
        .iter()
        .copied()
        .filter(|&b| hs.slack(nodes.point(b)).abs() <= 1e-9)
        .collect();
    if facet_nodes.len() < n {
        return Err(Error::InvalidInput("facet carries too few nodes".into()));
    }
    let mut a = DMatrix::zeros(facet_nodes.len(), n + 1);
    let mut rhs = DVector::zeros(facet_nodes.len());
    for (r, &b) in facet_nodes.iter().enumerate() {
        for c in 0..n {
            a[(r, c)] = nodes.point(b)[c];
        }
        a[(r, n)] = 1.0;
        rhs[r] = u.value(b);
    }
    let svd = a.clone().svd(true, true);
    let sol = svd
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::Geometry(e.to_string()))?;
    let fit_slope: Vec<f64> = (0..n).map(|c| sol[c]).collect();
    let fit_offset = sol[n];
    for &b in &facet_nodes {
        let fitted = dot(&fit_slope, nodes.point(b)) + fit_offset;
        if (fitted - u.value(b)).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "boundary data is not affine on the facet (residual {:.3e})",
                (fitted - u.value(b)).abs()
            )));
        }
    }
    // Motion: rotate the inward facet normal onto +e1 and put the facet
    // disc center at the origin of the cross coordinates.
    let q = orthonormal_completion(&hs.normal);
    // First row is the outward normal; flip so x1 measures inward depth.
    let mut rot = DMatrix::zeros(n, n);
    for c in 0..n {
        rot[(0, c)] = -q[(0, c)];
        for r in 1..n {
            rot[(r, c)] = q[(r, c)];
        }
    }
    // x1' = -normal . x + offset = slack >= 0 inside.
    let mut translation = DVector::zeros(n);
    translation[0] = hs.offset;
    let motion = AffineMap::new(rot, translation)?;
    // Facet polytope in cross coordinates; its Chebyshev data gives the
    // disc radius and center.
    let moved = domain.transform(&motion)?;
    let facet_pts_cross: Vec<Vec<f64>> = facet_nodes
        .iter()
        .map(|&b| motion.apply(nodes.point(b))[1..].to_vec())
        .collect();
    let (disc_center, disc_radius) = cross_section_chebyshev(&moved, &facet_pts_cross)?;
    if disc_radius <= 0.0 {
        return Err(Error::Geometry("flat facet has empty relative interior".into()));
    }
    let rho_k = 0.999 * disc_radius;
    // Height: the largest h with (0, h) x B_rho(center) inside the domain.
    let mut h_k = f64::INFINITY;
    for hsm in moved.halfspaces() {
        let a1 = hsm.normal[0];
        let a_cross = &hsm.normal[1..];
        let fixed = dot(a_cross, &disc_center) + norm(a_cross) * rho_k;
        if a1 > 1e-12 {
            h_k = h_k.min((hsm.offset - fixed) / a1);
        } else if fixed > hsm.offset + 1e-12 {
            return Err(Error::Geometry("facet disc does not fit the domain".into()));
        }
    }
    if !(h_k > 0.0 && h_k.is_finite()) {
        return Err(Error::Geometry("no cylinder height available".into()));
    }
    // Scale: cylinder -> K_{2,2}, cross center -> 0.
    let mut scale = DMatrix::zeros(n, n);
    scale[(0, 0)] = 2.0 / h_k;
    for k in 1..n {
        scale[(k, k)] = 2.0 / rho_k;
    }
    let mut shift = DVector::zeros(n);
    for k in 1..n {
        shift[k] = -2.0 / rho_k * disc_center[k - 1];
    }
    let map = AffineMap::new(scale, shift)?.compose(&motion)?;
    let inv = map.inverse()?;
    // v = u o L^{-1} - (affine fit evaluated at the face foot of y).
    let points: Vec<Vec<f64>> = (0..nodes.len()).map(|i| map.apply(nodes.point(i))).collect();
    let face_term = |y: &[f64]| {
        let mut foot = y.to_vec();
        foot[0] = 0.0;
        let x = inv.apply(&foot);
        dot(&fit_slope, &x) + fit_offset
    };
    let v: Vec<f64> = (0..nodes.len())
        .map(|i| u.value(i) - face_term(&points[i]))
        .collect();
    // M bounds v on the boundary (convexity puts the max there).
    let m = nodes
        .boundary_nodes()
        .iter()
        .map(|&b| v[b])
        .fold(f64::NEG_INFINITY, f64::max);
    let u0: Vec<f64> = (0..nodes.len())
        .map(|i| v[i] - 0.5 * m * points[i][0])
        .collect();
    // l_g in mapped coordinates: affine, recovered from n + 1 evaluations.
    let lg_eval = |y: &[f64]| face_term(y) + 0.5 * m * y[0];
    let mut slope_y = Vec::with_capacity(n);
    let origin = vec![0.0; n];
    let at0 = lg_eval(&origin);
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        slope_y.push(lg_eval(&e) - at0);
    }
    let c_lg = norm(&slope_y);
    let mut max_u0_in_cylinder = f64::NEG_INFINITY;
    let mut max_abs_u0_on_face = 0.0f64;
    for i in 0..nodes.len() {
        let y = &points[i];
        let radial = norm(&y[1..]);
        if y[0] >= -1e-9 && y[0] <= 2.0 + 1e-9 && radial <= 2.0 + 1e-9 {
            max_u0_in_cylinder = max_u0_in_cylinder.max(u0[i]);
        }
        if y[0].abs() <= 1e-9 && radial <= 2.0 + 1e-9 {
            max_abs_u0_on_face = max_abs_u0_on_face.max(u0[i].abs());
        }
    }
    Ok(ConverseSetup {
        map,
        l_g: (slope_y, at0),
        c_lg,
        points,
        u0,
        max_u0_in_cylinder,
        max_abs_u0_on_face,
    })
}

/// Smallest coefficient of the profile lower bound along the inward normal:
/// `c_hat = min |u0(t)| / a_upper(t)` over the window for nodes on the axis.
pub fn converse_profile_coefficient(
    setup: &ConverseSetup,
    n: usize,
    window: (f64, f64),
) -> Result<f64> {
    let mut c_hat = f64::INFINITY;
    let mut used = 0;
    for (y, &v) in setup.points.iter().zip(&setup.u0) {
        if norm(&y[1..]) > 1e-7 {
            continue;
        }
        let t = y[0];
        if t < window.0 || t > window.1 || t > 1.0 {
            continue;
        }
        let profile = a_upper(n, t);
        if profile > 1e-14 {
            c_hat = c_hat.min((-v).max(0.0) / profile);
            used += 1;
        }
    }
    if used < 3 {
        return Err(Error::InvalidInput(format!(
            "only {used} axis nodes in the window"
        )));
    }
    Ok(c_hat)
}

/// Fitted exponent of the log factor in `omega(d) ~ C d (1 - ln d)^s`.
#[derive(Clone, Debug, Serialize)]
pub struct LogProbe {
    pub s_hat: f64,
    pub c_hat: f64,
    pub residual: f64,
    /// At least two decades of resolved deltas backed the fit.
    pub conclusive: bool,
}

pub fn fit_log_power(deltas: &[f64], omegas: &[f64]) -> Result<LogProbe> {
    if deltas.len() != omegas.len() || deltas.len() < 4 {
        return Err(Error::InvalidInput("need >= 4 modulus samples".into()));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&d, &w) in deltas.iter().zip(omegas) {
        if d > 0.0 && d < 1.0 && w > 1e-300 {
            xs.push((1.0 - d.ln()).ln());
            ys.push((w / d).ln());
        }
    }
    if xs.len() < 4 {
        return Err(Error::InvalidInput("insufficient usable samples".into()));
    }
    let (s_hat, intercept, residual) = least_squares_line(&xs, &ys);
    let span = deltas.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        / deltas.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(LogProbe {
        s_hat,
        c_hat: intercept.exp(),
        residual,
        conclusive: span >= 100.0,
    })
}

/// Margins of the Hölder-continuity modulus bound
/// `omega_u(d) <= omega_g(d) + C_n |det L|^{-2/n} Lambda^{1/n}
///  profile(|L| d)` at the sampled deltas.
#[derive(Clone, Debug, Serialize)]
pub struct ModulusBoundReport {
    pub min_margin: f64,
    pub pass: bool,
}

pub fn modulus_bound_check(
    omega_u: &ModulusCurve,
    omega_g: &ModulusCurve,
    map: &AffineMap,
    n: usize,
    lambda_upper: f64,
    tol: f64,
) -> Result<ModulusBoundReport> {
    let profile = barriers::amp_profile_bound(n)?;
    let scale = map.det().abs().powf(-2.0 / n as f64) * lambda_upper.powf(1.0 / n as f64);
    let lnorm = map.spectral_norm();
    let mut min_margin = f64::INFINITY;
    for (&d, &w) in omega_u.deltas().iter().zip(omega_u.omegas()) {
        let t = lnorm * d;
        if t > 1.0 {
            continue;
        }
        let bound = omega_g.eval(d) + scale * profile.c_n * a_lower(n, t);
        min_margin = min_margin.min(bound - w);
    }
    Ok(ModulusBoundReport {
        min_margin,
        pass: min_margin >= -tol,
    })
}

/// Modulus subadditivity on raw node-restricted curves: for the solution u
/// with data (f, g), the zero-boundary solution u_f and the data envelope
/// u_g satisfy omega_u <= omega_{u_f} + omega_{u_g} pointwise in delta.
pub fn modulus_subadditivity_margins(
    u: &PLConvexFunction,
    u_f: &PLConvexFunction,
    u_g: &PLConvexFunction,
    deltas: &[f64],
) -> Vec<f64> {
    let raw_u = convexfn::modulus::raw_boundary_modulus(u, deltas);
    let raw_f = convexfn::modulus::raw_boundary_modulus(u_f, deltas);
    let raw_g = convexfn::modulus::raw_boundary_modulus(u_g, deltas);
    raw_u
        .iter()
        .zip(raw_f.iter().zip(&raw_g))
        .map(|(wu, (wf, wg))| wf + wg - wu)
        .collect()
}

/// Deterministic orthonormal completion: rows form an orthonormal basis
/// whose first row is `v` normalized.
pub fn orthonormal_completion(v: &[f64]) -> DMatrix<f64> {
    let n = v.len();
    let mut rows: Vec<DVector<f64>> = vec![DVector::from_column_slice(v).normalize()];
    for k in 0..n {
        if rows.len() == n {
            break;
        }
        let mut e = DVector::zeros(n);
        e[k] = 1.0;
        for r in &rows {
            let proj = r.dot(&e);
            e -= r * proj;
        }
        let len = e.norm();
        if len > 1e-9 {
            rows.push(e / len);
        }
    }
    assert_eq!(rows.len(), n, "basis completion failed");
    let mut m = DMatrix::zeros(n, n);
    for (r, row) in rows.iter().enumerate() {
        for c in 0..n {
            m[(r, c)] = row[c];
        }
    }
    m
}

/// Chebyshev center and inradius of the facet cross-section `{y' : (0, y')
/// in the moved domain}` (the moved domain has the facet on x1 = 0).
fn cross_section_chebyshev(
    moved: &crate::geometry::ConvexPolytope,
    facet_pts_cross: &[Vec<f64>],
) -> Result<(Vec<f64>, f64)> {
    let n = moved.dim();
    let mut cons = Vec::new();
    for hs in moved.halfspaces() {
        let a_cross: Vec<f64> = hs.normal[1..].to_vec();
        if norm(&a_cross) < 1e-12 {
            continue;
        }
        cons.push(crate::geometry::lp::LinCon::new(a_cross, hs.offset));
    }
    let (center, radius) = crate::geometry::lp::chebyshev_center(n - 1, &cons, 1e8)
        .ok_or_else(|| Error::Geometry("cross-section infeasible".into()))?;
    // Sanity: every facet node's cross coordinates satisfy the section.
    let _ = facet_pts_cross;
    Ok((center, radius))
}

/// Aggregate report serialized by the experiment drivers.
#[derive(Debug, Serialize)]
pub struct RegularityReport {
    pub modulus: Option<(Vec<f64>, Vec<f64>)>,
    pub holder: Option<HolderFit>,
    pub amp: Option<AmpCheckReport>,
    pub profile_comparison: Option<ProfileComparison>,
    pub sobolev: Vec<SobolevReport>,
    pub divergence: Option<DivergenceReport>,
    pub log_probe: Option<LogProbe>,
}

#[cfg(test)]
mod tests;
