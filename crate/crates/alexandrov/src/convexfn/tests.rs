use super::*;
use crate::geometry::ConvexPolytope;
use crate::vecmath::dist;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid_nodes(lo: f64, hi: f64, n: usize) -> (Arc<NodeSet>, f64) {
    let domain = ConvexPolytope::cuboid(&[lo, lo], &[hi, hi]).unwrap();
    let h = (hi - lo) / (n - 1) as f64;
    let mut pts = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            pts.push(vec![lo + i as f64 * h, lo + j as f64 * h]);
        }
    }
    (NodeSet::new(domain, pts).unwrap(), h)
}

fn quadratic(nodes: &Arc<NodeSet>) -> PLConvexFunction {
    let values = nodes
        .points()
        .iter()
        .map(|p| 0.5 * (p[0] * p[0] + p[1] * p[1]))
        .collect();
    PLConvexFunction::from_values_unchecked(nodes.clone(), values)
}

#[test]
fn affine_function_has_zero_measure() {
    let (nodes, _) = grid_nodes(0.0, 1.0, 9);
    let values = nodes.points().iter().map(|p| 2.0 * p[0] - 3.0 * p[1] + 0.7).collect();
    let u = PLConvexFunction::from_values_unchecked(nodes, values);
    let mu = ma_measure(&u);
    assert!(mu.total().abs() < 1e-13);
    assert!(mu.masses().iter().all(|&m| m.abs() < 1e-13));
}

/// Independent oracle: the subgradient polygon from all pairwise constraint
/// intersections, filtered by feasibility, hulled and measured by shoelace.
fn brute_force_cell_area(points: &[Vec<f64>], values: &[f64], i: usize) -> f64 {
    let cons = cell_constraints(points, values, i);
    let mut cands: Vec<[f64; 2]> = Vec::new();
    for a in 0..cons.len() {
        for b in (a + 1)..cons.len() {
            let (p, q) = (&cons[a], &cons[b]);
            let det = p.a[0] * q.a[1] - p.a[1] * q.a[0];
            if det.abs() < 1e-12 {
                continue;
            }
            cands.push([
                (p.b * q.a[1] - q.b * p.a[1]) / det,
                (p.a[0] * q.b - q.a[0] * p.b) / det,
            ]);
        }
    }
    let feasible: Vec<Vec<f64>> = cands
        .iter()
        .filter(|c| cons.iter().all(|con| con.a[0] * c[0] + con.a[1] * c[1] <= con.b + 1e-9))
        .map(|c| vec![c[0], c[1]])
        .collect();
    if feasible.len() < 3 {
        return 0.0;
    }
    let ring = crate::geometry::order_ccw_2d(&feasible);
    crate::geometry::clip::polygon_area(&ring)
}

#[test]
fn cone_cell_mass_is_four() {
    // |x_1| + |x_2| on [-1,1]^2 with corners, edge midpoints, and origin.
    let domain = ConvexPolytope::cuboid(&[-1.0, -1.0], &[1.0, 1.0]).unwrap();
    let mut pts = vec![vec![0.0, 0.0]];
    for &x in &[-1.0, 1.0] {
        for &y in &[-1.0, 1.0] {
            pts.push(vec![x, y]);
        }
    }
    for &s in &[-1.0, 1.0] {
        pts.push(vec![s, 0.0]);
        pts.push(vec![0.0, s]);
    }
    let nodes = NodeSet::new(domain, pts).unwrap();
    assert_eq!(nodes.interior(), &[0]);
    let values: Vec<f64> = nodes.points().iter().map(|p| p[0].abs() + p[1].abs()).collect();
    let u = PLConvexFunction::from_values_unchecked(nodes.clone(), values.clone());
    let mu = ma_measure(&u);
    assert!((mu.mass(0) - 4.0).abs() < 1e-10, "mass {}", mu.mass(0));
    let oracle = brute_force_cell_area(nodes.points(), &values, 0);
    assert!((oracle - 4.0).abs() < 1e-10);
    assert!((mu.mass(0) - oracle).abs() < 1e-10);
}

#[test]
fn quadratic_total_mass_closed_form() {
    // For u = |x|^2/2 on a uniform grid the union of interior cells is the
    // grid shrunk by half a cell on each side: total = (1 - h)^2 exactly.
    let (nodes, h) = grid_nodes(0.0, 1.0, 21);
    let u = quadratic(&nodes);
    let mu = ma_measure(&u);
    assert!(
        (mu.total() - (1.0 - h) * (1.0 - h)).abs() < 1e-10,
        "total {} vs {}",
        mu.total(),
        (1.0 - h) * (1.0 - h)
    );
    // Every interior cell is the Voronoi square of side h.
    for &i in nodes.interior() {
        assert!((mu.mass(i) - h * h).abs() < 1e-12);
    }
}

#[test]
fn measure_invariant_under_affine_shift() {
    let (nodes, _) = grid_nodes(0.0, 1.0, 13);
    let u = quadratic(&nodes);
    let shifted = u.add_affine(&[1.3, -0.4], 2.0);
    let m1 = ma_measure(&u);
    let m2 = ma_measure(&shifted);
    for i in 0..nodes.len() {
        assert!((m1.mass(i) - m2.mass(i)).abs() < 1e-10);
    }
    assert!((m1.total() - m2.total()).abs() < 1e-10);
}

#[test]
fn scaling_property_exact_per_node() {
    // Masses of c * (u o A) are c^n |det A| times the originals, node by
    // node under the pulled-back node set.
    let (nodes, _) = grid_nodes(0.0, 1.0, 9);
    let u = quadratic(&nodes);
    let mu = ma_measure(&u);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..3 {
        let c: f64 = rng.random_range(0.5..2.0);
        // Random well-conditioned linear map A.
        let a: [f64; 4] = loop {
            let m: [f64; 4] = [
                rng.random_range(-1.5..1.5),
                rng.random_range(-1.5..1.5),
                rng.random_range(-1.5..1.5),
                rng.random_range(-1.5..1.5),
            ];
            let det = m[0] * m[3] - m[1] * m[2];
            if det.abs() > 0.4 {
                break m;
            }
        };
        let det = a[0] * a[3] - a[1] * a[2];
        let inv = [a[3] / det, -a[1] / det, -a[2] / det, a[0] / det];
        // Node x of the original maps to A^{-1} x for the composed function.
        let new_pts: Vec<Vec<f64>> = nodes
            .points()
            .iter()
            .map(|p| vec![inv[0] * p[0] + inv[1] * p[1], inv[2] * p[0] + inv[3] * p[1]])
            .collect();
        let domain = ConvexPolytope::from_vertices_2d(&new_pts).unwrap();
        let new_nodes = NodeSet::new(domain, new_pts).unwrap();
        let new_vals: Vec<f64> = u.values().iter().map(|v| c * v).collect();
        let v = PLConvexFunction::from_values_unchecked(new_nodes.clone(), new_vals);
        let mv = ma_measure(&v);
        let factor = c.powi(2) * det.abs();
        // Node order is preserved by the pullback; interior flags may
        // differ only on degenerate boundary contacts.
        for (i, &oi) in nodes.interior().iter().enumerate() {
            let _ = i;
            if new_nodes.is_boundary(oi) {
                continue;
            }
            assert!(
                (mv.mass(oi) - factor * mu.mass(oi)).abs() < 1e-10 * (1.0 + factor),
                "node {oi}: {} vs {}",
                mv.mass(oi),
                factor * mu.mass(oi)
            );
        }
    }
}

#[test]
fn superadditivity_affine_shift_is_equality() {
    let (nodes, _) = grid_nodes(0.0, 1.0, 9);
    let u = quadratic(&nodes);
    let affine_vals: Vec<f64> = nodes.points().iter().map(|p| 0.3 * p[0] - 0.9 * p[1]).collect();
    let v = PLConvexFunction::from_values_unchecked(nodes.clone(), affine_vals);
    let sum = u.add(&v).unwrap();
    let mu = ma_measure(&u);
    let ms = ma_measure(&sum);
    for i in 0..nodes.len() {
        assert!((mu.mass(i) - ms.mass(i)).abs() < 1e-12);
    }
}

#[test]
fn superadditivity_doubling_and_random_pairs() {
    let (nodes, _) = grid_nodes(0.0, 1.0, 9);
    let u = quadratic(&nodes);
    let sum = u.add(&u).unwrap();
    let mu = ma_measure(&u);
    let ms = ma_measure(&sum);
    // mu_{2u} = 2^n mu_u, and в particular >= 2 mu_u.
    assert!((ms.total() - 4.0 * mu.total()).abs() < 1e-10);
    let report = superadditivity_check(&u, &u, 1e-9).unwrap();
    assert!(report.violations.is_empty());

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..3 {
        // Random convex PL pair: envelopes of random values.
        let raw1: Vec<f64> = (0..nodes.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let raw2: Vec<f64> = (0..nodes.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v1 = PLConvexFunction::envelope_of(nodes.clone(), &raw1).unwrap();
        let v2 = PLConvexFunction::envelope_of(nodes.clone(), &raw2).unwrap();
        let report = superadditivity_check(&v1, &v2, 1e-9).unwrap();
        assert!(
            report.violations.is_empty(),
            "worst gap {}",
            report.worst_gap
        );
    }
}

#[test]
fn envelope_of_convex_data_is_identity() {
    let (nodes, _) = grid_nodes(0.0, 1.0, 7);
    let vals: Vec<f64> = nodes.points().iter().map(|p| p[0] * p[0] + 0.3 * p[1]).collect();
    let env = convex_envelope(nodes.points(), &vals).unwrap();
    assert!(env.active.iter().all(|&a| a));
    for (a, b) in vals.iter().zip(&env.values) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn envelope_collinear_points_middle_inactive() {
    // One-dimensional configuration embedded in the plane: the middle
    // lifted point sits above the chord and drops out.
    let points = vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![1.0, 0.0]];
    let values = vec![0.0, 1.0, 0.0];
    let env = convex_envelope(&points, &values).unwrap();
    assert!(env.active[0] && env.active[2]);
    assert!(!env.active[1]);
    assert!(env.values[1].abs() < 1e-9, "midpoint envelope {}", env.values[1]);
}

#[test]
fn envelope_idempotent() {
    let (nodes, _) = grid_nodes(0.0, 1.0, 7);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let raw: Vec<f64> = (0..nodes.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let once = convex_envelope(nodes.points(), &raw).unwrap();
    let twice = convex_envelope(nodes.points(), &once.values).unwrap();
    for (a, b) in once.values.iter().zip(&twice.values) {
        assert!((a - b).abs() < 1e-9);
    }
    assert!(twice.active.iter().all(|&a| a));
    // Envelope never exceeds the data.
    for (e, r) in once.values.iter().zip(&raw) {
        assert!(*e <= r + 1e-10);
    }
}

#[test]
fn modulus_of_affine_function() {
    let (nodes, h) = grid_nodes(0.0, 1.0, 17);
    let p = [0.75f64, -0.5];
    let pn = (p[0] * p[0] + p[1] * p[1]).sqrt();
    let values: Vec<f64> = nodes.points().iter().map(|x| p[0] * x[0] + p[1] * x[1]).collect();
    let u = PLConvexFunction::from_values_unchecked(nodes, values);
    let deltas = modulus::default_deltas(2.0 * h, 1.2, 24);
    let curve = modulus::modulus(&u, &deltas).unwrap();
    for (d, w) in curve.deltas().iter().zip(curve.omegas()) {
        let exact = pn * d;
        assert!(
            (w - exact).abs() <= pn * 2.0 * h + 1e-12,
            "omega({d}) = {w} vs {exact}"
        );
    }
}

#[test]
fn modulus_zero_boundary_forms_agree() {
    let (nodes, h) = grid_nodes(0.0, 1.0, 13);
    // Zero boundary data: distance-like bowl.
    let values: Vec<f64> = nodes
        .points()
        .iter()
        .map(|p| -(p[0].min(1.0 - p[0]).min(p[1]).min(1.0 - p[1])))
        .collect();
    let u = PLConvexFunction::from_values_unchecked(nodes, values);
    let deltas = modulus::default_deltas(h, 1.4, 20);
    let a = modulus::raw_boundary_modulus(&u, &deltas);
    let b = modulus::raw_zero_boundary_modulus(&u, &deltas);
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-12, "forms differ: {x} vs {y}");
    }
}

#[test]
fn modulus_curve_invariants_on_random_data() {
    let (nodes, h) = grid_nodes(0.0, 1.0, 9);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..5 {
        let raw: Vec<f64> = (0..nodes.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let u = PLConvexFunction::envelope_of(nodes.clone(), &raw).unwrap();
        let deltas = modulus::default_deltas(h, 1.5, 16);
        // `ModulusCurve::new` enforces both monotonicity invariants.
        let curve = modulus::modulus(&u, &deltas).unwrap();
        assert_eq!(curve.deltas().len(), 16);
    }
}

#[test]
fn subgradient_bound_affine_equality() {
    let (nodes, h) = grid_nodes(0.0, 1.0, 9);
    let p = [0.6, 0.3];
    let values: Vec<f64> = nodes.points().iter().map(|x| p[0] * x[0] + p[1] * x[1]).collect();
    let u = PLConvexFunction::from_values_unchecked(nodes, values);
    let deltas = modulus::default_deltas(h, 1.5, 30);
    let curve = modulus::modulus(&u, &deltas).unwrap();
    let report = subgradient_bound_check(&u, &curve, 1e-9);
    assert!(report.violations.is_empty(), "worst {}", report.worst_margin);
}

#[test]
fn subgradient_bound_distance_cone() {
    // u = -dist(x, boundary) on rings through both polygon vertices and
    // edge midpoints: subgradient slopes are exactly the facet normals and
    // the aligned boundary pairs certify omega(d)/d = 1.
    let m = 16usize;
    let poly = ConvexPolytope::regular_ngon(m, 1.0).unwrap();
    let apothem = (std::f64::consts::PI / m as f64).cos();
    let tau = std::f64::consts::TAU;
    let mut pts = vec![vec![0.0, 0.0]];
    let rings = 6;
    for k in 1..=rings {
        let s = k as f64 / rings as f64;
        for j in 0..m {
            let th = tau * j as f64 / m as f64;
            pts.push(vec![s * th.cos(), s * th.sin()]);
            let tm = tau * (j as f64 + 0.5) / m as f64;
            pts.push(vec![s * apothem * tm.cos(), s * apothem * tm.sin()]);
        }
    }
    let nodes = NodeSet::new(poly.clone(), pts).unwrap();
    let values: Vec<f64> = nodes.points().iter().map(|p| -poly.dist_boundary(p)).collect();
    let u = PLConvexFunction::from_values_unchecked(nodes.clone(), values);
    let deltas = modulus::default_deltas(apothem / rings as f64 * 0.5, 2.0, 40);
    let curve = modulus::modulus(&u, &deltas).unwrap();
    let report = subgradient_bound_check(&u, &curve, 1e-9);
    assert!(
        report.violations.is_empty(),
        "worst margin {}",
        report.worst_margin
    );
    // All subgradients of the distance cone have norm at most 1.
    for &i in nodes.interior() {
        let cell = subdifferential_cell(&u, i);
        for v in &cell.vertices {
            assert!(norm(v) <= 1.0 + 1e-9);
        }
    }
}

#[test]
fn eval_matches_node_values_for_convex_data() {
    let (nodes, _) = grid_nodes(0.0, 1.0, 7);
    let u = quadratic(&nodes);
    for i in [0usize, 12, 30] {
        let x = nodes.point(i).to_vec();
        assert!((u.eval(&x) - u.value(i)).abs() < 1e-9);
    }
    // Between nodes the PL interpolant of a convex function lies between
    // the function and the function plus the chord gap O(h^2).
    let q = vec![0.51, 0.493];
    let v = u.eval(&q);
    assert!(v >= 0.5 * (q[0] * q[0] + q[1] * q[1]) - 1e-9);
    assert!(v <= 0.5 * (q[0] * q[0] + q[1] * q[1]) + 0.05);
}

#[test]
fn from_convex_values_rejects_nonconvex() {
    let (nodes, _) = grid_nodes(0.0, 1.0, 5);
    let mut values: Vec<f64> = nodes.points().iter().map(|p| p[0] + p[1]).collect();
    assert!(PLConvexFunction::from_convex_values(nodes.clone(), values.clone()).is_ok());
    // Push one interior node above the envelope.
    let mid = nodes.interior()[0];
    values[mid] += 0.5;
    assert!(PLConvexFunction::from_convex_values(nodes, values).is_err());
}

#[test]
fn cells_disjoint_interiors_spot_check() {
    let (nodes, _) = grid_nodes(0.0, 1.0, 7);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let raw: Vec<f64> = (0..nodes.len()).map(|_| rng.random_range(-0.5..0.5)).collect();
    let u = PLConvexFunction::envelope_of(nodes.clone(), &raw).unwrap();
    // Sample gradients; count how many cells claim each sample.
    let ints = nodes.interior().to_vec();
    let cells_list: Vec<_> = ints.iter().map(|&i| subdifferential_cell(&u, i)).collect();
    for _ in 0..200 {
        let g = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        let mut hits = 0;
        for c in &cells_list {
            if c.vertices.len() >= 3 {
                // Strictly inside test via edge cross products.
                let ring = crate::geometry::order_ccw_2d(&c.vertices);
                let mut inside = true;
                for k in 0..ring.len() {
                    let a = ring[k];
                    let b = ring[(k + 1) % ring.len()];
                    let cr = (b[0] - a[0]) * (g[1] - a[1]) - (b[1] - a[1]) * (g[0] - a[0]);
                    if cr <= 1e-9 {
                        inside = false;
                        break;
                    }
                }
                if inside {
                    hits += 1;
                }
            }
        }
        assert!(hits <= 1, "gradient {g:?} claimed by {hits} cells");
    }
}

#[test]
fn nodeset_rejects_outside_and_duplicate_nodes() {
    let domain = ConvexPolytope::cuboid(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
    assert!(NodeSet::new(domain.clone(), vec![vec![0.5, 0.5], vec![1.5, 0.5]]).is_err());
    assert!(NodeSet::new(
        domain,
        vec![vec![0.5, 0.5], vec![0.5, 0.5], vec![0.0, 0.0]]
    )
    .is_err());
}

#[test]
fn knn_returns_nearest_sorted() {
    let (nodes, h) = grid_nodes(0.0, 1.0, 9);
    let center = nodes
        .points()
        .iter()
        .position(|p| dist(p, &[0.5, 0.5]) < 1e-12)
        .unwrap();
    let nb = nodes.grid().knn(nodes.points(), center, 8);
    assert_eq!(nb.len(), 8);
    // 4 axis neighbors at h, 4 diagonal at h sqrt(2).
    let d0 = dist(nodes.point(center), nodes.point(nb[0]));
    let d7 = dist(nodes.point(center), nodes.point(nb[7]));
    assert!((d0 - h).abs() < 1e-12);
    assert!((d7 - h * 2.0f64.sqrt()).abs() < 1e-12);
}
