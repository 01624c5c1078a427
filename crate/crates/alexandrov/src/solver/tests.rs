use super::mesh::{tensor_mesh, AxisCoords};
use super::*;
use nalgebra::{DMatrix, DVector};

fn unit_square_mesh(n: usize) -> SimplicialMesh {
    let axes = vec![AxisCoords::uniform(0.0, 1.0, n), AxisCoords::uniform(0.0, 1.0, n)];
    tensor_mesh(&axes).unwrap()
}

fn problem(mesh: SimplicialMesh, density: Density, boundary: BoundaryData) -> MAProblem {
    MAProblem {
        mesh,
        lambda_upper: density.factor.max(1.0) * 2.0,
        lambda_lower: None,
        density,
        boundary,
    }
}

#[test]
fn target_masses_partition_of_unity() {
    let mesh = unit_square_mesh(9);
    let p = problem(mesh, Density::constant(1.0), BoundaryData::Zero);
    let targets = p.target_masses().unwrap();
    let h = 1.0 / 8.0;
    // Deep interior nodes of the Kuhn triangulation own 6 triangles, for a
    // barycentric dual cell of area h^2.
    let nodes = &p.mesh.nodes;
    for &i in nodes.interior() {
        let x = nodes.point(i);
        if x[0] > 1.5 * h && x[0] < 1.0 - 1.5 * h && x[1] > 1.5 * h && x[1] < 1.0 - 1.5 * h {
            assert!((targets[i] - h * h).abs() < 1e-12);
        }
    }
    // Quadrature total (before the boundary shares are dropped) is exact
    // for affine densities.
    let total_quadrature: f64 = p
        .mesh
        .simplices
        .iter()
        .map(|s| p.mesh.simplex_volume(s) * p.density.eval(&p.mesh.simplex_centroid(s)))
        .sum();
    assert!((total_quadrature - 1.0).abs() < 1e-12);
}

#[test]
fn target_masses_linear_density_total() {
    let p = problem(
        unit_square_mesh(17),
        Density {
            form: DensityForm::OnePlusX1,
            factor: 1.0,
        },
        BoundaryData::Zero,
    );
    let total_quadrature: f64 = p
        .mesh
        .simplices
        .iter()
        .map(|s| p.mesh.simplex_volume(s) * p.density.eval(&p.mesh.simplex_centroid(s)))
        .sum();
    // Midpoint quadrature is exact for affine integrands.
    assert!((total_quadrature - 1.5).abs() < 1e-12);
    // Interior targets approach the full integral as the boundary dual
    // layer shrinks.
    let interior_total: f64 = p.target_masses().unwrap().iter().sum();
    assert!(interior_total < 1.5 && interior_total > 1.5 - 0.4);
    // Negative densities are rejected.
    let bad = problem(
        unit_square_mesh(5),
        Density::constant(-1.0),
        BoundaryData::Zero,
    );
    assert!(bad.target_masses().is_err());
}

#[test]
fn zero_density_affine_boundary_solves_immediately() {
    let slope = vec![0.7, -0.2];
    let p = problem(
        unit_square_mesh(9),
        Density::constant(0.0),
        BoundaryData::Affine {
            slope: slope.clone(),
            offset: 0.3,
        },
    );
    let report = solve(&p, &SolveParams::default()).unwrap();
    assert_eq!(report.sweeps, 1);
    assert!(report.monotone);
    let nodes = &p.mesh.nodes;
    for i in 0..nodes.len() {
        let expect = dot(&slope, nodes.point(i)) + 0.3;
        assert!(
            (report.solution.value(i) - expect).abs() < 1e-9,
            "node {i}: {} vs {expect}",
            report.solution.value(i)
        );
    }
}

#[test]
fn manufactured_quadratic_solution() {
    // det D^2 (|x|^2/2) = 1; the discrete solution approaches it.
    let p = problem(
        unit_square_mesh(17),
        Density::constant(1.0),
        BoundaryData::HalfSquaredNorm,
    );
    let params = SolveParams {
        tol: 1e-8,
        ..Default::default()
    };
    let report = solve(&p, &params).unwrap();
    assert!(report.monotone);
    let nodes = &p.mesh.nodes;
    let mut sup = 0.0f64;
    for i in 0..nodes.len() {
        let x = nodes.point(i);
        let exact = 0.5 * (x[0] * x[0] + x[1] * x[1]);
        sup = sup.max((report.solution.value(i) - exact).abs());
    }
    assert!(sup < 5e-2, "sup error {sup} at 17x17");
    // Residuals meet the tolerance.
    assert!(report.max_residual <= params.tol);
    // The solution is a valid PL convex function (spot activity check).
    for &i in nodes.interior().iter().step_by(7) {
        assert!(report.solution.is_active(i), "node {i} inactive");
    }
}

#[test]
fn solver_is_deterministic() {
    let p = problem(
        unit_square_mesh(9),
        Density::constant(1.0),
        BoundaryData::Zero,
    );
    let params = SolveParams {
        tol: 1e-8,
        ..Default::default()
    };
    let a = solve(&p, &params).unwrap();
    let b = solve(&p, &params).unwrap();
    assert_eq!(a.sweeps, b.sweeps);
    for i in 0..p.mesh.nodes.len() {
        assert_eq!(a.solution.value(i).to_bits(), b.solution.value(i).to_bits());
    }
}

#[test]
fn doubling_density_scales_solution_by_two() {
    // mu_{2u} = 2^n mu_u: multiplying f by 2^n = 4 scales the zero-boundary
    // solution by 2, exactly at the discrete level.
    let p1 = problem(
        unit_square_mesh(9),
        Density::constant(1.0),
        BoundaryData::Zero,
    );
    let p4 = problem(
        unit_square_mesh(9),
        Density::constant(4.0),
        BoundaryData::Zero,
    );
    let params = SolveParams {
        tol: 1e-10,
        ..Default::default()
    };
    let u1 = solve(&p1, &params).unwrap();
    let u4 = solve(&p4, &params).unwrap();
    let mut sup = 0.0f64;
    for i in 0..p1.mesh.nodes.len() {
        sup = sup.max((u4.solution.value(i) - 2.0 * u1.solution.value(i)).abs());
    }
    assert!(sup < 1e-4, "sup diff {sup}");
}

#[test]
fn comparison_check_trivial_and_ordered() {
    let mesh = unit_square_mesh(9);
    let p1 = problem(mesh.clone(), Density::constant(1.0), BoundaryData::Zero);
    let p0 = problem(mesh, Density::constant(0.0), BoundaryData::Zero);
    let params = SolveParams {
        tol: 1e-9,
        ..Default::default()
    };
    let u = solve(&p1, &params).unwrap().solution;
    let v = solve(&p0, &params).unwrap().solution;
    // v = u: trivial pass.
    match comparison_check(&u, &u, 1e-9) {
        ComparisonOutcome::Holds { .. } => {}
        o => panic!("expected pass, got {o:?}"),
    }
    // mass(u) = f dx >= 0 = mass(v), equal boundary: u <= v.
    match comparison_check(&u, &v, 1e-6) {
        ComparisonOutcome::Holds { max_excess } => {
            assert!(max_excess <= 1e-6, "max excess {max_excess}")
        }
        o => panic!("expected pass, got {o:?}"),
    }
    // Precondition failure is reported distinctly: swap the order.
    match comparison_check(&v, &u, 1e-9) {
        ComparisonOutcome::PreconditionFailed { .. } => {}
        o => panic!("expected precondition failure, got {o:?}"),
    }
}

#[test]
fn equivariance_identity_and_shear() {
    let p = problem(
        unit_square_mesh(9),
        Density::constant(1.0),
        BoundaryData::Zero,
    );
    let params = SolveParams {
        tol: 1e-9,
        ..Default::default()
    };
    let id = AffineMap::identity(2);
    let rep = affine_equivariance_check(&p, &id, &params, 1e-9).unwrap();
    assert!(rep.pass, "identity sup diff {}", rep.sup_diff);
    // Volume-preserving shear.
    let shear = AffineMap::new(
        DMatrix::from_row_slice(2, 2, &[1.0, 0.35, 0.0, 1.0]),
        DVector::from_column_slice(&[0.2, -0.1]),
    )
    .unwrap();
    let rep = affine_equivariance_check(&p, &shear, &params, 1e-6).unwrap();
    assert!(rep.pass, "shear sup diff {}", rep.sup_diff);
}

#[test]
fn nonconvex_boundary_data_rejected() {
    let mesh = unit_square_mesh(7);
    let bcount = mesh.nodes.boundary_nodes().len();
    // A dip in the middle of one edge cannot extend to a convex function.
    let mut table = vec![0.0; bcount];
    let target = mesh
        .nodes
        .boundary_nodes()
        .iter()
        .position(|&b| {
            let x = mesh.nodes.point(b);
            (x[0] - 0.5).abs() < 1e-9 && x[1] < 1e-9
        })
        .unwrap();
    table[target] = -1.0;
    let p = problem(mesh, Density::constant(1.0), BoundaryData::Table(table));
    assert!(matches!(solve(&p, &SolveParams::default()), Err(Error::InvalidInput(_))));
}

#[test]
fn solver_output_satisfies_gradient_bound() {
    let p = problem(
        unit_square_mesh(13),
        Density::constant(1.0),
        BoundaryData::Zero,
    );
    let params = SolveParams {
        tol: 1e-9,
        ..Default::default()
    };
    let u = solve(&p, &params).unwrap().solution;
    let h = 1.0 / 12.0;
    let deltas = convexfn::modulus::default_deltas(h, 1.4, 30);
    let curve = convexfn::modulus::modulus(&u, &deltas).unwrap();
    let report = convexfn::subgradient_bound_check(&u, &curve, 1e-9);
    assert!(
        report.violations.is_empty(),
        "worst margin {}",
        report.worst_margin
    );
}
