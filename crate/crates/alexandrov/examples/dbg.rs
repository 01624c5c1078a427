use alexandrov::regularity::*;
use alexandrov::solver::mesh::{tensor_mesh, AxisCoords};
use alexandrov::solver::*;
use std::time::Instant;
fn main() {
    // Criterion 7/8: n=3 cube, f=1, g=0, face-refined toward x1=0.
    let mut norms3 = Vec::new();
    let mut norms2 = Vec::new();
    for (min_gap, ratio) in [(4e-3, 1.7), (5e-4, 1.55), (6e-5, 1.45)] {
        let ax1 = AxisCoords::geometric_toward_lo(0.0, 1.0, min_gap, ratio);
        let n1 = ax1.len();
        let cross = AxisCoords::uniform(0.0, 1.0, 9);
        let mesh = tensor_mesh(&[ax1, cross.clone(), cross]).unwrap();
        let nn = mesh.nodes.len();
        let p = MAProblem { mesh, density: Density::constant(1.0), lambda_upper: 1.0,
            lambda_lower: Some(1.0), boundary: BoundaryData::Zero };
        let t = Instant::now();
        let params = SolveParams { tol: 3e-7, max_sweeps: 20000, ..Default::default() };
        let rep = solve(&p, &params).unwrap();
        let g3 = weighted_gradient_sum(&p.mesh, rep.solution.values(), 3.0, 0.0);
        let g2 = weighted_gradient_sum(&p.mesh, rep.solution.values(), 2.0, 0.0);
        norms3.push(g3); norms2.push(g2);
        let fit = holder_fit(&rep.solution, 0, 0.0, (min_gap * ratio.powi(3), 0.25));
        match fit {
            Ok(f) => eprintln!("3D n1={n1} ({nn} nodes): alpha={:.3} g3={g3:.4} g2={g2:.4} sweeps={} time={:.1?}", f.alpha, rep.sweeps, t.elapsed()),
            Err(e) => eprintln!("3D n1={n1}: fit err {e} g3={g3:.4} time={:.1?}", t.elapsed()),
        }
    }
    eprintln!("ratios p=3: {:?}", norms3.windows(2).map(|w| w[1]/w[0]).collect::<Vec<_>>());
    eprintln!("ratios p=2: {:?}", norms2.windows(2).map(|w| w[1]/w[0]).collect::<Vec<_>>());
}
