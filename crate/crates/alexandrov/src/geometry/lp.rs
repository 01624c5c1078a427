//! Small dense linear programs by Seidel's randomized incremental method.
//!
//! Dimensions here are tiny (2..=6) while constraint counts can reach the
//! node count of a mesh, which is exactly the regime Seidel's method is good
//! at: expected O(m) per solve at fixed dimension. All inputs are inequality
//! constraints `a . x <= b` plus an implicit bounding box `|x_k| <= bound`,
//! so every subproblem is bounded and feasibility is decided explicitly.

/// One inequality constraint `a . x <= b`.
#[derive(Clone, Debug)]
pub struct LinCon {
    pub a: Vec<f64>,
    pub b: f64,
}

impl LinCon {
    pub fn new(a: Vec<f64>, b: f64) -> Self {
        Self { a, b }
    }
}

const FEAS_EPS: f64 = 1e-10;

/// Outcome of an LP solve.
#[derive(Clone, Debug)]
pub enum LpResult {
    /// Optimal point minimizing the objective.
    Optimal(Vec<f64>),
    Infeasible,
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Minimize `c . x` subject to `cons` and `|x_k| <= bound`.
///
/// The shuffle seed is fixed, so identical inputs give identical outputs.
/// While iterates sit at corners of the artificial box, constraint checks
/// carry O(bound * eps) rounding and a near-tangent constraint can be
/// skipped; the result is therefore verified against every constraint and
/// the solve retried with offenders promoted to the front of the order.
pub fn minimize(dim: usize, cons: &[LinCon], c: &[f64], bound: f64) -> LpResult {
    assert!(dim >= 1 && c.len() == dim);
    let mut order: Vec<usize> = (0..cons.len()).collect();
    let mut state = 0x5eed5eed5eed5eedu64 ^ (cons.len() as u64);
    for i in (1..order.len()).rev() {
        let j = (splitmix(&mut state) % (i as u64 + 1)) as usize;
        order.swap(i, j);
    }
    let mut last = LpResult::Infeasible;
    for _attempt in 0..6 {
        match seidel(dim, cons, &order, c, bound) {
            LpResult::Infeasible => return LpResult::Infeasible,
            LpResult::Optimal(x) => {
                let mut worst: Option<(usize, f64)> = None;
                for (ci, con) in cons.iter().enumerate() {
                    let val = dot(&con.a, &x);
                    let excess = (val - con.b) / (1.0 + con.b.abs() + val.abs());
                    if excess > 10.0 * FEAS_EPS && worst.map_or(true, |(_, w)| excess > w) {
                        worst = Some((ci, excess));
                    }
                }
                match worst {
                    None => return LpResult::Optimal(x),
                    Some((ci, _)) => {
                        let pos = order.iter().position(|&o| o == ci).unwrap();
                        order.remove(pos);
                        order.insert(0, ci);
                        last = LpResult::Optimal(x);
                    }
                }
            }
        }
    }
    last
}

fn seidel(dim: usize, cons: &[LinCon], order: &[usize], c: &[f64], bound: f64) -> LpResult {
    if dim == 1 {
        return solve_1d(cons, order, c[0], bound);
    }
    // Start at the box corner minimizing the objective.
    let mut x: Vec<f64> = c
        .iter()
        .map(|&ck| if ck > 0.0 { -bound } else { bound })
        .collect();
    for (pos, &ci) in order.iter().enumerate() {
        let con = &cons[ci];
        let val = dot(&con.a, &x);
        // The dot product at box-corner scale carries cancellation noise;
        // classify as violated only beyond that noise floor, and let the
        // final verification pass catch anything skipped here.
        let noise: f64 = con.a.iter().zip(&x).map(|(a, xk)| (a * xk).abs()).sum::<f64>() * 1e-14;
        let scale = 1.0 + con.b.abs() + val.abs();
        if val <= con.b + FEAS_EPS * scale + noise {
            continue;
        }
        // Optimum of the first `pos+1` constraints lies on this hyperplane.
        let norm2: f64 = con.a.iter().map(|v| v * v).sum();
        if norm2.sqrt() < 1e-300 {
            // 0 . x <= b with b < 0: infeasible.
            return LpResult::Infeasible;
        }
        let k = con
            .a
            .iter()
            .enumerate()
            .max_by(|l, r| l.1.abs().partial_cmp(&r.1.abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let ak = con.a[k];
        // Substitute x_k = (b - sum_{j != k} a_j x_j) / a_k everywhere.
        let reduce = |a: &[f64], b: f64| -> (Vec<f64>, f64) {
            let f = a[k] / ak;
            let mut ra = Vec::with_capacity(dim - 1);
            for j in 0..dim {
                if j != k {
                    ra.push(a[j] - f * con.a[j]);
                }
            }
            (ra, b - f * con.b)
        };
        let mut sub = Vec::with_capacity(pos + 2);
        for &cj in &order[..pos] {
            let (ra, rb) = reduce(&cons[cj].a, cons[cj].b);
            sub.push(LinCon::new(ra, rb));
        }
        // Box bounds of the eliminated coordinate become two constraints.
        let mut ek = vec![0.0; dim];
        ek[k] = 1.0;
        let (ra, rb) = reduce(&ek, bound);
        sub.push(LinCon::new(ra, rb));
        ek[k] = -1.0;
        let (ra, rb) = reduce(&ek, bound);
        sub.push(LinCon::new(ra, rb));
        // Reduced objective (constant offset does not matter for argmin).
        let f = c[k] / ak;
        let mut rc = Vec::with_capacity(dim - 1);
        for j in 0..dim {
            if j != k {
                rc.push(c[j] - f * con.a[j]);
            }
        }
        let sub_order: Vec<usize> = (0..sub.len()).collect();
        match seidel(dim - 1, &sub, &sub_order, &rc, bound) {
            LpResult::Infeasible => return LpResult::Infeasible,
            LpResult::Optimal(y) => {
                let mut lifted = Vec::with_capacity(dim);
                let mut yi = y.iter();
                let mut partial = 0.0;
                // Fill the non-eliminated coordinates first to compute x_k.
                for j in 0..dim {
                    if j != k {
                        let v = *yi.next().unwrap();
                        partial += con.a[j] * v;
                        lifted.push(v);
                    } else {
                        lifted.push(f64::NAN);
                    }
                }
                lifted[k] = (con.b - partial) / ak;
                x = lifted;
            }
        }
    }
    LpResult::Optimal(x)
}

fn solve_1d(cons: &[LinCon], order: &[usize], c: f64, bound: f64) -> LpResult {
    let mut lo = -bound;
    let mut hi = bound;
    for &ci in order {
        let con = &cons[ci];
        let a = con.a[0];
        if a.abs() < 1e-300 {
            if con.b < -FEAS_EPS * (1.0 + con.b.abs()) {
                return LpResult::Infeasible;
            }
            continue;
        }
        let v = con.b / a;
        if a > 0.0 {
            hi = hi.min(v);
        } else {
            lo = lo.max(v);
        }
    }
    if lo > hi + FEAS_EPS * (1.0 + lo.abs() + hi.abs()) {
        return LpResult::Infeasible;
    }
    let x = if c > 0.0 { lo } else { hi };
    LpResult::Optimal(vec![x.clamp(lo.min(hi), hi.max(lo))])
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maximize `dir . x` over the constraint set; `None` if infeasible.
pub fn maximize_direction(dim: usize, cons: &[LinCon], dir: &[f64], bound: f64) -> Option<f64> {
    let c: Vec<f64> = dir.iter().map(|v| -v).collect();
    match minimize(dim, cons, &c, bound) {
        LpResult::Optimal(x) => Some(dot(dir, &x)),
        LpResult::Infeasible => None,
    }
}

/// Chebyshev center: the point maximizing the distance to all constraint
/// hyperplanes. Returns `(center, radius)`; a negative radius certifies an
/// infeasible system (how far the constraints would have to be relaxed).
pub fn chebyshev_center(dim: usize, cons: &[LinCon], bound: f64) -> Option<(Vec<f64>, f64)> {
    // max t  s.t.  a . x + |a| t <= b, framed as minimize -t in (x, t).
    let mut lifted = Vec::with_capacity(cons.len());
    for con in cons {
        let norm = dot(&con.a, &con.a).sqrt();
        let mut a = con.a.clone();
        a.push(norm);
        lifted.push(LinCon::new(a, con.b));
    }
    let mut c = vec![0.0; dim + 1];
    c[dim] = -1.0;
    match minimize(dim + 1, &lifted, &c, bound) {
        LpResult::Optimal(mut x) => {
            let t = x.pop().unwrap();
            Some((x, t))
        }
        LpResult::Infeasible => None,
    }
}
