//! Explicit barrier functions on the cylinder `K_{1,sqrt 2}` and their
//! Hessian determinants in closed form, plus the convexity certification
//! grids and the constants they feed into the maximum-principle bounds.
//!
//! The profiles in play, all vanishing at 0:
//!   power profile   a(x1) = x1^(2/n - eps_term), eps_term = eps for n = 2,
//!                   0 otherwise;
//!   lower profile   a_lower(x1) = x1 (1 - ln x1)          (n = 2),
//!   upper profile   a_upper(x1) = x1 (1/2 - ln x1)^(1/2)  (n = 2);
//! for n >= 3 both log profiles collapse to the power profile. The barrier
//! is a(x1) * b(x') with the radial factor b(x') = |x'|^2 / 2 - 1, so it
//! vanishes on the bottom base x1 = 0 and on the mantle |x'| = sqrt 2.

use crate::error::{Error, Result};
use crate::exec;
use crate::vecmath::norm;
use serde::{Deserialize, Serialize};

pub const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Which barrier family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BarrierVariant {
    /// `w_eps = a_eps(x1) b(x')`, the lower-bounded-determinant family.
    PowerEps,
    /// `w_bar = a_upper(x1) b(x')`, the upper-bounded-determinant family.
    LogUpper,
}

/// Dimension, variant, and (for n = 2) the exponent defect eps.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BarrierSpec {
    pub n: usize,
    pub variant: BarrierVariant,
    /// Only meaningful for n = 2 with the power family; ignored otherwise.
    pub eps: f64,
}

impl BarrierSpec {
    pub fn new(n: usize, variant: BarrierVariant, eps: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput("dimension must be >= 2".into()));
        }
        if n == 2 && variant == BarrierVariant::PowerEps && !(eps > 0.0 && eps <= 0.5) {
            return Err(Error::InvalidInput(format!(
                "eps must lie in (0, 1/2] for n = 2 (got {eps})"
            )));
        }
        Ok(Self { n, variant, eps })
    }

    /// Exponent of the power profile: `2/n` minus the n = 2 defect.
    pub fn power_exponent(&self) -> f64 {
        if self.n == 2 {
            1.0 - self.eps
        } else {
            2.0 / self.n as f64
        }
    }

    /// The axial profile of this spec.
    pub fn profile(&self, x1: f64) -> f64 {
        match self.variant {
            BarrierVariant::PowerEps => pow_profile(x1, self.power_exponent()),
            BarrierVariant::LogUpper => a_upper(self.n, x1),
        }
    }

    /// Barrier value `a(x1) b(x')`; rejects points outside the closed
    /// cylinder `[0,1] x B_sqrt2`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::InvalidInput("point dimension mismatch".into()));
        }
        let x1 = x[0];
        let r = norm(&x[1..]);
        if !(0.0..=1.0).contains(&x1) || r > SQRT2 + 1e-12 {
            return Err(Error::InvalidInput(format!(
                "point ({x1}, |x'| = {r}) outside the closed cylinder"
            )));
        }
        Ok(self.profile(x1) * b_radial(&x[1..]))
    }

    /// Closed-form Hessian determinant
    /// `(a''/a b - (a'/a |x'|)^2) a^n`, singular at x1 = 0.
    pub fn det_hessian(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::InvalidInput("point dimension mismatch".into()));
        }
        let x1 = x[0];
        if x1 <= 0.0 {
            return Err(Error::InvalidInput("determinant is singular at x1 = 0".into()));
        }
        let r2: f64 = x[1..].iter().map(|v| v * v).sum();
        let b = 0.5 * r2 - 1.0;
        Ok(match self.variant {
            BarrierVariant::PowerEps => {
                let alpha = self.power_exponent();
                // (a''/a b - (a'/a)^2 r^2) a^n with a = x1^alpha collapses to
                // alpha ((alpha - 1) b - alpha r^2) x1^(alpha n - 2).
                alpha * ((alpha - 1.0) * b - alpha * r2)
                    * pow_profile(x1, alpha * self.n as f64 - 2.0)
            }
            BarrierVariant::LogUpper => {
                if self.n == 2 {
                    let s = 0.5 - x1.ln();
                    let a = x1 * s.sqrt();
                    let a1 = -x1.ln() / s.sqrt();
                    let a2 = -(1.0 - x1.ln()) / (2.0 * x1 * s.powf(1.5));
                    a2 * a * b - a1 * a1 * r2
                } else {
                    let alpha = 2.0 / self.n as f64;
                    alpha * ((alpha - 1.0) * b - alpha * r2)
                        * pow_profile(x1, alpha * self.n as f64 - 2.0)
                }
            }
        })
    }
}

/// `x1^alpha` with the continuous extension 0 at 0 (also for alpha <= 0,
/// where the limit diverges but the barrier multiplies it by a vanishing
/// factor; callers guard x1 > 0 in that case).
fn pow_profile(x1: f64, alpha: f64) -> f64 {
    if x1 == 0.0 {
        return 0.0;
    }
    if alpha == 0.0 {
        return 1.0;
    }
    (alpha * x1.ln()).exp()
}

/// Lower log profile: `x1 (1 - ln x1)` for n = 2, `x1^(2/n)` otherwise.
pub fn a_lower(n: usize, x1: f64) -> f64 {
    if x1 == 0.0 {
        return 0.0;
    }
    if n == 2 {
        x1 * (1.0 - x1.ln())
    } else {
        pow_profile(x1, 2.0 / n as f64)
    }
}

/// Upper log profile: `x1 (1/2 - ln x1)^(1/2)` for n = 2, `x1^(2/n)` else.
pub fn a_upper(n: usize, x1: f64) -> f64 {
    if x1 == 0.0 {
        return 0.0;
    }
    if n == 2 {
        x1 * (0.5 - x1.ln()).sqrt()
    } else {
        pow_profile(x1, 2.0 / n as f64)
    }
}

/// Radial factor `|x'|^2 / 2 - 1`.
pub fn b_radial(xp: &[f64]) -> f64 {
    0.5 * xp.iter().map(|v| v * v).sum::<f64>() - 1.0
}

/// Certification grid: geometric in x1 toward the singular base, uniform in
/// the radius. These densities resolve the (monotone) sign structure of the
/// closed-form determinants at the tolerances used downstream.
pub const CERT_GRID_X1: usize = 401;
pub const CERT_GRID_R: usize = 201;

pub fn cert_x1_grid(count: usize) -> Vec<f64> {
    let min = 1e-6f64;
    (0..count)
        .map(|k| min.powf(1.0 - k as f64 / (count - 1) as f64))
        .collect()
}

/// Result of a convexity certification over a grid of `K_{1,rho}`.
#[derive(Clone, Debug, Serialize)]
pub struct ConvexityCert {
    pub convex: bool,
    /// Minimum of each trailing principal minor over the grid, index 0
    /// holding the full determinant (k = 1).
    pub minor_minima: Vec<f64>,
    pub rho: f64,
}

/// Sylvester-style certification: all trailing principal minors positive on
/// a parameter grid of the open cylinder. Minors for k >= 2 have the closed
/// form `a^(n-k+1)`, which is positive for x1 > 0; the full determinant is
/// the binding one.
pub fn convexity_cert(spec: &BarrierSpec, rho: f64) -> Result<ConvexityCert> {
    if !(rho > 0.0 && rho <= SQRT2) {
        return Err(Error::InvalidInput("need 0 < rho <= sqrt 2".into()));
    }
    let x1s = cert_x1_grid(CERT_GRID_X1);
    let n = spec.n;
    let rows = exec::map_slice(&x1s, |&x1| {
        let mut minima = vec![f64::INFINITY; n];
        for jr in 0..CERT_GRID_R {
            let r = rho * jr as f64 / (CERT_GRID_R - 1) as f64;
            let mut x = vec![0.0; n];
            x[0] = x1;
            x[1] = r;
            let det = spec.det_hessian(&x).expect("interior point");
            minima[0] = minima[0].min(det);
            let a = spec.profile(x1);
            for k in 2..=n {
                let m = a.powi((n - k + 1) as i32);
                minima[k - 1] = minima[k - 1].min(m);
            }
        }
        minima
    });
    let mut minor_minima = vec![f64::INFINITY; n];
    for row in rows {
        for (m, v) in minor_minima.iter_mut().zip(row) {
            *m = m.min(v);
        }
    }
    Ok(ConvexityCert {
        convex: minor_minima.iter().all(|&m| m > 0.0),
        minor_minima,
        rho,
    })
}

/// Minimum of the Hessian determinant of `w_eps` over the grid of
/// `K_{1,rho}` (sequential twin available for benches).
pub fn det_grid_min(spec: &BarrierSpec, rho: f64) -> f64 {
    let x1s = cert_x1_grid(CERT_GRID_X1);
    let mins = exec::map_slice(&x1s, |&x1| det_min_at(spec, x1, rho));
    mins.into_iter().fold(f64::INFINITY, f64::min)
}

pub fn det_grid_min_seq(spec: &BarrierSpec, rho: f64) -> f64 {
    cert_x1_grid(CERT_GRID_X1)
        .iter()
        .map(|&x1| det_min_at(spec, x1, rho))
        .fold(f64::INFINITY, f64::min)
}

fn det_min_at(spec: &BarrierSpec, x1: f64, rho: f64) -> f64 {
    let mut min = f64::INFINITY;
    for jr in 0..CERT_GRID_R {
        let r = rho * jr as f64 / (CERT_GRID_R - 1) as f64;
        let mut x = vec![0.0; spec.n];
        x[0] = x1;
        x[1] = r;
        min = min.min(spec.det_hessian(&x).expect("interior point"));
    }
    min
}

/// Maximum of the Hessian determinant over the grid of `K_{1,rho}`.
pub fn det_grid_max(spec: &BarrierSpec, rho: f64) -> f64 {
    let x1s = cert_x1_grid(CERT_GRID_X1);
    let maxs = exec::map_slice(&x1s, |&x1| {
        let mut max = f64::NEG_INFINITY;
        for jr in 0..CERT_GRID_R {
            let r = rho * jr as f64 / (CERT_GRID_R - 1) as f64;
            let mut x = vec![0.0; spec.n];
            x[0] = x1;
            x[1] = r;
            max = max.max(spec.det_hessian(&x).expect("interior point"));
        }
        max
    });
    maxs.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// The certified pair (lambda, rho): on `K_{1,rho}` the barrier `w_eps` is
/// convex with Hessian determinant at least lambda.
///
/// For n = 2 these are the closed forms eps/4 and sqrt(eps/2). For n >= 3
/// the lower bound reads `lambda(rho) = (2/n)((1-2/n)(1-rho^2/2) -
/// (2/n)rho^2)`; rho is picked as the largest grid value keeping lambda at
/// least half its rho -> 0 limit (an implementation selection; the bound
/// only needs existence).
pub fn lemma_constants(n: usize, eps: f64) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::InvalidInput("dimension must be >= 2".into()));
    }
    if n == 2 {
        if !(eps > 0.0 && eps <= 0.5) {
            return Err(Error::InvalidInput(format!(
                "eps must lie in (0, 1/2] (got {eps})"
            )));
        }
        return Ok((eps / 4.0, (eps / 2.0).sqrt()));
    }
    let t = 2.0 / n as f64;
    let lambda_at = |rho: f64| t * ((1.0 - t) * (1.0 - 0.5 * rho * rho) - t * rho * rho);
    let half_limit = 0.5 * t * (1.0 - t);
    let mut best = (lambda_at(0.001), 0.001);
    let mut k = 1;
    loop {
        let rho = 0.001 * k as f64;
        if rho > SQRT2 {
            break;
        }
        let l = lambda_at(rho);
        if l >= half_limit {
            best = (l, rho);
        } else {
            break;
        }
        k += 1;
    }
    Ok(best)
}

/// The maximum-principle profile constant and its checker.
#[derive(Clone, Copy, Debug)]
pub struct AmpProfile {
    pub n: usize,
    /// The constant in `|v(x)| <= C_n a_lower(x1)`.
    pub c_n: f64,
}

/// Constant for the strengthened maximum principle on the doubled cylinder.
/// For n = 2 it is `sqrt 8 * e` (from optimizing eps = -1/ln x1); for
/// n >= 3 it is `lambda^(-1/n) rho^(-2(n-1)/n)` with the certified pair.
pub fn amp_profile_bound(n: usize) -> Result<AmpProfile> {
    if n < 2 {
        return Err(Error::InvalidInput("dimension must be >= 2".into()));
    }
    let c_n = if n == 2 {
        8.0f64.sqrt() * std::f64::consts::E
    } else {
        let (lambda, rho) = lemma_constants(n, 0.5)?;
        lambda.powf(-1.0 / n as f64) * rho.powf(-2.0 * (n as f64 - 1.0) / n as f64)
    };
    Ok(AmpProfile { n, c_n })
}

impl AmpProfile {
    /// The eps minimizing the barrier family bound at depth x1 (n = 2).
    pub fn eps_rule(x1: f64) -> f64 {
        -1.0 / x1.ln()
    }

    /// Piecewise bound from the n = 2 proof: the optimized-eps branch for
    /// x1 <= e^-2, the eps = 1/2 branch after.
    pub fn optimized_bound_2d(x1: f64) -> f64 {
        let s8 = 8.0f64.sqrt();
        if x1 == 0.0 {
            0.0
        } else if x1 <= (-2.0f64).exp() {
            s8 * std::f64::consts::E * x1 * (-x1.ln())
        } else {
            2.0 * s8 * x1.sqrt()
        }
    }

    /// Global profile bound `C_n a_lower(x1)`.
    pub fn global_bound(&self, x1: f64) -> f64 {
        self.c_n * a_lower(self.n, x1)
    }

    /// Check `|v| <= C_n a_lower(min(x1, 2 - x1))` for samples on the
    /// doubled cylinder; returns the worst margin (negative = violation).
    pub fn check_samples(&self, points: &[Vec<f64>], values: &[f64]) -> f64 {
        let mut worst = f64::INFINITY;
        for (x, &v) in points.iter().zip(values) {
            let depth = x[0].min(2.0 - x[0]).max(0.0);
            worst = worst.min(self.global_bound(depth) - v.abs());
        }
        worst
    }
}

/// Central-difference Hessian determinant of a scalar field, the
/// independent oracle for the closed forms.
pub fn fd_hessian_det(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> f64 {
    let n = x.len();
    let mut hess = nalgebra::DMatrix::zeros(n, n);
    let at = |shift: &[(usize, f64)]| {
        let mut y = x.to_vec();
        for &(k, d) in shift {
            y[k] += d;
        }
        f(&y)
    };
    for i in 0..n {
        for j in 0..n {
            let v = if i == j {
                (at(&[(i, h)]) - 2.0 * f(x) + at(&[(i, -h)])) / (h * h)
            } else {
                (at(&[(i, h), (j, h)]) - at(&[(i, h), (j, -h)]) - at(&[(i, -h), (j, h)])
                    + at(&[(i, -h), (j, -h)]))
                    / (4.0 * h * h)
            };
            hess[(i, j)] = v;
        }
    }
    hess.determinant()
}
