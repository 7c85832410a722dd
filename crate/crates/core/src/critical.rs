//! Critical coefficients and critical points.
//!
//! Freeing the coefficient of one inner term `x^β`, the largest value `d*` that
//! keeps the polynomial nonnegative on the positive orthant is
//! `inf_y Σ c_i e^{⟨α_i-β, y⟩} - Σ_{j≠l} d_j e^{⟨β_j-β, y⟩}`, and the minimizer
//! `y*` gives the zero `x* = exp(y*)`. Only directions inside the affine span of
//! the support matter, so the search runs over its pivot coordinates and every
//! other coordinate of `x*` is 1.

use nalgebra::{DMatrix, DVector};
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::DecomposeError;
use crate::geom::{interior_classification, span_coordinates, Classification, PointSet};
use crate::poly::{Exponent, SparsePoly};
use crate::rational::{ln_abs, Rational};

pub const GRADIENT_TOL: f64 = 1e-12;
pub const ITERATION_CAP: usize = 200;
/// Accepted when the line search stalls in floating-point noise.
const STALL_TOL: f64 = 1e-9;
const RANDOM_STARTS: usize = 16;
const GRID_SAMPLES: usize = 10_000;
const GRID_RESTARTS: usize = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalPoint {
    pub x_star: Vec<f64>,
    pub d_star: f64,
    /// Relative stationarity residual at `x_star`.
    pub residual: f64,
    /// Position of the freed term among the inner terms (graded-lex order).
    pub which_beta: usize,
}

/// `Σ s_i e^{w_i + ⟨a_i, z⟩}` with signs `s_i` and log-magnitudes `w_i`.
struct ExpSum {
    log_mag: Vec<f64>,
    sign: Vec<f64>,
    dirs: Vec<DVector<f64>>,
    dim: usize,
}

/// Values are reported scaled by `e^{-shift}` so nothing overflows.
struct Eval {
    shift: f64,
    sum: f64,
    abs: f64,
    grad: DVector<f64>,
    hess: DMatrix<f64>,
}

impl Eval {
    fn value(&self) -> f64 {
        self.sum * self.shift.exp()
    }

    fn rel_grad(&self) -> f64 {
        if self.dim_is_zero() {
            return 0.0;
        }
        self.grad.amax() / self.abs
    }

    fn dim_is_zero(&self) -> bool {
        self.grad.is_empty()
    }

    /// `value` expressed in units of `e^{shift}`.
    fn scaled_to(&self, shift: f64) -> f64 {
        self.sum * (self.shift - shift).exp()
    }
}

impl ExpSum {
    fn exponents(&self, z: &DVector<f64>) -> Vec<f64> {
        self.dirs.iter().zip(&self.log_mag).map(|(a, w)| w + a.dot(z)).collect()
    }

    fn eval(&self, z: &DVector<f64>) -> Eval {
        let ex = self.exponents(z);
        let shift = ex.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        let mut abs = 0.0;
        let mut grad = DVector::zeros(self.dim);
        let mut hess = DMatrix::zeros(self.dim, self.dim);
        for ((e, s), a) in ex.iter().zip(&self.sign).zip(&self.dirs) {
            let t = (e - shift).exp();
            sum += s * t;
            abs += t;
            grad.axpy(s * t, a, 1.0);
            hess.ger(s * t, a, a, 1.0);
        }
        Eval { shift, sum, abs, grad, hess }
    }

    fn value(&self, z: &DVector<f64>) -> f64 {
        self.eval(z).value()
    }

    /// Damped Newton with Levenberg regularization and Armijo backtracking.
    fn minimize(&self, start: DVector<f64>) -> (DVector<f64>, Eval) {
        let mut z = start;
        let mut cur = self.eval(&z);
        for _ in 0..ITERATION_CAP {
            if cur.rel_grad() <= GRADIENT_TOL {
                break;
            }
            let Some(step) = self.newton_step(&cur) else { break };
            let slope = cur.grad.dot(&step);
            let mut t = 1.0;
            let mut accepted = None;
            while t > 1e-16 {
                let cand = &z + &step * t;
                let next = self.eval(&cand);
                let lhs = next.scaled_to(cur.shift);
                // a tie in the value is only progress if the gradient shrinks
                let progress = lhs < cur.sum || next.rel_grad() < cur.rel_grad();
                if lhs.is_finite() && lhs <= cur.sum + 1e-4 * t * slope && progress {
                    accepted = Some((cand, next));
                    break;
                }
                t *= 0.5;
            }
            if accepted.is_none() {
                // near the minimum the value differences drown in rounding; a full
                // Newton step that shrinks the gradient is still progress
                let cand = &z + &step;
                let next = self.eval(&cand);
                if next.sum.is_finite() && next.rel_grad() < 0.5 * cur.rel_grad() {
                    accepted = Some((cand, next));
                }
            }
            match accepted {
                Some((cand, next)) => {
                    z = cand;
                    cur = next;
                }
                None => break,
            }
        }
        (z, cur)
    }

    fn newton_step(&self, cur: &Eval) -> Option<DVector<f64>> {
        let n = self.dim;
        let scale = (0..n).map(|i| cur.hess[(i, i)].abs()).fold(0.0, f64::max).max(cur.abs * 1e-300);
        let mut mu = 0.0;
        for _ in 0..60 {
            let h = &cur.hess + DMatrix::identity(n, n) * mu;
            if let Some(ch) = h.cholesky() {
                let p = ch.solve(&(-&cur.grad));
                if p.iter().all(|v| v.is_finite()) && cur.grad.dot(&p) < 0.0 {
                    return Some(p);
                }
            }
            mu = if mu == 0.0 { scale * 1e-10 + 1e-300 } else { mu * 10.0 };
        }
        None
    }
}

/// Pivot coordinates of the affine span of `points`, and each `p - base` restricted to them.
fn reduced_dirs(points: &[Exponent], base: &Exponent, coords: &[usize]) -> Vec<DVector<f64>> {
    points
        .iter()
        .map(|p| DVector::from_iterator(coords.len(), coords.iter().map(|&c| p.0[c] as f64 - base.0[c] as f64)))
        .collect()
}

fn lift(z: &DVector<f64>, coords: &[usize], nvars: usize) -> Vec<f64> {
    let mut x = vec![1.0; nvars];
    for (k, &c) in coords.iter().enumerate() {
        x[c] = z[k].exp();
    }
    x
}

struct Split {
    outer: Vec<(Exponent, Rational)>,
    inner: Vec<(Exponent, Rational)>,
}

fn split_terms(f: &SparsePoly) -> Split {
    let s = f.split_support();
    Split {
        outer: s.lambda_part.into_iter().map(|e| (e.clone(), f.coeff(&e))).collect(),
        inner: s.gamma_part.into_iter().map(|e| (e.clone(), -f.coeff(&e))).collect(),
    }
}

fn check_interior(outer: &[(Exponent, Rational)], beta: &Exponent) -> Result<(), DecomposeError> {
    if outer.is_empty() {
        return Err(DecomposeError::NonInterior);
    }
    let a = PointSet::new(outer.iter().map(|(e, _)| e.clone()))?;
    match interior_classification(&a, beta)? {
        Classification::Interior => Ok(()),
        _ => Err(DecomposeError::NonInterior),
    }
}

/// `d*` and `x*` for a polynomial with a single inner term.
pub fn critical_point_single(f: &SparsePoly) -> Result<CriticalPoint, DecomposeError> {
    let sp = split_terms(f);
    if sp.inner.len() != 1 {
        return Err(DecomposeError::Shape(format!("expected one inner term, found {}", sp.inner.len())));
    }
    let beta = &sp.inner[0].0;
    check_interior(&sp.outer, beta)?;
    let support: Vec<Exponent> = sp.outer.iter().map(|(e, _)| e.clone()).collect();
    let coords = span_coordinates(&support);
    let sum = ExpSum {
        log_mag: sp.outer.iter().map(|(_, c)| ln_abs(c)).collect(),
        sign: vec![1.0; sp.outer.len()],
        dirs: reduced_dirs(&support, beta, &coords),
        dim: coords.len(),
    };
    let (z, ev) = sum.minimize(DVector::zeros(coords.len()));
    let residual = ev.rel_grad();
    if !(residual <= STALL_TOL) {
        return Err(DecomposeError::NonConvergence { residual });
    }
    Ok(CriticalPoint { x_star: lift(&z, &coords, f.nvars()), d_star: ev.value(), residual, which_beta: 0 })
}

/// `d_l*` and the zero when the `freed`-th inner term's coefficient is released and the
/// others are kept. Expects every inner coefficient `d_j = -coeff` to be positive.
pub fn critical_point_multi(f: &SparsePoly, freed: usize) -> Result<CriticalPoint, DecomposeError> {
    critical_point_multi_seeded(f, freed, 0)
}

pub fn critical_point_multi_seeded(f: &SparsePoly, freed: usize, seed: u64) -> Result<CriticalPoint, DecomposeError> {
    let sp = split_terms(f);
    let Some((beta_l, _)) = sp.inner.get(freed).cloned() else {
        return Err(DecomposeError::Shape(format!("no inner term with index {freed}")));
    };
    if sp.inner.iter().any(|(_, d)| !d.is_positive()) {
        return Err(DecomposeError::Shape("inner coefficients must be negative after sign normalization".into()));
    }
    for (b, _) in &sp.inner {
        check_interior(&sp.outer, b)?;
    }
    let outer_pts: Vec<Exponent> = sp.outer.iter().map(|(e, _)| e.clone()).collect();
    let coords = span_coordinates(&outer_pts);
    let others: Vec<&(Exponent, Rational)> =
        sp.inner.iter().enumerate().filter(|&(j, _)| j != freed).map(|(_, t)| t).collect();
    let mut pts = outer_pts.clone();
    pts.extend(others.iter().map(|(e, _)| e.clone()));
    let mut log_mag: Vec<f64> = sp.outer.iter().map(|(_, c)| ln_abs(c)).collect();
    log_mag.extend(others.iter().map(|(_, d)| ln_abs(d)));
    let mut sign = vec![1.0; sp.outer.len()];
    sign.extend(std::iter::repeat_n(-1.0, others.len()));
    let sum = ExpSum { log_mag, sign, dirs: reduced_dirs(&pts, &beta_l, &coords), dim: coords.len() };
    let r = coords.len();

    // candidate starts: origin, the minimizer of the outer part alone, random points
    let outer_only = ExpSum {
        log_mag: sum.log_mag[..sp.outer.len()].to_vec(),
        sign: vec![1.0; sp.outer.len()],
        dirs: sum.dirs[..sp.outer.len()].to_vec(),
        dim: r,
    };
    let mut starts = vec![DVector::zeros(r), outer_only.minimize(DVector::zeros(r)).0];
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (freed as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    for _ in 0..RANDOM_STARTS {
        starts.push(DVector::from_fn(r, |_, _| rng.gen_range(-2.0..2.0)));
    }
    let mut best: Option<(DVector<f64>, Eval)> = None;
    for s in starts {
        let (z, ev) = sum.minimize(s);
        if !ev.value().is_finite() && ev.value() < 0.0 {
            return Err(DecomposeError::Unbounded);
        }
        if best.as_ref().is_none_or(|(_, b)| ev.value() < b.value()) {
            best = Some((z, ev));
        }
    }
    let (mut z, mut ev) = best.unwrap();

    // no sampled point near the minimizer may undercut it
    let mut restarts = 0;
    loop {
        let base = ev.value();
        let tol = 1e-10 * ev.abs * ev.shift.exp();
        let mut lower = None;
        for _ in 0..GRID_SAMPLES {
            let cand = DVector::from_fn(r, |k, _| z[k] + rng.gen_range(-3.0..3.0));
            let v = sum.value(&cand);
            if v < base - tol {
                lower = Some(cand);
                break;
            }
        }
        let Some(cand) = lower else { break };
        restarts += 1;
        if restarts > GRID_RESTARTS {
            return Err(DecomposeError::NonConvergence { residual: ev.rel_grad() });
        }
        let (z2, ev2) = sum.minimize(cand);
        if ev2.value() < -1e300 {
            return Err(DecomposeError::Unbounded);
        }
        if ev2.value() < ev.value() {
            z = z2;
            ev = ev2;
        }
    }
    let residual = ev.rel_grad();
    if !(residual <= STALL_TOL) {
        return Err(DecomposeError::NonConvergence { residual });
    }
    Ok(CriticalPoint { x_star: lift(&z, &coords, f.nvars()), d_star: ev.value(), residual, which_beta: freed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    #[test]
    fn am_gm_pair() {
        let cp = critical_point_single(&parse_poly("1 + x1^2 - x1", 1).unwrap()).unwrap();
        assert!((cp.d_star - 2.0).abs() < 1e-12);
        assert!((cp.x_star[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn motzkin_shape() {
        let cp = critical_point_single(&parse_poly("1 + x1^4*x2^2 + x1^2*x2^4 - x1^2*x2^2", 2).unwrap()).unwrap();
        assert!((cp.d_star - 3.0).abs() < 1e-12);
    }

    #[test]
    fn lower_dimensional_support_keeps_transverse_coordinates() {
        let cp = critical_point_single(&parse_poly("4*x2^2 + x1^2*x2^2 - x1*x2^2", 2).unwrap()).unwrap();
        assert!((cp.d_star - 4.0).abs() < 1e-12);
        assert!((cp.x_star[0] - 2.0).abs() < 1e-9);
        assert_eq!(cp.x_star[1], 1.0);
    }

    #[test]
    fn square_example_multi() {
        let f = parse_poly("1 + x1^6 + x2^6 + x1^6*x2^6 - x1^2*x2 - x1^4*x2", 2).unwrap();
        // inner terms in graded-lex order: x1^2*x2 then x1^4*x2
        let cp = critical_point_multi(&f, 1).unwrap();
        assert!((cp.d_star - 2.11373).abs() < 1e-5, "{}", cp.d_star);
        assert!((cp.x_star[0] - 1.04521).abs() < 1e-5);
        assert!((cp.x_star[1] - 0.764724).abs() < 1e-5);
    }

    #[test]
    fn segment_example_multi() {
        let f = parse_poly("1 + 4*x1^2 + x1^4 - 3*x1 - x1^3", 1).unwrap();
        let cp = critical_point_multi(&f, 1).unwrap();
        assert!((cp.d_star - 3.0).abs() < 1e-9);
        assert!((cp.x_star[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn non_interior_rejected() {
        let f = parse_poly("1 + x1^2 - x1^3", 1).unwrap();
        assert_eq!(critical_point_single(&f), Err(DecomposeError::NonInterior));
    }
}
