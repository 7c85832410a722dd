//! Random instance generators and independent oracles shared by the integration tests.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use sonc::certificate::{CertCircuit, CertMode, SoncCertificate};
use sonc::circuit::{circuit_number, CircuitPoly};
use sonc::geom::{barycentric, interior_classification, Barycentric, Classification, PointSet, Trellis};
use sonc::linalg::Matrix;
use sonc::lp::LinearSystem;
use sonc::poly::{Exponent, SparsePoly};
use sonc::rational::{frac, int, rationalize, Rational};

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn exp(v: &[u32]) -> Exponent {
    Exponent(v.to_vec())
}

pub fn random_coeff(rng: &mut ChaCha8Rng) -> Rational {
    frac(rng.gen_range(1..=20), rng.gen_range(1..=5))
}

fn random_even_point(rng: &mut ChaCha8Rng, n: usize, max_degree: u32) -> Exponent {
    loop {
        let e = Exponent((0..n).map(|_| 2 * rng.gen_range(0..=max_degree / 2)).collect());
        if e.degree() <= max_degree as u64 {
            return e;
        }
    }
}

/// Every lattice point of the box `[0, hi]^n`.
fn box_points(n: usize, hi: u32) -> Vec<Exponent> {
    let mut out = vec![Exponent(vec![])];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..=hi).map(move |k| {
                    let mut q = p.0.clone();
                    q.push(k);
                    Exponent(q)
                })
            })
            .collect();
    }
    out
}

/// Positive outer part and an interior inner exponent: `n <= 3`, at most seven outer
/// terms, degree at most ten.
pub fn random_single_instance(rng: &mut ChaCha8Rng) -> (SparsePoly, Exponent) {
    loop {
        let n = rng.gen_range(1..=3);
        let m = rng.gen_range(n + 1..=7);
        let mut pts: Vec<Exponent> = Vec::new();
        for _ in 0..4 * m {
            let p = random_even_point(rng, n, 10);
            if !pts.contains(&p) {
                pts.push(p);
            }
            if pts.len() == m {
                break;
            }
        }
        let set = PointSet::new(pts.clone()).unwrap();
        let interior: Vec<Exponent> = box_points(n, 10)
            .into_iter()
            .filter(|b| b.degree() <= 10 && !pts.contains(b))
            .filter(|b| matches!(interior_classification(&set, b), Ok(Classification::Interior)))
            .collect();
        if interior.is_empty() {
            continue;
        }
        let beta = interior[rng.gen_range(0..interior.len())].clone();
        let mut outer = SparsePoly::zero(n);
        for p in pts {
            outer.add_term(p, random_coeff(rng));
        }
        return (outer, beta);
    }
}

/// `min_y Σ c_α exp⟨α - β, y⟩` by Newton's method on the logarithm, which is convex.
pub fn d_star_oracle(outer: &SparsePoly, beta: &Exponent) -> f64 {
    let n = beta.nvars();
    let terms: Vec<(Vec<f64>, f64)> = outer
        .terms()
        .map(|(e, c)| {
            let shift: Vec<f64> = e.0.iter().zip(&beta.0).map(|(&a, &b)| a as f64 - b as f64).collect();
            (shift, c.to_f64().unwrap().ln())
        })
        .collect();
    let log_phi = |y: &DVector<f64>| -> f64 {
        let v: Vec<f64> = terms.iter().map(|(s, lc)| lc + s.iter().zip(y.iter()).map(|(a, b)| a * b).sum::<f64>()).collect();
        let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
    };
    let mut y = DVector::zeros(n);
    for _ in 0..500 {
        let v: Vec<f64> = terms.iter().map(|(s, lc)| lc + s.iter().zip(y.iter()).map(|(a, b)| a * b).sum::<f64>()).collect();
        let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = v.iter().map(|x| (x - m).exp()).collect();
        let total: f64 = w.iter().sum();
        let p: Vec<f64> = w.iter().map(|x| x / total).collect();
        let mean = DVector::from_fn(n, |k, _| terms.iter().zip(&p).map(|((s, _), pi)| pi * s[k]).sum());
        let hess = DMatrix::from_fn(n, n, |a, b| {
            terms.iter().zip(&p).map(|((s, _), pi)| pi * (s[a] - mean[a]) * (s[b] - mean[b])).sum::<f64>()
        }) + DMatrix::identity(n, n) * 1e-12;
        if mean.norm() < 1e-14 {
            break;
        }
        let step = hess.lu().solve(&(-&mean)).unwrap_or_else(|| -mean.clone());
        let here = log_phi(&y);
        let mut t = 1.0;
        while t > 1e-12 && log_phi(&(&y + &step * t)) > here - 1e-4 * t * mean.dot(&(-&step)).abs() {
            t *= 0.5;
        }
        y += step * t;
    }
    log_phi(&y).exp()
}

/// A nonnegative circuit with random outer coefficients and `|d| = ρ·Θ` rounded down.
pub fn random_circuit(rng: &mut ChaCha8Rng, trellis: &[Exponent], beta: &Exponent, vertex: Option<(&Exponent, Rational)>) -> CircuitPoly {
    let outer: Vec<(Exponent, Rational)> = trellis
        .iter()
        .map(|p| match &vertex {
            Some((v, c)) if *v == p => (p.clone(), c.clone()),
            _ => (p.clone(), random_coeff(rng)),
        })
        .collect();
    let probe = CircuitPoly::new(outer.clone(), beta.clone(), int(1)).unwrap();
    let theta = circuit_number(&probe).value();
    let rho = rng.gen_range(0.3..0.95);
    let d = rationalize(rho * theta, 1e-9);
    CircuitPoly::new(outer, beta.clone(), d).unwrap()
}

pub fn interior_lattice(t: &Trellis, n: usize, hi: u32) -> Vec<Exponent> {
    box_points(n, hi)
        .into_iter()
        .filter(|b| matches!(barycentric(t, b), Barycentric::Interior(_)))
        .collect()
}

pub fn random_trellis(rng: &mut ChaCha8Rng, n: usize, hi: u32, containing: Option<&Exponent>) -> Trellis {
    loop {
        let mut pts: Vec<Exponent> = containing.into_iter().cloned().collect();
        while pts.len() < n + 1 {
            let p = Exponent((0..n).map(|_| 2 * rng.gen_range(0..=hi / 2)).collect());
            if !pts.contains(&p) {
                pts.push(p);
            }
        }
        if let Ok(t) = Trellis::new(pts) {
            return t;
        }
    }
}

/// A SONC polynomial `f = C₁ + C₂` whose certificate `{C₁, C₂}` uses an exponent
/// `γ` outside `supp(f)`: `γ` is the inner point of `C₂` and a vertex of `C₁`, with
/// coefficients that cancel.
pub fn widened_instance(rng: &mut ChaCha8Rng) -> (SparsePoly, SoncCertificate, Exponent) {
    let n = rng.gen_range(1..=2);
    let hi = if n == 1 { 8 } else { 6 };
    loop {
        let t2 = random_trellis(rng, n, hi, None);
        let gammas: Vec<Exponent> = interior_lattice(&t2, n, hi).into_iter().filter(|e| e.is_even()).collect();
        if gammas.is_empty() {
            continue;
        }
        let gamma = gammas[rng.gen_range(0..gammas.len())].clone();
        let c2 = random_circuit(rng, t2.points(), &gamma, None);
        let t1 = random_trellis(rng, n, hi, Some(&gamma));
        let betas: Vec<Exponent> = interior_lattice(&t1, n, hi).into_iter().filter(|b| *b != gamma).collect();
        if betas.is_empty() {
            continue;
        }
        let beta1 = betas[rng.gen_range(0..betas.len())].clone();
        let c1 = random_circuit(rng, t1.points(), &beta1, Some((&gamma, c2.d.clone())));
        let f = c1.to_poly().add(&c2.to_poly());
        if !f.coeff(&gamma).is_zero() {
            continue;
        }
        let cert = SoncCertificate {
            polynomial: f.clone(),
            circuits: vec![CertCircuit { circuit: c1, slack: None }, CertCircuit { circuit: c2, slack: None }],
            monomial_squares: Vec::new(),
            mode: CertMode::Exact,
            hypotheses: None,
        };
        return (f, cert, gamma);
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| if rng.gen_bool(0.45) { int(rng.gen_range(-3..=3)) } else { int(0) })
                .collect()
        })
        .collect()
}

/// Consistent systems whose column deletions each drop the rank by exactly one.
pub fn random_helly_system(rng: &mut ChaCha8Rng) -> LinearSystem {
    loop {
        let rows = rng.gen_range(2..=4);
        let cols = rng.gen_range(rows..=rows + 3);
        let a = random_matrix(rng, rows, cols);
        let z: Vec<Rational> = (0..cols).map(|_| int(rng.gen_range(-2..=4))).collect();
        let b: Vec<Rational> = a.iter().map(|r| sonc::linalg::dot(r, &z)).collect();
        let sys = LinearSystem::new(a, b);
        if sonc::lp::helly_crosscheck(&sys).is_ok() {
            return sys;
        }
    }
}

/// Nonnegative solvability of `A z = b` by Gaussian elimination of the equalities
/// followed by Fourier–Motzkin elimination of the remaining free variables.
pub fn fourier_motzkin_feasible(a: &Matrix, b: &[Rational]) -> bool {
    let cols = a.first().map_or(0, |r| r.len());
    // reduced row echelon form of [A | b]
    let mut m: Matrix = a.iter().zip(b).map(|(r, v)| r.iter().cloned().chain([v.clone()]).collect()).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(p) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for v in m[row].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = m[row].clone();
        for (r, other) in m.iter_mut().enumerate() {
            if r != row && !other[col].is_zero() {
                let f = other[col].clone();
                for (x, y) in other.iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    if m[row..].iter().any(|r| !r[cols].is_zero()) {
        return false;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    // inequalities g·y <= h over the free variables y
    let mut ineqs: Vec<(Vec<Rational>, Rational)> = Vec::new();
    for (k, _) in free.iter().enumerate() {
        let mut g = vec![Rational::zero(); free.len()];
        g[k] = -Rational::one();
        ineqs.push((g, Rational::zero()));
    }
    for (r, _) in pivots.iter().enumerate() {
        // z_pivot = b_r - Σ m[r][free] y >= 0
        let g: Vec<Rational> = free.iter().map(|&c| m[r][c].clone()).collect();
        ineqs.push((g, m[r][cols].clone()));
    }
    for k in 0..free.len() {
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for (g, h) in ineqs {
            if g[k].is_zero() {
                rest.push((g, h));
            } else if g[k] > Rational::zero() {
                pos.push((g, h));
            } else {
                neg.push((g, h));
            }
        }
        for (gp, hp) in &pos {
            for (gn, hn) in &neg {
                let (sp, sn) = (-gn[k].clone(), gp[k].clone());
                let g: Vec<Rational> = gp.iter().zip(gn).map(|(x, y)| x * &sp + y * &sn).collect();
                let h = hp * &sp + hn * &sn;
                if !rest.contains(&(g.clone(), h.clone())) {
                    rest.push((g, h));
                }
            }
        }
        ineqs = rest;
    }
    ineqs.iter().all(|(_, h)| *h >= Rational::zero())
}
