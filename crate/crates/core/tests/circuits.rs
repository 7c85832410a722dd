mod common;

use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;

use sonc::circuit::{circuit_number, circuit_zero, is_nonnegative_circuit, theta_compare, CircuitPoly, ThetaCmp};
use sonc::poly::{monomial_value, Exponent};
use sonc::rational::{frac, ln_abs, Rational};

use common::*;

/// Full-dimensional trellis with an interior lattice point.
fn random_shape(rng: &mut rand_chacha::ChaCha8Rng) -> (Vec<Exponent>, Exponent) {
    loop {
        let n = rng.gen_range(1..=3);
        let t = random_trellis(rng, n, 8, None);
        let inner = interior_lattice(&t, n, 8);
        if !inner.is_empty() {
            let beta = inner[rng.gen_range(0..inner.len())].clone();
            return (t.points().to_vec(), beta);
        }
    }
}

/// Circuit with `d` at its circuit number and the prescribed positive zero `x`:
/// `c_i = λ_i d x^(β - α_i)`.
fn boundary_circuit(points: &[Exponent], beta: &Exponent, x: &[Rational], d: Rational) -> CircuitPoly {
    let probe = CircuitPoly::new(points.iter().map(|p| (p.clone(), frac(1, 1))).collect(), beta.clone(), d.clone()).unwrap();
    let outer = probe
        .outer_terms()
        .zip(probe.lambdas())
        .map(|((e, _), l)| (e.clone(), l * &d * monomial_value(beta, x) / monomial_value(e, x)))
        .collect();
    CircuitPoly::new(outer, beta.clone(), d).unwrap()
}

fn random_positive(rng: &mut rand_chacha::ChaCha8Rng) -> Rational {
    frac(rng.gen_range(1..=9), rng.gen_range(1..=6))
}

#[test]
fn exact_and_float_comparisons_agree_off_the_boundary() {
    let mut rng = rng(31);
    for _ in 0..200 {
        let (pts, beta) = random_shape(&mut rng);
        let outer = pts.iter().map(|p| (p.clone(), random_coeff(&mut rng))).collect();
        let d = frac(rng.gen_range(1..=60), rng.gen_range(1..=10));
        let c = CircuitPoly::new(outer, beta, d.clone()).unwrap();
        let log_theta = circuit_number(&c).log_value;
        let gap = ln_abs(&d) - log_theta;
        if gap.abs() > 1e-12 * (1.0 + log_theta.abs()) {
            let float = if gap < 0.0 { ThetaCmp::Below } else { ThetaCmp::Above };
            assert_eq!(theta_compare(&c), float);
        }
    }
}

#[test]
fn boundary_zeros_have_the_predicted_modulus() {
    let mut rng = rng(32);
    for _ in 0..60 {
        let (pts, beta) = random_shape(&mut rng);
        let n = beta.nvars();
        let x: Vec<Rational> = (0..n).map(|_| random_positive(&mut rng)).collect();
        let d = random_positive(&mut rng);
        let c = boundary_circuit(&pts, &beta, &x, d);
        assert_eq!(theta_compare(&c), ThetaCmp::Equal);
        let f = c.to_poly();
        assert!(f.evaluate(&x).unwrap().is_zero());
        let z = circuit_zero(&c).unwrap();
        for (zi, xi) in z.iter().zip(&x) {
            assert!((zi - xi.to_f64().unwrap()).abs() <= 1e-8 * xi.to_f64().unwrap(), "{z:?} vs {x:?}");
        }
        // every sign pattern that is a zero has modulus x
        for mask in 0u32..(1 << n) {
            let y: Vec<Rational> = x.iter().enumerate().map(|(i, v)| if mask >> i & 1 == 1 { -v.clone() } else { v.clone() }).collect();
            let value = f.evaluate(&y).unwrap();
            assert!(!value.is_negative());
            if value.is_zero() {
                assert!(y.iter().zip(&x).all(|(a, b)| a.abs() == *b));
            }
        }
        // balancing: c_i x^α_i / λ_i all equal
        let ratios: Vec<f64> = c
            .outer_terms()
            .zip(c.lambdas())
            .map(|((e, ci), l)| {
                let mono: f64 = e.0.iter().zip(&z).map(|(&k, v)| v.powi(k as i32)).product();
                ci.to_f64().unwrap() * mono / l.to_f64().unwrap()
            })
            .collect();
        for r in &ratios {
            assert!((r - ratios[0]).abs() <= 1e-10 * ratios[0].abs(), "{ratios:?}");
        }
    }
}

#[test]
fn strictly_nonnegative_even_circuits_are_positive() {
    let mut rng = rng(33);
    for _ in 0..10 {
        let (pts, beta) = loop {
            let (p, b) = random_shape(&mut rng);
            if b.is_even() {
                break (p, b);
            }
        };
        let c = random_circuit(&mut rng, &pts, &beta, None);
        assert!(is_nonnegative_circuit(&c));
        assert_eq!(theta_compare(&c), ThetaCmp::Below);
        let f = c.to_poly();
        for _ in 0..1000 {
            let x: Vec<Rational> = (0..beta.nvars())
                .map(|_| {
                    let v = frac(rng.gen_range(1..=40), rng.gen_range(1..=20));
                    if rng.gen_bool(0.5) { -v } else { v }
                })
                .collect();
            assert!(f.evaluate(&x).unwrap().is_positive(), "{f} at {x:?}");
        }
    }
}

#[test]
fn motzkin_is_on_the_boundary() {
    let c = CircuitPoly::new(
        vec![(exp(&[0, 0]), frac(1, 1)), (exp(&[4, 2]), frac(1, 1)), (exp(&[2, 4]), frac(1, 1))],
        exp(&[2, 2]),
        frac(3, 1),
    )
    .unwrap();
    assert_eq!(theta_compare(&c), ThetaCmp::Equal);
    let z = circuit_zero(&c).unwrap();
    assert!(z.iter().all(|v| (v - 1.0).abs() < 1e-10));
    assert!((circuit_number(&c).value() - 3.0).abs() < 1e-12);
}
