//! Circuit polynomials `Σ c_i x^{α_i} - d x^β` and their circuit number
//! `Θ = Π (c_i / λ_i)^{λ_i}`.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::CircuitError;
use crate::geom::{barycentric, Barycentric, BarycentricCoords, Trellis};
use crate::poly::{Exponent, SparsePoly};
use crate::rational::{lcm_of_denominators, ln_abs, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircuitPoly {
    /// Trellis, inner exponent and barycentric weights.
    pub coords: BarycentricCoords,
    /// Outer coefficients aligned with `coords.trellis.points()`.
    pub outer: Vec<Rational>,
    /// The inner term is `-d x^β`.
    pub d: Rational,
}

impl CircuitPoly {
    pub fn new(outer: Vec<(Exponent, Rational)>, beta: Exponent, d: Rational) -> Result<Self, CircuitError> {
        if outer.iter().any(|(_, c)| !c.is_positive()) {
            return Err(CircuitError::NonPositiveOuter);
        }
        if outer.iter().any(|(e, _)| *e == beta) {
            return Err(CircuitError::NotInterior);
        }
        let trellis = Trellis::new(outer.iter().map(|(e, _)| e.clone()).collect())
            .map_err(|_| CircuitError::NotTrellis)?;
        if trellis.len() != outer.len() || beta.nvars() != outer[0].0.nvars() {
            return Err(CircuitError::NotTrellis);
        }
        let Barycentric::Interior(coords) = barycentric(&trellis, &beta) else {
            return Err(CircuitError::NotInterior);
        };
        let outer = trellis
            .points()
            .iter()
            .map(|p| outer.iter().find(|(e, _)| e == p).unwrap().1.clone())
            .collect();
        Ok(CircuitPoly { coords, outer, d })
    }

    /// Reads `f` as a circuit: its even positive terms are the trellis and the single
    /// remaining term is the inner one.
    pub fn from_poly(f: &SparsePoly) -> Result<Self, CircuitError> {
        let split = f.split_support();
        if split.gamma_part.len() != 1 || split.lambda_part.is_empty() {
            return Err(CircuitError::NotCircuit);
        }
        let beta = split.gamma_part.into_iter().next().unwrap();
        let outer = split.lambda_part.into_iter().map(|e| {
            let c = f.coeff(&e);
            (e, c)
        });
        CircuitPoly::new(outer.collect(), beta.clone(), -f.coeff(&beta))
    }

    pub fn beta(&self) -> &Exponent {
        &self.coords.target
    }

    pub fn lambdas(&self) -> &[Rational] {
        &self.coords.lambdas
    }

    pub fn trellis(&self) -> &[Exponent] {
        self.coords.trellis.points()
    }

    pub fn nvars(&self) -> usize {
        self.beta().nvars()
    }

    pub fn outer_terms(&self) -> impl Iterator<Item = (&Exponent, &Rational)> {
        self.trellis().iter().zip(&self.outer)
    }

    pub fn to_poly(&self) -> SparsePoly {
        let mut p = SparsePoly::zero(self.nvars());
        for (e, c) in self.outer_terms() {
            p.add_term(e.clone(), c.clone());
        }
        p.add_term(self.beta().clone(), -self.d.clone());
        p
    }
}

/// `Θ` as a float logarithm plus the exact data it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitNumber {
    pub log_value: f64,
    pub coefficients: Vec<Rational>,
    pub lambdas: Vec<Rational>,
}

impl CircuitNumber {
    pub fn from_parts(coefficients: &[Rational], lambdas: &[Rational]) -> Self {
        let log_value = coefficients
            .iter()
            .zip(lambdas)
            .map(|(c, l)| l.to_f64().unwrap() * (ln_abs(c) - ln_abs(l)))
            .sum();
        CircuitNumber { log_value, coefficients: coefficients.to_vec(), lambdas: lambdas.to_vec() }
    }

    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }

    /// Exact order of `|d|` against `Θ`.
    pub fn compare(&self, d: &Rational) -> Ordering {
        theta_compare_raw(&self.coefficients, &self.lambdas, d)
    }
}

pub fn circuit_number(c: &CircuitPoly) -> CircuitNumber {
    CircuitNumber::from_parts(&c.outer, c.lambdas())
}

/// Below the float log gap the exact path decides.
const LOG_TIE_BAND: f64 = 1e-9;

/// Exact order of `|d|` against `Π (c_i/λ_i)^{λ_i}`.
///
/// With `N` the common denominator of the `λ_i`, both sides are raised to the `N`-th
/// power so every exponent becomes an integer.
pub fn theta_compare_raw(c: &[Rational], lambdas: &[Rational], d: &Rational) -> Ordering {
    if d.is_zero() {
        return Ordering::Less;
    }
    let d = d.abs();
    let theta = CircuitNumber::from_parts(c, lambdas);
    let gap = ln_abs(&d) - theta.log_value;
    if gap.is_finite() && gap.abs() > LOG_TIE_BAND * (1.0 + theta.log_value.abs()) {
        return if gap < 0.0 { Ordering::Less } else { Ordering::Greater };
    }
    let n = lcm_of_denominators(lambdas);
    let n_usize = n.to_usize().expect("common denominator fits in usize");
    let lhs = num_traits::pow(d, n_usize);
    let mut rhs = Rational::one();
    for (ci, li) in c.iter().zip(lambdas) {
        let e: BigInt = (li * Rational::from_integer(n.clone())).to_integer();
        rhs *= num_traits::pow(ci / li, e.to_usize().expect("exponent fits in usize"));
    }
    lhs.cmp(&rhs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThetaCmp {
    Below,
    Equal,
    Above,
}

/// Where `|d|` sits relative to `Θ`.
pub fn theta_compare(c: &CircuitPoly) -> ThetaCmp {
    match theta_compare_raw(&c.outer, c.lambdas(), &c.d) {
        Ordering::Less => ThetaCmp::Below,
        Ordering::Equal => ThetaCmp::Equal,
        Ordering::Greater => ThetaCmp::Above,
    }
}

/// Even `β`: `d <= Θ`. Otherwise: `|d| <= Θ`.
pub fn is_nonnegative_circuit(c: &CircuitPoly) -> bool {
    if c.beta().is_even() && !c.d.is_positive() {
        return true;
    }
    theta_compare(c) != ThetaCmp::Above
}

/// The unique positive zero of a circuit sitting exactly at `d = Θ`.
///
/// Solves `⟨α_i - β, y⟩ = ln(λ_i Θ / c_i)` for `y = ln x` by least squares; the
/// minimum-norm solution is taken, which pins directions transverse to the trellis.
pub fn circuit_zero(c: &CircuitPoly) -> Result<Vec<f64>, CircuitError> {
    if theta_compare(c) != ThetaCmp::Equal || (c.beta().is_even() && c.d.is_negative()) {
        return Err(CircuitError::NotBoundary);
    }
    let theta = circuit_number(c).log_value;
    let n = c.nvars();
    let beta = c.beta().as_f64();
    let m = c.trellis().len();
    let a = DMatrix::from_fn(m, n, |i, k| c.trellis()[i].as_f64()[k] - beta[k]);
    let b = DVector::from_fn(m, |i, _| {
        c.lambdas()[i].to_f64().unwrap().ln() + theta - ln_abs(&c.outer[i])
    });
    let svd = a.clone().svd(true, true);
    let y = svd.solve(&b, 1e-12).map_err(|_| CircuitError::IllConditioned(f64::INFINITY))?;
    let residual = (&a * &y - &b).amax();
    if !(residual <= 1e-9 * (1.0 + b.amax())) {
        return Err(CircuitError::IllConditioned(residual));
    }
    // for odd β with d < 0 the real zero is a sign flip of this point
    Ok(y.iter().map(|v| v.exp()).collect())
}
