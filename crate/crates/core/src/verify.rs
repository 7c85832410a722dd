//! Independent certificate checking.
//!
//! Nothing stored in a certificate is trusted: barycentric weights are solved
//! again here with a separate elimination routine, and the only shared
//! numerical code is the exact circuit-number comparison.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};

use crate::certificate::SoncCertificate;
use crate::circuit::{theta_compare_raw, ThetaCmp};
use crate::mediated::SbsCertificate;
use crate::poly::{Exponent, SparsePoly};
use crate::rational::{max_abs, to_f64, Rational};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VerifyMode {
    Exact,
    Epsilon(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CircuitCheck {
    pub index: usize,
    /// `None` when the circuit is malformed and no comparison was possible.
    pub theta: Option<ThetaCmp>,
    pub nonnegative: bool,
    pub reason: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub mode: VerifyMode,
    /// Claimed polynomial minus the recomposed sum.
    pub sum_residual: SparsePoly,
    pub per_circuit: Vec<CircuitCheck>,
    pub failures: Vec<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Barycentric weights of `beta` over `pts` by plain elimination, `None` unless unique.
fn weights(pts: &[Exponent], beta: &Exponent) -> Option<Vec<Rational>> {
    let n = beta.nvars();
    let m = pts.len();
    // augmented rows: one per coordinate plus the affine row
    let mut rows: Vec<Vec<Rational>> = (0..n)
        .map(|k| {
            let mut r: Vec<Rational> = pts.iter().map(|p| Rational::from_integer(p.0[k].into())).collect();
            r.push(Rational::from_integer(beta.0[k].into()));
            r
        })
        .collect();
    rows.push(vec![Rational::one(); m + 1]);
    let mut rank = 0;
    for col in 0..m {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else { return None };
        rows.swap(rank, p);
        let inv = rows[rank][col].recip();
        for v in rows[rank].iter_mut() {
            *v *= &inv;
        }
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && !row[col].is_zero() {
                let factor = row[col].clone();
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x -= &factor * y;
                }
            }
        }
        rank += 1;
    }
    if rows[rank..].iter().any(|r| !r[m].is_zero()) {
        return None;
    }
    Some(rows[..m].iter().map(|r| r[m].clone()).collect())
}

fn check_circuit(
    index: usize,
    outer: &[(Exponent, Rational)],
    beta: &Exponent,
    d: &Rational,
) -> CircuitCheck {
    let fail = |reason: String| CircuitCheck { index, theta: None, nonnegative: false, reason: Some(reason) };
    if outer.is_empty() {
        return fail("no outer terms".into());
    }
    if let Some((e, _)) = outer.iter().find(|(_, c)| !c.is_positive()) {
        return fail(format!("outer coefficient at {e} is not positive"));
    }
    if let Some((e, _)) = outer.iter().find(|(e, _)| !e.is_even()) {
        return fail(format!("outer exponent {e} is not even"));
    }
    if outer.iter().any(|(e, _)| e == beta) {
        return fail(format!("inner exponent {beta} repeats an outer one"));
    }
    let pts: Vec<Exponent> = outer.iter().map(|(e, _)| e.clone()).collect();
    let Some(lambdas) = weights(&pts, beta) else {
        return fail(format!("{beta} has no unique barycentric weights over the outer exponents"));
    };
    if lambdas.iter().any(|l| !l.is_positive()) {
        return fail(format!("{beta} is not in the relative interior of the outer exponents"));
    }
    let coeffs: Vec<Rational> = outer.iter().map(|(_, c)| c.clone()).collect();
    let theta = match theta_compare_raw(&coeffs, &lambdas, d) {
        Ordering::Less => ThetaCmp::Below,
        Ordering::Equal => ThetaCmp::Equal,
        Ordering::Greater => ThetaCmp::Above,
    };
    let nonnegative = (beta.is_even() && !d.is_positive()) || theta != ThetaCmp::Above;
    CircuitCheck {
        index,
        theta: Some(theta),
        nonnegative,
        reason: (!nonnegative).then(|| format!("|d| exceeds the circuit number at {beta}")),
    }
}

fn residual_failure(residual: &SparsePoly, f: &SparsePoly, mode: VerifyMode) -> Option<String> {
    if residual.is_zero() {
        return None;
    }
    let worst = max_abs(residual.terms().map(|(_, c)| c));
    match mode {
        VerifyMode::Exact => Some(format!("recomposed sum differs from the polynomial (max residual {})", to_f64(&worst))),
        VerifyMode::Epsilon(eps) => {
            let scale = f.max_abs_coeff();
            let rel = if scale.is_zero() { to_f64(&worst) } else { to_f64(&(worst / scale)) };
            (rel > eps).then(|| format!("relative residual {rel:e} exceeds {eps:e}"))
        }
    }
}

pub fn verify_sonc(cert: &SoncCertificate, f: &SparsePoly, mode: VerifyMode) -> VerificationReport {
    let mut failures = Vec::new();
    let mut sum = SparsePoly::zero(f.nvars());
    let mut per_circuit = Vec::new();
    for (i, c) in cert.circuits.iter().enumerate() {
        let outer: Vec<(Exponent, Rational)> = c.circuit.outer_terms().map(|(e, v)| (e.clone(), v.clone())).collect();
        let beta = c.circuit.beta();
        if beta.nvars() != f.nvars() || outer.iter().any(|(e, _)| e.nvars() != f.nvars()) {
            failures.push(format!("circuit {i}: wrong number of variables"));
            continue;
        }
        let check = check_circuit(i, &outer, beta, &c.circuit.d);
        if let Some(r) = &check.reason {
            failures.push(format!("circuit {i}: {r}"));
        }
        per_circuit.push(check);
        for (e, v) in outer {
            sum.add_term(e, v);
        }
        sum.add_term(beta.clone(), -c.circuit.d.clone());
    }
    for (e, c) in &cert.monomial_squares {
        if e.nvars() != f.nvars() {
            failures.push("monomial square has the wrong number of variables".into());
            continue;
        }
        if !e.is_even() || c.is_negative() {
            failures.push(format!("monomial square {c}*x^{e} is not a square"));
        }
        sum.add_term(e.clone(), c.clone());
    }
    let sum_residual = f.sub(&sum);
    failures.extend(residual_failure(&sum_residual, f, mode));
    VerificationReport { mode, sum_residual, per_circuit, failures }
}

pub fn verify_sbs(cert: &SbsCertificate, f: &SparsePoly, mode: VerifyMode) -> VerificationReport {
    let mut failures = Vec::new();
    let mut sum = SparsePoly::zero(f.nvars());
    for (i, sq) in cert.squares.iter().enumerate() {
        if sq.u.nvars() != f.nvars() || sq.v.nvars() != f.nvars() {
            failures.push(format!("square {i}: wrong number of variables"));
            continue;
        }
        if sq.weight.is_negative() {
            failures.push(format!("square {i}: negative weight"));
        }
        let two = Rational::from_integer(2.into());
        sum.add_term(sq.u.add(&sq.u), &sq.weight * &sq.a * &sq.a);
        sum.add_term(sq.v.add(&sq.v), &sq.weight * &sq.b * &sq.b);
        sum.add_term(sq.u.add(&sq.v), -(&two * &sq.weight * &sq.a * &sq.b));
    }
    let sum_residual = f.sub(&sum);
    failures.extend(residual_failure(&sum_residual, f, mode));
    VerificationReport { mode, sum_residual, per_circuit: Vec::new(), failures }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::decompose;
    use crate::poly::parse_poly;
    use crate::rational::frac;

    #[test]
    fn decomposed_certificate_passes_and_tampering_fails() {
        let f = parse_poly("1 + x1^6 + x2^6 + x1^6*x2^6 - x1^2*x2 - 2*x1^4*x2", 2).unwrap();
        let cert = decompose(&f).certificate().unwrap().clone();
        assert!(verify_sonc(&cert, &f, VerifyMode::Exact).passed());
        let mut bad = cert.clone();
        bad.circuits[0].circuit.d = &bad.circuits[0].circuit.d * frac(101, 100);
        let report = verify_sonc(&bad, &f, VerifyMode::Epsilon(1e-1));
        assert!(!report.passed());
        assert!(report.per_circuit.iter().any(|c| c.theta == Some(ThetaCmp::Above)));
    }

    #[test]
    fn empty_certificate_of_zero() {
        let z = SparsePoly::zero(2);
        assert!(verify_sonc(&SoncCertificate::empty(z.clone()), &z, VerifyMode::Exact).passed());
        let one = parse_poly("1", 2).unwrap();
        assert!(!verify_sonc(&SoncCertificate::empty(one.clone()), &one, VerifyMode::Exact).passed());
    }

    #[test]
    fn weights_match_hand_values() {
        let pts = [Exponent(vec![6, 6]), Exponent(vec![6, 0]), Exponent(vec![0, 0])];
        assert_eq!(weights(&pts, &Exponent(vec![2, 1])), Some(vec![frac(1, 6), frac(1, 6), frac(2, 3)]));
        assert_eq!(weights(&pts[1..], &Exponent(vec![2, 1])), None);
        assert_eq!(weights(&[Exponent(vec![0]), Exponent(vec![4])], &Exponent(vec![1])), Some(vec![frac(3, 4), frac(1, 4)]));
    }
}
