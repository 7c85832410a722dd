//! Support-preserving rewriting of SONC certificates.
//!
//! A certificate whose circuits reach outside `supp(f)` is turned into one
//! that does not: substitute `x ↦ x^k` with `k = 2n+1`, write every circuit as
//! a sum of binomial squares, regroup the squares into banana polynomials
//! (positive even outer terms on `Λ(h)` plus at most one inner term in `Γ(h)`),
//! decompose each banana as a single-inner-term polynomial and divide the
//! exponents back by `k`.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};

use crate::certificate::{merge_squares, CertCircuit, CertMode, SoncCertificate, DEFAULT_EPSILON};
use crate::circuit::CircuitPoly;
use crate::decompose::{decompose, DecomposeOutcome};
use crate::error::MediatedError;
use crate::linalg::Matrix;
use crate::lp::{nonneg_solve, LinearSystem, LpOutcome};
use crate::mediated::{sbs_from_sonc, SbsCertificate};
use crate::poly::{Exponent, SparsePoly};
use crate::rational::Rational;

/// Positive even outer terms plus at most one inner term; nonnegative by construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Banana {
    pub outer: BTreeMap<Exponent, Rational>,
    /// Signed coefficient; negative whenever the exponent is even.
    pub inner: Option<(Exponent, Rational)>,
}

impl Banana {
    /// Splits `p` into outer and inner terms; `None` if more than one term is inner.
    pub fn from_poly(p: &SparsePoly) -> Option<Banana> {
        let mut outer = BTreeMap::new();
        let mut inner = None;
        for (e, c) in p.terms() {
            if e.is_even() && c.is_positive() {
                outer.insert(e.clone(), c.clone());
            } else if inner.replace((e.clone(), c.clone())).is_some() {
                return None;
            }
        }
        Some(Banana { outer, inner })
    }

    pub fn to_poly(&self, nvars: usize) -> SparsePoly {
        let mut p = SparsePoly::zero(nvars);
        for (e, c) in &self.outer {
            p.add_term(e.clone(), c.clone());
        }
        if let Some((e, c)) = &self.inner {
            p.add_term(e.clone(), c.clone());
        }
        p
    }

    pub fn coeff(&self, e: &Exponent) -> Rational {
        match (&self.inner, self.outer.get(e)) {
            (_, Some(c)) => c.clone(),
            (Some((b, c)), None) if b == e => c.clone(),
            _ => Rational::zero(),
        }
    }
}

/// Merges `t/c₁·p₁ + t/c₂·p₂` where `p₁` has coefficient `c₁ > 0` and `p₂` has
/// `-c₂ < 0` at the same exponent, so that exponent cancels. Returns the
/// merged piece and the two remainders (zero when fully used).
fn merge(p1: &SparsePoly, c1: &Rational, p2: &SparsePoly, c2: &Rational) -> [SparsePoly; 3] {
    let t = c1.min(c2).clone();
    let s1 = &t / c1;
    let s2 = &t / c2;
    let merged = p1.scale(&s1).add(&p2.scale(&s2));
    [merged, p1.scale(&(Rational::one() - s1)), p2.scale(&(Rational::one() - s2))]
}

/// Regroups the squares of `sbs` into bananas that sum exactly to the expansion
/// `h`, with outer points in `Λ(h)` and inner points in `Γ(h)`. Squares are
/// taken in input order; exponents are processed in graded-lex order.
pub fn banana_rewrite(sbs: &SbsCertificate) -> Vec<Banana> {
    let n = sbs.polynomial.nvars();
    let mut pieces: Vec<SparsePoly> = sbs.squares.iter().map(|s| s.expand()).filter(|p| !p.is_zero()).collect();
    let h = sbs.expand();
    let exponents: BTreeSet<Exponent> = pieces.iter().flat_map(|p| p.support()).collect();
    for alpha in exponents {
        // a positive coefficient at `alpha` cancels against a negative one until
        // only the sign of h_alpha survives; at a point of Λ(h) this removes every
        // inner term, elsewhere every outer term
        let target = h.coeff(&alpha);
        loop {
            let pos = pieces.iter().position(|p| p.coeff(&alpha).is_positive());
            let neg = pieces.iter().position(|p| p.coeff(&alpha).is_negative());
            let (Some(i), Some(j)) = (pos, neg) else { break };
            let (c1, c2) = (pieces[i].coeff(&alpha), -pieces[j].coeff(&alpha));
            let [merged, r1, r2] = merge(&pieces[i], &c1, &pieces[j], &c2);
            let (hi, lo) = (i.max(j), i.min(j));
            pieces.remove(hi);
            pieces.remove(lo);
            pieces.extend([merged, r1, r2].into_iter().filter(|p| !p.is_zero()));
        }
        debug_assert!(pieces.iter().all(|p| {
            let c = p.coeff(&alpha);
            c.is_zero() || c.is_positive() == target.is_positive()
        }));
    }
    debug_assert_eq!(pieces.iter().fold(SparsePoly::zero(n), |a, p| a.add(p)), h);
    pieces
        .iter()
        .map(|p| Banana::from_poly(p).expect("merging never creates a second inner term"))
        .collect()
}

/// A certificate of `f` whose circuits all live on `supp(f)`.
pub fn resupport(f: &SparsePoly, cert: &SoncCertificate) -> Result<SoncCertificate, MediatedError> {
    let n = f.nvars();
    let k = 2 * n as u32 + 1;
    let sbs = sbs_from_sonc(cert, k)?;
    let mut exact = sbs.mode == CertMode::Exact;
    let mut circuits = Vec::new();
    let mut squares = Vec::new();
    let shrink = |e: &Exponent| {
        e.divide(k).ok_or_else(|| MediatedError::Resupport(format!("exponent {e} is not a multiple of {k}")))
    };
    for banana in banana_rewrite(&sbs) {
        if banana.inner.is_none() {
            for (e, c) in &banana.outer {
                squares.push((shrink(e)?, c.clone()));
            }
            continue;
        }
        let p = banana.to_poly(n).divide_exponents(k).ok_or_else(|| {
            MediatedError::Resupport("banana exponents are not multiples of k".into())
        })?;
        let part = match decompose(&p) {
            DecomposeOutcome::Sonc(c) => c,
            other => return Err(MediatedError::Resupport(format!("banana decomposition ended {}", other.label()))),
        };
        exact &= part.mode == CertMode::Exact;
        circuits.extend(part.circuits);
        squares.extend(part.monomial_squares);
    }
    merge_squares(&mut squares);
    let mut out = SoncCertificate {
        polynomial: f.clone(),
        circuits,
        monomial_squares: squares,
        mode: CertMode::Exact,
        hypotheses: None,
    };
    if !exact || !out.residual().is_zero() {
        out.mode = CertMode::Epsilon(DEFAULT_EPSILON);
    }
    Ok(out)
}

/// Rescales the circuits and squares to a basic feasible solution of the
/// re-summation system, which keeps at most `|supp|` pieces.
pub fn prune(cert: &SoncCertificate) -> Result<SoncCertificate, MediatedError> {
    let target = cert.recompose();
    let rows: Vec<Exponent> = {
        let mut s: BTreeSet<Exponent> = target.support().into_iter().collect();
        for c in &cert.circuits {
            s.extend(c.circuit.to_poly().support());
        }
        s.extend(cert.monomial_squares.iter().map(|(e, _)| e.clone()));
        s.into_iter().collect()
    };
    let even: Vec<Exponent> = rows.iter().filter(|e| e.is_even()).cloned().collect();
    let columns: Vec<SparsePoly> = cert
        .circuits
        .iter()
        .map(|c| c.circuit.to_poly())
        .chain(even.iter().map(|e| {
            let mut p = SparsePoly::zero(cert.nvars());
            p.add_term(e.clone(), Rational::one());
            p
        }))
        .collect();
    let matrix: Matrix = rows.iter().map(|e| columns.iter().map(|p| p.coeff(e)).collect()).collect();
    let rhs: Vec<Rational> = rows.iter().map(|e| target.coeff(e)).collect();
    let z = match nonneg_solve(&LinearSystem::new(matrix, rhs))? {
        LpOutcome::Feasible(z) => z,
        LpOutcome::Infeasible { .. } => return Err(MediatedError::Resupport("pruning system is infeasible".into())),
    };
    let m = cert.circuits.len();
    let circuits = cert
        .circuits
        .iter()
        .zip(&z)
        .filter(|(_, t)| t.is_positive())
        .map(|(c, t)| {
            let outer = c.circuit.outer_terms().map(|(e, v)| (e.clone(), v * t)).collect();
            let circuit = CircuitPoly::new(outer, c.circuit.beta().clone(), &c.circuit.d * t)?;
            Ok(CertCircuit { slack: c.slack.map(|s| s * crate::rational::to_f64(t)), circuit })
        })
        .collect::<Result<Vec<_>, MediatedError>>()?;
    let monomial_squares = even.into_iter().zip(&z[m..]).filter(|(_, t)| t.is_positive()).map(|(e, t)| (e, t.clone())).collect();
    Ok(SoncCertificate { circuits, monomial_squares, ..cert.clone() })
}

/// Every exponent used by the certificate.
pub fn certificate_support(cert: &SoncCertificate) -> BTreeSet<Exponent> {
    let mut s: BTreeSet<Exponent> = cert.monomial_squares.iter().map(|(e, _)| e.clone()).collect();
    for c in &cert.circuits {
        s.extend(c.circuit.to_poly().support());
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mediated::BinomialSquare;
    use crate::poly::parse_poly;
    use crate::rational::{frac, int};

    fn e(v: u32) -> Exponent {
        Exponent(vec![v])
    }

    fn sq(w: Rational, a: i64, u: u32, b: i64, v: u32) -> BinomialSquare {
        BinomialSquare { weight: w, a: int(a), u: e(u), b: int(b), v: e(v) }
    }

    fn sbs(squares: Vec<BinomialSquare>) -> SbsCertificate {
        let mut c = SbsCertificate { squares, polynomial: SparsePoly::zero(1), mode: CertMode::Exact };
        c.polynomial = c.expand();
        c
    }

    fn total(b: &[Banana]) -> SparsePoly {
        b.iter().fold(SparsePoly::zero(1), |a, x| a.add(&x.to_poly(1)))
    }

    #[test]
    fn single_square_is_one_banana() {
        let s = sbs(vec![sq(int(1), 2, 0, 3, 1)]);
        let b = banana_rewrite(&s);
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].to_poly(1), parse_poly("4 + 9*x1^2 - 12*x1", 1).unwrap());
        assert_eq!(b[0].inner, Some((e(1), int(-12))));
    }

    #[test]
    fn two_squares_keep_their_shape() {
        let s = sbs(vec![sq(int(1), 1, 0, 1, 1), sq(int(1), 1, 1, 1, 2)]);
        let b = banana_rewrite(&s);
        assert_eq!(total(&b), parse_poly("1 - 2*x1 + 2*x1^2 - 2*x1^3 + x1^4", 1).unwrap());
        assert!(b.iter().all(|x| x.inner.is_some()));
    }

    #[test]
    fn cancelled_square_point_disappears() {
        // (1 - x)² + ½(1 - x²)² = 3/2 - 2x + ½x⁴: the x² terms cancel
        let s = sbs(vec![sq(int(1), 1, 0, 1, 1), sq(frac(1, 2), 1, 0, 1, 2)]);
        let h = parse_poly("3/2 - 2*x1 + 1/2*x1^4", 1).unwrap();
        assert_eq!(s.polynomial, h);
        let b = banana_rewrite(&s);
        assert_eq!(total(&b), h);
        for x in &b {
            assert!(x.coeff(&e(2)).is_zero());
            assert!(x.to_poly(1).support().iter().all(|p| h.support().contains(p)));
        }
    }

    #[test]
    fn widened_square_resupports() {
        let f = parse_poly("1 + x1^4 - 2*x1^2", 1).unwrap();
        let cert = decompose(&f).certificate().unwrap().clone();
        let out = resupport(&f, &cert).unwrap();
        assert_eq!(out.residual(), SparsePoly::zero(1));
        let supp: BTreeSet<Exponent> = f.support().into_iter().collect();
        assert!(certificate_support(&out).is_subset(&supp));
    }

    #[test]
    fn widened_certificate_comes_back_to_the_support() {
        // f = 2 + x⁴ - 2x has no x² term, but a certificate may route through it
        let f = parse_poly("2 + x1^4 - 2*x1", 1).unwrap();
        let a = CircuitPoly::new(vec![(e(0), int(1)), (e(2), int(1))], e(1), int(2)).unwrap();
        let b = CircuitPoly::new(vec![(e(0), int(1)), (e(4), int(1))], e(2), int(1)).unwrap();
        let cert = SoncCertificate {
            polynomial: f.clone(),
            circuits: vec![CertCircuit { circuit: a, slack: None }, CertCircuit { circuit: b, slack: None }],
            monomial_squares: vec![],
            mode: CertMode::Exact,
            hypotheses: None,
        };
        assert_eq!(cert.residual(), SparsePoly::zero(1));
        let out = resupport(&f, &cert).unwrap();
        let supp: BTreeSet<Exponent> = f.support().into_iter().collect();
        assert!(certificate_support(&out).is_subset(&supp));
        assert!(out.relative_residual() <= 1e-8);
        let pruned = prune(&out).unwrap();
        assert!(pruned.size() <= supp.len());
        assert_eq!(pruned.recompose(), out.recompose());
    }
}
