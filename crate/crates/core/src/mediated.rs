//! Mediated sets and sums of binomial squares.
//!
//! A set `M` with `A ⊆ M ⊆ conv(A) ∩ ℕⁿ` is `A`-mediated when every point of
//! `M \ A` is the midpoint of two distinct even points of `M`. Such a set turns
//! a nonnegative circuit into a sum of binomial squares: a symmetric random walk
//! on `M` that jumps from `p` to one of its two parents is a martingale, is
//! absorbed in `A` with probabilities exactly `λ`, and its expected visit counts
//! give the square weights.

use std::collections::{BTreeSet, HashMap, HashSet};

use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::certificate::{CertMode, SoncCertificate, DEFAULT_EPSILON};
use crate::circuit::{circuit_number, is_nonnegative_circuit, CircuitPoly};
use crate::error::{GeomError, MediatedError};
use crate::geom::{span_coordinates, Trellis};
use crate::linalg::{self, Matrix};
use crate::poly::{monomial_value, Exponent, SparsePoly};
use crate::rational::{from_f64_exact, int, ln_abs, rationalize, Rational};

/// Lattice points examined before giving up.
pub const LATTICE_CAP: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MediatedSet {
    pub trellis: Trellis,
    pub members: BTreeSet<Exponent>,
}

impl MediatedSet {
    pub fn contains(&self, e: &Exponent) -> bool {
        self.members.contains(e)
    }
}

/// `weight · (a x^u - b x^v)²`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinomialSquare {
    pub weight: Rational,
    pub a: Rational,
    pub u: Exponent,
    pub b: Rational,
    pub v: Exponent,
}

impl BinomialSquare {
    /// `c x^e` with `e` even, written as a degenerate square.
    pub fn monomial(e: &Exponent, c: Rational) -> Self {
        let h = e.half();
        BinomialSquare { weight: c, a: Rational::one(), u: h.clone(), b: Rational::zero(), v: h }
    }

    pub fn expand(&self) -> SparsePoly {
        let mut p = SparsePoly::zero(self.u.nvars());
        p.add_term(self.u.add(&self.u), &self.weight * &self.a * &self.a);
        p.add_term(self.v.add(&self.v), &self.weight * &self.b * &self.b);
        p.add_term(self.u.add(&self.v), -(int(2) * &self.weight * &self.a * &self.b));
        p
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SbsCertificate {
    pub squares: Vec<BinomialSquare>,
    pub polynomial: SparsePoly,
    pub mode: CertMode,
}

impl SbsCertificate {
    pub fn expand(&self) -> SparsePoly {
        self.squares.iter().fold(SparsePoly::zero(self.polynomial.nvars()), |acc, s| acc.add(&s.expand()))
    }
}

/// Exact test for membership in `conv(trellis)` via a precomputed inverse in the
/// affine span's pivot coordinates.
struct HullTest {
    points: Vec<Exponent>,
    coords: Vec<usize>,
    inverse: Matrix,
}

impl HullTest {
    fn new(t: &Trellis) -> Self {
        let points = t.points().to_vec();
        let coords = span_coordinates(&points);
        let k = points.len();
        // square system: pivot coordinates plus the affine row
        let mut m: Matrix = coords
            .iter()
            .map(|&c| points.iter().map(|p| Rational::from_integer(p.0[c].into())).collect())
            .collect();
        m.push(vec![Rational::one(); k]);
        let inverse = invert(&m);
        HullTest { points, coords, inverse }
    }

    fn contains(&self, x: &Exponent) -> bool {
        let mut rhs: Vec<Rational> = self.coords.iter().map(|&c| Rational::from_integer(x.0[c].into())).collect();
        rhs.push(Rational::one());
        let lambdas: Vec<Rational> = self.inverse.iter().map(|row| linalg::dot(row, &rhs)).collect();
        if lambdas.iter().any(|l| l.is_negative()) {
            return false;
        }
        // the projection is injective only on the affine span, so check every coordinate
        (0..x.nvars()).all(|c| {
            let v: Rational = self
                .points
                .iter()
                .zip(&lambdas)
                .map(|(p, l)| l * Rational::from_integer(p.0[c].into()))
                .sum();
            v == Rational::from_integer(x.0[c].into())
        })
    }
}

fn invert(m: &Matrix) -> Matrix {
    let n = m.len();
    let mut aug: Matrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    linalg::rref(&mut aug);
    aug.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// `conv(t) ∩ ℕⁿ`.
pub fn lattice_points(t: &Trellis) -> Result<Vec<Exponent>, MediatedError> {
    let n = t.points()[0].nvars();
    let lo: Vec<u32> = (0..n).map(|c| t.points().iter().map(|p| p.0[c]).min().unwrap()).collect();
    let hi: Vec<u32> = (0..n).map(|c| t.points().iter().map(|p| p.0[c]).max().unwrap()).collect();
    let box_size = lo.iter().zip(&hi).try_fold(1usize, |acc, (l, h)| acc.checked_mul((h - l + 1) as usize));
    match box_size {
        Some(s) if s <= LATTICE_CAP => {}
        _ => return Err(MediatedError::TooManyPoints(LATTICE_CAP)),
    }
    let test = HullTest::new(t);
    let mut out = Vec::new();
    let mut cur = lo.clone();
    loop {
        let e = Exponent(cur.clone());
        if test.contains(&e) {
            out.push(e);
        }
        let mut i = 0;
        loop {
            if i == n {
                out.sort();
                return Ok(out);
            }
            if cur[i] < hi[i] {
                cur[i] += 1;
                break;
            }
            cur[i] = lo[i];
            i += 1;
        }
    }
}

/// `2p - u` when it has no negative entry.
fn reflect(p: &Exponent, u: &Exponent) -> Option<Exponent> {
    p.0.iter()
        .zip(&u.0)
        .map(|(&a, &b)| (2 * a).checked_sub(b))
        .collect::<Option<Vec<u32>>>()
        .map(Exponent)
}

fn has_parents(p: &Exponent, members: &HashSet<Exponent>, even: &[Exponent]) -> bool {
    even.iter().any(|u| u != p && reflect(p, u).is_some_and(|v| v != *u && v.is_even() && members.contains(&v)))
}

fn greatest_fixed_point(t: &Trellis, order: &mut dyn FnMut(&mut Vec<Exponent>)) -> Result<MediatedSet, MediatedError> {
    let anchors: HashSet<Exponent> = t.points().iter().cloned().collect();
    let mut members: HashSet<Exponent> = lattice_points(t)?.into_iter().collect();
    loop {
        let mut even: Vec<Exponent> = members.iter().filter(|e| e.is_even()).cloned().collect();
        even.sort();
        let mut candidates: Vec<Exponent> = members.iter().filter(|e| !anchors.contains(*e)).cloned().collect();
        candidates.sort();
        order(&mut candidates);
        let mut removed = false;
        for p in candidates {
            if !has_parents(&p, &members, &even) {
                members.remove(&p);
                if p.is_even() {
                    even.retain(|e| *e != p);
                }
                removed = true;
            }
        }
        if !removed {
            break;
        }
    }
    Ok(MediatedSet { trellis: t.clone(), members: members.into_iter().collect() })
}

/// The largest `A`-mediated set, by deleting unmediated points until nothing changes.
pub fn maximal_mediated_set(t: &Trellis) -> Result<MediatedSet, MediatedError> {
    greatest_fixed_point(t, &mut |_| {})
}

/// Same fixed point, with the deletion sweep visiting points in a shuffled order.
pub fn maximal_mediated_set_shuffled(t: &Trellis, seed: u64) -> Result<MediatedSet, MediatedError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    greatest_fixed_point(t, &mut |v| v.shuffle(&mut rng))
}

/// `conv(A) ∩ ℕⁿ` is itself mediated.
pub fn is_h_trellis(t: &Trellis) -> Result<bool, MediatedError> {
    Ok(maximal_mediated_set(t)?.members.len() == lattice_points(t)?.len())
}

/// Mediated-set invariant: every non-trellis member averages two distinct even members.
pub fn is_mediated(m: &MediatedSet) -> bool {
    let members: HashSet<Exponent> = m.members.iter().cloned().collect();
    let even: Vec<Exponent> = m.members.iter().filter(|e| e.is_even()).cloned().collect();
    m.trellis.points().iter().all(|a| members.contains(a))
        && m.members.iter().all(|p| m.trellis.points().contains(p) || has_parents(p, &members, &even))
}

fn dist2(u: &Exponent, v: &Exponent) -> u64 {
    u.0.iter().zip(&v.0).map(|(&a, &b)| (a as i64 - b as i64).pow(2) as u64).sum()
}

/// Parents `(u, v)` of `p`: trellis pairs first, otherwise the farthest-apart pair.
fn choose_parents(p: &Exponent, m: &MediatedSet) -> Option<(Exponent, Exponent)> {
    let anchors = m.trellis.points();
    let mut best: Option<(bool, u64, Exponent, Exponent)> = None;
    for u in m.members.iter().filter(|e| e.is_even() && *e != p) {
        let Some(v) = reflect(p, u) else { continue };
        if v == *u || !v.is_even() || !m.members.contains(&v) || u > &v {
            continue;
        }
        let key = (anchors.contains(u) && anchors.contains(&v), dist2(u, &v));
        if best.as_ref().is_none_or(|b| key > (b.0, b.1)) {
            best = Some((key.0, key.1, u.clone(), v));
        }
    }
    best.map(|(_, _, u, v)| (u, v))
}

/// Weights `w` with `Σ λ_i y^{α_i} - y^β = Σ w_p (y^{u_p/2} - y^{v_p/2})²`.
fn agiform_squares(m: &MediatedSet, beta: &Exponent) -> Result<Vec<(Rational, Exponent, Exponent)>, MediatedError> {
    let anchors: HashSet<&Exponent> = m.trellis.points().iter().collect();
    let mut parents: HashMap<Exponent, (Exponent, Exponent)> = HashMap::new();
    let mut order: Vec<Exponent> = Vec::new();
    let mut stack = vec![beta.clone()];
    while let Some(p) = stack.pop() {
        if anchors.contains(&p) || parents.contains_key(&p) {
            continue;
        }
        let (u, v) = choose_parents(&p, m).ok_or(MediatedError::NotMediated)?;
        stack.push(u.clone());
        stack.push(v.clone());
        parents.insert(p.clone(), (u, v));
        order.push(p);
    }
    order.sort();
    let index: HashMap<&Exponent, usize> = order.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let r = order.len();
    // expected visits: G(p) = [p = β] + ½ Σ_{q : p parent of q} G(q)
    let half = Rational::new(1.into(), 2.into());
    let mut a: Matrix = vec![vec![Rational::zero(); r]; r];
    for (i, q) in order.iter().enumerate() {
        a[i][i] += Rational::one();
        let (u, v) = &parents[q];
        for parent in [u, v] {
            if let Some(&j) = index.get(parent) {
                a[j][i] -= &half;
            }
        }
    }
    let rhs: Vec<Rational> = order.iter().map(|p| if p == beta { Rational::one() } else { Rational::zero() }).collect();
    let g = linalg::solve(&a, &rhs).ok_or(MediatedError::NotMediated)?;
    Ok(order
        .iter()
        .zip(g)
        .filter(|(_, gv)| gv.is_positive())
        .map(|(p, gv)| {
            let (u, v) = &parents[p];
            (gv * &half, u.half(), v.half())
        })
        .collect())
}

/// Log-space balance point `x` with `c_i x^{α_i} / λ_i` equal for all `i`.
fn balance_point(c: &CircuitPoly) -> Vec<f64> {
    let n = c.nvars();
    let coords = span_coordinates(c.trellis());
    if coords.is_empty() {
        return vec![1.0; n];
    }
    let theta = circuit_number(c).log_value;
    let beta = c.beta();
    // pivot-coordinate system ⟨α_i - β, y⟩ = ln(λ_i Θ / c_i), solved by least squares
    let m = c.trellis().len();
    let a = nalgebra::DMatrix::from_fn(m, coords.len(), |i, k| {
        c.trellis()[i].0[coords[k]] as f64 - beta.0[coords[k]] as f64
    });
    let b = nalgebra::DVector::from_fn(m, |i, _| {
        c.lambdas()[i].to_f64().unwrap().ln() + theta - ln_abs(&c.outer[i])
    });
    let y = a.svd(true, true).solve(&b, 1e-14).unwrap_or_else(|_| nalgebra::DVector::zeros(coords.len()));
    let mut x = vec![1.0; n];
    for (k, &cidx) in coords.iter().enumerate() {
        x[cidx] = y[k].exp();
    }
    x
}

/// Writes a nonnegative circuit as a sum of binomial squares over `m`.
pub fn sbs_decompose_circuit(c: &CircuitPoly, m: &MediatedSet) -> Result<SbsCertificate, MediatedError> {
    if m.trellis.points() != c.trellis() {
        return Err(MediatedError::Geom(GeomError::InvalidTrellis));
    }
    if !is_nonnegative_circuit(c) {
        return Err(MediatedError::NotNonnegative);
    }
    let poly = c.to_poly();
    let beta = c.beta();
    let even_positive = beta.is_even() && !c.d.is_positive();
    if c.d.is_zero() || even_positive {
        let squares = poly.terms().map(|(e, v)| BinomialSquare::monomial(e, v.clone())).collect();
        return Ok(SbsCertificate { squares, polynomial: poly, mode: CertMode::Exact });
    }
    if !m.contains(beta) {
        return Err(MediatedError::NotMediated);
    }
    // an odd inner term with d < 0 becomes d > 0 after flipping one odd coordinate
    let mut sigma = vec![Rational::one(); c.nvars()];
    if c.d.is_negative() {
        let i = beta.0.iter().position(|k| k % 2 == 1).expect("odd inner exponent");
        sigma[i] = -Rational::one();
    }
    let d = c.d.abs();
    let walk = agiform_squares(m, beta)?;

    let x_float = balance_point(c);
    let candidates: Vec<Vec<Rational>> = [1e-6, 1e-9, 1e-12, 1e-15]
        .iter()
        .map(|&t| x_float.iter().map(|&v| rationalize(v, t)).collect::<Vec<_>>())
        .filter(|x: &Vec<Rational>| x.iter().all(|v| v.is_positive()))
        .collect();
    let scaled = |x: &[Rational]| -> Vec<Rational> {
        c.outer_terms().zip(c.lambdas()).map(|((e, ci), l)| ci * monomial_value(e, x) / l).collect()
    };
    let exact = candidates.iter().find(|x| {
        let s = &d * monomial_value(beta, x);
        scaled(x).iter().all(|v| &s <= v)
    });
    let (x, s, mode) = match exact {
        Some(x) => (x.clone(), &d * monomial_value(beta, x), CertMode::Exact),
        None => {
            let x = candidates.last().cloned().unwrap_or_else(|| x_float.iter().map(|&v| from_f64_exact(v)).collect());
            let s = scaled(&x).into_iter().min().unwrap();
            (x, s, CertMode::Epsilon(DEFAULT_EPSILON))
        }
    };
    let mut squares = Vec::new();
    for (w, u, v) in walk {
        let a = monomial_value(&u, &sigma) / monomial_value(&u, &x);
        let b = monomial_value(&v, &sigma) / monomial_value(&v, &x);
        squares.push(BinomialSquare { weight: &s * w, a, u, b, v });
    }
    for ((e, ci), l) in c.outer_terms().zip(c.lambdas()) {
        let left = ci - &s * l / monomial_value(e, &x);
        if left.is_positive() {
            squares.push(BinomialSquare::monomial(e, left));
        }
    }
    let cert = SbsCertificate { squares, polynomial: poly, mode };
    let mode = if cert.expand() == cert.polynomial { CertMode::Exact } else { CertMode::Epsilon(DEFAULT_EPSILON) };
    Ok(SbsCertificate { mode, ..cert })
}

/// `f(x₁^k, …, xₙ^k)` as a sum of binomial squares, circuit by circuit.
pub fn sbs_from_sonc(cert: &SoncCertificate, k: u32) -> Result<SbsCertificate, MediatedError> {
    let n = cert.nvars();
    if (k as usize) < n || k == 0 {
        return Err(MediatedError::PowerTooSmall);
    }
    let scale = |e: &Exponent| e.checked_scale(k).ok_or(crate::error::PolyError::ExponentOverflow);
    let mut squares = Vec::new();
    let mut exact = cert.mode == CertMode::Exact;
    for cc in &cert.circuits {
        let c = &cc.circuit;
        let outer = c.outer_terms().map(|(e, v)| Ok((scale(e)?, v.clone()))).collect::<Result<Vec<_>, MediatedError>>()?;
        let sub = CircuitPoly::new(outer, scale(c.beta())?, c.d.clone())?;
        let m = maximal_mediated_set(&sub.coords.trellis)?;
        let part = sbs_decompose_circuit(&sub, &m)?;
        exact &= part.mode == CertMode::Exact;
        squares.extend(part.squares);
    }
    for (e, c) in &cert.monomial_squares {
        squares.push(BinomialSquare::monomial(&scale(e)?, c.clone()));
    }
    let polynomial = cert.polynomial.substitute_powers(k)?;
    let mut out = SbsCertificate { squares, polynomial, mode: CertMode::Exact };
    if !exact || out.expand() != out.polynomial {
        out.mode = CertMode::Epsilon(DEFAULT_EPSILON);
    }
    Ok(out)
}

/// Members in graded-lex order.
pub fn members_sorted(m: &MediatedSet) -> Vec<Exponent> {
    m.members.iter().cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    fn e(v: &[u32]) -> Exponent {
        Exponent(v.to_vec())
    }

    fn trellis(v: &[&[u32]]) -> Trellis {
        Trellis::new(v.iter().map(|p| e(p)).collect()).unwrap()
    }

    #[test]
    fn segment_is_h_trellis() {
        let t = trellis(&[&[0], &[4]]);
        let m = maximal_mediated_set(&t).unwrap();
        assert_eq!(members_sorted(&m), (0..=4).map(|i| e(&[i])).collect::<Vec<_>>());
        assert!(is_h_trellis(&t).unwrap());
    }

    #[test]
    fn motzkin_trellis_and_its_double() {
        let t = trellis(&[&[0, 0], &[4, 2], &[2, 4]]);
        let m = maximal_mediated_set(&t).unwrap();
        assert!(!m.contains(&e(&[2, 2])));
        assert!(is_mediated(&m));
        assert!(!is_h_trellis(&t).unwrap());
        assert!(is_h_trellis(&trellis(&[&[0, 0], &[8, 4], &[4, 8]])).unwrap());
        for seed in 0..3 {
            assert_eq!(maximal_mediated_set_shuffled(&t, seed).unwrap(), m);
        }
    }

    #[test]
    fn simple_squares() {
        let c = CircuitPoly::from_poly(&parse_poly("1 + x1^2*x2^2 - 2*x1*x2", 2).unwrap()).unwrap();
        let m = maximal_mediated_set(&c.coords.trellis).unwrap();
        let cert = sbs_decompose_circuit(&c, &m).unwrap();
        assert_eq!(cert.mode, CertMode::Exact);
        assert_eq!(cert.expand(), cert.polynomial);
        assert_eq!(cert.squares.len(), 1);

        let c = CircuitPoly::from_poly(&parse_poly("1 + x1^4 - 2*x1^2", 1).unwrap()).unwrap();
        let m = maximal_mediated_set(&c.coords.trellis).unwrap();
        let cert = sbs_decompose_circuit(&c, &m).unwrap();
        assert_eq!(cert.expand(), cert.polynomial);
    }

    #[test]
    fn doubled_motzkin_is_sbs() {
        let c = CircuitPoly::from_poly(&parse_poly("1 + x1^8*x2^4 + x1^4*x2^8 - 3*x1^4*x2^4", 2).unwrap()).unwrap();
        let m = maximal_mediated_set(&c.coords.trellis).unwrap();
        let cert = sbs_decompose_circuit(&c, &m).unwrap();
        assert_eq!(cert.mode, CertMode::Exact);
        assert_eq!(cert.expand(), cert.polynomial);
    }

    #[test]
    fn odd_inner_with_negative_d() {
        let c = CircuitPoly::from_poly(&parse_poly("1 + x1^2 + x1", 1).unwrap()).unwrap();
        let m = maximal_mediated_set(&c.coords.trellis).unwrap();
        let cert = sbs_decompose_circuit(&c, &m).unwrap();
        assert_eq!(cert.expand(), cert.polynomial);
    }
}
