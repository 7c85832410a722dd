//! Exact sparse multivariate polynomials with rational coefficients.
//!
//! Terms are kept in a `BTreeMap` keyed by [`Exponent`], whose ordering is
//! graded lexicographic, so printing and iteration are deterministic.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{GeomError, PolyError};
use crate::geom::{hull_vertices, PointSet};
use crate::rational::{format_rational, pow, Rational};

/// Exponent vector of a monomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Exponent(pub Vec<u32>);

impl Exponent {
    pub fn zero(nvars: usize) -> Self {
        Exponent(vec![0; nvars])
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    pub fn is_even(&self) -> bool {
        self.0.iter().all(|e| e % 2 == 0)
    }

    pub fn add(&self, other: &Exponent) -> Exponent {
        Exponent(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Componentwise difference; `None` if any entry would go negative.
    pub fn checked_sub(&self, other: &Exponent) -> Option<Exponent> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Exponent)
    }

    pub fn checked_scale(&self, k: u32) -> Option<Exponent> {
        self.0
            .iter()
            .map(|e| e.checked_mul(k))
            .collect::<Option<Vec<_>>>()
            .map(Exponent)
    }

    /// Exact division by `k`; `None` unless every entry is a multiple of `k`.
    pub fn divide(&self, k: u32) -> Option<Exponent> {
        if self.0.iter().all(|e| e % k == 0) {
            Some(Exponent(self.0.iter().map(|e| e / k).collect()))
        } else {
            None
        }
    }

    /// `self / 2`, only meaningful for even exponents.
    pub fn half(&self) -> Exponent {
        debug_assert!(self.is_even());
        Exponent(self.0.iter().map(|e| e / 2).collect())
    }

    pub fn as_rationals(&self) -> Vec<Rational> {
        self.0.iter().map(|&e| Rational::from_integer(e.into())).collect()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&e| e as f64).collect()
    }
}

impl From<Vec<u32>> for Exponent {
    fn from(v: Vec<u32>) -> Self {
        Exponent(v)
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coeff: Rational,
    pub exponent: Exponent,
}

/// Sparse polynomial in `nvars` variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparsePoly {
    nvars: usize,
    terms: BTreeMap<Exponent, Rational>,
}

impl SparsePoly {
    pub fn zero(nvars: usize) -> Self {
        SparsePoly { nvars, terms: BTreeMap::new() }
    }

    pub fn from_terms(
        nvars: usize,
        terms: impl IntoIterator<Item = (Exponent, Rational)>,
    ) -> Result<Self, PolyError> {
        let mut p = SparsePoly::zero(nvars);
        for (e, c) in terms {
            if e.nvars() != nvars {
                return Err(PolyError::DimensionMismatch { expected: nvars, found: e.nvars() });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &Exponent) -> Rational {
        self.terms.get(e).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn support(&self) -> Vec<Exponent> {
        self.terms.keys().cloned().collect()
    }

    /// Adds `c * x^e`, dropping the entry if it cancels.
    pub fn add_term(&mut self, e: Exponent, c: Rational) {
        assert_eq!(e.nvars(), self.nvars, "exponent length must match nvars");
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &SparsePoly) -> SparsePoly {
        let mut out = self.clone();
        for (e, c) in other.terms() {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &SparsePoly) -> SparsePoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> SparsePoly {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, k: &Rational) -> SparsePoly {
        if k.is_zero() {
            return SparsePoly::zero(self.nvars);
        }
        SparsePoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect(),
        }
    }

    /// Multiplies by the monomial `x^e`.
    pub fn shift(&self, e: &Exponent) -> SparsePoly {
        SparsePoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(a, c)| (a.add(e), c.clone())).collect(),
        }
    }

    pub fn max_abs_coeff(&self) -> Rational {
        crate::rational::max_abs(self.terms.values())
    }

    /// Exact evaluation at a rational point.
    pub fn evaluate(&self, point: &[Rational]) -> Result<Rational, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::DimensionMismatch { expected: self.nvars, found: point.len() });
        }
        Ok(self
            .terms
            .iter()
            .map(|(e, c)| c * monomial_value(e, point))
            .sum())
    }

    /// Floating evaluation at a real point.
    pub fn evaluate_f64(&self, point: &[f64]) -> Result<f64, PolyError> {
        if point.len() != self.nvars {
            return Err(PolyError::DimensionMismatch { expected: self.nvars, found: point.len() });
        }
        Ok(self
            .terms
            .iter()
            .map(|(e, c)| {
                crate::rational::to_f64(c)
                    * e.0.iter().zip(point).map(|(&k, x)| x.powi(k as i32)).product::<f64>()
            })
            .sum())
    }

    pub fn split_support(&self) -> SupportSplit {
        let mut lambda_part = BTreeSet::new();
        let mut gamma_part = BTreeSet::new();
        for (e, c) in &self.terms {
            if e.is_even() && c.is_positive() {
                lambda_part.insert(e.clone());
            } else {
                gamma_part.insert(e.clone());
            }
        }
        SupportSplit { lambda_part, gamma_part }
    }

    /// Writes `f = x^a * g` with `g` having componentwise minimum exponent zero.
    pub fn factor_out_monomial(&self) -> Result<(Exponent, SparsePoly), PolyError> {
        let mut it = self.terms.keys();
        let first = it.next().ok_or(PolyError::ZeroPolynomial)?.clone();
        let min = it.fold(first, |acc, e| {
            Exponent(acc.0.iter().zip(&e.0).map(|(a, b)| *a.min(b)).collect())
        });
        let g = SparsePoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.checked_sub(&min).unwrap(), c.clone()))
                .collect(),
        };
        Ok((min, g))
    }

    /// `f(s1*x1, ..., sn*xn)`.
    pub fn flip_signs(&self, s: &SignAssignment) -> SparsePoly {
        SparsePoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let c = if s.sign_of(e) < 0 { -c.clone() } else { c.clone() };
                    (e.clone(), c)
                })
                .collect(),
        }
    }

    /// `f(x1^k, ..., xn^k)`.
    pub fn substitute_powers(&self, k: u32) -> Result<SparsePoly, PolyError> {
        if k == 0 {
            return Err(PolyError::InvalidPower);
        }
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let scaled = e.checked_scale(k).ok_or(PolyError::ExponentOverflow)?;
            terms.insert(scaled, c.clone());
        }
        Ok(SparsePoly { nvars: self.nvars, terms })
    }

    /// Inverse of [`SparsePoly::substitute_powers`]; fails unless all exponents are multiples of `k`.
    pub fn divide_exponents(&self, k: u32) -> Option<SparsePoly> {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            terms.insert(e.divide(k)?, c.clone());
        }
        Some(SparsePoly { nvars: self.nvars, terms })
    }

    /// Keeps only the terms whose exponent satisfies `keep`.
    pub fn restrict(&self, mut keep: impl FnMut(&Exponent) -> bool) -> SparsePoly {
        SparsePoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| keep(e))
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }
}

pub fn monomial_value(e: &Exponent, point: &[Rational]) -> Rational {
    e.0.iter()
        .zip(point)
        .filter(|(&k, _)| k > 0)
        .map(|(&k, x)| pow(x, k))
        .fold(Rational::one(), |acc, v| acc * v)
}

/// Λ(f): even exponents with positive coefficient; Γ(f): the rest of the support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportSplit {
    pub lambda_part: BTreeSet<Exponent>,
    pub gamma_part: BTreeSet<Exponent>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignAssignment(pub Vec<i8>);

impl SignAssignment {
    pub fn identity(nvars: usize) -> Self {
        SignAssignment(vec![1; nvars])
    }

    /// Sign of `s^e`.
    pub fn sign_of(&self, e: &Exponent) -> i8 {
        let odd_flips = e
            .0
            .iter()
            .zip(&self.0)
            .filter(|(&k, &s)| s < 0 && k % 2 == 1)
            .count();
        if odd_flips % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn apply(&self, point: &[Rational]) -> Vec<Rational> {
        point
            .iter()
            .zip(&self.0)
            .map(|(x, &s)| if s < 0 { -x.clone() } else { x.clone() })
            .collect()
    }
}

/// Searches `{±1}^n` for `v` with `d_j * v^{β_j} > 0` for every `(β_j, d_j)`.
pub fn find_sign_assignment(gamma_terms: &[(Exponent, Rational)]) -> Option<SignAssignment> {
    let n = gamma_terms.first().map(|(e, _)| e.nvars()).unwrap_or(0);
    assert!(n < 31, "sign search is exhaustive over 2^n candidates");
    (0u32..(1 << n)).find_map(|mask| {
        let s = SignAssignment((0..n).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect());
        let ok = gamma_terms
            .iter()
            .all(|(e, d)| d.is_positive() == (s.sign_of(e) > 0) && !d.is_zero());
        ok.then_some(s)
    })
}

/// Which clause of the vertex test failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexClause {
    NotEven,
    NonPositive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub vertex: Exponent,
    pub clause: VertexClause,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.clause {
            VertexClause::NotEven => write!(f, "vertex {} is not even", self.vertex),
            VertexClause::NonPositive => write!(f, "vertex {} has a negative coefficient", self.vertex),
        }
    }
}

/// Nonnegativity forces every vertex of the Newton polytope to be even with a positive
/// coefficient. Returns the first violating vertex in graded-lex order.
pub fn necessary_conditions(f: &SparsePoly) -> Result<Option<Violation>, GeomError> {
    if f.is_zero() {
        return Ok(None);
    }
    let support = PointSet::new(f.support())?;
    for v in hull_vertices(&support)? {
        let clause = if !v.is_even() {
            VertexClause::NotEven
        } else if !f.coeff(&v).is_positive() {
            VertexClause::NonPositive
        } else {
            continue;
        };
        return Ok(Some(Violation { vertex: v, clause }));
    }
    Ok(None)
}

impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let vars: Vec<String> = e
                .0
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(j, &k)| if k == 1 { format!("x{}", j + 1) } else { format!("x{}^{}", j + 1, k) })
                .collect();
            if vars.is_empty() {
                write!(f, "{}", format_rational(&mag))?;
            } else {
                if !mag.is_one() {
                    write!(f, "{}*", format_rational(&mag))?;
                }
                write!(f, "{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Parses the `x1..xn` polynomial grammar, e.g. `1 + x1^6 - 2/3*x1^4*x2`.
pub fn parse_poly(text: &str, nvars: usize) -> Result<SparsePoly, PolyError> {
    Parser { src: text.as_bytes(), pos: 0, nvars }.parse()
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    nvars: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err(&self, message: impl Into<String>) -> PolyError {
        PolyError::Syntax { position: self.pos, message: message.into() }
    }

    fn number(&mut self) -> Result<num_bigint::BigInt, PolyError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(s.parse().unwrap())
    }

    fn small_number(&mut self) -> Result<u64, PolyError> {
        let n = self.number()?;
        u64::try_from(n).map_err(|_| PolyError::ExponentOverflow)
    }

    fn parse(mut self) -> Result<SparsePoly, PolyError> {
        let mut poly = SparsePoly::zero(self.nvars);
        let mut first = true;
        loop {
            let sign = match self.peek() {
                None if first => return Err(self.err("empty input")),
                None => break,
                Some(b'+') => {
                    self.pos += 1;
                    Rational::one()
                }
                Some(b'-') => {
                    self.pos += 1;
                    -Rational::one()
                }
                Some(_) if first => Rational::one(),
                Some(_) => return Err(self.err("expected '+' or '-'")),
            };
            first = false;
            let (c, e) = self.term()?;
            poly.add_term(e, sign * c);
        }
        Ok(poly)
    }

    fn term(&mut self) -> Result<(Rational, Exponent), PolyError> {
        let mut coeff = Rational::one();
        let mut exp = vec![0u32; self.nvars];
        let mut need_factor = true;
        if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            let p = self.number()?;
            let q = if self.peek() == Some(b'/') {
                self.pos += 1;
                let q = self.number()?;
                if q.is_zero() {
                    return Err(self.err("zero denominator"));
                }
                q
            } else {
                num_bigint::BigInt::one()
            };
            coeff = Rational::new(p, q);
            if self.peek() == Some(b'*') {
                self.pos += 1;
            } else {
                need_factor = false;
            }
        }
        if need_factor {
            loop {
                self.factor(&mut exp)?;
                if self.peek() == Some(b'*') {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        Ok((coeff, Exponent(exp)))
    }

    fn factor(&mut self, exp: &mut [u32]) -> Result<(), PolyError> {
        if self.peek() != Some(b'x') {
            return Err(self.err("expected a variable x<i>"));
        }
        self.pos += 1;
        let at = self.pos;
        let idx = self.small_number()?;
        if idx == 0 || idx as usize > self.nvars {
            return Err(PolyError::VariableOutOfRange { position: at, index: idx, nvars: self.nvars });
        }
        let power = if self.peek() == Some(b'^') {
            self.pos += 1;
            let p = self.small_number()?;
            if p == 0 {
                return Err(self.err("exponent must be positive"));
            }
            u32::try_from(p).map_err(|_| PolyError::ExponentOverflow)?
        } else {
            1
        };
        let slot = &mut exp[idx as usize - 1];
        *slot = slot.checked_add(power).ok_or(PolyError::ExponentOverflow)?;
        Ok(())
    }
}
