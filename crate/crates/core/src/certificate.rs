//! SONC certificates and the linear systems that produce them.
//!
//! At a positive point `x`, a circuit with trellis `Δ`, weights `λ` and inner
//! exponent `β` that vanishes at `x` is determined by one number
//! `s = d x^β = c_i x^{α_i} / λ_i`. Covering the coefficients of `f` by such
//! circuits is therefore a linear feasibility problem in the `s` values.

use num_traits::{One, Signed, Zero};

use crate::circuit::{circuit_number, is_nonnegative_circuit, CircuitPoly};
use crate::error::{DecomposeError, GeomError};
use crate::geom::{enumerate_circuits, BarycentricCoords};
use crate::linalg::Matrix;
use crate::lp::LinearSystem;
use crate::poly::{monomial_value, Exponent, SparsePoly};
use crate::rational::{max_abs, to_f64, Rational};

pub const DEFAULT_EPSILON: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CertMode {
    Exact,
    Epsilon(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertCircuit {
    pub circuit: CircuitPoly,
    /// How far `|d|` sits below the circuit number, when it does.
    pub slack: Option<f64>,
}

/// Which hypotheses of the multi-term equivalence held when the certificate was built.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Hypotheses {
    pub sign_assignment: bool,
    pub all_interior: bool,
    pub same_side: bool,
    pub simple_vertex: bool,
}

impl Hypotheses {
    pub fn all(&self) -> bool {
        self.sign_assignment && self.all_interior && self.same_side && self.simple_vertex
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SoncCertificate {
    pub polynomial: SparsePoly,
    pub circuits: Vec<CertCircuit>,
    pub monomial_squares: Vec<(Exponent, Rational)>,
    pub mode: CertMode,
    pub hypotheses: Option<Hypotheses>,
}

impl SoncCertificate {
    pub fn empty(polynomial: SparsePoly) -> Self {
        SoncCertificate {
            polynomial,
            circuits: Vec::new(),
            monomial_squares: Vec::new(),
            mode: CertMode::Exact,
            hypotheses: None,
        }
    }

    pub fn nvars(&self) -> usize {
        self.polynomial.nvars()
    }

    /// Σ circuits + Σ monomial squares.
    pub fn recompose(&self) -> SparsePoly {
        let mut sum = SparsePoly::zero(self.nvars());
        for c in &self.circuits {
            sum = sum.add(&c.circuit.to_poly());
        }
        for (e, c) in &self.monomial_squares {
            sum.add_term(e.clone(), c.clone());
        }
        sum
    }

    /// `polynomial - recompose()`.
    pub fn residual(&self) -> SparsePoly {
        self.polynomial.sub(&self.recompose())
    }

    /// Largest residual coefficient relative to the largest coefficient of the polynomial.
    pub fn relative_residual(&self) -> f64 {
        let r = max_abs(self.residual().terms().map(|(_, c)| c));
        let scale = self.polynomial.max_abs_coeff();
        if scale.is_zero() {
            to_f64(&r)
        } else {
            to_f64(&(r / scale))
        }
    }

    pub fn size(&self) -> usize {
        self.circuits.len() + self.monomial_squares.len()
    }

    /// Multiplies everything by `x^e` (`e` even keeps every piece nonnegative).
    pub fn shift(&self, e: &Exponent) -> Result<SoncCertificate, DecomposeError> {
        let circuits = self
            .circuits
            .iter()
            .map(|c| {
                let outer = c.circuit.outer_terms().map(|(a, v)| (a.add(e), v.clone())).collect();
                let circuit = CircuitPoly::new(outer, c.circuit.beta().add(e), c.circuit.d.clone())?;
                Ok(CertCircuit { circuit, slack: c.slack })
            })
            .collect::<Result<_, DecomposeError>>()?;
        Ok(SoncCertificate {
            polynomial: self.polynomial.shift(e),
            circuits,
            monomial_squares: self.monomial_squares.iter().map(|(a, c)| (a.add(e), c.clone())).collect(),
            mode: self.mode,
            hypotheses: self.hypotheses,
        })
    }
}

/// The inner term `-d x^β` of `f` together with every circuit that could cover it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircuitFamily {
    pub beta: Exponent,
    /// Signed: the coefficient of `x^β` in `f` is `-d`.
    pub d: Rational,
    pub circuits: Vec<BarycentricCoords>,
}

impl CircuitFamily {
    pub fn new(outer: &[(Exponent, Rational)], beta: Exponent, d: Rational) -> Result<Self, GeomError> {
        let pts: Vec<Exponent> = outer.iter().map(|(e, _)| e.clone()).collect();
        let circuits = enumerate_circuits(&pts, &beta)?;
        Ok(CircuitFamily { beta, d, circuits })
    }
}

fn row_index(outer: &[(Exponent, Rational)], e: &Exponent) -> usize {
    outer.iter().position(|(a, _)| a == e).expect("trellis point is an outer point")
}

fn total_columns(families: &[CircuitFamily]) -> usize {
    families.iter().map(|f| f.circuits.len()).sum()
}

/// One row per outer point: `Σ_{j,k} λ_{ijk} s_{jk} = c_i x^{α_i}`. Columns run over
/// families, then over each family's circuits.
fn outer_rows(outer: &[(Exponent, Rational)], families: &[CircuitFamily], x: &[Rational], width: usize) -> (Matrix, Vec<Rational>) {
    let mut matrix = vec![vec![Rational::zero(); width]; outer.len()];
    let mut col = 0;
    for fam in families {
        for bc in &fam.circuits {
            for (p, l) in bc.trellis.points().iter().zip(&bc.lambdas) {
                matrix[row_index(outer, p)][col] = l.clone();
            }
            col += 1;
        }
    }
    let rhs = outer.iter().map(|(e, c)| c * monomial_value(e, x)).collect();
    (matrix, rhs)
}

/// The covering system for a single inner term: outer rows only.
pub fn build_single_system(outer: &[(Exponent, Rational)], family: &CircuitFamily, x: &[Rational]) -> LinearSystem {
    let fams = std::slice::from_ref(family);
    let (matrix, rhs) = outer_rows(outer, fams, x, total_columns(fams));
    LinearSystem::new(matrix, rhs)
}

/// Outer rows plus one row per inner term: `Σ_k s_{jk} = |d_j| x^{β_j}`.
pub fn build_multi_system(outer: &[(Exponent, Rational)], families: &[CircuitFamily], x: &[Rational]) -> LinearSystem {
    let width = total_columns(families);
    let (mut matrix, mut rhs) = outer_rows(outer, families, x, width);
    let mut col = 0;
    for fam in families {
        let mut row = vec![Rational::zero(); width];
        for _ in &fam.circuits {
            row[col] = Rational::one();
            col += 1;
        }
        matrix.push(row);
        rhs.push(fam.d.abs() * monomial_value(&fam.beta, x));
    }
    LinearSystem::new(matrix, rhs)
}

/// The multi system with a slack on every outer row and a surplus on every inner row,
/// and each inner target shrunk by `1 - eta`. Any nonnegative solution yields a valid
/// certificate whatever `x` is.
pub fn build_relaxed_system(
    outer: &[(Exponent, Rational)],
    families: &[CircuitFamily],
    x: &[Rational],
    eta: &Rational,
) -> LinearSystem {
    let s_cols = total_columns(families);
    let m = outer.len();
    let l = families.len();
    let width = s_cols + m + l;
    let base = build_multi_system(outer, families, x);
    let mut matrix = Vec::with_capacity(m + l);
    let mut rhs = Vec::with_capacity(m + l);
    let shrink = Rational::one() - eta;
    for (i, (row, b)) in base.matrix.into_iter().zip(base.rhs).enumerate() {
        let mut r = row;
        r.resize(width, Rational::zero());
        if i < m {
            r[s_cols + i] = Rational::one();
            rhs.push(b);
        } else {
            r[s_cols + i] = -Rational::one();
            rhs.push(b * &shrink);
        }
        matrix.push(r);
    }
    LinearSystem::new(matrix, rhs)
}

/// Every way a same-support SONC decomposition of `f` could vanish at `x`: one column
/// per (inner point `q`, trellis of even support points around `q`), one row per support
/// point, `rhs_p = coeff_p x^p`. Infeasible means no such decomposition exists.
pub fn build_zero_system(f: &SparsePoly, x: &[Rational]) -> Result<LinearSystem, GeomError> {
    let support = f.support();
    let even: Vec<Exponent> = support.iter().filter(|e| e.is_even()).cloned().collect();
    let mut columns: Vec<Vec<Rational>> = Vec::new();
    for (qi, q) in support.iter().enumerate() {
        let others: Vec<Exponent> = even.iter().filter(|e| *e != q).cloned().collect();
        if others.is_empty() {
            continue;
        }
        for bc in enumerate_circuits(&others, q)? {
            let mut col = vec![Rational::zero(); support.len()];
            for (p, l) in bc.trellis.points().iter().zip(&bc.lambdas) {
                col[support.iter().position(|s| s == p).unwrap()] = l.clone();
            }
            col[qi] = -Rational::one();
            columns.push(col);
        }
    }
    let matrix = (0..support.len()).map(|i| columns.iter().map(|c| c[i].clone()).collect()).collect();
    let rhs = support.iter().map(|e| f.coeff(e) * monomial_value(e, x)).collect();
    Ok(LinearSystem::new(matrix, rhs))
}

/// Turns a solution of [`build_relaxed_system`] into circuits:
/// `c_{ijk} = λ_{ijk} s_{jk} / x^{α_i}`, `d_{jk} = s_{jk} / x^{β_j}` (exactly the
/// circuit number), inner coefficients scaled down so each family sums to
/// `(1 - eta)|d_j|`, and unused outer mass returned as monomial squares.
pub fn assemble_certificate(
    f: &SparsePoly,
    outer: &[(Exponent, Rational)],
    families: &[CircuitFamily],
    x: &[Rational],
    s: &[Rational],
    eta: &Rational,
) -> Result<SoncCertificate, DecomposeError> {
    let outer_vals: Vec<Rational> = outer.iter().map(|(e, _)| monomial_value(e, x)).collect();
    let mut used = vec![Rational::zero(); outer.len()];
    let mut circuits = Vec::new();
    let mut col = 0;
    for fam in families {
        let beta_val = monomial_value(&fam.beta, x);
        let mut parts = Vec::new();
        for bc in &fam.circuits {
            let sk = &s[col];
            col += 1;
            if !sk.is_positive() {
                continue;
            }
            let coeffs: Vec<(Exponent, Rational)> = bc
                .trellis
                .points()
                .iter()
                .zip(&bc.lambdas)
                .map(|(p, l)| {
                    let i = row_index(outer, p);
                    (p.clone(), l * sk / &outer_vals[i])
                })
                .collect();
            parts.push((coeffs, sk / &beta_val));
        }
        let total: Rational = parts.iter().map(|(_, d)| d.clone()).sum();
        let target = fam.d.abs() * (Rational::one() - eta);
        if total < target {
            return Err(DecomposeError::Assembly(format!("inner term {} is under-covered", fam.beta)));
        }
        let scale = &target / &total;
        let sign = if fam.d.is_negative() { -Rational::one() } else { Rational::one() };
        for (coeffs, theta) in parts {
            for (p, c) in &coeffs {
                used[row_index(outer, p)] += c;
            }
            let d = &theta * &scale;
            let gap = &theta - &d;
            let circuit = CircuitPoly::new(coeffs, fam.beta.clone(), sign.clone() * d)?;
            if !is_nonnegative_circuit(&circuit) {
                let log_theta = circuit_number(&circuit).log_value;
                return Err(DecomposeError::Assembly(format!(
                    "circuit on {} exceeds its circuit number (log Θ = {log_theta})",
                    fam.beta
                )));
            }
            let slack = gap.is_positive().then(|| to_f64(&gap));
            circuits.push(CertCircuit { circuit, slack });
        }
    }
    let mut monomial_squares = Vec::new();
    for ((e, c), u) in outer.iter().zip(&used) {
        let left = c - u;
        if left.is_negative() {
            return Err(DecomposeError::Assembly(format!("outer term {e} is over-used")));
        }
        if left.is_positive() {
            monomial_squares.push((e.clone(), left));
        }
    }
    let mut cert = SoncCertificate {
        polynomial: f.clone(),
        circuits,
        monomial_squares,
        mode: CertMode::Exact,
        hypotheses: None,
    };
    if !cert.residual().is_zero() {
        cert.mode = CertMode::Epsilon(DEFAULT_EPSILON);
    }
    Ok(cert)
}

/// Scales the inner coefficient of every circuit on `beta` by `factor` in `[0, 1]`.
/// Circuits whose inner term vanishes become monomial squares.
pub fn scale_to_requested_d(
    cert: &SoncCertificate,
    beta: &Exponent,
    factor: &Rational,
) -> Result<SoncCertificate, DecomposeError> {
    if factor.is_negative() || *factor > Rational::one() {
        return Err(DecomposeError::AboveCritical);
    }
    let mut out = cert.clone();
    out.circuits.clear();
    let mut removed = SparsePoly::zero(cert.nvars());
    for c in &cert.circuits {
        if c.circuit.beta() != beta {
            out.circuits.push(c.clone());
            continue;
        }
        removed.add_term(beta.clone(), -&c.circuit.d * (Rational::one() - factor));
        if factor.is_zero() {
            for (e, v) in c.circuit.outer_terms() {
                out.monomial_squares.push((e.clone(), v.clone()));
            }
        } else {
            let mut scaled = c.clone();
            scaled.circuit.d = &c.circuit.d * factor;
            let gap = circuit_number(&scaled.circuit).value() - to_f64(&scaled.circuit.d.abs());
            scaled.slack = (gap > 0.0).then_some(gap);
            out.circuits.push(scaled);
        }
    }
    out.polynomial = cert.polynomial.sub(&removed);
    merge_squares(&mut out.monomial_squares);
    Ok(out)
}

pub(crate) fn merge_squares(squares: &mut Vec<(Exponent, Rational)>) {
    let mut merged: std::collections::BTreeMap<Exponent, Rational> = Default::default();
    for (e, c) in squares.drain(..) {
        *merged.entry(e).or_insert_with(Rational::zero) += c;
    }
    squares.extend(merged.into_iter().filter(|(_, c)| !c.is_zero()));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::nonneg_solve;
    use crate::poly::parse_poly;
    use crate::rational::{frac, int};

    fn e(v: &[u32]) -> Exponent {
        Exponent(v.to_vec())
    }

    fn outer_of(f: &SparsePoly) -> Vec<(Exponent, Rational)> {
        f.split_support().lambda_part.into_iter().map(|e| (e.clone(), f.coeff(&e))).collect()
    }

    #[test]
    fn segment_counterexample_system() {
        let f = parse_poly("1 + 4*x1^2 + x1^4 - 3*x1 - 3*x1^3", 1).unwrap();
        let outer = outer_of(&f);
        let fams: Vec<CircuitFamily> = [1u32, 3]
            .iter()
            .map(|&b| CircuitFamily::new(&outer, e(&[b]), int(3)).unwrap())
            .collect();
        let sys = build_multi_system(&outer, &fams, &[int(1)]);
        let h = frac(1, 2);
        let (q, tq, z) = (frac(1, 4), frac(3, 4), int(0));
        let want: Matrix = vec![
            vec![h.clone(), tq.clone(), q.clone(), z.clone()],
            vec![h.clone(), z.clone(), z.clone(), h.clone()],
            vec![z.clone(), q.clone(), tq.clone(), h.clone()],
            vec![int(1), int(1), z.clone(), z.clone()],
            vec![z.clone(), z.clone(), int(1), int(1)],
        ];
        assert_eq!(sys.matrix, want);
        assert_eq!(sys.rhs, vec![int(1), int(4), int(1), int(3), int(3)]);
        assert!(!nonneg_solve(&sys).unwrap().is_feasible());
        assert!(!nonneg_solve(&build_zero_system(&f, &[int(1)]).unwrap()).unwrap().is_feasible());
    }

    #[test]
    fn am_gm_pair_assembles_exactly() {
        let f = parse_poly("1 + x1^2 - 2*x1", 1).unwrap();
        let outer = outer_of(&f);
        let fam = CircuitFamily::new(&outer, e(&[1]), int(2)).unwrap();
        let x = [int(1)];
        let sys = build_relaxed_system(&outer, std::slice::from_ref(&fam), &x, &int(0));
        let z = nonneg_solve(&sys).unwrap();
        let cert = assemble_certificate(&f, &outer, &[fam], &x, z.solution().unwrap(), &int(0)).unwrap();
        assert_eq!(cert.mode, CertMode::Exact);
        assert!(cert.residual().is_zero());
        assert_eq!(cert.circuits.len(), 1);
    }

    #[test]
    fn scaling_inner_term_keeps_identity() {
        let f = parse_poly("1 + x1^2 - 2*x1", 1).unwrap();
        let outer = outer_of(&f);
        let fam = CircuitFamily::new(&outer, e(&[1]), int(2)).unwrap();
        let x = [int(1)];
        let sys = build_relaxed_system(&outer, std::slice::from_ref(&fam), &x, &int(0));
        let z = nonneg_solve(&sys).unwrap();
        let cert = assemble_certificate(&f, &outer, &[fam], &x, z.solution().unwrap(), &int(0)).unwrap();
        let half = scale_to_requested_d(&cert, &e(&[1]), &frac(1, 2)).unwrap();
        assert_eq!(half.polynomial, parse_poly("1 + x1^2 - x1", 1).unwrap());
        assert!(half.residual().is_zero());
        let none = scale_to_requested_d(&cert, &e(&[1]), &int(0)).unwrap();
        assert!(none.circuits.is_empty());
        assert!(none.residual().is_zero());
    }
}
