//! Exact nonnegative feasibility for `A z = b`, `z >= 0`.
//!
//! Dense tableau simplex over `BigRational`, phase I only, with Bland's rule.
//! The pivot sequence is deterministic, so the same system always yields the
//! same vertex.

use num_traits::{Signed, Zero};

use crate::error::GeomError;
use crate::linalg::{self, Matrix};
use crate::rational::Rational;

pub const PIVOT_LIMIT_ENV: &str = "SONC_LP_PIVOT_LIMIT";
const DEFAULT_PIVOT_LIMIT: usize = 200_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSystem {
    pub matrix: Matrix,
    pub rhs: Vec<Rational>,
}

impl LinearSystem {
    pub fn new(matrix: Matrix, rhs: Vec<Rational>) -> Self {
        assert_eq!(matrix.len(), rhs.len(), "row count must match rhs length");
        if let Some(first) = matrix.first() {
            assert!(matrix.iter().all(|r| r.len() == first.len()), "ragged matrix");
        }
        LinearSystem { matrix, rhs }
    }

    /// A system with `cols` unknowns and no rows.
    pub fn rows(&self) -> usize {
        self.matrix.len()
    }

    pub fn cols(&self) -> usize {
        self.matrix.first().map_or(0, |r| r.len())
    }

    pub fn residual_is_zero(&self, z: &[Rational]) -> bool {
        self.matrix
            .iter()
            .zip(&self.rhs)
            .all(|(row, b)| &linalg::dot(row, z) == b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Feasible(Vec<Rational>),
    /// Phase I ended with a strictly positive sum of artificials.
    Infeasible { phase_one_optimum: Rational },
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LpOutcome::Feasible(_))
    }

    pub fn solution(&self) -> Option<&[Rational]> {
        match self {
            LpOutcome::Feasible(z) => Some(z),
            LpOutcome::Infeasible { .. } => None,
        }
    }
}

fn pivot_limit() -> usize {
    std::env::var(PIVOT_LIMIT_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_PIVOT_LIMIT)
}

/// Finds a vertex `z >= 0` with `A z = b` or certifies that none exists.
pub fn nonneg_solve(sys: &LinearSystem) -> Result<LpOutcome, GeomError> {
    let m = sys.rows();
    let n = sys.cols();
    if m == 0 {
        return Ok(LpOutcome::Feasible(vec![Rational::zero(); n]));
    }
    // tableau columns: n structural, m artificial
    let width = n + m;
    let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(m);
    let mut rhs: Vec<Rational> = Vec::with_capacity(m);
    for (i, (row, b)) in sys.matrix.iter().zip(&sys.rhs).enumerate() {
        let flip = b.is_negative();
        let mut r: Vec<Rational> =
            row.iter().map(|v| if flip { -v.clone() } else { v.clone() }).collect();
        r.resize(width, Rational::zero());
        r[n + i] = Rational::from_integer(1.into());
        rows.push(r);
        rhs.push(if flip { -b.clone() } else { b.clone() });
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut cost = vec![Rational::zero(); width];
    let mut objective = Rational::zero();
    for (r, b) in rows.iter().zip(&rhs) {
        for j in 0..n {
            if !r[j].is_zero() {
                cost[j] -= &r[j];
            }
        }
        objective += b;
    }

    let limit = pivot_limit();
    let mut pivots = 0usize;
    loop {
        let Some(enter) = (0..n).find(|&j| cost[j].is_negative()) else { break };
        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..m {
            if rows[i][enter].is_positive() {
                let ratio = &rhs[i] / &rows[i][enter];
                let better = match &leave {
                    None => true,
                    Some((li, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        // phase I is bounded below by zero, so an entering column always has a positive entry
        let (r, _) = leave.expect("phase I objective is bounded");
        pivots += 1;
        if pivots > limit {
            return Err(GeomError::PivotLimit);
        }
        pivot(&mut rows, &mut rhs, &mut cost, &mut objective, r, enter);
        basis[r] = enter;
    }

    if objective.is_positive() {
        return Ok(LpOutcome::Infeasible { phase_one_optimum: objective });
    }
    let mut z = vec![Rational::zero(); n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            z[b] = rhs[i].clone();
        }
    }
    debug_assert!(sys.residual_is_zero(&z));
    Ok(LpOutcome::Feasible(z))
}

fn pivot(
    rows: &mut [Vec<Rational>],
    rhs: &mut [Rational],
    cost: &mut [Rational],
    objective: &mut Rational,
    r: usize,
    c: usize,
) {
    let inv = rows[r][c].recip();
    for v in rows[r].iter_mut() {
        if !v.is_zero() {
            *v *= &inv;
        }
    }
    rhs[r] *= &inv;
    let prow = rows[r].clone();
    let prhs = rhs[r].clone();
    let nz: Vec<usize> = (0..prow.len()).filter(|&j| !prow[j].is_zero()).collect();
    for i in 0..rows.len() {
        if i == r || rows[i][c].is_zero() {
            continue;
        }
        let factor = rows[i][c].clone();
        for &j in &nz {
            let v = &factor * &prow[j];
            rows[i][j] -= v;
        }
        rhs[i] -= &factor * &prhs;
    }
    if !cost[c].is_zero() {
        let factor = cost[c].clone();
        for &j in &nz {
            let v = &factor * &prow[j];
            cost[j] -= v;
        }
        *objective += &factor * &prhs;
    }
}

/// Exact consistency of `A z = b`: `rank(A) == rank([A | b])`.
pub fn solvable(sys: &LinearSystem) -> bool {
    linalg::solve(&sys.matrix, &sys.rhs).is_some()
}

/// Both sides of the column-deletion equivalence for nonnegative solvability.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HellyReport {
    pub direct: bool,
    pub per_column: Vec<bool>,
}

impl HellyReport {
    pub fn agrees(&self) -> bool {
        self.direct == self.per_column.iter().all(|&b| b)
    }
}

/// Subsystem with column `j` removed along with every row touching column `j`.
pub fn column_deleted(sys: &LinearSystem, j: usize) -> LinearSystem {
    let (matrix, rhs): (Matrix, Vec<Rational>) = sys
        .matrix
        .iter()
        .zip(&sys.rhs)
        .filter(|(row, _)| row[j].is_zero())
        .map(|(row, b)| {
            let mut r = row.clone();
            r.remove(j);
            (r, b.clone())
        })
        .unzip();
    LinearSystem { matrix, rhs }
}

/// Checks the rank hypotheses, then evaluates both sides of the column-deletion equivalence.
pub fn helly_crosscheck(sys: &LinearSystem) -> Result<HellyReport, GeomError> {
    if !solvable(sys) {
        return Err(GeomError::HypothesisViolated("A z = b is inconsistent".into()));
    }
    let r = linalg::rank(&sys.matrix);
    if r <= 1 {
        return Err(GeomError::HypothesisViolated(format!("rank(A) = {r} <= 1")));
    }
    let subsystems: Vec<LinearSystem> = (0..sys.cols()).map(|j| column_deleted(sys, j)).collect();
    for (j, sub) in subsystems.iter().enumerate() {
        let rj = if sub.rows() == 0 { 0 } else { linalg::rank(&sub.matrix) };
        if rj + 1 != r {
            return Err(GeomError::HypothesisViolated(format!(
                "rank(A_{j}) = {rj}, expected {}",
                r - 1
            )));
        }
    }
    let direct = nonneg_solve(sys)?.is_feasible();
    let per_column = subsystems
        .iter()
        .map(|s| nonneg_solve(s).map(|o| o.is_feasible()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(HellyReport { direct, per_column })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn sys(rows: &[&[i64]], b: &[i64]) -> LinearSystem {
        LinearSystem::new(
            rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect(),
            b.iter().map(|&v| int(v)).collect(),
        )
    }

    #[test]
    fn identity_system() {
        let s = sys(&[&[1, 0], &[0, 1]], &[1, 2]);
        assert_eq!(nonneg_solve(&s).unwrap(), LpOutcome::Feasible(vec![int(1), int(2)]));
    }

    #[test]
    fn negative_solution_is_infeasible() {
        let s = sys(&[&[1, 1]], &[-1]);
        match nonneg_solve(&s).unwrap() {
            LpOutcome::Infeasible { phase_one_optimum } => assert!(phase_one_optimum > int(0)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inconsistent_is_unsolvable_and_infeasible() {
        let s = sys(&[&[1], &[1]], &[1, 2]);
        assert!(!solvable(&s));
        assert!(!nonneg_solve(&s).unwrap().is_feasible());
        assert!(solvable(&sys(&[&[1], &[1]], &[2, 2])));
    }

    #[test]
    fn degenerate_rows_are_handled() {
        // duplicated and zero rows
        let s = sys(&[&[1, 2, 0], &[1, 2, 0], &[0, 0, 0], &[0, 1, 1]], &[4, 4, 0, 3]);
        let z = nonneg_solve(&s).unwrap();
        assert!(s.residual_is_zero(z.solution().unwrap()));
    }

    #[test]
    fn fractional_vertex() {
        let s = LinearSystem::new(
            vec![vec![frac(1, 2), frac(1, 3)], vec![int(1), int(-1)]],
            vec![int(1), int(0)],
        );
        let z = nonneg_solve(&s).unwrap();
        assert_eq!(z.solution().unwrap(), &[frac(6, 5), frac(6, 5)]);
    }

    #[test]
    fn helly_rejects_rank_one() {
        let s = sys(&[&[1, 1]], &[1]);
        assert!(matches!(helly_crosscheck(&s), Err(GeomError::HypothesisViolated(_))));
    }
}
