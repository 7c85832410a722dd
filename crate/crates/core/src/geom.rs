//! Exact combinatorics of lattice polytopes spanned by exponent sets.
//!
//! Every question is answered with rational arithmetic: hull membership and
//! face membership are small feasibility LPs, everything else is Gaussian
//! elimination.

use std::collections::BTreeSet;

use num_traits::{One, Signed};

use crate::error::GeomError;
use crate::linalg::{self, Matrix};
use crate::lp::{nonneg_solve, LinearSystem, LpOutcome};
use crate::poly::Exponent;
use crate::rational::Rational;

/// Distinct exponents of a common dimension, kept in graded-lex order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    points: Vec<Exponent>,
}

impl PointSet {
    pub fn new(points: impl IntoIterator<Item = Exponent>) -> Result<Self, GeomError> {
        let set: BTreeSet<Exponent> = points.into_iter().collect();
        let points: Vec<Exponent> = set.into_iter().collect();
        let n = points.first().ok_or(GeomError::Empty)?.nvars();
        if points.iter().any(|p| p.nvars() != n) {
            return Err(GeomError::DimensionMismatch);
        }
        Ok(PointSet { points })
    }

    pub fn points(&self) -> &[Exponent] {
        &self.points
    }

    pub fn nvars(&self) -> usize {
        self.points[0].nvars()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Affinely independent even exponents: the vertex set of a simplex.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Trellis {
    points: Vec<Exponent>,
}

impl Trellis {
    pub fn new(mut points: Vec<Exponent>) -> Result<Self, GeomError> {
        if points.is_empty() {
            return Err(GeomError::Empty);
        }
        let n = points[0].nvars();
        if points.iter().any(|p| p.nvars() != n) {
            return Err(GeomError::DimensionMismatch);
        }
        points.sort();
        points.dedup();
        if points.iter().any(|p| !p.is_even()) || !affinely_independent(&points) {
            return Err(GeomError::InvalidTrellis);
        }
        Ok(Trellis { points })
    }

    pub fn points(&self) -> &[Exponent] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `target = Σ λ_i p_i` with `Σ λ_i = 1` and every `λ_i > 0`, aligned with `trellis.points()`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BarycentricCoords {
    pub trellis: Trellis,
    pub target: Exponent,
    pub lambdas: Vec<Rational>,
}

impl BarycentricCoords {
    pub fn lambda_of(&self, p: &Exponent) -> Option<&Rational> {
        self.trellis.points().iter().position(|q| q == p).map(|i| &self.lambdas[i])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Barycentric {
    Interior(BarycentricCoords),
    /// Members carrying positive weight.
    OnBoundary(Vec<Exponent>),
    Outside,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Classification {
    Interior,
    /// Lattice members of the smallest face containing the point.
    Boundary(Vec<Exponent>),
    Outside,
}

pub(crate) fn to_rational(e: &Exponent) -> Vec<Rational> {
    e.as_rationals()
}

fn differences(points: &[Vec<Rational>]) -> Matrix {
    let Some(base) = points.first() else { return Vec::new() };
    points[1..]
        .iter()
        .map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect()
}

fn affine_dimension_r(points: &[Vec<Rational>]) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    linalg::rank(&differences(points))
}

pub fn affine_dimension(points: &[Exponent]) -> usize {
    let pts: Vec<_> = points.iter().map(to_rational).collect();
    affine_dimension_r(&pts)
}

pub fn affinely_independent(points: &[Exponent]) -> bool {
    !points.is_empty() && affine_dimension(points) + 1 == points.len()
}

/// Convex weights `μ >= 0`, `Σ μ = 1`, `Σ μ_i p_i = target`, if any exist.
pub(crate) fn convex_weights(
    points: &[Vec<Rational>],
    target: &[Rational],
) -> Result<Option<Vec<Rational>>, GeomError> {
    if points.is_empty() {
        return Ok(None);
    }
    let n = target.len();
    let mut matrix: Matrix = (0..n).map(|k| points.iter().map(|p| p[k].clone()).collect()).collect();
    matrix.push(vec![Rational::one(); points.len()]);
    let mut rhs = target.to_vec();
    rhs.push(Rational::one());
    Ok(match nonneg_solve(&LinearSystem::new(matrix, rhs))? {
        LpOutcome::Feasible(z) => Some(z),
        LpOutcome::Infeasible { .. } => None,
    })
}

pub(crate) fn in_hull_r(points: &[Vec<Rational>], target: &[Rational]) -> Result<bool, GeomError> {
    Ok(convex_weights(points, target)?.is_some())
}

pub fn in_hull(points: &[Exponent], target: &Exponent) -> Result<bool, GeomError> {
    let pts: Vec<_> = points.iter().map(to_rational).collect();
    in_hull_r(&pts, &to_rational(target))
}

fn hull_vertex_indices(points: &[Vec<Rational>]) -> Result<Vec<usize>, GeomError> {
    let mut out = Vec::new();
    for i in 0..points.len() {
        let others: Vec<Vec<Rational>> = points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, p)| p.clone())
            .collect();
        if !in_hull_r(&others, &points[i])? {
            out.push(i);
        }
    }
    Ok(out)
}

/// Points of `A` that are not convex combinations of the others.
pub fn hull_vertices(a: &PointSet) -> Result<Vec<Exponent>, GeomError> {
    let pts: Vec<_> = a.points().iter().map(to_rational).collect();
    Ok(hull_vertex_indices(&pts)?.into_iter().map(|i| a.points()[i].clone()).collect())
}

/// Indices of points lying on the smallest face of `conv(points)` that contains `target`,
/// or `None` when `target` lies outside the hull.
///
/// `a` is on that face iff the hull extends a little past `target` in the direction away
/// from `a`: `K target - a = Σ ν_i p_i` with `Σ ν_i = K - 1`, `ν, K >= 0`.
pub(crate) fn minimal_face_r(
    points: &[Vec<Rational>],
    target: &[Rational],
) -> Result<Option<Vec<usize>>, GeomError> {
    if !in_hull_r(points, target)? {
        return Ok(None);
    }
    let n = target.len();
    let cols = points.len() + 1;
    let mut matrix: Matrix = (0..n)
        .map(|k| {
            let mut row: Vec<Rational> = points.iter().map(|p| p[k].clone()).collect();
            row.push(-target[k].clone());
            row
        })
        .collect();
    let mut last = vec![Rational::one(); cols];
    last[cols - 1] = -Rational::one();
    matrix.push(last);
    let mut face = Vec::new();
    for (i, a) in points.iter().enumerate() {
        let mut rhs: Vec<Rational> = a.iter().map(|v| -v.clone()).collect();
        rhs.push(-Rational::one());
        if nonneg_solve(&LinearSystem::new(matrix.clone(), rhs))?.is_feasible() {
            face.push(i);
        }
    }
    Ok(Some(face))
}

pub fn minimal_face(points: &[Exponent], target: &Exponent) -> Result<Option<Vec<Exponent>>, GeomError> {
    let pts: Vec<_> = points.iter().map(to_rational).collect();
    Ok(minimal_face_r(&pts, &to_rational(target))?
        .map(|idx| idx.into_iter().map(|i| points[i].clone()).collect()))
}

pub fn interior_classification(a: &PointSet, beta: &Exponent) -> Result<Classification, GeomError> {
    if beta.nvars() != a.nvars() {
        return Err(GeomError::DimensionMismatch);
    }
    let Some(face) = minimal_face(a.points(), beta)? else { return Ok(Classification::Outside) };
    if affine_dimension(&face) == affine_dimension(a.points()) {
        Ok(Classification::Interior)
    } else {
        Ok(Classification::Boundary(face))
    }
}

/// Unique affine weights of `target` over affinely independent `points`, if consistent.
fn affine_weights(points: &[Exponent], target: &Exponent) -> Option<Vec<Rational>> {
    let n = target.nvars();
    let mut matrix: Matrix = (0..n)
        .map(|k| points.iter().map(|p| Rational::from_integer(p.0[k].into())).collect())
        .collect();
    matrix.push(vec![Rational::one(); points.len()]);
    let mut rhs = to_rational(target);
    rhs.push(Rational::one());
    linalg::solve(&matrix, &rhs)
}

pub fn barycentric(trellis: &Trellis, beta: &Exponent) -> Barycentric {
    let Some(lambdas) = affine_weights(trellis.points(), beta) else { return Barycentric::Outside };
    if lambdas.iter().any(|l| l.is_negative()) {
        return Barycentric::Outside;
    }
    if lambdas.iter().all(|l| l.is_positive()) {
        return Barycentric::Interior(BarycentricCoords {
            trellis: trellis.clone(),
            target: beta.clone(),
            lambdas,
        });
    }
    Barycentric::OnBoundary(
        trellis
            .points()
            .iter()
            .zip(&lambdas)
            .filter(|(_, l)| l.is_positive())
            .map(|(p, _)| p.clone())
            .collect(),
    )
}

/// Every affinely independent subset of `a_even` whose relative interior holds `beta`,
/// ordered by cardinality and then member-wise graded-lex.
pub fn enumerate_circuits(a_even: &[Exponent], beta: &Exponent) -> Result<Vec<BarycentricCoords>, GeomError> {
    let mut sorted: Vec<Exponent> = a_even.to_vec();
    sorted.sort();
    sorted.dedup();
    if sorted.iter().any(|p| !p.is_even()) {
        return Err(GeomError::InvalidTrellis);
    }
    // any such simplex sits inside the smallest face holding beta
    let Some(face) = minimal_face(&sorted, beta)? else { return Ok(Vec::new()) };
    let dim = affine_dimension(&face);
    let mut out = Vec::new();
    for k in 1..=(dim + 1).min(face.len()) {
        let mut combo: Vec<usize> = (0..k).collect();
        loop {
            let members: Vec<Exponent> = combo.iter().map(|&i| face[i].clone()).collect();
            if affinely_independent(&members) {
                if let Some(lambdas) = affine_weights(&members, beta) {
                    if lambdas.iter().all(|l| l.is_positive()) {
                        out.push(BarycentricCoords {
                            trellis: Trellis { points: members },
                            target: beta.clone(),
                            lambdas,
                        });
                    }
                }
            }
            if !next_combination(&mut combo, face.len()) {
                break;
            }
        }
    }
    Ok(out)
}

pub(crate) fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Coordinates in which the affine hull of `points` projects injectively.
pub fn span_coordinates(points: &[Exponent]) -> Vec<usize> {
    let pts: Vec<_> = points.iter().map(to_rational).collect();
    let mut diff = differences(&pts);
    if diff.is_empty() {
        return Vec::new();
    }
    linalg::rref(&mut diff)
}

fn project(points: &[Exponent], coords: &[usize]) -> Vec<Vec<Rational>> {
    points
        .iter()
        .map(|p| coords.iter().map(|&c| Rational::from_integer(p.0[c].into())).collect())
        .collect()
}

/// Orientation of `x` against the hyperplane through `base[0..D]` in `D` dimensions.
fn orientation(base: &[Vec<Rational>], x: &[Rational]) -> Rational {
    let origin = &base[0];
    let mut rows: Matrix = base[1..]
        .iter()
        .map(|p| p.iter().zip(origin).map(|(a, b)| a - b).collect())
        .collect();
    rows.push(x.iter().zip(origin).map(|(a, b)| a - b).collect());
    linalg::determinant(&rows)
}

fn same_side_r(points: &[Vec<Rational>], betas: &[Vec<Rational>], dim: usize) -> bool {
    if betas.len() <= 1 || dim == 0 {
        return true;
    }
    let mut combo: Vec<usize> = (0..dim).collect();
    if points.len() < dim {
        return true;
    }
    loop {
        let base: Vec<Vec<Rational>> = combo.iter().map(|&i| points[i].clone()).collect();
        if affine_dimension_r(&base) + 1 == dim {
            let signs: Vec<i8> = betas
                .iter()
                .map(|b| {
                    let o = orientation(&base, b);
                    if o.is_positive() {
                        1
                    } else if o.is_negative() {
                        -1
                    } else {
                        0
                    }
                })
                .collect();
            if signs.iter().any(|&s| s != signs[0]) {
                return false;
            }
        }
        if !next_combination(&mut combo, points.len()) {
            return true;
        }
    }
}

/// For every hyperplane spanned by points of `a_even`, all `betas` sit strictly on one
/// common side, or all on the hyperplane.
pub fn same_side_check(a_even: &PointSet, betas: &[Exponent]) -> Result<bool, GeomError> {
    let n = a_even.nvars();
    let dim = affine_dimension(a_even.points());
    if dim < n {
        return Err(GeomError::Degenerate { dim, nvars: n });
    }
    if betas.iter().any(|b| b.nvars() != n) {
        return Err(GeomError::DimensionMismatch);
    }
    let pts: Vec<_> = a_even.points().iter().map(to_rational).collect();
    let bs: Vec<_> = betas.iter().map(to_rational).collect();
    Ok(same_side_r(&pts, &bs, n))
}

/// [`same_side_check`] measured inside the affine hull of `a_even`, so lower-dimensional
/// supports are accepted. `betas` are assumed to lie in that hull.
pub fn same_side_in_span(a_even: &[Exponent], betas: &[Exponent]) -> bool {
    let coords = span_coordinates(a_even);
    let pts = project(a_even, &coords);
    let bs = project(betas, &coords);
    same_side_r(&pts, &bs, coords.len())
}

/// Adjacency lists of the vertex-edge graph of `conv(vertices)`; `vertices` must be the
/// hull vertices themselves.
pub fn edge_graph(vertices: &[Exponent]) -> Result<Vec<Vec<usize>>, GeomError> {
    let pts: Vec<_> = vertices.iter().map(to_rational).collect();
    let two = Rational::from_integer(2.into());
    let mut adj = vec![Vec::new(); vertices.len()];
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let mid: Vec<Rational> = pts[i].iter().zip(&pts[j]).map(|(a, b)| (a + b) / &two).collect();
            if minimal_face_r(&pts, &mid)?.as_deref() == Some(&[i, j][..]) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    Ok(adj)
}

/// Whether some vertex of `conv(A)` meets exactly `dim conv(A)` edges.
pub fn simple_vertex_check(a: &PointSet) -> Result<bool, GeomError> {
    let vertices = hull_vertices(a)?;
    let dim = affine_dimension(&vertices);
    if vertices.len() == 1 {
        return Ok(true);
    }
    Ok(edge_graph(&vertices)?.iter().any(|nbrs| nbrs.len() == dim))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    fn e(v: &[u32]) -> Exponent {
        Exponent(v.to_vec())
    }

    fn set(v: &[&[u32]]) -> PointSet {
        PointSet::new(v.iter().map(|p| e(p))).unwrap()
    }

    #[test]
    fn square_hull_drops_interior_points() {
        let a = set(&[&[0, 0], &[6, 0], &[0, 6], &[6, 6], &[2, 1], &[4, 1]]);
        let mut v = hull_vertices(&a).unwrap();
        v.sort();
        let mut want = vec![e(&[0, 0]), e(&[6, 0]), e(&[0, 6]), e(&[6, 6])];
        want.sort();
        assert_eq!(v, want);
        assert_eq!(affine_dimension(a.points()), 2);
    }

    #[test]
    fn segment_hull() {
        let a = set(&[&[0], &[1], &[2], &[3], &[4]]);
        assert_eq!(hull_vertices(&a).unwrap(), vec![e(&[0]), e(&[4])]);
        assert_eq!(affine_dimension(&[e(&[0, 0]), e(&[2, 2]), e(&[4, 4])]), 1);
    }

    #[test]
    fn barycentric_matches_hand_values() {
        let t = Trellis::new(vec![e(&[6, 6]), e(&[6, 0]), e(&[0, 0])]).unwrap();
        let Barycentric::Interior(c) = barycentric(&t, &e(&[2, 1])) else { panic!() };
        assert_eq!(c.lambda_of(&e(&[6, 6])), Some(&frac(1, 6)));
        assert_eq!(c.lambda_of(&e(&[6, 0])), Some(&frac(1, 6)));
        assert_eq!(c.lambda_of(&e(&[0, 0])), Some(&frac(2, 3)));
        let t = Trellis::new(vec![e(&[0]), e(&[4])]).unwrap();
        assert_eq!(barycentric(&t, &e(&[4])), Barycentric::OnBoundary(vec![e(&[4])]));
        assert_eq!(barycentric(&t, &e(&[6])), Barycentric::Outside);
    }

    #[test]
    fn circuits_of_square_and_line() {
        let sq = [e(&[0, 0]), e(&[6, 0]), e(&[0, 6]), e(&[6, 6])];
        let cs = enumerate_circuits(&sq, &e(&[2, 1])).unwrap();
        let sets: Vec<Vec<Exponent>> = cs.iter().map(|c| c.trellis.points().to_vec()).collect();
        assert_eq!(sets.len(), 2);
        let mut a = vec![e(&[0, 0]), e(&[6, 0]), e(&[6, 6])];
        let mut b = vec![e(&[0, 0]), e(&[6, 0]), e(&[0, 6])];
        a.sort();
        b.sort();
        assert!(sets.contains(&a) && sets.contains(&b));

        let line = [e(&[0]), e(&[2]), e(&[4])];
        let cs = enumerate_circuits(&line, &e(&[1])).unwrap();
        let sets: Vec<Vec<Exponent>> = cs.iter().map(|c| c.trellis.points().to_vec()).collect();
        assert_eq!(sets, vec![vec![e(&[0]), e(&[2])], vec![e(&[0]), e(&[4])]]);

        let tri = [e(&[0, 0]), e(&[2, 0]), e(&[0, 2])];
        let cs = enumerate_circuits(&tri, &e(&[0, 0])).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].trellis.points(), &[e(&[0, 0])]);
    }

    #[test]
    fn classification() {
        let sq = set(&[&[0, 0], &[6, 0], &[0, 6], &[6, 6]]);
        assert_eq!(interior_classification(&sq, &e(&[2, 1])).unwrap(), Classification::Interior);
        let tri = set(&[&[0, 0], &[2, 0], &[0, 2]]);
        assert_eq!(
            interior_classification(&tri, &e(&[1, 0])).unwrap(),
            Classification::Boundary(vec![e(&[0, 0]), e(&[2, 0])])
        );
        let seg = set(&[&[0, 0], &[2, 0]]);
        assert_eq!(interior_classification(&seg, &e(&[0, 1])).unwrap(), Classification::Outside);
        // relative interior of a lower-dimensional support is interior
        assert_eq!(interior_classification(&seg, &e(&[1, 0])).unwrap(), Classification::Interior);
    }

    #[test]
    fn same_side() {
        let sq = set(&[&[0, 0], &[6, 0], &[0, 6], &[6, 6]]);
        assert!(same_side_check(&sq, &[e(&[2, 1]), e(&[4, 1])]).unwrap());
        assert!(same_side_check(&sq, &[e(&[2, 1])]).unwrap());
        let line = set(&[&[0], &[2], &[4]]);
        assert!(!same_side_check(&line, &[e(&[1]), e(&[3])]).unwrap());
        let seg = set(&[&[0, 0], &[2, 0]]);
        assert!(matches!(same_side_check(&seg, &[e(&[1, 0])]), Err(GeomError::Degenerate { .. })));
        assert!(!same_side_in_span(&[e(&[0, 0]), e(&[2, 0]), e(&[4, 0])], &[e(&[1, 0]), e(&[3, 0])]));
    }

    #[test]
    fn simple_vertices() {
        assert!(simple_vertex_check(&set(&[&[0, 0], &[6, 0], &[0, 6], &[6, 6]])).unwrap());
        assert!(simple_vertex_check(&set(&[&[0, 0, 0], &[2, 0, 0], &[0, 2, 0], &[0, 0, 2]])).unwrap());
        // octahedron shifted into the positive orthant
        let oct = set(&[&[0, 2, 2], &[4, 2, 2], &[2, 0, 2], &[2, 4, 2], &[2, 2, 0], &[2, 2, 4]]);
        assert!(!simple_vertex_check(&oct).unwrap());
        let adj = edge_graph(&hull_vertices(&oct).unwrap()).unwrap();
        assert!(adj.iter().all(|n| n.len() == 4));
    }

    #[test]
    fn trellis_rejects_odd_or_dependent() {
        assert_eq!(Trellis::new(vec![e(&[1])]), Err(GeomError::InvalidTrellis));
        assert_eq!(
            Trellis::new(vec![e(&[0]), e(&[2]), e(&[4])]),
            Err(GeomError::InvalidTrellis)
        );
    }
}
