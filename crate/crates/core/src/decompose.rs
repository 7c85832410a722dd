//! The decision pipeline: SONC certificate, refutation, or an honest "don't know".

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::certificate::{
    assemble_certificate, build_multi_system, build_relaxed_system, build_zero_system, merge_squares, CircuitFamily,
    Hypotheses, SoncCertificate,
};
use crate::critical::{critical_point_multi_seeded, critical_point_single, CriticalPoint};
use crate::error::{DecomposeError, GeomError};
use crate::geom::{minimal_face, same_side_in_span, simple_vertex_check, PointSet};
use crate::lp::{nonneg_solve, LinearSystem, LpOutcome};
use crate::poly::{find_sign_assignment, necessary_conditions, Exponent, SignAssignment, SparsePoly};
use crate::rational::{frac, int, lcm_of_denominators, rationalize, Rational};

#[derive(Clone, Debug, PartialEq)]
pub enum DecomposeOutcome {
    Sonc(SoncCertificate),
    /// `system` is the covering system at the zero `zero`; `complete_system` additionally
    /// allows every same-support circuit and is infeasible as well.
    NotSonc { system: LinearSystem, complete_system: LinearSystem, zero: Vec<Rational> },
    /// `value = f(point) < 0`.
    NotPsd { point: Vec<Rational>, value: Rational },
    Inconclusive { reason: String, system: Option<LinearSystem> },
}

impl DecomposeOutcome {
    pub fn certificate(&self) -> Option<&SoncCertificate> {
        match self {
            DecomposeOutcome::Sonc(c) => Some(c),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            DecomposeOutcome::Sonc(_) => "sonc",
            DecomposeOutcome::NotSonc { .. } => "not_sonc",
            DecomposeOutcome::NotPsd { .. } => "not_psd",
            DecomposeOutcome::Inconclusive { .. } => "inconclusive",
        }
    }

    fn inconclusive(reason: impl Into<String>) -> Self {
        DecomposeOutcome::Inconclusive { reason: reason.into(), system: None }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DecomposeOptions {
    /// Seeds the random restarts of the multi-term critical point search.
    pub seed: u64,
}

/// Relative precisions at which a float critical point is turned into a rational one.
const LP_PRECISIONS: [f64; 2] = [1e-8, 1e-12];
const ZERO_PRECISIONS: [f64; 4] = [1e-6, 1e-8, 1e-10, 1e-12];
/// Inner targets are shrunk by this much when the exact covering fails at the boundary.
fn boundary_eta() -> Rational {
    frac(1, 1_000_000_000)
}

pub fn decompose(f: &SparsePoly) -> DecomposeOutcome {
    decompose_with(f, &DecomposeOptions::default())
}

pub fn decompose_with(f: &SparsePoly, opts: &DecomposeOptions) -> DecomposeOutcome {
    match run(f, opts) {
        Ok(o) => o,
        Err(e) => DecomposeOutcome::inconclusive(e.to_string()),
    }
}

fn run(f: &SparsePoly, opts: &DecomposeOptions) -> Result<DecomposeOutcome, DecomposeError> {
    if f.is_zero() {
        return Ok(DecomposeOutcome::Sonc(SoncCertificate::empty(f.clone())));
    }
    if let Some(v) = necessary_conditions(f)? {
        return Ok(match vertex_witness(f, &v.vertex)? {
            Some((point, value)) => DecomposeOutcome::NotPsd { point, value },
            None => DecomposeOutcome::inconclusive(format!("{v}, but no witness point was found")),
        });
    }
    // every coordinate minimum is attained at a vertex, so the factor is even
    let (shift, g) = f.factor_out_monomial()?;
    let outcome = run_factored(&g, opts)?;
    Ok(match outcome {
        DecomposeOutcome::Sonc(cert) => {
            let mut cert = cert.shift(&shift)?;
            cert.polynomial = f.clone();
            DecomposeOutcome::Sonc(cert)
        }
        DecomposeOutcome::NotPsd { point, .. } => {
            let value = f.evaluate(&point)?;
            if value.is_negative() {
                DecomposeOutcome::NotPsd { point, value }
            } else {
                DecomposeOutcome::inconclusive("witness point lost its sign after unfactoring")
            }
        }
        other => other,
    })
}

fn outer_terms(g: &SparsePoly) -> Vec<(Exponent, Rational)> {
    g.split_support().lambda_part.into_iter().map(|e| (e.clone(), g.coeff(&e))).collect()
}

/// `(β, d)` pairs with `g = ... - d x^β`.
fn inner_terms(g: &SparsePoly) -> Vec<(Exponent, Rational)> {
    g.split_support().gamma_part.into_iter().map(|e| (e.clone(), -g.coeff(&e))).collect()
}

fn run_factored(g: &SparsePoly, opts: &DecomposeOptions) -> Result<DecomposeOutcome, DecomposeError> {
    let outer = outer_terms(g);
    let inner = inner_terms(g);
    if inner.is_empty() {
        let mut cert = SoncCertificate::empty(g.clone());
        cert.monomial_squares = outer;
        return Ok(DecomposeOutcome::Sonc(cert));
    }
    let outer_pts: Vec<Exponent> = outer.iter().map(|(e, _)| e.clone()).collect();
    let faces: Vec<Vec<Exponent>> = inner
        .iter()
        .map(|(b, _)| minimal_face(&outer_pts, b).map(|f| f.unwrap_or_default()))
        .collect::<Result<_, _>>()?;
    let full = outer_pts.len();
    if faces.iter().all(|f| f.len() == full) {
        return if inner.len() == 1 {
            single_pipeline(g, &outer, &inner[0])
        } else {
            multi_pipeline(g, &outer, &inner, opts)
        };
    }
    face_pipeline(g, &outer, &inner, &faces, opts)
}

fn rationalize_point(x: &[f64], tol: f64) -> Option<Vec<Rational>> {
    x.iter()
        .map(|&v| (v.is_finite() && v > 0.0).then(|| rationalize(v, tol)).filter(|r| r.is_positive()))
        .collect()
}

fn flip_point(s: &SignAssignment, x: &[Rational]) -> Vec<Rational> {
    s.apply(x)
}

/// Tries the relaxed covering LP at each candidate point, exact first, then with a
/// shrunken inner target.
fn try_cover(
    g: &SparsePoly,
    outer: &[(Exponent, Rational)],
    families: &[CircuitFamily],
    points: &[Vec<Rational>],
) -> Result<Option<SoncCertificate>, DecomposeError> {
    for eta in [Rational::zero(), boundary_eta()] {
        for x in points {
            let sys = build_relaxed_system(outer, families, x, &eta);
            if let LpOutcome::Feasible(s) = nonneg_solve(&sys)? {
                return Ok(Some(assemble_certificate(g, outer, families, x, &s, &eta)?));
            }
        }
    }
    Ok(None)
}

fn single_pipeline(
    g: &SparsePoly,
    outer: &[(Exponent, Rational)],
    (beta, d): &(Exponent, Rational),
) -> Result<DecomposeOutcome, DecomposeError> {
    let s = find_sign_assignment(&[(beta.clone(), d.clone())]).unwrap_or_else(|| SignAssignment::identity(g.nvars()));
    let g_plus = g.flip_signs(&s);
    let cp = match critical_point_single(&g_plus) {
        Ok(cp) => cp,
        Err(e) => return Ok(DecomposeOutcome::inconclusive(e.to_string())),
    };
    let family = CircuitFamily::new(outer, beta.clone(), d.clone())?;
    let points: Vec<Vec<Rational>> = LP_PRECISIONS.iter().filter_map(|&t| rationalize_point(&cp.x_star, t)).collect();
    if let Some(cert) = try_cover(g, outer, std::slice::from_ref(&family), &points)? {
        return Ok(DecomposeOutcome::Sonc(cert));
    }
    for x in &points {
        let value = g_plus.evaluate(x)?;
        if value.is_negative() {
            return Ok(DecomposeOutcome::NotPsd { point: flip_point(&s, x), value });
        }
    }
    Ok(DecomposeOutcome::Inconclusive {
        reason: format!("covering LP infeasible at the critical point (d* ≈ {})", cp.d_star),
        system: points.first().map(|x| build_multi_system(outer, &[family], x)),
    })
}

/// Inner indices ordered by decreasing `|d|`, later index first on ties.
fn freeing_order(inner: &[(Exponent, Rational)]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..inner.len()).collect();
    idx.sort_by(|&a, &b| inner[b].1.abs().cmp(&inner[a].1.abs()).then(b.cmp(&a)));
    idx
}

fn all_sign_flips(n: usize) -> impl Iterator<Item = SignAssignment> {
    (0u64..(1u64 << n.min(20))).map(move |mask| {
        SignAssignment((0..n).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect())
    })
}

fn multi_pipeline(
    g: &SparsePoly,
    outer: &[(Exponent, Rational)],
    inner: &[(Exponent, Rational)],
    opts: &DecomposeOptions,
) -> Result<DecomposeOutcome, DecomposeError> {
    let sign = find_sign_assignment(inner);
    let outer_pts: Vec<Exponent> = outer.iter().map(|(e, _)| e.clone()).collect();
    let betas: Vec<Exponent> = inner.iter().map(|(b, _)| b.clone()).collect();
    let hyp = Hypotheses {
        sign_assignment: sign.is_some(),
        all_interior: true,
        same_side: same_side_in_span(&outer_pts, &betas),
        simple_vertex: simple_vertex_check(&PointSet::new(outer_pts.clone())?)?,
    };
    // with a sign assignment this is g at a sign flip; otherwise its pessimistic bound
    let g_plus = match &sign {
        Some(s) => g.flip_signs(s),
        None => {
            let mut p = g.restrict(|e| !betas.contains(e));
            for (b, d) in inner {
                p.add_term(b.clone(), -d.abs());
            }
            p
        }
    };
    let families: Vec<CircuitFamily> = inner
        .iter()
        .map(|(b, d)| CircuitFamily::new(outer, b.clone(), d.clone()))
        .collect::<Result<_, GeomError>>()?;

    let mut cps: Vec<CriticalPoint> = Vec::new();
    let mut failures = Vec::new();
    for l in freeing_order(inner) {
        match critical_point_multi_seeded(&g_plus, l, opts.seed) {
            Ok(cp) => cps.push(cp),
            Err(e) => failures.push(format!("freeing {}: {e}", inner[l].0)),
        }
    }
    let mut points: Vec<Vec<Rational>> = Vec::new();
    for cp in &cps {
        for &t in &LP_PRECISIONS {
            if let Some(x) = rationalize_point(&cp.x_star, t) {
                if !points.contains(&x) {
                    points.push(x);
                }
            }
        }
    }
    if points.is_empty() {
        points.push(vec![Rational::one(); g.nvars()]);
    }
    if let Some(mut cert) = try_cover(g, outer, &families, &points)? {
        cert.hypotheses = Some(hyp);
        return Ok(DecomposeOutcome::Sonc(cert));
    }
    for x in &points {
        for s in all_sign_flips(g.nvars()) {
            let p = s.apply(x);
            let value = g.evaluate(&p)?;
            if value.is_negative() {
                return Ok(DecomposeOutcome::NotPsd { point: p, value });
            }
        }
    }
    if let Some(s) = &sign {
        for cp in &cps {
            for &t in &ZERO_PRECISIONS {
                let Some(x) = rationalize_point(&cp.x_star, t) else { continue };
                if !g_plus.evaluate(&x)?.is_zero() {
                    continue;
                }
                // every piece of a same-support decomposition would have to vanish at x
                let complete_system = build_zero_system(&g_plus, &x)?;
                if nonneg_solve(&complete_system)?.is_feasible() {
                    break;
                }
                return Ok(DecomposeOutcome::NotSonc {
                    system: build_multi_system(outer, &families, &x),
                    complete_system,
                    zero: flip_point(s, &x),
                });
            }
        }
    }
    let mut reason = String::from("no covering found at the critical points");
    if !failures.is_empty() {
        reason = format!("{reason}; {}", failures.join("; "));
    }
    Ok(DecomposeOutcome::Inconclusive { reason, system: Some(build_multi_system(outer, &families, &points[0])) })
}

/// Some inner term lies on a proper face of the Newton polytope.
fn face_pipeline(
    g: &SparsePoly,
    outer: &[(Exponent, Rational)],
    inner: &[(Exponent, Rational)],
    faces: &[Vec<Exponent>],
    opts: &DecomposeOptions,
) -> Result<DecomposeOutcome, DecomposeError> {
    let full = outer.len();
    let mut proper: Vec<Vec<Exponent>> = faces.iter().filter(|f| f.len() < full).cloned().collect();
    proper.sort();
    proper.dedup();
    // the smallest face holding every inner term, when it is proper
    let all_inner: Vec<Exponent> = inner.iter().map(|(b, _)| b.clone()).collect();
    let common = common_face(outer, &all_inner)?;
    if let Some(face) = common.filter(|f| f.len() < full) {
        let h = restrict_to_face(g, &face);
        return lift_face_outcome(g, outer, &face, decompose_with(&h, opts));
    }
    // restrictions to faces must be nonnegative and SONC themselves
    for face in &proper {
        let h = restrict_to_face(g, face);
        match decompose_with(&h, opts) {
            DecomposeOutcome::Sonc(_) | DecomposeOutcome::Inconclusive { .. } => {}
            refuted => return lift_face_outcome(g, outer, face, refuted),
        }
    }
    let families: Vec<CircuitFamily> = inner
        .iter()
        .map(|(b, d)| CircuitFamily::new(outer, b.clone(), d.clone()))
        .collect::<Result<_, GeomError>>()?;
    if let Some(cert) = try_cover(g, outer, &families, &[vec![Rational::one(); g.nvars()]])? {
        return Ok(DecomposeOutcome::Sonc(cert));
    }
    Ok(DecomposeOutcome::inconclusive("inner terms lie on different faces of the Newton polytope"))
}

/// Outer points on the smallest face containing all `points`.
fn common_face(outer: &[(Exponent, Rational)], points: &[Exponent]) -> Result<Option<Vec<Exponent>>, DecomposeError> {
    let pts: Vec<Vec<Rational>> = outer.iter().map(|(e, _)| e.as_rationals()).collect();
    let n = points[0].nvars();
    let k = int(points.len() as i64);
    let centroid: Vec<Rational> = (0..n)
        .map(|i| points.iter().map(|p| Rational::from_integer(p.0[i].into())).sum::<Rational>() / &k)
        .collect();
    Ok(crate::geom::minimal_face_r(&pts, &centroid)?
        .map(|idx| idx.into_iter().map(|i| outer[i].0.clone()).collect()))
}

fn restrict_to_face(g: &SparsePoly, face: &[Exponent]) -> SparsePoly {
    let pts: Vec<Vec<Rational>> = face.iter().map(|e| e.as_rationals()).collect();
    g.restrict(|e| face.contains(e) || crate::geom::in_hull_r(&pts, &e.as_rationals()).unwrap_or(false))
}

fn lift_face_outcome(
    g: &SparsePoly,
    outer: &[(Exponent, Rational)],
    face: &[Exponent],
    outcome: DecomposeOutcome,
) -> Result<DecomposeOutcome, DecomposeError> {
    Ok(match outcome {
        DecomposeOutcome::Sonc(mut cert) => {
            for (e, c) in outer {
                if !face.contains(e) {
                    cert.monomial_squares.push((e.clone(), c.clone()));
                }
            }
            merge_squares(&mut cert.monomial_squares);
            cert.polynomial = g.clone();
            DecomposeOutcome::Sonc(cert)
        }
        DecomposeOutcome::NotPsd { point, .. } => match face_witness(g, face, &point)? {
            Some((point, value)) => DecomposeOutcome::NotPsd { point, value },
            None => DecomposeOutcome::inconclusive("face restriction is negative but the witness did not lift"),
        },
        other => other,
    })
}

/// Integer `w` with `⟨w, p - q⟩ >= 1` for every `q` in `others` (`p` fixed), i.e. `p`
/// strictly maximizes `⟨w, ·⟩`; equalities `⟨w, p - q⟩ = 0` for `q` in `level`.
fn separating_direction(p: &Exponent, others: &[Exponent], level: &[Exponent]) -> Result<Option<Vec<BigInt>>, DecomposeError> {
    let n = p.nvars();
    let pr = p.as_rationals();
    let diff = |q: &Exponent| -> Vec<Rational> { pr.iter().zip(q.as_rationals()).map(|(a, b)| a - b).collect() };
    // variables: w+ (n), w- (n), one surplus per inequality
    let width = 2 * n + others.len();
    let mut matrix = Vec::new();
    let mut rhs = Vec::new();
    for (k, q) in others.iter().enumerate() {
        let dv = diff(q);
        let mut row = vec![Rational::zero(); width];
        for i in 0..n {
            row[i] = dv[i].clone();
            row[n + i] = -dv[i].clone();
        }
        row[2 * n + k] = -Rational::one();
        matrix.push(row);
        rhs.push(Rational::one());
    }
    for q in level {
        let dv = diff(q);
        let mut row = vec![Rational::zero(); width];
        for i in 0..n {
            row[i] = dv[i].clone();
            row[n + i] = -dv[i].clone();
        }
        matrix.push(row);
        rhs.push(Rational::zero());
    }
    let LpOutcome::Feasible(z) = nonneg_solve(&LinearSystem::new(matrix, rhs))? else { return Ok(None) };
    let w: Vec<Rational> = (0..n).map(|i| &z[i] - &z[n + i]).collect();
    let den = lcm_of_denominators(&w);
    Ok(Some(w.iter().map(|v| (v * Rational::from_integer(den.clone())).to_integer()).collect()))
}

fn pow2(e: i64) -> Rational {
    let m = num_traits::pow(int(2), e.unsigned_abs() as usize);
    if e < 0 {
        m.recip()
    } else {
        m
    }
}

/// `base_i · 2^{t w_i}` for doubling `t` until `g` is negative there.
fn push_along(g: &SparsePoly, base: &[Rational], w: &[BigInt]) -> Result<Option<(Vec<Rational>, Rational)>, DecomposeError> {
    let mut t: i64 = 1;
    for _ in 0..12 {
        let mut point = Vec::with_capacity(base.len());
        for (b, wi) in base.iter().zip(w) {
            let Ok(e) = i64::try_from(BigInt::from(t) * wi) else { return Ok(None) };
            point.push(b * pow2(e));
        }
        let value = g.evaluate(&point)?;
        if value.is_negative() {
            return Ok(Some((point, value)));
        }
        t *= 2;
    }
    Ok(None)
}

/// A point where the term at vertex `v` dominates with a negative sign.
fn vertex_witness(f: &SparsePoly, v: &Exponent) -> Result<Option<(Vec<Rational>, Rational)>, DecomposeError> {
    let others: Vec<Exponent> = f.support().into_iter().filter(|e| e != v).collect();
    let w = if others.is_empty() {
        vec![BigInt::zero(); f.nvars()]
    } else {
        match separating_direction(v, &others, &[])? {
            Some(w) => w,
            None => return Ok(None),
        }
    };
    let mut base = vec![Rational::one(); f.nvars()];
    if f.coeff(v).is_positive() {
        let Some(i) = v.0.iter().position(|k| k % 2 == 1) else { return Ok(None) };
        base[i] = -Rational::one();
    }
    push_along(f, &base, &w)
}

/// Lifts a negative point of the restriction to `face` to a negative point of `g`: along
/// a direction maximized exactly on the face, the off-face terms fade out.
fn face_witness(g: &SparsePoly, face: &[Exponent], point: &[Rational]) -> Result<Option<(Vec<Rational>, Rational)>, DecomposeError> {
    let face_pts: Vec<Vec<Rational>> = face.iter().map(|e| e.as_rationals()).collect();
    let mut off = Vec::new();
    for e in g.support() {
        if !crate::geom::in_hull_r(&face_pts, &e.as_rationals())? {
            off.push(e);
        }
    }
    if off.is_empty() {
        let value = g.evaluate(point)?;
        return Ok(value.is_negative().then(|| (point.to_vec(), value)));
    }
    let Some(w) = separating_direction(&face[0], &off, &face[1..])? else { return Ok(None) };
    push_along(g, point, &w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;

    fn p(s: &str, n: usize) -> SparsePoly {
        parse_poly(s, n).unwrap()
    }

    #[test]
    fn squares_only() {
        let DecomposeOutcome::Sonc(c) = decompose(&p("1 + x1^2", 1)) else { panic!() };
        assert!(c.circuits.is_empty());
        assert!(c.residual().is_zero());
    }

    #[test]
    fn vertex_violations_give_points() {
        for s in ["x1^3 + 1", "1 - x1^2", "1 + x1^2 - x1^4"] {
            match decompose(&p(s, 1)) {
                DecomposeOutcome::NotPsd { point, value } => {
                    assert!(value.is_negative());
                    assert_eq!(p(s, 1).evaluate(&point).unwrap(), value);
                }
                other => panic!("{s}: {other:?}"),
            }
        }
    }

    #[test]
    fn am_gm_boundary_is_exact() {
        let DecomposeOutcome::Sonc(c) = decompose(&p("1 + x1^2 - 2*x1", 1)) else { panic!() };
        assert!(c.residual().is_zero());
        let DecomposeOutcome::Sonc(c) = decompose(&p("1 + x1^2 + 2*x1", 1)) else { panic!() };
        assert!(c.residual().is_zero());
        assert!(matches!(decompose(&p("1 + x1^2 - 3*x1", 1)), DecomposeOutcome::NotPsd { .. }));
    }

    #[test]
    fn monomial_factor_is_restored() {
        let f = p("x1^2*x2^2 + x1^4*x2^2 - 2*x1^3*x2^2", 2);
        let DecomposeOutcome::Sonc(c) = decompose(&f) else { panic!() };
        assert_eq!(c.polynomial, f);
        assert!(c.residual().is_zero());
    }

    #[test]
    fn square_example_at_two() {
        let f = p("1 + x1^6 + x2^6 + x1^6*x2^6 - x1^2*x2 - 2*x1^4*x2", 2);
        let DecomposeOutcome::Sonc(c) = decompose(&f) else { panic!() };
        assert!(c.residual().is_zero());
        assert!(c.hypotheses.unwrap().all());
    }

    #[test]
    fn segment_counterexample() {
        let f = p("1 + 4*x1^2 + x1^4 - 3*x1 - 3*x1^3", 1);
        match decompose(&f) {
            DecomposeOutcome::NotSonc { system, zero, .. } => {
                assert_eq!(zero, vec![int(1)]);
                assert_eq!(system.matrix.len(), 5);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn boundary_inner_term_uses_the_face() {
        // x1 sits on the edge {1, x1^2}; the x2^2 terms are squares
        let f = p("1 + x1^2 + x2^2 + x1^2*x2^2 - 2*x1", 2);
        let DecomposeOutcome::Sonc(c) = decompose(&f) else { panic!() };
        assert!(c.residual().is_zero());
        let f = p("1 + x1^2 + x2^2 + x1^2*x2^2 - 3*x1", 2);
        let DecomposeOutcome::NotPsd { point, .. } = decompose(&f) else { panic!() };
        assert!(f.evaluate(&point).unwrap().is_negative());
    }
}
