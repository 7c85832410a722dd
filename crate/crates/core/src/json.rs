//! Canonical JSON for certificates and reports.
//!
//! Rationals are written as `"p"` or `"p/q"` strings, floats as shortest
//! round-trip decimals. Circuits store the signed polynomial coefficient of the
//! inner term, so `inner.coeff` is `-d`.

use serde_json::{json, Map, Value};

use crate::certificate::{CertCircuit, CertMode, Hypotheses, SoncCertificate};
use crate::circuit::CircuitPoly;
use crate::decompose::DecomposeOutcome;
use crate::error::SchemaError;
use crate::lp::LinearSystem;
use crate::mediated::SbsCertificate;
use crate::poly::{Exponent, SparsePoly};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::verify::{VerificationReport, VerifyMode};

pub const SCHEMA_VERSION: u64 = 1;

pub fn rational(r: &Rational) -> Value {
    Value::String(format_rational(r))
}

pub fn point(x: &[Rational]) -> Value {
    Value::Array(x.iter().map(rational).collect())
}

fn term(e: &Exponent, c: &Rational) -> Value {
    json!({ "coeff": rational(c), "exp": e.0 })
}

pub fn poly(p: &SparsePoly) -> Value {
    json!({ "terms": p.terms().map(|(e, c)| term(e, c)).collect::<Vec<_>>() })
}

fn mode_fields(obj: &mut Map<String, Value>, mode: CertMode) {
    match mode {
        CertMode::Exact => {
            obj.insert("mode".into(), json!("exact"));
        }
        CertMode::Epsilon(eps) => {
            obj.insert("mode".into(), json!("epsilon"));
            obj.insert("epsilon".into(), json!(eps));
        }
    }
}

fn circuit(c: &CertCircuit) -> Value {
    let mut obj = Map::new();
    let outer: Vec<Value> = c.circuit.outer_terms().map(|(e, v)| term(e, v)).collect();
    obj.insert("outer".into(), Value::Array(outer));
    obj.insert("inner".into(), term(c.circuit.beta(), &-c.circuit.d.clone()));
    if let Some(s) = c.slack {
        obj.insert("slack".into(), json!(s));
    }
    Value::Object(obj)
}

pub fn certificate(cert: &SoncCertificate) -> Value {
    let mut obj = Map::new();
    obj.insert("version".into(), json!(SCHEMA_VERSION));
    obj.insert("nvars".into(), json!(cert.nvars()));
    obj.insert("polynomial".into(), poly(&cert.polynomial));
    obj.insert("circuits".into(), Value::Array(cert.circuits.iter().map(circuit).collect()));
    let squares: Vec<Value> = cert.monomial_squares.iter().map(|(e, c)| term(e, c)).collect();
    obj.insert("monomial_squares".into(), Value::Array(squares));
    mode_fields(&mut obj, cert.mode);
    if let Some(h) = cert.hypotheses {
        obj.insert(
            "hypotheses".into(),
            json!({
                "sign_assignment": h.sign_assignment,
                "all_interior": h.all_interior,
                "same_side": h.same_side,
                "simple_vertex": h.simple_vertex,
            }),
        );
    }
    Value::Object(obj)
}

pub fn sbs_certificate(cert: &SbsCertificate) -> Value {
    let squares: Vec<Value> = cert
        .squares
        .iter()
        .map(|s| {
            json!({
                "weight": rational(&s.weight),
                "a": rational(&s.a), "u": s.u.0,
                "b": rational(&s.b), "v": s.v.0,
            })
        })
        .collect();
    let mut obj = Map::new();
    obj.insert("nvars".into(), json!(cert.polynomial.nvars()));
    obj.insert("polynomial".into(), poly(&cert.polynomial));
    obj.insert("squares".into(), Value::Array(squares));
    mode_fields(&mut obj, cert.mode);
    Value::Object(obj)
}

pub fn system(s: &LinearSystem) -> Value {
    json!({
        "matrix": s.matrix.iter().map(|r| point(r)).collect::<Vec<_>>(),
        "rhs": point(&s.rhs),
    })
}

pub fn outcome(o: &DecomposeOutcome) -> Value {
    let mut obj = Map::new();
    obj.insert("verdict".into(), json!(o.label()));
    match o {
        DecomposeOutcome::Sonc(c) => {
            obj.insert("certificate".into(), certificate(c));
        }
        DecomposeOutcome::NotSonc { system: s, complete_system, zero } => {
            obj.insert("zero".into(), point(zero));
            obj.insert("system".into(), system(s));
            obj.insert("complete_system".into(), system(complete_system));
        }
        DecomposeOutcome::NotPsd { point: x, value } => {
            obj.insert("point".into(), point(x));
            obj.insert("value".into(), rational(value));
        }
        DecomposeOutcome::Inconclusive { reason, system: s } => {
            obj.insert("reason".into(), json!(reason));
            if let Some(s) = s {
                obj.insert("system".into(), system(s));
            }
        }
    }
    Value::Object(obj)
}

pub fn report(r: &VerificationReport) -> Value {
    let (mode, eps) = match r.mode {
        VerifyMode::Exact => ("exact", None),
        VerifyMode::Epsilon(e) => ("epsilon", Some(e)),
    };
    let circuits: Vec<Value> = r
        .per_circuit
        .iter()
        .map(|c| {
            json!({
                "index": c.index,
                "theta": c.theta.map(|t| format!("{t:?}").to_lowercase()),
                "nonnegative": c.nonnegative,
                "reason": c.reason,
            })
        })
        .collect();
    json!({
        "result": if r.passed() { "pass" } else { "fail" },
        "mode": mode,
        "epsilon": eps,
        "sum_residual": poly(&r.sum_residual),
        "per_circuit": circuits,
        "failures": r.failures,
    })
}

fn field<'a>(v: &'a Value, key: &str, at: &str) -> Result<&'a Value, SchemaError> {
    v.get(key).ok_or_else(|| SchemaError::new(at, format!("missing field \"{key}\"")))
}

fn array<'a>(v: &'a Value, at: &str) -> Result<&'a Vec<Value>, SchemaError> {
    v.as_array().ok_or_else(|| SchemaError::new(at, "expected an array"))
}

fn read_rational(v: &Value, at: &str) -> Result<Rational, SchemaError> {
    v.as_str()
        .and_then(parse_rational)
        .ok_or_else(|| SchemaError::new(at, "expected a rational string \"p\" or \"p/q\""))
}

fn read_exponent(v: &Value, nvars: usize, at: &str) -> Result<Exponent, SchemaError> {
    let items = array(v, at)?;
    if items.len() != nvars {
        return Err(SchemaError::new(at, format!("expected {nvars} exponents, found {}", items.len())));
    }
    items
        .iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_u64()
                .and_then(|k| u32::try_from(k).ok())
                .ok_or_else(|| SchemaError::new(format!("{at}/{i}"), "expected a nonnegative integer"))
        })
        .collect::<Result<Vec<u32>, _>>()
        .map(Exponent)
}

fn read_term(v: &Value, nvars: usize, at: &str) -> Result<(Exponent, Rational), SchemaError> {
    let c = read_rational(field(v, "coeff", at)?, &format!("{at}/coeff"))?;
    let e = read_exponent(field(v, "exp", at)?, nvars, &format!("{at}/exp"))?;
    Ok((e, c))
}

fn read_terms(v: &Value, nvars: usize, at: &str) -> Result<Vec<(Exponent, Rational)>, SchemaError> {
    array(v, at)?.iter().enumerate().map(|(i, t)| read_term(t, nvars, &format!("{at}/{i}"))).collect()
}

pub fn poly_from_json(v: &Value, nvars: usize, at: &str) -> Result<SparsePoly, SchemaError> {
    let terms = read_terms(field(v, "terms", at)?, nvars, &format!("{at}/terms"))?;
    let mut p = SparsePoly::zero(nvars);
    for (e, c) in terms {
        p.add_term(e, c);
    }
    Ok(p)
}

fn read_bool(v: &Value, key: &str, at: &str) -> Result<bool, SchemaError> {
    field(v, key, at)?.as_bool().ok_or_else(|| SchemaError::new(format!("{at}/{key}"), "expected a boolean"))
}

pub fn certificate_from_json(v: &Value) -> Result<SoncCertificate, SchemaError> {
    match v.get("version").and_then(Value::as_u64) {
        Some(SCHEMA_VERSION) => {}
        Some(other) => return Err(SchemaError::new("/version", format!("unsupported version {other}"))),
        None => return Err(SchemaError::new("/version", "missing or non-integer version")),
    }
    let nvars = field(v, "nvars", "")?
        .as_u64()
        .ok_or_else(|| SchemaError::new("/nvars", "expected a nonnegative integer"))? as usize;
    let polynomial = poly_from_json(field(v, "polynomial", "")?, nvars, "/polynomial")?;
    let mut circuits = Vec::new();
    for (i, c) in array(field(v, "circuits", "")?, "/circuits")?.iter().enumerate() {
        let at = format!("/circuits/{i}");
        let outer = read_terms(field(c, "outer", &at)?, nvars, &format!("{at}/outer"))?;
        let (beta, coeff) = read_term(field(c, "inner", &at)?, nvars, &format!("{at}/inner"))?;
        let slack = match c.get("slack") {
            None | Some(Value::Null) => None,
            Some(s) => Some(s.as_f64().ok_or_else(|| SchemaError::new(format!("{at}/slack"), "expected a number"))?),
        };
        let circuit = CircuitPoly::new(outer, beta, -coeff).map_err(|e| SchemaError::new(at.clone(), e.to_string()))?;
        circuits.push(CertCircuit { circuit, slack });
    }
    let monomial_squares = read_terms(field(v, "monomial_squares", "")?, nvars, "/monomial_squares")?;
    let mode = match field(v, "mode", "")?.as_str() {
        Some("exact") => CertMode::Exact,
        Some("epsilon") => {
            let eps = field(v, "epsilon", "")?
                .as_f64()
                .filter(|e| *e > 0.0)
                .ok_or_else(|| SchemaError::new("/epsilon", "expected a positive number"))?;
            CertMode::Epsilon(eps)
        }
        _ => return Err(SchemaError::new("/mode", "expected \"exact\" or \"epsilon\"")),
    };
    let hypotheses = match v.get("hypotheses") {
        None | Some(Value::Null) => None,
        Some(h) => Some(Hypotheses {
            sign_assignment: read_bool(h, "sign_assignment", "/hypotheses")?,
            all_interior: read_bool(h, "all_interior", "/hypotheses")?,
            same_side: read_bool(h, "same_side", "/hypotheses")?,
            simple_vertex: read_bool(h, "simple_vertex", "/hypotheses")?,
        }),
    };
    Ok(SoncCertificate { polynomial, circuits, monomial_squares, mode, hypotheses })
}

pub fn to_string(cert: &SoncCertificate) -> String {
    certificate(cert).to_string()
}

pub fn from_str(text: &str) -> Result<SoncCertificate, SchemaError> {
    let v: Value = serde_json::from_str(text).map_err(|e| SchemaError::new("", format!("invalid JSON: {e}")))?;
    certificate_from_json(&v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::decompose;
    use crate::poly::parse_poly;

    #[test]
    fn round_trip() {
        let f = parse_poly("1 + x1^6 + x2^6 + x1^6*x2^6 - x1^2*x2 - 2*x1^4*x2", 2).unwrap();
        let cert = decompose(&f).certificate().unwrap().clone();
        let back = from_str(&to_string(&cert)).unwrap();
        assert_eq!(back, cert);
    }

    #[test]
    fn inner_coeff_is_signed() {
        let f = parse_poly("1 + x1^2 - 2*x1", 1).unwrap();
        let v = certificate(decompose(&f).certificate().unwrap());
        assert_eq!(v["circuits"][0]["inner"]["coeff"], json!("-2"));
    }

    #[test]
    fn rejects_unknown_version_and_zero_lambda() {
        let f = parse_poly("1 + x1^2 - 2*x1", 1).unwrap();
        let mut v = certificate(decompose(&f).certificate().unwrap());
        v["version"] = json!(2);
        assert_eq!(certificate_from_json(&v).unwrap_err().pointer, "/version");
        v["version"] = json!(1);
        // inner exponent on a vertex of the trellis: one barycentric weight is zero
        v["circuits"][0]["inner"]["exp"] = json!([2]);
        assert_eq!(certificate_from_json(&v).unwrap_err().pointer, "/circuits/0");
        v["circuits"][0]["inner"]["exp"] = json!(["a"]);
        assert_eq!(certificate_from_json(&v).unwrap_err().pointer, "/circuits/0/inner/exp/0");
    }
}
