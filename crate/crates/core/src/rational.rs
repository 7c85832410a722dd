//! Exact rational helpers shared across the crate.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Lossy conversion that survives numerators and denominators far outside the f64 range.
pub fn to_f64(r: &Rational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            let v = n / d;
            if v.is_finite() && v != 0.0 {
                return v;
            }
        }
    }
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    sign * ln_abs(r).exp()
}

/// Natural log of |n| for a nonzero big integer.
pub fn ln_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.abs().to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top: BigInt = n.abs() >> shift;
    top.to_f64().unwrap().ln() + (shift as f64) * std::f64::consts::LN_2
}

/// Natural log of |r| for a nonzero rational.
pub fn ln_abs(r: &Rational) -> f64 {
    ln_bigint(r.numer()) - ln_bigint(r.denom())
}

/// Exact rational value of a finite f64.
pub fn from_f64_exact(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}

/// Best rational approximation of `x` with relative error at most `rel_tol`,
/// found by walking the continued-fraction convergents.
pub fn rationalize(x: f64, rel_tol: f64) -> Rational {
    assert!(x.is_finite(), "cannot rationalize a non-finite value");
    if x == 0.0 {
        return Rational::zero();
    }
    let target = from_f64_exact(x);
    let tol = x.abs() * rel_tol;
    let (mut h_prev, mut h) = (BigInt::zero(), BigInt::one());
    let (mut k_prev, mut k) = (BigInt::one(), BigInt::zero());
    let mut rem = target.clone();
    for _ in 0..80 {
        let a = rem.floor().to_integer();
        let h_next = &a * &h + &h_prev;
        let k_next = &a * &k + &k_prev;
        h_prev = std::mem::replace(&mut h, h_next);
        k_prev = std::mem::replace(&mut k, k_next);
        let approx = Rational::new(h.clone(), k.clone());
        if (to_f64(&(&approx - &target))).abs() <= tol {
            return approx;
        }
        let f = &rem - Rational::from_integer(a);
        if f.is_zero() {
            return approx;
        }
        rem = f.recip();
    }
    target
}

pub fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

pub fn pow(base: &Rational, exp: u32) -> Rational {
    num_traits::pow(base.clone(), exp as usize)
}

/// `"p"` or `"p/q"`.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p: BigInt = p.parse().ok()?;
    let q: BigInt = q.parse().ok()?;
    if q.sign() == Sign::NoSign {
        return None;
    }
    Some(Rational::new(p, q))
}

pub fn max_abs<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Rational {
    values
        .into_iter()
        .map(|v| v.abs())
        .max()
        .unwrap_or_else(Rational::zero)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationalize_recovers_simple_fractions() {
        assert_eq!(rationalize(0.5, 1e-12), frac(1, 2));
        assert_eq!(rationalize(3.0000000000001, 1e-12), int(3));
        assert_eq!(rationalize(2.0 / 3.0, 1e-12), frac(2, 3));
        assert_eq!(rationalize(-0.125, 1e-12), frac(-1, 8));
    }

    #[test]
    fn rationalize_meets_tolerance() {
        for &x in &[std::f64::consts::PI, 1.04521, 0.764724, 1e-7, 12345.678] {
            let r = rationalize(x, 1e-9);
            assert!(((to_f64(&r) - x) / x).abs() <= 1e-9);
        }
    }

    #[test]
    fn huge_values_convert() {
        let big = pow(&int(10), 400) / pow(&int(10), 398);
        assert!((to_f64(&big) - 100.0).abs() < 1e-9);
        let tiny = Rational::new(BigInt::one(), num_traits::pow(BigInt::from(10), 320));
        assert!((ln_abs(&tiny) + 320.0 * 10f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn rational_text_round_trip() {
        for s in ["0", "-3", "7/2", "-22/7"] {
            assert_eq!(format_rational(&parse_rational(s).unwrap()), s);
        }
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("x").is_none());
    }
}
