//! Write a nonnegative circuit polynomial, and a whole SONC certificate after
//! `x -> x^k`, as a sum of binomial squares `w (a x^u - b x^v)^2`.
//!
//! ```text
//! cargo run --example binomial_squares
//! ```

use sonc::circuit::CircuitPoly;
use sonc::decompose::decompose;
use sonc::mediated::{maximal_mediated_set, sbs_decompose_circuit, sbs_from_sonc, BinomialSquare};
use sonc::poly::parse_poly;
use sonc::verify::{verify_sbs, VerifyMode};

fn print_squares(squares: &[BinomialSquare]) {
    for s in squares {
        println!("  {} * ({} x^{:?} - {} x^{:?})^2", s.weight, s.a, s.u.0, s.b, s.v.0);
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = CircuitPoly::from_poly(&parse_poly("1 + x1^4 - 2*x1^2", 1)?)?;
    let m = maximal_mediated_set(&c.coords.trellis)?;
    let sbs = sbs_decompose_circuit(&c, &m)?;
    println!("{} =", c.to_poly());
    print_squares(&sbs.squares);

    let motzkin = parse_poly("1 + x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2", 2)?;
    let cert = decompose(&motzkin).certificate().cloned().ok_or("expected a certificate")?;
    let sbs = sbs_from_sonc(&cert, 2)?;
    println!("{} =", sbs.polynomial);
    print_squares(&sbs.squares);
    let report = verify_sbs(&sbs, &sbs.polynomial, VerifyMode::Exact);
    println!("expansion matches exactly: {}", report.passed());
    Ok(())
}
