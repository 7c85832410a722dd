//! Parse a sparse polynomial, print it canonically, and evaluate it exactly.
//!
//! ```text
//! cargo run --example parse_and_evaluate
//! ```

use sonc::poly::{parse_poly, SignAssignment};
use sonc::rational::frac;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f = parse_poly("1 + x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2", 2)?;
    println!("f            = {f}");
    println!("terms        = {}", f.len());

    let split = f.split_support();
    println!("even, > 0    = {:?}", split.lambda_part);
    println!("the rest     = {:?}", split.gamma_part);

    let x = [frac(1, 2), frac(-3, 2)];
    println!("f(1/2, -3/2) = {}", f.evaluate(&x)?);
    println!("f(1, 1)      = {}", f.evaluate(&[frac(1, 1), frac(1, 1)])?);

    let g = f.flip_signs(&SignAssignment(vec![-1, 1]));
    println!("x1 -> -x1    = {g}");
    println!("x -> x^2     = {}", f.substitute_powers(2)?);
    Ok(())
}
