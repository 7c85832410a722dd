//! The circuit number Θ decides nonnegativity of a circuit polynomial:
//! `Σ c_α x^α - d x^β ≥ 0` exactly when `|d| ≤ Θ` (or `β` is even and `d ≤ 0`).
//!
//! ```text
//! cargo run --example circuit_number
//! ```

use sonc::circuit::{circuit_number, circuit_zero, theta_compare, CircuitPoly};
use sonc::poly::parse_poly;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for text in [
        "1 + x1^4*x2^2 + x1^2*x2^4 - 2*x1^2*x2^2",
        "1 + x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2",
        "1 + x1^4*x2^2 + x1^2*x2^4 - 4*x1^2*x2^2",
    ] {
        let c = CircuitPoly::from_poly(&parse_poly(text, 2)?)?;
        let theta = circuit_number(&c);
        println!("{text}");
        let weights: Vec<String> = c.lambdas().iter().map(|l| l.to_string()).collect();
        println!("  weights [{}], Θ = {:.6}, |d| vs Θ: {:?}", weights.join(", "), theta.value(), theta_compare(&c));
        if let Ok(zero) = circuit_zero(&c) {
            println!("  on the boundary, vanishes at {zero:?}");
        }
    }
    Ok(())
}
