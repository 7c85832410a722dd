//! Certify a polynomial with one negative term as a sum of nonnegative circuit
//! polynomials, then print each circuit.
//!
//! ```text
//! cargo run --example decompose_single
//! ```

use sonc::decompose::{decompose, DecomposeOutcome};
use sonc::poly::parse_poly;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f = parse_poly("1 + 3*x1^2 + x1^4*x2^2 + 2*x2^6 - 2*x1^2*x2^2", 2)?;
    match decompose(&f) {
        DecomposeOutcome::Sonc(cert) => {
            println!("{f} is SONC ({:?})", cert.mode);
            for (i, cc) in cert.circuits.iter().enumerate() {
                println!("  circuit {i}: {}", cc.circuit.to_poly());
            }
            for (e, c) in &cert.monomial_squares {
                println!("  square: {c}*x^{e}");
            }
            assert_eq!(cert.recompose(), f);
        }
        other => println!("{f}: {}", other.label()),
    }
    Ok(())
}
