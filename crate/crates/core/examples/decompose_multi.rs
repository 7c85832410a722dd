//! Several negative terms sharing a Newton polytope: the decomposer locates the
//! critical zero, solves the covering system exactly, and returns a certificate.
//!
//! ```text
//! cargo run --example decompose_multi
//! ```

use sonc::critical::critical_point_multi;
use sonc::decompose::decompose;
use sonc::poly::parse_poly;
use sonc::verify::{verify_sonc, VerifyMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let boundary = parse_poly("1 + x1^6 + x2^6 + x1^6*x2^6 - x1^2*x2 - x1^4*x2", 2)?;
    let cp = critical_point_multi(&boundary, 1)?;
    println!("keeping -x1^2*x2, the x1^4*x2 coefficient can grow to {:.5}", cp.d_star);
    println!("at that value f vanishes at ({:.6}, {:.6})", cp.x_star[0], cp.x_star[1]);

    let f = parse_poly("1 + x1^6 + x2^6 + x1^6*x2^6 - x1^2*x2 - 2*x1^4*x2", 2)?;
    let outcome = decompose(&f);
    let cert = outcome.certificate().ok_or("expected a certificate")?;
    println!("{f}: {} circuits", cert.circuits.len());
    for cc in &cert.circuits {
        println!("  {}", cc.circuit.to_poly());
    }
    let report = verify_sonc(cert, &f, VerifyMode::Exact);
    println!("exact verification passed: {}", report.passed());
    Ok(())
}
