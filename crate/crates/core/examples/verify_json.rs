//! Serialize a certificate, read it back, verify it, and watch a tampered copy fail.
//!
//! ```text
//! cargo run --example verify_json
//! ```

use sonc::decompose::decompose;
use sonc::json;
use sonc::poly::parse_poly;
use sonc::verify::{verify_sonc, VerifyMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f = parse_poly("1 + x1^4*x2^2 + x1^2*x2^4 - 3*x1^2*x2^2", 2)?;
    let cert = decompose(&f).certificate().cloned().ok_or("expected a certificate")?;

    let text = serde_json::to_string_pretty(&json::certificate(&cert))?;
    println!("{text}");

    let back = json::from_str(&text)?;
    let report = verify_sonc(&back, &f, VerifyMode::Exact);
    println!("round trip equal: {}, verified: {}", back == cert, report.passed());

    let tampered = text.replacen("\"-3\"", "\"-4\"", 1);
    let bad = json::from_str(&tampered)?;
    let report = verify_sonc(&bad, &f, VerifyMode::Exact);
    println!("tampered copy verified: {}", report.passed());
    for failure in &report.failures {
        println!("  {failure}");
    }
    Ok(())
}
