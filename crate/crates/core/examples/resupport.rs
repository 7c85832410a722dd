//! A certificate may use exponents outside the polynomial's support. Rewriting
//! through binomial squares returns one that stays inside it, and pruning keeps
//! at most one circuit per support point.
//!
//! ```text
//! cargo run --example resupport
//! ```

use sonc::banana::{certificate_support, prune, resupport};
use sonc::certificate::{CertCircuit, CertMode, SoncCertificate};
use sonc::circuit::CircuitPoly;
use sonc::poly::{parse_poly, Exponent};
use sonc::rational::int;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let e = |k: u32| Exponent(vec![k]);
    // 2 + x^4 - 2x = (1 + x^2 - 2x) + (1 + x^4 - x^2); x^2 cancels in the sum
    let f = parse_poly("2 + x1^4 - 2*x1", 1)?;
    let c1 = CircuitPoly::new(vec![(e(0), int(1)), (e(2), int(1))], e(1), int(2))?;
    let c2 = CircuitPoly::new(vec![(e(0), int(1)), (e(4), int(1))], e(2), int(1))?;
    let wide = SoncCertificate {
        polynomial: f.clone(),
        circuits: vec![CertCircuit { circuit: c1, slack: None }, CertCircuit { circuit: c2, slack: None }],
        monomial_squares: Vec::new(),
        mode: CertMode::Exact,
        hypotheses: None,
    };
    println!("support of f:           {:?}", f.support());
    println!("support of certificate: {:?}", certificate_support(&wide));

    let narrow = resupport(&f, &wide)?;
    println!("after resupport:        {:?} ({:?})", certificate_support(&narrow), narrow.mode);
    for cc in &narrow.circuits {
        println!("  {}", cc.circuit.to_poly());
    }

    let small = prune(&narrow)?;
    println!("after pruning: {} pieces for {} support points", small.size(), f.len());
    Ok(())
}
