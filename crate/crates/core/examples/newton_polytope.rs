//! Newton polytope geometry: hull vertices, where an exponent sits relative to
//! the hull, and every circuit through an interior point.
//!
//! ```text
//! cargo run --example newton_polytope
//! ```

use sonc::geom::{enumerate_circuits, hull_vertices, interior_classification, PointSet};
use sonc::poly::{parse_poly, Exponent};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f = parse_poly("1 + x1^6 + x2^6 + x1^6*x2^6 - x1^2*x2 - 2*x1^4*x2", 2)?;
    let support = PointSet::new(f.support())?;
    let vertices = hull_vertices(&support)?;
    println!("vertices of New(f): {vertices:?}");

    for beta in [Exponent(vec![2, 1]), Exponent(vec![4, 1]), Exponent(vec![3, 0]), Exponent(vec![7, 1])] {
        println!("{beta}: {:?}", interior_classification(&support, &beta)?);
    }

    let even: Vec<Exponent> = f.split_support().lambda_part.into_iter().collect();
    let beta = Exponent(vec![4, 1]);
    for c in enumerate_circuits(&even, &beta)? {
        let weights: Vec<String> = c.lambdas.iter().map(|l| l.to_string()).collect();
        println!("circuit {:?} with weights [{}]", c.trellis.points(), weights.join(", "));
    }
    Ok(())
}
