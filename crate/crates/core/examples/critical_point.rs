//! Free one inner coefficient and find the largest value keeping the polynomial
//! nonnegative on the positive orthant, together with the zero it creates.
//!
//! ```text
//! cargo run --example critical_point
//! ```

use sonc::critical::{critical_point_multi, critical_point_single};
use sonc::poly::parse_poly;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let single = parse_poly("1 + x1^4*x2^2 + x1^2*x2^4 - x1^2*x2^2", 2)?;
    let cp = critical_point_single(&single)?;
    println!("{single}");
    println!("  d* = {:.6} at x* = {:?} (residual {:.1e})", cp.d_star, cp.x_star, cp.residual);

    // two inner terms: keep -x1^2*x2, free the coefficient of x1^4*x2
    let multi = parse_poly("1 + x1^6 + x2^6 + x1^6*x2^6 - x1^2*x2 - x1^4*x2", 2)?;
    let cp = critical_point_multi(&multi, 1)?;
    println!("{multi}");
    println!("  d* = {:.6} at x* = {:?}", cp.d_star, cp.x_star);
    Ok(())
}
