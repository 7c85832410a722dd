//! Three ways the decomposer can say no: a negative value, a nonnegative
//! polynomial that is not SONC, and the exact system proving the latter.
//!
//! ```text
//! cargo run --example refute
//! ```

use sonc::decompose::{decompose, DecomposeOutcome};
use sonc::poly::parse_poly;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let negative = parse_poly("1 + x1^2 - 3*x1", 1)?;
    if let DecomposeOutcome::NotPsd { point, value } = decompose(&negative) {
        println!("{negative} takes the value {value} at x1 = {}", point[0]);
    }

    // (1 - x)^2 (1 - x + x^2) is nonnegative and vanishes at x = 1,
    // yet no circuits on its support add up to it.
    let f = parse_poly("1 + 4*x1^2 + x1^4 - 3*x1 - 3*x1^3", 1)?;
    match decompose(&f) {
        DecomposeOutcome::NotSonc { system, zero, .. } => {
            println!("{f} vanishes at x1 = {} and is not SONC", zero[0]);
            println!("covering system ({} x {}), no nonnegative solution:", system.rows(), system.cols());
            for (row, b) in system.matrix.iter().zip(&system.rhs) {
                let cells: Vec<String> = row.iter().map(|v| format!("{v:>5}")).collect();
                println!("  [{}] = {b}", cells.join(" "));
            }
        }
        other => println!("{f}: {}", other.label()),
    }
    Ok(())
}
