//! Exact nonnegative solvability of `A z = b`, and the column-deletion test that
//! reduces it to smaller systems.
//!
//! ```text
//! cargo run --example linear_systems
//! ```

use sonc::lp::{helly_crosscheck, nonneg_solve, LinearSystem, LpOutcome};
use sonc::rational::int;

fn row(v: &[i64]) -> Vec<sonc::rational::Rational> {
    v.iter().map(|&x| int(x)).collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // deleting any column drops the rank by exactly one, so the cross-check applies
    let a = vec![row(&[1, 1, 0, 0]), row(&[0, 0, 1, 1])];
    let feasible = LinearSystem::new(a.clone(), row(&[2, 3]));
    let infeasible = LinearSystem::new(a, row(&[2, -1]));
    for (name, sys) in [("feasible", &feasible), ("infeasible", &infeasible)] {
        match nonneg_solve(sys)? {
            LpOutcome::Feasible(z) => {
                let cells: Vec<String> = z.iter().map(|v| v.to_string()).collect();
                println!("{name}: z = [{}]", cells.join(", "));
            }
            LpOutcome::Infeasible { phase_one_optimum } => {
                println!("{name}: no z >= 0, phase-one optimum {phase_one_optimum}");
            }
        }
        let report = helly_crosscheck(sys)?;
        println!("  direct {}, column deletions {:?}, agree {}", report.direct, report.per_column, report.agrees());
    }
    Ok(())
}
