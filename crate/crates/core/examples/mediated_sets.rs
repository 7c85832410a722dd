//! Maximal mediated sets: which lattice points of a trellis hull are averages of
//! two distinct even members, and when every lattice point qualifies.
//!
//! ```text
//! cargo run --example mediated_sets
//! ```

use sonc::geom::Trellis;
use sonc::mediated::{is_h_trellis, lattice_points, maximal_mediated_set, members_sorted};
use sonc::poly::Exponent;

fn list(points: &[&Exponent]) -> String {
    points.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ")
}

fn show(t: &Trellis) -> Result<(), Box<dyn std::error::Error>> {
    let m = maximal_mediated_set(t)?;
    let lattice = lattice_points(t)?;
    let missing: Vec<&Exponent> = lattice.iter().filter(|p| !m.contains(p)).collect();
    println!("trellis {}", list(&t.points().iter().collect::<Vec<_>>()));
    println!("  {} of {} lattice points mediated, missing [{}]", m.members.len(), lattice.len(), list(&missing));
    println!("  H-trellis: {}", is_h_trellis(t)?);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let segment = Trellis::new(vec![Exponent(vec![0]), Exponent(vec![4])])?;
    show(&segment)?;
    let members = members_sorted(&maximal_mediated_set(&segment)?);
    println!("  members {}", list(&members.iter().collect::<Vec<_>>()));

    let motzkin = Trellis::new(vec![Exponent(vec![0, 0]), Exponent(vec![4, 2]), Exponent(vec![2, 4])])?;
    show(&motzkin)?;

    let doubled = Trellis::new(motzkin.points().iter().map(|p| p.checked_scale(2).unwrap()).collect())?;
    show(&doubled)?;
    Ok(())
}
