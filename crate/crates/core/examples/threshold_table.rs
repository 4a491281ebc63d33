// BP thresholds of the coupled ensemble from density evolution.
//
// cargo run --release --example threshold_table           # m = 1..3, coarse
// cargo run --release --example threshold_table -- full   # m = 1..6, tol 1e-6

use scmn::channel::FamilyKind;
use scmn::de::{threshold_table, DeConfig, ThresholdCell};
use scmn::ensemble::EnsembleParams;

pub fn table(max_m: usize, bisect_tol: f64) -> Result<(), Box<dyn std::error::Error>> {
    let params = EnsembleParams::new(4, 2, 2, 10, 2)?;
    let cells: Vec<ThresholdCell> = (1..=max_m)
        .flat_map(|m| [FamilyKind::Cd, FamilyKind::Bd].map(|kind| ThresholdCell { params, kind, m }))
        .collect();
    let eps = threshold_table(&cells, bisect_tol, &DeConfig::default());
    println!("L = 10, w = 2, bisection tol {bisect_tol:e}");
    println!("{:>3} {:>12} {:>12}", "m", "CD", "BD");
    for (m, pair) in (1..=max_m).zip(eps.chunks(2)) {
        println!("{m:>3} {:>12.8} {:>12.8}", pair[0].clone()?, pair[1].clone()?);
    }
    Ok(())
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    table(3, 1e-4)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    match std::env::args().nth(1).as_deref() {
        Some("full") => table(6, 1e-6),
        _ => run_example(),
    }
}
