// Traces the EBP curve of the coupled system and locates its leftmost point,
// which sits just below the BP threshold.
//
// cargo run --release --example exit_curve

use scmn::channel::FamilyKind;
use scmn::de::{chi_grid, CoupledDe, DeConfig, TraceConfig};
use scmn::ensemble::EnsembleParams;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let de = CoupledDe::new(EnsembleParams::new(4, 2, 2, 10, 2)?, FamilyKind::Cd, 2)?;
    let config = TraceConfig::default();
    let trace = de.trace(&chi_grid(0.9, 0.1, 9), &config)?;
    println!("{:>6} {:>12} {:>10} {:>10}", "chi", "eps", "h", "max p");
    for pt in &trace.points {
        println!("{:>6.3} {:>12.8} {:>10.6} {:>10.6}", pt.chi, pt.epsilon, pt.h, pt.state.max_p());
    }
    for fail in &trace.failures {
        println!("chi {:.3}: {}", fail.chi, fail.reason);
    }
    let left = de
        .leftmost_point(&chi_grid(0.95, 0.05, 37), 4, 9, &config)?
        .ok_or("no curve points")?;
    let thr = de.threshold(1e-6, &DeConfig::default())?;
    println!("leftmost eps {:.8} at chi {:.4}, BP threshold {:.8}", left.epsilon, left.chi, thr);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
