// Monte-Carlo BP decoding on sampled graphs against density evolution.
//
// cargo run --release --example monte_carlo

use scmn::channel::{ChannelFamily, FamilyKind};
use scmn::de::{CoupledDe, DeState};
use scmn::ensemble::EnsembleParams;
use scmn::sim::run_experiment;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let params = EnsembleParams::new(4, 2, 2, 10, 2)?;
    let m_bits = 400;
    let grid = [0.30, 0.40, 0.45, 0.55];
    let rows = run_experiment(&params, m_bits, |e| ChannelFamily::cd(2, e), &grid, 10, 2024)?;
    println!("CD m=2, M = {m_bits}, 10 trials per point");
    println!("{:>6} {:>10} {:>10} {:>6} {:>8}", "eps", "ber", "std", "full", "rounds");
    for r in &rows {
        println!(
            "{:>6.2} {:>10.6} {:>10.6} {:>6} {:>8.1}",
            r.epsilon, r.ber_mean, r.ber_std, r.full_decodes, r.mean_rounds
        );
    }

    // Centre-section erasure fraction per round against DE at eps = 0.45.
    let de = CoupledDe::new(params, FamilyKind::Cd, 2)?;
    let mut state = DeState::ones(params.half_width, 0.45);
    let row = &rows[2];
    println!("round   MC q       DE q");
    for t in 0..=10 {
        if let Some(mc) = row.trajectory_mean.get(t) {
            println!("{t:>5} {mc:>8.5} {:>10.5}", state.q_at(0));
        }
        state = de.sweep(&state)?;
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
