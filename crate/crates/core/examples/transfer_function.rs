// Transfer function f(z) of the CD and BD channels: closed-form kernel versus
// the brute-force subspace oracle, plus capacities.
//
// cargo run --example transfer_function

use scmn::channel::{transfer_f_oracle, ChannelFamily, TransferFunction};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let eps = 0.45;
    let zs = [0.0, 0.25, 0.5, 0.75, 1.0];
    println!("eps = {eps}");
    for m in 1..=6 {
        for fam in [ChannelFamily::cd(m, eps)?, ChannelFamily::bd(m, eps)?] {
            let dist = fam.dimension_distribution()?;
            let f = TransferFunction::new(&dist)?;
            let vals: Vec<String> = zs.iter().map(|&z| format!("{:.6}", f.eval(z))).collect();
            print!("{:>2} m={m} C={:.4} f: {}", fam.kind().name(), fam.capacity()?, vals.join(" "));
            if m <= 4 {
                let worst = zs
                    .iter()
                    .map(|&z| Ok((f.eval(z) - transfer_f_oracle(&dist, z)?).abs()))
                    .collect::<Result<Vec<f64>, scmn::channel::ChannelError>>()?
                    .into_iter()
                    .fold(0.0, f64::max);
                print!("  |kernel - oracle| <= {worst:.1e}");
            }
            println!();
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
