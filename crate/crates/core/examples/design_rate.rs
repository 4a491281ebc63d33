// Exact design rate and per-section sizes of the coupled ensemble.
//
// cargo run --example design_rate

use scmn::ensemble::EnsembleParams;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    println!("(dl, dr, dg) = (4, 2, 2), w = 2");
    println!("{:>5} {:>12} {:>12}", "L", "rate", "exact");
    for l in [1, 2, 5, 10, 20, 50, 100, 1000] {
        let p = EnsembleParams::new(4, 2, 2, l, 2)?;
        println!("{l:>5} {:>12.9} {:>12}", p.design_rate(), p.design_rate_exact()?.to_string());
    }
    let p = EnsembleParams::new(4, 2, 2, 10, 2)?;
    println!("smallest graph size for symbols of width 2: M = {}", p.smallest_graph_size(2));
    let m_bits = 100;
    println!(
        "L = 10, M = {m_bits}: {} sections, {} transmitted bits, {} punctured bits, expected {} checks of positive degree",
        p.sections(),
        p.transmitted_bits(m_bits),
        p.punctured_bits_exact(m_bits),
        p.check_count_exact(m_bits)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
