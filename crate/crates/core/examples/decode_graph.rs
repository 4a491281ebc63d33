// Decodes one fixed graph under several channel draws and shows where the
// residual erasures sit.
//
// cargo run --release --example decode_graph

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scmn::channel::ChannelFamily;
use scmn::ensemble::{sample_graph, BitKind, EnsembleParams};
use scmn::sim::decode_graph;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let params = EnsembleParams::new(4, 2, 2, 10, 2)?;
    let graph = sample_graph(&params, 2000, 2, &mut ChaCha8Rng::seed_from_u64(7))?;
    let free = graph.free_bits(BitKind::Transmitted);
    println!("graph: {} transmitted bits, {} with a doubled check edge", graph.num_transmitted(), free.len());
    for eps in [0.40, 0.45, 0.52] {
        let dist = ChannelFamily::cd(2, eps)?.dimension_distribution()?;
        for seed in 0..3 {
            let r = decode_graph(&graph, &dist, seed)?;
            let on_free = r.erased_transmitted.iter().filter(|b| free.binary_search(b).is_ok()).count();
            println!(
                "eps {eps:.2} seed {seed}: ber {:.5} after {:>3} rounds, {} punctured and {} transmitted erased ({} of them doubled)",
                r.bit_erasure_rate,
                r.iterations_to_stall,
                r.erased_punctured.len(),
                r.erased_transmitted.len(),
                on_free
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
