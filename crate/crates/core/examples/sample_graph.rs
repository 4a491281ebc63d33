// Samples a coupled Tanner graph, prints its shape, and round-trips it through
// the text format.
//
// cargo run --example sample_graph

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scmn::ensemble::{sample_graph, BitKind, EnsembleParams, TannerGraph};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let params = EnsembleParams::new(4, 2, 2, 3, 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let graph = sample_graph(&params, 24, 2, &mut rng)?;
    println!(
        "{} sections, {} checks ({} active), {} punctured, {} transmitted, {} symbols, {} edges",
        graph.sections(),
        graph.num_checks(),
        graph.active_checks(),
        graph.num_punctured(),
        graph.num_transmitted(),
        graph.num_symbols(),
        graph.edges().len()
    );
    println!("transmitted bits with both sockets on one check: {:?}", graph.free_bits(BitKind::Transmitted));
    let text = graph.to_text();
    for line in text.lines().take(6) {
        println!("  {line}");
    }
    println!("  ... {} lines", text.lines().count());
    let back = TannerGraph::from_text(&text)?;
    assert_eq!(back, graph);
    println!("text round trip ok");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
