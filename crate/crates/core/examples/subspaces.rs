// GF(2) toolkit: Gaussian binomials, reduced bases, intersections and the
// detector rule on a single channel symbol.
//
// cargo run --example subspaces

use scmn::gf2::{self, BitVec};
use scmn::sim::{detector_messages, Message};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    println!("Gaussian binomials [m d] and brute-force subspace counts:");
    for m in 1..=4usize {
        let row: Vec<String> = (0..=m)
            .map(|d| Ok(format!("{}/{}", gf2::gbinom(m as i64, d as i64)?, gf2::enumerate_subspaces(m, d)?.len())))
            .collect::<Result<_, gf2::Gf2Error>>()?;
        println!("  m={m}: {}", row.join(" "));
    }

    let u = gf2::rref(&["1100".parse()?, "0110".parse()?, "1010".parse()?], 4)?;
    let v = gf2::SubspaceBasis::coordinate(4, [0, 1, 2])?;
    let meet = gf2::intersect(&u, &v)?;
    println!("U = {u:?}\nV = {v:?}\nU n V = {meet:?}");
    println!("coordinates where U n V vanishes: {}", gf2::zero_coordinate_mask(&meet));

    // One noisy symbol: x = 00, noise subspace span{11}, received y = 11.
    let noise = gf2::rref(&["11".parse()?], 2)?;
    let y: BitVec = "11".parse()?;
    for incoming in [[Message::Erased, Message::Erased], [Message::Erased, Message::Zero]] {
        println!("detector {incoming:?} -> {:?}", detector_messages(&noise, y, &incoming)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
