//! Enumerate the boxes whose correlation with a center box is at least mu,
//! and count how many candidates the geometric enumeration touches.
//!
//! cargo run --release --example mu_near_retrieval

use dnbs::cluster::{cluster_dictionary, mu_near_set_bruteforce, mu_near_set_fast};
use dnbs::haar::{Dictionary, HaarBox};

fn main() -> dnbs::Result<()> {
    let dict = Dictionary::new(24, 24)?;
    let center = dict.index_of(&HaarBox::new(6, 8, 9, 5)).expect("box fits");
    println!("center {:?} in a {}-box dictionary", dict.atom(center), dict.len());
    println!("{:>4} {:>8} {:>10} {:>6}", "mu", "members", "evaluated", "exact");
    for mu in [0.5, 0.6, 0.7, 0.8, 0.9, 1.0] {
        let fast = mu_near_set_fast(&dict, center, mu)?;
        let brute = mu_near_set_bruteforce(&dict, center, mu)?;
        println!("{mu:>4} {:>8} {:>10} {:>6}", fast.members.len(), fast.evaluated, fast.members == brute);
    }

    for mu in [0.6, 0.8] {
        let index = cluster_dictionary(&dict, mu, 0)?;
        index.validate(&dict)?;
        let largest = index.clusters.iter().map(|c| c.members.len()).max().unwrap_or(0);
        println!("mu {mu}: {} clusters, largest has {largest} boxes", index.len());
    }
    Ok(())
}
