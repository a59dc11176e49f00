//! How selection time grows with the number of negatives for the direct and
//! iterative solvers.
//!
//! cargo run --release --example scaling_trend [size]

use std::time::Instant;

use dnbs::doomp::{select_direct, select_iterative, DnbsConfig};
use dnbs::haar::Dictionary;
use dnbs::raster::ImageTemplate;
use dnbs::subspace::SampleSet;
use dnbs::synthetic::random_template;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> dnbs::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(32);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let base = random_template(&mut rng, n, n);
    let fg: Vec<ImageTemplate> = (0..3)
        .map(|_| ImageTemplate::from_fn(n, n, |c, r| base.get(c, r) + rng.random_range(-10.0..10.0)))
        .collect();
    let bg: Vec<ImageTemplate> = (0..100).map(|_| random_template(&mut rng, n, n)).collect();
    let dict = Dictionary::new(n, n)?;
    let cfg = DnbsConfig::default();
    println!("{n}x{n}, K={}: {} boxes", cfg.k, dict.len());
    println!("{:>5} {:>12} {:>12}", "N_b", "iterative_s", "direct_s");
    for nb in [5, 25, 50, 100] {
        let samples = SampleSet::new(fg.clone(), bg[..nb].to_vec())?;
        let t = Instant::now();
        let a = select_iterative(&samples, &cfg, &dict)?;
        let ti = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let b = select_direct(&samples, &cfg, &dict)?;
        let td = t.elapsed().as_secs_f64();
        assert_eq!(a.atoms, b.atoms);
        println!("{nb:>5} {ti:>12.3} {td:>12.3}");
    }
    Ok(())
}
