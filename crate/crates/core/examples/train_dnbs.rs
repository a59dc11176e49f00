//! Select a discriminative subspace from foreground and background samples
//! and compare it with a purely reconstructive one (lambda = 0).
//!
//! cargo run --release --example train_dnbs

use dnbs::doomp::{select_direct, select_iterative, DnbsConfig};
use dnbs::haar::Dictionary;
use dnbs::raster::ImageTemplate;
use dnbs::subspace::SampleSet;
use dnbs::synthetic::{blocky_texture, random_template};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn main() -> dnbs::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (w, h) = (24, 24);
    let object = blocky_texture(&mut rng, w, h, 6, 0, 255);
    let fg: Vec<ImageTemplate> = (0..5)
        .map(|_| ImageTemplate::from_fn(w, h, |c, r| object.get(c, r) + rng.random_range(-8.0..8.0)))
        .collect();
    let bg: Vec<ImageTemplate> = (0..20).map(|_| random_template(&mut rng, w, h)).collect();
    let samples = SampleSet::new(fg, bg)?;
    let dict = Dictionary::new(w, h)?;

    println!("{} candidate boxes", dict.len());
    for lambda in [0.0, 0.25, 1.0] {
        let cfg = DnbsConfig { k: 20, lambda, ..Default::default() };
        let t = Instant::now();
        let sel = select_iterative(&samples, &cfg, &dict)?;
        let secs = t.elapsed().as_secs_f64();
        let fg_energy = samples.foregrounds().iter().map(|x| sel.subspace.reconstruct(x).unwrap().norm_sqr()).sum::<f64>()
            / samples.n_f() as f64;
        let bg_energy = samples.backgrounds().iter().map(|x| sel.subspace.reconstruct(x).unwrap().norm_sqr()).sum::<f64>()
            / samples.n_b() as f64;
        println!(
            "lambda {lambda:<4}: objective {:>12.1}  captured fg {fg_energy:>10.1}  bg {bg_energy:>10.1}  ({secs:.2}s)",
            samples.objective(&sel.subspace, lambda)?
        );
    }

    let cfg = DnbsConfig { k: 8, ..Default::default() };
    let a = select_direct(&samples, &cfg, &dict)?;
    let b = select_iterative(&samples, &cfg, &dict)?;
    println!("direct and iterative pick the same boxes: {}", a.atoms == b.atoms);
    print!("{}", b.trace_csv());
    Ok(())
}
