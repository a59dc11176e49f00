//! Cluster-pruned selection: trade objective for speed with the ratio knob.
//!
//! cargo run --release --example hierarchical_selection

use std::time::Instant;

use dnbs::cluster::{cluster_dictionary, select_hierarchical, HierConfig};
use dnbs::doomp::{select_iterative, DnbsConfig};
use dnbs::haar::Dictionary;
use dnbs::raster::ImageTemplate;
use dnbs::subspace::SampleSet;
use dnbs::synthetic::random_template;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> dnbs::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 32;
    let base = random_template(&mut rng, n, n);
    let fg = (0..3)
        .map(|_| ImageTemplate::from_fn(n, n, |c, r| base.get(c, r) + rng.random_range(-10.0..10.0)))
        .collect();
    let bg = (0..10).map(|_| random_template(&mut rng, n, n)).collect();
    let samples = SampleSet::new(fg, bg)?;
    let dict = Dictionary::new(n, n)?;
    let cfg = DnbsConfig::default();

    let t = Instant::now();
    let exact = select_iterative(&samples, &cfg, &dict)?;
    let exact_secs = t.elapsed().as_secs_f64();
    let exact_obj = samples.objective(&exact.subspace, cfg.lambda)?;
    println!("exact:            objective {exact_obj:>14.1}  {exact_secs:.2}s");

    for mu in [0.6, 0.8] {
        let t = Instant::now();
        let index = cluster_dictionary(&dict, mu, 0)?;
        println!("mu {mu}: {} clusters built in {:.2}s", index.len(), t.elapsed().as_secs_f64());
        for ratio in [0.0, 0.25, 0.5, 1.0, f64::INFINITY] {
            let hier = HierConfig { ratio, mu, ..Default::default() };
            let t = Instant::now();
            let sel = select_hierarchical(&samples, &cfg, &hier, &index, &dict)?;
            let secs = t.elapsed().as_secs_f64();
            let obj = samples.objective(&sel.subspace, cfg.lambda)?;
            println!(
                "  ratio {ratio:<4}: objective {obj:>14.1} ({:+.2}%)  {secs:.2}s  same atoms as exact: {}",
                100.0 * (obj - exact_obj) / exact_obj.abs(),
                sel.atoms == exact.atoms
            );
        }
    }
    Ok(())
}
