//! Box features: dictionary size, integral-image inner products, and how two
//! boxes correlate.
//!
//! cargo run --example haar_features

use dnbs::haar::{dictionary_size, haar_dot_haar, haar_dot_image, Dictionary, HaarBox, IntegralImage};
use dnbs::raster::ImageTemplate;

fn main() -> dnbs::Result<()> {
    for n in [4, 8, 16, 32, 50] {
        println!("{n:>2}x{n:<2} template: {:>9} boxes", dictionary_size(n, n));
    }

    // A ramp image; the box feature is a normalized window sum.
    let img = ImageTemplate::from_fn(12, 10, |c, r| (c + 2 * r) as f64);
    let ii = IntegralImage::new(&img);
    let b = HaarBox::new(3, 2, 4, 5);
    let fast = haar_dot_image(&b, &ii)?;
    let dense = b.to_dense(12, 10).dot(&img);
    println!("<psi, x> for {b:?}: integral image {fast:.6}, dense {dense:.6}");

    let a = HaarBox::new(3, 2, 4, 4);
    println!("<{a:?}, {b:?}> = {:.4}", haar_dot_haar(&a, &b));

    let dict = Dictionary::new(12, 10)?;
    let best = dict
        .atoms()
        .iter()
        .max_by(|p, q| haar_dot_image(p, &ii).unwrap().total_cmp(&haar_dot_image(q, &ii).unwrap()))
        .unwrap();
    println!("of {} boxes, the one most aligned with the ramp is {best:?}", dict.len());
    Ok(())
}
