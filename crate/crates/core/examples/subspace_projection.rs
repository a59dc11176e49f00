//! Build a non-orthogonal box subspace by hand and project images onto it.
//!
//! cargo run --example subspace_projection

use dnbs::haar::HaarBox;
use dnbs::raster::ImageTemplate;
use dnbs::subspace::Subspace;

fn main() -> dnbs::Result<()> {
    let (w, h) = (16, 16);
    // A bright square with a dark bar through it.
    let x = ImageTemplate::from_fn(w, h, |c, r| {
        let inside = (4..12).contains(&c) && (4..12).contains(&r);
        let bar = (7..9).contains(&r);
        match (inside, bar) {
            (true, true) => 40.0,
            (true, false) => 200.0,
            _ => 10.0,
        }
    });

    let mut sub = Subspace::new(w, h);
    for b in [
        HaarBox::new(1, 1, 16, 16),
        HaarBox::new(5, 5, 8, 8),
        HaarBox::new(5, 8, 8, 2),
    ] {
        sub.append_basis(b)?;
        let r = sub.residual(&x)?;
        println!(
            "{} bases: residual energy {:>12.3} ({:.2}% of {:.0})",
            sub.len(),
            r.norm_sqr(),
            100.0 * r.norm_sqr() / x.norm_sqr(),
            x.norm_sqr()
        );
    }
    println!("coefficients: {:?}", sub.coefficients(&x)?.iter().map(|c| format!("{c:.2}")).collect::<Vec<_>>());

    // A box spanned by the ones already chosen is refused.
    let mut full = Subspace::new(2, 1);
    full.append_basis(HaarBox::new(1, 1, 1, 1))?;
    full.append_basis(HaarBox::new(2, 1, 1, 1))?;
    match full.append_basis(HaarBox::new(1, 1, 2, 1)) {
        Ok(()) => println!("unexpectedly accepted a dependent box"),
        Err(e) => println!("dependent box rejected: {e}"),
    }
    Ok(())
}
