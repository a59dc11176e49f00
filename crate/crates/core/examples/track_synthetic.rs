//! Track a textured object on a synthetic sequence and print per-frame errors.
//!
//! cargo run --release --example track_synthetic [noise_sigma]

use dnbs::eval::{center_error, iou};
use dnbs::synthetic::{translation_sequence, TranslationSpec};
use dnbs::tracker::{track, TrackerConfig};

fn main() -> dnbs::Result<()> {
    let sigma: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5.0);
    let seq = translation_sequence(&TranslationSpec { noise_sigma: sigma, seed: 3, ..Default::default() })?;
    let cfg = TrackerConfig::default();
    let results = track(seq.frames_from(0), seq.groundtruth[0], &cfg)?;
    println!("frame      x      y  center_err   iou  refreshed");
    for r in &results {
        let gt = &seq.groundtruth[r.frame];
        if r.frame % 5 == 0 || r.refreshed {
            println!(
                "{:>5} {:>6.1} {:>6.1} {:>11.2} {:>5.2}  {}",
                r.frame,
                r.bbox.x,
                r.bbox.y,
                center_error(&r.bbox, gt),
                iou(&r.bbox, gt),
                if r.refreshed { "yes" } else { "" }
            );
        }
    }
    let mean = results.iter().map(|r| center_error(&r.bbox, &seq.groundtruth[r.frame])).sum::<f64>() / results.len() as f64;
    println!("sigma {sigma}: mean center error {mean:.3}px over {} frames", results.len());
    Ok(())
}
