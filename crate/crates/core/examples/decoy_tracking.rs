//! The object passes decoys that share most of its appearance. A model that
//! only reconstructs the object locks onto a decoy; the discriminative model,
//! trained against mined negatives, keeps the distinguishing part.
//!
//! cargo run --release --example decoy_tracking

use dnbs::doomp::DnbsConfig;
use dnbs::eval::run_ope;
use dnbs::synthetic::{decoy_sequence, DecoySpec, DECOY_K};
use dnbs::tracker::TrackerConfig;

fn main() -> dnbs::Result<()> {
    for sigma in [0.0, 5.0] {
        let seq = decoy_sequence(&DecoySpec { noise_sigma: sigma, ..Default::default() })?;
        for (name, lambda) in [("NBS ", 0.0), ("DNBS", 0.25)] {
            let cfg = TrackerConfig {
                dnbs: DnbsConfig { k: DECOY_K, lambda, ..Default::default() },
                ..Default::default()
            };
            let report = run_ope(&seq, &cfg)?;
            let run = &report.runs[0];
            let lost = run.iou.iter().position(|&o| o <= report.threshold);
            println!(
                "sigma {sigma}: {name} (K={DECOY_K}, lambda={lambda}) success {:.3}, mean center error {:6.2}px{}",
                report.success,
                report.mean_center_error,
                lost.map(|f| format!(", first lost at frame {f}")).unwrap_or_default()
            );
        }
    }
    Ok(())
}
