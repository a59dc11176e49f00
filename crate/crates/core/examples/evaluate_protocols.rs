//! OPE, TRE and SRE on a synthetic sequence, with reports written to disk.
//!
//! cargo run --release --example evaluate_protocols [out_dir]

use std::path::PathBuf;

use dnbs::eval::{write_report, Evaluator, Protocol, ProtocolOptions};
use dnbs::synthetic::{translation_sequence, TranslationSpec};
use dnbs::tracker::TrackerConfig;

fn main() -> dnbs::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from);
    let seq = translation_sequence(&TranslationSpec { frames: 60, noise_sigma: 6.0, seed: 9, ..Default::default() })?;
    let mut evaluator = Evaluator::new(TrackerConfig::default())?;
    let opts = ProtocolOptions { tre_segments: 5, ..Default::default() };
    for protocol in [Protocol::Ope, Protocol::Tre, Protocol::Sre] {
        let report = evaluator.evaluate(&seq, protocol, &opts)?;
        println!(
            "{protocol}: {} runs, success {:.3}, mean center error {:.2}px, AUC {:.3}",
            report.runs.len(),
            report.success,
            report.mean_center_error,
            report.success_curve.iter().sum::<f64>() / report.success_curve.len() as f64
        );
        for run in report.runs.iter().take(4) {
            println!("    {:<10} start {:>2}  success {:.3}", run.label, run.start, run.success);
        }
        if let Some(dir) = &out {
            write_report(&report, dir.join(protocol.to_string()))?;
        }
    }
    if let Some(dir) = out {
        println!("reports written under {}", dir.display());
    }
    Ok(())
}
