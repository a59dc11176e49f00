use std::path::Path;
use std::process::{Command, Output};

use dnbs::eval::{save_sequence, Sequence};
use dnbs::synthetic::{quantize, random_template, translation_sequence, TranslationSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dnbs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dnbs")).args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn small_sequence(dir: &Path) {
    let seq = translation_sequence(&TranslationSpec {
        frames: 12,
        width: 64,
        height: 48,
        noise_sigma: 2.0,
        seed: 21,
        ..Default::default()
    })
    .unwrap();
    let frames = (0..seq.len()).map(|i| quantize(&seq.frame(i).unwrap())).collect();
    let seq = Sequence::from_frames("small", frames, seq.groundtruth.clone()).unwrap();
    save_sequence(&seq, dir).unwrap();
}

#[test]
fn track_writes_csv_and_config() {
    let tmp = tempfile::tempdir().unwrap();
    let seq = tmp.path().join("seq");
    small_sequence(&seq);
    let out = tmp.path().join("out");
    let o = dnbs(&["track", p(&seq), "--out", p(&out), "--frames"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("track.csv")).unwrap();
    assert!(csv.starts_with("frame,x,y,w,h,ssd_min,refreshed\n"));
    assert_eq!(csv.lines().count(), 13);
    assert!(out.join("config.txt").is_file());
    assert!(out.join("frames").read_dir().unwrap().count() == 12);
}

#[test]
fn direct_and_iterative_tracks_are_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let seq = tmp.path().join("seq");
    small_sequence(&seq);
    let mut csvs = Vec::new();
    for solver in ["direct", "iterative"] {
        let out = tmp.path().join(solver);
        let o = dnbs(&["track", p(&seq), "--solver", solver, "--set", "k=10", "-o", p(&out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        csvs.push(std::fs::read(out.join("track.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn missing_sequence_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = dnbs(&["track", p(&tmp.path().join("nope")), "-o", p(&tmp.path().join("out"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn bad_arguments_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let seq = tmp.path().join("seq");
    small_sequence(&seq);
    let out = tmp.path().join("out");
    assert_eq!(dnbs(&["eval", p(&seq), "--protocol", "xyz", "-o", p(&out)]).status.code(), Some(1));
    assert_eq!(dnbs(&["track", p(&seq), "--set", "lambda=-1", "-o", p(&out)]).status.code(), Some(1));
    assert_eq!(dnbs(&["track", p(&seq), "--set", "nonsense=1", "-o", p(&out)]).status.code(), Some(1));
    assert_eq!(dnbs(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(dnbs(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_and_overrides_are_echoed() {
    let tmp = tempfile::tempdir().unwrap();
    let seq = tmp.path().join("seq");
    small_sequence(&seq);
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(&cfg, "# small model\nk = 12\nlambda = 0.5\n").unwrap();
    let out = tmp.path().join("out");
    let o = dnbs(&["track", p(&seq), "--config", p(&cfg), "--set", "n_u=3", "-o", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let echo = std::fs::read_to_string(out.join("config.txt")).unwrap();
    for line in ["k = 12", "lambda = 0.5", "n_u = 3"] {
        assert!(echo.lines().any(|l| l.split('#').next().unwrap().trim() == line), "missing `{line}` in\n{echo}");
    }
}

#[test]
fn train_emits_one_trace_row_per_basis() {
    let tmp = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (sub, n) in [("foreground", 3), ("background", 4)] {
        let d = tmp.path().join("samples").join(sub);
        std::fs::create_dir_all(&d).unwrap();
        for i in 0..n {
            random_template(&mut rng, 10, 8).save(d.join(format!("{i}.pgm"))).unwrap();
        }
    }
    for k in [1usize, 7] {
        let out = tmp.path().join(format!("k{k}"));
        let o = dnbs(&["train", p(&tmp.path().join("samples")), "--set", &format!("k={k}"), "-o", p(&out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let trace = std::fs::read_to_string(out.join("trace.csv")).unwrap();
        assert_eq!(trace.lines().count(), k + 1);
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("subspace.json")).unwrap()).unwrap();
        assert!(json.is_object());
    }
}

#[test]
fn eval_writes_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let seq = tmp.path().join("seq");
    small_sequence(&seq);
    let out = tmp.path().join("eval");
    let o = dnbs(&["eval", p(&seq), "--protocol", "tre", "--set", "tre_segments=3", "-o", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.lines().count() >= 3, "{summary}");
}

#[test]
fn cluster_writes_index() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("c");
    let o = dnbs(&["cluster", "--width", "6", "--height", "5", "-o", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("clusters.json").is_file());
}
