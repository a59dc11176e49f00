//! Sequences, ground truth and the OPE / TRE / SRE evaluation protocols.
//!
//! Ground-truth files hold one `x,y,w,h` line per frame with 1-based
//! coordinates (commas and/or whitespace); in memory boxes are 0-based.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cluster::{cluster_dictionary, ClusterIndex};
use crate::doomp::Solver;
use crate::error::{Error, Result};
use crate::haar::Dictionary;
use crate::raster::Frame;
use crate::tracker::{BoundingBox, TrackerConfig, TrackerState};

pub const DEFAULT_THRESHOLD: f64 = 0.35;
pub const DEFAULT_TRE_SEGMENTS: usize = 20;

const IMAGE_EXTENSIONS: &[&str] = &["png", "pgm", "pnm", "ppm", "pbm"];
const GROUNDTRUTH_NAMES: &[&str] = &["groundtruth_rect.txt", "groundtruth.txt"];

#[derive(Debug, Clone)]
pub enum Frames {
    Memory(Vec<Frame>),
    Files(Vec<PathBuf>),
}

#[derive(Debug, Clone)]
pub struct Sequence {
    pub name: String,
    pub frames: Frames,
    pub groundtruth: Vec<BoundingBox>,
}

impl Sequence {
    pub fn new(name: impl Into<String>, frames: Frames, groundtruth: Vec<BoundingBox>) -> Result<Self> {
        let seq = Sequence {
            name: name.into(),
            frames,
            groundtruth,
        };
        let n = match &seq.frames {
            Frames::Memory(f) => f.len(),
            Frames::Files(f) => f.len(),
        };
        if n == 0 {
            return Err(Error::invalid(format!("sequence '{}' has no frames", seq.name)));
        }
        if n != seq.groundtruth.len() {
            return Err(Error::invalid(format!(
                "sequence '{}' has {n} frames but {} ground-truth boxes",
                seq.name,
                seq.groundtruth.len()
            )));
        }
        if !seq.groundtruth[0].is_valid() {
            return Err(Error::invalid(format!(
                "sequence '{}' starts with an invalid ground-truth box",
                seq.name
            )));
        }
        Ok(seq)
    }

    pub fn from_frames(name: impl Into<String>, frames: Vec<Frame>, groundtruth: Vec<BoundingBox>) -> Result<Self> {
        Sequence::new(name, Frames::Memory(frames), groundtruth)
    }

    pub fn len(&self) -> usize {
        self.groundtruth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groundtruth.is_empty()
    }

    pub fn frame(&self, i: usize) -> Result<Frame> {
        match &self.frames {
            Frames::Memory(f) => Ok(f[i].clone()),
            Frames::Files(p) => Frame::load(&p[i]),
        }
    }

    /// Frames `start..` in order, loaded lazily for file-backed sequences.
    pub fn frames_from(&self, start: usize) -> impl Iterator<Item = Result<Frame>> + '_ {
        (start..self.len()).map(move |i| self.frame(i))
    }
}

fn parse_box_line(line: &str) -> Option<[f64; 4]> {
    let fields: Vec<&str> = line
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .collect();
    if fields.len() != 4 {
        return None;
    }
    let mut out = [0.0; 4];
    for (o, f) in out.iter_mut().zip(fields) {
        *o = f.parse().ok().filter(|v: &f64| v.is_finite())?;
    }
    Some(out)
}

/// Parses ground-truth text; blank lines are skipped.
pub fn parse_groundtruth(text: &str, path: &Path) -> Result<Vec<BoundingBox>> {
    let mut boxes = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let [x, y, w, h] = parse_box_line(line).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: n + 1,
            message: format!("expected four numbers 'x,y,w,h', got '{}'", line.trim()),
        })?;
        boxes.push(BoundingBox::new(x - 1.0, y - 1.0, w, h));
    }
    Ok(boxes)
}

pub fn load_groundtruth(path: impl AsRef<Path>) -> Result<Vec<BoundingBox>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_groundtruth(&text, path)
}

pub fn format_groundtruth(boxes: &[BoundingBox]) -> String {
    let mut out = String::new();
    for b in boxes {
        let _ = writeln!(out, "{},{},{},{}", b.x + 1.0, b.y + 1.0, b.w, b.h);
    }
    out
}

pub fn write_groundtruth(path: impl AsRef<Path>, boxes: &[BoundingBox]) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_groundtruth(boxes)).map_err(|e| Error::io(path, e))
}

fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let p = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_image = p
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if p.is_file() && is_image {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

/// Loads a sequence directory: frames from `img/` (or the directory itself),
/// sorted by file name, and `groundtruth_rect.txt` / `groundtruth.txt`.
pub fn load_sequence(path: impl AsRef<Path>) -> Result<Sequence> {
    let dir = path.as_ref();
    if !dir.is_dir() {
        return Err(Error::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "sequence directory not found"),
        ));
    }
    let gt_path = GROUNDTRUTH_NAMES
        .iter()
        .map(|n| dir.join(n))
        .find(|p| p.is_file())
        .ok_or_else(|| {
            Error::io(
                dir,
                std::io::Error::new(std::io::ErrorKind::NotFound, "no groundtruth_rect.txt or groundtruth.txt"),
            )
        })?;
    let groundtruth = load_groundtruth(&gt_path)?;
    let img_dir = dir.join("img");
    let frames = list_images(if img_dir.is_dir() { &img_dir } else { dir })?;
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sequence".into());
    Sequence::new(name, Frames::Files(frames), groundtruth)
}

/// Writes frames as `img/0001.pgm, ...` plus `groundtruth_rect.txt`.
pub fn save_sequence(seq: &Sequence, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    let img = dir.join("img");
    std::fs::create_dir_all(&img).map_err(|e| Error::io(&img, e))?;
    for i in 0..seq.len() {
        seq.frame(i)?.save(img.join(format!("{:04}.pgm", i + 1)))?;
    }
    write_groundtruth(dir.join("groundtruth_rect.txt"), &seq.groundtruth)
}

pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    a.iou(b)
}

pub fn center_error(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let (ax, ay) = a.center();
    let (bx, by) = b.center();
    (ax - bx).hypot(ay - by)
}

/// Share of frames whose IOU with ground truth is strictly above `threshold`.
pub fn success_fraction(results: &[BoundingBox], gt: &[BoundingBox], threshold: f64) -> Result<f64> {
    if results.len() != gt.len() {
        return Err(Error::invalid(format!(
            "{} results for {} ground-truth boxes",
            results.len(),
            gt.len()
        )));
    }
    if gt.is_empty() {
        return Err(Error::invalid("no frames to score"));
    }
    let hits = results.iter().zip(gt).filter(|(r, g)| iou(r, g) > threshold).count();
    Ok(hits as f64 / gt.len() as f64)
}

/// Overlap thresholds 0, 0.05, ..., 1.
pub fn overlap_thresholds() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 20.0).collect()
}

/// Distance thresholds 0, 1, ..., 50 pixels.
pub fn distance_thresholds() -> Vec<f64> {
    (0..=50).map(f64::from).collect()
}

fn success_curve(ious: &[f64]) -> Vec<f64> {
    overlap_thresholds()
        .into_iter()
        .map(|t| ious.iter().filter(|&&v| v > t).count() as f64 / ious.len() as f64)
        .collect()
}

fn precision_curve(errors: &[f64]) -> Vec<f64> {
    distance_thresholds()
        .into_iter()
        .map(|t| errors.iter().filter(|&&v| v <= t).count() as f64 / errors.len() as f64)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Ope,
    Tre,
    Sre,
}

impl std::str::FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ope" => Ok(Protocol::Ope),
            "tre" => Ok(Protocol::Tre),
            "sre" => Ok(Protocol::Sre),
            other => Err(Error::Config(format!("unknown protocol '{other}' (expected ope, tre or sre)"))),
        }
    }
}

impl std::fmt::Display for Protocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Protocol::Ope => "ope",
            Protocol::Tre => "tre",
            Protocol::Sre => "sre",
        })
    }
}

/// One tracker run, scored against ground truth from its start frame on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    /// `ope`, `segment-3`, `control`, `n`, `ne-half`, ...
    pub label: String,
    pub start: usize,
    pub init: BoundingBox,
    pub boxes: Vec<BoundingBox>,
    pub iou: Vec<f64>,
    pub center_error: Vec<f64>,
    pub success: f64,
    pub mean_center_error: f64,
    pub success_curve: Vec<f64>,
    pub precision_curve: Vec<f64>,
    /// Excluded from report equality.
    pub fps: f64,
}

impl RunRecord {
    fn same_metrics(&self, other: &RunRecord) -> bool {
        self.start == other.start
            && self.boxes == other.boxes
            && self.iou == other.iou
            && self.center_error == other.center_error
            && self.success == other.success
            && self.success_curve == other.success_curve
            && self.precision_curve == other.precision_curve
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub sequence: String,
    pub protocol: Protocol,
    pub threshold: f64,
    /// For SRE the first run is the unperturbed control and is not averaged.
    pub runs: Vec<RunRecord>,
    /// Mean of the averaged runs' success fractions.
    pub success: f64,
    pub mean_center_error: f64,
    pub success_curve: Vec<f64>,
    pub precision_curve: Vec<f64>,
}

impl EvalReport {
    fn from_runs(sequence: &str, protocol: Protocol, threshold: f64, runs: Vec<RunRecord>, skip: usize) -> Self {
        let scored = &runs[skip..];
        let n = scored.len() as f64;
        let mean = |f: &dyn Fn(&RunRecord) -> f64| scored.iter().map(f).sum::<f64>() / n;
        let mean_curve = |f: &dyn Fn(&RunRecord) -> &Vec<f64>| {
            let len = f(&scored[0]).len();
            (0..len).map(|i| scored.iter().map(|r| f(r)[i]).sum::<f64>() / n).collect()
        };
        EvalReport {
            sequence: sequence.to_string(),
            protocol,
            threshold,
            success: mean(&|r| r.success),
            mean_center_error: mean(&|r| r.mean_center_error),
            success_curve: mean_curve(&|r| &r.success_curve),
            precision_curve: mean_curve(&|r| &r.precision_curve),
            runs,
        }
    }

    /// Protocol-independent equality of everything that was measured: the
    /// averaged metrics, and every averaged run matching each run of the
    /// other report that starts on the same frame (timings ignored). An SRE
    /// report with zero perturbation thus equals the OPE report.
    pub fn same_metrics(&self, other: &EvalReport) -> bool {
        let covered = |a: &EvalReport, b: &EvalReport| {
            a.averaged_runs().iter().all(|r| {
                let mut peers = b.averaged_runs().iter().filter(|p| p.start == r.start).peekable();
                peers.peek().is_some() && peers.all(|p| p.same_metrics(r))
            })
        };
        self.success == other.success
            && self.mean_center_error == other.mean_center_error
            && self.success_curve == other.success_curve
            && self.precision_curve == other.precision_curve
            && covered(self, other)
            && covered(other, self)
    }

    pub fn averaged_runs(&self) -> &[RunRecord] {
        match self.protocol {
            Protocol::Sre => &self.runs[1..],
            _ => &self.runs,
        }
    }
}

/// Mean of per-sequence success fractions.
pub fn average_success(reports: &[EvalReport]) -> f64 {
    reports.iter().map(|r| r.success).sum::<f64>() / reports.len().max(1) as f64
}

type Prepared = (Arc<Dictionary>, Option<Arc<ClusterIndex>>);

/// Runs tracks over a sequence, sharing dictionaries (and cluster indices)
/// between runs with the same template size.
pub struct Evaluator {
    cfg: TrackerConfig,
    threshold: f64,
    cache: HashMap<(usize, usize), Prepared>,
}

impl Evaluator {
    pub fn new(cfg: TrackerConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Evaluator {
            cfg,
            threshold: DEFAULT_THRESHOLD,
            cache: HashMap::new(),
        })
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.cfg
    }

    fn prepared(&mut self, w: usize, h: usize) -> Result<Prepared> {
        if let Some(p) = self.cache.get(&(w, h)) {
            return Ok(p.clone());
        }
        let dict = Arc::new(Dictionary::new(w, h)?);
        let index = match self.cfg.solver {
            Solver::Hierarchical => Some(Arc::new(cluster_dictionary(&dict, self.cfg.hier.mu, self.cfg.seed)?)),
            _ => None,
        };
        self.cache.insert((w, h), (dict.clone(), index.clone()));
        Ok((dict, index))
    }

    /// Tracks from frame `start` initialised at `init`, scoring every frame
    /// from `start` to the end (the initial frame included).
    pub fn run(&mut self, seq: &Sequence, start: usize, init: BoundingBox, label: &str) -> Result<RunRecord> {
        let first = seq.frame(start)?;
        let init = init.clamp_to(first.width(), first.height());
        let (x, y) = (init.x.round() as usize, init.y.round() as usize);
        let (w, h) = (init.w.round().max(1.0) as usize, init.h.round().max(1.0) as usize);
        let (w, h) = (w.min(first.width() - x), h.min(first.height() - y));
        let (dict, index) = self.prepared(w, h)?;
        let clock = Instant::now();
        let mut state = TrackerState::init_with(&first, (x, y, w, h), self.cfg.clone(), dict, index)?;
        let mut boxes = vec![state.bbox()];
        for frame in seq.frames_from(start + 1) {
            boxes.push(state.step(&frame?)?.bbox);
        }
        let seconds = clock.elapsed().as_secs_f64();
        let gt = &seq.groundtruth[start..];
        let ious: Vec<f64> = boxes.iter().zip(gt).map(|(b, g)| iou(b, g)).collect();
        let errors: Vec<f64> = boxes.iter().zip(gt).map(|(b, g)| center_error(b, g)).collect();
        Ok(RunRecord {
            label: label.to_string(),
            start,
            init,
            success: success_fraction(&boxes, gt, self.threshold)?,
            mean_center_error: errors.iter().sum::<f64>() / errors.len() as f64,
            success_curve: success_curve(&ious),
            precision_curve: precision_curve(&errors),
            fps: if seconds > 0.0 { boxes.len() as f64 / seconds } else { f64::INFINITY },
            boxes,
            iou: ious,
            center_error: errors,
        })
    }

    pub fn ope(&mut self, seq: &Sequence) -> Result<EvalReport> {
        let run = self.run(seq, 0, seq.groundtruth[0], "ope")?;
        Ok(EvalReport::from_runs(&seq.name, Protocol::Ope, self.threshold, vec![run], 0))
    }

    pub fn tre(&mut self, seq: &Sequence, n_segments: usize) -> Result<EvalReport> {
        let starts = tre_starts(seq.len(), n_segments)?;
        let mut runs = Vec::with_capacity(starts.len());
        for (i, &s) in starts.iter().enumerate() {
            runs.push(self.run(seq, s, seq.groundtruth[s], &format!("segment-{}", i + 1))?);
        }
        Ok(EvalReport::from_runs(&seq.name, Protocol::Tre, self.threshold, runs, 0))
    }

    /// Unperturbed control followed by the twelve perturbed starts;
    /// `scale` multiplies the shift sizes.
    pub fn sre(&mut self, seq: &Sequence, scale: f64) -> Result<EvalReport> {
        let gt0 = seq.groundtruth[0];
        let mut runs = vec![self.run(seq, 0, gt0, "control")?];
        for (label, init) in sre_perturbations(&gt0, scale) {
            runs.push(self.run(seq, 0, init, label)?);
        }
        Ok(EvalReport::from_runs(&seq.name, Protocol::Sre, self.threshold, runs, 1))
    }

    pub fn evaluate(&mut self, seq: &Sequence, protocol: Protocol, opts: &ProtocolOptions) -> Result<EvalReport> {
        match protocol {
            Protocol::Ope => self.ope(seq),
            Protocol::Tre => self.tre(seq, opts.tre_segments),
            Protocol::Sre => self.sre(seq, opts.sre_scale),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolOptions {
    pub tre_segments: usize,
    pub sre_scale: f64,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        ProtocolOptions {
            tre_segments: DEFAULT_TRE_SEGMENTS,
            sre_scale: 1.0,
        }
    }
}

pub fn run_ope(seq: &Sequence, cfg: &TrackerConfig) -> Result<EvalReport> {
    Evaluator::new(cfg.clone())?.ope(seq)
}

pub fn run_tre(seq: &Sequence, cfg: &TrackerConfig, n_segments: usize) -> Result<EvalReport> {
    Evaluator::new(cfg.clone())?.tre(seq, n_segments)
}

pub fn run_sre(seq: &Sequence, cfg: &TrackerConfig, scale: f64) -> Result<EvalReport> {
    Evaluator::new(cfg.clone())?.sre(seq, scale)
}

/// Evenly spaced segment starts `floor(i * len / n)`; `n` is reduced to `len`
/// (with a warning) for short sequences.
pub fn tre_starts(len: usize, n_segments: usize) -> Result<Vec<usize>> {
    if n_segments == 0 {
        return Err(Error::invalid("n_segments must be at least 1"));
    }
    let n = if n_segments > len {
        log::warn!("sequence has {len} frames; using {len} segments instead of {n_segments}");
        len
    } else {
        n_segments
    };
    Ok((0..n).map(|i| i * len / n).collect())
}

/// The twelve perturbed initial boxes: shifts by 10% of the box size in the
/// eight compass directions, then 5% diagonal shifts.
pub fn sre_perturbations(b: &BoundingBox, scale: f64) -> Vec<(&'static str, BoundingBox)> {
    const SHIFTS: [(&str, f64, f64); 12] = [
        ("n", 0.0, -0.1),
        ("ne", 0.1, -0.1),
        ("e", 0.1, 0.0),
        ("se", 0.1, 0.1),
        ("s", 0.0, 0.1),
        ("sw", -0.1, 0.1),
        ("w", -0.1, 0.0),
        ("nw", -0.1, -0.1),
        ("ne-half", 0.05, -0.05),
        ("se-half", 0.05, 0.05),
        ("sw-half", -0.05, 0.05),
        ("nw-half", -0.05, -0.05),
    ];
    SHIFTS
        .iter()
        .map(|&(label, fx, fy)| {
            (
                label,
                BoundingBox::new(b.x + scale * fx * b.w, b.y + scale * fy * b.h, b.w, b.h),
            )
        })
        .collect()
}

#[derive(Serialize)]
struct Summary<'a> {
    sequence: &'a str,
    protocol: Protocol,
    threshold: f64,
    success: f64,
    mean_center_error: f64,
    runs: Vec<RunSummary<'a>>,
}

#[derive(Serialize)]
struct RunSummary<'a> {
    label: &'a str,
    start: usize,
    frames: usize,
    success: f64,
    mean_center_error: f64,
    fps: f64,
}

fn write_file(path: PathBuf, contents: String) -> Result<()> {
    std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))
}

/// Writes `frames.csv`, `runs.csv`, `success_curve.csv`,
/// `precision_curve.csv` and `summary.json` into `dir`. Everything except
/// the FPS in the JSON summary is deterministic.
pub fn write_report(report: &EvalReport, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let mut frames = String::from("run,frame,x,y,w,h,iou,center_error\n");
    let mut runs = String::from("run,start,frames,success,mean_center_error\n");
    for r in &report.runs {
        for (i, b) in r.boxes.iter().enumerate() {
            let _ = writeln!(
                frames,
                "{},{},{},{},{},{},{:.6},{:.6}",
                r.label,
                r.start + i + 1,
                b.x + 1.0,
                b.y + 1.0,
                b.w,
                b.h,
                r.iou[i],
                r.center_error[i]
            );
        }
        let _ = writeln!(
            runs,
            "{},{},{},{:.6},{:.6}",
            r.label,
            r.start + 1,
            r.boxes.len(),
            r.success,
            r.mean_center_error
        );
    }
    write_file(dir.join("frames.csv"), frames)?;
    write_file(dir.join("runs.csv"), runs)?;
    write_file(dir.join("success_curve.csv"), curve_csv("overlap", &overlap_thresholds(), &report.success_curve))?;
    write_file(
        dir.join("precision_curve.csv"),
        curve_csv("distance", &distance_thresholds(), &report.precision_curve),
    )?;

    let summary = Summary {
        sequence: &report.sequence,
        protocol: report.protocol,
        threshold: report.threshold,
        success: report.success,
        mean_center_error: report.mean_center_error,
        runs: report
            .runs
            .iter()
            .map(|r| RunSummary {
                label: &r.label,
                start: r.start + 1,
                frames: r.boxes.len(),
                success: r.success,
                mean_center_error: r.mean_center_error,
                fps: if r.fps.is_finite() { r.fps } else { 0.0 },
            })
            .collect(),
    };
    write_file(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)
}

/// Two-column CSV of curve samples.
pub fn curve_csv(x_name: &str, xs: &[f64], ys: &[f64]) -> String {
    let mut out = format!("{x_name},fraction\n");
    for (x, y) in xs.iter().zip(ys) {
        let _ = writeln!(out, "{x},{y:.6}");
    }
    out
}
