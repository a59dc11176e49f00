//! The `dnbs` command line: flat `key = value` run configuration and the
//! `track`, `train`, `cluster`, `bench` and `eval` subcommands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cluster::{cluster_dictionary, select_hierarchical, Expansion};
use crate::doomp::{select_direct, select_iterative, Selection, Solver};
use crate::error::{Error, Result};
use crate::eval::{self, average_success, Evaluator, Protocol, ProtocolOptions};
use crate::haar::Dictionary;
use crate::raster::ImageTemplate;
use crate::subspace::SampleSet;
use crate::synthetic::random_template;
use crate::tracker::{self, BoundingBox, MotionModel, Normalization, TrackerConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Process exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. } | Error::Image { .. } | Error::Parse { .. } | Error::Json(_) => EXIT_IO,
        Error::LinearDependence { .. } | Error::NumericDegeneracy(_) => EXIT_NUMERIC,
        Error::InvalidArgument(_) | Error::ShapeMismatch { .. } | Error::Config(_) => EXIT_USAGE,
    }
}

/// Everything a run can be configured with.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub tracker: TrackerConfig,
    /// IOU threshold for the success fraction.
    pub threshold: f64,
    pub protocol: ProtocolOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tracker: TrackerConfig::default(),
            threshold: eval::DEFAULT_THRESHOLD,
            protocol: ProtocolOptions::default(),
        }
    }
}

pub const CONFIG_KEYS: &[&str] = &[
    "k",
    "lambda",
    "dependence_tol",
    "tie_tolerance",
    "solver",
    "ratio",
    "mu",
    "expansion",
    "seed",
    "n_u",
    "gamma_update",
    "search_radius",
    "n_f",
    "n_b",
    "mining_factor",
    "suppression_radius",
    "iou_exclusion",
    "motion",
    "normalization",
    "threshold",
    "tre_segments",
    "sre_scale",
];

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value '{value}' for '{key}'")))
}

fn parse_auto(key: &str, value: &str) -> Result<Option<f64>> {
    if value == "auto" {
        Ok(None)
    } else {
        parse_num(key, value).map(Some)
    }
}

fn auto_str(v: Option<f64>) -> String {
    v.map_or_else(|| "auto".to_string(), |v| v.to_string())
}

impl RunConfig {
    /// Sets one key; unknown keys and malformed values are errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let t = &mut self.tracker;
        match key {
            "k" => t.dnbs.k = parse_num(key, value)?,
            "lambda" => t.dnbs.lambda = parse_num(key, value)?,
            "dependence_tol" => t.dnbs.dependence_tol = parse_auto(key, value)?,
            "tie_tolerance" => t.dnbs.tie_tolerance = parse_num(key, value)?,
            "solver" => t.solver = value.parse()?,
            "ratio" => {
                t.hier.ratio = match value {
                    "inf" | "infinity" => f64::INFINITY,
                    _ => parse_num(key, value)?,
                }
            }
            "mu" => t.hier.mu = parse_num(key, value)?,
            "expansion" => {
                t.hier.expansion = match value {
                    "members" => Expansion::Members,
                    "mu_near_set" => Expansion::MuNearSet,
                    _ => return Err(Error::Config(format!("expansion must be members or mu_near_set, got '{value}'"))),
                }
            }
            "seed" => t.seed = parse_num(key, value)?,
            "n_u" => t.n_u = parse_num(key, value)?,
            "gamma_update" => t.gamma_update = parse_num(key, value)?,
            "search_radius" => t.search_radius = parse_num(key, value)?,
            "n_f" => t.n_f = parse_num(key, value)?,
            "n_b" => t.n_b = parse_num(key, value)?,
            "mining_factor" => t.mining_factor = parse_num(key, value)?,
            "suppression_radius" => t.suppression_radius = parse_auto(key, value)?,
            "iou_exclusion" => t.iou_exclusion = parse_num(key, value)?,
            "motion" => {
                t.motion = match value {
                    "static" => MotionModel::Static,
                    "constant_velocity" => MotionModel::ConstantVelocity,
                    _ => return Err(Error::Config(format!("motion must be static or constant_velocity, got '{value}'"))),
                }
            }
            "normalization" => {
                t.normalization = match value {
                    "raw" => Normalization::Raw,
                    "zero_mean" => Normalization::ZeroMean,
                    _ => return Err(Error::Config(format!("normalization must be raw or zero_mean, got '{value}'"))),
                }
            }
            "threshold" => self.threshold = parse_num(key, value)?,
            "tre_segments" => self.protocol.tre_segments = parse_num(key, value)?,
            "sre_scale" => self.protocol.sre_scale = parse_num(key, value)?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Applies a config file: one `key = value` per line, `#` comments.
    pub fn apply_text(&mut self, text: &str, path: &Path) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: n + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected 'key = value', got '{line}'")))?;
            self.set(key.trim(), value.trim()).map_err(|e| match e {
                Error::Config(m) => err(m),
                other => other,
            })?;
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects key=value, got '{assignment}'")))?;
        self.set(key.trim(), value.trim())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<RunConfig> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = RunConfig::default();
        cfg.apply_text(&text, path)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.tracker.validate()?;
        self.tracker.hier.validate()?;
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::Config("threshold must lie in [0, 1]".into()));
        }
        if self.protocol.tre_segments == 0 {
            return Err(Error::Config("tre_segments must be at least 1".into()));
        }
        if !(self.protocol.sre_scale >= 0.0) {
            return Err(Error::Config("sre_scale must be >= 0".into()));
        }
        Ok(())
    }

    /// The effective configuration in the same format [`RunConfig::load`]
    /// reads, with every key present.
    pub fn to_text(&self) -> String {
        let t = &self.tracker;
        let mut out = String::from("# effective dnbs configuration\n");
        let mut line = |key: &str, value: String, note: &str| {
            let _ = if note.is_empty() {
                writeln!(out, "{key} = {value}")
            } else {
                writeln!(out, "{key} = {value}  # {note}")
            };
        };
        line("k", t.dnbs.k.to_string(), "number of bases");
        line("lambda", t.dnbs.lambda.to_string(), "background weight; 0 = plain NBS");
        line("dependence_tol", auto_str(t.dnbs.dependence_tol), "auto = 1e-10 * W * H");
        line("tie_tolerance", t.dnbs.tie_tolerance.to_string(), "relative score tie band");
        line("solver", t.solver.to_string(), "direct | iterative | hierarchical");
        line("ratio", t.hier.ratio.to_string(), "hierarchical pruning slack; inf = exact");
        line("mu", t.hier.mu.to_string(), "cluster similarity threshold");
        line(
            "expansion",
            match t.hier.expansion {
                Expansion::Members => "members",
                Expansion::MuNearSet => "mu_near_set",
            }
            .into(),
            "",
        );
        line("seed", t.seed.to_string(), "");
        line("n_u", t.n_u.to_string(), "update period in frames");
        line("gamma_update", t.gamma_update.to_string(), "weight of the old reference");
        line("search_radius", t.search_radius.to_string(), "pixels");
        line("n_f", t.n_f.to_string(), "recent foregrounds kept");
        line("n_b", t.n_b.to_string(), "negatives mined per update");
        line("mining_factor", t.mining_factor.to_string(), "mining radius / search radius");
        line("suppression_radius", auto_str(t.suppression_radius), "auto = half the template diagonal");
        line("iou_exclusion", t.iou_exclusion.to_string(), "");
        line(
            "motion",
            match t.motion {
                MotionModel::Static => "static",
                MotionModel::ConstantVelocity => "constant_velocity",
            }
            .into(),
            "",
        );
        line(
            "normalization",
            match t.normalization {
                Normalization::Raw => "raw",
                Normalization::ZeroMean => "zero_mean",
            }
            .into(),
            "",
        );
        line("threshold", self.threshold.to_string(), "success IOU, strict");
        line("tre_segments", self.protocol.tre_segments.to_string(), "");
        line("sre_scale", self.protocol.sre_scale.to_string(), "multiplier on the SRE shifts");
        out
    }

    pub fn echo(&self, dir: &Path) -> Result<()> {
        let path = dir.join("config.txt");
        std::fs::write(&path, self.to_text()).map_err(|e| Error::io(&path, e))
    }
}

#[derive(Debug, Parser)]
#[command(name = "dnbs", version, about = "Discriminative binary subspaces, SSD tracking and evaluation")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    /// Shorthand for `--set solver=...`.
    #[arg(long, global = true)]
    pub solver: Option<Solver>,
    /// Shorthand for `--set seed=...`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Track one object through a sequence directory.
    Track {
        /// Sequence directory (frames in `img/` or in the directory itself).
        sequence: PathBuf,
        /// Initial box `x,y,w,h` (1-based); defaults to the first ground-truth line.
        #[arg(long)]
        init: Option<String>,
        #[arg(long, short)]
        out: PathBuf,
        /// Also write annotated frames.
        #[arg(long)]
        frames: bool,
    },
    /// Select a subspace from `foreground/` and `background/` image sets.
    Train {
        samples: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Cluster the dictionary of a template size.
    Cluster {
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Score/time sweeps over K, N_b, ratio and mu on synthetic templates.
    Bench {
        #[arg(long, short)]
        out: PathBuf,
        /// Template side length.
        #[arg(long, default_value_t = 50)]
        size: usize,
        /// Fewer, smaller sweep points.
        #[arg(long)]
        quick: bool,
    },
    /// Run OPE, TRE or SRE over one or more sequences.
    Eval {
        #[arg(required = true)]
        sequences: Vec<PathBuf>,
        #[arg(long, default_value = "ope")]
        protocol: String,
        #[arg(long, short)]
        out: PathBuf,
    },
}

impl CommonArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        for o in &self.overrides {
            cfg.apply_override(o)?;
        }
        if let Some(s) = self.solver {
            cfg.tracker.solver = s;
        }
        if let Some(s) = self.seed {
            cfg.tracker.seed = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl clap::ValueEnum for Solver {
    fn value_variants<'a>() -> &'a [Self] {
        &[Solver::Direct, Solver::Iterative, Solver::Hierarchical]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(match self {
            Solver::Direct => "direct",
            Solver::Iterative => "iterative",
            Solver::Hierarchical => "hierarchical",
        }))
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Parses a 1-based `x,y,w,h` box.
pub fn parse_init(s: &str) -> Result<BoundingBox> {
    let boxes = eval::parse_groundtruth(s, Path::new("--init"))?;
    match boxes.as_slice() {
        [b] if b.is_valid() => Ok(*b),
        _ => Err(Error::Config(format!("--init expects one box x,y,w,h, got '{s}'"))),
    }
}

pub fn cmd_track(sequence: &Path, init: Option<BoundingBox>, cfg: &RunConfig, out: &Path, frames: bool) -> Result<()> {
    let seq = eval::load_sequence(sequence)?;
    let init = init.unwrap_or(seq.groundtruth[0]);
    let results = tracker::track(seq.frames_from(0), init, &cfg.tracker)?;
    create_dir(out)?;
    cfg.echo(out)?;
    write(&out.join("track.csv"), tracker::results_csv(&results))?;
    if frames {
        let dir = out.join("frames");
        create_dir(&dir)?;
        for (i, r) in results.iter().enumerate() {
            let path = dir.join(format!("{:04}.png", i + 1));
            tracker::annotate(&seq.frame(i)?, &r.bbox)
                .save(&path)
                .map_err(|source| Error::Image { path, source })?;
        }
    }
    log::info!("tracked {} frames of '{}'", results.len(), seq.name);
    Ok(())
}

fn load_dir_images(dir: &Path) -> Result<Vec<ImageTemplate>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    paths.iter().map(ImageTemplate::load).collect()
}

fn solve(cfg: &TrackerConfig, samples: &SampleSet, dict: &Dictionary) -> Result<Selection> {
    match cfg.solver {
        Solver::Direct => select_direct(samples, &cfg.dnbs, dict),
        Solver::Iterative => select_iterative(samples, &cfg.dnbs, dict),
        Solver::Hierarchical => {
            let index = cluster_dictionary(dict, cfg.hier.mu, cfg.seed)?;
            select_hierarchical(samples, &cfg.dnbs, &cfg.hier, &index, dict)
        }
    }
}

/// `samples` holds `foreground/` (or `fg/`) and optionally `background/`
/// (or `bg/`) image directories; writes `subspace.json` and `trace.csv`.
pub fn cmd_train(samples: &Path, cfg: &RunConfig, out: &Path) -> Result<()> {
    let pick = |names: &[&str]| names.iter().map(|n| samples.join(n)).find(|p| p.is_dir());
    let fg_dir = pick(&["foreground", "fg"]).ok_or_else(|| {
        Error::io(
            samples,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no foreground/ directory"),
        )
    })?;
    let fg = load_dir_images(&fg_dir)?;
    let bg = match pick(&["background", "bg"]) {
        Some(d) => load_dir_images(&d)?,
        None => Vec::new(),
    };
    let samples = SampleSet::new(fg, bg)?;
    let (w, h) = samples.dims();
    let dict = Dictionary::new(w, h)?;
    let sel = solve(&cfg.tracker, &samples, &dict)?;
    create_dir(out)?;
    cfg.echo(out)?;
    let coeffs = sel.subspace.coefficients(&samples.foregrounds()[0])?;
    sel.subspace.to_record(Some(coeffs)).save(out.join("subspace.json"))?;
    write(&out.join("trace.csv"), sel.trace_csv())?;
    if let crate::doomp::SelectionStatus::EarlyStop { requested, achieved } = sel.status {
        log::warn!("selected {achieved} of {requested} bases");
    }
    Ok(())
}

pub fn cmd_cluster(width: usize, height: usize, cfg: &RunConfig, out: &Path) -> Result<()> {
    let dict = Dictionary::new(width, height)?;
    let index = cluster_dictionary(&dict, cfg.tracker.hier.mu, cfg.tracker.seed)?;
    create_dir(out)?;
    cfg.echo(out)?;
    index.save(out.join("clusters.json"))?;
    log::info!("{} atoms in {} clusters", dict.len(), index.len());
    Ok(())
}

/// Foregrounds are noisy copies of one random template, backgrounds are
/// independent random templates.
fn bench_samples(rng: &mut ChaCha8Rng, size: usize, n_f: usize, n_b: usize) -> Result<SampleSet> {
    use rand::Rng;
    let base = random_template(rng, size, size);
    let fg = (0..n_f)
        .map(|_| {
            let mut t = base.clone();
            for p in t.pixels_mut() {
                *p += rng.random_range(-10.0..10.0);
            }
            t
        })
        .collect();
    let bg = (0..n_b).map(|_| random_template(rng, size, size)).collect();
    SampleSet::new(fg, bg)
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let t = Instant::now();
    let v = f()?;
    Ok((v, t.elapsed().as_secs_f64()))
}

/// Writes `bench_k.csv`, `bench_nb.csv`, `bench_ratio.csv` and `bench_mu.csv`.
pub fn cmd_bench(cfg: &RunConfig, out: &Path, size: usize, quick: bool) -> Result<()> {
    create_dir(out)?;
    cfg.echo(out)?;
    let t = &cfg.tracker;
    let mut rng = ChaCha8Rng::seed_from_u64(t.seed);
    let dict = Dictionary::new(size, size)?;
    let samples = bench_samples(&mut rng, size, t.n_f, t.n_b)?;
    let lambda = t.dnbs.lambda;
    let (index, cluster_secs) = timed(|| cluster_dictionary(&dict, t.hier.mu, t.seed))?;
    log::info!("clustered {} atoms into {} clusters in {cluster_secs:.2}s", dict.len(), index.len());

    let ks: &[usize] = if quick { &[1, 5, 10, 20] } else { &[1, 5, 10, 20, 30, 50, 75, 100] };
    let mut csv = String::from("k,objective_iterative,seconds_iterative,objective_hierarchical,seconds_hierarchical\n");
    for &k in ks {
        let dnbs = crate::doomp::DnbsConfig { k, ..t.dnbs.clone() };
        let (it, it_s) = timed(|| select_iterative(&samples, &dnbs, &dict))?;
        let (hi, hi_s) = timed(|| select_hierarchical(&samples, &dnbs, &t.hier, &index, &dict))?;
        let _ = writeln!(
            csv,
            "{k},{:.9e},{it_s:.4},{:.9e},{hi_s:.4}",
            samples.objective(&it.subspace, lambda)?,
            samples.objective(&hi.subspace, lambda)?
        );
    }
    write(&out.join("bench_k.csv"), csv)?;

    let nbs: &[usize] = if quick { &[5, 20, 50] } else { &[5, 10, 20, 50, 100] };
    let mut csv = String::from("n_b,seconds_direct,seconds_iterative,seconds_hierarchical\n");
    for &n_b in nbs {
        let s = bench_samples(&mut rng, size, t.n_f, n_b)?;
        let (_, d_s) = timed(|| select_direct(&s, &t.dnbs, &dict))?;
        let (_, i_s) = timed(|| select_iterative(&s, &t.dnbs, &dict))?;
        let (_, h_s) = timed(|| select_hierarchical(&s, &t.dnbs, &t.hier, &index, &dict))?;
        let _ = writeln!(csv, "{n_b},{d_s:.4},{i_s:.4},{h_s:.4}");
    }
    write(&out.join("bench_nb.csv"), csv)?;

    let exact = select_iterative(&samples, &t.dnbs, &dict)?;
    let exact_obj = samples.objective(&exact.subspace, lambda)?;
    let mut csv = String::from("ratio,objective,objective_exact,seconds\n");
    for ratio in [0.0, 0.1, 0.25, 0.5, 1.0, 2.0, f64::INFINITY] {
        let hier = crate::cluster::HierConfig { ratio, ..t.hier.clone() };
        let (sel, secs) = timed(|| select_hierarchical(&samples, &t.dnbs, &hier, &index, &dict))?;
        let _ = writeln!(
            csv,
            "{ratio},{:.9e},{exact_obj:.9e},{secs:.4}",
            samples.objective(&sel.subspace, lambda)?
        );
    }
    write(&out.join("bench_ratio.csv"), csv)?;

    let mus: &[f64] = if quick { &[0.6, 0.8] } else { &[0.6, 0.65, 0.7, 0.75, 0.8] };
    let mut csv = String::from("mu,clusters,cluster_seconds,objective,objective_exact,seconds\n");
    for &mu in mus {
        let (idx, c_s) = timed(|| cluster_dictionary(&dict, mu, t.seed))?;
        let hier = crate::cluster::HierConfig { mu, ..t.hier.clone() };
        let (sel, secs) = timed(|| select_hierarchical(&samples, &t.dnbs, &hier, &idx, &dict))?;
        let _ = writeln!(
            csv,
            "{mu},{},{c_s:.4},{:.9e},{exact_obj:.9e},{secs:.4}",
            idx.len(),
            samples.objective(&sel.subspace, lambda)?
        );
    }
    write(&out.join("bench_mu.csv"), csv)
}

/// Evaluates every sequence into `out/<name>/` and writes `out/summary.csv`
/// with per-sequence success fractions and their mean. A failing sequence is
/// reported and skipped; the first failure's error is returned at the end.
pub fn cmd_eval(sequences: &[PathBuf], protocol: Protocol, cfg: &RunConfig, out: &Path) -> Result<()> {
    create_dir(out)?;
    cfg.echo(out)?;
    let mut evaluator = Evaluator::new(cfg.tracker.clone())?.with_threshold(cfg.threshold);
    let mut reports = Vec::new();
    let mut summary = String::from("sequence,protocol,success,mean_center_error,status\n");
    let mut first_err = None;
    for path in sequences {
        let result = eval::load_sequence(path).and_then(|seq| {
            let report = evaluator.evaluate(&seq, protocol, &cfg.protocol)?;
            eval::write_report(&report, out.join(&seq.name))?;
            Ok(report)
        });
        match result {
            Ok(report) => {
                let _ = writeln!(
                    summary,
                    "{},{protocol},{:.6},{:.6},ok",
                    report.sequence, report.success, report.mean_center_error
                );
                reports.push(report);
            }
            Err(e) => {
                log::error!("{}: {e}", path.display());
                let _ = writeln!(summary, "{},{protocol},,,failed", path.display());
                first_err.get_or_insert(e);
            }
        }
    }
    if !reports.is_empty() {
        let mce = reports.iter().map(|r| r.mean_center_error).sum::<f64>() / reports.len() as f64;
        let _ = writeln!(summary, "average,{protocol},{:.6},{mce:.6},ok", average_success(&reports));
    }
    write(&out.join("summary.csv"), summary)?;
    first_err.map_or(Ok(()), Err)
}

fn dispatch(cli: &Cli) -> Result<()> {
    let cfg = cli.common.resolve()?;
    match &cli.command {
        Command::Track {
            sequence,
            init,
            out,
            frames,
        } => {
            let init = init.as_deref().map(parse_init).transpose()?;
            cmd_track(sequence, init, &cfg, out, *frames)
        }
        Command::Train { samples, out } => cmd_train(samples, &cfg, out),
        Command::Cluster { width, height, out } => cmd_cluster(*width, *height, &cfg, out),
        Command::Bench { out, size, quick } => cmd_bench(&cfg, out, *size, *quick),
        Command::Eval {
            sequences,
            protocol,
            out,
        } => {
            let protocol: Protocol = protocol.parse()?;
            cmd_eval(sequences, protocol, &cfg, out)
        }
    }
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
