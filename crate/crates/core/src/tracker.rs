//! SSD template tracking with a periodically retrained DNBS appearance model.
//!
//! The reference appearance is `x = R(f_ref) = sum_i c_i phi_i`. For every
//! candidate window `y` the distance
//!
//! ```text
//! SSD(x, y) = ||x||^2 + ||y||^2 - 2 sum_i c_i <phi_i, y>
//! ```
//!
//! needs one lookup in the squared-frame integral image and one box sum per
//! basis. Every `N_u` frames the reference is blended with the latest match,
//! hard negatives are mined from the SSD map around the object, and the
//! subspace is retrained on the recent foregrounds and those negatives.

use std::collections::VecDeque;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cluster::{cluster_dictionary, select_hierarchical, ClusterIndex, HierConfig};
use crate::doomp::{select_direct, select_iterative, DnbsConfig, Selection, SelectionStatus, Solver};
use crate::error::{Error, Result};
use crate::haar::{Dictionary, IntegralImage};
use crate::raster::{Frame, ImageTemplate};
use crate::subspace::{SampleSet, Subspace};

/// Axis-aligned box in 0-based pixel coordinates (top-left corner plus size).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BoundingBox {
    pub const fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        BoundingBox { x, y, w, h }
    }

    pub fn area(&self) -> f64 {
        self.w.max(0.0) * self.h.max(0.0)
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    pub fn intersection(&self, other: &BoundingBox) -> f64 {
        let w = (self.x + self.w).min(other.x + other.w) - self.x.max(other.x);
        let h = (self.y + self.h).min(other.y + other.h) - self.y.max(other.y);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    /// Intersection over union; `0` for disjoint or empty boxes.
    pub fn iou(&self, other: &BoundingBox) -> f64 {
        let inter = self.intersection(other);
        if inter <= 0.0 {
            return 0.0;
        }
        inter / (self.area() + other.area() - inter)
    }

    pub fn is_valid(&self) -> bool {
        [self.x, self.y, self.w, self.h].iter().all(|v| v.is_finite()) && self.w > 0.0 && self.h > 0.0
    }

    /// Shifts the box so it lies inside a `width x height` frame (the size is
    /// kept when it fits).
    pub fn clamp_to(&self, width: usize, height: usize) -> BoundingBox {
        let w = self.w.min(width as f64);
        let h = self.h.min(height as f64);
        BoundingBox {
            x: self.x.clamp(0.0, width as f64 - w),
            y: self.y.clamp(0.0, height as f64 - h),
            w,
            h,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MotionModel {
    /// Search around the previous position.
    #[default]
    Static,
    /// Search around the previous position plus the last displacement.
    ConstantVelocity,
}

/// Intensity preprocessing applied to templates before fitting and matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    Raw,
    /// Subtract each template's mean intensity.
    ZeroMean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackerConfig {
    /// Subspace/template update period in frames.
    pub n_u: usize,
    /// Weight of the previous reference in the template update.
    pub gamma_update: f64,
    /// Half-size of the square search window, in pixels.
    pub search_radius: usize,
    pub n_f: usize,
    pub n_b: usize,
    pub dnbs: DnbsConfig,
    pub hier: HierConfig,
    pub solver: Solver,
    /// Seed for the dictionary clustering of the hierarchical solver.
    pub seed: u64,
    /// Negatives are mined within `mining_factor * search_radius` of the object.
    pub mining_factor: f64,
    /// Non-minimum suppression radius; `None` means half the template diagonal.
    pub suppression_radius: Option<f64>,
    /// Candidates overlapping the object by more than this IOU are not negatives.
    pub iou_exclusion: f64,
    pub motion: MotionModel,
    pub normalization: Normalization,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            n_u: 5,
            gamma_update: 0.5,
            search_radius: 15,
            n_f: 3,
            n_b: 3,
            dnbs: DnbsConfig::default(),
            hier: HierConfig::default(),
            solver: Solver::Iterative,
            seed: 0,
            mining_factor: 3.0,
            suppression_radius: None,
            iou_exclusion: 0.3,
            motion: MotionModel::Static,
            normalization: Normalization::Raw,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        self.dnbs.validate()?;
        if self.solver == Solver::Hierarchical {
            self.hier.validate()?;
        }
        if self.n_u == 0 || self.n_f == 0 {
            return Err(Error::invalid("n_u and n_f must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.gamma_update) {
            return Err(Error::invalid("gamma_update must lie in [0, 1]"));
        }
        if !(self.mining_factor >= 1.0) {
            return Err(Error::invalid("mining_factor must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.iou_exclusion) {
            return Err(Error::invalid("iou_exclusion must lie in [0, 1]"));
        }
        if let Some(r) = self.suppression_radius {
            if !(r >= 0.0) {
                return Err(Error::invalid("suppression_radius must be >= 0"));
            }
        }
        Ok(())
    }
}

/// SSD values over a rectangular grid of top-left positions.
#[derive(Debug, Clone, PartialEq)]
pub struct SsdMap {
    pub x0: usize,
    pub y0: usize,
    pub cols: usize,
    pub rows: usize,
    /// Row-major values.
    pub values: Vec<f64>,
}

impl SsdMap {
    #[inline]
    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    /// Position of the smallest value; ties go to the first in row-major order.
    pub fn argmin(&self) -> (usize, usize, f64) {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v < self.values[best] {
                best = i;
            }
        }
        (
            self.x0 + best % self.cols,
            self.y0 + best / self.cols,
            self.values[best],
        )
    }

    /// Positions no larger than any of their 8 neighbours, as
    /// `(x, y, value)` in frame coordinates, row-major.
    pub fn local_minima(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                let v = self.get(c, r);
                let mut is_min = true;
                'scan: for dr in -1i64..=1 {
                    for dc in -1i64..=1 {
                        if dr == 0 && dc == 0 {
                            continue;
                        }
                        let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                        if nr < 0 || nc < 0 || nr >= self.rows as i64 || nc >= self.cols as i64 {
                            continue;
                        }
                        if self.get(nc as usize, nr as usize) < v {
                            is_min = false;
                            break 'scan;
                        }
                    }
                }
                if is_min {
                    out.push((self.x0 + c, self.y0 + r, v));
                }
            }
        }
        out
    }
}

/// One basis prepared for window sums: offset inside the template, size, and
/// `c_i / sqrt(area)`.
#[derive(Debug, Clone, Copy)]
struct WeightedBox {
    dx: usize,
    dy: usize,
    w: usize,
    h: usize,
    weight: f64,
}

/// Precomputed reference appearance `x = R(f_ref)` in coefficient form.
#[derive(Debug, Clone)]
pub struct Appearance {
    pub coefficients: Vec<f64>,
    pub reconstruction: ImageTemplate,
    norm_sqr: f64,
    boxes: Vec<WeightedBox>,
    /// `sum_i c_i <phi_i, 1>`, needed for zero-mean matching.
    dc: f64,
}

impl Appearance {
    pub fn new(subspace: &Subspace, reference: &ImageTemplate) -> Result<Self> {
        let coefficients = subspace.coefficients(reference)?;
        let reconstruction = subspace.reconstruct(reference)?;
        let boxes: Vec<WeightedBox> = subspace
            .bases()
            .iter()
            .zip(&coefficients)
            .map(|(b, &c)| WeightedBox {
                dx: b.u0 as usize - 1,
                dy: b.v0 as usize - 1,
                w: b.w as usize,
                h: b.h as usize,
                weight: c / (b.area() as f64).sqrt(),
            })
            .collect();
        let dc = boxes
            .iter()
            .map(|b| b.weight * (b.w * b.h) as f64)
            .sum();
        Ok(Appearance {
            norm_sqr: reconstruction.norm_sqr(),
            coefficients,
            reconstruction,
            boxes,
            dc,
        })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.norm_sqr
    }
}

/// Integral images of one frame, shared by every window evaluated on it.
pub struct FrameIntegrals {
    sum: IntegralImage,
    sq: IntegralImage,
}

impl FrameIntegrals {
    pub fn new(frame: &Frame) -> Self {
        FrameIntegrals {
            sum: IntegralImage::new(frame),
            sq: IntegralImage::squared(frame),
        }
    }

    pub fn width(&self) -> usize {
        self.sum.width()
    }

    pub fn height(&self) -> usize {
        self.sum.height()
    }

    /// SSD between the reference appearance and the `w x h` window at `(x, y)`.
    pub fn ssd(&self, app: &Appearance, norm: Normalization, x: usize, y: usize, w: usize, h: usize) -> f64 {
        let mut yy = self.sq.rect_sum(x, y, w, h);
        let mut cross = 0.0;
        for b in &app.boxes {
            cross += b.weight * self.sum.rect_sum(x + b.dx, y + b.dy, b.w, b.h);
        }
        if norm == Normalization::ZeroMean {
            let n = (w * h) as f64;
            let s = self.sum.rect_sum(x, y, w, h);
            yy -= s * s / n;
            cross -= s / n * app.dc;
        }
        app.norm_sqr + yy - 2.0 * cross
    }
}

/// Output of one tracking step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackResult {
    pub frame: usize,
    pub bbox: BoundingBox,
    pub ssd_min: f64,
    pub refreshed: bool,
    /// The last retraining selected fewer than `k` bases.
    pub early_stop: bool,
}

/// Single-object tracking state machine.
#[derive(Debug, Clone)]
pub struct TrackerState {
    cfg: TrackerConfig,
    dict: Arc<Dictionary>,
    index: Option<Arc<ClusterIndex>>,
    f_ref: ImageTemplate,
    subspace: Subspace,
    appearance: Appearance,
    recent: VecDeque<ImageTemplate>,
    x: usize,
    y: usize,
    w: usize,
    h: usize,
    velocity: (i64, i64),
    t: usize,
    early_stop: bool,
}

fn prepare(norm: Normalization, x: &ImageTemplate) -> ImageTemplate {
    match norm {
        Normalization::Raw => x.clone(),
        Normalization::ZeroMean => x.zero_mean(),
    }
}

fn train(
    cfg: &TrackerConfig,
    dict: &Dictionary,
    index: Option<&ClusterIndex>,
    samples: &SampleSet,
) -> Result<Selection> {
    match cfg.solver {
        Solver::Direct => select_direct(samples, &cfg.dnbs, dict),
        Solver::Iterative => select_iterative(samples, &cfg.dnbs, dict),
        Solver::Hierarchical => {
            let index = index.expect("hierarchical tracker owns a cluster index");
            select_hierarchical(samples, &cfg.dnbs, &cfg.hier, index, dict)
        }
    }
}

impl TrackerState {
    /// Starts a track on `frame` at `bbox` (rounded to whole pixels).
    pub fn init(frame: &Frame, bbox: BoundingBox, cfg: TrackerConfig) -> Result<Self> {
        cfg.validate()?;
        if !bbox.is_valid() {
            return Err(Error::invalid(format!("invalid initial box {bbox:?}")));
        }
        let (x, y) = (bbox.x.round(), bbox.y.round());
        let (w, h) = (bbox.w.round().max(1.0), bbox.h.round().max(1.0));
        if x < 0.0 || y < 0.0 || x + w > frame.width() as f64 || y + h > frame.height() as f64 {
            return Err(Error::invalid(format!(
                "initial box {bbox:?} exceeds the {}x{} frame",
                frame.width(),
                frame.height()
            )));
        }
        let (x, y, w, h) = (x as usize, y as usize, w as usize, h as usize);
        let dict = Arc::new(Dictionary::new(w, h)?);
        let index = match cfg.solver {
            Solver::Hierarchical => Some(Arc::new(cluster_dictionary(&dict, cfg.hier.mu, cfg.seed)?)),
            _ => None,
        };
        Self::init_with(frame, (x, y, w, h), cfg, dict, index)
    }

    /// Like [`TrackerState::init`] but reuses a prebuilt dictionary (and
    /// cluster index) for the template size.
    pub fn init_with(
        frame: &Frame,
        (x, y, w, h): (usize, usize, usize, usize),
        cfg: TrackerConfig,
        dict: Arc<Dictionary>,
        index: Option<Arc<ClusterIndex>>,
    ) -> Result<Self> {
        cfg.validate()?;
        if dict.dims() != (w, h) {
            return Err(Error::ShapeMismatch {
                expected: (w, h),
                got: dict.dims(),
            });
        }
        if cfg.solver == Solver::Hierarchical && index.is_none() {
            return Err(Error::invalid("hierarchical solver needs a cluster index"));
        }
        let f0 = frame.crop(x, y, w, h)?;
        let prepared = prepare(cfg.normalization, &f0);
        let boot = SampleSet::new(vec![prepared.clone()], vec![])?;
        let sel = train(&cfg, &dict, index.as_deref(), &boot)?;
        let appearance = Appearance::new(&sel.subspace, &prepared)?;
        let mut state = TrackerState {
            dict,
            index,
            f_ref: f0.clone(),
            subspace: sel.subspace,
            appearance,
            recent: VecDeque::from([f0]),
            x,
            y,
            w,
            h,
            velocity: (0, 0),
            t: 0,
            early_stop: sel.status != SelectionStatus::Complete,
            cfg,
        };
        if state.uses_negatives() {
            let negatives = state.sample_background(frame)?;
            let fg = vec![prepared; state.cfg.n_f];
            state.retrain(fg, negatives)?;
        }
        Ok(state)
    }

    fn uses_negatives(&self) -> bool {
        self.cfg.dnbs.lambda > 0.0 && self.cfg.n_b > 0
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.cfg
    }

    pub fn frame_index(&self) -> usize {
        self.t
    }

    pub fn bbox(&self) -> BoundingBox {
        BoundingBox::new(self.x as f64, self.y as f64, self.w as f64, self.h as f64)
    }

    pub fn reference(&self) -> &ImageTemplate {
        &self.f_ref
    }

    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }

    pub fn appearance(&self) -> &Appearance {
        &self.appearance
    }

    pub fn dictionary(&self) -> &Arc<Dictionary> {
        &self.dict
    }

    pub fn recent_foregrounds(&self) -> impl Iterator<Item = &ImageTemplate> {
        self.recent.iter()
    }

    fn retrain(&mut self, foregrounds: Vec<ImageTemplate>, negatives: Vec<ImageTemplate>) -> Result<()> {
        let norm = self.cfg.normalization;
        let backgrounds = if self.cfg.dnbs.lambda > 0.0 {
            negatives.iter().map(|b| prepare(norm, b)).collect()
        } else {
            Vec::new()
        };
        let samples = SampleSet::new(foregrounds, backgrounds)?;
        let sel = train(&self.cfg, &self.dict, self.index.as_deref(), &samples)?;
        if let SelectionStatus::EarlyStop { requested, achieved } = sel.status {
            log::warn!("retraining stopped at {achieved} of {requested} bases");
        }
        self.early_stop = sel.status != SelectionStatus::Complete;
        self.subspace = sel.subspace;
        self.refresh_appearance()
    }

    fn refresh_appearance(&mut self) -> Result<()> {
        let reference = prepare(self.cfg.normalization, &self.f_ref);
        self.appearance = Appearance::new(&self.subspace, &reference)?;
        Ok(())
    }

    /// SSD map over all top-left positions within `radius` of `(cx, cy)`,
    /// clamped to the frame.
    pub fn ssd_map(&self, frame: &Frame, integrals: &FrameIntegrals, cx: i64, cy: i64, radius: usize) -> Result<SsdMap> {
        if frame.width() < self.w || frame.height() < self.h {
            return Err(Error::invalid(format!(
                "{}x{} frame is smaller than the {}x{} template",
                frame.width(),
                frame.height(),
                self.w,
                self.h
            )));
        }
        let max_x = (frame.width() - self.w) as i64;
        let max_y = (frame.height() - self.h) as i64;
        let r = radius as i64;
        let x0 = (cx - r).clamp(0, max_x) as usize;
        let x1 = (cx + r).clamp(0, max_x) as usize;
        let y0 = (cy - r).clamp(0, max_y) as usize;
        let y1 = (cy + r).clamp(0, max_y) as usize;
        let (cols, rows) = (x1 - x0 + 1, y1 - y0 + 1);
        let mut values = Vec::with_capacity(cols * rows);
        let norm = self.cfg.normalization;
        for y in y0..=y1 {
            for x in x0..=x1 {
                values.push(integrals.ssd(&self.appearance, norm, x, y, self.w, self.h));
            }
        }
        Ok(SsdMap {
            x0,
            y0,
            cols,
            rows,
            values,
        })
    }

    fn predicted(&self) -> (i64, i64) {
        let (x, y) = (self.x as i64, self.y as i64);
        match self.cfg.motion {
            MotionModel::Static => (x, y),
            MotionModel::ConstantVelocity => (x + self.velocity.0, y + self.velocity.1),
        }
    }

    /// Best match in the search window around the predicted position.
    pub fn locate(&self, frame: &Frame) -> Result<(BoundingBox, SsdMap)> {
        let integrals = FrameIntegrals::new(frame);
        let (px, py) = self.predicted();
        let map = self.ssd_map(frame, &integrals, px, py, self.cfg.search_radius)?;
        let (x, y, _) = map.argmin();
        Ok((
            BoundingBox::new(x as f64, y as f64, self.w as f64, self.h as f64),
            map,
        ))
    }

    /// `f_ref <- gamma * f_ref + (1 - gamma) * matched`.
    pub fn update_template(&mut self, matched: &ImageTemplate) -> Result<()> {
        if matched.dims() != self.f_ref.dims() {
            return Err(Error::ShapeMismatch {
                expected: self.f_ref.dims(),
                got: matched.dims(),
            });
        }
        let g = self.cfg.gamma_update;
        self.f_ref = self.f_ref.blend(g, matched, 1.0 - g);
        self.refresh_appearance()
    }

    /// Hard negatives: local minima of the SSD map around the object, thinned
    /// by non-minimum suppression and kept away from the object itself.
    pub fn sample_background(&self, frame: &Frame) -> Result<Vec<ImageTemplate>> {
        Ok(self
            .background_positions(frame)?
            .into_iter()
            .map(|(x, y)| frame.crop(x, y, self.w, self.h).expect("window inside frame"))
            .collect())
    }

    /// Top-left positions chosen by [`TrackerState::sample_background`].
    pub fn background_positions(&self, frame: &Frame) -> Result<Vec<(usize, usize)>> {
        let integrals = FrameIntegrals::new(frame);
        let radius = (self.cfg.mining_factor * self.cfg.search_radius as f64).round() as usize;
        let map = self.ssd_map(frame, &integrals, self.x as i64, self.y as i64, radius)?;
        let mut minima = map.local_minima();
        // stable sort keeps row-major order among equal values
        minima.sort_by(|a, b| a.2.total_cmp(&b.2));
        let suppress = self
            .cfg
            .suppression_radius
            .unwrap_or_else(|| 0.5 * ((self.w * self.w + self.h * self.h) as f64).sqrt());
        let object = self.bbox();
        let mut chosen: Vec<(usize, usize)> = Vec::new();
        for (x, y, _) in minima {
            if chosen.len() >= self.cfg.n_b {
                break;
            }
            let candidate = BoundingBox::new(x as f64, y as f64, self.w as f64, self.h as f64);
            if candidate.iou(&object) > self.cfg.iou_exclusion {
                continue;
            }
            let near = chosen.iter().any(|&(cx, cy)| {
                let dx = cx as f64 - x as f64;
                let dy = cy as f64 - y as f64;
                (dx * dx + dy * dy).sqrt() < suppress
            });
            if !near {
                chosen.push((x, y));
            }
        }
        Ok(chosen)
    }

    /// Processes the next frame: locate, then every `N_u` frames update the
    /// reference, mine negatives and retrain.
    pub fn step(&mut self, frame: &Frame) -> Result<TrackResult> {
        let (bbox, map) = self.locate(frame)?;
        let (_, _, ssd_min) = map.argmin();
        let (nx, ny) = (bbox.x as usize, bbox.y as usize);
        self.velocity = (nx as i64 - self.x as i64, ny as i64 - self.y as i64);
        self.x = nx;
        self.y = ny;
        let matched = frame.crop(nx, ny, self.w, self.h)?;
        self.t += 1;
        if self.recent.len() == self.cfg.n_f {
            self.recent.pop_front();
        }
        self.recent.push_back(matched.clone());

        let refreshed = self.t % self.cfg.n_u == 0;
        if refreshed {
            self.update_template(&matched)?;
            let negatives = if self.uses_negatives() {
                self.sample_background(frame)?
            } else {
                Vec::new()
            };
            let norm = self.cfg.normalization;
            let foregrounds = self.recent.iter().map(|f| prepare(norm, f)).collect();
            self.retrain(foregrounds, negatives)?;
        }
        Ok(TrackResult {
            frame: self.t,
            bbox,
            ssd_min,
            refreshed,
            early_stop: self.early_stop,
        })
    }
}

/// Tracks through `frames`, starting from `init` on the first one. The first
/// result is the initial box itself.
pub fn track(
    frames: impl IntoIterator<Item = Result<Frame>>,
    init: BoundingBox,
    cfg: &TrackerConfig,
) -> Result<Vec<TrackResult>> {
    let mut frames = frames.into_iter();
    let first = frames
        .next()
        .ok_or_else(|| Error::invalid("cannot track an empty sequence"))??;
    let mut state = TrackerState::init(&first, init, cfg.clone())?;
    let mut out = vec![TrackResult {
        frame: 0,
        bbox: state.bbox(),
        ssd_min: 0.0,
        refreshed: false,
        early_stop: state.early_stop,
    }];
    for frame in frames {
        out.push(state.step(&frame?)?);
    }
    Ok(out)
}

/// Per-frame CSV: `frame,x,y,w,h,ssd_min,refreshed` with 1-based box corners.
pub fn results_csv(results: &[TrackResult]) -> String {
    let mut out = String::from("frame,x,y,w,h,ssd_min,refreshed\n");
    for r in results {
        out.push_str(&format!(
            "{},{},{},{},{},{:.6},{}\n",
            r.frame + 1,
            r.bbox.x + 1.0,
            r.bbox.y + 1.0,
            r.bbox.w,
            r.bbox.h,
            r.ssd_min,
            u8::from(r.refreshed)
        ));
    }
    out
}

/// Burns a one-pixel outline of `bbox` into an 8-bit copy of `frame`.
pub fn annotate(frame: &Frame, bbox: &BoundingBox) -> ::image::GrayImage {
    let mut img = frame.to_luma8();
    let (w, h) = (img.width() as i64, img.height() as i64);
    let x0 = bbox.x.round() as i64;
    let y0 = bbox.y.round() as i64;
    let x1 = x0 + bbox.w.round() as i64 - 1;
    let y1 = y0 + bbox.h.round() as i64 - 1;
    let mut put = |x: i64, y: i64| {
        if (0..w).contains(&x) && (0..h).contains(&y) {
            img.put_pixel(x as u32, y as u32, ::image::Luma([255]));
        }
    };
    for x in x0..=x1 {
        put(x, y0);
        put(x, y1);
    }
    for y in y0..=y1 {
        put(x0, y);
        put(x1, y);
    }
    img
}
