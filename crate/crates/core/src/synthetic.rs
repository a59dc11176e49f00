//! Deterministic synthetic templates and sequences for tests, benchmarks and
//! examples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::eval::Sequence;
use crate::raster::{Frame, ImageTemplate};
use crate::tracker::BoundingBox;

/// Uniform random pixels in `[0, 255)`.
pub fn random_template(rng: &mut impl Rng, width: usize, height: usize) -> ImageTemplate {
    ImageTemplate::from_fn(width, height, |_, _| rng.random_range(0.0..255.0))
}

/// Piecewise-constant texture of `block x block` cells with integer
/// intensities in `lo..=hi`.
pub fn blocky_texture(rng: &mut impl Rng, width: usize, height: usize, block: usize, lo: u8, hi: u8) -> ImageTemplate {
    let block = block.max(1);
    let cols = width.div_ceil(block);
    let rows = height.div_ceil(block);
    let cells: Vec<f64> = (0..cols * rows).map(|_| f64::from(rng.random_range(lo..=hi))).collect();
    ImageTemplate::from_fn(width, height, |c, r| cells[(r / block) * cols + c / block])
}

/// Rounds to integers in `[0, 255]`, so frames survive an 8-bit round trip.
pub fn quantize(frame: &Frame) -> Frame {
    let mut out = frame.clone();
    for p in out.pixels_mut() {
        *p = p.round().clamp(0.0, 255.0);
    }
    out
}

/// A textured object moving by a bounded random walk over a textured
/// background.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationSpec {
    pub width: usize,
    pub height: usize,
    pub object_width: usize,
    pub object_height: usize,
    pub frames: usize,
    /// Largest per-axis displacement between consecutive frames.
    pub max_step: usize,
    /// Standard deviation of additive Gaussian pixel noise (0 for none).
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for TranslationSpec {
    fn default() -> Self {
        TranslationSpec {
            width: 96,
            height: 80,
            object_width: 16,
            object_height: 16,
            frames: 80,
            max_step: 3,
            noise_sigma: 0.0,
            seed: 0,
        }
    }
}

/// Object positions `0..frames` of a reflecting random walk.
fn random_walk(rng: &mut ChaCha8Rng, spec: &TranslationSpec) -> Vec<(usize, usize)> {
    let max_x = (spec.width - spec.object_width) as i64;
    let max_y = (spec.height - spec.object_height) as i64;
    let step = spec.max_step as i64;
    let mut pos = (max_x / 2, max_y / 2);
    let mut out = Vec::with_capacity(spec.frames);
    for _ in 0..spec.frames {
        out.push((pos.0 as usize, pos.1 as usize));
        let mut dx = rng.random_range(-step..=step);
        let mut dy = rng.random_range(-step..=step);
        if !(0..=max_x).contains(&(pos.0 + dx)) {
            dx = -dx;
        }
        if !(0..=max_y).contains(&(pos.1 + dy)) {
            dy = -dy;
        }
        pos = ((pos.0 + dx).clamp(0, max_x), (pos.1 + dy).clamp(0, max_y));
    }
    out
}

pub fn translation_sequence(spec: &TranslationSpec) -> Result<Sequence> {
    if spec.object_width == 0
        || spec.object_height == 0
        || spec.object_width > spec.width
        || spec.object_height > spec.height
        || spec.frames == 0
    {
        return Err(Error::invalid("object must be non-empty and fit the frame"));
    }
    if !(spec.noise_sigma >= 0.0) {
        return Err(Error::invalid("noise_sigma must be >= 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let background = blocky_texture(&mut rng, spec.width, spec.height, 8, 20, 235);
    let object = blocky_texture(&mut rng, spec.object_width, spec.object_height, 4, 0, 255);
    let path = random_walk(&mut rng, spec);
    let noise = Normal::new(0.0, spec.noise_sigma.max(f64::MIN_POSITIVE)).expect("valid sigma");
    let mut frames = Vec::with_capacity(spec.frames);
    let mut gt = Vec::with_capacity(spec.frames);
    for &(x, y) in &path {
        let mut f = background.clone();
        f.paste(&object, x, y)?;
        if spec.noise_sigma > 0.0 {
            for p in f.pixels_mut() {
                *p += noise.sample(&mut rng);
            }
        }
        frames.push(f);
        gt.push(BoundingBox::new(
            x as f64,
            y as f64,
            spec.object_width as f64,
            spec.object_height as f64,
        ));
    }
    Sequence::from_frames("translation", frames, gt)
}

/// An object of three uniform blocks `A1`, `A2`, `B` on a gray background,
/// sliding left past static decoys that repeat `A1` and `A2` but lack `B`.
///
/// With two bases, plain reconstruction spends both on the shared blocks, so
/// a decoy matches the model better than the object does; the discriminative
/// score, with decoys as negatives, keeps a basis on `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoySpec {
    pub frames: usize,
    pub seed: u64,
    /// Standard deviation of additive Gaussian pixel noise.
    pub noise_sigma: f64,
}

impl Default for DecoySpec {
    fn default() -> Self {
        DecoySpec {
            frames: 60,
            seed: 0,
            noise_sigma: 0.0,
        }
    }
}

pub const DECOY_OBJECT_SIZE: usize = 12;
pub const DECOY_BACKGROUND: f64 = 60.0;
/// Bases per model for which the decoy scenario is constructed.
pub const DECOY_K: usize = 2;

/// The decoy-scenario object; `with_b = false` gives the decoy.
pub fn decoy_object(with_b: bool) -> ImageTemplate {
    // (x, y, w, h, value), painted in order
    const A1: (usize, usize, usize, usize, f64) = (8, 4, 2, 5, 190.0);
    const A2: (usize, usize, usize, usize, f64) = (4, 0, 5, 5, 224.0);
    const B: (usize, usize, usize, usize, f64) = (0, 2, 3, 4, 225.0);
    let n = DECOY_OBJECT_SIZE;
    let mut t = ImageTemplate::filled(n, n, DECOY_BACKGROUND);
    let blocks: &[_] = if with_b { &[A1, A2, B] } else { &[A1, A2] };
    for &(x, y, w, h, v) in blocks {
        t.paste(&ImageTemplate::filled(w, h, v), x, y).expect("block inside template");
    }
    t
}

pub fn decoy_sequence(spec: &DecoySpec) -> Result<Sequence> {
    let (w, h) = (112, 48);
    let n = DECOY_OBJECT_SIZE;
    let start_x = 84usize;
    if spec.frames == 0 || spec.frames > start_x + 1 {
        return Err(Error::invalid(format!("decoy sequence supports 1..={} frames", start_x + 1)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sigma.max(f64::MIN_POSITIVE)).expect("valid sigma");
    let object = decoy_object(true);
    let decoy = decoy_object(false);
    let y = 18;
    // 14 px above or below the path, inside the search window as it passes
    let decoys = [(96, 32), (72, 4), (50, 32), (28, 4), (6, 32)];
    let mut frames = Vec::with_capacity(spec.frames);
    let mut gt = Vec::with_capacity(spec.frames);
    for t in 0..spec.frames {
        let x = start_x - t;
        let mut f = Frame::filled(w, h, DECOY_BACKGROUND);
        for &(dx, dy) in &decoys {
            f.paste(&decoy, dx, dy)?;
        }
        f.paste(&object, x, y)?;
        if spec.noise_sigma > 0.0 {
            for p in f.pixels_mut() {
                *p += noise.sample(&mut rng);
            }
        }
        frames.push(f);
        gt.push(BoundingBox::new(x as f64, y as f64, n as f64, n as f64));
    }
    Sequence::from_frames("decoy", frames, gt)
}
