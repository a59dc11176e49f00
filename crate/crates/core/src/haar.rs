//! Haar-like box features, the overcomplete box dictionary, and integral images.
//!
//! A [`HaarBox`] is stored as geometry only. As a vector it takes the value
//! `1/sqrt(w*h)` inside the box and zero elsewhere, so every feature has unit
//! norm. All inner-product helpers in this module apply that normalization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::ImageTemplate;

/// One single-rectangle box feature. `u0`/`v0` are the 1-based column/row of
/// its top-left pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HaarBox {
    pub u0: u32,
    pub v0: u32,
    pub w: u32,
    pub h: u32,
}

impl HaarBox {
    pub const fn new(u0: u32, v0: u32, w: u32, h: u32) -> Self {
        HaarBox { u0, v0, w, h }
    }

    /// The box covering a whole `width x height` frame.
    pub const fn full(width: u32, height: u32) -> Self {
        HaarBox::new(1, 1, width, height)
    }

    #[inline]
    pub fn area(&self) -> u64 {
        u64::from(self.w) * u64::from(self.h)
    }

    /// Last column covered (1-based, inclusive).
    #[inline]
    pub fn u1(&self) -> u32 {
        self.u0 + self.w - 1
    }

    /// Last row covered (1-based, inclusive).
    #[inline]
    pub fn v1(&self) -> u32 {
        self.v0 + self.h - 1
    }

    pub fn fits(&self, width: usize, height: usize) -> bool {
        self.u0 >= 1
            && self.v0 >= 1
            && self.w >= 1
            && self.h >= 1
            && self.u1() as usize <= width
            && self.v1() as usize <= height
    }

    /// Number of pixels shared with `other`.
    pub fn common_area(&self, other: &HaarBox) -> u64 {
        let left = self.u0.max(other.u0);
        let right = self.u1().min(other.u1());
        let top = self.v0.max(other.v0);
        let bottom = self.v1().min(other.v1());
        if left > right || top > bottom {
            return 0;
        }
        u64::from(right - left + 1) * u64::from(bottom - top + 1)
    }

    /// Materializes the unit-norm feature vector on a `width x height` frame.
    pub fn to_dense(&self, width: usize, height: usize) -> ImageTemplate {
        debug_assert!(self.fits(width, height));
        let value = 1.0 / (self.area() as f64).sqrt();
        let (u0, u1) = (self.u0 as usize - 1, self.u1() as usize - 1);
        let (v0, v1) = (self.v0 as usize - 1, self.v1() as usize - 1);
        ImageTemplate::from_fn(width, height, |c, r| {
            if (u0..=u1).contains(&c) && (v0..=v1).contains(&r) {
                value
            } else {
                0.0
            }
        })
    }
}

/// Inner product of two unit-norm box features:
/// `CommonArea(a, b) / sqrt(Area(a) * Area(b))`.
///
/// Identical boxes give exactly `1.0`; disjoint boxes give `0.0`.
#[inline]
pub fn haar_dot_haar(a: &HaarBox, b: &HaarBox) -> f64 {
    let common = a.common_area(b);
    if common == 0 {
        return 0.0;
    }
    common as f64 / ((a.area() * b.area()) as f64).sqrt()
}

/// Flat offsets of the four integral-image entries a box needs, plus its
/// normalization factor. Precomputed once per dictionary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxCorners {
    /// S(u1, v1)
    pub br: u32,
    /// S(u0-1, v1)
    pub bl: u32,
    /// S(u1, v0-1)
    pub tr: u32,
    /// S(u0-1, v0-1)
    pub tl: u32,
    pub inv_norm: f64,
}

impl BoxCorners {
    /// Offsets for an integral image of a `width x height` source.
    pub fn new(b: &HaarBox, width: usize) -> Self {
        let stride = width + 1;
        let (l, r) = (b.u0 as usize - 1, b.u1() as usize);
        let (t, bt) = (b.v0 as usize - 1, b.v1() as usize);
        BoxCorners {
            br: (bt * stride + r) as u32,
            bl: (bt * stride + l) as u32,
            tr: (t * stride + r) as u32,
            tl: (t * stride + l) as u32,
            inv_norm: 1.0 / (b.area() as f64).sqrt(),
        }
    }
}

/// Every legal box of a `width x height` frame, in lexicographic
/// `(u0, v0, w, h)` order.
#[derive(Debug, Clone)]
pub struct Dictionary {
    width: usize,
    height: usize,
    atoms: Vec<HaarBox>,
    corners: Vec<BoxCorners>,
}

/// Closed-form dictionary size `W(W+1)H(H+1)/4`.
pub fn dictionary_size(width: usize, height: usize) -> usize {
    width * (width + 1) * height * (height + 1) / 4
}

impl Dictionary {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!(
                "dictionary dimensions must be positive, got {width}x{height}"
            )));
        }
        if (width + 1) * (height + 1) > u32::MAX as usize {
            return Err(Error::invalid("dictionary frame too large"));
        }
        let n = dictionary_size(width, height);
        let mut atoms = Vec::with_capacity(n);
        for u0 in 1..=width as u32 {
            for v0 in 1..=height as u32 {
                for w in 1..=(width as u32 - u0 + 1) {
                    for h in 1..=(height as u32 - v0 + 1) {
                        atoms.push(HaarBox::new(u0, v0, w, h));
                    }
                }
            }
        }
        debug_assert_eq!(atoms.len(), n);
        let corners = atoms.iter().map(|b| BoxCorners::new(b, width)).collect();
        Ok(Dictionary {
            width,
            height,
            atoms,
            corners,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[HaarBox] {
        &self.atoms
    }

    pub fn atom(&self, index: usize) -> HaarBox {
        self.atoms[index]
    }

    pub fn corners(&self) -> &[BoxCorners] {
        &self.corners
    }

    /// Position of `b` in the atom order, if it fits this frame.
    pub fn index_of(&self, b: &HaarBox) -> Option<usize> {
        if !b.fits(self.width, self.height) {
            return None;
        }
        self.atoms.binary_search(b).ok()
    }
}

/// Summed-area table with a zero guard row and column.
///
/// Entry `S(u, v)` (stored at `v * (W + 1) + u`) is the sum of all source
/// pixels with 1-based column `<= u` and row `<= v`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralImage {
    width: usize,
    height: usize,
    table: Vec<f64>,
}

impl IntegralImage {
    pub fn new(x: &ImageTemplate) -> Self {
        Self::from_slice(x.pixels(), x.width(), x.height())
    }

    /// Integral image of a row-major `width x height` buffer.
    pub fn from_slice(pixels: &[f64], width: usize, height: usize) -> Self {
        debug_assert_eq!(pixels.len(), width * height);
        let stride = width + 1;
        let mut table = vec![0.0; stride * (height + 1)];
        for row in 0..height {
            let mut running = 0.0;
            let src = &pixels[row * width..(row + 1) * width];
            let (above, below) = table.split_at_mut((row + 1) * stride);
            let above = &above[row * stride..];
            let current = &mut below[..stride];
            for col in 0..width {
                running += src[col];
                current[col + 1] = above[col + 1] + running;
            }
        }
        IntegralImage {
            width,
            height,
            table,
        }
    }

    /// Integral image of the squared source pixels.
    pub fn squared(x: &ImageTemplate) -> Self {
        let sq: Vec<f64> = x.pixels().iter().map(|p| p * p).collect();
        Self::from_slice(&sq, x.width(), x.height())
    }

    /// Source width (the table is one wider).
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// `S(u, v)` for 0 <= u <= W, 0 <= v <= H.
    #[inline]
    pub fn at(&self, u: usize, v: usize) -> f64 {
        self.table[v * (self.width + 1) + u]
    }

    /// Pixel sum over `b`, with bounds checking.
    pub fn box_sum(&self, b: &HaarBox) -> Result<f64> {
        if !b.fits(self.width, self.height) {
            return Err(Error::invalid(format!(
                "box {b:?} outside {}x{} integral image",
                self.width, self.height
            )));
        }
        Ok(self.box_sum_unchecked(b))
    }

    #[inline]
    pub fn box_sum_unchecked(&self, b: &HaarBox) -> f64 {
        let (l, r) = (b.u0 as usize - 1, b.u1() as usize);
        let (t, bt) = (b.v0 as usize - 1, b.v1() as usize);
        self.at(r, bt) - self.at(l, bt) - self.at(r, t) + self.at(l, t)
    }

    /// Pixel sum over the rectangle with 0-based top-left `(x, y)`.
    #[inline]
    pub fn rect_sum(&self, x: usize, y: usize, w: usize, h: usize) -> f64 {
        self.at(x + w, y + h) - self.at(x, y + h) - self.at(x + w, y) + self.at(x, y)
    }

    #[inline]
    pub fn corner_sum(&self, c: &BoxCorners) -> f64 {
        let t = &self.table;
        t[c.br as usize] - t[c.bl as usize] - t[c.tr as usize] + t[c.tl as usize]
    }
}

/// `<psi_b, x>` for the unit-norm feature of `b`, via four table lookups.
pub fn haar_dot_image(b: &HaarBox, ii: &IntegralImage) -> Result<f64> {
    Ok(ii.box_sum(b)? / (b.area() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive_sum(x: &ImageTemplate, b: &HaarBox) -> f64 {
        let mut s = 0.0;
        for r in b.v0..=b.v1() {
            for c in b.u0..=b.u1() {
                s += x.get(c as usize - 1, r as usize - 1);
            }
        }
        s
    }

    #[test]
    fn dictionary_counts() {
        assert_eq!(Dictionary::new(2, 2).unwrap().len(), 9);
        let one = Dictionary::new(1, 1).unwrap();
        assert_eq!(one.atoms(), &[HaarBox::new(1, 1, 1, 1)]);
        for w in 1..=16 {
            for h in 1..=16 {
                let d = Dictionary::new(w, h).unwrap();
                assert_eq!(d.len(), w * (w + 1) * h * (h + 1) / 4);
            }
        }
        assert!(Dictionary::new(0, 3).is_err());
    }

    #[test]
    fn dictionary_50x50_matches_enumeration() {
        let d = Dictionary::new(50, 50).unwrap();
        assert_eq!(d.len(), 1_625_625);
        // independent count: every (left, right, top, bottom) with left <= right, top <= bottom
        let mut count = 0usize;
        for l in 0..50 {
            for r in l..50 {
                for t in 0..50 {
                    for b in t..50 {
                        debug_assert!(l <= r && t <= b);
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(count, 1_625_625);
        assert!(d.atoms().windows(2).all(|p| p[0] < p[1]));
        assert!(d.atoms().iter().all(|b| b.fits(50, 50)));
    }

    #[test]
    fn integral_image_basics() {
        let ones = ImageTemplate::filled(2, 2, 1.0);
        let ii = IntegralImage::new(&ones);
        assert_eq!(ii.box_sum(&HaarBox::full(2, 2)).unwrap(), 4.0);
        assert_eq!(ii.at(0, 2), 0.0);
        assert_eq!(ii.at(2, 0), 0.0);

        let zeros = IntegralImage::new(&ImageTemplate::zeros(3, 4));
        for b in Dictionary::new(3, 4).unwrap().atoms() {
            assert_eq!(zeros.box_sum(b).unwrap(), 0.0);
        }
        assert!(ii.box_sum(&HaarBox::new(2, 1, 2, 1)).is_err());
    }

    #[test]
    fn integral_image_matches_naive_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = ImageTemplate::from_fn(8, 8, |_, _| rng.random_range(0.0..255.0));
        let ii = IntegralImage::new(&x);
        for _ in 0..100 {
            let u0 = rng.random_range(1..=8);
            let v0 = rng.random_range(1..=8);
            let w = rng.random_range(1..=9 - u0);
            let h = rng.random_range(1..=9 - v0);
            let b = HaarBox::new(u0, v0, w, h);
            assert!((ii.box_sum(&b).unwrap() - naive_sum(&x, &b)).abs() <= 1e-9);
            let c = BoxCorners::new(&b, 8);
            assert_eq!(ii.corner_sum(&c), ii.box_sum_unchecked(&b));
        }
    }

    #[test]
    fn integral_image_monotone_for_nonnegative_source() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = ImageTemplate::from_fn(6, 5, |_, _| rng.random_range(0.0..10.0));
        let ii = IntegralImage::new(&x);
        for v in 0..=5 {
            for u in 1..=6 {
                assert!(ii.at(u, v) >= ii.at(u - 1, v));
            }
        }
        for u in 0..=6 {
            for v in 1..=5 {
                assert!(ii.at(u, v) >= ii.at(u, v - 1));
            }
        }
    }

    #[test]
    fn haar_dot_image_examples() {
        let x = ImageTemplate::new(2, 2, vec![5.0, 1.0, 1.0, 1.0]).unwrap();
        let ii = IntegralImage::new(&x);
        assert_eq!(haar_dot_image(&HaarBox::full(2, 2), &ii).unwrap(), 4.0);
        assert_eq!(haar_dot_image(&HaarBox::new(1, 1, 1, 1), &ii).unwrap(), 5.0);
        assert_eq!(haar_dot_image(&HaarBox::new(2, 2, 1, 1), &ii).unwrap(), 1.0);
        let zero = IntegralImage::new(&ImageTemplate::zeros(2, 2));
        assert_eq!(haar_dot_image(&HaarBox::new(1, 2, 2, 1), &zero).unwrap(), 0.0);
    }

    #[test]
    fn haar_dot_haar_examples() {
        let full = HaarBox::full(2, 2);
        let px = HaarBox::new(1, 1, 1, 1);
        assert_eq!(haar_dot_haar(&full, &px), 0.5);
        assert_eq!(haar_dot_haar(&full, &full), 1.0);
        assert_eq!(haar_dot_haar(&px, &HaarBox::new(2, 2, 1, 1)), 0.0);
    }

    #[test]
    fn dense_features_have_unit_norm() {
        for b in Dictionary::new(5, 4).unwrap().atoms() {
            assert!((b.to_dense(5, 4).norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn index_of_round_trips() {
        let d = Dictionary::new(5, 3).unwrap();
        for (i, b) in d.atoms().iter().enumerate() {
            assert_eq!(d.index_of(b), Some(i));
        }
        assert_eq!(d.index_of(&HaarBox::new(5, 1, 2, 1)), None);
    }
}
