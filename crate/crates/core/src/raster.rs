//! Real-valued grayscale images and 8-bit PGM/PNG IO.

use std::path::Path;

use crate::error::{Error, Result};

/// A row-major grayscale image with `f64` intensities.
///
/// Used both for fixed-size templates and for whole frames.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageTemplate {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

/// Frames are plain images of arbitrary size.
pub type Frame = ImageTemplate;

impl ImageTemplate {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::invalid(format!(
                "{}x{} image needs {} pixels, got {}",
                width,
                height,
                width * height,
                pixels.len()
            )));
        }
        if let Some(pos) = pixels.iter().position(|p| !p.is_finite()) {
            return Err(Error::invalid(format!("non-finite pixel at index {pos}")));
        }
        Ok(ImageTemplate {
            width,
            height,
            pixels,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        ImageTemplate {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    /// Builds an image by evaluating `f(col, row)` (0-based) at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut pixels = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                pixels.push(f(col, row));
            }
        }
        ImageTemplate {
            width,
            height,
            pixels,
        }
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
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [f64] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    /// Pixel at 0-based `(col, row)`.
    #[inline]
    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, col: usize, row: usize, value: f64) {
        self.pixels[row * self.width + col] = value;
    }

    pub fn dot(&self, other: &ImageTemplate) -> f64 {
        debug_assert_eq!(self.dims(), other.dims());
        dot(&self.pixels, &other.pixels)
    }

    pub fn norm_sqr(&self) -> f64 {
        dot(&self.pixels, &self.pixels)
    }

    pub fn mean(&self) -> f64 {
        self.pixels.iter().sum::<f64>() / self.pixels.len() as f64
    }

    /// Copies the `width x height` window whose top-left pixel is `(x, y)`.
    pub fn crop(&self, x: usize, y: usize, width: usize, height: usize) -> Result<ImageTemplate> {
        if width == 0 || height == 0 || x + width > self.width || y + height > self.height {
            return Err(Error::invalid(format!(
                "crop {width}x{height} at ({x},{y}) exceeds {}x{} image",
                self.width, self.height
            )));
        }
        let mut pixels = Vec::with_capacity(width * height);
        for row in y..y + height {
            let start = row * self.width + x;
            pixels.extend_from_slice(&self.pixels[start..start + width]);
        }
        Ok(ImageTemplate {
            width,
            height,
            pixels,
        })
    }

    /// Writes `patch` into this image with its top-left pixel at `(x, y)`.
    pub fn paste(&mut self, patch: &ImageTemplate, x: usize, y: usize) -> Result<()> {
        if x + patch.width > self.width || y + patch.height > self.height {
            return Err(Error::invalid(format!(
                "paste {}x{} at ({x},{y}) exceeds {}x{} image",
                patch.width, patch.height, self.width, self.height
            )));
        }
        for row in 0..patch.height {
            let dst = (y + row) * self.width + x;
            let src = row * patch.width;
            self.pixels[dst..dst + patch.width]
                .copy_from_slice(&patch.pixels[src..src + patch.width]);
        }
        Ok(())
    }

    pub fn sub(&self, other: &ImageTemplate) -> ImageTemplate {
        debug_assert_eq!(self.dims(), other.dims());
        let pixels = self
            .pixels
            .iter()
            .zip(&other.pixels)
            .map(|(a, b)| a - b)
            .collect();
        ImageTemplate {
            width: self.width,
            height: self.height,
            pixels,
        }
    }

    /// `a * self + b * other`, element-wise.
    pub fn blend(&self, a: f64, other: &ImageTemplate, b: f64) -> ImageTemplate {
        debug_assert_eq!(self.dims(), other.dims());
        let pixels = self
            .pixels
            .iter()
            .zip(&other.pixels)
            .map(|(x, y)| a * x + b * y)
            .collect();
        ImageTemplate {
            width: self.width,
            height: self.height,
            pixels,
        }
    }

    /// Returns a copy with the mean intensity removed.
    pub fn zero_mean(&self) -> ImageTemplate {
        let m = self.mean();
        let pixels = self.pixels.iter().map(|p| p - m).collect();
        ImageTemplate {
            width: self.width,
            height: self.height,
            pixels,
        }
    }

    /// Loads an 8-bit image (binary PGM or PNG) and converts it to luma.
    pub fn load(path: impl AsRef<Path>) -> Result<ImageTemplate> {
        let path = path.as_ref();
        let img = ::image::open(path).map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self::from_luma8(&img.to_luma8()))
    }

    pub fn from_luma8(img: &::image::GrayImage) -> ImageTemplate {
        let (w, h) = img.dimensions();
        ImageTemplate {
            width: w as usize,
            height: h as usize,
            pixels: img.as_raw().iter().map(|&p| f64::from(p)).collect(),
        }
    }

    /// Rounds and clamps to `[0, 255]`.
    pub fn to_luma8(&self) -> ::image::GrayImage {
        let raw = self
            .pixels
            .iter()
            .map(|p| p.round().clamp(0.0, 255.0) as u8)
            .collect();
        ::image::GrayImage::from_raw(self.width as u32, self.height as u32, raw)
            .expect("buffer length matches dimensions")
    }

    /// Saves as 8-bit; the format follows the extension (`.pgm` or `.png`).
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        self.to_luma8().save(path).map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(ImageTemplate::new(0, 3, vec![]).is_err());
        assert!(ImageTemplate::new(2, 2, vec![1.0; 3]).is_err());
        assert!(ImageTemplate::new(1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn crop_and_paste() {
        let img = ImageTemplate::from_fn(4, 3, |c, r| (r * 4 + c) as f64);
        let patch = img.crop(1, 1, 2, 2).unwrap();
        assert_eq!(patch.pixels(), &[5.0, 6.0, 9.0, 10.0]);
        assert!(img.crop(3, 0, 2, 1).is_err());

        let mut canvas = ImageTemplate::zeros(4, 3);
        canvas.paste(&patch, 2, 0).unwrap();
        assert_eq!(canvas.get(3, 1), 10.0);
        assert!(canvas.paste(&patch, 3, 0).is_err());
    }

    #[test]
    fn pgm_and_png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let img = ImageTemplate::from_fn(5, 3, |c, r| (c * 40 + r * 7) as f64);
        for name in ["a.pgm", "a.png"] {
            let path = dir.path().join(name);
            img.save(&path).unwrap();
            assert_eq!(ImageTemplate::load(&path).unwrap(), img);
        }
    }
}
