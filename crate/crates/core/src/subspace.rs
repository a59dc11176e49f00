//! Non-orthogonal binary subspaces: incremental orthogonalization of selected
//! box features, reconstruction, residuals, and raw-basis coefficients.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::haar::{haar_dot_haar, haar_dot_image, HaarBox, IntegralImage};
use crate::raster::{dot, ImageTemplate};

/// Default rejection threshold on `u_k = ||phi_bar_k||^2`.
pub fn default_dependence_tol(width: usize, height: usize) -> f64 {
    1e-10 * (width * height) as f64
}

/// Ordered box bases together with their Gram-Schmidt residuals.
///
/// `ortho[k]` is the component of `bases[k]` orthogonal to `bases[..k]`, kept
/// densely with its integral image, and `u[k]` is its squared norm.
#[derive(Debug, Clone)]
pub struct Subspace {
    width: usize,
    height: usize,
    tol: f64,
    bases: Vec<HaarBox>,
    ortho: Vec<ImageTemplate>,
    ortho_ii: Vec<IntegralImage>,
    u: Vec<f64>,
}

impl Subspace {
    pub fn new(width: usize, height: usize) -> Self {
        Self::with_tolerance(width, height, default_dependence_tol(width, height))
    }

    pub fn with_tolerance(width: usize, height: usize, tol: f64) -> Self {
        assert!(width > 0 && height > 0, "subspace frame must be non-empty");
        Subspace {
            width,
            height,
            tol,
            bases: Vec::new(),
            ortho: Vec::new(),
            ortho_ii: Vec::new(),
            u: Vec::new(),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn bases(&self) -> &[HaarBox] {
        &self.bases
    }

    pub fn ortho_residuals(&self) -> &[ImageTemplate] {
        &self.ortho
    }

    pub fn ortho_integrals(&self) -> &[IntegralImage] {
        &self.ortho_ii
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    /// Appends `b`, orthogonalizing it against the current bases.
    ///
    /// Fails with [`Error::LinearDependence`] when the orthogonal component's
    /// energy is below the dependence tolerance; the subspace is then unchanged.
    pub fn append_basis(&mut self, b: HaarBox) -> Result<()> {
        if !b.fits(self.width, self.height) {
            return Err(Error::invalid(format!(
                "basis {b:?} outside {}x{} frame",
                self.width, self.height
            )));
        }
        let mut phi = b.to_dense(self.width, self.height);
        for ((prev, ii), &u) in self.ortho.iter().zip(&self.ortho_ii).zip(&self.u) {
            let coef = haar_dot_image(&b, ii)? / u;
            for (p, q) in phi.pixels_mut().iter_mut().zip(prev.pixels()) {
                *p -= coef * q;
            }
        }
        let energy = phi.norm_sqr();
        if energy < self.tol {
            return Err(Error::LinearDependence {
                energy,
                tolerance: self.tol,
            });
        }
        self.ortho_ii.push(IntegralImage::new(&phi));
        self.ortho.push(phi);
        self.u.push(energy);
        self.bases.push(b);
        Ok(())
    }

    fn check(&self, x: &ImageTemplate) -> Result<()> {
        if x.dims() != self.dims() {
            return Err(Error::ShapeMismatch {
                expected: self.dims(),
                got: x.dims(),
            });
        }
        Ok(())
    }

    /// `x - R(x)`.
    pub fn residual(&self, x: &ImageTemplate) -> Result<ImageTemplate> {
        self.check(x)?;
        let mut r = x.clone();
        for (phi, &u) in self.ortho.iter().zip(&self.u) {
            let a = dot(phi.pixels(), r.pixels()) / u;
            for (p, q) in r.pixels_mut().iter_mut().zip(phi.pixels()) {
                *p -= a * q;
            }
        }
        Ok(r)
    }

    /// Orthogonal projection of `x` onto the span of the bases.
    pub fn reconstruct(&self, x: &ImageTemplate) -> Result<ImageTemplate> {
        let r = self.residual(x)?;
        Ok(x.sub(&r))
    }

    /// Coefficients `c` with `sum_i c_i * phi_i = R(x)` for the unit-norm raw
    /// bases, from the Gram system of the boxes.
    pub fn coefficients(&self, x: &ImageTemplate) -> Result<Vec<f64>> {
        self.check(x)?;
        let k = self.len();
        if k == 0 {
            return Ok(Vec::new());
        }
        let ii = IntegralImage::new(x);
        let gram = DMatrix::from_fn(k, k, |i, j| haar_dot_haar(&self.bases[i], &self.bases[j]));
        let rhs = DVector::from_iterator(
            k,
            self.bases
                .iter()
                .map(|b| ii.box_sum_unchecked(b) / (b.area() as f64).sqrt()),
        );
        let chol = gram.cholesky().ok_or_else(|| {
            Error::NumericDegeneracy(format!("Gram matrix of {k} bases is not positive definite"))
        })?;
        Ok(chol.solve(&rhs).iter().copied().collect())
    }

    /// Dense `sum_i c_i * phi_i`.
    pub fn combine(&self, coeffs: &[f64]) -> Result<ImageTemplate> {
        if coeffs.len() != self.len() {
            return Err(Error::invalid(format!(
                "{} coefficients for {} bases",
                coeffs.len(),
                self.len()
            )));
        }
        let mut out = ImageTemplate::zeros(self.width, self.height);
        let w = self.width;
        for (b, &c) in self.bases.iter().zip(coeffs) {
            let v = c / (b.area() as f64).sqrt();
            for row in b.v0 as usize - 1..b.v1() as usize {
                for col in b.u0 as usize - 1..b.u1() as usize {
                    out.pixels_mut()[row * w + col] += v;
                }
            }
        }
        Ok(out)
    }

    pub fn to_record(&self, coefficients: Option<Vec<f64>>) -> SubspaceRecord {
        SubspaceRecord {
            width: self.width,
            height: self.height,
            k: self.len(),
            bases: self.bases.iter().map(|b| [b.u0, b.v0, b.w, b.h]).collect(),
            coefficients,
        }
    }

    /// Rebuilds the subspace (re-orthogonalizing every basis) from a record.
    pub fn from_record(record: &SubspaceRecord) -> Result<Subspace> {
        if record.k != record.bases.len() {
            return Err(Error::invalid(format!(
                "record declares k={} but lists {} bases",
                record.k,
                record.bases.len()
            )));
        }
        if record.width == 0 || record.height == 0 {
            return Err(Error::invalid("record frame must be non-empty"));
        }
        let mut s = Subspace::new(record.width, record.height);
        for &[u0, v0, w, h] in &record.bases {
            s.append_basis(HaarBox::new(u0, v0, w, h))?;
        }
        Ok(s)
    }
}

/// Flat serialized form of a subspace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceRecord {
    pub width: usize,
    pub height: usize,
    pub k: usize,
    /// `(u0, v0, w, h)` per basis, in selection order.
    pub bases: Vec<[u32; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<f64>>,
}

impl SubspaceRecord {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<SubspaceRecord> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Foreground and background training templates of one frame size.
#[derive(Debug, Clone)]
pub struct SampleSet {
    foregrounds: Vec<ImageTemplate>,
    backgrounds: Vec<ImageTemplate>,
}

impl SampleSet {
    pub fn new(foregrounds: Vec<ImageTemplate>, backgrounds: Vec<ImageTemplate>) -> Result<Self> {
        let first = foregrounds
            .first()
            .ok_or_else(|| Error::invalid("at least one foreground sample is required"))?;
        let dims = first.dims();
        for x in foregrounds.iter().chain(&backgrounds) {
            if x.dims() != dims {
                return Err(Error::ShapeMismatch {
                    expected: dims,
                    got: x.dims(),
                });
            }
        }
        Ok(SampleSet {
            foregrounds,
            backgrounds,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.foregrounds[0].dims()
    }

    pub fn foregrounds(&self) -> &[ImageTemplate] {
        &self.foregrounds
    }

    pub fn backgrounds(&self) -> &[ImageTemplate] {
        &self.backgrounds
    }

    pub fn n_f(&self) -> usize {
        self.foregrounds.len()
    }

    pub fn n_b(&self) -> usize {
        self.backgrounds.len()
    }

    /// Per-sample weights of the discriminative objective: `1/N_f` for each
    /// foreground and `-lambda/N_b` for each background (none when `N_b = 0`).
    pub fn weights(&self, lambda: f64) -> Vec<f64> {
        let wf = 1.0 / self.n_f() as f64;
        let mut w = vec![wf; self.n_f()];
        if self.n_b() > 0 {
            w.extend(std::iter::repeat_n(-lambda / self.n_b() as f64, self.n_b()));
        }
        w
    }

    /// Foregrounds followed by backgrounds, matching [`SampleSet::weights`].
    pub fn iter(&self) -> impl Iterator<Item = &ImageTemplate> {
        self.foregrounds.iter().chain(&self.backgrounds)
    }

    /// Discriminative objective: mean foreground residual energy minus
    /// `lambda` times mean background residual energy. Lower is better.
    pub fn objective(&self, subspace: &Subspace, lambda: f64) -> Result<f64> {
        let mut total = 0.0;
        for (x, w) in self.iter().zip(self.weights(lambda)) {
            total += w * subspace.residual(x)?.norm_sqr();
        }
        Ok(total)
    }

    /// Equivalent maximization form: weighted sum of `<x, R(x)>`.
    pub fn captured_energy(&self, subspace: &Subspace, lambda: f64) -> Result<f64> {
        let mut total = 0.0;
        for (x, w) in self.iter().zip(self.weights(lambda)) {
            total += w * x.dot(&subspace.reconstruct(x)?);
        }
        Ok(total)
    }
}
