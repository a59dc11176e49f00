//! Greedy discriminative basis selection over the box dictionary.
//!
//! Each iteration picks the atom `psi_i` maximizing
//!
//! ```text
//! L_k(psi_i) = sum_j w_j <psi_i, eps_{k-1}(x_j)>^2 / d_i
//! ```
//!
//! where `eps_{k-1}(x)` is the residual of sample `x` against the bases chosen
//! so far, `d_i` is the squared norm of the part of `psi_i` orthogonal to
//! them, and `w_j` is `1/N_f` for foregrounds and `-lambda/N_b` for
//! backgrounds.
//!
//! * [`Solver::Direct`] evaluates that sum for every atom and every sample.
//! * [`Solver::Iterative`] rescores every atom from its previous score with two
//!   box lookups, using the shared image `I_k` and scalar `S_k`.
//! * [`Solver::Hierarchical`] (see [`crate::cluster`]) rescores only cluster
//!   centers and the members of promising clusters.
//!
//! All three use the same argmax rule: among candidates scoring within
//! `tie_tolerance` of the best, the lowest atom index wins.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::haar::{BoxCorners, Dictionary, HaarBox, IntegralImage};
use crate::raster::{dot, ImageTemplate};
use crate::subspace::{default_dependence_tol, SampleSet, Subspace};

/// Which greedy solver to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Direct,
    #[default]
    Iterative,
    Hierarchical,
}

impl std::str::FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Solver::Direct),
            "iterative" => Ok(Solver::Iterative),
            "hierarchical" => Ok(Solver::Hierarchical),
            other => Err(Error::Config(format!(
                "unknown solver '{other}' (expected direct, iterative or hierarchical)"
            ))),
        }
    }
}

impl std::fmt::Display for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Solver::Direct => "direct",
            Solver::Iterative => "iterative",
            Solver::Hierarchical => "hierarchical",
        })
    }
}

/// Selection parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DnbsConfig {
    /// Number of bases to select.
    pub k: usize,
    /// Background weight.
    pub lambda: f64,
    /// Threshold on residual energy below which an atom counts as dependent.
    /// `None` means `1e-10 * W * H`.
    pub dependence_tol: Option<f64>,
    /// Scores within `tie_tolerance * energy_scale` of the best are ties.
    pub tie_tolerance: f64,
}

impl Default for DnbsConfig {
    fn default() -> Self {
        DnbsConfig {
            k: 30,
            lambda: 0.25,
            dependence_tol: None,
            tie_tolerance: 1e-9,
        }
    }
}

impl DnbsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(format!(
                "lambda must be finite and >= 0, got {}",
                self.lambda
            )));
        }
        if let Some(t) = self.dependence_tol {
            if !(t > 0.0) {
                return Err(Error::invalid("dependence_tol must be positive"));
            }
        }
        if !(self.tie_tolerance >= 0.0) {
            return Err(Error::invalid("tie_tolerance must be >= 0"));
        }
        Ok(())
    }
}

/// One row of the per-iteration solver trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub k: usize,
    pub atom: usize,
    pub basis: HaarBox,
    pub score: f64,
    /// Number of candidate scores computed this iteration.
    pub scored: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionStatus {
    Complete,
    /// Ran out of independent atoms before reaching the requested size.
    EarlyStop { requested: usize, achieved: usize },
}

/// Result of a greedy selection run.
#[derive(Debug, Clone)]
pub struct Selection {
    pub subspace: Subspace,
    /// Dictionary indices of the chosen atoms, in order.
    pub atoms: Vec<usize>,
    /// Score of each chosen atom at the iteration it was chosen.
    pub scores: Vec<f64>,
    pub trace: Vec<TraceRecord>,
    pub status: SelectionStatus,
}

impl Selection {
    pub fn trace_csv(&self) -> String {
        trace_csv(&self.trace)
    }
}

pub fn trace_csv(trace: &[TraceRecord]) -> String {
    let mut out = String::from("k,atom,u0,v0,w,h,score,scored,seconds\n");
    for t in trace {
        out.push_str(&format!(
            "{},{},{},{},{},{},{:.12e},{},{:.6}\n",
            t.k, t.atom, t.basis.u0, t.basis.v0, t.basis.w, t.basis.h, t.score, t.scored, t.seconds
        ));
    }
    out
}

/// `alpha_j = <phi_bar, x_j>` for every sample, taken against the residuals
/// `eps_{k-2}(x_j)` (identical to `<phi_bar, x_j>` since `phi_bar` is
/// orthogonal to the earlier bases).
pub fn alphas(phi_bar: &[f64], residuals: &[Vec<f64>]) -> Vec<f64> {
    residuals.iter().map(|r| dot(phi_bar, r)).collect()
}

/// `I_k = sum_j w_j * alpha_j * eps_{k-2}(x_j)`.
pub fn precompute_ik(prev_residuals: &[Vec<f64>], alphas: &[f64], weights: &[f64]) -> Vec<f64> {
    let n = prev_residuals.first().map_or(0, Vec::len);
    let mut out = vec![0.0; n];
    for ((r, &a), &w) in prev_residuals.iter().zip(alphas).zip(weights) {
        let s = w * a;
        for (o, v) in out.iter_mut().zip(r) {
            *o += s * v;
        }
    }
    out
}

/// `S_k = sum_j w_j * alpha_j^2`.
pub fn precompute_sk(alphas: &[f64], weights: &[f64]) -> f64 {
    alphas.iter().zip(weights).map(|(a, w)| w * a * a).sum()
}

/// Shared quantities produced by committing one basis; they carry every
/// candidate's `(d, L)` from iteration `k-1` to `k`.
#[derive(Debug, Clone)]
pub struct RecursionStep {
    u: f64,
    s: f64,
    ik: Vec<f64>,
    /// Integral images of `phi_bar` and `I_k`, interleaved per entry.
    tables: Vec<[f64; 2]>,
}

impl RecursionStep {
    fn new(phi_bar: &ImageTemplate, u: f64, ik: Vec<f64>, s: f64) -> Self {
        let (w, h) = phi_bar.dims();
        let phi_ii = IntegralImage::new(phi_bar);
        let i_ii = IntegralImage::from_slice(&ik, w, h);
        let tables = phi_ii
            .table()
            .iter()
            .zip(i_ii.table())
            .map(|(&a, &b)| [a, b])
            .collect();
        RecursionStep { u, s, ik, tables }
    }

    /// `u_{k-1} = ||phi_bar_{k-1}||^2`.
    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn sk(&self) -> f64 {
        self.s
    }

    pub fn ik(&self) -> &[f64] {
        &self.ik
    }

    /// `(<psi, phi_bar>, <psi, I_k>)` for the atom with corners `c`.
    #[inline]
    pub fn products(&self, c: &BoxCorners) -> (f64, f64) {
        let t = &self.tables;
        let (br, bl, tr, tl) = (
            t[c.br as usize],
            t[c.bl as usize],
            t[c.tr as usize],
            t[c.tl as usize],
        );
        (
            (br[0] - bl[0] - tr[0] + tl[0]) * c.inv_norm,
            (br[1] - bl[1] - tr[1] + tl[1]) * c.inv_norm,
        )
    }

    /// `d^{(k)} = d^{(k-1)} - beta^2 / u`.
    #[inline]
    pub fn update_denominator(&self, c: &BoxCorners, d: f64) -> f64 {
        let (beta, _) = self.products(c);
        d - beta * beta / self.u
    }

    /// Carries `(d, L)` one iteration forward:
    ///
    /// ```text
    /// L_k = [d_{k-1} L_{k-1} - 2 (beta/u) <psi, I_k> + (beta/u)^2 S_k] / d_k
    /// ```
    ///
    /// Returns `None` once `d_k <= tol`.
    #[inline]
    pub fn rescore(&self, c: &BoxCorners, d: f64, l: f64, tol: f64) -> Option<(f64, f64)> {
        let (beta, psi_i) = self.products(c);
        let ratio = beta / self.u;
        let d_new = d - beta * beta / self.u;
        if d_new <= tol {
            return None;
        }
        let l_new = (d * l - 2.0 * ratio * psi_i + ratio * ratio * self.s) / d_new;
        Some((d_new, l_new))
    }
}

/// Interleaved integral images of all sample residuals: entry `p` of sample
/// `j` lives at `p * n + j`.
#[derive(Debug, Clone)]
pub struct SampleStack {
    n: usize,
    data: Vec<f64>,
}

impl SampleStack {
    pub fn new(residuals: &[Vec<f64>], width: usize, height: usize) -> Self {
        let n = residuals.len();
        let entries = (width + 1) * (height + 1);
        let mut data = vec![0.0; entries * n];
        for (j, r) in residuals.iter().enumerate() {
            let ii = IntegralImage::from_slice(r, width, height);
            for (p, &v) in ii.table().iter().enumerate() {
                data[p * n + j] = v;
            }
        }
        SampleStack { n, data }
    }

    /// `sum_j w_j <psi, eps_j>^2` for the atom with corners `c`.
    #[inline]
    pub fn weighted_energy(&self, c: &BoxCorners, weights: &[f64]) -> f64 {
        let n = self.n;
        let br = &self.data[c.br as usize * n..c.br as usize * n + n];
        let bl = &self.data[c.bl as usize * n..c.bl as usize * n + n];
        let tr = &self.data[c.tr as usize * n..c.tr as usize * n + n];
        let tl = &self.data[c.tl as usize * n..c.tl as usize * n + n];
        let mut acc = 0.0;
        for j in 0..n {
            let s = br[j] - bl[j] - tr[j] + tl[j];
            acc += weights[j] * s * s;
        }
        acc * c.inv_norm * c.inv_norm
    }
}

/// Mutable selection state shared by all three solvers.
pub struct DoompState<'a> {
    pub(crate) dict: &'a Dictionary,
    weights: Vec<f64>,
    residuals: Vec<Vec<f64>>,
    subspace: Subspace,
    pub(crate) d: Vec<f64>,
    pub(crate) scores: Vec<f64>,
    pub(crate) excluded: Vec<bool>,
    selected: Vec<usize>,
    chosen_scores: Vec<f64>,
    tol: f64,
    tie_abs: f64,
    last_step: Option<RecursionStep>,
}

impl<'a> DoompState<'a> {
    pub fn new(dict: &'a Dictionary, samples: &SampleSet, cfg: &DnbsConfig) -> Result<Self> {
        cfg.validate()?;
        if samples.dims() != dict.dims() {
            return Err(Error::ShapeMismatch {
                expected: dict.dims(),
                got: samples.dims(),
            });
        }
        let (w, h) = dict.dims();
        let tol = cfg.dependence_tol.unwrap_or_else(|| default_dependence_tol(w, h));
        let weights = samples.weights(cfg.lambda);
        let residuals: Vec<Vec<f64>> = samples.iter().map(|x| x.pixels().to_vec()).collect();
        let energy: f64 = residuals
            .iter()
            .zip(&weights)
            .map(|(r, wt)| wt.abs() * dot(r, r))
            .sum();
        let scale = if energy > 0.0 { energy } else { 1.0 };
        let n = dict.len();
        Ok(DoompState {
            dict,
            weights,
            residuals,
            subspace: Subspace::with_tolerance(w, h, tol),
            d: vec![1.0; n],
            scores: vec![f64::NEG_INFINITY; n],
            excluded: vec![false; n],
            selected: Vec::new(),
            chosen_scores: Vec::new(),
            tol,
            tie_abs: cfg.tie_tolerance * scale,
            last_step: None,
        })
    }

    /// 1-based index of the basis currently being selected.
    pub fn iteration(&self) -> usize {
        self.subspace.len() + 1
    }

    pub fn dictionary(&self) -> &Dictionary {
        self.dict
    }

    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Current sample residuals `eps_{k-1}(x_j)`, foregrounds first.
    pub fn residuals(&self) -> &[Vec<f64>] {
        &self.residuals
    }

    /// `d_i = ||gamma_i^{(k)}||^2` for every atom.
    pub fn denominators(&self) -> &[f64] {
        &self.d
    }

    /// Last computed score per atom (`-inf` for excluded atoms).
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn is_excluded(&self, i: usize) -> bool {
        self.excluded[i]
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Absolute width of the tie band used by the argmax.
    pub fn tie_band(&self) -> f64 {
        self.tie_abs
    }

    /// Shared quantities of the most recent commit. Unavailable before the
    /// first basis is chosen.
    pub fn last_step(&self) -> Result<&RecursionStep> {
        self.last_step.as_ref().ok_or_else(|| {
            Error::invalid("I_k and S_k are only defined once a first basis is selected (k >= 2)")
        })
    }

    pub fn residual_stack(&self) -> SampleStack {
        SampleStack::new(&self.residuals, self.dict.width(), self.dict.height())
    }

    pub(crate) fn exclude(&mut self, i: usize) {
        self.excluded[i] = true;
        self.scores[i] = f64::NEG_INFINITY;
    }

    /// Score of atom `i` from the sample residuals (`None` if excluded).
    pub fn score_direct(&self, i: usize, stack: &SampleStack) -> Option<f64> {
        if self.excluded[i] || self.d[i] <= self.tol {
            return None;
        }
        Some(stack.weighted_energy(&self.dict.corners()[i], &self.weights) / self.d[i])
    }

    /// Recomputes every score from the residuals. Used at `k = 1` by all
    /// solvers and at every iteration by the direct solver.
    pub(crate) fn score_all_direct(&mut self) -> usize {
        let stack = self.residual_stack();
        let mut scored = 0;
        for i in 0..self.dict.len() {
            match self.score_direct(i, &stack) {
                Some(s) => {
                    self.scores[i] = s;
                    scored += 1;
                }
                None => self.exclude(i),
            }
        }
        scored
    }

    /// Applies the latest denominator update to every live atom.
    pub(crate) fn update_all_denominators(&mut self) {
        let Some(step) = self.last_step.as_ref() else {
            return;
        };
        let corners = self.dict.corners();
        for i in 0..self.d.len() {
            if self.excluded[i] {
                continue;
            }
            let d = step.update_denominator(&corners[i], self.d[i]);
            self.d[i] = d;
            if d <= self.tol {
                self.excluded[i] = true;
                self.scores[i] = f64::NEG_INFINITY;
            }
        }
    }

    /// Rescores every live atom with the recursion.
    pub(crate) fn rescore_all(&mut self) -> usize {
        let Some(step) = self.last_step.as_ref() else {
            return self.score_all_direct();
        };
        let corners = self.dict.corners();
        let mut scored = 0;
        for i in 0..self.d.len() {
            if self.excluded[i] {
                continue;
            }
            match step.rescore(&corners[i], self.d[i], self.scores[i], self.tol) {
                Some((d, l)) => {
                    self.d[i] = d;
                    self.scores[i] = l;
                    scored += 1;
                }
                None => {
                    self.excluded[i] = true;
                    self.scores[i] = f64::NEG_INFINITY;
                }
            }
        }
        scored
    }

    /// Argmax over all atoms with the tie rule.
    pub fn best_atom(&self) -> Option<usize> {
        pick_best(self.scores.iter().copied().enumerate(), self.tie_abs)
    }

    /// Adds atom `i` to the subspace and prepares the next iteration's shared
    /// quantities. The atom is excluded from later iterations either way.
    pub fn commit(&mut self, i: usize) -> Result<()> {
        let score = self.scores[i];
        self.exclude(i);
        self.subspace.append_basis(self.dict.atom(i))?;
        let k = self.subspace.len() - 1;
        let phi = &self.subspace.ortho_residuals()[k];
        let u = self.subspace.u()[k];
        let a = alphas(phi.pixels(), &self.residuals);
        let ik = precompute_ik(&self.residuals, &a, &self.weights);
        let s = precompute_sk(&a, &self.weights);
        for (r, &alpha) in self.residuals.iter_mut().zip(&a) {
            let c = alpha / u;
            for (v, p) in r.iter_mut().zip(phi.pixels()) {
                *v -= c * p;
            }
        }
        self.last_step = Some(RecursionStep::new(phi, u, ik, s));
        self.selected.push(i);
        self.chosen_scores.push(score);
        Ok(())
    }

    pub(crate) fn take_last_step(&self) -> Option<RecursionStep> {
        self.last_step.clone()
    }

    fn into_selection(self, trace: Vec<TraceRecord>, requested: usize) -> Selection {
        let achieved = self.selected.len();
        Selection {
            subspace: self.subspace,
            atoms: self.selected,
            scores: self.chosen_scores,
            trace,
            status: if achieved >= requested {
                SelectionStatus::Complete
            } else {
                SelectionStatus::EarlyStop {
                    requested,
                    achieved,
                }
            },
        }
    }
}

/// Argmax with ties: the lowest index among entries within `tie` of the max.
pub fn pick_best(scores: impl Iterator<Item = (usize, f64)> + Clone, tie: f64) -> Option<usize> {
    let max = scores
        .clone()
        .map(|(_, s)| s)
        .filter(|s| s.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    let cut = max - tie;
    scores
        .filter(|&(_, s)| s.is_finite() && s >= cut)
        .map(|(i, _)| i)
        .min()
}

/// Per-iteration hook for inspecting solver state before each pick.
pub type Observer<'o> = dyn FnMut(&DoompState<'_>) + 'o;

/// Runs the greedy loop shared by the direct and iterative solvers.
pub(crate) fn run_flat(
    solver: Solver,
    samples: &SampleSet,
    cfg: &DnbsConfig,
    dict: &Dictionary,
    observer: Option<&mut Observer<'_>>,
) -> Result<Selection> {
    let mut state = DoompState::new(dict, samples, cfg)?;
    let mut trace = Vec::with_capacity(cfg.k);
    let mut observer = observer;
    while state.subspace.len() < cfg.k {
        let start = Instant::now();
        let scored = match (solver, state.iteration()) {
            (_, 1) => state.score_all_direct(),
            (Solver::Direct, _) => {
                state.update_all_denominators();
                state.score_all_direct()
            }
            _ => state.rescore_all(),
        };
        if let Some(obs) = observer.as_mut() {
            obs(&state);
        }
        if !commit_best(&mut state, |s| s.best_atom())? {
            break;
        }
        record(&state, &mut trace, scored, start);
    }
    Ok(state.into_selection(trace, cfg.k))
}

/// Picks and commits the best atom, skipping atoms that turn out to be
/// dependent. Returns `false` when no candidate is left.
pub(crate) fn commit_best(
    state: &mut DoompState<'_>,
    mut pick: impl FnMut(&DoompState<'_>) -> Option<usize>,
) -> Result<bool> {
    loop {
        let Some(best) = pick(state) else {
            log::warn!(
                "no independent candidate left after {} bases",
                state.subspace.len()
            );
            return Ok(false);
        };
        match state.commit(best) {
            Ok(()) => return Ok(true),
            Err(Error::LinearDependence { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
}

pub(crate) fn record(
    state: &DoompState<'_>,
    trace: &mut Vec<TraceRecord>,
    scored: usize,
    start: Instant,
) {
    let atom = *state.selected.last().expect("a basis was just committed");
    trace.push(TraceRecord {
        k: state.selected.len(),
        atom,
        basis: state.dict.atom(atom),
        score: *state.chosen_scores.last().expect("score recorded with basis"),
        scored,
        seconds: start.elapsed().as_secs_f64(),
    });
}

pub(crate) fn finish(state: DoompState<'_>, trace: Vec<TraceRecord>, k: usize) -> Selection {
    state.into_selection(trace, k)
}

/// Plain greedy selection: every atom is rescored against every sample.
pub fn select_direct(samples: &SampleSet, cfg: &DnbsConfig, dict: &Dictionary) -> Result<Selection> {
    run_flat(Solver::Direct, samples, cfg, dict, None)
}

/// Exact recursive selection; same atoms as [`select_direct`], with a
/// per-candidate cost independent of the number of samples after `k = 1`.
pub fn select_iterative(
    samples: &SampleSet,
    cfg: &DnbsConfig,
    dict: &Dictionary,
) -> Result<Selection> {
    run_flat(Solver::Iterative, samples, cfg, dict, None)
}

/// Runs the direct or iterative solver, calling `observer` once per
/// iteration after scoring and before the pick.
pub fn select_with_observer(
    solver: Solver,
    samples: &SampleSet,
    cfg: &DnbsConfig,
    dict: &Dictionary,
    observer: &mut Observer<'_>,
) -> Result<Selection> {
    if solver == Solver::Hierarchical {
        return Err(Error::invalid(
            "observers are only supported for the direct and iterative solvers",
        ));
    }
    run_flat(solver, samples, cfg, dict, Some(observer))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_samples(rng: &mut ChaCha8Rng, w: usize, h: usize, nf: usize, nb: usize) -> SampleSet {
        let mut gen = |_| ImageTemplate::from_fn(w, h, |_, _| rng.random_range(0.0..255.0));
        let f = (0..nf).map(&mut gen).collect();
        let b = (0..nb).map(&mut gen).collect();
        SampleSet::new(f, b).unwrap()
    }

    /// Dense from-scratch score: materializes gamma_i and the residuals.
    fn dense_score(sub: &Subspace, atom: &HaarBox, samples: &SampleSet, lambda: f64) -> Option<f64> {
        let (w, h) = sub.dims();
        let gamma = sub.residual(&atom.to_dense(w, h)).unwrap();
        let d = gamma.norm_sqr();
        if d <= sub.tolerance() {
            return None;
        }
        let mut s = 0.0;
        for (x, wt) in samples.iter().zip(samples.weights(lambda)) {
            let e = sub.residual(x).unwrap();
            s += wt * gamma.dot(&e).powi(2) / d;
        }
        Some(s)
    }

    #[test]
    fn first_iteration_single_foreground_is_squared_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let samples = random_samples(&mut rng, 4, 3, 1, 0);
        let dict = Dictionary::new(4, 3).unwrap();
        let cfg = DnbsConfig { lambda: 0.0, ..Default::default() };
        let mut state = DoompState::new(&dict, &samples, &cfg).unwrap();
        state.score_all_direct();
        let ii = IntegralImage::new(&samples.foregrounds()[0]);
        for (i, b) in dict.atoms().iter().enumerate() {
            let p = crate::haar::haar_dot_image(b, &ii).unwrap();
            assert!((state.scores()[i] - p * p).abs() <= 1e-9 * p * p + 1e-12);
        }
    }

    #[test]
    fn last_step_is_unavailable_at_k1() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let samples = random_samples(&mut rng, 3, 3, 1, 1);
        let dict = Dictionary::new(3, 3).unwrap();
        let state = DoompState::new(&dict, &samples, &DnbsConfig::default()).unwrap();
        assert!(state.last_step().is_err());
    }

    #[test]
    fn exact_box_foreground_selects_that_box() {
        let target = HaarBox::new(2, 3, 3, 2);
        let f = target.to_dense(6, 5).blend(40.0, &ImageTemplate::zeros(6, 5), 0.0);
        let samples = SampleSet::new(vec![f], vec![]).unwrap();
        let dict = Dictionary::new(6, 5).unwrap();
        let cfg = DnbsConfig { k: 1, lambda: 0.0, ..Default::default() };
        for sel in [
            select_direct(&samples, &cfg, &dict).unwrap(),
            select_iterative(&samples, &cfg, &dict).unwrap(),
        ] {
            assert_eq!(sel.subspace.bases(), &[target]);
            assert_eq!(sel.status, SelectionStatus::Complete);
        }
    }

    #[test]
    fn direct_scores_match_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let samples = random_samples(&mut rng, 8, 8, 2, 2);
        let dict = Dictionary::new(8, 8).unwrap();
        let cfg = DnbsConfig { k: 4, lambda: 0.25, ..Default::default() };
        let mut checked = 0;
        let mut obs = |st: &DoompState<'_>| {
            for i in (0..dict.len()).step_by(37) {
                let oracle = dense_score(st.subspace(), &dict.atom(i), &samples, 0.25);
                match oracle {
                    Some(o) if !st.is_excluded(i) => {
                        let s = st.scores()[i];
                        assert!((s - o).abs() <= 1e-8 * o.abs().max(1.0), "{s} vs {o}");
                        checked += 1;
                    }
                    _ => {}
                }
            }
        };
        select_with_observer(Solver::Direct, &samples, &cfg, &dict, &mut obs).unwrap();
        assert!(checked > 100);
    }

    #[test]
    fn ik_and_sk_match_direct_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let samples = random_samples(&mut rng, 5, 4, 3, 2);
        let dict = Dictionary::new(5, 4).unwrap();
        let lambda = 0.25;
        let cfg = DnbsConfig { k: 3, lambda, ..Default::default() };
        let mut state = DoompState::new(&dict, &samples, &cfg).unwrap();
        state.score_all_direct();
        let first = state.best_atom().unwrap();
        let before: Vec<Vec<f64>> = state.residuals().to_vec();
        state.commit(first).unwrap();
        let phi = &state.subspace().ortho_residuals()[0];
        let step = state.last_step().unwrap();

        let mut ik = vec![0.0; 20];
        let mut sk = 0.0;
        for (j, x) in samples.iter().enumerate() {
            let wt = if j < 3 { 1.0 / 3.0 } else { -lambda / 2.0 };
            let alpha = phi.dot(x);
            sk += wt * alpha * alpha;
            for p in 0..20 {
                ik[p] += wt * alpha * before[j][p];
            }
        }
        assert!((step.sk() - sk).abs() <= 1e-10 * sk.abs().max(1.0));
        for (a, b) in step.ik().iter().zip(&ik) {
            assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
        }
    }

    #[test]
    fn ik_single_foreground_and_lambda_zero() {
        let r = vec![vec![1.0, 2.0, 3.0]];
        assert_eq!(precompute_ik(&r, &[2.0], &[1.0]), vec![2.0, 4.0, 6.0]);
        assert_eq!(precompute_sk(&[3.0], &[1.0]), 9.0);
        let rb = vec![vec![1.0, 1.0], vec![5.0, 7.0]];
        // a zero background weight drops the background entirely
        assert_eq!(precompute_ik(&rb, &[1.0, 4.0], &[1.0, 0.0]), vec![1.0, 1.0]);
        assert_eq!(precompute_sk(&[1.0, 4.0], &[1.0, 0.0]), 1.0);
    }

    #[test]
    fn orthogonal_atom_keeps_its_score() {
        // a basis on the left half leaves atoms on the right half untouched
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let samples = random_samples(&mut rng, 4, 2, 1, 1);
        let dict = Dictionary::new(4, 2).unwrap();
        let mut state = DoompState::new(&dict, &samples, &DnbsConfig::default()).unwrap();
        state.score_all_direct();
        let left = dict.index_of(&HaarBox::new(1, 1, 2, 2)).unwrap();
        let right = dict.index_of(&HaarBox::new(3, 1, 2, 2)).unwrap();
        let before = state.scores()[right];
        state.commit(left).unwrap();
        state.rescore_all();
        assert!((state.scores()[right] - before).abs() <= 1e-12 * before.abs());
        assert_eq!(state.denominators()[right], 1.0);
    }

    #[test]
    fn iterative_matches_direct_on_2x2() {
        let samples = SampleSet::new(
            vec![ImageTemplate::new(2, 2, vec![5.0, 1.0, 1.0, 1.0]).unwrap()],
            vec![ImageTemplate::new(2, 2, vec![0.0, 3.0, 2.0, 1.0]).unwrap()],
        )
        .unwrap();
        let dict = Dictionary::new(2, 2).unwrap();
        let cfg = DnbsConfig { k: 2, lambda: 0.5, ..Default::default() };
        let mut direct = DoompState::new(&dict, &samples, &cfg).unwrap();
        let mut iter = DoompState::new(&dict, &samples, &cfg).unwrap();
        direct.score_all_direct();
        iter.score_all_direct();
        let first = direct.best_atom().unwrap();
        direct.commit(first).unwrap();
        iter.commit(first).unwrap();
        direct.update_all_denominators();
        direct.score_all_direct();
        iter.rescore_all();
        for i in 0..dict.len() {
            let (a, b) = (direct.scores()[i], iter.scores()[i]);
            if a.is_finite() || b.is_finite() {
                assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "atom {i}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn early_stop_when_dictionary_is_exhausted() {
        let samples = SampleSet::new(vec![ImageTemplate::new(2, 1, vec![3.0, 1.0]).unwrap()], vec![]).unwrap();
        let dict = Dictionary::new(2, 1).unwrap();
        let cfg = DnbsConfig { k: 5, lambda: 0.0, ..Default::default() };
        let sel = select_iterative(&samples, &cfg, &dict).unwrap();
        assert_eq!(sel.subspace.len(), 2);
        assert_eq!(sel.status, SelectionStatus::EarlyStop { requested: 5, achieved: 2 });
    }

    #[test]
    fn pick_best_breaks_ties_by_index() {
        let s = [1.0, 3.0, 2.0, 3.0 + 1e-12, f64::NEG_INFINITY];
        assert_eq!(pick_best(s.iter().copied().enumerate(), 1e-9), Some(1));
        assert_eq!(pick_best(s.iter().copied().enumerate(), 0.0), Some(3));
        assert_eq!(pick_best([f64::NEG_INFINITY].iter().copied().enumerate(), 0.0), None);
    }

    #[test]
    fn config_validation() {
        assert!(DnbsConfig { k: 0, ..Default::default() }.validate().is_err());
        assert!(DnbsConfig { lambda: -1.0, ..Default::default() }.validate().is_err());
        assert!("hierarchical".parse::<Solver>().is_ok());
        assert!("greedy".parse::<Solver>().is_err());
    }
}
