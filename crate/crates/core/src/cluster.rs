//! μ-near clustering of the box dictionary and hierarchical selection.
//!
//! The μ-near set of a center box `c` holds every box `psi` with
//! `<psi, c> >= μ`. [`mu_near_set_fast`] enumerates it from the geometry of
//! the common rectangle instead of scanning the dictionary: with the common
//! rectangle `(x, y, w, h)` inside `c` and margins `(l, r, t, b)` extending it
//! to `psi`, membership requires
//!
//! ```text
//! w h >= μ² w_c h_c        (w + l + r)(h + t + b) <= (w h)² / (μ² w_c h_c)
//! ```
//!
//! and a margin can only be non-zero on a side where the common rectangle
//! touches the edge of `c`.

use std::collections::HashMap;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::doomp::{
    commit_best, finish, pick_best, record, DnbsConfig, DoompState, RecursionStep, Selection,
};
use crate::error::{Error, Result};
use crate::haar::{haar_dot_haar, Dictionary, HaarBox};
use crate::subspace::SampleSet;

fn check_mu(mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::invalid(format!("mu must lie in (0, 1], got {mu}")));
    }
    Ok(())
}

#[inline]
fn is_mu_near(a: &HaarBox, b: &HaarBox, mu: f64) -> bool {
    haar_dot_haar(a, b) >= mu
}

/// Exact μ-near set of atom `center` by scanning the whole dictionary.
pub fn mu_near_set_bruteforce(dict: &Dictionary, center: usize, mu: f64) -> Result<Vec<usize>> {
    check_mu(mu)?;
    let c = dict.atom(center);
    Ok(dict
        .atoms()
        .iter()
        .enumerate()
        .filter(|(_, b)| is_mu_near(b, &c, mu))
        .map(|(i, _)| i)
        .collect())
}

/// Result of a geometric μ-near query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MuNearQuery {
    /// Matching atom indices, ascending.
    pub members: Vec<usize>,
    /// Number of candidate boxes whose inner product was evaluated.
    pub evaluated: usize,
}

// Real-valued margin bounds are floored after adding this slack, so rounding
// in the bound never drops a member; the exact test runs on every candidate.
const BOUND_SLACK: f64 = 1e-9;

#[inline]
fn margin_bound(value: f64, limit: u32) -> u32 {
    let v = (value + BOUND_SLACK).floor();
    if v <= 0.0 {
        0
    } else {
        (v as u64).min(u64::from(limit)) as u32
    }
}

/// μ-near set of atom `center`, enumerated from common rectangles and margins.
/// Always equal to [`mu_near_set_bruteforce`].
pub fn mu_near_set_fast(dict: &Dictionary, center: usize, mu: f64) -> Result<MuNearQuery> {
    check_mu(mu)?;
    let c = dict.atom(center);
    let (fw, fh) = (dict.width() as u32, dict.height() as u32);
    // 0-based, half-open extents of the center
    let (cx0, cy0) = (c.u0 - 1, c.v0 - 1);
    let (cx1, cy1) = (cx0 + c.w, cy0 + c.h);
    let mu2_area = mu * mu * c.area() as f64;

    let mut members = Vec::new();
    let mut evaluated = 0usize;
    for wi in 1..=c.w {
        for hi in 1..=c.h {
            let common = f64::from(wi) * f64::from(hi);
            if common + BOUND_SLACK < mu2_area {
                continue;
            }
            let a_sup = common * common / mu2_area;
            for xi in cx0..=cx1 - wi {
                let left_free = xi == cx0;
                let right_free = xi + wi == cx1;
                let width_slack = a_sup / f64::from(hi) - f64::from(wi);
                let l_max = if left_free { margin_bound(width_slack, xi) } else { 0 };
                for yi in cy0..=cy1 - hi {
                    let top_free = yi == cy0;
                    let bottom_free = yi + hi == cy1;
                    for l in 0..=l_max {
                        let r_max = if right_free {
                            margin_bound(width_slack - f64::from(l), fw - (xi + wi))
                        } else {
                            0
                        };
                        for r in 0..=r_max {
                            let wp = wi + l + r;
                            let height_slack = a_sup / f64::from(wp) - f64::from(hi);
                            let t_max = if top_free { margin_bound(height_slack, yi) } else { 0 };
                            for t in 0..=t_max {
                                let b_max = if bottom_free {
                                    margin_bound(height_slack - f64::from(t), fh - (yi + hi))
                                } else {
                                    0
                                };
                                for b in 0..=b_max {
                                    let psi = HaarBox::new(xi - l + 1, yi - t + 1, wp, hi + t + b);
                                    evaluated += 1;
                                    if is_mu_near(&psi, &c, mu) {
                                        let idx = dict
                                            .index_of(&psi)
                                            .expect("enumerated boxes stay inside the frame");
                                        members.push(idx);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    members.sort_unstable();
    Ok(MuNearQuery { members, evaluated })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub center: usize,
    /// Ascending atom indices, including the center.
    pub members: Vec<usize>,
}

/// A partition of the dictionary into μ-near clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterIndex {
    pub width: usize,
    pub height: usize,
    pub mu: f64,
    pub seed: u64,
    pub clusters: Vec<Cluster>,
}

impl ClusterIndex {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ClusterIndex> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Checks the partition and membership invariants against `dict`.
    pub fn validate(&self, dict: &Dictionary) -> Result<()> {
        if (self.width, self.height) != dict.dims() {
            return Err(Error::ShapeMismatch {
                expected: dict.dims(),
                got: (self.width, self.height),
            });
        }
        let mut seen = vec![false; dict.len()];
        for cl in &self.clusters {
            let c = dict.atom(cl.center);
            if !cl.members.contains(&cl.center) {
                return Err(Error::invalid(format!("center {} missing from its cluster", cl.center)));
            }
            for &m in &cl.members {
                if m >= dict.len() || std::mem::replace(&mut seen[m], true) {
                    return Err(Error::invalid(format!("atom {m} assigned twice or out of range")));
                }
                if !is_mu_near(&dict.atom(m), &c, self.mu) {
                    return Err(Error::invalid(format!(
                        "atom {m} is not {}-near its center {}",
                        self.mu, cl.center
                    )));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::invalid(format!("atom {missing} is in no cluster")));
        }
        Ok(())
    }
}

/// Groups the dictionary: repeatedly pick a random remaining atom as center
/// and move every remaining atom of its μ-near set into its cluster.
pub fn cluster_dictionary(dict: &Dictionary, mu: f64, seed: u64) -> Result<ClusterIndex> {
    check_mu(mu)?;
    let n = dict.len();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut slot: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clusters = Vec::new();
    while !remaining.is_empty() {
        let center = remaining[rng.random_range(0..remaining.len())];
        let near = mu_near_set_fast(dict, center, mu)?;
        let mut members = Vec::new();
        for m in near.members {
            let pos = slot[m];
            if pos == usize::MAX {
                continue;
            }
            members.push(m);
            let last = *remaining.last().expect("non-empty");
            remaining.swap_remove(pos);
            if last != m {
                slot[last] = pos;
            }
            slot[m] = usize::MAX;
        }
        clusters.push(Cluster { center, members });
    }
    Ok(ClusterIndex {
        width: dict.width(),
        height: dict.height(),
        mu,
        seed,
        clusters,
    })
}

/// Which atoms an expanded cluster contributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Expansion {
    /// The cluster's stored members.
    #[default]
    Members,
    /// The full μ-near set of the center, including atoms owned by other
    /// clusters.
    MuNearSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HierConfig {
    /// Pruning slack: clusters whose center scores above
    /// `L_max - ratio * |L_max|` are searched.
    pub ratio: f64,
    pub mu: f64,
    pub expansion: Expansion,
}

impl Default for HierConfig {
    fn default() -> Self {
        HierConfig {
            ratio: 0.5,
            mu: 0.7,
            expansion: Expansion::Members,
        }
    }
}

impl HierConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.ratio >= 0.0) {
            return Err(Error::invalid(format!("ratio must be >= 0, got {}", self.ratio)));
        }
        check_mu(self.mu)
    }
}

/// Brings atom `i` up to the current iteration by replaying the recursion
/// steps it missed. Returns its score, or `None` if it is (now) excluded.
fn refresh(
    state: &mut DoompState<'_>,
    history: &[RecursionStep],
    fresh: &mut [usize],
    i: usize,
) -> Option<f64> {
    if state.excluded[i] {
        return None;
    }
    let current = state.iteration();
    let c = state.dict.corners()[i];
    let tol = state.tolerance();
    while fresh[i] < current {
        let step = &history[fresh[i] - 1];
        match step.rescore(&c, state.d[i], state.scores[i], tol) {
            Some((d, l)) => {
                state.d[i] = d;
                state.scores[i] = l;
                fresh[i] += 1;
            }
            None => {
                state.exclude(i);
                return None;
            }
        }
    }
    Some(state.scores[i])
}

/// Two-level selection: score cluster centers, then search only the clusters
/// whose centers are close to the best one.
pub fn select_hierarchical(
    samples: &SampleSet,
    cfg: &DnbsConfig,
    hier: &HierConfig,
    index: &ClusterIndex,
    dict: &Dictionary,
) -> Result<Selection> {
    hier.validate()?;
    if (index.width, index.height) != dict.dims() {
        return Err(Error::ShapeMismatch {
            expected: dict.dims(),
            got: (index.width, index.height),
        });
    }
    let mut state = DoompState::new(dict, samples, cfg)?;
    let mut trace = Vec::with_capacity(cfg.k);
    let mut history: Vec<RecursionStep> = Vec::with_capacity(cfg.k);
    let mut fresh = vec![1usize; dict.len()];
    let mut near_cache: HashMap<usize, Vec<usize>> = HashMap::new();

    // the first basis is chosen by exhaustive search
    let start = Instant::now();
    let scored = state.score_all_direct();
    if !commit_best(&mut state, |s| s.best_atom())? {
        return Ok(finish(state, trace, cfg.k));
    }
    record(&state, &mut trace, scored, start);
    history.push(state.take_last_step().expect("step after commit"));

    while state.iteration() <= cfg.k {
        let start = Instant::now();
        let mut scored = 0usize;
        let mut center_scores = Vec::with_capacity(index.len());
        for cl in &index.clusters {
            let s = refresh(&mut state, &history, &mut fresh, cl.center);
            scored += usize::from(s.is_some());
            center_scores.push(s);
        }
        let best_center = pick_best(
            center_scores
                .iter()
                .enumerate()
                .map(|(ci, s)| (ci, s.unwrap_or(f64::NEG_INFINITY))),
            0.0,
        );
        let threshold = match best_center.and_then(|ci| center_scores[ci]) {
            Some(l_max) if hier.ratio.is_finite() => l_max - hier.ratio * l_max.abs(),
            _ => f64::NEG_INFINITY,
        };

        let mut candidates: Vec<(usize, f64)> = Vec::new();
        for (ci, cl) in index.clusters.iter().enumerate() {
            if let Some(s) = center_scores[ci] {
                candidates.push((cl.center, s));
            }
            let expand = match center_scores[ci] {
                // excluded centers give no signal about their members
                None => true,
                Some(s) => Some(ci) == best_center || s > threshold || threshold == f64::NEG_INFINITY,
            };
            if !expand {
                continue;
            }
            let members = match hier.expansion {
                Expansion::Members => &cl.members,
                Expansion::MuNearSet => {
                    if !near_cache.contains_key(&cl.center) {
                        let q = mu_near_set_fast(dict, cl.center, index.mu)?;
                        near_cache.insert(cl.center, q.members);
                    }
                    &near_cache[&cl.center]
                }
            };
            for &m in members {
                if m == cl.center {
                    continue;
                }
                if let Some(s) = refresh(&mut state, &history, &mut fresh, m) {
                    scored += 1;
                    candidates.push((m, s));
                }
            }
        }
        candidates.sort_unstable_by_key(|&(i, _)| i);
        candidates.dedup_by_key(|&mut (i, _)| i);

        let tie = state.tie_band();
        let picked = commit_best(&mut state, |s| {
            pick_best(
                candidates
                    .iter()
                    .copied()
                    .filter(|&(i, _)| !s.is_excluded(i)),
                tie,
            )
        })?;
        if !picked {
            break;
        }
        record(&state, &mut trace, scored, start);
        history.push(state.take_last_step().expect("step after commit"));
    }
    Ok(finish(state, trace, cfg.k))
}
