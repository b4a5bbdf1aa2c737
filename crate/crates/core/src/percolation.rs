//! Window-crossing percolation of the connectivity graph.
//!
//! The target quantity is the critical relay fraction `p*`: the occupation
//! probability at which the street-bound connectivity graph first spans the
//! observation window. Spanning is measured by a crossing event: some
//! connected component touches both contact bands of the window (left and
//! right by default). The estimator sweeps the relay fraction `p` over a
//! grid, estimates the crossing probability at each grid point across many
//! independent replicates, forces monotonicity by isotonic regression, and
//! finds `p*` where the fitted curve passes one half.
//!
//! The sweep exploits the monotone coupling built into the samplers: within
//! one replicate every crossroad carries a fixed occupation level, and the
//! realization at fraction `p` consists of the crossroads with level below
//! `p`. Activating crossroads in level order while tracking components with
//! a union-find therefore yields the exact *crossing threshold* of the
//! replicate - the smallest level whose activation completes a crossing -
//! and the whole crossing curve of the replicate at once: it crosses at `p`
//! iff its threshold is below `p`. This is identical to re-simulating the
//! replicate at every grid point, only cheaper.

use std::collections::BTreeSet;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{Point, Window};
use crate::network::{
    build_graph, occupation_levels, ConnectivityGraph, MarkedUsers, NodeId, User, DEFAULT_LEVEL_CAP,
};
use crate::seeds::{self, replicate_seed, StreamKind};
use crate::street::{generate_pvt, StreetSystem, VertexId};
use crate::union_find::UnionFind;

/// Which sides of the window a component must touch to count as crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingDirection {
    /// One component touches both the left and the right contact band.
    LeftRight,
    /// One component touches both the top and the bottom contact band.
    TopBottom,
    /// Both of the above (not necessarily the same component).
    BothRequired,
}

/// Crossing event specification: direction plus the contact band width
/// (km). A node is in contact with a side when it lies within the band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingSpec {
    pub direction: CrossingDirection,
    pub contact_band: f64,
}

impl CrossingSpec {
    /// Validates the band against the window: it must be positive and less
    /// than a quarter of the crossed extent.
    pub fn validate(&self, window: &Window) -> Result<()> {
        let limit = match self.direction {
            CrossingDirection::LeftRight => window.width(),
            CrossingDirection::TopBottom => window.height(),
            CrossingDirection::BothRequired => window.width().min(window.height()),
        } / 4.0;
        if !(self.contact_band > 0.0 && self.contact_band < limit) {
            return Err(Error::InvalidInput(format!(
                "contact band must lie in (0, {limit}) km, got {}",
                self.contact_band
            )));
        }
        Ok(())
    }
}

const TOUCH_LEFT: u8 = 1;
const TOUCH_RIGHT: u8 = 2;
const TOUCH_TOP: u8 = 4;
const TOUCH_BOTTOM: u8 = 8;

fn contact_flags(p: Point, window: &Window, band: f64) -> u8 {
    let mut f = 0;
    if p.x <= window.x_min() + band {
        f |= TOUCH_LEFT;
    }
    if p.x >= window.x_max() - band {
        f |= TOUCH_RIGHT;
    }
    if p.y <= window.y_min() + band {
        f |= TOUCH_BOTTOM;
    }
    if p.y >= window.y_max() - band {
        f |= TOUCH_TOP;
    }
    f
}

fn spans_axis(f: u8, direction: CrossingDirection) -> (bool, bool) {
    let _ = direction;
    (
        f & TOUCH_LEFT != 0 && f & TOUCH_RIGHT != 0,
        f & TOUCH_TOP != 0 && f & TOUCH_BOTTOM != 0,
    )
}

/// The largest connected component of the graph: size and sorted members.
/// Ties go to the component containing the smallest node id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LargestComponent {
    pub size: usize,
    pub members: Vec<NodeId>,
}

/// Finds the largest connected component of `graph`.
pub fn largest_component(graph: &ConnectivityGraph) -> LargestComponent {
    let n = graph.node_count();
    if n == 0 {
        return LargestComponent {
            size: 0,
            members: Vec::new(),
        };
    }
    let mut uf = UnionFind::new(n);
    for a in 0..n {
        for &b in graph.neighbors(a) {
            uf.union(a as u32, b);
        }
    }
    let mut members_of_root: Vec<Vec<u32>> = vec![Vec::new(); n];
    for i in 0..n {
        let r = uf.find(i as u32);
        members_of_root[r as usize].push(i as u32);
    }
    // Densely indexed nodes are in NodeId order, so scanning roots by the
    // smallest member index realizes the smallest-node-id tie-break.
    let mut best: &Vec<u32> = &members_of_root[uf.find(0) as usize];
    for list in &members_of_root {
        if list.len() > best.len() {
            best = list;
        }
    }
    LargestComponent {
        size: best.len(),
        members: best.iter().map(|&i| graph.nodes()[i as usize]).collect(),
    }
}

/// True iff `graph` crosses `window` per `spec`.
pub fn crossing_indicator(
    graph: &ConnectivityGraph,
    window: &Window,
    spec: &CrossingSpec,
) -> Result<bool> {
    spec.validate(window)?;
    let n = graph.node_count();
    let mut uf = UnionFind::new(n);
    for a in 0..n {
        for &b in graph.neighbors(a) {
            uf.union(a as u32, b);
        }
    }
    let mut flags = vec![0u8; n];
    for i in 0..n {
        let r = uf.find(i as u32) as usize;
        flags[r] |= contact_flags(graph.position(i), window, spec.contact_band);
    }
    let mut has_lr = false;
    let mut has_tb = false;
    for (i, &f) in flags.iter().enumerate() {
        if uf.find(i as u32) as usize != i {
            continue;
        }
        let (lr, tb) = spans_axis(f, spec.direction);
        has_lr |= lr;
        has_tb |= tb;
    }
    Ok(match spec.direction {
        CrossingDirection::LeftRight => has_lr,
        CrossingDirection::TopBottom => has_tb,
        CrossingDirection::BothRequired => has_lr && has_tb,
    })
}

/// Parameters of a percolation Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PercolationParams {
    /// Street length intensity (km per km^2).
    pub gamma: f64,
    /// User intensity (per km of street).
    pub lambda: f64,
    /// Communication range (km).
    pub r: f64,
    /// Observation window; use margin 0 so crossroads extend to the frame.
    pub window: Window,
    /// Independent replicates per grid point.
    pub replicates: u32,
    /// Master seed; replicate `i` derives its own seed from it.
    pub master_seed: u64,
    /// Crossing event; band defaults to the communication range.
    pub spec: CrossingSpec,
    /// Ceiling intensity for the coupled user process.
    pub level_cap: f64,
    /// Bootstrap resamples behind the reported standard error.
    pub bootstrap: u32,
}

impl PercolationParams {
    /// Standard setup: left-right crossing, contact band `r`, default level
    /// cap, 200 bootstrap resamples.
    ///
    /// For `r = 0` the band falls back to an eighth of the smaller window
    /// side (a band must be positive); the crossing result does not depend
    /// on that choice because zero-range devices form no links at all, so no
    /// component can ever touch both sides.
    pub fn new(
        gamma: f64,
        lambda: f64,
        r: f64,
        window: Window,
        replicates: u32,
        master_seed: u64,
    ) -> Self {
        let contact_band = if r > 0.0 {
            r
        } else {
            window.width().min(window.height()) / 8.0
        };
        PercolationParams {
            gamma,
            lambda,
            r,
            window,
            replicates,
            master_seed,
            spec: CrossingSpec {
                direction: CrossingDirection::LeftRight,
                contact_band,
            },
            level_cap: DEFAULT_LEVEL_CAP,
            bootstrap: 200,
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.gamma.is_finite() || self.gamma <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "length intensity must be positive, got {}",
                self.gamma
            )));
        }
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::InvalidInput(format!(
                "user intensity must be non-negative, got {}",
                self.lambda
            )));
        }
        if !self.r.is_finite() || self.r < 0.0 {
            return Err(Error::InvalidInput(format!(
                "communication range must be non-negative, got {}",
                self.r
            )));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidInput("need at least one replicate".into()));
        }
        self.spec.validate(&self.window)?;
        // Refuse windows whose finite-size bias would swamp the estimate.
        let expected_crossroads = self.gamma * self.gamma / 2.0 * self.window.interior().area();
        if expected_crossroads < 500.0 {
            return Err(Error::FiniteSize(format!(
                "window supports only {expected_crossroads:.0} expected crossroads; \
                 need at least 500 for a stable estimate"
            )));
        }
        Ok(())
    }

    fn cap(&self) -> f64 {
        self.level_cap.max(self.lambda)
    }
}

/// One grid point of the crossing curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    /// Relay fraction `p`.
    pub p: f64,
    /// Monotone (isotonic-fitted) crossing probability estimate.
    pub crossing_prob: f64,
    /// Binomial standard error at this point.
    pub std_error: f64,
    /// Replicates behind the estimate.
    pub replicates: u32,
}

/// Result of a critical-fraction estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct PercolationEstimate {
    /// Estimated critical relay fraction.
    pub p_star: f64,
    /// Bootstrap standard error of `p_star`.
    pub std_error: f64,
    /// The fitted crossing curve over the evaluation grid.
    pub curve: Vec<CurvePoint>,
    /// The window never crossed even with every crossroad occupied in more
    /// than half the replicates; `p_star` is reported as 1.
    pub never_percolates: bool,
    /// Users alone crossed the window in more than half the replicates;
    /// `p_star` is reported as 0.
    pub always_percolates: bool,
    pub replicates: u32,
    pub gamma: f64,
    pub lambda: f64,
    pub r: f64,
}

/// Per-replicate crossing thresholds for `params`, in replicate order.
///
/// The threshold of a replicate is the smallest occupation level whose
/// activation completes a crossing: `-1` when users alone already cross,
/// `+inf` when even all crossroads together do not.
fn crossing_thresholds(params: &PercolationParams) -> Result<Vec<f64>> {
    (0..params.replicates)
        .into_par_iter()
        .map(|i| replicate_threshold(params, i))
        .collect()
}

fn replicate_threshold(params: &PercolationParams, index: u32) -> Result<f64> {
    let seed = replicate_seed(params.master_seed, index as u64);
    let system = generate_pvt(params.gamma, &params.window, seed)?;
    let marked = MarkedUsers::sample(&system, params.cap(), seed)?;
    let users = marked.thin(params.lambda)?;
    let levels = occupation_levels(&system, seed);
    Ok(incremental_threshold(
        &system,
        &users,
        &levels,
        params.r,
        &params.window,
        &params.spec,
    ))
}

/// Sweeps the occupation levels of one realization in increasing order and
/// returns the level at which the crossing event first holds.
fn incremental_threshold(
    system: &StreetSystem,
    users: &[User],
    levels: &[(VertexId, f64)],
    r: f64,
    window: &Window,
    spec: &CrossingSpec,
) -> f64 {
    let n_users = users.len();
    let n_cross = levels.len();
    let mut uf = UnionFind::new(n_users + n_cross);
    let mut flags = vec![0u8; n_users + n_cross];
    let mut has_lr = false;
    let mut has_tb = false;

    let unite = |uf: &mut UnionFind,
                 flags: &mut Vec<u8>,
                 has_lr: &mut bool,
                 has_tb: &mut bool,
                 a: u32,
                 b: u32| {
        let ra = uf.find(a);
        let rb = uf.find(b);
        if ra == rb {
            return;
        }
        let merged = flags[ra as usize] | flags[rb as usize];
        let winner = uf.union(ra, rb);
        flags[winner as usize] = merged;
        let (lr, tb) = spans_axis(merged, spec.direction);
        *has_lr |= lr;
        *has_tb |= tb;
    };
    let crossed = |has_lr: bool, has_tb: bool| match spec.direction {
        CrossingDirection::LeftRight => has_lr,
        CrossingDirection::TopBottom => has_tb,
        CrossingDirection::BothRequired => has_lr && has_tb,
    };

    for (i, u) in users.iter().enumerate() {
        flags[i] = contact_flags(u.pos, window, spec.contact_band);
        let (lr, tb) = spans_axis(flags[i], spec.direction);
        has_lr |= lr;
        has_tb |= tb;
    }

    // Users grouped by edge, ascending offset.
    let mut by_edge: Vec<Vec<u32>> = vec![Vec::new(); system.edges().len()];
    for (i, u) in users.iter().enumerate() {
        by_edge[u.edge.0 as usize].push(i as u32);
    }
    for list in &mut by_edge {
        list.sort_by(|&i, &j| {
            users[i as usize]
                .offset
                .total_cmp(&users[j as usize].offset)
        });
    }

    // Chain users along each street wherever consecutive gaps are in range.
    for list in &by_edge {
        for pair in list.windows(2) {
            let (i, j) = (pair[0], pair[1]);
            if users[j as usize].offset - users[i as usize].offset <= r {
                unite(&mut uf, &mut flags, &mut has_lr, &mut has_tb, i, j);
            }
        }
    }
    if crossed(has_lr, has_tb) {
        return -1.0; // users alone span the window
    }

    // Per crossroad: the users it would link to on activation (the nearest
    // user per incident street end suffices, farther ones are chained to
    // it) and the adjacent crossroads it would see along short streets.
    let mut dense_of_vertex = vec![u32::MAX; system.vertices().len()];
    for (j, &(vid, _)) in levels.iter().enumerate() {
        dense_of_vertex[vid.0 as usize] = (n_users + j) as u32;
    }
    let mut anchors: Vec<Vec<u32>> = vec![Vec::new(); n_cross];
    let mut vertex_pairs: Vec<Vec<u32>> = vec![Vec::new(); n_cross];
    for (j, &(vid, _)) in levels.iter().enumerate() {
        for &eid in system.incident_edges(vid) {
            let e = system.edge(eid);
            let list = &by_edge[eid.0 as usize];
            if e.a == vid {
                if let Some(&first) = list.first() {
                    if users[first as usize].offset <= r {
                        anchors[j].push(first);
                    }
                }
            } else if let Some(&last) = list.last() {
                if e.length - users[last as usize].offset <= r {
                    anchors[j].push(last);
                }
            }
            if e.length <= r {
                let other = dense_of_vertex[system.opposite(eid, vid).0 as usize];
                if other != u32::MAX {
                    vertex_pairs[j].push(other);
                }
            }
        }
    }

    // Activate crossroads in increasing level order.
    let mut order: Vec<u32> = (0..n_cross as u32).collect();
    order.sort_by(|&a, &b| levels[a as usize].1.total_cmp(&levels[b as usize].1));
    let mut active = vec![false; n_cross];
    for &j in &order {
        let dense = (n_users + j as usize) as u32;
        let (vid, level) = levels[j as usize];
        flags[dense as usize] = contact_flags(system.vertex(vid).pos, window, spec.contact_band);
        {
            let (lr, tb) = spans_axis(flags[dense as usize], spec.direction);
            has_lr |= lr;
            has_tb |= tb;
        }
        active[j as usize] = true;
        for &a in &anchors[j as usize] {
            unite(&mut uf, &mut flags, &mut has_lr, &mut has_tb, dense, a);
        }
        for &other in &vertex_pairs[j as usize] {
            if active[other as usize - n_users] {
                unite(&mut uf, &mut flags, &mut has_lr, &mut has_tb, dense, other);
            }
        }
        if crossed(has_lr, has_tb) {
            return level;
        }
    }
    f64::INFINITY
}

/// Fraction of thresholds strictly below `p` (a crossroad with level `u` is
/// occupied at fraction `p` iff `u < p`).
fn empirical_crossing(thresholds: &[f64], p: f64) -> f64 {
    thresholds.iter().filter(|&&t| t < p).count() as f64 / thresholds.len() as f64
}

/// Pool-adjacent-violators isotonic regression (equal weights, ascending).
fn isotonic(values: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, f64)> = Vec::with_capacity(values.len()); // (mean, weight)
    for &v in values {
        let mut mean = v;
        let mut weight = 1.0;
        while let Some(&(m, w)) = blocks.last() {
            if m <= mean {
                break;
            }
            blocks.pop();
            mean = (m * w + mean * weight) / (w + weight);
            weight += w;
        }
        blocks.push((mean, weight));
    }
    let mut out = Vec::with_capacity(values.len());
    for (mean, weight) in blocks {
        for _ in 0..weight as usize {
            out.push(mean);
        }
    }
    out
}

/// First crossing of level 0.5 by linear interpolation on the fitted curve.
fn interpolate_half(grid: &[f64], fitted: &[f64]) -> f64 {
    let k = fitted
        .iter()
        .position(|&q| q >= 0.5)
        .expect("curve reaches 0.5 by construction");
    if k == 0 {
        return grid[0];
    }
    let (p0, q0) = (grid[k - 1], fitted[k - 1]);
    let (p1, q1) = (grid[k], fitted[k]);
    p0 + (0.5 - q0) / (q1 - q0) * (p1 - p0)
}

/// Extracts a point estimate from thresholds on a grid: flags first, then
/// isotonic fit and interpolation.
fn point_estimate(thresholds: &[f64], grid: &[f64]) -> f64 {
    let raw: Vec<f64> = grid
        .iter()
        .map(|&p| empirical_crossing(thresholds, p))
        .collect();
    if raw[raw.len() - 1] < 0.5 {
        return 1.0;
    }
    if raw[0] > 0.5 {
        return 0.0;
    }
    interpolate_half(grid, &isotonic(&raw))
}

/// Estimates the critical relay fraction `p*` for `params`.
///
/// The evaluation grid is `0, 0.1, ..., 1`, refined by seven extra points
/// (step 0.0125) inside the bracket where the curve passes one half. The
/// standard error is a bootstrap over replicates (resampling thresholds,
/// refitting the curve, re-extracting the estimate). When the crossing
/// probability at `p = 1` stays below one half the run is flagged
/// `never_percolates` (and `p_star = 1`); when users alone cross more than
/// half the time it is flagged `always_percolates` (`p_star = 0`).
pub fn estimate_p_star(params: &PercolationParams) -> Result<PercolationEstimate> {
    params.validate()?;
    let thresholds = crossing_thresholds(params)?;
    let n = params.replicates as f64;

    let mut grid: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    let q1 = empirical_crossing(&thresholds, 1.0);
    let q0 = empirical_crossing(&thresholds, 0.0);
    let never = q1 < 0.5;
    let always = q0 > 0.5;
    if !never && !always {
        // Refine the bracket in which the raw curve passes one half.
        let k = grid
            .iter()
            .position(|&p| empirical_crossing(&thresholds, p) >= 0.5)
            .expect("q reaches 0.5 at p = 1");
        if k > 0 {
            let lo = grid[k - 1];
            for m in 1..=7 {
                grid.push(lo + 0.0125 * m as f64);
            }
            grid.sort_by(f64::total_cmp);
        }
    }

    let raw: Vec<f64> = grid
        .iter()
        .map(|&p| empirical_crossing(&thresholds, p))
        .collect();
    let fitted = isotonic(&raw);
    let curve: Vec<CurvePoint> = grid
        .iter()
        .zip(&fitted)
        .map(|(&p, &q)| CurvePoint {
            p,
            crossing_prob: q,
            std_error: (q * (1.0 - q) / n).sqrt(),
            replicates: params.replicates,
        })
        .collect();

    let p_star = if never {
        1.0
    } else if always {
        0.0
    } else {
        interpolate_half(&grid, &fitted)
    };

    // Bootstrap the whole extraction pipeline over replicates.
    let std_error = if params.bootstrap > 0 {
        let mut rng = seeds::stream(params.master_seed, StreamKind::Bootstrap, 0);
        let count = thresholds.len();
        let mut estimates = Vec::with_capacity(params.bootstrap as usize);
        let mut resample = Vec::with_capacity(count);
        for _ in 0..params.bootstrap {
            resample.clear();
            for _ in 0..count {
                resample.push(thresholds[rng.random_range(0..count)]);
            }
            estimates.push(point_estimate(&resample, &grid));
        }
        let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
        let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>()
            / (estimates.len() - 1).max(1) as f64;
        var.sqrt()
    } else {
        0.0
    };

    Ok(PercolationEstimate {
        p_star,
        std_error,
        curve,
        never_percolates: never,
        always_percolates: always,
        replicates: params.replicates,
        gamma: params.gamma,
        lambda: params.lambda,
        r: params.r,
    })
}

/// Monte Carlo crossing probability at a single relay fraction `p`;
/// returns `(estimate, binomial standard error)`.
pub fn crossing_probability(params: &PercolationParams, p: f64) -> Result<(f64, f64)> {
    params.validate()?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidInput(format!(
            "relay fraction must lie in [0, 1], got {p}"
        )));
    }
    let thresholds = crossing_thresholds(params)?;
    let est = empirical_crossing(&thresholds, p);
    let se = (est * (1.0 - est) / params.replicates as f64).sqrt();
    Ok((est, se))
}

/// Crossing indicator of one fully materialised replicate, built the slow
/// way (explicit graph). Used to cross-check the incremental sweep.
pub fn replicate_crossing_direct(params: &PercolationParams, index: u32, p: f64) -> Result<bool> {
    let seed = replicate_seed(params.master_seed, index as u64);
    let system = generate_pvt(params.gamma, &params.window, seed)?;
    let marked = MarkedUsers::sample(&system, params.cap(), seed)?;
    let users = marked.thin(params.lambda)?;
    let occupied: BTreeSet<VertexId> = occupation_levels(&system, seed)
        .into_iter()
        .filter(|&(_, level)| level < p)
        .map(|(id, _)| id)
        .collect();
    let graph = build_graph(&system, &users, &occupied, params.r)?;
    crossing_indicator(&graph, &params.window, &params.spec)
}

/// Threshold of one replicate, exposed for equivalence tests between the
/// incremental sweep and direct graph construction.
pub fn replicate_crossing_threshold(params: &PercolationParams, index: u32) -> Result<f64> {
    replicate_threshold(params, index)
}
