//! Users, relays and the line-of-sight connectivity graph.
//!
//! Users live on street edges (a Poisson process along the street axis of
//! intensity `lambda` per km); relays occupy crossroads, each independently
//! with probability `p`. Connectivity is strictly street-bound: two devices
//! communicate only if they share a street and are within range `r`, or if
//! one is a relay at a crossroad of the other's street within range. Relays
//! at the two ends of a short street see each other along it.
//!
//! Both sampling stages attach independent uniform *levels* to their
//! entities. A user is present at intensity `lambda` iff its level is below
//! `lambda`; a crossroad is occupied at relay fraction `p` iff its level is
//! below `p`. Thinning by level makes realizations across different
//! `lambda` or `p` nested (monotone coupling), which the percolation sweep
//! exploits to trace a whole crossing curve from one realization.

use std::collections::BTreeSet;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::seeds::{self, StreamKind};
use crate::street::{EdgeId, StreetSystem, VertexId};

/// Default ceiling intensity (users per km) at which the marked user
/// process is materialised; any `lambda` up to the cap can then be obtained
/// by thinning the same realization.
pub const DEFAULT_LEVEL_CAP: f64 = 256.0;

/// A user pinned to a street edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct User {
    pub edge: EdgeId,
    /// Distance (km) from the edge's `a` endpoint along the street.
    pub offset: f64,
    pub pos: Point,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct MarkedUser {
    edge: EdgeId,
    offset: f64,
    pos: Point,
    /// Intensity level in `[0, cap)`: the user exists at intensity
    /// `lambda` iff `level < lambda`.
    level: f64,
}

/// A maximal user realization (at the cap intensity) with thinning levels.
#[derive(Debug, Clone)]
pub struct MarkedUsers {
    cap: f64,
    users: Vec<MarkedUser>,
}

impl MarkedUsers {
    /// Samples the user process at intensity `cap` on every edge of
    /// `system`, with i.i.d. levels, deterministically in `seed`. Each edge
    /// draws from its own stream, so the realization on one edge does not
    /// depend on how many users other edges received.
    pub fn sample(system: &StreetSystem, cap: f64, seed: u64) -> Result<Self> {
        if !cap.is_finite() || cap <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "level cap must be positive, got {cap}"
            )));
        }
        let mut users = Vec::new();
        for e in system.edges() {
            let mut rng = seeds::stream(seed, StreamKind::Users, e.id.0 as u64);
            let mean = cap * e.length;
            let count = Poisson::new(mean)
                .expect("positive Poisson mean")
                .sample(&mut rng) as usize;
            let pa = system.vertex(e.a).pos;
            let pb = system.vertex(e.b).pos;
            let mut on_edge = Vec::with_capacity(count);
            for _ in 0..count {
                let offset = rng.random_range(0.0..e.length);
                let level = rng.random_range(0.0..cap);
                let t = offset / e.length;
                on_edge.push(MarkedUser {
                    edge: e.id,
                    offset,
                    pos: Point::new(pa.x + t * (pb.x - pa.x), pa.y + t * (pb.y - pa.y)),
                    level,
                });
            }
            on_edge.sort_by(|u, v| u.offset.total_cmp(&v.offset));
            users.extend(on_edge);
        }
        Ok(MarkedUsers { cap, users })
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    /// Users present at intensity `lambda`, sorted by `(edge, offset)`.
    pub fn thin(&self, lambda: f64) -> Result<Vec<User>> {
        if !(0.0..=self.cap).contains(&lambda) {
            return Err(Error::InvalidInput(format!(
                "intensity {lambda} outside [0, cap = {}]",
                self.cap
            )));
        }
        Ok(self
            .users
            .iter()
            .filter(|u| u.level < lambda)
            .map(|u| User {
                edge: u.edge,
                offset: u.offset,
                pos: u.pos,
            })
            .collect())
    }
}

/// Samples users at intensity `lambda` per km of street (sorted by
/// `(edge, offset)`), deterministically in `seed`.
///
/// Equivalent to thinning a [`MarkedUsers`] realization whose cap is
/// `max(lambda, DEFAULT_LEVEL_CAP)`; callers comparing intensities under a
/// common seed get nested realizations as long as they stay below the cap.
pub fn sample_users(system: &StreetSystem, lambda: f64, seed: u64) -> Result<Vec<User>> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidInput(format!(
            "user intensity must be non-negative, got {lambda}"
        )));
    }
    let cap = lambda.max(DEFAULT_LEVEL_CAP);
    MarkedUsers::sample(system, cap, seed)?.thin(lambda)
}

/// Uniform occupation level of every potentially occupiable vertex, in
/// vertex-id order: entry `(v, u)` says vertex `v` is relay-occupied at any
/// relay fraction `p > u`. Only non-boundary degree-3 vertices inside the
/// window interior (crossroads) are listed; boundary stubs never host
/// relays.
pub fn occupation_levels(system: &StreetSystem, seed: u64) -> Vec<(VertexId, f64)> {
    let mut rng = seeds::stream(seed, StreamKind::Occupation, 0);
    system
        .vertices()
        .iter()
        .map(|v| (v.id, rng.random_range(0.0..1.0)))
        .filter(|(id, _)| system.is_crossroad(*id))
        .collect()
}

/// Samples the relay-occupied crossroads at fraction `p`, deterministically
/// in `seed`; thinning [`occupation_levels`] by `p`. Realizations under a
/// common seed are nested across `p`.
pub fn sample_occupation(system: &StreetSystem, p: f64, seed: u64) -> Result<BTreeSet<VertexId>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidInput(format!(
            "relay fraction must lie in [0, 1], got {p}"
        )));
    }
    Ok(occupation_levels(system, seed)
        .into_iter()
        .filter(|&(_, level)| level < p)
        .map(|(id, _)| id)
        .collect())
}

/// A node of the connectivity graph.
///
/// The derived order (users before crossroads, each by index) is the
/// canonical node order used for deterministic tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeId {
    /// Index into the user slice the graph was built from.
    User(u32),
    /// An occupied crossroad.
    Crossroad(VertexId),
}

/// Street-bound line-of-sight connectivity graph over users and occupied
/// crossroads.
#[derive(Debug, Clone)]
pub struct ConnectivityGraph {
    nodes: Vec<NodeId>,
    positions: Vec<Point>,
    adjacency: Vec<Vec<u32>>,
}

impl ConnectivityGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Node identities in dense-index order (users first, then occupied
    /// crossroads by vertex id).
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn position(&self, node: usize) -> Point {
        self.positions[node]
    }

    /// Dense indices of the neighbors of `node`, ascending.
    pub fn neighbors(&self, node: usize) -> &[u32] {
        &self.adjacency[node]
    }
}

/// Builds the connectivity graph for `users` and `occupied` crossroads with
/// communication range `r` km.
///
/// Links exist only along streets: user-user on a common edge within `r`,
/// user-relay when the relay sits at an endpoint of the user's edge within
/// `r`, and relay-relay when they are the two endpoints of an edge no
/// longer than `r`. Distances along a street equal the Euclidean distance
/// since edges are straight; range comparisons are inclusive (`<= r`).
pub fn build_graph(
    system: &StreetSystem,
    users: &[User],
    occupied: &BTreeSet<VertexId>,
    r: f64,
) -> Result<ConnectivityGraph> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::InvalidInput(format!(
            "communication range must be non-negative, got {r}"
        )));
    }
    for v in occupied {
        if !system.is_crossroad(*v) {
            return Err(Error::InvalidInput(format!(
                "occupied vertex {} is not a crossroad",
                v.0
            )));
        }
    }

    let mut nodes: Vec<NodeId> = (0..users.len() as u32).map(NodeId::User).collect();
    let mut positions: Vec<Point> = users.iter().map(|u| u.pos).collect();
    let mut crossroad_index = std::collections::HashMap::new();
    for &v in occupied {
        crossroad_index.insert(v, nodes.len() as u32);
        nodes.push(NodeId::Crossroad(v));
        positions.push(system.vertex(v).pos);
    }

    let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); nodes.len()];
    let link = |adj: &mut Vec<Vec<u32>>, a: u32, b: u32| {
        adj[a as usize].push(b);
        adj[b as usize].push(a);
    };

    // Users grouped by edge, ascending offset.
    let mut by_edge: Vec<Vec<u32>> = vec![Vec::new(); system.edges().len()];
    for (i, u) in users.iter().enumerate() {
        if u.edge.0 as usize >= system.edges().len() {
            return Err(Error::InvalidInput(format!(
                "user {i} references missing edge {}",
                u.edge.0
            )));
        }
        by_edge[u.edge.0 as usize].push(i as u32);
    }
    for list in &mut by_edge {
        list.sort_by(|&i, &j| {
            users[i as usize]
                .offset
                .total_cmp(&users[j as usize].offset)
        });
    }

    for e in system.edges() {
        let list = &by_edge[e.id.0 as usize];
        // User-user along the street.
        for (k, &i) in list.iter().enumerate() {
            let oi = users[i as usize].offset;
            for &j in &list[k + 1..] {
                if users[j as usize].offset - oi <= r {
                    link(&mut adjacency, i, j);
                } else {
                    break;
                }
            }
        }
        // Users to occupied endpoints of their street.
        if let Some(&a_node) = crossroad_index.get(&e.a) {
            for &i in list {
                if users[i as usize].offset <= r {
                    link(&mut adjacency, i, a_node);
                } else {
                    break;
                }
            }
        }
        if let Some(&b_node) = crossroad_index.get(&e.b) {
            for &i in list.iter().rev() {
                if e.length - users[i as usize].offset <= r {
                    link(&mut adjacency, i, b_node);
                } else {
                    break;
                }
            }
        }
        // Both endpoints occupied and the street short enough: they see
        // each other along it.
        if e.length <= r {
            if let (Some(&a_node), Some(&b_node)) =
                (crossroad_index.get(&e.a), crossroad_index.get(&e.b))
            {
                link(&mut adjacency, a_node, b_node);
            }
        }
    }

    for list in &mut adjacency {
        list.sort_unstable();
        list.dedup();
    }

    Ok(ConnectivityGraph {
        nodes,
        positions,
        adjacency,
    })
}
