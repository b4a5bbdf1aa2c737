//! Poisson-Voronoi street systems.
//!
//! Streets are modelled as the edge set of a Voronoi tessellation whose
//! germs form a homogeneous Poisson process. The generator is parameterised
//! by the street length intensity `gamma` (kilometers of street per square
//! kilometer); the matching germ intensity is `gamma^2 / 4` per square
//! kilometer, which also fixes the other mean values of the tessellation:
//! `gamma^2 / 2` crossroads and `3 * gamma^2 / 4` street segments per square
//! kilometer, and a mean segment length of `4 / (3 * gamma)`.
//!
//! Systems are always clipped to a rectangular observation window. Clip
//! points are marked as boundary vertices so that estimators and the
//! occupation model can exclude them: interior vertices are degree-3
//! crossroads almost surely, boundary vertices are degree-1 street stubs.

mod voronoi;

use delaunator::Point as DPoint;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::crossroad::{CrossroadAngles, ANGLE_TOL};
use crate::error::{Error, Result};
use crate::geom::{Point, Window};
use crate::seeds::{self, StreamKind};

/// Index of a vertex within its street system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub u32);

/// Index of an edge within its street system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub u32);

/// A tessellation vertex: a crossroad candidate or a window clip point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex {
    pub id: VertexId,
    pub pos: Point,
    /// True for vertices created by clipping an edge at the window frame;
    /// they are street stubs, not crossroads, and are never occupied.
    pub boundary: bool,
}

/// A street segment between two vertices. `length` always equals the
/// Euclidean distance between the endpoint positions (kilometers).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub id: EdgeId,
    pub a: VertexId,
    pub b: VertexId,
    pub length: f64,
}

/// A street system clipped to its observation window.
#[derive(Debug, Clone)]
pub struct StreetSystem {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    incident: Vec<Vec<EdgeId>>,
    window: Window,
    gamma_target: f64,
    germ_intensity: f64,
}

impl StreetSystem {
    /// Assembles a system from explicit parts, validating referential
    /// integrity and length consistency. Used by the generator and by tests
    /// that build hand-crafted street layouts.
    pub fn from_parts(
        vertices: Vec<Vertex>,
        edges: Vec<Edge>,
        window: Window,
        gamma_target: f64,
        germ_intensity: f64,
    ) -> Result<Self> {
        if !gamma_target.is_finite() || gamma_target <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "target length intensity must be positive, got {gamma_target}"
            )));
        }
        if !germ_intensity.is_finite() || germ_intensity < 0.0 {
            return Err(Error::InvalidInput(format!(
                "germ intensity must be non-negative, got {germ_intensity}"
            )));
        }
        for (i, v) in vertices.iter().enumerate() {
            if v.id.0 as usize != i {
                return Err(Error::InvalidInput(format!(
                    "vertex id {} stored at index {i}",
                    v.id.0
                )));
            }
            if !v.pos.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "vertex {} has non-finite position",
                    v.id.0
                )));
            }
        }
        let mut incident: Vec<Vec<EdgeId>> = vec![Vec::new(); vertices.len()];
        for (i, e) in edges.iter().enumerate() {
            if e.id.0 as usize != i {
                return Err(Error::InvalidInput(format!(
                    "edge id {} stored at index {i}",
                    e.id.0
                )));
            }
            let (a, b) = (e.a.0 as usize, e.b.0 as usize);
            if a >= vertices.len() || b >= vertices.len() {
                return Err(Error::InvalidInput(format!(
                    "edge {} references missing vertex",
                    e.id.0
                )));
            }
            if e.a == e.b {
                return Err(Error::InvalidInput(format!("edge {} is a loop", e.id.0)));
            }
            let dist = vertices[a].pos.dist(vertices[b].pos);
            if !(e.length > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "edge {} has non-positive length {}",
                    e.id.0, e.length
                )));
            }
            if (e.length - dist).abs() > 1e-9 * e.length.max(1.0) {
                return Err(Error::InvalidInput(format!(
                    "edge {} length {} disagrees with endpoint distance {dist}",
                    e.id.0, e.length
                )));
            }
            incident[a].push(e.id);
            incident[b].push(e.id);
        }
        Ok(StreetSystem {
            vertices,
            edges,
            incident,
            window,
            gamma_target,
            germ_intensity,
        })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex(&self, id: VertexId) -> &Vertex {
        &self.vertices[id.0 as usize]
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id.0 as usize]
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    /// Street length intensity the generator aimed for (km per km^2).
    pub fn gamma_target(&self) -> f64 {
        self.gamma_target
    }

    /// Germ intensity of the underlying Poisson process (per km^2).
    pub fn germ_intensity(&self) -> f64 {
        self.germ_intensity
    }

    pub fn degree(&self, id: VertexId) -> usize {
        self.incident[id.0 as usize].len()
    }

    pub fn incident_edges(&self, id: VertexId) -> &[EdgeId] {
        &self.incident[id.0 as usize]
    }

    /// The other endpoint of `edge` as seen from `v`.
    pub fn opposite(&self, edge: EdgeId, v: VertexId) -> VertexId {
        let e = self.edge(edge);
        if e.a == v {
            e.b
        } else {
            e.a
        }
    }

    /// A crossroad is an interior degree-3 vertex strictly inside the
    /// window's margin interior; only crossroads can host relays.
    pub fn is_crossroad(&self, id: VertexId) -> bool {
        let v = self.vertex(id);
        !v.boundary && self.degree(id) == 3 && self.window.interior().contains_strict(v.pos)
    }

    /// Ids of all crossroads, in ascending id order.
    pub fn crossroad_ids(&self) -> Vec<VertexId> {
        self.vertices
            .iter()
            .filter(|v| self.is_crossroad(v.id))
            .map(|v| v.id)
            .collect()
    }

    /// Total street length inside the window (km); edges are pre-clipped,
    /// so this is simply the sum of edge lengths.
    pub fn total_street_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }
}

/// Generates a Poisson-Voronoi street system of length intensity `gamma`
/// (km per km^2) in `window`, deterministically in `seed`.
///
/// Germs are sampled on the window dilated by `3 / sqrt(germ intensity)` on
/// every side so that cells near the frame see the same germ neighborhood
/// they would in an infinite system; the streets are then clipped back to
/// the window. A window whose expected germ count is below one is rejected
/// as degenerate. A draw with fewer than three germs (possible, vanishingly
/// rare) yields an empty system.
pub fn generate_pvt(gamma: f64, window: &Window, seed: u64) -> Result<StreetSystem> {
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::Domain(format!(
            "length intensity must be positive, got {gamma}"
        )));
    }
    let germ_intensity = gamma * gamma / 4.0;
    if germ_intensity * window.area() < 1.0 {
        return Err(Error::DegenerateWindow(format!(
            "expected germ count {} below one; enlarge the window or increase gamma",
            germ_intensity * window.area()
        )));
    }
    let pad = 3.0 / germ_intensity.sqrt();
    let (x0, x1) = (window.x_min() - pad, window.x_max() + pad);
    let (y0, y1) = (window.y_min() - pad, window.y_max() + pad);
    let mean = germ_intensity * (x1 - x0) * (y1 - y0);

    let mut rng = seeds::stream(seed, StreamKind::Germs, 0);
    let count = Poisson::new(mean)
        .expect("positive Poisson mean")
        .sample(&mut rng) as usize;
    let germs: Vec<DPoint> = (0..count)
        .map(|_| DPoint {
            x: rng.random_range(x0..x1),
            y: rng.random_range(y0..y1),
        })
        .collect();

    let (vertices, edges) = if germs.len() < 3 {
        (Vec::new(), Vec::new())
    } else {
        voronoi::voronoi_streets(&germs, window)
    };
    StreetSystem::from_parts(vertices, edges, *window, gamma, germ_intensity)
}

/// Geometry estimators of one street system, all measured on the margin
/// interior of the window to suppress boundary effects.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreetStats {
    /// Area of the interior rectangle the estimators use (km^2).
    pub interior_area: f64,
    /// Crossroads strictly inside the interior.
    pub vertex_count: usize,
    /// Edges whose midpoint falls in the interior.
    pub edge_count: usize,
    /// Crossroads per km^2; estimates `gamma^2 / 2`.
    pub vertex_intensity: f64,
    /// Edges per km^2; estimates `3 * gamma^2 / 4`.
    pub edge_intensity: f64,
    /// Street length per km^2; estimates `gamma`.
    pub length_intensity: f64,
    /// Mean full length (km) of the midpoint-counted edges; estimates
    /// `4 / (3 * gamma)`.
    pub mean_edge_length: f64,
}

/// Measures the intensity estimators of `system` on its margin interior.
///
/// Edge counts use the midpoint rule (an edge belongs to the interior iff
/// its midpoint does) so every edge is attributed exactly once regardless of
/// window placement; length intensity clips each edge to the interior.
/// Errors if the interior contains no crossroad at all, since every
/// estimate would be meaningless on such a window.
pub fn street_stats(system: &StreetSystem) -> Result<StreetStats> {
    let interior = system.window().interior();
    let area = interior.area();

    let vertex_count = system
        .vertices()
        .iter()
        .filter(|v| system.is_crossroad(v.id))
        .count();
    if vertex_count == 0 {
        return Err(Error::DegenerateWindow(
            "no crossroads inside the window interior".into(),
        ));
    }

    let mut edge_count = 0usize;
    let mut length_sum = 0.0; // full lengths of midpoint-counted edges
    let mut clipped_length = 0.0; // street length inside the interior
    for e in system.edges() {
        let pa = system.vertex(e.a).pos;
        let pb = system.vertex(e.b).pos;
        let mid = Point::new(0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y));
        if interior.contains(mid) {
            edge_count += 1;
            length_sum += e.length;
        }
        let dir = Point::new(pb.x - pa.x, pb.y - pa.y);
        if let Some((t0, t1)) = interior.clip_line(pa, dir, 0.0, 1.0) {
            clipped_length += (t1 - t0) * e.length;
        }
    }

    Ok(StreetStats {
        interior_area: area,
        vertex_count,
        edge_count,
        vertex_intensity: vertex_count as f64 / area,
        edge_intensity: edge_count as f64 / area,
        length_intensity: clipped_length / area,
        mean_edge_length: if edge_count == 0 {
            0.0
        } else {
            length_sum / edge_count as f64
        },
    })
}

/// Angle pairs read off the crossroads of a street system.
#[derive(Debug, Clone)]
pub struct SampledAngles {
    /// One validated pair per usable crossroad, in vertex-id order.
    pub pairs: Vec<CrossroadAngles>,
    /// Crossroads dropped because two incident streets were numerically
    /// collinear (within [`ANGLE_TOL`]).
    pub excluded_collinear: usize,
}

/// Extracts the `(alpha, beta)` angle pair of every crossroad.
///
/// At each crossroad the three street directions are sorted by polar angle
/// and the gaps between consecutive directions are the three crossroad
/// angles. The reported pair starts at a street chosen uniformly at random
/// (from a stream derived from `seed`): a deterministic anchor such as the
/// smallest polar angle would be size-biased, because the fixed reference
/// direction falls into a given gap with probability proportional to that
/// gap, which overweights rotations that follow a wide angle. A uniform
/// anchor makes each cyclic rotation equally likely, and the joint density
/// is symmetric under those rotations. Errors if the system has no
/// crossroads.
pub fn sample_vertex_angles(system: &StreetSystem, seed: u64) -> Result<SampledAngles> {
    let crossroads = system.crossroad_ids();
    if crossroads.is_empty() {
        return Err(Error::DegenerateWindow(
            "no crossroads inside the window interior".into(),
        ));
    }
    let mut rng = seeds::stream(seed, StreamKind::Angles, 0);
    let mut pairs = Vec::with_capacity(crossroads.len());
    let mut excluded = 0usize;
    for vid in crossroads {
        let v = system.vertex(vid);
        let mut dirs: Vec<f64> = system
            .incident_edges(vid)
            .iter()
            .map(|&eid| {
                let other = system.vertex(system.opposite(eid, vid));
                (other.pos.y - v.pos.y).atan2(other.pos.x - v.pos.x)
            })
            .collect();
        dirs.sort_by(f64::total_cmp);
        let gaps = [
            dirs[1] - dirs[0],
            dirs[2] - dirs[1],
            2.0 * std::f64::consts::PI - (dirs[2] - dirs[0]),
        ];
        let anchor = rng.random_range(0..3usize);
        let degenerate = gaps
            .iter()
            .any(|&g| g < ANGLE_TOL || g > std::f64::consts::PI - ANGLE_TOL);
        if degenerate {
            excluded += 1;
            continue;
        }
        match CrossroadAngles::new(gaps[anchor], gaps[(anchor + 1) % 3]) {
            Ok(pair) => pairs.push(pair),
            Err(_) => excluded += 1,
        }
    }
    Ok(SampledAngles {
        pairs,
        excluded_collinear: excluded,
    })
}
