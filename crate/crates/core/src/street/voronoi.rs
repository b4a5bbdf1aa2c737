//! Voronoi street extraction from a Delaunay triangulation of the germs.
//!
//! The Voronoi diagram is read off the dual triangulation: every triangle
//! contributes its circumcenter as a candidate tessellation vertex, every
//! interior Delaunay edge contributes the segment between the two adjacent
//! circumcenters, and every hull edge contributes a half-infinite ray from
//! its triangle's circumcenter along the outward perpendicular bisector.
//! Everything is clipped to the observation window; clip points become
//! degree-one boundary vertices while unclipped circumcenters inside the
//! window become interior vertices (degree three almost surely).

use std::collections::HashSet;

use delaunator::{triangulate, Point as DPoint, EMPTY};

use crate::geom::{Point, Rect, Window};
use crate::union_find::UnionFind;

use super::{Edge, EdgeId, Vertex, VertexId};

/// Circumcenters closer than this (kilometers) are merged into one
/// tessellation vertex; they arise from near-cocircular germ quadruples.
const MERGE_TOL: f64 = 1e-12;

/// Clip points are mathematically on the window frame; coordinates within
/// this distance (kilometers) of a frame line are snapped exactly onto it so
/// the on-frame property holds bitwise despite clip-parameter rounding.
const SNAP_TOL: f64 = 1e-9;

/// Builds clipped street vertices and edges from germ positions.
///
/// Returns empty vectors when the germs admit no triangulation (fewer than
/// three germs, or all collinear).
pub(super) fn voronoi_streets(germs: &[DPoint], window: &Window) -> (Vec<Vertex>, Vec<Edge>) {
    let mut builder = Builder {
        rect: window.rect(),
        vertices: Vec::new(),
        edges: Vec::new(),
    };
    let tri = triangulate(germs);
    let n_tri = tri.triangles.len() / 3;
    if n_tri == 0 {
        return (builder.vertices, builder.edges);
    }

    let centers: Vec<Point> = (0..n_tri)
        .map(|t| {
            circumcenter(
                &germs[tri.triangles[3 * t]],
                &germs[tri.triangles[3 * t + 1]],
                &germs[tri.triangles[3 * t + 2]],
            )
        })
        .collect();

    // Merge coincident circumcenters (degenerate, near-cocircular germs)
    // so they form a single vertex instead of a zero-length edge.
    let mut groups = UnionFind::new(n_tri);
    for (e, &twin) in tri.halfedges.iter().enumerate() {
        if twin == EMPTY || e > twin {
            continue;
        }
        let (ta, tb) = (e / 3, twin / 3);
        let (ca, cb) = (centers[ta], centers[tb]);
        if ca.is_finite() && cb.is_finite() && ca.dist(cb) < MERGE_TOL {
            groups.union(ta as u32, tb as u32);
        }
    }

    let mut vertex_of: Vec<Option<VertexId>> = vec![None; n_tri];
    let mut emitted: HashSet<(u32, u32)> = HashSet::new();

    // Interior Voronoi edges: segments between adjacent circumcenters.
    for (e, &twin) in tri.halfedges.iter().enumerate() {
        if twin == EMPTY || e > twin {
            continue;
        }
        let ra = groups.find((e / 3) as u32) as usize;
        let rb = groups.find((twin / 3) as u32) as usize;
        if ra == rb {
            continue;
        }
        let key = (ra.min(rb) as u32, ra.max(rb) as u32);
        if !emitted.insert(key) {
            continue;
        }
        let (ca, cb) = (centers[ra], centers[rb]);
        let dir = Point::new(cb.x - ca.x, cb.y - ca.y);
        let Some((t0, t1)) = builder.rect.clip_line(ca, dir, 0.0, 1.0) else {
            continue;
        };
        let a = if t0 == 0.0 && builder.rect.contains_strict(ca) {
            builder.interior_vertex(&mut vertex_of[ra], ca)
        } else {
            builder.boundary_vertex(point_at(ca, dir, t0))
        };
        let b = if t1 == 1.0 && builder.rect.contains_strict(cb) {
            builder.interior_vertex(&mut vertex_of[rb], cb)
        } else {
            builder.boundary_vertex(point_at(ca, dir, t1))
        };
        builder.push_edge(a, b);
    }

    // Hull rays: unbounded Voronoi edges along the outward bisector of each
    // hull Delaunay edge. The triangulation orients triangles clockwise in
    // y-up coordinates (its docs say counter-clockwise, but in the y-down
    // screen convention), so the interior lies to the right of a hull
    // halfedge a -> b and the outward direction is the left-hand normal.
    for (e, &twin) in tri.halfedges.iter().enumerate() {
        if twin != EMPTY {
            continue;
        }
        let r = groups.find((e / 3) as u32) as usize;
        let c = centers[r];
        let ga = &germs[tri.triangles[e]];
        let gb = &germs[tri.triangles[next_halfedge(e)]];
        let dir = Point::new(ga.y - gb.y, gb.x - ga.x);
        let Some((t0, t1)) = builder.rect.clip_line(c, dir, 0.0, f64::INFINITY) else {
            continue;
        };
        let a = if t0 == 0.0 && builder.rect.contains_strict(c) {
            builder.interior_vertex(&mut vertex_of[r], c)
        } else {
            builder.boundary_vertex(point_at(c, dir, t0))
        };
        let b = builder.boundary_vertex(point_at(c, dir, t1));
        builder.push_edge(a, b);
    }

    (builder.vertices, builder.edges)
}

struct Builder {
    rect: Rect,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
}

impl Builder {
    /// Vertex for a circumcenter inside the window, created on first use.
    fn interior_vertex(&mut self, slot: &mut Option<VertexId>, pos: Point) -> VertexId {
        if let Some(id) = *slot {
            return id;
        }
        let id = VertexId(self.vertices.len() as u32);
        self.vertices.push(Vertex {
            id,
            pos,
            boundary: false,
        });
        *slot = Some(id);
        id
    }

    /// Fresh degree-one vertex where an edge meets the window boundary.
    fn boundary_vertex(&mut self, pos: Point) -> VertexId {
        let snap = |v: f64, lo: f64, hi: f64| {
            if (v - lo).abs() <= SNAP_TOL {
                lo
            } else if (v - hi).abs() <= SNAP_TOL {
                hi
            } else {
                v.clamp(lo, hi)
            }
        };
        let snapped = Point::new(
            snap(pos.x, self.rect.x_min, self.rect.x_max),
            snap(pos.y, self.rect.y_min, self.rect.y_max),
        );
        let id = VertexId(self.vertices.len() as u32);
        self.vertices.push(Vertex {
            id,
            pos: snapped,
            boundary: true,
        });
        id
    }

    fn push_edge(&mut self, a: VertexId, b: VertexId) {
        if a == b {
            return;
        }
        let length = self.vertices[a.0 as usize]
            .pos
            .dist(self.vertices[b.0 as usize].pos);
        if length <= 0.0 {
            return;
        }
        let id = EdgeId(self.edges.len() as u32);
        self.edges.push(Edge { id, a, b, length });
    }
}

fn point_at(p: Point, d: Point, t: f64) -> Point {
    Point::new(p.x + t * d.x, p.y + t * d.y)
}

fn next_halfedge(e: usize) -> usize {
    if e % 3 == 2 {
        e - 2
    } else {
        e + 1
    }
}

/// Circumcenter of the triangle `(a, b, c)`; non-finite for (near-)collinear
/// triangles, which downstream clipping discards.
fn circumcenter(a: &DPoint, b: &DPoint, c: &DPoint) -> Point {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let ex = c.x - a.x;
    let ey = c.y - a.y;
    let bl = dx * dx + dy * dy;
    let cl = ex * ex + ey * ey;
    let d = 0.5 / (dx * ey - dy * ex);
    Point::new(a.x + (ey * bl - dy * cl) * d, a.y + (dx * cl - ex * bl) * d)
}
