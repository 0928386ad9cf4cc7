//! Planar networks: vertices, oriented arcs and their incidence.
//!
//! Only one orientation of every arc is stored. The reversed arc is never
//! materialised; code that needs it works with the pair (arc, endpoint) and
//! [`reversed_parameter`].

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A point of the embedding plane.
pub type Point = [f64; 2];

/// Relative tolerance used when comparing a declared arc length with the
/// length of its polyline.
pub const LENGTH_RTOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("network needs at least one vertex and one arc")]
    Empty,
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("arc `{0}` is a self-loop")]
    SelfLoop(String),
    #[error("network is disconnected: components {0:?}")]
    Disconnected(Vec<Vec<String>>),
    #[error("arc `{0}`: declared length does not match its geometry")]
    LengthMismatch(String),
    #[error("arc `{0}` references an unknown vertex")]
    DanglingReference(String),
    #[error("arc `{0}`: polyline must start at the origin and end at the terminus")]
    GeometryMismatch(String),
    #[error("arcs `{0}` and `{1}` intersect away from a shared vertex")]
    ArcsIntersect(String, String),
    #[error("parameter {s} outside [0, {length}]")]
    OutOfRange { s: f64, length: f64 },
    #[error("unknown arc index {0}")]
    UnknownArc(usize),
}

/// Which end of an oriented arc touches a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Endpoint {
    /// Parameter `0`.
    Origin,
    /// Parameter `|γ|`.
    Terminus,
}

impl Endpoint {
    /// Parameter value of this endpoint on an arc of the given length.
    pub fn parameter(self, length: f64) -> f64 {
        match self {
            Endpoint::Origin => 0.0,
            Endpoint::Terminus => length,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub id: String,
    pub coords: Point,
    pub label: Option<String>,
}

/// Arc-length parametrised polyline.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    points: Vec<Point>,
    cumulative: Vec<f64>,
}

impl Polyline {
    /// Builds the polyline through `points`; chord lengths are accumulated so
    /// the parametrisation is by arc length.
    pub fn new(points: Vec<Point>) -> Self {
        let mut cumulative = Vec::with_capacity(points.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in points.windows(2) {
            acc += dist(w[0], w[1]);
            cumulative.push(acc);
        }
        Polyline { points, cumulative }
    }

    pub fn segment(a: Point, b: Point) -> Self {
        Polyline::new(vec![a, b])
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap_or(&0.0)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn is_segment(&self) -> bool {
        self.points.len() == 2
    }

    /// Point at arc length `s`, clamped to the polyline.
    pub fn point_at(&self, s: f64) -> Point {
        let n = self.points.len();
        if s <= 0.0 {
            return self.points[0];
        }
        let len = self.length();
        if s >= len {
            return self.points[n - 1];
        }
        // first cumulative value >= s
        let k = self.cumulative.partition_point(|&c| c < s).max(1);
        let (a, b) = (self.points[k - 1], self.points[k]);
        let seg = self.cumulative[k] - self.cumulative[k - 1];
        if seg == 0.0 {
            return a;
        }
        let theta = (s - self.cumulative[k - 1]) / seg;
        [
            (1.0 - theta) * a[0] + theta * b[0],
            (1.0 - theta) * a[1] + theta * b[1],
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arc {
    pub id: String,
    /// Index of o(γ) in [`Network::vertices`].
    pub origin: usize,
    /// Index of t(γ) in [`Network::vertices`].
    pub terminus: usize,
    pub length: f64,
    pub geometry: Polyline,
}

impl Arc {
    pub fn endpoint_vertex(&self, end: Endpoint) -> usize {
        match end {
            Endpoint::Origin => self.origin,
            Endpoint::Terminus => self.terminus,
        }
    }
}

/// One entry of E⁺ₓ: an arc touching the vertex and the end that touches it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Incidence {
    pub arc: usize,
    pub end: Endpoint,
}

/// Input description of a vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexSpec {
    pub id: String,
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl VertexSpec {
    pub fn new(id: impl Into<String>, x: f64, y: f64) -> Self {
        VertexSpec {
            id: id.into(),
            x,
            y,
            label: None,
        }
    }
}

/// Input description of an arc. Without `points` the arc is the straight
/// segment between its endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcSpec {
    pub id: String,
    pub origin: String,
    pub terminus: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Point>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
}

impl ArcSpec {
    pub fn segment(id: impl Into<String>, origin: impl Into<String>, terminus: impl Into<String>) -> Self {
        ArcSpec {
            id: id.into(),
            origin: origin.into(),
            terminus: terminus.into(),
            points: None,
            length: None,
        }
    }
}

/// A validated, immutable network.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    vertices: Vec<Vertex>,
    arcs: Vec<Arc>,
    incidence: Vec<Vec<Incidence>>,
}

impl Network {
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, idx: usize) -> &Arc {
        &self.arcs[idx]
    }

    pub fn vertex(&self, idx: usize) -> &Vertex {
        &self.vertices[idx]
    }

    /// E⁺ₓ for the vertex with index `v`.
    pub fn incidence(&self, v: usize) -> &[Incidence] {
        &self.incidence[v]
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    pub fn arc_index(&self, id: &str) -> Option<usize> {
        self.arcs.iter().position(|a| a.id == id)
    }

    pub fn min_arc_length(&self) -> f64 {
        self.arcs.iter().map(|a| a.length).fold(f64::INFINITY, f64::min)
    }

    /// γ(s) for the arc with index `arc`.
    pub fn arc_point(&self, arc: usize, s: f64) -> Result<Point, NetworkError> {
        let a = self.arcs.get(arc).ok_or(NetworkError::UnknownArc(arc))?;
        check_range(s, a.length)?;
        Ok(a.geometry.point_at(s))
    }
}

fn check_range(s: f64, length: f64) -> Result<(), NetworkError> {
    if !(0.0..=length).contains(&s) {
        return Err(NetworkError::OutOfRange { s, length });
    }
    Ok(())
}

/// Maps a parameter on γ to the parameter of the same point on the reversed
/// arc γ̃(t) = γ(|γ| − t).
pub fn reversed_parameter(length: f64, s: f64) -> Result<f64, NetworkError> {
    check_range(s, length)?;
    Ok(length - s)
}

/// Validates the inputs and assembles a [`Network`].
pub fn build_network(vertices: Vec<VertexSpec>, arcs: Vec<ArcSpec>) -> Result<Network, NetworkError> {
    if vertices.is_empty() || arcs.is_empty() {
        return Err(NetworkError::Empty);
    }
    let mut index = HashMap::new();
    for (k, v) in vertices.iter().enumerate() {
        if index.insert(v.id.clone(), k).is_some() {
            return Err(NetworkError::DuplicateId(v.id.clone()));
        }
    }
    let verts: Vec<Vertex> = vertices
        .into_iter()
        .map(|v| Vertex {
            id: v.id,
            coords: [v.x, v.y],
            label: v.label,
        })
        .collect();

    let mut seen_arcs = HashMap::new();
    let mut built = Vec::with_capacity(arcs.len());
    for spec in arcs {
        if seen_arcs.insert(spec.id.clone(), ()).is_some() {
            return Err(NetworkError::DuplicateId(spec.id));
        }
        let (Some(&o), Some(&t)) = (index.get(&spec.origin), index.get(&spec.terminus)) else {
            return Err(NetworkError::DanglingReference(spec.id));
        };
        if o == t {
            return Err(NetworkError::SelfLoop(spec.id));
        }
        let (po, pt) = (verts[o].coords, verts[t].coords);
        let geometry = match spec.points {
            Some(pts) => {
                if pts.len() < 2 || pts[0] != po || pts[pts.len() - 1] != pt {
                    return Err(NetworkError::GeometryMismatch(spec.id));
                }
                Polyline::new(pts)
            }
            None => Polyline::segment(po, pt),
        };
        let length = geometry.length();
        if length <= 0.0 {
            return Err(NetworkError::LengthMismatch(spec.id));
        }
        if let Some(declared) = spec.length {
            if (declared - length).abs() > LENGTH_RTOL * length {
                return Err(NetworkError::LengthMismatch(spec.id));
            }
        }
        built.push(Arc {
            id: spec.id,
            origin: o,
            terminus: t,
            length,
            geometry,
        });
    }

    let mut incidence = vec![Vec::new(); verts.len()];
    for (k, a) in built.iter().enumerate() {
        incidence[a.origin].push(Incidence {
            arc: k,
            end: Endpoint::Origin,
        });
        incidence[a.terminus].push(Incidence {
            arc: k,
            end: Endpoint::Terminus,
        });
    }

    check_connected(&verts, &built)?;
    check_intersections(&built)?;

    Ok(Network {
        vertices: verts,
        arcs: built,
        incidence,
    })
}

fn check_connected(verts: &[Vertex], arcs: &[Arc]) -> Result<(), NetworkError> {
    let mut adj = vec![Vec::new(); verts.len()];
    for a in arcs {
        adj[a.origin].push(a.terminus);
        adj[a.terminus].push(a.origin);
    }
    let mut comp = vec![usize::MAX; verts.len()];
    let mut n_comp = 0;
    for start in 0..verts.len() {
        if comp[start] != usize::MAX {
            continue;
        }
        comp[start] = n_comp;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if comp[w] == usize::MAX {
                    comp[w] = n_comp;
                    queue.push_back(w);
                }
            }
        }
        n_comp += 1;
    }
    if n_comp > 1 {
        let mut groups = vec![Vec::new(); n_comp];
        for (v, &c) in comp.iter().enumerate() {
            groups[c].push(verts[v].id.clone());
        }
        return Err(NetworkError::Disconnected(groups));
    }
    Ok(())
}

fn check_intersections(arcs: &[Arc]) -> Result<(), NetworkError> {
    for i in 0..arcs.len() {
        for j in i + 1..arcs.len() {
            let (a, b) = (&arcs[i], &arcs[j]);
            if !a.geometry.is_segment() || !b.geometry.is_segment() {
                log::warn!(
                    "arcs `{}` and `{}`: intersection check skipped for polylines",
                    a.id,
                    b.id
                );
                continue;
            }
            let shared: Vec<usize> = [a.origin, a.terminus]
                .into_iter()
                .filter(|v| *v == b.origin || *v == b.terminus)
                .collect();
            let (p, q) = (a.geometry.points()[0], a.geometry.points()[1]);
            let (r, s) = (b.geometry.points()[0], b.geometry.points()[1]);
            if segments_meet_improperly(p, q, r, s, shared.len()) {
                return Err(NetworkError::ArcsIntersect(a.id.clone(), b.id.clone()));
            }
        }
    }
    Ok(())
}

fn dist(a: Point, b: Point) -> f64 {
    (b[0] - a[0]).hypot(b[1] - a[1])
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn on_segment(p: Point, q: Point, x: Point) -> bool {
    x[0] >= p[0].min(q[0]) && x[0] <= p[0].max(q[0]) && x[1] >= p[1].min(q[1]) && x[1] <= p[1].max(q[1])
}

/// True when segments pq and rs share a point other than a common endpoint.
fn segments_meet_improperly(p: Point, q: Point, r: Point, s: Point, shared: usize) -> bool {
    let d1 = cross(r, s, p);
    let d2 = cross(r, s, q);
    let d3 = cross(p, q, r);
    let d4 = cross(p, q, s);
    if d1 == 0.0 && d2 == 0.0 {
        // collinear: overlap beyond a single shared endpoint
        let axis = if (q[0] - p[0]).abs() >= (q[1] - p[1]).abs() { 0 } else { 1 };
        let (a0, a1) = (p[axis].min(q[axis]), p[axis].max(q[axis]));
        let (b0, b1) = (r[axis].min(s[axis]), r[axis].max(s[axis]));
        let overlap = a1.min(b1) - a0.max(b0);
        return overlap > 0.0 || (overlap == 0.0 && shared == 0);
    }
    let proper = ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0));
    if proper {
        return true;
    }
    // touching: only allowed at a shared vertex
    let touches = (d1 == 0.0 && on_segment(r, s, p) && p != r && p != s)
        || (d2 == 0.0 && on_segment(r, s, q) && q != r && q != s)
        || (d3 == 0.0 && on_segment(p, q, r) && r != p && r != q)
        || (d4 == 0.0 && on_segment(p, q, s) && s != p && s != q);
    if touches {
        return true;
    }
    // endpoint coincidences must be shared vertices (coordinates equal but
    // different vertex ids would be a duplicated vertex)
    let coincide = [p, q].iter().filter(|x| **x == r || **x == s).count();
    coincide > shared
}

impl fmt::Display for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "network({} vertices, {} arcs)", self.vertices.len(), self.arcs.len())
    }
}

/// The triangle with vertices (0,0), (1,0), (½,½).
pub fn triangle() -> Network {
    build_network(
        vec![
            VertexSpec::new("v1", 0.0, 0.0),
            VertexSpec::new("v2", 1.0, 0.0),
            VertexSpec::new("v3", 0.5, 0.5),
        ],
        vec![
            ArcSpec::segment("g1", "v1", "v2"),
            ArcSpec::segment("g2", "v1", "v3"),
            ArcSpec::segment("g3", "v2", "v3"),
        ],
    )
    .expect("triangle network is valid")
}

/// Two concentric diamonds joined by four spokes: 8 vertices, 12 arcs.
pub fn traffic_circle() -> Network {
    let v = [
        ("v1", -2.0, 0.0),
        ("v2", -1.0, 0.0),
        ("v3", 0.0, 2.0),
        ("v4", 0.0, 1.0),
        ("v5", 2.0, 0.0),
        ("v6", 1.0, 0.0),
        ("v7", 0.0, -2.0),
        ("v8", 0.0, -1.0),
    ];
    let a = [
        ("g1", "v1", "v2"),
        ("g2", "v1", "v3"),
        ("g3", "v1", "v7"),
        ("g4", "v2", "v4"),
        ("g5", "v2", "v8"),
        ("g6", "v3", "v4"),
        ("g7", "v3", "v5"),
        ("g8", "v4", "v6"),
        ("g9", "v5", "v6"),
        ("g10", "v5", "v7"),
        ("g11", "v6", "v8"),
        ("g12", "v7", "v8"),
    ];
    build_network(
        v.iter().map(|&(id, x, y)| VertexSpec::new(id, x, y)).collect(),
        a.iter().map(|&(id, o, t)| ArcSpec::segment(id, o, t)).collect(),
    )
    .expect("traffic circle network is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn triangle_incidence() {
        let net = triangle();
        let v1 = net.vertex_index("v1").unwrap();
        let inc = net.incidence(v1);
        assert_eq!(inc.len(), 2);
        assert_eq!(inc[0], Incidence { arc: 0, end: Endpoint::Origin });
        assert_eq!(inc[1], Incidence { arc: 1, end: Endpoint::Origin });
        assert_relative_eq!(net.arc(1).length, 2f64.sqrt() / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn self_loop_rejected() {
        let err = build_network(
            vec![VertexSpec::new("v1", 0.0, 0.0)],
            vec![ArcSpec::segment("a", "v1", "v1")],
        )
        .unwrap_err();
        assert_eq!(err, NetworkError::SelfLoop("a".into()));
    }

    #[test]
    fn dangling_and_disconnected() {
        let err = build_network(
            vec![VertexSpec::new("v1", 0.0, 0.0), VertexSpec::new("v2", 1.0, 0.0)],
            vec![ArcSpec::segment("a", "v1", "v9")],
        )
        .unwrap_err();
        assert_eq!(err, NetworkError::DanglingReference("a".into()));

        let err = build_network(
            vec![
                VertexSpec::new("v1", 0.0, 0.0),
                VertexSpec::new("v2", 1.0, 0.0),
                VertexSpec::new("v3", 5.0, 0.0),
                VertexSpec::new("v4", 6.0, 0.0),
            ],
            vec![ArcSpec::segment("a", "v1", "v2"), ArcSpec::segment("b", "v3", "v4")],
        )
        .unwrap_err();
        assert!(matches!(err, NetworkError::Disconnected(ref c) if c.len() == 2));
    }

    #[test]
    fn length_mismatch() {
        let mut spec = ArcSpec::segment("a", "v1", "v2");
        spec.length = Some(1.1);
        let err = build_network(
            vec![VertexSpec::new("v1", 0.0, 0.0), VertexSpec::new("v2", 1.0, 0.0)],
            vec![spec],
        )
        .unwrap_err();
        assert_eq!(err, NetworkError::LengthMismatch("a".into()));
    }

    #[test]
    fn crossing_segments_rejected() {
        let err = build_network(
            vec![
                VertexSpec::new("a", 0.0, 0.0),
                VertexSpec::new("b", 1.0, 1.0),
                VertexSpec::new("c", 0.0, 1.0),
                VertexSpec::new("d", 1.0, 0.0),
            ],
            vec![
                ArcSpec::segment("ab", "a", "b"),
                ArcSpec::segment("cd", "c", "d"),
                ArcSpec::segment("ac", "a", "c"),
            ],
        )
        .unwrap_err();
        assert_eq!(err, NetworkError::ArcsIntersect("ab".into(), "cd".into()));
    }

    #[test]
    fn traffic_circle_degrees() {
        let net = traffic_circle();
        assert_eq!(net.vertices().len(), 8);
        assert_eq!(net.arcs().len(), 12);
        let v4 = net.vertex_index("v4").unwrap();
        let ids: Vec<&str> = net.incidence(v4).iter().map(|i| net.arc(i.arc).id.as_str()).collect();
        assert_eq!(ids, ["g4", "g6", "g8"]);
    }

    #[test]
    fn arc_points() {
        let tri = triangle();
        assert_eq!(tri.arc_point(0, 0.5).unwrap(), [0.5, 0.0]);
        let p = tri.arc_point(1, 2f64.sqrt() / 2.0).unwrap();
        assert_eq!(p, [0.5, 0.5]);
        assert!(matches!(tri.arc_point(0, 1.5), Err(NetworkError::OutOfRange { .. })));

        let tc = traffic_circle();
        let g8 = tc.arc_index("g8").unwrap();
        let p = tc.arc_point(g8, 2f64.sqrt() / 2.0).unwrap();
        assert_relative_eq!(p[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(p[1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn reversed_parameter_examples() {
        assert_eq!(reversed_parameter(1.0, 0.0).unwrap(), 1.0);
        assert_relative_eq!(reversed_parameter(1.0, 0.3).unwrap(), 0.7);
        let l = 2f64.sqrt() / 2.0;
        assert_relative_eq!(reversed_parameter(l, l / 2.0).unwrap(), l / 2.0);
        assert!(reversed_parameter(1.0, -0.1).is_err());
    }

    #[test]
    fn polyline_length_is_cumulative_chord() {
        let pl = Polyline::new(vec![[0.0, 0.0], [3.0, 0.0], [3.0, 4.0]]);
        assert_eq!(pl.length(), 7.0);
        assert_eq!(pl.point_at(5.0), [3.0, 2.0]);
    }
}
