//! Qualitative shape encoding of a glyph's ink.
//!
//! Strokes are cut at corners into edge segments; segments are joined into a
//! planar graph whose bounded faces are the glyph's edge cycles; cycles are
//! nested into a containment tree of depth at most three.
//!
//! # Fact vocabulary
//!
//! Entities are segments `s0, s1, ...` and cycles `c0, c1, ...`.
//!
//! | fact | meaning |
//! |------|---------|
//! | `straight(s)` / `curved(s)` | chord-deviation test |
//! | `orientE/NE/N/NW(s)` | chord direction, mod 180° |
//! | `lengthShort/Medium/Long(s)` | arc-length tercile within the glyph |
//! | `convex(s)` / `concave(s)` | curved segments that lie on a cycle |
//! | `terminal(s)` | the segment has a free end |
//! | `adjacent(s, s')` | consecutive segments of one stroke (symmetric) |
//! | `connectsTo(s, s')` | segments meeting at a junction, otherwise (symmetric) |
//! | `partOf(s, c)` | segment lies on the boundary of cycle `c` |
//! | `contains(c, c')` | `c` is the direct parent of `c'` in the cycle tree |
//! | `above(x, y)`, `leftOf(x, y)` | centroid placement of connected segments and of cycles |
//!
//! Orientation-class facts (`orient*`, `above`, `leftOf`) are the only ones
//! that depend on the glyph's rotation; every fact is invariant under
//! translation and uniform scaling.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::case::{CaseDescription, EntityId, EntityKind};
use crate::geom::{
    interior_point, point_in_polygon, point_line_distance, polyline_length, signed_area, BBox,
    Point,
};
use crate::glyph::Glyph;
use crate::raster::Polyline;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ShapeClass {
    Straight,
    Curved,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Convexity {
    Convex,
    Concave,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    E,
    NE,
    N,
    NW,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RelLength {
    Short,
    Medium,
    Long,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Winding {
    Cw,
    Ccw,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeParams {
    /// Turns at or above this angle (degrees) split a stroke.
    pub corner_angle: f64,
    /// Max chord deviation / chord length for a straight segment.
    pub straight_tol: f64,
    /// Endpoints closer than this many source pixels are one graph node.
    pub snap: f64,
    /// Guard band for segment and cycle placement facts, as a fraction of the glyph size.
    pub placement_gap: f64,
}

impl Default for ShapeParams {
    fn default() -> Self {
        ShapeParams {
            corner_angle: 45.0,
            straight_tol: 0.05,
            snap: 2.0,
            placement_gap: 0.1,
        }
    }
}

/// A piece of a stroke between two corners (or a whole cornerless loop).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeSegment {
    pub geometry: Polyline,
    pub shape_class: ShapeClass,
    pub convexity: Option<Convexity>,
    pub orientation: Orientation,
    pub rel_length: RelLength,
    /// Index of the source stroke within the glyph.
    pub stroke: usize,
}

impl EdgeSegment {
    fn from_points(points: Vec<Point>, closed: bool, stroke: usize, tol: f64) -> Option<Self> {
        let geometry = Polyline::new(points, closed).ok()?;
        let mut seg = EdgeSegment {
            geometry,
            shape_class: ShapeClass::Curved,
            convexity: None,
            orientation: Orientation::E,
            rel_length: RelLength::Medium,
            stroke,
        };
        seg.shape_class = classify_shape(&seg, tol);
        seg.orientation = orientation_of(seg.start(), seg.end());
        Some(seg)
    }

    pub fn start(&self) -> Point {
        self.geometry.points[0]
    }

    /// End point; equal to the start for a closed loop.
    pub fn end(&self) -> Point {
        if self.geometry.closed {
            self.geometry.points[0]
        } else {
            *self.geometry.points.last().unwrap()
        }
    }

    pub fn path(&self) -> Vec<Point> {
        self.geometry.path()
    }

    pub fn arc_length(&self) -> f64 {
        polyline_length(&self.path())
    }

    pub fn is_loop(&self) -> bool {
        self.geometry.closed
    }

    pub fn centroid(&self) -> Point {
        let path = self.path();
        let mut acc = Point::new(0.0, 0.0);
        let mut total = 0.0;
        for w in path.windows(2) {
            let l = w[0].dist(w[1]);
            acc = acc.add(w[0].add(w[1]).scale(0.5 * l));
            total += l;
        }
        if total == 0.0 {
            path[0]
        } else {
            acc.scale(1.0 / total)
        }
    }
}

fn turn_degrees(prev: Point, at: Point, next: Point) -> f64 {
    let a = at.sub(prev);
    let b = next.sub(at);
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (a.dot(b) / (na * nb)).clamp(-1.0, 1.0).acos().to_degrees()
}

/// Splits a polyline at every vertex whose turn is at least `corner_angle`.
pub fn segment_edges(line: &Polyline, corner_angle: f64) -> Vec<EdgeSegment> {
    segment_edges_with(line, corner_angle, ShapeParams::default().straight_tol, 0)
}

fn segment_edges_with(
    line: &Polyline,
    corner_angle: f64,
    tol: f64,
    stroke: usize,
) -> Vec<EdgeSegment> {
    let pts = &line.points;
    let n = pts.len();
    let is_corner = |t: f64| t >= corner_angle - 1e-9;
    let mut out = Vec::new();
    if !line.closed {
        let mut start = 0;
        for i in 1..n - 1 {
            if is_corner(turn_degrees(pts[i - 1], pts[i], pts[i + 1])) {
                out.extend(EdgeSegment::from_points(
                    pts[start..=i].to_vec(),
                    false,
                    stroke,
                    tol,
                ));
                start = i;
            }
        }
        out.extend(EdgeSegment::from_points(
            pts[start..].to_vec(),
            false,
            stroke,
            tol,
        ));
        return out;
    }
    let corners: Vec<usize> = (0..n)
        .filter(|&i| is_corner(turn_degrees(pts[(i + n - 1) % n], pts[i], pts[(i + 1) % n])))
        .collect();
    if corners.is_empty() {
        out.extend(EdgeSegment::from_points(pts.clone(), true, stroke, tol));
        return out;
    }
    for (k, &c) in corners.iter().enumerate() {
        let next = corners[(k + 1) % corners.len()];
        let mut piece = vec![pts[c]];
        let mut i = c;
        loop {
            i = (i + 1) % n;
            piece.push(pts[i]);
            if i == next {
                break;
            }
        }
        // One corner only: the piece runs all the way round and back to it.
        out.extend(EdgeSegment::from_points(piece, false, stroke, tol));
    }
    out
}

/// Straight iff the maximum deviation from the chord, relative to the chord
/// length, is below `tol`. A zero-length chord is curved.
pub fn classify_shape(seg: &EdgeSegment, tol: f64) -> ShapeClass {
    let (a, b) = (seg.start(), seg.end());
    let chord = a.dist(b);
    if chord == 0.0 {
        return ShapeClass::Curved;
    }
    let dev = seg
        .geometry
        .points
        .iter()
        .map(|&p| point_line_distance(p, a, b))
        .fold(0.0, f64::max);
    if dev / chord < tol {
        ShapeClass::Straight
    } else {
        ShapeClass::Curved
    }
}

/// Chord direction quantized to four bins, mod 180°, with north up.
pub fn orientation_of(a: Point, b: Point) -> Orientation {
    let d = b.sub(a);
    if d.norm() == 0.0 {
        return Orientation::E;
    }
    let mut deg = (-d.y).atan2(d.x).to_degrees();
    if deg < 0.0 {
        deg += 180.0;
    }
    if deg >= 180.0 {
        deg -= 180.0;
    }
    match deg {
        d if !(22.5..157.5).contains(&d) => Orientation::E,
        d if d < 67.5 => Orientation::NE,
        d if d < 112.5 => Orientation::N,
        _ => Orientation::NW,
    }
}

/// Terciles of arc length: bottom third short, top third long. Equal lengths
/// are ordered by position in the input.
pub fn rel_lengths(segs: &mut [EdgeSegment]) {
    let n = segs.len();
    let mut order: Vec<usize> = (0..n).collect();
    let lengths: Vec<f64> = segs.iter().map(|s| s.arc_length()).collect();
    order.sort_by(|&a, &b| lengths[a].partial_cmp(&lengths[b]).unwrap().then(a.cmp(&b)));
    let third = n / 3;
    for (rank, &i) in order.iter().enumerate() {
        segs[i].rel_length = if rank < third {
            RelLength::Short
        } else if rank >= n - third {
            RelLength::Long
        } else {
            RelLength::Medium
        };
    }
}

/// Which way a segment is traversed along a cycle boundary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleSide {
    pub segment: usize,
    pub reversed: bool,
}

/// A closed chain of segments bounding one face of the glyph's edge graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeCycle {
    pub sides: Vec<CycleSide>,
    pub polygon: Vec<Point>,
    pub winding: Winding,
    pub area: f64,
}

impl EdgeCycle {
    pub fn contains_segment(&self, seg: usize) -> bool {
        self.sides.iter().any(|s| s.segment == seg)
    }

    pub fn bbox(&self) -> BBox {
        BBox::of_points(&self.polygon).expect("cycle polygon is non-empty")
    }
}

/// Decides whether a curved segment bulges away from (convex) or into
/// (concave) the interior of a cycle it belongs to.
pub fn classify_convexity(seg: &EdgeSegment, cycle: &EdgeCycle, index: usize) -> Convexity {
    if seg.is_loop() {
        return Convexity::Convex;
    }
    let Some(side) = cycle.sides.iter().find(|s| s.segment == index) else {
        return Convexity::Convex;
    };
    let mut path = seg.path();
    if side.reversed {
        path.reverse();
    }
    let (a, b) = (path[0], *path.last().unwrap());
    let chord = b.sub(a);
    let bulge: f64 = path.iter().map(|p| chord.cross(p.sub(a))).sum();
    let interior_sign = signed_area(&cycle.polygon).signum();
    if bulge * interior_sign > 0.0 {
        Convexity::Concave
    } else {
        Convexity::Convex
    }
}

struct EdgeGraph {
    /// Node of each segment's start and end.
    ends: Vec<(usize, usize)>,
    node_degree: Vec<usize>,
    /// Outgoing half-edges per node, sorted by departure angle.
    outgoing: Vec<Vec<usize>>,
}

// Half-edge `2e` runs along segment `e`; `2e + 1` runs against it.

fn departure_angle(seg: &EdgeSegment, reversed: bool) -> f64 {
    let mut path = seg.path();
    if reversed {
        path.reverse();
    }
    let origin = path[0];
    let total = polyline_length(&path);
    // Look a little way along the edge so pixel jitter at the node does not dominate.
    let reach = (total * 0.25).min(6.0);
    let mut walked = 0.0;
    let mut probe = path[1];
    for w in path.windows(2) {
        walked += w[0].dist(w[1]);
        probe = w[1];
        if walked >= reach {
            break;
        }
    }
    let d = probe.sub(origin);
    d.y.atan2(d.x)
}

fn build_graph(segs: &[EdgeSegment], snap: f64) -> EdgeGraph {
    let endpoints: Vec<Point> = segs.iter().flat_map(|s| [s.start(), s.end()]).collect();
    let m = endpoints.len();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in 0..m {
        for j in i + 1..m {
            if endpoints[i].dist(endpoints[j]) <= snap {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut node_of_root: HashMap<usize, usize> = HashMap::new();
    let mut node = vec![0; m];
    for i in 0..m {
        let r = find(&mut parent, i);
        let next = node_of_root.len();
        node[i] = *node_of_root.entry(r).or_insert(next);
    }
    let n_nodes = node_of_root.len();
    let ends: Vec<(usize, usize)> = (0..segs.len())
        .map(|e| (node[2 * e], node[2 * e + 1]))
        .collect();
    let mut node_degree = vec![0; n_nodes];
    let mut outgoing: Vec<Vec<(f64, usize)>> = vec![Vec::new(); n_nodes];
    for (e, &(s, t)) in ends.iter().enumerate() {
        node_degree[s] += 1;
        node_degree[t] += 1;
        outgoing[s].push((departure_angle(&segs[e], false), 2 * e));
        outgoing[t].push((departure_angle(&segs[e], true), 2 * e + 1));
    }
    let outgoing = outgoing
        .into_iter()
        .map(|mut v| {
            v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            v.into_iter().map(|(_, h)| h).collect()
        })
        .collect();
    EdgeGraph {
        ends,
        node_degree,
        outgoing,
    }
}

/// Finds the bounded faces of the planar graph formed by the segments, with
/// endpoints closer than `snap` merged into one node. Each face's outer
/// boundary becomes one cycle; edges with the same face on both sides
/// (bridges and dangling strokes) are left out of the boundary.
pub fn find_edge_cycles(segs: &[EdgeSegment], snap: f64) -> Vec<EdgeCycle> {
    if segs.is_empty() {
        return Vec::new();
    }
    let g = build_graph(segs, snap);
    let n_half = segs.len() * 2;
    let mut position = vec![(0usize, 0usize); n_half];
    for (v, out) in g.outgoing.iter().enumerate() {
        for (k, &h) in out.iter().enumerate() {
            position[h] = (v, k);
        }
    }
    let next = |h: usize| -> usize {
        let twin = h ^ 1;
        let (v, k) = position[twin];
        let out = &g.outgoing[v];
        out[(k + 1) % out.len()]
    };

    let mut visited = vec![false; n_half];
    let mut cycles = Vec::new();
    for start in 0..n_half {
        if visited[start] {
            continue;
        }
        let mut face = Vec::new();
        let mut h = start;
        while !visited[h] {
            visited[h] = true;
            face.push(h);
            h = next(h);
        }
        if let Some(c) = face_outer_cycle(segs, &face) {
            cycles.push(c);
        }
    }
    // Deterministic order: larger faces first, then by first segment.
    cycles.sort_by(|a, b| {
        b.area
            .partial_cmp(&a.area)
            .unwrap()
            .then(a.sides[0].segment.cmp(&b.sides[0].segment))
    });
    cycles
}

/// Splits a face walk into loops separated by bridge edges and returns the
/// loop enclosing positive area, if any.
fn face_outer_cycle(segs: &[EdgeSegment], face: &[usize]) -> Option<EdgeCycle> {
    let in_face: std::collections::HashSet<usize> = face.iter().copied().collect();
    let mut seen_bridge: std::collections::HashSet<usize> = Default::default();
    let mut stack = vec![0usize];
    let mut next_label = 1;
    let mut loops: HashMap<usize, Vec<usize>> = HashMap::new();
    for &h in face {
        let twin = h ^ 1;
        if in_face.contains(&twin) {
            if seen_bridge.contains(&twin) {
                stack.pop();
            } else {
                seen_bridge.insert(h);
                stack.push(next_label);
                next_label += 1;
            }
            continue;
        }
        let label = *stack.last().unwrap_or(&0);
        loops.entry(label).or_default().push(h);
    }
    let mut best: Option<EdgeCycle> = None;
    let mut labels: Vec<usize> = loops.keys().copied().collect();
    labels.sort_unstable();
    for label in labels {
        let halves = &loops[&label];
        let mut polygon = Vec::new();
        for &h in halves {
            let mut path = segs[h / 2].path();
            if h % 2 == 1 {
                path.reverse();
            }
            path.pop();
            polygon.extend(path);
        }
        let area = signed_area(&polygon);
        // Bounded faces come out with negative signed area in image coordinates.
        if -area > 1e-6 && best.as_ref().map_or(true, |b| -area > b.area) {
            best = Some(EdgeCycle {
                sides: halves
                    .iter()
                    .map(|&h| CycleSide {
                        segment: h / 2,
                        reversed: h % 2 == 1,
                    })
                    .collect(),
                polygon,
                winding: Winding::Ccw,
                area: -area,
            });
        }
    }
    best
}

/// Containment forest over cycles with depth capped at three.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleTree {
    pub parent: Vec<Option<usize>>,
    /// 1 for outermost cycles; deeper nesting is clamped to 3.
    pub depth: Vec<u8>,
}

pub const MAX_DEPTH: u8 = 3;

impl CycleTree {
    pub fn roots(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.parent.len()).filter(|&i| self.parent[i].is_none())
    }

    pub fn children(&self, of: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.parent.len()).filter(move |&i| self.parent[i] == Some(of))
    }

    pub fn max_depth(&self) -> u8 {
        self.depth.iter().copied().max().unwrap_or(0)
    }
}

/// Parent of each cycle is the smallest larger cycle containing one of its
/// interior points.
pub fn build_cycle_tree(cycles: &[EdgeCycle]) -> CycleTree {
    let n = cycles.len();
    let reps: Vec<Option<Point>> = cycles.iter().map(|c| interior_point(&c.polygon)).collect();
    let mut parent = vec![None; n];
    for i in 0..n {
        let Some(p) = reps[i] else { continue };
        let mut best: Option<usize> = None;
        for j in 0..n {
            if j == i || cycles[j].area <= cycles[i].area {
                continue;
            }
            if point_in_polygon(p, &cycles[j].polygon)
                && best.map_or(true, |b| cycles[j].area < cycles[b].area)
            {
                best = Some(j);
            }
        }
        parent[i] = best;
    }
    let mut depth = vec![0u8; n];
    for i in 0..n {
        let mut d = 1usize;
        let mut cur = parent[i];
        while let Some(p) = cur {
            d += 1;
            cur = parent[p];
            if d > n {
                break;
            }
        }
        depth[i] = d.min(MAX_DEPTH as usize) as u8;
    }
    CycleTree { parent, depth }
}

/// Everything the shape encoder derives from one glyph.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeAnalysis {
    pub segments: Vec<EdgeSegment>,
    pub cycles: Vec<EdgeCycle>,
    pub tree: CycleTree,
    /// Graph node of each segment's (start, end).
    pub ends: Vec<(usize, usize)>,
    pub node_degree: Vec<usize>,
    pub bbox: BBox,
}

pub fn analyze(glyph: &Glyph, params: &ShapeParams) -> ShapeAnalysis {
    let mut segments: Vec<EdgeSegment> = glyph
        .strokes
        .iter()
        .enumerate()
        .flat_map(|(i, s)| segment_edges_with(s, params.corner_angle, params.straight_tol, i))
        .collect();
    rel_lengths(&mut segments);
    let snap = params.snap * glyph.pixel;
    let cycles = find_edge_cycles(&segments, snap);
    let tree = build_cycle_tree(&cycles);
    for (i, seg) in segments.iter_mut().enumerate() {
        if seg.shape_class != ShapeClass::Curved {
            continue;
        }
        // The smallest enclosing face decides; cycles are sorted by decreasing area.
        if let Some(c) = cycles.iter().rev().find(|c| c.contains_segment(i)) {
            seg.convexity = Some(classify_convexity(seg, c, i));
        }
    }
    let graph = build_graph(&segments, snap);
    ShapeAnalysis {
        segments,
        cycles,
        tree,
        ends: graph.ends,
        node_degree: graph.node_degree,
        bbox: glyph.bbox,
    }
}

pub fn encode_shape(glyph: &Glyph, params: &ShapeParams) -> CaseDescription {
    let analysis = analyze(glyph, params);
    let all_cycles: Vec<usize> = (0..analysis.cycles.len()).collect();
    let all_segments: Vec<usize> = (0..analysis.segments.len()).collect();
    encode_selection(&analysis, &all_segments, &all_cycles, params, &glyph.id)
}

pub(crate) fn segment_entity(i: usize) -> String {
    format!("s{i}")
}

pub(crate) fn cycle_entity(i: usize) -> String {
    format!("c{i}")
}

/// Encodes a subset of an analysis: the listed segments and cycles and the
/// relations among them.
pub fn encode_selection(
    a: &ShapeAnalysis,
    segments: &[usize],
    cycles: &[usize],
    params: &ShapeParams,
    provenance: &str,
) -> CaseDescription {
    let mut case = CaseDescription::new(provenance);
    let mut seg_ent: HashMap<usize, EntityId> = HashMap::new();
    for &i in segments {
        seg_ent.insert(i, case.entity(&segment_entity(i), EntityKind::Segment));
    }
    let mut cyc_ent: HashMap<usize, EntityId> = HashMap::new();
    for &c in cycles {
        cyc_ent.insert(c, case.entity(&cycle_entity(c), EntityKind::Cycle));
    }

    for &i in segments {
        let s = &a.segments[i];
        let e = seg_ent[&i];
        case.fact(
            match s.shape_class {
                ShapeClass::Straight => "straight",
                ShapeClass::Curved => "curved",
            },
            &[e],
        );
        case.fact(
            match s.orientation {
                Orientation::E => "orientE",
                Orientation::NE => "orientNE",
                Orientation::N => "orientN",
                Orientation::NW => "orientNW",
            },
            &[e],
        );
        case.fact(
            match s.rel_length {
                RelLength::Short => "lengthShort",
                RelLength::Medium => "lengthMedium",
                RelLength::Long => "lengthLong",
            },
            &[e],
        );
        if let Some(cv) = s.convexity {
            case.fact(
                match cv {
                    Convexity::Convex => "convex",
                    Convexity::Concave => "concave",
                },
                &[e],
            );
        }
        let (u, v) = a.ends[i];
        if !s.is_loop() && (a.node_degree[u] == 1 || a.node_degree[v] == 1) {
            case.fact("terminal", &[e]);
        }
    }

    // Topology between segments sharing a graph node.
    let mut connected_pairs = Vec::new();
    for (x, &i) in segments.iter().enumerate() {
        for &j in &segments[x + 1..] {
            let (si, sj) = (&a.segments[i], &a.segments[j]);
            let (ui, vi) = a.ends[i];
            let (uj, vj) = a.ends[j];
            let shares = ui == uj || ui == vj || vi == uj || vi == vj;
            if !shares {
                continue;
            }
            let chain = si.stroke == sj.stroke && chain_neighbors(a, i, j);
            let pred = if chain { "adjacent" } else { "connectsTo" };
            case.fact(pred, &[seg_ent[&i], seg_ent[&j]]);
            connected_pairs.push((i, j));
        }
    }

    for &c in cycles {
        for side in &a.cycles[c].sides {
            if let Some(&e) = seg_ent.get(&side.segment) {
                case.fact("partOf", &[e, cyc_ent[&c]]);
            }
        }
        if let Some(p) = a.tree.parent[c] {
            if let Some(&pe) = cyc_ent.get(&p) {
                case.fact("contains", &[pe, cyc_ent[&c]]);
            }
        }
    }

    // Placement of connected segments and of cycles relative to each other.
    let scale = a.bbox.width().max(a.bbox.height()).max(1e-9);
    // The slack keeps exact ties with the band on the no-fact side whatever
    // rounding the glyph's position introduces into the centroids.
    let gap = (params.placement_gap + 1e-9) * scale;
    for &(i, j) in &connected_pairs {
        placement_facts(
            &mut case,
            a.segments[i].centroid(),
            a.segments[j].centroid(),
            seg_ent[&i],
            seg_ent[&j],
            gap,
        );
    }
    for (x, &c) in cycles.iter().enumerate() {
        for &d in &cycles[x + 1..] {
            placement_facts(
                &mut case,
                a.cycles[c].bbox().center(),
                a.cycles[d].bbox().center(),
                cyc_ent[&c],
                cyc_ent[&d],
                gap,
            );
        }
    }
    case
}

/// Consecutive segments of one stroke (including the wrap-around of a closed stroke).
fn chain_neighbors(a: &ShapeAnalysis, i: usize, j: usize) -> bool {
    let stroke = a.segments[i].stroke;
    let members: Vec<usize> = (0..a.segments.len())
        .filter(|&k| a.segments[k].stroke == stroke)
        .collect();
    let pi = members.iter().position(|&k| k == i).unwrap();
    let pj = members.iter().position(|&k| k == j).unwrap();
    let n = members.len();
    let diff = pi.abs_diff(pj);
    diff == 1 || (n > 2 && diff == n - 1 && a.segments[members[0]].start() == a.segments[members[n - 1]].end())
}

fn placement_facts(
    case: &mut CaseDescription,
    pa: Point,
    pb: Point,
    ea: EntityId,
    eb: EntityId,
    gap: f64,
) {
    if pa.y < pb.y - gap {
        case.fact("above", &[ea, eb]);
    } else if pb.y < pa.y - gap {
        case.fact("above", &[eb, ea]);
    }
    if pa.x < pb.x - gap {
        case.fact("leftOf", &[ea, eb]);
    } else if pb.x < pa.x - gap {
        case.fact("leftOf", &[eb, ea]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glyph::glyph_from_strokes;

    fn closed(pts: &[(f64, f64)]) -> Polyline {
        Polyline::closed(pts.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap()
    }

    fn open(pts: &[(f64, f64)]) -> Polyline {
        Polyline::open(pts.iter().map(|&(x, y)| Point::new(x, y)).collect()).unwrap()
    }

    fn square(x: f64, y: f64, s: f64) -> Polyline {
        closed(&[(x, y), (x + s, y), (x + s, y + s), (x, y + s)])
    }

    fn circle(cx: f64, cy: f64, r: f64, n: usize) -> Polyline {
        Polyline::closed(
            (0..n)
                .map(|i| {
                    let t = i as f64 / n as f64 * std::f64::consts::TAU;
                    Point::new(cx + r * t.cos(), cy + r * t.sin())
                })
                .collect(),
        )
        .unwrap()
    }

    fn count(case: &CaseDescription, functor: &str) -> usize {
        case.facts()
            .iter()
            .filter(|&&f| case.expression(f).functor.as_str() == functor)
            .count()
    }

    #[test]
    fn square_splits_into_four_straight_segments() {
        let segs = segment_edges(&square(0.0, 0.0, 10.0), 45.0);
        assert_eq!(segs.len(), 4);
        assert!(segs.iter().all(|s| s.shape_class == ShapeClass::Straight));
    }

    #[test]
    fn straight_line_is_one_segment() {
        let segs = segment_edges(&open(&[(0.0, 0.0), (5.0, 0.0), (10.0, 0.0)]), 45.0);
        assert_eq!(segs.len(), 1);
    }

    #[test]
    fn shape_classes() {
        let line = EdgeSegment::from_points(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 1.0), Point::new(2.0, 2.0)],
            false,
            0,
            0.05,
        )
        .unwrap();
        assert_eq!(classify_shape(&line, 0.05), ShapeClass::Straight);
        let semi: Vec<Point> = (0..=16)
            .map(|i| {
                let t = i as f64 / 16.0 * std::f64::consts::PI;
                Point::new(20.0 * t.cos(), 20.0 * t.sin())
            })
            .collect();
        let semi = EdgeSegment::from_points(semi, false, 0, 0.05).unwrap();
        assert_eq!(classify_shape(&semi, 0.05), ShapeClass::Curved);
    }

    #[test]
    fn orientation_bins() {
        let o = |x: f64, y: f64| orientation_of(Point::new(0.0, 0.0), Point::new(x, y));
        assert_eq!(o(10.0, 0.0), Orientation::E);
        assert_eq!(o(-10.0, 0.0), Orientation::E);
        assert_eq!(o(10.0, -10.0), Orientation::NE);
        assert_eq!(o(0.0, 10.0), Orientation::N);
        assert_eq!(o(10.0, 10.0), Orientation::NW);
    }

    #[test]
    fn rel_length_terciles() {
        let mk = |len: f64| {
            EdgeSegment::from_points(vec![Point::new(0.0, 0.0), Point::new(len, 0.0)], false, 0, 0.05)
                .unwrap()
        };
        let mut one = vec![mk(5.0)];
        rel_lengths(&mut one);
        assert_eq!(one[0].rel_length, RelLength::Medium);
        let mut three = vec![mk(100.0), mk(1.0), mk(10.0)];
        rel_lengths(&mut three);
        assert_eq!(
            three.iter().map(|s| s.rel_length).collect::<Vec<_>>(),
            vec![RelLength::Long, RelLength::Short, RelLength::Medium]
        );
    }

    #[test]
    fn square_and_v_cycles() {
        let g = glyph_from_strokes(vec![square(0.0, 0.0, 10.0)], None).unwrap();
        let a = analyze(&g, &ShapeParams::default());
        assert_eq!(a.cycles.len(), 1);
        assert_eq!(a.cycles[0].sides.len(), 4);
        assert!((a.cycles[0].area - 100.0).abs() < 1e-9);

        let v = glyph_from_strokes(vec![open(&[(0.0, 0.0), (5.0, 10.0), (10.0, 0.0)])], None)
            .unwrap();
        assert!(analyze(&v, &ShapeParams::default()).cycles.is_empty());
    }

    #[test]
    fn square_encoding_counts() {
        let g = glyph_from_strokes(vec![square(0.0, 0.0, 10.0)], None).unwrap();
        let case = encode_shape(&g, &ShapeParams::default());
        assert_eq!(count(&case, "straight"), 4);
        assert_eq!(count(&case, "adjacent"), 4);
        assert_eq!(count(&case, "partOf"), 4);
        assert_eq!(
            case.entities()
                .iter()
                .filter(|e| e.kind == EntityKind::Cycle)
                .count(),
            1
        );
    }

    #[test]
    fn circle_is_convex() {
        let g = glyph_from_strokes(vec![circle(50.0, 50.0, 20.0, 32)], None).unwrap();
        let case = encode_shape(&g, &ShapeParams::default());
        assert!(count(&case, "convex") >= 1);
        assert_eq!(count(&case, "concave"), 0);
        assert_eq!(count(&case, "curved"), count(&case, "convex"));
    }

    #[test]
    fn concentric_squares_nest() {
        let g = glyph_from_strokes(vec![square(0.0, 0.0, 30.0), square(10.0, 10.0, 10.0)], None)
            .unwrap();
        let a = analyze(&g, &ShapeParams::default());
        assert_eq!(a.cycles.len(), 2);
        assert_eq!(a.tree.depth, vec![1, 2]);
        let case = encode_shape(&g, &ShapeParams::default());
        assert!(case
            .facts()
            .iter()
            .any(|&f| case.render(f) == "contains(c0, c1)"));
    }

    #[test]
    fn shared_edge_splits_two_faces() {
        // A "θ": three strokes between the same two junctions.
        let g = glyph_from_strokes(
            vec![
                open(&[(20.0, 0.0), (0.0, 0.0), (0.0, 20.0), (20.0, 20.0)]),
                open(&[(20.0, 0.0), (20.0, 20.0)]),
                open(&[(20.0, 0.0), (40.0, 0.0), (40.0, 20.0), (20.0, 20.0)]),
            ],
            None,
        )
        .unwrap();
        let a = analyze(&g, &ShapeParams::default());
        assert_eq!(a.cycles.iter().map(|c| c.area).collect::<Vec<_>>(), vec![400.0, 400.0]);
        assert_eq!(a.tree.depth, vec![1, 1]);
    }

    #[test]
    fn tail_is_not_part_of_cycle() {
        // A "9": loop with a stem hanging off its right side.
        let g = glyph_from_strokes(
            vec![
                closed(&[(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)]),
                open(&[(10.0, 10.0), (10.0, 30.0)]),
            ],
            None,
        )
        .unwrap();
        let a = analyze(&g, &ShapeParams::default());
        assert_eq!(a.cycles.len(), 1);
        assert_eq!(a.cycles[0].sides.len(), 4);
        let case = encode_shape(&g, &ShapeParams::default());
        assert_eq!(count(&case, "terminal"), 1);
        assert_eq!(count(&case, "connectsTo"), 2);
    }
}
