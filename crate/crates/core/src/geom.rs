//! Planar primitives on the truncated strip.
//!
//! Coordinates are `(theta, r)` where `theta` is the lifted angle (unbounded,
//! the deck translation acts by `theta -> theta + 1`) and `r` is the
//! log-radial coordinate: `r -> +inf` is the north end of the annulus,
//! `r -> -inf` the south end. The working window truncates `r` to `[-R, R]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Global snap tolerance for vertex identification and on-line tests.
pub const SNAP: f64 = 1e-9;

/// A point of the lifted strip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripPoint {
    pub theta: f64,
    pub r: f64,
}

impl StripPoint {
    pub fn new(theta: f64, r: f64) -> Self {
        StripPoint { theta, r }
    }

    /// Deck translation by `k` periods.
    pub fn tau(self, k: i64) -> Self {
        StripPoint::new(self.theta + k as f64, self.r)
    }

    pub fn dist(self, other: StripPoint) -> f64 {
        (self.theta - other.theta).hypot(self.r - other.r)
    }
}

/// An ordered polygonal curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub vertices: Vec<StripPoint>,
    pub closed: bool,
}

impl Polyline {
    pub fn open(vertices: Vec<StripPoint>) -> Self {
        Polyline { vertices, closed: false }
    }

    pub fn closed(vertices: Vec<StripPoint>) -> Self {
        Polyline { vertices, closed: true }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Consecutive vertex pairs, wrapping around when closed.
    pub fn segments(&self) -> impl Iterator<Item = (StripPoint, StripPoint)> + '_ {
        let n = self.vertices.len();
        let m = if self.closed && n > 1 { n } else { n.saturating_sub(1) };
        (0..m).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn arc_length(&self) -> f64 {
        self.segments().map(|(a, b)| a.dist(b)).sum()
    }

    /// Point at normalized parameter `t in [0,1]` by arc length.
    pub fn at(&self, t: f64) -> StripPoint {
        let total = self.arc_length();
        if total <= 0.0 {
            return self.vertices[0];
        }
        let mut target = t.clamp(0.0, 1.0) * total;
        for (a, b) in self.segments() {
            let d = a.dist(b);
            if target <= d || d <= 0.0 {
                if d <= 0.0 {
                    continue;
                }
                let s = target / d;
                return StripPoint::new(a.theta + s * (b.theta - a.theta), a.r + s * (b.r - a.r));
            }
            target -= d;
        }
        *self.vertices.last().unwrap()
    }

    /// Uniform arc-length samples, endpoints included for open curves.
    pub fn sample(&self, n: usize) -> Vec<StripPoint> {
        let n = n.max(2);
        (0..=n).map(|i| self.at(i as f64 / n as f64)).collect()
    }

    pub fn translate(&self, k: i64) -> Polyline {
        Polyline {
            vertices: self.vertices.iter().map(|p| p.tau(k)).collect(),
            closed: self.closed,
        }
    }

    /// True when no two non-adjacent segments intersect.
    pub fn is_simple(&self) -> bool {
        let segs: Vec<_> = self.segments().collect();
        let n = segs.len();
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (self.closed && i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                if segments_cross(segs[i].0, segs[i].1, segs[j].0, segs[j].1) {
                    return false;
                }
            }
        }
        true
    }
}

/// Which end of the annulus a proper-line endpoint reaches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum End {
    North,
    South,
}

impl End {
    pub fn flip(self) -> End {
        match self {
            End::North => End::South,
            End::South => End::North,
        }
    }
}

/// Side of an oriented line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
    On,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
            Side::On => Side::On,
        }
    }
}

/// An oriented proper line of the truncated strip: an open simple polyline
/// whose two endpoints lie on the frontier rows `r = -R` and/or `r = +R`.
/// The end class is deduced from the exit frontier (window-relative type).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProperLine {
    pub path: Polyline,
    pub end_start: End,
    pub end_finish: End,
    /// Window half-height used to classify the endpoints.
    pub window: f64,
}

impl ProperLine {
    /// Build from an open polyline; endpoints must lie within snap of a
    /// frontier row.
    pub fn from_path(path: Polyline, window: f64) -> Result<ProperLine> {
        if path.closed || path.len() < 2 {
            return Err(Error::BadParams("proper line needs an open polyline".into()));
        }
        let classify = |p: &StripPoint| -> Result<End> {
            if (p.r - window).abs() <= SNAP {
                Ok(End::North)
            } else if (p.r + window).abs() <= SNAP {
                Ok(End::South)
            } else {
                Err(Error::BadParams(format!(
                    "proper line endpoint r={} not on frontier +/-{}",
                    p.r, window
                )))
            }
        };
        let end_start = classify(path.vertices.first().unwrap())?;
        let end_finish = classify(path.vertices.last().unwrap())?;
        Ok(ProperLine { path, end_start, end_finish, window })
    }

    /// Topological type: both ends north, both south, or north-south.
    pub fn ends(&self) -> (End, End) {
        (self.end_start, self.end_finish)
    }

    pub fn is_north_south(&self) -> bool {
        self.end_start != self.end_finish
    }

    pub fn translate(&self, k: i64) -> ProperLine {
        ProperLine {
            path: self.path.translate(k),
            end_start: self.end_start,
            end_finish: self.end_finish,
            window: self.window,
        }
    }

    pub fn reversed(&self) -> ProperLine {
        let mut vertices = self.path.vertices.clone();
        vertices.reverse();
        ProperLine {
            path: Polyline::open(vertices),
            end_start: self.end_finish,
            end_finish: self.end_start,
            window: self.window,
        }
    }

    /// The polyline extended by vertical rays through its endpoints, so the
    /// truncated line behaves like the full proper line of the plane. Rays
    /// are represented by far-away points.
    fn extended_vertices(&self) -> Vec<StripPoint> {
        extend_by_rays(&self.path, self.end_start, self.end_finish)
    }
}

/// Append vertical rays (as far-away points) matching the end classes.
pub(crate) fn extend_by_rays(path: &Polyline, start: End, finish: End) -> Vec<StripPoint> {
    const FAR: f64 = 1e7;
    let mut v = Vec::with_capacity(path.len() + 2);
    let first = path.vertices[0];
    let last = *path.vertices.last().unwrap();
    let ray = |p: StripPoint, end: End| match end {
        End::North => StripPoint::new(p.theta, FAR),
        End::South => StripPoint::new(p.theta, -FAR),
    };
    v.push(ray(first, start));
    v.extend_from_slice(&path.vertices);
    v.push(ray(last, finish));
    v
}

/// `separates` for an open curve with explicitly given end classes (used
/// for image curves of proper lines, which need not stay in the window).
pub fn separates_open(
    path: &Polyline,
    ends: (End, End),
    a: StripPoint,
    b: StripPoint,
) -> Result<bool> {
    let verts = extend_by_rays(path, ends.0, ends.1);
    let mut crossings = 0usize;
    for i in 0..verts.len() - 1 {
        let (c, d) = (verts[i], verts[i + 1]);
        if dist_point_segment(a, c, d) <= SNAP || dist_point_segment(b, c, d) <= SNAP {
            return Err(Error::TouchesLine);
        }
        if segments_cross(a, b, c, d) {
            crossings += 1;
        }
        if i > 0 && dist_point_segment(verts[i], a, b) <= SNAP {
            return Err(Error::TouchesLine);
        }
    }
    Ok(crossings % 2 == 1)
}

fn cross(o: StripPoint, a: StripPoint, b: StripPoint) -> f64 {
    (a.theta - o.theta) * (b.r - o.r) - (a.r - o.r) * (b.theta - o.theta)
}

fn dist_point_segment(p: StripPoint, a: StripPoint, b: StripPoint) -> f64 {
    let vx = b.theta - a.theta;
    let vy = b.r - a.r;
    let len2 = vx * vx + vy * vy;
    if len2 <= 0.0 {
        return p.dist(a);
    }
    let t = (((p.theta - a.theta) * vx + (p.r - a.r) * vy) / len2).clamp(0.0, 1.0);
    p.dist(StripPoint::new(a.theta + t * vx, a.r + t * vy))
}

/// Proper crossing test for two segments (shared endpoints do not count).
fn segments_cross(a: StripPoint, b: StripPoint, c: StripPoint, d: StripPoint) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    false
}

/// Side of `point` relative to the oriented line, `On` within snap tolerance.
pub fn side(point: StripPoint, line: &ProperLine) -> Side {
    let verts = line.extended_vertices();
    let mut best = f64::INFINITY;
    let mut best_i = 0;
    for i in 0..verts.len() - 1 {
        let d = dist_point_segment(point, verts[i], verts[i + 1]);
        if d < best {
            best = d;
            best_i = i;
        }
    }
    if best <= SNAP {
        return Side::On;
    }
    // Disambiguate near a shared vertex of two segments by picking the
    // segment whose supporting line is farther from the point.
    let (a, b) = (verts[best_i], verts[best_i + 1]);
    let mut c = cross(a, b, point);
    if best_i + 2 < verts.len() {
        let (a2, b2) = (verts[best_i + 1], verts[best_i + 2]);
        let d_next = dist_point_segment(point, a2, b2);
        if (d_next - best).abs() <= SNAP {
            // Corner case: combine using the bisector, i.e. side of the
            // corner seen as a single wedge.
            let c2 = cross(a2, b2, point);
            if c.abs() < c2.abs() {
                c = c2;
            }
        }
    }
    if c > 0.0 {
        Side::Left
    } else {
        Side::Right
    }
}

/// Parity of proper crossings of segment `ab` with the extended line.
fn crossing_parity(a: StripPoint, b: StripPoint, line: &ProperLine) -> Result<usize> {
    let verts = line.extended_vertices();
    let mut crossings = 0usize;
    for i in 0..verts.len() - 1 {
        let (c, d) = (verts[i], verts[i + 1]);
        if dist_point_segment(a, c, d) <= SNAP || dist_point_segment(b, c, d) <= SNAP {
            return Err(Error::TouchesLine);
        }
        if segments_cross(a, b, c, d) {
            crossings += 1;
        }
        // A path vertex exactly on ab would make the parity ambiguous.
        if i > 0 && dist_point_segment(verts[i], a, b) <= SNAP {
            return Err(Error::TouchesLine);
        }
    }
    Ok(crossings)
}

/// True when `a` and `b` lie in different complementary components of the
/// proper line (the line, extended to its ends, separates the plane in two).
pub fn separates(line: &ProperLine, a: StripPoint, b: StripPoint) -> Result<bool> {
    Ok(crossing_parity(a, b, line)? % 2 == 1)
}

/// `separates` for whole sample sets; errors if the sets straddle the line
/// equivocally.
pub fn separates_sets(line: &ProperLine, a: &[StripPoint], b: &[StripPoint]) -> Result<bool> {
    let mut result: Option<bool> = None;
    for pa in a {
        for pb in b {
            let s = separates(line, *pa, *pb)?;
            match result {
                None => result = Some(s),
                Some(prev) if prev != s => return Err(Error::TouchesLine),
                _ => {}
            }
        }
    }
    result.ok_or(Error::TouchesLine)
}

// ---------------------------------------------------------------------------
// Winding numbers
// ---------------------------------------------------------------------------

/// Total angular variation, in turns, of `field` along `curve`.
///
/// Segments are bisected until consecutive field directions differ by less
/// than `refine_tol` radians, which keeps the lifted angle unambiguous.
pub fn winding<F>(curve: &Polyline, field: F, refine_tol: f64) -> Result<f64>
where
    F: Fn(StripPoint) -> (f64, f64),
{
    if !(refine_tol > 0.0 && refine_tol <= std::f64::consts::FRAC_PI_2) {
        return Err(Error::BadParams("refine_tol must lie in (0, pi/2]".into()));
    }
    // Initial sampling: one parameter per vertex, refined to at least 256
    // subdivisions so full turns between coarse samples cannot alias away
    // before the adaptive pass sees them.
    let coarse = if curve.closed { curve.len().max(3) } else { (curve.len() - 1).max(1) };
    let per = (256 / coarse).max(1);
    let n = coarse * per;
    let params: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let eval = |t: f64| -> Result<(f64, f64)> {
        let p = curve.at(t);
        let (vx, vy) = field(p);
        let n = vx.hypot(vy);
        if n < 1e-13 || !n.is_finite() {
            return Err(Error::FieldVanishes(p));
        }
        Ok((vx / n, vy / n))
    };

    let mut total = 0.0f64;
    let mut budget: u64 = 1 << 22;
    let mut stack: Vec<(f64, (f64, f64), f64, (f64, f64), u32)> = Vec::new();
    for w in params.windows(2) {
        stack.push((w[0], eval(w[0])?, w[1], eval(w[1])?, 0));
        while let Some((t0, v0, t1, v1, depth)) = stack.pop() {
            let dot = v0.0 * v1.0 + v0.1 * v1.1;
            let crs = v0.0 * v1.1 - v0.1 * v1.0;
            let delta = crs.atan2(dot);
            if delta.abs() < refine_tol {
                total += delta;
                continue;
            }
            if depth > 48 || budget == 0 {
                return Err(Error::NoConvergence(format!(
                    "winding refinement exhausted near t={t0}"
                )));
            }
            budget -= 1;
            let tm = 0.5 * (t0 + t1);
            let vm = eval(tm)?;
            stack.push((tm, vm, t1, v1, depth + 1));
            stack.push((t0, v0, tm, vm, depth + 1));
        }
    }
    Ok(total / (2.0 * std::f64::consts::PI))
}

// ---------------------------------------------------------------------------
// Polygon regions
// ---------------------------------------------------------------------------

/// A polygonal region: positively oriented outer boundary plus disjoint holes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonRegion {
    pub outer: Polyline,
    pub holes: Vec<Polyline>,
}

impl PolygonRegion {
    pub fn new(outer: Polyline) -> Self {
        PolygonRegion { outer, holes: Vec::new() }
    }

    pub fn rect(theta0: f64, theta1: f64, r0: f64, r1: f64) -> Self {
        PolygonRegion::new(Polyline::closed(vec![
            StripPoint::new(theta0, r0),
            StripPoint::new(theta1, r0),
            StripPoint::new(theta1, r1),
            StripPoint::new(theta0, r1),
        ]))
    }

    /// Even-odd containment test against outer boundary and holes.
    pub fn contains(&self, p: StripPoint) -> bool {
        if !point_in_ring(p, &self.outer) {
            return false;
        }
        !self.holes.iter().any(|h| point_in_ring(p, h))
    }

    /// Distance from `p` to the region boundary.
    pub fn boundary_dist(&self, p: StripPoint) -> f64 {
        let mut best = f64::INFINITY;
        for ring in std::iter::once(&self.outer).chain(self.holes.iter()) {
            for (a, b) in ring.segments() {
                best = best.min(dist_point_segment(p, a, b));
            }
        }
        best
    }
}

fn point_in_ring(p: StripPoint, ring: &Polyline) -> bool {
    let mut inside = false;
    for (a, b) in ring.segments() {
        if (a.r > p.r) != (b.r > p.r) {
            let t = (p.r - a.r) / (b.r - a.r);
            let x = a.theta + t * (b.theta - a.theta);
            if p.theta < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Conservative intersection test between two polygon regions: boundary
/// crossings, near-contact within snap, or mutual containment all count.
pub fn polygons_intersect(a: &PolygonRegion, b: &PolygonRegion) -> bool {
    for (p, q) in a.outer.segments() {
        for (s, t) in b.outer.segments() {
            if segments_cross(p, q, s, t)
                || dist_point_segment(p, s, t) <= SNAP
                || dist_point_segment(s, p, q) <= SNAP
            {
                return true;
            }
        }
    }
    // Containment probes.
    if !a.outer.is_empty() && b.contains(a.outer.vertices[0]) {
        return true;
    }
    if !b.outer.is_empty() && a.contains(b.outer.vertices[0]) {
        return true;
    }
    false
}

/// Boundary components of a union of rectilinear regions.
///
/// Coordinates are quantized to `step`; regions whose boundaries overlap
/// along segments are merged (that is the point of the union).
pub fn union_boundary(parts: &[PolygonRegion], step: f64) -> Result<Vec<Polyline>> {
    if parts.is_empty() {
        return Ok(Vec::new());
    }
    let q = |x: f64| -> Result<i64> {
        let v = x / step;
        let r = v.round();
        if (v - r).abs() > 1e-6 {
            return Err(Error::DegenerateContact);
        }
        Ok(r as i64)
    };
    use std::collections::HashSet;
    let mut cells: HashSet<(i64, i64)> = HashSet::new();
    for part in parts {
        // Rasterize by sampling cell centers inside the bounding box.
        let mut lo = (i64::MAX, i64::MAX);
        let mut hi = (i64::MIN, i64::MIN);
        for v in &part.outer.vertices {
            lo = (lo.0.min(q(v.theta)?), lo.1.min(q(v.r)?));
            hi = (hi.0.max(q(v.theta)?), hi.1.max(q(v.r)?));
        }
        for cx in lo.0..hi.0 {
            for cy in lo.1..hi.1 {
                let center =
                    StripPoint::new((cx as f64 + 0.5) * step, (cy as f64 + 0.5) * step);
                if part.contains(center) {
                    cells.insert((cx, cy));
                }
            }
        }
    }
    Ok(trace_cell_boundary(&cells, step))
}

/// Trace boundary loops of a set of unit cells; shared machinery with the
/// brick module's boundary extraction, kept here for plain cell sets.
pub(crate) fn trace_cell_boundary(
    cells: &std::collections::HashSet<(i64, i64)>,
    step: f64,
) -> Vec<Polyline> {
    use std::collections::HashMap;
    // Directed boundary edges with the region kept on the left.
    let mut next: HashMap<(i64, i64), Vec<(i64, i64)>> = HashMap::new();
    let mut edges: Vec<((i64, i64), (i64, i64))> = Vec::new();
    for &(cx, cy) in cells.iter() {
        let sides = [
            ((cx, cy), (cx + 1, cy), (cx, cy - 1)),         // bottom, outward below
            ((cx + 1, cy), (cx + 1, cy + 1), (cx + 1, cy)), // right
            ((cx + 1, cy + 1), (cx, cy + 1), (cx, cy + 1)), // top
            ((cx, cy + 1), (cx, cy), (cx - 1, cy)),         // left
        ];
        for (from, to, nbr) in sides {
            if !cells.contains(&nbr) {
                next.entry(from).or_default().push(to);
                edges.push((from, to));
            }
        }
    }
    let mut used: std::collections::HashSet<((i64, i64), (i64, i64))> =
        std::collections::HashSet::new();
    let mut loops = Vec::new();
    for &(start, first) in &edges {
        if used.contains(&(start, first)) {
            continue;
        }
        let mut path = vec![start];
        let mut prev = start;
        let mut cur = first;
        used.insert((start, first));
        while cur != start {
            path.push(cur);
            let outs = &next[&cur];
            // At pinch points prefer the leftmost turn to stay on one loop.
            let dir = (cur.0 - prev.0, cur.1 - prev.1);
            let mut chosen = None;
            for turn in [(-dir.1, dir.0), dir, (dir.1, -dir.0)] {
                let cand = (cur.0 + turn.0, cur.1 + turn.1);
                if outs.contains(&cand) && !used.contains(&(cur, cand)) {
                    chosen = Some(cand);
                    break;
                }
            }
            let Some(nxt) = chosen else { break };
            used.insert((cur, nxt));
            prev = cur;
            cur = nxt;
        }
        let mut verts: Vec<StripPoint> = path
            .iter()
            .map(|&(x, y)| StripPoint::new(x as f64 * step, y as f64 * step))
            .collect();
        // Drop collinear interior vertices.
        verts = simplify_closed(verts);
        loops.push(Polyline::closed(verts));
    }
    loops
}

fn simplify_closed(verts: Vec<StripPoint>) -> Vec<StripPoint> {
    let n = verts.len();
    if n < 4 {
        return verts;
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let prev = verts[(i + n - 1) % n];
        let cur = verts[i];
        let next = verts[(i + 1) % n];
        if cross(prev, cur, next).abs() > 1e-12 {
            out.push(cur);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vertical_line(theta: f64, window: f64) -> ProperLine {
        ProperLine::from_path(
            Polyline::open(vec![
                StripPoint::new(theta, -window),
                StripPoint::new(theta, window),
            ]),
            window,
        )
        .unwrap()
    }

    #[test]
    fn winding_constant_field_is_zero() {
        let circle = Polyline::closed(
            (0..64)
                .map(|i| {
                    let a = 2.0 * std::f64::consts::PI * i as f64 / 64.0;
                    StripPoint::new(a.cos(), a.sin())
                })
                .collect(),
        );
        let w = winding(&circle, |_| (1.0, 0.5), 0.5).unwrap();
        assert!(w.abs() < 1e-12);
    }

    #[test]
    fn winding_radial_field_is_one() {
        let circle = Polyline::closed(
            (0..8)
                .map(|i| {
                    let a = 2.0 * std::f64::consts::PI * i as f64 / 8.0;
                    StripPoint::new(a.cos(), a.sin())
                })
                .collect(),
        );
        let w = winding(&circle, |p| (p.theta, p.r), 0.3).unwrap();
        assert!((w - 1.0).abs() < 1e-9, "w={w}");
    }

    #[test]
    fn winding_saddle_displacement_is_minus_one() {
        // Field x -> h(x) - x for h = (2x, y/2) along a circle about 0.
        let circle = Polyline::closed(
            (0..16)
                .map(|i| {
                    let a = 2.0 * std::f64::consts::PI * i as f64 / 16.0;
                    StripPoint::new(a.cos(), a.sin())
                })
                .collect(),
        );
        let w = winding(&circle, |p| (2.0 * p.theta - p.theta, p.r / 2.0 - p.r), 0.4).unwrap();
        assert!((w + 1.0).abs() < 1e-9, "w={w}");
    }

    #[test]
    fn winding_field_vanishes() {
        let circle = Polyline::closed(
            (0..8)
                .map(|i| {
                    let a = 2.0 * std::f64::consts::PI * i as f64 / 8.0;
                    StripPoint::new(a.cos(), a.sin())
                })
                .collect(),
        );
        let res = winding(&circle, |p| (p.theta - 1.0, p.r), 0.3);
        assert!(matches!(res, Err(Error::FieldVanishes(_))));
    }

    #[test]
    fn side_of_vertical_line() {
        let line = vertical_line(0.0, 4.0);
        assert_eq!(side(StripPoint::new(0.5, 0.0), &line), Side::Right);
        assert_eq!(side(StripPoint::new(-0.5, 0.0), &line), Side::Left);
        assert_eq!(side(StripPoint::new(0.0, 3.0), &line), Side::On);
    }

    #[test]
    fn side_antisymmetric_under_reversal() {
        let line = vertical_line(0.0, 4.0);
        let rev = line.reversed();
        for p in [
            StripPoint::new(0.7, 1.3),
            StripPoint::new(-0.2, -2.0),
            StripPoint::new(2.0, 0.0),
        ] {
            assert_eq!(side(p, &line), side(p, &rev).flip());
        }
    }

    #[test]
    fn separates_vertical() {
        let line = vertical_line(1.0, 4.0);
        assert!(separates(&line, StripPoint::new(0.0, 0.0), StripPoint::new(2.0, 0.0)).unwrap());
        assert!(!separates(&line, StripPoint::new(0.0, 0.0), StripPoint::new(0.5, 0.0)).unwrap());
        assert_eq!(
            separates(&line, StripPoint::new(0.0, 0.0), StripPoint::new(0.0, 0.0)).unwrap(),
            false
        );
    }

    #[test]
    fn separates_symmetric_and_touching_errors() {
        let line = vertical_line(1.0, 4.0);
        let a = StripPoint::new(0.3, 1.0);
        let b = StripPoint::new(1.7, -2.0);
        assert_eq!(
            separates(&line, a, b).unwrap(),
            separates(&line, b, a).unwrap()
        );
        assert!(matches!(
            separates(&line, StripPoint::new(1.0, 0.0), b),
            Err(Error::TouchesLine)
        ));
    }

    #[test]
    fn hook_line_separates_inside_from_outside() {
        // A north-type hook: down from the north frontier and back up.
        let line = ProperLine::from_path(
            Polyline::open(vec![
                StripPoint::new(-1.0, 4.0),
                StripPoint::new(-1.0, 0.0),
                StripPoint::new(1.0, 0.0),
                StripPoint::new(1.0, 4.0),
            ]),
            4.0,
        )
        .unwrap();
        // Inside the hook vs below it: separated (the hook closes at north).
        assert!(separates(&line, StripPoint::new(0.0, 2.0), StripPoint::new(0.0, -2.0)).unwrap());
        // Two points below the hook: not separated.
        assert!(
            !separates(&line, StripPoint::new(-2.0, -2.0), StripPoint::new(2.0, -2.0)).unwrap()
        );
    }

    #[test]
    fn polygons_intersect_offsets() {
        let a = PolygonRegion::rect(0.0, 1.0, 0.0, 1.0);
        let b = PolygonRegion::rect(2.0, 3.0, 0.0, 1.0);
        let c = PolygonRegion::rect(0.5, 1.5, 0.0, 1.0);
        assert!(!polygons_intersect(&a, &b));
        assert!(polygons_intersect(&a, &c));
        // Containment without boundary crossing.
        let d = PolygonRegion::rect(0.25, 0.75, 0.25, 0.75);
        assert!(polygons_intersect(&a, &d));
    }

    #[test]
    fn union_boundary_disjoint_parts_keep_their_boundaries() {
        let a = PolygonRegion::rect(0.0, 1.0, 0.0, 1.0);
        let b = PolygonRegion::rect(2.0, 3.0, 0.0, 1.0);
        let loops = union_boundary(&[a, b], 0.5).unwrap();
        assert_eq!(loops.len(), 2);
    }

    #[test]
    fn union_boundary_merges_touching_parts() {
        let a = PolygonRegion::rect(0.0, 1.0, 0.0, 1.0);
        let b = PolygonRegion::rect(1.0, 2.0, 0.0, 1.0);
        let loops = union_boundary(&[a, b], 0.5).unwrap();
        assert_eq!(loops.len(), 1);
        // Rectangle 2x1 has 4 corners after simplification.
        assert_eq!(loops[0].vertices.len(), 4);
    }
}
