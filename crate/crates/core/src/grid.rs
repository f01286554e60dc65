//! Periodic cell grid on the truncated strip, and the lattice machinery
//! shared by bricks, attractors and simplicial lines: cell sets, boundary
//! tracing, flood fills, disk tests.
//!
//! Cells are unit squares of a grid with `cols` cells per period and `rows`
//! cells spanning `r in [-R, R]`. A lifted cell is addressed as `(x, y)`
//! with `x` unbounded; the quotient cell is `x mod cols`.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{End, Polyline, ProperLine, StripPoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellGrid {
    /// Cells per period (theta direction).
    pub cols: i64,
    /// Cell rows over the window.
    pub rows: i64,
    /// Window half-height R.
    pub window: f64,
}

impl CellGrid {
    pub fn new(cells_per_unit: i64, window: f64) -> Result<CellGrid> {
        let rows_f = 2.0 * window * cells_per_unit as f64;
        let rows = rows_f.round() as i64;
        if (rows_f - rows as f64).abs() > 1e-9 || rows <= 0 || cells_per_unit <= 0 {
            return Err(Error::BadParams(format!(
                "grid needs integer rows: cells_per_unit={cells_per_unit}, window={window}"
            )));
        }
        Ok(CellGrid { cols: cells_per_unit, rows, window })
    }

    #[inline]
    pub fn cell_w(&self) -> f64 {
        1.0 / self.cols as f64
    }

    #[inline]
    pub fn cell_h(&self) -> f64 {
        2.0 * self.window / self.rows as f64
    }

    /// Lattice point `(x, y)` in strip coordinates.
    #[inline]
    pub fn point(&self, x: i64, y: i64) -> StripPoint {
        StripPoint::new(x as f64 * self.cell_w(), -self.window + y as f64 * self.cell_h())
    }

    /// Center of cell `(x, y)`.
    #[inline]
    pub fn cell_center(&self, x: i64, y: i64) -> StripPoint {
        StripPoint::new(
            (x as f64 + 0.5) * self.cell_w(),
            -self.window + (y as f64 + 0.5) * self.cell_h(),
        )
    }

    /// Cell containing a point (y clamped to the window rows).
    #[inline]
    pub fn locate(&self, p: StripPoint) -> (i64, i64) {
        let x = (p.theta / self.cell_w()).floor() as i64;
        let y = (((p.r + self.window) / self.cell_h()).floor() as i64).clamp(0, self.rows - 1);
        (x, y)
    }

    #[inline]
    pub fn in_window(&self, y: i64) -> bool {
        (0..self.rows).contains(&y)
    }

    #[inline]
    pub fn quot(&self, x: i64, y: i64) -> usize {
        (y * self.cols + x.rem_euclid(self.cols)) as usize
    }

    /// Distance from a point to the closed unit cell `(x, y)`.
    pub fn dist_to_cell(&self, p: StripPoint, x: i64, y: i64) -> f64 {
        let cw = self.cell_w();
        let ch = self.cell_h();
        let x0 = x as f64 * cw;
        let y0 = -self.window + y as f64 * ch;
        let dx = (x0 - p.theta).max(p.theta - (x0 + cw)).max(0.0);
        let dy = (y0 - p.r).max(p.r - (y0 + ch)).max(0.0);
        dx.hypot(dy)
    }
}

/// A finite set of lifted cells.
#[derive(Debug, Clone, Default)]
pub struct CellSet {
    pub cells: HashSet<(i64, i64)>,
}

impl CellSet {
    pub fn new() -> Self {
        CellSet { cells: HashSet::new() }
    }

    pub fn from_iter(it: impl IntoIterator<Item = (i64, i64)>) -> Self {
        CellSet { cells: it.into_iter().collect() }
    }

    pub fn insert(&mut self, c: (i64, i64)) {
        self.cells.insert(c);
    }

    pub fn contains(&self, c: (i64, i64)) -> bool {
        self.cells.contains(&c)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn translate(&self, shift_cols: i64) -> CellSet {
        CellSet::from_iter(self.cells.iter().map(|&(x, y)| (x + shift_cols, y)))
    }

    pub fn bbox(&self) -> Option<(i64, i64, i64, i64)> {
        if self.cells.is_empty() {
            return None;
        }
        let mut x0 = i64::MAX;
        let mut x1 = i64::MIN;
        let mut y0 = i64::MAX;
        let mut y1 = i64::MIN;
        for &(x, y) in &self.cells {
            x0 = x0.min(x);
            x1 = x1.max(x + 1);
            y0 = y0.min(y);
            y1 = y1.max(y + 1);
        }
        Some((x0, x1, y0, y1))
    }

    /// 4-connectivity test.
    pub fn is_connected(&self) -> bool {
        if self.cells.is_empty() {
            return true;
        }
        let start = *self.cells.iter().min().unwrap();
        let mut seen = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(start);
        queue.push_back(start);
        while let Some((x, y)) = queue.pop_front() {
            for n in [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)] {
                if self.cells.contains(&n) && seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        seen.len() == self.cells.len()
    }

    /// Closed-disk test: connected, no holes, no pinch corners.
    pub fn is_disk(&self) -> bool {
        if self.cells.is_empty() || !self.is_connected() {
            return false;
        }
        // No pinch: a lattice corner whose four incident cells alternate
        // in/out diagonally breaks the manifold boundary.
        let (x0, x1, y0, y1) = self.bbox().unwrap();
        for x in x0..=x1 {
            for y in y0..=y1 {
                let a = self.cells.contains(&(x - 1, y - 1));
                let b = self.cells.contains(&(x, y - 1));
                let c = self.cells.contains(&(x - 1, y));
                let d = self.cells.contains(&(x, y));
                if (a && d && !b && !c) || (b && c && !a && !d) {
                    return false;
                }
            }
        }
        // No holes: complement within a one-cell frame is connected to it.
        let frame = ((x0 - 1)..(x1 + 1), (y0 - 1)..(y1 + 1));
        let mut seen: HashSet<(i64, i64)> = HashSet::new();
        let mut queue = VecDeque::new();
        let start = (x0 - 1, y0 - 1);
        seen.insert(start);
        queue.push_back(start);
        while let Some((x, y)) = queue.pop_front() {
            for n in [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)] {
                if frame.0.contains(&n.0)
                    && frame.1.contains(&n.1)
                    && !self.cells.contains(&n)
                    && seen.insert(n)
                {
                    queue.push_back(n);
                }
            }
        }
        let total = (frame.0.end - frame.0.start) * (frame.1.end - frame.1.start);
        seen.len() as i64 == total - self.cells.len() as i64
    }
}

// ---------------------------------------------------------------------------
// Lattice lines
// ---------------------------------------------------------------------------

/// A simple path along lattice edges, the simplicial realization of curves.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticePath {
    pub points: Vec<(i64, i64)>,
    pub closed: bool,
    /// True when an endpoint lies on an artificial clip boundary rather
    /// than the window frontier.
    pub cut: bool,
}

impl LatticePath {
    pub fn translate(&self, shift_cols: i64) -> LatticePath {
        LatticePath {
            points: self.points.iter().map(|&(x, y)| (x + shift_cols, y)).collect(),
            closed: self.closed,
            cut: self.cut,
        }
    }

    /// Normalized undirected edge list.
    pub fn edges(&self) -> Vec<((i64, i64), (i64, i64))> {
        let n = self.points.len();
        let m = if self.closed { n } else { n.saturating_sub(1) };
        (0..m)
            .map(|i| {
                let a = self.points[i];
                let b = self.points[(i + 1) % n];
                if a <= b {
                    (a, b)
                } else {
                    (b, a)
                }
            })
            .collect()
    }

    pub fn edge_set(&self) -> HashSet<((i64, i64), (i64, i64))> {
        self.edges().into_iter().collect()
    }

    pub fn point_set(&self) -> HashSet<(i64, i64)> {
        self.points.iter().copied().collect()
    }

    pub fn to_polyline(&self, grid: &CellGrid) -> Polyline {
        let verts = self.points.iter().map(|&(x, y)| grid.point(x, y)).collect();
        if self.closed {
            Polyline::closed(verts)
        } else {
            Polyline::open(verts)
        }
    }

    /// Interpret an open frontier-to-frontier path as a proper line.
    pub fn to_proper_line(&self, grid: &CellGrid) -> Result<ProperLine> {
        if self.closed || self.cut {
            return Err(Error::TruncationAmbiguous);
        }
        ProperLine::from_path(self.to_polyline(grid), grid.window)
    }

    pub fn end_rows(&self, grid: &CellGrid) -> Option<(End, End)> {
        if self.closed {
            return None;
        }
        let class = |y: i64| if y == grid.rows { End::North } else { End::South };
        let a = self.points.first()?;
        let b = self.points.last()?;
        if (a.1 != 0 && a.1 != grid.rows) || (b.1 != 0 && b.1 != grid.rows) {
            return None;
        }
        Some((class(a.1), class(b.1)))
    }
}

/// Boundary components of a lifted cell set, truncated to the window rows
/// and to the clip range `x_clip` (half-open, in lattice x-lines).
///
/// Edges lying on the window frontier rows or on the clip lines are not part
/// of any component; components are closed loops or open paths whose
/// endpoints lie on the frontier (or on the clip, marked `cut`). Components
/// are traced with the cell set on the left.
pub fn boundary_components(
    set: &CellSet,
    grid: &CellGrid,
    x_clip: (i64, i64),
) -> Vec<LatticePath> {
    // Directed edges keep the set on the left.
    let mut out_edges: HashMap<(i64, i64), Vec<(i64, i64)>> = HashMap::new();
    let mut all: Vec<((i64, i64), (i64, i64))> = Vec::new();
    let mut add = |from: (i64, i64), to: (i64, i64)| {
        // Skip edges on the frontier rows and on the clip columns.
        if from.1 == to.1 && (from.1 == 0 || from.1 == grid.rows) {
            return;
        }
        if from.0 == to.0 && (from.0 <= x_clip.0 || from.0 >= x_clip.1) {
            return;
        }
        all.push((from, to));
    };
    for &(x, y) in &set.cells {
        // Bottom edge: neighbor below; directed left-to-right... the set is
        // above, so keep-left means direction +x reversed. Work it out per
        // side: an edge with the in-cell on the left of travel.
        if !set.contains((x, y - 1)) || y == 0 {
            add((x + 1, y), (x, y)); // bottom edge, set above: travel -x
        }
        if !set.contains((x, y + 1)) || y + 1 == grid.rows {
            add((x, y + 1), (x + 1, y + 1)); // top edge, set below: travel +x
        }
        if !set.contains((x - 1, y)) {
            add((x, y), (x, y + 1)); // left edge, set right: travel +y
        }
        if !set.contains((x + 1, y)) {
            add((x + 1, y + 1), (x + 1, y)); // right edge, set left: travel -y
        }
    }
    for &(from, to) in &all {
        out_edges.entry(from).or_default().push(to);
    }
    let mut in_deg: HashMap<(i64, i64), usize> = HashMap::new();
    for &(_, to) in &all {
        *in_deg.entry(to).or_default() += 1;
    }
    let mut used: HashSet<((i64, i64), (i64, i64))> = HashSet::new();
    let mut components = Vec::new();

    let mut walk = |start: (i64, i64),
                    first: (i64, i64),
                    used: &mut HashSet<((i64, i64), (i64, i64))>,
                    out_edges: &HashMap<(i64, i64), Vec<(i64, i64)>>|
     -> LatticePath {
        let mut pts = vec![start, first];
        used.insert((start, first));
        let mut prev = start;
        let mut cur = first;
        loop {
            let dir = (cur.0 - prev.0, cur.1 - prev.1);
            let Some(outs) = out_edges.get(&cur) else { break };
            // Prefer the sharpest left turn to keep components simple at
            // pinch corners.
            let mut next = None;
            for turn in [(-dir.1, dir.0), dir, (dir.1, -dir.0)] {
                let cand = (cur.0 + turn.0, cur.1 + turn.1);
                if outs.contains(&cand) && !used.contains(&(cur, cand)) {
                    next = Some(cand);
                    break;
                }
            }
            let Some(nxt) = next else { break };
            used.insert((cur, nxt));
            prev = cur;
            cur = nxt;
            if cur == pts[0] {
                return LatticePath { points: pts, closed: true, cut: false };
            }
            pts.push(cur);
        }
        // Open path: ends when no continuation exists (frontier or clip).
        let cut_at = |p: (i64, i64)| {
            (p.1 != 0 && p.1 != grid.rows) && (p.0 <= x_clip.0 || p.0 >= x_clip.1)
        };
        let cut = cut_at(pts[0]) || cut_at(*pts.last().unwrap());
        LatticePath { points: pts, closed: false, cut }
    };

    // Open components first: start from points with more out-edges than
    // in-edges (path sources on the frontier or clip).
    let mut sources: Vec<(i64, i64)> = out_edges
        .keys()
        .filter(|p| out_edges[*p].len() > in_deg.get(*p).copied().unwrap_or(0))
        .copied()
        .collect();
    sources.sort();
    for s in sources {
        let outs = out_edges[&s].clone();
        for first in outs {
            if !used.contains(&(s, first)) {
                components.push(walk(s, first, &mut used, &out_edges));
            }
        }
    }
    // Remaining closed loops.
    let mut remaining: Vec<((i64, i64), (i64, i64))> =
        all.iter().filter(|e| !used.contains(e)).copied().collect();
    remaining.sort();
    for (from, to) in remaining {
        if !used.contains(&(from, to)) {
            components.push(walk(from, to, &mut used, &out_edges));
        }
    }
    components
}

/// Compact straight runs of a lattice path into polyline vertices.
pub fn simplify_lattice(path: &LatticePath) -> LatticePath {
    let pts = &path.points;
    if pts.len() < 3 {
        return path.clone();
    }
    let mut out = vec![pts[0]];
    for i in 1..pts.len() - 1 {
        let a = out.last().copied().unwrap();
        let b = pts[i];
        let c = pts[i + 1];
        let collinear = (b.0 - a.0) * (c.1 - b.1) == (b.1 - a.1) * (c.0 - b.0);
        if !collinear {
            out.push(b);
        }
    }
    out.push(*pts.last().unwrap());
    LatticePath { points: out, closed: path.closed, cut: path.cut }
}

// ---------------------------------------------------------------------------
// Flood fill against a lattice line
// ---------------------------------------------------------------------------

/// Labels the cells of the box `x in [x0, x1), y in [0, rows)` by the side
/// of the given lattice paths: cells are connected when their shared edge is
/// not on any path. Returns a map cell -> component id.
pub fn components_against_lines(
    grid: &CellGrid,
    x_range: (i64, i64),
    lines: &[&LatticePath],
) -> HashMap<(i64, i64), u32> {
    let mut blocked: HashSet<((i64, i64), (i64, i64))> = HashSet::new();
    for line in lines {
        blocked.extend(line.edge_set());
    }
    let edge_between = |a: (i64, i64), b: (i64, i64)| -> ((i64, i64), (i64, i64)) {
        // Shared lattice edge between 4-adjacent cells a, b.
        if a.0 == b.0 {
            let y = a.1.max(b.1);
            ((a.0, y), (a.0 + 1, y))
        } else {
            let x = a.0.max(b.0);
            ((x, a.1), (x, a.1 + 1))
        }
    };
    let mut label: HashMap<(i64, i64), u32> = HashMap::new();
    let mut next = 0u32;
    for sx in x_range.0..x_range.1 {
        for sy in 0..grid.rows {
            if label.contains_key(&(sx, sy)) {
                continue;
            }
            let id = next;
            next += 1;
            let mut queue = VecDeque::new();
            label.insert((sx, sy), id);
            queue.push_back((sx, sy));
            while let Some((x, y)) = queue.pop_front() {
                for n in [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)] {
                    if n.0 < x_range.0 || n.0 >= x_range.1 || n.1 < 0 || n.1 >= grid.rows {
                        continue;
                    }
                    if label.contains_key(&n) {
                        continue;
                    }
                    let (e0, e1) = edge_between((x, y), n);
                    let key = if e0 <= e1 { (e0, e1) } else { (e1, e0) };
                    if blocked.contains(&key) {
                        continue;
                    }
                    label.insert(n, id);
                    queue.push_back(n);
                }
            }
        }
    }
    label
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> CellGrid {
        CellGrid::new(8, 1.0).unwrap()
    }

    #[test]
    fn disk_tests() {
        let square = CellSet::from_iter([(0, 0), (1, 0), (0, 1), (1, 1)]);
        assert!(square.is_disk());
        let pinch = CellSet::from_iter([(0, 0), (1, 1)]);
        assert!(!pinch.is_disk());
        let mut ring = CellSet::new();
        for x in 0..3 {
            for y in 0..3 {
                if (x, y) != (1, 1) {
                    ring.insert((x, y));
                }
            }
        }
        assert!(!ring.is_disk());
        ring.insert((1, 1));
        assert!(ring.is_disk());
        let disconnected = CellSet::from_iter([(0, 0), (2, 0)]);
        assert!(!disconnected.is_disk());
    }

    #[test]
    fn boundary_of_interior_square_is_one_loop() {
        let g = grid();
        let mut set = CellSet::new();
        for x in 2..4 {
            for y in 3..6 {
                set.insert((x, y));
            }
        }
        let comps = boundary_components(&set, &g, (-100, 100));
        assert_eq!(comps.len(), 1);
        assert!(comps[0].closed);
        // Perimeter of a 2x3 block is 10 unit edges.
        assert_eq!(comps[0].points.len(), 10);
    }

    #[test]
    fn boundary_of_full_column_is_two_lines() {
        let g = grid();
        let mut set = CellSet::new();
        for x in 2..4 {
            for y in 0..g.rows {
                set.insert((x, y));
            }
        }
        let comps = boundary_components(&set, &g, (-100, 100));
        assert_eq!(comps.len(), 2);
        for c in &comps {
            assert!(!c.closed && !c.cut);
            let ends = c.end_rows(&g).unwrap();
            // Vertical sides run from one frontier to the other.
            assert_ne!(ends.0, ends.1);
        }
    }

    #[test]
    fn clip_marks_cut_components() {
        let g = grid();
        let mut set = CellSet::new();
        for x in -4..4 {
            set.insert((x, 5));
        }
        let comps = boundary_components(&set, &g, (-2, 2));
        assert!(comps.iter().any(|c| c.cut));
    }

    #[test]
    fn components_against_vertical_line() {
        let g = grid();
        let line = LatticePath {
            points: (0..=g.rows).map(|y| (4, y)).collect(),
            closed: false,
            cut: false,
        };
        let labels = components_against_lines(&g, (0, 8), &[&line]);
        assert_ne!(labels[&(3, 0)], labels[&(4, 0)]);
        assert_eq!(labels[&(0, 0)], labels[&(3, 7)]);
        assert_eq!(labels[&(4, 2)], labels[&(7, 7)]);
    }

    #[test]
    fn lattice_path_simplification() {
        let path = LatticePath {
            points: vec![(0, 0), (1, 0), (2, 0), (2, 1), (2, 2)],
            closed: false,
            cut: false,
        };
        let s = simplify_lattice(&path);
        assert_eq!(s.points, vec![(0, 0), (2, 0), (2, 2)]);
    }
}
