//! Constructive straightening of a pair of disjoint north-south lattice
//! lines: a global piecewise-linear homeomorphism of the truncated strip
//! sending the left line to `{0} x R` and the right line to `{1} x R`.
//!
//! The chart is built from a ladder of discrete-harmonic coordinates on the
//! band between the lines (and on one padding band on each side, whose
//! integer translates tile the rest of the strip). Injectivity is checked
//! per triangle and reported as a failure rather than assumed.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geom::StripPoint;
use crate::grid::{CellGrid, LatticePath};

/// Monotone boundary reparameterization, used to realize two independent
/// charts for the chart-independence cross-check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    /// Boundary v-data linear in arc position.
    Linear,
    /// Boundary v-data warped by a sinh profile (still monotone onto).
    Warped,
}

#[derive(Debug, Clone)]
struct Patch {
    /// Cells of the band; the flag picks the PL diagonal (true = bl-tr).
    cells: HashMap<(i64, i64), bool>,
    /// Chart coordinates per lattice vertex.
    uv: HashMap<(i64, i64), (f64, f64)>,
    /// Inverse index: uniform bins over the chart image holding candidate
    /// cells.
    bins: HashMap<(i64, i64), Vec<(i64, i64)>>,
    bin_size: f64,
    u_range: (f64, f64),
}

impl Patch {
    fn contains_cell(&self, c: (i64, i64)) -> bool {
        self.cells.contains_key(&c)
    }

    /// PL evaluation at a point known to lie in this patch.
    fn eval(&self, grid: &CellGrid, p: StripPoint) -> Option<(f64, f64)> {
        let (cx, cy) = grid.locate(p);
        let cell = self.locate_cell(grid, p, (cx, cy))?;
        self.eval_in_cell(grid, cell, p)
    }

    fn locate_cell(
        &self,
        grid: &CellGrid,
        p: StripPoint,
        guess: (i64, i64),
    ) -> Option<(i64, i64)> {
        if self.contains_cell(guess) {
            return Some(guess);
        }
        // Points on the patch boundary may round into the neighbor cell.
        let eps = 1e-9;
        for (dx, dy) in [(0.0, 0.0), (-eps, 0.0), (eps, 0.0), (0.0, -eps), (0.0, eps)] {
            let c = grid.locate(StripPoint::new(p.theta + dx, p.r + dy));
            if self.contains_cell(c) {
                return Some(c);
            }
        }
        None
    }

    fn eval_in_cell(
        &self,
        grid: &CellGrid,
        cell: (i64, i64),
        p: StripPoint,
    ) -> Option<(f64, f64)> {
        let (x, y) = cell;
        let diag_bl_tr = *self.cells.get(&cell)?;
        let bl = *self.uv.get(&(x, y))?;
        let br = *self.uv.get(&(x + 1, y))?;
        let tr = *self.uv.get(&(x + 1, y + 1))?;
        let tl = *self.uv.get(&(x, y + 1))?;
        let p0 = grid.point(x, y);
        let fx = ((p.theta - p0.theta) / grid.cell_w()).clamp(0.0, 1.0);
        let fy = ((p.r - p0.r) / grid.cell_h()).clamp(0.0, 1.0);
        let (a, b, c, wa, wb, wc);
        if diag_bl_tr {
            // Triangles (bl, br, tr) and (bl, tr, tl).
            if fx >= fy {
                (a, b, c) = (bl, br, tr);
                (wa, wb, wc) = (1.0 - fx, fx - fy, fy);
            } else {
                (a, b, c) = (bl, tr, tl);
                (wa, wb, wc) = (1.0 - fy, fx, fy - fx);
            }
        } else {
            // Triangles (bl, br, tl) and (br, tr, tl).
            if fx + fy <= 1.0 {
                (a, b, c) = (bl, br, tl);
                (wa, wb, wc) = (1.0 - fx - fy, fx, fy);
            } else {
                (a, b, c) = (br, tr, tl);
                (wa, wb, wc) = (1.0 - fy, fx + fy - 1.0, 1.0 - fx);
            }
        }
        Some((
            wa * a.0 + wb * b.0 + wc * c.0,
            wa * a.1 + wb * b.1 + wc * c.1,
        ))
    }

    /// PL inverse: locate the chart point in the image triangulation.
    fn eval_inv(&self, grid: &CellGrid, uv: (f64, f64)) -> Option<StripPoint> {
        let bx = (uv.0 / self.bin_size).floor() as i64;
        let by = (uv.1 / self.bin_size).floor() as i64;
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(cands) = self.bins.get(&(bx + dx, by + dy)) {
                    for &cell in cands {
                        if let Some(p) = self.invert_in_cell(grid, cell, uv) {
                            return Some(p);
                        }
                    }
                }
            }
        }
        None
    }

    fn invert_in_cell(
        &self,
        grid: &CellGrid,
        cell: (i64, i64),
        uv: (f64, f64),
    ) -> Option<StripPoint> {
        let (x, y) = cell;
        let diag_bl_tr = *self.cells.get(&cell)?;
        let bl = *self.uv.get(&(x, y))?;
        let br = *self.uv.get(&(x + 1, y))?;
        let tr = *self.uv.get(&(x + 1, y + 1))?;
        let tl = *self.uv.get(&(x, y + 1))?;
        let corners = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        let tris = if diag_bl_tr {
            [
                ([bl, br, tr], [corners[0], corners[1], corners[2]]),
                ([bl, tr, tl], [corners[0], corners[2], corners[3]]),
            ]
        } else {
            [
                ([bl, br, tl], [corners[0], corners[1], corners[3]]),
                ([br, tr, tl], [corners[1], corners[2], corners[3]]),
            ]
        };
        for (tri, local) in tris {
            if let Some((wa, wb, wc)) = barycentric(uv, tri) {
                let fx = wa * local[0].0 + wb * local[1].0 + wc * local[2].0;
                let fy = wa * local[0].1 + wb * local[1].1 + wc * local[2].1;
                let p0 = grid.point(x, y);
                return Some(StripPoint::new(
                    p0.theta + fx * grid.cell_w(),
                    p0.r + fy * grid.cell_h(),
                ));
            }
        }
        None
    }
}

fn barycentric(p: (f64, f64), tri: [(f64, f64); 3]) -> Option<(f64, f64, f64)> {
    let [a, b, c] = tri;
    let det = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
    if det.abs() < 1e-300 {
        return None;
    }
    let wa = ((b.0 - p.0) * (c.1 - p.1) - (b.1 - p.1) * (c.0 - p.0)) / det;
    let wb = ((c.0 - p.0) * (a.1 - p.1) - (c.1 - p.1) * (a.0 - p.0)) / det;
    let wc = 1.0 - wa - wb;
    let eps = -1e-9;
    if wa >= eps && wb >= eps && wc >= eps {
        Some((wa.max(0.0), wb.max(0.0), wc.max(0.0)))
    } else {
        None
    }
}

/// The straightening homeomorphism for a pair of disjoint NS lattice lines.
///
/// Besides the band between the lines, the chart covers a collar on each
/// side wide enough for every evaluation the index computations perform
/// (the collar width is sized from the map's angular drift bound).
pub struct StraightChart {
    grid: CellGrid,
    mid: Patch,
    left: Patch,
    right: Patch,
    left_anchor: LatticePath,
    right_anchor: LatticePath,
}

impl StraightChart {
    /// Build the chart; `d0` must lie strictly left of `d1`.
    pub fn build(
        grid: &CellGrid,
        d0: &LatticePath,
        d1: &LatticePath,
        ladder: Ladder,
    ) -> Result<StraightChart> {
        Self::build_with_drift(grid, d0, d1, ladder, 1.3)
    }

    /// `drift` bounds the theta-distance of any evaluated point from the
    /// band, in strip units.
    pub fn build_with_drift(
        grid: &CellGrid,
        d0: &LatticePath,
        d1: &LatticePath,
        ladder: Ladder,
        drift: f64,
    ) -> Result<StraightChart> {
        if d0.closed || d1.closed {
            return Err(Error::LadderFailure("lines must be open lattice paths".into()));
        }
        let collar = (drift * grid.cols as f64).ceil() as i64 + 4;
        let left_line = collar_line(grid, d0, collar, true)?;
        let right_line = collar_line(grid, d1, collar, false)?;
        let mid = solve_patch(grid, d0, d1, (0.0, 1.0), ladder)?;
        let left = solve_patch(grid, &left_line, d0, (-1.0, 0.0), ladder)?;
        let right = solve_patch(grid, d1, &right_line, (1.0, 2.0), ladder)?;
        Ok(StraightChart {
            grid: *grid,
            mid,
            left,
            right,
            left_anchor: d0.clone(),
            right_anchor: d1.clone(),
        })
    }

    /// Forward evaluation on the covered region.
    pub fn eval(&self, p: StripPoint) -> Result<(f64, f64)> {
        for patch in [&self.mid, &self.left, &self.right] {
            if let Some(uv) = patch.eval(&self.grid, p) {
                return Ok(uv);
            }
        }
        Err(Error::LadderFailure(format!(
            "chart evaluation left the collar at ({}, {})",
            p.theta, p.r
        )))
    }

    /// Inverse evaluation.
    pub fn eval_inv(&self, uv: (f64, f64)) -> Result<StripPoint> {
        for patch in [&self.mid, &self.left, &self.right] {
            if let Some(p) = patch.eval_inv(&self.grid, uv) {
                return Ok(p);
            }
        }
        Err(Error::LadderFailure(format!(
            "chart inverse failed at ({}, {})",
            uv.0, uv.1
        )))
    }

    pub fn anchors(&self) -> (&LatticePath, &LatticePath) {
        (&self.left_anchor, &self.right_anchor)
    }
}

/// A proper NS lattice line at combinatorial distance about `width` cells
/// from `line`, on its left (or right) side: the far boundary of the
/// width-limited collar of cells on that side.
fn collar_line(
    grid: &CellGrid,
    line: &LatticePath,
    width: i64,
    left_side: bool,
) -> Result<LatticePath> {
    use std::collections::{HashMap, HashSet, VecDeque};
    let pts = line.point_set();
    let edges = line.edge_set();
    let blocked = |a: (i64, i64), b: (i64, i64)| -> bool {
        let key = if a <= b { (a, b) } else { (b, a) };
        edges.contains(&key)
    };
    // Identify the requested side by component labels on a box around the
    // line, then seed with the side's cells adjacent to line points.
    let xs: Vec<i64> = line.points.iter().map(|p| p.0).collect();
    let x_range = (
        xs.iter().min().unwrap() - width - 2,
        xs.iter().max().unwrap() + width + 2,
    );
    let labels = crate::grid::components_against_lines(grid, x_range, &[line]);
    let side_probe = if left_side {
        (x_range.0, grid.rows / 2)
    } else {
        (x_range.1 - 1, grid.rows / 2)
    };
    let side_label = *labels
        .get(&side_probe)
        .ok_or_else(|| Error::LadderFailure("collar probe out of range".into()))?;
    let mut seeds = Vec::new();
    for &(px, py) in &pts {
        for c in [(px - 1, py - 1), (px, py - 1), (px - 1, py), (px, py)] {
            if grid.in_window(c.1) && labels.get(&c) == Some(&side_label) {
                seeds.push(c);
            }
        }
    }
    // BFS up to `width` steps without crossing the line.
    let mut depth: HashMap<(i64, i64), i64> = Default::default();
    let mut queue: VecDeque<(i64, i64)> = VecDeque::new();
    for s in seeds {
        if depth.insert(s, 0).is_none() {
            queue.push_back(s);
        }
    }
    while let Some((x, y)) = queue.pop_front() {
        let d = depth[&(x, y)];
        if d >= width {
            continue;
        }
        for n in [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)] {
            if !grid.in_window(n.1) || depth.contains_key(&n) {
                continue;
            }
            let shared = if n.0 == x {
                let yy = y.max(n.1);
                ((x, yy), (x + 1, yy))
            } else {
                let xx = x.max(n.0);
                ((xx, y), (xx, y + 1))
            };
            if blocked(shared.0, shared.1) {
                continue;
            }
            depth.insert(n, d + 1);
            queue.push_back(n);
        }
    }
    let collar = crate::grid::CellSet::from_iter(depth.keys().copied());
    let comps = crate::grid::boundary_components(
        &collar,
        grid,
        (i64::MIN / 4, i64::MAX / 4),
    );
    // The far boundary shares no point with the line.
    let mut far: Vec<LatticePath> = comps
        .into_iter()
        .filter(|c| !c.closed && c.points.iter().all(|p| !pts.contains(p)))
        .collect();
    far.sort_by_key(|c| std::cmp::Reverse(c.points.len()));
    let chosen = far.into_iter().next().ok_or_else(|| {
        Error::LadderFailure("collar has no far boundary".into())
    })?;
    let ends: HashSet<i64> = [chosen.points[0].1, chosen.points.last().unwrap().1]
        .into_iter()
        .collect();
    if !(ends.contains(&0) && ends.contains(&grid.rows)) {
        return Err(Error::LadderFailure("collar boundary is not north-south".into()));
    }
    Ok(chosen)
}

/// Cells strictly between the two lines (flag initialized to the default
/// diagonal; fixed after the solve).
fn band_cells(
    grid: &CellGrid,
    left: &LatticePath,
    right: &LatticePath,
) -> Result<HashMap<(i64, i64), bool>> {
    let xs_min = left.points.iter().map(|p| p.0).min().unwrap() - 1;
    let xs_max = right.points.iter().map(|p| p.0).max().unwrap() + 1;
    let labels =
        crate::grid::components_against_lines(grid, (xs_min, xs_max), &[left, right]);
    // Seed: the cell just right of the left line's first vertical edge.
    let seed = seed_cell_right_of(left).ok_or_else(|| {
        Error::LadderFailure("left line has no vertical edge to seed the band".into())
    })?;
    let seed_label = *labels
        .get(&seed)
        .ok_or_else(|| Error::LadderFailure("band seed out of range".into()))?;
    let mut cells = HashMap::new();
    for (&c, &l) in &labels {
        if l == seed_label {
            cells.insert(c, true);
        }
    }
    if cells.is_empty() {
        return Err(Error::LadderFailure("empty band".into()));
    }
    Ok(cells)
}

/// A cell immediately right of some vertical edge of the line.
fn seed_cell_right_of(line: &LatticePath) -> Option<(i64, i64)> {
    for w in line.points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.0 == b.0 {
            let y = a.1.min(b.1);
            return Some((a.0, y));
        }
    }
    None
}

/// Dirichlet data along one line: u constant, v a monotone arc parameter
/// scaled onto [-R, R] oriented south to north.
fn line_dirichlet(
    grid: &CellGrid,
    line: &LatticePath,
    u: f64,
    ladder: Ladder,
) -> HashMap<(i64, i64), (f64, f64)> {
    let pts = &line.points;
    let n = pts.len();
    let south_first = pts[0].1 <= pts[n - 1].1;
    let mut out = HashMap::new();
    for (i, &p) in pts.iter().enumerate() {
        let s = if south_first {
            i as f64 / (n - 1) as f64
        } else {
            1.0 - i as f64 / (n - 1) as f64
        };
        let t = 2.0 * s - 1.0; // [-1, 1]
        let warped = match ladder {
            Ladder::Linear => t,
            Ladder::Warped => (1.5 * t).sinh() / 1.5f64.sinh(),
        };
        out.insert(p, (u, grid.window * warped));
    }
    out
}

fn solve_patch(
    grid: &CellGrid,
    left: &LatticePath,
    right: &LatticePath,
    u_range: (f64, f64),
    ladder: Ladder,
) -> Result<Patch> {
    let cells = band_cells(grid, left, right)?;
    // Vertices and adjacency.
    let mut uv: HashMap<(i64, i64), (f64, f64)> = HashMap::new();
    let mut fixed: HashMap<(i64, i64), (f64, f64)> = line_dirichlet(grid, left, u_range.0, ladder);
    fixed.extend(line_dirichlet(grid, right, u_range.1, ladder));
    // Frontier rows: pin the boundary map so the whole band boundary goes
    // homeomorphically onto the chart rectangle boundary.
    for row in [0i64, grid.rows] {
        let end_col = |line: &LatticePath| -> Option<i64> {
            line.points
                .iter()
                .find(|p| p.1 == row)
                .map(|p| p.0)
        };
        let (Some(xl), Some(xr)) = (end_col(left), end_col(right)) else {
            continue;
        };
        if xr == xl {
            continue;
        }
        let vr = if row == 0 { -grid.window } else { grid.window };
        for x in xl.min(xr)..=xl.max(xr) {
            let t = (x - xl) as f64 / (xr - xl) as f64;
            if !(0.0..=1.0).contains(&t) {
                continue;
            }
            fixed
                .entry((x, row))
                .or_insert((u_range.0 + t * (u_range.1 - u_range.0), vr));
        }
    }
    let mut verts: Vec<(i64, i64)> = Vec::new();
    for (&(x, y), _) in &cells {
        for p in [(x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1)] {
            if !uv.contains_key(&p) {
                let init = fixed.get(&p).copied().unwrap_or_else(|| {
                    let pt = grid.point(p.0, p.1);
                    (0.5 * (u_range.0 + u_range.1), pt.r)
                });
                uv.insert(p, init);
                if !fixed.contains_key(&p) {
                    verts.push(p);
                }
            }
        }
    }
    verts.sort_unstable();
    // Initialize u by per-row horizontal fraction: close to the solution,
    // which cuts relaxation iterations considerably.
    {
        let mut row_span: HashMap<i64, (i64, i64)> = HashMap::new();
        for (&(x, y), _) in &cells {
            let e = row_span.entry(y).or_insert((x, x));
            e.0 = e.0.min(x);
            e.1 = e.1.max(x);
        }
        for &p in &verts {
            let (x, y) = p;
            let row = y.min(grid.rows - 1).max(0);
            if let Some(&(x0, x1)) = row_span.get(&row) {
                let span = (x1 + 1 - x0).max(1) as f64;
                let t = ((x - x0) as f64 / span).clamp(0.0, 1.0);
                if let Some(val) = uv.get_mut(&p) {
                    val.0 = u_range.0 + t * (u_range.1 - u_range.0);
                }
            }
        }
    }
    // Mesh neighbors: lattice-adjacent vertices sharing a band cell.
    let has_cell = |c: (i64, i64)| cells.contains_key(&c);
    let neighbors = |p: (i64, i64)| -> Vec<(i64, i64)> {
        let (x, y) = p;
        let mut out = Vec::with_capacity(4);
        // Edge to (x+1, y) exists if a band cell borders it.
        if has_cell((x, y)) || has_cell((x, y - 1)) {
            out.push((x + 1, y));
        }
        if has_cell((x - 1, y)) || has_cell((x - 1, y - 1)) {
            out.push((x - 1, y));
        }
        if has_cell((x, y)) || has_cell((x - 1, y)) {
            out.push((x, y + 1));
        }
        if has_cell((x, y - 1)) || has_cell((x - 1, y - 1)) {
            out.push((x, y - 1));
        }
        out
    };
    // SOR sweeps with near-optimal over-relaxation for the band diameter.
    let diam = {
        let xs: Vec<i64> = cells.keys().map(|c| c.0).collect();
        let dx = xs.iter().max().unwrap() - xs.iter().min().unwrap();
        (dx.max(grid.rows) as f64).max(8.0)
    };
    let omega = 2.0 / (1.0 + std::f64::consts::PI / diam);
    let mut max_delta;
    let mut iters = 0usize;
    loop {
        max_delta = 0.0f64;
        for &p in &verts {
            let nbrs = neighbors(p);
            if nbrs.is_empty() {
                continue;
            }
            let mut su = 0.0;
            let mut sv = 0.0;
            for nb in &nbrs {
                let val = uv
                    .get(nb)
                    .copied()
                    .unwrap_or_else(|| {
                        let pt = grid.point(nb.0, nb.1);
                        (0.5 * (u_range.0 + u_range.1), pt.r)
                    });
                su += val.0;
                sv += val.1;
            }
            let k = nbrs.len() as f64;
            let cur = uv[&p];
            let target = (su / k, sv / k);
            let next = (
                cur.0 + omega * (target.0 - cur.0),
                cur.1 + omega * (target.1 - cur.1),
            );
            max_delta = max_delta.max((next.0 - cur.0).abs().max((next.1 - cur.1).abs()));
            uv.insert(p, next);
        }
        iters += 1;
        if max_delta < 3e-10 || iters > 60_000 {
            break;
        }
    }
    if max_delta >= 1e-8 {
        return Err(Error::LadderFailure(format!(
            "harmonic solve stalled: residual {max_delta}"
        )));
    }
    // Pick a valid diagonal per cell, check orientation, build bin index.
    let mut cells = cells;
    let mut bins: HashMap<(i64, i64), Vec<(i64, i64)>> = HashMap::new();
    let bin_size = (grid.cell_w()).max(1e-6) * 2.0;
    let mut u_min = f64::INFINITY;
    let mut u_max = f64::NEG_INFINITY;
    let keys: Vec<(i64, i64)> = cells.keys().copied().collect();
    for (x, y) in keys {
        let bl = uv[&(x, y)];
        let br = uv[&(x + 1, y)];
        let tr = uv[&(x + 1, y + 1)];
        let tl = uv[&(x, y + 1)];
        let det = |t: [(f64, f64); 3]| {
            (t[1].0 - t[0].0) * (t[2].1 - t[0].1) - (t[1].1 - t[0].1) * (t[2].0 - t[0].0)
        };
        let diag_ok = det([bl, br, tr]) > 0.0 && det([bl, tr, tl]) > 0.0;
        let anti_ok = det([bl, br, tl]) > 0.0 && det([br, tr, tl]) > 0.0;
        if diag_ok {
            cells.insert((x, y), true);
        } else if anti_ok {
            cells.insert((x, y), false);
        } else {
            return Err(Error::LadderFailure(format!(
                "fold at cell ({x}, {y}): both diagonals degenerate"
            )));
        }
        for c in [bl, br, tr, tl] {
            u_min = u_min.min(c.0);
            u_max = u_max.max(c.0);
        }
        // Register the cell in every bin its image bbox touches.
        let us = [bl.0, br.0, tr.0, tl.0];
        let vs = [bl.1, br.1, tr.1, tl.1];
        let (bu0, bu1) = (
            (us.iter().cloned().fold(f64::INFINITY, f64::min) / bin_size).floor() as i64,
            (us.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / bin_size).floor() as i64,
        );
        let (bv0, bv1) = (
            (vs.iter().cloned().fold(f64::INFINITY, f64::min) / bin_size).floor() as i64,
            (vs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / bin_size).floor() as i64,
        );
        for bu in bu0..=bu1 {
            for bv in bv0..=bv1 {
                bins.entry((bu, bv)).or_default().push((x, y));
            }
        }
    }
    Ok(Patch { cells, uv, bins, bin_size, u_range: (u_min, u_max) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vertical_path(grid: &CellGrid, x: i64) -> LatticePath {
        LatticePath {
            points: (0..=grid.rows).map(|y| (x, y)).collect(),
            closed: false,
            cut: false,
        }
    }

    #[test]
    fn vertical_lines_give_affine_chart() {
        let grid = CellGrid::new(8, 1.0).unwrap();
        let d0 = vertical_path(&grid, 0);
        let d1 = vertical_path(&grid, 8);
        let chart = StraightChart::build(&grid, &d0, &d1, Ladder::Linear).unwrap();
        for (theta, r) in [(0.0, 0.0), (0.5, 0.5), (1.0, -0.75), (0.25, 0.99)] {
            let (u, v) = chart.eval(StripPoint::new(theta, r)).unwrap();
            assert!((u - theta).abs() < 1e-6, "u={u} theta={theta}");
            assert!((v - r).abs() < 1e-6, "v={v} r={r}");
        }
        // Outside the band the collar extends the chart with its own
        // scale; order and round trips must still hold.
        let p = StripPoint::new(-1.3, 0.2);
        let (u, _) = chart.eval(p).unwrap();
        assert!(u < 0.0, "u={u}");
        assert!(chart.eval_inv(chart.eval(p).unwrap()).unwrap().dist(p) < 1e-6);
        let q = StripPoint::new(2.6, -0.2);
        let (u, _) = chart.eval(q).unwrap();
        assert!(u > 1.0, "u={u}");
        assert!(chart.eval_inv(chart.eval(q).unwrap()).unwrap().dist(q) < 1e-6);
    }

    #[test]
    fn chart_round_trips() {
        let grid = CellGrid::new(8, 1.0).unwrap();
        // A zigzag NS line and a straight one.
        let mut pts = Vec::new();
        for y in 0..=grid.rows {
            let x = if (4..12).contains(&y) { 3 } else { 2 };
            if let Some(&(px, _)) = pts.last() {
                if px != x {
                    pts.push((x.max(px).min(px.max(x)), y));
                }
            }
            pts.push((x, y));
        }
        // Rebuild cleanly: vertical runs with one horizontal jog at y=4 and
        // y=12.
        let mut points = Vec::new();
        for y in 0..=4 {
            points.push((2i64, y));
        }
        points.push((3, 4));
        for y in 5..=12 {
            points.push((3i64, y));
        }
        points.push((2, 12));
        for y in 13..=grid.rows {
            points.push((2i64, y));
        }
        let d0 = LatticePath { points, closed: false, cut: false };
        let d1 = vertical_path(&grid, 8);
        let chart = StraightChart::build(&grid, &d0, &d1, Ladder::Linear).unwrap();
        for (theta, r) in [(0.7, 0.3), (0.5, -0.9), (0.9, 0.0), (-0.4, 0.4), (1.8, -0.2)] {
            let p = StripPoint::new(theta, r);
            let uv = chart.eval(p).unwrap();
            let back = chart.eval_inv(uv).unwrap();
            assert!(back.dist(p) < 1e-6, "round trip {p:?} -> {uv:?} -> {back:?}");
        }
        // The zigzag line itself maps to u = 0.
        let (u, _) = chart.eval(StripPoint::new(3.0 / 8.0, grid.point(0, 8).r)).unwrap();
        assert!(u.abs() < 1e-6, "on-line u = {u}");
    }

    #[test]
    fn warped_ladder_still_valid() {
        let grid = CellGrid::new(8, 1.0).unwrap();
        let d0 = vertical_path(&grid, 0);
        let d1 = vertical_path(&grid, 8);
        let chart = StraightChart::build(&grid, &d0, &d1, Ladder::Warped).unwrap();
        let p = StripPoint::new(0.4, 0.3);
        let uv = chart.eval(p).unwrap();
        let back = chart.eval_inv(uv).unwrap();
        assert!(back.dist(p) < 1e-6);
    }
}
