//! Partial index between disjoint Brouwer lines: couple classification,
//! the chart-based computation through the straightening, the free-arc
//! shortcut, and the Chasles additivity check.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::chart::{Ladder, StraightChart};
use crate::dynsys::LiftedMap;
use crate::error::{Error, Result};
use crate::geom::{self, Polyline, Side, StripPoint};
use crate::grid::{components_against_lines, CellGrid, LatticePath};
use crate::index::REFINE_TOL;

/// Exact half-integer lattice: the value is `twice / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HalfInteger {
    pub twice: i64,
}

impl HalfInteger {
    pub fn from_twice(twice: i64) -> Self {
        HalfInteger { twice }
    }

    pub fn integer(n: i64) -> Self {
        HalfInteger { twice: 2 * n }
    }

    pub fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }
}

impl std::ops::Add for HalfInteger {
    type Output = HalfInteger;
    fn add(self, rhs: HalfInteger) -> HalfInteger {
        HalfInteger { twice: self.twice + rhs.twice }
    }
}

impl std::ops::Neg for HalfInteger {
    type Output = HalfInteger;
    fn neg(self) -> HalfInteger {
        HalfInteger { twice: -self.twice }
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

/// Type of one line relative to the other: attractive when it does not
/// separate the other line from its own image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LineType {
    Attractive,
    Repulsive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Combined {
    Attractive,
    Repulsive,
    Indifferent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoupleClass {
    pub first: LineType,
    pub second: LineType,
}

impl CoupleClass {
    pub fn combined(self) -> Combined {
        match (self.first, self.second) {
            (LineType::Attractive, LineType::Attractive) => Combined::Attractive,
            (LineType::Repulsive, LineType::Repulsive) => Combined::Repulsive,
            _ => Combined::Indifferent,
        }
    }
}

/// Relation of two proper lattice lines that do not traverse each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoupleRelation {
    Disjoint,
    Touching,
}

/// Consistent side of a set of query points relative to the component
/// structure of the window cut along `base`.
fn side_against(
    grid: &CellGrid,
    base: &LatticePath,
    x_range: (i64, i64),
    queries: &[StripPoint],
    allow_on: bool,
) -> Result<Side> {
    let labels = components_against_lines(grid, x_range, &[base]);
    let (a, b) = (base.points[0], base.points[1]);
    let dir = (b.0 - a.0, b.1 - a.1);
    let left_cell = left_cell_of_edge(a, dir);
    let left = *labels.get(&left_cell).ok_or(Error::TouchesLine)?;
    let on_points = base.point_set();
    let mut side: Option<Side> = None;
    for q in queries {
        let (x, y) = grid.locate(*q);
        let y = y.clamp(0, grid.rows - 1);
        let x = x.clamp(x_range.0, x_range.1 - 1);
        // Lattice-exact query: a lattice point of the base is "on".
        let lat = (
            (q.theta / grid.cell_w()).round() as i64,
            ((q.r + grid.window) / grid.cell_h()).round() as i64,
        );
        let on = on_points.contains(&lat)
            && (grid.point(lat.0, lat.1).dist(*q) <= geom::SNAP);
        if on {
            if allow_on {
                continue;
            }
            return Err(Error::TouchesLine);
        }
        let s = match labels.get(&(x, y)) {
            Some(&l) if l == left => Side::Left,
            Some(_) => Side::Right,
            None => return Err(Error::TouchesLine),
        };
        match side {
            None => side = Some(s),
            Some(prev) if prev != s => return Err(Error::LinesTraverse),
            _ => {}
        }
    }
    side.ok_or(Error::TouchesLine)
}

fn left_cell_of_edge(a: (i64, i64), dir: (i64, i64)) -> (i64, i64) {
    match dir {
        (1, 0) => (a.0, a.1),
        (-1, 0) => (a.0 - 1, a.1 - 1),
        (0, 1) => (a.0 - 1, a.1),
        (0, -1) => (a.0, a.1 - 1),
        _ => a,
    }
}

fn lattice_float_points(grid: &CellGrid, path: &LatticePath) -> Vec<StripPoint> {
    path.points.iter().map(|&(x, y)| grid.point(x, y)).collect()
}

fn joint_x_range(grid: &CellGrid, paths: &[&LatticePath], pad: i64) -> (i64, i64) {
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    for p in paths {
        for &(x, _) in &p.points {
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    (lo - pad, hi + pad)
}

/// Lines share a lattice point without traversing.
pub fn relation(
    grid: &CellGrid,
    d0: &LatticePath,
    d1: &LatticePath,
) -> Result<CoupleRelation> {
    let p0 = d0.point_set();
    let p1 = d1.point_set();
    if p0.is_disjoint(&p1) {
        return Ok(CoupleRelation::Disjoint);
    }
    // Touching: every point of d1 lies in the closure of one side of d0.
    let x_range = joint_x_range(grid, &[d0, d1], 2);
    let queries = lattice_float_points(grid, d1);
    match side_against(grid, d0, x_range, &queries, true) {
        Ok(_) => Ok(CoupleRelation::Touching),
        Err(Error::LinesTraverse) => Err(Error::LinesTraverse),
        Err(e) => Err(e),
    }
}

/// Classify the couple (requires disjoint lines): each line is attractive
/// or repulsive relative to the other; for attractive couples the expected
/// image configuration is additionally asserted.
pub fn classify_couple(
    grid: &CellGrid,
    map: &LiftedMap,
    d0: &LatticePath,
    d1: &LatticePath,
) -> Result<CoupleClass> {
    if relation(grid, d0, d1)? != CoupleRelation::Disjoint {
        return Err(Error::TouchesLine);
    }
    let disp_pad = 2 + (per_step_drift(map) / grid.cell_w()).ceil() as i64;
    let x_range = joint_x_range(grid, &[d0, d1], disp_pad);
    let type_of = |base: &LatticePath, other: &LatticePath| -> Result<LineType> {
        let other_side =
            side_against(grid, base, x_range, &lattice_float_points(grid, other), false)?;
        let images: Vec<StripPoint> = crate::flowgraph::sample_lattice_path(grid, base, 4)
            .into_iter()
            .map(|p| map.forward(p))
            .collect();
        let image_side = side_against(grid, base, x_range, &images, false)?;
        // Attractive: base does not separate the other line from its image.
        Ok(if other_side == image_side { LineType::Attractive } else { LineType::Repulsive })
    };
    let class = CoupleClass {
        first: type_of(d0, d1)?,
        second: type_of(d1, d0)?,
    };
    if class.combined() == Combined::Attractive {
        assert_attractive_configuration(grid, map, d0, d1)?;
    }
    Ok(class)
}

/// For an attractive couple: h(d0) separates d0 from d1, and h(d1)
/// separates h(d0) from d1.
fn assert_attractive_configuration(
    grid: &CellGrid,
    map: &LiftedMap,
    d0: &LatticePath,
    d1: &LatticePath,
) -> Result<()> {
    let line0 = d0.to_proper_line(grid)?;
    let line1 = d1.to_proper_line(grid)?;
    let image = |path: &LatticePath| -> Polyline {
        Polyline::open(
            crate::flowgraph::sample_lattice_path(grid, path, 4)
                .into_iter()
                .map(|p| map.forward(p))
                .collect(),
        )
    };
    let h0 = image(d0);
    let h1 = image(d1);
    // Probe points at irrational-ish parameters so the test segment does
    // not run through lattice-aligned curve vertices.
    let check = |curve: &Polyline,
                 ends: (crate::geom::End, crate::geom::End),
                 pa: &Polyline,
                 pb: &Polyline|
     -> Result<bool> {
        for (ta, tb) in [(0.4937, 0.5161), (0.4421, 0.5689), (0.3873, 0.6127), (0.5503, 0.4497)]
        {
            match geom::separates_open(curve, ends, pa.at(ta), pb.at(tb)) {
                Ok(v) => return Ok(v),
                Err(Error::TouchesLine) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(Error::TouchesLine)
    };
    if !check(&h0, line0.ends(), &line0.path, &line1.path)? {
        return Err(Error::CertificationFails(
            "attractive couple: h(d0) does not separate d0 from d1".into(),
        ));
    }
    if !check(&h1, line1.ends(), &h0, &line1.path)? {
        return Err(Error::CertificationFails(
            "attractive couple: h(d1) does not separate h(d0) from d1".into(),
        ));
    }
    Ok(())
}

fn per_step_drift(map: &LiftedMap) -> f64 {
    // Crude bound on |Delta theta| of one application: fixtures move less
    // than one period per application per construction.
    1.2 * map.power.abs().max(1) as f64
}

/// Geometric order: is d1 on the +theta side of d0?
fn is_right_of(grid: &CellGrid, d0: &LatticePath, d1: &LatticePath) -> Result<bool> {
    let x_range = joint_x_range(grid, &[d0, d1], 2);
    let labels = components_against_lines(grid, x_range, &[d0]);
    let probe_right = *labels
        .get(&(x_range.1 - 1, grid.rows / 2))
        .ok_or(Error::TouchesLine)?;
    let q = d1.points[d1.points.len() / 2];
    // Any cell adjacent to the query point works: disjoint lines keep all
    // four on one side.
    let cell = (q.0.clamp(x_range.0, x_range.1 - 1), (q.1.min(grid.rows - 1)).max(0));
    Ok(labels.get(&cell) == Some(&probe_right))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartialIndexReport {
    pub value: HalfInteger,
    pub class: Option<CoupleClass>,
    pub combined: Combined,
    pub raw_winding: f64,
    pub residual: f64,
    pub method: String,
}

/// Partial index between two proper lattice lines via the straightening
/// chart. Touching non-traversing lines get index 0 by convention.
pub fn partial_index_chart(
    grid: &CellGrid,
    map: &LiftedMap,
    d0: &LatticePath,
    d1: &LatticePath,
) -> Result<PartialIndexReport> {
    partial_index_chart_with(grid, map, d0, d1, Ladder::Linear)
}

pub fn partial_index_chart_with(
    grid: &CellGrid,
    map: &LiftedMap,
    d0: &LatticePath,
    d1: &LatticePath,
    ladder: Ladder,
) -> Result<PartialIndexReport> {
    if relation(grid, d0, d1)? == CoupleRelation::Touching {
        return Ok(PartialIndexReport {
            value: HalfInteger::integer(0),
            class: None,
            combined: Combined::Indifferent,
            raw_winding: 0.0,
            residual: 0.0,
            method: "chart (touching convention)".into(),
        });
    }
    if !is_right_of(grid, d0, d1)? {
        let mut rep = partial_index_chart_with(grid, map, d1, d0, ladder)?;
        rep.value = -rep.value;
        rep.raw_winding = -rep.raw_winding;
        rep.class = rep.class.map(|c| CoupleClass { first: c.second, second: c.first });
        return Ok(rep);
    }
    let class = classify_couple(grid, map, d0, d1)?;
    let chart = StraightChart::build(grid, d0, d1, ladder)?;
    let mut values = Vec::new();
    let mut raws = Vec::new();
    for v0 in [0.0, grid.window / 3.0] {
        let curve = Polyline::open(
            (0..=64)
                .map(|i| StripPoint::new(i as f64 / 64.0, v0))
                .collect(),
        );
        let field = |cp: StripPoint| -> (f64, f64) {
            let p = match chart.eval_inv((cp.theta, cp.r)) {
                Ok(p) => p,
                Err(_) => return (f64::NAN, f64::NAN),
            };
            let q = map.forward(p);
            match chart.eval(q) {
                Ok((u, v)) => (u - cp.theta, v - cp.r),
                Err(_) => (f64::NAN, f64::NAN),
            }
        };
        let raw = geom::winding(&curve, field, REFINE_TOL)?;
        let value = round_by_class(raw, class.combined())?;
        values.push(value);
        raws.push(raw);
    }
    if values[0] != values[1] {
        return Err(Error::CertificationFails(format!(
            "partial index depends on the curve: {} vs {}",
            values[0], values[1]
        )));
    }
    let residual = (raws[0] - values[0].value()).abs();
    Ok(PartialIndexReport {
        value: values[0],
        class: Some(class),
        combined: class.combined(),
        raw_winding: raws[0],
        residual,
        method: "chart".into(),
    })
}

fn round_by_class(raw: f64, combined: Combined) -> Result<HalfInteger> {
    let value = match combined {
        Combined::Indifferent => HalfInteger::integer(raw.round() as i64),
        _ => {
            // Nearest half-odd-integer.
            let k = (raw - 0.5).round() as i64;
            HalfInteger::from_twice(2 * k + 1)
        }
    };
    let residual = (raw - value.value()).abs();
    if residual >= crate::index::RESIDUAL_GATE {
        return Err(Error::RoundingAmbiguous(residual));
    }
    Ok(value)
}

/// Free-arc shortcut: an arc from d0 to d1, free, with interior disjoint
/// from both lines, forces the partial index to 0 (indifferent couple) or
/// +-1/2 read from the side its image falls on.
pub fn free_arc_index(
    grid: &CellGrid,
    map: &LiftedMap,
    arc: &LatticePath,
    d0: &LatticePath,
    d1: &LatticePath,
) -> Result<PartialIndexReport> {
    let p0 = d0.point_set();
    let p1 = d1.point_set();
    let first = *arc.points.first().ok_or(Error::ArcNotFree)?;
    let last = *arc.points.last().ok_or(Error::ArcNotFree)?;
    let (d0o, d1o, swapped) = if p0.contains(&first) && p1.contains(&last) {
        (d0, d1, false)
    } else if p1.contains(&first) && p0.contains(&last) {
        (d0, d1, true)
    } else {
        return Err(Error::BadParams("arc endpoints not on the two lines".into()));
    };
    let _ = swapped;
    // Interior disjoint from both lines.
    let interior: HashSet<(i64, i64)> =
        arc.points[1..arc.points.len() - 1].iter().copied().collect();
    if !interior.is_disjoint(&p0) || !interior.is_disjoint(&p1) {
        return Err(Error::BadParams("arc interior meets a line".into()));
    }
    // Freeness of the arc.
    let pts = arc.point_set();
    let samples = crate::flowgraph::sample_lattice_path(grid, arc, 8);
    for s in &samples {
        let q = map.forward(*s);
        if crate::flowgraph::dist_to_lattice_path(grid, &pts, q) <= grid.cell_w() / 8.0 {
            return Err(Error::ArcNotFree);
        }
    }
    let class = classify_couple(grid, map, d0o, d1o)?;
    let combined = class.combined();
    if combined == Combined::Indifferent {
        return Ok(PartialIndexReport {
            value: HalfInteger::integer(0),
            class: Some(class),
            combined,
            raw_winding: 0.0,
            residual: 0.0,
            method: "free-arc".into(),
        });
    }
    // Above/below in the straightened chart.
    let (left, right) = if is_right_of(grid, d0o, d1o)? { (d0o, d1o) } else { (d1o, d0o) };
    let chart = StraightChart::build(grid, left, right, Ladder::Linear)?;
    let arc_chart: Vec<(f64, f64)> = samples
        .iter()
        .map(|p| chart.eval(*p))
        .collect::<Result<_>>()?;
    let probe = samples[samples.len() / 2];
    let image = match combined {
        Combined::Attractive => map.forward(probe),
        _ => map.inverse(probe),
    };
    let (iu, iv) = chart.eval(image)?;
    // Ray cast upward from the image point against the chart arc.
    let mut crossings = 0;
    for w in arc_chart.windows(2) {
        let (a, b) = (w[0], w[1]);
        if (a.0 > iu) != (b.0 > iu) {
            let t = (iu - a.0) / (b.0 - a.0);
            let y = a.1 + t * (b.1 - a.1);
            if y > iv {
                crossings += 1;
            }
        }
    }
    let image_above = crossings % 2 == 0;
    let value = HalfInteger::from_twice(if image_above { 1 } else { -1 });
    Ok(PartialIndexReport {
        value,
        class: Some(class),
        combined,
        raw_winding: value.value(),
        residual: 0.0,
        method: "free-arc".into(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChaslesRecord {
    pub total: HalfInteger,
    pub first: HalfInteger,
    pub second: HalfInteger,
    pub holds: bool,
}

/// Chasles additivity across a separating middle line (generalized sense:
/// lines may touch without traversing).
pub fn chasles(
    grid: &CellGrid,
    map: &LiftedMap,
    d0: &LatticePath,
    d1: &LatticePath,
    d2: &LatticePath,
) -> Result<ChaslesRecord> {
    // d1 separates d0 and d2: closures on opposite sides.
    let x_range = joint_x_range(grid, &[d0, d1, d2], 2);
    let s0 = side_against(grid, d1, x_range, &lattice_float_points(grid, d0), true)?;
    let s2 = side_against(grid, d1, x_range, &lattice_float_points(grid, d2), true)?;
    if s0 == s2 {
        return Err(Error::SeparationFails);
    }
    let total = partial_index_chart(grid, map, d0, d2)?.value;
    let first = partial_index_chart(grid, map, d0, d1)?.value;
    let second = partial_index_chart(grid, map, d1, d2)?.value;
    Ok(ChaslesRecord {
        total,
        first,
        second,
        holds: total.twice == first.twice + second.twice,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    use crate::dynsys::{fixture, multi_reeb_lines};

    fn fx(name: &str, params: &[(&str, &str)]) -> LiftedMap {
        let map: BTreeMap<String, String> =
            params.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        fixture(name, &map).unwrap()
    }

    fn vertical_path(grid: &CellGrid, x: i64) -> LatticePath {
        LatticePath {
            points: (0..=grid.rows).map(|y| (x, y)).collect(),
            closed: false,
            cut: false,
        }
    }

    /// The four reference lines of the multi-Reeb fixture on a grid.
    fn reeb_lines(grid: &CellGrid) -> [LatticePath; 4] {
        let cols = grid.cols as f64;
        multi_reeb_lines(2).map(|x| vertical_path(grid, (x * cols).round() as i64))
    }

    #[test]
    fn half_integer_display() {
        assert_eq!(HalfInteger::integer(-1).to_string(), "-1");
        assert_eq!(HalfInteger::from_twice(3).to_string(), "3/2");
    }

    #[test]
    fn multi_reeb_couple_classes() {
        let grid = CellGrid::new(96, 2.0).unwrap();
        let map = fx("multi_reeb", &[("k", "2")]);
        let [l0, l1, l2, _l3] = reeb_lines(&grid);
        let c01 = classify_couple(&grid, &map, &l0, &l1).unwrap();
        assert_eq!(c01.combined(), Combined::Repulsive);
        let c12 = classify_couple(&grid, &map, &l1, &l2).unwrap();
        assert_eq!(c12.combined(), Combined::Attractive);
        let c02 = classify_couple(&grid, &map, &l0, &l2).unwrap();
        assert_eq!(c02.combined(), Combined::Indifferent);
    }

    #[test]
    fn multi_reeb_partial_indices() {
        let grid = CellGrid::new(96, 2.0).unwrap();
        let map = fx("multi_reeb", &[("k", "2")]);
        let [l0, l1, l2, l3] = reeb_lines(&grid);
        let ip = |a: &LatticePath, b: &LatticePath| {
            partial_index_chart(&grid, &map, a, b).unwrap().value
        };
        assert_eq!(ip(&l0, &l1), HalfInteger::from_twice(-1));
        assert_eq!(ip(&l1, &l2), HalfInteger::from_twice(-1));
        assert_eq!(ip(&l0, &l2), HalfInteger::integer(-1));
        assert_eq!(ip(&l3, &l2), HalfInteger::from_twice(3));
    }

    #[test]
    fn antisymmetry_and_inverse_invariance() {
        let grid = CellGrid::new(96, 2.0).unwrap();
        let map = fx("multi_reeb", &[("k", "2")]);
        let [l0, l1, _, _] = reeb_lines(&grid);
        let a = partial_index_chart(&grid, &map, &l0, &l1).unwrap().value;
        let b = partial_index_chart(&grid, &map, &l1, &l0).unwrap().value;
        assert_eq!(a, -b);
        let inv = map.iterate(-1).unwrap();
        let c = partial_index_chart(&grid, &inv, &l0, &l1).unwrap().value;
        assert_eq!(a, c);
    }

    #[test]
    fn chasles_on_multi_reeb_triple() {
        let grid = CellGrid::new(96, 2.0).unwrap();
        let map = fx("multi_reeb", &[("k", "2")]);
        let [l0, l1, l2, _] = reeb_lines(&grid);
        let rec = chasles(&grid, &map, &l0, &l1, &l2).unwrap();
        assert!(rec.holds, "{rec:?}");
        assert_eq!(rec.total, HalfInteger::integer(-1));
    }

    #[test]
    fn chasles_separation_fails() {
        let grid = CellGrid::new(96, 2.0).unwrap();
        let map = fx("multi_reeb", &[("k", "2")]);
        let [l0, l1, l2, _] = reeb_lines(&grid);
        // Middle line on the wrong side.
        assert!(matches!(
            chasles(&grid, &map, &l1, &l0, &l2),
            Err(Error::SeparationFails)
        ));
    }

    #[test]
    fn translation_pair_small_indices() {
        let grid = CellGrid::new(32, 2.0).unwrap();
        let map = fx("translation", &[("d", "1")]);
        let d0 = vertical_path(&grid, 4);
        let d1 = vertical_path(&grid, 4 + grid.cols);
        let rep = partial_index_chart(&grid, &map, &d0, &d1).unwrap();
        assert!(
            rep.value.twice.abs() <= 1,
            "translation pair index {}",
            rep.value
        );
        assert_eq!(rep.value, HalfInteger::integer(0));
    }

    #[test]
    fn saddle_translate_pair_gives_lift_index() {
        let map = fx("saddle", &[]);
        let (deco, _) = crate::bricks::decompose(&map, 3.0, 4, 8, 48, 10).unwrap();
        let graph = crate::flowgraph::build_transition_graph(&deco, &map).unwrap();
        let (_, line, _) = crate::flowgraph::find_ns_line(&deco, &graph, &map, 8).unwrap();
        let d0 = line.lattice.clone();
        let d1 = d0.translate(deco.grid.cols);
        let rep = partial_index_chart(&deco.grid, &map, &d0, &d1).unwrap();
        assert_eq!(rep.value, HalfInteger::integer(-2), "raw {}", rep.raw_winding);
    }

    #[test]
    fn free_arc_values_on_multi_reeb() {
        let grid = CellGrid::new(96, 2.0).unwrap();
        let map = fx("multi_reeb", &[("k", "2")]);
        let [l0, l1, l2, _] = reeb_lines(&grid);
        // Horizontal arcs at mid-height are free (the field is transverse).
        let mid = grid.rows / 2;
        let arc01 = LatticePath {
            points: (8..=24).map(|x| (x, mid)).collect(),
            closed: false,
            cut: false,
        };
        // Indifferent couple (l0, l2) via arc: index 0.
        let arc02 = LatticePath {
            points: (8..=40).map(|x| (x, mid)).collect(),
            closed: false,
            cut: false,
        };
        let r02 = free_arc_index(&grid, &map, &arc02, &l0, &l2);
        // The couple is indifferent but the arc must be free; if the arc is
        // free the shortcut gives 0... here the straight arc may fail
        // freeness, which is a legitimate outcome.
        if let Ok(rep) = r02 {
            assert_eq!(rep.value, HalfInteger::integer(0));
        }
        // Attractive couple (l1, l2): +-1/2 matching the chart value.
        let arc12 = LatticePath {
            points: (24..=40).map(|x| (x, mid)).collect(),
            closed: false,
            cut: false,
        };
        let chart_val = partial_index_chart(&grid, &map, &l1, &l2).unwrap().value;
        if let Ok(rep) = free_arc_index(&grid, &map, &arc12, &l1, &l2) {
            assert_eq!(rep.value, chart_val);
        }
        let _ = arc01;
    }

    #[test]
    fn iterate_invariance_of_partial_index() {
        let grid = CellGrid::new(96, 2.0).unwrap();
        let map = fx("multi_reeb", &[("k", "2")]);
        let [l0, l1, _, _] = reeb_lines(&grid);
        let base = partial_index_chart(&grid, &map, &l0, &l1).unwrap().value;
        for n in [2, 3] {
            let it = map.iterate(n).unwrap();
            let v = partial_index_chart(&grid, &it, &l0, &l1).unwrap().value;
            assert_eq!(v, base, "power {n}");
        }
    }

    #[test]
    fn chart_independence_two_ladders() {
        let grid = CellGrid::new(96, 2.0).unwrap();
        let map = fx("multi_reeb", &[("k", "2")]);
        let [l0, l1, _, _] = reeb_lines(&grid);
        let a = partial_index_chart_with(&grid, &map, &l0, &l1, Ladder::Linear)
            .unwrap()
            .value;
        let b = partial_index_chart_with(&grid, &map, &l0, &l1, Ladder::Warped)
            .unwrap()
            .value;
        assert_eq!(a, b);
    }

    #[test]
    fn parity_law() {
        let grid = CellGrid::new(96, 2.0).unwrap();
        let map = fx("multi_reeb", &[("k", "2")]);
        let [l0, l1, l2, l3] = reeb_lines(&grid);
        for (a, b) in [(&l0, &l1), (&l1, &l2), (&l0, &l2), (&l3, &l2), (&l0, &l3)] {
            let rep = partial_index_chart(&grid, &map, a, b).unwrap();
            let even = rep.value.is_integer();
            assert_eq!(
                even,
                rep.combined == Combined::Indifferent,
                "parity law violated: {} vs {:?}",
                rep.value,
                rep.combined
            );
        }
    }
}
