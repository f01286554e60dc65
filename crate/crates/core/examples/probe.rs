use brouwer::dynsys::{fixture, orbit_limit, OrbitClass};
use brouwer::pipelines::*;
use brouwer::geom::StripPoint;
use std::collections::BTreeMap;
fn main() {
    let map = fixture("saddle", &BTreeMap::new()).unwrap();
    let mut cfg = PipelineConfig::for_map(&map, 3.0);
    cfg.cells_per_unit = 48;
    let (_, branches) = stable_branches(&map, cfg).unwrap();
    let inv = map.iterate(-1).unwrap();
    for b in &branches {
        let mut ys: Vec<i64> = b.cells.cells.iter().map(|c| c.1).collect();
        ys.sort();
        let mut cols_bottom: Vec<i64> = b.cells.cells.iter().filter(|c| c.1 == *ys.first().unwrap()).map(|c| c.0).collect();
        cols_bottom.sort();
        eprintln!("stable={} axioms {:?} rows {}..{} bottom cols {:?}",
            b.stable, b.summary.axioms, ys.first().unwrap(), ys.last().unwrap(), cols_bottom);
        // axiom3 diagnostics: orbit classes of a few refined samples
        let mut fails = vec![];
        let mut cells: Vec<_> = b.cells.cells.iter().copied().collect();
        cells.sort();
        for &(x, y) in cells.iter().step_by(cells.len()/10 + 1) {
            let c = StripPoint::new((x as f64 + 0.5)/48.0, -3.0 + (y as f64 + 0.5)/48.0);
            let cls = if b.stable { orbit_limit(&map, c, 3.0, 400) } else { orbit_limit(&inv, c, 3.0, 400) };
            if cls != OrbitClass::TendsToNorth { fails.push(((x, y), cls)); }
        }
        eprintln!("  center-orbit fails: {:?}", &fails[..fails.len().min(4)]);
    }
}
