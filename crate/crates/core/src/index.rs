//! Fixed-point indices of the two annulus ends, the index of the lift
//! against the deck translation, and the classical cross-checks relating
//! them (Lefschetz sum, lift relation).

use serde::{Deserialize, Serialize};

use crate::dynsys::LiftedMap;
use crate::error::{Error, Result};
use crate::geom::{self, End, Polyline, StripPoint};

/// Residual gate: a raw winding farther than this from the rounding target
/// is rejected instead of silently rounded.
pub const RESIDUAL_GATE: f64 = 0.25;

/// Default refinement tolerance for winding computations (radians per step).
pub const REFINE_TOL: f64 = std::f64::consts::FRAC_PI_2 * 0.5;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexReport {
    pub value: i64,
    pub curve: String,
    pub raw_winding: f64,
    pub residual: f64,
}

fn round_to_integer(raw: f64, curve: String) -> Result<IndexReport> {
    let value = raw.round();
    let residual = (raw - value).abs();
    if residual >= RESIDUAL_GATE {
        return Err(Error::RoundingAmbiguous(residual));
    }
    Ok(IndexReport { value: value as i64, curve, raw_winding: raw, residual })
}

/// Winding of the displacement field `x -> map(x) - x` along a curve in the
/// strip plane.
pub fn curve_index(map: &LiftedMap, curve: &Polyline) -> Result<IndexReport> {
    let raw = geom::winding(curve, |p| map.displacement(p), REFINE_TOL)?;
    if curve.closed {
        round_to_integer(raw, format!("closed curve, {} vertices", curve.len()))
    } else {
        Ok(IndexReport {
            value: raw.round() as i64,
            curve: format!("open curve, {} vertices", curve.len()),
            raw_winding: raw,
            residual: (raw - raw.round()).abs(),
        })
    }
}

/// Index of the annulus end `which_end` as a fixed point of the projected
/// sphere map, computed along the projected circle `r = radius` in the plane
/// chart centered at that end.
pub fn fixed_point_index(map: &LiftedMap, which_end: End, radius: f64) -> Result<IndexReport> {
    let view;
    let m = match which_end {
        End::North => map,
        End::South => {
            view = map.viewed_from_south();
            &view
        }
    };
    let r0 = radius.abs();
    // The projected circle lifts to a fundamental segment of the strip; the
    // chart field is periodic along it, so the total variation is the
    // winding around the closed circle downstairs.
    let circle = Polyline::open(
        (0..=64)
            .map(|i| StripPoint::new(i as f64 / 64.0, r0))
            .collect(),
    );
    let field = |p: StripPoint| {
        let z = LiftedMap::to_plane_north(p);
        let w = LiftedMap::to_plane_north(m.forward(p));
        (w.0 - z.0, w.1 - z.1)
    };
    let raw = geom::winding(&circle, field, REFINE_TOL)?;
    round_to_integer(raw, format!("chart circle at r={r0} around {which_end:?}"))
}

/// Index of the single fixed point at infinity of the strip-plane
/// compactification (hypothesis: the lift is fixed-point free, so the
/// one-point compactification has exactly one fixed point, of index 2).
/// Computed honestly in the inversion chart `w = 1/z`, `z = theta + i r`.
pub fn plane_infinity_index(map: &LiftedMap, big_radius: f64) -> Result<IndexReport> {
    let rho = big_radius.max(4.0);
    let circle = Polyline::closed(
        (0..128)
            .map(|i| {
                let a = 2.0 * std::f64::consts::PI * i as f64 / 128.0;
                StripPoint::new(a.cos() / rho, a.sin() / rho)
            })
            .collect(),
    );
    let inv = |x: f64, y: f64| {
        let n = x * x + y * y;
        (x / n, -y / n)
    };
    let field = |w: StripPoint| {
        // w is a point of the inversion chart; send it back to the plane,
        // apply the map, and return to the chart.
        let (zx, zy) = inv(w.theta, w.r);
        let q = map.forward(StripPoint::new(zx, zy));
        let (wx, wy) = inv(q.theta, q.r);
        (wx - w.theta, wy - w.r)
    };
    let raw = geom::winding(&circle, field, REFINE_TOL)?;
    round_to_integer(raw, format!("inversion chart circle |z|={rho}"))
}

/// Index of the lift against the deck translation: winding of the
/// displacement along a segment from a base point to its translate.
/// Independence of the base point is verified at three base points.
pub fn lift_index(map: &LiftedMap) -> Result<IndexReport> {
    let bases = [
        StripPoint::new(0.0, 0.4),
        StripPoint::new(0.31, -1.13),
        StripPoint::new(-0.72, 1.57),
    ];
    let mut values = Vec::new();
    let mut first: Option<IndexReport> = None;
    for b in bases {
        let segment = Polyline::open(vec![b, b.tau(1)]);
        let raw = geom::winding(&segment, |p| map.displacement(p), REFINE_TOL)?;
        let rep = round_to_integer(raw, format!("fundamental segment at ({}, {})", b.theta, b.r))?;
        values.push(rep.value);
        if first.is_none() {
            first = Some(rep);
        }
    }
    if values.iter().any(|&v| v != values[0]) {
        return Err(Error::BasePointDisagreement(values));
    }
    Ok(first.unwrap())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelationReport {
    pub holds: bool,
    pub detail: String,
}

/// Lefschetz check: the indices of the two ends sum to 2. When the
/// projected map degenerates (integer translation projects to the
/// identity), falls back to the one-fixed-point form: the index at infinity
/// of the plane compactification is 2 on its own.
pub fn lefschetz_check(map: &LiftedMap, radius: f64) -> Result<RelationReport> {
    match (
        fixed_point_index(map, End::North, radius),
        fixed_point_index(map, End::South, radius),
    ) {
        (Ok(n), Ok(s)) => Ok(RelationReport {
            holds: n.value + s.value == 2,
            detail: format!("index(N)={} + index(S)={} vs 2", n.value, s.value),
        }),
        (Err(Error::FieldVanishes(_)), _) | (_, Err(Error::FieldVanishes(_))) => {
            let inf = plane_infinity_index(map, 16.0)?;
            Ok(RelationReport {
                holds: inf.value == 2,
                detail: format!(
                    "projected map degenerate; single fixed point at infinity has index {}",
                    inf.value
                ),
            })
        }
        (Err(e), _) | (_, Err(e)) => Err(e),
    }
}

/// Lift relation: the index of the lift equals the north index minus one.
pub fn lift_relation_check(map: &LiftedMap, radius: f64) -> Result<RelationReport> {
    let lift = lift_index(map)?;
    let north = fixed_point_index(map, End::North, radius)?;
    Ok(RelationReport {
        holds: lift.value == north.value - 1,
        detail: format!("lift index {} vs index(N)-1 = {}", lift.value, north.value - 1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    use crate::dynsys::fixture;

    fn fx(name: &str, params: &[(&str, &str)]) -> LiftedMap {
        let map: BTreeMap<String, String> =
            params.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        fixture(name, &map).unwrap()
    }

    /// Independent oracle: dense fixed-sample winding without adaptivity.
    fn winding_oracle<F>(points: usize, curve: impl Fn(f64) -> StripPoint, field: F) -> f64
    where
        F: Fn(StripPoint) -> (f64, f64),
    {
        let mut total = 0.0;
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..=points {
            let p = curve(i as f64 / points as f64);
            let (vx, vy) = field(p);
            let n = vx.hypot(vy);
            let v = (vx / n, vy / n);
            if let Some(u) = prev {
                total += (u.0 * v.1 - u.1 * v.0).atan2(u.0 * v.0 + u.1 * v.1);
            }
            prev = Some(v);
        }
        total / (2.0 * std::f64::consts::PI)
    }

    #[test]
    fn saddle_indices() {
        let m = fx("saddle", &[]);
        assert_eq!(fixed_point_index(&m, End::North, 3.0).unwrap().value, -1);
        assert_eq!(fixed_point_index(&m, End::South, 3.0).unwrap().value, 3);
        assert_eq!(lift_index(&m).unwrap().value, -2);
        assert!(lefschetz_check(&m, 3.0).unwrap().holds);
        assert!(lift_relation_check(&m, 3.0).unwrap().holds);
    }

    #[test]
    fn saddle_lift_index_matches_dense_oracle() {
        let m = fx("saddle", &[]);
        let base = StripPoint::new(0.1, 0.2);
        let o = winding_oracle(
            100_000,
            |t| StripPoint::new(base.theta + t, base.r),
            |p| m.displacement(p),
        );
        assert!((o - (-2.0)).abs() < 1e-6, "oracle {o}");
    }

    #[test]
    fn flower_indices() {
        for p in 1..=3u32 {
            let m = fx("flower", &[("p", &p.to_string())]);
            let n = fixed_point_index(&m, End::North, 3.0).unwrap().value;
            assert_eq!(n, p as i64 + 1, "flower({p}) north");
            let s = fixed_point_index(&m, End::South, 3.0).unwrap().value;
            assert_eq!(s, 1 - p as i64, "flower({p}) south");
            assert_eq!(lift_index(&m).unwrap().value, p as i64);
            assert!(lift_relation_check(&m, 3.0).unwrap().holds);
        }
    }

    #[test]
    fn flower2_lift_index_matches_dense_oracle() {
        let m = fx("flower", &[("p", "2")]);
        let o = winding_oracle(
            100_000,
            |t| StripPoint::new(t, -0.7),
            |p| m.displacement(p),
        );
        assert!((o - 2.0).abs() < 1e-6, "oracle {o}");
    }

    #[test]
    fn translation_on_sphere_has_index_two() {
        let m = fx("translation", &[]);
        assert_eq!(plane_infinity_index(&m, 16.0).unwrap().value, 2);
        // Integer translation projects to the identity: the end charts
        // degenerate and Lefschetz falls back to the plane form.
        assert!(matches!(
            fixed_point_index(&m, End::North, 3.0),
            Err(Error::FieldVanishes(_))
        ));
        assert!(lefschetz_check(&m, 3.0).unwrap().holds);
    }

    #[test]
    fn fractional_translation_ends_have_index_one() {
        let m = fx("translation", &[("d", "0.5")]);
        assert_eq!(fixed_point_index(&m, End::North, 3.0).unwrap().value, 1);
        assert_eq!(fixed_point_index(&m, End::South, 3.0).unwrap().value, 1);
        assert_eq!(lift_index(&m).unwrap().value, 0);
        assert!(lefschetz_check(&m, 3.0).unwrap().holds);
        assert!(lift_relation_check(&m, 3.0).unwrap().holds);
    }

    #[test]
    fn nulhomotopic_curve_has_index_zero() {
        let m = fx("saddle", &[]);
        let circle = Polyline::closed(
            (0..32)
                .map(|i| {
                    let a = 2.0 * std::f64::consts::PI * i as f64 / 32.0;
                    StripPoint::new(0.37 + 0.2 * a.cos(), 0.9 + 0.2 * a.sin())
                })
                .collect(),
        );
        assert_eq!(curve_index(&m, &circle).unwrap().value, 0);
    }

    #[test]
    fn radius_independence() {
        for (name, params) in [("saddle", vec![]), ("flower", vec![("p", "2")])] {
            let m = fx(name, &params);
            let a = fixed_point_index(&m, End::North, 3.0).unwrap().value;
            let b = fixed_point_index(&m, End::North, 1.5).unwrap().value;
            assert_eq!(a, b, "{name} radius independence");
        }
    }

    #[test]
    fn brown_property_on_fixture_indices() {
        for (name, params, expect) in [
            ("saddle", vec![], -1i64),
            ("flower", vec![("p", "2")], 3i64),
        ] {
            let m = fx(name, &params);
            for n in [-2, -1, 2, 3] {
                let it = m.iterate(n).unwrap();
                let v = fixed_point_index(&it, End::North, 3.0).unwrap().value;
                assert_eq!(v, expect, "{name}^{n}");
            }
        }
    }

    #[test]
    fn sector_flow_matches_predicted_index() {
        use crate::dynsys::{predicted_index, SectorWord};
        for word in ["HHHH", "EEHH", "EE", "HHHHHH", "EEEEHH", "AEHA"] {
            let w = SectorWord::parse(word).unwrap();
            let m = fx("sector_flow", &[("word", word)]);
            let idx = fixed_point_index(&m, End::North, 3.0).unwrap().value;
            assert_eq!(idx, predicted_index(&w).unwrap(), "word {word}");
        }
    }

    #[test]
    fn free_arc_to_translate_forces_lift_index_zero() {
        // A horizontal fundamental segment is free for translation(2).
        let m = fx("translation", &[("d", "2")]);
        let arc: Vec<StripPoint> =
            (0..=16).map(|i| StripPoint::new(i as f64 / 16.0, 0.0)).collect();
        for a in &arc {
            for b in &arc {
                let fa = m.forward(*a);
                assert!(fa.dist(*b) > 0.5, "arc must be free");
            }
        }
        assert_eq!(lift_index(&m).unwrap().value, 0);
    }

    #[test]
    fn conjugation_by_rotation_preserves_index() {
        // Precomposing the chart with a fixed rotation shifts theta; the
        // index must not change.
        let m = fx("flower", &[("p", "2")]);
        let r0 = 3.0;
        let circle = Polyline::open(
            (0..=64)
                .map(|i| StripPoint::new(0.37 + i as f64 / 64.0, r0))
                .collect(),
        );
        let field = |p: StripPoint| {
            let z = LiftedMap::to_plane_north(p);
            let w = LiftedMap::to_plane_north(m.forward(p));
            (w.0 - z.0, w.1 - z.1)
        };
        let raw = geom::winding(&circle, field, REFINE_TOL).unwrap();
        assert_eq!(raw.round() as i64, 3);
    }
}
