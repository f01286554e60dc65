//! Lifted strip homeomorphisms commuting with the deck translation, and the
//! fixture library.
//!
//! Every fixture is an explicit closed-form homeomorphism of the strip whose
//! angular displacement stays below half a period. That guarantees the lift
//! is canonical (its index against the deck translation equals the north
//! fixed-point index minus one) and keeps the displacement bounded below on
//! any truncation window, which the brick machinery needs.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::StripPoint;

const TAU: f64 = 2.0 * PI;

/// Reduction of the lifted angle to `[-1/2, 1/2)`, exactly compatible with
/// the deck translation in floating point.
#[inline]
fn frac_centered(theta: f64) -> f64 {
    theta - theta.round()
}

// ---------------------------------------------------------------------------
// Sector words
// ---------------------------------------------------------------------------

/// Local sector models of a simple flow around a fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SectorKind {
    Elliptic,
    Hyperbolic,
    ParabolicAttr,
    ParabolicRep,
}

impl SectorKind {
    fn letter(self) -> char {
        match self {
            SectorKind::Elliptic => 'E',
            SectorKind::Hyperbolic => 'H',
            SectorKind::ParabolicAttr => 'A',
            SectorKind::ParabolicRep => 'R',
        }
    }
}

/// One sector with its realized orientation (direct = the interior direction
/// sweeps through the outward ray).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sector {
    pub kind: SectorKind,
    pub direct: bool,
}

/// A cyclic word of sectors around the fixed point. The empty word is the
/// trivial all-parabolic germ (a rotation-like map).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorWord(pub Vec<Sector>);

impl SectorWord {
    /// Assign orientations so consecutive sectors share the stability of
    /// their common separatrix ray. Fails when the word cannot be realized.
    pub fn from_kinds(kinds: &[SectorKind]) -> Result<SectorWord> {
        if kinds.is_empty() {
            return Ok(SectorWord(Vec::new()));
        }
        let flips = kinds
            .iter()
            .filter(|k| matches!(k, SectorKind::Elliptic | SectorKind::Hyperbolic))
            .count();
        if flips % 2 != 0 {
            return Err(Error::OddImbalance);
        }
        'start: for start_stable in [true, false] {
            let mut stable = start_stable;
            let mut sectors = Vec::with_capacity(kinds.len());
            for &kind in kinds {
                let (next, direct) = match kind {
                    // Elliptic: unstable ray in, stable ray out when direct.
                    SectorKind::Elliptic => (!stable, !stable),
                    // Hyperbolic: stable ray in, unstable ray out when direct.
                    SectorKind::Hyperbolic => (!stable, stable),
                    SectorKind::ParabolicAttr => {
                        if !stable {
                            continue 'start;
                        }
                        (true, true)
                    }
                    SectorKind::ParabolicRep => {
                        if stable {
                            continue 'start;
                        }
                        (false, true)
                    }
                };
                sectors.push(Sector { kind, direct });
                stable = next;
            }
            if stable == start_stable {
                return Ok(SectorWord(sectors));
            }
        }
        Err(Error::BadParams(
            "sector word has no consistent separatrix orientation".into(),
        ))
    }

    pub fn parse(text: &str) -> Result<SectorWord> {
        let mut kinds = Vec::new();
        for ch in text.chars() {
            match ch.to_ascii_uppercase() {
                'E' => kinds.push(SectorKind::Elliptic),
                'H' => kinds.push(SectorKind::Hyperbolic),
                'A' => kinds.push(SectorKind::ParabolicAttr),
                'R' => kinds.push(SectorKind::ParabolicRep),
                ',' | ' ' => {}
                other => {
                    return Err(Error::BadParams(format!("unknown sector letter `{other}`")))
                }
            }
        }
        SectorWord::from_kinds(&kinds)
    }

    pub fn count(&self, kind: SectorKind) -> usize {
        self.0.iter().filter(|s| s.kind == kind).count()
    }

    pub fn text(&self) -> String {
        self.0.iter().map(|s| s.kind.letter()).collect()
    }
}

/// Fixed-point index of the time-one map of a simple flow with this sector
/// structure: `(#elliptic - #hyperbolic)/2 + 1`.
pub fn predicted_index(word: &SectorWord) -> Result<i64> {
    let e = word.count(SectorKind::Elliptic) as i64;
    let h = word.count(SectorKind::Hyperbolic) as i64;
    if (e - h).rem_euclid(2) != 0 {
        return Err(Error::OddImbalance);
    }
    Ok((e - h) / 2 + 1)
}

// ---------------------------------------------------------------------------
// Displacement fields
// ---------------------------------------------------------------------------

/// A unit direction field on the strip, periodic in theta, described by the
/// angle `alpha(theta)` of the displacement direction.
#[derive(Debug, Clone)]
enum FieldKind {
    /// `alpha = 2 pi p theta - pi/2`: `2p` elliptic sectors at north,
    /// `2p` hyperbolic at south.
    Flower { p: u32 },
    /// Piecewise-linear angle profile with anchors at fixed abscissas:
    /// two single Reeb walls and a `(2k-1)`-fold wall, closing upward.
    MultiReeb { k: u32 },
    /// Cosine-blended sector models around the north end.
    Sector { word: SectorWord },
}

impl FieldKind {
    /// Direction angle at `theta` (measured from the +theta axis).
    fn alpha(&self, theta: f64) -> f64 {
        match self {
            FieldKind::Flower { p } => TAU * (*p as f64) * frac_centered(theta) - PI / 2.0,
            FieldKind::MultiReeb { k } => {
                // Anchor angles pi, 0, -pi, -2k pi at the reference lines,
                // closing upward to pi - 2k pi after one period. Segment
                // lengths are proportional to the turn they carry, so the
                // angular speed (hence the displacement floor) is uniform.
                let t = frac_centered(theta - 0.5) + 0.5; // in [0,1), 0 at 0
                let kk = *k as f64;
                let total = 2.0 * kk + 2.0;
                let ls = [1.0 / total, 1.0 / total, (2.0 * kk - 1.0) / total, 1.0 / total];
                let angles = [PI, 0.0, -PI, -2.0 * kk * PI, PI - 2.0 * kk * PI];
                let mut acc = 0.0;
                for i in 0..4 {
                    if t < acc + ls[i] || i == 3 {
                        let t0 = ((t - acc) / ls[i]).clamp(0.0, 1.0);
                        return angles[i] + t0 * (angles[i + 1] - angles[i]);
                    }
                    acc += ls[i];
                }
                unreachable!()
            }
            FieldKind::Sector { word } => {
                let n = word.0.len();
                if n == 0 {
                    return PI / 2.0;
                }
                let t = frac_centered(theta - 0.5) + 0.5; // in [0,1)
                let idx = ((t * n as f64).floor() as usize).min(n - 1);
                let local = t * n as f64 - idx as f64;
                // Accumulate the angle at the sector start.
                let mut alpha = if sector_chain_start(word) { PI / 2.0 } else { -PI / 2.0 };
                for s in &word.0[..idx] {
                    alpha += sector_delta(s.kind);
                }
                let delta = sector_delta(word.0[idx].kind);
                alpha + delta * 0.5 * (1.0 - (PI * local).cos())
            }
        }
    }

    /// Max |d alpha / d theta|, used to size the displacement so the
    /// perturbation stays a homeomorphism.
    fn max_slope(&self) -> f64 {
        match self {
            FieldKind::Flower { p } => TAU * (*p as f64),
            FieldKind::MultiReeb { k } => (2.0 * (*k as f64) + 2.0) * PI,
            FieldKind::Sector { word } => {
                let n = word.0.len();
                if n == 0 || word.0.iter().all(|s| sector_delta(s.kind) == 0.0) {
                    return 0.0;
                }
                PI * PI * n as f64 / 2.0
            }
        }
    }

    /// Winding of the field over one period, in turns.
    fn winding(&self) -> i64 {
        match self {
            FieldKind::Flower { p } => *p as i64,
            FieldKind::MultiReeb { k } => -(*k as i64),
            FieldKind::Sector { word } => {
                let e = word.count(SectorKind::Elliptic) as i64;
                let h = word.count(SectorKind::Hyperbolic) as i64;
                (e - h) / 2
            }
        }
    }

    fn eval(&self, theta: f64) -> (f64, f64) {
        let a = self.alpha(theta);
        (a.cos(), a.sin())
    }
}

fn sector_delta(kind: SectorKind) -> f64 {
    match kind {
        SectorKind::Elliptic => PI,
        SectorKind::Hyperbolic => -PI,
        SectorKind::ParabolicAttr | SectorKind::ParabolicRep => 0.0,
    }
}

/// Stability of the ray at the start of sector 0 (true = stable, field up).
fn sector_chain_start(word: &SectorWord) -> bool {
    match word.0.first() {
        None => true,
        Some(s) => match s.kind {
            SectorKind::ParabolicAttr => true,
            SectorKind::ParabolicRep => false,
            SectorKind::Elliptic => !s.direct,
            SectorKind::Hyperbolic => s.direct,
        },
    }
}

// ---------------------------------------------------------------------------
// Lifted maps
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum MapKind {
    /// The deck translation power `theta -> theta + d`.
    Translation { d: f64 },
    /// Exact lift of the linear hyperbolic plane map `(x, y) -> (2x, y/2)`
    /// with north at the origin.
    Saddle,
    /// Composition of `substeps` small displacements along a unit field.
    Perturb { field: Arc<FieldKind>, eps: f64, substeps: u32 },
}

impl MapKind {
    fn fwd_once(&self, p: StripPoint) -> StripPoint {
        match self {
            MapKind::Translation { d } => StripPoint::new(p.theta + d, p.r),
            MapKind::Saddle => saddle_step(p, 2.0),
            MapKind::Perturb { field, eps, substeps } => {
                let mut q = p;
                let step = eps / *substeps as f64;
                for _ in 0..*substeps {
                    let (vx, vy) = field.eval(q.theta);
                    q = StripPoint::new(q.theta + step * vx, q.r + step * vy);
                }
                q
            }
        }
    }

    fn inv_once(&self, p: StripPoint) -> StripPoint {
        match self {
            MapKind::Translation { d } => StripPoint::new(p.theta - d, p.r),
            MapKind::Saddle => saddle_step(p, 0.5),
            MapKind::Perturb { field, eps, substeps } => {
                let mut q = p;
                let step = eps / *substeps as f64;
                for _ in 0..*substeps {
                    // Invert one substep y = x + s V(x) by fixed-point
                    // iteration; contraction factor is s * Lip(V) < 1/2.
                    let mut x = StripPoint::new(q.theta, q.r);
                    for _ in 0..60 {
                        let (vx, vy) = field.eval(x.theta);
                        let nx = StripPoint::new(q.theta - step * vx, q.r - step * vy);
                        if nx.dist(x) < 1e-16 {
                            x = nx;
                            break;
                        }
                        x = nx;
                    }
                    q = x;
                }
                q
            }
        }
    }
}

/// One application of the lift of `(x, y) -> (mu x, y / mu)`.
fn saddle_step(p: StripPoint, mu: f64) -> StripPoint {
    let phi = TAU * frac_centered(p.theta);
    let (s, c) = phi.sin_cos();
    let (ix, iy) = (mu * c, s / mu);
    let dot = c * ix + s * iy;
    let crs = c * iy - s * ix;
    let dtheta = crs.atan2(dot) / TAU;
    let dr = -0.5 * (ix * ix + iy * iy).ln();
    StripPoint::new(p.theta + dtheta, p.r + dr)
}

/// A strip homeomorphism commuting with the deck translation, with inverse.
///
/// `power` composes the base map with itself; `view_south` conjugates by the
/// orientation-preserving flip `(theta, r) -> (-theta, -r)`, which swaps the
/// two ends of the annulus.
#[derive(Debug, Clone)]
pub struct LiftedMap {
    kind: MapKind,
    pub power: i32,
    pub view_south: bool,
    pub name: String,
    pub params: BTreeMap<String, String>,
    /// Modulus-of-continuity constant (Lipschitz bound for one application
    /// of the map or its inverse) on the default window.
    pub lipschitz: f64,
    /// Lower bound for one-step displacement on the default window.
    pub displacement_min: f64,
    /// Winding of the displacement field over one period, when known
    /// analytically (all fixtures). The lift index must equal it.
    pub field_winding: Option<i64>,
}

fn flip(p: StripPoint) -> StripPoint {
    StripPoint::new(-p.theta, -p.r)
}

impl LiftedMap {
    pub fn forward(&self, p: StripPoint) -> StripPoint {
        self.apply(p, self.power)
    }

    pub fn inverse(&self, p: StripPoint) -> StripPoint {
        self.apply(p, -self.power)
    }

    fn apply(&self, p: StripPoint, power: i32) -> StripPoint {
        let mut q = if self.view_south { flip(p) } else { p };
        if power >= 0 {
            for _ in 0..power {
                q = self.kind.fwd_once(q);
            }
        } else {
            for _ in 0..-power {
                q = self.kind.inv_once(q);
            }
        }
        if self.view_south {
            flip(q)
        } else {
            q
        }
    }

    /// Displacement of one application, `forward(p) - p`.
    pub fn displacement(&self, p: StripPoint) -> (f64, f64) {
        let q = self.forward(p);
        (q.theta - p.theta, q.r - p.r)
    }

    /// Composition power. `iterate(m, -1)` is the inverse homeomorphism.
    pub fn iterate(&self, n: i32) -> Result<LiftedMap> {
        if n == 0 {
            return Err(Error::BadParams("iterate power must be nonzero".into()));
        }
        let mut out = self.clone();
        out.power = self.power * n;
        out.lipschitz = self.lipschitz.powi(n.abs());
        out.name = if n == 1 { self.name.clone() } else { format!("{}^{}", self.name, n) };
        Ok(out)
    }

    /// The same dynamics viewed from the other end of the annulus.
    pub fn viewed_from_south(&self) -> LiftedMap {
        let mut out = self.clone();
        out.view_south = !self.view_south;
        out.field_winding = self.field_winding.map(|w| -w);
        out.name = format!("{}@flip", self.name);
        out
    }

    /// North-end plane chart: `z = e^{-r} (cos 2 pi theta, sin 2 pi theta)`.
    pub fn to_plane_north(p: StripPoint) -> (f64, f64) {
        let rho = (-p.r).exp();
        let (s, c) = (TAU * p.theta).sin_cos();
        (rho * c, rho * s)
    }

    /// Verify commutation, inverse consistency and absence of fixed points
    /// on a sample of the window. Returns the worst errors found.
    pub fn check_invariants(&self, window: f64, seed: u64) -> InvariantReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst_comm = 0.0f64;
        let mut worst_inv = 0.0f64;
        for _ in 0..1000 {
            let p = StripPoint::new(rng.gen_range(-2.0..2.0), rng.gen_range(-window..window));
            let a = self.forward(p.tau(1));
            let b = self.forward(p).tau(1);
            worst_comm = worst_comm.max(a.dist(b));
            let c = self.inverse(self.forward(p));
            worst_inv = worst_inv.max(c.dist(p));
        }
        let mut min_disp = f64::INFINITY;
        let n = 200;
        for i in 0..n {
            for j in 0..n {
                let p = StripPoint::new(
                    i as f64 / n as f64,
                    -window + 2.0 * window * j as f64 / (n - 1) as f64,
                );
                let (dx, dy) = self.displacement(p);
                min_disp = min_disp.min(dx.hypot(dy));
            }
        }
        InvariantReport {
            commutation_error: worst_comm,
            inverse_error: worst_inv,
            min_displacement: min_disp,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvariantReport {
    pub commutation_error: f64,
    pub inverse_error: f64,
    pub min_displacement: f64,
}

impl InvariantReport {
    pub fn pass(&self) -> bool {
        self.commutation_error < 1e-9 && self.inverse_error < 1e-9 && self.min_displacement > 1e-6
    }
}

// ---------------------------------------------------------------------------
// Fixtures
// ---------------------------------------------------------------------------

/// Safety factor applied when sizing perturbation displacements: the
/// product `eps * Lip(V)` stays below this bound.
const PERTURB_MARGIN: f64 = 0.45;

fn perturb_map(
    field: FieldKind,
    substeps: u32,
    time: f64,
    name: String,
    params: BTreeMap<String, String>,
) -> LiftedMap {
    let slope = field.max_slope();
    let eps = if slope > 0.0 { PERTURB_MARGIN / slope } else { 0.1 } * time;
    let winding = field.winding();
    LiftedMap {
        kind: MapKind::Perturb { field: Arc::new(field), eps, substeps },
        power: 1,
        view_south: false,
        name,
        params,
        lipschitz: 2.0,
        displacement_min: 0.8 * eps,
        field_winding: Some(winding),
    }
}

/// Build a named fixture. Accepted names and parameters:
/// `translation` (d), `saddle`, `flower` (p), `multi_reeb` (k),
/// `sector_flow` (word), `time_one` (word).
pub fn fixture(name: &str, params: &BTreeMap<String, String>) -> Result<LiftedMap> {
    let get_f64 = |key: &str, default: f64| -> Result<f64> {
        match params.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<f64>()
                .map_err(|_| Error::BadParams(format!("{key}={v} is not a number"))),
        }
    };
    let get_u32 = |key: &str, default: u32| -> Result<u32> {
        match params.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<u32>()
                .map_err(|_| Error::BadParams(format!("{key}={v} is not a positive integer"))),
        }
    };
    let mut kept: BTreeMap<String, String> = params.clone();
    kept.insert("map".into(), name.into());
    match name {
        "translation" => {
            let d = get_f64("d", 1.0)?;
            if d == 0.0 {
                return Err(Error::BadParams("translation needs d != 0".into()));
            }
            Ok(LiftedMap {
                kind: MapKind::Translation { d },
                power: 1,
                view_south: false,
                name: format!("translation({d})"),
                params: kept,
                lipschitz: 1.0,
                displacement_min: d.abs(),
                field_winding: Some(0),
            })
        }
        "saddle" => Ok(LiftedMap {
            kind: MapKind::Saddle,
            power: 1,
            view_south: false,
            name: "saddle".into(),
            params: kept,
            lipschitz: 13.0,
            displacement_min: 0.10,
            field_winding: Some(-2),
        }),
        "flower" => {
            let p = get_u32("p", 2)?;
            if p == 0 {
                return Err(Error::BadParams("flower needs p >= 1".into()));
            }
            Ok(perturb_map(FieldKind::Flower { p }, 1, 1.0, format!("flower({p})"), kept))
        }
        "multi_reeb" => {
            let k = get_u32("k", 2)?;
            if k == 0 {
                return Err(Error::BadParams("multi_reeb needs k >= 1".into()));
            }
            Ok(perturb_map(FieldKind::MultiReeb { k }, 1, 1.0, format!("multi_reeb({k})"), kept))
        }
        "sector_flow" | "time_one" => {
            let default = "HHHH".to_string();
            let text = params.get("word").unwrap_or(&default);
            let word = SectorWord::parse(text)?;
            let substeps = if name == "time_one" { 8 } else { 1 };
            Ok(perturb_map(
                FieldKind::Sector { word: word.clone() },
                substeps,
                1.0,
                format!("{name}({})", word.text()),
                kept,
            ))
        }
        other => Err(Error::UnknownFixture(other.into())),
    }
}

/// The abscissas of the four reference Brouwer lines of the multi-Reeb
/// fixture with parameter `k` (the anchor points of its angle profile).
pub fn multi_reeb_lines(k: u32) -> [f64; 4] {
    let total = 2.0 * k as f64 + 2.0;
    [0.0, 1.0 / total, 2.0 / total, (total - 1.0) / total]
}

// ---------------------------------------------------------------------------
// Orbit classification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrbitClass {
    TendsToNorth,
    TendsToSouth,
    LeftWindow,
    Undetermined,
}

/// Classify the forward orbit of `x` within the window `|r| <= window`.
/// Exit through a frontier with monotone final approach reports the end;
/// a non-monotone exit reports `LeftWindow`; staying inside for the whole
/// budget reports `Undetermined`.
pub fn orbit_limit(map: &LiftedMap, x: StripPoint, window: f64, max_iter: u32) -> OrbitClass {
    let mut p = x;
    let mut last_dr = [0.0f64; 3];
    for i in 0..max_iter {
        let q = map.forward(p);
        last_dr[(i % 3) as usize] = q.r - p.r;
        p = q;
        if p.r > window {
            return if i < 3 || last_dr.iter().all(|&d| d >= 0.0) {
                OrbitClass::TendsToNorth
            } else {
                OrbitClass::LeftWindow
            };
        }
        if p.r < -window {
            return if i < 3 || last_dr.iter().all(|&d| d <= 0.0) {
                OrbitClass::TendsToSouth
            } else {
                OrbitClass::LeftWindow
            };
        }
    }
    OrbitClass::Undetermined
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fx(name: &str, params: &[(&str, &str)]) -> LiftedMap {
        let map: BTreeMap<String, String> =
            params.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        fixture(name, &map).unwrap()
    }

    #[test]
    fn fixtures_pass_invariants() {
        for (name, params) in [
            ("translation", vec![]),
            ("translation", vec![("d", "0.5")]),
            ("saddle", vec![]),
            ("flower", vec![("p", "1")]),
            ("flower", vec![("p", "2")]),
            ("flower", vec![("p", "3")]),
            ("multi_reeb", vec![("k", "1")]),
            ("multi_reeb", vec![("k", "2")]),
            ("sector_flow", vec![("word", "HHHH")]),
            ("sector_flow", vec![("word", "EEHH")]),
            ("sector_flow", vec![("word", "HHHHHH")]),
            ("time_one", vec![("word", "EE")]),
        ] {
            let m = fx(name, &params);
            let rep = m.check_invariants(4.0, 7);
            assert!(
                rep.pass(),
                "{name} {params:?}: comm={} inv={} disp={}",
                rep.commutation_error,
                rep.inverse_error,
                rep.min_displacement
            );
            // The declared displacement floor must hold.
            assert!(
                rep.min_displacement >= m.displacement_min * 0.999,
                "{name}: declared {} measured {}",
                m.displacement_min,
                rep.min_displacement
            );
        }
    }

    #[test]
    fn translation_is_deck_translation() {
        let m = fx("translation", &[("d", "1")]);
        let p = StripPoint::new(0.3, -1.2);
        let q = m.forward(p);
        assert!((q.theta - 1.3).abs() < 1e-15 && (q.r + 1.2).abs() < 1e-15);
    }

    #[test]
    fn saddle_iterate_two_matches_squared_map() {
        // Oracle: the lift of (4x, y/4), compared at 100 random samples.
        let m = fx("saddle", &[]);
        let m2 = m.iterate(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = StripPoint::new(rng.gen_range(-2.0..2.0), rng.gen_range(-3.0..3.0));
            let via_power = m2.forward(p);
            let direct = saddle_step(p, 4.0);
            assert!(via_power.dist(direct) < 1e-12);
        }
    }

    #[test]
    fn iterate_one_and_minus_one() {
        let m = fx("saddle", &[]);
        let p = StripPoint::new(0.1, 0.7);
        assert!(m.iterate(1).unwrap().forward(p).dist(m.forward(p)) == 0.0);
        assert!(m.iterate(-1).unwrap().forward(p).dist(m.inverse(p)) < 1e-15);
        assert!(m.iterate(0).is_err());
    }

    #[test]
    fn predicted_index_examples() {
        let ee = SectorWord::parse("EE").unwrap();
        assert_eq!(predicted_index(&ee).unwrap(), 2);
        let h4 = SectorWord::parse("HHHH").unwrap();
        assert_eq!(predicted_index(&h4).unwrap(), -1);
        let trivial = SectorWord::parse("").unwrap();
        assert_eq!(predicted_index(&trivial).unwrap(), 1);
        assert!(matches!(
            SectorWord::parse("EHH"),
            Err(Error::OddImbalance)
        ));
    }

    #[test]
    fn bad_fixture_names_and_params() {
        assert!(matches!(
            fixture("nosuch", &BTreeMap::new()),
            Err(Error::UnknownFixture(_))
        ));
        let mut p = BTreeMap::new();
        p.insert("p".to_string(), "0".to_string());
        assert!(matches!(fixture("flower", &p), Err(Error::BadParams(_))));
        let mut w = BTreeMap::new();
        w.insert("word".to_string(), "AR".to_string());
        assert!(fixture("sector_flow", &w).is_err());
    }

    #[test]
    fn orbit_limit_saddle() {
        let m = fx("saddle", &[]);
        // Stable axis of (2x, y/2) is x = 0, i.e. theta = 1/4 or 3/4.
        assert_eq!(
            orbit_limit(&m, StripPoint::new(0.25, 0.0), 4.0, 100),
            OrbitClass::TendsToNorth
        );
        // Generic orbit drifts to the unstable axis and south.
        assert_eq!(
            orbit_limit(&m, StripPoint::new(0.1, 0.0), 4.0, 200),
            OrbitClass::TendsToSouth
        );
        // Closed-form oracle for the generic point: iterate coordinates.
        let mut z = (0.1f64, 0.0f64);
        let start = StripPoint::new(frac_centered(z.0.atan2(0.0)), 0.0);
        let _ = start;
        let mut r = 0.0;
        let p0 = StripPoint::new(0.1, 0.0);
        let (x0, y0) = LiftedMap::to_plane_north(p0);
        z = (x0, y0);
        for _ in 0..200 {
            z = (2.0 * z.0, z.1 / 2.0);
            r = -(z.0.hypot(z.1)).ln();
            if r < -4.0 {
                break;
            }
        }
        assert!(r < -4.0, "oracle agrees the orbit exits south");
    }

    #[test]
    fn orbit_limit_translation_is_undetermined() {
        let m = fx("translation", &[]);
        assert_eq!(
            orbit_limit(&m, StripPoint::new(0.0, 0.0), 4.0, 50),
            OrbitClass::Undetermined
        );
    }

    #[test]
    fn south_view_is_an_involution_and_commutes() {
        let m = fx("flower", &[("p", "2")]).viewed_from_south();
        let rep = m.check_invariants(4.0, 11);
        assert!(rep.pass());
        let p = StripPoint::new(0.2, 1.0);
        let back = m.viewed_from_south();
        assert!(back.forward(p).dist(fx("flower", &[("p", "2")]).forward(p)) < 1e-15);
    }

    #[test]
    fn multi_reeb_field_horizontal_on_reference_lines() {
        let m = fx("multi_reeb", &[("k", "2")]);
        for (i, &x) in multi_reeb_lines(2).iter().enumerate() {
            let (dx, dy) = m.displacement(StripPoint::new(x, 0.3));
            assert!(
                dx.abs() > 1e-4 && dy.abs() < 1e-9,
                "line {i}: displacement ({dx}, {dy}) should be horizontal"
            );
        }
    }
}
