//! Singular sets of order n and their stabilization, the persistency
//! certificate, the perturbation harness and the Lyapunov functions.
//!
//! `S_n` collects the points hitting the singular half-lines within n steps:
//! `S_{n+1} = S union T^{-1}(S_n)`. Inside the invariant box K the set is a
//! finite union of line segments; the preimage of a segment under the branch
//! on cone `A_i` is again a segment (affine pullback), intersected with the
//! closed cone and clipped to K. Clipping to K is sound: a point of K whose
//! image lies in `S_n` has its image in `T(K)`, which is contained in K.
//! Stabilization (`S_{n+1} cap K = S_n cap K`) is detected as interval
//! coverage: every pullback piece of the newest layer already lies, up to
//! tolerance, inside the union of collinear stored segments.

use std::collections::HashMap;

use crate::bifurcation::BifurcationError;
use crate::billiard::{invariant_ball, iterate, IterateParams, RateVector, Terminal};
use crate::geometry::{cross, dot, HalfLine, Location, Point, Polygon};
use crate::return_map::{Attractor, AttractorCatalog, Provenance};
use crate::billiard::rotation_number;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SingularError {
    #[error("singular complex has not stabilized")]
    NotStabilized,
    #[error("unsupported table for this operation (k = {0})")]
    Unsupported(usize),
    #[error("point is on or ambiguously near the singular lattice")]
    OnSingular,
    #[error(transparent)]
    AtBifurcation(#[from] BifurcationError),
}

/// A line segment between two points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    pub fn direction(&self) -> Point {
        let d = self.b - self.a;
        d / d.norm()
    }

    /// Euclidean distance from `z` to the segment.
    pub fn distance(&self, z: Point) -> f64 {
        let d = self.b - self.a;
        let len2 = d.norm_sqr();
        if len2 == 0.0 {
            return (z - self.a).norm();
        }
        let t = (dot(z - self.a, d) / len2).clamp(0.0, 1.0);
        (z - (self.a + t * d)).norm()
    }
}

/// Spatial index over segments grouped by supporting line, used for the
/// coverage test. Keys quantize (canonical direction, line offset); lookups
/// probe neighboring buckets and both orientations, then confirm
/// geometrically.
struct LineIndex {
    quantum: f64,
    buckets: HashMap<(i64, i64, i64), Vec<usize>>,
}

fn canonical_dir(d: Point) -> Point {
    if d.re < 0.0 || (d.re == 0.0 && d.im < 0.0) {
        -d
    } else {
        d
    }
}

impl LineIndex {
    fn new() -> Self {
        LineIndex {
            quantum: 1e-6,
            buckets: HashMap::new(),
        }
    }

    fn key_of(&self, dir: Point, offset: f64) -> (i64, i64, i64) {
        let q = self.quantum;
        (
            (dir.re / q).round() as i64,
            (dir.im / q).round() as i64,
            (offset / q).round() as i64,
        )
    }

    fn insert(&mut self, idx: usize, seg: &Segment) {
        let d = canonical_dir(seg.direction());
        let c = cross(d, seg.a);
        let key = self.key_of(d, c);
        self.buckets.entry(key).or_default().push(idx);
    }

    /// Indices of stored segments possibly collinear with `seg`.
    fn candidates(&self, seg: &Segment) -> Vec<usize> {
        let mut out = Vec::new();
        let d0 = seg.direction();
        for d in [canonical_dir(d0), canonical_dir(-d0)] {
            let c = cross(d, seg.a);
            let (kx, ky, kc) = self.key_of(d, c);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dc in -1..=1 {
                        if let Some(v) = self.buckets.get(&(kx + dx, ky + dy, kc + dc)) {
                            out.extend_from_slice(v);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// The singular complex `S_order` clipped to the invariant box.
#[derive(Debug, Clone)]
pub struct SingularComplex {
    pub order: usize,
    pub segments: Vec<Segment>,
    /// Cumulative segment count after each order (prefix of `segments`):
    /// the filtration `S_n` is `segments[..counts[n-1]]`.
    pub counts: Vec<usize>,
    pub stabilized: bool,
    /// Sup-norm radius of the invariant box K.
    pub radius: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ExpandParams {
    pub n_max: usize,
    /// Segment-matching tolerance of the coverage test.
    pub match_tol: f64,
    /// Pieces shorter than this are discarded.
    pub min_len: f64,
    pub segment_budget: usize,
}

impl Default for ExpandParams {
    fn default() -> Self {
        ExpandParams {
            n_max: 200,
            match_tol: 1e-9,
            min_len: 1e-9,
            segment_budget: 2_000_000,
        }
    }
}

/// Clips the parameter interval `[lo, hi]` of a segment to `f(t) >= 0` where
/// `f` is affine with values `fa` at t=0 and `fb` at t=1.
fn clip_affine(lo: &mut f64, hi: &mut f64, fa: f64, fb: f64) {
    let df = fb - fa;
    if df.abs() < 1e-300 {
        if fa < 0.0 {
            *lo = 1.0;
            *hi = 0.0;
        }
        return;
    }
    let t = -fa / df;
    if df > 0.0 {
        *lo = lo.max(t);
    } else {
        *hi = hi.min(t);
    }
}

fn clip_to_box(a: Point, b: Point, r: f64, lo: &mut f64, hi: &mut f64) {
    clip_affine(lo, hi, r - a.re, r - b.re);
    clip_affine(lo, hi, a.re + r, b.re + r);
    clip_affine(lo, hi, r - a.im, r - b.im);
    clip_affine(lo, hi, a.im + r, b.im + r);
}

/// Initial layer: the k singular half-lines clipped to the box.
fn clip_halflines(lines: &[HalfLine], r: f64) -> Vec<Segment> {
    let mut out = Vec::new();
    for l in lines {
        // parametrize generously past the box, then clip
        let reach = 4.0 * r + l.origin.norm() + 1.0;
        let a = l.origin;
        let b = l.point_at(reach);
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        clip_to_box(a, b, r, &mut lo, &mut hi);
        if hi > lo {
            out.push(Segment {
                a: a + lo * (b - a),
                b: a + hi * (b - a),
            });
        }
    }
    out
}

/// All preimage pieces of `seg` inside the box: one affine pullback per cone,
/// intersected with the closed cone.
fn pullback(seg: &Segment, table: &Polygon, rates: &RateVector, r: f64, min_len: f64) -> Vec<Segment> {
    let mut out = Vec::new();
    for i in 0..table.k() {
        let l = rates.rate(i);
        let c = (1.0 + l) * table.vertex(i);
        let a = (c - seg.a) / l;
        let b = (c - seg.b) / l;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let (xa, ya) = table.cone_coordinates(i, a);
        let (xb, yb) = table.cone_coordinates(i, b);
        clip_affine(&mut lo, &mut hi, xa, xb);
        clip_affine(&mut lo, &mut hi, ya, yb);
        clip_to_box(a, b, r, &mut lo, &mut hi);
        if hi > lo {
            let piece = Segment {
                a: a + lo * (b - a),
                b: a + hi * (b - a),
            };
            if piece.length() > min_len {
                out.push(piece);
            }
        }
    }
    out
}

/// True when `seg` is covered, within `tol`, by the union of stored segments
/// collinear with it.
fn covered(seg: &Segment, segments: &[Segment], index: &LineIndex, tol: f64) -> bool {
    let d = seg.direction();
    let len = seg.length();
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    for idx in index.candidates(seg) {
        let s = &segments[idx];
        // geometric confirmation of collinearity
        if cross(d, s.a - seg.a).abs() > tol || cross(d, s.b - seg.a).abs() > tol {
            continue;
        }
        let t0 = dot(s.a - seg.a, d);
        let t1 = dot(s.b - seg.a, d);
        let (lo, hi) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
        if hi < -tol || lo > len + tol {
            continue;
        }
        intervals.push((lo, hi));
    }
    intervals.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut reach = 0.0f64;
    for (lo, hi) in intervals {
        if lo > reach + tol {
            return false;
        }
        reach = reach.max(hi);
        if reach >= len - tol {
            return true;
        }
    }
    len <= tol
}

/// Expands the singular filtration until it stabilizes inside K, or until a
/// budget runs out (`stabilized` stays false: that is a finding, not a
/// failure).
pub fn expand_singular(table: &Polygon, rates: &RateVector, params: &ExpandParams) -> SingularComplex {
    let r = invariant_ball(table, rates).expect("rates in (0,1)").radius;
    if table.is_segment() {
        // 1-D: the singular set is the table itself and has no preimages on
        // the line (images of the exterior land beyond the far endpoint)
        return SingularComplex {
            order: 1,
            segments: vec![Segment {
                a: table.vertex(0),
                b: table.vertex(1),
            }],
            counts: vec![1],
            stabilized: true,
            radius: r,
        };
    }
    let mut segments: Vec<Segment> = Vec::new();
    let mut index = LineIndex::new();
    let mut counts = Vec::new();

    let mut frontier = clip_halflines(&table.singular_lines(), r);
    let mut order = 0usize;
    loop {
        order += 1;
        let mut added = Vec::new();
        for piece in &frontier {
            if !covered(piece, &segments, &index, params.match_tol) {
                index.insert(segments.len(), piece);
                segments.push(*piece);
                added.push(*piece);
            }
        }
        counts.push(segments.len());
        if added.is_empty() {
            return SingularComplex {
                order: order - 1, // nothing new: S_order = S_{order-1} in K
                segments,
                counts,
                stabilized: true,
                radius: r,
            };
        }
        if order >= params.n_max || segments.len() > params.segment_budget {
            return SingularComplex {
                order,
                segments,
                counts,
                stabilized: false,
                radius: r,
            };
        }
        frontier = added
            .iter()
            .flat_map(|s| pullback(s, table, rates, r, params.min_len))
            .collect();
    }
}

/// Outcome of sampling the components of `K \ S_n`.
#[derive(Debug, Clone)]
pub struct StabilizationOutcome {
    pub catalog: AttractorCatalog,
    pub samples: usize,
    pub non_convergent: usize,
    pub singular_hits: usize,
}

/// The finite omega-limit catalog implied by stabilization: every connected
/// component of `K \ S_n` borders a singular segment, so sampling points
/// offset perpendicularly from every segment (plus random fill) reaches every
/// component; each sample is iterated to its limit cycle and the cycles are
/// deduplicated.
pub fn stabilization_consequence(
    s: &SingularComplex,
    table: &Polygon,
    rates: &RateVector,
    params: &IterateParams,
    rng_seed: u64,
) -> Result<StabilizationOutcome, SingularError> {
    if !s.stabilized {
        return Err(SingularError::NotStabilized);
    }
    let r = s.radius;
    let mut seeds: Vec<Point> = Vec::new();
    for seg in &s.segments {
        let d = seg.direction();
        let n = Point::new(-d.im, d.re);
        for frac in [0.25, 0.5, 0.75] {
            let base = seg.a + frac * (seg.b - seg.a);
            for delta in [1e-6, 1e-4, 1e-2, 0.2] {
                seeds.push(base + delta * n);
                seeds.push(base - delta * n);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    for _ in 0..2000 {
        seeds.push(Point::new(rng.gen_range(-r..r), rng.gen_range(-r..r)));
    }
    let samples = seeds.len();

    #[derive(Default)]
    struct Tally {
        cycles: Vec<Vec<Point>>,
        non_convergent: usize,
        singular_hits: usize,
    }
    let tally = seeds
        .par_iter()
        .fold(Tally::default, |mut t, &z| {
            if !matches!(table.locate(z, params.eps), Location::Cone(_)) {
                return t;
            }
            match iterate(z, table, rates, params) {
                Ok(rec) => match rec.terminal {
                    Terminal::Converged { cycle, .. } => t.cycles.push(cycle),
                    Terminal::HitSingular { .. } => t.singular_hits += 1,
                    Terminal::BudgetExhausted => t.non_convergent += 1,
                },
                Err(_) => {}
            }
            t
        })
        .reduce(Tally::default, |mut a, mut b| {
            a.cycles.append(&mut b.cycles);
            a.non_convergent += b.non_convergent;
            a.singular_hits += b.singular_hits;
            a
        });

    let singular_lines = table.singular_lines();
    let mut catalog = AttractorCatalog::default();
    for cycle in tally.cycles {
        if catalog.match_cycle(&cycle, 1e-6).is_some() {
            continue;
        }
        let word = cycle
            .iter()
            .filter_map(|&p| match table.locate(p, params.eps) {
                Location::Cone(i) => Some(i),
                _ => None,
            })
            .collect::<Vec<_>>();
        let degenerate = word.len() != cycle.len()
            || cycle
                .iter()
                .any(|&p| singular_lines.iter().any(|l| l.distance(p) <= params.eps));
        catalog.orbits.push(Attractor {
            kind: None,
            period: cycle.len(),
            rotation: rotation_number(&cycle, table).ok(),
            points: cycle,
            word,
            provenance: Provenance::Simulated,
            exists_above: None,
            degenerate,
        });
    }
    catalog.orbits.sort_by_key(|o| o.period);
    Ok(StabilizationOutcome {
        catalog,
        samples,
        non_convergent: tally.non_convergent,
        singular_hits: tally.singular_hits,
    })
}

// --- persistency ------------------------------------------------------------

/// Convex polygon, counterclockwise vertex order.
#[derive(Debug, Clone)]
struct ConvexPiece {
    verts: Vec<Point>,
}

impl ConvexPiece {
    /// Keeps the part with `f(z) >= 0` for the affine functional
    /// `f(z) = cross(dir, z - origin)` (Sutherland-Hodgman).
    fn clip(&self, origin: Point, dir: Point) -> ConvexPiece {
        let mut out = Vec::new();
        let n = self.verts.len();
        for i in 0..n {
            let a = self.verts[i];
            let b = self.verts[(i + 1) % n];
            let fa = cross(dir, a - origin);
            let fb = cross(dir, b - origin);
            if fa >= 0.0 {
                out.push(a);
            }
            if (fa > 0.0 && fb < 0.0) || (fa < 0.0 && fb > 0.0) {
                let t = fa / (fa - fb);
                out.push(a + t * (b - a));
            }
        }
        ConvexPiece { verts: out }
    }

    fn is_degenerate(&self) -> bool {
        if self.verts.len() < 3 {
            return true;
        }
        // near-zero area
        let mut area = 0.0;
        let n = self.verts.len();
        for i in 0..n {
            area += cross(self.verts[i], self.verts[(i + 1) % n]);
        }
        area.abs() < 1e-18
    }

    fn contains(&self, z: Point) -> bool {
        let n = self.verts.len();
        (0..n).all(|i| cross(self.verts[(i + 1) % n] - self.verts[i], z - self.verts[i]) >= 0.0)
    }

    fn distance_to_halfline(&self, l: &HalfLine) -> f64 {
        let n = self.verts.len();
        // crossing test: any edge meets the half-line?
        let far = l.point_at(1e12);
        for i in 0..n {
            let a = self.verts[i];
            let b = self.verts[(i + 1) % n];
            if segments_intersect(a, b, l.origin, far) {
                return 0.0;
            }
        }
        if self.contains(l.origin) {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for i in 0..n {
            best = best.min(l.distance(self.verts[i]));
            let seg = Segment {
                a: self.verts[i],
                b: self.verts[(i + 1) % n],
            };
            best = best.min(seg.distance(l.origin));
        }
        best
    }
}

fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(d - c, a - c);
    let d2 = cross(d - c, b - c);
    let d3 = cross(b - a, c - a);
    let d4 = cross(b - a, d - a);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
        || d1 == 0.0 && on_segment(c, d, a)
        || d2 == 0.0 && on_segment(c, d, b)
        || d3 == 0.0 && on_segment(a, b, c)
        || d4 == 0.0 && on_segment(a, b, d)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.re >= a.re.min(b.re) && p.re <= a.re.max(b.re) && p.im >= a.im.min(b.im) && p.im <= a.im.max(b.im)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Persistency {
    /// `T^n(K)` stays at least `margin` away from the singular set.
    Certificate { n: usize, margin: f64 },
    Inconclusive { n_max: usize },
    PieceBudgetExceeded { n: usize, pieces: usize },
}

/// Sufficient persistency condition: forward-images the convex decomposition
/// of `K` (closed cones handle the multivalued extension on the singular
/// lines) and certifies once the whole image clears the singular set by more
/// than `eps`.
pub fn persistency_check(
    table: &Polygon,
    rates: &RateVector,
    n_max: usize,
    eps: f64,
    piece_budget: usize,
) -> Persistency {
    let r = invariant_ball(table, rates).expect("rates in (0,1)").radius;
    if table.is_segment() {
        return persistency_segment(table, rates, n_max, eps, r);
    }
    let k = table.k();
    let box_piece = ConvexPiece {
        verts: vec![
            Point::new(-r, -r),
            Point::new(r, -r),
            Point::new(r, r),
            Point::new(-r, r),
        ],
    };
    // cone clip half-planes: x >= 0 is cross(d2_adj, z - w) >= 0 etc.
    let cone_clip = |piece: &ConvexPiece, i: usize| -> ConvexPiece {
        let (d1, d2) = table.cone_directions(i);
        let w = table.vertex(i);
        let det = cross(d1, d2);
        // x = cross(z - w, d2)/det >= 0 ; y = cross(d1, z - w)/det >= 0
        let p1 = if det > 0.0 {
            piece.clip(w, -d2)
        } else {
            piece.clip(w, d2)
        };
        if det > 0.0 {
            p1.clip(w, d1)
        } else {
            let flipped = p1.clip(w, -d1);
            flipped
        }
    };
    let mut pieces: Vec<(usize, ConvexPiece)> = (0..k)
        .filter_map(|i| {
            let p = cone_clip(&box_piece, i);
            if p.is_degenerate() {
                None
            } else {
                Some((i, p))
            }
        })
        .collect();
    let singular = table.singular_lines();
    for n in 1..=n_max {
        // forward image
        let images: Vec<ConvexPiece> = pieces
            .iter()
            .map(|(i, p)| {
                let l = rates.rate(*i);
                let c = (1.0 + l) * table.vertex(*i);
                // z -> -l z + c preserves orientation (scalar similarity)
                ConvexPiece {
                    verts: p.verts.iter().map(|&v| -l * v + c).collect(),
                }
            })
            .collect();
        let margin = images
            .iter()
            .flat_map(|p| singular.iter().map(move |s| p.distance_to_halfline(s)))
            .fold(f64::INFINITY, f64::min);
        if margin > eps {
            return Persistency::Certificate { n, margin };
        }
        // re-split by cones
        pieces = images
            .iter()
            .flat_map(|img| {
                (0..k).filter_map(|j| {
                    let q = cone_clip(img, j);
                    if q.is_degenerate() {
                        None
                    } else {
                        Some((j, q))
                    }
                })
            })
            .collect();
        if pieces.len() > piece_budget {
            return Persistency::PieceBudgetExceeded {
                n,
                pieces: pieces.len(),
            };
        }
    }
    Persistency::Inconclusive { n_max }
}

/// 1-D persistency: interval dynamics on the line, singular set = the table.
fn persistency_segment(table: &Polygon, rates: &RateVector, n_max: usize, eps: f64, r: f64) -> Persistency {
    let a = table.vertex(1).re; // [-a, a]
    let mut intervals = vec![(a, r), (-r, -a)];
    for n in 1..=n_max {
        intervals = intervals
            .iter()
            .map(|&(lo, hi)| {
                let side = if lo >= a { 0 } else { 1 };
                // reflection about the far endpoint with contraction
                let l = rates.rate(side);
                let w = table.vertex(side).re;
                let f = |x: f64| -l * x + (1.0 + l) * w;
                let (p, q) = (f(lo), f(hi));
                (p.min(q), p.max(q))
            })
            .collect();
        let margin = intervals
            .iter()
            .map(|&(lo, hi)| {
                if hi < -a {
                    -a - hi
                } else if lo > a {
                    lo - a
                } else {
                    0.0
                }
            })
            .fold(f64::INFINITY, f64::min);
        if margin > eps {
            return Persistency::Certificate { n, margin };
        }
    }
    Persistency::Inconclusive { n_max }
}

// --- perturbation harness ---------------------------------------------------

#[derive(Debug, Clone)]
pub struct PerturbTrial {
    pub count_match: bool,
    pub periods_match: bool,
    pub hausdorff: f64,
}

#[derive(Debug, Clone)]
pub struct PersistencyReport {
    pub baseline_periods: Vec<usize>,
    pub trials: Vec<PerturbTrial>,
    pub all_match: bool,
    pub max_hausdorff: f64,
}

fn omega_points(cat: &AttractorCatalog) -> Vec<Point> {
    cat.orbits.iter().flat_map(|o| o.points.iter().copied()).collect()
}

fn hausdorff(a: &[Point], b: &[Point]) -> f64 {
    let one_way = |x: &[Point], y: &[Point]| {
        x.iter()
            .map(|p| {
                y.iter()
                    .map(|q| (*p - *q).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0f64, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Samples quadrilaterals and rate vectors within sup-norm distance `delta`
/// of the square at rate `lambda0` (one vertex pinned at the origin), redoes
/// the simulation census for each, and reports count/period agreement and the
/// Hausdorff distance of the omega-sets. Mismatches are rows, not failures.
pub fn perturb_harness(
    lambda0: f64,
    delta: f64,
    trials: usize,
    census_seeds: usize,
    rng_seed: u64,
    params: &IterateParams,
) -> PersistencyReport {
    let square = Polygon::square();
    let rates0 = RateVector::uniform(4, lambda0).expect("lambda0 in (0,1)");
    let baseline = crate::return_map::simulation_census(&square, &rates0, census_seeds, rng_seed, params);
    let base_omega = omega_points(&baseline);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed ^ 0x9e37_79b9);

    let inputs: Vec<(Polygon, RateVector)> = (0..trials)
        .map(|_| loop {
            let mut verts = square.vertices().to_vec();
            for v in verts.iter_mut().skip(1) {
                *v += Point::new(rng.gen_range(-delta..=delta), rng.gen_range(-delta..=delta));
            }
            let rates: Vec<f64> = (0..4)
                .map(|_| (lambda0 + rng.gen_range(-delta..=delta)).clamp(1e-6, 1.0 - 1e-6))
                .collect();
            if let (Ok(p), Ok(r)) = (Polygon::new(verts), RateVector::new(rates)) {
                break (p, r);
            }
        })
        .collect();

    let trials: Vec<PerturbTrial> = inputs
        .par_iter()
        .map(|(p, r)| {
            let cat = crate::return_map::simulation_census(p, r, census_seeds, rng_seed, params);
            PerturbTrial {
                count_match: cat.orbits.len() == baseline.orbits.len(),
                periods_match: cat.periods() == baseline.periods(),
                hausdorff: hausdorff(&omega_points(&cat), &base_omega),
            }
        })
        .collect();

    let all_match = trials.iter().all(|t| t.count_match && t.periods_match);
    let max_hausdorff = trials.iter().map(|t| t.hausdorff).fold(0.0f64, f64::max);
    PersistencyReport {
        baseline_periods: baseline.periods(),
        trials,
        all_match,
        max_hausdorff,
    }
}

// --- Lyapunov functions -----------------------------------------------------

fn floor_checked(v: f64, eps: f64) -> Result<i64, SingularError> {
    if (v - v.round()).abs() <= eps {
        return Err(SingularError::OnSingular);
    }
    Ok(v.floor() as i64)
}

/// The integral of motion / Lyapunov function: for `z` in `A_i` with cone
/// coordinates `(x, y)`, `h(x, y) = [x] + [y]` on the square and
/// `h_-+(x, y) = [x/2] + [y/2] + [(|x -+ y| + 1)/2]` on the triangle (minus)
/// and hexagon (plus). Conserved at rate 1, non-increasing for rates below 1.
pub fn lyapunov_value(z: Point, table: &Polygon, eps: f64) -> Result<i64, SingularError> {
    let i = match table.locate(z, eps) {
        Location::Cone(i) => i,
        _ => return Err(SingularError::OnSingular),
    };
    let (x, y) = table.cone_coordinates(i, z);
    match table.k() {
        4 => Ok(floor_checked(x, eps)? + floor_checked(y, eps)?),
        3 => Ok(floor_checked(x / 2.0, eps)?
            + floor_checked(y / 2.0, eps)?
            + floor_checked(((x - y).abs() + 1.0) / 2.0, eps)?),
        6 => Ok(floor_checked(x / 2.0, eps)?
            + floor_checked(y / 2.0, eps)?
            + floor_checked(((x + y).abs() + 1.0) / 2.0, eps)?),
        k => Err(SingularError::Unsupported(k)),
    }
}
