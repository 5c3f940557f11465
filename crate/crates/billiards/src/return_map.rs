//! First-return analysis on the strip B for the equilateral triangle and the
//! square, both with equal rates.
//!
//! Triangle (`v = exp(2 pi i / 3)`, coordinates `z = a + b (1 + v)`): the
//! factor cone A splits into `C = {a > -1/lambda}` and `E = {a < -1/lambda}`,
//! `B = C \cap {b < 1/lambda + 1/lambda^2}`, and `B_n` is the return-time
//! class with `sum_{j=2}^{2n-1} lambda^{-j} < a + b < sum_{j=2}^{2n+1}
//! lambda^{-j}`. The return branch is `phi_n = (f_E f_C)^{n-1} f_C` with
//! closed form `phi_n(z) = lambda^{2n-2} - v (1 + .. + lambda^{2n-3}) +
//! lambda^{2n-1} (1+v) z`. Its extension `psi_n` has fixed point `z_n`
//! (realized iff `lambda > lambda_{2n-1}`, plane period `3(2n-1)`); the pair
//! `w_n, u_n` fixed by `psi_{n+1} psi_n` is realized iff `lambda >
//! gamma_{2n-1}` and lifts to one plane orbit of period `12n`.
//!
//! Square: `B = {Re > 0, 0 < Im < 1/lambda}`, `C = {Re > 0, Im > 1/lambda}`,
//! `phi_n = f_C^{n-1} f_B = i lambda^n z + lambda^{n-1} + (1-i)(1 + .. +
//! lambda^{n-2})` with fixed points `z_n` of plane period `4n`, realized for
//! `n <= m(lambda)` where `lambda_m < lambda <= lambda_{m+1}`.

use crate::bifurcation::{self, BifurcationError};
use crate::billiard::{
    invariant_ball, iterate, rotation_number, step, IterateParams, RateVector, Word,
};
use crate::geometry::{sup_norm, Location, Point, Polygon};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ReturnMapError {
    #[error("point is not in strip B_{0}")]
    WrongStrip(usize),
    #[error("point is not in the section B")]
    NotInSection,
    #[error("point within eps of a strip boundary")]
    BoundaryAmbiguous,
    #[error("no return to B within the iteration budget")]
    NoReturn,
    #[error(transparent)]
    AtBifurcation(#[from] BifurcationError),
}

/// An affine map `z -> mult z + offset` (complex multiplication encodes the
/// rotation-scaling part).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub mult: Point,
    pub offset: Point,
}

impl Affine {
    #[inline]
    pub fn apply(&self, z: Point) -> Point {
        self.mult * z + self.offset
    }

    /// `self` after `other`: `(self . other)(z)`.
    pub fn compose(&self, other: &Affine) -> Affine {
        Affine {
            mult: self.mult * other.mult,
            offset: self.mult * other.offset + self.offset,
        }
    }

    /// Unique fixed point of a strict contraction, solved exactly.
    pub fn fixed_point(&self) -> Point {
        self.offset / (Complex64::new(1.0, 0.0) - self.mult)
    }
}

fn v3() -> Point {
    Point::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0)
}

/// `1 + lambda + .. + lambda^m`; empty (0) for m < 0.
fn geom(lambda: f64, m: i64) -> f64 {
    let mut acc = 0.0;
    for _ in 0..=m.max(-1) {
        acc = acc * lambda + 1.0;
    }
    acc
}

/// `sum_{j=lo}^{hi} lambda^{-j}`; empty for hi < lo.
fn inv_geom(lambda: f64, lo: i64, hi: i64) -> f64 {
    let mut acc = 0.0;
    for j in lo..=hi {
        acc += lambda.powi(-(j as i32));
    }
    acc
}

// --- triangle -------------------------------------------------------------

/// Coordinates `(a, b)` with `z = a + b (1 + v)`; `1 + v = exp(i pi / 3)`.
pub fn tri_coords(z: Point) -> (f64, f64) {
    let b = z.im * 2.0 / 3f64.sqrt();
    (z.re - 0.5 * b, b)
}

pub fn tri_point(a: f64, b: f64) -> Point {
    Point::new(a + 0.5 * b, b * 3f64.sqrt() / 2.0)
}

/// Strip membership for the triangle section. `Ok(n)` means `z` lies in the
/// open strip `B_n` with margin `eps` in the (a, b) coordinates.
pub fn triangle_strip_index(z: Point, lambda: f64, eps: f64) -> Result<usize, ReturnMapError> {
    let (a, b) = tri_coords(z);
    let s2 = inv_geom(lambda, 1, 2);
    let in_b = b > eps && a + b > eps && a > -1.0 / lambda + eps && b < s2 - eps;
    if !in_b {
        let near = b.abs() <= eps
            || (a + b).abs() <= eps
            || (a + 1.0 / lambda).abs() <= eps
            || (b - s2).abs() <= eps;
        return Err(if near {
            ReturnMapError::BoundaryAmbiguous
        } else {
            ReturnMapError::NotInSection
        });
    }
    let s = a + b;
    for n in 1.. {
        let lo = inv_geom(lambda, 2, 2 * n as i64 - 1);
        let hi = inv_geom(lambda, 2, 2 * n as i64 + 1);
        if (s - lo).abs() <= eps || (s - hi).abs() <= eps {
            return Err(ReturnMapError::BoundaryAmbiguous);
        }
        if s < lo {
            unreachable!("strips exhaust B");
        }
        if s < hi {
            return Ok(n);
        }
    }
    unreachable!()
}

/// The affine extension `psi_n` of the triangle return branch `phi_n`.
pub fn triangle_psi(n: usize, lambda: f64) -> Affine {
    let v = v3();
    Affine {
        mult: lambda.powi(2 * n as i32 - 1) * (1.0 + v),
        offset: Point::new(lambda.powi(2 * n as i32 - 2), 0.0) - v * geom(lambda, 2 * n as i64 - 3),
    }
}

/// `phi_n(z)` for `z` in `B_n` (checked).
pub fn triangle_phi(z: Point, n: usize, lambda: f64, eps: f64) -> Result<Point, ReturnMapError> {
    match triangle_strip_index(z, lambda, eps) {
        Ok(m) if m == n => Ok(triangle_psi(n, lambda).apply(z)),
        Ok(_) => Err(ReturnMapError::WrongStrip(n)),
        Err(e) => Err(e),
    }
}

/// The two factor branches of the triangle, for composition crosschecks.
pub fn triangle_branches(lambda: f64) -> (Affine, Affine) {
    let v = v3();
    let f_c = Affine {
        mult: lambda * (1.0 + v),
        offset: Point::new(1.0, 0.0),
    };
    let f_e = Affine {
        mult: -lambda * v,
        offset: -v,
    };
    (f_c, f_e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedKind {
    /// Fixed point of `psi_n`.
    Z,
    /// Fixed point of `psi_{n+1} . psi_n`.
    W,
    /// Fixed point of `psi_n . psi_{n+1}` (the partner of W on the same orbit).
    U,
}

/// A realized fixed point of the return dynamics, with its lift data.
#[derive(Debug, Clone)]
pub struct ReturnFixedPoint {
    pub kind: FixedKind,
    pub n: usize,
    pub location: Point,
    /// Open lower endpoint of the rate interval on which the orbit exists
    /// (upper endpoint is 1).
    pub exists_above: f64,
    pub f_period: usize,
    pub t_period: usize,
}

/// Realized triangle fixed points for this `n`: `z_n` iff it sits in `B_n`,
/// and the pair `w_n, u_n` iff `w_n` sits in `B_n` and `u_n` in `B_{n+1}`.
/// Membership is decided by the strip predicates, not by the thresholds.
pub fn triangle_fixed_points(n: usize, lambda: f64, eps: f64) -> Vec<ReturnFixedPoint> {
    let mut out = Vec::new();
    let psi_n = triangle_psi(n, lambda);
    let z_n = psi_n.fixed_point();
    if triangle_strip_index(z_n, lambda, eps) == Ok(n) {
        out.push(ReturnFixedPoint {
            kind: FixedKind::Z,
            n,
            location: z_n,
            exists_above: bifurcation::threshold_q(2 * n - 1),
            f_period: 2 * n - 1,
            t_period: 3 * (2 * n - 1),
        });
    }
    let psi_n1 = triangle_psi(n + 1, lambda);
    let w_n = psi_n1.compose(&psi_n).fixed_point();
    let u_n = psi_n.apply(w_n);
    if triangle_strip_index(w_n, lambda, eps) == Ok(n)
        && triangle_strip_index(u_n, lambda, eps) == Ok(n + 1)
    {
        let gamma = bifurcation::threshold_t(2 * n - 1);
        out.push(ReturnFixedPoint {
            kind: FixedKind::W,
            n,
            location: w_n,
            exists_above: gamma,
            f_period: 4 * n,
            t_period: 12 * n,
        });
        out.push(ReturnFixedPoint {
            kind: FixedKind::U,
            n,
            location: u_n,
            exists_above: gamma,
            f_period: 4 * n,
            t_period: 12 * n,
        });
    }
    out
}

// --- square ---------------------------------------------------------------

/// The two factor branches of the square.
pub fn square_branches(lambda: f64) -> (Affine, Affine) {
    let f_b = Affine {
        mult: Point::new(0.0, lambda),
        offset: Point::new(1.0, 0.0),
    };
    let f_c = Affine {
        mult: Point::new(lambda, 0.0),
        offset: Point::new(1.0, -1.0),
    };
    (f_b, f_c)
}

/// The affine extension `psi_n` of the square return branch
/// `phi_n = f_C^{n-1} . f_B`.
pub fn square_psi(n: usize, lambda: f64) -> Affine {
    Affine {
        mult: Point::new(0.0, lambda.powi(n as i32)),
        offset: Point::new(lambda.powi(n as i32 - 1), 0.0)
            + Point::new(1.0, -1.0) * geom(lambda, n as i64 - 2),
    }
}

fn square_in_b(z: Point, lambda: f64, eps: f64) -> Result<bool, ReturnMapError> {
    let lim = 1.0 / lambda;
    if z.re.abs() <= eps || z.im.abs() <= eps || (z.im - lim).abs() <= eps {
        return Err(ReturnMapError::BoundaryAmbiguous);
    }
    Ok(z.re > 0.0 && z.im > 0.0 && z.im < lim)
}

const RETURN_BUDGET: usize = 10_000;

/// First return to B for the square: applies `f_B` once, then `f_C` until
/// re-entry. Returns the return point and the return time n (so `z` was in
/// `B_n`).
pub fn square_return(z: Point, lambda: f64, eps: f64) -> Result<(Point, usize), ReturnMapError> {
    if !square_in_b(z, lambda, eps)? {
        return Err(ReturnMapError::NotInSection);
    }
    let (f_b, f_c) = square_branches(lambda);
    let mut w = f_b.apply(z);
    for n in 1..=RETURN_BUDGET {
        match square_in_b(w, lambda, eps) {
            Ok(true) => return Ok((w, n)),
            Ok(false) => w = f_c.apply(w),
            Err(e) => return Err(e),
        }
    }
    Err(ReturnMapError::NoReturn)
}

/// Return-time class of `z` in B (the index n with `z` in `B_n`).
pub fn square_strip_index(z: Point, lambda: f64, eps: f64) -> Result<usize, ReturnMapError> {
    square_return(z, lambda, eps).map(|(_, n)| n)
}

/// Realized square fixed points `z_1 .. z_m` with `m = m(lambda)`; each is
/// validated to lie in its strip by running the actual first return.
pub fn square_fixed_points(lambda: f64, eps: f64) -> Result<Vec<ReturnFixedPoint>, ReturnMapError> {
    let m = bifurcation::square_census(lambda)?;
    let mut out = Vec::new();
    for n in 1..=m {
        let psi = square_psi(n, lambda);
        let z_n = psi.fixed_point();
        if square_strip_index(z_n, lambda, eps) == Ok(n) {
            out.push(ReturnFixedPoint {
                kind: FixedKind::Z,
                n,
                location: z_n,
                exists_above: bifurcation::threshold_q(n),
                f_period: n,
                t_period: 4 * n,
            });
        }
    }
    Ok(out)
}

// --- catalogs -------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    Simulated,
}

/// One attracting periodic orbit of the plane map.
#[derive(Debug, Clone)]
pub struct Attractor {
    pub kind: Option<(FixedKind, usize)>,
    pub period: usize,
    pub rotation: Option<(i64, usize)>,
    pub points: Vec<Point>,
    pub word: Word,
    pub provenance: Provenance,
    pub exists_above: Option<f64>,
    /// Some orbit point lies within eps of the singular set; such orbits are
    /// excluded from the regular catalog by callers that build one.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Default)]
pub struct AttractorCatalog {
    pub orbits: Vec<Attractor>,
}

impl AttractorCatalog {
    pub fn periods(&self) -> Vec<usize> {
        let mut p: Vec<usize> = self.orbits.iter().map(|o| o.period).collect();
        p.sort_unstable();
        p
    }

    /// Index of the catalog orbit this cycle matches (same length, mutual
    /// point coverage within tol), if any.
    pub fn match_cycle(&self, cycle: &[Point], tol: f64) -> Option<usize> {
        self.orbits.iter().position(|o| cycles_match(&o.points, cycle, tol))
    }
}

/// Two cycles agree as point sets within tol (they have equal length and the
/// points cover each other).
pub fn cycles_match(a: &[Point], b: &[Point], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().all(|p| b.iter().any(|q| sup_norm(*p - *q) < tol))
        && b.iter().all(|q| a.iter().any(|p| sup_norm(*p - *q) < tol))
}

/// Materializes the plane orbit of a T-periodic point: iterates `period`
/// steps, requiring every iterate in an open cone and exact closure within
/// tol.
fn lift_orbit(
    z0: Point,
    table: &Polygon,
    rates: &RateVector,
    period: usize,
    eps: f64,
    tol: f64,
) -> Option<(Vec<Point>, Word)> {
    let mut points = Vec::with_capacity(period);
    let mut word = Word::with_capacity(period);
    let mut z = z0;
    for _ in 0..period {
        let i = match table.locate(z, eps) {
            Location::Cone(i) => i,
            _ => return None,
        };
        points.push(z);
        word.push(i);
        z = step(z, table, rates, eps).ok()?;
    }
    if sup_norm(z - z0) < tol {
        Some((points, word))
    } else {
        None
    }
}

/// Which table the exact census applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CensusTable {
    Triangle,
    Square,
}

/// The theorem catalog: every attracting orbit of the plane map, materialized
/// from the return-map fixed points and validated by direct iteration.
/// Triangle: m1 orbits of periods 3(2i-1) plus m2 of periods 12i; square:
/// m orbits of periods 4i.
pub fn attractor_census(
    which: CensusTable,
    lambda: f64,
    eps: f64,
) -> Result<AttractorCatalog, ReturnMapError> {
    let (table, fixed): (Polygon, Vec<ReturnFixedPoint>) = match which {
        CensusTable::Triangle => {
            let (m1, m2) = bifurcation::triangle_census(lambda)?;
            let mut fixed = Vec::new();
            for n in 1..=m1.max(m2) + 1 {
                for fp in triangle_fixed_points(n, lambda, eps) {
                    // one plane orbit per W/U pair: keep U, drop its partner W
                    if fp.kind != FixedKind::W {
                        fixed.push(fp);
                    }
                }
            }
            (Polygon::equilateral_triangle(), fixed)
        }
        CensusTable::Square => (Polygon::square(), square_fixed_points(lambda, eps)?),
    };
    let rates = RateVector::uniform(table.k(), lambda).expect("lambda in (0,1)");
    let singular = table.singular_lines();
    let mut orbits = Vec::new();
    for fp in fixed {
        let Some((points, word)) = lift_orbit(fp.location, &table, &rates, fp.t_period, eps, 1e-9)
        else {
            continue; // boundary-ambiguous lift: excluded from the catalog
        };
        let degenerate = points
            .iter()
            .any(|&p| singular.iter().any(|l| l.distance(p) <= eps));
        orbits.push(Attractor {
            kind: Some((fp.kind, fp.n)),
            period: fp.t_period,
            rotation: rotation_number(&points, &table).ok(),
            points,
            word,
            provenance: Provenance::ClosedForm,
            exists_above: Some(fp.exists_above),
            degenerate,
        });
    }
    orbits.sort_by_key(|o| o.period);
    Ok(AttractorCatalog { orbits })
}

/// Simulation census: iterates `n_seeds` random seeds drawn uniformly from
/// the invariant box and catalogs the distinct limit cycles. Parallel over
/// seeds; deterministic given the RNG seed.
pub fn simulation_census(
    table: &Polygon,
    rates: &RateVector,
    n_seeds: usize,
    rng_seed: u64,
    params: &IterateParams,
) -> AttractorCatalog {
    let ball = invariant_ball(table, rates).expect("rates in (0,1)");
    let r = ball.radius;
    let seeds: Vec<Point> = {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        (0..n_seeds)
            .map(|_| Point::new(rng.gen_range(-r..r), rng.gen_range(-r..r)))
            .collect()
    };
    let cycles: Vec<Vec<Point>> = seeds
        .par_iter()
        .filter_map(|&s| {
            if !matches!(table.locate(s, params.eps), Location::Cone(_)) {
                return None;
            }
            match iterate(s, table, rates, params) {
                Ok(rec) => rec.cycle().map(|c| c.to_vec()),
                Err(_) => None,
            }
        })
        .collect();

    let singular = table.singular_lines();
    let mut catalog = AttractorCatalog::default();
    for cycle in cycles {
        if catalog.match_cycle(&cycle, 1e-6).is_some() {
            continue;
        }
        let word: Word = cycle
            .iter()
            .filter_map(|&p| match table.locate(p, params.eps) {
                Location::Cone(i) => Some(i),
                _ => None,
            })
            .collect();
        let degenerate = word.len() != cycle.len()
            || cycle
                .iter()
                .any(|&p| singular.iter().any(|l| l.distance(p) <= params.eps));
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
    catalog
}

/// True when the two catalogs list the same orbits (equal period multisets,
/// each orbit matched pointwise within tol).
pub fn catalogs_agree(a: &AttractorCatalog, b: &AttractorCatalog, tol: f64) -> bool {
    a.orbits.len() == b.orbits.len()
        && a.periods() == b.periods()
        && a.orbits
            .iter()
            .all(|o| b.match_cycle(&o.points, tol).is_some())
}
