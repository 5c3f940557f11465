//! The dissipative outer billiard map `T(z) = -lambda_i z + (1 + lambda_i) w_i`
//! on the cone `A_i`, orbit iteration with cycle detection, the closed-form
//! iterate and periodic-point formulas, the forward-invariant ball, the
//! Fagnano orbit solver and rotation numbers.

use crate::geometry::{cross, dot, is_finite, sup_norm, Location, Point, Polygon};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BilliardError {
    #[error("contraction rate {0} outside (0, 1)")]
    RateOutOfRange(f64),
    #[error("rate vector length {0} does not match polygon order {1}")]
    RateLengthMismatch(usize, usize),
    #[error("point lies on the singular set ({multiplicity} half-lines)")]
    SingularHit { multiplicity: usize },
    #[error("point lies inside the polygon")]
    InsidePolygon,
    #[error("no solution: denominator of the periodic-point formula vanishes")]
    NoSolution,
    #[error("Fagnano system is singular")]
    Degenerate,
    #[error("orbit curve passes through the centroid; winding undefined")]
    UndefinedWinding,
    #[error("invariant ball undefined for rate norm {0} >= 1")]
    NoInvariantBall(f64),
}

/// Per-vertex contraction rates `lambda_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateVector {
    rates: Vec<f64>,
}

impl RateVector {
    /// Strictly dissipative rates: every `lambda_i` in (0, 1).
    pub fn new(rates: Vec<f64>) -> Result<Self, BilliardError> {
        for &r in &rates {
            if !(r > 0.0 && r < 1.0) || !r.is_finite() {
                return Err(BilliardError::RateOutOfRange(r));
            }
        }
        Ok(RateVector { rates })
    }

    pub fn uniform(k: usize, lambda: f64) -> Result<Self, BilliardError> {
        RateVector::new(vec![lambda; k])
    }

    /// The classical area-preserving billiard, `lambda_i = 1`. Not admitted
    /// by `new`; used by the Lyapunov harness where the conserved quantity
    /// is checked.
    pub fn classical(k: usize) -> Self {
        RateVector { rates: vec![1.0; k] }
    }

    #[inline]
    pub fn rate(&self, i: usize) -> f64 {
        self.rates[i]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// Sup norm `a = max_i lambda_i`.
    pub fn norm(&self) -> f64 {
        self.rates.iter().cloned().fold(0.0, f64::max)
    }

    pub fn check_len(&self, table: &Polygon) -> Result<(), BilliardError> {
        if self.len() != table.k() {
            return Err(BilliardError::RateLengthMismatch(self.len(), table.k()));
        }
        Ok(())
    }
}

/// Finite itinerary of cone indices.
pub type Word = Vec<usize>;

/// One step of the billiard map.
pub fn step(z: Point, table: &Polygon, rates: &RateVector, eps: f64) -> Result<Point, BilliardError> {
    match table.locate(z, eps) {
        Location::Cone(i) => Ok(apply_branch(z, table, rates, i)),
        Location::OnSingular { multiplicity } => Err(BilliardError::SingularHit { multiplicity }),
        Location::InsidePolygon => Err(BilliardError::InsidePolygon),
    }
}

/// The affine branch on cone `i`, without the membership check.
#[inline]
pub fn apply_branch(z: Point, table: &Polygon, rates: &RateVector, i: usize) -> Point {
    let l = rates.rate(i);
    -l * z + (1.0 + l) * table.vertex(i)
}

/// Closed-form `T^n(z)` evaluated from an itinerary:
/// `(-1)^n l_{i_1}..l_{i_n} z + sum_j (-1)^{n-j} (1 + l_{i_j}) l_{i_{j+1}}..l_{i_n} w_{i_j}`.
pub fn iterate_formula(z: Point, word: &[usize], table: &Polygon, rates: &RateVector) -> Point {
    let n = word.len();
    let mut sum = Point::new(0.0, 0.0);
    for (j, &ij) in word.iter().enumerate() {
        // trailing product l_{i_{j+1}} .. l_{i_n}
        let tail: f64 = word[j + 1..].iter().map(|&m| rates.rate(m)).product();
        let sign = if (n - 1 - j) % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (1.0 + rates.rate(ij)) * tail * table.vertex(ij);
    }
    let full: f64 = word.iter().map(|&m| rates.rate(m)).product();
    let zsign = if n % 2 == 0 { 1.0 } else { -1.0 };
    zsign * full * z + sum
}

/// The unique solution of `z = T^n(z)` with the given itinerary.
///
/// The candidate must still be validated against the word; the formula does
/// not know whether the itinerary is realizable.
pub fn periodic_point_from_word(
    word: &[usize],
    table: &Polygon,
    rates: &RateVector,
) -> Result<Point, BilliardError> {
    let n = word.len();
    let mut sum = Point::new(0.0, 0.0);
    for (j, &ij) in word.iter().enumerate() {
        let tail: f64 = word[j + 1..].iter().map(|&m| rates.rate(m)).product();
        let sign = if (n - 1 - j) % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (1.0 + rates.rate(ij)) * tail * table.vertex(ij);
    }
    let full: f64 = word.iter().map(|&m| rates.rate(m)).product();
    let denom = 1.0 + if n % 2 == 0 { -full } else { full };
    if denom.abs() < 1e-15 {
        return Err(BilliardError::NoSolution);
    }
    Ok(sum / denom)
}

/// True iff iterating from `z` realizes exactly `word`, every iterate strictly
/// inside an open cone with margin `eps` to the singular set.
pub fn validate_word(z: Point, word: &[usize], table: &Polygon, rates: &RateVector, eps: f64) -> bool {
    let mut w = z;
    for &expected in word {
        match table.locate(w, eps) {
            Location::Cone(i) if i == expected => w = apply_branch(w, table, rates, i),
            _ => return false,
        }
    }
    true
}

/// Forward-invariant sup-norm ball `K` of radius `b (1 + a) / (1 - a)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantBall {
    pub radius: f64,
}

impl InvariantBall {
    #[inline]
    pub fn contains(&self, z: Point) -> bool {
        sup_norm(z) <= self.radius
    }
}

pub fn invariant_ball(table: &Polygon, rates: &RateVector) -> Result<InvariantBall, BilliardError> {
    let a = rates.norm();
    if a >= 1.0 {
        return Err(BilliardError::NoInvariantBall(a));
    }
    let b = table.sup_norm();
    Ok(InvariantBall {
        radius: b * (1.0 + a) / ((1.0 - a) * (1.0 - a)),
    })
}

/// Why an orbit stopped.
#[derive(Debug, Clone, PartialEq)]
pub enum Terminal {
    /// Settled onto a periodic cycle; `cycle` holds one period, refined
    /// through the closed-form periodic point when the itinerary validates.
    Converged { period: usize, cycle: Vec<Point> },
    HitSingular { step: usize, multiplicity: usize },
    BudgetExhausted,
}

/// A recorded orbit: the seed, every visited point, the itinerary and the
/// terminal status.
#[derive(Debug, Clone)]
pub struct OrbitRecord {
    pub seed: Point,
    pub points: Vec<Point>,
    pub word: Word,
    pub terminal: Terminal,
}

impl OrbitRecord {
    pub fn cycle(&self) -> Option<&[Point]> {
        match &self.terminal {
            Terminal::Converged { cycle, .. } => Some(cycle),
            _ => None,
        }
    }
}

/// Iteration budgets and tolerances.
#[derive(Debug, Clone, Copy)]
pub struct IterateParams {
    pub max_steps: usize,
    pub eps: f64,
    /// Two consecutive candidate periods must match pointwise within this.
    pub cycle_tol: f64,
    pub period_cap: usize,
}

impl Default for IterateParams {
    fn default() -> Self {
        IterateParams {
            max_steps: 100_000,
            eps: 1e-9,
            cycle_tol: 1e-9,
            period_cap: 10_000,
        }
    }
}

/// Iterates the billiard map, recording the orbit. Halts on a singular hit,
/// on detected convergence to a periodic cycle (two full candidate periods
/// matching within `cycle_tol`, Brent-style anchor search), or at the budget.
pub fn iterate(seed: Point, table: &Polygon, rates: &RateVector, params: &IterateParams) -> Result<OrbitRecord, BilliardError> {
    if !is_finite(seed) {
        return Err(BilliardError::NoSolution);
    }
    if let Location::InsidePolygon = table.locate(seed, params.eps) {
        return Err(BilliardError::InsidePolygon);
    }
    let mut points = vec![seed];
    let mut word: Word = Vec::new();
    let mut z = seed;
    let mut anchor = seed;
    let mut power = 1usize;
    let mut since_anchor = 0usize;

    for n in 0..params.max_steps {
        let i = match table.locate(z, params.eps) {
            Location::Cone(i) => i,
            Location::OnSingular { multiplicity } => {
                return Ok(OrbitRecord {
                    seed,
                    points,
                    word,
                    terminal: Terminal::HitSingular { step: n, multiplicity },
                })
            }
            Location::InsidePolygon => {
                // cannot happen: T maps the exterior to itself
                return Err(BilliardError::InsidePolygon);
            }
        };
        z = apply_branch(z, table, rates, i);
        points.push(z);
        word.push(i);
        since_anchor += 1;

        if sup_norm(z - anchor) < params.cycle_tol && since_anchor <= params.period_cap {
            if let Some(period) = confirm_cycle(&points, &word, since_anchor, params.cycle_tol) {
                let cycle = extract_cycle(&points, &word, period, table, rates, params.eps);
                return Ok(OrbitRecord {
                    seed,
                    points,
                    word,
                    terminal: Terminal::Converged {
                        period: cycle.len(),
                        cycle,
                    },
                });
            }
        }
        if since_anchor == power {
            anchor = z;
            power = (power * 2).min(params.period_cap.max(1));
            since_anchor = 0;
        }
    }
    Ok(OrbitRecord {
        seed,
        points,
        word,
        terminal: Terminal::BudgetExhausted,
    })
}

/// Checks the last `2p` recorded points for a lag-`p` match (points and
/// itinerary), then reduces `p` to the minimal period.
pub(crate) fn confirm_cycle(points: &[Point], word: &[usize], p: usize, tol: f64) -> Option<usize> {
    let len = points.len();
    if p == 0 || len < 2 * p + 1 {
        return None;
    }
    for j in 0..p {
        if sup_norm(points[len - 1 - j] - points[len - 1 - j - p]) >= tol {
            return None;
        }
        if word[len - 2 - j] != word[len - 2 - j - p] {
            return None;
        }
    }
    // minimal period: smallest divisor d of p that also matches
    let mut period = p;
    for d in 1..p {
        if p % d != 0 {
            continue;
        }
        if (0..p).all(|j| sup_norm(points[len - 1 - j] - points[len - 1 - j - d]) < tol) {
            period = d;
            break;
        }
    }
    Some(period)
}

/// One period of the limit cycle, refined through the closed-form periodic
/// point when the repeating word validates.
fn extract_cycle(
    points: &[Point],
    word: &[usize],
    period: usize,
    table: &Polygon,
    rates: &RateVector,
    eps: f64,
) -> Vec<Point> {
    let len = points.len();
    let raw: Vec<Point> = points[len - period..].to_vec();
    let cyc_word: Word = word[len - 1 - period..].to_vec();
    debug_assert_eq!(cyc_word.len(), period);
    if let Ok(z0) = periodic_point_from_word(&cyc_word, table, rates) {
        if validate_word(z0, &cyc_word, table, rates, eps) && sup_norm(z0 - raw[period - 1]) < 1e-6 {
            let mut refined = Vec::with_capacity(period);
            let mut z = z0;
            for &i in &cyc_word {
                refined.push(z);
                z = apply_branch(z, table, rates, i);
            }
            return reduce_cycle(refined);
        }
    }
    reduce_cycle(raw)
}

/// Reduces a cycle to its minimal period. Needed because near a period-d
/// orbit the lag-p residual `(1 - (-l)^p) e_n` can cross the detection
/// tolerance before the lag-d residual does (p a multiple of d), so the
/// detector may report a non-minimal period; after refinement the duplicate
/// points agree far below the tolerance and the reduction is unambiguous.
fn reduce_cycle(cycle: Vec<Point>) -> Vec<Point> {
    let p = cycle.len();
    for d in 1..p {
        if p % d != 0 {
            continue;
        }
        if (0..p).all(|j| sup_norm(cycle[j] - cycle[(j + d) % p]) < 1e-9) {
            return cycle[..d].to_vec();
        }
    }
    cycle
}

/// Fagnano orbit: the period-`k` orbit visiting every vertex in cyclic order.
#[derive(Debug, Clone)]
pub struct FagnanoOrbit {
    /// Orbit points `v_0..v_{k-1}` with `v_{i+1} = T(v_i)`.
    pub points: Vec<Point>,
    /// True when every `v_i` actually lies in the open cone `A_i`.
    pub realized: bool,
}

/// Solves the cyclic linear system `w_i = (l_i/(1+l_i)) v_i + (1/(1+l_i)) v_{i+1}`
/// by forward substitution. Singular only if `l_1 .. l_k = (-1)^k`, which
/// cannot occur for rates in (0, 1).
pub fn fagnano_solve(table: &Polygon, rates: &RateVector, eps: f64) -> Result<FagnanoOrbit, BilliardError> {
    rates.check_len(table)?;
    let k = table.k();
    // v_i = c_i v_0 + d_i
    let mut c = 1.0f64;
    let mut d = Point::new(0.0, 0.0);
    let mut coeffs = Vec::with_capacity(k);
    for i in 0..k {
        coeffs.push((c, d));
        let l = rates.rate(i);
        d = -l * d + (1.0 + l) * table.vertex(i);
        c = -l * c;
    }
    let denom = 1.0 - c;
    if denom.abs() < 1e-14 {
        return Err(BilliardError::Degenerate);
    }
    let v0 = d / denom;
    let points: Vec<Point> = coeffs.iter().map(|&(c, d)| c * v0 + d).collect();
    let word: Word = (0..k).collect();
    let realized = validate_word(points[0], &word, table, rates, eps);
    Ok(FagnanoOrbit { points, realized })
}

/// Winding number of the closed polygonal curve through `points` around the
/// polygon centroid, divided by `k`. Returned as `(winding, k)`.
pub fn rotation_number(points: &[Point], table: &Polygon) -> Result<(i64, usize), BilliardError> {
    let c = table.centroid();
    let n = points.len();
    if n == 0 {
        return Err(BilliardError::UndefinedWinding);
    }
    let mut total = 0.0f64;
    for j in 0..n {
        let a = points[j] - c;
        let b = points[(j + 1) % n] - c;
        if a.norm() < 1e-12 || b.norm() < 1e-12 {
            return Err(BilliardError::UndefinedWinding);
        }
        // segment through the centroid?
        if cross(a, b).abs() < 1e-12 && dot(a, b) < 0.0 {
            return Err(BilliardError::UndefinedWinding);
        }
        total += cross(a, b).atan2(dot(a, b));
    }
    let winding = (total / (2.0 * std::f64::consts::PI)).round() as i64;
    Ok((winding.abs(), table.k()))
}

/// One-step cone reachability: `reach[i][j]` iff `T(A_i)` meets `A_j`.
///
/// `T(A_i)` is the cone with apex `w_i` spanned by the negated directions of
/// `A_i`; reachability is probed on a log-spaced grid of cone coordinates.
pub fn cone_reachability(table: &Polygon, rates: &RateVector, eps: f64) -> Vec<Vec<bool>> {
    let k = table.k();
    let mut reach = vec![vec![false; k]; k];
    let grid: Vec<f64> = (-12..=12).map(|e| 2f64.powi(e)).collect();
    for i in 0..k {
        let (d1, d2) = table.cone_directions(i);
        let w = table.vertex(i);
        for &x in &grid {
            for &y in &grid {
                let z = w + x * d1 + y * d2;
                if let Location::Cone(ci) = table.locate(z, eps) {
                    debug_assert_eq!(ci, i);
                    if let Location::Cone(j) = table.locate(apply_branch(z, table, rates, i), eps) {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    reach
}

/// A periodic orbit found by itinerary enumeration.
#[derive(Debug, Clone)]
pub struct EnumeratedOrbit {
    pub word: Word,
    pub points: Vec<Point>,
    /// Within `eps` of a singular half-line: excluded from the regular catalog.
    pub degenerate: bool,
}

/// Enumerates validated periodic orbits of period at most `max_len` by word
/// search with reachability pruning, one representative per cyclic class.
pub fn enumerate_periodic_orbits(
    table: &Polygon,
    rates: &RateVector,
    max_len: usize,
    eps: f64,
) -> Vec<EnumeratedOrbit> {
    let reach = cone_reachability(table, rates, eps);
    let singular = table.singular_lines();
    let mut found: Vec<EnumeratedOrbit> = Vec::new();
    let mut word: Word = Vec::new();

    fn is_canonical_rotation(word: &[usize]) -> bool {
        let n = word.len();
        (1..n).all(|s| {
            let rotated = (0..n).map(|j| word[(j + s) % n]);
            word.iter().cloned().cmp(rotated) != std::cmp::Ordering::Greater
        })
    }

    fn dfs(
        word: &mut Word,
        len: usize,
        table: &Polygon,
        rates: &RateVector,
        reach: &[Vec<bool>],
        singular: &[crate::geometry::HalfLine],
        eps: f64,
        found: &mut Vec<EnumeratedOrbit>,
    ) {
        if word.len() == len {
            if !reach[word[len - 1]][word[0]] || !is_canonical_rotation(word) {
                return;
            }
            if let Ok(z) = periodic_point_from_word(word, table, rates) {
                if validate_word(z, word, table, rates, eps) {
                    let mut points = Vec::with_capacity(len);
                    let mut p = z;
                    for &i in word.iter() {
                        points.push(p);
                        p = apply_branch(p, table, rates, i);
                    }
                    // skip non-primitive words: orbit already found at a shorter period
                    let primitive = (1..len)
                        .filter(|d| len % d == 0)
                        .all(|d| (0..len).any(|j| word[j] != word[(j + d) % len]));
                    if primitive {
                        let degenerate = points
                            .iter()
                            .any(|&q| singular.iter().any(|l| l.distance(q) <= eps));
                        found.push(EnumeratedOrbit {
                            word: word.clone(),
                            points,
                            degenerate,
                        });
                    }
                }
            }
            return;
        }
        let k = table.k();
        for next in 0..k {
            if word.is_empty() || reach[*word.last().unwrap()][next] {
                word.push(next);
                dfs(word, len, table, rates, reach, singular, eps, found);
                word.pop();
            }
        }
    }

    for len in 1..=max_len {
        dfs(&mut word, len, table, rates, &reach, &singular, eps, &mut found);
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const EPS: f64 = 1e-9;

    fn square_half() -> (Polygon, RateVector) {
        let p = Polygon::square();
        let r = RateVector::uniform(4, 0.5).unwrap();
        (p, r)
    }

    #[test]
    fn step_on_square_matches_formula() {
        let (p, r) = square_half();
        let z = Point::new(1.0, 1.0);
        let out = step(z, &p, &r, EPS).unwrap();
        assert!(sup_norm(out - Point::new(-0.5, -0.5)) < 1e-15);
    }

    #[test]
    fn step_reports_singular_and_inside() {
        let (p, r) = square_half();
        assert_eq!(
            step(Point::new(2.0, 0.0), &p, &r, EPS),
            Err(BilliardError::SingularHit { multiplicity: 1 })
        );
        assert_eq!(
            step(Point::new(0.5, -0.5), &p, &r, EPS),
            Err(BilliardError::InsidePolygon)
        );
    }

    #[test]
    fn segment_step_and_two_cycle() {
        let p = Polygon::segment(1.0);
        let r = RateVector::uniform(2, 0.5).unwrap();
        // x = 2 in X_+: reflect about the farther endpoint -1
        let out = step(Point::new(2.0, 0.0), &p, &r, EPS).unwrap();
        assert!((out.re - -2.5).abs() < 1e-15 && out.im == 0.0);

        let rec = iterate(Point::new(10.0, 0.0), &p, &r, &IterateParams::default()).unwrap();
        let cycle = rec.cycle().expect("converged");
        assert_eq!(cycle.len(), 2);
        let mut xs: Vec<f64> = cycle.iter().map(|z| z.re).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((xs[0] - -3.0).abs() < 1e-9 && (xs[1] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn segment_periodic_point_formula() {
        let p = Polygon::segment(1.0);
        let r = RateVector::uniform(2, 0.5).unwrap();
        let z = periodic_point_from_word(&[0, 1], &p, &r).unwrap();
        assert!((z.re - 3.0).abs() < 1e-12);
    }

    #[test]
    fn iterate_formula_matches_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for p in [Polygon::square(), Polygon::equilateral_triangle(), Polygon::regular(5, 1.0).unwrap()] {
            let r = RateVector::uniform(p.k(), 0.7).unwrap();
            let mut checked = 0;
            while checked < 100 {
                let seed = Point::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
                if !matches!(p.locate(seed, EPS), Location::Cone(_)) {
                    continue;
                }
                let params = IterateParams {
                    max_steps: 50,
                    cycle_tol: 0.0, // disable convergence halt; we want all 50 steps
                    ..IterateParams::default()
                };
                let rec = iterate(seed, &p, &r, &params).unwrap();
                if rec.word.len() < 50 {
                    continue; // singular hit; resample
                }
                let closed = iterate_formula(seed, &rec.word, &p, &r);
                assert!(sup_norm(closed - *rec.points.last().unwrap()) < 1e-12);
                checked += 1;
            }
        }
    }

    #[test]
    fn invariant_ball_radius_and_invariance() {
        let (p, r) = square_half();
        let ball = invariant_ball(&p, &r).unwrap();
        assert!((ball.radius - 6.0).abs() < 1e-15); // b=1, a=0.5 -> 1*1.5/0.25
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let z = Point::new(
                rng.gen_range(-ball.radius..ball.radius),
                rng.gen_range(-ball.radius..ball.radius),
            );
            if let Ok(out) = step(z, &p, &r, EPS) {
                assert!(ball.contains(out));
            }
        }
        // radius scales as (1-a)^{-2}
        let r9 = RateVector::uniform(4, 0.9).unwrap();
        let b9 = invariant_ball(&p, &r9).unwrap();
        assert!((b9.radius - 1.9 / 0.01).abs() < 1e-9);
    }

    #[test]
    fn fagnano_square_is_global_attractor_at_small_rate() {
        let p = Polygon::square();
        let r = RateVector::uniform(4, 0.1).unwrap();
        let orbit = fagnano_solve(&p, &r, EPS).unwrap();
        assert!(orbit.realized);
        assert_eq!(orbit.points.len(), 4);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ball = invariant_ball(&p, &r).unwrap();
        let mut tested = 0;
        while tested < 20 {
            let z = Point::new(
                rng.gen_range(-ball.radius..ball.radius),
                rng.gen_range(-ball.radius..ball.radius),
            );
            if !matches!(p.locate(z, EPS), Location::Cone(_)) {
                continue;
            }
            let rec = iterate(z, &p, &r, &IterateParams::default()).unwrap();
            let Some(cycle) = rec.cycle() else { continue };
            assert_eq!(cycle.len(), 4);
            for q in cycle {
                let d = orbit
                    .points
                    .iter()
                    .map(|v| sup_norm(*q - *v))
                    .fold(f64::INFINITY, f64::min);
                assert!(d < 1e-9);
            }
            tested += 1;
        }
    }

    #[test]
    fn fagnano_triangle_rotation_number() {
        let p = Polygon::equilateral_triangle();
        let r = RateVector::uniform(3, 0.1).unwrap();
        let orbit = fagnano_solve(&p, &r, EPS).unwrap();
        assert!(orbit.realized);
        assert_eq!(rotation_number(&orbit.points, &p).unwrap(), (1, 3));
    }

    #[test]
    fn word_with_vertex_candidate_is_rejected() {
        let (p, r) = square_half();
        // n = 1: formula collapses to the vertex, which is not in any open cone
        let z = periodic_point_from_word(&[0], &p, &r).unwrap();
        assert!(sup_norm(z - p.vertex(0)) < 1e-12);
        assert!(!validate_word(z, &[0], &p, &r, EPS));
        // 0 cannot follow 0 on the square: T(A_0) misses A_0
        assert!(!validate_word(Point::new(1.0, 1.0), &[0, 0], &p, &r, EPS));
    }

    #[test]
    fn periodic_count_bounded_by_words() {
        for (p, lam) in [
            (Polygon::equilateral_triangle(), 0.6),
            (Polygon::square(), 0.6),
        ] {
            let r = RateVector::uniform(p.k(), lam).unwrap();
            let orbits = enumerate_periodic_orbits(&p, &r, 6, EPS);
            let total_points: usize = orbits.iter().map(|o| o.points.len()).sum();
            let bound: usize = (1..=6).map(|n| p.k().pow(n as u32)).sum();
            assert!(total_points <= bound);
            // every enumerated orbit closes up under iteration
            for o in &orbits {
                let back = iterate_formula(o.points[0], &o.word, &p, &r);
                assert!(sup_norm(back - o.points[0]) < 1e-10);
            }
        }
    }

    #[test]
    fn rate_vector_validation() {
        assert!(RateVector::new(vec![0.5, 1.2]).is_err());
        assert!(RateVector::new(vec![0.0]).is_err());
        assert!(RateVector::new(vec![1.0]).is_err());
        assert!(RateVector::uniform(4, 0.99).is_ok());
    }
}
