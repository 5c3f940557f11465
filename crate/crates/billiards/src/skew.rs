//! Rotation reduction for regular tables with equal rates.
//!
//! A regular k-gon commutes with the clockwise rotation `R` by `2 pi / k`
//! about its center, and `R(A_i) = A_{i-1}`. Quotienting by R gives a factor
//! map `f = pi . T` on the fundamental cone `A_0`, where `pi(z) = R^i(z)` for
//! `z` in `A_i`. On the branch domain `D_i = {z in A_0 : T(z) in A_i}` the
//! factor is the affine contraction `f(z) = (-lambda u^i) z + c + u^i((1 +
//! lambda) w_0 - c)` with `u = exp(-2 pi i / k)` and `c` the center. The
//! cocycle `sigma(z) = i` on `D_i` tracks the lost rotation; an f-cycle of
//! period m lifts to `gcd(k, sigma^m)` T-cycles of period `m k / gcd`.

use crate::billiard::{apply_branch, RateVector};
use crate::geometry::{sup_norm, Location, Point, Polygon};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SkewError {
    #[error("table is not a regular polygon within tolerance {0}")]
    NotRegular(f64),
    #[error("point is not in the fundamental cone")]
    OutsideFundamentalCone,
    #[error("point within eps of the branch boundary")]
    OnBranchBoundary,
}

/// One affine branch `z -> mult * z + offset` of the factor map, with its
/// cocycle value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub sigma: usize,
    pub mult: Point,
    pub offset: Point,
}

impl Branch {
    #[inline]
    pub fn apply(&self, z: Point) -> Point {
        self.mult * z + self.offset
    }
}

/// The reduced map on the fundamental cone `A_0`.
#[derive(Debug, Clone)]
pub struct ReducedMap {
    pub table: Polygon,
    pub lambda: f64,
    pub center: Point,
    /// `u = exp(-2 pi i / k)`: multiplier of the clockwise rotation R.
    pub rot: Point,
    /// Branches realized by the dynamics, indexed by discovery, sorted by sigma.
    pub branches: Vec<Branch>,
    /// The nominal count `floor(k/2) + 1`; for even k the empirical count may
    /// be smaller (the opposite-cone branch need not be realized).
    pub expected_branch_count: usize,
    eps: f64,
}

const REGULARITY_TOL: f64 = 1e-9;

/// Builds the factor map. Branch domains are discovered empirically: the
/// membership `z in D_i` is decided by `locate(T(z))`, not by precomputed
/// sector boundaries.
pub fn reduce(table: &Polygon, lambda: f64, eps: f64) -> Result<ReducedMap, SkewError> {
    if !table.is_regular(REGULARITY_TOL) {
        return Err(SkewError::NotRegular(REGULARITY_TOL));
    }
    let k = table.k();
    let center = table.centroid();
    let rot = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI / k as f64);
    let rates = RateVector::uniform(k, lambda).expect("lambda in (0,1)");

    // probe A_0 on a log grid of cone coordinates to find which image cones occur
    let (d1, d2) = table.cone_directions(0);
    let w0 = table.vertex(0);
    let mut seen = vec![false; k];
    let grid: Vec<f64> = (-14..=14).map(|e| 2f64.powi(e)).collect();
    for &x in &grid {
        for &y in &grid {
            let z = w0 + x * d1 + y * d2;
            if let Location::Cone(0) = table.locate(z, eps) {
                if let Location::Cone(i) = table.locate(apply_branch(z, table, &rates, 0), eps) {
                    seen[i] = true;
                }
            }
        }
    }
    let branches: Vec<Branch> = (0..k)
        .filter(|&i| seen[i])
        .map(|i| {
            let ui = rot.powu(i as u32);
            Branch {
                sigma: i,
                mult: -lambda * ui,
                offset: center + ui * ((1.0 + lambda) * w0 - center),
            }
        })
        .collect();
    Ok(ReducedMap {
        table: table.clone(),
        lambda,
        center,
        rot,
        branches,
        expected_branch_count: k / 2 + 1,
        eps,
    })
}

impl ReducedMap {
    pub fn k(&self) -> usize {
        self.table.k()
    }

    /// `pi(z) = R^i(z)` for `z in A_i`: rotates into the fundamental cone.
    pub fn project(&self, z: Point) -> Result<Point, SkewError> {
        match self.table.locate(z, self.eps) {
            Location::Cone(i) => {
                Ok(self.center + self.rot.powu(i as u32) * (z - self.center))
            }
            _ => Err(SkewError::OutsideFundamentalCone),
        }
    }

    /// One factor step: `z in A_0` maps to `(f(z), sigma(z))`. Branch
    /// membership by `locate . T`.
    pub fn apply(&self, z: Point) -> Result<(Point, usize), SkewError> {
        match self.table.locate(z, self.eps) {
            Location::Cone(0) => {}
            Location::Cone(_) => return Err(SkewError::OutsideFundamentalCone),
            _ => return Err(SkewError::OnBranchBoundary),
        }
        let rates = RateVector::uniform(self.k(), self.lambda).unwrap();
        let tz = apply_branch(z, &self.table, &rates, 0);
        let i = match self.table.locate(tz, self.eps) {
            Location::Cone(i) => i,
            _ => return Err(SkewError::OnBranchBoundary),
        };
        let branch = self
            .branches
            .iter()
            .find(|b| b.sigma == i)
            .copied()
            .unwrap_or_else(|| {
                // branch missed by the probe grid; synthesize it
                let ui = self.rot.powu(i as u32);
                Branch {
                    sigma: i,
                    mult: -self.lambda * ui,
                    offset: self.center + ui * ((1.0 + self.lambda) * self.table.vertex(0) - self.center),
                }
            });
        Ok((branch.apply(z), i))
    }
}

/// An f-cycle: `points[j+1] = f(points[j])` cyclically, with cocycle values.
#[derive(Debug, Clone)]
pub struct FCycle {
    pub points: Vec<Point>,
    pub sigmas: Vec<usize>,
}

impl FCycle {
    pub fn period(&self) -> usize {
        self.points.len()
    }

    /// Cocycle sum `sigma^m` mod k.
    pub fn sigma_sum(&self, k: usize) -> usize {
        self.sigmas.iter().sum::<usize>() % k
    }
}

/// gcd lifting: an f-cycle of period `m` with cocycle sum `sigma_m` lifts to
/// `gcd(k, sigma_m)` T-cycles, each of period `m k / gcd(k, sigma_m)`.
pub fn lift_periods(m: usize, sigma_m: usize, k: usize) -> (usize, usize) {
    let g = gcd(k, sigma_m);
    (g, m * k / g)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

/// Iterates the factor map from a seed in `A_0` until a cycle is detected
/// (pointwise match within `tol` over two periods with consistent cocycle)
/// or the budget runs out.
pub fn f_iterate(map: &ReducedMap, seed: Point, max_steps: usize, tol: f64) -> Option<FCycle> {
    let mut points = vec![seed];
    let mut sigmas: Vec<usize> = Vec::new();
    let mut z = seed;
    let mut anchor = seed;
    let mut power = 1usize;
    let mut since = 0usize;
    for _ in 0..max_steps {
        let (nz, s) = map.apply(z).ok()?;
        z = nz;
        points.push(z);
        sigmas.push(s);
        since += 1;
        if sup_norm(z - anchor) < tol {
            if let Some(p) = crate::billiard::confirm_cycle(&points, &sigmas, since, tol) {
                let len = points.len();
                return Some(FCycle {
                    points: points[len - 1 - p..len - 1].to_vec(),
                    sigmas: sigmas[len - 1 - p..].to_vec(),
                });
            }
        }
        if since == power {
            anchor = z;
            power *= 2;
            since = 0;
        }
    }
    None
}
