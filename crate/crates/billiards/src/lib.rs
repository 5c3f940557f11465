//! Dissipative outer billiards on convex polygons: the contracting map
//! `T(z) = -lambda_i z + (1 + lambda_i) w_i` on the exterior cones, its
//! first-return analysis on the triangle and square, bifurcation thresholds,
//! singular-set stabilization and basin rendering.

pub mod basin;
pub mod bifurcation;
pub mod config;
pub mod billiard;
pub mod geometry;
pub mod return_map;
pub mod singular;
pub mod skew;

pub use billiard::{
    fagnano_solve, invariant_ball, iterate, iterate_formula, periodic_point_from_word,
    rotation_number, step, validate_word, BilliardError, InvariantBall, IterateParams,
    OrbitRecord, RateVector, Terminal, Word,
};
pub use geometry::{GeometryError, HalfLine, Location, Point, Polygon};
