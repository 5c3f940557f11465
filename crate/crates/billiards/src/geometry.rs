//! Planar primitives: points, half-lines, convex polygon tables and the
//! cone decomposition of the polygon exterior.
//!
//! The plane is identified with the complex numbers. A convex `k`-gon with
//! positively oriented (counterclockwise) vertices `w_0..w_{k-1}` splits its
//! exterior into `k` open cones `A_i`, one per vertex, separated by `k`
//! singular half-lines that extend the polygon sides. The cone `A_i` is the
//! set `{w_i + x (w_{i-1} - w_i) + y (w_i - w_{i+1}) : x, y > 0}`; the
//! singular half-line of side `w_i -> w_{i+1}` starts at `w_i` and points
//! away from `w_{i+1}` (right-tangency convention).
//!
//! `k = 2` is admitted as a degenerate table (the segment billiard); points
//! on the segment's own line beyond an endpoint are classified into the cone
//! of the *far* endpoint rather than as singular.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A point of the plane, identified with a complex number.
pub type Point = Complex64;

/// Cross product of two plane vectors (z-component).
#[inline]
pub fn cross(a: Point, b: Point) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Dot product of two plane vectors.
#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a.re * b.re + a.im * b.im
}

/// Sup norm on the plane, `max(|re|, |im|)`.
#[inline]
pub fn sup_norm(z: Point) -> f64 {
    z.re.abs().max(z.im.abs())
}

pub fn is_finite(z: Point) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("polygon needs at least 2 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("vertices {0} and {1} coincide")]
    CoincidentVertices(usize, usize),
    #[error("vertex cycle is not strictly convex and counterclockwise at index {0}")]
    NotConvexCcw(usize),
    #[error("non-finite coordinate in vertex {0}")]
    NonFinite(usize),
}

/// A half-line `{origin + t * direction : t > 0}` with unit direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfLine {
    pub origin: Point,
    pub direction: Point,
}

impl HalfLine {
    /// Builds a half-line from `origin` toward `through`, normalizing the direction.
    pub fn from_points(origin: Point, through: Point) -> Self {
        let d = through - origin;
        HalfLine {
            origin,
            direction: d / d.norm(),
        }
    }

    #[inline]
    pub fn point_at(&self, t: f64) -> Point {
        self.origin + self.direction * t
    }

    /// Euclidean distance from `z` to the closed half-line.
    pub fn distance(&self, z: Point) -> f64 {
        let t = dot(z - self.origin, self.direction);
        if t <= 0.0 {
            (z - self.origin).norm()
        } else {
            (z - self.point_at(t)).norm()
        }
    }

    /// Signed perpendicular offset of `z` from the supporting line.
    #[inline]
    pub fn offset(&self, z: Point) -> f64 {
        cross(self.direction, z - self.origin)
    }
}

/// Outcome of classifying a point against a polygon table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Location {
    /// Strictly inside the open cone with this vertex index.
    Cone(usize),
    /// Within `eps` of at least one singular half-line; `multiplicity` counts them.
    OnSingular { multiplicity: usize },
    /// Inside the closed polygon.
    InsidePolygon,
}

/// The open cone `A_i` attached to vertex `w_i`: the region between two
/// boundary rays from the apex.
#[derive(Debug, Clone)]
pub struct Cone {
    pub apex: Point,
    pub rays: [HalfLine; 2],
}

/// Convex polygon table: ordered vertex list, counterclockwise.
///
/// `k = 2` encodes the segment billiard.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>) -> Result<Self, GeometryError> {
        let k = vertices.len();
        if k < 2 {
            return Err(GeometryError::TooFewVertices(k));
        }
        for (i, &v) in vertices.iter().enumerate() {
            if !is_finite(v) {
                return Err(GeometryError::NonFinite(i));
            }
        }
        for i in 0..k {
            for j in (i + 1)..k {
                if (vertices[i] - vertices[j]).norm() == 0.0 {
                    return Err(GeometryError::CoincidentVertices(i, j));
                }
            }
        }
        if k >= 3 {
            for i in 0..k {
                let a = vertices[i];
                let b = vertices[(i + 1) % k];
                let c = vertices[(i + 2) % k];
                if cross(b - a, c - b) <= 0.0 {
                    return Err(GeometryError::NotConvexCcw(i));
                }
            }
        }
        Ok(Polygon { vertices })
    }

    /// The segment `[-a, a]` on the real axis as a two-vertex table.
    pub fn segment(half_length: f64) -> Self {
        Polygon {
            vertices: vec![Point::new(-half_length, 0.0), Point::new(half_length, 0.0)],
        }
    }

    /// Unit square with corners `0, -i, 1-i, 1` (counterclockwise).
    pub fn square() -> Self {
        Polygon {
            vertices: vec![
                Point::new(0.0, 0.0),
                Point::new(0.0, -1.0),
                Point::new(1.0, -1.0),
                Point::new(1.0, 0.0),
            ],
        }
    }

    /// Equilateral triangle of unit side with corners `0, -v, 1`,
    /// `v = exp(2 pi i / 3)`, listed counterclockwise.
    pub fn equilateral_triangle() -> Self {
        let v = Point::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        Polygon {
            vertices: vec![Point::new(0.0, 0.0), -v, Point::new(1.0, 0.0)],
        }
    }

    /// Regular `k`-gon centered at the origin, first vertex at angle 0.
    pub fn regular(k: usize, circumradius: f64) -> Result<Self, GeometryError> {
        if k < 3 {
            return Err(GeometryError::TooFewVertices(k));
        }
        let verts = (0..k)
            .map(|i| Point::from_polar(circumradius, 2.0 * std::f64::consts::PI * i as f64 / k as f64))
            .collect();
        Polygon::new(verts)
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.vertices.len()
    }

    #[inline]
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    #[inline]
    pub fn vertex(&self, i: usize) -> Point {
        self.vertices[i % self.k()]
    }

    /// Vertex average; the rotation center for regular tables.
    pub fn centroid(&self) -> Point {
        self.vertices.iter().sum::<Point>() / self.k() as f64
    }

    /// `b = max_i ||w_i||` in the sup norm.
    pub fn sup_norm(&self) -> f64 {
        self.vertices.iter().map(|&w| sup_norm(w)).fold(0.0, f64::max)
    }

    pub fn is_segment(&self) -> bool {
        self.k() == 2
    }

    /// True when all sides and circumradii agree within `tol`.
    pub fn is_regular(&self, tol: f64) -> bool {
        let k = self.k();
        if k < 3 {
            return false;
        }
        let c = self.centroid();
        let r0 = (self.vertices[0] - c).norm();
        let s0 = (self.vertices[1] - self.vertices[0]).norm();
        (0..k).all(|i| {
            let r = (self.vertices[i] - c).norm();
            let s = (self.vertex(i + 1) - self.vertices[i]).norm();
            (r - r0).abs() <= tol && (s - s0).abs() <= tol
        })
    }

    /// The singular set: one half-line per side, extending side
    /// `w_i -> w_{i+1}` beyond `w_i`, away from `w_{i+1}`.
    pub fn singular_lines(&self) -> Vec<HalfLine> {
        let k = self.k();
        (0..k)
            .map(|i| HalfLine::from_points(self.vertices[i], 2.0 * self.vertices[i] - self.vertex(i + 1)))
            .collect()
    }

    /// The open cone attached to vertex `i`.
    pub fn cone(&self, i: usize) -> Cone {
        let k = self.k();
        let w = self.vertices[i];
        let prev = self.vertices[(i + k - 1) % k];
        let next = self.vertex(i + 1);
        Cone {
            apex: w,
            rays: [
                HalfLine::from_points(w, prev),
                HalfLine::from_points(w, 2.0 * w - next),
            ],
        }
    }

    /// Spanning directions of cone `i`: `(w_{i-1} - w_i, w_i - w_{i+1})`.
    #[inline]
    pub fn cone_directions(&self, i: usize) -> (Point, Point) {
        let k = self.k();
        let w = self.vertices[i];
        (self.vertices[(i + k - 1) % k] - w, w - self.vertex(i + 1))
    }

    /// Coordinates `(x, y)` of `z` in cone `i`: `z = w_i + x d1 + y d2`.
    /// `z` lies in the open cone iff both are positive.
    pub fn cone_coordinates(&self, i: usize, z: Point) -> (f64, f64) {
        let (d1, d2) = self.cone_directions(i);
        let det = cross(d1, d2);
        let r = z - self.vertices[i];
        (cross(r, d2) / det, cross(d1, r) / det)
    }

    /// True when `z` lies in the closed polygon (within `eps` of it).
    pub fn contains(&self, z: Point, eps: f64) -> bool {
        let k = self.k();
        if k == 2 {
            let a = self.vertices[0];
            let b = self.vertices[1];
            let d = (b - a) / (b - a).norm();
            let t = dot(z - a, d);
            return cross(d, z - a).abs() <= eps && t >= -eps && t <= (b - a).norm() + eps;
        }
        (0..k).all(|i| {
            let a = self.vertices[i];
            let b = self.vertex(i + 1);
            let d = (b - a) / (b - a).norm();
            cross(d, z - a) >= -eps
        })
    }

    /// Classifies `z`: unique cone index, singular proximity (perpendicular
    /// distance to a singular half-line at most `eps`), or inside the table.
    ///
    /// Total on finite points.
    pub fn locate(&self, z: Point, eps: f64) -> Location {
        debug_assert!(is_finite(z));
        if self.is_segment() {
            return self.locate_segment(z, eps);
        }
        if self.contains(z, eps) {
            return Location::InsidePolygon;
        }
        let multiplicity = self
            .singular_lines()
            .iter()
            .filter(|l| l.distance(z) <= eps)
            .count();
        if multiplicity > 0 {
            return Location::OnSingular { multiplicity };
        }
        for i in 0..self.k() {
            let (x, y) = self.cone_coordinates(i, z);
            if x > 0.0 && y > 0.0 {
                return Location::Cone(i);
            }
        }
        // Unreachable for exact arithmetic; treat numeric corner cases as singular.
        Location::OnSingular { multiplicity: 1 }
    }

    /// Segment billiard classification: on-line exterior points map to the
    /// cone of the far endpoint; off-line points to the left-tangent endpoint.
    fn locate_segment(&self, z: Point, eps: f64) -> Location {
        let a = self.vertices[0];
        let b = self.vertices[1];
        let len = (b - a).norm();
        let d = (b - a) / len;
        let off = cross(d, z - a);
        if off.abs() <= eps {
            let t = dot(z - a, d);
            if t > len + eps {
                return Location::Cone(0); // beyond w_1: reflect about w_0
            }
            if t < -eps {
                return Location::Cone(1); // beyond w_0: reflect about w_1
            }
            return Location::InsidePolygon;
        }
        // Off the line: pick the endpoint with the other one strictly to the left.
        for (i, j) in [(0usize, 1usize), (1, 0)] {
            let wi = self.vertices[i];
            let wj = self.vertices[j];
            if cross(wi - z, wj - wi) > 0.0 {
                return Location::Cone(i);
            }
        }
        Location::OnSingular { multiplicity: 1 }
    }
}
