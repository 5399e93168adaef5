//! Convex polygons in the plane.

use serde::{Deserialize, Serialize};

pub type Point = [f64; 2];

/// Axis-aligned bounding box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bbox {
    pub min: Point,
    pub max: Point,
}

impl Bbox {
    pub const EMPTY: Bbox = Bbox {
        min: [f64::INFINITY; 2],
        max: [f64::NEG_INFINITY; 2],
    };

    pub fn square(center: Point, half: f64) -> Bbox {
        Bbox {
            min: [center[0] - half, center[1] - half],
            max: [center[0] + half, center[1] + half],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.min[0] > self.max[0] || self.min[1] > self.max[1]
    }

    pub fn union(&self, other: &Bbox) -> Bbox {
        Bbox {
            min: [self.min[0].min(other.min[0]), self.min[1].min(other.min[1])],
            max: [self.max[0].max(other.max[0]), self.max[1].max(other.max[1])],
        }
    }

    pub fn expand(&self, by: f64) -> Bbox {
        Bbox {
            min: [self.min[0] - by, self.min[1] - by],
            max: [self.max[0] + by, self.max[1] + by],
        }
    }

    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }

    pub fn area(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.width() * self.height()
        }
    }

    pub fn center(&self) -> Point {
        [
            0.5 * (self.min[0] + self.max[0]),
            0.5 * (self.min[1] + self.max[1]),
        ]
    }

    pub fn contains_box(&self, other: &Bbox, tol: f64) -> bool {
        other.min[0] >= self.min[0] - tol
            && other.min[1] >= self.min[1] - tol
            && other.max[0] <= self.max[0] + tol
            && other.max[1] <= self.max[1] + tol
    }

    pub fn overlaps(&self, other: &Bbox, tol: f64) -> bool {
        self.min[0] <= other.max[0] + tol
            && other.min[0] <= self.max[0] + tol
            && self.min[1] <= other.max[1] + tol
            && other.min[1] <= self.max[1] + tol
    }
}

/// Convex polygon with counter-clockwise or clockwise vertex order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polygon {
    pub vertices: Vec<Point>,
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn dist2(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    if len2 == 0.0 {
        return dist2(p, a).sqrt();
    }
    let t = (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0);
    dist2(p, [a[0] + t * ab[0], a[1] + t * ab[1]]).sqrt()
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

fn segment_distance(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segments_cross(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

impl Polygon {
    pub fn new(vertices: Vec<Point>) -> Self {
        Polygon { vertices }
    }

    /// Parallelogram `origin + s u + t v`, `s, t in [0, 1]`.
    pub fn parallelogram(origin: Point, u: Point, v: Point) -> Self {
        let [ox, oy] = origin;
        Polygon::new(vec![
            [ox, oy],
            [ox + u[0], oy + u[1]],
            [ox + u[0] + v[0], oy + u[1] + v[1]],
            [ox + v[0], oy + v[1]],
        ])
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn signed_area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| a[0] * b[1] - b[0] * a[1]).sum::<f64>()
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn centroid(&self) -> Point {
        let n = self.vertices.len() as f64;
        let sx: f64 = self.vertices.iter().map(|v| v[0]).sum();
        let sy: f64 = self.vertices.iter().map(|v| v[1]).sum();
        [sx / n, sy / n]
    }

    pub fn bbox(&self) -> Bbox {
        self.vertices.iter().fold(Bbox::EMPTY, |b, v| Bbox {
            min: [b.min[0].min(v[0]), b.min[1].min(v[1])],
            max: [b.max[0].max(v[0]), b.max[1].max(v[1])],
        })
    }

    pub fn diameter(&self) -> f64 {
        let mut best: f64 = 0.0;
        for a in &self.vertices {
            for b in &self.vertices {
                best = best.max(dist2(*a, *b));
            }
        }
        best.sqrt()
    }

    /// Closed containment for convex polygons.
    pub fn contains(&self, p: Point) -> bool {
        let orientation = self.signed_area().signum();
        self.edges().all(|(a, b)| cross(a, b, p) * orientation >= -1e-12)
    }

    /// Euclidean distance between the closed polygons (0 when they meet).
    pub fn distance(&self, other: &Polygon) -> f64 {
        if self.vertices.iter().any(|&p| other.contains(p)) || other.vertices.iter().any(|&p| self.contains(p)) {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for (a, b) in self.edges() {
            for (c, d) in other.edges() {
                best = best.min(segment_distance(a, b, c, d));
                if best == 0.0 {
                    return 0.0;
                }
            }
        }
        best
    }

    /// Intersection with an axis-aligned box (Sutherland-Hodgman).
    pub fn clip(&self, bbox: &Bbox) -> Polygon {
        let mut pts = self.vertices.clone();
        // keep points with sign * (coord - bound) <= 0
        let planes = [
            (0, bbox.min[0], -1.0),
            (0, bbox.max[0], 1.0),
            (1, bbox.min[1], -1.0),
            (1, bbox.max[1], 1.0),
        ];
        for (axis, bound, sign) in planes {
            if pts.is_empty() {
                break;
            }
            let inside = |p: &Point| sign * (p[axis] - bound) <= 0.0;
            let mut out = Vec::with_capacity(pts.len() + 2);
            for i in 0..pts.len() {
                let cur = pts[i];
                let prev = pts[(i + pts.len() - 1) % pts.len()];
                let (cin, pin) = (inside(&cur), inside(&prev));
                if cin != pin {
                    let t = (bound - prev[axis]) / (cur[axis] - prev[axis]);
                    out.push([prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])]);
                }
                if cin {
                    out.push(cur);
                }
            }
            pts = out;
        }
        Polygon::new(pts)
    }

    pub fn translated(&self, by: Point) -> Polygon {
        Polygon::new(self.vertices.iter().map(|v| [v[0] + by[0], v[1] + by[1]]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Polygon {
        Polygon::parallelogram([0.0, 0.0], [1.0, 0.0], [0.0, 1.0])
    }

    #[test]
    fn areas() {
        assert_eq!(unit().area(), 1.0);
        let skew = Polygon::parallelogram([3.0, 1.0], [2.0, 1.0], [-1.0, 3.0]);
        assert!((skew.area() - 7.0).abs() < 1e-12);
    }

    #[test]
    fn distances() {
        let a = unit();
        assert_eq!(a.distance(&a.translated([1.0, 0.0])), 0.0);
        assert_eq!(a.distance(&a.translated([1.0, 1.0])), 0.0);
        assert!((a.distance(&a.translated([3.0, 0.0])) - 2.0).abs() < 1e-12);
        assert!((a.distance(&a.translated([2.0, 2.0])) - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(a.distance(&a.translated([0.5, 0.5])), 0.0);
    }

    #[test]
    fn clipping() {
        let a = Polygon::parallelogram([0.0, 0.0], [2.0, 0.0], [0.0, 2.0]);
        let clipped = a.clip(&Bbox::square([2.0, 2.0], 1.0));
        assert!((clipped.area() - 1.0).abs() < 1e-12);
        assert_eq!(a.clip(&Bbox::square([10.0, 10.0], 1.0)).area(), 0.0);
    }

    #[test]
    fn bbox_ops() {
        let b = unit().bbox();
        assert_eq!(b, Bbox { min: [0.0, 0.0], max: [1.0, 1.0] });
        assert!(b.expand(1.0).contains_box(&b, 0.0));
        assert!(!b.contains_box(&b.expand(0.1), 0.0));
        assert_eq!(Bbox::EMPTY.area(), 0.0);
    }
}
