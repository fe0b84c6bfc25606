//! Points and axis-aligned boxes.

#[allow(unused_imports)]
use num_traits::Float;
use core::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Point3) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Linear interpolation; `t = 0` gives `self`, `t = 1` gives `other`.
    pub fn lerp(self, other: Point3, t: f64) -> Point3 {
        self + (other - self) * t
    }

    pub fn component(self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }

    /// Componentwise `self <= other`.
    pub fn le(self, other: Point3) -> bool {
        self.x <= other.x && self.y <= other.y && self.z <= other.z
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, rhs: Point3) -> Point3 {
        Point3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, rhs: Point3) -> Point3 {
        Point3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, k: f64) -> Point3 {
        Point3::new(self.x * k, self.y * k, self.z * k)
    }
}

/// Closed axis-aligned box `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub const fn new(min: Point3, max: Point3) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, p: Point3) -> bool {
        self.min.le(p) && p.le(self.max)
    }

    pub fn center(&self) -> Point3 {
        self.min.lerp(self.max, 0.5)
    }

    /// Slab test for the closed segment `[a, b]`.
    ///
    /// Touching a face or an edge counts as an intersection, and so does a
    /// segment with either endpoint inside the box.
    pub fn intersects_segment(&self, a: Point3, b: Point3) -> bool {
        let mut t_enter = 0.0_f64;
        let mut t_exit = 1.0_f64;
        for axis in 0..3 {
            let origin = a.component(axis);
            let delta = b.component(axis) - origin;
            let lo = self.min.component(axis);
            let hi = self.max.component(axis);
            if delta.abs() < 1e-15 {
                if origin < lo || origin > hi {
                    return false;
                }
                continue;
            }
            let inv = 1.0 / delta;
            let mut t0 = (lo - origin) * inv;
            let mut t1 = (hi - origin) * inv;
            if t0 > t1 {
                core::mem::swap(&mut t0, &mut t1);
            }
            t_enter = t_enter.max(t0);
            t_exit = t_exit.min(t1);
            if t_enter > t_exit {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box() -> Aabb {
        Aabb::new(Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 1.0, 1.0))
    }

    #[test]
    fn segment_through_box() {
        let b = unit_box();
        assert!(b.intersects_segment(Point3::new(-1.0, 0.5, 0.5), Point3::new(2.0, 0.5, 0.5)));
        assert!(!b.intersects_segment(Point3::new(-1.0, 1.5, 0.5), Point3::new(2.0, 1.5, 0.5)));
    }

    #[test]
    fn touching_face_counts() {
        let b = unit_box();
        // Grazes the top face along its length.
        assert!(b.intersects_segment(Point3::new(-1.0, 0.5, 1.0), Point3::new(2.0, 0.5, 1.0)));
        // Ends exactly on the x = 0 face.
        assert!(b.intersects_segment(Point3::new(-1.0, 0.5, 0.5), Point3::new(0.0, 0.5, 0.5)));
    }

    #[test]
    fn segment_stopping_short() {
        let b = unit_box();
        assert!(!b.intersects_segment(Point3::new(-2.0, 0.5, 0.5), Point3::new(-0.1, 0.5, 0.5)));
    }

    #[test]
    fn endpoint_inside() {
        let b = unit_box();
        assert!(b.intersects_segment(Point3::new(0.5, 0.5, 0.5), Point3::new(5.0, 5.0, 5.0)));
    }

    #[test]
    fn diagonal_miss_near_corner() {
        let b = unit_box();
        assert!(!b.intersects_segment(Point3::new(1.2, -0.5, 0.5), Point3::new(2.5, 0.8, 0.5)));
    }
}
