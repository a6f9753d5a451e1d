//! Planar vectors, poses and the elliptical field of view.
//!
//! All coordinates follow ISO 8855: `x` is longitudinal (forward positive),
//! `y` is lateral (left positive), headings are counter-clockwise from `+x`.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector pointing along `heading`.
    pub fn from_heading(heading: f64) -> Self {
        let (s, c) = heading.sin_cos();
        Self::new(c, s)
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Componentwise (Hadamard) product.
    pub fn hadamard(self, other: Vec2) -> Vec2 {
        Vec2::new(self.x * other.x, self.y * other.y)
    }

    /// Rotates counter-clockwise by `angle` radians.
    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Arithmetic mean of an iterator of points, `None` when empty.
    pub fn mean<I: IntoIterator<Item = Vec2>>(points: I) -> Option<Vec2> {
        let (sum, n) = points
            .into_iter()
            .fold((Vec2::ZERO, 0usize), |(s, n), p| (s + p, n + 1));
        (n > 0).then(|| sum / n as f64)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl SubAssign for Vec2 {
    fn sub_assign(&mut self, rhs: Vec2) {
        self.x -= rhs.x;
        self.y -= rhs.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, rhs: Vec2) -> Vec2 {
        rhs * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x / rhs, self.y / rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Vec2::new(x, y)
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn normalize_angle(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(TAU);
    if a > PI {
        a -= TAU;
    }
    a
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_to_tau(angle: f64) -> f64 {
    let a = angle.rem_euclid(TAU);
    if a >= TAU {
        0.0
    } else {
        a
    }
}

/// Four-quadrant heading of a velocity vector. The zero vector maps to 0.
pub fn heading_of(velocity: Vec2) -> f64 {
    if velocity.x == 0.0 && velocity.y == 0.0 {
        return 0.0;
    }
    normalize_angle(velocity.y.atan2(velocity.x))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec2,
    /// Radians in `(-π, π]`.
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            position: Vec2::new(x, y),
            heading: normalize_angle(heading),
        }
    }

    pub fn from_parts(position: Vec2, heading: f64) -> Self {
        Self {
            position,
            heading: normalize_angle(heading),
        }
    }

    /// Pose located at `position`, oriented along `velocity`.
    pub fn from_motion(position: Vec2, velocity: Vec2) -> Self {
        Self {
            position,
            heading: heading_of(velocity),
        }
    }

    /// Expresses a world point in this pose's local frame.
    pub fn to_local(&self, world: Vec2) -> Vec2 {
        (world - self.position).rotated(-self.heading)
    }

    /// Maps a point given in this pose's local frame back to the world.
    pub fn to_world(&self, local: Vec2) -> Vec2 {
        local.rotated(self.heading) + self.position
    }

    /// Expresses another world pose in this pose's local frame.
    pub fn pose_to_local(&self, world: Pose) -> Pose {
        Pose::from_parts(self.to_local(world.position), world.heading - self.heading)
    }
}

/// Rigid planar transform `p ↦ R(rotation)·p + translation`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidTransform {
    pub rotation: f64,
    pub translation: Vec2,
}

impl RigidTransform {
    pub const IDENTITY: RigidTransform = RigidTransform {
        rotation: 0.0,
        translation: Vec2::ZERO,
    };

    /// Transform that re-expresses coordinates of frame `from` in frame `to`,
    /// both frames given as world poses.
    pub fn between(from: Pose, to: Pose) -> Self {
        let rotation = from.heading - to.heading;
        let translation = (from.position - to.position).rotated(-to.heading);
        Self {
            rotation,
            translation,
        }
    }

    pub fn apply_point(&self, p: Vec2) -> Vec2 {
        p.rotated(self.rotation) + self.translation
    }

    pub fn apply_vector(&self, v: Vec2) -> Vec2 {
        v.rotated(self.rotation)
    }
}

/// Elliptical field of view; the long axis points along the observer heading.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FovEllipse {
    /// Longitudinal semi-axis in meters.
    pub semi_axis_long: f64,
    /// Lateral semi-axis in meters.
    pub semi_axis_lat: f64,
}

impl Default for FovEllipse {
    fn default() -> Self {
        Self {
            semi_axis_long: 30.0,
            semi_axis_lat: 4.0,
        }
    }
}

impl FovEllipse {
    pub fn new(semi_axis_long: f64, semi_axis_lat: f64) -> Result<Self> {
        let e = Self {
            semi_axis_long,
            semi_axis_lat,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = (self.semi_axis_long, self.semi_axis_lat);
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::invalid("fov.semi_axis_long", "semi-axis must be finite and positive"));
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::invalid("fov.semi_axis_lat", "semi-axis must be finite and positive"));
        }
        if a < b {
            return Err(Error::invalid(
                "fov.semi_axis_long",
                "longitudinal semi-axis must not be shorter than the lateral one",
            ));
        }
        Ok(())
    }

    /// Value of the quadratic form `dᵀ M⁻¹ d` for the offset `d` seen from an
    /// observer with the given heading.
    pub fn quadratic_form(&self, observer_heading: f64, offset: Vec2) -> f64 {
        let local = offset.rotated(-observer_heading);
        let u = local.x / self.semi_axis_long;
        let v = local.y / self.semi_axis_lat;
        u * u + v * v
    }
}

/// Closed-boundary membership test of `other_pos` in the observer's ellipse.
pub fn ellipse_contains(
    observer_pos: Vec2,
    observer_heading: f64,
    ellipse: &FovEllipse,
    other_pos: Vec2,
) -> bool {
    ellipse.quadratic_form(observer_heading, other_pos - observer_pos) <= 1.0
}
