//! Vector and ray primitives, plus the analytic fold of a ray bouncing
//! between the parallel walls of one strip-mirror channel.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use crate::{Error, Result};

/// Tolerance on `|d| - 1` accepted for a unit direction.
pub const UNIT_TOLERANCE: f64 = 1e-12;

/// Smallest ray parameter counted as a forward hit.
pub const HIT_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Unit vector in the same direction, or `None` for zero or non-finite input.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self / n)
        } else {
            None
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn is_unit(self) -> bool {
        (self.norm() - 1.0).abs() <= UNIT_TOLERANCE
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl std::fmt::Display for Vec3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// A half-line with a unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    pub dir: Vec3,
}

impl Ray {
    /// Builds a ray, normalizing `dir`. Fails on a zero or non-finite direction.
    pub fn new(origin: Vec3, dir: Vec3) -> Result<Ray> {
        if !origin.is_finite() {
            return Err(Error::precondition("ray origin must be finite"));
        }
        let dir = dir
            .normalized()
            .ok_or_else(|| Error::precondition("ray direction must be finite and non-zero"))?;
        Ok(Ray { origin, dir })
    }

    /// Builds a ray from a direction that is already unit length.
    /// The caller guarantees the invariant; checked in debug builds.
    #[inline]
    pub(crate) fn from_unit(origin: Vec3, dir: Vec3) -> Ray {
        debug_assert!(dir.is_unit(), "non-unit ray direction {dir}");
        Ray { origin, dir }
    }

    #[inline]
    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.dir * t
    }

    /// Distance between `p` and the closest point of the full line carrying this ray.
    pub fn line_distance(&self, p: Vec3) -> f64 {
        let w = p - self.origin;
        (w - self.dir * w.dot(self.dir)).norm()
    }
}

/// Mirror reflection of `dir` about a plane with unit `normal`.
pub fn reflect(dir: Vec3, normal: Vec3) -> Result<Vec3> {
    if !dir.is_unit() || !normal.is_unit() {
        return Err(Error::precondition("reflect expects unit-norm inputs"));
    }
    Ok(dir - normal * (2.0 * dir.dot(normal)))
}

/// First forward intersection of `ray` with a plane, as `(t, point)`.
///
/// Returns `None` when the ray is parallel to the plane or the plane lies behind
/// the origin (`t <= 1e-12`).
pub fn intersect_plane(ray: &Ray, plane_point: Vec3, plane_normal: Vec3) -> Option<(f64, Vec3)> {
    let denom = ray.dir.dot(plane_normal);
    if denom == 0.0 || !denom.is_finite() {
        return None;
    }
    let t = (plane_point - ray.origin).dot(plane_normal) / denom;
    if t > HIT_EPSILON && t.is_finite() {
        Some((t, ray.at(t)))
    } else {
        None
    }
}

/// Exit state of a ray after crossing one mirror channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelFoldResult {
    /// Transverse position inside the channel, in `[0, pitch]`.
    pub exit_offset: f64,
    pub reflection_count: u64,
    /// Whether the transverse direction component is reversed on exit.
    pub flipped: bool,
}

/// Folds a straight transverse path into a channel of width `pitch` bounded
/// by mirrors at both walls.
///
/// `slope` is transverse over longitudinal direction, so the ray moves
/// `slope * depth` sideways while crossing the slab. The unfolded exit
/// coordinate `w` is mapped back into the channel with a triangle wave; each
/// wall crossed in the unfolded picture is one reflection. A path ending
/// exactly on a wall at `k * pitch` counts `floor(w / pitch)` crossings.
pub fn fold_channel(entry_offset: f64, slope: f64, depth: f64, pitch: f64) -> Result<ChannelFoldResult> {
    if !(pitch > 0.0 && pitch.is_finite()) {
        return Err(Error::precondition("channel pitch must be positive and finite"));
    }
    if !(depth > 0.0 && depth.is_finite()) {
        return Err(Error::precondition("channel depth must be positive and finite"));
    }
    if !slope.is_finite() {
        return Err(Error::precondition("channel slope must be finite"));
    }
    if !(0.0..pitch).contains(&entry_offset) {
        return Err(Error::precondition("entry offset must lie in [0, pitch)"));
    }

    let w = entry_offset + slope * depth;
    let cells = (w / pitch).floor();
    let reflection_count = cells.abs() as u64;

    let period = 2.0 * pitch;
    let m = w.rem_euclid(period);
    let exit_offset = if m > pitch { period - m } else { m };

    Ok(ChannelFoldResult {
        exit_offset,
        reflection_count,
        flipped: reflection_count % 2 == 1,
    })
}
