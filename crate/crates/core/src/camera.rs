//! Thin-lens eye/camera.

use crate::geometry::Vec3;
use crate::lens::VisualWindow;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThinLensCamera {
    pub pupil_center: Vec3,
    pub pupil_diameter: f64,
    pub focal_length: f64,
    /// Object-side distance of the plane in focus, measured from the pupil along `look_dir`.
    pub focus_distance: f64,
    pub sensor_width_px: u32,
    pub sensor_height_px: u32,
    /// Full horizontal field of view, radians.
    pub horizontal_fov: f64,
    pub look_dir: Vec3,
    pub up: Vec3,
}

/// Orthonormal camera frame: `right`, `up`, `look`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraFrame {
    pub right: Vec3,
    pub up: Vec3,
    pub look: Vec3,
}

impl ThinLensCamera {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidCamera(m.to_string()));
        if !self.pupil_center.is_finite() {
            return fail("pupil_center must be finite");
        }
        if !(self.pupil_diameter > 0.0 && self.pupil_diameter.is_finite()) {
            return fail("pupil_diameter must be positive");
        }
        if !(self.focal_length > 0.0 && self.focal_length.is_finite()) {
            return fail("focal_length must be positive");
        }
        if !(self.focus_distance > self.focal_length && self.focus_distance.is_finite()) {
            return fail("focus_distance must exceed focal_length");
        }
        if self.sensor_width_px == 0 || self.sensor_height_px == 0 {
            return fail("sensor dimensions must be at least 1 pixel");
        }
        if !(self.horizontal_fov > 0.0 && self.horizontal_fov < std::f64::consts::PI) {
            return fail("horizontal_fov must lie in (0, pi)");
        }
        if !self.look_dir.is_unit() || !self.up.is_unit() {
            return fail("look_dir and up must be unit vectors");
        }
        if self.look_dir.cross(self.up).norm() < 1e-9 {
            return fail("up must not be parallel to look_dir");
        }
        Ok(())
    }

    pub fn frame(&self) -> CameraFrame {
        let look = self.look_dir;
        let right = look.cross(self.up).normalized().unwrap_or(Vec3::X);
        let up = right.cross(look);
        CameraFrame { right, up, look }
    }

    pub fn pupil_radius(&self) -> f64 {
        0.5 * self.pupil_diameter
    }

    /// `tan` of the horizontal and vertical half angles.
    pub fn half_extents(&self) -> (f64, f64) {
        let th = (0.5 * self.horizontal_fov).tan();
        (th, th * self.sensor_height_px as f64 / self.sensor_width_px as f64)
    }

    /// Continuous pixel coordinates `(col, row)` of `point` seen through the
    /// pupil center; pixel `(i, j)` spans `[i, i + 1) x [j, j + 1)`. `None` for
    /// points not in front of the camera.
    pub fn project(&self, point: Vec3) -> Option<(f64, f64)> {
        let f = self.frame();
        let rel = point - self.pupil_center;
        let depth = rel.dot(f.look);
        if depth <= 0.0 {
            return None;
        }
        let (th, tv) = self.half_extents();
        let sx = rel.dot(f.right) / depth / th;
        let sy = rel.dot(f.up) / depth / tv;
        let w = self.sensor_width_px as f64;
        let h = self.sensor_height_px as f64;
        Some((0.5 * (sx + 1.0) * w, 0.5 * (1.0 - sy) * h))
    }

    /// Same camera with the pupil moved by `offset`.
    pub fn translated(&self, offset: Vec3) -> ThinLensCamera {
        ThinLensCamera { pupil_center: self.pupil_center + offset, ..*self }
    }

    pub fn with_focus(&self, focus_distance: f64) -> ThinLensCamera {
        ThinLensCamera { focus_distance, ..*self }
    }
}

/// Whether the pupil disk overlaps the window disk, both projected onto the
/// window plane. Touching disks count as overlapping.
pub fn in_window(camera: &ThinLensCamera, window: &VisualWindow) -> bool {
    let d = camera.pupil_center - window.center;
    let lateral = d - window.normal * d.dot(window.normal);
    lateral.norm() <= window.radius + camera.pupil_radius()
}

/// Diameter on the sensor of the defocus blur disk of a point at
/// `object_distance` in front of the pupil.
pub fn blur_diameter(object_distance: f64, camera: &ThinLensCamera) -> Result<f64> {
    let f = camera.focal_length;
    if !(object_distance > f) {
        return Err(Error::precondition("object must lie beyond the focal length"));
    }
    let z_f = camera.focus_distance;
    if !(z_f > f) {
        return Err(Error::InvalidCamera("focus_distance must exceed focal_length".into()));
    }
    let sensor = f * z_f / (z_f - f);
    let image = f * object_distance / (object_distance - f);
    Ok(camera.pupil_diameter * (sensor - image).abs() / image)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn eye() -> ThinLensCamera {
        ThinLensCamera {
            pupil_center: Vec3::new(0.0, 0.0, 1.0),
            pupil_diameter: 5e-3,
            focal_length: 25e-3,
            focus_distance: 1.0,
            sensor_width_px: 64,
            sensor_height_px: 48,
            horizontal_fov: 0.3,
            look_dir: -Vec3::Z,
            up: Vec3::Y,
        }
    }

    fn window(radius: f64) -> VisualWindow {
        VisualWindow { center: Vec3::new(0.0, 0.0, 1.0), radius, normal: Vec3::Z }
    }

    #[test]
    fn validation() {
        assert!(eye().validate().is_ok());
        assert!(ThinLensCamera { focus_distance: 0.01, ..eye() }.validate().is_err());
        assert!(ThinLensCamera { pupil_diameter: 0.0, ..eye() }.validate().is_err());
        assert!(ThinLensCamera { horizontal_fov: 3.2, ..eye() }.validate().is_err());
        assert!(ThinLensCamera { up: -Vec3::Z, ..eye() }.validate().is_err());
        assert!(ThinLensCamera { sensor_height_px: 0, ..eye() }.validate().is_err());
    }

    #[test]
    fn frame_is_right_handed() {
        let f = eye().frame();
        assert_eq!(f.right, Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(f.up, Vec3::Y);
    }

    #[test]
    fn projection_of_axis_hits_sensor_center() {
        let cam = eye();
        let (c, r) = cam.project(Vec3::new(0.0, 0.0, 0.0)).unwrap();
        assert_eq!((c, r), (32.0, 24.0));
        let (c, _) = cam.project(Vec3::new((0.15f64).tan(), 0.0, 0.0)).unwrap();
        assert!((c - 64.0).abs() < 1e-9);
        assert!(cam.project(Vec3::new(0.0, 0.0, 2.0)).is_none());
    }

    #[test]
    fn window_membership_examples() {
        let w = window(0.02);
        assert!(in_window(&eye(), &w));
        let r = eye().pupil_radius();
        let outside = eye().translated(Vec3::new(0.02 + r + 1e-3, 0.0, 0.0));
        assert!(!in_window(&outside, &w));
    }

    #[test]
    fn window_transition_near_analytic_boundary() {
        let w = window(0.02);
        let r = eye().pupil_radius();
        let boundary = w.radius + r;
        let mut last_inside = None;
        let steps = 4000;
        for i in 0..=steps {
            let x = 0.05 * i as f64 / steps as f64;
            if in_window(&eye().translated(Vec3::new(x, 0.0, 0.0)), &w) {
                last_inside = Some(x);
            }
        }
        let edge = last_inside.unwrap();
        assert!((edge - boundary).abs() <= r);
        // Axial offset is ignored: only the projection onto the window plane matters.
        assert!(in_window(&eye().translated(Vec3::new(0.0, 0.0, 0.3)), &w));
    }

    /// Thin-lens oracle: image distance from the Gaussian lens equation, then
    /// similar triangles from the pupil to the sensor plane.
    fn thin_lens_blur(f: f64, pupil: f64, focus: f64, z: f64) -> f64 {
        let sensor = 1.0 / (1.0 / f - 1.0 / focus);
        let image = 1.0 / (1.0 / f - 1.0 / z);
        pupil * (image - sensor).abs() / image
    }

    #[test]
    fn blur_examples() {
        let cam = ThinLensCamera { focal_length: 25e-3, pupil_diameter: 5e-3, focus_distance: 1.0, ..eye() };
        assert_eq!(blur_diameter(1.0, &cam).unwrap(), 0.0);
        let got = blur_diameter(6.0, &cam).unwrap();
        let want = thin_lens_blur(25e-3, 5e-3, 1.0, 6.0);
        assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
        assert!(blur_diameter(0.025, &cam).is_err());
        assert!(blur_diameter(0.01, &cam).is_err());
    }

    #[test]
    fn blur_grows_with_defocus() {
        let cam = eye();
        let mut zs: Vec<f64> = (0..400).map(|i| 0.03 + 0.02 * i as f64).collect();
        let inv_f = 1.0 / cam.focus_distance;
        zs.sort_by(|a, b| (1.0 / a - inv_f).abs().total_cmp(&(1.0 / b - inv_f).abs()));
        let blurs: Vec<f64> = zs.iter().map(|&z| blur_diameter(z, &cam).unwrap()).collect();
        for pair in zs.windows(2).zip(blurs.windows(2)) {
            let (z, b) = pair;
            if (1.0 / z[1] - inv_f).abs() > (1.0 / z[0] - inv_f).abs() {
                assert!(b[1] > b[0], "z {:?} blur {:?}", z, b);
            }
        }
    }
}
