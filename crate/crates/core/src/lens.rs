//! The crossed strip-mirror lens.
//!
//! Two slabs of parallel mirror strips sit back to back around the device
//! plane `z = plane_z`. The first slab (`plane_z - depth1 .. plane_z`) has
//! mirrors with normals along x, spaced `pitch_x`; the second
//! (`plane_z .. plane_z + depth2`) has mirrors with normals along y, spaced
//! `pitch_y`. A ray reflected an odd number of times in both slabs leaves
//! with both transverse components reversed, which is the mirror-symmetric
//! imaging of the device: a source at `(x, y, plane_z - d)` re-converges at
//! `(x, y, plane_z + d)`.
//!
//! [`trace_ideal`] applies that map exactly at the plane. [`trace_micro`]
//! follows the actual bounces with [`fold_channel`] and reports which of the
//! four parity classes the ray falls in.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{fold_channel, intersect_plane, Ray, Vec3};
use crate::{Error, Result};

/// Geometry of the strip-mirror lens. Lengths in meters; the device normal is +z
/// and the aperture is centered on the z axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LensSpec {
    pub pitch_x: f64,
    pub pitch_y: f64,
    pub depth1: f64,
    pub depth2: f64,
    pub aperture_halfwidth: f64,
    pub aperture_halfheight: f64,
    pub plane_z: f64,
}

impl Default for LensSpec {
    fn default() -> Self {
        LensSpec {
            pitch_x: 0.5e-3,
            pitch_y: 0.5e-3,
            depth1: 2e-3,
            depth2: 2e-3,
            aperture_halfwidth: 0.1,
            aperture_halfheight: 0.075,
            plane_z: 0.0,
        }
    }
}

impl LensSpec {
    /// Rule violations as `(field, message)`, empty when the spec is usable.
    pub fn problems(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let lengths = [
            ("pitch_x", "pitch", self.pitch_x),
            ("pitch_y", "pitch", self.pitch_y),
            ("depth1", "depth", self.depth1),
            ("depth2", "depth", self.depth2),
            ("aperture_halfwidth", "aperture", self.aperture_halfwidth),
            ("aperture_halfheight", "aperture", self.aperture_halfheight),
        ];
        for (field, what, v) in lengths {
            if !(v > 0.0 && v.is_finite()) {
                out.push((field, format!("{what} must be positive")));
            }
        }
        if !self.plane_z.is_finite() {
            out.push(("plane_z", "plane_z must be finite".to_string()));
        }
        if out.is_empty() {
            if self.pitch_x > 2.0 * self.aperture_halfwidth / 10.0 {
                out.push(("pitch_x", "pitch must be at most a tenth of the aperture width".to_string()));
            }
            if self.pitch_y > 2.0 * self.aperture_halfheight / 10.0 {
                out.push(("pitch_y", "pitch must be at most a tenth of the aperture height".to_string()));
            }
        }
        out
    }

    /// Same lens with pitches and slab depths multiplied by `factor`; aperture
    /// and plane position unchanged.
    pub fn scaled_structure(&self, factor: f64) -> LensSpec {
        LensSpec {
            pitch_x: self.pitch_x * factor,
            pitch_y: self.pitch_y * factor,
            depth1: self.depth1 * factor,
            depth2: self.depth2 * factor,
            ..*self
        }
    }

    #[inline]
    pub fn in_aperture(&self, p: Vec3) -> bool {
        p.x.abs() <= self.aperture_halfwidth && p.y.abs() <= self.aperture_halfheight
    }

    /// z of the surface where light from the projector side enters.
    pub fn entry_z(&self) -> f64 {
        self.plane_z - self.depth1
    }

    /// z of the surface facing the viewer.
    pub fn exit_z(&self) -> f64 {
        self.plane_z + self.depth2
    }
}

/// Parity class of a ray after both mirror layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RayClass {
    /// Odd reflections in both layers: forms the conjugate image.
    Imaging,
    /// Even in both: passes through with its direction unchanged.
    Transmitted,
    /// Odd in the x layer only.
    GhostX,
    /// Odd in the y layer only.
    GhostY,
}

impl RayClass {
    pub fn from_counts(n1: u64, n2: u64) -> RayClass {
        match (n1 % 2 == 1, n2 % 2 == 1) {
            (true, true) => RayClass::Imaging,
            (false, false) => RayClass::Transmitted,
            (true, false) => RayClass::GhostX,
            (false, true) => RayClass::GhostY,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RayClass::Imaging => "Imaging",
            RayClass::Transmitted => "Transmitted",
            RayClass::GhostX => "GhostX",
            RayClass::GhostY => "GhostY",
        }
    }
}

impl std::fmt::Display for RayClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifiedRay {
    /// Ray leaving the far surface of the lens, in world coordinates.
    pub ray: Ray,
    pub class: RayClass,
    /// Reflection counts in the x layer and the y layer.
    pub reflections: (u64, u64),
}

/// Region an eye must occupy to receive light from the projector: the mirror
/// image of the projector aperture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisualWindow {
    pub center: Vec3,
    pub radius: f64,
    pub normal: Vec3,
}

/// Mirror image of `point` across the lens plane.
#[inline]
pub fn ideal_conjugate(point: Vec3, lens: &LensSpec) -> Vec3 {
    Vec3::new(point.x, point.y, 2.0 * lens.plane_z - point.z)
}

/// Ideal lens: reverses both transverse direction components where the ray
/// crosses the device plane. `None` when the crossing is outside the aperture
/// or the ray never reaches the plane.
pub fn trace_ideal(ray: &Ray, lens: &LensSpec) -> Option<Ray> {
    let (_, hit) = intersect_plane(ray, Vec3::new(0.0, 0.0, lens.plane_z), Vec3::Z)?;
    if !lens.in_aperture(hit) {
        return None;
    }
    let d = ray.dir;
    Some(Ray::from_unit(hit, Vec3::new(-d.x, -d.y, d.z)))
}

/// Micro-structured lens, traced forward (+z) through both mirror layers.
///
/// Returns `None` if the ray is not heading +z, never reaches the entry
/// surface, or enters outside the aperture.
pub fn trace_micro(ray: &Ray, lens: &LensSpec) -> Option<ClassifiedRay> {
    if ray.dir.z <= 0.0 {
        return None;
    }
    let (_, entry) = intersect_plane(ray, Vec3::new(0.0, 0.0, lens.entry_z()), Vec3::Z)?;
    if !lens.in_aperture(entry) {
        return None;
    }
    traverse(entry, ray.dir, lens)
}

/// Micro-structured lens traced backward: a ray heading -z from the viewer side
/// enters the y layer first and leaves below the x layer. Mirror paths are
/// reversible, so reversing the returned ray gives the forward light path that
/// ends on the input ray.
pub fn trace_micro_reverse(ray: &Ray, lens: &LensSpec) -> Option<ClassifiedRay> {
    if ray.dir.z >= 0.0 {
        return None;
    }
    let (_, entry) = intersect_plane(ray, Vec3::new(0.0, 0.0, lens.exit_z()), Vec3::Z)?;
    if !lens.in_aperture(entry) {
        return None;
    }
    traverse(entry, ray.dir, lens)
}

/// Crosses one mirror layer along a single transverse axis: returns the world
/// coordinate on exit and the reflection count.
fn cross_layer(pos: f64, slope: f64, depth: f64, pitch: f64) -> Option<(f64, u64)> {
    let mut base = (pos / pitch).floor() * pitch;
    let mut offset = pos - base;
    if offset >= pitch {
        base += pitch;
        offset -= pitch;
    }
    let offset = offset.max(0.0);
    let folded = fold_channel(offset, slope, depth, pitch).ok()?;
    Some((base + folded.exit_offset, folded.reflection_count))
}

/// Traverses both layers starting on whichever outer surface `dir` enters.
fn traverse(entry: Vec3, dir: Vec3, lens: &LensSpec) -> Option<ClassifiedRay> {
    let dz = dir.z.abs();
    let slope_x = dir.x / dz;
    let slope_y = dir.y / dz;
    let forward = dir.z > 0.0;

    let (x, y, n1, n2, z_out);
    if forward {
        let (x1, c1) = cross_layer(entry.x, slope_x, lens.depth1, lens.pitch_x)?;
        let y1 = entry.y + slope_y * lens.depth1;
        let sx = if c1 % 2 == 1 { -slope_x } else { slope_x };
        let (y2, c2) = cross_layer(y1, slope_y, lens.depth2, lens.pitch_y)?;
        x = x1 + sx * lens.depth2;
        y = y2;
        n1 = c1;
        n2 = c2;
        z_out = lens.exit_z();
    } else {
        let (y2, c2) = cross_layer(entry.y, slope_y, lens.depth2, lens.pitch_y)?;
        let x2 = entry.x + slope_x * lens.depth2;
        let sy = if c2 % 2 == 1 { -slope_y } else { slope_y };
        let (x1, c1) = cross_layer(x2, slope_x, lens.depth1, lens.pitch_x)?;
        x = x1;
        y = y2 + sy * lens.depth1;
        n1 = c1;
        n2 = c2;
        z_out = lens.entry_z();
    }

    let out_dir = Vec3::new(
        if n1 % 2 == 1 { -dir.x } else { dir.x },
        if n2 % 2 == 1 { -dir.y } else { dir.y },
        dir.z,
    );
    Some(ClassifiedRay {
        ray: Ray::from_unit(Vec3::new(x, y, z_out), out_dir),
        class: RayClass::from_counts(n1, n2),
        reflections: (n1, n2),
    })
}

/// Visual window for a projector aperture disk.
pub fn visual_window(projector_aperture_center: Vec3, projector_aperture_radius: f64, lens: &LensSpec) -> Result<VisualWindow> {
    if !(projector_aperture_radius > 0.0 && projector_aperture_radius.is_finite()) {
        return Err(Error::precondition("projector aperture radius must be positive"));
    }
    Ok(VisualWindow {
        center: ideal_conjugate(projector_aperture_center, lens),
        radius: projector_aperture_radius,
        normal: Vec3::Z,
    })
}

/// Monte Carlo share of rays with the given incidence direction that leave the
/// micro lens in the [`RayClass::Imaging`] class. Entry points are uniform over
/// one `pitch_x` by `pitch_y` cell at the aperture center.
pub fn imaging_fraction(lens: &LensSpec, incidence_dir: Vec3, n_samples: usize, seed: u64) -> Result<f64> {
    if n_samples < 1000 {
        return Err(Error::precondition("imaging_fraction needs at least 1000 samples"));
    }
    let dir = incidence_dir
        .normalized()
        .ok_or_else(|| Error::precondition("incidence direction must be non-zero"))?;
    if dir.z <= 0.0 {
        return Err(Error::precondition("incidence direction must have a positive z component"));
    }
    let problems = lens.problems();
    if !problems.is_empty() {
        let text: Vec<String> = problems.into_iter().map(|(f, m)| format!("{f}: {m}")).collect();
        return Err(Error::precondition(text.join("; ")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut imaging = 0usize;
    for _ in 0..n_samples {
        let entry = Vec3::new(
            rng.gen::<f64>() * lens.pitch_x,
            rng.gen::<f64>() * lens.pitch_y,
            lens.entry_z(),
        );
        if let Some(c) = traverse(entry, dir, lens) {
            if c.class == RayClass::Imaging {
                imaging += 1;
            }
        }
    }
    Ok(imaging as f64 / n_samples as f64)
}
