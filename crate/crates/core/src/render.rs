//! Back-traced rendering of what a thin-lens viewer sees through the display.
//!
//! Each sample starts on the viewer's pupil, crosses the lens backward and is
//! kept only if it lands inside the projector aperture, so only rays that can
//! enter the pupil are ever computed. A surviving sample takes the color of the
//! nearest display-space surface along the line the light appears to come from.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::camera::ThinLensCamera;
use crate::geometry::{intersect_plane, Ray, Vec3, HIT_EPSILON};
use crate::lens::{ideal_conjugate, trace_micro_reverse, LensSpec, RayClass};
use crate::scene::{validate_scene, Card, Projector, Scene, ScenePoint};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Rgb {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl Rgb {
    pub const BLACK: Rgb = Rgb::new(0.0, 0.0, 0.0);
    pub const WHITE: Rgb = Rgb::new(1.0, 1.0, 1.0);

    pub const fn new(r: f64, g: f64, b: f64) -> Rgb {
        Rgb { r, g, b }
    }

    /// Rec. 709 luma weights.
    #[inline]
    pub fn luminance(self) -> f64 {
        0.2126 * self.r + 0.7152 * self.g + 0.0722 * self.b
    }
}

impl std::ops::Add for Rgb {
    type Output = Rgb;
    fn add(self, o: Rgb) -> Rgb {
        Rgb::new(self.r + o.r, self.g + o.g, self.b + o.b)
    }
}

impl std::ops::Mul<f64> for Rgb {
    type Output = Rgb;
    fn mul(self, s: f64) -> Rgb {
        Rgb::new(self.r * s, self.g * s, self.b * s)
    }
}

/// Row-major RGB image, channels in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<Rgb>,
}

impl Image {
    pub fn filled(width: usize, height: usize, color: Rgb) -> Image {
        Image { width, height, pixels: vec![color; width * height] }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, c: Rgb) {
        self.pixels[y * self.width + x] = c;
    }

    /// Mean over pixels of the summed absolute channel differences.
    pub fn mean_abs_difference(&self, other: &Image) -> Result<f64> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::precondition("images differ in size"));
        }
        let total: f64 = self
            .pixels
            .iter()
            .zip(&other.pixels)
            .map(|(a, b)| (a.r - b.r).abs() + (a.g - b.g).abs() + (a.b - b.b).abs())
            .sum();
        Ok(total / self.pixels.len().max(1) as f64)
    }
}

/// Axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    pub fn new(x: usize, y: usize, width: usize, height: usize) -> Rect {
        Rect { x, y, width, height }
    }

    /// Central box covering half the image in each direction.
    pub fn central_half(width: usize, height: usize) -> Rect {
        Rect::new(width / 4, height / 4, width / 2, height / 2)
    }

    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && y >= self.y && x < self.x + self.width && y < self.y + self.height
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LensMode {
    IdealLens,
    MicroLens,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    pub mode: LensMode,
    /// Keep non-imaging micro-lens rays (both ghost classes and straight-through light).
    pub include_ghosts: bool,
    pub rays_per_pixel: u32,
    pub seed: u64,
    /// Radius of the small sphere drawn for each scene point, meters.
    pub point_radius: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            mode: LensMode::IdealLens,
            include_ghosts: false,
            rays_per_pixel: 16,
            seed: 0,
            point_radius: 1e-3,
        }
    }
}

struct PreparedCard<'a> {
    card: &'a Card,
    u: Vec3,
    v: Vec3,
}

struct Prepared<'a> {
    cards: Vec<PreparedCard<'a>>,
    points: &'a [ScenePoint],
    point_radius: f64,
    lens: &'a LensSpec,
    projector: &'a Projector,
    background: Rgb,
    mode: LensMode,
    include_ghosts: bool,
}

impl Prepared<'_> {
    /// Color of the nearest surface along a display-space ray, `None` on a miss.
    fn shade(&self, ray: &Ray) -> Option<Rgb> {
        let mut best_t = f64::INFINITY;
        let mut color = None;
        for pc in &self.cards {
            if let Some((t, c)) = pc.card.intersect_with_axes(ray, pc.u, pc.v, HIT_EPSILON, best_t) {
                best_t = t;
                color = Some(c);
            }
        }
        let r2 = self.point_radius * self.point_radius;
        for p in self.points {
            let oc = ray.origin - p.display_pos;
            let b = oc.dot(ray.dir);
            let c = oc.norm_squared() - r2;
            let disc = b * b - c;
            if disc < 0.0 {
                continue;
            }
            let sq = disc.sqrt();
            let t = if -b - sq > HIT_EPSILON { -b - sq } else { -b + sq };
            if t > HIT_EPSILON && t < best_t {
                best_t = t;
                color = Some(p.color);
            }
        }
        color
    }

    /// Whether light travelling backward from `origin` along `dir` meets the projector aperture.
    fn reaches_projector(&self, origin: Vec3, dir: Vec3) -> bool {
        let ray = Ray { origin, dir };
        match intersect_plane(&ray, self.projector.aperture_center, Vec3::Z) {
            Some((_, p)) => p.distance(self.projector.aperture_center) <= self.projector.aperture_radius,
            None => false,
        }
    }

    /// Color carried by the light that arrives at `pupil_point` along `-eye_dir`;
    /// `None` when it shows only background.
    fn sample(&self, pupil_point: Vec3, eye_dir: Vec3) -> Option<Rgb> {
        let eye_ray = Ray { origin: pupil_point, dir: eye_dir };
        match self.mode {
            LensMode::IdealLens => {
                let Some((_, hit)) = intersect_plane(&eye_ray, Vec3::new(0.0, 0.0, self.lens.plane_z), Vec3::Z) else {
                    return None;
                };
                if !self.lens.in_aperture(hit) {
                    return None;
                }
                let backward = Vec3::new(-eye_dir.x, -eye_dir.y, eye_dir.z);
                if !self.reaches_projector(hit, backward) {
                    return None;
                }
                self.shade(&eye_ray)
            }
            LensMode::MicroLens => {
                let Some(traced) = trace_micro_reverse(&eye_ray, self.lens) else {
                    return None;
                };
                if traced.class != RayClass::Imaging && !self.include_ghosts {
                    return None;
                }
                let back = traced.ray;
                if !self.reaches_projector(back.origin, back.dir) {
                    return None;
                }
                // The projector paints each incoming line with the display scene
                // seen along that line's mirror image.
                let anchor = ideal_conjugate(back.origin, self.lens);
                let dir = Vec3::new(-back.dir.x, -back.dir.y, back.dir.z);
                let origin = anchor + dir * ((pupil_point.z - anchor.z) / dir.z);
                self.shade(&Ray { origin, dir })
            }
        }
    }
}

/// Maps the unit square onto the unit disk preserving uniform density.
#[inline]
fn concentric_disk(u1: f64, u2: f64) -> (f64, f64) {
    let a = 2.0 * u1 - 1.0;
    let b = 2.0 * u2 - 1.0;
    if a == 0.0 && b == 0.0 {
        return (0.0, 0.0);
    }
    let (r, theta) = if a.abs() > b.abs() {
        (a, std::f64::consts::FRAC_PI_4 * (b / a))
    } else {
        (b, std::f64::consts::FRAC_PI_2 - std::f64::consts::FRAC_PI_4 * (a / b))
    };
    (r * theta.cos(), r * theta.sin())
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Renders the scene as seen by `camera`.
///
/// Every pixel draws its samples from its own generator seeded by
/// `(seed, pixel index)`, so output does not depend on thread scheduling.
pub fn render(scene: &Scene, camera: &ThinLensCamera, opts: &RenderOptions) -> Result<Image> {
    let diagnostics = validate_scene(scene);
    if !diagnostics.is_empty() {
        return Err(Error::InvalidScene(diagnostics));
    }
    camera.validate()?;
    if opts.rays_per_pixel == 0 {
        return Err(Error::precondition("rays_per_pixel must be at least 1"));
    }
    if !(opts.point_radius > 0.0 && opts.point_radius.is_finite()) {
        return Err(Error::precondition("point_radius must be positive"));
    }

    let prepared = Prepared {
        cards: scene
            .cards
            .iter()
            .map(|card| {
                let (u, v) = card.axes();
                PreparedCard { card, u, v }
            })
            .collect(),
        points: &scene.points,
        point_radius: opts.point_radius,
        lens: &scene.lens,
        projector: &scene.projector,
        background: scene.background,
        mode: opts.mode,
        include_ghosts: opts.include_ghosts,
    };

    let width = camera.sensor_width_px as usize;
    let height = camera.sensor_height_px as usize;
    let frame = camera.frame();
    let (tan_h, tan_v) = camera.half_extents();
    let n = opts.rays_per_pixel as usize;
    let cols = (n as f64).sqrt().ceil() as usize;
    let rows = n.div_ceil(cols);
    let pupil_r = camera.pupil_radius();
    let inv_n = 1.0 / n as f64;

    let mut pixels = vec![Rgb::BLACK; width * height];
    pixels.par_chunks_mut(width).enumerate().for_each(|(j, row)| {
        let mut order: Vec<usize> = (0..n).collect();
        for (i, px) in row.iter_mut().enumerate() {
            let index = (j * width + i) as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(opts.seed ^ splitmix64(index)));
            for k in (1..n).rev() {
                order.swap(k, rng.gen_range(0..=k));
            }
            let mut acc = Rgb::BLACK;
            let mut misses = 0usize;
            for (k, &stratum) in order.iter().enumerate() {
                let (jx, jy) = if n == 1 {
                    (0.5, 0.5)
                } else {
                    (((k % cols) as f64 + rng.gen::<f64>()) / cols as f64, ((k / cols) as f64 + rng.gen::<f64>()) / rows as f64)
                };
                let u1 = ((stratum % cols) as f64 + rng.gen::<f64>()) / cols as f64;
                let u2 = ((stratum / cols) as f64 + rng.gen::<f64>()) / rows as f64;
                let (pu, pv) = concentric_disk(u1, u2);
                let pupil_point = camera.pupil_center + frame.right * (pu * pupil_r) + frame.up * (pv * pupil_r);

                let sx = 2.0 * (i as f64 + jx) / width as f64 - 1.0;
                let sy = 1.0 - 2.0 * (j as f64 + jy) / height as f64;
                let chief = frame.look + frame.right * (sx * tan_h) + frame.up * (sy * tan_v);
                let focus_point = camera.pupil_center + chief * camera.focus_distance;
                match (focus_point - pupil_point).normalized().and_then(|dir| prepared.sample(pupil_point, dir)) {
                    Some(c) => acc = acc + c,
                    None => misses += 1,
                }
            }
            // A pixel that saw nothing but background is the background, bit for bit.
            *px = if misses == n { prepared.background } else { (acc + prepared.background * misses as f64) * inv_n };
        }
    });

    Ok(Image { width, height, pixels })
}

/// Mean absolute luminance gradient (forward differences, horizontal plus
/// vertical) over `region`. Differences are taken only between pixel pairs
/// that both lie in the region; the sum is divided by the region's pixel count.
pub fn sharpness(image: &Image, region: Rect) -> Result<f64> {
    if region.width == 0 || region.height == 0 {
        return Err(Error::precondition("sharpness region is empty"));
    }
    if region.x + region.width > image.width || region.y + region.height > image.height {
        return Err(Error::precondition("sharpness region exceeds image bounds"));
    }
    let lum = |x: usize, y: usize| image.get(x, y).luminance();
    let mut total = 0.0;
    for y in region.y..region.y + region.height {
        for x in region.x..region.x + region.width {
            let here = lum(x, y);
            if x + 1 < region.x + region.width {
                total += (lum(x + 1, y) - here).abs();
            }
            if y + 1 < region.y + region.height {
                total += (lum(x, y + 1) - here).abs();
            }
        }
    }
    Ok(total / (region.width * region.height) as f64)
}
