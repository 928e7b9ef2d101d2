//! Display scene, volumetric projector and eye-tracking steering.
//!
//! Scene content is stored at its *display* position, where the viewer should
//! perceive it. Content may sit on either side of the lens plane. The projector
//! has to form the conjugate of each display point; see [`source_position`].

use std::fmt;
use std::sync::Arc;

use crate::geometry::{Ray, Vec3};
use crate::lens::{ideal_conjugate, LensSpec};
use crate::render::Rgb;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenePoint {
    pub display_pos: Vec3,
    pub color: Rgb,
}

/// Texel grid with binary opacity; `None` texels are transparent.
#[derive(Debug, Clone, PartialEq)]
pub struct Texture {
    width: usize,
    height: usize,
    texels: Vec<Option<Rgb>>,
}

impl Texture {
    pub fn new(width: usize, height: usize, texels: Vec<Option<Rgb>>) -> Result<Texture> {
        if width == 0 || height == 0 {
            return Err(Error::precondition("texture dimensions must be at least 1"));
        }
        if texels.len() != width * height {
            return Err(Error::precondition("texel count does not match texture dimensions"));
        }
        Ok(Texture { width, height, texels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Nearest-texel lookup; `(s, t)` in `[0, 1]`, `t = 0` at the top row.
    #[inline]
    pub fn sample(&self, s: f64, t: f64) -> Option<Rgb> {
        let col = ((s * self.width as f64) as usize).min(self.width - 1);
        let row = ((t * self.height as f64) as usize).min(self.height - 1);
        self.texels[row * self.width + col]
    }

    pub fn texels(&self) -> &[Option<Rgb>] {
        &self.texels
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CardMaterial {
    Solid(Rgb),
    /// Texture loaded from `path`; the path is kept so the scene can be written back out.
    Texture { path: String, texture: Arc<Texture> },
}

/// Opaque rectangle at a display position. Double-sided.
#[derive(Debug, Clone, PartialEq)]
pub struct Card {
    pub center: Vec3,
    pub halfwidth: f64,
    pub halfheight: f64,
    pub normal: Vec3,
    pub material: CardMaterial,
}

impl Card {
    /// In-plane axes `(u, v)`. `u` is horizontal when the normal is not vertical.
    pub fn axes(&self) -> (Vec3, Vec3) {
        let n = self.normal;
        let hint = if n.y.abs() > 0.999 { Vec3::X } else { Vec3::Y };
        let u = hint.cross(n).normalized().unwrap_or(Vec3::X);
        let v = n.cross(u);
        (u, v)
    }

    /// The four corners, counter-clockwise from `-u -v`.
    pub fn corners(&self) -> [Vec3; 4] {
        let (u, v) = self.axes();
        let (a, b) = (u * self.halfwidth, v * self.halfheight);
        [self.center - a - b, self.center + a - b, self.center + a + b, self.center - a + b]
    }

    /// Nearest opaque hit along `ray` with parameter in `(t_min, t_max)`.
    pub fn intersect(&self, ray: &Ray, t_min: f64, t_max: f64) -> Option<(f64, Rgb)> {
        let (u, v) = self.axes();
        self.intersect_with_axes(ray, u, v, t_min, t_max)
    }

    #[inline]
    pub(crate) fn intersect_with_axes(&self, ray: &Ray, u: Vec3, v: Vec3, t_min: f64, t_max: f64) -> Option<(f64, Rgb)> {
        let denom = ray.dir.dot(self.normal);
        if denom == 0.0 {
            return None;
        }
        let t = (self.center - ray.origin).dot(self.normal) / denom;
        if !(t > t_min && t < t_max) {
            return None;
        }
        let local = ray.at(t) - self.center;
        let a = local.dot(u);
        let b = local.dot(v);
        if a.abs() > self.halfwidth || b.abs() > self.halfheight {
            return None;
        }
        let color = match &self.material {
            CardMaterial::Solid(c) => *c,
            CardMaterial::Texture { texture, .. } => {
                let s = 0.5 * (a / self.halfwidth + 1.0);
                let tt = 0.5 * (1.0 - b / self.halfheight);
                texture.sample(s, tt)?
            }
        };
        Some((t, color))
    }
}

/// Ideal aperture disk of the volumetric projector, facing +z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projector {
    pub aperture_center: Vec3,
    pub aperture_radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub points: Vec<ScenePoint>,
    pub cards: Vec<Card>,
    pub lens: LensSpec,
    pub projector: Projector,
    pub background: Rgb,
}

/// One violated scene rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SceneDiagnostic {
    /// Offending entity, e.g. `lens`, `projector`, `card[2]`, `point[0]`.
    pub entity: String,
    /// Field of the entity the rule concerns, when there is a single one.
    pub field: Option<String>,
    pub rule: String,
}

impl SceneDiagnostic {
    fn with_field(entity: impl Into<String>, field: &str, rule: impl Into<String>) -> SceneDiagnostic {
        SceneDiagnostic { entity: entity.into(), field: Some(field.to_string()), rule: rule.into() }
    }
}

impl fmt::Display for SceneDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.field {
            Some(field) => write!(f, "{}.{}: {}", self.entity, field, self.rule),
            None => write!(f, "{}: {}", self.entity, self.rule),
        }
    }
}

/// Point the projector must form so the lens reconstructs `display_pos`.
pub fn source_position(display_pos: Vec3, lens: &LensSpec) -> Vec3 {
    ideal_conjugate(display_pos, lens)
}

/// Inverse of [`source_position`].
pub fn display_position(source_pos: Vec3, lens: &LensSpec) -> Vec3 {
    ideal_conjugate(source_pos, lens)
}

fn color_ok(c: Rgb) -> bool {
    [c.r, c.g, c.b].iter().all(|v| (0.0..=1.0).contains(v))
}

pub fn validate_scene(scene: &Scene) -> Vec<SceneDiagnostic> {
    let mut out: Vec<SceneDiagnostic> = scene
        .lens
        .problems()
        .into_iter()
        .map(|(field, rule)| SceneDiagnostic::with_field("lens", field, rule))
        .collect();

    let p = &scene.projector;
    if !p.aperture_center.is_finite() {
        out.push(SceneDiagnostic::with_field("projector", "center", "center must be finite"));
    } else if !(p.aperture_center.z < scene.lens.plane_z) {
        out.push(SceneDiagnostic::with_field("projector", "center", "projector must be behind lens"));
    }
    if !(p.aperture_radius > 0.0 && p.aperture_radius.is_finite()) {
        out.push(SceneDiagnostic::with_field("projector", "radius", "radius must be positive"));
    }

    for (i, pt) in scene.points.iter().enumerate() {
        let name = format!("point[{i}]");
        if !pt.display_pos.is_finite() {
            out.push(SceneDiagnostic::with_field(&name, "pos", "position must be finite"));
        }
        if !color_ok(pt.color) {
            out.push(SceneDiagnostic::with_field(&name, "color", "color components must lie in [0, 1]"));
        }
    }

    for (i, card) in scene.cards.iter().enumerate() {
        let name = format!("card[{i}]");
        if !card.center.is_finite() {
            out.push(SceneDiagnostic::with_field(&name, "center", "center must be finite"));
        }
        if !(card.halfwidth > 0.0 && card.halfwidth.is_finite()) {
            out.push(SceneDiagnostic::with_field(&name, "halfwidth", "halfwidth must be positive"));
        }
        if !(card.halfheight > 0.0 && card.halfheight.is_finite()) {
            out.push(SceneDiagnostic::with_field(&name, "halfheight", "halfheight must be positive"));
        }
        if !card.normal.is_unit() {
            out.push(SceneDiagnostic::with_field(&name, "normal", "normal must be a unit vector"));
        }
        if let CardMaterial::Solid(c) = card.material {
            if !color_ok(c) {
                out.push(SceneDiagnostic::with_field(&name, "color", "color components must lie in [0, 1]"));
            }
        }
    }

    if !color_ok(scene.background) {
        out.push(SceneDiagnostic::with_field("background", "rgb", "color components must lie in [0, 1]"));
    }
    out
}

/// Moves the projector so its visual window is centered on `eye_pos`.
pub fn steer_projector(eye_pos: Vec3, projector: &Projector, lens: &LensSpec) -> Result<Projector> {
    if !eye_pos.is_finite() || eye_pos.z <= lens.plane_z {
        return Err(Error::precondition("eye must be on the viewer (+z) side of the lens"));
    }
    Ok(Projector {
        aperture_center: ideal_conjugate(eye_pos, lens),
        aperture_radius: projector.aperture_radius,
    })
}
