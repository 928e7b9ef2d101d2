//! Scene description files.
//!
//! A scene file is UTF-8 text made of `[section]` headers followed by
//! `key = value` lines. `#` starts a comment. Vectors are written as three
//! comma-separated numbers. Sections `lens`, `projector`, `camera` and
//! `background` must appear exactly once; `point` and `card` may repeat.
//!
//! ```text
//! [lens]
//! pitch_x = 0.0005
//! pitch_y = 0.0005
//! depth1 = 0.002
//! depth2 = 0.002
//! aperture_w = 0.2
//! aperture_h = 0.15
//! plane_z = 0
//!
//! [card]
//! center = 0, 0, -2
//! halfwidth = 0.2
//! halfheight = 0.15
//! normal = 0, 0, 1
//! color = 0, 0, 1
//! ```
//!
//! `aperture_w` and `aperture_h` are full widths. A card takes either `color`
//! or `texture`, a PPM path relative to the scene file.

use std::fmt;
use std::sync::Arc;

use ghd_core::{
    validate_scene, Card, CardMaterial, LensSpec, Projector, Rgb, Scene, ScenePoint, Texture, ThinLensCamera, Vec3,
};

/// A parsed scene plus the viewing camera it was authored for.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneDocument {
    pub scene: Scene,
    pub camera: ThinLensCamera,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// 1-based; `None` when the problem concerns the file as a whole.
    pub line: Option<usize>,
    /// 1-based character column.
    pub column: Option<usize>,
    pub message: String,
}

impl Diagnostic {
    fn at(line: usize, column: usize, message: impl Into<String>) -> Diagnostic {
        Diagnostic { line: Some(line), column: Some(column), message: message.into() }
    }

    fn file(message: impl Into<String>) -> Diagnostic {
        Diagnostic { line: None, column: None, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "{l}:{c}: {}", self.message),
            (Some(l), None) => write!(f, "{l}: {}", self.message),
            _ => write!(f, "{}", self.message),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Lens,
    Projector,
    Camera,
    Point,
    Card,
    Background,
}

impl Kind {
    fn parse(name: &str) -> Option<Kind> {
        Some(match name {
            "lens" => Kind::Lens,
            "projector" => Kind::Projector,
            "camera" => Kind::Camera,
            "point" => Kind::Point,
            "card" => Kind::Card,
            "background" => Kind::Background,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Kind::Lens => "lens",
            Kind::Projector => "projector",
            Kind::Camera => "camera",
            Kind::Point => "point",
            Kind::Card => "card",
            Kind::Background => "background",
        }
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            Kind::Lens => &["pitch_x", "pitch_y", "depth1", "depth2", "aperture_w", "aperture_h", "plane_z"],
            Kind::Projector => &["center", "radius"],
            Kind::Camera => &[
                "pupil_center",
                "pupil_diameter",
                "focal_length",
                "focus_distance",
                "sensor_width_px",
                "sensor_height_px",
                "horizontal_fov",
                "look_dir",
                "up",
            ],
            Kind::Point => &["pos", "color"],
            Kind::Card => &["center", "halfwidth", "halfheight", "normal", "color", "texture"],
            Kind::Background => &["rgb"],
        }
    }
}

struct Entry {
    key: String,
    value: String,
    line: usize,
    value_col: usize,
}

struct Section {
    kind: Kind,
    line: usize,
    entries: Vec<Entry>,
}

impl Section {
    fn line_of(&self, key: &str) -> usize {
        self.entries.iter().find(|e| e.key == key).map_or(self.line, |e| e.line)
    }
}

/// Pulls typed values out of one section, collecting diagnostics.
struct Reader<'a> {
    section: &'a Section,
    diags: &'a mut Vec<Diagnostic>,
}

impl Reader<'_> {
    fn entry(&mut self, key: &str, required: bool) -> Option<&Entry> {
        let found = self.section.entries.iter().find(|e| e.key == key);
        if found.is_none() && required {
            self.diags.push(Diagnostic::at(
                self.section.line,
                1,
                format!("[{}] is missing required key '{key}'", self.section.kind.name()),
            ));
        }
        found
    }

    fn number(&mut self, key: &str) -> Option<f64> {
        let e = self.entry(key, true)?;
        let parsed = parse_number(&e.value);
        let (line, col) = (e.line, e.value_col);
        match parsed {
            Ok(v) => Some(v),
            Err(m) => {
                self.diags.push(Diagnostic::at(line, col, format!("{key}: {m}")));
                None
            }
        }
    }

    fn count(&mut self, key: &str) -> Option<u32> {
        let e = self.entry(key, true)?;
        let (line, col) = (e.line, e.value_col);
        match e.value.parse::<u32>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.diags.push(Diagnostic::at(line, col, format!("{key}: expected a non-negative integer")));
                None
            }
        }
    }

    fn vector(&mut self, key: &str, required: bool) -> Option<Vec3> {
        let e = self.entry(key, required)?;
        let parsed = parse_vec3(&e.value);
        let (line, col) = (e.line, e.value_col);
        match parsed {
            Ok(v) => Some(v),
            Err(m) => {
                self.diags.push(Diagnostic::at(line, col, format!("{key}: {m}")));
                None
            }
        }
    }

    fn direction(&mut self, key: &str) -> Option<Vec3> {
        let v = self.vector(key, true)?;
        match v.normalized() {
            Some(u) => Some(u),
            None => {
                let e = self.entry(key, true)?;
                let (line, col) = (e.line, e.value_col);
                self.diags.push(Diagnostic::at(line, col, format!("{key}: direction must be nonzero")));
                None
            }
        }
    }

    fn color(&mut self, key: &str, required: bool) -> Option<Rgb> {
        self.vector(key, required).map(|v| Rgb::new(v.x, v.y, v.z))
    }
}

fn parse_number(text: &str) -> Result<f64, String> {
    // Rust's float grammar is locale-independent; only finite values are allowed.
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err("number must be finite".into()),
        Err(_) => Err(format!("expected a number, found '{text}'")),
    }
}

fn parse_vec3(text: &str) -> Result<Vec3, String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated numbers, found '{text}'"));
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = parse_number(p)?;
    }
    Ok(Vec3::new(v[0], v[1], v[2]))
}

/// Splits the text into sections, reporting syntax problems.
fn tokenize(text: &str, diags: &mut Vec<Diagnostic>) -> Vec<Section> {
    let mut sections: Vec<Section> = Vec::new();
    // False while inside an unknown section, so its keys are not reported again.
    let mut in_known = false;
    let mut seen_header = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.chars().take_while(|c| c.is_whitespace()).count() + 1;

        if let Some(rest) = trimmed.strip_prefix('[') {
            seen_header = true;
            let Some(name) = rest.strip_suffix(']') else {
                diags.push(Diagnostic::at(line_no, indent, "section header must end with ']'"));
                in_known = false;
                continue;
            };
            let name = name.trim();
            match Kind::parse(name) {
                Some(kind) => {
                    sections.push(Section { kind, line: line_no, entries: Vec::new() });
                    in_known = true;
                }
                None => {
                    diags.push(Diagnostic::at(line_no, indent, format!("unknown section '[{name}]'")));
                    in_known = false;
                }
            }
            continue;
        }

        let Some(eq) = content.find('=') else {
            diags.push(Diagnostic::at(line_no, indent, "expected 'key = value'"));
            continue;
        };
        let key = content[..eq].trim();
        let value_part = &content[eq + 1..];
        let value = value_part.trim();
        let value_col = content[..eq + 1].chars().count()
            + value_part.chars().take_while(|c| c.is_whitespace()).count()
            + 1;

        if key.is_empty() {
            diags.push(Diagnostic::at(line_no, indent, "missing key before '='"));
            continue;
        }
        if !seen_header {
            diags.push(Diagnostic::at(line_no, indent, format!("key '{key}' appears before any section header")));
            continue;
        }
        if !in_known {
            continue;
        }
        let section = sections.last_mut().expect("known section was pushed");
        if !section.kind.keys().contains(&key) {
            diags.push(Diagnostic::at(
                line_no,
                indent,
                format!("unknown key '{key}' in [{}]", section.kind.name()),
            ));
            continue;
        }
        if section.entries.iter().any(|e| e.key == key) {
            diags.push(Diagnostic::at(line_no, indent, format!("duplicate key '{key}'")));
            continue;
        }
        if value.is_empty() {
            diags.push(Diagnostic::at(line_no, value_col, format!("{key}: missing value")));
            continue;
        }
        section.entries.push(Entry { key: key.to_string(), value: value.to_string(), line: line_no, value_col });
    }
    sections
}

/// Loads the texture named by a card's `texture` value.
pub type TextureLoader<'a> = dyn FnMut(&str) -> Result<Texture, String> + 'a;

/// Parses and validates a scene file. Never panics, whatever the bytes.
pub fn parse_scene(bytes: &[u8], load_texture: &mut TextureLoader<'_>) -> Result<SceneDocument, Vec<Diagnostic>> {
    let text = match std::str::from_utf8(bytes) {
        Ok(t) => t,
        Err(e) => {
            let valid = &bytes[..e.valid_up_to()];
            let line = valid.iter().filter(|&&b| b == b'\n').count() + 1;
            let line_start = valid.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
            let col = String::from_utf8_lossy(&valid[line_start..]).chars().count() + 1;
            return Err(vec![Diagnostic::at(line, col, "file is not valid UTF-8")]);
        }
    };

    let mut diags = Vec::new();
    let sections = tokenize(text, &mut diags);

    let singleton = |kind: Kind, diags: &mut Vec<Diagnostic>| -> Option<&Section> {
        let mut found = sections.iter().filter(|s| s.kind == kind);
        let first = found.next();
        for dup in found {
            diags.push(Diagnostic::at(dup.line, 1, format!("section [{}] appears more than once", kind.name())));
        }
        if first.is_none() {
            diags.push(Diagnostic::file(format!("missing required section [{}]", kind.name())));
        }
        first
    };
    let lens_sec = singleton(Kind::Lens, &mut diags);
    let proj_sec = singleton(Kind::Projector, &mut diags);
    let cam_sec = singleton(Kind::Camera, &mut diags);
    let bg_sec = singleton(Kind::Background, &mut diags);

    let lens = lens_sec.and_then(|s| {
        let mut r = Reader { section: s, diags: &mut diags };
        let pitch_x = r.number("pitch_x");
        let pitch_y = r.number("pitch_y");
        let depth1 = r.number("depth1");
        let depth2 = r.number("depth2");
        let aperture_w = r.number("aperture_w");
        let aperture_h = r.number("aperture_h");
        let plane_z = r.number("plane_z");
        Some(LensSpec {
            pitch_x: pitch_x?,
            pitch_y: pitch_y?,
            depth1: depth1?,
            depth2: depth2?,
            aperture_halfwidth: 0.5 * aperture_w?,
            aperture_halfheight: 0.5 * aperture_h?,
            plane_z: plane_z?,
        })
    });

    let projector = proj_sec.and_then(|s| {
        let mut r = Reader { section: s, diags: &mut diags };
        let center = r.vector("center", true);
        let radius = r.number("radius");
        Some(Projector { aperture_center: center?, aperture_radius: radius? })
    });

    let camera = cam_sec.and_then(|s| {
        let mut r = Reader { section: s, diags: &mut diags };
        let pupil_center = r.vector("pupil_center", true);
        let pupil_diameter = r.number("pupil_diameter");
        let focal_length = r.number("focal_length");
        let focus_distance = r.number("focus_distance");
        let sensor_width_px = r.count("sensor_width_px");
        let sensor_height_px = r.count("sensor_height_px");
        let horizontal_fov = r.number("horizontal_fov");
        let look_dir = r.direction("look_dir");
        let up = r.direction("up");
        Some(ThinLensCamera {
            pupil_center: pupil_center?,
            pupil_diameter: pupil_diameter?,
            focal_length: focal_length?,
            focus_distance: focus_distance?,
            sensor_width_px: sensor_width_px?,
            sensor_height_px: sensor_height_px?,
            horizontal_fov: horizontal_fov?,
            look_dir: look_dir?,
            up: up?,
        })
    });

    let background = bg_sec.and_then(|s| Reader { section: s, diags: &mut diags }.color("rgb", true));

    let point_secs: Vec<&Section> = sections.iter().filter(|s| s.kind == Kind::Point).collect();
    let mut points = Vec::new();
    for s in &point_secs {
        let mut r = Reader { section: s, diags: &mut diags };
        let pos = r.vector("pos", true);
        let color = r.color("color", true);
        if let (Some(display_pos), Some(color)) = (pos, color) {
            points.push(ScenePoint { display_pos, color });
        }
    }

    let card_secs: Vec<&Section> = sections.iter().filter(|s| s.kind == Kind::Card).collect();
    let mut cards = Vec::new();
    for s in &card_secs {
        let mut r = Reader { section: s, diags: &mut diags };
        let center = r.vector("center", true);
        let halfwidth = r.number("halfwidth");
        let halfheight = r.number("halfheight");
        let normal = r.direction("normal");
        let color = r.color("color", false);
        let material = match (color, r.entry("texture", false)) {
            (Some(_), Some(e)) => {
                let line = e.line;
                diags.push(Diagnostic::at(line, 1, "card takes either 'color' or 'texture', not both"));
                None
            }
            (Some(c), None) => Some(CardMaterial::Solid(c)),
            (None, Some(e)) => {
                let (line, col, path) = (e.line, e.value_col, e.value.clone());
                match load_texture(&path) {
                    Ok(t) => Some(CardMaterial::Texture { path, texture: Arc::new(t) }),
                    Err(m) => {
                        diags.push(Diagnostic::at(line, col, format!("texture '{path}': {m}")));
                        None
                    }
                }
            }
            (None, None) => {
                if !s.entries.iter().any(|e| e.key == "color") {
                    diags.push(Diagnostic::at(s.line, 1, "card needs a 'color' or a 'texture'"));
                }
                None
            }
        };
        if let (Some(center), Some(halfwidth), Some(halfheight), Some(normal), Some(material)) =
            (center, halfwidth, halfheight, normal, material)
        {
            cards.push(Card { center, halfwidth, halfheight, normal, material });
        }
    }

    if !diags.is_empty() {
        return Err(diags);
    }
    let (Some(lens), Some(projector), Some(camera), Some(background)) = (lens, projector, camera, background) else {
        return Err(vec![Diagnostic::file("scene is incomplete")]);
    };
    let scene = Scene { points, cards, lens, projector, background };

    // Semantic rules, located at the offending key where possible.
    for d in validate_scene(&scene) {
        let section = section_for_entity(&d.entity, lens_sec, proj_sec, bg_sec, &point_secs, &card_secs);
        let key = d.field.as_deref().map(file_key);
        let line = match (section, key) {
            (Some(s), Some(k)) => Some(s.line_of(k)),
            (Some(s), None) => Some(s.line),
            _ => None,
        };
        diags.push(Diagnostic { line, column: line.map(|_| 1), message: d.to_string() });
    }
    if let Err(e) = camera.validate() {
        let message = match e {
            ghd_core::Error::InvalidCamera(m) => m,
            other => other.to_string(),
        };
        let key = message.split_whitespace().next().unwrap_or("");
        let line = cam_sec.map(|s| s.line_of(key));
        diags.push(Diagnostic { line, column: line.map(|_| 1), message: format!("camera: {message}") });
    }

    if diags.is_empty() {
        Ok(SceneDocument { scene, camera })
    } else {
        Err(diags)
    }
}

fn section_for_entity<'a>(
    entity: &str,
    lens: Option<&'a Section>,
    projector: Option<&'a Section>,
    background: Option<&'a Section>,
    points: &[&'a Section],
    cards: &[&'a Section],
) -> Option<&'a Section> {
    let indexed = |prefix: &str, list: &[&'a Section]| -> Option<&'a Section> {
        let i: usize = entity.strip_prefix(prefix)?.strip_suffix(']')?.parse().ok()?;
        list.get(i).copied()
    };
    match entity {
        "lens" => lens,
        "projector" => projector,
        "background" => background,
        _ => indexed("point[", points).or_else(|| indexed("card[", cards)),
    }
}

/// Scene-file key for a core field name.
fn file_key(field: &str) -> &str {
    match field {
        "aperture_halfwidth" => "aperture_w",
        "aperture_halfheight" => "aperture_h",
        other => other,
    }
}

fn vec_text(v: Vec3) -> String {
    format!("{}, {}, {}", v.x, v.y, v.z)
}

fn rgb_text(c: Rgb) -> String {
    format!("{}, {}, {}", c.r, c.g, c.b)
}

/// Writes a document back out in the scene file format.
///
/// Numbers use the shortest representation that reads back to the same value.
pub fn serialize_scene(doc: &SceneDocument) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let l = &doc.scene.lens;
    let c = &doc.camera;
    let p = &doc.scene.projector;
    // Writing to a String cannot fail.
    let _ = write!(
        out,
        "[lens]\npitch_x = {}\npitch_y = {}\ndepth1 = {}\ndepth2 = {}\naperture_w = {}\naperture_h = {}\nplane_z = {}\n\n",
        l.pitch_x,
        l.pitch_y,
        l.depth1,
        l.depth2,
        2.0 * l.aperture_halfwidth,
        2.0 * l.aperture_halfheight,
        l.plane_z
    );
    let _ = write!(out, "[projector]\ncenter = {}\nradius = {}\n\n", vec_text(p.aperture_center), p.aperture_radius);
    let _ = write!(
        out,
        "[camera]\npupil_center = {}\npupil_diameter = {}\nfocal_length = {}\nfocus_distance = {}\n\
         sensor_width_px = {}\nsensor_height_px = {}\nhorizontal_fov = {}\nlook_dir = {}\nup = {}\n\n",
        vec_text(c.pupil_center),
        c.pupil_diameter,
        c.focal_length,
        c.focus_distance,
        c.sensor_width_px,
        c.sensor_height_px,
        c.horizontal_fov,
        vec_text(c.look_dir),
        vec_text(c.up)
    );
    for pt in &doc.scene.points {
        let _ = write!(out, "[point]\npos = {}\ncolor = {}\n\n", vec_text(pt.display_pos), rgb_text(pt.color));
    }
    for card in &doc.scene.cards {
        let _ = write!(
            out,
            "[card]\ncenter = {}\nhalfwidth = {}\nhalfheight = {}\nnormal = {}\n",
            vec_text(card.center),
            card.halfwidth,
            card.halfheight,
            vec_text(card.normal)
        );
        match &card.material {
            CardMaterial::Solid(col) => {
                let _ = writeln!(out, "color = {}\n", rgb_text(*col));
            }
            CardMaterial::Texture { path, .. } => {
                let _ = writeln!(out, "texture = {path}\n");
            }
        }
    }
    let _ = writeln!(out, "[background]\nrgb = {}", rgb_text(doc.scene.background));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = "\
[lens]
pitch_x = 0.0005
pitch_y = 0.0005
depth1 = 0.002
depth2 = 0.002
aperture_w = 0.2
aperture_h = 0.15
plane_z = 0

[projector]
center = 0, 0, -1
radius = 0.05

[camera]
pupil_center = 0, 0, 1
pupil_diameter = 0.004
focal_length = 0.025
focus_distance = 1.5
sensor_width_px = 64
sensor_height_px = 48
horizontal_fov = 0.2
look_dir = 0, 0, -1
up = 0, 1, 0

[card]  # the only card
center = 0, 0, -0.5
halfwidth = 0.05
halfheight = 0.04
normal = 0, 0, 1
color = 0, 1, 0

[background]
rgb = 0, 0, 0
";

    fn no_textures(_: &str) -> Result<Texture, String> {
        Err("textures not available".into())
    }

    fn parse(text: &str) -> Result<SceneDocument, Vec<Diagnostic>> {
        parse_scene(text.as_bytes(), &mut no_textures)
    }

    #[test]
    fn parses_minimal() {
        let doc = parse(MINIMAL).unwrap();
        assert_eq!(doc.scene.cards.len(), 1);
        assert_eq!(doc.scene.lens.aperture_halfwidth, 0.1);
        assert_eq!(doc.camera.sensor_width_px, 64);
        assert_eq!(doc.scene.cards[0].material, CardMaterial::Solid(Rgb::new(0.0, 1.0, 0.0)));
    }

    #[test]
    fn negative_pitch_is_reported_at_its_line() {
        let text = MINIMAL.replace("pitch_x = 0.0005", "pitch_x = -1");
        let d = parse(&text).unwrap_err();
        assert_eq!(d.len(), 1, "{d:?}");
        assert_eq!(d[0].line, Some(2));
        assert!(d[0].message.contains("pitch must be positive"), "{}", d[0].message);
    }

    #[test]
    fn syntax_errors_carry_columns() {
        let text = MINIMAL.replace("radius = 0.05", "radius = 0,05");
        let d = parse(&text).unwrap_err();
        assert_eq!((d[0].line, d[0].column), (Some(12), Some(10)));

        let text = MINIMAL.replace("depth2 = 0.002", "  depth2 0.002");
        let d = parse(&text).unwrap_err();
        assert_eq!((d[0].line, d[0].column), (Some(5), Some(3)));
    }

    #[test]
    fn rejects_unknown_duplicate_and_missing() {
        let d = parse(&MINIMAL.replace("plane_z = 0", "plane_z = 0\nfoo = 1")).unwrap_err();
        assert!(d[0].message.contains("unknown key 'foo'"));

        let d = parse(&MINIMAL.replace("plane_z = 0", "plane_z = 0\nplane_z = 1")).unwrap_err();
        assert!(d[0].message.contains("duplicate key"));

        let d = parse(&MINIMAL.replace("radius = 0.05\n", "")).unwrap_err();
        assert!(d[0].message.contains("missing required key 'radius'"));

        let d = parse(&MINIMAL.replace("[background]\nrgb = 0, 0, 0\n", "")).unwrap_err();
        assert_eq!(d[0].line, None);

        let d = parse(&MINIMAL.replace("[lens]", "[lense]")).unwrap_err();
        assert!(d.iter().any(|x| x.message.contains("unknown section")));
    }

    #[test]
    fn rejects_non_finite_and_comma_decimal() {
        for bad in ["inf", "NaN", "1,5", "1e999"] {
            let d = parse(&MINIMAL.replace("focal_length = 0.025", &format!("focal_length = {bad}"))).unwrap_err();
            assert_eq!(d[0].line, Some(17), "{bad}");
        }
    }

    #[test]
    fn camera_problems_point_at_the_key() {
        let d = parse(&MINIMAL.replace("pupil_diameter = 0.004", "pupil_diameter = 0")).unwrap_err();
        assert_eq!(d[0].line, Some(16));
        let d = parse(&MINIMAL.replace("up = 0, 1, 0", "up = 0, 0, 0")).unwrap_err();
        assert_eq!(d[0].line, Some(23));
    }

    #[test]
    fn semantic_card_problem_points_at_the_card() {
        let d = parse(&MINIMAL.replace("halfwidth = 0.05", "halfwidth = -0.05")).unwrap_err();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].line, Some(27));
        assert!(d[0].message.contains("halfwidth must be positive"));
    }

    #[test]
    fn texture_loader_is_used() {
        let text = MINIMAL.replace("color = 0, 1, 0", "texture = t.ppm");
        let mut calls = Vec::new();
        let mut loader = |p: &str| {
            calls.push(p.to_string());
            Texture::new(1, 1, vec![Some(Rgb::WHITE)]).map_err(|e| e.to_string())
        };
        let doc = parse_scene(text.as_bytes(), &mut loader).unwrap();
        assert_eq!(calls, vec!["t.ppm"]);
        assert!(matches!(doc.scene.cards[0].material, CardMaterial::Texture { .. }));
        let d = parse(&text).unwrap_err();
        assert!(d[0].message.contains("textures not available"));
    }

    #[test]
    fn invalid_utf8_is_located() {
        let mut bytes = b"[lens]\npitch_x = ".to_vec();
        bytes.push(0xff);
        let d = parse_scene(&bytes, &mut no_textures).unwrap_err();
        assert_eq!((d[0].line, d[0].column), (Some(2), Some(11)));
    }

    #[test]
    fn serialize_round_trips() {
        let doc = parse(MINIMAL).unwrap();
        let again = parse(&serialize_scene(&doc)).unwrap();
        assert_eq!(doc, again);
    }
}
