use std::path::Path;
use std::sync::Arc;

use ghd_core::{
    in_window, ppm, render, sharpness, visual_window, Card, CardMaterial, Image, LensMode, LensSpec, Projector, Rect,
    RenderOptions, Rgb, Scene, ScenePoint, Texture, ThinLensCamera, Vec3,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn camera(width: u32, height: u32) -> ThinLensCamera {
    ThinLensCamera {
        pupil_center: Vec3::new(0.0, 0.0, 1.0),
        pupil_diameter: 0.004,
        focal_length: 0.025,
        focus_distance: 1.5,
        sensor_width_px: width,
        sensor_height_px: height,
        horizontal_fov: 12f64.to_radians(),
        look_dir: Vec3::new(0.0, 0.0, -1.0),
        up: Vec3::Y,
    }
}

fn solid(center: Vec3, hw: f64, hh: f64, color: Rgb) -> Card {
    Card { center, halfwidth: hw, halfheight: hh, normal: Vec3::Z, material: CardMaterial::Solid(color) }
}

fn base_scene() -> Scene {
    Scene {
        points: Vec::new(),
        cards: vec![
            solid(Vec3::new(-0.01, -0.01, 0.5), 0.012, 0.012, Rgb::new(1.0, 0.0, 0.0)),
            solid(Vec3::new(0.05, 0.04, -0.5), 0.04, 0.03, Rgb::new(0.0, 1.0, 0.0)),
            solid(Vec3::new(0.0, 0.0, -2.0), 0.2, 0.15, Rgb::new(0.0, 0.0, 1.0)),
        ],
        lens: LensSpec::default(),
        projector: Projector { aperture_center: Vec3::new(0.0, 0.0, -1.0), aperture_radius: 0.05 },
        background: Rgb::new(0.1, 0.1, 0.1),
    }
}

fn noise_texture(w: usize, h: usize, seed: u64) -> Arc<Texture> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let texels = (0..w * h).map(|_| Some(if rng.gen::<bool>() { Rgb::WHITE } else { Rgb::BLACK })).collect();
    Arc::new(Texture::new(w, h, texels).unwrap())
}

#[test]
fn outside_window_is_exactly_background() {
    let scene = base_scene();
    let w = visual_window(scene.projector.aperture_center, scene.projector.aperture_radius, &scene.lens).unwrap();
    let mut cam = camera(48, 36);
    for (dx, dy) in [(1.0, 0.0), (0.0, -1.0), (0.6, 0.8)] {
        let gap = w.radius + cam.pupil_radius() + 1e-3;
        cam.pupil_center = Vec3::new(dx * gap, dy * gap, 1.0);
        assert!(!in_window(&cam, &w));
        let img = render(&scene, &cam, &RenderOptions::default()).unwrap();
        let lit: Vec<_> = img.pixels.iter().enumerate().filter(|(_, &p)| p != scene.background).take(3).collect();
        assert!(lit.is_empty(), "{dx} {dy}: {lit:?}");
    }
    cam.pupil_center = Vec3::new(0.0, 0.0, 1.0);
    let img = render(&scene, &cam, &RenderOptions::default()).unwrap();
    assert!(img.pixels.iter().any(|&p| p != scene.background));
}

/// Colour along the chief ray of pixel `(i, j)`: every card hit sorted by distance.
fn chief_ray_oracle(scene: &Scene, cam: &ThinLensCamera, i: usize, j: usize) -> Rgb {
    let (w, h) = (cam.sensor_width_px as f64, cam.sensor_height_px as f64);
    let th = (0.5 * cam.horizontal_fov).tan();
    let tv = th * h / w;
    let sx = 2.0 * (i as f64 + 0.5) / w - 1.0;
    let sy = 1.0 - 2.0 * (j as f64 + 0.5) / h;
    let d = Vec3::new(sx * th, sy * tv, -1.0);
    let d = d / d.norm();
    let o = cam.pupil_center;

    let t_lens = (scene.lens.plane_z - o.z) / d.z;
    let at_lens = o + d * t_lens;
    if at_lens.x.abs() > scene.lens.aperture_halfwidth || at_lens.y.abs() > scene.lens.aperture_halfheight {
        return scene.background;
    }

    let mut hits: Vec<(f64, Rgb)> = Vec::new();
    for card in &scene.cards {
        let n = card.normal;
        let t = (card.center - o).dot(n) / d.dot(n);
        if !(t > 0.0) {
            continue;
        }
        let u = Vec3::Y.cross(n);
        let u = u / u.norm();
        let v = n.cross(u);
        let local = o + d * t - card.center;
        let (a, b) = (local.dot(u), local.dot(v));
        if a.abs() > card.halfwidth || b.abs() > card.halfheight {
            continue;
        }
        let color = match &card.material {
            CardMaterial::Solid(c) => Some(*c),
            CardMaterial::Texture { texture, .. } => {
                texture.sample(0.5 * (a / card.halfwidth + 1.0), 0.5 * (1.0 - b / card.halfheight))
            }
        };
        if let Some(c) = color {
            hits.push((t, c));
        }
    }
    hits.sort_by(|x, y| x.0.total_cmp(&y.0));
    hits.first().map_or(scene.background, |h| h.1)
}

#[test]
fn occlusion_matches_sorted_intersections() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut cam = camera(40, 30);
    cam.pupil_diameter = 1e-9;
    let opts = RenderOptions { rays_per_pixel: 1, ..RenderOptions::default() };
    for trial in 0..20 {
        let mut scene = base_scene();
        scene.cards.clear();
        for k in 0..6 {
            let n = Vec3::new(rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4), 1.0);
            let center = Vec3::new(rng.gen_range(-0.05..0.05), rng.gen_range(-0.04..0.04), rng.gen_range(-1.0..0.7));
            let material = if k % 3 == 0 {
                // Textured cards with holes: transparent texels must not occlude.
                let mut tex = (*noise_texture(4, 4, trial * 10 + k)).clone();
                let texels: Vec<Option<Rgb>> =
                    tex.texels().iter().enumerate().map(|(i, &t)| if i % 3 == 0 { None } else { t }).collect();
                tex = Texture::new(4, 4, texels).unwrap();
                CardMaterial::Texture { path: String::new(), texture: Arc::new(tex) }
            } else {
                CardMaterial::Solid(Rgb::new(rng.gen(), rng.gen(), rng.gen()))
            };
            scene.cards.push(Card {
                center,
                halfwidth: rng.gen_range(0.01..0.04),
                halfheight: rng.gen_range(0.01..0.04),
                normal: n / n.norm(),
                material,
            });
        }
        let img = render(&scene, &cam, &opts).unwrap();
        for j in 0..30 {
            for i in 0..40 {
                let want = chief_ray_oracle(&scene, &cam, i, j);
                let got = img.get(i, j);
                assert!(
                    (got.r - want.r).abs() < 1e-12 && (got.g - want.g).abs() < 1e-12 && (got.b - want.b).abs() < 1e-12,
                    "trial {trial} pixel ({i}, {j}): {got:?} vs {want:?}"
                );
            }
        }
    }
}

fn point_scene(points: Vec<ScenePoint>) -> Scene {
    Scene { points, cards: Vec::new(), background: Rgb::BLACK, ..base_scene() }
}

#[test]
fn point_is_sharpest_at_its_display_distance() {
    for z in [0.3, -0.3] {
        let scene = point_scene(vec![ScenePoint { display_pos: Vec3::new(0.0, 0.0, z), color: Rgb::WHITE }]);
        // Points a couple of pixels wide blur visibly within one focus step.
        let mut cam = camera(160, 120);
        cam.pupil_diameter = 0.04;
        let opts = RenderOptions { rays_per_pixel: 64, point_radius: 2e-3, ..RenderOptions::default() };
        let target = 1.0 - z;
        let mut best = (0.0, f64::NEG_INFINITY);
        for k in 0..13 {
            let f = 0.4 + 0.1 * k as f64;
            let img = render(&scene, &cam.with_focus(f), &opts).unwrap();
            let s = sharpness(&img, Rect::new(70, 50, 20, 20)).unwrap();
            if s > best.1 {
                best = (f, s);
            }
        }
        assert!((best.0 - target).abs() <= 0.1 + 1e-9, "point at {z}: sharpest at {} m, want {target} m", best.0);
    }
}

#[test]
fn card_at_six_metres_is_sharper_when_focused_there() {
    let mut scene = base_scene();
    scene.cards = vec![Card {
        center: Vec3::new(0.0, 0.0, -5.0),
        halfwidth: 0.4,
        halfheight: 0.3,
        normal: Vec3::Z,
        material: CardMaterial::Texture { path: String::new(), texture: noise_texture(80, 60, 9) },
    }];
    let mut cam = camera(160, 120);
    cam.pupil_diameter = 0.08;
    cam.horizontal_fov = 10f64.to_radians();
    let opts = RenderOptions { rays_per_pixel: 16, ..RenderOptions::default() };
    let region = Rect::central_half(160, 120);
    let near = sharpness(&render(&scene, &cam.with_focus(1.0), &opts).unwrap(), region).unwrap();
    let far = sharpness(&render(&scene, &cam.with_focus(6.0), &opts).unwrap(), region).unwrap();
    assert!(far > near, "focus 6 m: {far}, focus 1 m: {near}");
}

/// Oblique view through the lens center with incidence slope 0.3 on both
/// axes, where most rays take one bounce per layer.
fn oblique_setup() -> (Scene, ThinLensCamera) {
    let eye = Vec3::new(0.3, 0.3, 1.0);
    let look = (-eye).normalized().unwrap();
    let card = |dist: f64, hw: f64, color: Rgb| Card {
        center: eye + look * dist,
        halfwidth: hw,
        halfheight: hw,
        normal: -look,
        material: CardMaterial::Solid(color),
    };
    let scene = Scene {
        points: Vec::new(),
        cards: vec![card(1.6, 0.03, Rgb::new(1.0, 0.2, 0.2)), card(2.5, 0.12, Rgb::new(0.2, 0.9, 0.3))],
        lens: LensSpec::default(),
        projector: Projector { aperture_center: Vec3::new(0.3, 0.3, -1.0), aperture_radius: 0.05 },
        background: Rgb::new(0.1, 0.1, 0.1),
    };
    let cam = ThinLensCamera { pupil_center: eye, look_dir: look, focus_distance: 2.0, ..camera(80, 60) };
    (scene, cam)
}

#[test]
fn micro_lens_render_converges_to_ideal() {
    let (scene, cam) = oblique_setup();
    let opts = RenderOptions { rays_per_pixel: 16, seed: 3, ..RenderOptions::default() };
    let ideal = render(&scene, &cam, &opts).unwrap();
    let mut diffs = Vec::new();
    for pitch in [2e-3, 1e-3, 0.5e-3] {
        let mut s = scene.clone();
        let depth = pitch / 0.3;
        s.lens = LensSpec { pitch_x: pitch, pitch_y: pitch, depth1: depth, depth2: depth, ..s.lens };
        let micro = render(&s, &cam, &RenderOptions { mode: LensMode::MicroLens, ..opts }).unwrap();
        diffs.push(micro.mean_abs_difference(&ideal).unwrap());
    }
    assert!(diffs[0] > diffs[1] && diffs[1] > diffs[2], "{diffs:?}");
}

#[test]
fn mirror_grid_shows_when_focused_on_the_lens() {
    let (mut scene, cam) = oblique_setup();
    // One large uniform card fills the view, so any structure comes from the lens.
    scene.cards = vec![Card { halfwidth: 0.5, halfheight: 0.5, ..scene.cards[1].clone() }];
    let pitch = 2e-3;
    scene.lens = LensSpec { pitch_x: pitch, pitch_y: pitch, depth1: pitch / 0.3, depth2: pitch / 0.3, ..scene.lens };
    let cam = ThinLensCamera { sensor_width_px: 160, sensor_height_px: 120, ..cam };
    let on_lens = cam.with_focus(cam.pupil_center.norm());
    let on_card = cam.with_focus(2.5);
    let region = Rect::central_half(160, 120);
    // Enough rays that per-pixel sampling noise sits well below the grid contrast.
    let opts = RenderOptions { rays_per_pixel: 256, mode: LensMode::MicroLens, ..RenderOptions::default() };
    let grid = sharpness(&render(&scene, &on_lens, &opts).unwrap(), region).unwrap();
    let card = sharpness(&render(&scene, &on_card, &opts).unwrap(), region).unwrap();
    let ideal = RenderOptions { mode: LensMode::IdealLens, ..opts };
    let ideal_grid = sharpness(&render(&scene, &on_lens, &ideal).unwrap(), region).unwrap();
    assert!(grid > card, "focused on lens {grid}, on card {card}");
    assert!(grid > ideal_grid, "micro {grid}, ideal {ideal_grid}");
}

#[test]
fn ghosts_add_light() {
    let scene = base_scene();
    let cam = camera(40, 30);
    let opts = RenderOptions { mode: LensMode::MicroLens, rays_per_pixel: 4, ..RenderOptions::default() };
    let lum = |img: &Image| img.pixels.iter().map(|p| p.luminance()).sum::<f64>();
    let plain = render(&scene, &cam, &opts).unwrap();
    let ghosts = render(&scene, &cam, &RenderOptions { include_ghosts: true, ..opts }).unwrap();
    assert!(plain.pixels.iter().any(|&p| p != scene.background));
    assert!(lum(&ghosts) > lum(&plain));
}

#[test]
fn identical_seeds_give_identical_images_at_any_thread_count() {
    let scene = base_scene();
    let cam = camera(64, 48);
    for mode in [LensMode::IdealLens, LensMode::MicroLens] {
        let opts = RenderOptions { mode, rays_per_pixel: 8, seed: 99, ..RenderOptions::default() };
        let a = render(&scene, &cam, &opts).unwrap();
        let b = render(&scene, &cam, &opts).unwrap();
        let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = serial.install(|| render(&scene, &cam, &opts).unwrap());
        let wide = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let d = wide.install(|| render(&scene, &cam, &opts).unwrap());
        assert_eq!(ppm::encode(&a), ppm::encode(&b));
        assert_eq!(ppm::encode(&a), ppm::encode(&c));
        assert_eq!(ppm::encode(&a), ppm::encode(&d));
        let other = render(&scene, &cam, &RenderOptions { seed: 100, ..opts }).unwrap();
        assert_ne!(ppm::encode(&a), ppm::encode(&other));
    }
}

/// Regression guard: a small render must stay bit-identical. Set
/// `GHD_BLESS=1` to rewrite the golden file after an intended change.
#[test]
fn golden_render() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/demo_32x24.ppm");
    let mut scene = base_scene();
    scene.points.push(ScenePoint { display_pos: Vec3::new(0.02, -0.02, 0.2), color: Rgb::new(1.0, 1.0, 0.0) });
    let opts = RenderOptions { rays_per_pixel: 4, seed: 1, ..RenderOptions::default() };
    let bytes = ppm::encode(&render(&scene, &camera(32, 24), &opts).unwrap());
    if std::env::var_os("GHD_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, &bytes).unwrap();
    }
    let golden = std::fs::read(&path).expect("golden file missing; run with GHD_BLESS=1");
    assert_eq!(bytes, golden);
    assert_eq!(ppm::decode(&golden).unwrap().width, 32);
}

#[test]
fn invalid_inputs_fail_before_rendering() {
    let mut scene = base_scene();
    scene.cards[0].halfwidth = 0.0;
    assert!(matches!(
        render(&scene, &camera(8, 6), &RenderOptions::default()),
        Err(ghd_core::Error::InvalidScene(d)) if d.len() == 1
    ));
    let mut cam = camera(8, 6);
    cam.focus_distance = 0.01;
    assert!(matches!(render(&base_scene(), &cam, &RenderOptions::default()), Err(ghd_core::Error::InvalidCamera(_))));
    let opts = RenderOptions { rays_per_pixel: 0, ..RenderOptions::default() };
    assert!(render(&base_scene(), &camera(8, 6), &opts).is_err());
}
