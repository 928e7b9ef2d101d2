use criterion::{black_box, criterion_group, criterion_main, Criterion};
use ghd_core::{
    fold_channel, render, trace_ideal, trace_micro, Card, CardMaterial, LensMode, LensSpec, Projector, Ray,
    RenderOptions, Rgb, Scene, ThinLensCamera, Vec3,
};

fn fold(c: &mut Criterion) {
    c.bench_function("fold_channel", |b| {
        b.iter(|| fold_channel(black_box(1.3e-4), black_box(0.27), black_box(2e-3), black_box(5e-4)))
    });
}

fn trace(c: &mut Criterion) {
    let lens = LensSpec::default();
    let ray = Ray::new(Vec3::new(0.01, -0.02, -1.0), Vec3::new(0.05, 0.08, 1.0)).unwrap();
    c.bench_function("trace_ideal", |b| b.iter(|| trace_ideal(black_box(&ray), &lens)));
    c.bench_function("trace_micro", |b| b.iter(|| trace_micro(black_box(&ray), &lens)));
}

fn small_render(c: &mut Criterion) {
    let card = |z: f64, hw: f64, color: Rgb| Card {
        center: Vec3::new(0.0, 0.0, z),
        halfwidth: hw,
        halfheight: hw,
        normal: Vec3::Z,
        material: CardMaterial::Solid(color),
    };
    let scene = Scene {
        points: Vec::new(),
        cards: vec![card(0.5, 0.01, Rgb::new(1.0, 0.0, 0.0)), card(-2.0, 0.2, Rgb::new(0.0, 0.0, 1.0))],
        lens: LensSpec::default(),
        projector: Projector { aperture_center: Vec3::new(0.0, 0.0, -1.0), aperture_radius: 0.05 },
        background: Rgb::new(0.0, 0.0, 0.0),
    };
    let cam = ThinLensCamera {
        pupil_center: Vec3::new(0.0, 0.0, 1.0),
        pupil_diameter: 0.004,
        focal_length: 0.025,
        focus_distance: 1.5,
        sensor_width_px: 64,
        sensor_height_px: 48,
        horizontal_fov: 12f64.to_radians(),
        look_dir: Vec3::new(0.0, 0.0, -1.0),
        up: Vec3::Y,
    };
    let mut group = c.benchmark_group("render_64x48");
    group.sample_size(20);
    for (name, mode) in [("ideal", LensMode::IdealLens), ("micro", LensMode::MicroLens)] {
        let opts = RenderOptions { mode, rays_per_pixel: 8, ..RenderOptions::default() };
        group.bench_function(name, |b| b.iter(|| render(&scene, &cam, &opts).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, fold, trace, small_render);
criterion_main!(benches);
