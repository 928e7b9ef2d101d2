//! Command-line front end: scene files, experiment presets and report output.
//!
//! [`run`] is the whole program; `main` only forwards the process arguments and
//! streams. Exit codes are 0 on success, 1 for diagnostics and usage errors and
//! 2 when reading or writing a file fails.

pub mod presets;
pub mod scenefile;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ghd_core::{
    lightfield::PlaneFrame, ppm, reduction_report, render, trace_ideal, trace_micro, visual_window, in_window,
    BudgetConfig, LensMode, PupilDisk, PupilSet, Ray, Rect, RenderOptions, TwoPlaneParam, Vec3,
};

use scenefile::{parse_scene, Diagnostic, SceneDocument};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIAGNOSTICS: i32 = 1;
pub const EXIT_IO: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}", render_diagnostics(.path, .diagnostics))]
    Diagnostics { path: PathBuf, diagnostics: Vec<Diagnostic> },
    #[error(transparent)]
    Core(#[from] ghd_core::Error),
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Core(ghd_core::Error::Io(_)) => EXIT_IO,
            _ => EXIT_DIAGNOSTICS,
        }
    }
}

fn render_diagnostics(path: &Path, diagnostics: &[Diagnostic]) -> String {
    diagnostics.iter().map(|d| format!("{}:{d}", path.display())).collect::<Vec<_>>().join("\n")
}

#[derive(Debug, Parser)]
#[command(name = "ghd", version, about = "Geometrical holographic display simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Ideal,
    Micro,
}

impl From<Mode> for LensMode {
    fn from(m: Mode) -> LensMode {
        match m {
            Mode::Ideal => LensMode::IdealLens,
            Mode::Micro => LensMode::MicroLens,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RenderFlags {
    #[arg(long, value_enum, default_value_t = Mode::Ideal)]
    pub mode: Mode,
    /// Keep non-imaging micro-lens rays.
    #[arg(long)]
    pub ghosts: bool,
    #[arg(long, default_value_t = 16)]
    pub rays: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Radius of the sphere drawn for each scene point, meters.
    #[arg(long, default_value_t = 1e-3)]
    pub point_radius: f64,
}

impl RenderFlags {
    fn options(&self) -> RenderOptions {
        RenderOptions {
            mode: self.mode.into(),
            include_ghosts: self.ghosts,
            rays_per_pixel: self.rays,
            seed: self.seed,
            point_radius: self.point_radius,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render the scene as seen by its camera.
    Render {
        scene: PathBuf,
        #[command(flatten)]
        flags: RenderFlags,
        #[arg(long, default_value = "render.ppm")]
        out: PathBuf,
    },
    /// Print the visual window of the scene's projector.
    Window { scene: PathBuf },
    /// Trace one ray from the projector side through the lens.
    Trace {
        scene: PathBuf,
        #[arg(long, value_parser = parse_vec3_arg, allow_hyphen_values = true)]
        from: Vec3,
        #[arg(long, value_parser = parse_vec3_arg, allow_hyphen_values = true)]
        dir: Vec3,
        #[arg(long, value_enum, default_value_t = Mode::Micro)]
        mode: Mode,
    },
    /// Light-field sample budget of pupil-restricted versus full rendering.
    Budget {
        #[arg(long)]
        nu: u32,
        #[arg(long)]
        nv: u32,
        #[arg(long)]
        ns: u32,
        #[arg(long)]
        nt: u32,
        /// Pupil disk `cx,cy,r` on the st plane; repeatable.
        #[arg(long = "pupil", value_parser = parse_vec3_arg, allow_hyphen_values = true)]
        pupils: Vec<Vec3>,
        #[arg(long, default_value_t = 0.3)]
        st_width: f64,
        #[arg(long, default_value_t = 0.2)]
        st_height: f64,
        #[arg(long, default_value_t = 0.3)]
        uv_width: f64,
        #[arg(long, default_value_t = 0.2)]
        uv_height: f64,
        /// Distance from the uv plane to the st plane.
        #[arg(long, default_value_t = 1.0)]
        separation: f64,
        #[arg(long, default_value_t = 3)]
        bytes_per_sample: u32,
        /// Print CSV instead of aligned text.
        #[arg(long)]
        csv: bool,
    },
    /// Two-view occlusion and parallax experiment.
    Fig4 {
        scene: PathBuf,
        #[command(flatten)]
        flags: RenderFlags,
        /// Lateral pupil offset of each view from the scene camera, meters.
        #[arg(long, default_value_t = 0.01)]
        offset: f64,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Focus sweep with a sharpness-versus-focus report.
    Fig6 {
        scene: PathBuf,
        #[command(flatten)]
        flags: RenderFlags,
        #[arg(long, default_value_t = 0.5)]
        from: f64,
        #[arg(long, default_value_t = 8.0)]
        to: f64,
        #[arg(long, default_value_t = 0.25)]
        step: f64,
        /// Skip writing the frame images.
        #[arg(long)]
        no_frames: bool,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Imaging fraction and micro/ideal image difference versus lens pitch.
    SweepPitch {
        scene: PathBuf,
        #[command(flatten)]
        flags: RenderFlags,
        /// Factors applied to the scene's pitches and depths.
        #[arg(long, value_delimiter = ',', default_values_t = vec![4.0, 2.0, 1.0, 0.5])]
        scales: Vec<f64>,
        /// Incidence direction for the imaging fraction.
        #[arg(long, value_parser = parse_vec3_arg, default_value = "0.1,0.1,1")]
        dir: Vec3,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

fn parse_vec3_arg(s: &str) -> Result<Vec3, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err("expected three comma-separated numbers".into());
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(parts) {
        *slot = p.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| format!("'{p}' is not a finite number"))?;
    }
    Ok(Vec3::new(v[0], v[1], v[2]))
}

/// Reads and parses a scene file; textures resolve relative to its directory.
pub fn load_scene(path: &Path) -> Result<SceneDocument, CliError> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let mut loader = |rel: &str| ppm::read_texture(&dir.join(rel)).map_err(|e| e.to_string());
    parse_scene(&bytes, &mut loader).map_err(|diagnostics| CliError::Diagnostics { path: path.to_path_buf(), diagnostics })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })
}

fn io_out(e: std::io::Error) -> CliError {
    CliError::Io { path: PathBuf::from("<stdout>"), source: e }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_DIAGNOSTICS
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Render { scene, flags, out: path } => {
            let doc = load_scene(&scene)?;
            let image = render(&doc.scene, &doc.camera, &flags.options())?;
            write_file(&path, &ppm::encode(&image))?;
            writeln!(out, "wrote {}", path.display()).map_err(io_out)?;
        }
        Command::Window { scene } => {
            let doc = load_scene(&scene)?;
            let p = &doc.scene.projector;
            let w = visual_window(p.aperture_center, p.aperture_radius, &doc.scene.lens)?;
            writeln!(out, "center   {}", w.center).map_err(io_out)?;
            writeln!(out, "radius   {}", w.radius).map_err(io_out)?;
            writeln!(out, "normal   {}", w.normal).map_err(io_out)?;
            writeln!(out, "camera   {}", if in_window(&doc.camera, &w) { "inside" } else { "outside" })
                .map_err(io_out)?;
        }
        Command::Trace { scene, from, dir, mode } => {
            let doc = load_scene(&scene)?;
            if !(dir.z > 0.0) {
                return Err(CliError::Usage("--dir must point toward the viewer (positive z)".into()));
            }
            let ray = Ray::new(from, dir)?;
            let lens = &doc.scene.lens;
            let line = match mode {
                Mode::Ideal => trace_ideal(&ray, lens)
                    .map(|r| format!("class    Imaging\norigin   {}\ndir      {}", r.origin, r.dir)),
                Mode::Micro => trace_micro(&ray, lens).map(|c| {
                    format!(
                        "class    {}\nbounces  {} {}\norigin   {}\ndir      {}",
                        c.class, c.reflections.0, c.reflections.1, c.ray.origin, c.ray.dir
                    )
                }),
            };
            writeln!(out, "{}", line.as_deref().unwrap_or("missed the lens aperture")).map_err(io_out)?;
        }
        Command::Budget {
            nu,
            nv,
            ns,
            nt,
            pupils,
            st_width,
            st_height,
            uv_width,
            uv_height,
            separation,
            bytes_per_sample,
            csv,
        } => {
            if !(separation > 0.0 && separation.is_finite()) {
                return Err(CliError::Usage("--separation must be positive".into()));
            }
            let cfg = BudgetConfig { n_u: nu, n_v: nv, n_s: ns, n_t: nt, bytes_per_sample };
            let param = TwoPlaneParam {
                uv_plane: PlaneFrame::at_z(0.0, uv_width, uv_height),
                st_plane: PlaneFrame::at_z(separation, st_width, st_height),
            };
            let set = PupilSet {
                disks: pupils.iter().map(|p| PupilDisk { center: Vec3::new(p.x, p.y, separation), radius: p.z }).collect(),
            };
            let r = reduction_report(&cfg, &param, &set)?;
            let text = if csv {
                format!("{}\n{}\n", ghd_core::ReductionReport::CSV_HEADER, r.csv_row())
            } else {
                format!(
                    "full_samples   {}\npupil_samples  {}\nfull_bytes     {}\npupil_bytes    {}\nratio          {}\n",
                    r.full_samples, r.pupil_samples, r.full_bytes, r.pupil_bytes, r.ratio
                )
            };
            write!(out, "{text}").map_err(io_out)?;
        }
        Command::Fig4 { scene, flags, offset, out_dir } => {
            let doc = load_scene(&scene)?;
            let report = presets::parallax(&doc, &flags.options(), offset)?;
            ensure_dir(&out_dir)?;
            write_file(&out_dir.join("fig4_a.ppm"), &ppm::encode(&report.view_a))?;
            write_file(&out_dir.join("fig4_b.ppm"), &ppm::encode(&report.view_b))?;
            let csv = report.csv();
            write_file(&out_dir.join("fig4_parallax.csv"), csv.as_bytes())?;
            write!(out, "{csv}").map_err(io_out)?;
            writeln!(out, "exposed_px {}", report.exposed_px).map_err(io_out)?;
        }
        Command::Fig6 { scene, flags, from, to, step, no_frames, out_dir } => {
            let doc = load_scene(&scene)?;
            let distances = presets::focus_distances(from, to, step)?;
            let w = doc.camera.sensor_width_px as usize;
            let h = doc.camera.sensor_height_px as usize;
            ensure_dir(&out_dir)?;
            let rows = presets::focus_sweep(&doc, &flags.options(), &distances, Rect::central_half(w, h), |i, _, img| {
                if no_frames {
                    return Ok(());
                }
                write_file(&out_dir.join(format!("fig6_{i:03}.ppm")), &ppm::encode(img))
            })??;
            let csv = presets::sweep_csv(&rows);
            write_file(&out_dir.join("fig6_sharpness.csv"), csv.as_bytes())?;
            write!(out, "{csv}").map_err(io_out)?;
            if let Some(best) = presets::sharpest(&rows) {
                writeln!(out, "sharpest focus_distance_m {}", best.focus_distance_m).map_err(io_out)?;
            }
        }
        Command::SweepPitch { scene, flags, scales, dir, samples, out_dir } => {
            let doc = load_scene(&scene)?;
            let rows = presets::pitch_sweep(&doc, &flags.options(), &scales, dir, samples)?;
            ensure_dir(&out_dir)?;
            let csv = presets::pitch_csv(&rows);
            write_file(&out_dir.join("sweep_pitch.csv"), csv.as_bytes())?;
            write!(out, "{csv}").map_err(io_out)?;
        }
    }
    Ok(())
}
