//! Two-plane light-field parameterization and the sample budget of keeping
//! only lines that pass through a viewer's pupils.
//!
//! A line is described by where it crosses the `uv` plane and the `st` plane.
//! Storing every `(u, v, s, t)` grid sample is the full representation;
//! restricting `(s, t)` to the pupil disks keeps every line that can reach an
//! eye and nothing else.

use crate::geometry::{Ray, Vec3};
use crate::{Error, Result};

/// A bounded plane centered on `origin`, spanned by orthonormal `u_axis` and `v_axis`.
/// Local coordinates run over `[-width/2, width/2] x [-height/2, height/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneFrame {
    pub origin: Vec3,
    pub u_axis: Vec3,
    pub v_axis: Vec3,
    pub width: f64,
    pub height: f64,
}

impl PlaneFrame {
    /// Plane `z = z` with the world x and y axes.
    pub fn at_z(z: f64, width: f64, height: f64) -> PlaneFrame {
        PlaneFrame { origin: Vec3::new(0.0, 0.0, z), u_axis: Vec3::X, v_axis: Vec3::Y, width, height }
    }

    pub fn normal(&self) -> Vec3 {
        self.u_axis.cross(self.v_axis)
    }

    pub fn local(&self, p: Vec3) -> (f64, f64) {
        let d = p - self.origin;
        (d.dot(self.u_axis), d.dot(self.v_axis))
    }

    pub fn point(&self, a: f64, b: f64) -> Vec3 {
        self.origin + self.u_axis * a + self.v_axis * b
    }

    fn problems(&self, name: &str) -> Vec<String> {
        let mut out = Vec::new();
        let ortho = self.u_axis.is_unit() && self.v_axis.is_unit() && self.u_axis.dot(self.v_axis).abs() <= 1e-12;
        if !ortho {
            out.push(format!("{name} basis vectors must be orthonormal"));
        }
        if !(self.width > 0.0 && self.height > 0.0 && self.width.is_finite() && self.height.is_finite()) {
            out.push(format!("{name} extent must be positive"));
        }
        if !self.origin.is_finite() {
            out.push(format!("{name} origin must be finite"));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPlaneParam {
    pub uv_plane: PlaneFrame,
    pub st_plane: PlaneFrame,
}

impl TwoPlaneParam {
    pub fn validate(&self) -> Result<()> {
        let mut problems = self.uv_plane.problems("uv plane");
        problems.extend(self.st_plane.problems("st plane"));
        if problems.is_empty() {
            let n = self.uv_plane.normal();
            if self.st_plane.normal().cross(n).norm() > 1e-12 {
                problems.push("uv and st planes must be parallel".into());
            } else if (self.st_plane.origin - self.uv_plane.origin).dot(n).abs() <= 1e-12 {
                problems.push("uv and st planes must not coincide".into());
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::precondition(problems.join("; ")))
        }
    }
}

/// Plane-local coordinates of a line's two crossings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineParams {
    pub u: f64,
    pub v: f64,
    pub s: f64,
    pub t: f64,
}

impl LineParams {
    /// A ray carrying the line, starting on the uv plane and heading toward the st crossing.
    pub fn to_ray(&self, param: &TwoPlaneParam) -> Result<Ray> {
        let a = param.uv_plane.point(self.u, self.v);
        let b = param.st_plane.point(self.s, self.t);
        Ray::new(a, b - a)
    }
}

fn crossing(ray: &Ray, plane: &PlaneFrame) -> Option<(f64, f64)> {
    let n = plane.normal();
    let denom = ray.dir.dot(n);
    if denom.abs() <= 1e-12 {
        return None;
    }
    let t = (plane.origin - ray.origin).dot(n) / denom;
    Some(plane.local(ray.at(t)))
}

/// Coordinates of the line carrying `ray` on both planes, or `None` for lines
/// parallel to the planes. The whole line is used, so crossings behind the
/// ray origin count.
pub fn line_params(ray: &Ray, param: &TwoPlaneParam) -> Option<LineParams> {
    let (u, v) = crossing(ray, &param.uv_plane)?;
    let (s, t) = crossing(ray, &param.st_plane)?;
    Some(LineParams { u, v, s, t })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BudgetConfig {
    pub n_u: u32,
    pub n_v: u32,
    pub n_s: u32,
    pub n_t: u32,
    pub bytes_per_sample: u32,
}

impl BudgetConfig {
    pub fn validate(&self) -> Result<()> {
        if [self.n_u, self.n_v, self.n_s, self.n_t, self.bytes_per_sample].contains(&0) {
            return Err(Error::precondition("grid resolutions and bytes_per_sample must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PupilDisk {
    pub center: Vec3,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PupilSet {
    pub disks: Vec<PupilDisk>,
}

impl PupilSet {
    fn validate(&self, st: &PlaneFrame) -> Result<()> {
        let n = st.normal();
        for (i, d) in self.disks.iter().enumerate() {
            if !(d.radius >= 0.0 && d.radius.is_finite()) {
                return Err(Error::precondition(format!("pupil {i}: radius must be non-negative")));
            }
            if !d.center.is_finite() || (d.center - st.origin).dot(n).abs() > 1e-9 {
                return Err(Error::precondition(format!("pupil {i}: center must lie on the st plane")));
            }
        }
        Ok(())
    }
}

pub fn full_sample_count(cfg: &BudgetConfig) -> u128 {
    cfg.n_u as u128 * cfg.n_v as u128 * cfg.n_s as u128 * cfg.n_t as u128
}

/// Center of grid cell `index` out of `cells` spanning `[-extent/2, extent/2]`.
#[inline]
pub fn cell_center(index: u32, cells: u32, extent: f64) -> f64 {
    -0.5 * extent + (index as f64 + 0.5) * (extent / cells as f64)
}

/// Number of st grid cells whose center lies strictly inside at least one pupil disk.
fn covered_st_cells(cfg: &BudgetConfig, st: &PlaneFrame, pupils: &PupilSet) -> u64 {
    let disks: Vec<(f64, f64, f64)> = pupils
        .disks
        .iter()
        .filter(|d| d.radius > 0.0)
        .map(|d| {
            let (a, b) = st.local(d.center);
            (a, b, d.radius)
        })
        .collect();
    if disks.is_empty() {
        return 0;
    }
    let ds = st.width / cfg.n_s as f64;
    let dt = st.height / cfg.n_t as f64;
    let inside = |s: f64, t: f64| disks.iter().any(|&(a, b, r)| (s - a) * (s - a) + (t - b) * (t - b) < r * r);

    // Candidate index range for a coordinate interval, padded by one cell.
    let range = |lo: f64, hi: f64, step: f64, extent: f64, cells: u32| -> Option<(u32, u32)> {
        let first = ((lo + 0.5 * extent) / step - 0.5).floor() - 1.0;
        let last = ((hi + 0.5 * extent) / step - 0.5).ceil() + 1.0;
        let max = cells as f64 - 1.0;
        if last < 0.0 || first > max {
            return None;
        }
        Some((first.max(0.0) as u32, last.min(max) as u32))
    };

    let mut row_ranges: Vec<(u32, u32)> = disks
        .iter()
        .filter_map(|&(_, b, r)| range(b - r, b + r, dt, st.height, cfg.n_t))
        .collect();
    row_ranges.sort_unstable();

    let mut count = 0u64;
    let mut next_row = 0u32;
    let mut spans: Vec<(u32, u32)> = Vec::new();
    for (lo, hi) in row_ranges {
        for j in lo.max(next_row)..=hi {
            let t = cell_center(j, cfg.n_t, st.height);
            spans.clear();
            for &(a, b, r) in &disks {
                let dy = t - b;
                if dy.abs() > r {
                    continue;
                }
                let half = (r * r - dy * dy).max(0.0).sqrt();
                if let Some(span) = range(a - half, a + half, ds, st.width, cfg.n_s) {
                    spans.push(span);
                }
            }
            spans.sort_unstable();
            let mut cursor = 0u32;
            for &(s_lo, s_hi) in &spans {
                for i in s_lo.max(cursor)..=s_hi {
                    if inside(cell_center(i, cfg.n_s, st.width), t) {
                        count += 1;
                    }
                }
                cursor = cursor.max(s_hi + 1);
            }
        }
        next_row = next_row.max(hi + 1);
    }
    count
}

/// Samples kept when `(s, t)` is restricted to the pupils: `n_u * n_v` times the
/// number of covered st cells. Overlapping pupils are counted once.
pub fn pupil_sample_count(cfg: &BudgetConfig, param: &TwoPlaneParam, pupils: &PupilSet) -> Result<u128> {
    cfg.validate()?;
    param.validate()?;
    pupils.validate(&param.st_plane)?;
    let cells = covered_st_cells(cfg, &param.st_plane, pupils);
    Ok(cfg.n_u as u128 * cfg.n_v as u128 * cells as u128)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionReport {
    pub full_samples: u128,
    pub pupil_samples: u128,
    pub full_bytes: u128,
    pub pupil_bytes: u128,
    /// `pupil_samples / full_samples`.
    pub ratio: f64,
}

impl ReductionReport {
    pub const CSV_HEADER: &'static str = "full_samples,pupil_samples,full_bytes,pupil_bytes,ratio";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.full_samples, self.pupil_samples, self.full_bytes, self.pupil_bytes, self.ratio
        )
    }
}

pub fn reduction_report(cfg: &BudgetConfig, param: &TwoPlaneParam, pupils: &PupilSet) -> Result<ReductionReport> {
    let pupil_samples = pupil_sample_count(cfg, param, pupils)?;
    let full_samples = full_sample_count(cfg);
    let bytes = cfg.bytes_per_sample as u128;
    Ok(ReductionReport {
        full_samples,
        pupil_samples,
        full_bytes: full_samples * bytes,
        pupil_bytes: pupil_samples * bytes,
        ratio: pupil_samples as f64 / full_samples as f64,
    })
}
