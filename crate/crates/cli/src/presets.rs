//! Canned experiments: two-view parallax, focus sweeps and lens pitch sweeps.

use ghd_core::{
    imaging_fraction, render, sharpness, CardMaterial, Error, Image, LensMode, Rect, RenderOptions, Rgb,
    ThinLensCamera, Vec3,
};

use crate::scenefile::SceneDocument;

/// Pixel labels closer than this (squared RGB distance) to a palette color take its label.
const LABEL_TOLERANCE_SQ: f64 = 0.15;

#[derive(Debug, Clone, PartialEq)]
pub struct CardParallax {
    pub card: usize,
    /// Distance from the reference pupil along the view direction.
    pub depth_m: f64,
    /// Shift of the card's right edge between the views, from projected corners.
    pub analytic_shift_px: f64,
    /// Same shift measured on the renders; `None` when the card is not
    /// identifiable in both views.
    pub measured_shift_px: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ParallaxReport {
    pub view_a: Image,
    pub view_b: Image,
    pub cards: Vec<CardParallax>,
    /// Index of the solid card farthest from the viewer.
    pub far_card: Option<usize>,
    /// Pixels covered by a nearer card in view A that show the far card in
    /// view B, restricted to the far card's projected footprint in view A.
    pub exposed_px: usize,
    /// Pixels that look exposed but fall outside that footprint.
    pub exposed_outside_footprint: usize,
}

impl ParallaxReport {
    pub const CSV_HEADER: &'static str = "card,depth_m,analytic_shift_px,measured_shift_px";

    pub fn csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for c in &self.cards {
            let measured = c.measured_shift_px.map_or(String::new(), |m| m.to_string());
            out.push_str(&format!("{},{},{},{}\n", c.card, c.depth_m, c.analytic_shift_px, measured));
        }
        out
    }
}

fn depth_from(camera: &ThinLensCamera, p: Vec3) -> f64 {
    (p - camera.pupil_center).dot(camera.frame().look)
}

/// Label per pixel: `Some(card)` for a solid card's color, `None` for
/// background or anything ambiguous.
fn label_image(image: &Image, palette: &[(usize, Rgb)], background: Rgb) -> Vec<Option<usize>> {
    let dist = |a: Rgb, b: Rgb| (a.r - b.r).powi(2) + (a.g - b.g).powi(2) + (a.b - b.b).powi(2);
    image
        .pixels
        .iter()
        .map(|&px| {
            let mut best = (dist(px, background), None);
            for &(i, c) in palette {
                let d = dist(px, c);
                if d < best.0 {
                    best = (d, Some(i));
                }
            }
            if best.0 < LABEL_TOLERANCE_SQ {
                best.1
            } else {
                None
            }
        })
        .collect()
}

/// Rightmost pixel edge (column + 1) of `card` in each row, where present.
fn right_edges(labels: &[Option<usize>], width: usize, card: usize) -> Vec<Option<usize>> {
    labels
        .chunks(width)
        .map(|row| row.iter().rposition(|&l| l == Some(card)).map(|c| c + 1))
        .collect()
}

fn inside_convex(poly: &[(f64, f64)], p: (f64, f64)) -> bool {
    let mut sign = 0.0;
    for k in 0..poly.len() {
        let a = poly[k];
        let b = poly[(k + 1) % poly.len()];
        let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
        if cross != 0.0 {
            if sign != 0.0 && cross.signum() != sign {
                return false;
            }
            sign = cross.signum();
        }
    }
    true
}

/// Renders the scene from two pupils `offset` to the left and right of the
/// document camera and measures how each solid card moves between them.
pub fn parallax(doc: &SceneDocument, opts: &RenderOptions, offset: f64) -> Result<ParallaxReport, Error> {
    if !(offset > 0.0 && offset.is_finite()) {
        return Err(Error::Precondition("view offset must be positive".into()));
    }
    let right = doc.camera.frame().right;
    let cam_a = doc.camera.translated(right * -offset);
    let cam_b = doc.camera.translated(right * offset);
    let view_a = render(&doc.scene, &cam_a, opts)?;
    let view_b = render(&doc.scene, &cam_b, opts)?;

    let palette: Vec<(usize, Rgb)> = doc
        .scene
        .cards
        .iter()
        .enumerate()
        .filter_map(|(i, c)| match c.material {
            CardMaterial::Solid(col) => Some((i, col)),
            CardMaterial::Texture { .. } => None,
        })
        .collect();
    let labels_a = label_image(&view_a, &palette, doc.scene.background);
    let labels_b = label_image(&view_b, &palette, doc.scene.background);
    let width = view_a.width;

    let mut cards = Vec::new();
    for (i, card) in doc.scene.cards.iter().enumerate() {
        let corners = card.corners();
        let right_col = |cam: &ThinLensCamera| -> Option<f64> {
            corners.iter().map(|&p| cam.project(p).map(|(c, _)| c)).try_fold(f64::NEG_INFINITY, |m, c| c.map(|c| m.max(c)))
        };
        let (Some(ca), Some(cb)) = (right_col(&cam_a), right_col(&cam_b)) else {
            continue;
        };
        let measured = palette.iter().any(|&(j, _)| j == i).then(|| {
            let ea = right_edges(&labels_a, width, i);
            let eb = right_edges(&labels_b, width, i);
            let shifts: Vec<f64> = ea.iter().zip(&eb).filter_map(|(&a, &b)| Some(b? as f64 - a? as f64)).collect();
            (!shifts.is_empty()).then(|| shifts.iter().sum::<f64>() / shifts.len() as f64)
        });
        cards.push(CardParallax {
            card: i,
            depth_m: depth_from(&doc.camera, card.center),
            analytic_shift_px: cb - ca,
            measured_shift_px: measured.flatten(),
        });
    }

    let far_card = palette
        .iter()
        .map(|&(i, _)| i)
        .max_by(|&a, &b| {
            let da = depth_from(&doc.camera, doc.scene.cards[a].center);
            let db = depth_from(&doc.camera, doc.scene.cards[b].center);
            da.total_cmp(&db)
        });

    let (mut exposed_px, mut exposed_outside_footprint) = (0, 0);
    if let Some(far) = far_card {
        let footprint: Option<Vec<(f64, f64)>> =
            doc.scene.cards[far].corners().iter().map(|&p| cam_a.project(p)).collect();
        if let Some(footprint) = footprint {
            for (k, (a, b)) in labels_a.iter().zip(&labels_b).enumerate() {
                let occluded_in_a = matches!(a, Some(c) if *c != far);
                if occluded_in_a && *b == Some(far) {
                    let center = ((k % width) as f64 + 0.5, (k / width) as f64 + 0.5);
                    if inside_convex(&footprint, center) {
                        exposed_px += 1;
                    } else {
                        exposed_outside_footprint += 1;
                    }
                }
            }
        }
    }

    Ok(ParallaxReport { view_a, view_b, cards, far_card, exposed_px, exposed_outside_footprint })
}

/// Evenly spaced focus distances `from, from + step, ...` up to `to` inclusive.
pub fn focus_distances(from: f64, to: f64, step: f64) -> Result<Vec<f64>, Error> {
    if !(from > 0.0 && step > 0.0 && to >= from && to.is_finite()) {
        return Err(Error::Precondition("focus sweep needs 0 < from <= to and a positive step".into()));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize + 1;
    if n > 100_000 {
        return Err(Error::Precondition("focus sweep has too many steps".into()));
    }
    Ok((0..n).map(|i| from + i as f64 * step).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub focus_distance_m: f64,
    pub sharpness: f64,
}

pub const SWEEP_CSV_HEADER: &str = "focus_distance_m,sharpness";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_CSV_HEADER}\n");
    for r in rows {
        out.push_str(&format!("{},{}\n", r.focus_distance_m, r.sharpness));
    }
    out
}

/// Row with the highest sharpness; the first one on ties.
pub fn sharpest(rows: &[SweepRow]) -> Option<SweepRow> {
    rows.iter().copied().fold(None, |best: Option<SweepRow>, r| match best {
        Some(b) if b.sharpness >= r.sharpness => Some(b),
        _ => Some(r),
    })
}

/// Renders one frame per focus distance and scores each over `region`.
/// `on_frame` sees every frame as it is produced, so frames need not be kept.
pub fn focus_sweep<E>(
    doc: &SceneDocument,
    opts: &RenderOptions,
    distances: &[f64],
    region: Rect,
    mut on_frame: impl FnMut(usize, f64, &Image) -> Result<(), E>,
) -> Result<Result<Vec<SweepRow>, E>, Error> {
    let mut rows = Vec::with_capacity(distances.len());
    for (i, &d) in distances.iter().enumerate() {
        let frame = render(&doc.scene, &doc.camera.with_focus(d), opts)?;
        rows.push(SweepRow { focus_distance_m: d, sharpness: sharpness(&frame, region)? });
        if let Err(e) = on_frame(i, d, &frame) {
            return Ok(Err(e));
        }
    }
    Ok(Ok(rows))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchRow {
    pub pitch_m: f64,
    pub depth1_m: f64,
    pub depth2_m: f64,
    pub imaging_fraction: f64,
    /// Mean absolute difference between the micro-lens and ideal-lens renders.
    pub mean_abs_diff: f64,
}

pub const PITCH_CSV_HEADER: &str = "pitch_m,depth1_m,depth2_m,imaging_fraction,mean_abs_diff";

pub fn pitch_csv(rows: &[PitchRow]) -> String {
    let mut out = format!("{PITCH_CSV_HEADER}\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.pitch_m, r.depth1_m, r.depth2_m, r.imaging_fraction, r.mean_abs_diff
        ));
    }
    out
}

/// Scales the lens microstructure by each factor and compares the micro-lens
/// render against the ideal one.
pub fn pitch_sweep(
    doc: &SceneDocument,
    opts: &RenderOptions,
    scales: &[f64],
    incidence_dir: Vec3,
    fraction_samples: usize,
) -> Result<Vec<PitchRow>, Error> {
    let ideal = render(&doc.scene, &doc.camera, &RenderOptions { mode: LensMode::IdealLens, ..*opts })?;
    let micro_opts = RenderOptions { mode: LensMode::MicroLens, ..*opts };
    let mut rows = Vec::with_capacity(scales.len());
    for &s in scales {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Precondition("pitch scale factors must be positive".into()));
        }
        let mut scene = doc.scene.clone();
        scene.lens = scene.lens.scaled_structure(s);
        let fraction = imaging_fraction(&scene.lens, incidence_dir, fraction_samples, opts.seed)?;
        let micro = render(&scene, &doc.camera, &micro_opts)?;
        rows.push(PitchRow {
            pitch_m: scene.lens.pitch_x,
            depth1_m: scene.lens.depth1,
            depth2_m: scene.lens.depth2,
            imaging_fraction: fraction,
            mean_abs_diff: micro.mean_abs_difference(&ideal)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn focus_distances_hit_the_grid() {
        let d = focus_distances(0.5, 8.0, 0.25).unwrap();
        assert_eq!(d.len(), 31);
        assert_eq!(d[22], 6.0);
        assert_eq!(*d.last().unwrap(), 8.0);
        assert!(focus_distances(1.0, 0.5, 0.1).is_err());
        assert!(focus_distances(0.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn sharpest_prefers_first_on_ties() {
        let rows = [
            SweepRow { focus_distance_m: 1.0, sharpness: 0.2 },
            SweepRow { focus_distance_m: 2.0, sharpness: 0.5 },
            SweepRow { focus_distance_m: 3.0, sharpness: 0.5 },
        ];
        assert_eq!(sharpest(&rows).unwrap().focus_distance_m, 2.0);
        assert_eq!(sharpest(&[]), None);
    }

    #[test]
    fn convex_containment() {
        let sq = [(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)];
        assert!(inside_convex(&sq, (1.0, 1.0)));
        assert!(inside_convex(&sq, (2.0, 1.0)));
        assert!(!inside_convex(&sq, (2.5, 1.0)));
        let rev: Vec<_> = sq.iter().rev().copied().collect();
        assert!(inside_convex(&rev, (1.0, 1.0)));
    }

    #[test]
    fn right_edges_per_row() {
        let labels = vec![None, Some(1), Some(1), None, None, None, Some(1), Some(0)];
        assert_eq!(right_edges(&labels, 4, 1), vec![Some(3), Some(3)]);
        assert_eq!(right_edges(&labels, 4, 0), vec![None, Some(4)]);
    }

    #[test]
    fn csv_headers() {
        assert!(sweep_csv(&[]).starts_with("focus_distance_m,sharpness\n"));
        assert!(pitch_csv(&[]).starts_with("pitch_m,"));
    }
}
