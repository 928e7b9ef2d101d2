//! Geometric-optics simulator for a light-field display built from a
//! volumetric projector and a crossed strip-mirror lens.
//!
//! The lens maps every point to its mirror image across the device plane, so
//! the divergent virtual object formed by the projector is re-imaged as a
//! convergent, viewable one. This crate models that lens (both as an ideal
//! conjugate map and as a micro-structured mirror array), the scene and
//! projector, a thin-lens viewer with a back-traced renderer, and the
//! sample-budget of a pupil-constrained two-plane light field.

pub mod camera;
pub mod geometry;
pub mod lens;
pub mod lightfield;
pub mod ppm;
pub mod render;
pub mod scene;

pub use camera::{blur_diameter, in_window, ThinLensCamera};
pub use geometry::{fold_channel, intersect_plane, reflect, ChannelFoldResult, Ray, Vec3};
pub use lens::{
    ideal_conjugate, imaging_fraction, trace_ideal, trace_micro, visual_window, ClassifiedRay, LensSpec, RayClass,
    VisualWindow,
};
pub use lightfield::{
    full_sample_count, line_params, pupil_sample_count, reduction_report, BudgetConfig, LineParams, PlaneFrame,
    PupilDisk, PupilSet, ReductionReport, TwoPlaneParam,
};
pub use render::{render, sharpness, Image, LensMode, Rect, RenderOptions, Rgb};
pub use scene::{
    source_position, steer_projector, validate_scene, Card, CardMaterial, Projector, Scene, SceneDiagnostic,
    ScenePoint, Texture,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid scene: {}", join_diagnostics(.0))]
    InvalidScene(Vec<SceneDiagnostic>),
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("ppm: {0}")]
    Ppm(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Error {
        Error::Precondition(msg.into())
    }
}

fn join_diagnostics(d: &[SceneDiagnostic]) -> String {
    d.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
