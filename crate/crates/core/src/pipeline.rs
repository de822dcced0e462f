//! Simulate, reconstruct, track and evaluate in one pass.

use std::fmt;
use std::path::{Path, PathBuf};

use crate::camera::StereoRig;
use crate::error::{Error, Result};
use crate::eval::{report, ErrorReport, ReportFiles};
use crate::init::initialize_model;
use crate::model::WireframeModel;
use crate::synth::{export_scene, make_primitive, render_events, RenderedScene, SceneConfig, SceneFiles};
use crate::track::{stereo_clusters, track_sequence, TrackingOutput};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Simulate,
    Initialize,
    Track,
    Evaluate,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Simulate => "simulation",
            Stage::Initialize => "initialization",
            Stage::Track => "tracking",
            Stage::Evaluate => "evaluation",
        })
    }
}

#[derive(Debug)]
pub struct StageError {
    pub stage: Stage,
    pub source: Error,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} failed: {}", self.stage, self.source)
    }
}

impl std::error::Error for StageError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, StageError>;
}

impl<T> AtStage<T> for Result<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, StageError> {
        self.map_err(|source| StageError { stage, source })
    }
}

/// Renders the scene. Relative rig paths resolve against `base_dir`.
pub fn simulate(scene: &SceneConfig, base_dir: &Path) -> Result<(WireframeModel, StereoRig, RenderedScene)> {
    let model = make_primitive(&scene.model)?;
    let rig = scene.rig(base_dir)?;
    let rendered = render_events(&model, &scene.trajectory, &rig, &scene.rate, &scene.noise, &scene.render)?;
    Ok((model, rig, rendered))
}

/// Output layout of [`run_all`].
#[derive(Clone, Debug)]
pub struct RunFiles {
    pub scene: SceneFiles,
    /// Reconstructed model, in the left camera frame at the first cluster.
    pub model: PathBuf,
    pub trajectory: PathBuf,
    pub diagnostics: PathBuf,
    pub report: ReportFiles,
}

impl RunFiles {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            scene: SceneFiles::in_dir(&dir.join("scene")),
            model: dir.join("model.json"),
            trajectory: dir.join("traj.txt"),
            diagnostics: dir.join("diagnostics.csv"),
            report: ReportFiles::beside(&dir.join("report.csv")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub files: RunFiles,
    pub tracking: TrackingOutput,
    pub report: ErrorReport,
}

/// Loads `scene_path`, renders it, reconstructs the model from the first
/// clusters, tracks the whole sequence and evaluates against ground truth.
/// Everything is written under `out_dir`.
pub fn run_all(scene_path: &Path, out_dir: &Path) -> std::result::Result<RunSummary, StageError> {
    let scene = SceneConfig::load(scene_path).at(Stage::Simulate)?;
    let base = scene_path.parent().unwrap_or(Path::new("."));
    let (gt_model, rig, rendered) = simulate(&scene, base).at(Stage::Simulate)?;
    let files = RunFiles::in_dir(out_dir);
    export_scene(&out_dir.join("scene"), &gt_model, &rig, &rendered).at(Stage::Simulate)?;

    let config = scene.pipeline;
    config.validate().at(Stage::Initialize)?;
    let (left, right) = (&rendered.left.stream, &rendered.right.stream);
    let (cls_l, cls_r) = stereo_clusters(left, right, &config).at(Stage::Initialize)?;
    let model = initialize_model(&cls_l[0], &cls_r[0], &rig, &config.init_params()).at(Stage::Initialize)?;
    model.save(&files.model).at(Stage::Initialize)?;

    let tracking = track_sequence(left, right, &rig, &config, Some(model)).at(Stage::Track)?;
    tracking.trajectory.save(&files.trajectory).at(Stage::Track)?;
    std::fs::write(&files.diagnostics, tracking.diagnostics_csv()).map_err(Error::from).at(Stage::Track)?;

    let report = report(&tracking.trajectory, &rendered.ground_truth, scene.eval_delta, true, &files.report.table)
        .at(Stage::Evaluate)?;
    Ok(RunSummary { files, tracking, report })
}
