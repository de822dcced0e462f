use std::path::{Path, PathBuf};

use crate::camera::StereoRig;
use crate::error::Result;
use crate::event::CameraId;
use crate::io::{read_events_csv, read_labels_csv, write_events_csv, write_labels_csv};
use crate::model::WireframeModel;
use crate::synth::render::{RenderedCamera, RenderedScene};
use crate::trajectory::Trajectory;

/// File names inside a scene directory.
#[derive(Clone, Debug)]
pub struct SceneFiles {
    pub model: PathBuf,
    pub rig: PathBuf,
    pub events_left: PathBuf,
    pub events_right: PathBuf,
    pub labels_left: PathBuf,
    pub labels_right: PathBuf,
    pub ground_truth: PathBuf,
}

impl SceneFiles {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            model: dir.join("model_gt.json"),
            rig: dir.join("rig.json"),
            events_left: dir.join("events_left.csv"),
            events_right: dir.join("events_right.csv"),
            labels_left: dir.join("labels_left.csv"),
            labels_right: dir.join("labels_right.csv"),
            ground_truth: dir.join("gt.txt"),
        }
    }
}

/// Writes the generating model, rig, both event streams with their label
/// sidecars, and the ground-truth trajectory. Creates `dir` if needed.
pub fn export_scene(dir: &Path, model: &WireframeModel, rig: &StereoRig, scene: &RenderedScene) -> Result<SceneFiles> {
    std::fs::create_dir_all(dir)?;
    let f = SceneFiles::in_dir(dir);
    model.save(&f.model)?;
    rig.save(&f.rig)?;
    write_events_csv(&f.events_left, &scene.left.stream)?;
    write_events_csv(&f.events_right, &scene.right.stream)?;
    write_labels_csv(&f.labels_left, &scene.left.labels)?;
    write_labels_csv(&f.labels_right, &scene.right.labels)?;
    scene.ground_truth.save(&f.ground_truth)?;
    Ok(f)
}

/// Reads a directory written by [`export_scene`]. Sub-pixel positions are
/// not stored and come back as `None`.
pub fn import_scene(dir: &Path) -> Result<(WireframeModel, StereoRig, RenderedScene)> {
    let f = SceneFiles::in_dir(dir);
    let model = WireframeModel::load(&f.model)?;
    let rig = StereoRig::load(&f.rig)?;
    let read = |events: &Path, labels: &Path, id: CameraId| -> Result<RenderedCamera> {
        let cam = rig.camera(id);
        Ok(RenderedCamera {
            stream: read_events_csv(events, cam.width, cam.height, id)?,
            labels: read_labels_csv(labels)?,
            subpixel: None,
        })
    };
    let scene = RenderedScene {
        left: read(&f.events_left, &f.labels_left, CameraId::Left)?,
        right: read(&f.events_right, &f.labels_right, CameraId::Right)?,
        ground_truth: Trajectory::load(&f.ground_truth)?,
    };
    Ok((model, rig, scene))
}
