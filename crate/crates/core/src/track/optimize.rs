//! Motion-only refinement of the left-camera pose.

use nalgebra::{DVector, Matrix3, Point2, Vector6};
use serde::{Deserialize, Serialize};

use crate::camera::{line_intrinsics, PoseSE3, StereoRig};
use crate::error::{Error, Result};
use crate::event::{CameraId, EventCluster};
use crate::line::{pixel_line_distance_pose_jacobian, PluckerLine};
use crate::lm::{self, LmOptions, NormalEquations, Problem, RobustLoss};
use crate::model::WireframeModel;
use crate::track::matching::{match_events_counted, MatchThresholds};
use crate::track::visibility::visible_segments;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackParams {
    pub thresholds: MatchThresholds,
    pub loss: RobustLoss,
    pub lm: LmOptions,
    /// Associate-then-optimize rounds per cluster.
    pub rounds: usize,
    pub min_associations: usize,
    /// Tracking is lost below this fraction of associated events...
    pub min_inlier_ratio: f64,
    /// ...or above this mean absolute residual, pixels.
    pub max_mean_residual: f64,
    /// Keep every k-th event of each cluster.
    pub downsample: usize,
}

impl Default for TrackParams {
    fn default() -> Self {
        Self {
            thresholds: MatchThresholds::default(),
            loss: RobustLoss::default(),
            lm: LmOptions::default(),
            rounds: 3,
            min_associations: 10,
            min_inlier_ratio: 0.3,
            max_mean_residual: 3.0,
            downsample: 1,
        }
    }
}

impl TrackParams {
    pub fn validate(&self) -> Result<()> {
        self.thresholds.validate()?;
        RobustLoss::new(self.loss.delta)?;
        if self.rounds == 0 || self.downsample == 0 {
            return Err(Error::InvalidParameter("rounds and downsample must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.min_inlier_ratio) || !(self.max_mean_residual > 0.0) {
            return Err(Error::InvalidParameter("bad failure thresholds".into()));
        }
        Ok(())
    }
}

/// One event tied to a model line, in the camera that saw it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observation {
    pub camera: CameraId,
    pub pixel: Point2<f64>,
    /// Index into the model's segments.
    pub segment: usize,
}

/// Events of both clusters associated with the model projected at `pose_l`,
/// with their residuals.
pub fn associate(
    pose_l: &PoseSE3,
    cluster_l: &EventCluster,
    cluster_r: &EventCluster,
    model: &WireframeModel,
    rig: &StereoRig,
    thr: &MatchThresholds,
) -> Vec<(Observation, f64)> {
    associate_counted(pose_l, cluster_l, cluster_r, model, rig, thr).0
}

/// [`associate`] plus the number of events dropped as ambiguous.
fn associate_counted(
    pose_l: &PoseSE3,
    cluster_l: &EventCluster,
    cluster_r: &EventCluster,
    model: &WireframeModel,
    rig: &StereoRig,
    thr: &MatchThresholds,
) -> (Vec<(Observation, f64)>, usize) {
    let mut out = Vec::new();
    let mut ambiguous = 0;
    for (camera, cluster) in [(CameraId::Left, cluster_l), (CameraId::Right, cluster_r)] {
        let vis = visible_segments(model, pose_l, rig, camera);
        let segs: Vec<_> = vis.iter().map(|v| v.image).collect();
        let (assoc, amb) = match_events_counted(cluster, &segs, thr);
        ambiguous += amb;
        for a in assoc {
            let obs = Observation {
                camera,
                pixel: cluster.events[a.event].pixel(),
                segment: vis[a.segment].index,
            };
            out.push((obs, a.residual));
        }
    }
    (out, ambiguous)
}

/// Sum of robust event-to-line costs over both cameras as a function of
/// the left-camera pose.
pub struct PoseProblem<'a> {
    observations: &'a [Observation],
    lines: Vec<PluckerLine>,
    k_l: Matrix3<f64>,
    k_r: Matrix3<f64>,
    left_to_right: PoseSE3,
    loss: RobustLoss,
}

impl<'a> PoseProblem<'a> {
    pub fn new(observations: &'a [Observation], model: &WireframeModel, rig: &StereoRig, loss: RobustLoss) -> Self {
        Self {
            observations,
            lines: model.segments().iter().map(|s| s.line).collect(),
            k_l: line_intrinsics(&rig.left.intrinsics),
            k_r: line_intrinsics(&rig.right.intrinsics),
            left_to_right: rig.left_to_right(),
            loss,
        }
    }

    /// Residual and its gradient for one observation.
    pub fn residual(&self, pose: &PoseSE3, o: &Observation) -> Result<(f64, nalgebra::RowVector6<f64>)> {
        let line = &self.lines[o.segment];
        match o.camera {
            CameraId::Left => pixel_line_distance_pose_jacobian(&o.pixel, &self.k_l, pose, None, line),
            CameraId::Right => {
                pixel_line_distance_pose_jacobian(&o.pixel, &self.k_r, pose, Some(&self.left_to_right), line)
            }
        }
    }
}

impl Problem for PoseProblem<'_> {
    type Param = PoseSE3;

    fn linearize(&self, pose: &PoseSE3) -> Result<NormalEquations> {
        let mut ne = NormalEquations::zeros(6);
        for o in self.observations {
            let (r, j) = self.residual(pose, o)?;
            ne.add(r, j.as_slice(), &self.loss);
        }
        ne.symmetrize();
        Ok(ne)
    }

    fn cost(&self, pose: &PoseSE3) -> Result<f64> {
        let mut c = 0.0;
        for o in self.observations {
            c += self.loss.rho(self.residual(pose, o)?.0.powi(2));
        }
        Ok(c)
    }

    fn retract(&self, pose: &PoseSE3, delta: &DVector<f64>) -> PoseSE3 {
        pose.retract(&Vector6::from_column_slice(delta.as_slice()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoseEstimate {
    pub pose: PoseSE3,
    /// Robust cost per association before the first and after the last
    /// round, px².
    pub initial_cost: f64,
    pub cost: f64,
    /// Associated events over all events of both cameras that were not
    /// dropped as ambiguous, at the final pose.
    pub inlier_ratio: f64,
    pub n_assoc: usize,
    pub mean_abs_residual: f64,
    /// Accepted LM steps over all rounds.
    pub iterations: usize,
    /// False when some round stopped at the iteration limit.
    pub converged: bool,
}

/// Refines the left-camera pose against both clusters, re-associating the
/// events before each round.
pub fn optimize_pose(
    pose_init: &PoseSE3,
    cluster_l: &EventCluster,
    cluster_r: &EventCluster,
    model: &WireframeModel,
    rig: &StereoRig,
    params: &TrackParams,
) -> Result<PoseEstimate> {
    let mut pose = *pose_init;
    let mut initial_cost = None;
    let mut cost = 0.0;
    let mut iterations = 0;
    let mut converged = true;
    for _ in 0..params.rounds {
        let obs: Vec<Observation> = associate(&pose, cluster_l, cluster_r, model, rig, &params.thresholds)
            .into_iter()
            .map(|(o, _)| o)
            .collect();
        if obs.len() < params.min_associations {
            return Err(Error::InsufficientAssociations { count: obs.len() });
        }
        let problem = PoseProblem::new(&obs, model, rig, params.loss);
        let out = lm::solve(&problem, pose, &params.lm)?;
        let n = obs.len() as f64;
        initial_cost.get_or_insert(out.initial_cost / n);
        cost = out.cost / n;
        pose = out.param;
        iterations += out.iterations;
        converged &= out.converged;
        if out.iterations == 0 {
            break;
        }
    }
    let (fin, ambiguous) = associate_counted(&pose, cluster_l, cluster_r, model, rig, &params.thresholds);
    let total = cluster_l.len() + cluster_r.len() - ambiguous;
    let mean_abs_residual = if fin.is_empty() {
        f64::INFINITY
    } else {
        fin.iter().map(|(_, r)| r.abs()).sum::<f64>() / fin.len() as f64
    };
    Ok(PoseEstimate {
        pose,
        initial_cost: initial_cost.unwrap_or(0.0),
        cost,
        inlier_ratio: if total == 0 { 0.0 } else { fin.len() as f64 / total as f64 },
        n_assoc: fin.len(),
        mean_abs_residual,
        iterations,
        converged,
    })
}
