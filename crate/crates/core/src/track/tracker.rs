//! Cluster-to-cluster tracking with re-initialization on failure.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::camera::{PoseSE3, StereoRig};
use crate::config::PipelineConfig;
use crate::error::Result;
use crate::event::{cluster_sequence, downsample, EventCluster, EventStream};
use crate::init::initialize_model;
use crate::model::WireframeModel;
use crate::track::optimize::{optimize_pose, TrackParams};
use crate::trajectory::Trajectory;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackStatus {
    Tracking,
    Lost,
}

impl fmt::Display for TrackStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrackStatus::Tracking => "tracking",
            TrackStatus::Lost => "lost",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrackerState {
    pub model: WireframeModel,
    /// Model frame to left camera.
    pub pose_l: PoseSE3,
    pub rig: StereoRig,
    /// Robust cost per association, px².
    pub last_cost: f64,
    pub inlier_ratio: f64,
    pub n_assoc: usize,
    pub status: TrackStatus,
}

impl TrackerState {
    pub fn new(model: WireframeModel, pose_l: PoseSE3, rig: StereoRig) -> Self {
        Self {
            model,
            pose_l,
            rig,
            last_cost: 0.0,
            inlier_ratio: 1.0,
            n_assoc: 0,
            status: TrackStatus::Tracking,
        }
    }
}

/// Refines the pose on a new pair of clusters, starting from the previous
/// pose. Optimizer errors and poor fits mark the state lost; the pose is
/// then left at its previous value.
pub fn track_step(state: TrackerState, cluster_l: &EventCluster, cluster_r: &EventCluster, params: &TrackParams) -> TrackerState {
    let (cl, cr);
    let (cluster_l, cluster_r) = if params.downsample > 1 {
        cl = downsample(cluster_l, params.downsample).expect("stride validated");
        cr = downsample(cluster_r, params.downsample).expect("stride validated");
        (&cl, &cr)
    } else {
        (cluster_l, cluster_r)
    };
    match optimize_pose(&state.pose_l, cluster_l, cluster_r, &state.model, &state.rig, params) {
        Ok(est) => {
            let ok = est.inlier_ratio >= params.min_inlier_ratio && est.mean_abs_residual <= params.max_mean_residual;
            TrackerState {
                pose_l: if ok { est.pose } else { state.pose_l },
                last_cost: est.cost,
                inlier_ratio: est.inlier_ratio,
                n_assoc: est.n_assoc,
                status: if ok { TrackStatus::Tracking } else { TrackStatus::Lost },
                ..state
            }
        }
        Err(e) => {
            log::debug!("tracking failed: {e}");
            TrackerState {
                inlier_ratio: 0.0,
                n_assoc: 0,
                status: TrackStatus::Lost,
                ..state
            }
        }
    }
}

/// Per-cluster diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    /// Seconds.
    pub t: f64,
    pub cost: f64,
    pub inlier_ratio: f64,
    pub status: TrackStatus,
    pub n_assoc: usize,
    /// The model was rebuilt from this cluster.
    pub reinitialized: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrackingOutput {
    /// Poses of the first model's frame in the left camera. Clusters where
    /// tracking was lost and could not be re-initialized have no sample.
    pub trajectory: Trajectory,
    pub steps: Vec<StepRecord>,
    /// The model built from the first clusters (or the one supplied).
    pub model: WireframeModel,
    /// Clusters where tracking reported failure, recovered or not.
    pub lost_clusters: usize,
    pub reinitializations: usize,
    /// The sequence ended while lost.
    pub ended_lost: bool,
}

impl TrackingOutput {
    /// `t_s,cost,inlier_ratio,status,n_assoc` with a header row.
    pub fn diagnostics_csv(&self) -> String {
        let mut s = String::from("t_s,cost,inlier_ratio,status,n_assoc\n");
        for r in &self.steps {
            s.push_str(&format!("{},{},{},{},{}\n", r.t, r.cost, r.inlier_ratio, r.status, r.n_assoc));
        }
        s
    }
}

fn stale(c: &EventCluster, max_radius_us: u64) -> bool {
    c.is_empty() || c.radius_us > max_radius_us
}

/// Both streams cut into clusters centered at the same times, starting half
/// an interval after the later of the two stream starts. Fails when there
/// are no events near the first center.
pub fn stereo_clusters(
    left: &EventStream,
    right: &EventStream,
    config: &PipelineConfig,
) -> Result<(Vec<EventCluster>, Vec<EventCluster>)> {
    config.cluster.validate()?;
    let (l0, _) = left.time_span().ok_or(crate::Error::EmptyStream)?;
    let (r0, _) = right.time_span().ok_or(crate::Error::EmptyStream)?;
    let t0 = l0.max(r0) + config.cluster.interval_us / 2;
    let cls_l = cluster_sequence(left, &config.cluster, t0)?;
    let cls_r = cluster_sequence(right, &config.cluster, t0)?;
    let max_r = config.cluster.max_radius_us;
    if stale(&cls_l[0], max_r) || stale(&cls_r[0], max_r) {
        return Err(crate::Error::InvalidParameter("no events near the first cluster time".into()));
    }
    Ok((cls_l, cls_r))
}

/// Tracks the object through both streams, clustered by [`stereo_clusters`].
///
/// Without `model`, one is reconstructed from the first clusters and the
/// trajectory is expressed in its frame, i.e. the first pose is the
/// identity. A supplied model must be in that same frame. After a loss
/// the model is rebuilt from the current clusters and chained onto the
/// last tracked pose, so the trajectory stays in the first model's frame.
pub fn track_sequence(
    left: &EventStream,
    right: &EventStream,
    rig: &StereoRig,
    config: &PipelineConfig,
    model: Option<WireframeModel>,
) -> Result<TrackingOutput> {
    config.validate()?;
    let (cls_l, cls_r) = stereo_clusters(left, right, config)?;
    let init = config.init_params();
    let max_r = config.cluster.max_radius_us;
    let model = match model {
        Some(m) => m,
        None => initialize_model(&cls_l[0], &cls_r[0], rig, &init)?,
    };
    let seconds = |c: &EventCluster| c.center_time as f64 / 1e6;
    let mut trajectory = Trajectory::default();
    trajectory.push(seconds(&cls_l[0]), PoseSE3::identity())?;
    let mut steps = vec![StepRecord {
        t: seconds(&cls_l[0]),
        cost: 0.0,
        inlier_ratio: 1.0,
        status: TrackStatus::Tracking,
        n_assoc: 0,
        reinitialized: true,
    }];
    let mut state = TrackerState::new(model.clone(), PoseSE3::identity(), *rig);
    // First model frame to the current model's frame.
    let mut anchor = PoseSE3::identity();
    let mut last_good = PoseSE3::identity();
    let (mut lost_clusters, mut reinitializations) = (0, 0);

    for (cl, cr) in cls_l.iter().zip(&cls_r).skip(1) {
        let t = seconds(cl);
        let fresh = !stale(cl, max_r) && !stale(cr, max_r);
        let mut reinitialized = false;
        if state.status == TrackStatus::Tracking {
            state = if fresh {
                track_step(state, cl, cr, &config.tracking)
            } else {
                TrackerState { status: TrackStatus::Lost, inlier_ratio: 0.0, n_assoc: 0, ..state }
            };
            if state.status == TrackStatus::Lost {
                lost_clusters += 1;
                log::warn!("tracking lost at t = {t:.3} s");
            }
        } else {
            lost_clusters += 1;
        }
        if state.status == TrackStatus::Lost && fresh {
            match initialize_model(cl, cr, rig, &init) {
                Ok(m) => {
                    anchor = last_good;
                    state = TrackerState::new(m, PoseSE3::identity(), *rig);
                    reinitializations += 1;
                    reinitialized = true;
                    log::info!("re-initialized at t = {t:.3} s");
                }
                Err(e) => log::warn!("re-initialization at t = {t:.3} s failed: {e}"),
            }
        }
        if state.status == TrackStatus::Tracking {
            last_good = state.pose_l.compose(&anchor);
            trajectory.push(t, last_good)?;
        }
        steps.push(StepRecord {
            t,
            cost: state.last_cost,
            inlier_ratio: state.inlier_ratio,
            status: state.status,
            n_assoc: state.n_assoc,
            reinitialized,
        });
    }
    log::info!(
        "tracked {} clusters, {} lost, {} re-initializations",
        steps.len(),
        lost_clusters,
        reinitializations
    );
    Ok(TrackingOutput {
        trajectory,
        steps,
        model,
        lost_clusters,
        reinitializations,
        ended_lost: state.status == TrackStatus::Lost,
    })
}
