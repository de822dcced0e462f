use nalgebra::Point2;
use serde::{Deserialize, Serialize};

use crate::camera::{PoseSE3, StereoRig};
use crate::error::{Error, Result};
use crate::event::EventCluster;
use crate::init::endpoints::{determine_endpoints, EndpointMatchParams};
use crate::init::extract::{extract_line_support, ExtractedSegment, ExtractionParams};
use crate::init::refine::{refine_lines, LineObservations, RefineParams};
use crate::init::stereo_match::{match_stereo_lines, StereoMatchParams};
use crate::init::triangulate::triangulate_model;
use crate::lm::RobustLoss;
use crate::model::WireframeModel;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InitParams {
    pub extraction: ExtractionParams,
    pub stereo: StereoMatchParams,
    /// Radians; matched pairs with closer back-projected planes are dropped.
    pub min_plane_angle: f64,
    pub refine: RefineParams,
    /// Support events per view used in refinement, at most.
    pub refine_points: usize,
    pub endpoints: EndpointMatchParams,
    pub min_segments: usize,
}

impl Default for InitParams {
    fn default() -> Self {
        Self {
            extraction: ExtractionParams::default(),
            stereo: StereoMatchParams::default(),
            min_plane_angle: 2f64.to_radians(),
            refine: RefineParams::default(),
            refine_points: 5000,
            endpoints: EndpointMatchParams::default(),
            min_segments: 3,
        }
    }
}

impl InitParams {
    pub fn validate(&self) -> Result<()> {
        self.extraction.validate()?;
        self.endpoints.validate()?;
        RobustLoss::new(self.refine.loss.delta)?;
        let s = &self.stereo;
        if !(s.angle_scale_deg > 0.0 && s.midpoint_scale > 0.0 && s.epipolar_scale > 0.0 && s.score_cap > 0.0)
            || !(s.min_depth > 0.0 && s.max_depth > s.min_depth)
            || !(self.min_plane_angle >= 0.0)
            || self.refine_points == 0
            || self.min_segments == 0
        {
            return Err(Error::InvalidParameter(format!("invalid initialization parameters {self:?}")));
        }
        Ok(())
    }
}

/// Support events of `s` moved to the cluster center time, at most `max`
/// of them, evenly strided.
fn compensated_support(cluster: &EventCluster, s: &ExtractedSegment, c_z: f64, max: usize) -> Vec<Point2<f64>> {
    let t_min = cluster.min_time().unwrap_or(0);
    let stride = s.support.len().div_ceil(max.max(1)).max(1);
    s.support
        .iter()
        .step_by(stride)
        .map(|&i| {
            let e = &cluster.events[i];
            s.to_center_time(&e.pixel(), (e.t - t_min) as f64 / c_z)
        })
        .collect()
}

/// Reconstructs a wireframe in the left camera frame at the cluster time.
/// Lines whose endpoints cannot be determined are dropped; at least
/// `min_segments` must survive.
pub fn initialize_model(
    cluster_l: &EventCluster,
    cluster_r: &EventCluster,
    rig: &StereoRig,
    params: &InitParams,
) -> Result<WireframeModel> {
    let ext_l = extract_line_support(cluster_l, &params.extraction)?;
    let ext_r = extract_line_support(cluster_r, &params.extraction)?;
    let segs_l: Vec<_> = ext_l.iter().map(|e| e.segment).collect();
    let segs_r: Vec<_> = ext_r.iter().map(|e| e.segment).collect();
    let pairs = match_stereo_lines(&segs_l, &segs_r, rig, &params.stereo)?;
    let pose = PoseSE3::identity();
    let tri = triangulate_model(&pairs, &segs_l, &segs_r, rig, &pose, params.min_plane_angle);
    let c_z = params.extraction.c_z;
    let obs: Vec<_> = tri
        .iter()
        .map(|t| LineObservations {
            left: compensated_support(cluster_l, &ext_l[t.left], c_z, params.refine_points),
            right: compensated_support(cluster_r, &ext_r[t.right], c_z, params.refine_points),
        })
        .collect();
    let lines: Vec<_> = tri.iter().map(|t| t.line).collect();
    let refined = refine_lines(&lines, &obs, rig, &pose, &params.refine)?;
    let mut segments = Vec::new();
    for (t, r) in tri.iter().zip(&refined) {
        match determine_endpoints(
            &segs_l[t.left],
            &segs_r[t.right],
            cluster_l,
            cluster_r,
            rig,
            &pose,
            &r.line,
            &params.endpoints,
        ) {
            Ok(s) => segments.push(s),
            Err(e) => log::warn!("dropping line ({}, {}): {e}", t.left, t.right),
        }
    }
    log::info!(
        "init: {} / {} segments extracted, {} matched, {} triangulated, {} with endpoints",
        segs_l.len(),
        segs_r.len(),
        pairs.len(),
        tri.len(),
        segments.len()
    );
    if segments.len() < params.min_segments {
        return Err(Error::TooFewSegments {
            found: segments.len(),
            required: params.min_segments,
        });
    }
    WireframeModel::new(segments, Vec::new())
}
