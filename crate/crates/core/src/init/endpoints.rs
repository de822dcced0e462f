//! 3D segment extremities from spatio-temporally consistent stereo events.

use nalgebra::{Matrix3, Point2, Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::camera::{stereo_pose_chain, PoseSE3, StereoRig};
use crate::error::{Error, Result};
use crate::event::{Event, EventCluster};
use crate::line::{perpendicular_foot, triangulate_point_dlt, Line2D, PluckerLine, Segment2D, Segment3D};

/// How an accepted extremity pair becomes a point on the refined line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndpointMethod {
    /// Linear two-view triangulation, then the perpendicular foot on the
    /// line.
    DltFoot,
    /// The points of the line nearest each view's ray through its pixel,
    /// averaged with weight `sin^2` of the ray-line angle. Depth error from
    /// the disparity does not leak into the position along the line.
    RayOnLine,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EndpointMatchParams {
    /// Epipolar distance scale `eps_e`, pixels.
    pub epipolar_scale: f64,
    /// Temporal distance scale `eps_t`, microseconds.
    pub temporal_scale: f64,
    pub sample_count: usize,
    /// Largest accepted `C_e + C_t`.
    pub max_cost: f64,
    pub method: EndpointMethod,
}

impl Default for EndpointMatchParams {
    fn default() -> Self {
        Self {
            epipolar_scale: 2.0,
            temporal_scale: 2000.0,
            sample_count: 20,
            max_cost: 1.0,
            method: EndpointMethod::RayOnLine,
        }
    }
}

impl EndpointMatchParams {
    pub fn validate(&self) -> Result<()> {
        if self.epipolar_scale > 0.0 && self.temporal_scale > 0.0 && self.sample_count >= 2 && self.max_cost > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid endpoint parameters {self:?}")))
        }
    }
}

/// Events within `eps` of `seg`, with their arc position from `seg.pa`.
fn candidates<'a>(cluster: &'a EventCluster, seg: &Segment2D, eps: f64) -> Vec<(f64, &'a Event)> {
    let dir = (seg.pb - seg.pa) / seg.length();
    let mut out: Vec<_> = cluster
        .events
        .iter()
        .filter(|e| seg.distance_to_point(&e.pixel()) <= eps)
        .map(|e| ((e.pixel() - seg.pa).dot(&dir), e))
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Candidate indices around each of `n` equidistant arc positions, within
/// half a spacing and ordered by distance to the position.
fn sample_slots(cands: &[(f64, &Event)], length: f64, n: usize) -> Vec<Vec<usize>> {
    let half = 0.5 * length / (n - 1) as f64;
    (0..n)
        .map(|k| {
            let u = length * k as f64 / (n - 1) as f64;
            let lo = cands.partition_point(|c| c.0 < u - half);
            let hi = cands.partition_point(|c| c.0 <= u + half);
            let mut slot: Vec<usize> = (lo..hi).collect();
            slot.sort_by(|&a, &b| (cands[a].0 - u).abs().total_cmp(&(cands[b].0 - u).abs()));
            slot
        })
        .collect()
}

fn epipolar_distance(line: Vector3<f64>, p: &Point2<f64>) -> f64 {
    Line2D::from_coefficients(line).map_or(f64::INFINITY, |l| l.signed_distance(p).abs())
}

/// Spatio-temporal consistency cost `C_e + C_t` of a left-right event pair.
pub fn pair_cost(f: &Matrix3<f64>, el: &Event, er: &Event, params: &EndpointMatchParams) -> f64 {
    let (pl, pr) = (el.pixel(), er.pixel());
    let d_r = epipolar_distance(f * el.homogeneous(), &pr);
    let d_l = epipolar_distance(f.transpose() * er.homogeneous(), &pl);
    let c_e = (d_l + d_r) / (2.0 * params.epipolar_scale);
    let c_t = el.t.abs_diff(er.t) as f64 / params.temporal_scale;
    c_e + c_t
}

/// Accepted pairs `(left arc position, left pixel, right pixel)` in arc
/// order: each left sample is paired with its cheapest right candidate.
pub fn endpoint_pairs(
    seg_l: &Segment2D,
    seg_r: &Segment2D,
    cluster_l: &EventCluster,
    cluster_r: &EventCluster,
    rig: &StereoRig,
    params: &EndpointMatchParams,
) -> Result<Vec<(f64, Point2<f64>, Point2<f64>)>> {
    params.validate()?;
    let f = rig.fundamental()?;
    let left = candidates(cluster_l, seg_l, params.epipolar_scale);
    let right = candidates(cluster_r, seg_r, params.epipolar_scale);
    let partner = |el: &Event| {
        right
            .iter()
            .map(|&(_, er)| (pair_cost(&f, el, er, params), er))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .filter(|(c, _)| *c <= params.max_cost)
            .map(|(_, er)| er.pixel())
    };
    // Each sample takes the nearest left event that has a consistent
    // partner, so one rejected event does not lose an extremity.
    let mut used = Vec::new();
    let mut out = Vec::new();
    for slot in sample_slots(&left, seg_l.length(), params.sample_count) {
        for i in slot {
            if used.contains(&i) {
                continue;
            }
            if let Some(pr) = partner(left[i].1) {
                used.push(i);
                out.push((left[i].0, left[i].1.pixel(), pr));
                break;
            }
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

/// Point of `line` nearest the ray `c + s d`, and `sin^2` of the angle
/// between them.
fn nearest_on_line(c: &Point3<f64>, d: &Vector3<f64>, line: &PluckerLine) -> Option<(Point3<f64>, f64)> {
    let v = line.v.normalize();
    let d = d.normalize();
    let p0 = line.closest_point_to_origin();
    let b = v.dot(&d);
    let sin2 = 1.0 - b * b;
    if !(sin2 > 1e-12) {
        return None;
    }
    let w = p0 - c;
    let s = (b * d.dot(&w) - v.dot(&w)) / sin2;
    Some((p0 + v * s, sin2))
}

fn ray_on_line(
    pl: &Point2<f64>,
    pr: &Point2<f64>,
    rig: &StereoRig,
    pose_l: &PoseSE3,
    line: &PluckerLine,
) -> Option<Point3<f64>> {
    let pose_r = stereo_pose_chain(pose_l, rig);
    let mut acc = Vector3::zeros();
    let mut wsum = 0.0;
    for (p, pose, k) in [(pl, pose_l, &rig.left.intrinsics), (pr, &pose_r, &rig.right.intrinsics)] {
        let inv = pose.inverse();
        let c = inv.transform_point(&Point3::origin());
        let d = inv.rotation_matrix() * k.unproject(p);
        if let Some((x, w)) = nearest_on_line(&c, &d, line) {
            acc += x.coords * w;
            wsum += w;
        }
    }
    (wsum > 0.0).then(|| Point3::from(acc / wsum))
}

/// Places the accepted pairs nearest both ends of the left segment on
/// `line`.
#[allow(clippy::too_many_arguments)]
pub fn determine_endpoints(
    seg_l: &Segment2D,
    seg_r: &Segment2D,
    cluster_l: &EventCluster,
    cluster_r: &EventCluster,
    rig: &StereoRig,
    pose_l: &PoseSE3,
    line: &PluckerLine,
    params: &EndpointMatchParams,
) -> Result<Segment3D> {
    let pairs = endpoint_pairs(seg_l, seg_r, cluster_l, cluster_r, rig, params)?;
    if pairs.len() < 2 {
        return Err(Error::EndpointDeterminationFailed(format!(
            "{} consistent stereo pairs, need 2",
            pairs.len()
        )));
    }
    let (m_l, m_r) = rig.projection_matrices(pose_l);
    let ends = [pairs[0], pairs[pairs.len() - 1]];
    let mut pts = Vec::with_capacity(2);
    for (_, pl, pr) in ends {
        let x = match params.method {
            EndpointMethod::DltFoot => triangulate_point_dlt(&pl, &pr, &m_l, &m_r)
                .map(|x| perpendicular_foot(&x, line))
                .map_err(|e| Error::EndpointDeterminationFailed(e.to_string()))?,
            EndpointMethod::RayOnLine => ray_on_line(&pl, &pr, rig, pose_l, line)
                .ok_or_else(|| Error::EndpointDeterminationFailed("line parallel to both viewing rays".into()))?,
        };
        pts.push(x);
    }
    Segment3D::new(pts[0], pts[1]).map_err(|e| Error::EndpointDeterminationFailed(e.to_string()))
}
