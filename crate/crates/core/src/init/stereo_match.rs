//! Left-right segment correspondence.

use nalgebra::{Point2, Vector3};
use serde::{Deserialize, Serialize};

use crate::camera::StereoRig;
use crate::error::{Error, Result};
use crate::line::{orientation_difference, Line2D, Segment2D};

/// Score scales and the acceptance cap. A unit of score is one
/// `angle_scale_deg` of slope difference, one `midpoint_scale` pixel of
/// midpoint offset, or one `epipolar_scale` pixel of epipolar miss.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StereoMatchParams {
    pub angle_scale_deg: f64,
    pub midpoint_scale: f64,
    pub epipolar_scale: f64,
    pub score_cap: f64,
    /// Depth range, meters, over which a left midpoint may lie.
    pub min_depth: f64,
    pub max_depth: f64,
}

impl Default for StereoMatchParams {
    fn default() -> Self {
        Self {
            angle_scale_deg: 10.0,
            midpoint_scale: 20.0,
            epipolar_scale: 2.0,
            score_cap: 3.0,
            min_depth: 0.3,
            max_depth: 1e3,
        }
    }
}

/// Pixel distance from the right midpoint to the image of the left
/// midpoint's viewing ray between the two depths.
fn midpoint_term(rig: &StereoRig, sl: &Segment2D, sr: &Segment2D, p: &StereoMatchParams) -> f64 {
    let ray = rig.left.intrinsics.unproject(&sl.midpoint);
    let ray = ray / ray.z;
    let l2r = rig.left_to_right();
    let at = |z: f64| -> Option<Point2<f64>> {
        let x = l2r.transform_point(&(ray * z).into());
        (x.z > 0.0).then(|| rig.right.intrinsics.project(&x.coords))
    };
    match (at(p.min_depth), at(p.max_depth)) {
        (Some(a), Some(b)) => match Segment2D::new(a, b) {
            Ok(s) => s.distance_to_point(&sr.midpoint),
            Err(_) => (a - sr.midpoint).norm(),
        },
        (Some(a), None) | (None, Some(a)) => (a - sr.midpoint).norm(),
        (None, None) => f64::INFINITY,
    }
}

/// How far the epipolar line of the left midpoint misses the right
/// segment, measured along that segment. For lines parallel to the
/// epipolar line it is the offset between the two lines.
fn epipolar_term(f: &nalgebra::Matrix3<f64>, sl: &Segment2D, sr: &Segment2D) -> f64 {
    let Some(epi) = Line2D::from_coefficients(f * Vector3::new(sl.midpoint.x, sl.midpoint.y, 1.0)) else {
        return f64::INFINITY;
    };
    let x = epi.coefficients().cross(&sr.line.coefficients());
    let sin = epi.normal().perp(&sr.line.normal()).abs();
    if sin < 1e-3 || x.z.abs() < 1e-12 {
        return epi.signed_distance(&sr.midpoint).abs();
    }
    let hit = Point2::new(x.x / x.z, x.y / x.z);
    sr.distance_to_point(&hit)
}

/// Matching cost of every left segment against every right segment.
pub fn score_matrix(
    segs_l: &[Segment2D],
    segs_r: &[Segment2D],
    rig: &StereoRig,
    params: &StereoMatchParams,
) -> Result<Vec<Vec<f64>>> {
    let f = rig.fundamental()?;
    Ok(segs_l
        .iter()
        .map(|sl| {
            segs_r
                .iter()
                .map(|sr| {
                    orientation_difference(sl.angle(), sr.angle()).to_degrees() / params.angle_scale_deg
                        + midpoint_term(rig, sl, sr, params) / params.midpoint_scale
                        + epipolar_term(&f, sl, sr) / params.epipolar_scale
                })
                .collect()
        })
        .collect())
}

/// Mutual-nearest pairs `(left, right)` with score under the cap, ordered
/// by left index.
pub fn match_stereo_lines(
    segs_l: &[Segment2D],
    segs_r: &[Segment2D],
    rig: &StereoRig,
    params: &StereoMatchParams,
) -> Result<Vec<(usize, usize)>> {
    if segs_l.is_empty() || segs_r.is_empty() {
        return Err(Error::StereoMatchingFailed);
    }
    let s = score_matrix(segs_l, segs_r, rig, params)?;
    let argmin = |it: &mut dyn Iterator<Item = (usize, f64)>| it.min_by(|a, b| a.1.total_cmp(&b.1)).map(|m| m.0);
    let mut pairs = Vec::new();
    for (i, row) in s.iter().enumerate() {
        let j = argmin(&mut row.iter().copied().enumerate()).unwrap();
        let back = argmin(&mut s.iter().map(|r| r[j]).enumerate()).unwrap();
        if back == i && s[i][j] <= params.score_cap {
            pairs.push((i, j));
        }
    }
    if pairs.is_empty() {
        return Err(Error::StereoMatchingFailed);
    }
    Ok(pairs)
}
