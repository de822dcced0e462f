use nalgebra::{Point2, Point3};

use crate::camera::{stereo_pose_chain, Camera, PoseSE3, StereoRig};
use crate::event::CameraId;
use crate::line::Segment2D;
use crate::model::WireframeModel;

/// Closest depth kept when clipping segments against the camera.
const NEAR_Z: f64 = 1e-3;

/// A model segment as seen by one camera, clipped to the near plane and
/// the sensor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VisibleSegment {
    /// Index into the model's segments.
    pub index: usize,
    pub image: Segment2D,
    /// Camera-frame 3D endpoints of the clipped part, matching
    /// `image.pa` and `image.pb`.
    pub cam_a: Point3<f64>,
    pub cam_b: Point3<f64>,
}

impl VisibleSegment {
    /// Camera-frame point on the segment whose image sits at fraction `s`
    /// of the way from `image.pa` to `image.pb`.
    pub fn point_at_image_fraction(&self, s: f64) -> Point3<f64> {
        let (za, zb) = (self.cam_a.z, self.cam_b.z);
        let lambda = s * za / ((1.0 - s) * zb + s * za);
        self.cam_a + (self.cam_b - self.cam_a) * lambda
    }
}

pub fn visible_segments(
    model: &WireframeModel,
    pose_l: &PoseSE3,
    rig: &StereoRig,
    camera: CameraId,
) -> Vec<VisibleSegment> {
    match camera {
        CameraId::Left => visible_segments_for_camera(model, pose_l, &rig.left),
        CameraId::Right => {
            visible_segments_for_camera(model, &stereo_pose_chain(pose_l, rig), &rig.right)
        }
    }
}

/// Segments of `model` visible from a camera at `pose`. A segment is culled
/// when all of its adjacent faces point away from the camera; segments
/// without faces are only culled by the frustum.
pub fn visible_segments_for_camera(
    model: &WireframeModel,
    pose: &PoseSE3,
    camera: &Camera,
) -> Vec<VisibleSegment> {
    let center = Point3::from(-(pose.rotation().inverse() * pose.translation()));
    let front: Vec<bool> = model
        .faces()
        .iter()
        .map(|f| f.normal.dot(&(f.point - center)) <= 0.0)
        .collect();
    let k = &camera.intrinsics;
    let mut out = Vec::new();
    for (i, seg) in model.segments().iter().enumerate() {
        let adj = model.adjacent_faces(i);
        if !adj.is_empty() && !adj.iter().any(|&f| front[f]) {
            continue;
        }
        let (mut a, mut b) = (pose.transform_point(&seg.pa), pose.transform_point(&seg.pb));
        if a.z < NEAR_Z && b.z < NEAR_Z {
            continue;
        }
        if a.z < NEAR_Z {
            a = a + (b - a) * ((NEAR_Z - a.z) / (b.z - a.z));
        } else if b.z < NEAR_Z {
            b = b + (a - b) * ((NEAR_Z - b.z) / (a.z - b.z));
        }
        let (pa, pb) = (k.project(&a.coords), k.project(&b.coords));
        let bounds = (
            -0.5,
            -0.5,
            f64::from(camera.width) - 0.5,
            f64::from(camera.height) - 0.5,
        );
        let Some((s0, s1)) = clip_to_rect(&pa, &pb, bounds) else {
            continue;
        };
        let full = VisibleSegment {
            index: i,
            image: match Segment2D::new(pa, pb) {
                Ok(s) => s,
                Err(_) => continue,
            },
            cam_a: a,
            cam_b: b,
        };
        let (ca, cb) = (full.point_at_image_fraction(s0), full.point_at_image_fraction(s1));
        let (ia, ib) = (pa + (pb - pa) * s0, pa + (pb - pa) * s1);
        if (ib - ia).norm() < 1e-9 {
            continue;
        }
        if let Ok(image) = Segment2D::new(ia, ib) {
            out.push(VisibleSegment {
                index: i,
                image,
                cam_a: ca,
                cam_b: cb,
            });
        }
    }
    out
}

/// Liang–Barsky clipping of `p + s (q - p)`, `s` in `[0, 1]`, against an
/// axis-aligned rectangle `(xmin, ymin, xmax, ymax)`.
fn clip_to_rect(p: &Point2<f64>, q: &Point2<f64>, r: (f64, f64, f64, f64)) -> Option<(f64, f64)> {
    let d = q - p;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for (den, num) in [
        (-d.x, p.x - r.0),
        (d.x, r.2 - p.x),
        (-d.y, p.y - r.1),
        (d.y, r.3 - p.y),
    ] {
        if den == 0.0 {
            if num < 0.0 {
                return None;
            }
        } else {
            let t = num / den;
            if den < 0.0 {
                lo = lo.max(t);
            } else {
                hi = hi.min(t);
            }
        }
    }
    (lo < hi).then_some((lo, hi))
}
