use crate::camera::{PoseSE3, StereoRig};
use crate::line::{backproject_plane, triangulate_line, PluckerLine, Segment2D};

/// A 3D line with the indices of the 2D segments it came from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriangulatedLine {
    pub left: usize,
    pub right: usize,
    pub line: PluckerLine,
}

/// Intersects the back-projected planes of each matched pair. Pairs whose
/// planes are closer than `min_plane_angle` radians are skipped with a
/// warning.
pub fn triangulate_model(
    pairs: &[(usize, usize)],
    segs_l: &[Segment2D],
    segs_r: &[Segment2D],
    rig: &StereoRig,
    pose_l: &PoseSE3,
    min_plane_angle: f64,
) -> Vec<TriangulatedLine> {
    let (m_l, m_r) = rig.projection_matrices(pose_l);
    let mut out = Vec::new();
    for &(i, j) in pairs {
        let pl = backproject_plane(&m_l, &segs_l[i].line);
        let pr = backproject_plane(&m_r, &segs_r[j].line);
        let angle = pl.normal().cross(&pr.normal()).norm().asin();
        if !(angle >= min_plane_angle) {
            log::warn!("skipping pair ({i}, {j}): planes {:.3} deg apart", angle.to_degrees());
            continue;
        }
        match triangulate_line(&pl, &pr) {
            Ok(line) => out.push(TriangulatedLine { left: i, right: j, line }),
            Err(e) => log::warn!("skipping pair ({i}, {j}): {e}"),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::tests::{rectified_rig, test_rig};
    use crate::camera::stereo_pose_chain;
    use crate::line::{plucker_from_points, Segment3D};
    use nalgebra::{Point3, Vector3};

    fn project_pair(rig: &StereoRig, pose_l: &PoseSE3, s: &Segment3D) -> (Segment2D, Segment2D) {
        let pose_r = stereo_pose_chain(pose_l, rig);
        (
            s.project(&rig.left.intrinsics, pose_l).unwrap(),
            s.project(&rig.right.intrinsics, &pose_r).unwrap(),
        )
    }

    #[test]
    fn z_axis_line() {
        let rig = rectified_rig();
        let s = Segment3D::new(Point3::new(0.0, 0.1, 1.0), Point3::new(0.0, 0.1, 3.0)).unwrap();
        let (l, r) = project_pair(&rig, &PoseSE3::identity(), &s);
        let out = triangulate_model(&[(0, 0)], &[l], &[r], &rig, &PoseSE3::identity(), 1e-3);
        assert_eq!(out.len(), 1);
        let truth = plucker_from_points(&s.pa, &s.pb).unwrap();
        assert!(out[0].line.angle_to(&truth) < 1e-9);
        assert!(out[0].line.distance_to_point(&s.pa) < 1e-9);
    }

    #[test]
    fn cuboid_edges() {
        let rig = test_rig();
        let pose_l = PoseSE3::from_axis_angle(Vector3::new(0.4, -0.5, 0.2), Vector3::new(0.05, -0.02, 2.0));
        let h = 0.3;
        let corners: Vec<Point3<f64>> = (0..8)
            .map(|i| {
                let s = |b: usize| if i & b != 0 { h } else { -h };
                Point3::new(s(1), s(2), s(4))
            })
            .collect();
        let mut edges = Vec::new();
        for i in 0..8 {
            for b in [1, 2, 4] {
                if i & b == 0 {
                    edges.push(Segment3D::new(corners[i], corners[i | b]).unwrap());
                }
            }
        }
        assert_eq!(edges.len(), 12);
        let (ls, rs): (Vec<_>, Vec<_>) = edges.iter().map(|e| project_pair(&rig, &pose_l, e)).unzip();
        let pairs: Vec<_> = (0..12).map(|i| (i, i)).collect();
        let out = triangulate_model(&pairs, &ls, &rs, &rig, &pose_l, 1e-3);
        assert_eq!(out.len(), 12);
        for t in out {
            let e = &edges[t.left];
            let truth = plucker_from_points(&e.pa, &e.pb).unwrap();
            assert!(t.line.angle_to(&truth) < 1e-6);
            assert!(t.line.distance_to_point(&e.pa) < 1e-6);
        }
    }

    #[test]
    fn line_in_the_epipolar_plane_is_skipped() {
        let rig = rectified_rig();
        let s = Segment3D::new(Point3::new(-0.3, 0.0, 2.0), Point3::new(0.5, 0.0, 2.5)).unwrap();
        let (l, r) = project_pair(&rig, &PoseSE3::identity(), &s);
        assert!(triangulate_model(&[(0, 0)], &[l], &[r], &rig, &PoseSE3::identity(), 1e-3).is_empty());
    }
}
