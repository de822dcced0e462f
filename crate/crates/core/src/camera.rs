//! Pinhole cameras, rigid poses and stereo rig geometry.
//!
//! Poses map world (object) coordinates into a camera frame:
//! `X_cam = R * X_world + T`.

use nalgebra::{
    Isometry3, Matrix3, Matrix3x4, Matrix4, Point2, Point3, Rotation3, Translation3,
    UnitQuaternion, Vector3, Vector4, Vector6,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::CameraId;
use crate::line::Line2D;

/// Skew-symmetric matrix `[v]x` with `[v]x * u = v x u`.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self> {
        if !(fx > 0.0 && fy > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "focal lengths must be positive (fx = {fx}, fy = {fy})"
            )));
        }
        Ok(Self { fx, fy, cx, cy })
    }

    /// Point intrinsic matrix `K_p`.
    pub fn point_matrix(&self) -> Matrix3<f64> {
        Matrix3::new(self.fx, 0.0, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0)
    }

    pub fn line_matrix(&self) -> Matrix3<f64> {
        line_intrinsics(self)
    }

    /// Pixel to normalized image coordinates.
    pub fn unproject(&self, p: &Point2<f64>) -> Vector3<f64> {
        Vector3::new((p.x - self.cx) / self.fx, (p.y - self.cy) / self.fy, 1.0)
    }

    /// Camera-frame point to pixel, without any depth check.
    pub fn project(&self, x: &Vector3<f64>) -> Point2<f64> {
        Point2::new(
            self.fx * x.x / x.z + self.cx,
            self.fy * x.y / x.z + self.cy,
        )
    }
}

/// Line intrinsic matrix `K_e`, mapping a camera-frame Plücker moment to
/// image line coefficients. Equal to `det(K_p) * K_p^-T`.
pub fn line_intrinsics(k: &CameraIntrinsics) -> Matrix3<f64> {
    Matrix3::new(
        k.fy,
        0.0,
        0.0,
        0.0,
        k.fx,
        0.0,
        -k.fy * k.cx,
        -k.fx * k.cy,
        k.fx * k.fy,
    )
}

/// Rigid transform from world coordinates into a camera frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoseSE3(pub Isometry3<f64>);

impl PoseSE3 {
    pub fn identity() -> Self {
        Self(Isometry3::identity())
    }

    pub fn new(rotation: UnitQuaternion<f64>, translation: Vector3<f64>) -> Self {
        Self(Isometry3::from_parts(Translation3::from(translation), rotation))
    }

    /// Builds a pose from a rotation matrix, rejecting matrices that are not
    /// orthonormal with determinant +1 (tolerance 1e-9).
    pub fn from_matrix(r: &Matrix3<f64>, t: Vector3<f64>) -> Result<Self> {
        check_rotation(r)?;
        let rot = Rotation3::from_matrix_unchecked(*r);
        Ok(Self::new(UnitQuaternion::from_rotation_matrix(&rot), t))
    }

    pub fn from_axis_angle(rotvec: Vector3<f64>, translation: Vector3<f64>) -> Self {
        Self::new(UnitQuaternion::from_scaled_axis(rotvec), translation)
    }

    pub fn rotation(&self) -> &UnitQuaternion<f64> {
        &self.0.rotation
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        self.0.rotation.to_rotation_matrix().into_inner()
    }

    pub fn translation(&self) -> Vector3<f64> {
        self.0.translation.vector
    }

    pub fn transform_point(&self, p: &Point3<f64>) -> Point3<f64> {
        self.0.transform_point(p)
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.inverse())
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &PoseSE3) -> Self {
        Self(self.0 * other.0)
    }

    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        self.0.to_homogeneous()
    }

    /// Right-multiplicative update by `xi = (omega, tau)`:
    /// `R' = R Exp(omega)`, `T' = T + R tau`.
    pub fn retract(&self, xi: &Vector6<f64>) -> Self {
        let omega = xi.fixed_rows::<3>(0).into_owned();
        let tau = xi.fixed_rows::<3>(3).into_owned();
        let rot = self.0.rotation * UnitQuaternion::from_scaled_axis(omega);
        let t = self.translation() + self.0.rotation * tau;
        Self::new(rot, t)
    }

    /// Rotation angle between two poses, radians.
    pub fn angle_to(&self, other: &PoseSE3) -> f64 {
        self.0.rotation.angle_to(&other.0.rotation)
    }
}

fn check_rotation(r: &Matrix3<f64>) -> Result<()> {
    let ortho = (r.transpose() * r - Matrix3::identity()).abs().max();
    let det = r.determinant();
    if ortho > 1e-9 || (det - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "not a rotation matrix (|RtR - I| = {ortho:e}, det = {det})"
        )));
    }
    Ok(())
}

/// A camera's intrinsics together with its sensor size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Camera {
    pub intrinsics: CameraIntrinsics,
    pub width: u16,
    pub height: u16,
}

impl Camera {
    pub fn contains(&self, p: &Point2<f64>) -> bool {
        p.x >= -0.5
            && p.y >= -0.5
            && p.x < f64::from(self.width) - 0.5
            && p.y < f64::from(self.height) - 0.5
    }
}

/// Calibrated stereo pair. `r_r2l`, `t_r2l` map right-camera coordinates
/// into the left-camera frame: `X_l = R_r2l X_r + T_r2l`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StereoRig {
    pub left: Camera,
    pub right: Camera,
    pub r_r2l: Rotation3<f64>,
    pub t_r2l: Vector3<f64>,
}

impl StereoRig {
    pub fn new(left: Camera, right: Camera, r_r2l: Matrix3<f64>, t_r2l: Vector3<f64>) -> Result<Self> {
        check_rotation(&r_r2l)?;
        Ok(Self {
            left,
            right,
            r_r2l: Rotation3::from_matrix_unchecked(r_r2l),
            t_r2l,
        })
    }

    pub fn camera(&self, id: CameraId) -> &Camera {
        match id {
            CameraId::Left => &self.left,
            CameraId::Right => &self.right,
        }
    }

    /// Transform taking left-camera coordinates to right-camera coordinates.
    pub fn left_to_right(&self) -> PoseSE3 {
        let r_inv = self.r_r2l.inverse();
        PoseSE3::new(
            UnitQuaternion::from_rotation_matrix(&r_inv),
            -(r_inv * self.t_r2l),
        )
    }

    pub fn baseline(&self) -> f64 {
        self.t_r2l.norm()
    }

    /// Fundamental matrix with `p_r^T F p_l = 0`.
    pub fn fundamental(&self) -> Result<Matrix3<f64>> {
        if self.baseline() < 1e-12 {
            return Err(Error::DegenerateRig("zero baseline".into()));
        }
        let c = self.left_to_right();
        let e = skew(&c.translation()) * c.rotation_matrix();
        let kl_inv = self
            .left
            .intrinsics
            .point_matrix()
            .try_inverse()
            .ok_or_else(|| Error::DegenerateRig("singular left intrinsics".into()))?;
        let kr_inv = self
            .right
            .intrinsics
            .point_matrix()
            .try_inverse()
            .ok_or_else(|| Error::DegenerateRig("singular right intrinsics".into()))?;
        Ok(kr_inv.transpose() * e * kl_inv)
    }

    /// The `(left, right)` projection matrices for a left-camera pose.
    pub fn projection_matrices(&self, pose_l: &PoseSE3) -> (ProjectionMatrix, ProjectionMatrix) {
        let pose_r = stereo_pose_chain(pose_l, self);
        (
            ProjectionMatrix::new(&self.left.intrinsics, pose_l),
            ProjectionMatrix::new(&self.right.intrinsics, &pose_r),
        )
    }
}

/// Right-camera pose from the left-camera pose and the rig extrinsics:
/// `R_r = R_r2l^-1 R_l`, `T_r = R_r2l^-1 (T_l - T_r2l)`.
pub fn stereo_pose_chain(pose_l: &PoseSE3, rig: &StereoRig) -> PoseSE3 {
    rig.left_to_right().compose(pose_l)
}

/// `M = K_p [R | T]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionMatrix(pub Matrix3x4<f64>);

impl ProjectionMatrix {
    pub fn new(k: &CameraIntrinsics, pose: &PoseSE3) -> Self {
        let mut rt = Matrix3x4::zeros();
        rt.fixed_view_mut::<3, 3>(0, 0)
            .copy_from(&pose.rotation_matrix());
        rt.fixed_view_mut::<3, 1>(0, 3)
            .copy_from(&pose.translation());
        Self(k.point_matrix() * rt)
    }

    pub fn row(&self, i: usize) -> Vector4<f64> {
        self.0.row(i).transpose()
    }
}

/// Projects a homogeneous 3D point. Points with non-positive depth are
/// rejected.
pub fn point_projection(m: &ProjectionMatrix, p: &Vector4<f64>) -> Result<Point2<f64>> {
    let x = m.0 * p;
    // Depth sign is relative to the homogeneous scale of the input.
    let depth = x.z * p.w.signum();
    if !(depth > 0.0) {
        return Err(Error::BehindCamera { depth: x.z });
    }
    Ok(Point2::new(x.x / x.z, x.y / x.z))
}

/// Epipolar line in the camera opposite `source` for pixel `p`, normalized
/// so that `a^2 + b^2 = 1`.
pub fn epipolar_line(rig: &StereoRig, p: &Point2<f64>, source: CameraId) -> Result<Line2D> {
    let f = rig.fundamental()?;
    let ph = Vector3::new(p.x, p.y, 1.0);
    let l = match source {
        CameraId::Left => f * ph,
        CameraId::Right => f.transpose() * ph,
    };
    Line2D::from_coefficients(l).ok_or_else(|| {
        Error::DegenerateRig("pixel coincides with the epipole".into())
    })
}

#[derive(Serialize, Deserialize)]
struct CameraJson {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    width: u16,
    height: u16,
}

#[derive(Serialize, Deserialize)]
struct RigJson {
    left: CameraJson,
    right: CameraJson,
    #[serde(rename = "R_r2l")]
    r_r2l: [f64; 9],
    #[serde(rename = "T_r2l")]
    t_r2l: [f64; 3],
}

impl From<&Camera> for CameraJson {
    fn from(c: &Camera) -> Self {
        Self {
            fx: c.intrinsics.fx,
            fy: c.intrinsics.fy,
            cx: c.intrinsics.cx,
            cy: c.intrinsics.cy,
            width: c.width,
            height: c.height,
        }
    }
}

impl TryFrom<CameraJson> for Camera {
    type Error = Error;
    fn try_from(c: CameraJson) -> Result<Self> {
        Ok(Camera {
            intrinsics: CameraIntrinsics::new(c.fx, c.fy, c.cx, c.cy)?,
            width: c.width,
            height: c.height,
        })
    }
}

impl StereoRig {
    pub fn to_json(&self) -> Result<String> {
        let r = self.r_r2l.matrix();
        let mut rows = [0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                rows[3 * i + j] = r[(i, j)];
            }
        }
        let json = RigJson {
            left: (&self.left).into(),
            right: (&self.right).into(),
            r_r2l: rows,
            t_r2l: [self.t_r2l.x, self.t_r2l.y, self.t_r2l.z],
        };
        Ok(serde_json::to_string_pretty(&json)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let json: RigJson = serde_json::from_str(text)?;
        let r = Matrix3::from_row_slice(&json.r_r2l);
        StereoRig::new(
            json.left.try_into()?,
            json.right.try_into()?,
            r,
            Vector3::from(json.t_r2l),
        )
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}
