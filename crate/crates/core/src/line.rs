//! Plücker line algebra, the orthonormal line parameterization, planes,
//! 2D lines and segments, and point/event-to-line distances with their
//! analytic Jacobians.

use nalgebra::{
    Matrix3, Matrix3x4, Matrix3x6, Matrix4, Point2, Point3, Rotation2, Rotation3, RowVector4,
    RowVector6, Vector3, Vector4,
};

use crate::camera::{skew, CameraIntrinsics, PoseSE3, ProjectionMatrix};
use crate::error::{Error, Result};
use crate::event::Event;

/// 3D line in Plücker coordinates: moment `n = P x v` for any point `P` on
/// the line and unit direction `v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PluckerLine {
    pub n: Vector3<f64>,
    pub v: Vector3<f64>,
}

impl PluckerLine {
    /// Normalizes to `|v| = 1`. Rejects a zero direction and moments that
    /// violate `n . v = 0`.
    pub fn new(n: Vector3<f64>, v: Vector3<f64>) -> Result<Self> {
        let s = v.norm();
        if !(s > 1e-12) {
            return Err(Error::InvalidParameter("line direction is zero".into()));
        }
        let (n, v) = (n / s, v / s);
        if n.dot(&v).abs() > 1e-9 * (1.0 + n.norm()) {
            return Err(Error::InvalidParameter(format!(
                "Plücker constraint violated (n.v = {:e})",
                n.dot(&v)
            )));
        }
        Ok(Self { n, v })
    }

    /// Point on the line closest to the origin.
    pub fn closest_point_to_origin(&self) -> Point3<f64> {
        Point3::from(self.v.cross(&self.n) / self.v.norm_squared())
    }

    pub fn point_at(&self, s: f64) -> Point3<f64> {
        self.closest_point_to_origin() + self.v.normalize() * s
    }

    /// Signed coordinate of the orthogonal projection of `p` along the line.
    pub fn parameter_of(&self, p: &Point3<f64>) -> f64 {
        (p - self.closest_point_to_origin()).dot(&self.v.normalize())
    }

    pub fn distance_to_point(&self, p: &Point3<f64>) -> f64 {
        (p - perpendicular_foot(p, self)).norm()
    }

    /// Direction angle to another line, radians in `[0, pi/2]`.
    pub fn angle_to(&self, other: &PluckerLine) -> f64 {
        let c = self.v.normalize().dot(&other.v.normalize()).abs().min(1.0);
        c.acos()
    }
}

pub fn plucker_from_points(p1: &Point3<f64>, p2: &Point3<f64>) -> Result<PluckerLine> {
    let d = p2 - p1;
    let s = d.norm();
    if !(s > 1e-12) {
        return Err(Error::CoincidentPoints);
    }
    Ok(PluckerLine {
        n: p1.coords.cross(&p2.coords) / s,
        v: d / s,
    })
}

/// Plane `a x + b y + c z + d = 0` with `|(a, b, c)| = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plane3D(pub Vector4<f64>);

impl Plane3D {
    pub fn new(pi: Vector4<f64>) -> Result<Self> {
        let s = pi.xyz().norm();
        if !(s > 1e-300) {
            return Err(Error::InvalidParameter("plane normal is zero".into()));
        }
        Ok(Self(pi / s))
    }

    pub fn normal(&self) -> Vector3<f64> {
        self.0.xyz()
    }

    pub fn signed_distance(&self, p: &Point3<f64>) -> f64 {
        self.0.dot(&p.to_homogeneous())
    }
}

/// Dual Plücker matrix `L* = pi_l pi_r^T - pi_r pi_l^T`, laid out as
/// `[[ [v]x, n ], [ -n^T, 0 ]]`.
pub fn dual_plucker_matrix(pi_l: &Plane3D, pi_r: &Plane3D) -> Matrix4<f64> {
    pi_l.0 * pi_r.0.transpose() - pi_r.0 * pi_l.0.transpose()
}

pub fn triangulate_line(pi_l: &Plane3D, pi_r: &Plane3D) -> Result<PluckerLine> {
    let m = dual_plucker_matrix(pi_l, pi_r);
    let v = Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)]);
    let n = Vector3::new(m[(0, 3)], m[(1, 3)], m[(2, 3)]);
    let s = v.norm();
    if !(s > 1e-12) {
        return Err(Error::NoUniqueIntersection);
    }
    Ok(PluckerLine { n: n / s, v: v / s })
}

/// Plane through the camera center containing every point that projects
/// onto `l`.
pub fn backproject_plane(m: &ProjectionMatrix, l: &Line2D) -> Plane3D {
    Plane3D::new(m.0.transpose() * l.coefficients())
        .expect("projection matrix has rank 3")
}

pub fn transform_line(pose: &PoseSE3, l: &PluckerLine) -> PluckerLine {
    let r = pose.rotation_matrix();
    let rv = r * l.v;
    PluckerLine {
        n: r * l.n + pose.translation().cross(&rv),
        v: rv,
    }
}

/// Image line `K_e n_cam` of a camera-frame line.
pub fn project_line(k_e: &Matrix3<f64>, l_cam: &PluckerLine) -> Result<Line2D> {
    if !(l_cam.n.norm() > 1e-12 * l_cam.v.norm()) {
        return Err(Error::DegenerateProjection);
    }
    Line2D::from_coefficients(k_e * l_cam.n).ok_or(Error::DegenerateProjection)
}

pub fn point_line_signed_distance(p: &Point2<f64>, l: &Line2D) -> f64 {
    l.signed_distance(p)
}

/// Image line `a x + b y + c = 0`, stored with `a^2 + b^2 = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Line2D(Vector3<f64>);

impl Line2D {
    /// `None` when `(a, b)` is zero.
    pub fn from_coefficients(l: Vector3<f64>) -> Option<Self> {
        let s = l.xy().norm();
        (s > 1e-300 && s.is_finite()).then(|| Self(l / s))
    }

    pub fn through(p: &Point2<f64>, q: &Point2<f64>) -> Result<Self> {
        let l = Vector3::new(p.x, p.y, 1.0).cross(&Vector3::new(q.x, q.y, 1.0));
        Self::from_coefficients(l).ok_or(Error::CoincidentPoints)
    }

    pub fn coefficients(&self) -> Vector3<f64> {
        self.0
    }

    pub fn a(&self) -> f64 {
        self.0.x
    }

    pub fn b(&self) -> f64 {
        self.0.y
    }

    pub fn c(&self) -> f64 {
        self.0.z
    }

    pub fn normal(&self) -> nalgebra::Vector2<f64> {
        self.0.xy()
    }

    pub fn direction(&self) -> nalgebra::Vector2<f64> {
        nalgebra::Vector2::new(-self.0.y, self.0.x)
    }

    pub fn signed_distance(&self, p: &Point2<f64>) -> f64 {
        self.0.x * p.x + self.0.y * p.y + self.0.z
    }

    pub fn foot(&self, p: &Point2<f64>) -> Point2<f64> {
        p - self.normal() * self.signed_distance(p)
    }

    /// Undirected orientation in `[0, pi)`.
    pub fn angle(&self) -> f64 {
        let d = self.direction();
        d.y.atan2(d.x).rem_euclid(std::f64::consts::PI)
    }
}

/// Smallest angle between two undirected orientations, in `[0, pi/2]`.
pub fn orientation_difference(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::PI);
    d.min(std::f64::consts::PI - d)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment2D {
    pub line: Line2D,
    pub pa: Point2<f64>,
    pub pb: Point2<f64>,
    pub midpoint: Point2<f64>,
}

impl Segment2D {
    pub fn new(pa: Point2<f64>, pb: Point2<f64>) -> Result<Self> {
        Ok(Self {
            line: Line2D::through(&pa, &pb)?,
            pa,
            pb,
            midpoint: nalgebra::center(&pa, &pb),
        })
    }

    pub fn length(&self) -> f64 {
        (self.pb - self.pa).norm()
    }

    pub fn angle(&self) -> f64 {
        self.line.angle()
    }

    /// Position of the foot of `p` along the segment: 0 at `pa`, 1 at `pb`.
    pub fn parameter_of(&self, p: &Point2<f64>) -> f64 {
        let d = self.pb - self.pa;
        (p - self.pa).dot(&d) / d.norm_squared()
    }

    pub fn distance_to_point(&self, p: &Point2<f64>) -> f64 {
        let s = self.parameter_of(p).clamp(0.0, 1.0);
        (p - (self.pa + (self.pb - self.pa) * s)).norm()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment3D {
    pub line: PluckerLine,
    pub pa: Point3<f64>,
    pub pb: Point3<f64>,
}

impl Segment3D {
    pub fn new(pa: Point3<f64>, pb: Point3<f64>) -> Result<Self> {
        Ok(Self {
            line: plucker_from_points(&pa, &pb)?,
            pa,
            pb,
        })
    }

    pub fn length(&self) -> f64 {
        (self.pb - self.pa).norm()
    }

    pub fn midpoint(&self) -> Point3<f64> {
        nalgebra::center(&self.pa, &self.pb)
    }

    pub fn transform(&self, pose: &PoseSE3) -> Segment3D {
        Segment3D {
            line: transform_line(pose, &self.line),
            pa: pose.transform_point(&self.pa),
            pb: pose.transform_point(&self.pb),
        }
    }

    /// Image of the segment for a camera at `pose`. Both endpoints must be
    /// in front of the camera.
    pub fn project(&self, k: &CameraIntrinsics, pose: &PoseSE3) -> Result<Segment2D> {
        let (a, b) = (pose.transform_point(&self.pa), pose.transform_point(&self.pb));
        for p in [a, b] {
            if !(p.z > 0.0) {
                return Err(Error::BehindCamera { depth: p.z });
            }
        }
        Segment2D::new(k.project(&a.coords), k.project(&b.coords))
    }
}

/// Orthonormal line representation `(U, W)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrthonormalLine {
    pub u: Rotation3<f64>,
    pub w: Rotation2<f64>,
}

impl OrthonormalLine {
    /// `(w1, w2) = (cos, sin)` of `W`.
    pub fn weights(&self) -> (f64, f64) {
        let m = self.w.matrix();
        (m[(0, 0)], m[(1, 0)])
    }
}

/// Columns `[n/|n|, v/|v|, n x v / |n x v|]`. When `n` vanishes the first
/// column is the canonical basis vector least aligned with `v` (smallest
/// index on ties), orthogonalized against `v`.
pub fn plucker_to_orthonormal(l: &PluckerLine) -> OrthonormalLine {
    let vn = l.v.norm();
    let nn = l.n.norm();
    let u2 = l.v / vn;
    let u1 = if nn > 1e-12 * vn {
        // Re-orthogonalize so U stays exactly orthonormal.
        let n = l.n - u2 * u2.dot(&l.n);
        n.normalize()
    } else {
        let k = (0..3)
            .min_by(|&i, &j| u2[i].abs().total_cmp(&u2[j].abs()))
            .unwrap();
        let e = Vector3::ith(k, 1.0);
        (e - u2 * u2.dot(&e)).normalize()
    };
    let u3 = u1.cross(&u2);
    let u = Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[u1, u2, u3]));
    let s = (nn * nn + vn * vn).sqrt();
    let w = Rotation2::from_matrix_unchecked(nalgebra::Matrix2::new(
        nn / s,
        -vn / s,
        vn / s,
        nn / s,
    ));
    OrthonormalLine { u, w }
}

/// Inverse of [`plucker_to_orthonormal`], normalized to `|v| = 1`.
pub fn orthonormal_to_plucker(o: &OrthonormalLine) -> PluckerLine {
    let (w1, w2) = o.weights();
    let m = o.u.matrix();
    let u1 = m.column(0).into_owned();
    let u2 = m.column(1).into_owned();
    PluckerLine {
        n: u1 * (w1 / w2),
        v: u2,
    }
}

/// `U <- U Exp(d[0..3])`, `W <- W Rot2(d[3])`.
pub fn orthonormal_update(o: &OrthonormalLine, delta: &Vector4<f64>) -> OrthonormalLine {
    let d = Vector3::new(delta[0], delta[1], delta[2]);
    OrthonormalLine {
        u: o.u * Rotation3::new(d),
        w: o.w * Rotation2::new(delta[3]),
    }
}

/// Linear triangulation from two views with unit-normalized rows.
pub fn triangulate_point_dlt(
    p_l: &Point2<f64>,
    p_r: &Point2<f64>,
    m_l: &ProjectionMatrix,
    m_r: &ProjectionMatrix,
) -> Result<Point3<f64>> {
    let rows = [
        m_l.row(2) * p_l.x - m_l.row(0),
        m_l.row(2) * p_l.y - m_l.row(1),
        m_r.row(2) * p_r.x - m_r.row(0),
        m_r.row(2) * p_r.y - m_r.row(1),
    ];
    let mut a = Matrix4::zeros();
    for (i, r) in rows.iter().enumerate() {
        let s = r.norm();
        if !(s > 0.0) {
            return Err(Error::IllConditionedTriangulation);
        }
        a.set_row(i, &(r / s).transpose());
    }
    let svd = a.svd(false, true);
    let vt = svd.v_t.ok_or(Error::IllConditionedTriangulation)?;
    let mut idx: Vec<usize> = (0..4).collect();
    idx.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let (s0, s1) = (svd.singular_values[idx[0]], svd.singular_values[idx[1]]);
    if s1 - s0 < 1e-10 {
        return Err(Error::IllConditionedTriangulation);
    }
    let x = vt.row(idx[0]).transpose();
    if !(x.w.abs() > 1e-12 * x.xyz().norm()) {
        return Err(Error::IllConditionedTriangulation);
    }
    Ok(Point3::from(x.xyz() / x.w))
}

pub fn perpendicular_foot(p: &Point3<f64>, l: &PluckerLine) -> Point3<f64> {
    let v = l.v.normalize();
    let p0 = l.closest_point_to_origin();
    p0 + v * (p - p0).dot(&v)
}

/// Signed pixel distance of an event to the image of `l` for a camera at
/// `pose` with line intrinsics `k_e`.
pub fn event_line_distance(
    e: &Event,
    k_e: &Matrix3<f64>,
    pose: &PoseSE3,
    l: &PluckerLine,
) -> Result<f64> {
    pixel_line_distance(&e.pixel(), k_e, pose, l)
}

pub fn pixel_line_distance(
    p: &Point2<f64>,
    k_e: &Matrix3<f64>,
    pose: &PoseSE3,
    l: &PluckerLine,
) -> Result<f64> {
    let img = project_line(k_e, &transform_line(pose, l))?;
    Ok(img.signed_distance(p))
}

/// Derivative of the normalized distance of `p` to the unnormalized image
/// line `l` with respect to `l`, together with the distance.
fn distance_wrt_line(p: &Point2<f64>, l: &Vector3<f64>) -> Result<(f64, Vector3<f64>)> {
    let s = l.xy().norm();
    if !(s > 1e-300) {
        return Err(Error::DegenerateProjection);
    }
    let e = Vector3::new(p.x, p.y, 1.0);
    let d = e.dot(l) / s;
    let g = (e - Vector3::new(l.x, l.y, 0.0) * (d / s)) / s;
    Ok((d, g))
}

/// Camera-frame moment and its derivative with respect to a right
/// multiplicative update of `pose` (columns: rotation, then translation).
/// `extrinsic` optionally maps this pose's frame into a second camera,
/// e.g. the left-to-right transform of a stereo rig.
fn moment_pose_jacobian(
    pose: &PoseSE3,
    extrinsic: Option<&PoseSE3>,
    l: &PluckerLine,
) -> (Vector3<f64>, Matrix3x6<f64>) {
    let r = pose.rotation_matrix();
    let t = pose.translation();
    let rv = r * l.v;
    let n_c = r * l.n + t.cross(&rv);
    let dv_dw = -r * skew(&l.v);
    let dn_dw = -r * skew(&l.n) + skew(&t) * dv_dw;
    let dn_dt = dv_dw;
    let mut jn = Matrix3x6::zeros();
    jn.fixed_view_mut::<3, 3>(0, 0).copy_from(&dn_dw);
    jn.fixed_view_mut::<3, 3>(0, 3).copy_from(&dn_dt);
    match extrinsic {
        None => (n_c, jn),
        Some(c) => {
            let rc = c.rotation_matrix();
            let tc = skew(&c.translation()) * rc;
            let mut jv = Matrix3x6::zeros();
            jv.fixed_view_mut::<3, 3>(0, 0).copy_from(&dv_dw);
            (rc * n_c + tc * rv, rc * jn + tc * jv)
        }
    }
}

/// Signed distance of `p` to the image of `l` and its gradient with
/// respect to the 6-vector update `(omega, tau)` of `pose`, where
/// `R' = R Exp(omega)`, `T' = T + R tau`. With `extrinsic`, the camera
/// observing `p` sits at `extrinsic * pose`.
pub fn pixel_line_distance_pose_jacobian(
    p: &Point2<f64>,
    k_e: &Matrix3<f64>,
    pose: &PoseSE3,
    extrinsic: Option<&PoseSE3>,
    l: &PluckerLine,
) -> Result<(f64, RowVector6<f64>)> {
    let (n_c, jn) = moment_pose_jacobian(pose, extrinsic, l);
    if !(n_c.norm() > 1e-12) {
        return Err(Error::DegenerateProjection);
    }
    let (d, g) = distance_wrt_line(p, &(k_e * n_c))?;
    Ok((d, (g.transpose() * k_e) * jn))
}

/// Signed distance of `p` to the image of the orthonormal line `o` seen
/// from `pose`, and its gradient with respect to the 4-vector update of
/// [`orthonormal_update`].
pub fn pixel_line_distance_line_jacobian(
    p: &Point2<f64>,
    k_e: &Matrix3<f64>,
    pose: &PoseSE3,
    o: &OrthonormalLine,
) -> Result<(f64, RowVector4<f64>)> {
    let (w1, w2) = o.weights();
    let m = o.u.matrix();
    let (u1, u2, u3) = (
        m.column(0).into_owned(),
        m.column(1).into_owned(),
        m.column(2).into_owned(),
    );
    let n = u1 * w1;
    let v = u2 * w2;
    let mut dn = Matrix3x4::zeros();
    dn.set_column(1, &(-u3 * w1));
    dn.set_column(2, &(u2 * w1));
    dn.set_column(3, &(-u1 * w2));
    let mut dv = Matrix3x4::zeros();
    dv.set_column(0, &(u3 * w2));
    dv.set_column(2, &(-u1 * w2));
    dv.set_column(3, &(u2 * w1));
    let r = pose.rotation_matrix();
    let tr = skew(&pose.translation()) * r;
    let n_c = r * n + tr * v;
    if !(n_c.norm() > 1e-12) {
        return Err(Error::DegenerateProjection);
    }
    let (d, g) = distance_wrt_line(p, &(k_e * n_c))?;
    Ok((d, (g.transpose() * k_e) * (r * dn + tr * dv)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::line_intrinsics;
    use crate::camera::tests::random_pose;
    use crate::event::Polarity;
    use approx::assert_relative_eq;
    use nalgebra::{Vector6, Matrix2};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_point(rng: &mut impl Rng, lo: f64, hi: f64) -> Point3<f64> {
        Point3::new(
            rng.random_range(lo..hi),
            rng.random_range(lo..hi),
            rng.random_range(lo..hi),
        )
    }

    fn rand_line(rng: &mut impl Rng) -> PluckerLine {
        loop {
            if let Ok(l) = plucker_from_points(&rand_point(rng, -2.0, 2.0), &rand_point(rng, -2.0, 2.0)) {
                return l;
            }
        }
    }

    fn rand_plane(rng: &mut impl Rng) -> Plane3D {
        Plane3D::new(Vector4::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-2.0..2.0),
        ))
        .unwrap()
    }

    fn rand_camera(rng: &mut impl Rng) -> CameraIntrinsics {
        CameraIntrinsics::new(
            rng.random_range(200.0..800.0),
            rng.random_range(200.0..800.0),
            rng.random_range(200.0..400.0),
            rng.random_range(150.0..300.0),
        )
        .unwrap()
    }

    /// Pose of a camera at `center` looking at the origin region, with a
    /// random roll, so that random lines near the origin are visible.
    fn viewing_pose(rng: &mut impl Rng) -> PoseSE3 {
        let c = random_pose(rng);
        let t = Vector3::new(
            rng.random_range(-0.3..0.3),
            rng.random_range(-0.3..0.3),
            rng.random_range(4.0..6.0),
        );
        PoseSE3::new(*c.rotation(), t)
    }

    fn project_h(m: &ProjectionMatrix, p: &Point3<f64>) -> Point2<f64> {
        let x = m.0 * p.to_homogeneous();
        Point2::new(x.x / x.z, x.y / x.z)
    }

    /// Normalize to `|v| = 1` and a fixed sign for comparisons.
    fn canonical(l: &PluckerLine) -> (Vector3<f64>, Vector3<f64>) {
        let s = l.v.norm();
        let (n, v) = (l.n / s, l.v / s);
        let k = (0..3).max_by(|&i, &j| v[i].abs().total_cmp(&v[j].abs())).unwrap();
        if v[k] < 0.0 {
            (-n, -v)
        } else {
            (n, v)
        }
    }

    fn assert_same_line(a: &PluckerLine, b: &PluckerLine, tol: f64) {
        let (na, va) = canonical(a);
        let (nb, vb) = canonical(b);
        assert!((na - nb).amax() < tol && (va - vb).amax() < tol, "{a:?} vs {b:?}");
    }

    #[test]
    fn plucker_examples() {
        let l = plucker_from_points(&Point3::origin(), &Point3::new(0.0, 0.0, 1.0)).unwrap();
        assert_eq!(l.n, Vector3::zeros());
        assert_eq!(l.v, Vector3::z());
        let l = plucker_from_points(&Point3::new(1.0, 0.0, 0.0), &Point3::new(1.0, 0.0, 1.0)).unwrap();
        assert_eq!(l.v, Vector3::z());
        assert_eq!(l.n, Vector3::new(0.0, -1.0, 0.0));
        assert!(matches!(
            plucker_from_points(&Point3::new(1.0, 2.0, 3.0), &Point3::new(1.0, 2.0, 3.0)),
            Err(Error::CoincidentPoints)
        ));
    }

    #[test]
    fn plucker_points_lie_on_line() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let (a, b) = (rand_point(&mut rng, -5.0, 5.0), rand_point(&mut rng, -5.0, 5.0));
            let l = plucker_from_points(&a, &b).unwrap();
            assert!(l.n.dot(&l.v).abs() < 1e-9);
            // Residual |P x v - n| vanishes for points on the line.
            for p in [a, b] {
                assert!((p.coords.cross(&l.v) - l.n).norm() < 1e-9);
                assert!(l.distance_to_point(&p) < 1e-9);
            }
        }
    }

    #[test]
    fn triangulate_line_examples() {
        let x0 = Plane3D::new(Vector4::new(1.0, 0.0, 0.0, 0.0)).unwrap();
        let y0 = Plane3D::new(Vector4::new(0.0, 1.0, 0.0, 0.0)).unwrap();
        let z1 = Plane3D::new(Vector4::new(0.0, 0.0, 1.0, -1.0)).unwrap();
        let l = triangulate_line(&x0, &y0).unwrap();
        assert_eq!(l.n, Vector3::zeros());
        assert_relative_eq!(l.v.cross(&Vector3::z()).norm(), 0.0);
        let l = triangulate_line(&x0, &z1).unwrap();
        assert_relative_eq!(l.v, Vector3::y(), epsilon = 1e-15);
        assert_relative_eq!(l.n, Vector3::new(-1.0, 0.0, 0.0), epsilon = 1e-15);
        assert!(l.distance_to_point(&Point3::new(0.0, 0.0, 1.0)) < 1e-15);
        let z2 = Plane3D::new(Vector4::new(0.0, 0.0, 2.0, -4.0)).unwrap();
        assert!(matches!(triangulate_line(&z1, &z2), Err(Error::NoUniqueIntersection)));
    }

    #[test]
    fn triangulated_line_lies_on_both_planes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let (a, b) = (rand_plane(&mut rng), rand_plane(&mut rng));
            let l = triangulate_line(&a, &b).unwrap();
            for i in 0..10 {
                let p = l.point_at(i as f64 - 5.0);
                assert!(a.signed_distance(&p).abs() < 1e-8);
                assert!(b.signed_distance(&p).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn backproject_examples() {
        let k = CameraIntrinsics::new(1.0, 1.0, 0.0, 0.0).unwrap();
        let m = ProjectionMatrix::new(&k, &PoseSE3::identity());
        let l = Line2D::from_coefficients(Vector3::new(0.0, 1.0, 0.0)).unwrap();
        assert_eq!(backproject_plane(&m, &l).0, Vector4::new(0.0, 1.0, 0.0, 0.0));
        let l = Line2D::from_coefficients(Vector3::new(1.0, 0.0, -5.0)).unwrap();
        let pi = backproject_plane(&m, &l);
        assert!(pi.signed_distance(&Point3::new(5.0, 3.0, 1.0)).abs() < 1e-15);
        assert!(pi.signed_distance(&Point3::new(10.0, -1.0, 2.0)).abs() < 1e-15);
    }

    #[test]
    fn backprojected_plane_points_project_onto_line() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let k = rand_camera(&mut rng);
            let pose = random_pose(&mut rng);
            let m = ProjectionMatrix::new(&k, &pose);
            let l = Line2D::through(
                &Point2::new(rng.random_range(0.0..640.0), rng.random_range(0.0..480.0)),
                &Point2::new(rng.random_range(0.0..640.0), rng.random_range(0.0..480.0)),
            )
            .unwrap();
            let pi = backproject_plane(&m, &l);
            let nrm = pi.normal();
            let basis_a = nrm.cross(&Vector3::x()).normalize();
            let basis_b = nrm.cross(&basis_a);
            let p0 = Point3::from(-nrm * pi.0.w);
            for _ in 0..5 {
                let p = p0 + basis_a * rng.random_range(-3.0..3.0) + basis_b * rng.random_range(-3.0..3.0);
                if (pose.transform_point(&p).z).abs() < 0.05 {
                    continue;
                }
                assert!(l.signed_distance(&project_h(&m, &p)).abs() < 1e-8);
            }
            // The image line is recovered from the plane normal via K_e.
            let n_cam = pose.rotation_matrix() * nrm;
            let back = Line2D::from_coefficients(line_intrinsics(&k) * n_cam).unwrap();
            let sign = back.coefficients().dot(&l.coefficients()).signum();
            assert_relative_eq!(back.coefficients() * sign, l.coefficients(), epsilon = 1e-9);
        }
    }

    #[test]
    fn unproject_then_project_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..100 {
            let k = rand_camera(&mut rng);
            let pose = random_pose(&mut rng);
            let px = Point2::new(rng.random_range(0.0..640.0), rng.random_range(0.0..480.0));
            let ray = pose.rotation().inverse() * k.unproject(&px);
            let center = Point3::from(-(pose.rotation().inverse() * pose.translation()));
            let p = center + ray * rng.random_range(0.5..10.0);
            let m = ProjectionMatrix::new(&k, &pose);
            let back = crate::camera::point_projection(&m, &p.to_homogeneous()).unwrap();
            assert_relative_eq!(back, px, epsilon = 1e-8);
        }
    }

    #[test]
    fn transform_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let l = rand_line(&mut rng);
        assert_eq!(transform_line(&PoseSE3::identity(), &l), l);
        let z = plucker_from_points(&Point3::origin(), &Point3::new(0.0, 0.0, 1.0)).unwrap();
        let up = PoseSE3::new(nalgebra::UnitQuaternion::identity(), Vector3::z());
        let t = transform_line(&up, &z);
        assert_eq!(t.n, Vector3::zeros());
        assert_eq!(t.v, Vector3::z());
    }

    #[test]
    fn transform_matches_transformed_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let (a, b) = (rand_point(&mut rng, -2.0, 2.0), rand_point(&mut rng, -2.0, 2.0));
            let pose = random_pose(&mut rng);
            let got = transform_line(&pose, &plucker_from_points(&a, &b).unwrap());
            let want = plucker_from_points(&pose.transform_point(&a), &pose.transform_point(&b)).unwrap();
            assert_relative_eq!(got.n, want.n, epsilon = 1e-10);
            assert_relative_eq!(got.v, want.v, epsilon = 1e-10);
            assert!(got.n.dot(&got.v).abs() < 1e-9);
        }
    }

    #[test]
    fn project_examples() {
        let l = PluckerLine::new(Vector3::y(), Vector3::x()).unwrap();
        let img = project_line(&Matrix3::identity(), &l).unwrap();
        assert_eq!(img.coefficients(), Vector3::new(0.0, 1.0, 0.0));
        let k = CameraIntrinsics::new(250.0, 250.0, 0.0, 0.0).unwrap();
        let ke = line_intrinsics(&k);
        assert_eq!(ke * Vector3::x(), Vector3::new(250.0, 0.0, 0.0));
        let l = PluckerLine::new(Vector3::x(), Vector3::new(0.0, -1.0, 0.0)).unwrap();
        assert_eq!(project_line(&ke, &l).unwrap().coefficients(), Vector3::x());
        let through_center = plucker_from_points(&Point3::origin(), &Point3::new(0.1, 0.2, 1.0)).unwrap();
        assert!(matches!(project_line(&ke, &through_center), Err(Error::DegenerateProjection)));
    }

    #[test]
    fn projected_points_lie_on_projected_line() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..300 {
            let k = rand_camera(&mut rng);
            let pose = viewing_pose(&mut rng);
            let l = rand_line(&mut rng);
            let img = project_line(&line_intrinsics(&k), &transform_line(&pose, &l)).unwrap();
            let m = ProjectionMatrix::new(&k, &pose);
            for s in [-1.0, -0.2, 0.4, 1.3] {
                let p = l.point_at(s);
                if pose.transform_point(&p).z < 0.5 {
                    continue;
                }
                assert!(img.signed_distance(&project_h(&m, &p)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn signed_distance_examples() {
        let l = Line2D::from_coefficients(Vector3::new(0.0, 1.0, -1.0)).unwrap();
        assert_eq!(point_line_signed_distance(&Point2::origin(), &l), -1.0);
        assert_eq!(point_line_signed_distance(&Point2::new(3.0, 1.0), &l), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let l = Line2D::from_coefficients(Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-100.0..100.0),
            ))
            .unwrap();
            let p = Point2::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0));
            // Foot by explicit minimization along the line's parametric form.
            let q0 = l.foot(&Point2::origin());
            let dir = l.direction();
            let s = (p - q0).dot(&dir);
            let foot = q0 + dir * s;
            assert!(l.signed_distance(&foot).abs() < 1e-9);
            assert_relative_eq!(
                point_line_signed_distance(&p, &l).abs(),
                (p - foot).norm(),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn orthonormal_examples() {
        let z = PluckerLine::new(Vector3::zeros(), Vector3::z()).unwrap();
        let o = plucker_to_orthonormal(&z);
        assert_eq!(o.weights(), (0.0, 1.0));
        assert_eq!(orthonormal_to_plucker(&o), z);
        let l = PluckerLine::new(Vector3::x(), Vector3::y()).unwrap();
        let o = plucker_to_orthonormal(&l);
        assert_eq!(*o.u.matrix(), Matrix3::identity());
        let (w1, w2) = o.weights();
        assert_relative_eq!(w1, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_relative_eq!(w2, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn degenerate_column_completion_is_deterministic() {
        let l = PluckerLine::new(Vector3::zeros(), Vector3::new(1.0, 1.0, 0.0)).unwrap();
        let o = plucker_to_orthonormal(&l);
        assert_relative_eq!(o.u.matrix().column(0).into_owned(), Vector3::z(), epsilon = 1e-15);
        let l = PluckerLine::new(Vector3::zeros(), Vector3::x()).unwrap();
        let o = plucker_to_orthonormal(&l);
        assert_relative_eq!(o.u.matrix().column(0).into_owned(), Vector3::y(), epsilon = 1e-15);
    }

    fn assert_rotation(m: &Matrix3<f64>) {
        assert!((m.transpose() * m - Matrix3::identity()).amax() < 1e-9);
        assert!((m.determinant() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn orthonormal_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..1000 {
            let l = rand_line(&mut rng);
            let o = plucker_to_orthonormal(&l);
            assert_rotation(o.u.matrix());
            let w = o.w.matrix();
            assert!((w.transpose() * w - Matrix2::identity()).amax() < 1e-9);
            let back = orthonormal_to_plucker(&o);
            assert!(back.n.dot(&back.v).abs() < 1e-9);
            assert_same_line(&l, &back, 1e-10);
        }
    }

    #[test]
    fn orthonormal_update_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let o = plucker_to_orthonormal(&rand_line(&mut rng));
        assert_eq!(orthonormal_update(&o, &Vector4::zeros()), o);
        let l = PluckerLine::new(Vector3::x() * 0.5, Vector3::y()).unwrap();
        let o = plucker_to_orthonormal(&l);
        let (w1, w2) = o.weights();
        let (r1, r2) = orthonormal_update(&o, &Vector4::new(0.0, 0.0, 0.0, std::f64::consts::FRAC_PI_2)).weights();
        assert_relative_eq!(r1, -w2, epsilon = 1e-15);
        assert_relative_eq!(r2, w1, epsilon = 1e-15);
        for _ in 0..200 {
            let o = plucker_to_orthonormal(&rand_line(&mut rng));
            let d = Vector4::from_fn(|_, _| rng.random_range(-1.0..1.0));
            let there = orthonormal_update(&o, &d);
            assert_rotation(there.u.matrix());
            let back = orthonormal_update(&there, &-d);
            assert!((back.u.matrix() - o.u.matrix()).amax() < 1e-10);
            assert!((back.w.matrix() - o.w.matrix()).amax() < 1e-10);
        }
    }

    #[test]
    fn dlt_examples() {
        let k = CameraIntrinsics::new(1.0, 1.0, 0.0, 0.0).unwrap();
        let ml = ProjectionMatrix::new(&k, &PoseSE3::identity());
        // Right camera centered at x = -0.2.
        let right = PoseSE3::new(nalgebra::UnitQuaternion::identity(), Vector3::new(0.2, 0.0, 0.0));
        let mr = ProjectionMatrix::new(&k, &right);
        let p = triangulate_point_dlt(&Point2::new(0.0, 0.0), &Point2::new(0.1, 0.0), &ml, &mr).unwrap();
        assert_relative_eq!(p, Point3::new(0.0, 0.0, 2.0), epsilon = 1e-9);
        assert!(matches!(
            triangulate_point_dlt(&Point2::new(0.3, 0.1), &Point2::new(0.3, 0.1), &ml, &ml),
            Err(Error::IllConditionedTriangulation)
        ));
    }

    #[test]
    fn dlt_recovers_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..500 {
            let k = rand_camera(&mut rng);
            let pl = viewing_pose(&mut rng);
            let offset = PoseSE3::from_axis_angle(
                Vector3::from_fn(|_, _| rng.random_range(-0.05..0.05)),
                Vector3::new(-0.2, rng.random_range(-0.02..0.02), rng.random_range(-0.02..0.02)),
            );
            let pr = offset.compose(&pl);
            let (ml, mr) = (ProjectionMatrix::new(&k, &pl), ProjectionMatrix::new(&k, &pr));
            let p = rand_point(&mut rng, -1.0, 1.0);
            let got = triangulate_point_dlt(&project_h(&ml, &p), &project_h(&mr, &p), &ml, &mr).unwrap();
            assert!((got - p).norm() < 1e-8, "{}", (got - p).norm());
        }
    }

    #[test]
    fn perpendicular_foot_examples() {
        let z = PluckerLine::new(Vector3::zeros(), Vector3::z()).unwrap();
        assert_eq!(perpendicular_foot(&Point3::new(1.0, 0.0, 5.0), &z), Point3::new(0.0, 0.0, 5.0));
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let l = rand_line(&mut rng);
            let on = l.point_at(rng.random_range(-3.0..3.0));
            assert_relative_eq!(perpendicular_foot(&on, &l), on, epsilon = 1e-12);
            let p = rand_point(&mut rng, -3.0, 3.0);
            let q = perpendicular_foot(&p, &l);
            assert!((p - q).dot(&l.v).abs() < 1e-12);
            // Grid search along the line.
            let best = (0..=20000)
                .map(|i| {
                    let s = -10.0 + i as f64 * 1e-3;
                    (l.point_at(s) - p).norm()
                })
                .fold(f64::INFINITY, f64::min);
            assert!((p - q).norm() <= best + 1e-12);
            assert!(best - (p - q).norm() < 1e-6);
        }
    }

    fn event_at(p: Point2<f64>) -> Option<Event> {
        (p.x >= 0.0 && p.y >= 0.0 && p.x.fract() == 0.0 && p.y.fract() == 0.0 && p.x < 65535.0 && p.y < 65535.0)
            .then(|| Event::new(p.x as u16, p.y as u16, 0, Polarity::Positive))
    }

    #[test]
    fn event_distance_examples() {
        // Image line x = 100 via a camera with unit line intrinsics.
        let k = CameraIntrinsics::new(100.0, 100.0, 0.0, 0.0).unwrap();
        let ke = line_intrinsics(&k);
        let l = plucker_from_points(&Point3::new(1.0, 0.0, 1.0), &Point3::new(1.0, 1.0, 1.0)).unwrap();
        let pose = PoseSE3::identity();
        let on = event_at(Point2::new(100.0, 37.0)).unwrap();
        assert!(event_line_distance(&on, &ke, &pose, &l).unwrap().abs() < 1e-9);
        let off = event_at(Point2::new(101.0, 37.0)).unwrap();
        assert_relative_eq!(event_line_distance(&off, &ke, &pose, &l).unwrap().abs(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn event_distance_matches_decomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..500 {
            let k = rand_camera(&mut rng);
            let ke = line_intrinsics(&k);
            let pose = viewing_pose(&mut rng);
            let l = rand_line(&mut rng);
            let e = Event::new(rng.random_range(0..640), rng.random_range(0..480), 5, Polarity::Negative);
            let got = event_line_distance(&e, &ke, &pose, &l).unwrap();
            // Two-step: project endpoints through K_p[R|T], build the image
            // line from them, and measure the Euclidean distance.
            let m = ProjectionMatrix::new(&k, &pose);
            let img = Line2D::through(&project_h(&m, &l.point_at(-0.5)), &project_h(&m, &l.point_at(0.5))).unwrap();
            let want = img.signed_distance(&e.pixel());
            assert!((got.abs() - want.abs()).abs() < 1e-10 * (1.0 + want.abs()), "{got} {want}");
            // Positive rescaling of (n, v) leaves the distance unchanged.
            let s = rng.random_range(0.1..10.0);
            let scaled = PluckerLine { n: l.n * s, v: l.v * s };
            assert_relative_eq!(event_line_distance(&e, &ke, &pose, &scaled).unwrap(), got, epsilon = 1e-9);
        }
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-3)
    }

    #[test]
    fn pose_jacobian_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let rig = crate::camera::tests::test_rig();
        let c = rig.left_to_right();
        let mut worst: f64 = 0.0;
        for i in 0..1000 {
            let k = rand_camera(&mut rng);
            let ke = line_intrinsics(&k);
            let pose = viewing_pose(&mut rng);
            let l = rand_line(&mut rng);
            let p = Point2::new(rng.random_range(0.0..640.0), rng.random_range(0.0..480.0));
            let ext = (i % 2 == 1).then_some(&c);
            let cam = |x: &PoseSE3| ext.map_or(*x, |c| c.compose(x));
            let (d, j) = pixel_line_distance_pose_jacobian(&p, &ke, &pose, ext, &l).unwrap();
            assert_relative_eq!(d, pixel_line_distance(&p, &ke, &cam(&pose), &l).unwrap(), epsilon = 1e-9);
            let h = 1e-6;
            for a in 0..6 {
                let dx = Vector6::ith(a, h);
                let fp = pixel_line_distance(&p, &ke, &cam(&pose.retract(&dx)), &l).unwrap();
                let fm = pixel_line_distance(&p, &ke, &cam(&pose.retract(&-dx)), &l).unwrap();
                let fd = (fp - fm) / (2.0 * h);
                worst = worst.max(rel_err(j[a], fd));
            }
        }
        assert!(worst < 1e-5, "worst relative error {worst}");
    }

    #[test]
    fn line_jacobian_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let k = rand_camera(&mut rng);
            let ke = line_intrinsics(&k);
            let pose = viewing_pose(&mut rng);
            let o = plucker_to_orthonormal(&rand_line(&mut rng));
            let p = Point2::new(rng.random_range(0.0..640.0), rng.random_range(0.0..480.0));
            let (d, j) = pixel_line_distance_line_jacobian(&p, &ke, &pose, &o).unwrap();
            let f = |o: &OrthonormalLine| pixel_line_distance(&p, &ke, &pose, &orthonormal_to_plucker(o)).unwrap();
            assert_relative_eq!(d, f(&o), epsilon = 1e-9);
            let h = 1e-6;
            for a in 0..4 {
                let dx = Vector4::ith(a, h);
                let fd = (f(&orthonormal_update(&o, &dx)) - f(&orthonormal_update(&o, &-dx))) / (2.0 * h);
                worst = worst.max(rel_err(j[a], fd));
            }
        }
        assert!(worst < 1e-5, "worst relative error {worst}");
    }

    #[test]
    fn project_backproject_triangulate_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let rig = crate::camera::tests::test_rig();
        for _ in 0..300 {
            let pose = viewing_pose(&mut rng);
            let l = rand_line(&mut rng);
            let (ml, mr) = rig.projection_matrices(&pose);
            let pr = crate::camera::stereo_pose_chain(&pose, &rig);
            let il = project_line(&rig.left.intrinsics.line_matrix(), &transform_line(&pose, &l)).unwrap();
            let ir = project_line(&rig.right.intrinsics.line_matrix(), &transform_line(&pr, &l)).unwrap();
            let back = triangulate_line(&backproject_plane(&ml, &il), &backproject_plane(&mr, &ir)).unwrap();
            assert!(back.angle_to(&l) < 1e-6);
            assert!(back.distance_to_point(&l.point_at(0.3)) < 1e-6);
        }
    }

    #[test]
    fn segment2d_helpers() {
        let s = Segment2D::new(Point2::new(0.0, 0.0), Point2::new(10.0, 0.0)).unwrap();
        assert_eq!(s.midpoint, Point2::new(5.0, 0.0));
        assert_eq!(s.length(), 10.0);
        assert_eq!(s.distance_to_point(&Point2::new(13.0, 4.0)), 5.0);
        assert_eq!(s.distance_to_point(&Point2::new(3.0, -2.0)), 2.0);
        assert_relative_eq!(orientation_difference(0.1, std::f64::consts::PI - 0.1), 0.2, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn transform_preserves_plucker_constraint(
            a in prop::array::uniform3(-5.0f64..5.0),
            b in prop::array::uniform3(-5.0f64..5.0),
            w in prop::array::uniform3(-3.0f64..3.0),
            t in prop::array::uniform3(-5.0f64..5.0),
        ) {
            let (a, b) = (Point3::from(a), Point3::from(b));
            prop_assume!((a - b).norm() > 1e-3);
            let l = plucker_from_points(&a, &b).unwrap();
            let pose = PoseSE3::from_axis_angle(Vector3::from(w), Vector3::from(t));
            let m = transform_line(&pose, &l);
            prop_assert!(m.n.dot(&m.v).abs() < 1e-9);
            let o = orthonormal_to_plucker(&plucker_to_orthonormal(&m));
            prop_assert!(o.n.dot(&o.v).abs() < 1e-9);
        }
    }
}
