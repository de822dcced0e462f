use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::camera::PoseSE3;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryKind {
    ConstantScrew,
    Tumble,
}

/// Parametric object motion expressed in the left-camera frame.
///
/// `constant_screw`: `R(t) = Exp(w t u) R0`, `T(t) = T0 + v t`.
///
/// `tumble`: `R(t) = Exp(p t e) Exp(t (w u - p e)) R0`. The angular
/// velocity keeps magnitude `w` while its axis precesses about `e` at rate
/// `p`, starting from `u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrajectorySpec {
    pub kind: TrajectoryKind,
    /// Degrees per second.
    pub angular_velocity: f64,
    pub axis: [f64; 3],
    /// Meters per second.
    pub linear_velocity: [f64; 3],
    /// Seconds.
    pub duration: f64,
    /// Degrees per second, tumble only.
    pub precession_rate: f64,
    pub precession_axis: [f64; 3],
    /// Rotation vector (radians) of the pose at t = 0.
    pub initial_rotation: [f64; 3],
    pub initial_translation: [f64; 3],
}

impl Default for TrajectorySpec {
    fn default() -> Self {
        Self {
            kind: TrajectoryKind::ConstantScrew,
            angular_velocity: 0.0,
            axis: [0.0, 0.0, 1.0],
            linear_velocity: [0.0; 3],
            duration: 1.0,
            precession_rate: 0.0,
            precession_axis: [0.0, 0.0, 1.0],
            initial_rotation: [0.0; 3],
            initial_translation: [0.0, 0.0, 1.5],
        }
    }
}

impl TrajectorySpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::InvalidParameter(format!("duration must be positive, got {}", self.duration)));
        }
        for (name, a) in [("axis", self.axis), ("precession_axis", self.precession_axis)] {
            if !(Vector3::from(a).norm() > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be non-zero")));
            }
        }
        Ok(())
    }

    fn unit_axis(&self) -> Vector3<f64> {
        Vector3::from(self.axis).normalize()
    }

    fn precession(&self) -> Vector3<f64> {
        match self.kind {
            TrajectoryKind::ConstantScrew => Vector3::zeros(),
            TrajectoryKind::Tumble => {
                Vector3::from(self.precession_axis).normalize() * self.precession_rate.to_radians()
            }
        }
    }

    /// Angular velocity (rad/s, camera frame) at `t`.
    pub fn angular_velocity_at(&self, t: f64) -> Vector3<f64> {
        let w = self.unit_axis() * self.angular_velocity.to_radians();
        UnitQuaternion::from_scaled_axis(self.precession() * t) * w
    }
}

pub fn pose_at(spec: &TrajectorySpec, t: f64) -> Result<PoseSE3> {
    spec.validate()?;
    if !(0.0..=spec.duration).contains(&t) {
        return Err(Error::TimeOutOfRange { t, duration: spec.duration });
    }
    let r0 = UnitQuaternion::from_scaled_axis(Vector3::from(spec.initial_rotation));
    let w = spec.unit_axis() * spec.angular_velocity.to_radians();
    let p = spec.precession();
    let r = UnitQuaternion::from_scaled_axis(p * t) * UnitQuaternion::from_scaled_axis((w - p) * t) * r0;
    let tr = Vector3::from(spec.initial_translation) + Vector3::from(spec.linear_velocity) * t;
    Ok(PoseSE3::new(r, tr))
}
