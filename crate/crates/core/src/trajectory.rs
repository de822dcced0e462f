//! Timestamped pose sequences and their text format
//! (`t_s tx ty tz qx qy qz qw`, one sample per line).

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Quaternion, UnitQuaternion, Vector3};

use crate::camera::PoseSE3;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    samples: Vec<(f64, PoseSE3)>,
}

impl Trajectory {
    pub fn new(samples: Vec<(f64, PoseSE3)>) -> Result<Self> {
        for w in samples.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Format(format!(
                    "timestamps must increase strictly ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        Ok(Self { samples })
    }

    /// Appends a sample; `t` must exceed the last timestamp.
    pub fn push(&mut self, t: f64, pose: PoseSE3) -> Result<()> {
        if let Some(&(last, _)) = self.samples.last() {
            if !(t > last) {
                return Err(Error::Format(format!("timestamp {t} does not follow {last}")));
            }
        }
        self.samples.push((t, pose));
        Ok(())
    }

    pub fn samples(&self) -> &[(f64, PoseSE3)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn span(&self) -> Option<(f64, f64)> {
        Some((self.samples.first()?.0, self.samples.last()?.0))
    }

    /// Pose at `t`: slerp on rotation, linear on translation. Exact at
    /// sample times; `None` outside the covered span.
    pub fn interpolate(&self, t: f64) -> Option<PoseSE3> {
        let (t0, t1) = self.span()?;
        if t < t0 || t > t1 {
            return None;
        }
        let i = self.samples.partition_point(|s| s.0 <= t);
        let (ta, pa) = self.samples[i - 1];
        if ta == t || i == self.samples.len() {
            return Some(pa);
        }
        let (tb, pb) = self.samples[i];
        let s = (t - ta) / (tb - ta);
        Some(interpolate_pose(&pa, &pb, s))
    }

    /// Applies `f` to every pose.
    pub fn map_poses(&self, f: impl Fn(f64, &PoseSE3) -> PoseSE3) -> Self {
        Self {
            samples: self.samples.iter().map(|(t, p)| (*t, f(*t, p))).collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (t, p) in &self.samples {
            let tr = p.translation();
            let q = p.rotation().quaternion();
            writeln!(out, "{} {} {} {} {} {} {} {}", t, tr.x, tr.y, tr.z, q.i, q.j, q.k, q.w)
                .expect("writing to a String");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut samples = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let v: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Format(format!("line {}: {e}", ln + 1)))?;
            if v.len() != 8 {
                return Err(Error::Format(format!("line {}: expected 8 fields, found {}", ln + 1, v.len())));
            }
            let q = Quaternion::new(v[7], v[4], v[5], v[6]);
            let n = q.norm();
            if !(n > 0.0) {
                return Err(Error::Format(format!("line {}: zero quaternion", ln + 1)));
            }
            // Keep stored values bit-exact when they are already unit length.
            let q = if (n - 1.0).abs() < 1e-9 {
                UnitQuaternion::new_unchecked(q)
            } else {
                UnitQuaternion::from_quaternion(q)
            };
            samples.push((v[0], PoseSE3::new(q, Vector3::new(v[1], v[2], v[3]))));
        }
        Self::new(samples)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

pub fn interpolate_pose(a: &PoseSE3, b: &PoseSE3, s: f64) -> PoseSE3 {
    let qa = *a.rotation();
    let mut qb = *b.rotation();
    if qa.coords.dot(&qb.coords) < 0.0 {
        qb = UnitQuaternion::new_unchecked(-qb.into_inner());
    }
    let q = qa.try_slerp(&qb, s, 1e-12).unwrap_or(qa);
    PoseSE3::new(q, a.translation().lerp(&b.translation(), s))
}
