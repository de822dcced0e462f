//! Trajectory error metrics: relative pose error (RPE) and absolute
//! trajectory error (ATE).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::camera::PoseSE3;
use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

/// An estimate and the ground truth at the same time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PosePair {
    pub t: f64,
    pub est: PoseSE3,
    pub gt: PoseSE3,
}

/// Pairs every estimate with the ground truth interpolated at its time.
/// Estimates outside the ground-truth span are dropped.
pub fn align_time(est: &Trajectory, gt: &Trajectory) -> Result<Vec<PosePair>> {
    let pairs: Vec<_> = est
        .samples()
        .iter()
        .filter_map(|&(t, e)| gt.interpolate(t).map(|g| PosePair { t, est: e, gt: g }))
        .collect();
    if pairs.is_empty() {
        return Err(Error::NoOverlap);
    }
    Ok(pairs)
}

/// Re-expresses `est` in the ground-truth object frame by matching the two
/// at the first paired sample. Needed when the estimate is relative to a
/// reconstructed model whose frame is arbitrary.
pub fn anchor_to_ground_truth(est: &Trajectory, gt: &Trajectory) -> Result<Trajectory> {
    let first = align_time(est, gt)?[0];
    let g = first.est.inverse().compose(&first.gt);
    Ok(est.map_poses(|_, p| p.compose(&g)))
}

/// Error over one window `[t0, t1]`, per second.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowError {
    pub t0: f64,
    pub t1: f64,
    /// Degrees per second.
    pub rotation: f64,
    /// Centimeters per second.
    pub translation: f64,
}

/// Motion from sample `i` to sample `j` in the camera frame.
fn motion(a: &PoseSE3, b: &PoseSE3) -> PoseSE3 {
    b.compose(&a.inverse())
}

/// Per-window relative errors. Each sample opens a window that closes at
/// the first sample at least `delta` seconds later; errors are divided by
/// the actual window length.
pub fn rpe_windows(pairs: &[PosePair], delta: f64) -> Result<Vec<WindowError>> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("window must be positive, got {delta}")));
    }
    let span = match (pairs.first(), pairs.last()) {
        (Some(a), Some(b)) => b.t - a.t,
        _ => 0.0,
    };
    if pairs.len() < 2 || span < delta - 1e-9 {
        return Err(Error::InsufficientSpan { required: delta, available: span });
    }
    let mut out = Vec::new();
    for (i, a) in pairs.iter().enumerate() {
        let j = i + pairs[i..].partition_point(|p| p.t < a.t + delta - 1e-9);
        let Some(b) = pairs.get(j) else { break };
        let dt = b.t - a.t;
        let (mg, me) = (motion(&a.gt, &b.gt), motion(&a.est, &b.est));
        // Equal motions give exactly zero rather than rounding noise.
        let (rotation, translation) = if mg == me {
            (0.0, 0.0)
        } else {
            let e = mg.inverse().compose(&me);
            (e.rotation().angle().to_degrees() / dt, 100.0 * e.translation().norm() / dt)
        };
        out.push(WindowError { t0: a.t, t1: b.t, rotation, translation });
    }
    Ok(out)
}

fn rms(v: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut n) = (0.0, 0usize);
    for x in v {
        s += x * x;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        (s / n as f64).sqrt()
    }
}

/// Root-mean-square rotation (deg/s) and translation (cm/s) drift over
/// windows of `delta` seconds.
pub fn rpe(pairs: &[PosePair], delta: f64) -> Result<(f64, f64)> {
    let w = rpe_windows(pairs, delta)?;
    Ok((rms(w.iter().map(|w| w.rotation)), rms(w.iter().map(|w| w.translation))))
}

/// Root-mean-square translation error, centimeters. No alignment.
pub fn ate(pairs: &[PosePair]) -> f64 {
    100.0 * rms(pairs.iter().map(|p| (p.est.translation() - p.gt.translation()).norm()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    /// Degrees per second.
    pub r_rel: f64,
    /// Centimeters per second.
    pub t_rel: f64,
    /// Centimeters.
    pub t_abs: f64,
    pub windows: Vec<WindowError>,
}

impl ErrorReport {
    /// `R_rel,T_rel,T_abs` header and one row.
    pub fn table_row(&self) -> String {
        format!("R_rel,T_rel,T_abs\n{:.6},{:.6},{:.6}\n", self.r_rel, self.t_rel, self.t_abs)
    }

    pub fn windows_csv(&self) -> String {
        let mut s = String::from("t0_s,t1_s,rotation_deg_s,translation_cm_s\n");
        for w in &self.windows {
            let _ = writeln!(s, "{},{},{},{}", w.t0, w.t1, w.rotation, w.translation);
        }
        s
    }
}

/// RPE and ATE of `est` against `gt`. With `anchor`, `est` is first moved
/// into the ground-truth object frame by [`anchor_to_ground_truth`].
pub fn evaluate(est: &Trajectory, gt: &Trajectory, delta: f64, anchor: bool) -> Result<(ErrorReport, Vec<PosePair>)> {
    let est = if anchor { anchor_to_ground_truth(est, gt)? } else { est.clone() };
    let pairs = align_time(&est, gt)?;
    let windows = rpe_windows(&pairs, delta)?;
    let report = ErrorReport {
        r_rel: rms(windows.iter().map(|w| w.rotation)),
        t_rel: rms(windows.iter().map(|w| w.translation)),
        t_abs: ate(&pairs),
        windows,
    };
    Ok((report, pairs))
}

/// Paths written by [`report`] next to `out`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportFiles {
    pub table: PathBuf,
    pub windows: PathBuf,
    pub xy: PathBuf,
}

impl ReportFiles {
    pub fn beside(out: &Path) -> Self {
        let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
        let with = |suffix: &str| out.with_file_name(format!("{stem}{suffix}"));
        Self {
            table: out.to_path_buf(),
            windows: with("_windows.csv"),
            xy: with("_xy.dat"),
        }
    }
}

/// Evaluates and writes the table row to `out`, the per-window series and
/// a whitespace-separated trajectory file for plotting
/// (`t est_x est_y est_z gt_x gt_y gt_z`).
pub fn report(est: &Trajectory, gt: &Trajectory, delta: f64, anchor: bool, out: &Path) -> Result<ErrorReport> {
    let (rep, pairs) = evaluate(est, gt, delta, anchor)?;
    let files = ReportFiles::beside(out);
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(&files.table, rep.table_row())?;
    std::fs::write(&files.windows, rep.windows_csv())?;
    let mut xy = String::from("# t est_x est_y est_z gt_x gt_y gt_z\n");
    for p in &pairs {
        let (e, g) = (p.est.translation(), p.gt.translation());
        let _ = writeln!(xy, "{} {} {} {} {} {} {}", p.t, e.x, e.y, e.z, g.x, g.y, g.z);
    }
    std::fs::write(&files.xy, xy)?;
    Ok(rep)
}
