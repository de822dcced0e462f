//! Structure-only line refinement with the camera poses held fixed.

use nalgebra::{DVector, Matrix3, Point2, Vector4};
use serde::{Deserialize, Serialize};

use crate::camera::{line_intrinsics, stereo_pose_chain, PoseSE3, StereoRig};
use crate::error::Result;
use crate::line::{
    orthonormal_to_plucker, orthonormal_update, pixel_line_distance_line_jacobian, plucker_to_orthonormal,
    OrthonormalLine, PluckerLine,
};
use crate::lm::{self, LmOptions, NormalEquations, Problem, RobustLoss};

/// Image points that should lie on one line, per camera. Endpoints of the
/// matched 2D segments are the minimal case.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LineObservations {
    pub left: Vec<Point2<f64>>,
    pub right: Vec<Point2<f64>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RefineParams {
    pub loss: RobustLoss,
    pub lm: LmOptions,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefinedLine {
    pub line: PluckerLine,
    pub initial_cost: f64,
    pub cost: f64,
    /// False when the iteration limit was hit; `line` is then the best
    /// iterate found.
    pub converged: bool,
}

struct LineProblem<'a> {
    views: [(Matrix3<f64>, PoseSE3, &'a [Point2<f64>]); 2],
    loss: RobustLoss,
}

impl Problem for LineProblem<'_> {
    type Param = OrthonormalLine;

    fn linearize(&self, o: &OrthonormalLine) -> Result<NormalEquations> {
        let mut ne = NormalEquations::zeros(4);
        for (k_e, pose, pts) in &self.views {
            for p in pts.iter() {
                let (d, j) = pixel_line_distance_line_jacobian(p, k_e, pose, o)?;
                ne.add(d, j.as_slice(), &self.loss);
            }
        }
        ne.symmetrize();
        Ok(ne)
    }

    fn cost(&self, o: &OrthonormalLine) -> Result<f64> {
        let mut c = 0.0;
        for (k_e, pose, pts) in &self.views {
            for p in pts.iter() {
                let (d, _) = pixel_line_distance_line_jacobian(p, k_e, pose, o)?;
                c += self.loss.rho(d * d);
            }
        }
        Ok(c)
    }

    fn retract(&self, o: &OrthonormalLine, delta: &DVector<f64>) -> OrthonormalLine {
        orthonormal_update(o, &Vector4::new(delta[0], delta[1], delta[2], delta[3]))
    }
}

/// Refines each line against its observations in both cameras, the left
/// camera at `pose_l` and the right one chained through the rig.
pub fn refine_lines(
    lines: &[PluckerLine],
    observations: &[LineObservations],
    rig: &StereoRig,
    pose_l: &PoseSE3,
    params: &RefineParams,
) -> Result<Vec<RefinedLine>> {
    assert_eq!(lines.len(), observations.len(), "one observation set per line");
    let pose_r = stereo_pose_chain(pose_l, rig);
    let k_l = line_intrinsics(&rig.left.intrinsics);
    let k_r = line_intrinsics(&rig.right.intrinsics);
    lines
        .iter()
        .zip(observations)
        .map(|(l, obs)| {
            let problem = LineProblem {
                views: [(k_l, *pose_l, &obs.left), (k_r, pose_r, &obs.right)],
                loss: params.loss,
            };
            let out = lm::solve(&problem, plucker_to_orthonormal(l), &params.lm)?;
            Ok(RefinedLine {
                line: orthonormal_to_plucker(&out.param),
                initial_cost: out.initial_cost,
                cost: out.cost,
                converged: out.converged,
            })
        })
        .collect()
}
