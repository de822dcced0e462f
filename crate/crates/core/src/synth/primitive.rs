use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::line::Segment3D;
use crate::model::WireframeModel;

/// Parametric test objects, centered at the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PrimitiveKind {
    /// Box with edge lengths along x, y, z.
    Cuboid { size: [f64; 3] },
    /// Cubic body with two rectangular panels in the body's z = 0 plane,
    /// sticking out along -x and +x. `panel` is (length along x, width
    /// along y). Panel edges have no faces and are never back-face culled.
    PanelSatellite { body: f64, panel: [f64; 2] },
}

pub fn make_primitive(kind: &PrimitiveKind) -> Result<WireframeModel> {
    match kind {
        PrimitiveKind::Cuboid { size } => {
            check_positive(size)?;
            let (segments, faces) = cuboid(size);
            WireframeModel::new(segments, faces)
        }
        PrimitiveKind::PanelSatellite { body, panel } => {
            check_positive(&[*body, panel[0], panel[1]])?;
            if panel[1] > *body {
                return Err(Error::InvalidParameter(format!(
                    "panel width {} exceeds body size {body}",
                    panel[1]
                )));
            }
            let (mut segments, faces) = cuboid(&[*body; 3]);
            let h = body / 2.0;
            let w = panel[1] / 2.0;
            for s in [-1.0, 1.0] {
                let x0 = s * h;
                let x1 = s * (h + panel[0]);
                let c = [
                    Point3::new(x0, -w, 0.0),
                    Point3::new(x1, -w, 0.0),
                    Point3::new(x1, w, 0.0),
                    Point3::new(x0, w, 0.0),
                ];
                for i in 0..4 {
                    segments.push(Segment3D::new(c[i], c[(i + 1) % 4])?);
                }
            }
            WireframeModel::new(segments, faces)
        }
    }
}

fn check_positive(dims: &[f64]) -> Result<()> {
    if dims.iter().all(|d| *d > 0.0 && d.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("dimensions must be positive, got {dims:?}")))
    }
}

/// Corners are indexed by bits `(x, y, z)`; each edge joins corners that
/// differ in one bit.
fn cuboid(size: &[f64; 3]) -> (Vec<Segment3D>, Vec<Vec<usize>>) {
    let corner = |i: usize| {
        Point3::new(
            size[0] * (if i & 1 != 0 { 0.5 } else { -0.5 }),
            size[1] * (if i & 2 != 0 { 0.5 } else { -0.5 }),
            size[2] * (if i & 4 != 0 { 0.5 } else { -0.5 }),
        )
    };
    let mut edges = Vec::new();
    for axis in 0..3 {
        let bit = 1 << axis;
        for i in 0..8usize {
            if i & bit == 0 {
                edges.push((i, i | bit));
            }
        }
    }
    let segments = edges
        .iter()
        .map(|&(a, b)| Segment3D::new(corner(a), corner(b)).expect("distinct corners"))
        .collect();
    let mut faces = Vec::new();
    for axis in 0..3 {
        for side in [0, 1 << axis] {
            let face: Vec<usize> = edges
                .iter()
                .enumerate()
                .filter(|(_, &(a, b))| a & (1 << axis) == side && b & (1 << axis) == side)
                .map(|(i, _)| i)
                .collect();
            faces.push(face);
        }
    }
    (segments, faces)
}
