//! Wireframe models: 3D segments with optional planar faces used for
//! back-face culling.

use std::path::Path;

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::camera::PoseSE3;
use crate::error::{Error, Result};
use crate::line::Segment3D;

/// Planar face, oriented away from the model centroid.
#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    pub segments: Vec<usize>,
    pub normal: Vector3<f64>,
    pub point: Point3<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WireframeModel {
    segments: Vec<Segment3D>,
    faces: Vec<Face>,
    /// Faces adjacent to each segment.
    adjacency: Vec<Vec<usize>>,
}

impl WireframeModel {
    /// `faces` lists segment indices per face; pass an empty list for a
    /// model without visibility information.
    pub fn new(segments: Vec<Segment3D>, faces: Vec<Vec<usize>>) -> Result<Self> {
        let centroid = centroid(&segments);
        let mut adjacency = vec![Vec::new(); segments.len()];
        let mut built = Vec::with_capacity(faces.len());
        for (fi, f) in faces.into_iter().enumerate() {
            if f.len() < 3 {
                return Err(Error::Format(format!("face {fi} has fewer than 3 segments")));
            }
            for &s in &f {
                if s >= segments.len() {
                    return Err(Error::Format(format!("face {fi} references missing segment {s}")));
                }
                adjacency[s].push(fi);
            }
            let pts: Vec<Point3<f64>> = f.iter().flat_map(|&s| [segments[s].pa, segments[s].pb]).collect();
            let point = Point3::from(pts.iter().map(|p| p.coords).sum::<Vector3<f64>>() / pts.len() as f64);
            let mut normal = face_normal(&f, &segments, &point)
                .ok_or_else(|| Error::Format(format!("face {fi} is degenerate")))?;
            if normal.dot(&(point - centroid)) < 0.0 {
                normal = -normal;
            }
            built.push(Face { segments: f, normal, point });
        }
        Ok(Self {
            segments,
            faces: built,
            adjacency,
        })
    }

    pub fn segments(&self) -> &[Segment3D] {
        &self.segments
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn adjacent_faces(&self, segment: usize) -> &[usize] {
        &self.adjacency[segment]
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn centroid(&self) -> Point3<f64> {
        centroid(&self.segments)
    }

    /// Re-expresses the model in another frame: `X' = pose * X`.
    pub fn transform(&self, pose: &PoseSE3) -> Self {
        let segments = self.segments.iter().map(|s| s.transform(pose)).collect();
        let faces = self
            .faces
            .iter()
            .map(|f| Face {
                segments: f.segments.clone(),
                normal: pose.rotation() * f.normal,
                point: pose.transform_point(&f.point),
            })
            .collect();
        Self {
            segments,
            faces,
            adjacency: self.adjacency.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let json = ModelJson {
            segments: self
                .segments
                .iter()
                .map(|s| SegmentJson {
                    pa: s.pa.coords.into(),
                    pb: s.pb.coords.into(),
                })
                .collect(),
            faces: (!self.faces.is_empty())
                .then(|| self.faces.iter().map(|f| f.segments.clone()).collect()),
        };
        Ok(serde_json::to_string_pretty(&json)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let json: ModelJson = serde_json::from_str(text)?;
        let segments = json
            .segments
            .iter()
            .map(|s| Segment3D::new(Point3::from(s.pa), Point3::from(s.pb)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(segments, json.faces.unwrap_or_default())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

fn centroid(segments: &[Segment3D]) -> Point3<f64> {
    if segments.is_empty() {
        return Point3::origin();
    }
    let sum: Vector3<f64> = segments.iter().map(|s| s.pa.coords + s.pb.coords).sum();
    Point3::from(sum / (2 * segments.len()) as f64)
}

/// Face normal from the triangles spanned by each segment and the face
/// center. Works for any convex polygon regardless of segment order.
fn face_normal(face: &[usize], segments: &[Segment3D], center: &Point3<f64>) -> Option<Vector3<f64>> {
    let mut best = Vector3::zeros();
    for &s in face {
        let seg = &segments[s];
        let c = (seg.pa - center).cross(&(seg.pb - center));
        // Orient every contribution consistently with the first.
        if best.dot(&c) < 0.0 {
            best -= c;
        } else {
            best += c;
        }
    }
    let n = best.norm();
    (n > 1e-12).then(|| best / n)
}

#[derive(Serialize, Deserialize)]
struct SegmentJson {
    pa: [f64; 3],
    pb: [f64; 3],
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    segments: Vec<SegmentJson>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    faces: Option<Vec<Vec<usize>>>,
}
