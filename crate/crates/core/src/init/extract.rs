//! Line segment extraction from one event cluster.
//!
//! Events of a moving straight edge lie close to a ruled surface in
//! (x, y, t) space. Hypotheses come from two-point RANSAC on the image
//! positions; each winner is then refit as a [`MovingLine`] whose
//! homogeneous coefficients vary linearly in time, so that the residual of
//! an event is its pixel distance to where the edge was at that event's
//! time. The image segment is taken at the cluster center time.

use std::collections::HashSet;

use nalgebra::{Point2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::{to_spacetime_points, EventCluster};
use crate::line::{orientation_difference, Line2D, Segment2D};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractionParams {
    /// Microseconds per unit of the time axis.
    pub c_z: f64,
    /// Pixels.
    pub inlier_threshold: f64,
    pub min_events_per_line: usize,
    pub max_lines: usize,
    /// Pixels; a segment is broken where consecutive inliers are further
    /// apart than this along the line.
    pub split_gap: f64,
    pub max_iterations: usize,
    pub confidence: f64,
    pub seed: u64,
    /// Pixels; a segment end moves to the intersection with another
    /// segment's line when that point is this close to the end and lies on
    /// the other segment. Zero disables snapping.
    pub snap_radius: f64,
    /// Degrees; lines closer in orientation are not intersected.
    pub snap_min_angle: f64,
    /// Degrees and pixels; nearly parallel pieces of one line closer than
    /// this are joined.
    pub merge_angle: f64,
    pub merge_gap: f64,
}

impl Default for ExtractionParams {
    fn default() -> Self {
        Self {
            c_z: 1000.0,
            inlier_threshold: 1.5,
            min_events_per_line: 50,
            max_lines: 30,
            split_gap: 10.0,
            max_iterations: 2000,
            confidence: 0.99,
            seed: 0,
            snap_radius: 40.0,
            snap_min_angle: 2.0,
            merge_angle: 1.0,
            merge_gap: 30.0,
        }
    }
}

impl ExtractionParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.c_z > 0.0
            && self.inlier_threshold > 0.0
            && self.min_events_per_line >= 2
            && self.max_lines > 0
            && self.split_gap > 0.0
            && self.max_iterations > 0
            && self.confidence > 0.0
            && self.confidence < 1.0
            && self.snap_radius >= 0.0
            && self.snap_min_angle > 0.0
            && self.merge_angle >= 0.0
            && self.merge_gap >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid extraction parameters {self:?}")))
        }
    }
}

/// Image line `l(tau) = l0 + (tau - tau_center) l1` over `(x, y, 1)`,
/// with `tau = (t - t_min) / c_z` and `l0` scaled to a unit normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MovingLine {
    pub l0: Vector3<f64>,
    pub l1: Vector3<f64>,
    pub tau_center: f64,
}

impl MovingLine {
    pub fn at(&self, tau: f64) -> Vector3<f64> {
        self.l0 + self.l1 * (tau - self.tau_center)
    }

    /// Signed pixel distance of `(x, y)` to the line at time `tau`.
    pub fn residual(&self, q: &Vector3<f64>) -> f64 {
        let l = self.at(q.z);
        (l.x * q.x + l.y * q.y + l.z) / l.x.hypot(l.y)
    }

    pub fn center_line(&self) -> Option<Line2D> {
        Line2D::from_coefficients(self.l0)
    }

    /// Moves `p` along the center line's normal so that its distance to
    /// the center line equals its distance to the line at `tau`.
    pub fn to_center_time(&self, p: &Point2<f64>, tau: f64) -> Point2<f64> {
        let Some(c) = self.center_line() else { return *p };
        let r = self.residual(&Vector3::new(p.x, p.y, tau));
        p - c.normal() * (c.signed_distance(p) - r)
    }
}

/// A detected segment with the events that support it.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtractedSegment {
    /// Image segment at the cluster center time.
    pub segment: Segment2D,
    /// Indices into the cluster's events that this line explains best.
    pub support: Vec<usize>,
    pub motion: MovingLine,
}

impl ExtractedSegment {
    pub fn to_center_time(&self, p: &Point2<f64>, tau: f64) -> Point2<f64> {
        self.motion.to_center_time(p, tau)
    }
}

pub fn extract_lines(cluster: &EventCluster, params: &ExtractionParams) -> Result<Vec<Segment2D>> {
    Ok(extract_line_support(cluster, params)?
        .into_iter()
        .map(|s| s.segment)
        .collect())
}

pub fn extract_line_support(cluster: &EventCluster, params: &ExtractionParams) -> Result<Vec<ExtractedSegment>> {
    params.validate()?;
    if cluster.is_empty() {
        return Err(Error::EmptyStream);
    }
    let pts = to_spacetime_points(cluster, params.c_z);
    let t_min = cluster.min_time().expect("non-empty cluster");
    let tau_center = (cluster.center_time as f64 - t_min as f64) / params.c_z;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let everything: Vec<usize> = (0..pts.len()).collect();
    let mut remaining = everything.clone();
    let mut out = Vec::new();
    for _ in 0..params.max_lines {
        if remaining.len() < params.min_events_per_line {
            break;
        }
        let Some(hyp) = ransac_line(&pts, &remaining, params, &mut rng) else {
            break;
        };
        let mut inliers = collect_2d(&pts, &remaining, &hyp, params.inlier_threshold);
        if inliers.len() < params.min_events_per_line {
            break;
        }
        let mut motion = None;
        for _ in 0..4 {
            let Some(m) = fit_moving_line(&pts, &inliers, tau_center) else { break };
            motion = Some(m);
            let next = collect_moving(&pts, &remaining, &m, params.inlier_threshold);
            if next == inliers || next.len() < 3 {
                break;
            }
            inliers = next;
        }
        let Some(motion) = motion else { break };
        let taken: HashSet<usize> = inliers.iter().copied().collect();
        remaining.retain(|i| !taken.contains(i));
        // Extents also count events already claimed by earlier lines, so a
        // segment keeps the corners it shares with them.
        let all = collect_moving(&pts, &everything, &motion, params.inlier_threshold);
        out.extend(split(&pts, &all, &taken, &motion, params));
    }
    if out.is_empty() {
        return Err(Error::NoLinesDetected);
    }
    merge_collinear(&pts, &mut out, params);
    refit_exclusive(&pts, &mut out, params);
    out.sort_by(|a, b| b.support.len().cmp(&a.support.len()));
    if params.snap_radius > 0.0 {
        snap_junctions(&mut out, params);
    }
    Ok(out)
}

/// Along-line extent of the events of `idx` within the threshold of
/// `motion`, measured at the center time.
fn extent(pts: &[Vector3<f64>], idx: &[usize], motion: &MovingLine, thr: f64) -> Option<Segment2D> {
    let line = motion.center_line()?;
    let dir = line.direction();
    let origin = line.foot(&Point2::origin());
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &k in idx {
        if motion.residual(&pts[k]).abs() <= thr {
            let p = motion.to_center_time(&Point2::new(pts[k].x, pts[k].y), pts[k].z);
            let u = (p - origin).dot(&dir);
            lo = lo.min(u);
            hi = hi.max(u);
        }
    }
    Segment2D::new(origin + dir * lo, origin + dir * hi).ok()
}

/// Joins pieces of one edge that a sparse stretch of events split apart:
/// nearly parallel, each one's events fitting the other's line, and
/// separated by less than `merge_gap`.
fn merge_collinear(pts: &[Vector3<f64>], segs: &mut Vec<ExtractedSegment>, params: &ExtractionParams) {
    let fits = |m: &MovingLine, idx: &[usize]| {
        let mean = idx.iter().map(|&k| m.residual(&pts[k]).abs()).sum::<f64>() / idx.len() as f64;
        mean <= 0.5 * params.inlier_threshold
    };
    'outer: loop {
        for i in 0..segs.len() {
            for j in i + 1..segs.len() {
                let (a, b) = (&segs[i], &segs[j]);
                if orientation_difference(a.segment.angle(), b.segment.angle()) > params.merge_angle.to_radians() {
                    continue;
                }
                let gap = [a.segment.pa, a.segment.pb]
                    .iter()
                    .flat_map(|p| [b.segment.pa, b.segment.pb].map(|q| (p - q).norm()))
                    .fold(f64::INFINITY, f64::min);
                if gap > params.merge_gap || !fits(&a.motion, &b.support) || !fits(&b.motion, &a.support) {
                    continue;
                }
                let mut support = a.support.clone();
                support.extend(&b.support);
                support.sort_unstable();
                support.dedup();
                let Some(motion) = fit_moving_line(pts, &support, a.motion.tau_center) else { continue };
                let Some(segment) = extent(pts, &support, &motion, params.inlier_threshold) else { continue };
                segs[i] = ExtractedSegment { segment, support, motion };
                segs.remove(j);
                continue 'outer;
            }
        }
        break;
    }
}

/// Refits every line on the events it explains best. Near shared corners
/// an event lies within the threshold of several lines; it is kept only by
/// the line with the smallest residual among those whose segment it is
/// near. The extent still uses every event within the threshold.
fn refit_exclusive(pts: &[Vector3<f64>], segs: &mut [ExtractedSegment], params: &ExtractionParams) {
    let thr = params.inlier_threshold;
    let snapshot: Vec<(MovingLine, Segment2D)> = segs.iter().map(|s| (s.motion, s.segment)).collect();
    for (i, s) in segs.iter_mut().enumerate() {
        let own: Vec<usize> = s
            .support
            .iter()
            .copied()
            .filter(|&k| {
                let q = &pts[k];
                let r = s.motion.residual(q).abs();
                snapshot.iter().enumerate().all(|(j, (m, seg))| {
                    j == i || seg.distance_to_point(&Point2::new(q.x, q.y)) > thr || m.residual(q).abs() >= r
                })
            })
            .collect();
        if own.len() < params.min_events_per_line {
            continue;
        }
        let Some(motion) = fit_moving_line(pts, &own, s.motion.tau_center) else { continue };
        if let Some(segment) = extent(pts, &s.support, &motion, thr) {
            *s = ExtractedSegment { segment, support: own, motion };
        }
    }
}

/// Moves segment ends onto corners. Each end goes to the nearest
/// intersection with another segment's line that is within `snap_radius`
/// of the end and of one end of the other segment, and within
/// `inlier_threshold` of the other segment.
/// Intersections are computed from the unsnapped segments.
pub fn snap_junctions(segs: &mut [ExtractedSegment], params: &ExtractionParams) {
    let orig: Vec<Segment2D> = segs.iter().map(|s| s.segment).collect();
    let min_angle = params.snap_min_angle.to_radians();
    for (i, s) in segs.iter_mut().enumerate() {
        let a = &orig[i];
        let snap = |end: Point2<f64>| -> Point2<f64> {
            orig.iter()
                .enumerate()
                .filter(|&(j, b)| j != i && orientation_difference(a.angle(), b.angle()) >= min_angle)
                .filter_map(|(_, b)| {
                    let x = a.line.coefficients().cross(&b.line.coefficients());
                    let x = Point2::new(x.x / x.z, x.y / x.z);
                    let d = (x - end).norm();
                    let corner = (x - b.pa).norm().min((x - b.pb).norm()) <= params.snap_radius;
                    (d <= params.snap_radius && corner && b.distance_to_point(&x) <= params.inlier_threshold)
                        .then_some((d, x))
                })
                .min_by(|p, q| p.0.total_cmp(&q.0))
                .map_or(end, |(_, x)| x)
        };
        let (pa, pb) = (snap(a.pa), snap(a.pb));
        // Both ends collapsing onto one junction would leave nothing.
        if (pb - pa).norm() >= 0.5 * a.length() {
            if let Ok(seg) = Segment2D::new(pa, pb) {
                s.segment = seg;
            }
        }
    }
}

fn ransac_line(
    pts: &[Vector3<f64>],
    idx: &[usize],
    params: &ExtractionParams,
    rng: &mut ChaCha8Rng,
) -> Option<Line2D> {
    let n = idx.len();
    let mut best: Option<(usize, Line2D)> = None;
    let mut needed = params.max_iterations;
    let mut it = 0;
    while it < needed.min(params.max_iterations) {
        it += 1;
        let i = idx[rng.random_range(0..n)];
        let j = idx[rng.random_range(0..n)];
        let (p, q) = (Point2::new(pts[i].x, pts[i].y), Point2::new(pts[j].x, pts[j].y));
        if (p - q).norm() < 2.0 * params.inlier_threshold {
            continue;
        }
        let Ok(line) = Line2D::through(&p, &q) else { continue };
        let count = idx
            .iter()
            .filter(|&&k| line.signed_distance(&Point2::new(pts[k].x, pts[k].y)).abs() <= params.inlier_threshold)
            .count();
        if best.as_ref().is_none_or(|b| count > b.0) {
            best = Some((count, line));
            let w = count as f64 / n as f64;
            let denom = (1.0 - w * w).ln();
            needed = if denom < 0.0 {
                ((1.0 - params.confidence).ln() / denom).ceil() as usize
            } else {
                params.max_iterations
            };
        }
    }
    best.map(|b| b.1)
}

fn collect_2d(pts: &[Vector3<f64>], idx: &[usize], line: &Line2D, thr: f64) -> Vec<usize> {
    idx.iter()
        .copied()
        .filter(|&k| line.signed_distance(&Point2::new(pts[k].x, pts[k].y)).abs() <= thr)
        .collect()
}

fn collect_moving(pts: &[Vector3<f64>], idx: &[usize], m: &MovingLine, thr: f64) -> Vec<usize> {
    idx.iter()
        .copied()
        .filter(|&k| m.residual(&pts[k]).abs() <= thr)
        .collect()
}

/// Least-squares [`MovingLine`] through the selected points. Coordinates
/// are centered and scaled first; `l1` is eliminated in closed form and
/// `l0` is the minor eigenvector of what remains. A small ridge on `l1`
/// keeps static edges, whose points span only a plane, well posed.
fn fit_moving_line(pts: &[Vector3<f64>], idx: &[usize], tau_center: f64) -> Option<MovingLine> {
    if idx.len() < 3 {
        return None;
    }
    let n = idx.len() as f64;
    let (mut mx, mut my) = (0.0, 0.0);
    for &k in idx {
        mx += pts[k].x;
        my += pts[k].y;
    }
    let (mx, my) = (mx / n, my / n);
    let mut s2 = 0.0;
    let mut t2 = 0.0;
    for &k in idx {
        s2 += (pts[k].x - mx).powi(2) + (pts[k].y - my).powi(2);
        t2 += (pts[k].z - tau_center).powi(2);
    }
    let s = (s2 / n).sqrt();
    let st = (t2 / n).sqrt();
    if !(s > 0.0) {
        return None;
    }
    let mut s00 = nalgebra::Matrix3::zeros();
    let mut s01 = nalgebra::Matrix3::zeros();
    let mut s11 = nalgebra::Matrix3::zeros();
    for &k in idx {
        let u = Vector3::new((pts[k].x - mx) / s, (pts[k].y - my) / s, 1.0);
        let dt = if st > 1e-12 { (pts[k].z - tau_center) / st } else { 0.0 };
        let uu = u * u.transpose();
        s00 += uu;
        s01 += uu * dt;
        s11 += uu * (dt * dt);
    }
    let ridge = 1e-9 * n;
    let s11_inv = (s11 + nalgebra::Matrix3::identity() * ridge).try_inverse()?;
    let reduced = s00 - s01 * s11_inv * s01.transpose();
    let eig = reduced.symmetric_eigen();
    let i = eig.eigenvalues.imin();
    let q0 = eig.eigenvectors.column(i).into_owned();
    let q1 = -s11_inv * s01.transpose() * q0;
    // Back to pixel coordinates: a line l' over normalized points is
    // T^T l' over pixels.
    let t = nalgebra::Matrix3::new(1.0 / s, 0.0, -mx / s, 0.0, 1.0 / s, -my / s, 0.0, 0.0, 1.0);
    let l0 = t.transpose() * q0;
    let l1 = if st > 1e-12 { t.transpose() * q1 / st } else { Vector3::zeros() };
    let norm = l0.x.hypot(l0.y);
    if !(norm > 0.0) {
        return None;
    }
    Some(MovingLine { l0: l0 / norm, l1: l1 / norm, tau_center })
}

/// Breaks `inliers` at gaps along the line. A piece is kept when at least
/// `min_events_per_line` of its events are in `fresh`.
fn split(
    pts: &[Vector3<f64>],
    inliers: &[usize],
    fresh: &HashSet<usize>,
    motion: &MovingLine,
    params: &ExtractionParams,
) -> Vec<ExtractedSegment> {
    let Some(line) = motion.center_line() else {
        return Vec::new();
    };
    let dir = line.direction();
    let origin = line.foot(&Point2::origin());
    let mut along: Vec<(f64, usize)> = inliers
        .iter()
        .map(|&k| {
            let p = motion.to_center_time(&Point2::new(pts[k].x, pts[k].y), pts[k].z);
            ((p - origin).dot(&dir), k)
        })
        .collect();
    along.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=along.len() {
        if i == along.len() || along[i].0 - along[i - 1].0 > params.split_gap {
            let piece = &along[start..i];
            if piece.iter().filter(|p| fresh.contains(&p.1)).count() >= params.min_events_per_line {
                let (u0, u1) = (piece[0].0, piece[piece.len() - 1].0);
                if let Ok(segment) = Segment2D::new(origin + dir * u0, origin + dir * u1) {
                    out.push(ExtractedSegment {
                        segment,
                        support: piece.iter().map(|p| p.1).collect(),
                        motion: *motion,
                    });
                }
            }
            start = i;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::{cluster_at, CameraId, Event, EventStream, Polarity};
    use nalgebra::Vector2;
    use rand_distr::{Distribution, Normal};

    /// Events along `a -> b` at times spread over 10 ms, with Gaussian
    /// jitter, quantized to pixels. `velocity` moves the segment in px/ms.
    fn segment_events(
        rng: &mut ChaCha8Rng,
        a: Point2<f64>,
        b: Point2<f64>,
        n: usize,
        sigma: f64,
        velocity: Vector2<f64>,
    ) -> Vec<Event> {
        let jitter = Normal::new(0.0, sigma.max(1e-300)).unwrap();
        (0..n)
            .map(|_| {
                let s: f64 = rng.random_range(0.0..1.0);
                let t: u64 = rng.random_range(0..10_000);
                let shift = velocity * ((t as f64 - 5000.0) / 1000.0);
                let p = a + (b - a) * s + shift;
                let x = (p.x + jitter.sample(rng)).round();
                let y = (p.y + jitter.sample(rng)).round();
                Event::new(x as u16, y as u16, t, Polarity::Positive)
            })
            .collect()
    }

    fn cluster_of(events: Vec<Event>) -> EventCluster {
        let n = events.len();
        let s = EventStream::new(events, 640, 480, CameraId::Left).unwrap();
        cluster_at(&s, 5000, n).unwrap()
    }

    fn endpoint_error(seg: &Segment2D, a: Point2<f64>, b: Point2<f64>) -> f64 {
        let e1 = (seg.pa - a).norm().max((seg.pb - b).norm());
        let e2 = (seg.pa - b).norm().max((seg.pb - a).norm());
        e1.min(e2)
    }

    #[test]
    fn single_jittered_segment() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (a, b) = (Point2::new(100.0, 100.0), Point2::new(300.0, 100.0));
        let c = cluster_of(segment_events(&mut rng, a, b, 2000, 0.3, Vector2::zeros()));
        let segs = extract_lines(&c, &ExtractionParams::default()).unwrap();
        assert_eq!(segs.len(), 1);
        let ang = orientation_difference(segs[0].angle(), 0.0).to_degrees();
        assert!(ang < 0.5, "angle error {ang}");
        assert!(endpoint_error(&segs[0], a, b) < 3.0);
    }

    #[test]
    fn moving_segment_is_placed_at_center_time() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (a, b) = (Point2::new(150.0, 120.0), Point2::new(260.0, 330.0));
        // 0.4 px/ms sweep across a 10 ms cluster.
        let v = Vector2::new(0.4, -0.2);
        let c = cluster_of(segment_events(&mut rng, a, b, 1500, 0.0, v));
        let segs = extract_line_support(&c, &ExtractionParams::default()).unwrap();
        assert_eq!(segs.len(), 1);
        let s = &segs[0];
        assert!(s.support.len() > 1400);
        for p in [a, b] {
            assert!(s.segment.line.signed_distance(&p).abs() < 0.3);
        }
    }

    #[test]
    fn pure_noise_has_no_lines() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let events = (0..500)
            .map(|_| Event::new(rng.random_range(0..640), rng.random_range(0..480), rng.random_range(0..10_000), Polarity::Negative))
            .collect();
        let params = ExtractionParams { min_events_per_line: 100, ..Default::default() };
        assert!(matches!(extract_lines(&cluster_of(events), &params), Err(Error::NoLinesDetected)));
    }

    #[test]
    fn two_perpendicular_segments() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let truth = [
            (Point2::new(100.0, 200.0), Point2::new(400.0, 200.0)),
            (Point2::new(250.0, 50.0), Point2::new(250.0, 180.0)),
        ];
        let mut events = segment_events(&mut rng, truth[0].0, truth[0].1, 1000, 0.3, Vector2::zeros());
        events.extend(segment_events(&mut rng, truth[1].0, truth[1].1, 1000, 0.3, Vector2::zeros()));
        let segs = extract_lines(&cluster_of(events), &ExtractionParams::default()).unwrap();
        assert_eq!(segs.len(), 2);
        for (a, b) in truth {
            let want = Segment2D::new(a, b).unwrap().angle();
            let best = segs
                .iter()
                .min_by(|x, y| {
                    orientation_difference(x.angle(), want).total_cmp(&orientation_difference(y.angle(), want))
                })
                .unwrap();
            assert!(orientation_difference(best.angle(), want).to_degrees() < 0.5);
            assert!(endpoint_error(best, a, b) < 3.0);
        }
    }

    #[test]
    fn collinear_pieces_are_split() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut events = segment_events(&mut rng, Point2::new(50.0, 300.0), Point2::new(200.0, 300.0), 600, 0.2, Vector2::zeros());
        events.extend(segment_events(&mut rng, Point2::new(300.0, 300.0), Point2::new(450.0, 300.0), 600, 0.2, Vector2::zeros()));
        let segs = extract_lines(&cluster_of(events), &ExtractionParams::default()).unwrap();
        assert_eq!(segs.len(), 2);
    }

    #[test]
    fn pieces_across_a_short_gap_are_joined() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut events = segment_events(&mut rng, Point2::new(50.0, 300.0), Point2::new(230.0, 304.0), 700, 0.2, Vector2::zeros());
        events.extend(segment_events(&mut rng, Point2::new(250.0, 304.4), Point2::new(450.0, 308.9), 700, 0.2, Vector2::zeros()));
        let segs = extract_lines(&cluster_of(events), &ExtractionParams::default()).unwrap();
        assert_eq!(segs.len(), 1);
        assert!(segs[0].length() > 390.0);
    }

    #[test]
    fn corner_ends_meet() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let corner = Point2::new(300.0, 100.0);
        let mut events = segment_events(&mut rng, Point2::new(80.0, 100.0), corner, 1000, 0.3, Vector2::zeros());
        events.extend(segment_events(&mut rng, corner, Point2::new(330.0, 320.0), 1000, 0.3, Vector2::zeros()));
        let segs = extract_lines(&cluster_of(events), &ExtractionParams::default()).unwrap();
        assert_eq!(segs.len(), 2);
        for s in &segs {
            let d = (s.pa - corner).norm().min((s.pb - corner).norm());
            assert!(d < 0.5, "end {d} px from the corner");
        }
    }

    #[test]
    fn deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut events = segment_events(&mut rng, Point2::new(100.0, 100.0), Point2::new(300.0, 250.0), 800, 0.5, Vector2::zeros());
        events.extend((0..300).map(|_| Event::new(rng.random_range(0..640), rng.random_range(0..480), rng.random_range(0..10_000), Polarity::Negative)));
        let c = cluster_of(events);
        let p = ExtractionParams::default();
        assert_eq!(extract_line_support(&c, &p).unwrap(), extract_line_support(&c, &p).unwrap());
    }
}
