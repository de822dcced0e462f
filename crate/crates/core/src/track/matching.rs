//! Gated event-to-segment association.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::EventCluster;
use crate::line::{point_line_signed_distance, Segment2D};

/// Pixel gates of the association test. An event is kept when its nearest
/// segment's line is within `tau_near`, it lies within half the segment's
/// length plus `midpoint_slack` of the segment's midpoint, and the
/// second-nearest segment is at least `tau_ambig` away.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchThresholds {
    pub tau_near: f64,
    pub midpoint_slack: f64,
    pub tau_ambig: f64,
}

impl Default for MatchThresholds {
    fn default() -> Self {
        Self {
            tau_near: 3.0,
            midpoint_slack: 5.0,
            tau_ambig: 6.0,
        }
    }
}

impl MatchThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_near > 0.0 && self.tau_ambig > self.tau_near && self.midpoint_slack >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "match thresholds need 0 < tau_near < tau_ambig and midpoint_slack >= 0, got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Association {
    /// Index into the cluster's events.
    pub event: usize,
    /// Index into the segment list that was matched against.
    pub segment: usize,
    /// Signed distance to the segment's infinite line, pixels.
    pub residual: f64,
}

/// Associates each event with at most one segment. Segments are ranked by
/// distance to the finite segment.
pub fn match_events(cluster: &EventCluster, segments: &[Segment2D], thr: &MatchThresholds) -> Vec<Association> {
    match_events_counted(cluster, segments, thr).0
}

/// [`match_events`] together with the number of events that passed the
/// near and midpoint gates but were dropped as ambiguous.
pub fn match_events_counted(
    cluster: &EventCluster,
    segments: &[Segment2D],
    thr: &MatchThresholds,
) -> (Vec<Association>, usize) {
    let mut out = Vec::new();
    let mut ambiguous = 0;
    for (i, e) in cluster.events.iter().enumerate() {
        let p = e.pixel();
        let (mut best, mut second) = ((usize::MAX, f64::INFINITY), f64::INFINITY);
        for (j, s) in segments.iter().enumerate() {
            let d = s.distance_to_point(&p);
            if d < best.1 {
                second = best.1;
                best = (j, d);
            } else if d < second {
                second = d;
            }
        }
        let Some(s) = segments.get(best.0) else { continue };
        let d1 = point_line_signed_distance(&p, &s.line);
        let d2 = (p - s.midpoint).norm();
        if d1.abs() > thr.tau_near || d2 > 0.5 * s.length() + thr.midpoint_slack {
            continue;
        }
        if second < thr.tau_ambig {
            ambiguous += 1;
            continue;
        }
        out.push(Association {
            event: i,
            segment: best.0,
            residual: d1,
        });
    }
    (out, ambiguous)
}
