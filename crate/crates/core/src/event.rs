//! Event streams and fixed-count spatio-temporal clustering.
//!
//! A cluster is the set of `N` events closest in time to a reference
//! timestamp. Streams are kept in canonical `(t, y, x)` order so that the
//! tie-break used by [`cluster_at`] (earlier timestamp first, then
//! lexicographic `(y, x)`) falls out of plain index ranges.

use nalgebra::{Point2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn sign(self) -> i8 {
        match self {
            Polarity::Positive => 1,
            Polarity::Negative => -1,
        }
    }
}

/// One brightness change reported by a pixel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Event {
    pub x: u16,
    pub y: u16,
    /// Microseconds.
    pub t: u64,
    pub polarity: Polarity,
}

impl Event {
    pub fn new(x: u16, y: u16, t: u64, polarity: Polarity) -> Self {
        Self { x, y, t, polarity }
    }

    /// Homogeneous pixel coordinates `(x, y, 1)`.
    pub fn homogeneous(&self) -> Vector3<f64> {
        Vector3::new(f64::from(self.x), f64::from(self.y), 1.0)
    }

    pub fn pixel(&self) -> Point2<f64> {
        Point2::new(f64::from(self.x), f64::from(self.y))
    }

    fn order_key(&self) -> (u64, u16, u16) {
        (self.t, self.y, self.x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CameraId {
    Left,
    Right,
}

/// Time-ordered events of one sensor.
#[derive(Clone, Debug, PartialEq)]
pub struct EventStream {
    events: Vec<Event>,
    width: u16,
    height: u16,
    camera: CameraId,
}

impl EventStream {
    /// Builds a stream, sorting events into canonical `(t, y, x)` order.
    ///
    /// The sort is stable, so input already in canonical order keeps its
    /// exact layout (callers carrying parallel per-event data rely on this).
    pub fn new(mut events: Vec<Event>, width: u16, height: u16, camera: CameraId) -> Result<Self> {
        if let Some(e) = events.iter().find(|e| e.x >= width || e.y >= height) {
            return Err(Error::InvalidParameter(format!(
                "event at ({}, {}) outside {}x{} sensor",
                e.x, e.y, width, height
            )));
        }
        if !events.windows(2).all(|w| w[0].order_key() <= w[1].order_key()) {
            events.sort_by_key(Event::order_key);
        }
        Ok(Self {
            events,
            width,
            height,
            camera,
        })
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn width(&self) -> u16 {
        self.width
    }

    pub fn height(&self) -> u16 {
        self.height
    }

    pub fn camera(&self) -> CameraId {
        self.camera
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// `(first, last)` timestamps, if any.
    pub fn time_span(&self) -> Option<(u64, u64)> {
        Some((self.events.first()?.t, self.events.last()?.t))
    }

    /// Mean event rate in events per second over the stream's time span.
    pub fn mean_event_rate(&self) -> f64 {
        match self.time_span() {
            Some((a, b)) if b > a => self.events.len() as f64 / ((b - a) as f64 * 1e-6),
            _ => 0.0,
        }
    }
}

/// The events of one camera nearest in time to `center_time`.
#[derive(Clone, Debug, PartialEq)]
pub struct EventCluster {
    pub events: Vec<Event>,
    pub center_time: u64,
    pub camera: CameraId,
    /// Fewer than the requested number of events were available.
    pub short: bool,
    /// The selection ran into the start or end of the stream, so it is not
    /// centered on `center_time`.
    pub boundary: bool,
    /// Largest `|t_i - center_time|` inside the cluster, microseconds.
    pub radius_us: u64,
}

impl EventCluster {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn min_time(&self) -> Option<u64> {
        self.events.iter().map(|e| e.t).min()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterParams {
    /// Events per cluster (`N`).
    pub events_per_cluster: usize,
    /// Interval between cluster centers, microseconds.
    pub interval_us: u64,
    /// Time normalization for space-time point clouds, microseconds per unit.
    pub c_z: f64,
    /// A cluster whose time radius exceeds this is considered stale (e.g. it
    /// was centered inside a gap of the stream).
    pub max_radius_us: u64,
}

impl ClusterParams {
    /// Desk-scale simulated profile: 4000 events every 10 ms.
    pub fn simulated() -> Self {
        Self {
            events_per_cluster: 4000,
            interval_us: 10_000,
            c_z: 1000.0,
            max_radius_us: 50_000,
        }
    }

    /// High-resolution sensor profile: 20000 events every 5 ms.
    pub fn high_resolution() -> Self {
        Self {
            events_per_cluster: 20_000,
            interval_us: 5_000,
            c_z: 1000.0,
            max_radius_us: 25_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.events_per_cluster == 0 {
            return Err(Error::InvalidParameter("events_per_cluster must be >= 1".into()));
        }
        if self.interval_us == 0 {
            return Err(Error::InvalidParameter("interval_us must be > 0".into()));
        }
        if !(self.c_z > 0.0) {
            return Err(Error::InvalidParameter("c_z must be > 0".into()));
        }
        Ok(())
    }
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self::simulated()
    }
}

/// Selects the `n` events closest in time to `t`.
///
/// Ties on `|t_i - t|` prefer the earlier timestamp, then lexicographic
/// `(y, x)`. The result is in canonical `(t, y, x)` order.
pub fn cluster_at(stream: &EventStream, t: u64, n: usize) -> Result<EventCluster> {
    let ev = stream.events();
    if ev.is_empty() {
        return Err(Error::EmptyStream);
    }
    let take = n.min(ev.len());
    let idx = ev.partition_point(|e| e.t < t);

    // Grow [lo, hi) by time distance only; ties are resolved afterwards.
    let (mut lo, mut hi) = (idx, idx);
    while hi - lo < take {
        let left = (lo > 0).then(|| t - ev[lo - 1].t);
        let right = (hi < ev.len()).then(|| ev[hi].t - t);
        match (left, right) {
            (Some(a), Some(b)) if a <= b => lo -= 1,
            (Some(_), None) => lo -= 1,
            _ => hi += 1,
        }
    }
    let radius = if take == 0 {
        0
    } else {
        (t.saturating_sub(ev[lo].t)).max(ev[hi - 1].t.saturating_sub(t))
    };

    let events = if take == 0 {
        Vec::new()
    } else {
        select_with_ties(ev, t, radius, take)
    };

    let (first, last) = (ev[0].t, ev[ev.len() - 1].t);
    let short = events.len() < n;
    let boundary = short || t < first + radius || t + radius > last;
    Ok(EventCluster {
        events,
        center_time: t,
        camera: stream.camera(),
        short,
        boundary,
        radius_us: radius,
    })
}

/// All events strictly inside `radius` plus the canonical-order prefix of the
/// events exactly at `radius`, `take` in total.
fn select_with_ties(ev: &[Event], t: u64, radius: u64, take: usize) -> Vec<Event> {
    let block = |ts: u64| ev.partition_point(|e| e.t < ts)..ev.partition_point(|e| e.t <= ts);

    // Strictly inside the radius; empty when radius == 0.
    let inner = if radius == 0 {
        &ev[0..0]
    } else {
        let lo = match t.checked_sub(radius) {
            Some(lower) => ev.partition_point(|e| e.t <= lower),
            None => 0,
        };
        let hi = ev.partition_point(|e| e.t < t + radius);
        &ev[lo..hi]
    };
    // Tie blocks at t - radius and t + radius, already in canonical order.
    let left_block = match t.checked_sub(radius) {
        Some(lower) => block(lower),
        None => 0..0,
    };
    let right_block = if radius > 0 { block(t + radius) } else { 0..0 };

    let mut needed = take - inner.len();
    let from_left = needed.min(left_block.len());
    needed -= from_left;
    let from_right = needed.min(right_block.len());

    let mut out = Vec::with_capacity(take);
    out.extend_from_slice(&ev[left_block.start..left_block.start + from_left]);
    out.extend_from_slice(inner);
    out.extend_from_slice(&ev[right_block.start..right_block.start + from_right]);
    out
}

/// Clusters centered at `t0, t0 + dt, ...` up to the last event of the stream.
pub fn cluster_sequence(
    stream: &EventStream,
    params: &ClusterParams,
    t0: u64,
) -> Result<Vec<EventCluster>> {
    params.validate()?;
    let (first, last) = stream.time_span().ok_or(Error::EmptyStream)?;
    if t0 < first || t0 > last {
        return Err(Error::InvalidParameter(format!(
            "t0 = {t0} outside stream span [{first}, {last}]"
        )));
    }
    let mut out = Vec::new();
    let mut center = t0;
    while center <= last {
        out.push(cluster_at(stream, center, params.events_per_cluster)?);
        center += params.interval_us;
    }
    Ok(out)
}

/// Keeps every `k`-th event (indices `0, k, 2k, ...`).
pub fn downsample(cluster: &EventCluster, k: usize) -> Result<EventCluster> {
    if k == 0 {
        return Err(Error::InvalidParameter("downsample stride must be >= 1".into()));
    }
    Ok(EventCluster {
        events: cluster.events.iter().step_by(k).copied().collect(),
        ..cluster.clone()
    })
}

/// Maps each event to `(x, y, (t - t_min) / c_z)`.
///
/// # Panics
/// If `c_z` is not positive.
pub fn to_spacetime_points(cluster: &EventCluster, c_z: f64) -> Vec<Vector3<f64>> {
    assert!(c_z > 0.0, "c_z must be positive");
    let t_min = cluster.min_time().unwrap_or(0);
    cluster
        .events
        .iter()
        .map(|e| {
            Vector3::new(
                f64::from(e.x),
                f64::from(e.y),
                (e.t - t_min) as f64 / c_z,
            )
        })
        .collect()
}
