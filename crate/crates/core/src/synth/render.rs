//! Geometric event synthesis: events are sampled along the projected
//! visible edges of a moving wireframe, plus uniform background noise.

use nalgebra::Point2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::camera::{stereo_pose_chain, Camera, PoseSE3, StereoRig};
use crate::error::{Error, Result};
use crate::event::{CameraId, Event, EventStream, Polarity};
use crate::model::WireframeModel;
use crate::synth::trajectory::{pose_at, TrajectorySpec};
use crate::trajectory::Trajectory;
use crate::track::visibility::visible_segments_for_camera;

/// Label of background-noise events.
pub const NOISE_LABEL: i32 = -1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRateSpec {
    /// Events per second per camera, line and noise events together.
    pub mean_event_rate: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseSpec {
    pub pixel_jitter_sigma: f64,
    /// Microseconds.
    pub timestamp_jitter_sigma: f64,
    /// Noise events as a fraction of line events.
    pub background_rate_fraction: f64,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            pixel_jitter_sigma: 0.0,
            timestamp_jitter_sigma: 0.0,
            background_rate_fraction: 0.0,
            seed: 0,
        }
    }
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        let v = [self.pixel_jitter_sigma, self.timestamp_jitter_sigma, self.background_rate_fraction];
        if v.iter().all(|x| *x >= 0.0 && x.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("noise parameters must be non-negative, got {v:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderOptions {
    pub micro_step_us: u64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self { micro_step_us: 1000 }
    }
}

/// One rendered camera: the stream plus per-event provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct RenderedCamera {
    pub stream: EventStream,
    /// Generating segment index, or [`NOISE_LABEL`].
    pub labels: Vec<i32>,
    /// Event positions before pixel quantization.
    pub subpixel: Option<Vec<Point2<f64>>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderedScene {
    pub left: RenderedCamera,
    pub right: RenderedCamera,
    /// Object-to-left-camera poses at every micro-step.
    pub ground_truth: Trajectory,
}

pub fn render_events(
    model: &WireframeModel,
    spec: &TrajectorySpec,
    rig: &StereoRig,
    rate: &EventRateSpec,
    noise: &NoiseSpec,
    opts: &RenderOptions,
) -> Result<RenderedScene> {
    spec.validate()?;
    noise.validate()?;
    if !(rate.mean_event_rate > 0.0 && rate.mean_event_rate.is_finite()) {
        return Err(Error::InvalidParameter(format!("event rate must be positive, got {}", rate.mean_event_rate)));
    }
    if opts.micro_step_us == 0 {
        return Err(Error::InvalidParameter("micro step must be positive".into()));
    }
    let duration_us = (spec.duration * 1e6).round() as u64;
    let mut ground_truth = Trajectory::default();
    let mut t = 0;
    loop {
        ground_truth.push(t as f64 / 1e6, pose_at(spec, t as f64 / 1e6)?)?;
        if t >= duration_us {
            break;
        }
        t = (t + opts.micro_step_us).min(duration_us);
    }
    let left = render_camera(model, spec, rig, CameraId::Left, rate, noise, opts, duration_us)?;
    let right = render_camera(model, spec, rig, CameraId::Right, rate, noise, opts, duration_us)?;
    if left.1 == 0 && right.1 == 0 {
        return Err(Error::ObjectNeverVisible);
    }
    Ok(RenderedScene {
        left: left.0,
        right: right.0,
        ground_truth,
    })
}

struct Sample {
    event: Event,
    label: i32,
    subpixel: Point2<f64>,
}

fn camera_pose(spec: &TrajectorySpec, rig: &StereoRig, id: CameraId, t_us: u64) -> Result<PoseSE3> {
    let p = pose_at(spec, t_us as f64 / 1e6)?;
    Ok(match id {
        CameraId::Left => p,
        CameraId::Right => stereo_pose_chain(&p, rig),
    })
}

/// Returns the rendered camera and its number of line events.
#[allow(clippy::too_many_arguments)]
fn render_camera(
    model: &WireframeModel,
    spec: &TrajectorySpec,
    rig: &StereoRig,
    id: CameraId,
    rate: &EventRateSpec,
    noise: &NoiseSpec,
    opts: &RenderOptions,
    duration_us: u64,
) -> Result<(RenderedCamera, usize)> {
    let camera: &Camera = rig.camera(id);
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    rng.set_stream(match id {
        CameraId::Left => 0,
        CameraId::Right => 1,
    });
    let f = noise.background_rate_fraction;
    let line_rate = rate.mean_event_rate / (1.0 + f);
    let noise_rate = rate.mean_event_rate - line_rate;
    let pix = Normal::new(0.0, noise.pixel_jitter_sigma.max(f64::MIN_POSITIVE)).expect("valid sigma");
    let tjit = Normal::new(0.0, noise.timestamp_jitter_sigma.max(f64::MIN_POSITIVE)).expect("valid sigma");
    let (w, h) = (camera.width, camera.height);
    let k = camera.intrinsics;

    let mut samples: Vec<Sample> = Vec::with_capacity((rate.mean_event_rate * spec.duration * 1.01) as usize);
    let mut line_events = 0usize;
    let (mut line_due, mut noise_due) = (0.0f64, 0.0f64);
    let (mut line_done, mut noise_done) = (0u64, 0u64);
    let mut t0 = 0u64;
    while t0 < duration_us {
        let t1 = (t0 + opts.micro_step_us).min(duration_us);
        let dt = (t1 - t0) as f64 / 1e6;
        line_due += line_rate * dt;
        noise_due += noise_rate * dt;
        let n_line = line_due.floor() as u64 - line_done;
        let n_noise = noise_due.floor() as u64 - noise_done;
        line_done += n_line;
        noise_done += n_noise;

        let mid = camera_pose(spec, rig, id, (t0 + t1) / 2)?;
        let mid_inv = mid.inverse();
        let visible = visible_segments_for_camera(model, &mid, camera);
        let mut cumulative = Vec::with_capacity(visible.len());
        let mut total = 0.0;
        for v in &visible {
            total += v.image.length();
            cumulative.push(total);
        }
        if total > 0.0 {
            for _ in 0..n_line {
                let u = rng.random_range(0.0..total);
                let si = cumulative.partition_point(|&c| c <= u).min(visible.len() - 1);
                let v = &visible[si];
                let s = rng.random_range(0.0..1.0);
                let world = mid_inv.transform_point(&v.point_at_image_fraction(s));
                let te = rng.random_range(t0..t1);
                let pose_e = camera_pose(spec, rig, id, te)?;
                let pc = pose_e.transform_point(&world);
                if pc.z <= 0.0 {
                    continue;
                }
                let p = k.project(&pc.coords);
                let later = camera_pose(spec, rig, id, (te + 100).min(duration_us))?;
                let p_later = k.project(&later.transform_point(&world).coords);
                let motion = (p_later - p).dot(&v.image.line.normal());
                let polarity = if motion.abs() > 1e-12 {
                    if motion > 0.0 { Polarity::Positive } else { Polarity::Negative }
                } else if rng.random_bool(0.5) {
                    Polarity::Positive
                } else {
                    Polarity::Negative
                };
                let mut q = p;
                if noise.pixel_jitter_sigma > 0.0 {
                    q.x += pix.sample(&mut rng);
                    q.y += pix.sample(&mut rng);
                }
                let t = jitter_time(te, noise.timestamp_jitter_sigma, &tjit, &mut rng, duration_us);
                if let Some(event) = quantize(&q, t, polarity, w, h) {
                    samples.push(Sample {
                        event,
                        label: v.index as i32,
                        subpixel: q,
                    });
                    line_events += 1;
                }
            }
        }
        for _ in 0..n_noise {
            let x = rng.random_range(0..w);
            let y = rng.random_range(0..h);
            let t = rng.random_range(t0..t1);
            let polarity = if rng.random_bool(0.5) { Polarity::Positive } else { Polarity::Negative };
            samples.push(Sample {
                event: Event::new(x, y, t, polarity),
                label: NOISE_LABEL,
                subpixel: Point2::new(f64::from(x), f64::from(y)),
            });
        }
        t0 = t1;
    }
    samples.sort_by_key(|s| (s.event.t, s.event.y, s.event.x));
    let labels = samples.iter().map(|s| s.label).collect();
    let subpixel = samples.iter().map(|s| s.subpixel).collect();
    let events = samples.into_iter().map(|s| s.event).collect();
    Ok((
        RenderedCamera {
            stream: EventStream::new(events, w, h, id)?,
            labels,
            subpixel: Some(subpixel),
        },
        line_events,
    ))
}

fn jitter_time(t: u64, sigma: f64, dist: &Normal<f64>, rng: &mut ChaCha8Rng, duration_us: u64) -> u64 {
    if sigma <= 0.0 {
        return t;
    }
    (t as f64 + dist.sample(rng)).round().clamp(0.0, duration_us as f64) as u64
}

fn quantize(p: &Point2<f64>, t: u64, polarity: Polarity, w: u16, h: u16) -> Option<Event> {
    let (x, y) = (p.x.round(), p.y.round());
    (x >= 0.0 && y >= 0.0 && x < f64::from(w) && y < f64::from(h))
        .then(|| Event::new(x as u16, y as u16, t, polarity))
}
