//! The desk-scale tumbling cuboid used across integration tests: a 1 m
//! cube 1.5 m in front of a 0.2 m baseline rig, tumbling at 27.72 deg/s
//! with 3.43e5 events per second per camera.
#![allow(dead_code)]

use evline::camera::{Camera, CameraIntrinsics, StereoRig};
use evline::line::{plucker_from_points, Segment3D};
use evline::model::WireframeModel;
use evline::synth::{
    make_primitive, render_events, EventRateSpec, NoiseSpec, PrimitiveKind, RenderOptions, RenderedScene,
    TrajectoryKind, TrajectorySpec,
};
use nalgebra::{Matrix3, Vector3};

pub const RATE: f64 = 3.43e5;

pub fn rig() -> StereoRig {
    let cam = Camera {
        intrinsics: CameraIntrinsics::new(600.0, 600.0, 640.0, 480.0).unwrap(),
        width: 1280,
        height: 960,
    };
    StereoRig::new(cam, cam, Matrix3::identity(), Vector3::new(0.2, 0.0, 0.0)).unwrap()
}

pub fn tumble(duration: f64) -> TrajectorySpec {
    TrajectorySpec {
        kind: TrajectoryKind::Tumble,
        angular_velocity: 27.72,
        axis: [0.3, 0.2, 1.0],
        linear_velocity: [0.01, 0.005, 0.02],
        duration,
        precession_rate: 6.0,
        precession_axis: [0.0, 0.0, 1.0],
        initial_rotation: [-0.9319549495801298, 0.8061721702108054, 0.34421051839758726],
        initial_translation: [0.1, 0.0, 1.5],
    }
}

pub fn cube() -> WireframeModel {
    make_primitive(&PrimitiveKind::Cuboid { size: [1.0; 3] }).unwrap()
}

pub fn scene(duration: f64, noise: NoiseSpec) -> RenderedScene {
    render_events(
        &cube(),
        &tumble(duration),
        &rig(),
        &EventRateSpec { mean_event_rate: RATE },
        &noise,
        &RenderOptions::default(),
    )
    .unwrap()
}

pub fn noisy(seed: u64) -> NoiseSpec {
    NoiseSpec {
        pixel_jitter_sigma: 0.5,
        timestamp_jitter_sigma: 500.0,
        background_rate_fraction: 0.2,
        seed,
    }
}

/// Direction error (radians) and worst endpoint error (meters) of `s`
/// against the ground-truth edge with the closest endpoints.
pub fn closest_edge(gt: &[Segment3D], s: &Segment3D) -> (usize, f64, f64) {
    let l = plucker_from_points(&s.pa, &s.pb).unwrap();
    gt.iter()
        .enumerate()
        .map(|(i, g)| {
            let lg = plucker_from_points(&g.pa, &g.pb).unwrap();
            let e1 = (s.pa - g.pa).norm().max((s.pb - g.pb).norm());
            let e2 = (s.pa - g.pb).norm().max((s.pb - g.pa).norm());
            (i, l.angle_to(&lg), e1.min(e2))
        })
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .unwrap()
}
