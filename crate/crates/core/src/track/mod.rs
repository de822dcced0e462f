//! Pose tracking against a wireframe model.

pub mod matching;
pub mod optimize;
pub mod tracker;
pub mod visibility;

pub use matching::{match_events, match_events_counted, Association, MatchThresholds};
pub use optimize::{associate, optimize_pose, Observation, PoseEstimate, PoseProblem, TrackParams};
pub use tracker::{stereo_clusters, track_sequence, track_step, StepRecord, TrackStatus, TrackerState, TrackingOutput};
pub use visibility::{visible_segments, visible_segments_for_camera, VisibleSegment};
