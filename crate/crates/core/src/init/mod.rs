//! Wireframe reconstruction from the first stereo event cluster.

pub mod endpoints;
pub mod extract;
pub mod initialize;
pub mod refine;
pub mod stereo_match;
pub mod triangulate;

pub use extract::{extract_line_support, extract_lines, snap_junctions, ExtractedSegment, ExtractionParams, MovingLine};
pub use stereo_match::{match_stereo_lines, score_matrix, StereoMatchParams};
pub use refine::{refine_lines, LineObservations, RefineParams, RefinedLine};
pub use triangulate::{triangulate_model, TriangulatedLine};
pub use endpoints::{determine_endpoints, endpoint_pairs, pair_cost, EndpointMatchParams, EndpointMethod};
pub use initialize::{initialize_model, InitParams};
