pub mod camera;
pub mod config;
pub mod error;
pub mod eval;
pub mod event;
pub mod init;
pub mod io;
pub mod line;
pub mod lm;
pub mod model;
pub mod pipeline;
pub mod synth;
pub mod track;
pub mod trajectory;

pub use error::{Error, Result};
