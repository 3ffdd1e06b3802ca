//! File formats and image pipelines.

pub mod energy_file;
pub mod pipelines;
pub mod pnm;

use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("image: {0}")]
    Image(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub use energy_file::{
    format_labeling, format_model, load_labeling, load_model, parse_labeling, parse_model,
    save_labeling_text, save_model,
};
pub use pipelines::{
    build_denoise_model, build_stereo_model, labeling_image, save_labeling, LabelToGray,
};
pub use pnm::{read_image, write_image, Image};
