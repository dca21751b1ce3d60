//! Run configuration and on-disk formats: grid CSV, P6 heatmaps and the
//! axes sidecar.

pub mod config;
pub mod csv;
pub mod ppm;
pub mod sidecar;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl FormatError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Self::Parse {
            line,
            message: message.into(),
        }
    }
}

pub use self::config::{parse_config, ImageLayers, OutputConfig, RunConfig};
pub use self::csv::{format_number, read_grid, write_cells, write_grid, CsvGrid};
pub use self::ppm::{render_heatmap, KappaRamp, Layer, Palette};
