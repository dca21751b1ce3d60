//! Axes metadata written next to a grid CSV, since the pixmaps carry no
//! axes or legend.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::csv::HEADER;
use super::ppm::Palette;
use super::FormatError;
use crate::sweep::{GridResult, GridSpec};

pub const FORMAT: &str = "qtm-grid";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Sidecar<'a> {
    pub format: &'static str,
    pub version: u32,
    pub columns: [&'static str; 9],
    /// Pixel order of the heatmaps.
    pub image_layout: &'static str,
    pub spec: &'a GridSpec,
    pub palette: &'a Palette,
    pub mode_counts: BTreeMap<&'static str, usize>,
    pub failed_cells: usize,
}

impl<'a> Sidecar<'a> {
    pub fn new(result: &'a GridResult, palette: &'a Palette) -> Self {
        let mut mode_counts = BTreeMap::new();
        for c in &result.cells {
            *mode_counts.entry(c.mode.as_str()).or_insert(0) += 1;
        }
        Self {
            format: FORMAT,
            version: VERSION,
            columns: HEADER,
            image_layout: "P6; first row is y max; x increases left to right",
            spec: &result.spec,
            palette,
            mode_counts,
            failed_cells: result.failures(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("sidecar serializes");
        s.push('\n');
        s
    }
}

pub fn write_sidecar(path: &Path, result: &GridResult, palette: &Palette) -> Result<(), FormatError> {
    fs::write(path, Sidecar::new(result, palette).to_json())?;
    Ok(())
}
