//! Binary P6 heatmaps, one pixel per grid cell.
//!
//! Layout: the ASCII header `P6 <width> <height> 255\n` followed by
//! `3·width·height` bytes of RGB. The first pixel row is the largest y
//! sample and x increases left to right, so the image reads like a plot.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use super::FormatError;
use crate::classifier::OperationalMode;
use crate::sweep::Cell;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    Mode,
    Kappa,
}

impl Layer {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Mode => "mode",
            Self::Kappa => "kappa",
        }
    }
}

impl FromStr for Layer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mode" => Ok(Self::Mode),
            "kappa" => Ok(Self::Kappa),
            _ => Err(format!("unknown layer `{s}` (expected mode or kappa)")),
        }
    }
}

/// Color ramp for κ ∈ [0, 1]. Both ramps increase monotonically in
/// luminance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KappaRamp {
    /// Piecewise-linear through five viridis stops.
    #[default]
    Viridis,
    Gray,
}

impl FromStr for KappaRamp {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "viridis" => Ok(Self::Viridis),
            "gray" => Ok(Self::Gray),
            _ => Err(format!("unknown palette `{s}` (expected viridis or gray)")),
        }
    }
}

const VIRIDIS: [[f64; 3]; 5] = [
    [68.0, 1.0, 84.0],
    [59.0, 82.0, 139.0],
    [33.0, 145.0, 140.0],
    [94.0, 201.0, 98.0],
    [253.0, 231.0, 37.0],
];

impl KappaRamp {
    /// Color of `kappa`, clamped to [0, 1].
    pub fn color(&self, kappa: f64) -> [u8; 3] {
        let t = if kappa.is_nan() { 0.0 } else { kappa.clamp(0.0, 1.0) };
        match self {
            Self::Gray => {
                let v = (255.0 * t).round() as u8;
                [v, v, v]
            }
            Self::Viridis => {
                let s = t * (VIRIDIS.len() - 1) as f64;
                let k = (s.floor() as usize).min(VIRIDIS.len() - 2);
                let f = s - k as f64;
                let (a, b) = (VIRIDIS[k], VIRIDIS[k + 1]);
                [0, 1, 2].map(|c| (a[c] + f * (b[c] - a[c])).round() as u8)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Palette {
    /// Indexed like [`OperationalMode::ALL`].
    pub modes: [[u8; 3]; 6],
    pub ramp: KappaRamp,
    /// κ layer color for cells without a metric.
    pub missing: [u8; 3],
}

impl Default for Palette {
    fn default() -> Self {
        Self {
            modes: [
                [0, 170, 0],
                [0, 200, 200],
                [230, 210, 0],
                [220, 0, 0],
                [255, 255, 255],
                [0, 0, 0],
            ],
            ramp: KappaRamp::Viridis,
            missing: [255, 255, 255],
        }
    }
}

impl Palette {
    fn index(mode: OperationalMode) -> usize {
        OperationalMode::ALL.iter().position(|m| *m == mode).unwrap_or(0)
    }

    pub fn color(&self, mode: OperationalMode) -> [u8; 3] {
        self.modes[Self::index(mode)]
    }

    pub fn set(&mut self, mode: OperationalMode, rgb: [u8; 3]) {
        self.modes[Self::index(mode)] = rgb;
    }

    pub fn cell_color(&self, cell: &Cell, layer: Layer) -> [u8; 3] {
        match layer {
            Layer::Mode => self.color(cell.mode),
            Layer::Kappa => cell.kappa.map_or(self.missing, |k| self.ramp.color(k)),
        }
    }
}

/// Encodes `cells` (row-major, x fastest, y increasing) as a P6 image.
pub fn render_heatmap(
    cells: &[Cell],
    width: usize,
    height: usize,
    layer: Layer,
    palette: &Palette,
) -> Result<Vec<u8>, FormatError> {
    if cells.len() != width * height {
        return Err(FormatError::Validation(format!(
            "{} cells do not fill a {width}x{height} image",
            cells.len()
        )));
    }
    let mut out = format!("P6 {width} {height} 255\n").into_bytes();
    out.reserve(3 * cells.len());
    for row in cells.chunks(width.max(1)).rev() {
        for cell in row {
            out.extend_from_slice(&palette.cell_color(cell, layer));
        }
    }
    Ok(out)
}

pub fn write_heatmap(
    path: &Path,
    cells: &[Cell],
    width: usize,
    height: usize,
    layer: Layer,
    palette: &Palette,
) -> Result<(), FormatError> {
    let bytes = render_heatmap(cells, width, height, layer, palette)?;
    fs::write(path, bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::CellFlags;

    fn cell(mode: OperationalMode, kappa: Option<f64>) -> Cell {
        Cell {
            x: 0.0,
            y: 0.0,
            q_hot: None,
            q_cold: None,
            work: None,
            mode,
            metric: kappa,
            kappa,
            flags: CellFlags::empty(),
        }
    }

    #[test]
    fn uniform_engine_grid() {
        let cells = vec![cell(OperationalMode::Engine, Some(0.3)); 256 * 256];
        let img = render_heatmap(&cells, 256, 256, Layer::Mode, &Palette::default()).unwrap();
        let header = b"P6 256 256 255\n";
        assert_eq!(&img[..header.len()], header);
        assert_eq!(img.len() - header.len(), 196608);
        assert!(img[header.len()..].chunks(3).all(|p| p == [0, 170, 0]));
    }

    #[test]
    fn top_row_is_largest_y() {
        // 2x2: bottom row refrigerator, top row heater
        let cells = vec![
            cell(OperationalMode::Refrigerator, None),
            cell(OperationalMode::Idle, None),
            cell(OperationalMode::Heater, None),
            cell(OperationalMode::Accelerator, None),
        ];
        let img = render_heatmap(&cells, 2, 2, Layer::Mode, &Palette::default()).unwrap();
        let px = &img[b"P6 2 2 255\n".len()..];
        assert_eq!(px, [230, 210, 0, 220, 0, 0, 0, 200, 200, 255, 255, 255]);
    }

    #[test]
    fn kappa_layer() {
        let cells = vec![cell(OperationalMode::Forbidden, None), cell(OperationalMode::Engine, Some(1.0))];
        let img = render_heatmap(&cells, 2, 1, Layer::Kappa, &Palette::default()).unwrap();
        assert_eq!(&img[b"P6 2 1 255\n".len()..], [255, 255, 255, 253, 231, 37]);
    }

    #[test]
    fn ramps_are_monotone_in_luminance() {
        let lum = |c: [u8; 3]| 0.2126 * c[0] as f64 + 0.7152 * c[1] as f64 + 0.0722 * c[2] as f64;
        for ramp in [KappaRamp::Viridis, KappaRamp::Gray] {
            let mut prev = -1.0;
            for k in 0..=200 {
                let l = lum(ramp.color(k as f64 / 200.0));
                assert!(l >= prev, "{ramp:?} at {k}");
                prev = l;
            }
        }
        assert_eq!(KappaRamp::Viridis.color(-2.0), [68, 1, 84]);
        assert_eq!(KappaRamp::Gray.color(0.5), [128, 128, 128]);
    }

    #[test]
    fn size_mismatch() {
        let cells = vec![cell(OperationalMode::Idle, None); 3];
        assert!(render_heatmap(&cells, 2, 2, Layer::Mode, &Palette::default()).is_err());
    }
}
