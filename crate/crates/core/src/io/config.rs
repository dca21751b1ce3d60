//! Line-based run configuration.
//!
//! ```text
//! # comment
//! [machine]
//! g = 1
//! r = 1
//! [cycle]
//! cycle = otto
//! t_hot = 2
//! [grid]
//! x = omega0
//! x_min = 0.05
//! [output]
//! dir = out
//! ```
//!
//! Every key is optional; see [`RunConfig::default`]. Unknown sections or
//! keys, duplicates and malformed values are errors.

use std::collections::HashMap;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use super::ppm::{KappaRamp, Palette};
use super::FormatError;
use crate::classifier::{KappaVariant, OperationalMode, DEFAULT_TOLERANCE};
use crate::cycles::CycleKind;
use crate::spectrum::MachineParams;
use crate::sweep::{Axis, AxisParam, GridSpec};

const KEYS: &[(&str, &[&str])] = &[
    ("machine", &["g", "r", "left", "omega_bar"]),
    (
        "cycle",
        &["cycle", "t_cold", "t_hot", "omega0", "omega1", "tolerance", "kappa"],
    ),
    (
        "grid",
        &["x", "x_min", "x_max", "x_count", "y", "y_min", "y_max", "y_count"],
    ),
    (
        "output",
        &[
            "dir",
            "name",
            "image",
            "palette",
            "color_engine",
            "color_refrigerator",
            "color_heater",
            "color_accelerator",
            "color_idle",
            "color_forbidden",
        ],
    ),
];

/// Which heatmaps a sweep writes next to its CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageLayers {
    None,
    Mode,
    Kappa,
    Both,
}

impl ImageLayers {
    pub fn mode(&self) -> bool {
        matches!(self, Self::Mode | Self::Both)
    }

    pub fn kappa(&self) -> bool {
        matches!(self, Self::Kappa | Self::Both)
    }
}

impl FromStr for ImageLayers {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Self::None),
            "mode" => Ok(Self::Mode),
            "kappa" => Ok(Self::Kappa),
            "both" => Ok(Self::Both),
            _ => Err(format!("unknown image option `{s}` (expected none, mode, kappa or both)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// File stem for `<name>.csv`, `<name>.json`, `<name>_mode.ppm`, ...
    pub name: String,
    pub image: ImageLayers,
    pub palette: Palette,
}

/// Everything a run needs. Fields are plain values so command-line flags
/// can override them before [`RunConfig::validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub g: f64,
    pub r: f64,
    /// `None` keeps ω̄ = r·ω.
    pub omega_bar: Option<f64>,
    pub cycle: CycleKind,
    pub t_cold: f64,
    pub t_hot: f64,
    pub omega0: f64,
    pub omega1: f64,
    pub tolerance: f64,
    pub kappa: KappaVariant,
    pub x: Axis,
    pub y: Axis,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            g: 1.0,
            r: 1.0,
            omega_bar: None,
            cycle: CycleKind::Otto,
            t_cold: 1.0,
            t_hot: 2.0,
            omega0: 1.0,
            omega1: 2.0,
            tolerance: DEFAULT_TOLERANCE,
            kappa: KappaVariant::Plain,
            x: Axis::new(AxisParam::Omega0, 0.05, 5.0, 256),
            y: Axis::new(AxisParam::Omega1, 0.05, 5.0, 256),
            output: OutputConfig {
                dir: PathBuf::from("."),
                name: "grid".to_string(),
                image: ImageLayers::Mode,
                palette: Palette::default(),
            },
        }
    }
}

fn invalid(msg: String) -> FormatError {
    FormatError::Validation(msg)
}

impl RunConfig {
    /// Checks every field, naming the first offending key.
    pub fn validate(&self) -> Result<(), FormatError> {
        if !(self.g.is_finite() && self.g >= 0.0) {
            return Err(invalid(format!("g must be >= 0, got {}", self.g)));
        }
        if !(self.r.is_finite() && self.r > 0.0) {
            return Err(invalid(format!("r must be > 0, got {}", self.r)));
        }
        if let Some(w) = self.omega_bar {
            if !(w.is_finite() && w >= 0.0) {
                return Err(invalid(format!("omega_bar must be >= 0, got {w}")));
            }
        }
        for (name, t) in [("t_cold", self.t_cold), ("t_hot", self.t_hot)] {
            if !(t.is_finite() && t > 0.0) {
                return Err(invalid(format!("{name} must be > 0")));
            }
        }
        for (name, w) in [("omega0", self.omega0), ("omega1", self.omega1)] {
            if !(w.is_finite() && w >= 0.0) {
                return Err(invalid(format!("{name} must be >= 0")));
            }
        }
        if !(self.tolerance.is_finite() && self.tolerance >= 0.0) {
            return Err(invalid("tolerance must be >= 0".to_string()));
        }
        for (prefix, a) in [("x", &self.x), ("y", &self.y)] {
            if a.count < 2 {
                return Err(invalid(format!("{prefix}_count must be >= 2")));
            }
            if !(a.min.is_finite() && a.max.is_finite() && a.min < a.max) {
                return Err(invalid(format!("{prefix}_min must be < {prefix}_max")));
            }
            let positive = matches!(a.param, AxisParam::THot | AxisParam::TCold);
            if positive && a.min <= 0.0 {
                return Err(invalid(format!("{prefix}_min must be > 0 for a temperature axis")));
            }
            if a.min < 0.0 {
                return Err(invalid(format!("{prefix}_min must be >= 0")));
            }
        }
        if self.x.param == self.y.param {
            return Err(invalid(format!("x and y must differ, both are {}", self.x.param)));
        }
        if self.output.name.is_empty() || self.output.name.contains(['/', '\\']) {
            return Err(invalid(format!("name `{}` is not a plain file stem", self.output.name)));
        }
        Ok(())
    }

    pub fn machine_params(&self) -> Result<MachineParams, FormatError> {
        self.validate()?;
        let p = MachineParams::new(self.g, self.r).map_err(|e| invalid(e.to_string()))?;
        match self.omega_bar {
            Some(w) => p.with_fixed_left(w).map_err(|e| invalid(e.to_string())),
            None => Ok(p),
        }
    }

    pub fn grid_spec(&self) -> Result<GridSpec, FormatError> {
        let spec = GridSpec {
            cycle: self.cycle,
            x: self.x,
            y: self.y,
            omega0: self.omega0,
            omega1: self.omega1,
            t_cold: self.t_cold,
            t_hot: self.t_hot,
            params: self.machine_params()?,
            tolerance: self.tolerance,
            kappa: self.kappa,
        };
        spec.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(spec)
    }

    pub fn csv_path(&self) -> PathBuf {
        self.output.dir.join(format!("{}.csv", self.output.name))
    }

    pub fn sidecar_path(&self) -> PathBuf {
        self.output.dir.join(format!("{}.json", self.output.name))
    }

    pub fn image_path(&self, layer: &str) -> PathBuf {
        self.output.dir.join(format!("{}_{layer}.ppm", self.output.name))
    }
}

fn number(line: usize, key: &str, v: &str) -> Result<f64, FormatError> {
    v.parse::<f64>()
        .map_err(|_| FormatError::parse(line, format!("{key}: `{v}` is not a number")))
}

fn count(line: usize, key: &str, v: &str) -> Result<usize, FormatError> {
    v.parse::<usize>()
        .map_err(|_| FormatError::parse(line, format!("{key}: `{v}` is not a non-negative integer")))
}

fn parsed<T: FromStr<Err = String>>(line: usize, key: &str, v: &str) -> Result<T, FormatError> {
    v.parse::<T>().map_err(|e| FormatError::parse(line, format!("{key}: {e}")))
}

/// `r,g,b` with components in 0..=255.
fn color(line: usize, key: &str, v: &str) -> Result<[u8; 3], FormatError> {
    let parts: Vec<_> = v.split(',').map(|p| p.trim().parse::<u8>()).collect();
    match parts.as_slice() {
        [Ok(r), Ok(g), Ok(b)] => Ok([*r, *g, *b]),
        _ => Err(FormatError::parse(line, format!("{key}: `{v}` is not an r,g,b triple"))),
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, FormatError> {
    let mut cfg = RunConfig::default();
    let mut section: Option<&str> = None;
    let mut seen: HashMap<(String, String), usize> = HashMap::new();
    let mut left: Option<(usize, String)> = None;
    let mut omega_bar: Option<(usize, f64)> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| FormatError::parse(line, format!("malformed section header `{content}`")))?
                .trim();
            let known = KEYS.iter().find(|(s, _)| *s == name);
            section = Some(known.ok_or_else(|| FormatError::parse(line, format!("unknown section [{name}]")))?.0);
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| FormatError::parse(line, format!("expected `key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let sec = section.ok_or_else(|| FormatError::parse(line, format!("`{key}` appears before any section")))?;
        let allowed = KEYS.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&key) {
            return Err(FormatError::parse(line, format!("unknown key `{key}` in [{sec}]")));
        }
        if let Some(first) = seen.insert((sec.to_string(), key.to_string()), line) {
            return Err(FormatError::parse(
                line,
                format!("duplicate key `{key}` in [{sec}] (lines {first} and {line})"),
            ));
        }
        if value.is_empty() {
            return Err(FormatError::parse(line, format!("`{key}` has no value")));
        }

        match key {
            "g" => cfg.g = number(line, key, value)?,
            "r" => cfg.r = number(line, key, value)?,
            "left" => left = Some((line, value.to_string())),
            "omega_bar" => omega_bar = Some((line, number(line, key, value)?)),
            "cycle" => cfg.cycle = parsed(line, key, value)?,
            "t_cold" => cfg.t_cold = number(line, key, value)?,
            "t_hot" => cfg.t_hot = number(line, key, value)?,
            "omega0" => cfg.omega0 = number(line, key, value)?,
            "omega1" => cfg.omega1 = number(line, key, value)?,
            "tolerance" => cfg.tolerance = number(line, key, value)?,
            "kappa" => cfg.kappa = parsed(line, key, value)?,
            "x" => cfg.x.param = parsed(line, key, value)?,
            "x_min" => cfg.x.min = number(line, key, value)?,
            "x_max" => cfg.x.max = number(line, key, value)?,
            "x_count" => cfg.x.count = count(line, key, value)?,
            "y" => cfg.y.param = parsed(line, key, value)?,
            "y_min" => cfg.y.min = number(line, key, value)?,
            "y_max" => cfg.y.max = number(line, key, value)?,
            "y_count" => cfg.y.count = count(line, key, value)?,
            "dir" => cfg.output.dir = PathBuf::from(value),
            "name" => cfg.output.name = value.to_string(),
            "image" => cfg.output.image = parsed(line, key, value)?,
            "palette" => cfg.output.palette.ramp = parsed::<KappaRamp>(line, key, value)?,
            _ => {
                let mode_name = key.strip_prefix("color_").unwrap_or(key);
                let mode = mode_name
                    .parse::<OperationalMode>()
                    .map_err(|e| FormatError::parse(line, e))?;
                cfg.output.palette.set(mode, color(line, key, value)?);
            }
        }
    }

    match (left, omega_bar) {
        (None, None) => {}
        (None, Some((_, w))) => cfg.omega_bar = Some(w),
        (Some((line, mode)), w) => match (mode.as_str(), w) {
            ("scaled", None) => {}
            ("scaled", Some((wl, _))) => {
                return Err(FormatError::parse(wl, "omega_bar requires left = fixed"));
            }
            ("fixed", Some((_, w))) => cfg.omega_bar = Some(w),
            ("fixed", None) => return Err(FormatError::parse(line, "left = fixed requires omega_bar")),
            (other, _) => {
                return Err(FormatError::parse(
                    line,
                    format!("left: unknown mode `{other}` (expected scaled or fixed)"),
                ))
            }
        },
    }

    cfg.validate()?;
    Ok(cfg)
}
