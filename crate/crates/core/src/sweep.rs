//! Two-dimensional parameter sweeps.
//!
//! A [`GridSpec`] names two swept axes out of `ω₀, ω₁, T_h, T_c` and fixes
//! the rest. Cells are evaluated independently, in parallel, and stored
//! row-major with x varying fastest. A cell whose solver fails keeps its
//! place in the grid and carries a flag instead of numbers.

use std::fmt;
use std::str::FromStr;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use crate::classifier::{
    classify, clausius_residual, performance, KappaVariant, OperationalMode, DEFAULT_TOLERANCE,
};
use crate::cycles::{run_cycle, CycleKind, CyclePoint, CycleRecord};
use crate::error::{Error, Result};
use crate::spectrum::MachineParams;

/// Worker-count override.
pub const THREADS_ENV: &str = "QTM_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisParam {
    Omega0,
    Omega1,
    THot,
    TCold,
}

impl AxisParam {
    pub const ALL: [AxisParam; 4] = [Self::Omega0, Self::Omega1, Self::THot, Self::TCold];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Omega0 => "omega0",
            Self::Omega1 => "omega1",
            Self::THot => "t_hot",
            Self::TCold => "t_cold",
        }
    }

    fn is_temperature(&self) -> bool {
        matches!(self, Self::THot | Self::TCold)
    }
}

impl fmt::Display for AxisParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AxisParam {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown axis `{s}` (expected omega0, omega1, t_hot or t_cold)"))
    }
}

/// Evenly spaced samples of one parameter, both ends included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub param: AxisParam,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(param: AxisParam, min: f64, max: f64, count: usize) -> Self {
        Self {
            param,
            min,
            max,
            count,
        }
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            return self.max;
        }
        self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|i| self.value(i))
    }

    /// Index of the sample closest to `v`.
    pub fn nearest(&self, v: f64) -> usize {
        let t = ((v - self.min) / self.step()).round();
        t.clamp(0.0, (self.count - 1) as f64) as usize
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidGrid(format!("{} axis: {msg}", self.param)));
        if self.count < 2 {
            return bad("count must be >= 2");
        }
        if !(self.min.is_finite() && self.max.is_finite()) {
            return bad("bounds must be finite");
        }
        if self.min >= self.max {
            return bad("min must be < max");
        }
        if self.param.is_temperature() && self.min <= 0.0 {
            return bad("temperatures must be > 0");
        }
        if self.min < 0.0 {
            return bad("frequencies must be >= 0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub cycle: CycleKind,
    pub x: Axis,
    pub y: Axis,
    /// Values for the parameters that are not swept. Entries for the swept
    /// axes are ignored.
    pub omega0: f64,
    pub omega1: f64,
    pub t_cold: f64,
    pub t_hot: f64,
    pub params: MachineParams,
    /// Sign dead-band of the classifier.
    pub tolerance: f64,
    pub kappa: KappaVariant,
}

impl GridSpec {
    /// `(ω₀, ω₁)` plane over `[0.05, 5]²` at 256² with `T_c = 1`, `T_h = 2`.
    pub fn omega_plane(cycle: CycleKind, params: MachineParams) -> Self {
        Self {
            cycle,
            x: Axis::new(AxisParam::Omega0, 0.05, 5.0, 256),
            y: Axis::new(AxisParam::Omega1, 0.05, 5.0, 256),
            omega0: 1.0,
            omega1: 2.0,
            t_cold: 1.0,
            t_hot: 2.0,
            params,
            tolerance: DEFAULT_TOLERANCE,
            kappa: KappaVariant::Plain,
        }
    }

    pub fn with_window(mut self, min: f64, max: f64, count: usize) -> Self {
        self.x = Axis::new(self.x.param, min, max, count);
        self.y = Axis::new(self.y.param, min, max, count);
        self
    }

    pub fn with_temperatures(mut self, t_cold: f64, t_hot: f64) -> Self {
        self.t_cold = t_cold;
        self.t_hot = t_hot;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.x.validate()?;
        self.y.validate()?;
        if self.x.param == self.y.param {
            return Err(Error::InvalidGrid(format!("both axes sweep {}", self.x.param)));
        }
        if !(self.tolerance.is_finite() && self.tolerance >= 0.0) {
            return Err(Error::InvalidGrid(format!("tolerance {} must be >= 0", self.tolerance)));
        }
        let corner = self.point(self.x.min, self.y.min);
        let fixed = CyclePoint::new(self.params, corner.0, corner.1, corner.2, corner.3);
        fixed.map(|_| ()).map_err(|e| Error::InvalidGrid(e.to_string()))
    }

    pub fn cell_count(&self) -> usize {
        self.x.count * self.y.count
    }

    /// `(ω₀, ω₁, T_c, T_h)` at the given axis values.
    fn point(&self, x: f64, y: f64) -> (f64, f64, f64, f64) {
        let mut p = (self.omega0, self.omega1, self.t_cold, self.t_hot);
        for (axis, v) in [(self.x.param, x), (self.y.param, y)] {
            match axis {
                AxisParam::Omega0 => p.0 = v,
                AxisParam::Omega1 => p.1 = v,
                AxisParam::TCold => p.2 = v,
                AxisParam::THot => p.3 = v,
            }
        }
        p
    }

    pub fn cycle_point(&self, x: f64, y: f64) -> Result<CyclePoint> {
        let (w0, w1, tc, th) = self.point(x, y);
        CyclePoint::new(self.params, w0, w1, tc, th)
    }
}

/// Per-cell diagnostics, serialized as `;`-joined tokens.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct CellFlags(u8);

impl CellFlags {
    /// No isentrope in the widened Carnot bracket.
    pub const NO_ROOT: CellFlags = CellFlags(1);
    /// Positive Clausius residual.
    pub const CLAUSIUS: CellFlags = CellFlags(1 << 1);
    /// Metric denominator inside the dead-band.
    pub const DIV_ZERO: CellFlags = CellFlags(1 << 2);
    /// Regenerator inactive (ΔQ ≤ 0).
    pub const REGEN_OFF: CellFlags = CellFlags(1 << 3);
    /// Any other solver error.
    pub const SOLVER: CellFlags = CellFlags(1 << 4);

    const TOKENS: [(CellFlags, &'static str); 5] = [
        (Self::NO_ROOT, "no_root"),
        (Self::CLAUSIUS, "clausius"),
        (Self::DIV_ZERO, "div_zero"),
        (Self::REGEN_OFF, "regen_off"),
        (Self::SOLVER, "solver"),
    ];

    pub const fn empty() -> Self {
        CellFlags(0)
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn contains(&self, other: CellFlags) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn insert(&mut self, other: CellFlags) {
        self.0 |= other.0;
    }

    /// Cell has no cycle numbers.
    pub fn is_failure(&self) -> bool {
        self.0 & (Self::NO_ROOT.0 | Self::SOLVER.0) != 0
    }

    /// Flags that mark a cell as suspect. `regen_off` is informational.
    pub fn is_suspect(&self) -> bool {
        self.0 & !Self::REGEN_OFF.0 != 0
    }
}

impl fmt::Display for CellFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (flag, token) in Self::TOKENS {
            if self.contains(flag) {
                if !first {
                    f.write_str(";")?;
                }
                f.write_str(token)?;
                first = false;
            }
        }
        Ok(())
    }
}

impl FromStr for CellFlags {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let mut flags = CellFlags::empty();
        for token in s.split(';').filter(|t| !t.is_empty()) {
            let (flag, _) = Self::TOKENS
                .iter()
                .find(|(_, t)| *t == token)
                .ok_or_else(|| format!("unknown flag `{token}`"))?;
            flags.insert(*flag);
        }
        Ok(flags)
    }
}

impl Serialize for CellFlags {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// One grid point. Heats use the classifier's bath attribution, so the
/// mode column can be recomputed from the numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub x: f64,
    pub y: f64,
    pub q_hot: Option<f64>,
    pub q_cold: Option<f64>,
    pub work: Option<f64>,
    pub mode: OperationalMode,
    pub metric: Option<f64>,
    pub kappa: Option<f64>,
    pub flags: CellFlags,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridResult {
    pub spec: GridSpec,
    pub cells: Vec<Cell>,
}

impl GridResult {
    pub fn cell(&self, i: usize, j: usize) -> &Cell {
        &self.cells[j * self.spec.x.count + i]
    }

    pub fn width(&self) -> usize {
        self.spec.x.count
    }

    pub fn height(&self) -> usize {
        self.spec.y.count
    }

    /// Fraction of cells in `mode`, ignoring suspect cells.
    pub fn area(&self, mode: OperationalMode) -> f64 {
        let n = self
            .cells
            .iter()
            .filter(|c| c.mode == mode && !c.flags.is_suspect())
            .count();
        n as f64 / self.cells.len() as f64
    }

    pub fn modes(&self) -> Vec<OperationalMode> {
        let mut seen: Vec<_> = self.cells.iter().map(|c| c.mode).collect();
        seen.sort();
        seen.dedup();
        seen
    }

    /// Largest metric among unflagged cells in `mode`.
    pub fn max_metric(&self, mode: OperationalMode) -> Option<f64> {
        self.cells
            .iter()
            .filter(|c| c.mode == mode && !c.flags.is_suspect())
            .filter_map(|c| c.metric)
            .reduce(f64::max)
    }

    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| c.flags.is_failure()).count()
    }
}

/// Cycle, classification and flags at one point. `record` is `None` when
/// the cycle could not be run.
pub fn evaluate_point(
    kind: CycleKind,
    point: &CyclePoint,
    tolerance: f64,
    kappa: KappaVariant,
) -> (Cell, Option<CycleRecord>) {
    let mut cell = Cell {
        x: point.omega0,
        y: point.omega1,
        q_hot: None,
        q_cold: None,
        work: None,
        mode: OperationalMode::Forbidden,
        metric: None,
        kappa: None,
        flags: CellFlags::empty(),
    };
    let record = match run_cycle(kind, point) {
        Ok(r) => r,
        Err(Error::NoRootInBracket { .. }) => {
            cell.flags.insert(CellFlags::NO_ROOT);
            return (cell, None);
        }
        Err(_) => {
            cell.flags.insert(CellFlags::SOLVER);
            return (cell, None);
        }
    };
    let temps = (point.t_cold, point.t_hot);
    let (hot, cold) = record.bath_heats();
    cell.q_hot = Some(hot);
    cell.q_cold = Some(cold);
    cell.work = Some(record.work_out);
    cell.mode = classify(&record, tolerance);
    if let Some(regen) = record.regen {
        if !regen.active {
            cell.flags.insert(CellFlags::REGEN_OFF);
        }
    }
    if clausius_residual(&record, temps) > tolerance.max(1e-12) {
        cell.flags.insert(CellFlags::CLAUSIUS);
    }
    match performance(&record, temps, kappa, tolerance) {
        Ok(Some(perf)) => {
            cell.metric = Some(perf.metric);
            cell.kappa = Some(perf.kappa);
        }
        Ok(None) => {}
        Err(_) => cell.flags.insert(CellFlags::DIV_ZERO),
    }
    (cell, Some(record))
}

pub fn evaluate_cell(spec: &GridSpec, x: f64, y: f64) -> Cell {
    let mut cell = match spec.cycle_point(x, y) {
        Ok(point) => evaluate_point(spec.cycle, &point, spec.tolerance, spec.kappa).0,
        Err(_) => Cell {
            x,
            y,
            q_hot: None,
            q_cold: None,
            work: None,
            mode: OperationalMode::Forbidden,
            metric: None,
            kappa: None,
            flags: CellFlags::SOLVER,
        },
    };
    cell.x = x;
    cell.y = y;
    cell
}

/// Evaluates the grid on the ambient rayon pool, or sequentially without
/// the `parallel` feature.
pub fn run_grid(spec: &GridSpec) -> Result<GridResult> {
    spec.validate()?;
    let spec = *spec;
    let eval = |k: usize| {
        let (i, j) = (k % spec.x.count, k / spec.x.count);
        evaluate_cell(&spec, spec.x.value(i), spec.y.value(j))
    };
    #[cfg(feature = "parallel")]
    let cells = (0..spec.cell_count()).into_par_iter().map(eval).collect();
    #[cfg(not(feature = "parallel"))]
    let cells = (0..spec.cell_count()).map(eval).collect();
    Ok(GridResult { spec, cells })
}

/// Evaluates the grid on a dedicated pool of `threads` workers.
#[cfg(feature = "parallel")]
pub fn run_grid_with_threads(spec: &GridSpec, threads: usize) -> Result<GridResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidGrid(format!("thread pool: {e}")))?;
    pool.install(|| run_grid(spec))
}

/// Positive worker count from `QTM_THREADS`, if set.
pub fn threads_from_env() -> std::result::Result<Option<usize>, String> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("{THREADS_ENV} must be a positive integer, got `{v}`")),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanAxis {
    X,
    Y,
}

/// Where to look for a mode onset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scan {
    /// Along one axis, with the other axis held at the sample nearest `at`.
    Line { along: ScanAxis, at: f64 },
    /// Along one axis, counting a sample as present if any cell across the
    /// other axis is in the mode.
    Envelope { along: ScanAxis },
}

/// Smallest scanned-axis value at which `mode` first appears, placed
/// halfway between the last absent and the first present sample. `None`
/// when the mode never appears. Suspect cells are skipped.
pub fn locate_boundary(result: &GridResult, mode: OperationalMode, scan: Scan) -> Option<f64> {
    let spec = &result.spec;
    let hit = |i: usize, j: usize| {
        let c = result.cell(i, j);
        c.mode == mode && !c.flags.is_suspect()
    };
    let along = match scan {
        Scan::Line { along, .. } | Scan::Envelope { along } => along,
    };
    let (axis, other) = match along {
        ScanAxis::X => (spec.x, spec.y),
        ScanAxis::Y => (spec.y, spec.x),
    };
    let present = |k: usize| -> bool {
        let at = |m: usize| match along {
            ScanAxis::X => hit(k, m),
            ScanAxis::Y => hit(m, k),
        };
        match scan {
            Scan::Line { at: v, .. } => at(other.nearest(v)),
            Scan::Envelope { .. } => (0..other.count).any(at),
        }
    };
    let first = (0..axis.count).find(|&k| present(k))?;
    if first == 0 {
        return Some(axis.value(0));
    }
    Some(0.5 * (axis.value(first - 1) + axis.value(first)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(r: f64) -> MachineParams {
        MachineParams::new(1.0, r).unwrap()
    }

    #[test]
    fn axis_samples() {
        let a = Axis::new(AxisParam::Omega0, 0.05, 5.0, 100);
        assert_eq!(a.value(0), 0.05);
        assert_eq!(a.value(99), 5.0);
        assert_eq!(a.values().count(), 100);
        assert_eq!(a.nearest(-3.0), 0);
        assert_eq!(a.nearest(a.value(37) + 0.1 * a.step()), 37);
        assert_eq!(a.nearest(1e9), 99);
    }

    #[test]
    fn rejects_bad_specs() {
        let base = GridSpec::omega_plane(CycleKind::Otto, params(1.0));
        let mut s = base;
        s.x.count = 1;
        assert!(s.validate().is_err());
        let mut s = base;
        s.y.param = AxisParam::Omega0;
        assert!(s.validate().is_err());
        let mut s = base;
        s.x.min = 6.0;
        assert!(s.validate().is_err());
        let mut s = base;
        s.t_cold = 0.0;
        assert!(s.validate().is_err());
        let mut s = base;
        s.y = Axis::new(AxisParam::THot, 0.0, 3.0, 10);
        assert!(s.validate().is_err());
        assert!(run_grid(&s).is_err());
    }

    #[test]
    fn flag_tokens_round_trip() {
        let mut f = CellFlags::empty();
        assert_eq!(f.to_string(), "");
        f.insert(CellFlags::REGEN_OFF);
        f.insert(CellFlags::NO_ROOT);
        assert_eq!(f.to_string(), "no_root;regen_off");
        assert_eq!("no_root;regen_off".parse::<CellFlags>().unwrap(), f);
        assert!(f.is_failure() && f.is_suspect());
        assert!(!CellFlags::REGEN_OFF.is_suspect());
        assert!("bogus".parse::<CellFlags>().is_err());
    }

    #[test]
    fn otto_diagonal_is_idle() {
        let spec = GridSpec::omega_plane(CycleKind::Otto, params(1.0)).with_window(1.0, 2.0, 2);
        let g = run_grid(&spec).unwrap();
        assert_eq!(g.cells.len(), 4);
        assert_eq!(g.cell(0, 0).mode, OperationalMode::Idle);
        assert_eq!(g.cell(1, 1).mode, OperationalMode::Idle);
        assert_eq!(g.cell(0, 1).mode, OperationalMode::Engine);
        // x fastest
        assert_eq!((g.cells[1].x, g.cells[1].y), (2.0, 1.0));
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn worker_count_is_unobservable() {
        let spec = GridSpec::omega_plane(CycleKind::Carnot, params(2.0)).with_window(0.05, 6.0, 24);
        let a = run_grid_with_threads(&spec, 1).unwrap();
        let b = run_grid_with_threads(&spec, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.failures() > 0, "small frequencies have no isentrope");
    }

    #[test]
    fn failures_stay_in_place() {
        let spec = GridSpec::omega_plane(CycleKind::Carnot, params(1.0))
            .with_window(0.05, 5.0, 8)
            .with_temperatures(1.0, 5.0);
        let g = run_grid(&spec).unwrap();
        assert_eq!(g.cells.len(), 64);
        for c in &g.cells {
            if c.flags.contains(CellFlags::NO_ROOT) {
                assert_eq!(c.mode, OperationalMode::Forbidden);
                assert!(c.q_hot.is_none() && c.metric.is_none());
            }
        }
    }

    #[test]
    fn boundary_interpolates_between_samples() {
        let spec = GridSpec::omega_plane(CycleKind::Otto, params(1.0)).with_window(0.0, 1.0, 5);
        let mut g = GridResult {
            spec,
            cells: vec![],
        };
        for j in 0..5 {
            for i in 0..5 {
                let mode = if j >= 3 && i == 1 {
                    OperationalMode::Refrigerator
                } else {
                    OperationalMode::Idle
                };
                g.cells.push(Cell {
                    x: spec.x.value(i),
                    y: spec.y.value(j),
                    q_hot: None,
                    q_cold: None,
                    work: None,
                    mode,
                    metric: None,
                    kappa: None,
                    flags: CellFlags::empty(),
                });
            }
        }
        let r = OperationalMode::Refrigerator;
        assert_eq!(locate_boundary(&g, r, Scan::Envelope { along: ScanAxis::Y }), Some(0.625));
        assert_eq!(locate_boundary(&g, r, Scan::Line { along: ScanAxis::Y, at: 0.3 }), Some(0.625));
        assert_eq!(locate_boundary(&g, r, Scan::Line { along: ScanAxis::Y, at: 0.0 }), None);
        assert_eq!(locate_boundary(&g, r, Scan::Envelope { along: ScanAxis::X }), Some(0.125));
        assert_eq!(locate_boundary(&g, OperationalMode::Idle, Scan::Envelope { along: ScanAxis::X }), Some(0.0));
        assert_eq!(locate_boundary(&g, OperationalMode::Heater, Scan::Envelope { along: ScanAxis::X }), None);
    }

    #[test]
    fn unflagged_cells_are_consistent() {
        for kind in CycleKind::ALL {
            let spec = GridSpec::omega_plane(kind, params(1.5))
                .with_window(0.05, 8.0, 20)
                .with_temperatures(1.0, 3.0);
            let g = run_grid(&spec).unwrap();
            for c in g.cells.iter().filter(|c| !c.flags.is_suspect()) {
                let (h, q, w) = (c.q_hot.unwrap(), c.q_cold.unwrap(), c.work.unwrap());
                assert!((h + q - w).abs() < 1e-9, "{kind}: {c:?}");
                assert_eq!(crate::classifier::classify_heats(h, q, w, spec.tolerance), c.mode);
                assert_eq!(c.metric.is_some(), c.mode.is_active());
            }
        }
    }
}
