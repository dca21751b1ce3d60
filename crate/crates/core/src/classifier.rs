//! Operational modes from the signs of `(Q_c, W, Q_h)`, plus efficiency,
//! COP and the normalized performance κ = COP/(1 + COP).
//!
//! | mode         | Q_c | W | Q_h |
//! |--------------|-----|---|-----|
//! | engine       |  −  | + |  +  |
//! | refrigerator |  +  | − |  −  |
//! | heater       |  −  | − |  −  |
//! | accelerator  |  −  | − |  +  |
//!
//! A cycle with no net work is `idle` when heat is either absent or flows
//! from hot to cold; every other sign pattern is `forbidden`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cycles::{CycleKind, CycleRecord};
use crate::error::{Error, Result};

/// Default sign dead-band, in energy units.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperationalMode {
    Engine,
    Refrigerator,
    Heater,
    Accelerator,
    Idle,
    Forbidden,
}

impl OperationalMode {
    pub const ALL: [OperationalMode; 6] = [
        Self::Engine,
        Self::Refrigerator,
        Self::Heater,
        Self::Accelerator,
        Self::Idle,
        Self::Forbidden,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Engine => "engine",
            Self::Refrigerator => "refrigerator",
            Self::Heater => "heater",
            Self::Accelerator => "accelerator",
            Self::Idle => "idle",
            Self::Forbidden => "forbidden",
        }
    }

    /// Whether a performance metric is defined.
    pub fn is_active(&self) -> bool {
        !matches!(self, Self::Idle | Self::Forbidden)
    }
}

impl fmt::Display for OperationalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OperationalMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mode `{s}`"))
    }
}

/// How κ is reported in engine mode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KappaVariant {
    /// κ = η
    #[default]
    Plain,
    /// κ = η / (1 − T_c/T_h)
    Carnot,
}

impl FromStr for KappaVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "plain" => Ok(Self::Plain),
            "carnot" => Ok(Self::Carnot),
            _ => Err(format!("unknown kappa variant `{s}` (expected plain or carnot)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Performance {
    pub mode: OperationalMode,
    /// η in engine mode, COP otherwise.
    pub metric: f64,
    pub kappa: f64,
}

fn sign(x: f64, tolerance: f64) -> i8 {
    if x > tolerance {
        1
    } else if x < -tolerance {
        -1
    } else {
        0
    }
}

/// Mode from raw signed heats and work.
pub fn classify_heats(q_hot: f64, q_cold: f64, work: f64, tolerance: f64) -> OperationalMode {
    use OperationalMode::*;
    match (sign(q_cold, tolerance), sign(work, tolerance), sign(q_hot, tolerance)) {
        (-1, 1, 1) => Engine,
        (1, -1, -1) => Refrigerator,
        (-1, -1, -1) => Heater,
        (-1, -1, 1) => Accelerator,
        (0, 0, 0) | (-1, 0, 1) => Idle,
        _ => Forbidden,
    }
}

pub fn classify(record: &CycleRecord, tolerance: f64) -> OperationalMode {
    let (hot, cold) = record.bath_heats();
    classify_heats(hot, cold, record.work_out, tolerance)
}

/// `COP / (1 + COP)`
pub fn normalized(cop: f64) -> f64 {
    if cop.is_infinite() {
        1.0
    } else {
        cop / (1.0 + cop)
    }
}

/// η or COP for the record's mode, with κ.
pub fn performance(
    record: &CycleRecord,
    temperatures: (f64, f64),
    variant: KappaVariant,
    tolerance: f64,
) -> Result<Option<Performance>> {
    let mode = classify(record, tolerance);
    let (_, cold) = record.bath_heats();
    let work = record.work_out;
    let floor = tolerance.max(f64::MIN_POSITIVE);
    let guard = |d: f64| {
        if d.abs() <= floor {
            Err(Error::DivisionByNearZero { denominator: d })
        } else {
            Ok(d)
        }
    };
    let perf = match mode {
        OperationalMode::Engine => {
            let eta = work / guard(record.heat_input())?;
            let kappa = match variant {
                KappaVariant::Plain => eta,
                KappaVariant::Carnot => {
                    let (tc, th) = temperatures;
                    eta / (1.0 - tc / th)
                }
            };
            Performance {
                mode,
                metric: eta,
                kappa,
            }
        }
        OperationalMode::Refrigerator => {
            let cop = cold / guard(work)?.abs();
            Performance {
                mode,
                metric: cop,
                kappa: normalized(cop),
            }
        }
        OperationalMode::Heater | OperationalMode::Accelerator => {
            let cop = cold.abs() / guard(work)?.abs();
            Performance {
                mode,
                metric: cop,
                kappa: normalized(cop),
            }
        }
        OperationalMode::Idle | OperationalMode::Forbidden => return Ok(None),
    };
    Ok(Some(perf))
}

/// `Q_hot/T_h + Q_cold/T_c` with the record's bath attribution.
/// Non-positive for an admissible cycle.
pub fn clausius_residual(record: &CycleRecord, temperatures: (f64, f64)) -> f64 {
    let (tc, th) = temperatures;
    let (hot, cold) = match record.kind {
        // Q₂ and Q₄ are bath exchanges even when a regenerator recycles them
        CycleKind::StirlingRegen => (record.q_hot, record.q_cold),
        _ => record.bath_heats(),
    };
    hot / th + cold / tc
}

/// Clausius residual charged to the baths when the regenerator is treated
/// as part of the medium. The ideal regenerator is not guaranteed to keep
/// this non-positive.
pub fn clausius_residual_regen(record: &CycleRecord, temperatures: (f64, f64)) -> f64 {
    let (tc, th) = temperatures;
    let (hot, cold) = record.bath_heats();
    hot / th + cold / tc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycles::{run_carnot_widening, run_otto, CyclePoint};
    use crate::spectrum::MachineParams;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const TOL: f64 = DEFAULT_TOLERANCE;

    #[test]
    fn table_rows() {
        use OperationalMode::*;
        assert_eq!(classify_heats(1.0, -0.5, 0.5, TOL), Engine);
        assert_eq!(classify_heats(-1.0, 0.5, -0.5, TOL), Refrigerator);
        assert_eq!(classify_heats(-0.2, -0.5, -0.7, TOL), Heater);
        assert_eq!(classify_heats(0.7, -1.0, -0.3, TOL), Accelerator);
        assert_eq!(classify_heats(0.0, 0.0, 0.0, TOL), Idle);
        assert_eq!(classify_heats(1e-12, -1e-12, 0.0, TOL), Idle);
        // conduction without work
        assert_eq!(classify_heats(0.4, -0.4, 0.0, TOL), Idle);
        assert_eq!(classify_heats(-0.4, 0.4, 0.0, TOL), Forbidden);
        assert_eq!(classify_heats(1.0, 1.0, 2.0, TOL), Forbidden);
    }

    #[test]
    fn mode_strings() {
        for m in OperationalMode::ALL {
            assert_eq!(m.as_str().parse::<OperationalMode>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.as_str()));
        }
    }

    #[test]
    fn kappa_limits() {
        assert_eq!(normalized(1.0), 0.5);
        assert_eq!(normalized(0.0), 0.0);
        assert_eq!(normalized(f64::INFINITY), 1.0);
        assert!(normalized(1e12) < 1.0);
    }

    fn params() -> MachineParams {
        MachineParams::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn carnot_engine_performance() {
        let p = CyclePoint::new(params(), 4.0, 3.0, 1.0, 2.0).unwrap();
        let rec = run_carnot_widening(&p).unwrap();
        let perf = performance(&rec, (1.0, 2.0), KappaVariant::Plain, TOL).unwrap().unwrap();
        assert_eq!(perf.mode, OperationalMode::Engine);
        assert_abs_diff_eq!(perf.metric, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(perf.kappa, 0.5, epsilon = 1e-12);
        let perf = performance(&rec, (1.0, 2.0), KappaVariant::Carnot, TOL).unwrap().unwrap();
        assert_abs_diff_eq!(perf.kappa, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(clausius_residual(&rec, (1.0, 2.0)), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn refrigerator_cop() {
        let p = CyclePoint::new(params(), 3.0, 4.0, 1.0, 2.0).unwrap();
        let rec = run_carnot_widening(&p).unwrap();
        let perf = performance(&rec, (1.0, 2.0), KappaVariant::Plain, TOL).unwrap().unwrap();
        assert_eq!(perf.mode, OperationalMode::Refrigerator);
        // reversible refrigerator: COP = T_c / (T_h − T_c)
        assert_abs_diff_eq!(perf.metric, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(perf.kappa, 0.5, epsilon = 1e-10);
    }

    #[test]
    fn idle_has_no_metric() {
        let p = CyclePoint::new(params(), 2.0, 2.0, 1.0, 2.0).unwrap();
        let rec = run_otto(&p).unwrap();
        assert_eq!(classify(&rec, TOL), OperationalMode::Idle);
        assert_eq!(performance(&rec, (1.0, 2.0), KappaVariant::Plain, TOL).unwrap(), None);
    }

    #[test]
    fn clausius_violation_is_forbidden() {
        let mut rec = run_otto(&CyclePoint::new(params(), 1.0, 2.0, 1.0, 2.0).unwrap()).unwrap();
        rec.q_hot = 1.0;
        rec.q_cold = 1.0;
        rec.work_out = 2.0;
        assert!(clausius_residual(&rec, (1.0, 2.0)) > 0.0);
        assert_eq!(classify(&rec, TOL), OperationalMode::Forbidden);
    }

    #[test]
    fn near_zero_denominator() {
        let mut rec = run_otto(&CyclePoint::new(params(), 1.0, 2.0, 1.0, 2.0).unwrap()).unwrap();
        rec.q_hot = -1.0;
        rec.q_cold = 1.0;
        rec.work_out = -1e-310;
        let err = performance(&rec, (1.0, 2.0), KappaVariant::Plain, 0.0).unwrap_err();
        assert!(matches!(err, Error::DivisionByNearZero { .. }));
    }

    proptest! {
        #[test]
        fn exactly_one_mode_and_scale_invariant(
            qh in -10.0..10.0f64, qc in -10.0..10.0f64, w in -10.0..10.0f64, k in 1e-3..1e3f64
        ) {
            let m = classify_heats(qh, qc, w, TOL);
            let hits = [
                qc < -TOL && w > TOL && qh > TOL,
                qc > TOL && w < -TOL && qh < -TOL,
                qc < -TOL && w < -TOL && qh < -TOL,
                qc < -TOL && w < -TOL && qh > TOL,
            ];
            prop_assert!(hits.iter().filter(|h| **h).count() <= 1);
            if (qh.abs() > TOL && qh.abs() * k > TOL) && (qc.abs() > TOL && qc.abs() * k > TOL) && (w.abs() > TOL && w.abs() * k > TOL) {
                prop_assert_eq!(classify_heats(qh * k, qc * k, w * k, TOL), m);
            }
        }

        #[test]
        fn kappa_is_monotone(a in 0.0..1e6f64, b in 0.0..1e6f64) {
            prop_assume!(a < b);
            prop_assert!(normalized(a) < normalized(b));
            prop_assert!(normalized(b) < 1.0);
        }

        #[test]
        fn otto_engines_respect_bounds(
            w0 in 0.05..6.0f64, w1 in 0.05..6.0f64, th in 1.1..6.0f64, r in 0.2..4.0f64
        ) {
            let p = CyclePoint::new(MachineParams::new(1.0, r).unwrap(), w0, w1, 1.0, th).unwrap();
            let rec = run_otto(&p).unwrap();
            prop_assert!(clausius_residual(&rec, (1.0, th)) <= 1e-9);
            if let Some(perf) = performance(&rec, (1.0, th), KappaVariant::Plain, TOL).unwrap_or(None) {
                if perf.mode == OperationalMode::Engine {
                    prop_assert!(perf.metric >= 0.0 && perf.metric < 1.0);
                    prop_assert!(perf.metric <= 1.0 - 1.0 / th + 1e-9);
                }
                prop_assert!(perf.kappa >= 0.0 && perf.kappa < 1.0);
            }
        }
    }
}
