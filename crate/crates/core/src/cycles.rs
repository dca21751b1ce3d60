//! The four cycle protocols, each driven by moving the right-qubit
//! frequency between `omega0` and `omega1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_frequency, check_temperature, Error, Result};
use crate::spectrum::{build_spectrum, Equilibrium, MachineParams};
use crate::strokes::{adiabatic_work, isochoric_heat, isothermal_heat, solve_isentrope};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleKind {
    Carnot,
    Otto,
    Stirling,
    StirlingRegen,
}

impl CycleKind {
    pub const ALL: [CycleKind; 4] = [Self::Carnot, Self::Otto, Self::Stirling, Self::StirlingRegen];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Carnot => "carnot",
            Self::Otto => "otto",
            Self::Stirling => "stirling",
            Self::StirlingRegen => "stirling_regen",
        }
    }
}

impl fmt::Display for CycleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CycleKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown cycle `{s}` (expected carnot, otto, stirling or stirling_regen)"))
    }
}

/// One working point: the stroke endpoint frequencies and the two baths.
/// Either bath may be the warmer one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CyclePoint {
    pub omega0: f64,
    pub omega1: f64,
    pub t_cold: f64,
    pub t_hot: f64,
    pub params: MachineParams,
}

impl CyclePoint {
    pub fn new(params: MachineParams, omega0: f64, omega1: f64, t_cold: f64, t_hot: f64) -> Result<Self> {
        check_frequency("omega0", omega0)?;
        check_frequency("omega1", omega1)?;
        check_temperature(t_cold)?;
        check_temperature(t_hot)?;
        Ok(Self {
            omega0,
            omega1,
            t_cold,
            t_hot,
            params,
        })
    }

    fn validate(&self) -> Result<()> {
        Self::new(self.params, self.omega0, self.omega1, self.t_cold, self.t_hot).map(|_| ())
    }

    /// Default isentrope search interval, `[0, 10·max(ω₀, ω₁, 1)]`.
    pub fn carnot_bracket(&self) -> (f64, f64) {
        (0.0, 10.0 * self.omega0.max(self.omega1).max(1.0))
    }
}

/// Regenerator bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Regeneration {
    /// ΔQ = Q₂ + Q₄
    pub delta: f64,
    /// δ: true when ΔQ > 0
    pub active: bool,
    /// Q_h + δ·ΔQ
    pub q_in: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Carnot only: largest population difference across the two adiabats.
    pub population_mismatch: f64,
    /// Carnot only: entropy residuals of the ω₂ and ω₃ solves.
    pub solver_residuals: Option<[f64; 2]>,
    /// Works done on the medium in the two adiabatic strokes.
    pub adiabatic_works: Option<[f64; 2]>,
    /// Sum of ΔU over the strokes; zero for a closed cycle.
    pub energy_closure: Option<f64>,
}

/// Energy ledger of one cycle. Heats are absorbed by the medium, `work_out`
/// is delivered by it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleRecord {
    pub kind: CycleKind,
    /// Heat drawn from the hot side (`Q_h + Q₄` for Stirling).
    pub q_hot: f64,
    /// Heat drawn from the cold side (`Q₂ + Q_c` for Stirling).
    pub q_cold: f64,
    pub work_out: f64,
    /// Stirling constant-frequency heats Q₂ (at ω₁) and Q₄ (at ω₀).
    pub q_iso1: Option<f64>,
    pub q_iso2: Option<f64>,
    /// Stirling isothermal heats (Q_h, Q_c).
    pub isotherm_heats: Option<(f64, f64)>,
    /// Carnot (ω₂, ω₃).
    pub aux_frequencies: Option<(f64, f64)>,
    pub regen: Option<Regeneration>,
    pub diagnostics: Diagnostics,
}

impl CycleRecord {
    fn empty(kind: CycleKind) -> Self {
        Self {
            kind,
            q_hot: 0.0,
            q_cold: 0.0,
            work_out: 0.0,
            q_iso1: None,
            q_iso2: None,
            isotherm_heats: None,
            aux_frequencies: None,
            regen: None,
            diagnostics: Diagnostics::default(),
        }
    }

    /// Heat exchanged with the hot and cold baths, under the attribution
    /// used for classification. With a regenerator the hot side supplies
    /// `Q_in_reg` and the cold side takes the rest of the balance.
    pub fn bath_heats(&self) -> (f64, f64) {
        match self.regen {
            Some(r) => (r.q_in, self.work_out - r.q_in),
            None => (self.q_hot, self.q_cold),
        }
    }

    /// Denominator of the engine efficiency.
    pub fn heat_input(&self) -> f64 {
        self.bath_heats().0
    }
}

/// Two isotherms joined by two isentropes. ω₂ and ω₃ are fixed by
/// `S(ω₂, T_c) = S(ω₁, T_h)` and `S(ω₃, T_c) = S(ω₀, T_h)`.
pub fn run_carnot(point: &CyclePoint, bracket: (f64, f64)) -> Result<CycleRecord> {
    point.validate()?;
    let mut rec = CycleRecord::empty(CycleKind::Carnot);
    if point.omega0 == point.omega1 {
        return Ok(rec);
    }
    let p = &point.params;
    let (tc, th) = (point.t_cold, point.t_hot);

    let hot = isothermal_heat(p, th, point.omega0, point.omega1)?;
    let w2 = solve_isentrope(p, th, point.omega1, tc, bracket)?;
    let w3 = solve_isentrope(p, th, point.omega0, tc, bracket)?;

    rec.q_hot = hot.heat;
    rec.q_cold = -tc * hot.entropy_change;
    rec.work_out = rec.q_hot + rec.q_cold;
    rec.aux_frequencies = Some((w2.omega, w3.omega));

    let hot_end = Equilibrium::new(p, point.omega1, th)?;
    let cold_start = Equilibrium::new(p, w2.omega, tc)?;
    let cold_end = Equilibrium::new(p, w3.omega, tc)?;
    let hot_start = Equilibrium::new(p, point.omega0, th)?;
    let expand = adiabatic_work(p, hot_end.populations(), point.omega1, w2.omega)?;
    let compress = adiabatic_work(p, cold_end.populations(), w3.omega, point.omega0)?;
    let mismatch = |a: &Equilibrium, b: &Equilibrium| {
        a.populations()
            .iter()
            .zip(b.populations())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    };
    rec.diagnostics = Diagnostics {
        population_mismatch: mismatch(&hot_end, &cold_start).max(mismatch(&cold_end, &hot_start)),
        solver_residuals: Some([w2.residual, w3.residual]),
        adiabatic_works: Some([expand.work, compress.work]),
        energy_closure: None,
    };
    Ok(rec)
}

/// [`run_carnot`] with the default bracket, widened ×10 once if no root
/// is found.
pub fn run_carnot_widening(point: &CyclePoint) -> Result<CycleRecord> {
    let (lo, hi) = point.carnot_bracket();
    match run_carnot(point, (lo, hi)) {
        Err(Error::NoRootInBracket { .. }) => run_carnot(point, (lo, 10.0 * hi)),
        other => other,
    }
}

fn level_heat(energies: &[f64; 4], to: &[f64; 4], from: &[f64; 4]) -> f64 {
    energies
        .iter()
        .zip(to.iter().zip(from))
        .map(|(e, (a, b))| e * (a - b))
        .sum()
}

/// Two adiabats and two constant-frequency strokes, starting from the cold
/// Gibbs state at ω₀; the hot bath acts at ω₁.
pub fn run_otto(point: &CyclePoint) -> Result<CycleRecord> {
    point.validate()?;
    let p = &point.params;
    let cold = Equilibrium::new(p, point.omega0, point.t_cold)?;
    let hot = Equilibrium::new(p, point.omega1, point.t_hot)?;
    let e1 = build_spectrum(p, point.omega1)?;

    let w1 = adiabatic_work(p, cold.populations(), point.omega0, point.omega1)?.work;
    let q_hot = level_heat(&e1.energies, hot.populations(), cold.populations());
    let w3 = adiabatic_work(p, hot.populations(), point.omega1, point.omega0)?.work;
    let q_cold = level_heat(&cold.spectrum.energies, cold.populations(), hot.populations());

    let mut rec = CycleRecord::empty(CycleKind::Otto);
    rec.q_hot = q_hot;
    rec.q_cold = q_cold;
    rec.work_out = q_hot + q_cold;
    rec.diagnostics.adiabatic_works = Some([w1, w3]);
    rec.diagnostics.energy_closure = Some(w1 + q_hot + w3 + q_cold);
    Ok(rec)
}

/// Hot isotherm ω₀→ω₁, cooling at ω₁, cold isotherm ω₁→ω₀, heating at ω₀.
pub fn run_stirling(point: &CyclePoint) -> Result<CycleRecord> {
    point.validate()?;
    let p = &point.params;
    let (tc, th) = (point.t_cold, point.t_hot);
    let hot = isothermal_heat(p, th, point.omega0, point.omega1)?;
    let q2 = isochoric_heat(p, point.omega1, th, tc)?.heat;
    let cold = isothermal_heat(p, tc, point.omega1, point.omega0)?;
    let q4 = isochoric_heat(p, point.omega0, tc, th)?.heat;

    let mut rec = CycleRecord::empty(CycleKind::Stirling);
    rec.q_hot = hot.heat + q4;
    rec.q_cold = q2 + cold.heat;
    rec.work_out = hot.heat + q2 + cold.heat + q4;
    rec.q_iso1 = Some(q2);
    rec.q_iso2 = Some(q4);
    rec.isotherm_heats = Some((hot.heat, cold.heat));
    rec.diagnostics.adiabatic_works = None;
    rec.diagnostics.energy_closure = Some(hot.heat + hot.work + q2 + cold.heat + cold.work + q4);
    Ok(rec)
}

/// Stirling with an ideal regenerator between the two constant-frequency
/// strokes. Work is unchanged; only the heat drawn from the hot bath
/// differs.
pub fn run_stirling_regen(point: &CyclePoint) -> Result<CycleRecord> {
    let mut rec = run_stirling(point)?;
    rec.kind = CycleKind::StirlingRegen;
    let (q_h, _) = rec.isotherm_heats.expect("stirling records carry isotherm heats");
    let delta = rec.q_iso1.unwrap_or(0.0) + rec.q_iso2.unwrap_or(0.0);
    let active = delta > 0.0;
    rec.regen = Some(Regeneration {
        delta,
        active,
        q_in: if active { q_h + delta } else { q_h },
    });
    Ok(rec)
}

pub fn run_cycle(kind: CycleKind, point: &CyclePoint) -> Result<CycleRecord> {
    match kind {
        CycleKind::Carnot => run_carnot_widening(point),
        CycleKind::Otto => run_otto(point),
        CycleKind::Stirling => run_stirling(point),
        CycleKind::StirlingRegen => run_stirling_regen(point),
    }
}
