//! Heat and work for the three quasistatic stroke types.
//!
//! Sign convention: `heat` is absorbed by the working medium and `work` is
//! done on it, so `heat + work = ΔU`.

use serde::Serialize;

use crate::error::{check_frequency, check_temperature, Error, Result};
use crate::spectrum::{build_spectrum, Equilibrium, MachineParams};

/// Bisection stops once the entropy mismatch is below this.
pub const ISENTROPE_TOLERANCE: f64 = 1e-12;
pub const ISENTROPE_MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrokeLedger {
    pub heat: f64,
    pub work: f64,
    pub entropy_change: f64,
}

/// Isotherm at `temperature` from `omega_start` to `omega_end`, using the
/// Clausius equality `Q = T ΔS`.
pub fn isothermal_heat(
    params: &MachineParams,
    temperature: f64,
    omega_start: f64,
    omega_end: f64,
) -> Result<StrokeLedger> {
    let a = Equilibrium::new(params, omega_start, temperature)?;
    let b = Equilibrium::new(params, omega_end, temperature)?;
    let entropy_change = b.entropy() - a.entropy();
    let heat = temperature * entropy_change;
    Ok(StrokeLedger {
        heat,
        work: (b.energy() - a.energy()) - heat,
        entropy_change,
    })
}

/// Riemann sum of `Σᵢ Eᵢ dpᵢ` along the isotherm on a uniform ω grid, with
/// energies taken at interval midpoints.
pub fn isothermal_heat_path(
    params: &MachineParams,
    temperature: f64,
    omega_start: f64,
    omega_end: f64,
    steps: usize,
) -> Result<f64> {
    check_temperature(temperature)?;
    check_frequency("omega_start", omega_start)?;
    check_frequency("omega_end", omega_end)?;
    let steps = steps.max(1);
    let h = (omega_end - omega_start) / steps as f64;
    let node = |k: usize| omega_start + h * k as f64;

    let mut prev = *Equilibrium::new(params, node(0), temperature)?.populations();
    let mut total = 0.0;
    for k in 0..steps {
        let next = *Equilibrium::new(params, node(k + 1), temperature)?.populations();
        let mid = build_spectrum(params, omega_start + h * (k as f64 + 0.5))?;
        total += mid
            .energies
            .iter()
            .zip(next.iter().zip(&prev))
            .map(|(e, (pn, pp))| e * (pn - pp))
            .sum::<f64>();
        prev = next;
    }
    Ok(total)
}

/// Constant-frequency stroke: the bath changes from `t_start` to `t_end`.
pub fn isochoric_heat(params: &MachineParams, omega: f64, t_start: f64, t_end: f64) -> Result<StrokeLedger> {
    let a = Equilibrium::new(params, omega, t_start)?;
    let b = Equilibrium::new(params, omega, t_end)?;
    Ok(StrokeLedger {
        heat: b.energy() - a.energy(),
        work: 0.0,
        entropy_change: b.entropy() - a.entropy(),
    })
}

/// Isolated stroke: populations are carried through while the levels move.
pub fn adiabatic_work(
    params: &MachineParams,
    populations: &[f64; 4],
    omega_start: f64,
    omega_end: f64,
) -> Result<StrokeLedger> {
    let sum: f64 = populations.iter().sum();
    if !((sum - 1.0).abs() <= 1e-9) {
        return Err(Error::UnnormalizedPopulations { sum });
    }
    let a = build_spectrum(params, omega_start)?;
    let b = build_spectrum(params, omega_end)?;
    let work = populations
        .iter()
        .zip(a.energies.iter().zip(&b.energies))
        .map(|(p, (ea, eb))| p * (eb - ea))
        .sum();
    Ok(StrokeLedger {
        heat: 0.0,
        work,
        entropy_change: 0.0,
    })
}

/// Result of an isentrope solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsentropeRoot {
    pub omega: f64,
    /// `S(omega, t_to) − S(omega_from, t_from)`
    pub residual: f64,
    pub iterations: usize,
}

/// Frequency at which the Gibbs entropy at `t_to` equals the entropy at
/// `(omega_from, t_from)`, by bisection over `bracket`.
pub fn solve_isentrope(
    params: &MachineParams,
    t_from: f64,
    omega_from: f64,
    t_to: f64,
    bracket: (f64, f64),
) -> Result<IsentropeRoot> {
    let (mut lo, mut hi) = bracket;
    check_frequency("bracket_lo", lo)?;
    check_frequency("bracket_hi", hi)?;
    if !(lo < hi) {
        return Err(Error::InvalidParameter {
            name: "bracket_hi",
            value: hi,
            reason: "must exceed the lower bracket end",
        });
    }
    check_temperature(t_to)?;
    let target = Equilibrium::new(params, omega_from, t_from)?.entropy();
    let residual = |w: f64| Equilibrium::new(params, w, t_to).map(|e| e.entropy() - target);

    let mut f_lo = residual(lo)?;
    let f_hi = residual(hi)?;
    for (w, f) in [(lo, f_lo), (hi, f_hi)] {
        if f.abs() <= ISENTROPE_TOLERANCE {
            return Ok(IsentropeRoot {
                omega: w,
                residual: f,
                iterations: 0,
            });
        }
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoRootInBracket {
            lo,
            hi,
            residual_lo: f_lo,
            residual_hi: f_hi,
        });
    }

    let mut best = if f_lo.abs() < f_hi.abs() { (lo, f_lo) } else { (hi, f_hi) };
    let mut iterations = 0;
    while iterations < ISENTROPE_MAX_ITERATIONS {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = residual(mid)?;
        if f_mid.abs() < best.1.abs() {
            best = (mid, f_mid);
        }
        if f_mid.abs() <= ISENTROPE_TOLERANCE {
            break;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(IsentropeRoot {
        omega: best.0,
        residual: best.1,
        iterations,
    })
}

/// Largest population difference between the Gibbs states at either end of
/// an isentrope. Zero only when the spectrum scales uniformly.
pub fn isentrope_population_mismatch(
    params: &MachineParams,
    t_from: f64,
    omega_from: f64,
    t_to: f64,
    omega_to: f64,
) -> Result<f64> {
    let a = Equilibrium::new(params, omega_from, t_from)?;
    let b = Equilibrium::new(params, omega_to, t_to)?;
    Ok(a
        .populations()
        .iter()
        .zip(b.populations())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{entropy, thermal_state};
    use approx::assert_abs_diff_eq;

    fn params(g: f64, r: f64) -> MachineParams {
        MachineParams::new(g, r).unwrap()
    }

    /// Entropy of one qubit with gap `x/T`.
    fn qubit_entropy(gap_over_t: f64) -> f64 {
        let p = 1.0 / (1.0 + gap_over_t.exp());
        -(p * p.ln() + (1.0 - p) * (1.0 - p).ln())
    }

    #[test]
    fn null_isotherm() {
        let l = isothermal_heat(&params(1.0, 1.0), 2.0, 1.5, 1.5).unwrap();
        assert_eq!(l.heat, 0.0);
        assert_eq!(l.work, 0.0);
    }

    #[test]
    fn isotherm_matches_path_sum() {
        let p = params(1.0, 1.0);
        let q = isothermal_heat(&p, 2.0, 1.0, 3.0).unwrap().heat;
        let path = isothermal_heat_path(&p, 2.0, 1.0, 3.0, 100_000).unwrap();
        assert_abs_diff_eq!(q, path, epsilon = 1e-6);
    }

    #[test]
    fn decoupled_isotherm_is_two_single_qubits() {
        // g = 0, r = 1: both qubits have gap ω
        let p = params(0.0, 1.0);
        let t = 1.0;
        let q = isothermal_heat(&p, t, 1.0, 2.0).unwrap().heat;
        let single = t * (qubit_entropy(2.0 / t) - qubit_entropy(1.0 / t));
        assert_abs_diff_eq!(q, 2.0 * single, epsilon = 1e-12);
    }

    #[test]
    fn path_sum_edge_cases() {
        let p = params(1.0, 1.0);
        assert_eq!(isothermal_heat_path(&p, 1.0, 2.0, 2.0, 1).unwrap(), 0.0);
        let fwd = isothermal_heat_path(&p, 2.0, 1.0, 3.0, 1000).unwrap();
        let back = isothermal_heat_path(&p, 2.0, 3.0, 1.0, 1000).unwrap();
        assert_abs_diff_eq!(fwd, -back, epsilon = 1e-9);
    }

    #[test]
    fn first_law_per_stroke() {
        let p = params(0.6, 2.3);
        let l = isothermal_heat(&p, 1.7, 0.4, 3.1).unwrap();
        let du = Equilibrium::new(&p, 3.1, 1.7).unwrap().energy() - Equilibrium::new(&p, 0.4, 1.7).unwrap().energy();
        assert_abs_diff_eq!(l.heat + l.work, du, epsilon = 1e-10);

        let l = isochoric_heat(&p, 2.0, 2.0, 1.0).unwrap();
        let du = Equilibrium::new(&p, 2.0, 1.0).unwrap().energy() - Equilibrium::new(&p, 2.0, 2.0).unwrap().energy();
        assert_eq!(l.work, 0.0);
        assert_abs_diff_eq!(l.heat, du, epsilon = 1e-12);
    }

    #[test]
    fn isochore_edge_cases() {
        let p = params(1.0, 1.0);
        assert_eq!(isochoric_heat(&p, 2.0, 1.3, 1.3).unwrap().heat, 0.0);
        assert!(isochoric_heat(&p, 2.0, 1.0, 2.0).unwrap().heat > 0.0);
        assert!(isochoric_heat(&p, 2.0, 0.0, 2.0).is_err());
    }

    #[test]
    fn adiabat_edge_cases() {
        let p = params(1.0, 1.0);
        let pops = *Equilibrium::new(&p, 1.0, 1.0).unwrap().populations();
        assert_eq!(adiabatic_work(&p, &pops, 1.0, 1.0).unwrap().work, 0.0);
        let uniform = [0.25; 4];
        assert_abs_diff_eq!(adiabatic_work(&p, &uniform, 0.3, 4.0).unwrap().work, 0.0, epsilon = 1e-15);
        assert!(matches!(
            adiabatic_work(&p, &[0.5, 0.5, 0.5, 0.0], 1.0, 2.0),
            Err(Error::UnnormalizedPopulations { .. })
        ));
    }

    #[test]
    fn adiabat_against_oracle_spectra() {
        use crate::spectrum::oracle::oracle_diagonalize;
        let p = params(1.0, 1.0);
        let pops = *Equilibrium::new(&p, 1.0, 1.0).unwrap().populations();
        let a = oracle_diagonalize(&p, 1.0).unwrap();
        let b = oracle_diagonalize(&p, 2.0).unwrap();
        let expect: f64 = (0..4).map(|i| pops[i] * (b.energies[i] - a.energies[i])).sum();
        let got = adiabatic_work(&p, &pops, 1.0, 2.0).unwrap();
        assert_abs_diff_eq!(got.work, expect, epsilon = 1e-12);
        assert_eq!(got.heat, 0.0);
    }

    #[test]
    fn isentrope_identity() {
        let p = params(1.0, 1.0);
        let root = solve_isentrope(&p, 1.5, 2.2, 1.5, (0.0, 30.0)).unwrap();
        assert_abs_diff_eq!(root.omega, 2.2, epsilon = 1e-8);
    }

    #[test]
    fn isentrope_scaling_limit() {
        // decoupled, r = 1: every level is linear in ω, so S = S(ω/T)
        let p = params(0.0, 1.0);
        let root = solve_isentrope(&p, 2.0, 3.0, 1.0, (0.0, 30.0)).unwrap();
        assert_abs_diff_eq!(root.omega, 1.5, epsilon = 1e-9);
        let mismatch = isentrope_population_mismatch(&p, 2.0, 3.0, 1.0, root.omega).unwrap();
        assert!(mismatch < 1e-9);
    }

    #[test]
    fn isentrope_residual() {
        let p = params(1.0, 1.0);
        let root = solve_isentrope(&p, 2.0, 3.0, 1.0, (0.0, 30.0)).unwrap();
        assert!(root.residual.abs() <= 1e-10);
        let s_to = entropy(
            &thermal_state(&build_spectrum(&p, root.omega).unwrap(), 1.0).unwrap(),
            &build_spectrum(&p, root.omega).unwrap(),
        );
        let s_from = Equilibrium::new(&p, 3.0, 2.0).unwrap().entropy();
        assert!((s_to - s_from).abs() <= 1e-10);
        // the coupled spectrum does not scale uniformly
        assert!(isentrope_population_mismatch(&p, 2.0, 3.0, 1.0, root.omega).unwrap() > 1e-6);
    }

    #[test]
    fn isentrope_round_trip() {
        let p = params(1.0, 2.0);
        let fwd = solve_isentrope(&p, 2.5, 3.0, 1.0, (0.0, 30.0)).unwrap();
        let back = solve_isentrope(&p, 1.0, fwd.omega, 2.5, (0.0, 30.0)).unwrap();
        assert_abs_diff_eq!(back.omega, 3.0, epsilon = 1e-8);
    }

    #[test]
    fn isentrope_without_sign_change() {
        // hot state at small ω carries more entropy than any cold state can
        let p = params(1.0, 1.0);
        let err = solve_isentrope(&p, 5.0, 0.1, 1.0, (0.0, 50.0)).unwrap_err();
        match err {
            Error::NoRootInBracket {
                residual_lo,
                residual_hi,
                ..
            } => assert!(residual_lo < 0.0 && residual_hi < 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }
}
