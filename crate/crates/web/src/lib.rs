//! Browser bindings: level diagram, mode and κ maps, single cycles.
//!
//! The `*_impl` functions hold the logic and are tested natively; the
//! exported wrappers only convert errors for JavaScript.

use wasm_bindgen::prelude::*;

use qtm_core::cycles::{CycleKind, CyclePoint};
use qtm_core::io::ppm::{Layer, Palette};
use qtm_core::spectrum::{build_spectrum, MachineParams};
use qtm_core::sweep::{evaluate_point, run_grid, GridSpec};
use qtm_core::KappaVariant;

fn js(e: impl ToString) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// `samples` rows of `[ω, E₁, E₂, E₃, E₄]` for ω in `[0, omega_max]`.
pub fn energy_levels_impl(g: f64, r: f64, omega_max: f64, samples: usize) -> Result<Vec<f64>, String> {
    let p = MachineParams::new(g, r).map_err(|e| e.to_string())?;
    if samples < 2 || !(omega_max > 0.0) {
        return Err("need at least two samples and omega_max > 0".into());
    }
    let mut out = Vec::with_capacity(5 * samples);
    for k in 0..samples {
        let w = omega_max * k as f64 / (samples - 1) as f64;
        let s = build_spectrum(&p, w).map_err(|e| e.to_string())?;
        out.push(w);
        out.extend_from_slice(&s.energies);
    }
    Ok(out)
}

/// RGBA pixels of an `n × n` map over `[lo, hi]²` in the (ω₀, ω₁) plane,
/// top row at ω₁ = hi. `layer` is `mode` or `kappa`.
#[allow(clippy::too_many_arguments)]
pub fn plane_map_impl(
    cycle: &str,
    g: f64,
    r: f64,
    t_cold: f64,
    t_hot: f64,
    lo: f64,
    hi: f64,
    n: usize,
    layer: &str,
) -> Result<Vec<u8>, String> {
    let kind: CycleKind = cycle.parse()?;
    let layer: Layer = layer.parse()?;
    let p = MachineParams::new(g, r).map_err(|e| e.to_string())?;
    let spec = GridSpec::omega_plane(kind, p)
        .with_window(lo, hi, n)
        .with_temperatures(t_cold, t_hot);
    let grid = run_grid(&spec).map_err(|e| e.to_string())?;
    let palette = Palette::default();
    let mut out = Vec::with_capacity(4 * n * n);
    for row in grid.cells.chunks(n).rev() {
        for cell in row {
            out.extend_from_slice(&palette.cell_color(cell, layer));
            out.push(255);
        }
    }
    Ok(out)
}

/// One cycle as a JSON object with the grid CSV column names.
pub fn cycle_json_impl(cycle: &str, g: f64, r: f64, t_cold: f64, t_hot: f64, omega0: f64, omega1: f64) -> Result<String, String> {
    let kind: CycleKind = cycle.parse()?;
    let p = MachineParams::new(g, r).map_err(|e| e.to_string())?;
    let point = CyclePoint::new(p, omega0, omega1, t_cold, t_hot).map_err(|e| e.to_string())?;
    let (cell, record) = evaluate_point(kind, &point, qtm_core::classifier::DEFAULT_TOLERANCE, KappaVariant::Plain);
    let v = serde_json::json!({
        "q_hot": cell.q_hot,
        "q_cold": cell.q_cold,
        "work": cell.work,
        "mode": cell.mode,
        "metric": cell.metric,
        "kappa": cell.kappa,
        "flags": cell.flags.to_string(),
        "aux_frequencies": record.and_then(|r| r.aux_frequencies),
    });
    Ok(v.to_string())
}

#[wasm_bindgen]
pub fn energy_levels(g: f64, r: f64, omega_max: f64, samples: usize) -> Result<Vec<f64>, JsValue> {
    energy_levels_impl(g, r, omega_max, samples).map_err(js)
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn plane_map(
    cycle: &str,
    g: f64,
    r: f64,
    t_cold: f64,
    t_hot: f64,
    lo: f64,
    hi: f64,
    n: usize,
    layer: &str,
) -> Result<Vec<u8>, JsValue> {
    plane_map_impl(cycle, g, r, t_cold, t_hot, lo, hi, n, layer).map_err(js)
}

#[wasm_bindgen]
pub fn cycle_json(cycle: &str, g: f64, r: f64, t_cold: f64, t_hot: f64, omega0: f64, omega1: f64) -> Result<String, JsValue> {
    cycle_json_impl(cycle, g, r, t_cold, t_hot, omega0, omega1).map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levels_layout() {
        let v = energy_levels_impl(1.0, 1.0, 4.0, 5).unwrap();
        assert_eq!(v.len(), 25);
        assert_eq!(&v[..5], &[0.0, 1.0, -1.0, 1.0, -1.0]);
        assert_eq!(v[20], 4.0);
        assert!(energy_levels_impl(1.0, 1.0, 4.0, 1).is_err());
        assert!(energy_levels_impl(1.0, -1.0, 4.0, 5).is_err());
    }

    #[test]
    fn regenerated_map_has_two_colors_off_the_diagonal() {
        let px = plane_map_impl("stirling_regen", 1.0, 1.0, 1.0, 2.0, 0.05, 5.0, 16, "mode").unwrap();
        assert_eq!(px.len(), 16 * 16 * 4);
        let at = |i: usize, j: usize| {
            let k = 4 * ((15 - j) * 16 + i);
            [px[k], px[k + 1], px[k + 2], px[k + 3]]
        };
        assert_eq!(at(10, 2), [0, 170, 0, 255]);
        assert_eq!(at(2, 10), [0, 200, 200, 255]);
        assert_eq!(at(5, 5), [255, 255, 255, 255]);
    }

    #[test]
    fn kappa_layer_and_bad_input() {
        assert_eq!(plane_map_impl("otto", 1.0, 1.0, 1.0, 2.0, 0.05, 5.0, 8, "kappa").unwrap().len(), 256);
        assert!(plane_map_impl("diesel", 1.0, 1.0, 1.0, 2.0, 0.05, 5.0, 8, "mode").is_err());
        assert!(plane_map_impl("otto", 1.0, 1.0, 1.0, 2.0, 0.05, 5.0, 8, "heat").is_err());
        assert!(plane_map_impl("otto", 1.0, 1.0, 1.0, 2.0, 5.0, 0.05, 8, "mode").is_err());
    }

    #[test]
    fn carnot_cycle_json() {
        let s = cycle_json_impl("carnot", 1.0, 1.0, 1.0, 2.0, 4.0, 3.0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["mode"], "engine");
        assert!((v["metric"].as_f64().unwrap() - 0.5).abs() < 1e-12);
        assert!(v["aux_frequencies"].is_array());
        let s = cycle_json_impl("carnot", 1.0, 1.0, 1.0, 5.0, 0.5, 0.8).unwrap();
        assert!(s.contains("no_root"));
        assert!(cycle_json_impl("otto", 1.0, 1.0, -1.0, 2.0, 1.0, 2.0).is_err());
    }
}
