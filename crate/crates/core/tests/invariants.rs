use proptest::prelude::*;

use qtm_core::classifier::{classify, clausius_residual, performance, KappaVariant, OperationalMode};
use qtm_core::cycles::{run_carnot_widening, run_otto, run_stirling, run_stirling_regen, CyclePoint};
use qtm_core::spectrum::{build_spectrum, entropy, thermal_state, Equilibrium, MachineParams};
use qtm_core::strokes::{isothermal_heat, solve_isentrope};

const TOL: f64 = 1e-9;

fn machine() -> impl Strategy<Value = MachineParams> {
    (0.0..3.0f64, 0.2..4.0f64).prop_map(|(g, r)| MachineParams::new(g, r).unwrap())
}

fn point() -> impl Strategy<Value = CyclePoint> {
    (machine(), 0.0..8.0f64, 0.0..8.0f64, 0.2..2.0f64, 0.05..4.0f64)
        .prop_map(|(p, w0, w1, tc, gap)| CyclePoint::new(p, w0, w1, tc, tc * (1.0 + gap)).unwrap())
}

proptest! {
    #[test]
    fn gibbs_state_is_normalized(p in machine(), w in 0.0..20.0f64, t in 1e-3..50.0f64) {
        let s = build_spectrum(&p, w).unwrap();
        let st = thermal_state(&s, t).unwrap();
        prop_assert!((st.populations.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(st.populations.iter().all(|x| (0.0..=1.0).contains(x)));
        let sv = entropy(&st, &s);
        prop_assert!(sv >= -1e-12 && sv <= 4f64.ln() + 1e-12);
    }

    #[test]
    fn entropy_falls_as_the_gap_opens(p in machine(), w in 0.0..10.0f64, dw in 1e-3..5.0f64, t in 0.1..10.0f64) {
        let a = Equilibrium::new(&p, w, t).unwrap().entropy();
        let b = Equilibrium::new(&p, w + dw, t).unwrap().entropy();
        prop_assert!(b <= a + 1e-14);
    }

    #[test]
    fn isentrope_lands_on_the_target_entropy(p in machine(), w in 0.5..6.0f64, th in 1.5..4.0f64) {
        let tc = 1.0;
        let target = Equilibrium::new(&p, w, th).unwrap().entropy();
        if let Ok(root) = solve_isentrope(&p, th, w, tc, (0.0, 100.0)) {
            let got = Equilibrium::new(&p, root.omega, tc).unwrap().entropy();
            prop_assert!((got - target).abs() < 1e-9);
            prop_assert!(root.omega < w);
        }
    }

    #[test]
    fn isotherms_reverse(p in machine(), a in 0.0..8.0f64, b in 0.0..8.0f64, t in 0.1..5.0f64) {
        let f = isothermal_heat(&p, t, a, b).unwrap();
        let r = isothermal_heat(&p, t, b, a).unwrap();
        prop_assert!((f.heat + r.heat).abs() < 1e-12);
        prop_assert!((f.work + r.work).abs() < 1e-12);
    }

    #[test]
    fn first_law_closes(pt in point()) {
        for rec in [run_otto(&pt).unwrap(), run_stirling(&pt).unwrap(), run_stirling_regen(&pt).unwrap()] {
            let (h, c) = rec.bath_heats();
            prop_assert!((rec.work_out - h - c).abs() < 1e-9);
            if let Some(closure) = rec.diagnostics.energy_closure {
                prop_assert!(closure.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn no_cycle_beats_carnot(pt in point()) {
        let temps = (pt.t_cold, pt.t_hot);
        let eta_c = 1.0 - pt.t_cold / pt.t_hot;
        for rec in [run_otto(&pt).unwrap(), run_stirling(&pt).unwrap()] {
            prop_assert!(clausius_residual(&rec, temps) <= 1e-9);
            if let Ok(Some(perf)) = performance(&rec, temps, KappaVariant::Plain, TOL) {
                if perf.mode == OperationalMode::Engine {
                    prop_assert!(perf.metric >= 0.0 && perf.metric <= eta_c + 1e-9);
                }
            }
        }
    }

    #[test]
    fn carnot_is_reversible(pt in point()) {
        if let Ok(rec) = run_carnot_widening(&pt) {
            let temps = (pt.t_cold, pt.t_hot);
            prop_assert!(clausius_residual(&rec, temps).abs() < 1e-10);
            if classify(&rec, TOL) == OperationalMode::Engine {
                let eta = rec.work_out / rec.q_hot;
                prop_assert!((eta - (1.0 - pt.t_cold / pt.t_hot)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn regenerator_keeps_work(pt in point()) {
        let a = run_stirling(&pt).unwrap();
        let b = run_stirling_regen(&pt).unwrap();
        prop_assert_eq!(a.work_out, b.work_out);
        let regen = b.regen.unwrap();
        prop_assert_eq!(regen.active, regen.delta > 0.0);
        let (q_h, _) = b.isotherm_heats.unwrap();
        let expected = if regen.active { q_h + regen.delta } else { q_h };
        prop_assert_eq!(regen.q_in, expected);
    }
}
