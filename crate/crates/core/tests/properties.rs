use proptest::prelude::*;
use znd_core::simulator::{z_field, Interpolation, ShockHistory, ShockSample};
use znd_core::{
    admissible_window, lax_check, solve_downstream, Branch, DiagonalState, EosParams, Perturbation, ReferenceState,
    ScalingParams, ThermoPoint, UpstreamState,
};

fn gamma() -> impl Strategy<Value = f64> {
    1.05f64..3.0
}

fn history(kind: Interpolation, steps: &[(f64, f64)]) -> ShockHistory {
    let mut h = ShockHistory::new(kind);
    let (mut t, mut chi) = (0.0, 0.0);
    h.push(ShockSample { t, chi, chi_prime: 0.0 }).unwrap();
    for &(dt, dchi) in steps {
        t += dt;
        chi += dchi;
        h.push(ShockSample { t, chi, chi_prime: 0.0 }).unwrap();
    }
    h
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn branches_meet_with_matching_slope(g in gamma(), s in -3.0f64..3.0) {
        let eos = EosParams::new(g).unwrap();
        let es = s.exp();
        for (up, lo) in [
            (eos.energy_shape(Branch::Upper, 1.0), eos.energy_shape(Branch::Lower, 1.0)),
            (eos.pressure_shape(Branch::Upper, 1.0), eos.pressure_shape(Branch::Lower, 1.0)),
            (eos.slope_shape(Branch::Upper, 1.0), eos.slope_shape(Branch::Lower, 1.0)),
        ] {
            prop_assert!((es * (up - lo)).abs() < 1e-10 * es.max(1.0));
        }
    }

    #[test]
    fn energy_derivatives_are_temperature_and_minus_pressure(g in gamma(), nu in 0.05f64..4.0, s in -2.0f64..2.0) {
        prop_assume!((nu - 1.0).abs() > 1e-3);
        let eos = EosParams::new(g).unwrap();
        let e = |nu: f64, s: f64| eos.internal_energy(ThermoPoint::new(nu, s).unwrap()).unwrap();
        let pt = ThermoPoint::new(nu, s).unwrap();
        let h = 1e-6;
        let de_ds = (e(nu, s + h) - e(nu, s - h)) / (2.0 * h);
        let de_dnu = (e(nu + h, s) - e(nu - h, s)) / (2.0 * h);
        let t = eos.temperature(pt).unwrap();
        let p = eos.pressure(pt).unwrap();
        prop_assert!((de_ds - t).abs() < 1e-6 * t.abs().max(1.0));
        prop_assert!((de_dnu + p).abs() < 1e-6 * p.abs().max(1.0));
    }

    #[test]
    fn locus_is_compressive_and_lax_admissible(g in gamma(), extra in 0.05f64..2.0, p0 in 0.1f64..5.0, frac in 0.02f64..0.98) {
        let nu0 = (g + 1.0) / g + extra;
        let up = UpstreamState::new(EosParams::new(g).unwrap(), nu0, p0).unwrap();
        let Ok(w) = admissible_window(&up) else { return Ok(()) };
        let nu = w.nu_floor + frac * (1.0 - w.nu_floor);
        let pt = solve_downstream(&up, nu).unwrap();
        prop_assert!(pt.u > 0.0 && pt.p > p0 && pt.sigma > 0.0);
        prop_assert!((pt.u - pt.sigma * (nu0 - nu)).abs() < 1e-9 * pt.u.max(1.0));
        prop_assert!((pt.p - p0 - pt.sigma * pt.u).abs() < 1e-9 * pt.p);
        prop_assert!(lax_check(&up, &pt, 0.0));
    }

    #[test]
    fn diagonal_round_trip(
        g in gamma(), nu_i in 0.1f64..0.95, s_i in -1.0f64..2.0, u_i in 0.1f64..3.0,
        d in prop::array::uniform3(-1.0f64..1.0),
        alpha in 0.01f64..1.0, beta in 0.1f64..100.0,
    ) {
        let r = ReferenceState { gamma: g, nu_i, s_i, u_i, lambda_b: (g * s_i.exp()).sqrt() };
        let p = Perturbation { nu: d[0], s: d[1], u: d[2] };
        let back = r.from_diagonal(r.to_diagonal(p));
        prop_assert!((back.nu - p.nu).abs() < 1e-12 && (back.s - p.s).abs() < 1e-12 && (back.u - p.u).abs() < 1e-12);
        let sc = ScalingParams::new(alpha, beta).unwrap();
        let phi = DiagonalState::from_array(d);
        let again = sc.unscale(sc.scale(phi));
        for (a, b) in again.to_array().iter().zip(d) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn interpolated_history_is_monotone(
        steps in prop::collection::vec((0.01f64..1.0, 0.01f64..2.0), 3..30),
        probes in prop::collection::vec(0.0f64..1.0, 20),
    ) {
        for kind in [Interpolation::MonotoneCubic, Interpolation::Linear] {
            let h = history(kind, &steps);
            let t_end = h.last().unwrap().t;
            let mut ts: Vec<f64> = probes.iter().map(|p| p * t_end).collect();
            ts.sort_by(f64::total_cmp);
            let chis: Vec<f64> = ts.iter().map(|&t| h.chi_at(t).unwrap()).collect();
            prop_assert!(chis.windows(2).all(|w| w[1] >= w[0]));
            let back: Vec<f64> = chis.iter().map(|&c| h.inverse(c).unwrap()).collect();
            prop_assert!(back.windows(2).all(|w| w[1] >= w[0]));
            // the two directions are separate interpolants: exact at knots, bracketed in between
            for (&t, &b) in ts.iter().zip(&back) {
                let k = h.samples().partition_point(|s| s.t <= t).clamp(1, h.len() - 1);
                let (lo, hi) = (h.samples()[k - 1].t, h.samples()[k].t);
                prop_assert!(b >= lo - 1e-12 && b <= hi + 1e-12);
            }
            for s in h.samples() {
                prop_assert_eq!(h.chi_at(s.t).unwrap(), s.chi);
                prop_assert_eq!(h.inverse(s.chi).unwrap(), s.t);
            }
        }
    }

    #[test]
    fn burnt_fraction_lies_in_unit_interval(
        steps in prop::collection::vec((0.01f64..1.0, 0.01f64..2.0), 3..30),
        kappa in 0.0f64..5.0,
        ft in 0.0f64..1.0, fx in 0.0f64..1.0,
    ) {
        let h = history(Interpolation::MonotoneCubic, &steps);
        let t = ft * h.last().unwrap().t;
        let x = fx * h.chi_at(t).unwrap();
        let z = z_field(&h, kappa, t, x).unwrap();
        prop_assert!(z > 0.0 && z <= 1.0);
    }
}
