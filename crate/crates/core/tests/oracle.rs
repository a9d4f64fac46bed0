//! Values frozen from an independent evaluation of the jump relations, and a
//! bisection oracle that shares no code with the locus solver.

use approx::assert_relative_eq;
use znd_core::{
    admissible_window, solve_downstream, solve_from_piston_speed, EosParams, ThermoPoint, UpstreamState,
};

fn canonical() -> UpstreamState {
    UpstreamState::new(EosParams::new(1.4).unwrap(), 2.0, 1.0).unwrap()
}

/// Energy-jump residual at `(nu, s)` with the velocity eliminated.
fn energy_jump(up: &UpstreamState, nu: f64, s: f64) -> f64 {
    let pt = ThermoPoint::new(nu, s).unwrap();
    let e = up.eos.internal_energy(pt).unwrap();
    let p = up.eos.pressure(pt).unwrap();
    e - up.internal_energy() + 0.5 * (p + up.p0) * (nu - up.nu0)
}

/// Entropy on the locus by bisection, bracketing where the residual changes sign.
fn bisect_entropy(up: &UpstreamState, nu: f64) -> f64 {
    let (mut lo, mut hi) = (up.s0 - 5.0, up.s0 + 10.0);
    let f_lo = energy_jump(up, nu, lo);
    assert!(f_lo * energy_jump(up, nu, hi) < 0.0, "no bracket at nu = {nu}");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if energy_jump(up, nu, mid) * f_lo > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn canonical_background_matches_frozen_values() {
    let up = canonical();
    let bg = solve_from_piston_speed(&up, 2.0).unwrap();
    assert_relative_eq!(bg.nu, 0.7080951138488172, epsilon = 1e-10);
    assert_relative_eq!(bg.s, 1.0674167338244958, epsilon = 1e-10);
    assert_relative_eq!(bg.p, 4.096203167027816, epsilon = 1e-10);
    assert_relative_eq!(bg.sigma, 1.5481015835139074, epsilon = 1e-10);
    let t = up.eos.temperature(ThermoPoint::new(bg.nu, bg.s).unwrap()).unwrap();
    assert_relative_eq!(t, 8.291904886151185, epsilon = 1e-9);
}

#[test]
fn window_lower_end_is_sqrt7_over_2() {
    let w = admissible_window(&canonical()).unwrap();
    assert_relative_eq!(w.u1, 7f64.sqrt() / 2.0, epsilon = 1e-12);
    assert!(w.contains(2.0));
    assert!(!w.contains(1.3));
}

#[test]
fn frozen_locus_points() {
    let up = canonical();
    for (nu, p, u, sigma) in [
        (0.3, 6.227419354838711, 2.9810422511641477, 1.753554265390675),
        (0.6, 4.63125, 2.254717277176897, 1.6105123408406408),
        (0.9, 3.1954545454545453, 1.5540270267920053, 1.4127518425381866),
    ] {
        let pt = solve_downstream(&up, nu).unwrap();
        assert_relative_eq!(pt.p, p, epsilon = 1e-10);
        assert_relative_eq!(pt.u, u, epsilon = 1e-10);
        assert_relative_eq!(pt.sigma, sigma, epsilon = 1e-10);
    }
}

#[test]
fn locus_agrees_with_bisection_oracle() {
    for (g, nu0, p0) in [(1.4, 2.0, 1.0), (1.2, 3.0, 0.5), (2.0, 1.8, 2.0), (1.67, 2.5, 0.3)] {
        let up = UpstreamState::new(EosParams::new(g).unwrap(), nu0, p0).unwrap();
        let floor = admissible_window(&up).unwrap().nu_floor;
        for k in 1..10 {
            let nu = floor + (1.0 - floor) * k as f64 / 10.0;
            let pt = solve_downstream(&up, nu).unwrap();
            let s = bisect_entropy(&up, nu);
            assert!((pt.s - s).abs() < 1e-10, "gamma {g} nu {nu}: {} vs {s}", pt.s);
            let p = up.eos.pressure(ThermoPoint::new(nu, s).unwrap()).unwrap();
            let u = ((p - p0) * (nu0 - nu)).sqrt();
            assert!((pt.u - u).abs() < 1e-9 * u.max(1.0));
        }
    }
}
