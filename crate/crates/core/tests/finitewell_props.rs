use std::f64::consts::PI;

use proptest::prelude::*;
use sqwell_core::finitewell::{
    limit_study, potential_recovery, quantization_residual, solve_bound_states, FiniteWellConfig,
};
use sqwell_core::isw::WellConfig;

fn unit(depth: f64) -> FiniteWellConfig {
    FiniteWellConfig::new(WellConfig::unit(), depth).unwrap()
}

/// Sign changes of `sin(kL)(k² − q²) − cos(kL)·2kq` on a uniform 10⁵-cell
/// scan of the window. At the tangent poles this form equals `±(k² − q²)`,
/// so every sign change is a bound state.
fn brute_force_count(cfg: &WellConfig, depth: f64) -> usize {
    let kmax2 = 2.0 * cfg.mass() * depth / (cfg.hbar() * cfg.hbar());
    let l = cfg.width();
    let g = |k: f64| {
        let q = (kmax2 - k * k).max(0.0).sqrt();
        (k * l).sin() * (k * k - q * q) - (k * l).cos() * 2.0 * k * q
    };
    let cells = 100_000;
    let h = kmax2.sqrt() / cells as f64;
    (1..cells - 1)
        .filter(|&i| (g(i as f64 * h) < 0.0) != (g((i + 1) as f64 * h) < 0.0))
        .count()
}

#[test]
fn ground_state_sits_below_the_infinite_well() {
    let fw = unit(50.0);
    let states = solve_bound_states(&fw).unwrap();
    let k1 = states[0].k;
    assert!(k1 > 2.6 && k1 < PI);
    // the residual really does change sign across the returned root
    let r_lo = quantization_residual(&fw, k1 * (1.0 - 1e-6)).unwrap();
    let r_hi = quantization_residual(&fw, k1 * (1.0 + 1e-6)).unwrap();
    assert!(r_lo * r_hi < 0.0);
    assert!(quantization_residual(&fw, PI).unwrap() != 0.0);
    assert_eq!(states.len(), brute_force_count(&WellConfig::unit(), 50.0));
}

#[test]
fn deep_well_approaches_pi() {
    let states = solve_bound_states(&unit(1e6)).unwrap();
    assert!((states[0].k - PI).abs() < 1e-2);
    assert!(states[0].k < PI);
}

#[test]
fn scan_count_matches_brute_force() {
    let cfg = WellConfig::new(1.0, 1.0, 1.7).unwrap();
    for depth in [0.3, 2.0, 17.0, 50.0, 400.0, 3000.0] {
        let fw = FiniteWellConfig::new(cfg, depth).unwrap();
        let found = solve_bound_states(&fw).unwrap().len();
        assert_eq!(found, brute_force_count(&cfg, depth), "V0 = {depth}");
    }
}

#[test]
fn recovery_reproduces_step_potential_pointwise() {
    let fw = unit(50.0);
    let sol = &solve_bound_states(&fw).unwrap()[0];
    let v = potential_recovery(&fw, sol).unwrap();
    assert!(v.atoms().is_empty());
    for i in 0..1000 {
        let x = -1.0 + 3.0 * (i as f64 + 0.5) / 1000.0;
        let expected = if (0.0..1.0).contains(&x) {
            0.0
        } else {
            50.0 * sol.psi.evaluate(x).unwrap().re
        };
        assert!(
            (v.evaluate(x).unwrap().re - expected).abs() < 1e-9,
            "x = {x}"
        );
    }
}

#[test]
fn states_are_orthogonal_and_alternate() {
    for depth in [50.0, 500.0] {
        let states = solve_bound_states(&unit(depth)).unwrap();
        for (i, a) in states.iter().enumerate() {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(a.parity.sign(), sign);
            for b in &states[i + 1..] {
                let ip = a.psi.conj().product(&b.psi).unwrap();
                let ip = ip.integrate(f64::NEG_INFINITY, f64::INFINITY).unwrap();
                assert!(ip.norm() < 1e-7);
            }
        }
    }
}

#[test]
fn exterior_probability_shrinks_with_depth() {
    let rows = limit_study(&WellConfig::unit(), 1, &[20.0, 100.0, 1e3, 1e4, 1e5]).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].exterior_prob < w[0].exterior_prob);
    }
}

#[test]
fn gap_closes_at_the_square_root_rate() {
    let rows = limit_study(&WellConfig::unit(), 1, &[1e2, 1e3, 1e4]).unwrap();
    let target = 10f64.powf(-0.5);
    for w in rows.windows(2) {
        let ratio = w[1].gap / w[0].gap;
        assert!((ratio / target - 1.0).abs() < 0.2, "ratio {ratio}");
    }
    let slope = 2f64.sqrt() * PI;
    assert!((rows[2].edge_slope - slope).abs() / slope < 0.05);
}

#[test]
fn second_state_limit() {
    let rows = limit_study(&WellConfig::unit(), 2, &[1e2, 1e3, 1e4]).unwrap();
    assert!(rows.iter().all(|r| r.gap > 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_solution_holds_its_invariants(h in 0.5..2.0f64, m in 0.5..2.0f64,
                                           l in 0.5..3.0f64, depth in 0.1..2000.0f64) {
        let fw = FiniteWellConfig::new(WellConfig::new(h, m, l).unwrap(), depth).unwrap();
        let states = solve_bound_states(&fw).unwrap();
        prop_assert!(!states.is_empty());
        for s in &states {
            s.check_invariants(&fw).unwrap();
            prop_assert!(potential_recovery(&fw, s).is_ok());
        }
    }

    #[test]
    fn root_count_is_monotone_in_depth(d1 in 0.1..3000.0f64, d2 in 0.1..3000.0f64) {
        let (lo, hi) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
        let n_lo = solve_bound_states(&unit(lo)).unwrap().len();
        let n_hi = solve_bound_states(&unit(hi)).unwrap().len();
        prop_assert!(n_lo <= n_hi);
    }
}
