mod common;

use common::*;
use gkdv_core::functionals::{energy, mass};
use gkdv_core::grid::lp_norm;
use gkdv_core::solver::*;
use gkdv_core::*;

fn max_diff(a: &Field, b: &Field) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn ground_state_profile() {
    assert!((q_profile(0.0) - 3f64.powf(0.25)).abs() < 1e-15);
    for x in [-3.0, -0.4, 0.0, 1.1, 7.5] {
        assert!((q_profile(x) - q_closed(x)).abs() < 1e-14);
    }
    let g = Grid::new(1024, 64.0).unwrap();
    let q = ground_state(g).unwrap();
    // Q'' + Q^5 - Q, with Q'' = -D^2 Q
    let d2 = fractional_derivative(&q, 2.0).unwrap();
    let residual = q
        .values()
        .iter()
        .zip(d2.values())
        .map(|(v, d)| (-d + v.powi(5) - v).abs())
        .fold(0.0, f64::max);
    assert!(residual < 1e-8, "{residual}");
    assert!((lp_norm(&q, 6.0).powi(6) - q_l6()).abs() < 1e-9);
    assert!(matches!(
        ground_state(Grid::new(64, 8.0).unwrap()),
        Err(Error::BoxTooSmall { .. })
    ));
}

#[test]
fn zero_stays_zero() {
    let g = Grid::new(64, 16.0).unwrap();
    let cfg = SolverConfig {
        t_end: 0.1,
        dt: 1e-3,
        ..Default::default()
    };
    let out = evolve_to_end(&Field::zeros(g), &cfg).unwrap();
    assert!(out.values().iter().all(|&v| v == 0.0));
}

#[test]
fn free_flow_conserves_mass() {
    let g = Grid::new(256, 32.0).unwrap();
    let f = random_bump_field(g, 3);
    let cfg = SolverConfig {
        dt: 1e-3,
        t_end: 0.5,
        nonlinear: false,
        ..Default::default()
    };
    let h = evolve(&f, &cfg, &[0.0, 0.25, 0.5]).unwrap();
    let r = conservation_check(&h, 1.0).unwrap();
    assert!(r.mass_drift < 1e-12, "{r:?}");
}

#[test]
fn defocusing_conservation() {
    let g = Grid::new(256, 32.0).unwrap();
    let f = random_bump_field(g, 6).scaled(1.5);
    let cfg = SolverConfig {
        dt: 5e-4,
        t_end: 0.5,
        mu: 1.0,
        ..Default::default()
    };
    let h = evolve(&f, &cfg, &[0.0, 0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
    let r = conservation_check(&h, 1.0).unwrap();
    assert!(r.mass_drift < 1e-7 && r.energy_drift < 1e-7, "{r:?}");
    assert!((r.energy0 - energy(&f, 1.0).unwrap()).abs() < 1e-12);
}

#[test]
fn dealias_factor_does_not_matter() {
    let g = Grid::new(128, 16.0).unwrap();
    let f = random_bump_field(g, 10).scaled(1.2);
    let run = |factor| {
        let cfg = SolverConfig {
            dt: 1e-3,
            t_end: 0.2,
            dealias_factor: factor,
            ..Default::default()
        };
        evolve_to_end(&f, &cfg).unwrap()
    };
    let d = max_diff(&run(3), &run(4));
    assert!(d < 1e-10, "{d}");
}

#[test]
fn reversibility() {
    let g = Grid::new(512, 64.0).unwrap();
    let q = ground_state(g).unwrap();
    let cfg = SolverConfig {
        dt: 2.5e-4,
        t_end: 0.3,
        ..Default::default()
    };
    let fwd = evolve_to_end(&q, &cfg).unwrap();
    let back = evolve_backward(&fwd, &cfg).unwrap();
    let d = max_diff(&back, &q);
    assert!(d < 1e-8, "{d}");
}

#[test]
fn soliton_translates() {
    // Q(x - t) solves u_t + u_xxx = -(u^5)_x
    let g = Grid::new(512, 64.0).unwrap();
    let q = ground_state(g).unwrap();
    let cfg = SolverConfig {
        dt: 2.5e-4,
        t_end: 1.0,
        ..Default::default()
    };
    let out = evolve_to_end(&q, &cfg).unwrap();
    let exact = Field::from_fn(g, |x| q_profile(x - 1.0)).unwrap();
    let d = max_diff(&out, &exact);
    assert!(d < 1e-6, "{d}");
    assert!((mass(&out) - Q_MASS).abs() < 1e-9);
}

#[test]
fn history_round_trips() {
    let g = Grid::new(32, 10.0).unwrap();
    let f = random_bump_field(g, 2);
    let cfg = SolverConfig {
        dt: 1e-3,
        t_end: 0.01,
        ..Default::default()
    };
    let h = evolve(&f, &cfg, &[0.0, 0.005, 0.01]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("h.bin");
    write_history_bin(&h, &bin).unwrap();
    assert_eq!(read_history_bin(&bin).unwrap(), h);
    let csv = dir.path().join("h.csv");
    write_history_csv(&h, &csv).unwrap();
    assert_eq!(read_history_csv(&csv).unwrap(), h);
}

#[test]
fn blow_up_is_reported() {
    let g = Grid::new(512, 64.0).unwrap();
    let q = ground_state(g).unwrap().scaled(1.6);
    let cfg = SolverConfig {
        dt: 1e-3,
        t_end: 0.1,
        blowup_cap: 2.0,
        ..Default::default()
    };
    assert!(matches!(
        evolve_to_end(&q, &cfg),
        Err(Error::BlowUp { cap, .. }) if cap == 2.0
    ));
}

#[test]
fn invalid_configurations() {
    let bad = [
        SolverConfig {
            dt: 0.0,
            ..Default::default()
        },
        SolverConfig {
            mu: 0.5,
            ..Default::default()
        },
        SolverConfig {
            dealias_factor: 2,
            ..Default::default()
        },
    ];
    for cfg in bad {
        assert!(matches!(
            cfg.validate(),
            Err(Error::InvalidParameter { .. })
        ));
    }
}
