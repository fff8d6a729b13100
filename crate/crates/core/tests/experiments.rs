mod common;

use common::*;
use gkdv_core::experiments::*;
use gkdv_core::functionals::mass;
use gkdv_core::*;

fn q(a: i64, b: i64) -> Q64 {
    Q64::new(a, b)
}

#[test]
fn threshold_examples() {
    let half = threshold_arithmetic(q(1, 2));
    assert_eq!(half.lambda_exponent, "1");
    assert_eq!(half.threshold_value, "1/2");
    assert_eq!(half.poly_exponent.as_deref(), Some("1"));
    assert!(half.admissible);

    let crit = threshold_arithmetic(q(6, 13));
    assert_eq!(crit.threshold_value, "0");
    assert_eq!(crit.root, "6/13");
    assert_eq!(crit.root_decay_two, "3/5");
    assert_eq!(crit.poly_exponent, None);
    assert!(!crit.admissible);

    assert!(threshold_value(q(11, 25), q(7, 2)) < q(0, 1));
    assert_eq!(threshold_value(q(3, 5), q(2, 1)), q(0, 1));
    let table = threshold_table();
    assert_eq!(table.len(), 6);
    assert_eq!(table.iter().filter(|r| r.admissible).count(), 5);
}

#[test]
fn rescaling_examples() {
    assert_eq!(lambda_for(16.0, 0.5), 16.0);
    assert!((lambda_for(64.0, 0.999) - 1.0).abs() < 0.01);
    let g = Grid::new(512, 64.0).unwrap();
    let base = ground_state(g).unwrap().scaled(0.8);
    let mut h1 = Vec::new();
    for n in [8.0, 16.0, 32.0, 64.0] {
        let target = dilated_grid(&g, lambda_for(n, 0.5)).unwrap();
        let r = rescale_for_n(&base, 0.5, n, target).unwrap();
        assert!(r.mass_defect() < 1e-10);
        assert!((mass(&r.field) - mass(&base)).abs() < 1e-10);
        assert!((r.params.n() / target.dk() - n).abs() < 1e-9);
        h1.push(r.iu_h1);
    }
    let (lo, hi) = h1
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(a, b), &v| (a.min(v), b.max(v)));
    assert!(hi / lo < 4.0, "{h1:?}");
}

#[test]
fn zero_profile_has_no_increments() {
    let cfg = ScanConfig {
        seeds: vec![1],
        t_window: 0.1,
        samples: 2,
        ..Default::default()
    };
    let g = Grid::new(cfg.profile.n, cfg.profile.length).unwrap();
    let rep = run_increment_scan_with(&cfg, |_| Ok(Field::zeros(g))).unwrap();
    assert_eq!(rep.cells.len(), 4);
    for c in &rep.cells {
        assert_eq!((c.e1_inc_sup, c.e2_inc_sup, c.lam6_sup), (0.0, 0.0, 0.0));
    }
}

#[test]
fn band_limited_profile_tracks_energy() {
    let cfg = ScanConfig {
        profile: ProfileConfig {
            j_cap: 4,
            ..Default::default()
        },
        n_list: vec![16.0, 32.0, 64.0, 128.0],
        seeds: vec![4],
        t_window: 0.2,
        samples: 4,
        ..Default::default()
    };
    let rep = run_increment_scan(&cfg).unwrap();
    for c in &rep.cells {
        assert!(c.energy_drift <= 1e-7, "{}", c.energy_drift);
        assert!((c.e1_inc_sup - c.energy_drift).abs() <= 1e-7);
    }
}

#[test]
fn free_single_pair_has_no_rate() {
    let cfg = DiffConfig {
        modes: vec![(5, 1.0, 0.3)],
        nonlinear: false,
        ..Default::default()
    };
    let r = run_diff_formula_check(&cfg).unwrap();
    assert!(r.fd_e1.abs() < 1e-8 && r.rhs_e1.abs() < 1e-12, "{r:?}");
    assert!(r.fd_e2.abs() < 1e-8 && r.rhs_e2.abs() < 1e-12, "{r:?}");
}

#[test]
fn sparse_field_rate_matches_finite_difference() {
    let cfg = DiffConfig {
        modes: vec![(1, 0.6, 0.4), (10, 0.4, 0.8), (12, 0.4, -0.4)],
        ..Default::default()
    };
    let r = run_diff_formula_check(&cfg).unwrap();
    assert!(r.rel_err_e1 < 1e-4, "{r:?}");
    assert!(r.rel_err_e2 < 1e-3, "{r:?}");
}

#[test]
fn diff_check_rejects_oversized_data() {
    let cfg = DiffConfig {
        modes: vec![(1, 1.0, 0.0), (2, 1.0, 0.0), (3, 1.0, 0.0), (4, 1.0, 0.0)],
        ..Default::default()
    };
    assert!(run_diff_formula_check(&cfg).is_err());
    let cfg = DiffConfig {
        modes: vec![(40, 1.0, 0.0)],
        ..Default::default()
    };
    assert!(run_diff_formula_check(&cfg).is_err());
}

#[test]
fn ground_state_optimizes_gagliardo_nirenberg() {
    let g = Grid::new(1024, 64.0).unwrap();
    let r = run_gn_check(g, 50, 7).unwrap();
    assert!((r.r_q - 1.0).abs() < 1e-8, "{}", r.r_q);
    assert!(r.r_dilates.iter().all(|&(_, v)| (v - 1.0).abs() < 1e-6));
    assert!(r.r_random_max <= 1.0 && r.ok);
    assert_eq!(r.random_count, 50);
}

#[test]
fn globalize_examples() {
    let g = Grid::new(256, 64.0).unwrap();
    let u0 = ground_state(g).unwrap().scaled(0.7);
    let cfg = GlobalizeConfig {
        t_target: 100.0 * 0.5 / 32f64.powi(3),
        ..Default::default()
    };
    let r = globalize_demo(&u0, &cfg).unwrap();
    assert!(r.windows_planned >= 100);
    assert_eq!(r.windows_completed, r.windows_planned);
    assert!(r.bootstrap_ok && r.first_violation.is_none());
    assert!((r.n_pow_7_2 - 32f64.powf(3.5)).abs() < 1e-6);

    let defocusing = GlobalizeConfig {
        mu: 1.0,
        t_target: 10.0 * 0.5 / 32f64.powi(3),
        ..Default::default()
    };
    let big = ground_state(g).unwrap().scaled(1.5);
    assert!(globalize_demo(&big, &defocusing).unwrap().bootstrap_ok);
    assert!(globalize_demo(&big, &GlobalizeConfig::default()).is_err());

    let idle = globalize_demo(&u0, &GlobalizeConfig::default()).unwrap();
    assert_eq!((idle.windows_planned, idle.windows_completed), (0, 0));
}

#[test]
fn second_energy_increment_decays() {
    let cfg = ScanConfig {
        seeds: vec![2],
        ..Default::default()
    };
    let rep = run_increment_scan(&cfg).unwrap();
    for w in rep.mean_e2_by_n.windows(2) {
        assert!(w[1] <= 1.2 * w[0], "{:?}", rep.mean_e2_by_n);
    }
    let records = rep.records(&cfg).unwrap();
    assert_eq!(records.len(), 4);
    assert!(records.iter().all(|r| r.is_finite()));
}

#[test]
fn records_are_deterministic() {
    let cfg = ScanConfig::default();
    let mut a = ExperimentRecord::new("scan_n", &cfg, 3).unwrap();
    a.n_index = 16.0;
    a.e1_inc_sup = Some(1.5e-3);
    a.wall_ms = 812;
    let write = |wall| {
        let mut buf = Vec::new();
        write_records_csv(std::slice::from_ref(&a), &mut buf, wall).unwrap();
        String::from_utf8(buf).unwrap()
    };
    let first = write(false);
    assert_eq!(first, write(false));
    assert_eq!(first.lines().next().unwrap(), CSV_HEADER.join(","));
    assert!(!first.contains("812"));
    assert!(write(true).contains("812"));

    let other = ScanConfig {
        t_window: 0.25,
        ..Default::default()
    };
    let b = ExperimentRecord::new("scan_n", &other, 3).unwrap();
    assert_ne!(a.config_hash, b.config_hash);
    assert_eq!(a.config_hash.len(), 64);
    assert_eq!(
        a.config_hash,
        ExperimentRecord::new("scan_n", &cfg, 3).unwrap().config_hash
    );
    assert_eq!(a.blend, multiplier::BLEND_ID);
}

#[test]
fn ground_state_mass_constant() {
    assert!((ground_state_mass() - Q_MASS).abs() < 1e-15);
    let g = Grid::new(1024, 64.0).unwrap();
    assert!((gn_ratio(&ground_state(g).unwrap()).unwrap() - 1.0).abs() < 1e-8);
}
