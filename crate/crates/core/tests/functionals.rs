mod common;

use std::f64::consts::PI;

use common::*;
use gkdv_core::functionals::*;
use gkdv_core::symbols::{for_each_permutation, sigma6_raw, sum_cubes};
use gkdv_core::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Real spectrum with `pairs` random modes of index at most `jmax`.
fn sparse_spectrum(g: Grid, pairs: usize, jmax: i64, seed: u64) -> Spectrum {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = std::collections::BTreeSet::new();
    while picked.len() < pairs {
        picked.insert(rng.gen_range(1..=jmax));
    }
    let modes: Vec<(i64, Complex64)> = picked
        .into_iter()
        .map(|j| {
            let amp = rng.gen_range(0.2..1.0) * g.length() / 2.0;
            (j, Complex64::from_polar(amp, rng.gen_range(0.0..2.0 * PI)))
        })
        .collect();
    Spectrum::from_modes(g, &modes).unwrap()
}

/// `int (Iu)^p` by evaluating the trigonometric polynomial directly on a
/// grid fine enough for the trapezoid rule to be exact.
fn power_by_direct_sum(sp: &Spectrum, p: &IParams, power: i32) -> f64 {
    let g = sp.grid();
    let modes: Vec<(f64, Complex64)> = (0..g.n())
        .filter(|&s| sp.coeffs()[s].norm() > 0.0)
        .map(|s| {
            let xi = g.wavenumber(s);
            (xi, sp.coeffs()[s] * m_reference(xi, p.n(), p.s()))
        })
        .collect();
    let jmax = modes.iter().map(|(xi, _)| (xi / g.dk()).abs()).fold(0.0, f64::max);
    let points = (power as usize) * (jmax as usize) * 2 + 8;
    let h = g.length() / points as f64;
    (0..points)
        .map(|m| {
            let x = -0.5 * g.length() + m as f64 * h;
            let v: f64 = modes
                .iter()
                .map(|&(xi, c)| (c * Complex64::from_polar(1.0, xi * x)).re)
                .sum::<f64>()
                / g.length();
            v.powi(power)
        })
        .sum::<f64>()
        * h
}

#[test]
fn ground_state_mass_and_energy() {
    let g = Grid::new(1024, 64.0).unwrap();
    let q = ground_state(g).unwrap();
    let m_simpson = simpson(|x| q_closed(x).powi(2), -32.0, 32.0, 20000);
    assert!((m_simpson - Q_MASS).abs() < 1e-9);
    assert!((mass(&q) - Q_MASS).abs() < 1e-9);

    let dq = |x: f64| -3f64.powf(0.25) * (1.0 / (2.0 * x).cosh()).sqrt() * (2.0 * x).tanh();
    let e_simpson = simpson(
        |x| 0.5 * dq(x).powi(2) - q_closed(x).powi(6) / 6.0,
        -32.0,
        32.0,
        20000,
    );
    assert!(e_simpson.abs() < 1e-8);
    assert!(energy(&q, -1.0).unwrap().abs() < 1e-8);
}

#[test]
fn modified_energy_examples() {
    let g = Grid::new(128, 2.0 * PI).unwrap();
    let p = IParams::new(20.0, 0.5).unwrap();
    let f = Field::from_fn(g, |x| (3.0 * x).cos() + 0.4 * (9.0 * x).sin()).unwrap();
    let e1 = e1_modified(&f, &p, -1.0).unwrap();
    assert!((e1 - energy(&f, -1.0).unwrap()).abs() < 1e-12);

    let g = Grid::new(1024, 64.0).unwrap();
    let q = ground_state(g).unwrap();
    let p = IParams::from_index(400.0, 0.5, &g).unwrap();
    assert!(e1_modified(&q, &p, -1.0).unwrap().abs() < 1e-4);
}

#[test]
fn single_mode_kinetic_term() {
    let g = Grid::new(256, 2.0 * PI).unwrap();
    let p = IParams::new(8.0, 0.4).unwrap();
    let (amp, xi0) = (0.7, 40.0);
    let f = Field::from_fn(g, |x| amp * (xi0 * x).cos()).unwrap();
    let sp = forward_transform(&f).unwrap();
    let m = m_reference(xi0, 8.0, 0.4);
    let closed = 0.25 * amp * amp * xi0 * xi0 * m * m * g.length();
    assert!((kinetic(&i_spectrum(&sp, &p)) - closed).abs() < 1e-10 * closed);
    let modes = ActiveModeSet::from_spectrum(&sp, ActiveModeSet::DEFAULT_FLOOR);
    assert!((lambda2_sigma2(&sp, &p, &modes).unwrap() - closed).abs() < 1e-10 * closed);
}

#[test]
fn quadratic_form_is_kinetic_energy_of_iu() {
    let g = Grid::new(256, 20.0).unwrap();
    let p = IParams::from_index(10.0, 0.6, &g).unwrap();
    for seed in 0..5 {
        let sp = sparse_spectrum(g, 8, 40, seed);
        let modes = ActiveModeSet::from_spectrum(&sp, ActiveModeSet::DEFAULT_FLOOR);
        let l2 = lambda2_sigma2(&sp, &p, &modes).unwrap();
        let k = kinetic(&i_spectrum(&sp, &p));
        assert!((l2 - k).abs() < 1e-12 * k, "{l2} {k}");
    }
}

#[test]
fn sextic_form_is_sixth_power_integral() {
    let g = Grid::new(256, 2.0 * PI).unwrap();
    let p = IParams::new(12.0, 0.5).unwrap();
    for seed in 0..4 {
        let sp = sparse_spectrum(g, 8, 30, 100 + seed);
        let modes = ActiveModeSet::from_spectrum(&sp, ActiveModeSet::DEFAULT_FLOOR);
        let l6 = lambda6_sigma6(&sp, &p, &modes).unwrap();
        let oracle = -power_by_direct_sum(&sp, &p, 6) / 6.0;
        assert!((l6 - oracle).abs() < 1e-10 * oracle.abs(), "{l6} {oracle}");
    }
}

#[test]
fn odd_symbol_gives_imaginary_form() {
    let g = Grid::new(64, 2.0 * PI).unwrap();
    let sp = sparse_spectrum(g, 5, 12, 7);
    let modes = ActiveModeSet::from_spectrum(&sp, ActiveModeSet::DEFAULT_FLOOR);
    let v = lambda_symmetric(
        6,
        &|t: &[i64]| SymbolValue::real(sum_cubes(t) as f64),
        &sp,
        &modes,
    )
    .unwrap();
    assert!(v.value.re.abs() < 1e-12 * v.abs_sum);
    assert!(v.value.im.abs() > 1e-6 * v.abs_sum);
}

#[test]
fn second_energy_examples() {
    let g = Grid::new(128, 2.0 * PI).unwrap();
    let p = IParams::new(30.0, 0.5).unwrap();
    let th = Thresholds::default();
    let f = Field::from_fn(g, |x| 0.8 * (2.0 * x).cos() + 0.3 * (5.0 * x).sin()).unwrap();
    let e2 = e2_modified(&f, &p, &th).unwrap();
    let half_grad = kinetic(&forward_transform(&f).unwrap());
    assert!((e2 - half_grad).abs() < 1e-12 * half_grad);
    assert_eq!(e2_modified(&Field::zeros(g), &p, &th).unwrap(), 0.0);
}

#[test]
fn symmetric_kernel_matches_ordered_sum() {
    let g = Grid::new(64, 2.0 * PI).unwrap();
    let p = IParams::new(3.0, 0.5).unwrap();
    let dk = g.dk();
    let sp = sparse_spectrum(g, 6, 14, 3);
    let modes = ActiveModeSet::from_spectrum(&sp, ActiveModeSet::DEFAULT_FLOOR);
    let m = |t: &[i64]| SymbolValue::real(sigma6_raw(t, dk, &p));
    let a = lambda_symmetric(6, &m, &sp, &modes).unwrap();
    let b = lambda_ordered(6, &m, &sp, &modes).unwrap();
    assert!((a.value - b.value).norm() < 1e-13 * b.abs_sum);
}

#[test]
fn ordered_sum_symmetrizes_automatically() {
    let g = Grid::new(64, 2.0 * PI).unwrap();
    let sp = sparse_spectrum(g, 5, 10, 21);
    let modes = ActiveModeSet::from_spectrum(&sp, ActiveModeSet::DEFAULT_FLOOR);
    let raw = |t: &[i64]| SymbolValue::real((t[0] * t[1] * t[1]) as f64 + t[3] as f64);
    let sym = |t: &[i64]| {
        let mut acc = 0.0;
        let mut count = 0.0;
        for_each_permutation(t, |q| {
            acc += raw(q).re;
            count += 1.0;
        });
        SymbolValue::real(acc / count)
    };
    let a = lambda_ordered(4, &raw, &sp, &modes).unwrap();
    let b = lambda_symmetric(4, &sym, &sp, &modes).unwrap();
    assert!((a.value - b.value).norm() < 1e-12 * a.abs_sum.max(1.0));
}

#[test]
fn omega_path_matches_generic_kernel() {
    let g = Grid::new(128, 2.0 * PI).unwrap();
    let sp = Spectrum::from_modes(
        g,
        &[
            (1, Complex64::new(2.0 * PI, 0.0)),
            (10, Complex64::new(0.0, 1.8 * PI)),
            (12, Complex64::new(1.5 * PI, 1.0)),
        ],
    )
    .unwrap();
    let modes = ActiveModeSet::from_spectrum(&sp, ActiveModeSet::DEFAULT_FLOOR);
    let p = IParams::new(4.0, 0.5).unwrap();
    for k in [4.0, 8.0] {
        let th = Thresholds::with_k_much(k).unwrap();
        let fast = lambda6_sigma_tilde(&sp, &p, &th, &modes).unwrap();
        let slow = lambda6_sigma_tilde_direct(&sp, &p, &th, &modes).unwrap();
        assert!((fast - slow).abs() < 1e-11 * slow.abs(), "{fast} {slow}");
    }
}

#[test]
fn constant_quadratic_symbol_is_conserved() {
    let g = Grid::new(64, 2.0 * PI).unwrap();
    let sp = sparse_spectrum(g, 4, 6, 5);
    let modes = ActiveModeSet::from_spectrum(&sp, ActiveModeSet::DEFAULT_FLOOR);
    let one = |_: &[i64]| SymbolValue::real(1.0);
    let (lin, non) = dlambda_parts(2, &one, &sp, &modes, -1.0).unwrap();
    assert_eq!(lin, 0.0);
    assert!(non.abs() < 1e-9, "{non}");
}

#[test]
fn ledger_is_consistent() {
    let g = Grid::new(256, 32.0).unwrap();
    let f = random_bump_field(g, 8);
    let p = IParams::from_index(6.0, 0.5, &g).unwrap();
    let th = Thresholds::default();
    let l = EnergyLedger::measure(&f, 0.25, &p, &th, 1e-6).unwrap();
    assert_eq!(l.t, 0.25);
    assert_eq!(l.e2, l.e1 + l.lambda6_sigma_tilde);
    assert!((l.mass - mass(&f)).abs() < 1e-14);
    assert!((l.energy - energy(&f, -1.0).unwrap()).abs() < 1e-12);
    assert!((l.e1 - e1_modified(&f, &p, -1.0).unwrap()).abs() < 1e-12);
}

#[test]
fn budget_and_arity_errors() {
    let g = Grid::new(128, 2.0 * PI).unwrap();
    let sp = sparse_spectrum(g, 9, 40, 1);
    let modes = ActiveModeSet::from_spectrum(&sp, ActiveModeSet::DEFAULT_FLOOR);
    assert_eq!(modes.len(), 18);
    let one = |_: &[i64]| SymbolValue::real(1.0);
    assert!(matches!(
        lambda_k(10, &one, &sp, &modes),
        Err(Error::ModeBudget { k: 10, .. })
    ));
    assert!(matches!(lambda_k(3, &one, &sp, &modes), Err(Error::Arity(3))));
    assert!(matches!(
        dlambda_rhs(6, &one, &sp, &modes, -1.0),
        Err(Error::ModeBudget { k: 10, .. })
    ));
}

#[test]
fn xsb_examples() {
    let g = Grid::new(64, 2.0 * PI).unwrap();
    let dt = 0.01;
    let hist: Vec<Field> = (0..32)
        .map(|k| {
            let t = k as f64 * dt;
            Field::from_fn(g, |x| (2.0 * x + 8.0 * t).cos() + 0.3 * (5.0 * x - t).sin()).unwrap()
        })
        .collect();
    let taper = |k: usize| (PI * k as f64 / 31.0).sin();
    for s in [0.0, 0.7] {
        let oracle: f64 = hist
            .iter()
            .enumerate()
            .map(|(k, f)| dt * taper(k).powi(2) * sobolev_norm(f, s).unwrap().powi(2))
            .sum::<f64>()
            .sqrt();
        let v = xsb_norm(&hist, dt, s, 0.0).unwrap();
        assert!((v - oracle).abs() < 1e-12 * oracle, "{v} {oracle}");
    }
    assert!(xsb_norm(&hist, dt, 0.0, 0.5).unwrap() > xsb_norm(&hist, dt, 0.0, 0.0).unwrap());
    assert!(matches!(
        xsb_norm(&hist[..8], dt, 0.0, 0.0),
        Err(Error::TooFewSamples { .. })
    ));
}
