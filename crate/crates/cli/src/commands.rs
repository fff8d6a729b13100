use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, bail, Result};
use gkdv_core::experiments::*;
use gkdv_core::resonance::{
    verify_m10_bar_bound, verify_sigma_tilde_bounded, SamplePlan, SupReport, SweepReport, TenStratum,
};
use gkdv_core::solver::{
    conservation_check, evolve, write_history_bin, write_history_csv, SolverConfig,
};
use gkdv_core::{ground_state, Grid, Thresholds};
use serde_json::json;

use crate::settings::*;
use crate::Outcome;

pub struct Ctx<'a> {
    pub out: &'a Path,
    pub seed: Option<u64>,
    pub wall_clock: bool,
}

impl Ctx<'_> {
    fn seed(&self, cmd: &str) -> Result<u64> {
        self.seed
            .ok_or_else(|| anyhow!("`{cmd}` is stochastic: --seed is required"))
    }

    fn write(&self, stem: &str, records: &[ExperimentRecord]) -> Result<()> {
        std::fs::create_dir_all(self.out)?;
        let csv = self.out.join(format!("{stem}.csv"));
        let json = self.out.join(format!("{stem}.json"));
        write_records(records, &csv, &json, self.wall_clock)?;
        println!("wrote {}", csv.display());
        Ok(())
    }
}

fn fail(failed: Vec<&'static str>) -> Outcome {
    if failed.is_empty() {
        Outcome::Ok
    } else {
        Outcome::Assertion(failed)
    }
}

pub fn solve(s: &SolveSettings, ctx: &Ctx) -> Result<Outcome> {
    let start = Instant::now();
    let grid = Grid::new(s.n, s.length)?;
    let u0 = match s.profile.as_str() {
        "soliton" => ground_state(grid)?.scaled(s.amplitude),
        "random" => {
            let seed = ctx.seed("solve --profile random")?;
            let cfg = ProfileConfig {
                n: s.n,
                length: s.length,
                ..Default::default()
            };
            random_profile(&cfg, seed)?.scaled(s.amplitude)
        }
        other => bail!("invalid `profile`: '{other}' (expected soliton or random)"),
    };
    if !matches!(s.history_format.as_str(), "csv" | "bin") {
        bail!("invalid `history_format`: '{}' (expected csv or bin)", s.history_format);
    }
    let cfg = SolverConfig {
        dt: s.dt,
        t_end: s.t_end,
        mu: s.mu,
        dealias_factor: s.dealias_factor,
        blowup_cap: s.blowup_cap,
        nonlinear: true,
    };
    cfg.validate()?;
    let k = s.snapshots.max(1);
    let times: Vec<f64> = (0..=k).map(|i| s.t_end * i as f64 / k as f64).collect();
    let history = evolve(&u0, &cfg, &times)?;
    let drift = conservation_check(&history, s.mu)?;

    std::fs::create_dir_all(ctx.out)?;
    let hist_path = ctx.out.join(format!("history.{}", s.history_format));
    if s.history_format == "csv" {
        write_history_csv(&history, &hist_path)?;
    } else {
        write_history_bin(&history, &hist_path)?;
    }
    let mut r = ExperimentRecord::new("solve", s, ctx.seed.unwrap_or(0))?;
    r.t_window = s.t_end;
    r.wall_ms = elapsed_ms(start);
    r.extra = serde_json::to_value(drift)?;
    ctx.write("solve", &[r])?;
    println!(
        "mass0 {:.12} energy0 {:.6e} mass_drift {:.3e} energy_drift {:.3e}",
        drift.mass0, drift.energy0, drift.mass_drift, drift.energy_drift
    );
    println!("history {}", hist_path.display());
    Ok(Outcome::Ok)
}

fn sup_record(
    name: &str,
    s: &VerifySettings,
    seed: u64,
    r: &SupReport,
    start: Instant,
) -> Result<ExperimentRecord> {
    let mut rec = ExperimentRecord::new(name, s, seed)?;
    rec.s = s.s;
    rec.n_index = r.n_index;
    rec.lam6_sup = Some(r.sup);
    rec.guard_frac = Some(r.guard_frac);
    rec.wall_ms = elapsed_ms(start);
    rec.extra = json!({
        "samples": r.samples,
        "sup_first_half": r.sup_first_half,
        "sup_second_half": r.sup_second_half,
        "stable": r.stable,
        "omega_frac": r.omega_frac,
        "per_region": r.per_region,
        "histogram": r.histogram,
    });
    Ok(rec)
}

pub fn verify_symbols(s: &VerifySettings, ctx: &Ctx) -> Result<Outcome> {
    let seed = ctx.seed("verify-symbols")?;
    let start = Instant::now();
    let (do_sigma, do_m10) = match s.target.as_str() {
        "sigma" => (true, false),
        "m10" => (false, true),
        "both" => (true, true),
        other => bail!("invalid `target`: '{other}' (expected sigma, m10 or both)"),
    };
    if s.n_list.is_empty() {
        bail!("invalid `N`: empty list");
    }
    let mut records = Vec::new();
    let mut failed = Vec::new();
    let mut sweep = |name: &str,
                     tag_stable: &'static str,
                     tag_spread: &'static str,
                     run: &dyn Fn(f64) -> gkdv_core::Result<SupReport>|
     -> Result<()> {
        let reports = s
            .n_list
            .iter()
            .map(|&n| run(n))
            .collect::<gkdv_core::Result<Vec<_>>>()?;
        for r in &reports {
            println!(
                "{name} N={} sup={:.4e} first={:.4e} second={:.4e} stable={}",
                r.n_index, r.sup, r.sup_first_half, r.sup_second_half, r.stable
            );
            records.push(sup_record(name, s, seed, r, start)?);
        }
        let sw = SweepReport::from_reports(reports);
        println!("{name} spread={:.4}", sw.spread);
        if !sw.all_stable() {
            failed.push(tag_stable);
        }
        if !(sw.spread <= s.max_spread) {
            failed.push(tag_spread);
        }
        Ok(())
    };
    if do_sigma {
        let th = Thresholds::with_k_much(s.k_much_sigma)?;
        sweep(
            "verify_sigma_tilde",
            "pointwise_bounds.sigma_tilde.stable",
            "pointwise_bounds.sigma_tilde.n_uniform",
            &|n| verify_sigma_tilde_bounded(n, s.s, &th, s.samples, &SamplePlan::default(), seed),
        )?;
    }
    if do_m10 {
        let th = Thresholds::with_k_much(s.k_much_m10)?;
        sweep(
            "verify_m10_bar",
            "pointwise_bounds.m10_bar.stable",
            "pointwise_bounds.m10_bar.n_uniform",
            &|n| {
                verify_m10_bar_bound(
                    n,
                    s.s,
                    &th,
                    s.samples,
                    &[TenStratum::HighPair, TenStratum::CancellingHigh],
                    seed,
                )
            },
        )?;
    }
    ctx.write("verify_symbols", &records)?;
    Ok(fail(failed))
}

pub fn scan_n(s: &ScanSettings, ctx: &Ctx) -> Result<Outcome> {
    let seed = ctx.seed("scan-N")?;
    let start = Instant::now();
    if s.seeds == 0 {
        bail!("invalid `seeds`: must be at least 1");
    }
    let cfg = ScanConfig {
        profile: ProfileConfig {
            n: s.profile_n,
            length: s.profile_length,
            j_cap: s.j_cap,
            mass_fraction: s.mass_fraction,
            ..Default::default()
        },
        s: s.s,
        n_list: s.n_list.clone(),
        seeds: (seed..seed + s.seeds).collect(),
        t_window: s.t_window,
        samples: s.samples,
        thresholds: Thresholds::with_k_much(s.k_much)?,
        ..Default::default()
    };
    let rep = run_increment_scan(&cfg)?;
    let mut records = rep.records(&cfg)?;
    let ms = elapsed_ms(start);
    for r in &mut records {
        r.wall_ms = ms;
    }
    for c in &rep.cells {
        println!(
            "N={} seed={} dE1={:.4e} dE2={:.4e} lam6={:.4e} ratio={:.4e}",
            c.n_index, c.seed, c.e1_inc_sup, c.e2_inc_sup, c.lam6_sup, c.fixed_time_ratio
        );
    }
    let s1 = rep.fit_e1.map(|f| f.slope);
    let s2 = rep.fit_e2.map(|f| f.slope);
    println!(
        "slope_e1={s1:?} slope_e2={s2:?} fixed_time_spread={:.3}",
        rep.fixed_time_spread
    );
    ctx.write("scan_n", &records)?;
    let mut failed = Vec::new();
    match (s1, s2) {
        (Some(a), Some(b)) => {
            if !(b <= -2.0) {
                failed.push("almost_conservation.slope_e2");
            }
            if !(b <= a - 1.0) {
                failed.push("almost_conservation.slope_gap");
            }
        }
        _ => failed.push("almost_conservation.fit"),
    }
    if !(rep.fixed_time_spread <= 4.0) {
        failed.push("almost_conservation.fixed_time_ratio");
    }
    Ok(fail(failed))
}

pub fn gn_check(s: &GnSettings, ctx: &Ctx) -> Result<Outcome> {
    let seed = ctx.seed("gn-check")?;
    let start = Instant::now();
    let grid = Grid::new(s.n, s.length)?;
    let r = run_gn_check(grid, s.count, seed)?;
    println!(
        "R(Q)={:.12} dilates={:?} random_max={:.6} over {}",
        r.r_q, r.r_dilates, r.r_random_max, r.random_count
    );
    let mut rec = ExperimentRecord::new("gn_check", s, seed)?;
    rec.wall_ms = elapsed_ms(start);
    rec.extra = serde_json::to_value(&r)?;
    ctx.write("gn_check", &[rec])?;
    let mut failed = Vec::new();
    if !((r.r_q - 1.0).abs() < 1e-6) {
        failed.push("ground_state.gn_ratio_q");
    }
    if !(r.r_random_max < 1.0 + 1e-6) {
        failed.push("ground_state.gn_ratio_random");
    }
    Ok(fail(failed))
}

fn parse_modes(text: &str) -> Result<Vec<(i64, f64, f64)>> {
    text.split(',')
        .map(|m| {
            let parts: Vec<&str> = m.trim().split(':').collect();
            let bad = || anyhow!("invalid `modes` entry '{m}' (expected index:re:im)");
            if parts.len() != 3 {
                return Err(bad());
            }
            Ok((
                parts[0].parse().map_err(|_| bad())?,
                parts[1].parse().map_err(|_| bad())?,
                parts[2].parse().map_err(|_| bad())?,
            ))
        })
        .collect()
}

pub fn diff_check(s: &DiffSettings, ctx: &Ctx) -> Result<Outcome> {
    let start = Instant::now();
    let cfg = DiffConfig {
        n: s.n,
        length: s.length,
        modes: parse_modes(&s.modes)?,
        s: s.s,
        n_index: s.n_index,
        h: s.h,
        dt: s.dt,
        thresholds: Thresholds::with_k_much(s.k_much)?,
        nonlinear: s.nonlinear,
    };
    let r = run_diff_formula_check(&cfg)?;
    println!(
        "dE1/dt fd={:.8e} rhs={:.8e} rel={:.3e}",
        r.fd_e1, r.rhs_e1, r.rel_err_e1
    );
    println!(
        "dE2/dt fd={:.8e} rhs={:.8e} rel={:.3e} omega_tuples={}",
        r.fd_e2, r.rhs_e2, r.rel_err_e2, r.omega_tuples
    );
    let mut rec = ExperimentRecord::new("diff_check", s, 0)?;
    rec.s = s.s;
    rec.n_index = s.n_index;
    rec.wall_ms = elapsed_ms(start);
    rec.extra = serde_json::to_value(&r)?;
    ctx.write("diff_check", &[rec])?;
    let mut failed = Vec::new();
    if !(r.rel_err_e1 < s.tolerance) {
        failed.push("differentiation_formula.e1");
    }
    if !(r.rel_err_e2 < s.tolerance) {
        failed.push("differentiation_formula.e2");
    }
    Ok(fail(failed))
}

pub fn threshold(s: &ThresholdSettings, ctx: &Ctx) -> Result<Outcome> {
    let table = threshold_table();
    let root = threshold_root(Q64::new(7, 2));
    println!("s* = {root}");
    println!(
        "{:>6} {:>10} {:>12} {:>10} {:>10}",
        "s", "(1-s)/s", "7/2-3(1-s)/s", "poly", "admissible"
    );
    for r in &table {
        println!(
            "{:>6} {:>10} {:>12} {:>10} {:>10}",
            r.s,
            r.lambda_exponent,
            r.threshold_value,
            r.poly_exponent.as_deref().unwrap_or("-"),
            r.admissible
        );
    }
    let mut rec = ExperimentRecord::new("threshold", s, 0)?;
    rec.extra = serde_json::to_value(&table)?;
    ctx.write("threshold", &[rec])?;
    let mut failed = Vec::new();
    if root != Q64::new(6, 13) {
        failed.push("threshold_arithmetic.root");
    }
    if poly_exponent(Q64::new(1, 2)) != Some(Q64::from_integer(1)) {
        failed.push("threshold_arithmetic.poly_exponent");
    }
    Ok(fail(failed))
}

pub fn globalize(s: &GlobalizeSettings, ctx: &Ctx) -> Result<Outcome> {
    let seed = ctx.seed("globalize")?;
    let start = Instant::now();
    let profile = ProfileConfig {
        n: s.profile_n,
        length: s.profile_length,
        mass_fraction: s.mass_fraction,
        ..Default::default()
    };
    let u0 = random_profile(&profile, seed)?;
    let cfg = GlobalizeConfig {
        s: s.s,
        n_index: s.n_index,
        t_target: s.t_target,
        window: s.window,
        steps_per_window: s.steps_per_window,
        mu: s.mu,
        max_windows: s.max_windows,
    };
    let r = globalize_demo(&u0, &cfg)?;
    println!(
        "lambda={} windows {}/{} E1(0)={:.4e} E1max={:.4e} budget={:.4e} N^(7/2)={:.3e} ok={}",
        r.lambda,
        r.windows_completed,
        r.windows_planned,
        r.e1_initial,
        r.e1_max,
        r.increment_budget,
        r.n_pow_7_2,
        r.bootstrap_ok
    );
    let mut rec = ExperimentRecord::new("globalize", s, seed)?;
    rec.s = s.s;
    rec.n_index = s.n_index;
    rec.lambda = r.lambda;
    rec.t_window = s.window;
    rec.h1_iu_sup = Some(r.iu0_h1);
    rec.wall_ms = elapsed_ms(start);
    rec.extra = serde_json::to_value(&r)?;
    ctx.write("globalize", &[rec])?;
    Ok(fail(if r.bootstrap_ok {
        vec![]
    } else {
        vec!["globalize.bootstrap"]
    }))
}
