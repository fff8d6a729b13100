//! Experiment drivers with seeded, persisted records: threshold arithmetic,
//! rescaling, increment scans over `N`, differentiation-formula checks,
//! the Gagliardo-Nirenberg ratio and the windowed iteration demo.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::functionals::{
    de1_rhs, de2_rhs, dlambda_parts, e1_modified, i_spectrum, mass, ActiveModeSet, EnergyLedger,
};
use crate::grid::{
    forward_transform, homogeneous_sobolev_norm, inverse_transform, regrid, sobolev_norm_spectrum,
    Field, Grid, Spectrum,
};
use crate::multiplier::{m_value, IParams, BLEND_ID};
use crate::resonance::{sigma_tilde6_raw, Thresholds};
use crate::solver::{evolve, evolve_backward, evolve_to_end, q_profile, SolverConfig};
use crate::symbols::{sigma6_raw, SymbolValue};

/// `||Q||_2^2 = sqrt(3) pi / 2`.
pub fn ground_state_mass() -> f64 {
    3f64.sqrt() * std::f64::consts::PI / 2.0
}

// ---------------------------------------------------------------------------
// threshold arithmetic

pub type Q64 = Ratio<i64>;

/// Exponent bookkeeping of the iteration at regularity `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub s: String,
    /// `(1-s)/s`, so that `lambda ~ N^{(1-s)/s}`.
    pub lambda_exponent: String,
    /// `7/2 - 3(1-s)/s`.
    pub threshold_value: String,
    /// Root of the threshold function.
    pub root: String,
    /// Root of `2 - 3(1-s)/s`, the value for an `N^{-2}` increment.
    pub root_decay_two: String,
    /// `2s(1-s)/(13s-6)`, undefined at the root.
    pub poly_exponent: Option<String>,
    pub admissible: bool,
}

/// `decay - 3(1-s)/s`.
pub fn threshold_value(s: Q64, decay: Q64) -> Q64 {
    let one = Q64::from_integer(1);
    decay - Q64::from_integer(3) * (one - s) / s
}

/// Root of `decay - 3(1-s)/s = 0`, i.e. `s = 3 / (decay + 3)`.
pub fn threshold_root(decay: Q64) -> Q64 {
    Q64::from_integer(3) / (decay + Q64::from_integer(3))
}

pub fn poly_exponent(s: Q64) -> Option<Q64> {
    let den = Q64::from_integer(13) * s - Q64::from_integer(6);
    if den == Q64::from_integer(0) {
        return None;
    }
    Some(Q64::from_integer(2) * s * (Q64::from_integer(1) - s) / den)
}

pub fn threshold_arithmetic(s: Q64) -> ExponentReport {
    let decay = Q64::new(7, 2);
    let one = Q64::from_integer(1);
    let f = threshold_value(s, decay);
    ExponentReport {
        s: s.to_string(),
        lambda_exponent: ((one - s) / s).to_string(),
        threshold_value: f.to_string(),
        root: threshold_root(decay).to_string(),
        root_decay_two: threshold_root(Q64::from_integer(2)).to_string(),
        poly_exponent: poly_exponent(s).map(|r| r.to_string()),
        admissible: f > Q64::from_integer(0),
    }
}

/// The report at a standard list of regularities.
pub fn threshold_table() -> Vec<ExponentReport> {
    [(6, 13), (1, 2), (3, 5), (2, 3), (3, 4), (9, 10)]
        .iter()
        .map(|&(a, b)| threshold_arithmetic(Q64::new(a, b)))
        .collect()
}

// ---------------------------------------------------------------------------
// records

/// One persisted experiment row plus its full configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
    pub s: f64,
    pub n_index: f64,
    pub lambda: f64,
    pub t_window: f64,
    pub e1_inc_sup: Option<f64>,
    pub e2_inc_sup: Option<f64>,
    pub lam6_sup: Option<f64>,
    pub h1_iu_sup: Option<f64>,
    pub slope_e1: Option<f64>,
    pub slope_e2: Option<f64>,
    pub guard_frac: Option<f64>,
    pub wall_ms: u64,
    pub blend: String,
    pub config: serde_json::Value,
    pub extra: serde_json::Value,
}

/// Column order of the experiments CSV.
pub const CSV_HEADER: [&str; 14] = [
    "experiment",
    "seed",
    "s",
    "N_index",
    "lambda",
    "t_window",
    "e1_inc_sup",
    "e2_inc_sup",
    "lam6_sup",
    "h1_iu_sup",
    "slope_e1",
    "slope_e2",
    "guard_frac",
    "wall_ms",
];

#[derive(Serialize)]
struct CsvRow<'a> {
    experiment: &'a str,
    seed: u64,
    s: f64,
    #[serde(rename = "N_index")]
    n_index: f64,
    lambda: f64,
    t_window: f64,
    e1_inc_sup: Option<f64>,
    e2_inc_sup: Option<f64>,
    lam6_sup: Option<f64>,
    h1_iu_sup: Option<f64>,
    slope_e1: Option<f64>,
    slope_e2: Option<f64>,
    guard_frac: Option<f64>,
    wall_ms: u64,
}

impl ExperimentRecord {
    pub fn new(experiment: &str, config: &impl Serialize, seed: u64) -> Result<Self> {
        let config = serde_json::to_value(config)?;
        Ok(Self {
            experiment: experiment.to_string(),
            config_hash: config_hash(&config)?,
            seed,
            s: 0.0,
            n_index: 0.0,
            lambda: 1.0,
            t_window: 0.0,
            e1_inc_sup: None,
            e2_inc_sup: None,
            lam6_sup: None,
            h1_iu_sup: None,
            slope_e1: None,
            slope_e2: None,
            guard_frac: None,
            wall_ms: 0,
            blend: BLEND_ID.to_string(),
            config,
            extra: serde_json::Value::Null,
        })
    }

    /// Every floating output is finite.
    pub fn is_finite(&self) -> bool {
        let opts = [
            self.e1_inc_sup,
            self.e2_inc_sup,
            self.lam6_sup,
            self.h1_iu_sup,
            self.slope_e1,
            self.slope_e2,
            self.guard_frac,
        ];
        [self.s, self.n_index, self.lambda, self.t_window]
            .iter()
            .all(|v| v.is_finite())
            && opts.iter().flatten().all(|v| v.is_finite())
    }

    fn row(&self) -> CsvRow<'_> {
        CsvRow {
            experiment: &self.experiment,
            seed: self.seed,
            s: self.s,
            n_index: self.n_index,
            lambda: self.lambda,
            t_window: self.t_window,
            e1_inc_sup: self.e1_inc_sup,
            e2_inc_sup: self.e2_inc_sup,
            lam6_sup: self.lam6_sup,
            h1_iu_sup: self.h1_iu_sup,
            slope_e1: self.slope_e1,
            slope_e2: self.slope_e2,
            guard_frac: self.guard_frac,
            wall_ms: self.wall_ms,
        }
    }
}

/// Content hash of a configuration: SHA-256 over `config <len>\0<json>`,
/// hex encoded. `serde_json` keeps struct field order, so the JSON text is
/// canonical for a given configuration type.
pub fn config_hash(config: &serde_json::Value) -> Result<String> {
    let body = serde_json::to_string(config)?;
    let mut h = Sha256::new();
    h.update(format!("config {}\0", body.len()).as_bytes());
    h.update(body.as_bytes());
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

/// Writes the CSV table. With `include_wall_clock = false` the `wall_ms`
/// column is zero so that reruns produce identical bytes.
pub fn write_records_csv(
    records: &[ExperimentRecord],
    w: impl Write,
    include_wall_clock: bool,
) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wtr.write_record(CSV_HEADER)?;
    for r in records {
        let mut row = r.row();
        if !include_wall_clock {
            row.wall_ms = 0;
        }
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_records(
    records: &[ExperimentRecord],
    csv_path: &Path,
    json_path: &Path,
    include_wall_clock: bool,
) -> Result<()> {
    write_records_csv(records, std::fs::File::create(csv_path)?, include_wall_clock)?;
    let json = serde_json::to_string_pretty(records)?;
    std::fs::write(json_path, json)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// slope fitting

/// Least-squares line through `(log2 x, log2 y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log2 units.
    pub residual: f64,
}

pub fn fit_loglog(x: &[f64], y: &[f64]) -> Result<SlopeFit> {
    if x.len() != y.len() || x.len() < 4 {
        return Err(Error::TooFewSamples {
            required: 4,
            got: x.len().min(y.len()),
        });
    }
    if x.iter().chain(y).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::InvalidParameter {
            name: "slope data",
            reason: "log-log fit needs positive finite values".into(),
        });
    }
    let lx: Vec<f64> = x.iter().map(|v| v.log2()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.log2()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| {
            let r = b - (intercept + slope * a);
            r * r
        })
        .sum();
    Ok(SlopeFit {
        slope,
        intercept,
        residual: (rss / n).sqrt(),
    })
}

// ---------------------------------------------------------------------------
// rescaling

/// `lambda = N^{(1-s)/s}`.
pub fn lambda_for(n_index: f64, s: f64) -> f64 {
    n_index.powf((1.0 - s) / s)
}

/// Grid of the same resolution over a box `lambda` times longer, on which
/// the rescaled field has the same frequency indices as the original.
pub fn dilated_grid(g: &Grid, lambda: f64) -> Result<Grid> {
    Grid::new(g.n(), g.length() * lambda)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rescaled {
    pub field: Field,
    pub lambda: f64,
    pub params: IParams,
    pub mass_before: f64,
    pub mass_after: f64,
    /// `||d_x I u_lambda|| / (N^{1-s} lambda^{-s} ||u||_{H^s})`.
    pub derivative_constant: f64,
    pub iu_h1: f64,
}

impl Rescaled {
    pub fn mass_defect(&self) -> f64 {
        if self.mass_before == 0.0 {
            return 0.0;
        }
        (self.mass_after - self.mass_before).abs() / self.mass_before
    }
}

/// `u_lambda(x) = lambda^{-1/2} u(x / lambda)` with `lambda = N^{(1-s)/s}`,
/// the threshold placed at index `n_index` of `target`.
pub fn rescale_for_n(f: &Field, s: f64, n_index: f64, target: Grid) -> Result<Rescaled> {
    let lambda = lambda_for(n_index, s);
    let field = regrid(f, lambda, target)?;
    let params = IParams::from_index(n_index, s, &target)?;
    let sp0 = forward_transform(f)?;
    let sp = forward_transform(&field)?;
    let iu = i_spectrum(&sp, &params);
    let hs = sobolev_norm_spectrum(&sp0, s);
    let dx_iu = homogeneous_sobolev_norm(&iu, 1.0);
    let scale = params.n().powf(1.0 - s) * lambda.powf(-s) * hs;
    let mass_before = mass(f);
    let mass_after = mass(&field);
    let out = Rescaled {
        lambda,
        params,
        mass_before,
        mass_after,
        derivative_constant: if scale > 0.0 { dx_iu / scale } else { 0.0 },
        iu_h1: sobolev_norm_spectrum(&iu, 1.0),
        field,
    };
    if out.mass_defect() > 1e-6 {
        return Err(Error::InvalidParameter {
            name: "rescaling",
            reason: format!("mass changed by {:e}", out.mass_defect()),
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// profiles

/// Shape of the seeded random profile used by the increment scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileConfig {
    pub n: usize,
    pub length: f64,
    /// Highest populated frequency index.
    pub j_cap: i64,
    /// Envelope `(1 + (j/j_knee)^2)^{-decay/2}`.
    pub j_knee: f64,
    pub decay: f64,
    /// Gaussian window width in physical units.
    pub window: f64,
    /// Target mass as a fraction of the ground-state mass.
    pub mass_fraction: f64,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            n: 256,
            length: 64.0,
            j_cap: 96,
            j_knee: 6.0,
            decay: 1.25,
            window: 6.0,
            mass_fraction: 0.5,
        }
    }
}

/// Gaussian-windowed random Fourier series with a power-law envelope,
/// band-limited to `|j| <= j_cap` and scaled to the target mass.
pub fn random_profile(cfg: &ProfileConfig, seed: u64) -> Result<Field> {
    let g = Grid::new(cfg.n, cfg.length)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modes = Vec::new();
    for j in 1..=cfg.j_cap.min(g.max_index()) {
        let env = (1.0 + (j as f64 / cfg.j_knee).powi(2)).powf(-cfg.decay / 2.0);
        let (a, b): (f64, f64) = (gaussian(&mut rng), gaussian(&mut rng));
        modes.push((j, Complex64::new(a, b) * env));
    }
    let raw = inverse_transform(&Spectrum::from_modes(g, &modes)?);
    let w = cfg.window;
    let windowed: Vec<f64> = g
        .points()
        .iter()
        .zip(raw.values())
        .map(|(x, v)| v * (-x * x / (2.0 * w * w)).exp())
        .collect();
    let mut sp = forward_transform(&Field::new(g, windowed)?)?;
    for slot in 0..g.n() {
        if g.index(slot).abs() > cfg.j_cap {
            sp.coeffs_mut()[slot] = Complex64::new(0.0, 0.0);
        }
    }
    sp.enforce_hermitian();
    let f = inverse_transform(&sp);
    let m = mass(&f);
    if m == 0.0 {
        return Ok(f);
    }
    Ok(f.scaled((cfg.mass_fraction * ground_state_mass() / m).sqrt()))
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

// ---------------------------------------------------------------------------
// increment scan

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub profile: ProfileConfig,
    pub s: f64,
    pub n_list: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Window length in rescaled time.
    pub t_window: f64,
    /// Ledger samples per window (the solver takes this many steps).
    pub samples: usize,
    pub thresholds: Thresholds,
    pub mode_floor: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            profile: ProfileConfig::default(),
            s: 0.5,
            n_list: vec![8.0, 16.0, 32.0, 64.0],
            seeds: vec![1, 2, 3],
            t_window: 0.5,
            samples: 8,
            thresholds: Thresholds::default(),
            mode_floor: ActiveModeSet::DEFAULT_FLOOR,
        }
    }
}

/// Measurements of one `(N, seed)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanCell {
    pub n_index: f64,
    pub seed: u64,
    pub lambda: f64,
    pub e1_inc_sup: f64,
    pub e2_inc_sup: f64,
    pub energy_drift: f64,
    pub lam6_sup: f64,
    pub h1_iu_sup: f64,
    /// `sup_t |L6(sigma6_tilde)(t)| / ||Iu(t)||_{H^1}^6`.
    pub fixed_time_ratio: f64,
    pub ledgers: Vec<EnergyLedger>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub cells: Vec<ScanCell>,
    /// Fits of the seed-averaged increments against `N`; absent when an
    /// increment vanishes (zero or band-limited data).
    pub fit_e1: Option<SlopeFit>,
    pub fit_e2: Option<SlopeFit>,
    /// `max / min` of the seed-averaged fixed-time ratio over `N`.
    pub fixed_time_spread: f64,
    pub mean_e2_by_n: Vec<f64>,
}

fn scan_cell(base: &Field, n_index: f64, seed: u64, cfg: &ScanConfig) -> Result<ScanCell> {
    let target = dilated_grid(base.grid(), lambda_for(n_index, cfg.s))?;
    let r = rescale_for_n(base, cfg.s, n_index, target)?;
    let dt = cfg.t_window / cfg.samples as f64;
    let solver = SolverConfig {
        dt,
        t_end: cfg.t_window,
        ..SolverConfig::default()
    };
    let times: Vec<f64> = (0..=cfg.samples).map(|k| k as f64 * dt).collect();
    let history = evolve(&r.field, &solver, &times)?;
    let ledgers: Vec<EnergyLedger> = history
        .fields
        .iter()
        .zip(&history.times)
        .map(|(f, &t)| EnergyLedger::measure(f, t, &r.params, &cfg.thresholds, cfg.mode_floor))
        .collect::<Result<_>>()?;
    let l0 = &ledgers[0];
    let mut cell = ScanCell {
        n_index,
        seed,
        lambda: r.lambda,
        e1_inc_sup: 0.0,
        e2_inc_sup: 0.0,
        energy_drift: 0.0,
        lam6_sup: 0.0,
        h1_iu_sup: 0.0,
        fixed_time_ratio: 0.0,
        ledgers: Vec::new(),
    };
    for l in &ledgers {
        cell.e1_inc_sup = cell.e1_inc_sup.max((l.e1 - l0.e1).abs());
        cell.e2_inc_sup = cell.e2_inc_sup.max((l.e2 - l0.e2).abs());
        cell.energy_drift = cell.energy_drift.max((l.energy - l0.energy).abs());
        cell.lam6_sup = cell.lam6_sup.max(l.lambda6_sigma_tilde.abs());
        cell.h1_iu_sup = cell.h1_iu_sup.max(l.h1_of_iu);
        if l.h1_of_iu > 0.0 {
            cell.fixed_time_ratio = cell
                .fixed_time_ratio
                .max(l.lambda6_sigma_tilde.abs() / l.h1_of_iu.powi(6));
        }
    }
    cell.ledgers = ledgers;
    Ok(cell)
}

/// Runs every `(N, seed)` cell on the seeded random profile and fits the
/// increment slopes.
pub fn run_increment_scan(cfg: &ScanConfig) -> Result<ScanReport> {
    run_increment_scan_with(cfg, |seed| random_profile(&cfg.profile, seed))
}

/// As [`run_increment_scan`] with a caller-supplied profile per seed.
pub fn run_increment_scan_with<F>(cfg: &ScanConfig, profile: F) -> Result<ScanReport>
where
    F: Fn(u64) -> Result<Field> + Sync,
{
    cfg.thresholds.validate()?;
    if cfg.samples == 0 || !(cfg.t_window > 0.0) {
        return Err(Error::InvalidParameter {
            name: "t_window",
            reason: "window and sample count must be positive".into(),
        });
    }
    let jobs: Vec<(u64, f64)> = cfg
        .seeds
        .iter()
        .flat_map(|&seed| cfg.n_list.iter().map(move |&n| (seed, n)))
        .collect();
    let cells: Vec<Result<ScanCell>> = jobs
        .par_iter()
        .map(|&(seed, n)| {
            let base = profile(seed)?;
            scan_cell(&base, n, seed, cfg)
        })
        .collect();
    let cells: Vec<ScanCell> = cells.into_iter().collect::<Result<_>>()?;

    let mean = |f: &dyn Fn(&ScanCell) -> f64| -> Vec<f64> {
        cfg.n_list
            .iter()
            .map(|&n| {
                let v: Vec<f64> = cells.iter().filter(|c| c.n_index == n).map(f).collect();
                v.iter().sum::<f64>() / v.len().max(1) as f64
            })
            .collect()
    };
    let e1 = mean(&|c| c.e1_inc_sup);
    let e2 = mean(&|c| c.e2_inc_sup);
    let ratio = mean(&|c| c.fixed_time_ratio);
    if cfg.n_list.len() < 4 {
        return Err(Error::TooFewSamples {
            required: 4,
            got: cfg.n_list.len(),
        });
    }
    let fit_e1 = fit_loglog(&cfg.n_list, &e1).ok();
    let fit_e2 = fit_loglog(&cfg.n_list, &e2).ok();
    let rmax = ratio.iter().cloned().fold(0.0_f64, f64::max);
    let rmin = ratio.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(ScanReport {
        cells,
        fit_e1,
        fit_e2,
        fixed_time_spread: if rmin > 0.0 { rmax / rmin } else { f64::INFINITY },
        mean_e2_by_n: e2,
    })
}

impl ScanReport {
    /// One record per `(N, seed)` cell; slopes are the per-seed fits.
    pub fn records(&self, cfg: &ScanConfig) -> Result<Vec<ExperimentRecord>> {
        let mut out = Vec::new();
        for &seed in &cfg.seeds {
            let mine: Vec<&ScanCell> = self.cells.iter().filter(|c| c.seed == seed).collect();
            let ns: Vec<f64> = mine.iter().map(|c| c.n_index).collect();
            let f1 = fit_loglog(&ns, &mine.iter().map(|c| c.e1_inc_sup).collect::<Vec<_>>()).ok();
            let f2 = fit_loglog(&ns, &mine.iter().map(|c| c.e2_inc_sup).collect::<Vec<_>>()).ok();
            for c in mine {
                let mut r = ExperimentRecord::new("scan_n", cfg, seed)?;
                r.s = cfg.s;
                r.n_index = c.n_index;
                r.lambda = c.lambda;
                r.t_window = cfg.t_window;
                r.e1_inc_sup = Some(c.e1_inc_sup);
                r.e2_inc_sup = Some(c.e2_inc_sup);
                r.lam6_sup = Some(c.lam6_sup);
                r.h1_iu_sup = Some(c.h1_iu_sup);
                r.slope_e1 = f1.map(|f| f.slope);
                r.slope_e2 = f2.map(|f| f.slope);
                r.extra = serde_json::json!({
                    "energy_drift": c.energy_drift,
                    "fixed_time_ratio": c.fixed_time_ratio,
                    "averaged_slope_e1": self.fit_e1.map(|f| f.slope),
                    "averaged_slope_e2": self.fit_e2.map(|f| f.slope),
                });
                out.push(r);
            }
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// differentiation formula

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffConfig {
    pub n: usize,
    pub length: f64,
    /// Core modes `(j, coefficient)` with `j > 0`; conjugates are implied.
    pub modes: Vec<(i64, f64, f64)>,
    pub s: f64,
    pub n_index: f64,
    /// Finite-difference half step.
    pub h: f64,
    /// Solver step.
    pub dt: f64,
    pub thresholds: Thresholds,
    pub nonlinear: bool,
}

impl Default for DiffConfig {
    fn default() -> Self {
        Self {
            n: 128,
            length: 2.0 * std::f64::consts::PI,
            modes: vec![(1, 2.0, 0.4), (10, 1.2, 0.8), (12, 1.2, -0.4)],
            s: 0.5,
            n_index: 4.0,
            h: 1e-5,
            dt: 1e-5,
            thresholds: Thresholds::with_k_much(4.0).expect("valid thresholds"),
            nonlinear: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffReport {
    pub fd_e1: f64,
    pub rhs_e1: f64,
    pub rel_err_e1: f64,
    pub fd_e2: f64,
    pub rhs_e2: f64,
    pub rel_err_e2: f64,
    pub abs_err_e1: f64,
    pub abs_err_e2: f64,
    /// Sextic and decic parts of the first right-hand side.
    pub rhs_e1_parts: (f64, f64),
    pub rhs_e2_parts: (f64, f64),
    pub omega_tuples: usize,
}

/// `|fd - rhs| / |fd|`.
fn rel_err(fd: f64, rhs: f64) -> f64 {
    if fd == rhs {
        0.0
    } else {
        (fd - rhs).abs() / fd.abs()
    }
}

/// `L_6(M)` on an evolved spectrum keeping only tuples with at most one
/// entry outside the core set; these carry every term of first order in
/// time around the core data.
fn lambda6_near_core(
    m: &dyn Fn(&[i64]) -> f64,
    sp: &Spectrum,
    core: &ActiveModeSet,
) -> f64 {
    let idx = core.indices();
    let c = idx.len();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut t = [0i64; 6];
    let mut pos = [0usize; 5];
    loop {
        for q in 0..5 {
            t[q] = idx[pos[q]];
        }
        let last = -t[..5].iter().sum::<i64>();
        if sp.grid().slot(last).is_some() {
            t[5] = last;
            let weight = if idx.binary_search(&last).is_ok() { 1.0 } else { 6.0 };
            let mut prod = sp.coeff(last);
            for &j in &t[..5] {
                prod *= sp.coeff(j);
            }
            acc += prod * (weight * m(&t));
        }
        let mut d = 0;
        loop {
            if d == 5 {
                return acc.re * sp.grid().length().powi(-5);
            }
            pos[d] += 1;
            if pos[d] < c {
                break;
            }
            pos[d] = 0;
            d += 1;
        }
    }
}

pub fn run_diff_formula_check(cfg: &DiffConfig) -> Result<DiffReport> {
    let g = Grid::new(cfg.n, cfg.length)?;
    let p = IParams::from_index(cfg.n_index, cfg.s, &g)?;
    let th = cfg.thresholds;
    th.validate()?;
    if cfg.modes.len() > 3 {
        return Err(Error::ModeBudget {
            k: 10,
            modes: 2 * cfg.modes.len(),
            limit: 6,
        });
    }
    let max_core = cfg.modes.iter().map(|m| m.0.abs()).max().unwrap_or(0);
    if 5 * max_core > g.max_index() {
        return Err(Error::InvalidParameter {
            name: "modes",
            reason: "five-fold sums of core modes must stay on the grid".into(),
        });
    }
    let modes: Vec<(i64, Complex64)> = cfg
        .modes
        .iter()
        .map(|&(j, a, b)| (j, Complex64::new(a, b)))
        .collect();
    let sp0 = Spectrum::from_modes(g, &modes)?;
    let f0 = inverse_transform(&sp0);
    let core = ActiveModeSet::from_spectrum(&sp0, 1e-14);
    let solver = SolverConfig {
        dt: cfg.dt,
        t_end: cfg.h,
        nonlinear: cfg.nonlinear,
        ..SolverConfig::default()
    };
    let plus = evolve_to_end(&f0, &solver)?;
    let minus = evolve_backward(&f0, &solver)?;
    let sp_plus = forward_transform(&plus)?;
    let sp_minus = forward_transform(&minus)?;

    let dk = g.dk();
    let e1p = e1_modified(&plus, &p, -1.0)?;
    let e1m = e1_modified(&minus, &p, -1.0)?;
    let fd_e1 = (e1p - e1m) / (2.0 * cfg.h);

    let st = |t: &[i64]| sigma_tilde6_raw(t.try_into().unwrap(), dk, &p, &th);
    let fd_corr = (lambda6_near_core(&st, &sp_plus, &core)
        - lambda6_near_core(&st, &sp_minus, &core))
        / (2.0 * cfg.h);
    let fd_e2 = fd_e1 + fd_corr;

    let mu = if cfg.nonlinear { -1.0 } else { 0.0 };
    let s2 = |t: &[i64]| {
        let (a, b) = (t[0] as f64 * dk, t[1] as f64 * dk);
        SymbolValue::real(-0.5 * m_value(a, &p) * m_value(b, &p) * a * b)
    };
    let s6 = |t: &[i64]| SymbolValue::real(sigma6_raw(t, dk, &p));
    let (l2_lin, l2_non) = dlambda_parts(2, &s2, &sp0, &core, mu)?;
    let (l6_lin, l6_non) = dlambda_parts(6, &s6, &sp0, &core, mu)?;
    let rhs_e1_parts = (l2_lin + l2_non + l6_lin, l6_non);
    let rhs_e1 = if cfg.nonlinear {
        de1_rhs(&sp0, &p, &core)?
    } else {
        l2_lin + l6_lin
    };
    let (rhs_e2, rhs_e2_parts) = if cfg.nonlinear {
        let total = de2_rhs(&sp0, &p, &th, &core)?;
        let ten = total
            - crate::functionals::lambda_k(
                6,
                &|t: &[i64]| {
                    let s6: &[i64; 6] = t.try_into().unwrap();
                    if crate::resonance::chi_omega(s6, dk, &p, &th) {
                        SymbolValue::default()
                    } else {
                        SymbolValue::imag(crate::symbols::weighted_cubes(t, dk, &p) / 6.0)
                    }
                },
                &sp0,
                &core,
            )?;
        (total, (total - ten, ten))
    } else {
        // free flow: only the linear terms L6(M6^1 + sigma6_tilde alpha6) remain
        let lin = crate::functionals::lambda_k(
            6,
            &|t: &[i64]| {
                let s6: &[i64; 6] = t.try_into().unwrap();
                let a = crate::symbols::sum_cubes(t) as f64 * dk * dk * dk;
                SymbolValue::imag((sigma6_raw(t, dk, &p) + sigma_tilde6_raw(s6, dk, &p, &th)) * a)
            },
            &sp0,
            &core,
        )?;
        (l2_lin + lin, (l2_lin + lin, 0.0))
    };
    let omega_tuples = count_omega_tuples(&core, dk, &p, &th);
    Ok(DiffReport {
        fd_e1,
        rhs_e1,
        rel_err_e1: rel_err(fd_e1, rhs_e1),
        fd_e2,
        rhs_e2,
        rel_err_e2: rel_err(fd_e2, rhs_e2),
        abs_err_e1: (fd_e1 - rhs_e1).abs(),
        abs_err_e2: (fd_e2 - rhs_e2).abs(),
        rhs_e1_parts,
        rhs_e2_parts,
        omega_tuples,
    })
}

/// Number of ordered sextic tuples of the core set lying in the guarded union.
fn count_omega_tuples(core: &ActiveModeSet, dk: f64, p: &IParams, th: &Thresholds) -> usize {
    let idx = core.indices();
    let mut count = 0;
    let c = idx.len();
    let mut pos = [0usize; 5];
    loop {
        let mut t = [0i64; 6];
        for q in 0..5 {
            t[q] = idx[pos[q]];
        }
        t[5] = -t[..5].iter().sum::<i64>();
        if idx.binary_search(&t[5]).is_ok() && crate::resonance::chi_omega(&t, dk, p, th) {
            count += 1;
        }
        let mut d = 0;
        loop {
            if d == 5 {
                return count;
            }
            pos[d] += 1;
            if pos[d] < c {
                break;
            }
            pos[d] = 0;
            d += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Gagliardo-Nirenberg

/// `||u||_6^6 / (3 (||u||_2 / ||Q||_2)^4 ||u_x||_2^2)`.
pub fn gn_ratio(f: &Field) -> Result<f64> {
    let sp = forward_transform(f)?;
    let l6 = f.values().iter().map(|v| v.powi(6)).sum::<f64>() * f.grid().dx();
    let m = mass(f);
    let dx2 = homogeneous_sobolev_norm(&sp, 1.0).powi(2);
    let den = 3.0 * (m / ground_state_mass()).powi(2) * dx2;
    if den == 0.0 {
        return Err(Error::ZeroField);
    }
    Ok(l6 / den)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnReport {
    pub r_q: f64,
    pub r_dilates: Vec<(f64, f64)>,
    pub random_count: usize,
    pub r_random_max: f64,
    pub ok: bool,
}

/// Random Schwartz-like field: a few modulated Gaussians.
pub fn random_schwartz(g: Grid, rng: &mut ChaCha8Rng) -> Result<Field> {
    let bumps = rng.gen_range(1..=4);
    let params: Vec<(f64, f64, f64, f64, f64)> = (0..bumps)
        .map(|_| {
            (
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-0.15..0.15) * g.length(),
                rng.gen_range(0.4..4.0),
                rng.gen_range(0.0..3.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    Field::from_fn(g, |x| {
        params
            .iter()
            .map(|&(a, c, w, k, ph)| a * (-(x - c) * (x - c) / (2.0 * w * w)).exp() * (k * x + ph).cos())
            .sum()
    })
}

pub fn run_gn_check(grid: Grid, n_random: usize, seed: u64) -> Result<GnReport> {
    let q = crate::solver::ground_state(grid)?;
    let r_q = gn_ratio(&q)?;
    // dilates resolved on a long, fine box
    let fine = Grid::new(8192, 256.0)?;
    let mut r_dilates = Vec::new();
    for &lam in &[0.25_f64, 4.0] {
        let f = Field::from_fn(fine, |x| lam.sqrt() * q_profile(lam * x))?;
        r_dilates.push((lam, gn_ratio(&f)?));
    }
    let ratios: Vec<f64> = (0..n_random)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let f = random_schwartz(grid, &mut rng)?;
            gn_ratio(&f)
        })
        .collect::<Result<_>>()?;
    let r_random_max = ratios.iter().cloned().fold(0.0_f64, f64::max);
    let ok = (r_q - 1.0).abs() < 1e-6
        && r_dilates.iter().all(|(_, r)| (r - 1.0).abs() < 1e-6)
        && r_random_max < 1.0 + 1e-6;
    Ok(GnReport {
        r_q,
        r_dilates,
        random_count: n_random,
        r_random_max,
        ok,
    })
}

// ---------------------------------------------------------------------------
// windowed iteration

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalizeConfig {
    pub s: f64,
    pub n_index: f64,
    /// Horizon in original time; the rescaled horizon is `lambda^3` times longer.
    pub t_target: f64,
    /// Window length in rescaled time.
    pub window: f64,
    pub steps_per_window: usize,
    pub mu: f64,
    pub max_windows: usize,
}

impl Default for GlobalizeConfig {
    fn default() -> Self {
        Self {
            s: 0.5,
            n_index: 32.0,
            t_target: 0.0,
            window: 0.5,
            steps_per_window: 4,
            mu: -1.0,
            max_windows: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalizeReport {
    pub lambda: f64,
    pub iu0_h1: f64,
    pub windows_planned: usize,
    pub windows_completed: usize,
    pub e1_initial: f64,
    pub e1_max: f64,
    /// Sum of the measured per-window increments of `E1`.
    pub increment_budget: f64,
    pub bootstrap_ok: bool,
    pub first_violation: Option<usize>,
    pub n_pow_7_2: f64,
}

/// Rescales `u0`, then marches windows of fixed length, checking after
/// each that `E1 <= 2 E1(0) + (sum of measured increments)`.
pub fn globalize_demo(u0: &Field, cfg: &GlobalizeConfig) -> Result<GlobalizeReport> {
    if cfg.mu == -1.0 && mass(u0) >= ground_state_mass() {
        return Err(Error::InvalidParameter {
            name: "u0",
            reason: "focusing runs need mass below the ground state".into(),
        });
    }
    let lambda = lambda_for(cfg.n_index, cfg.s);
    let target = dilated_grid(u0.grid(), lambda)?;
    let r = rescale_for_n(u0, cfg.s, cfg.n_index, target)?;
    let horizon = cfg.t_target * lambda.powi(3);
    let planned = ((horizon / cfg.window) - 1e-9).ceil().max(0.0) as usize;
    let planned = planned.min(cfg.max_windows);
    let solver = SolverConfig {
        dt: cfg.window / cfg.steps_per_window.max(1) as f64,
        t_end: cfg.window,
        mu: cfg.mu,
        ..SolverConfig::default()
    };
    let mut u = r.field.clone();
    let e1_initial = e1_modified(&u, &r.params, cfg.mu)?;
    let mut prev = e1_initial;
    let mut report = GlobalizeReport {
        lambda,
        iu0_h1: r.iu_h1,
        windows_planned: planned,
        windows_completed: 0,
        e1_initial,
        e1_max: e1_initial,
        increment_budget: 0.0,
        bootstrap_ok: true,
        first_violation: None,
        n_pow_7_2: cfg.n_index.powf(3.5),
    };
    for w in 0..planned {
        u = evolve_to_end(&u, &solver)?;
        let e1 = e1_modified(&u, &r.params, cfg.mu)?;
        report.increment_budget += (e1 - prev).abs();
        prev = e1;
        report.e1_max = report.e1_max.max(e1);
        report.windows_completed = w + 1;
        if e1 > 2.0 * e1_initial.abs() + report.increment_budget {
            report.bootstrap_ok = false;
            report.first_violation = Some(w);
            break;
        }
    }
    Ok(report)
}

/// Wall-clock helper for records.
pub fn elapsed_ms(start: Instant) -> u64 {
    start.elapsed().as_millis() as u64
}
