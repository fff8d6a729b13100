//! Integrating-factor RK4 for `u_t + u_xxx = mu (u^5)_x` on a periodic box.
//!
//! The Airy part is integrated exactly by the phase `exp(i xi^3 t)`; the
//! quintic is formed on a zero-padded grid so that no product mode aliases
//! back onto the retained band.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::Fft;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{energy_spectrum, kinetic, mass};
use crate::grid::{forward_plan, forward_transform, inverse_plan, power_integral, Field, Grid};

/// Time-stepping parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    /// `-1` focusing, `+1` defocusing.
    pub mu: f64,
    pub dealias_factor: usize,
    /// Abort once `sup |u|` exceeds this.
    pub blowup_cap: f64,
    /// `false` drops the quintic (free Airy flow).
    pub nonlinear: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            t_end: 1.0,
            mu: -1.0,
            dealias_factor: 3,
            blowup_cap: 1e3,
            nonlinear: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: format!("must be positive, got {}", self.dt),
            });
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "t_end",
                reason: format!("must be nonnegative, got {}", self.t_end),
            });
        }
        if self.mu != 1.0 && self.mu != -1.0 {
            return Err(Error::InvalidParameter {
                name: "mu",
                reason: format!("must be +1 or -1, got {}", self.mu),
            });
        }
        if self.dealias_factor < 3 {
            return Err(Error::InvalidParameter {
                name: "dealias_factor",
                reason: format!("must be at least 3 for a quintic, got {}", self.dealias_factor),
            });
        }
        if !(self.blowup_cap > 0.0) {
            return Err(Error::InvalidParameter {
                name: "blowup_cap",
                reason: "must be positive".into(),
            });
        }
        Ok(())
    }
}

/// `Q(x) = (3 sech^2(2x))^{1/4}`, the positive solution of `Q'' + Q^5 = Q`.
pub fn q_profile(x: f64) -> f64 {
    3f64.powf(0.25) * (1.0 / (2.0 * x).cosh()).sqrt()
}

/// Samples the ground state centred in the box.
pub fn ground_state(g: Grid) -> Result<Field> {
    let edge = q_profile(0.5 * g.length());
    if edge >= 1e-12 {
        return Err(Error::BoxTooSmall { edge });
    }
    Field::from_fn(g, q_profile)
}

/// Reusable stepping workspace. Coefficients are stored in plain DFT
/// normalization `u(x_m) = sum_j c_j exp(2 pi i j m / n)`.
pub struct Stepper {
    grid: Grid,
    cfg: SolverConfig,
    xi: Vec<f64>,
    phase_full: Vec<Complex64>,
    phase_half: Vec<Complex64>,
    fwd_n: Arc<dyn Fft<f64>>,
    inv_n: Arc<dyn Fft<f64>>,
    fwd_p: Arc<dyn Fft<f64>>,
    inv_p: Arc<dyn Fft<f64>>,
    padded: Vec<Complex64>,
    last_sup: f64,
}

impl Stepper {
    pub fn new(grid: Grid, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let n = grid.n();
        let p = cfg.dealias_factor * n;
        let xi: Vec<f64> = (0..n).map(|s| grid.wavenumber(s)).collect();
        let phase = |h: f64| -> Vec<Complex64> {
            xi.iter()
                .map(|&k| Complex64::from_polar(1.0, k * k * k * h))
                .collect()
        };
        Ok(Self {
            grid,
            cfg,
            phase_full: phase(cfg.dt),
            phase_half: phase(0.5 * cfg.dt),
            xi,
            fwd_n: forward_plan(n),
            inv_n: inverse_plan(n),
            fwd_p: forward_plan(p),
            inv_p: inverse_plan(p),
            padded: vec![Complex64::new(0.0, 0.0); p],
            last_sup: 0.0,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// Largest `|u|` seen on the padded grid during the last step.
    pub fn last_sup(&self) -> f64 {
        self.last_sup
    }

    /// Plain-DFT coefficients of a field.
    pub fn coefficients(&self, f: &Field) -> Result<Vec<Complex64>> {
        self.grid.check_same(f.grid())?;
        let n = self.grid.n();
        let mut c: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fwd_n.process(&mut c);
        let inv = 1.0 / n as f64;
        for v in c.iter_mut() {
            *v *= inv;
        }
        c[n / 2] = Complex64::new(0.0, 0.0);
        Ok(c)
    }

    pub fn field(&self, c: &[Complex64]) -> Field {
        let mut buf = c.to_vec();
        self.inv_n.process(&mut buf);
        Field::new(self.grid, buf.into_iter().map(|z| z.re).collect())
            .expect("finite coefficients give finite samples")
    }

    /// `mu i xi (u^5)^` evaluated without aliasing.
    fn nonlinear(&mut self, c: &[Complex64], out: &mut [Complex64]) {
        let n = self.grid.n();
        let p = self.padded.len();
        if !self.cfg.nonlinear {
            out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            return;
        }
        self.padded.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        let half = n / 2;
        for s in 0..half {
            self.padded[s] = c[s];
        }
        for s in half + 1..n {
            self.padded[p - n + s] = c[s];
        }
        self.inv_p.process(&mut self.padded);
        let mut sup = 0.0_f64;
        for v in self.padded.iter_mut() {
            let u = v.re;
            sup = sup.max(u.abs());
            let u2 = u * u;
            *v = Complex64::new(u2 * u2 * u, 0.0);
        }
        self.last_sup = self.last_sup.max(sup);
        self.fwd_p.process(&mut self.padded);
        let inv = 1.0 / p as f64;
        let mu = self.cfg.mu;
        for s in 0..n {
            let src = if s < half {
                s
            } else if s == half {
                out[s] = Complex64::new(0.0, 0.0);
                continue;
            } else {
                p - n + s
            };
            out[s] = Complex64::new(0.0, mu * self.xi[s]) * self.padded[src] * inv;
        }
    }

    /// One IFRK4 step in place.
    pub fn step(&mut self, c: &mut [Complex64]) {
        let n = c.len();
        let dt = self.cfg.dt;
        self.last_sup = 0.0;
        let mut k1 = vec![Complex64::new(0.0, 0.0); n];
        let mut k2 = k1.clone();
        let mut k3 = k1.clone();
        let mut k4 = k1.clone();
        let mut tmp = k1.clone();

        self.nonlinear(c, &mut k1);
        for s in 0..n {
            tmp[s] = self.phase_half[s] * (c[s] + 0.5 * dt * k1[s]);
        }
        self.nonlinear(&tmp, &mut k2);
        for s in 0..n {
            tmp[s] = self.phase_half[s] * c[s] + 0.5 * dt * k2[s];
        }
        self.nonlinear(&tmp, &mut k3);
        for s in 0..n {
            tmp[s] = self.phase_full[s] * c[s] + dt * self.phase_half[s] * k3[s];
        }
        self.nonlinear(&tmp, &mut k4);
        for s in 0..n {
            c[s] = self.phase_full[s] * c[s]
                + dt / 6.0
                    * (self.phase_full[s] * k1[s]
                        + 2.0 * self.phase_half[s] * (k2[s] + k3[s])
                        + k4[s]);
        }
        enforce_real(c);
    }

    /// Steps until `t + dt` would pass `t_stop`, then finishes with equal
    /// substeps so that `t_stop` is hit exactly.
    pub fn advance(&mut self, c: &mut [Complex64], t: f64, t_stop: f64) -> Result<()> {
        let span = t_stop - t;
        if span <= 0.0 {
            return Ok(());
        }
        let steps = (span / self.cfg.dt - 1e-9).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        if (h - self.cfg.dt).abs() > 1e-15 * self.cfg.dt {
            let mut cfg = self.cfg;
            cfg.dt = h;
            let saved = self.cfg;
            *self = Stepper::new(self.grid, cfg)?;
            let result = self.run_steps(c, t, steps);
            *self = Stepper::new(self.grid, saved)?;
            return result;
        }
        self.run_steps(c, t, steps)
    }

    fn run_steps(&mut self, c: &mut [Complex64], t: f64, steps: usize) -> Result<()> {
        for k in 0..steps {
            self.step(c);
            let sup = self.last_sup;
            let bad = c.iter().any(|v| !(v.re.is_finite() && v.im.is_finite()));
            if bad || sup > self.cfg.blowup_cap {
                return Err(Error::BlowUp {
                    t: t + (k + 1) as f64 * self.cfg.dt,
                    sup: if bad { f64::INFINITY } else { sup },
                    cap: self.cfg.blowup_cap,
                });
            }
        }
        Ok(())
    }
}

/// Hermitian projection with the Nyquist mode removed.
fn enforce_real(c: &mut [Complex64]) {
    let n = c.len();
    c[0].im = 0.0;
    c[n / 2] = Complex64::new(0.0, 0.0);
    for s in 1..n / 2 {
        let avg = 0.5 * (c[s] + c[n - s].conj());
        c[s] = avg;
        c[n - s] = avg.conj();
    }
}

/// A single time step.
pub fn step(f: &Field, cfg: &SolverConfig) -> Result<Field> {
    let mut st = Stepper::new(*f.grid(), *cfg)?;
    let mut c = st.coefficients(f)?;
    st.run_steps(&mut c, 0.0, 1)?;
    Ok(st.field(&c))
}

/// Snapshots of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    pub grid: Grid,
    pub times: Vec<f64>,
    pub fields: Vec<Field>,
}

/// Evolves `f` to each of `sample_times` (nondecreasing, within
/// `[0, t_end]`), returning the snapshots; time 0 is included only if listed.
pub fn evolve(f: &Field, cfg: &SolverConfig, sample_times: &[f64]) -> Result<History> {
    let mut st = Stepper::new(*f.grid(), *cfg)?;
    let mut c = st.coefficients(f)?;
    let mut t = 0.0;
    let mut history = History {
        grid: *f.grid(),
        times: Vec::with_capacity(sample_times.len()),
        fields: Vec::with_capacity(sample_times.len()),
    };
    for &ts in sample_times {
        if !(ts >= t && ts <= cfg.t_end + 1e-12) {
            return Err(Error::InvalidParameter {
                name: "sample_times",
                reason: format!("{ts} is out of order or beyond t_end={}", cfg.t_end),
            });
        }
        st.advance(&mut c, t, ts)?;
        t = ts;
        history.times.push(ts);
        history.fields.push(st.field(&c));
    }
    Ok(history)
}

/// Evolves to `t_end` and returns the final field.
pub fn evolve_to_end(f: &Field, cfg: &SolverConfig) -> Result<Field> {
    let h = evolve(f, cfg, &[cfg.t_end])?;
    Ok(h.fields.into_iter().next().unwrap())
}

/// `u(-t)` from `u(0)` via the symmetry `u(x,t) -> u(-x,-t)`.
pub fn evolve_backward(f: &Field, cfg: &SolverConfig) -> Result<Field> {
    Ok(evolve_to_end(&f.reflected(), cfg)?.reflected())
}

/// Largest relative drifts of mass and energy over a history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub mass0: f64,
    pub energy0: f64,
    /// `max |M(t) - M(0)| / M(0)`.
    pub mass_drift: f64,
    /// `max |E(t) - E(0)| / (1/2 ||u_x(0)||^2 + 1/6 ||u(0)||_6^6)`.
    pub energy_drift: f64,
}

pub fn conservation_check(history: &History, mu: f64) -> Result<DriftReport> {
    let first = history.fields.first().ok_or(Error::TooFewSamples {
        required: 1,
        got: 0,
    })?;
    let sp0 = forward_transform(first)?;
    let mass0 = mass(first);
    let energy0 = energy_spectrum(&sp0, mu);
    let scale = kinetic(&sp0) + power_integral(&sp0, 6) / 6.0;
    let mut report = DriftReport {
        mass0,
        energy0,
        mass_drift: 0.0,
        energy_drift: 0.0,
    };
    for f in &history.fields {
        let sp = forward_transform(f)?;
        if mass0 > 0.0 {
            report.mass_drift = report.mass_drift.max((mass(f) - mass0).abs() / mass0);
        }
        if scale > 0.0 {
            report.energy_drift = report
                .energy_drift
                .max((energy_spectrum(&sp, mu) - energy0).abs() / scale);
        }
    }
    Ok(report)
}

const MAGIC: &[u8; 8] = b"GKDVHIST";

/// Binary layout: magic, `u64 n`, `f64 L`, `u64 count`, then per snapshot
/// `f64 t` followed by `n` samples; all little endian.
pub fn write_history_bin(history: &History, path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(history.grid.n() as u64).to_le_bytes())?;
    w.write_all(&history.grid.length().to_le_bytes())?;
    w.write_all(&(history.times.len() as u64).to_le_bytes())?;
    for (t, f) in history.times.iter().zip(&history.fields) {
        w.write_all(&t.to_le_bytes())?;
        for v in f.values() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_history_bin(path: &Path) -> Result<History> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Io("not a history file".into()));
    }
    let mut b8 = [0u8; 8];
    let mut next = |r: &mut BufReader<std::fs::File>| -> Result<[u8; 8]> {
        r.read_exact(&mut b8)?;
        Ok(b8)
    };
    let n = u64::from_le_bytes(next(&mut r)?) as usize;
    let length = f64::from_le_bytes(next(&mut r)?);
    let count = u64::from_le_bytes(next(&mut r)?) as usize;
    let grid = Grid::new(n, length)?;
    let mut history = History {
        grid,
        times: Vec::with_capacity(count),
        fields: Vec::with_capacity(count),
    };
    for _ in 0..count {
        history.times.push(f64::from_le_bytes(next(&mut r)?));
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            values.push(f64::from_le_bytes(next(&mut r)?));
        }
        history.fields.push(Field::new(grid, values)?);
    }
    Ok(history)
}

/// CSV layout: a `# n=<n> L=<L>` line, a header `t,u0,...`, one row per snapshot.
pub fn write_history_csv(history: &History, path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "# n={} L={}", history.grid.n(), history.grid.length())?;
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["t".to_string()];
    header.extend((0..history.grid.n()).map(|m| format!("u{m}")));
    wtr.write_record(&header)?;
    for (t, f) in history.times.iter().zip(&history.fields) {
        let mut row = vec![format!("{t:e}")];
        row.extend(f.values().iter().map(|v| format!("{v:e}")));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_history_csv(path: &Path) -> Result<History> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut first = String::new();
    r.read_line(&mut first)?;
    let parse = |key: &str| -> Result<f64> {
        first
            .split_whitespace()
            .find_map(|tok| tok.strip_prefix(key))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Io(format!("missing {key} in history header")))
    };
    let grid = Grid::new(parse("n=")? as usize, parse("L=")?)?;
    let mut rdr = csv::Reader::from_reader(r);
    let mut history = History {
        grid,
        times: vec![],
        fields: vec![],
    };
    for rec in rdr.records() {
        let rec = rec?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::Io(e.to_string())))
            .collect::<Result<_>>()?;
        history.times.push(vals[0]);
        history.fields.push(Field::new(grid, vals[1..].to_vec())?);
    }
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        let mut c = SolverConfig::default();
        assert!(c.validate().is_ok());
        c.dt = 0.0;
        assert!(matches!(c.validate(), Err(Error::InvalidParameter { name: "dt", .. })));
        let c = SolverConfig {
            dealias_factor: 2,
            ..SolverConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn ground_state_peak_and_box_check() {
        let g = Grid::new(256, 64.0).unwrap();
        let q = ground_state(g).unwrap();
        assert!((q.sup_norm() - 3f64.powf(0.25)).abs() < 1e-15);
        assert!(matches!(
            ground_state(Grid::new(256, 20.0).unwrap()),
            Err(Error::BoxTooSmall { .. })
        ));
    }

    #[test]
    fn zero_stays_zero() {
        let g = Grid::new(64, 20.0).unwrap();
        let cfg = SolverConfig {
            t_end: 0.1,
            dt: 0.01,
            ..SolverConfig::default()
        };
        let out = evolve_to_end(&Field::zeros(g), &cfg).unwrap();
        assert_eq!(out.sup_norm(), 0.0);
    }

    #[test]
    fn blowup_cap_triggers() {
        let g = Grid::new(64, 20.0).unwrap();
        let f = Field::from_fn(g, |x| 5.0 * (-x * x).exp()).unwrap();
        let cfg = SolverConfig {
            t_end: 0.01,
            dt: 0.001,
            blowup_cap: 1.0,
            ..SolverConfig::default()
        };
        assert!(matches!(evolve_to_end(&f, &cfg), Err(Error::BlowUp { .. })));
    }

    #[test]
    fn history_round_trips() {
        let g = Grid::new(16, 5.0).unwrap();
        let f = Field::from_fn(g, |x| (x * 0.3).sin()).unwrap();
        let h = History {
            grid: g,
            times: vec![0.0, 0.5],
            fields: vec![f.clone(), f.scaled(2.0)],
        };
        let dir = tempfile::tempdir().unwrap();
        let pb = dir.path().join("h.bin");
        write_history_bin(&h, &pb).unwrap();
        assert_eq!(read_history_bin(&pb).unwrap(), h);
        let pc = dir.path().join("h.csv");
        write_history_csv(&h, &pc).unwrap();
        assert_eq!(read_history_csv(&pc).unwrap(), h);
    }
}
