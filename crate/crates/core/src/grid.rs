//! Periodic collocation grids, discrete Fourier transforms and the Fourier
//! multipliers built on them (fractional derivatives, Bessel potentials,
//! Sobolev norms, spectral regridding).
//!
//! The box is `[-L/2, L/2)` sampled at `n` points. Frequencies are carried
//! as integer indices `j` with `xi_j = 2 pi j / L`, and the transform is
//! normalized to approximate the continuum transform:
//!
//! ```text
//! u_hat(j) = dx * sum_m u(x_m) exp(-i xi_j x_m)
//! u(x_m)   = (1/L) * sum_j u_hat(j) exp(i xi_j x_m)
//! ```

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn forward_plan(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

pub(crate) fn inverse_plan(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(len))
}

/// Uniform periodic grid on `[-L/2, L/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    length: f64,
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "point count must be a power of two >= 16, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "box length must be positive, got {length}"
            )));
        }
        Ok(Self { n, length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Frequency spacing `2 pi / L`.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Largest non-Nyquist frequency index.
    pub fn max_index(&self) -> i64 {
        self.n as i64 / 2 - 1
    }

    /// Frequency index stored in FFT slot `slot`.
    pub fn index(&self, slot: usize) -> i64 {
        let half = self.n / 2;
        if slot < half {
            slot as i64
        } else {
            slot as i64 - self.n as i64
        }
    }

    /// FFT slot holding frequency index `j`, if representable.
    pub fn slot(&self, j: i64) -> Option<usize> {
        let half = self.n as i64 / 2;
        if j >= -half && j < half {
            Some(j.rem_euclid(self.n as i64) as usize)
        } else {
            None
        }
    }

    pub fn wavenumber(&self, slot: usize) -> f64 {
        self.dk() * self.index(slot) as f64
    }

    pub fn x(&self, m: usize) -> f64 {
        -0.5 * self.length + m as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|m| self.x(m)).collect()
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!(
                "n={} L={} vs n={} L={}",
                self.n, self.length, other.n, other.length
            )));
        }
        Ok(())
    }
}

/// Real samples of a function on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.n()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.points().into_iter().map(f).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// Reflection `u(x) -> u(-x)` on the grid (exact for the centered box;
    /// the point `-L/2` maps to itself by periodicity).
    pub fn reflected(&self) -> Field {
        let n = self.grid.n();
        let values = (0..n).map(|m| self.values[(n - m) % n]).collect();
        Field {
            grid: self.grid,
            values,
        }
    }
}

/// Fourier coefficients in FFT slot order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n() {
            return Err(Error::GridMismatch(format!(
                "{} coefficients for a grid of {} points",
                coeffs.len(),
                grid.n()
            )));
        }
        if let Some(index) = coeffs.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, coeffs })
    }

    /// Builds a real-field spectrum from `(index, coefficient)` pairs with
    /// nonnegative indices; the conjugate modes are filled in.
    pub fn from_modes(grid: Grid, modes: &[(i64, Complex64)]) -> Result<Self> {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.n()];
        for &(j, c) in modes {
            if j < 0 || j > grid.max_index() {
                return Err(Error::InvalidParameter {
                    name: "mode index",
                    reason: format!("{j} outside 0..={}", grid.max_index()),
                });
            }
            if j == 0 {
                coeffs[0] += Complex64::new(c.re, 0.0);
            } else {
                coeffs[grid.slot(j).unwrap()] += c;
                coeffs[grid.slot(-j).unwrap()] += c.conj();
            }
        }
        Spectrum::new(grid, coeffs)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient at frequency index `j` (zero when not representable).
    pub fn coeff(&self, j: i64) -> Complex64 {
        self.grid
            .slot(j)
            .map(|s| self.coeffs[s])
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Largest `|u_hat(j) - conj(u_hat(-j))|` relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.coeffs.iter().fold(0.0_f64, |a, c| a.max(c.norm()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0_f64;
        for slot in 0..self.grid.n() {
            let j = self.grid.index(slot);
            if j == -(self.grid.n() as i64) / 2 {
                worst = worst.max(self.coeffs[slot].im.abs());
                continue;
            }
            let mirror = self.coeff(-j).conj();
            worst = worst.max((self.coeffs[slot] - mirror).norm());
        }
        worst / scale
    }

    /// Projects onto Hermitian-symmetric spectra and zeroes the Nyquist mode.
    pub fn enforce_hermitian(&mut self) {
        let n = self.grid.n();
        self.coeffs[n / 2] = Complex64::new(0.0, 0.0);
        self.coeffs[0].im = 0.0;
        for slot in 1..n / 2 {
            let mirror = n - slot;
            let avg = 0.5 * (self.coeffs[slot] + self.coeffs[mirror].conj());
            self.coeffs[slot] = avg;
            self.coeffs[mirror] = avg.conj();
        }
    }

    /// Squared L2 norm via Parseval: `(1/L) sum |u_hat|^2`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() / self.grid.length()
    }

    /// Applies a real radial multiplier given as a function of the wavenumber.
    pub fn map_radial(&self, symbol: impl Fn(f64) -> f64) -> Spectrum {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(slot, c)| c * symbol(self.grid.wavenumber(slot)))
            .collect();
        Spectrum {
            grid: self.grid,
            coeffs,
        }
    }

    /// Samples the trigonometric interpolant on the refined grid of
    /// `pad * n` points over the same box.
    pub fn padded_values(&self, pad: usize) -> Vec<f64> {
        let n = self.grid.n();
        let big = pad * n;
        let mut buf = vec![Complex64::new(0.0, 0.0); big];
        for slot in 0..n {
            let j = self.grid.index(slot);
            let c = self.coeffs[slot];
            if j == -(n as i64) / 2 {
                if pad == 1 {
                    buf[slot] += c;
                } else {
                    // split the Nyquist mode symmetrically
                    buf[(big as i64 + j) as usize] += 0.5 * c;
                    buf[(-j) as usize] += 0.5 * c;
                }
                continue;
            }
            let sign = if j.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            buf[j.rem_euclid(big as i64) as usize] += c * sign;
        }
        inverse_plan(big).process(&mut buf);
        let inv_l = 1.0 / self.grid.length();
        buf.into_iter().map(|c| c.re * inv_l).collect()
    }
}

/// Forward transform of a real field.
pub fn forward_transform(f: &Field) -> Result<Spectrum> {
    if let Some(index) = f.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let grid = f.grid;
    let mut buf: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward_plan(grid.n()).process(&mut buf);
    let dx = grid.dx();
    for (slot, c) in buf.iter_mut().enumerate() {
        // phase exp(i pi j) from the left endpoint x_0 = -L/2
        let sign = if slot % 2 == 0 { 1.0 } else { -1.0 };
        *c *= dx * sign;
    }
    Ok(Spectrum { grid, coeffs: buf })
}

/// Inverse transform; the imaginary part of the result is discarded.
pub fn inverse_transform(s: &Spectrum) -> Field {
    let grid = s.grid;
    let mut buf: Vec<Complex64> = s
        .coeffs
        .iter()
        .enumerate()
        .map(|(slot, &c)| if slot % 2 == 0 { c } else { -c })
        .collect();
    inverse_plan(grid.n()).process(&mut buf);
    let inv_l = 1.0 / grid.length();
    Field {
        grid,
        values: buf.into_iter().map(|c| c.re * inv_l).collect(),
    }
}

fn japanese(xi: f64) -> f64 {
    (1.0 + xi * xi).sqrt()
}

/// `D^alpha = (-d^2/dx^2)^(alpha/2)`, the multiplier `|xi|^alpha`.
pub fn fractional_derivative(f: &Field, alpha: f64) -> Result<Field> {
    let s = forward_transform(f)?;
    if alpha < 0.0 {
        let scale = s.coeffs.iter().fold(0.0_f64, |a, c| a.max(c.norm()));
        if s.coeffs[0].norm() > 1e-12 * scale {
            return Err(Error::SingularMeanMode { alpha });
        }
    }
    let out = s.map_radial(|xi| {
        if xi == 0.0 {
            if alpha == 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            xi.abs().powf(alpha)
        }
    });
    Ok(inverse_transform(&out))
}

/// `J^alpha = (1 - d^2/dx^2)^(alpha/2)`, the multiplier `<xi>^alpha`.
pub fn bessel_potential(f: &Field, alpha: f64) -> Result<Field> {
    let s = forward_transform(f)?;
    Ok(inverse_transform(&s.map_radial(|xi| japanese(xi).powf(alpha))))
}

/// `||u||_{H^s} = ((1/L) sum <xi>^{2s} |u_hat|^2)^{1/2}`.
pub fn sobolev_norm(f: &Field, s: f64) -> Result<f64> {
    Ok(sobolev_norm_spectrum(&forward_transform(f)?, s))
}

pub fn sobolev_norm_spectrum(sp: &Spectrum, s: f64) -> f64 {
    let g = sp.grid();
    let sum: f64 = sp
        .coeffs()
        .iter()
        .enumerate()
        .map(|(slot, c)| japanese(g.wavenumber(slot)).powf(2.0 * s) * c.norm_sqr())
        .sum();
    (sum / g.length()).sqrt()
}

/// Homogeneous norm `||D^s u||_{L^2}`.
pub fn homogeneous_sobolev_norm(sp: &Spectrum, s: f64) -> f64 {
    let g = sp.grid();
    let sum: f64 = sp
        .coeffs()
        .iter()
        .enumerate()
        .map(|(slot, c)| {
            let xi = g.wavenumber(slot).abs();
            let w = if xi == 0.0 { 0.0 } else { xi.powf(2.0 * s) };
            w * c.norm_sqr()
        })
        .sum();
    (sum / g.length()).sqrt()
}

/// Grid quadrature of `|u|^p`, to the power `1/p`.
pub fn lp_norm(f: &Field, p: f64) -> f64 {
    let sum: f64 = f.values.iter().map(|v| v.abs().powf(p)).sum();
    (sum * f.grid.dx()).powf(1.0 / p)
}

/// Exact integral of the `p`-th power of the trigonometric interpolant,
/// computed on a grid refined enough that no product mode aliases.
pub fn power_integral(sp: &Spectrum, p: u32) -> f64 {
    let pad = (p as usize + 2) / 2;
    let pad = pad.next_power_of_two().max(1);
    let vals = sp.padded_values(pad);
    let dx = sp.grid().length() / vals.len() as f64;
    vals.iter().map(|v| v.powi(p as i32)).sum::<f64>() * dx
}

/// Evaluates the trigonometric interpolant of `sp` at an arbitrary point
/// inside the box.
fn interpolant_at(sp: &Spectrum, y: f64) -> f64 {
    let g = sp.grid();
    let n = g.n();
    let step = Complex64::from_polar(1.0, g.dk() * y);
    let inv_step = step.conj();
    let mut acc = sp.coeffs()[0].re;
    let mut pos = Complex64::new(1.0, 0.0);
    let mut neg = Complex64::new(1.0, 0.0);
    for j in 1..(n / 2) as i64 {
        pos *= step;
        neg *= inv_step;
        let cp = sp.coeffs()[j as usize];
        let cn = sp.coeffs()[n - j as usize];
        acc += (cp * pos + cn * neg).re;
    }
    // Nyquist coefficient as a cosine
    let nyq = sp.coeffs()[n / 2];
    acc += nyq.re * (PI * n as f64 * y / g.length()).cos();
    acc / g.length()
}

/// `lambda^{-1/2} u(x / lambda)` sampled on `target` by trigonometric
/// interpolation of `f`, treating `f` as zero outside its box.
pub fn regrid(f: &Field, lambda: f64, target: Grid) -> Result<Field> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            reason: format!("must be positive, got {lambda}"),
        });
    }
    let src = f.grid;
    let sp = forward_transform(f)?;
    let total: f64 = sp.coeffs().iter().map(|c| c.norm_sqr()).sum();
    if total == 0.0 {
        return Ok(Field::zeros(target));
    }

    // frequencies of u(x/lambda) are xi/lambda and must stay below the
    // target Nyquist frequency
    let nyquist = PI * target.n() as f64 / target.length();
    let tail: f64 = sp
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(slot, _)| src.wavenumber(*slot).abs() / lambda >= nyquist)
        .map(|(_, c)| c.norm_sqr())
        .sum();
    if tail > 1e-8 * total {
        return Err(Error::Aliasing { tail: tail / total });
    }

    // the source box, dilated, must fit in the target box
    let half_target = 0.5 * target.length() / lambda;
    let mass: f64 = f.values.iter().map(|v| v * v).sum();
    let outside: f64 = (0..src.n())
        .filter(|&m| src.x(m).abs() > half_target)
        .map(|m| f.values[m] * f.values[m])
        .sum();
    if outside > 1e-8 * mass {
        return Err(Error::BoxOverflow {
            outside: outside / mass,
        });
    }

    let amp = lambda.powf(-0.5);
    let half_src = 0.5 * src.length();
    let values = target
        .points()
        .into_iter()
        .map(|x| {
            let y = x / lambda;
            if y < -half_src || y >= half_src {
                0.0
            } else {
                amp * interpolant_at(&sp, y)
            }
        })
        .collect();
    Field::new(target, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(64, 2.0 * PI).unwrap()
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(Grid::new(8, 1.0).is_err());
        assert!(Grid::new(48, 1.0).is_err());
        assert!(Grid::new(64, 0.0).is_err());
        assert!(Grid::new(64, f64::NAN).is_err());
    }

    #[test]
    fn slot_index_round_trip() {
        let g = grid();
        for slot in 0..g.n() {
            assert_eq!(g.slot(g.index(slot)), Some(slot));
        }
        assert_eq!(g.slot(32), None);
        assert_eq!(g.index(32), -32);
    }

    #[test]
    fn single_cosine_mode_is_two_spikes() {
        let g = grid();
        let f = Field::from_fn(g, |x| x.cos()).unwrap();
        let s = forward_transform(&f).unwrap();
        for slot in 0..g.n() {
            let j = g.index(slot);
            let c = s.coeffs()[slot];
            if j.abs() == 1 {
                assert!((c.re - PI).abs() < 1e-12, "{c}");
                assert!(c.im.abs() < 1e-12);
            } else {
                assert!(c.norm() < 1e-12, "j={j} c={c}");
            }
        }
    }

    #[test]
    fn non_finite_rejected() {
        let g = grid();
        let mut v = vec![0.0; 64];
        v[3] = f64::INFINITY;
        assert_eq!(Field::new(g, v).unwrap_err(), Error::NonFinite { index: 3 });
    }

    #[test]
    fn derivative_of_sine() {
        let g = grid();
        let k = 3.0;
        let f = Field::from_fn(g, |x| (k * x).sin()).unwrap();
        // D^1 is |xi|, i.e. the Hilbert transform of d/dx: D sin(kx) = k sin(kx)
        let d = fractional_derivative(&f, 1.0).unwrap();
        for (x, v) in g.points().iter().zip(d.values()) {
            assert!((v - k * (k * x).sin()).abs() < 1e-10);
        }
    }

    #[test]
    fn negative_order_needs_zero_mean() {
        let g = grid();
        let f = Field::from_fn(g, |x| 1.0 + x.cos()).unwrap();
        assert!(matches!(
            fractional_derivative(&f, -0.5),
            Err(Error::SingularMeanMode { .. })
        ));
        let f = Field::from_fn(g, |x| x.cos()).unwrap();
        assert!(fractional_derivative(&f, -0.5).is_ok());
    }

    #[test]
    fn sobolev_norm_single_mode() {
        // u = cos(xi_1 x) on L = 2 pi: u_hat(+-1) = pi, so
        // ||u||_{H^1}^2 = (1/L) * 2 * <1>^2 * pi^2 = 2 pi
        let g = grid();
        let f = Field::from_fn(g, |x| x.cos()).unwrap();
        let h1 = sobolev_norm(&f, 1.0).unwrap();
        assert!((h1 * h1 - 2.0 * PI).abs() < 1e-12);
        // direct sum: dx * sum (u^2 + u'^2)
        let direct: f64 = g
            .points()
            .iter()
            .map(|x| x.cos().powi(2) + x.sin().powi(2))
            .sum::<f64>()
            * g.dx();
        assert!((h1 * h1 - direct).abs() < 1e-12);
    }

    #[test]
    fn power_integral_is_exact_for_trig_polynomials() {
        let g = Grid::new(16, 2.0 * PI).unwrap();
        // cos^6 integrates to 2 pi * 10/32 over a period
        let f = Field::from_fn(g, |x| (4.0 * x).cos()).unwrap();
        let s = forward_transform(&f).unwrap();
        let exact = 2.0 * PI * 10.0 / 32.0;
        assert!((power_integral(&s, 6) - exact).abs() < 1e-12);
        // the plain grid sum aliases
        let naive = lp_norm(&f, 6.0).powi(6);
        assert!((naive - exact).abs() > 1e-3);
    }

    #[test]
    fn regrid_identity() {
        let g = Grid::new(128, 40.0).unwrap();
        let f = Field::from_fn(g, |x| (-x * x).exp()).unwrap();
        let r = regrid(&f, 1.0, g).unwrap();
        for (a, b) in f.values().iter().zip(r.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn regrid_detects_overflow_and_aliasing() {
        let g = Grid::new(128, 40.0).unwrap();
        let f = Field::from_fn(g, |x| (-x * x / 4.0).exp()).unwrap();
        assert!(matches!(regrid(&f, 4.0, g), Err(Error::BoxOverflow { .. })));
        let fine = Field::from_fn(g, |x| (-4.0 * x * x).exp()).unwrap();
        let coarse = Grid::new(16, 40.0).unwrap();
        assert!(matches!(
            regrid(&fine, 1.0, coarse),
            Err(Error::Aliasing { .. })
        ));
    }

    #[test]
    fn reflection_is_involution() {
        let g = grid();
        let f = Field::from_fn(g, |x| x.sin() + 0.3 * (2.0 * x).cos()).unwrap();
        let r = f.reflected();
        for (x, v) in g.points().iter().zip(r.values()) {
            let expect = (-x).sin() + 0.3 * (2.0 * x).cos();
            assert!((v - expect).abs() < 1e-12);
        }
        assert_eq!(r.reflected(), f);
    }
}
