//! Mass, energy, the modified energies `E1 = E(Iu)` and `E2 = E1 + L6(sigma6_tilde)`,
//! the multilinear forms `L_k` and the right-hand sides of their time
//! derivatives along the flow.
//!
//! On a box of length `L` the multilinear form is
//!
//! ```text
//! L_k(M) = L^{1-k} * sum_{j_1 + ... + j_k = 0} M(xi_j1, ..., xi_jk) u_hat(j_1) ... u_hat(j_k)
//! ```
//!
//! which is the normalization for which `L_2(sigma2) = 1/2 ||d_x Iu||^2` and
//! `L_6(-1/6 m...m) = -1/6 int (Iu)^6` hold exactly for unaliased data.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{forward_transform, power_integral, sobolev_norm_spectrum, Field, Grid, Spectrum};
use crate::multiplier::{m_value, IParams};
use crate::resonance::{chi_omega, Thresholds};
use crate::symbols::{sigma6_raw, sum_cubes, weighted_cubes, SymbolValue};

/// `int u^2`, the grid sum times `dx`.
pub fn mass(f: &Field) -> f64 {
    f.values().iter().map(|v| v * v).sum::<f64>() * f.grid().dx()
}

/// `1/2 ||d_x u||^2` from the spectrum.
pub fn kinetic(sp: &Spectrum) -> f64 {
    let g = sp.grid();
    let sum: f64 = sp
        .coeffs()
        .iter()
        .enumerate()
        .map(|(slot, c)| {
            let xi = g.wavenumber(slot);
            xi * xi * c.norm_sqr()
        })
        .sum();
    0.5 * sum / g.length()
}

/// `int 1/2 u_x^2 + mu/6 u^6`.
pub fn energy(f: &Field, mu: f64) -> Result<f64> {
    let sp = forward_transform(f)?;
    Ok(energy_spectrum(&sp, mu))
}

pub fn energy_spectrum(sp: &Spectrum, mu: f64) -> f64 {
    kinetic(sp) + mu / 6.0 * power_integral(sp, 6)
}

/// Spectrum of `Iu`.
pub fn i_spectrum(sp: &Spectrum, p: &IParams) -> Spectrum {
    sp.map_radial(|xi| m_value(xi, p))
}

/// `E(Iu)`.
pub fn e1_modified(f: &Field, p: &IParams, mu: f64) -> Result<f64> {
    let sp = forward_transform(f)?;
    Ok(energy_spectrum(&i_spectrum(&sp, p), mu))
}

/// Indices of the modes whose magnitude exceeds `floor` times the largest,
/// closed under `j -> -j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveModeSet {
    indices: Vec<i64>,
    floor: f64,
}

impl ActiveModeSet {
    pub const DEFAULT_FLOOR: f64 = 1e-12;

    pub fn from_spectrum(sp: &Spectrum, floor: f64) -> Self {
        let g = sp.grid();
        let scale = sp.coeffs().iter().fold(0.0_f64, |a, c| a.max(c.norm()));
        let mut set = std::collections::BTreeSet::new();
        if scale > 0.0 {
            for (slot, c) in sp.coeffs().iter().enumerate() {
                let j = g.index(slot);
                if j == -(g.n() as i64) / 2 {
                    continue;
                }
                if c.norm() > floor * scale {
                    set.insert(j);
                    set.insert(-j);
                }
            }
        }
        Self {
            indices: set.into_iter().collect(),
            floor,
        }
    }

    pub fn from_indices(mut indices: Vec<i64>) -> Self {
        let mirrored: Vec<i64> = indices.iter().map(|j| -j).collect();
        indices.extend(mirrored);
        indices.sort_unstable();
        indices.dedup();
        Self {
            indices,
            floor: 0.0,
        }
    }

    pub fn indices(&self) -> &[i64] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn max_abs(&self) -> i64 {
        self.indices.iter().map(|j| j.abs()).max().unwrap_or(0)
    }
}

/// Coefficient lookup by frequency index over a contiguous index window.
struct Lookup {
    offset: i64,
    coeffs: Vec<Complex64>,
    present: Vec<bool>,
}

impl Lookup {
    fn new(sp: &Spectrum, modes: &ActiveModeSet) -> Self {
        let m = modes.max_abs();
        let width = (2 * m + 1) as usize;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); width];
        let mut present = vec![false; width];
        for &j in modes.indices() {
            let k = (j + m) as usize;
            coeffs[k] = sp.coeff(j);
            present[k] = true;
        }
        Self {
            offset: m,
            coeffs,
            present,
        }
    }

    #[inline]
    fn get(&self, j: i64) -> Option<Complex64> {
        let k = j + self.offset;
        if k < 0 || k as usize >= self.coeffs.len() || !self.present[k as usize] {
            None
        } else {
            Some(self.coeffs[k as usize])
        }
    }
}

/// Largest mode count accepted per arity.
pub fn mode_budget(k: usize) -> usize {
    match k {
        2 => usize::MAX,
        4 | 6 => 512,
        _ => 16,
    }
}

fn check_budget(k: usize, modes: &ActiveModeSet) -> Result<()> {
    let limit = mode_budget(k);
    if modes.len() > limit {
        return Err(Error::ModeBudget {
            k,
            modes: modes.len(),
            limit,
        });
    }
    Ok(())
}

fn check_hermitian(sp: &Spectrum) -> Result<()> {
    let defect = sp.hermitian_defect();
    if defect > 1e-10 {
        return Err(Error::NonHermitian { defect });
    }
    Ok(())
}

/// Value of a multilinear form together with the sum of absolute terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormValue {
    pub value: Complex64,
    pub abs_sum: f64,
}

impl FormValue {
    /// Real part after checking that the imaginary residue is roundoff.
    pub fn real(self) -> Result<f64> {
        let residue = self.value.im.abs();
        if residue > 1e-10 * self.abs_sum.max(1.0) {
            return Err(Error::ImaginaryResidue { residue });
        }
        Ok(self.value.re)
    }
}

#[inline]
fn apply(m: SymbolValue, z: Complex64) -> Complex64 {
    Complex64::new(m.re, m.im_coeff) * z
}

/// `L_k(M)` by direct summation over all ordered tuples of active modes,
/// the last index fixed by the hyperplane constraint. Makes no symmetry
/// assumption on `M`.
pub fn lambda_ordered(
    k: usize,
    m: &(dyn Fn(&[i64]) -> SymbolValue + Sync),
    sp: &Spectrum,
    modes: &ActiveModeSet,
) -> Result<FormValue> {
    if k < 2 {
        return Err(Error::Arity(k));
    }
    let lookup = Lookup::new(sp, modes);
    let idx = modes.indices();
    let j_count = idx.len();
    if j_count == 0 {
        return Ok(FormValue {
            value: Complex64::new(0.0, 0.0),
            abs_sum: 0.0,
        });
    }
    let outer: Vec<usize> = (0..j_count).collect();
    let partials: Vec<(Complex64, f64)> = outer
        .par_iter()
        .map(|&first| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut abs = 0.0;
            let mut tuple = vec![0i64; k];
            let mut pos = vec![0usize; k - 2];
            tuple[0] = idx[first];
            loop {
                for (t, &p) in tuple[1..k - 1].iter_mut().zip(&pos) {
                    *t = idx[p];
                }
                let last = -tuple[..k - 1].iter().sum::<i64>();
                if let Some(c_last) = lookup.get(last) {
                    tuple[k - 1] = last;
                    let mut prod = c_last;
                    for &j in &tuple[..k - 1] {
                        prod *= lookup.get(j).unwrap();
                    }
                    let term = apply(m(&tuple), prod);
                    acc += term;
                    abs += term.norm();
                }
                // odometer over the middle positions
                let mut d = 0;
                loop {
                    if d == pos.len() {
                        return (acc, abs);
                    }
                    pos[d] += 1;
                    if pos[d] < j_count {
                        break;
                    }
                    pos[d] = 0;
                    d += 1;
                }
            }
        })
        .collect();
    Ok(sum_partials(partials, sp.grid(), k))
}

fn sum_partials(partials: Vec<(Complex64, f64)>, g: &Grid, k: usize) -> FormValue {
    let mut value = Complex64::new(0.0, 0.0);
    let mut abs_sum = 0.0;
    for (v, a) in partials {
        value += v;
        abs_sum += a;
    }
    let norm = g.length().powi(1 - k as i32);
    FormValue {
        value: value * norm,
        abs_sum: abs_sum * norm,
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Multiplicity weight `k! / prod(mult!)` of a sorted tuple.
#[inline]
fn multinomial(sorted: &[i64], k_fact: f64) -> f64 {
    let mut w = k_fact;
    let mut run = 1usize;
    for i in 1..sorted.len() {
        if sorted[i] == sorted[i - 1] {
            run += 1;
            w /= run as f64;
        } else {
            run = 1;
        }
    }
    w
}

/// `L_k(M)` for a symmetric multiplier, summing each unordered tuple once
/// with its multiplicity weight.
pub fn lambda_symmetric(
    k: usize,
    m: &(dyn Fn(&[i64]) -> SymbolValue + Sync),
    sp: &Spectrum,
    modes: &ActiveModeSet,
) -> Result<FormValue> {
    if k < 2 {
        return Err(Error::Arity(k));
    }
    let lookup = Lookup::new(sp, modes);
    let idx = modes.indices();
    let j_count = idx.len();
    let k_fact = factorial(k);
    let partials: Vec<(Complex64, f64)> = (0..j_count)
        .into_par_iter()
        .map(|first| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut abs = 0.0;
            let mut pos = vec![first; k - 1];
            let mut tuple = vec![0i64; k];
            loop {
                for (t, &p) in tuple.iter_mut().zip(&pos) {
                    *t = idx[p];
                }
                let last = -tuple[..k - 1].iter().sum::<i64>();
                if last >= tuple[k - 2] {
                    if let Some(c_last) = lookup.get(last) {
                        tuple[k - 1] = last;
                        let mut prod = c_last;
                        for &j in &tuple[..k - 1] {
                            prod *= lookup.get(j).unwrap();
                        }
                        let term = apply(m(&tuple), prod) * multinomial(&tuple, k_fact);
                        acc += term;
                        abs += term.norm();
                    }
                }
                // nondecreasing odometer over positions 1..k-1 (position 0 fixed)
                let mut d = k - 2;
                loop {
                    if d == 0 {
                        return (acc, abs);
                    }
                    pos[d] += 1;
                    if pos[d] < j_count {
                        let v = pos[d];
                        for q in pos.iter_mut().skip(d + 1) {
                            *q = v;
                        }
                        break;
                    }
                    d -= 1;
                }
            }
        })
        .collect();
    Ok(sum_partials(partials, sp.grid(), k))
}

/// `L_k(M)` for a real-valued form, with budget and realness checks.
pub fn lambda_k(
    k: usize,
    m: &(dyn Fn(&[i64]) -> SymbolValue + Sync),
    sp: &Spectrum,
    modes: &ActiveModeSet,
) -> Result<f64> {
    if !matches!(k, 2 | 4 | 6 | 10) {
        return Err(Error::Arity(k));
    }
    check_budget(k, modes)?;
    check_hermitian(sp)?;
    lambda_symmetric(k, m, sp, modes)?.real()
}

/// `L_2(sigma2) = 1/2 ||d_x Iu||^2`.
pub fn lambda2_sigma2(sp: &Spectrum, p: &IParams, modes: &ActiveModeSet) -> Result<f64> {
    let dk = sp.grid().dk();
    lambda_k(
        2,
        &|t: &[i64]| {
            let (a, b) = (t[0] as f64 * dk, t[1] as f64 * dk);
            SymbolValue::real(-0.5 * m_value(a, p) * m_value(b, p) * a * b)
        },
        sp,
        modes,
    )
}

/// `L_6(sigma6) = -1/6 int (Iu)^6`.
pub fn lambda6_sigma6(sp: &Spectrum, p: &IParams, modes: &ActiveModeSet) -> Result<f64> {
    let dk = sp.grid().dk();
    lambda_k(
        6,
        &|t: &[i64]| SymbolValue::real(sigma6_raw(t, dk, p)),
        sp,
        modes,
    )
}

/// `L_6(sigma6_tilde)` by the generic symmetric kernel.
pub fn lambda6_sigma_tilde_direct(
    sp: &Spectrum,
    p: &IParams,
    th: &Thresholds,
    modes: &ActiveModeSet,
) -> Result<f64> {
    let dk = sp.grid().dk();
    lambda_k(
        6,
        &|t: &[i64]| {
            let six: &[i64; 6] = t.try_into().unwrap();
            SymbolValue::real(crate::resonance::sigma_tilde6_raw(six, dk, p, th))
        },
        sp,
        modes,
    )
}

/// `L_6(chi_Omega * W / A)` with `W = sum m^2 xi^3` and `A = sum xi^3`,
/// summing only over tuples that can lie in the non-resonant sets.
///
/// Every tuple of the union has its two smallest entries below
/// `max(N, max|j|) / k_much`, and its third smallest entry either below
/// that cap or at least `c_gtr * N`; the enumeration visits sorted tuples
/// (by `(|j|, j)`) satisfying these constraints only.
pub fn lambda6_omega_part(
    sp: &Spectrum,
    p: &IParams,
    th: &Thresholds,
    modes: &ActiveModeSet,
) -> Result<f64> {
    check_hermitian(sp)?;
    let g = sp.grid();
    let dk = g.dk();
    let n_idx = p.n() / dk;
    let jmax = modes.max_abs();
    let low_cap = (n_idx.max(jmax as f64) / th.k_much).floor() as i64;
    let hi_floor = th.c_gtr * n_idx;

    let key = |j: i64| (j.abs(), j);
    let mut sorted: Vec<i64> = modes.indices().to_vec();
    sorted.sort_unstable_by_key(|&j| key(j));
    let lookup = Lookup::new(sp, modes);
    let n_low = sorted.iter().take_while(|j| j.abs() <= low_cap).count();
    let j_count = sorted.len();
    let k_fact = factorial(6);

    let pairs: Vec<(usize, usize)> = (0..n_low)
        .flat_map(|a| (a..n_low).map(move |b| (a, b)))
        .collect();
    let partials: Vec<(Complex64, f64)> = pairs
        .par_iter()
        .map(|&(i1, i2)| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut abs = 0.0;
            let mut t = [0i64; 6];
            t[0] = sorted[i1];
            t[1] = sorted[i2];
            for i3 in i2..j_count {
                t[2] = sorted[i3];
                let a3 = t[2].abs();
                if a3 > low_cap && (a3 as f64) < hi_floor {
                    continue;
                }
                for i4 in i3..j_count {
                    t[3] = sorted[i4];
                    for i5 in i4..j_count {
                        t[4] = sorted[i5];
                        if (t[4].abs() as f64) < hi_floor {
                            continue;
                        }
                        let last = -(t[0] + t[1] + t[2] + t[3] + t[4]);
                        if key(last) < key(t[4]) {
                            continue;
                        }
                        let Some(c_last) = lookup.get(last) else {
                            continue;
                        };
                        t[5] = last;
                        if !chi_omega(&t, dk, p, th) {
                            continue;
                        }
                        let alpha = sum_cubes(&t) as f64 * dk * dk * dk;
                        let r = weighted_cubes(&t, dk, p) / alpha;
                        let mut prod = c_last;
                        for &j in &t[..5] {
                            prod *= lookup.get(j).unwrap();
                        }
                        // multiplicities are counted on the (|j|, j) order,
                        // where equal entries are adjacent
                        let term = prod * (r * multinomial(&t, k_fact));
                        acc += term;
                        abs += term.norm();
                    }
                }
            }
            (acc, abs)
        })
        .collect();
    sum_partials(partials, g, 6).real()
}

/// `L_6(sigma6_tilde) = 1/6 int (Iu)^6 - 1/6 L_6(chi_Omega W / A)`.
pub fn lambda6_sigma_tilde(
    sp: &Spectrum,
    p: &IParams,
    th: &Thresholds,
    modes: &ActiveModeSet,
) -> Result<f64> {
    check_budget(6, modes)?;
    let iu = i_spectrum(sp, p);
    let omega = lambda6_omega_part(sp, p, th, modes)?;
    Ok(power_integral(&iu, 6) / 6.0 - omega / 6.0)
}

/// `E2 = E1 + L_6(sigma6_tilde)` for the focusing problem.
pub fn e2_modified(f: &Field, p: &IParams, th: &Thresholds) -> Result<f64> {
    let sp = forward_transform(f)?;
    let modes = ActiveModeSet::from_spectrum(&sp, ActiveModeSet::DEFAULT_FLOOR);
    Ok(energy_spectrum(&i_spectrum(&sp, p), -1.0) + lambda6_sigma_tilde(&sp, p, th, &modes)?)
}

/// The symmetrized quartic extension
/// `(xi_1..xi_{k+4}) -> avg_S M(xi_S, eta_S) eta_S` over `(k-1)`-subsets `S`,
/// with `eta_S = -sum_S xi`.
pub fn quartic_extension(
    k: usize,
    m: &(dyn Fn(&[i64]) -> SymbolValue + Sync),
    t: &[i64],
    dk: f64,
) -> SymbolValue {
    let big = k + 4;
    debug_assert_eq!(t.len(), big);
    let mut acc = SymbolValue::default();
    let mut count = 0usize;
    let mut sub = vec![0i64; k];
    for mask in 0u32..(1 << big) {
        if mask.count_ones() as usize != k - 1 {
            continue;
        }
        count += 1;
        let mut q = 0;
        let mut s = 0i64;
        for (pos, &j) in t.iter().enumerate() {
            if mask & (1 << pos) != 0 {
                sub[q] = j;
                q += 1;
                s += j;
            }
        }
        let eta = -s;
        if eta == 0 {
            continue;
        }
        sub[k - 1] = eta;
        acc = acc + m(&sub).scale(eta as f64 * dk);
    }
    acc.scale(1.0 / count as f64)
}

/// Right-hand side of `d/dt L_k(M) = L_k(M alpha_k) + mu i k L_{k+4}(ext M)`
/// along `u_t + u_xxx = mu (u^5)_x`, for a symmetric `k`-multiplier.
pub fn dlambda_rhs(
    k: usize,
    m: &(dyn Fn(&[i64]) -> SymbolValue + Sync),
    sp: &Spectrum,
    modes: &ActiveModeSet,
    mu: f64,
) -> Result<f64> {
    let (linear, nonlinear) = dlambda_parts(k, m, sp, modes, mu)?;
    Ok(linear + nonlinear)
}

/// The two terms of [`dlambda_rhs`] separately.
pub fn dlambda_parts(
    k: usize,
    m: &(dyn Fn(&[i64]) -> SymbolValue + Sync),
    sp: &Spectrum,
    modes: &ActiveModeSet,
    mu: f64,
) -> Result<(f64, f64)> {
    if !matches!(k, 2 | 6) {
        return Err(Error::Arity(k));
    }
    check_budget(k + 4, modes)?;
    check_hermitian(sp)?;
    let dk = sp.grid().dk();
    let d3 = dk * dk * dk;
    let linear = lambda_symmetric(
        k,
        &|t: &[i64]| {
            let a = sum_cubes(t) as f64 * d3;
            let v = m(t);
            // (re + i im) * (i a)
            SymbolValue {
                re: -v.im_coeff * a,
                im_coeff: v.re * a,
            }
        },
        sp,
        modes,
    )?
    .real()?;
    let kk = k as f64;
    let nonlinear = lambda_symmetric(
        k + 4,
        &|t: &[i64]| {
            let v = quartic_extension(k, m, t, dk);
            // mu i k (re + i im)
            SymbolValue {
                re: -mu * kk * v.im_coeff,
                im_coeff: mu * kk * v.re,
            }
        },
        sp,
        modes,
    )?
    .real()?;
    Ok((linear, nonlinear))
}

/// Right-hand side `L_6(M6) + L_10(M10)` of `dE1/dt` (focusing).
pub fn de1_rhs(sp: &Spectrum, p: &IParams, modes: &ActiveModeSet) -> Result<f64> {
    let dk = sp.grid().dk();
    let s2 = |t: &[i64]| {
        let (a, b) = (t[0] as f64 * dk, t[1] as f64 * dk);
        SymbolValue::real(-0.5 * m_value(a, p) * m_value(b, p) * a * b)
    };
    let s6 = |t: &[i64]| SymbolValue::real(sigma6_raw(t, dk, p));
    Ok(dlambda_rhs(2, &s2, sp, modes, -1.0)? + dlambda_rhs(6, &s6, sp, modes, -1.0)?)
}

/// Right-hand side `L_6(M6_bar) + L_10(M10_bar)` of `dE2/dt` (focusing).
pub fn de2_rhs(sp: &Spectrum, p: &IParams, th: &Thresholds, modes: &ActiveModeSet) -> Result<f64> {
    check_budget(10, modes)?;
    check_hermitian(sp)?;
    let dk = sp.grid().dk();
    let six = lambda_symmetric(
        6,
        &|t: &[i64]| {
            let s6: &[i64; 6] = t.try_into().unwrap();
            if chi_omega(s6, dk, p, th) {
                SymbolValue::default()
            } else {
                SymbolValue::imag(weighted_cubes(t, dk, p) / 6.0)
            }
        },
        sp,
        modes,
    )?
    .real()?;
    let ten = lambda_symmetric(
        10,
        &|t: &[i64]| {
            SymbolValue::imag(crate::resonance::m10_bar_raw(t, dk, p, th).unwrap_or(f64::NAN))
        },
        sp,
        modes,
    )?
    .real()?;
    Ok(six + ten)
}

/// Snapshot of the conserved and modified energies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub e1: f64,
    pub lambda6_sigma_tilde: f64,
    pub e2: f64,
    pub h1_of_iu: f64,
}

impl EnergyLedger {
    /// Measures every entry at time `t` (focusing problem).
    pub fn measure(
        f: &Field,
        t: f64,
        p: &IParams,
        th: &Thresholds,
        floor: f64,
    ) -> Result<Self> {
        let sp = forward_transform(f)?;
        let iu = i_spectrum(&sp, p);
        let modes = ActiveModeSet::from_spectrum(&sp, floor);
        let e1 = energy_spectrum(&iu, -1.0);
        let l6 = lambda6_sigma_tilde(&sp, p, th, &modes)?;
        let ledger = Self {
            t,
            mass: mass(f),
            energy: energy_spectrum(&sp, -1.0),
            e1,
            lambda6_sigma_tilde: l6,
            e2: e1 + l6,
            h1_of_iu: sobolev_norm_spectrum(&iu, 1.0),
        };
        Ok(ledger)
    }
}

/// Discrete `X_{s,b}` diagnostic of a uniformly sampled history.
///
/// The history is tapered by `sin(pi n / (M-1))`, transformed in time with
/// `u~(tau) = dt sum_n w_n u_hat(t_n) exp(-i tau t_n)`, and weighted by
/// `<xi>^{2s} <tau - xi^3>^{2b}` where each temporal frequency is taken in
/// the alias band centred on `xi^3`.
pub fn xsb_norm(history: &[Field], dt: f64, s: f64, b: f64) -> Result<f64> {
    if history.len() < 16 {
        return Err(Error::TooFewSamples {
            required: 16,
            got: history.len(),
        });
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: format!("must be positive, got {dt}"),
        });
    }
    let g = *history[0].grid();
    for f in history {
        g.check_same(f.grid())?;
    }
    let steps = history.len();
    let spectra: Vec<Spectrum> = history
        .iter()
        .map(forward_transform)
        .collect::<Result<_>>()?;
    let taper: Vec<f64> = (0..steps)
        .map(|k| (std::f64::consts::PI * k as f64 / (steps - 1) as f64).sin())
        .collect();
    let period = steps as f64 * dt;
    let dtau = 2.0 * std::f64::consts::PI / period;
    let fft = crate::grid::forward_plan(steps);
    let mut total = 0.0;
    let mut buf = vec![Complex64::new(0.0, 0.0); steps];
    for slot in 0..g.n() {
        let xi = g.wavenumber(slot);
        for (k, v) in buf.iter_mut().enumerate() {
            *v = spectra[k].coeffs()[slot] * taper[k] * dt;
        }
        fft.process(&mut buf);
        let xi3 = xi * xi * xi;
        let spatial = (1.0 + xi * xi).powf(s);
        for (l, c) in buf.iter().enumerate() {
            let tau0 = l as f64 * dtau;
            // alias representative of tau0 nearest to xi^3
            let shift = ((xi3 - tau0) / (steps as f64 * dtau)).round();
            let tau = tau0 + shift * steps as f64 * dtau;
            let d = tau - xi3;
            total += spatial * (1.0 + d * d).powf(b) * c.norm_sqr();
        }
    }
    Ok((total / (g.length() * period)).sqrt())
}
