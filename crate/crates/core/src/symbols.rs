//! Pointwise evaluators for the multilinear symbols on the frequency
//! hyperplanes `xi_1 + ... + xi_k = 0`.
//!
//! Frequencies are integer grid indices scaled by `dk = 2 pi / L` only when
//! a real value is needed, so hyperplane membership is exact. Symbols are
//! those of the focusing problem (`mu = -1`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::multiplier::{m_value, IParams};

/// A value `re + i * im_coeff`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SymbolValue {
    pub re: f64,
    pub im_coeff: f64,
}

impl SymbolValue {
    pub fn real(re: f64) -> Self {
        Self { re, im_coeff: 0.0 }
    }

    pub fn imag(im_coeff: f64) -> Self {
        Self { re: 0.0, im_coeff }
    }

    pub fn scale(self, c: f64) -> Self {
        Self {
            re: c * self.re,
            im_coeff: c * self.im_coeff,
        }
    }

    pub fn abs(self) -> f64 {
        self.re.hypot(self.im_coeff)
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im_coeff.is_finite()
    }
}

impl std::ops::Add for SymbolValue {
    type Output = SymbolValue;
    fn add(self, o: SymbolValue) -> SymbolValue {
        SymbolValue {
            re: self.re + o.re,
            im_coeff: self.im_coeff + o.im_coeff,
        }
    }
}

impl std::ops::Sub for SymbolValue {
    type Output = SymbolValue;
    fn sub(self, o: SymbolValue) -> SymbolValue {
        SymbolValue {
            re: self.re - o.re,
            im_coeff: self.im_coeff - o.im_coeff,
        }
    }
}

impl std::ops::Mul<f64> for SymbolValue {
    type Output = SymbolValue;
    fn mul(self, c: f64) -> SymbolValue {
        self.scale(c)
    }
}

/// Integer frequency indices summing to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTuple {
    idx: Vec<i64>,
    grid: Grid,
}

impl FrequencyTuple {
    pub fn new(idx: Vec<i64>, grid: Grid) -> Result<Self> {
        if !matches!(idx.len(), 2 | 4 | 6 | 10) {
            return Err(Error::Arity(idx.len()));
        }
        let sum: i64 = idx.iter().sum();
        if sum != 0 {
            return Err(Error::OffHyperplane { idx, sum });
        }
        Ok(Self { idx, grid })
    }

    pub fn k(&self) -> usize {
        self.idx.len()
    }

    pub fn idx(&self) -> &[i64] {
        &self.idx
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dk(&self) -> f64 {
        self.grid.dk()
    }

    pub fn xi(&self) -> Vec<f64> {
        self.idx.iter().map(|&j| j as f64 * self.dk()).collect()
    }

    /// Same grid, permuted or otherwise rearranged indices.
    pub fn with_idx(&self, idx: Vec<i64>) -> Result<Self> {
        Self::new(idx, self.grid)
    }

    pub fn negated(&self) -> Self {
        Self {
            idx: self.idx.iter().map(|j| -j).collect(),
            grid: self.grid,
        }
    }

    fn expect_arity(&self, k: usize) -> Result<()> {
        if self.k() != k {
            return Err(Error::Arity(self.k()));
        }
        Ok(())
    }
}

/// `sum j^3` in exact integer arithmetic.
pub fn sum_cubes(idx: &[i64]) -> i128 {
    idx.iter().map(|&j| (j as i128).pow(3)).sum()
}

/// `m(dk * j)`.
#[inline]
pub fn m_at(j: i64, dk: f64, p: &IParams) -> f64 {
    m_value(j as f64 * dk, p)
}

/// `sum m^2(xi) xi^3` over the tuple.
pub fn weighted_cubes(idx: &[i64], dk: f64, p: &IParams) -> f64 {
    idx.iter()
        .map(|&j| {
            let xi = j as f64 * dk;
            let m = m_value(xi, p);
            m * m * xi * xi * xi
        })
        .sum()
}

/// `-(1/6) m(xi_1) ... m(xi_6)` on raw indices.
pub fn sigma6_raw(idx: &[i64], dk: f64, p: &IParams) -> f64 {
    -idx.iter().map(|&j| m_at(j, dk, p)).product::<f64>() / 6.0
}

/// `alpha_k = i (xi_1^3 + ... + xi_k^3)`.
pub fn alpha_k(t: &FrequencyTuple) -> SymbolValue {
    let dk = t.dk();
    SymbolValue::imag(sum_cubes(t.idx()) as f64 * dk * dk * dk)
}

/// `-1/2 m(xi_1) m(xi_2) xi_1 xi_2`.
pub fn sigma2(t: &FrequencyTuple, p: &IParams) -> Result<f64> {
    t.expect_arity(2)?;
    let xi = t.xi();
    Ok(-0.5 * m_value(xi[0], p) * m_value(xi[1], p) * xi[0] * xi[1])
}

/// `-1/6 m(xi_1) ... m(xi_6)`.
pub fn sigma6(t: &FrequencyTuple, p: &IParams) -> Result<f64> {
    t.expect_arity(6)?;
    Ok(sigma6_raw(t.idx(), t.dk(), p))
}

/// `(i/6) sum m^2(xi_j) xi_j^3`.
pub fn m6_1(t: &FrequencyTuple, p: &IParams) -> Result<SymbolValue> {
    t.expect_arity(6)?;
    Ok(SymbolValue::imag(weighted_cubes(t.idx(), t.dk(), p) / 6.0))
}

/// `sigma_6 alpha_6`.
pub fn m6_2(t: &FrequencyTuple, p: &IParams) -> Result<SymbolValue> {
    let s = sigma6(t, p)?;
    Ok(alpha_k(t).scale(s))
}

/// The symmetrized sextic symbol of the first modified energy's derivative.
pub fn m6_sym(t: &FrequencyTuple, p: &IParams) -> Result<SymbolValue> {
    Ok(m6_1(t, p)? + m6_2(t, p)?)
}

/// Calls `f` on every permutation of `items` (Heap's algorithm).
pub fn for_each_permutation<T: Copy>(items: &[T], mut f: impl FnMut(&[T])) {
    let mut a = items.to_vec();
    let n = a.len();
    let mut c = vec![0usize; n];
    f(&a);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            f(&a);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Average of `m` over all `k!` rearrangements of `t` (`k <= 6`).
pub fn symmetrize(
    t: &FrequencyTuple,
    m: impl Fn(&FrequencyTuple) -> SymbolValue,
) -> Result<SymbolValue> {
    if t.k() > 6 {
        return Err(Error::Arity(t.k()));
    }
    let mut acc = SymbolValue::default();
    let mut count = 0usize;
    let mut scratch = t.clone();
    for_each_permutation(t.idx(), |perm| {
        scratch.idx.copy_from_slice(perm);
        acc = acc + m(&scratch);
        count += 1;
    });
    Ok(acc.scale(1.0 / count as f64))
}

/// All 252 five-element subsets of ten positions, as bitmasks.
pub(crate) fn five_subsets() -> &'static [u16] {
    use std::sync::OnceLock;
    static SUBSETS: OnceLock<Vec<u16>> = OnceLock::new();
    SUBSETS.get_or_init(|| {
        (0u16..1024)
            .filter(|mask| mask.count_ones() == 5)
            .collect()
    })
}

/// Average over the 252 ways of choosing five "kept" slots of a ten-tuple
/// of `g(kept..., eta_idx) * eta` where `eta` is the sum of the other five.
pub fn block_average10(idx: &[i64], dk: f64, g: impl Fn(&[i64; 6]) -> f64) -> Result<f64> {
    if idx.len() != 10 {
        return Err(Error::Arity(idx.len()));
    }
    let subsets = five_subsets();
    let mut acc = 0.0;
    for &mask in subsets {
        let mut six = [0i64; 6];
        let mut k = 0;
        let mut kept_sum = 0i64;
        for (pos, &j) in idx.iter().enumerate() {
            if mask & (1 << pos) != 0 {
                six[k] = j;
                k += 1;
                kept_sum += j;
            }
        }
        let eta = -kept_sum;
        if eta == 0 {
            continue;
        }
        six[5] = eta;
        acc += g(&six) * (eta as f64 * dk);
    }
    Ok(acc / subsets.len() as f64)
}

/// The symmetrized ten-linear symbol `-6i [sigma_6(xi_a..xi_e, eta) eta]_sym`
/// produced by differentiating the sextic part of the first modified energy.
pub fn m10_sym(t: &FrequencyTuple, p: &IParams) -> Result<SymbolValue> {
    t.expect_arity(10)?;
    let dk = t.dk();
    let avg = block_average10(t.idx(), dk, |six| sigma6_raw(six, dk, p))?;
    Ok(SymbolValue::imag(-6.0 * avg))
}

/// Exact residual of `j1^3 + j2^3 + j3^3 + j4^3 = 3 (j1+j2)(j1+j3)(j1+j4)`.
pub fn arithmetic_identity_residual(idx: &[i64; 4]) -> Result<i128> {
    let sum: i64 = idx.iter().sum();
    if sum != 0 {
        return Err(Error::OffHyperplane {
            idx: idx.to_vec(),
            sum,
        });
    }
    let [a, b, c, d] = idx.map(|j| j as i128);
    let lhs = a.pow(3) + b.pow(3) + c.pow(3) + d.pow(3);
    let rhs = 3 * (a + b) * (a + c) * (a + d);
    Ok(lhs - rhs)
}

/// `|LHS - RHS|` of the cubic identity evaluated in floating point on the
/// tuple's wavenumbers.
pub fn arithmetic_identity_check(t: &FrequencyTuple) -> Result<f64> {
    t.expect_arity(4)?;
    let x = t.xi();
    let lhs: f64 = x.iter().map(|v| v * v * v).sum();
    let rhs = 3.0 * (x[0] + x[1]) * (x[0] + x[2]) * (x[0] + x[3]);
    Ok((lhs - rhs).abs())
}

fn check_separation(xi: f64, eta: f64, rho: f64) -> Result<()> {
    if eta.abs() > rho * xi.abs() {
        return Err(Error::Separation { rho });
    }
    Ok(())
}

/// Smallest `C` with `|a(xi+eta) - a(xi)| <= C |eta| b(xi) / |xi|`.
pub fn mvt_constant(
    a: &impl Fn(f64) -> f64,
    b: &impl Fn(f64) -> f64,
    xi: f64,
    eta: f64,
    rho: f64,
) -> Result<f64> {
    check_separation(xi, eta, rho)?;
    let lhs = (a(xi + eta) - a(xi)).abs();
    if lhs == 0.0 {
        return Ok(0.0);
    }
    Ok(lhs * xi.abs() / (eta.abs() * b(xi)))
}

/// Smallest `C` with
/// `|a(xi+eta+lam) - a(xi+eta) - a(xi+lam) + a(xi)| <= C |eta||lam| b(xi) / |xi|^2`.
pub fn double_mvt_constant(
    a: &impl Fn(f64) -> f64,
    b: &impl Fn(f64) -> f64,
    xi: f64,
    eta: f64,
    lam: f64,
    rho: f64,
) -> Result<f64> {
    check_separation(xi, eta, rho)?;
    check_separation(xi, lam, rho)?;
    let lhs = (a(xi + eta + lam) - a(xi + eta) - a(xi + lam) + a(xi)).abs();
    if lhs == 0.0 {
        return Ok(0.0);
    }
    Ok(lhs * xi * xi / (eta.abs() * lam.abs() * b(xi)))
}

pub fn mvt_check(
    a: &impl Fn(f64) -> f64,
    b: &impl Fn(f64) -> f64,
    xi: f64,
    eta: f64,
    rho: f64,
    c: f64,
) -> Result<bool> {
    Ok(mvt_constant(a, b, xi, eta, rho)? <= c)
}

pub fn double_mvt_check(
    a: &impl Fn(f64) -> f64,
    b: &impl Fn(f64) -> f64,
    xi: f64,
    eta: f64,
    lam: f64,
    rho: f64,
    c: f64,
) -> Result<bool> {
    Ok(double_mvt_constant(a, b, xi, eta, lam, rho)? <= c)
}

/// Empirical constants of the two mean value inequalities over a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlReport {
    pub samples: usize,
    pub c_mvt: f64,
    pub c_double_mvt: f64,
    pub worst_xi: f64,
}

/// Sweeps each `xi` in `sample` against perturbations `eta, lam` on a
/// fixed stencil inside `|eta|, |lam| <= rho |xi|`.
pub fn controlled_pair_check(
    a: impl Fn(f64) -> f64,
    b: impl Fn(f64) -> f64,
    sample: &[f64],
    rho: f64,
) -> Result<ControlReport> {
    const FRACTIONS: [f64; 8] = [-1.0, -0.5, -0.1, -0.01, 0.01, 0.1, 0.5, 1.0];
    let mut report = ControlReport {
        samples: 0,
        c_mvt: 0.0,
        c_double_mvt: 0.0,
        worst_xi: 0.0,
    };
    for &xi in sample {
        if xi == 0.0 {
            continue;
        }
        let r = rho * xi.abs();
        for &fe in &FRACTIONS {
            let eta = fe * r;
            let c1 = mvt_constant(&a, &b, xi, eta, rho * (1.0 + 1e-12))?;
            if c1 > report.c_mvt {
                report.c_mvt = c1;
                report.worst_xi = xi;
            }
            for &fl in &FRACTIONS {
                let lam = fl * r;
                let c2 = double_mvt_constant(&a, &b, xi, eta, lam, rho * (1.0 + 1e-12))?;
                report.c_double_mvt = report.c_double_mvt.max(c2);
                report.samples += 1;
            }
        }
    }
    Ok(report)
}
