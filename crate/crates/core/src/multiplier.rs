//! The smoothed frequency cutoff `m_{N,s}` and the operator `I` it defines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{forward_transform, inverse_transform, sobolev_norm_spectrum, Field, Grid};

/// Identifier of the blend used on `N < |xi| < 2N`, recorded in reports.
pub const BLEND_ID: &str = "loglog-smoothstep-c1";

/// Frequency threshold `N` (in wavenumber units) and regularity `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IParams {
    n: f64,
    s: f64,
}

impl IParams {
    pub fn new(n: f64, s: f64) -> Result<Self> {
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidParameter {
                name: "N",
                reason: format!("must be positive and finite, got {n}"),
            });
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidParameter {
                name: "s",
                reason: format!("must lie in (0, 1), got {s}"),
            });
        }
        Ok(Self { n, s })
    }

    /// Threshold placed at frequency index `n_index` of `grid`.
    pub fn from_index(n_index: f64, s: f64, grid: &Grid) -> Result<Self> {
        Self::new(n_index * grid.dk(), s)
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn s(&self) -> f64 {
        self.s
    }
}

/// `m_{N,s}(xi)`: 1 below `N`, `(N/|xi|)^{1-s}` above `2N`, and on the
/// transition band `log2 m = -(1-s) t^3 (3 - 2t)` with `t = log2(|xi|/N)`.
pub fn m_value(xi: f64, p: &IParams) -> f64 {
    let a = xi.abs();
    if a <= p.n {
        return 1.0;
    }
    let ratio = a / p.n;
    if ratio >= 2.0 {
        return ratio.powf(p.s - 1.0);
    }
    let t = ratio.log2();
    let theta = t * t * (3.0 - 2.0 * t);
    (-(1.0 - p.s) * theta * t).exp2()
}

/// `m` tabulated on a grid in FFT slot order.
#[derive(Debug, Clone)]
pub struct MultiplierTable {
    grid: Grid,
    params: IParams,
    values: Vec<f64>,
}

impl MultiplierTable {
    pub fn new(grid: Grid, params: IParams) -> Self {
        let values = (0..grid.n())
            .map(|slot| m_value(grid.wavenumber(slot), &params))
            .collect();
        Self {
            grid,
            params,
            values,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &IParams {
        &self.params
    }

    pub fn by_slot(&self) -> &[f64] {
        &self.values
    }

    /// `m` at frequency index `j`; indices off the grid are evaluated directly.
    pub fn at_index(&self, j: i64) -> f64 {
        match self.grid.slot(j) {
            Some(slot) => self.values[slot],
            None => m_value(j as f64 * self.grid.dk(), &self.params),
        }
    }
}

/// `Iu`, the Fourier multiplier `m_{N,s}` applied to `f`.
pub fn apply_i(f: &Field, p: &IParams) -> Result<Field> {
    let sp = forward_transform(f)?;
    Ok(inverse_transform(&sp.map_radial(|xi| m_value(xi, p))))
}

/// Norm comparison between `||u||_{H^s}` and `||Iu||_{H^1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEquivalence {
    pub h_s: f64,
    pub i_h1: f64,
    /// `||u||_{H^s} / ||Iu||_{H^1}`, the smallest admissible lower constant.
    pub lower_constant: f64,
    /// `||Iu||_{H^1} / (N^{1-s} ||u||_{H^s})`, the smallest admissible upper constant.
    pub upper_constant: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

pub fn norm_equivalence_report(f: &Field, p: &IParams, c: f64) -> Result<NormEquivalence> {
    let sp = forward_transform(f)?;
    let h_s = sobolev_norm_spectrum(&sp, p.s());
    if h_s == 0.0 {
        return Err(Error::ZeroField);
    }
    let i_h1 = sobolev_norm_spectrum(&sp.map_radial(|xi| m_value(xi, p)), 1.0);
    let lower_constant = h_s / i_h1;
    let upper_constant = i_h1 / (p.n().powf(1.0 - p.s()) * h_s);
    Ok(NormEquivalence {
        h_s,
        i_h1,
        lower_constant,
        upper_constant,
        lower_ok: lower_constant <= c,
        upper_ok: upper_constant <= c,
    })
}
