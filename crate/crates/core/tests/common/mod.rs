//! Independent reference evaluators shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use gkdv_core::{Field, Grid};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Unevaluated sum `hi + lo` carrying about 106 bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn from_i128(v: i128) -> Self {
        let hi = v as f64;
        let lo = (v - hi as i128) as f64;
        Dd::new(hi) + Dd::new(lo)
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn recip(self) -> Self {
        // one Newton step on 1/x
        let y = Dd::new(1.0 / self.hi);
        y + y * (Dd::new(1.0) - self * y)
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        let y = Dd::new(self.hi.sqrt());
        y + (self - y * y) * Dd::new(0.5 / y.hi)
    }
}

impl std::ops::Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = two_sum(s, e);
        Dd { hi, lo }
    }
}

impl std::ops::Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl std::ops::Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl std::ops::Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = two_sum(p, e);
        Dd { hi, lo }
    }
}

impl std::ops::Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        self * o.recip()
    }
}

/// The cutoff written out from its defining formula (not the library's).
pub fn m_reference(xi: f64, n: f64, s: f64) -> f64 {
    let a = xi.abs();
    if a <= n {
        1.0
    } else if a >= 2.0 * n {
        (n / a).powf(1.0 - s)
    } else {
        let t = (a / n).log2();
        2f64.powf(-(1.0 - s) * t * t * t * (3.0 - 2.0 * t))
    }
}

/// `sigma6_tilde` evaluated in double-double from integer indices,
/// with `chi` supplied by the caller.
pub fn sigma_tilde6_dd(idx: &[i64; 6], dk: f64, n: f64, s: f64, chi: bool) -> f64 {
    let m: Vec<Dd> = idx
        .iter()
        .map(|&j| Dd::new(m_reference(j as f64 * dk, n, s)))
        .collect();
    let mut prod = Dd::new(1.0);
    for v in &m {
        prod = prod * *v;
    }
    // -sigma6 = prod / 6
    let mut out = prod / Dd::new(6.0);
    if chi {
        let dk = Dd::new(dk);
        let dk3 = dk * dk * dk;
        let mut w = Dd::ZERO;
        for (k, &j) in idx.iter().enumerate() {
            w = w + m[k] * m[k] * Dd::from_i128((j as i128).pow(3)) * dk3;
        }
        let a: i128 = idx.iter().map(|&j| (j as i128).pow(3)).sum();
        let alpha = Dd::from_i128(a) * dk3;
        out = out - w / (Dd::new(6.0) * alpha);
    }
    out.to_f64()
}

/// Spectrum by direct O(n^2) summation, `u_hat_j = dx sum u_m e^{-i xi_j x_m}`,
/// returned in FFT slot order.
pub fn naive_dft(f: &Field) -> Vec<Complex64> {
    let g = f.grid();
    (0..g.n())
        .map(|slot| {
            let xi = g.wavenumber(slot);
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, &u) in f.values().iter().enumerate() {
                acc += Complex64::from_polar(u, -xi * g.x(m));
            }
            acc * g.dx()
        })
        .collect()
}

pub fn random_field(g: Grid, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<f64> = (0..g.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Field::new(g, v).unwrap()
}

/// Smooth localized random field built from a few modulated Gaussians.
pub fn random_bump_field(g: Grid, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k: usize = rng.gen_range(1..4);
    let p: Vec<(f64, f64, f64, f64)> = (0..k)
        .map(|_| {
            (
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-4.0..4.0),
                rng.gen_range(1.0..3.0),
                rng.gen_range(0.0..2.0),
            )
        })
        .collect();
    Field::from_fn(g, |x| {
        p.iter()
            .map(|&(a, c, w, k)| a * (-(x - c) * (x - c) / (2.0 * w * w)).exp() * (k * x).cos())
            .sum()
    })
    .unwrap()
}

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    acc * h / 3.0
}

pub fn q_closed(x: f64) -> f64 {
    (3.0 / (2.0 * x).cosh().powi(2)).powf(0.25)
}

pub const Q_MASS: f64 = 2.720_699_046_351_326_5; // sqrt(3) pi / 2
pub fn q_l6() -> f64 {
    3.0 * 3f64.sqrt() * PI / 4.0
}
