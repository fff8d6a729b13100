//! Resonant decomposition of the sextic symbol: the non-resonant sets
//! `Omega_1, Omega_2, Omega_3`, the split `M6 = M6_bar + M6_tilde`, the
//! bounded correction `sigma6_tilde = -M6_tilde / alpha_6`, the ten-linear
//! remainder `M10_bar`, and Monte-Carlo estimates of their sup constants.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiplier::IParams;
use crate::symbols::{
    alpha_k, block_average10, m6_1, m6_2, sigma6_raw, sum_cubes, weighted_cubes, FrequencyTuple,
    SymbolValue,
};

/// Numerical meaning of the asymptotic relations in the set definitions:
/// `a >> b` is `a >= k_much * b`, `|xi| >~ N` is `|xi| >= c_gtr * N`,
/// `a ~ b` is `a / b` within `[1/r_sim, r_sim]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub k_much: f64,
    pub c_gtr: f64,
    pub r_sim: f64,
    /// Guard `|sum xi^3| < eps_alpha_rel * max |xi|^3`.
    pub eps_alpha_rel: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            k_much: 100.0,
            c_gtr: 1.0,
            r_sim: 2.0,
            eps_alpha_rel: 1e-9,
        }
    }
}

impl Thresholds {
    pub fn with_k_much(k_much: f64) -> Result<Self> {
        let th = Self {
            k_much,
            ..Self::default()
        };
        th.validate()?;
        Ok(th)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| {
            Err(Error::InvalidParameter {
                name,
                reason: reason.to_string(),
            })
        };
        if !(self.r_sim >= 1.0) {
            return bad("r_sim", "must be at least 1");
        }
        if !(self.k_much > self.r_sim) {
            return bad("k_much", "must exceed r_sim");
        }
        if !(self.c_gtr > 0.0) {
            return bad("c_gtr", "must be positive");
        }
        if !(self.eps_alpha_rel > 0.0) {
            return bad("eps_alpha_rel", "must be positive");
        }
        Ok(())
    }
}

/// Positions of the tuple sorted by `|xi|` descending, ties kept in input order.
pub fn order_tuple(t: &FrequencyTuple) -> Result<[usize; 6]> {
    if t.k() != 6 {
        return Err(Error::Arity(t.k()));
    }
    let mut order = [0, 1, 2, 3, 4, 5];
    order.sort_by_key(|&i| std::cmp::Reverse(t.idx()[i].abs()));
    Ok(order)
}

/// Canonical representative: `|j|` descending, and among equal `|j|` the
/// positive index first, so that membership does not depend on the order
/// in which tied magnitudes were supplied.
#[inline]
pub fn canonical_order(idx: &[i64; 6]) -> [i64; 6] {
    let mut s = *idx;
    s.sort_unstable_by(|a, b| b.abs().cmp(&a.abs()).then(b.cmp(a)));
    s
}

struct Rel<'a> {
    n: f64,
    th: &'a Thresholds,
}

impl Rel<'_> {
    #[inline]
    fn much(&self, a: f64, b: f64) -> bool {
        a > 0.0 && a >= self.th.k_much * b
    }
    #[inline]
    fn gtr(&self, a: f64) -> bool {
        a >= self.th.c_gtr * self.n
    }
    #[inline]
    fn sim(&self, a: f64, b: f64) -> bool {
        a > 0.0 && b > 0.0 && a <= self.th.r_sim * b && b <= self.th.r_sim * a
    }
}

/// Membership flags for a canonically ordered tuple, in index units.
fn flags_sorted(s: &[i64; 6], dk: f64, p: &IParams, th: &Thresholds) -> [bool; 3] {
    let n = p.n() / dk;
    let r = Rel { n, th };
    let a = s.map(|j| j.abs() as f64);
    let cube = |j: i64| (j as i128).pow(3);

    let o1 = r.sim(a[0], a[1])
        && r.gtr(a[1])
        && r.much(n, a[2])
        && r.much(
            (cube(s[0]) + cube(s[1])).abs() as f64,
            (cube(s[2]) + cube(s[3]) + cube(s[4]) + cube(s[5])).abs() as f64,
        );

    let o2 = r.gtr(a[2]) && r.much(a[2], a[3]);

    let o3 = r.gtr(a[3])
        && r.much(n, a[4])
        && r.much((s[0] + s[1]).abs() as f64, (s[4] + s[5]).abs() as f64)
        && {
            // |m^2 A^3 + ... + m^2 D^3| in index units
            let w = weighted_cubes(&s[..4], dk, p) / (dk * dk * dk);
            r.much(w.abs(), (cube(s[4]) + cube(s[5])).abs() as f64)
        }
        && r.much(
            ((s[0] + s[1]).abs() as f64)
                * ((s[0] + s[2]).abs() as f64)
                * ((s[1] + s[2]).abs() as f64),
            a[4] * a[0] * a[0],
        );
    [o1, o2, o3]
}

/// Membership flags `[Omega_1, Omega_2, Omega_3]` of a raw sextic tuple.
pub fn omega_flags(idx: &[i64; 6], dk: f64, p: &IParams, th: &Thresholds) -> [bool; 3] {
    let s = canonical_order(idx);
    if (s[1].abs() as f64) < th.c_gtr * p.n() / dk {
        // every set needs two modes above N (Omega_1 needs B, the others more)
        return [false; 3];
    }
    flags_sorted(&s, dk, p, th)
}

/// Whether `|sum xi^3|` is below the resonance guard.
#[inline]
pub fn guarded(idx: &[i64], th: &Thresholds) -> bool {
    let max = idx.iter().map(|j| j.abs()).max().unwrap_or(0) as f64;
    (sum_cubes(idx).abs() as f64) < th.eps_alpha_rel * max * max * max
}

/// The indicator of `Omega` actually used by every symbol: membership in
/// the union with the resonance guard applied.
#[inline]
pub fn chi_omega(idx: &[i64; 6], dk: f64, p: &IParams, th: &Thresholds) -> bool {
    omega_flags(idx, dk, p, th).iter().any(|&b| b) && !guarded(idx, th)
}

fn six(t: &FrequencyTuple) -> Result<[i64; 6]> {
    t.idx().try_into().map_err(|_| Error::Arity(t.k()))
}

pub fn in_omega1(t: &FrequencyTuple, p: &IParams, th: &Thresholds) -> Result<bool> {
    Ok(omega_flags(&six(t)?, t.dk(), p, th)[0])
}

pub fn in_omega2(t: &FrequencyTuple, p: &IParams, th: &Thresholds) -> Result<bool> {
    Ok(omega_flags(&six(t)?, t.dk(), p, th)[1])
}

pub fn in_omega3(t: &FrequencyTuple, p: &IParams, th: &Thresholds) -> Result<bool> {
    Ok(omega_flags(&six(t)?, t.dk(), p, th)[2])
}

pub fn in_omega(t: &FrequencyTuple, p: &IParams, th: &Thresholds) -> Result<bool> {
    Ok(omega_flags(&six(t)?, t.dk(), p, th).iter().any(|&b| b))
}

/// `(M6_bar, M6_tilde)` with `M6_bar = (1 - chi) M6^1` and
/// `M6_tilde = chi M6^1 + M6^2`.
pub fn split_m6(
    t: &FrequencyTuple,
    p: &IParams,
    th: &Thresholds,
) -> Result<(SymbolValue, SymbolValue)> {
    let chi = chi_omega(&six(t)?, t.dk(), p, th);
    let m1 = m6_1(t, p)?;
    let m2 = m6_2(t, p)?;
    if chi {
        Ok((SymbolValue::default(), m1 + m2))
    } else {
        Ok((m1, m2))
    }
}

/// `sigma6_tilde` on raw indices.
#[inline]
pub fn sigma_tilde6_raw(idx: &[i64; 6], dk: f64, p: &IParams, th: &Thresholds) -> f64 {
    let base = -sigma6_raw(idx, dk, p);
    if chi_omega(idx, dk, p, th) {
        let alpha = sum_cubes(idx) as f64 * dk * dk * dk;
        base - weighted_cubes(idx, dk, p) / (6.0 * alpha)
    } else {
        base
    }
}

/// `-M6_tilde / alpha_6`, real.
pub fn sigma_tilde6(t: &FrequencyTuple, p: &IParams, th: &Thresholds) -> Result<f64> {
    Ok(sigma_tilde6_raw(&six(t)?, t.dk(), p, th))
}

/// `-6i [(sigma_6 + sigma6_tilde)(xi_a..xi_e, eta) eta]_sym` on raw indices
/// (the `i` coefficient).
pub fn m10_bar_raw(idx: &[i64], dk: f64, p: &IParams, th: &Thresholds) -> Result<f64> {
    let avg = block_average10(idx, dk, |s6| {
        // sigma_6 + sigma6_tilde is supported on the guarded Omega
        if !chi_omega(s6, dk, p, th) {
            return 0.0;
        }
        let alpha = sum_cubes(s6) as f64 * dk * dk * dk;
        -weighted_cubes(s6, dk, p) / (6.0 * alpha)
    })?;
    Ok(-6.0 * avg)
}

pub fn m10_bar(t: &FrequencyTuple, p: &IParams, th: &Thresholds) -> Result<SymbolValue> {
    if t.k() != 10 {
        return Err(Error::Arity(t.k()));
    }
    Ok(SymbolValue::imag(m10_bar_raw(t.idx(), t.dk(), p, th)?))
}

/// `|M6_tilde| / |alpha_6|`, which equals `|sigma6_tilde|` off the guard.
pub fn m6_tilde_over_alpha(t: &FrequencyTuple, p: &IParams, th: &Thresholds) -> Result<f64> {
    let (_, tilde) = split_m6(t, p, th)?;
    Ok(tilde.abs() / alpha_k(t).abs())
}

/// Magnitude patterns following the case analysis behind the bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stratum {
    AllLow,
    Generic,
    Omega1,
    Omega1NearResonant,
    Omega2,
    Omega3a,
    Omega3bI,
    Omega3bII,
    Omega3bIII,
    Omega3bIV,
}

impl Stratum {
    pub const ALL: [Stratum; 10] = [
        Stratum::AllLow,
        Stratum::Generic,
        Stratum::Omega1,
        Stratum::Omega1NearResonant,
        Stratum::Omega2,
        Stratum::Omega3a,
        Stratum::Omega3bI,
        Stratum::Omega3bII,
        Stratum::Omega3bIII,
        Stratum::Omega3bIV,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Stratum::AllLow => "all_low",
            Stratum::Generic => "generic",
            Stratum::Omega1 => "omega1",
            Stratum::Omega1NearResonant => "omega1_near_resonant",
            Stratum::Omega2 => "omega2",
            Stratum::Omega3a => "omega3a",
            Stratum::Omega3bI => "omega3b_I",
            Stratum::Omega3bII => "omega3b_II",
            Stratum::Omega3bIII => "omega3b_III",
            Stratum::Omega3bIV => "omega3b_IV",
        }
    }
}

/// Weighted list of strata; sample `i` is drawn from the stratum at
/// position `i mod total_weight` of the expanded list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub strata: Vec<(Stratum, u32)>,
}

impl Default for SamplePlan {
    fn default() -> Self {
        Self {
            strata: Stratum::ALL.iter().map(|&s| (s, 1)).collect(),
        }
    }
}

impl SamplePlan {
    pub fn only(stratum: Stratum) -> Self {
        Self {
            strata: vec![(stratum, 1)],
        }
    }

    fn expanded(&self) -> Result<Vec<Stratum>> {
        let list: Vec<Stratum> = self
            .strata
            .iter()
            .flat_map(|&(s, w)| std::iter::repeat(s).take(w as usize))
            .collect();
        if list.is_empty() {
            return Err(Error::EmptyPlan);
        }
        Ok(list)
    }
}

/// Index-unit scales used by the samplers.
#[derive(Debug, Clone, Copy)]
struct Scales {
    n: f64,
    k: f64,
    c_gtr: f64,
    r_sim: f64,
}

impl Scales {
    fn new(n_index: f64, th: &Thresholds) -> Self {
        Self {
            n: n_index,
            k: th.k_much,
            c_gtr: th.c_gtr,
            r_sim: th.r_sim,
        }
    }

    /// Largest index that is `<< N`.
    fn low_cap(&self) -> i64 {
        (self.n / self.k).floor() as i64
    }

    fn hi_floor(&self) -> i64 {
        (self.c_gtr * self.n).ceil().max(1.0) as i64
    }
}

fn sign(rng: &mut ChaCha8Rng) -> i64 {
    if rng.gen::<bool>() {
        1
    } else {
        -1
    }
}

/// Magnitude `floor(base * 2^(u * octaves))` with `u` uniform.
fn dyadic(rng: &mut ChaCha8Rng, base: i64, octaves: f64) -> i64 {
    let u: f64 = rng.gen();
    ((base as f64) * (u * octaves).exp2()).floor().max(base as f64) as i64
}

fn low(rng: &mut ChaCha8Rng, cap: i64) -> i64 {
    if cap <= 0 {
        0
    } else {
        rng.gen_range(-cap..=cap)
    }
}

const OCTAVES: f64 = 6.0;

fn close(mut t: [i64; 6], slot: usize) -> [i64; 6] {
    let rest: i64 = t.iter().enumerate().filter(|&(i, _)| i != slot).map(|(_, v)| v).sum();
    t[slot] = -rest;
    t
}

fn sample_sextic(rng: &mut ChaCha8Rng, stratum: Stratum, sc: &Scales) -> [i64; 6] {
    let cap = sc.low_cap();
    let hi = sc.hi_floor();
    match stratum {
        Stratum::AllLow => {
            let n = sc.n.floor() as i64;
            let mut t = [0; 6];
            for v in t.iter_mut().take(5) {
                *v = rng.gen_range(-n..=n);
            }
            close(t, 5)
        }
        Stratum::Generic => {
            let mut t = [0; 6];
            for v in t.iter_mut().take(5) {
                *v = sign(rng) * dyadic(rng, 1, 1.0 + (sc.n.log2() + OCTAVES));
            }
            close(t, 5)
        }
        Stratum::Omega1 => {
            let a = dyadic(rng, hi, OCTAVES);
            let mut t = [a * sign(rng), 0, low(rng, cap), low(rng, cap), low(rng, cap), low(rng, cap)];
            t = close(t, 1);
            t
        }
        Stratum::Omega1NearResonant => {
            let a = dyadic(rng, hi, OCTAVES) * sign(rng);
            let mut lows = [low(rng, cap), low(rng, cap), low(rng, cap), 0];
            // make the low modes sum to +-1 so A + B = -+1
            let partial: i64 = lows[..3].iter().sum();
            let target = sign(rng);
            lows[3] = target - partial;
            if lows[3].abs() > cap.max(1) {
                lows = [target, 0, 0, 0];
            }
            close([a, 0, lows[0], lows[1], lows[2], lows[3]], 1)
        }
        Stratum::Omega2 => {
            let c = dyadic(rng, hi, OCTAVES);
            let dcap = (c as f64 / sc.k).floor() as i64;
            let a = dyadic(rng, c, 3.0);
            close(
                [
                    a * sign(rng),
                    0,
                    c * sign(rng),
                    low(rng, dcap),
                    low(rng, dcap),
                    low(rng, dcap),
                ],
                1,
            )
        }
        Stratum::Omega3a => {
            let c = dyadic(rng, hi, 2.0);
            let d = dyadic(rng, hi, 1.0).min(c);
            let a = dyadic(rng, ((c as f64) * sc.k).ceil() as i64, 3.0);
            close(
                [
                    a * sign(rng),
                    0,
                    c * sign(rng),
                    d * sign(rng),
                    low(rng, cap),
                    low(rng, cap),
                ],
                1,
            )
        }
        Stratum::Omega3bI | Stratum::Omega3bII | Stratum::Omega3bIII | Stratum::Omega3bIV => {
            let signs: [i64; 4] = match stratum {
                Stratum::Omega3bI => [1, -1, -1, -1],
                Stratum::Omega3bII => [1, -1, 1, -1],
                Stratum::Omega3bIII => [1, -1, -1, 1],
                _ => [1, 1, -1, -1],
            };
            let mut best = [0i64; 6];
            for _ in 0..64 {
                let a = dyadic(rng, hi, OCTAVES);
                let lo = ((a as f64) / sc.r_sim).ceil() as i64;
                let mut t = [a, 0, 0, 0, low(rng, cap), low(rng, cap)];
                for i in 1..3 {
                    t[i] = signs[i] * rng.gen_range(lo.max(hi)..=a);
                }
                // the smallest of the four closes the sum
                t = close(t, 3);
                best = t;
                let ok = t[3].signum() == signs[3]
                    && t[3].abs() <= t[2].abs().min(t[1].abs())
                    && t[3].abs() >= hi;
                if ok {
                    break;
                }
            }
            best
        }
    }
}

/// Sup statistics of a sampled quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupReport {
    pub n_index: f64,
    pub samples: usize,
    pub sup: f64,
    pub sup_first_half: f64,
    pub sup_second_half: f64,
    /// `sup_second_half <= 2 * sup_first_half` (vacuous when both vanish).
    pub stable: bool,
    pub per_region: BTreeMap<String, f64>,
    /// Counts of `floor(log10 value)` buckets; zero values land in `"zero"`.
    pub histogram: BTreeMap<String, u64>,
    pub omega_frac: f64,
    pub guard_frac: f64,
}

#[derive(Default, Clone)]
struct BatchStats {
    sup: f64,
    per_region: BTreeMap<String, f64>,
    histogram: BTreeMap<String, u64>,
    in_omega: u64,
    guarded: u64,
    count: u64,
}

impl BatchStats {
    fn record(&mut self, region: &str, value: f64) {
        self.sup = self.sup.max(value);
        let e = self.per_region.entry(region.to_string()).or_insert(0.0);
        *e = e.max(value);
        let bucket = if value == 0.0 {
            "zero".to_string()
        } else {
            format!("1e{:+03}", value.log10().floor() as i32)
        };
        *self.histogram.entry(bucket).or_insert(0) += 1;
        self.count += 1;
    }

    fn merge(&mut self, o: &BatchStats) {
        self.sup = self.sup.max(o.sup);
        for (k, v) in &o.per_region {
            let e = self.per_region.entry(k.clone()).or_insert(0.0);
            *e = e.max(*v);
        }
        for (k, v) in &o.histogram {
            *self.histogram.entry(k.clone()).or_insert(0) += v;
        }
        self.in_omega += o.in_omega;
        self.guarded += o.guarded;
        self.count += o.count;
    }
}

const BATCH: usize = 4096;

fn batch_rng(seed: u64, batch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch as u64);
    rng
}

fn run_batches(
    n_samples: usize,
    seed: u64,
    f: impl Fn(&mut ChaCha8Rng, usize, &mut BatchStats) -> Result<()> + Sync,
) -> Result<(BatchStats, BatchStats)> {
    let n_batches = n_samples.div_ceil(BATCH);
    let results: Vec<Result<BatchStats>> = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = batch_rng(seed, b);
            let mut stats = BatchStats::default();
            let end = ((b + 1) * BATCH).min(n_samples);
            for i in b * BATCH..end {
                f(&mut rng, i, &mut stats)?;
            }
            Ok(stats)
        })
        .collect();
    let mut first = BatchStats::default();
    let mut second = BatchStats::default();
    for (b, r) in results.into_iter().enumerate() {
        let stats = r?;
        if b * BATCH < n_samples / 2 {
            first.merge(&stats);
        } else {
            second.merge(&stats);
        }
    }
    Ok((first, second))
}

fn finish(n_index: f64, first: BatchStats, second: BatchStats) -> SupReport {
    let mut all = first.clone();
    all.merge(&second);
    let count = all.count.max(1) as f64;
    SupReport {
        n_index,
        samples: all.count as usize,
        sup: all.sup,
        sup_first_half: first.sup,
        sup_second_half: second.sup,
        stable: second.sup <= 2.0 * first.sup || (first.sup == 0.0 && second.sup == 0.0),
        per_region: all.per_region,
        histogram: all.histogram,
        omega_frac: all.in_omega as f64 / count,
        guard_frac: all.guarded as f64 / count,
    }
}

/// Empirical sup of `|sigma6_tilde|` over stratified samples at threshold
/// index `n_index` (unit frequency spacing).
pub fn verify_sigma_tilde_bounded(
    n_index: f64,
    s: f64,
    th: &Thresholds,
    n_samples: usize,
    plan: &SamplePlan,
    seed: u64,
) -> Result<SupReport> {
    th.validate()?;
    if n_samples == 0 {
        return Err(Error::TooFewSamples {
            required: 1,
            got: 0,
        });
    }
    let p = IParams::new(n_index, s)?;
    let strata = plan.expanded()?;
    let sc = Scales::new(n_index, th);
    let (first, second) = run_batches(n_samples, seed, |rng, i, stats| {
        let stratum = strata[i % strata.len()];
        let t = sample_sextic(rng, stratum, &sc);
        debug_assert_eq!(t.iter().sum::<i64>(), 0);
        let flags = omega_flags(&t, 1.0, &p, th);
        if flags.iter().any(|&b| b) {
            stats.in_omega += 1;
            if guarded(&t, th) {
                stats.guarded += 1;
            }
        }
        let v = sigma_tilde6_raw(&t, 1.0, &p, th).abs();
        if !v.is_finite() {
            return Err(Error::NonFinite { index: i });
        }
        stats.record(stratum.name(), v);
        Ok(())
    })?;
    Ok(finish(n_index, first, second))
}

/// Ten-linear sampling patterns for the `M10_bar` bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TenStratum {
    /// Two comparable high modes and eight low modes.
    HighPair,
    /// High modes `xi, -xi` exactly, low modes summing to zero.
    CancellingHigh,
    /// All ten modes and every five-block sum at most `N`.
    AllLow,
}

impl TenStratum {
    pub fn name(&self) -> &'static str {
        match self {
            TenStratum::HighPair => "high_pair",
            TenStratum::CancellingHigh => "cancelling_high",
            TenStratum::AllLow => "all_low",
        }
    }
}

/// Draws a ten-tuple with `|A| ~ |B| >~ N >> |C| >= ...`.
pub fn sample_decic(rng: &mut ChaCha8Rng, stratum: TenStratum, n_index: f64, th: &Thresholds) -> [i64; 10] {
    let sc = Scales::new(n_index, th);
    let cap = sc.low_cap();
    let mut t = [0i64; 10];
    match stratum {
        TenStratum::AllLow => {
            // entries up to N/5 keep every block sum inside the band
            let n = (n_index / 5.0).floor() as i64;
            for v in t.iter_mut().take(9) {
                *v = rng.gen_range(-n..=n);
            }
            t[9] = -t[..9].iter().sum::<i64>();
            if t[9].abs() > n {
                t = [0; 10];
            }
        }
        TenStratum::HighPair => {
            // the partner absorbs up to eight low modes and must stay high
            t[0] = dyadic(rng, sc.hi_floor() + 8 * cap, OCTAVES) * sign(rng);
            for v in t.iter_mut().skip(2) {
                *v = low(rng, cap);
            }
            t[1] = -(t[0] + t[2..].iter().sum::<i64>());
        }
        TenStratum::CancellingHigh => {
            t[0] = dyadic(rng, sc.hi_floor(), OCTAVES) * sign(rng);
            t[1] = -t[0];
            for v in t.iter_mut().skip(2).take(7) {
                *v = low(rng, cap);
            }
            t[9] = -t[2..9].iter().sum::<i64>();
            if t[9].abs() > cap {
                // fall back to exact low pairs
                for k in 0..4 {
                    t[2 + 2 * k + 1] = -t[2 + 2 * k];
                }
            }
        }
    }
    t
}

/// Third largest `|j|` of a ten-tuple.
pub fn third_largest(idx: &[i64]) -> i64 {
    let mut a: Vec<i64> = idx.iter().map(|j| j.abs()).collect();
    a.sort_unstable_by(|x, y| y.cmp(x));
    a.get(2).copied().unwrap_or(0)
}

/// Empirical sup of `|M10_bar| / |xi_C|` over ten-tuples in the
/// high-pair configuration (unit frequency spacing).
pub fn verify_m10_bar_bound(
    n_index: f64,
    s: f64,
    th: &Thresholds,
    n_samples: usize,
    strata: &[TenStratum],
    seed: u64,
) -> Result<SupReport> {
    th.validate()?;
    if strata.is_empty() {
        return Err(Error::EmptyPlan);
    }
    let p = IParams::new(n_index, s)?;
    let hi = Scales::new(n_index, th).hi_floor();
    let (first, second) = run_batches(n_samples, seed, |rng, i, stats| {
        let stratum = strata[i % strata.len()];
        let t = sample_decic(rng, stratum, n_index, th);
        if stratum != TenStratum::AllLow {
            let mut a: Vec<i64> = t.iter().map(|j| j.abs()).collect();
            a.sort_unstable_by(|x, y| y.cmp(x));
            let ok = a[1] >= hi
                && (a[0] as f64) <= th.r_sim * a[1] as f64
                && (a[2] as f64) * th.k_much <= n_index;
            if !ok {
                return Err(Error::SamplerConfiguration(format!("{t:?}")));
            }
        }
        let v = m10_bar_raw(&t, 1.0, &p, th)?.abs();
        let c = third_largest(&t) as f64;
        let ratio = if c == 0.0 {
            if v > 1e-12 {
                f64::INFINITY
            } else {
                0.0
            }
        } else {
            v / c
        };
        if !ratio.is_finite() {
            return Err(Error::NonFinite { index: i });
        }
        stats.record(stratum.name(), ratio);
        Ok(())
    })?;
    Ok(finish(n_index, first, second))
}

/// Sup constants over a sweep of thresholds with the N-uniformity ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub reports: Vec<SupReport>,
    /// `max sup / min sup` across the sweep.
    pub spread: f64,
}

impl SweepReport {
    pub fn from_reports(reports: Vec<SupReport>) -> Self {
        let max = reports.iter().map(|r| r.sup).fold(0.0_f64, f64::max);
        let min = reports.iter().map(|r| r.sup).fold(f64::INFINITY, f64::min);
        let spread = if max == 0.0 { 1.0 } else { max / min };
        Self { reports, spread }
    }

    pub fn all_stable(&self) -> bool {
        self.reports.iter().all(|r| r.stable && r.sup.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn grid() -> Grid {
        Grid::new(16, 2.0 * std::f64::consts::PI).unwrap()
    }

    fn tuple(idx: &[i64]) -> FrequencyTuple {
        FrequencyTuple::new(idx.to_vec(), grid()).unwrap()
    }

    #[test]
    fn ordering_examples() {
        assert_eq!(order_tuple(&tuple(&[5, -4, 3, -2, -1, -1])).unwrap(), [0, 1, 2, 3, 4, 5]);
        let o = order_tuple(&tuple(&[1, -3, 2, 0, 0, 0])).unwrap();
        assert_eq!(o, [1, 2, 0, 3, 4, 5]);
        let o = order_tuple(&tuple(&[2, -2, 1, -1, 0, 0])).unwrap();
        assert_eq!(&o[..2], &[0, 1]);
    }

    #[test]
    fn omega2_example() {
        let p = IParams::new(100.0, 0.5).unwrap();
        let th = Thresholds::with_k_much(20.0).unwrap();
        let t = tuple(&[300, -200, -105, 3, 1, 1]);
        assert!(in_omega2(&t, &p, &th).unwrap());
        let (bar, _) = split_m6(&t, &p, &th).unwrap();
        assert_eq!(bar, SymbolValue::default());
    }

    #[test]
    fn low_tuples_are_resonant_region() {
        let p = IParams::new(50.0, 0.5).unwrap();
        let th = Thresholds::default();
        let t = tuple(&[40, -30, 7, -10, -5, -2]);
        assert!(!in_omega(&t, &p, &th).unwrap());
        assert!((sigma_tilde6(&t, &p, &th).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        let (bar, tilde) = split_m6(&t, &p, &th).unwrap();
        let a = alpha_k(&t).im_coeff;
        assert!((bar.im_coeff - a / 6.0).abs() < 1e-9);
        assert!((tilde.im_coeff + a / 6.0).abs() < 1e-9);
    }

    #[test]
    fn thresholds_validation() {
        assert!(Thresholds::with_k_much(1.5).is_err());
        let th = Thresholds {
            c_gtr: 0.0,
            ..Thresholds::default()
        };
        assert!(th.validate().is_err());
    }

    #[test]
    fn membership_ignores_tie_order() {
        let p = IParams::new(10.0, 0.5).unwrap();
        let th = Thresholds::with_k_much(4.0).unwrap();
        let a = [60, 30, -30, -60, 0, 0];
        let b = [60, -30, 30, -60, 0, 0];
        assert_eq!(omega_flags(&a, 1.0, &p, &th), omega_flags(&b, 1.0, &p, &th));
    }

    #[test]
    fn empty_plan_rejected() {
        let plan = SamplePlan { strata: vec![] };
        assert_eq!(
            verify_sigma_tilde_bounded(32.0, 0.5, &Thresholds::default(), 10, &plan, 1).unwrap_err(),
            Error::EmptyPlan
        );
    }

    #[test]
    fn samplers_close_the_sum() {
        let th = Thresholds::with_k_much(8.0).unwrap();
        let sc = Scales::new(64.0, &th);
        let mut rng = batch_rng(3, 0);
        for &st in &Stratum::ALL {
            for _ in 0..200 {
                let t = sample_sextic(&mut rng, st, &sc);
                assert_eq!(t.iter().sum::<i64>(), 0, "{st:?}");
            }
        }
        for &st in &[TenStratum::HighPair, TenStratum::CancellingHigh, TenStratum::AllLow] {
            for _ in 0..200 {
                let t = sample_decic(&mut rng, st, 64.0, &th);
                assert_eq!(t.iter().sum::<i64>(), 0, "{st:?}");
            }
        }
    }
}
