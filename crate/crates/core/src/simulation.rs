//! Simulation models with known tail behaviour and the Monte Carlo oracle
//! for the true tail Gini value.
//!
//! Model 1 mixes an independent Pareto pair with a comonotone one:
//! `(X, Y) = B (Z1, Z3) + (1 - B)(Z2, Z2)` with `Z1, Z3 ~ Pareto(a1)`,
//! `Z2 ~ Pareto(a2)`, `B ~ Bernoulli(1/2)`. Here `gamma1 = a1` and
//! `eta = a2 / a1`.
//!
//! Model 2 puts a Pareto(a1) margin on a Gaussian copula with correlation
//! `a2`, giving `eta = (1 + a2) / 2`. Its `tau` is not integrable along the
//! `phi0` substitution.

use rand::distr::{Distribution, Open01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::sample::PairedSample;

/// A reproducible random stream identified by `(seed, index)`.
///
/// Streams with the same seed and different indices are independent ChaCha
/// streams over one key, so replications can run in any order or in
/// parallel and still draw identical numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub index: u64,
}

impl RngStream {
    pub fn new(seed: u64, index: u64) -> Self {
        Self { seed, index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.index);
        rng
    }

    /// A stream keyed off this one, for nesting a second family of streams
    /// (e.g. per-dataset permutation streams) without index collisions.
    pub fn child(&self, label: u64) -> RngStream {
        let mut z = self.seed ^ splitmix(self.index.wrapping_add(0x9e37_79b9_7f4a_7c15));
        z = splitmix(z ^ splitmix(label));
        RngStream::new(z, 0)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform on the open interval (0, 1).
pub fn open_uniform(rng: &mut impl Rng) -> f64 {
    Open01.sample(rng)
}

/// Inverse transform for Pareto(a): `U^(-a)`, survival `x^(-1/a)` on `x > 1`.
pub fn pareto_from_uniform(u: f64, a: f64) -> f64 {
    u.powf(-a)
}

pub fn sample_pareto(a: f64, n: usize, rng: &mut impl Rng) -> Result<Vec<f64>> {
    check_unit("a", a)?;
    Ok((0..n).map(|_| pareto_from_uniform(open_uniform(rng), a)).collect())
}

fn check_unit(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{v} not in (0, 1)")))
    }
}

/// Standard normal upper tail `1 - Phi(x)`, accurate far into the tail.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Model1,
    Model2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimModel {
    pub kind: ModelKind,
    pub a1: f64,
    pub a2: f64,
}

impl SimModel {
    /// Requires `a1/2 < a2 < a1` so that `eta = a2/a1` lies in (1/2, 1).
    pub fn model1(a1: f64, a2: f64) -> Result<Self> {
        check_unit("a1", a1)?;
        check_unit("a2", a2)?;
        if !(a1 / 2.0 < a2 && a2 < a1) {
            return Err(Error::invalid("a2", format!("need a1/2 < a2 < a1, got a1={a1}, a2={a2}")));
        }
        Ok(Self {
            kind: ModelKind::Model1,
            a1,
            a2,
        })
    }

    pub fn model2(a1: f64, a2: f64) -> Result<Self> {
        check_unit("a1", a1)?;
        check_unit("a2", a2)?;
        Ok(Self {
            kind: ModelKind::Model2,
            a1,
            a2,
        })
    }

    pub fn gamma1(&self) -> f64 {
        self.a1
    }

    pub fn eta(&self) -> f64 {
        match self.kind {
            ModelKind::Model1 => self.a2 / self.a1,
            ModelKind::Model2 => (1.0 + self.a2) / 2.0,
        }
    }

    /// `1 - 1/eta + gamma1` computed from the model parameters.
    pub fn extrapolation_exponent(&self) -> f64 {
        crate::estimators::extrapolation_exponent(self.gamma1(), self.eta())
    }

    /// Closed-form tail dependence function `tau(x, y)`.
    pub fn tau(&self, x: f64, y: f64) -> f64 {
        match self.kind {
            ModelKind::Model1 => {
                let r = self.a1 / self.a2;
                2f64.powf(r - 1.0) * x.min(y).powf(r)
            }
            ModelKind::Model2 => (x * y).powf(1.0 / (1.0 + self.a2)),
        }
    }

    pub fn sample(&self, n: usize, rng: &mut impl Rng) -> Result<PairedSample> {
        let mut x = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let (a, b) = self.draw(rng);
            x.push(a);
            y.push(b);
        }
        PairedSample::new(x, y)
    }

    pub fn sample_stream(&self, n: usize, stream: RngStream) -> Result<PairedSample> {
        self.sample(n, &mut stream.rng())
    }

    /// One `(X, Y)` draw.
    pub fn draw(&self, rng: &mut impl Rng) -> (f64, f64) {
        match self.kind {
            ModelKind::Model1 => {
                let z1 = pareto_from_uniform(open_uniform(rng), self.a1);
                let z2 = pareto_from_uniform(open_uniform(rng), self.a2);
                let z3 = pareto_from_uniform(open_uniform(rng), self.a1);
                if rng.random_bool(0.5) {
                    (z1, z3)
                } else {
                    (z2, z2)
                }
            }
            ModelKind::Model2 => {
                let xt: f64 = rng.sample(StandardNormal);
                let eps: f64 = rng.sample(StandardNormal);
                let yt = self.a2 * xt + (1.0 - self.a2 * self.a2).sqrt() * eps;
                (normal_sf(xt).powf(-self.a1), yt)
            }
        }
    }

    /// Distribution function of `Y`.
    pub fn true_f2(&self, y: f64) -> f64 {
        match self.kind {
            ModelKind::Model1 => pareto_mixture_cdf(y, self.a1, self.a2),
            ModelKind::Model2 => normal_cdf(y),
        }
    }

    /// Distribution function of `X`. In Model 1 `X` has the same mixture law
    /// as `Y`.
    pub fn true_f1(&self, x: f64) -> f64 {
        match self.kind {
            ModelKind::Model1 => pareto_mixture_cdf(x, self.a1, self.a2),
            ModelKind::Model2 => {
                if x <= 1.0 {
                    0.0
                } else {
                    1.0 - x.powf(-1.0 / self.a1)
                }
            }
        }
    }

    /// Quantile of `X` at `1 - p`.
    pub fn true_q1_upper(&self, p: f64) -> f64 {
        match self.kind {
            ModelKind::Model2 => p.powf(-self.a1),
            ModelKind::Model1 => {
                // survival 0.5 x^(-1/a1) + 0.5 x^(-1/a2) is decreasing on x > 1;
                // bisect in log x
                let sf = |lx: f64| 0.5 * (-lx / self.a1).exp() + 0.5 * (-lx / self.a2).exp();
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                while sf(hi) > p {
                    hi *= 2.0;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if sf(mid) > p {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                (0.5 * (lo + hi)).exp()
            }
        }
    }
}

/// `0.5 (1 - y^(-1/a1))_+ + 0.5 (1 - y^(-1/a2))_+`
pub fn pareto_mixture_cdf(y: f64, a1: f64, a2: f64) -> f64 {
    if y <= 1.0 {
        return 0.0;
    }
    0.5 * (1.0 - y.powf(-1.0 / a1)) + 0.5 * (1.0 - y.powf(-1.0 / a2))
}

/// Named parameter settings with their published reference values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub model: SimModel,
    /// The exponent column as printed in the reference table.
    pub printed_exponent: f64,
    /// Reference true values at `p = 0.01` and `p = 0.001`.
    pub tg_01: f64,
    pub tg_001: f64,
}

impl Preset {
    pub fn reference_value(&self, p: f64) -> Option<f64> {
        if (p - 0.01).abs() < 1e-15 {
            Some(self.tg_01)
        } else if (p - 0.001).abs() < 1e-15 {
            Some(self.tg_001)
        } else {
            None
        }
    }

    /// True when the printed exponent disagrees with `1 - 1/eta + gamma1`
    /// beyond its three-decimal rounding.
    pub fn exponent_mismatch(&self) -> bool {
        (self.printed_exponent - self.model.extrapolation_exponent()).abs() > 5e-4
    }
}

const fn preset(name: &'static str, kind: ModelKind, a1: f64, a2: f64, e: f64, t1: f64, t2: f64) -> Preset {
    Preset {
        name,
        model: SimModel { kind, a1, a2 },
        printed_exponent: e,
        tg_01: t1,
        tg_001: t2,
    }
}

pub const PRESETS: [Preset; 5] = [
    preset("model1a", ModelKind::Model1, 0.35, 0.3, 0.183, 0.5835, 0.8965),
    preset("model1b", ModelKind::Model1, 0.4, 0.35, 0.251, 1.0923, 1.9283),
    preset("model1c", ModelKind::Model1, 0.6, 0.5, 0.1, 4.2418, 10.9131),
    preset("model1d", ModelKind::Model1, 0.5, 0.4, 0.3, 1.3009, 2.1104),
    preset("model2", ModelKind::Model2, 0.6, 0.9, 0.547, 24.6808, 84.0422),
];

pub fn preset_by_name(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

/// Looks a preset up by its parameters.
pub fn preset_for(model: &SimModel) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.model == *model)
}

/// `(4/p) Cov(X, F2(Y) | F2(Y) > 1 - p)` from draws already restricted to
/// the conditioning event; `None` when fewer than two points.
pub fn conditional_tail_gini(x: &[f64], f2: &[f64], p: f64) -> Option<f64> {
    let m = x.len();
    if m < 2 || f2.len() != m {
        return None;
    }
    let mx = x.iter().sum::<f64>() / m as f64;
    let mf = f2.iter().sum::<f64>() / m as f64;
    let cov = x
        .iter()
        .zip(f2)
        .map(|(a, b)| (a - mx) * (b - mf))
        .sum::<f64>()
        / (m - 1) as f64;
    Some(4.0 / p * cov)
}

/// Replications with fewer conditioning-event points than this are dropped.
pub const MIN_TAIL_POINTS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct TrueValueEstimate {
    pub median: f64,
    /// Per-replication values in replication order; `None` for excluded ones.
    pub values: Vec<Option<f64>>,
}

impl TrueValueEstimate {
    pub fn excluded(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }
}

/// Monte Carlo approximation of the true tail Gini value: per replication,
/// `size` draws are filtered on the exact event `F2(Y) > 1 - p` and
/// [`conditional_tail_gini`] is applied; the result is the median over
/// replications. Replication `r` uses stream `(seed, r)`.
pub fn true_tg_oracle(model: &SimModel, p: f64, reps: usize, size: usize, seed: u64) -> Result<TrueValueEstimate> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid("p", format!("{p} not in (0, 1)")));
    }
    if p * (size as f64) < 100.0 {
        return Err(Error::InsufficientTail {
            needed: 100,
            got: (p * size as f64) as usize,
        });
    }
    if reps == 0 {
        return Err(Error::invalid("reps", "must be positive"));
    }
    let values: Vec<Option<f64>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngStream::new(seed, r as u64).rng();
            let mut xs = Vec::new();
            let mut fs = Vec::new();
            for _ in 0..size {
                let (x, y) = model.draw(&mut rng);
                let f = model.true_f2(y);
                if f > 1.0 - p {
                    xs.push(x);
                    fs.push(f);
                }
            }
            if xs.len() < MIN_TAIL_POINTS {
                None
            } else {
                conditional_tail_gini(&xs, &fs, p)
            }
        })
        .collect();
    let mut kept: Vec<f64> = values.iter().flatten().copied().collect();
    if kept.is_empty() {
        return Err(Error::InsufficientTail {
            needed: MIN_TAIL_POINTS,
            got: 0,
        });
    }
    Ok(TrueValueEstimate {
        median: median(&mut kept),
        values,
    })
}

pub(crate) fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}
