//! Generalized extreme value distribution and its maximum likelihood fit.

use rand::Rng;

use crate::error::{Error, Result};
use crate::simulation::open_uniform;

/// Below this |shape| the Gumbel limit forms are used.
const GUMBEL_EPS: f64 = 1e-7;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `F(x) = exp(-(1 + shape (x - location)/scale)^(-1/shape))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gev {
    pub location: f64,
    pub scale: f64,
    pub shape: f64,
}

impl Gev {
    pub fn new(location: f64, scale: f64, shape: f64) -> Result<Self> {
        if !(scale > 0.0) || !location.is_finite() || !shape.is_finite() {
            return Err(Error::invalid("gev", format!("bad parameters ({location}, {scale}, {shape})")));
        }
        Ok(Self {
            location,
            scale,
            shape,
        })
    }

    /// `1 + shape z`, or `None` outside the support.
    fn support_term(&self, x: f64) -> Option<f64> {
        let z = (x - self.location) / self.scale;
        let t = 1.0 + self.shape * z;
        (t > 0.0).then_some(t)
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        let z = (x - self.location) / self.scale;
        if self.shape.abs() < GUMBEL_EPS {
            return -self.scale.ln() - z - (-z).exp();
        }
        match self.support_term(x) {
            Some(t) => {
                let lt = t.ln();
                -self.scale.ln() - (1.0 + 1.0 / self.shape) * lt - (-lt / self.shape).exp()
            }
            None => f64::NEG_INFINITY,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        (-self.unit_frechet(x).recip()).exp()
    }

    /// Maps `x` to the unit Frechet scale: `-1 / log F(x)`, computed as
    /// `(1 + shape z)^(1/shape)` so it stays finite deep in the upper tail.
    pub fn unit_frechet(&self, x: f64) -> f64 {
        let z = (x - self.location) / self.scale;
        if self.shape.abs() < GUMBEL_EPS {
            return z.exp();
        }
        match self.support_term(x) {
            Some(t) => (t.ln() / self.shape).exp(),
            None if self.shape > 0.0 => 0.0,
            None => f64::INFINITY,
        }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let e = -u.ln();
        if self.shape.abs() < GUMBEL_EPS {
            self.location - self.scale * e.ln()
        } else {
            self.location + self.scale * (e.powf(-self.shape) - 1.0) / self.shape
        }
    }

    pub fn sample(&self, n: usize, rng: &mut impl Rng) -> Vec<f64> {
        (0..n).map(|_| self.quantile(open_uniform(rng))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GevFit {
    pub gev: Gev,
    pub log_likelihood: f64,
    pub converged: bool,
}

pub const MIN_GEV_SAMPLE: usize = 30;

fn neg_log_lik(data: &[f64], theta: &[f64; 3]) -> f64 {
    let gev = Gev {
        location: theta[0],
        scale: theta[1].exp(),
        shape: theta[2],
    };
    let mut ll = 0.0;
    for &x in data {
        let v = gev.log_pdf(x);
        if !v.is_finite() {
            return f64::INFINITY;
        }
        ll += v;
    }
    -ll
}

/// Maximum likelihood fit over `(location, log scale, shape)` by
/// Nelder-Mead from several moment-based starting points.
pub fn fit_gev(series: &[f64]) -> Result<GevFit> {
    let n = series.len();
    if n < MIN_GEV_SAMPLE {
        return Err(Error::TooShort {
            needed: MIN_GEV_SAMPLE,
            got: n,
        });
    }
    if let Some(index) = series.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let sd = (series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    if !(sd > 1e-12 * mean.abs().max(1.0)) {
        return Err(Error::Degenerate("series has zero spread".into()));
    }
    // Gumbel moment estimates
    let scale0 = sd * 6f64.sqrt() / std::f64::consts::PI;
    let loc0 = mean - EULER_GAMMA * scale0;

    let f = |theta: &[f64; 3]| neg_log_lik(series, theta);
    let mut best: Option<GevFit> = None;
    for shape0 in [0.0, 0.1, -0.1, 0.3, 0.6] {
        let start = [loc0, scale0.ln(), shape0];
        if !f(&start).is_finite() {
            continue;
        }
        let step = [0.5 * scale0, 0.3, 0.1];
        let first = nelder_mead(&f, start, step, 1e-10, 4000);
        // restart from the optimum to escape a collapsed simplex
        let second = nelder_mead(&f, first.x, [0.1 * scale0, 0.05, 0.02], 1e-12, 4000);
        let (x, fx, converged) = if second.fx <= first.fx {
            (second.x, second.fx, second.converged)
        } else {
            (first.x, first.fx, first.converged)
        };
        if !converged || !fx.is_finite() {
            continue;
        }
        let fit = GevFit {
            gev: Gev {
                location: x[0],
                scale: x[1].exp(),
                shape: x[2],
            },
            log_likelihood: -fx,
            converged,
        };
        if best.is_none_or(|b| fit.log_likelihood > b.log_likelihood) {
            best = Some(fit);
        }
    }
    best.ok_or_else(|| Error::NonConvergence("GEV likelihood: no starting point converged".into()))
}

struct Optimum {
    x: [f64; 3],
    fx: f64,
    converged: bool,
}

fn nelder_mead(f: &impl Fn(&[f64; 3]) -> f64, x0: [f64; 3], step: [f64; 3], tol: f64, max_iter: usize) -> Optimum {
    const D: usize = 3;
    let mut simplex: Vec<([f64; D], f64)> = Vec::with_capacity(D + 1);
    simplex.push((x0, f(&x0)));
    for i in 0..D {
        let mut x = x0;
        x[i] += step[i];
        simplex.push((x, f(&x)));
    }
    let lerp = |a: &[f64; D], b: &[f64; D], t: f64| -> [f64; D] {
        let mut out = [0.0; D];
        for i in 0..D {
            out[i] = a[i] + t * (b[i] - a[i]);
        }
        out
    };

    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[D].1);
        if worst.is_finite() && (worst - best).abs() <= tol * (best.abs() + 1e-10) {
            return Optimum {
                x: simplex[0].0,
                fx: best,
                converged: true,
            };
        }
        let mut centroid = [0.0; D];
        for (x, _) in &simplex[..D] {
            for i in 0..D {
                centroid[i] += x[i] / D as f64;
            }
        }
        let worst_x = simplex[D].0;
        let reflected = lerp(&centroid, &worst_x, -1.0);
        let fr = f(&reflected);
        if fr < simplex[0].1 {
            let expanded = lerp(&centroid, &worst_x, -2.0);
            let fe = f(&expanded);
            simplex[D] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[D - 1].1 {
            simplex[D] = (reflected, fr);
        } else {
            let (contracted, fc) = if fr < worst {
                let c = lerp(&centroid, &worst_x, -0.5);
                (c, f(&c))
            } else {
                let c = lerp(&centroid, &worst_x, 0.5);
                (c, f(&c))
            };
            if fc < fr.min(worst) {
                simplex[D] = (contracted, fc);
            } else {
                // shrink toward the best vertex
                let best_x = simplex[0].0;
                for v in simplex.iter_mut().skip(1) {
                    v.0 = lerp(&best_x, &v.0, 0.5);
                    v.1 = f(&v.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    Optimum {
        x: simplex[0].0,
        fx: simplex[0].1,
        converged: false,
    }
}
