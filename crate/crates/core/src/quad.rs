//! Adaptive Gauss-Kronrod quadrature and dyadic semi-infinite integration.

use crate::error::{Error, Result};

// 15-point Kronrod abscissae (non-negative half) and weights, with the
// embedded 7-point Gauss weights for the odd-indexed nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One G7-K15 panel on `[a, b]`: Kronrod estimate and `|K15 - G7|`.
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive bisection of G7-K15 panels until each panel's error estimate is
/// below `max(rel_tol * |panel|, abs_tol)`.
pub fn integrate(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        rel_tol: f64,
        abs_tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let (value, err) = gk15(f, a, b);
        if !value.is_finite() {
            return Err(Error::Divergent(format!(
                "integrand not finite on [{a}, {b}]"
            )));
        }
        if err <= (rel_tol * value.abs()).max(abs_tol) {
            return Ok(value);
        }
        if depth == 0 {
            return Err(Error::Divergent(format!(
                "panel [{a}, {b}] failed to reach tolerance"
            )));
        }
        let mid = 0.5 * (a + b);
        Ok(recurse(f, a, mid, rel_tol, abs_tol * 0.5, depth - 1)?
            + recurse(f, mid, b, rel_tol, abs_tol * 0.5, depth - 1)?)
    }
    recurse(f, a, b, rel_tol, abs_tol, 48)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `[1, inf)` as panels `[2^j, 2^(j+1)]`.
    Up,
    /// `(0, 1]` as panels `[2^-(j+1), 2^-j]`.
    Down,
}

const MAX_PIECES: i32 = 1000;
const GROWTH_STRIKES: u32 = 4;

/// Integrates `f` over `[1, inf)` or `(0, 1]` one dyadic piece at a time.
///
/// Once consecutive pieces shrink geometrically with ratio `r < 1` the
/// remaining mass is estimated as `I_j r / (1 - r)` and added; convergence
/// is declared when that remainder is below `rel_tol` of the running sum.
/// Pieces that stop shrinking for several steps in a row, or running out of
/// pieces, are reported as divergence.
pub fn integrate_dyadic(f: &impl Fn(f64) -> f64, dir: Direction, rel_tol: f64) -> Result<f64> {
    let piece_tol = rel_tol * 1e-2;
    let mut sum = 0.0_f64;
    let mut prev: Option<f64> = None;
    let mut strikes = 0;
    for j in 0..MAX_PIECES {
        let (a, b) = match dir {
            Direction::Up => (2f64.powi(j), 2f64.powi(j + 1)),
            Direction::Down => (2f64.powi(-(j + 1)), 2f64.powi(-j)),
        };
        let piece = integrate(f, a, b, piece_tol, 0.0).or_else(|_| {
            // A panel that is exactly zero everywhere never meets a relative
            // criterion; accept an absolute one scaled to the running sum.
            integrate(f, a, b, piece_tol, piece_tol * sum.abs().max(f64::MIN_POSITIVE))
        })?;
        sum += piece;
        if !sum.is_finite() {
            return Err(Error::Divergent("partial sums overflow".into()));
        }
        if let Some(last) = prev {
            if piece == 0.0 && last == 0.0 && j >= 3 {
                return Ok(sum);
            }
            if last != 0.0 {
                let r = piece / last;
                if r.abs() < 1.0 {
                    strikes = 0;
                    let rest = piece * r / (1.0 - r);
                    if j >= 3 && rest.abs() <= rel_tol * sum.abs() {
                        return Ok(sum + rest);
                    }
                } else {
                    strikes += 1;
                    if strikes >= GROWTH_STRIKES && j >= 8 {
                        return Err(Error::Divergent(format!(
                            "dyadic pieces stopped shrinking (ratio {r:.4} at piece {j})"
                        )));
                    }
                }
            }
        }
        prev = Some(piece);
    }
    Err(Error::Divergent(format!(
        "partial sums not settled after {MAX_PIECES} dyadic pieces"
    )))
}

/// `int_0^inf f(x) dx`, split at `x = 1`.
pub fn integrate_half_line(f: &impl Fn(f64) -> f64, rel_tol: f64) -> Result<f64> {
    let lower = integrate_dyadic(f, Direction::Down, rel_tol)?;
    let upper = integrate_dyadic(f, Direction::Up, rel_tol)?;
    Ok(lower + upper)
}
