//! Daily closing prices to weekly percentage losses.

use chrono::{Datelike, IsoWeek, NaiveDate, Weekday};

use crate::error::{Error, Result};
use crate::sample::PairedSample;

#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    pub ticker: String,
    pub dates: Vec<NaiveDate>,
    pub closes: Vec<f64>,
}

impl PriceSeries {
    pub fn new(ticker: impl Into<String>, dates: Vec<NaiveDate>, closes: Vec<f64>) -> Result<Self> {
        if dates.len() != closes.len() {
            return Err(Error::LengthMismatch {
                x: dates.len(),
                y: closes.len(),
            });
        }
        if let Some(i) = dates.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::invalid(
                "date",
                format!("dates not strictly increasing at {}", dates[i + 1]),
            ));
        }
        if let Some(i) = closes.iter().position(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(Error::invalid(
                "close",
                format!("non-positive price {} on {}", closes[i], dates[i]),
            ));
        }
        Ok(Self {
            ticker: ticker.into(),
            dates,
            closes,
        })
    }
}

/// One loss per ISO week that has a price, except the first.
#[derive(Debug, Clone, PartialEq)]
pub struct LossSeries {
    pub ticker: String,
    pub weeks: Vec<IsoWeek>,
    /// Date of the last close in each week.
    pub week_ending: Vec<NaiveDate>,
    /// Percent, positive when the price fell.
    pub losses: Vec<f64>,
    /// Calendar weeks without any price between the first and last week.
    pub gaps: usize,
}

impl LossSeries {
    pub fn len(&self) -> usize {
        self.losses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.losses.is_empty()
    }
}

/// Loss convention: negated simple return in percent.
pub fn weekly_loss(prev_close: f64, close: f64) -> f64 {
    -100.0 * (close / prev_close - 1.0)
}

fn week_monday(w: IsoWeek) -> NaiveDate {
    NaiveDate::from_isoywd_opt(w.year(), w.week(), Weekday::Mon).expect("valid ISO week")
}

/// Takes the last close of every ISO week and converts consecutive weekly
/// closes into losses. A week with no prices is skipped, so the next loss
/// spans it; each such week is counted in `gaps`.
pub fn weekly_losses(prices: &PriceSeries) -> Result<LossSeries> {
    let mut closes: Vec<(IsoWeek, NaiveDate, f64)> = Vec::new();
    for (&d, &c) in prices.dates.iter().zip(&prices.closes) {
        let w = d.iso_week();
        match closes.last_mut() {
            Some(last) if last.0 == w => *last = (w, d, c),
            _ => closes.push((w, d, c)),
        }
    }
    if closes.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: closes.len(),
        });
    }
    let mut out = LossSeries {
        ticker: prices.ticker.clone(),
        weeks: Vec::with_capacity(closes.len() - 1),
        week_ending: Vec::with_capacity(closes.len() - 1),
        losses: Vec::with_capacity(closes.len() - 1),
        gaps: 0,
    };
    for pair in closes.windows(2) {
        let (w0, _, c0) = pair[0];
        let (w1, d1, c1) = pair[1];
        let span = (week_monday(w1) - week_monday(w0)).num_days() / 7;
        out.gaps += (span - 1).max(0) as usize;
        out.weeks.push(w1);
        out.week_ending.push(d1);
        out.losses.push(weekly_loss(c0, c1));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// `n - 1` denominator.
    pub sd: f64,
}

pub fn summary_stats(losses: &[f64]) -> Result<Summary> {
    let n = losses.len();
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    let mean = losses.iter().sum::<f64>() / n as f64;
    let var = losses.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(Summary {
        n,
        mean,
        sd: var.sqrt(),
    })
}

/// Pairs `(stock loss, index loss)` over the ISO weeks both series share.
pub fn align(stock: &LossSeries, index: &LossSeries) -> Result<(PairedSample, Vec<IsoWeek>)> {
    let (mut i, mut j) = (0, 0);
    let (mut x, mut y, mut weeks) = (Vec::new(), Vec::new(), Vec::new());
    while i < stock.len() && j < index.len() {
        match stock.weeks[i].cmp(&index.weeks[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                x.push(stock.losses[i]);
                y.push(index.losses[j]);
                weeks.push(stock.weeks[i]);
                i += 1;
                j += 1;
            }
        }
    }
    Ok((PairedSample::new(x, y)?, weeks))
}
