use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use tailgini::io::{read_loss_series, read_price_file, write_loss_series, write_price_file};
use tailgini::{summary_stats, weekly_losses, PriceSeries, RngStream};

/// Business-day prices over `years` years whose weekly losses are
/// `N(mean, sd^2)`; within a week the price wanders but the Friday close is
/// set by the weekly loss.
fn fixture(years: i64, mean: f64, sd: f64, seed: u64) -> (PriceSeries, Vec<f64>) {
    let mut rng = RngStream::new(seed, 0).rng();
    let normal = Normal::new(mean, sd).unwrap();
    let start = NaiveDate::from_ymd_opt(1993, 1, 4).unwrap();
    let end = start + Duration::weeks(52 * years + 1);
    let (mut dates, mut closes, mut losses) = (Vec::new(), Vec::new(), Vec::new());
    let mut friday = 100.0;
    let mut anchored = false;
    let mut d = start;
    while d < end {
        if d.weekday() == Weekday::Fri {
            let l: f64 = normal.sample(&mut rng);
            // the first Friday only anchors the series
            if anchored {
                friday *= 1.0 - l / 100.0;
                losses.push(l);
            }
            anchored = true;
            dates.push(d);
            closes.push(friday);
        } else if d.weekday().number_from_monday() < 5 {
            dates.push(d);
            closes.push(friday * rng.random_range(0.97..1.03));
        }
        d += Duration::days(1);
    }
    (PriceSeries::new("FIX", dates, closes).unwrap(), losses)
}

#[test]
fn thirty_year_fixture_has_about_1565_weeks() {
    let (prices, _) = fixture(30, -0.16, 3.11, 1);
    let l = weekly_losses(&prices).unwrap();
    assert!((1555..=1575).contains(&l.len()), "{}", l.len());
    assert_eq!(l.gaps, 0);
}

#[test]
fn weekly_losses_recover_generator() {
    let (prices, truth) = fixture(30, -0.16, 3.11, 2);
    let l = weekly_losses(&prices).unwrap();
    assert_eq!(l.len(), truth.len());
    for (a, b) in l.losses.iter().zip(&truth) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
    let s = summary_stats(&l.losses).unwrap();
    assert!((s.mean + 0.16).abs() < 0.3, "{s:?}");
    assert!((s.sd - 3.11).abs() < 0.25, "{s:?}");
}

#[test]
fn files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (prices, _) = fixture(2, 0.0, 2.0, 3);
    let path = dir.path().join("FIX.csv");
    write_price_file(&path, &prices).unwrap();
    let back = read_price_file(&path).unwrap();
    assert_eq!(back, prices);
    let l = weekly_losses(&back).unwrap();
    let lpath = dir.path().join("FIX.losses.csv");
    write_loss_series(&lpath, &l).unwrap();
    let (dates, losses) = read_loss_series(&lpath).unwrap();
    assert_eq!(dates, l.week_ending);
    assert_eq!(losses, l.losses);
}

#[test]
fn holiday_week_is_a_gap() {
    let (mut prices, _) = fixture(1, 0.0, 2.0, 4);
    let week = prices.dates[40].iso_week();
    let keep: Vec<bool> = prices.dates.iter().map(|d| d.iso_week() != week).collect();
    let mut it = keep.iter();
    prices.closes.retain(|_| *it.next().unwrap());
    prices.dates.retain(|d| d.iso_week() != week);
    let l = weekly_losses(&prices).unwrap();
    assert_eq!(l.gaps, 1);
}
