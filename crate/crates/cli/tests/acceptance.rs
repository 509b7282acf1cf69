//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion does.

use std::fmt::Write as _;
use std::path::Path;
use std::process::Command;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::Rng;
use tailgini::estimators::extrapolation_exponent;
use tailgini::experiments::logratio_diagnostics;
use tailgini::io::{write_price_file, Table};
use tailgini::{
    eta_hat, fit_tail_gini, hill_gamma1, phi0_constant, preset_by_name, run_replications, tg_bruteforce,
    tg_intermediate, tqcc_pvalue, true_tg_oracle, Error, ExperimentSpec, Method, PairedSample, PriceSeries,
    RngStream, SimModel, TailConfig, TailFractions, TrueValues, PRESETS,
};

type Outcome = Result<String, String>;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tailgini"))
}

fn run_bin(args: &[&str]) -> Result<(), String> {
    let out = bin().args(args).output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "tailgini {} exited with {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ))
    }
}

fn within(v: f64, target: f64, rel: f64) -> bool {
    (v / target - 1.0).abs() <= rel
}

/// Desk-scale true values through the command line.
fn criterion_1(dir: &Path) -> Outcome {
    let mut detail = String::new();
    let mut ok = true;
    for (name, target) in [("model1a", 0.5835), ("model1c", 4.2418)] {
        let out = dir.join(name);
        let start = std::time::Instant::now();
        run_bin(&["truevalue", "--model", name, "--p", "0.01", "--seed", "1", "--out", out.to_str().unwrap()])?;
        let secs = start.elapsed().as_secs_f64();
        let t = Table::read(&out.join("truevalue.csv")).map_err(|e| e.to_string())?;
        let tg = t.f64_column("tg").unwrap()[0].unwrap();
        let reps = &t.rows[0][t.column("reps").unwrap()];
        let size = &t.rows[0][t.column("size").unwrap()];
        let pass = within(tg, target, 0.15) && secs < 120.0 && reps == "50" && size == "200000";
        ok &= pass;
        write!(detail, "{name}: {tg:.4} vs {target} ({secs:.1}s); ").unwrap();
    }
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Mean and sd of the AIE and HW ratios at the default fractions.
fn ratio_table(name: &str, seed: u64) -> Result<[(f64, f64); 2], String> {
    let preset = preset_by_name(name).unwrap();
    let spec = ExperimentSpec {
        model: preset.model,
        n: 5000,
        m: 200,
        p_levels: vec![0.01],
        grid: vec![TailFractions::default()],
        seed,
    };
    let truth = TrueValues::new(vec![(0.01, preset.tg_01)]);
    let result = run_replications(&spec, &truth).map_err(|e| e.to_string())?;
    let get = |m| {
        let s = result.summary(TailFractions::default(), 0.01, m).unwrap();
        (s.mean, s.sd)
    };
    Ok([get(Method::Aie), get(Method::Hw)])
}

fn criterion_2() -> Outcome {
    let mut detail = String::new();
    let mut ok = true;
    for (i, name) in ["model1a", "model1b", "model1c", "model1d"].iter().enumerate() {
        let [(am, asd), (hm, hsd)] = ratio_table(name, 20 + i as u64)?;
        let ordering = (am - 1.0).abs() < (hm - 1.0).abs() && asd < hsd;
        ok &= ordering;
        if *name == "model1a" {
            ok &= (am - 0.9263).abs() <= 0.10 && (hm - 1.3955).abs() <= 0.20;
        }
        write!(detail, "{name}: AIE {am:.3}({asd:.3}) HW {hm:.3}({hsd:.3}); ").unwrap();
    }
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_3() -> Outcome {
    let e1 = extrapolation_exponent(0.35, 6.0 / 7.0);
    let e2 = extrapolation_exponent(0.6, 0.95);
    let m2 = SimModel::model2(0.6, 0.9).unwrap().extrapolation_exponent();
    let flags: Vec<bool> = PRESETS.iter().map(|p| p.exponent_mismatch()).collect();
    let detail = format!("{e1:.12}, {e2:.12}, flags {flags:?}");
    let ok = (e1 - 0.183_333_333_333_333).abs() < 1e-10
        && (e2 - 0.547_368_421_052_631_6).abs() < 1e-10
        && (m2 - e2).abs() < 1e-10
        && (e1 * 1000.0).round() / 1000.0 == 0.183
        && (e2 * 1000.0).round() / 1000.0 == 0.547
        && flags == [false, true, true, true, false];
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_4() -> Outcome {
    let mut rng = RngStream::new(44, 0).rng();
    let mut worst = 0.0f64;
    let mut ties = 0;
    for case in 0..500 {
        let n = rng.random_range(4..=50);
        let (x, y): (Vec<f64>, Vec<f64>) = (0..n)
            .map(|_| match case % 3 {
                0 => (rng.random_range(-1.0..4.0), rng.random_range(0.0..1.0)),
                1 => (f64::from(rng.random_range(-2..6)), f64::from(rng.random_range(0..5))),
                _ => (-rng.random_range(0.1..3.0), rng.random_range(0.0..1.0)),
            })
            .unzip();
        let s = PairedSample::new(x, y).unwrap();
        let k = rng.random_range(2..n);
        let fast = tg_intermediate(&s, k).map_err(|e| e.to_string())?;
        let brute = tg_bruteforce(&s, k).map_err(|e| e.to_string())?;
        ties += usize::from(fast.ties_at_threshold > 0);
        worst = worst.max((fast.value - brute).abs() / brute.abs().max(1.0));
    }
    let detail = format!("max scaled difference {worst:e}, {ties} samples with threshold ties");
    if worst <= 1e-12 && ties > 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_5() -> Outcome {
    let samples = (60usize..200).prop_flat_map(|n| {
        prop::collection::vec((0.001f64..1.0, -4.0f64..4.0, 0.0f64..1.0), n).prop_map(|d| {
            let (x, y): (Vec<f64>, Vec<f64>) = d
                .into_iter()
                .map(|(u, z, w)| {
                    let p = u.powf(-0.4);
                    (if w < 0.1 { -p } else { p }, z + 0.5 * p.ln())
                })
                .unzip();
            PairedSample::new(x, y).unwrap()
        })
    });
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1e-300);
    let mut runner = TestRunner::new(Config::with_cases(100));
    let mut names = Vec::new();
    let strategy = (samples, 0.01f64..100.0);

    let r = runner.run(&strategy, |(s, c)| {
        let k1 = s.len() / 6;
        let scaled: Vec<f64> = s.x().iter().map(|v| c * v).collect();
        let (a, b) = (hill_gamma1(s.x(), k1).unwrap(), hill_gamma1(&scaled, k1).unwrap());
        prop_assert!((a - b).abs() <= 1e-10);
        Ok(())
    });
    names.push(("hill scale", r.is_ok()));

    let r = runner.run(&strategy, |(s, c)| {
        let k2 = s.len() / 6;
        let t = s
            .map_x(|v| v.signum() * v.abs().powf(c.sqrt()) - 1.0)
            .unwrap()
            .map_y(|v| (v / 3.0).exp())
            .unwrap();
        prop_assert!(close(eta_hat(&s, k2).unwrap(), eta_hat(&t, k2).unwrap()));
        Ok(())
    });
    names.push(("eta monotone", r.is_ok()));

    let cfg = |n: usize| TailConfig::new(n / 5, n / 6, n / 6, 0.5 / n as f64).unwrap();
    let r = runner.run(&strategy, |(s, c)| {
        let a = fit_tail_gini(&s, cfg(s.len())).unwrap();
        let b = fit_tail_gini(&s.map_x(|v| c * v).unwrap(), cfg(s.len())).unwrap();
        prop_assert!(close(c * a.theta_extreme, b.theta_extreme));
        prop_assert!(close(c * a.theta_intermediate, b.theta_intermediate));
        Ok(())
    });
    names.push(("theta x-scale", r.is_ok()));

    let r = runner.run(&strategy, |(s, c)| {
        let a = fit_tail_gini(&s, cfg(s.len())).unwrap();
        let t = s.map_y(|v| v.powi(3) + c * v).unwrap();
        let b = fit_tail_gini(&t, cfg(s.len())).unwrap();
        prop_assert!(close(a.theta_extreme, b.theta_extreme));
        Ok(())
    });
    names.push(("theta y-monotone", r.is_ok()));

    let detail = format!("{names:?}");
    if names.iter().all(|(_, ok)| *ok) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_6() -> Outcome {
    let preset = preset_by_name("model1b").unwrap();
    let spec = ExperimentSpec {
        model: preset.model,
        n: 5000,
        m: 500,
        p_levels: vec![0.01],
        grid: vec![TailFractions::default()],
        seed: 0,
    };
    let truth = TrueValues::new(vec![(0.01, preset.tg_01)]);
    let result = run_replications(&spec, &truth).map_err(|e| e.to_string())?;
    let d = logratio_diagnostics(&result, TailFractions::default(), 0.01).map_err(|e| e.to_string())?;
    let detail = format!("QQ correlation {:.4} over {} log-ratios", d.correlation, d.log_ratios.len());
    if d.correlation >= 0.98 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_7() -> Outcome {
    let m = preset_by_name("model1a").unwrap().model;
    let p = 1e-3;
    let (g, eta) = (m.gamma1(), m.eta());
    let lc = phi0_constant(|x| m.tau(x, 1.0), g, eta).map_err(|e| e.to_string())?;
    let tg = true_tg_oracle(&m, p, 50, 1_000_000, 7).map_err(|e| e.to_string())?.median;
    let scaled = tg / (p.powf(1.0 / eta - 1.0) * m.true_q1_upper(p));

    let m2 = SimModel::model2(0.6, 0.9).unwrap();
    let div = phi0_constant(|x| m2.tau(x, 1.0), m2.gamma1(), m2.eta());
    let divergent = matches!(div, Err(Error::Divergent(_)));

    let detail = format!(
        "model1a: MC {scaled:.4} vs phi0 {:.4} (ratio {:.3}); model2 divergent: {divergent}",
        lc.phi0,
        scaled / lc.phi0
    );
    if within(scaled, lc.phi0, 0.20) && divergent {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_8() -> Outcome {
    let datasets = 200;
    let mut rejected = 0;
    for s in 0..datasets {
        let mut rng = RngStream::new(800, s).rng();
        let x: Vec<f64> = (0..1565).map(|_| rng.random_range(0.0f64..1.0).powf(-0.4)).collect();
        let y: Vec<f64> = (0..1565).map(|_| rng.random_range(0.0f64..1.0).ln()).collect();
        let d = PairedSample::new(x, y).unwrap();
        let r = tqcc_pvalue(&d, 999, s, 0.05).map_err(|e| e.to_string())?;
        rejected += usize::from(r.reject);
    }
    let size = rejected as f64 / datasets as f64;

    let mut rng = RngStream::new(801, 0).rng();
    let x: Vec<f64> = (0..1565).map(|_| rng.random_range(0.0f64..1.0).powf(-0.4)).collect();
    let y: Vec<f64> = x.iter().map(|v| v.ln() * 2.0 + 1.0).collect();
    let como = tqcc_pvalue(&PairedSample::new(x, y).unwrap(), 999, 0, 0.05).map_err(|e| e.to_string())?;

    let detail = format!("size {size:.3} ({rejected}/{datasets}); comonotone p-value {:.4}", como.p_value);
    if (size - 0.05).abs() <= 0.03 && como.p_value < 0.01 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// One price per week from weekly log-returns.
fn weekly_prices(ticker: &str, log_returns: &[f64]) -> PriceSeries {
    let start = chrono::NaiveDate::from_ymd_opt(1993, 1, 8).unwrap();
    let mut price = 50.0;
    let mut dates = vec![start];
    let mut closes = vec![price];
    for (i, r) in log_returns.iter().enumerate() {
        price *= r.exp();
        dates.push(start + chrono::Duration::weeks(i as i64 + 1));
        closes.push(price);
    }
    PriceSeries::new(ticker, dates, closes).unwrap()
}

fn heavy_returns(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let mag = 0.02 * (rng.random_range(0.0f64..1.0).powf(-0.35) - 1.0);
            if rng.random_bool(0.5) {
                mag
            } else {
                -mag
            }
        })
        .collect()
}

fn criterion_9(dir: &Path) -> Outcome {
    let prices = dir.join("prices");
    let out = dir.join("report");
    let n = 1565;
    let mut rng = RngStream::new(900, 0).rng();
    let index = heavy_returns(&mut rng, n);
    write_price_file(&prices.join("IDX.csv"), &weekly_prices("IDX", &index)).map_err(|e| e.to_string())?;
    // same returns as the index: perfectly tail dependent
    write_price_file(&prices.join("COMO.csv"), &weekly_prices("COMO", &index)).map_err(|e| e.to_string())?;
    for t in ["IND1", "IND2", "IND3"] {
        let r = heavy_returns(&mut rng, n);
        write_price_file(&prices.join(format!("{t}.csv")), &weekly_prices(t, &r)).map_err(|e| e.to_string())?;
    }
    run_bin(&[
        "pipeline",
        prices.to_str().unwrap(),
        "--index",
        "IDX",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ])?;
    let t = Table::read(&out.join("report.csv")).map_err(|e| e.to_string())?;
    let expected = [
        "ticker",
        "n",
        "mean",
        "sd",
        "tqcc",
        "p_value",
        "retained",
        "gamma1_hat",
        "eta_hat",
        "theta_0.01",
        "theta_0.001",
    ];
    let mut problems = Vec::new();
    if t.header != expected {
        problems.push(format!("header {:?}", t.header));
    }
    let row = |name: &str| t.rows.iter().find(|r| r[0] == name).cloned();
    let col = |name: &str| t.column(name).unwrap_or(0);
    match row("COMO") {
        Some(r) if r[col("retained")] == "false" && r[col("theta_0.01")] == "NA" => {}
        other => problems.push(format!("COMO row {other:?}")),
    }
    for tk in ["IND1", "IND2", "IND3"] {
        match row(tk) {
            // independent of the index, so the estimates only need to exist
            Some(r)
                if r[col("retained")] == "true"
                    && ["gamma1_hat", "eta_hat", "theta_0.01", "theta_0.001"]
                        .iter()
                        .all(|c| r[col(c)].parse::<f64>().is_ok_and(f64::is_finite)) => {}
            other => problems.push(format!("{tk} row {other:?}")),
        }
    }
    match row("IDX") {
        Some(r) if r[col("tqcc")] == "NA" && r[col("n")] == n.to_string() => {}
        other => problems.push(format!("IDX row {other:?}")),
    }
    if problems.is_empty() {
        Ok(format!("{} rows, schema and screening as expected", t.rows.len()))
    } else {
        Err(problems.join("; "))
    }
}

// Runs without the libtest harness so every criterion line reaches the
// terminal even when all of them pass.
fn main() {
    let dir = tempfile::tempdir().unwrap();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("1 true-value oracle", Box::new(|| criterion_1(dir.path()))),
        ("2 ratio table", Box::new(criterion_2)),
        ("3 extrapolation exponent", Box::new(criterion_3)),
        ("4 oracle equivalence", Box::new(criterion_4)),
        ("5 invariance suite", Box::new(criterion_5)),
        ("6 log-ratio normality", Box::new(criterion_6)),
        ("7 phi0 limit", Box::new(criterion_7)),
        ("8 independence screen", Box::new(criterion_8)),
        ("9 pipeline fixture", Box::new(|| criterion_9(dir.path()))),
    ];
    let mut failed = Vec::new();
    for (name, check) in &criteria {
        match check() {
            Ok(detail) => println!("criterion {name}: PASS ({detail})"),
            Err(detail) => {
                println!("criterion {name}: FAIL ({detail})");
                failed.push(*name);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed: {failed:?}");
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
