use statrs::distribution::{ContinuousCDF, Normal};
use tailgini::experiments::{smse_grid, SweepGrid, SweepParam};
use tailgini::simulation::{pareto_mixture_cdf, sample_pareto};
use tailgini::{
    eta_hat, hill_gamma1, preset_by_name, run_replications, true_tg_oracle, ExperimentSpec, PairedSample,
    RngStream, SimModel, TrueValues,
};

fn share_above(v: &[f64], t: f64) -> f64 {
    v.iter().filter(|&&x| x > t).count() as f64 / v.len() as f64
}

#[test]
fn pareto_survival_and_quantile() {
    // P(X > x) = x^(-1/a)
    let x = sample_pareto(0.5, 1_000_000, &mut RngStream::new(1, 0).rng()).unwrap();
    let s = share_above(&x, 2.0);
    assert!((s - 0.25).abs() < 0.002, "{s}");
    let s = share_above(&x, 4.0);
    assert!((s - 0.0625).abs() < 0.002, "{s}");

    let mut x = sample_pareto(0.35, 1_000_000, &mut RngStream::new(1, 1).rng()).unwrap();
    x.sort_by(f64::total_cmp);
    let q = x[989_999];
    let exact = 0.01f64.powf(-0.35);
    assert!((q / exact - 1.0).abs() < 0.02, "{q} vs {exact}");
}

#[test]
fn hill_recovers_pareto_index() {
    let x = sample_pareto(0.35, 5000, &mut RngStream::new(2, 0).rng()).unwrap();
    let g = hill_gamma1(&x, 250).unwrap();
    assert!((g - 0.35).abs() < 0.05, "{g}");
}

#[test]
fn model1_joint_exceedance() {
    let m = SimModel::model1(0.35, 0.3).unwrap();
    let n = 1_000_000;
    let s = m.sample_stream(n, RngStream::new(3, 0)).unwrap();
    let p = 0.01;
    // both margins are the same mixture, so one threshold serves both
    let q = m.true_q1_upper(p);
    let hits = s.x().iter().zip(s.y()).filter(|(&x, &y)| x > q && y > q).count() as f64;
    // exact: B = 0 contributes P(Z2 > q), B = 1 contributes P(Z1 > q) P(Z3 > q)
    let exact = 0.5 * q.powf(-1.0 / m.a2) + 0.5 * q.powf(-2.0 / m.a1);
    let sd = (exact * n as f64).sqrt();
    assert!((hits - exact * n as f64).abs() < 5.0 * sd, "{hits} vs {}", exact * n as f64);

    // the normalized joint probability approaches tau(1, 1) only slowly
    let limit = m.tau(1.0, 1.0);
    let ratio_at = |p: f64| {
        let q = m.true_q1_upper(p);
        (0.5 * q.powf(-1.0 / m.a2) + 0.5 * q.powf(-2.0 / m.a1)) / p.powf(1.0 / m.eta())
    };
    assert!((ratio_at(1e-10) / limit - 1.0).abs() < 0.1);
    assert!((ratio_at(1e-14) / limit - 1.0).abs() < (ratio_at(1e-10) / limit - 1.0).abs());
}

#[test]
fn model1_margin_matches_mixture_cdf() {
    let m = SimModel::model1(0.35, 0.3).unwrap();
    let s = m.sample_stream(100_000, RngStream::new(4, 0)).unwrap();
    let mut x = s.x().to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let ks = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = pareto_mixture_cdf(v, m.a1, m.a2);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    assert!(ks < 0.01, "{ks}");
}

#[test]
fn model1_upper_percentile_is_consistent_with_f2() {
    let m = SimModel::model1(0.35, 0.3).unwrap();
    let s = m.sample_stream(1_000_000, RngStream::new(5, 0)).unwrap();
    let mut y = s.y().to_vec();
    y.sort_by(f64::total_cmp);
    let f = m.true_f2(y[989_999]);
    assert!((f - 0.99).abs() < 0.002, "{f}");
}

#[test]
fn model2_margin_and_copula() {
    let m = SimModel::model2(0.5, 0.9).unwrap();
    let s = m.sample_stream(1_000_000, RngStream::new(6, 0)).unwrap();
    let surv = share_above(s.x(), 2.0);
    assert!((surv - 0.25).abs() < 0.002, "{surv}");
    let surv = share_above(s.x(), 4.0);
    assert!((surv - 0.0625).abs() < 0.002, "{surv}");

    let normal = Normal::standard();
    let xt: Vec<f64> = s.x().iter().map(|&x| normal.inverse_cdf(1.0 - x.powf(-1.0 / m.a1))).collect();
    let y = s.y();
    let n = y.len() as f64;
    let (mx, my) = (xt.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in xt.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    let r = sxy / (sxx * syy).sqrt();
    assert!((r - 0.9).abs() < 0.01, "{r}");

    let indep = SimModel::model2(0.5, 1e-9).unwrap();
    let s = indep.sample_stream(200_000, RngStream::new(6, 1)).unwrap();
    let both = s.x().iter().zip(s.y()).filter(|(&x, &y)| x > 2.0 && y > 0.0).count() as f64 / 200_000.0;
    assert!((both - 0.125).abs() < 0.005, "{both}");
}

#[test]
fn eta_hat_independent_and_model1() {
    let mut rng = RngStream::new(7, 0).rng();
    let x = sample_pareto(0.4, 5000, &mut rng).unwrap();
    let y = sample_pareto(0.4, 5000, &mut rng).unwrap();
    let e = eta_hat(&PairedSample::new(x, y).unwrap(), 250).unwrap();
    assert!((e - 0.5).abs() < 0.07, "{e}");

    let m = SimModel::model1(0.35, 0.3).unwrap();
    let s = m.sample_stream(5000, RngStream::new(7, 1)).unwrap();
    let e = eta_hat(&s, 250).unwrap();
    assert!((e - 6.0 / 7.0).abs() < 0.08, "{e}");
}

#[test]
fn true_value_oracle_model1c() {
    let m = preset_by_name("model1c").unwrap();
    let est = true_tg_oracle(&m.model, 0.01, 50, 200_000, 11).unwrap();
    assert!((est.median / 4.2418 - 1.0).abs() < 0.15, "{}", est.median);
    assert_eq!(est.excluded(), 0);
}

#[test]
fn smse_is_stable_in_alpha1() {
    let m = preset_by_name("model1a").unwrap();
    let sweep = SweepGrid {
        base: 0.05,
        alpha: vec![],
        alpha1: vec![0.03, 0.05, 0.07, 0.1],
        alpha2: vec![],
    };
    let spec = ExperimentSpec {
        model: m.model,
        n: 5000,
        m: 100,
        p_levels: vec![0.01],
        grid: vec![],
        seed: 12,
    }
    .with_sweep(&sweep);
    let truth = TrueValues::new(vec![(0.01, m.tg_01)]);
    let result = run_replications(&spec, &truth).unwrap();
    let rows = smse_grid(&result, &sweep);
    assert!(rows.iter().all(|r| r.varying == SweepParam::Alpha1));
    let v: Vec<f64> = rows.iter().map(|r| r.smse.unwrap()).collect();
    let (lo, hi) = v.iter().fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(hi / lo < 3.0, "{v:?}");
}
