use std::path::{Path, PathBuf};

use tailgini::experiments::{logratio_diagnostics, smse_grid};
use tailgini::io::{self, fmt_num, Table, NA};
use tailgini::simulation::preset_for;
use tailgini::tailtest::DEFAULT_NULL_REPS;
use tailgini::{
    align, fit_tail_gini, parse_model, run_replications, summary_stats, tqcc_pvalue, true_tg_oracle, weekly_losses,
    Error, ExperimentSpec, LossSeries, PairedSample, RngStream, RunConfig, SimModel, SweepGrid, TailConfig,
    TailFractions, TailGiniFit, TrueValues,
};

use crate::exit::{CliError, CliResult};
use crate::report::{self, PipelineRow};

const DEFAULT_MODEL: &str = "model1a";
const DEFAULT_N: usize = 5000;
const DEFAULT_P: [f64; 2] = [0.01, 0.001];
const DEFAULT_LEVEL: f64 = 0.05;

const DESK_TRUTH_REPS: usize = 50;
const DESK_TRUTH_SIZE: usize = 200_000;
const FULL_TRUTH_REPS: usize = 200;
const FULL_TRUTH_SIZE: usize = 1_000_000;

const EXPERIMENT_REPS: usize = 200;
const FULL_EXPERIMENT_REPS: usize = 2000;

/// Tail fractions used for the real-data workflow.
const PIPELINE_FRACTIONS: TailFractions = TailFractions {
    alpha: 0.09,
    alpha1: 0.08,
    alpha2: 0.08,
};

fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn model(cfg: &RunConfig) -> CliResult<SimModel> {
    Ok(parse_model(cfg.model.as_deref().unwrap_or(DEFAULT_MODEL))?)
}

fn p_levels(cfg: &RunConfig, default: &[f64]) -> Vec<f64> {
    if cfg.p.is_empty() {
        default.to_vec()
    } else {
        cfg.p.clone()
    }
}

fn seed(cfg: &RunConfig) -> u64 {
    cfg.seed.unwrap_or(0)
}

fn fractions(cfg: &RunConfig, default: TailFractions) -> CliResult<TailFractions> {
    cfg.validate(default)?;
    Ok(cfg.fractions(default)?)
}

fn fit_all(sample: &PairedSample, fr: TailFractions, ps: &[f64]) -> tailgini::Result<Vec<TailGiniFit>> {
    ps.iter()
        .map(|&p| fit_tail_gini(sample, TailConfig::from_fractions(sample.len(), fr, p)?))
        .collect()
}

fn warn_thin_tail(label: &str, fits: &[TailGiniFit]) {
    if let Some(f) = fits.iter().find(|f| f.k_below_lower_bound()) {
        eprintln!(
            "warning: {label}: k={} is at most n^(1-eta_hat)={:.1}; the intermediate estimate may be unreliable",
            f.config.k,
            (f.n as f64).powf(1.0 - f.eta_hat)
        );
    }
}

pub fn simulate(cfg: &RunConfig) -> CliResult<()> {
    let m = model(cfg)?;
    let n = cfg.n.unwrap_or(DEFAULT_N);
    let sample = m.sample_stream(n, RngStream::new(seed(cfg), 0))?;
    let path = out_dir(cfg).join("sample.csv");
    io::write_loss_file(&path, &sample)?;
    println!("wrote {} pairs to {}", n, path.display());
    Ok(())
}

fn truth_scale(cfg: &RunConfig) -> (usize, usize) {
    if cfg.paper_scale.unwrap_or(false) {
        (
            cfg.reps.unwrap_or(FULL_TRUTH_REPS),
            cfg.n.unwrap_or(FULL_TRUTH_SIZE),
        )
    } else {
        (cfg.reps.unwrap_or(DESK_TRUTH_REPS), cfg.n.unwrap_or(DESK_TRUTH_SIZE))
    }
}

pub fn truevalue(cfg: &RunConfig) -> CliResult<()> {
    let name = cfg.model.clone().unwrap_or_else(|| DEFAULT_MODEL.to_string());
    let m = parse_model(&name)?;
    let (reps, size) = truth_scale(cfg);
    let preset = preset_for(&m);
    if let Some(pr) = preset.filter(|pr| pr.exponent_mismatch()) {
        eprintln!(
            "warning: {}: published exponent {} differs from 1 - 1/eta + gamma1 = {:.4}",
            pr.name,
            pr.printed_exponent,
            m.extrapolation_exponent()
        );
    }
    let mut t = Table::new(&[
        "model",
        "p",
        "tg",
        "reps",
        "size",
        "excluded",
        "reference",
        "exponent",
        "printed_exponent",
        "exponent_flag",
    ]);
    for p in p_levels(cfg, &DEFAULT_P) {
        let est = true_tg_oracle(&m, p, reps, size, seed(cfg))?;
        let reference = preset.and_then(|pr| pr.reference_value(p));
        println!(
            "{name} p={p}: TG = {:.4} (reference {})",
            est.median,
            reference.map_or_else(|| NA.to_string(), |r| format!("{r:.4}"))
        );
        t.push(vec![
            name.clone(),
            fmt_num(p),
            fmt_num(est.median),
            reps.to_string(),
            size.to_string(),
            est.excluded().to_string(),
            reference.map_or_else(|| NA.to_string(), fmt_num),
            fmt_num(m.extrapolation_exponent()),
            preset.map_or_else(|| NA.to_string(), |pr| fmt_num(pr.printed_exponent)),
            preset.map_or_else(|| NA.to_string(), |pr| pr.exponent_mismatch().to_string()),
        ]);
    }
    t.write(&out_dir(cfg).join("truevalue.csv"))?;
    Ok(())
}

pub fn estimate(file: &Path, cfg: &RunConfig) -> CliResult<()> {
    let fr = fractions(cfg, TailFractions::default())?;
    let sample = io::read_loss_file(file).map_err(|e| CliError::from(e).context(file))?;
    let fits = fit_all(&sample, fr, &p_levels(cfg, &[0.01]))?;
    warn_thin_tail(&file.display().to_string(), &fits);
    for f in &fits {
        println!(
            "p={}: theta = {:.4} (HW {:.4}), gamma1_hat = {:.4}, eta_hat = {:.4}",
            f.config.p, f.theta_extreme, f.theta_hw, f.gamma1_hat, f.eta_hat
        );
    }
    report::fit_table(&fits).write(&out_dir(cfg).join("estimate.csv"))?;
    Ok(())
}

/// True values from a `truevalue` output file.
fn read_truth(path: &Path) -> CliResult<TrueValues> {
    let t = Table::read(path).map_err(|e| CliError::from(e).context(path))?;
    let bad = |msg: &str| Error::Parse {
        path: path.to_path_buf(),
        line: 1,
        msg: msg.to_string(),
    };
    let ps = t.f64_column("p").ok_or_else(|| bad("missing column `p`"))?;
    let tg = t.f64_column("tg").ok_or_else(|| bad("missing column `tg`"))?;
    let mut entries = Vec::new();
    for (i, (p, v)) in ps.into_iter().zip(tg).enumerate() {
        match (p, v) {
            (Some(p), Some(v)) => entries.push((p, v)),
            _ => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 2,
                    msg: "non-numeric p or tg".into(),
                }
                .into())
            }
        }
    }
    Ok(TrueValues::new(entries))
}

fn resolve_truth(cfg: &RunConfig, m: &SimModel, ps: &[f64], truth: Option<&Path>) -> CliResult<TrueValues> {
    if let Some(path) = truth {
        return read_truth(path);
    }
    let preset = preset_for(m);
    let mut entries = Vec::new();
    for &p in ps {
        let v = match preset.and_then(|pr| pr.reference_value(p)) {
            Some(v) => v,
            None => {
                let (reps, size) = truth_scale(&RunConfig {
                    reps: None,
                    n: None,
                    ..cfg.clone()
                });
                eprintln!("no reference value for p={p}; simulating ({reps} x {size})");
                // complemented seed keeps the truth draws apart from the replications
                true_tg_oracle(m, p, reps, size, !seed(cfg))?.median
            }
        };
        entries.push((p, v));
    }
    Ok(TrueValues::new(entries))
}

pub fn experiment(cfg: &RunConfig, truth: Option<&Path>, sweep: &[f64], sweep_base: f64) -> CliResult<()> {
    let m = model(cfg)?;
    let base = fractions(cfg, TailFractions::default())?;
    let ps = p_levels(cfg, &DEFAULT_P);
    let true_values = resolve_truth(cfg, &m, &ps, truth)?;
    let sweep_grid = (!sweep.is_empty()).then(|| SweepGrid::uniform(sweep_base, sweep));
    let mut spec = ExperimentSpec {
        model: m,
        n: cfg.n.unwrap_or(DEFAULT_N),
        m: cfg.reps.unwrap_or(if cfg.paper_scale.unwrap_or(false) {
            FULL_EXPERIMENT_REPS
        } else {
            EXPERIMENT_REPS
        }),
        p_levels: ps.clone(),
        grid: vec![base],
        seed: seed(cfg),
    };
    if let Some(g) = &sweep_grid {
        spec = spec.with_sweep(g);
    }
    let result = run_replications(&spec, &true_values)?;
    if result.failed_replications > 0 {
        eprintln!(
            "warning: {} of {} replications had a failed fit",
            result.failed_replications, spec.m
        );
    }

    let out = out_dir(cfg);
    report::records_table(&result).write(&out.join("records.csv"))?;
    let summaries = result.summaries();
    report::summary_table(&summaries).write(&out.join("summary.csv"))?;
    if let Some(g) = &sweep_grid {
        report::smse_table(&smse_grid(&result, g)).write(&out.join("smse.csv"))?;
    }
    let mut diags = Vec::new();
    for &p in &ps {
        match logratio_diagnostics(&result, base, p) {
            Ok(d) => diags.push((p, d)),
            Err(e) => eprintln!("warning: no QQ diagnostics for p={p}: {e}"),
        }
    }
    report::qq_table(&diags).write(&out.join("qq.csv"))?;
    report::logratio_table(&diags).write(&out.join("logratios.csv"))?;

    let meta = format!(
        "created = {}\nmodel = {}\nn = {}\nreps = {}\nseed = {}\n",
        chrono::Utc::now().to_rfc3339(),
        cfg.model.as_deref().unwrap_or(DEFAULT_MODEL),
        spec.n,
        spec.m,
        spec.seed
    );
    io::write_atomic(&out.join("run.meta"), meta.as_bytes())?;

    for s in summaries.iter().filter(|s| s.fractions == base) {
        println!("p={} {}: mean ratio {:.4} (sd {:.4})", s.p, s.method.name(), s.mean, s.sd);
    }
    for (p, d) in &diags {
        println!("p={p}: log-ratio QQ correlation {:.4}", d.correlation);
    }
    Ok(())
}

fn level(cfg: &RunConfig) -> CliResult<f64> {
    let level = cfg.level.unwrap_or(DEFAULT_LEVEL);
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid("level", format!("{level} not in (0, 1)")).into());
    }
    Ok(level)
}

pub fn test_indep(file: &Path, cfg: &RunConfig) -> CliResult<()> {
    let sample = io::read_loss_file(file).map_err(|e| CliError::from(e).context(file))?;
    let r = tqcc_pvalue(
        &sample,
        cfg.null_reps.unwrap_or(DEFAULT_NULL_REPS),
        seed(cfg),
        level(cfg)?,
    )?;
    println!(
        "TQCC = {:.4}, p-value = {:.4}: {}",
        r.statistic,
        r.p_value,
        if r.reject {
            "asymptotic independence rejected"
        } else {
            "asymptotic independence not rejected"
        }
    );
    report::indep_table(&r).write(&out_dir(cfg).join("indep.csv"))?;
    Ok(())
}

fn load_losses(path: &Path) -> CliResult<LossSeries> {
    let prices = io::read_price_file(path).map_err(|e| CliError::from(e).context(path))?;
    let losses = weekly_losses(&prices).map_err(|e| CliError::from(e).context(path))?;
    if losses.gaps > 0 {
        eprintln!("warning: {}: {} calendar weeks without prices", losses.ticker, losses.gaps);
    }
    Ok(losses)
}

pub fn ingest(files: &[PathBuf], cfg: &RunConfig) -> CliResult<()> {
    let out = out_dir(cfg);
    let mut t = Table::new(&["ticker", "n", "mean", "sd", "gaps"]);
    for f in files {
        let l = load_losses(f)?;
        let s = summary_stats(&l.losses)?;
        io::write_loss_series(&out.join(format!("{}.losses.csv", l.ticker)), &l)?;
        t.push(vec![
            l.ticker.clone(),
            s.n.to_string(),
            fmt_num(s.mean),
            fmt_num(s.sd),
            l.gaps.to_string(),
        ]);
    }
    t.write(&out.join("ingest.csv"))?;
    Ok(())
}

/// Price files in `dir`, sorted by name.
fn price_files(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(Error::from)? {
        let path = entry.map_err(Error::from)?.path();
        if path.extension().is_some_and(|e| e == "csv") && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

pub fn pipeline(dir: &Path, cfg: &RunConfig) -> CliResult<()> {
    let index_name = cfg
        .index
        .clone()
        .ok_or_else(|| CliError::usage("pipeline needs --index TICKER"))?;
    let fr = fractions(cfg, PIPELINE_FRACTIONS)?;
    let ps = p_levels(cfg, &DEFAULT_P);
    let null_reps = cfg.null_reps.unwrap_or(DEFAULT_NULL_REPS);
    let level = level(cfg)?;

    let series = price_files(dir)?
        .iter()
        .map(|f| load_losses(f))
        .collect::<CliResult<Vec<_>>>()?;
    let index = series
        .iter()
        .find(|s| s.ticker == index_name)
        .ok_or_else(|| CliError::from(Error::invalid("index", format!("no price file for `{index_name}` in {}", dir.display()))))?;

    let s = summary_stats(&index.losses)?;
    let mut rows = vec![PipelineRow {
        ticker: index.ticker.clone(),
        n: s.n,
        mean: s.mean,
        sd: s.sd,
        test: None,
        fits: Vec::new(),
    }];
    for stock in series.iter().filter(|s| s.ticker != index_name) {
        let (sample, _) = align(stock, index)?;
        let s = summary_stats(sample.x())?;
        let test = tqcc_pvalue(&sample, null_reps, seed(cfg), level)?;
        let fits = if test.reject {
            Vec::new()
        } else {
            match fit_all(&sample, fr, &ps) {
                Ok(f) => {
                    warn_thin_tail(&stock.ticker, &f);
                    f
                }
                Err(e) => {
                    eprintln!("warning: {}: estimation failed: {e}", stock.ticker);
                    Vec::new()
                }
            }
        };
        println!(
            "{}: TQCC {:.4}, p-value {:.4}, {}",
            stock.ticker,
            test.statistic,
            test.p_value,
            if test.reject { "excluded" } else { "retained" }
        );
        rows.push(PipelineRow {
            ticker: stock.ticker.clone(),
            n: s.n,
            mean: s.mean,
            sd: s.sd,
            test: Some(test),
            fits,
        });
    }
    report::pipeline_table(&rows, &ps).write(&out_dir(cfg).join("report.csv"))?;
    Ok(())
}
