//! Run configuration: a flat `key = value` file whose keys mirror the
//! command-line flags. Values given on the command line take precedence.
//!
//! ```text
//! # tail fractions
//! alpha = 0.09
//! alpha1 = 0.05
//! alpha2 = 0.05
//! p = 0.01, 0.001
//! model = model1a
//! seed = 7
//! ```

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::estimators::TailFractions;
use crate::simulation::{preset_by_name, SimModel};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub alpha: Option<f64>,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    pub p: Vec<f64>,
    pub n: Option<usize>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub model: Option<String>,
    pub out: Option<PathBuf>,
    pub paper_scale: Option<bool>,
    pub null_reps: Option<usize>,
    pub level: Option<f64>,
    pub index: Option<String>,
}

fn parse_value<T: std::str::FromStr>(path: &Path, line: usize, key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: format!("bad value for `{key}`: `{v}`"),
    })
}

impl RunConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut c = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    msg: format!("expected `key = value`, found `{content}`"),
                });
            };
            let (key, v) = (key.trim(), value.trim());
            match key {
                "alpha" => c.alpha = Some(parse_value(path, line, key, v)?),
                "alpha1" => c.alpha1 = Some(parse_value(path, line, key, v)?),
                "alpha2" => c.alpha2 = Some(parse_value(path, line, key, v)?),
                "p" => {
                    for part in v.split(',') {
                        c.p.push(parse_value(path, line, key, part.trim())?);
                    }
                }
                "n" => c.n = Some(parse_value(path, line, key, v)?),
                "reps" => c.reps = Some(parse_value(path, line, key, v)?),
                "seed" => c.seed = Some(parse_value(path, line, key, v)?),
                "model" => c.model = Some(v.to_string()),
                "out" => c.out = Some(PathBuf::from(v)),
                "paper-scale" | "paper_scale" => c.paper_scale = Some(parse_value(path, line, key, v)?),
                "null-reps" | "null_reps" => c.null_reps = Some(parse_value(path, line, key, v)?),
                "level" => c.level = Some(parse_value(path, line, key, v)?),
                "index" => c.index = Some(v.to_string()),
                _ => {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        line,
                        msg: format!("unknown key `{key}`"),
                    })
                }
            }
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, path)
    }

    /// Fields set in `self` win over those in `base`.
    pub fn merge(self, base: RunConfig) -> RunConfig {
        RunConfig {
            alpha: self.alpha.or(base.alpha),
            alpha1: self.alpha1.or(base.alpha1),
            alpha2: self.alpha2.or(base.alpha2),
            p: if self.p.is_empty() { base.p } else { self.p },
            n: self.n.or(base.n),
            reps: self.reps.or(base.reps),
            seed: self.seed.or(base.seed),
            model: self.model.or(base.model),
            out: self.out.or(base.out),
            paper_scale: self.paper_scale.or(base.paper_scale),
            null_reps: self.null_reps.or(base.null_reps),
            level: self.level.or(base.level),
            index: self.index.or(base.index),
        }
    }

    /// Tail fractions with unset entries taken from `default`.
    pub fn fractions(&self, default: TailFractions) -> Result<TailFractions> {
        TailFractions::new(
            self.alpha.unwrap_or(default.alpha),
            self.alpha1.unwrap_or(default.alpha1),
            self.alpha2.unwrap_or(default.alpha2),
        )
    }

    /// Checks the tail fractions and that every `p` lies in `(0, alpha]`.
    pub fn validate(&self, default: TailFractions) -> Result<()> {
        let fr = self.fractions(default)?;
        for &p in &self.p {
            if !(p > 0.0 && p <= fr.alpha) {
                return Err(Error::invalid("p", format!("{p} not in (0, alpha={}]", fr.alpha)));
            }
        }
        if let Some(level) = self.level {
            if !(level > 0.0 && level < 1.0) {
                return Err(Error::invalid("level", format!("{level} not in (0, 1)")));
            }
        }
        Ok(())
    }
}

/// Resolves a model name: a preset (`model1a` .. `model1d`, `model2`),
/// `custom:a1,a2` for the Pareto mixture, or `custom2:a1,a2` for the
/// Gaussian copula model.
pub fn parse_model(s: &str) -> Result<SimModel> {
    if let Some(p) = preset_by_name(s) {
        return Ok(p.model);
    }
    let (ctor, args): (fn(f64, f64) -> Result<SimModel>, &str) = if let Some(rest) = s.strip_prefix("custom2:") {
        (SimModel::model2, rest)
    } else if let Some(rest) = s.strip_prefix("custom:") {
        (SimModel::model1, rest)
    } else {
        return Err(Error::invalid("model", format!("unknown model `{s}`")));
    };
    let parts: Vec<&str> = args.split(',').map(str::trim).collect();
    let [a1, a2] = parts[..] else {
        return Err(Error::invalid("model", format!("expected two parameters in `{s}`")));
    };
    let num = |v: &str| {
        v.parse::<f64>()
            .map_err(|_| Error::invalid("model", format!("bad number `{v}` in `{s}`")))
    };
    ctor(num(a1)?, num(a2)?)
}
