//! Run configuration: a flat key-value config file plus flag overrides.
//!
//! Flags always win over file keys. The shape and plan mini-grammars are
//! documented in the README and in `--help`.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};

use anscombe::{
    AdjustmentPlan, BimodalBranch, Branch, ConstraintSet, Plan, QuadBranch, ShapeSpec, XFamily,
    XSource,
};

/// Environment variable holding the default output directory.
pub const OUT_DIR_ENV: &str = "ANSCOMBE_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

/// Fully resolved generation run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub constraints: ConstraintSet,
    pub x_source: XSource,
    /// Shape with a placeholder seed; per-dataset seeds are injected as
    /// `seed + ordinal` at generation time.
    pub shape: ShapeSpec,
    pub plan: Plan,
    pub count: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub format: ReportFormat,
    pub tolerance: f64,
}

/// Parses a flat `key = value` document. `#` starts a comment; blank lines
/// are ignored.
pub fn parse_key_values(text: &str) -> Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("config line {}: expected 'key = value'", lineno + 1))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

pub fn load_config_file(path: &Path) -> Result<HashMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    parse_key_values(&text)
}

/// Shape grammar:
///
/// - `on-line`
/// - `linear-noise:SD`
/// - `quadratic:left` | `quadratic:right`
/// - `linear-outlier:B0,B1,INDEX,Y`
/// - `bimodal-noise:SD`
/// - `quartic:F0,H1,H2,H3,H4[,JITTER_SD]`
pub fn parse_shape(s: &str) -> Result<ShapeSpec> {
    let (name, args) = match s.split_once(':') {
        Some((n, a)) => (n.trim(), a.trim()),
        None => (s.trim(), ""),
    };
    let numbers = |expect_min: usize, expect_max: usize| -> Result<Vec<f64>> {
        let parts: Vec<&str> = if args.is_empty() {
            vec![]
        } else {
            args.split(',').map(str::trim).collect()
        };
        if parts.len() < expect_min || parts.len() > expect_max {
            bail!(
                "shape '{name}' expects {expect_min}..={expect_max} parameters, got {}",
                parts.len()
            );
        }
        parts
            .iter()
            .map(|p| {
                p.parse::<f64>()
                    .with_context(|| format!("shape '{name}': bad number '{p}'"))
            })
            .collect()
    };
    match name {
        "on-line" => Ok(ShapeSpec::OnLine),
        "linear-noise" => {
            let v = numbers(1, 1)?;
            Ok(ShapeSpec::LinearNoise {
                noise_sd: v[0],
                seed: 0,
            })
        }
        "quadratic" => match args {
            "left" => Ok(ShapeSpec::Quadratic {
                branch: QuadBranch::Left,
            }),
            "right" => Ok(ShapeSpec::Quadratic {
                branch: QuadBranch::Right,
            }),
            other => bail!("quadratic branch must be 'left' or 'right', got '{other}'"),
        },
        "linear-outlier" => {
            let v = numbers(4, 4)?;
            if v[2].fract() != 0.0 || v[2] < 1.0 {
                bail!("linear-outlier index must be a positive integer, got {}", v[2]);
            }
            Ok(ShapeSpec::LinearOutlier {
                beta0p: v[0],
                beta1p: v[1],
                outlier_index: v[2] as usize,
                outlier_y: v[3],
            })
        }
        "bimodal-noise" => {
            let v = numbers(1, 1)?;
            Ok(ShapeSpec::BimodalNoise {
                noise_sd: v[0],
                seed: 0,
            })
        }
        "quartic" => {
            let v = numbers(5, 6)?;
            Ok(ShapeSpec::Quartic {
                f0: v[0],
                roots: [v[1], v[2], v[3], v[4]],
                jitter_sd: v.get(5).copied().unwrap_or(0.0),
                seed: 0,
            })
        }
        other => bail!(
            "unknown shape '{other}' (expected on-line, linear-noise, quadratic, \
             linear-outlier, bimodal-noise, or quartic)"
        ),
    }
}

pub fn parse_branch(s: &str) -> Result<Branch> {
    match s {
        "plus" => Ok(Branch::Plus),
        "minus" => Ok(Branch::Minus),
        other => bail!("branch must be 'plus' or 'minus', got '{other}'"),
    }
}

pub fn parse_x_family(s: &str) -> Result<XFamily> {
    match s {
        "uniform" => Ok(XFamily::Uniform),
        "bimodal-high" => Ok(XFamily::Bimodal(BimodalBranch::OutlierHigh)),
        "bimodal-low" => Ok(XFamily::Bimodal(BimodalBranch::OutlierLow)),
        other => bail!("x family must be uniform, bimodal-high, or bimodal-low, got '{other}'"),
    }
}

fn parse_index_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .with_context(|| format!("bad index '{p}'"))
        })
        .collect()
}

/// Plan grammar: `auto`, `none`, `triple:P1,P2,P3`, `group:I,J[,..]`.
/// The branch applies to `auto` and `triple` plans.
pub fn parse_plan(s: &str, branch: Branch) -> Result<Plan> {
    let (name, args) = match s.split_once(':') {
        Some((n, a)) => (n.trim(), a.trim()),
        None => (s.trim(), ""),
    };
    match name {
        "auto" => Ok(Plan::Auto(branch)),
        "none" => Ok(Plan::NoAdjust),
        "triple" => {
            let idx = parse_index_list(args)?;
            if idx.len() != 3 {
                bail!("triple plan needs exactly 3 indices, got {}", idx.len());
            }
            Ok(Plan::Triple(AdjustmentPlan::new(
                idx[0], idx[1], idx[2], branch,
            )?))
        }
        "group" => {
            let idx = parse_index_list(args)?;
            if idx.len() < 2 {
                bail!("group plan needs at least 2 free indices");
            }
            Ok(Plan::Group { free_indices: idx })
        }
        other => bail!("unknown plan '{other}' (expected auto, none, triple:..., group:...)"),
    }
}

pub fn parse_format(s: &str) -> Result<ReportFormat> {
    match s {
        "text" => Ok(ReportFormat::Text),
        "json" => Ok(ReportFormat::Json),
        other => bail!("format must be 'text' or 'json', got '{other}'"),
    }
}

pub fn parse_x_values(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .with_context(|| format!("bad x value '{p}'"))
        })
        .collect()
}

/// Merges flag values over config-file keys and resolves the run.
pub struct ConfigBuilder {
    pub file: HashMap<String, String>,
    pub n: Option<usize>,
    pub mean_x: Option<f64>,
    pub var_x: Option<f64>,
    pub mean_y: Option<f64>,
    pub var_y: Option<f64>,
    pub beta1: Option<f64>,
    pub shape: Option<String>,
    pub x_family: Option<String>,
    pub x_values: Option<String>,
    pub plan: Option<String>,
    pub triple: Option<String>,
    pub branch: Option<String>,
    pub seed: Option<u64>,
    pub count: Option<usize>,
    pub tolerance: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub format: Option<String>,
}

impl ConfigBuilder {
    fn file_parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.file.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| anyhow!("config key '{key}': {e}")),
        }
    }

    fn required_f64(&self, flag: Option<f64>, key: &str) -> Result<f64> {
        flag.or(self.file_parsed(key)?)
            .ok_or_else(|| anyhow!("missing constraint '{key}' (flag --{})", key.replace('_', "-")))
    }

    pub fn build(self) -> Result<RunConfig> {
        let count = self.count.or(self.file_parsed("count")?).unwrap_or(1);
        if count == 0 {
            bail!("count must be at least 1");
        }
        let tolerance = self.tolerance.or(self.file_parsed("tol")?).unwrap_or(1e-6);
        if !(tolerance.is_finite() && tolerance > 0.0) {
            bail!("tolerance must be positive, got {tolerance}");
        }
        let seed = self.seed.or(self.file_parsed("seed")?).unwrap_or(0);

        let n = self
            .n
            .or(self.file_parsed("n")?)
            .ok_or_else(|| anyhow!("missing constraint 'n' (flag --n)"))?;
        let constraints = ConstraintSet::new(
            n,
            self.required_f64(self.mean_x, "mean_x")?,
            self.required_f64(self.var_x, "var_x")?,
            self.required_f64(self.mean_y, "mean_y")?,
            self.required_f64(self.var_y, "var_y")?,
            self.required_f64(self.beta1, "beta1")?,
        )?;

        let shape_text = self
            .shape
            .or_else(|| self.file.get("shape").cloned())
            .ok_or_else(|| anyhow!("missing 'shape' (flag --shape)"))?;
        let shape = parse_shape(&shape_text)?;

        let x_source = match self.x_values.or_else(|| self.file.get("x").cloned()) {
            Some(list) => XSource::Explicit(parse_x_values(&list)?),
            None => {
                let family_text = self
                    .x_family
                    .or_else(|| self.file.get("x_family").cloned())
                    .unwrap_or_else(|| "uniform".to_string());
                XSource::Grid(parse_x_family(&family_text)?)
            }
        };

        let branch = parse_branch(
            &self
                .branch
                .or_else(|| self.file.get("branch").cloned())
                .unwrap_or_else(|| "plus".to_string()),
        )?;
        let plan = match self.triple {
            Some(t) => parse_plan(&format!("triple:{t}"), branch)?,
            None => {
                let plan_text = self
                    .plan
                    .or_else(|| self.file.get("plan").cloned())
                    .unwrap_or_else(|| "auto".to_string());
                parse_plan(&plan_text, branch)?
            }
        };

        let out_dir = self
            .out_dir
            .or_else(|| self.file.get("out").map(PathBuf::from))
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));

        let format = parse_format(
            &self
                .format
                .clone()
                .or_else(|| self.file.get("format").cloned())
                .unwrap_or_else(|| "text".to_string()),
        )?;

        Ok(RunConfig {
            constraints,
            x_source,
            shape,
            plan,
            count,
            seed,
            out_dir,
            format,
            tolerance,
        })
    }
}
