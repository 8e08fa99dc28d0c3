use std::path::PathBuf;

use anyhow::{anyhow, Context, Result};
use clap::Args;

use anscombe::{
    generate, linregress, moment_report, quartet, verify, ConstraintSet, DatasetPair, Generated,
};

use crate::config::{
    load_config_file, parse_format, ConfigBuilder, ReportFormat, RunConfig, OUT_DIR_ENV,
};
use crate::dataset_io::{read_dataset, write_dataset};
use crate::plot::{render, Panel};

/// Retries for seed-dependent infeasibility; stride keeps retry seeds
/// disjoint from other dataset ordinals.
const MAX_SEED_RETRIES: u64 = 8;
const RETRY_STRIDE: u64 = 1 << 32;

#[derive(Args)]
pub struct ConstraintFlags {
    /// Sample size
    #[arg(long)]
    pub n: Option<usize>,
    /// Target mean of x
    #[arg(long)]
    pub mean_x: Option<f64>,
    /// Target sample variance of x
    #[arg(long)]
    pub var_x: Option<f64>,
    /// Target mean of y
    #[arg(long)]
    pub mean_y: Option<f64>,
    /// Target sample variance of y
    #[arg(long)]
    pub var_y: Option<f64>,
    /// Target slope
    #[arg(long)]
    pub beta1: Option<f64>,
}

#[derive(Args)]
pub struct GenerateArgs {
    /// Flat key-value config file; flags override its keys
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub constraints: ConstraintFlags,
    /// Shape, e.g. on-line | linear-noise:SD | quadratic:left|right |
    /// linear-outlier:B0,B1,IDX,Y | bimodal-noise:SD | quartic:F0,H1..H4 with optional jitter SD
    #[arg(long)]
    pub shape: Option<String>,
    /// x construction: uniform | bimodal-high | bimodal-low
    #[arg(long)]
    pub x_family: Option<String>,
    /// Explicit comma-separated x values (overrides --x-family)
    #[arg(long)]
    pub x: Option<String>,
    /// Adjustment plan: auto | none | triple:P1,P2,P3 | group:I,J[,..]
    #[arg(long)]
    pub plan: Option<String>,
    /// Shorthand for --plan triple:P1,P2,P3
    #[arg(long)]
    pub triple: Option<String>,
    /// Degeneracy branch for auto/triple plans: plus | minus
    #[arg(long)]
    pub branch: Option<String>,
    /// Base seed; dataset k uses seed + k
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of datasets to generate
    #[arg(long)]
    pub count: Option<usize>,
    /// Verification tolerance (absolute)
    #[arg(long = "tol")]
    pub tolerance: Option<f64>,
    /// Output directory (default: $ANSCOMBE_OUT_DIR or .)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report format: text | json
    #[arg(long)]
    pub format: Option<String>,
}

impl GenerateArgs {
    fn into_config(self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(path) => load_config_file(path)?,
            None => Default::default(),
        };
        ConfigBuilder {
            file,
            n: self.constraints.n,
            mean_x: self.constraints.mean_x,
            var_x: self.constraints.var_x,
            mean_y: self.constraints.mean_y,
            var_y: self.constraints.var_y,
            beta1: self.constraints.beta1,
            shape: self.shape,
            x_family: self.x_family,
            x_values: self.x,
            plan: self.plan,
            triple: self.triple,
            branch: self.branch,
            seed: self.seed,
            count: self.count,
            tolerance: self.tolerance,
            out_dir: self.out,
            format: self.format,
        }
        .build()
    }
}

fn generate_one(cfg: &RunConfig, ordinal: usize) -> Result<Generated> {
    let base_seed = cfg.seed.wrapping_add(ordinal as u64);
    let mut attempt = 0u64;
    loop {
        let shape = cfg.shape.with_seed(base_seed.wrapping_add(attempt * RETRY_STRIDE));
        match generate(
            &cfg.x_source,
            &shape,
            &cfg.constraints,
            &cfg.plan,
            cfg.tolerance,
        ) {
            Ok(out) => return Ok(out),
            Err(e) if e.is_seed_dependent() && cfg.shape.is_seeded() && attempt < MAX_SEED_RETRIES => {
                eprintln!("dataset {ordinal}: {e}; retrying with a fresh seed");
                attempt += 1;
            }
            Err(e) => return Err(anyhow!(e).context(format!("dataset {ordinal}"))),
        }
    }
}

fn report_text(out: &Generated, format: ReportFormat) -> Result<String> {
    Ok(match format {
        ReportFormat::Text => format!("{}\n", out.report),
        ReportFormat::Json => format!("{}\n", serde_json::to_string_pretty(&out.report)?),
    })
}

pub fn run_generate(args: GenerateArgs) -> Result<i32> {
    let cfg = args.into_config()?;
    std::fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("cannot create {}", cfg.out_dir.display()))?;

    for ordinal in 0..cfg.count {
        let out = generate_one(&cfg, ordinal)?;
        for w in &out.warnings {
            eprintln!("dataset {ordinal}: warning: {w}");
        }
        let csv_path = cfg.out_dir.join(format!("dataset_{ordinal:03}.csv"));
        write_dataset(&csv_path, &out.dataset)?;
        let ext = match cfg.format {
            ReportFormat::Text => "report.txt",
            ReportFormat::Json => "report.json",
        };
        let report_path = cfg.out_dir.join(format!("dataset_{ordinal:03}.{ext}"));
        std::fs::write(&report_path, report_text(&out, cfg.format)?)
            .with_context(|| format!("cannot write {}", report_path.display()))?;
        println!(
            "dataset {ordinal}: {} points -> {} ({})",
            out.dataset.len(),
            csv_path.display(),
            if out.report.passed { "verified" } else { "FAILED" }
        );
    }
    Ok(0)
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Dataset CSV file to verify
    pub input: PathBuf,
    /// Flat key-value config file supplying the constraints
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub constraints: ConstraintFlags,
    /// Verification tolerance (absolute)
    #[arg(long = "tol", default_value_t = 1e-6)]
    pub tolerance: f64,
    /// Report format: text | json
    #[arg(long, default_value = "text")]
    pub format: String,
}

pub fn run_verify(args: VerifyArgs) -> Result<i32> {
    let file = match &args.config {
        Some(path) => load_config_file(path)?,
        None => Default::default(),
    };
    let get = |flag: Option<f64>, key: &str| -> Result<f64> {
        flag.or_else(|| file.get(key).and_then(|v| v.parse().ok()))
            .ok_or_else(|| anyhow!("missing constraint '{key}'"))
    };
    let n = args
        .constraints
        .n
        .or_else(|| file.get("n").and_then(|v| v.parse().ok()))
        .ok_or_else(|| anyhow!("missing constraint 'n'"))?;
    let constraints = ConstraintSet::new(
        n,
        get(args.constraints.mean_x, "mean_x")?,
        get(args.constraints.var_x, "var_x")?,
        get(args.constraints.mean_y, "mean_y")?,
        get(args.constraints.var_y, "var_y")?,
        get(args.constraints.beta1, "beta1")?,
    )?;
    let dataset = read_dataset(&args.input)?;
    let report = verify(&dataset, &constraints, args.tolerance);
    match parse_format(&args.format)? {
        ReportFormat::Text => println!("{report}"),
        ReportFormat::Json => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    Ok(if report.passed { 0 } else { 1 })
}

#[derive(Args)]
pub struct QuartetArgs {
    /// Output directory (default: $ANSCOMBE_OUT_DIR or .)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Table format: text | json
    #[arg(long, default_value = "text")]
    pub format: String,
}

/// The embedded quartet keeps its published precision: x to one decimal,
/// y to two.
fn quartet_csv(d: &DatasetPair) -> String {
    let mut out = String::from("x,y\n");
    for (x, y) in d.points() {
        out.push_str(&format!("{x:.1},{y:.2}\n"));
    }
    out
}

fn quartet_stats_rows() -> Result<Vec<(String, [f64; 7])>> {
    quartet::datasets()
        .iter()
        .zip(quartet::LABELS)
        .map(|(d, label)| {
            let fit = linregress(d)?;
            let row = [
                anscombe::mean(d.xs())?,
                anscombe::variance(d.xs())?,
                anscombe::mean(d.ys())?,
                anscombe::variance(d.ys())?,
                fit.beta1,
                fit.beta0,
                fit.r_squared,
            ];
            Ok((label.to_string(), row))
        })
        .collect::<anscombe::Result<Vec<_>>>()
        .map_err(Into::into)
}

fn quartet_moment_rows() -> Result<Vec<(String, [f64; 4])>> {
    quartet::datasets()
        .iter()
        .zip(quartet::LABELS)
        .map(|(d, label)| {
            let m = moment_report(d)?;
            Ok((label.to_string(), [m.skew_x, m.kurt_x, m.skew_y, m.kurt_y]))
        })
        .collect::<anscombe::Result<Vec<_>>>()
        .map_err(Into::into)
}

fn quartet_stats_table() -> Result<String> {
    let mut text = format!(
        "{:<8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}\n",
        "dataset", "mean_x", "var_x", "mean_y", "var_y", "beta1", "beta0", "r_sq"
    );
    for (label, row) in quartet_stats_rows()? {
        text.push_str(&format!(
            "{:<8} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4}\n",
            label, row[0], row[1], row[2], row[3], row[4], row[5], row[6]
        ));
    }
    Ok(text)
}

fn quartet_moments_table() -> Result<String> {
    let mut text = format!(
        "{:<8} {:>8} {:>8} {:>8} {:>8}\n",
        "dataset", "skew_x", "kurt_x", "skew_y", "kurt_y"
    );
    for (label, row) in quartet_moment_rows()? {
        text.push_str(&format!(
            "{:<8} {:>8.3} {:>8.3} {:>8.3} {:>8.3}\n",
            label, row[0], row[1], row[2], row[3]
        ));
    }
    Ok(text)
}

pub fn run_quartet(args: QuartetArgs) -> Result<i32> {
    let out_dir = args
        .out
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;

    for (d, label) in quartet::datasets().iter().zip(quartet::LABELS) {
        let path = out_dir.join(format!("quartet_{label}.csv"));
        std::fs::write(&path, quartet_csv(d))
            .with_context(|| format!("cannot write {}", path.display()))?;
        println!("wrote {}", path.display());
    }

    match parse_format(&args.format)? {
        ReportFormat::Text => {
            let stats = quartet_stats_table()?;
            let moments = quartet_moments_table()?;
            std::fs::write(out_dir.join("statistics.txt"), &stats)?;
            std::fs::write(out_dir.join("moments.txt"), &moments)?;
            println!("\n{stats}\n{moments}");
        }
        ReportFormat::Json => {
            let doc = serde_json::json!({
                "statistics": quartet_stats_rows()?
                    .into_iter()
                    .map(|(label, r)| serde_json::json!({
                        "dataset": label,
                        "mean_x": r[0], "var_x": r[1],
                        "mean_y": r[2], "var_y": r[3],
                        "beta1": r[4], "beta0": r[5], "r_squared": r[6],
                    }))
                    .collect::<Vec<_>>(),
                "moments": quartet_moment_rows()?
                    .into_iter()
                    .map(|(label, m)| serde_json::json!({
                        "dataset": label,
                        "skew_x": m[0], "kurt_x": m[1],
                        "skew_y": m[2], "kurt_y": m[3],
                    }))
                    .collect::<Vec<_>>(),
            });
            let text = serde_json::to_string_pretty(&doc)?;
            std::fs::write(out_dir.join("quartet.json"), format!("{text}\n"))?;
            println!("{text}");
        }
    }
    Ok(0)
}

#[derive(Args)]
pub struct PlotArgs {
    /// Dataset CSV files, one panel each
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Output SVG path
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run_plot(args: PlotArgs) -> Result<i32> {
    let panels = args
        .inputs
        .iter()
        .map(|path| {
            Ok(Panel {
                label: path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string()),
                dataset: read_dataset(path)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let svg = render(&panels);
    std::fs::write(&args.out, svg)
        .with_context(|| format!("cannot write {}", args.out.display()))?;
    println!("wrote {} ({} panels)", args.out.display(), panels.len());
    Ok(0)
}
