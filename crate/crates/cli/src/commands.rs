use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use cojam::bounds::{
    gdof_bounds_general, gdof_no_helper, gdof_theorem1, rate_upper_finite, ChannelParams,
};
use cojam::decode::{outage_samples, summarize_outage, OutageCase, OutageEstimate, OutageStudy, DEFAULT_CAP};
use cojam::sim::{run_trials, SimConfig, SimReport};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::output::{csv, opt, out_dir, Run};

/// Why a command failed; decides the exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Precondition(String),
    Io(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::Precondition(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Precondition(m) => write!(f, "precondition failed: {m}"),
            Failure::Io(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<cojam::Error> for Failure {
    fn from(e: cojam::Error) -> Self {
        if e.is_precondition() {
            Failure::Precondition(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Io(e)
    }
}

type Outcome = Result<PathBuf, Failure>;

fn read_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, Failure> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))
        }
    }
}

fn required<T>(v: Option<T>, name: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::Config(format!("`{name}` must be given in the config file or as a flag")))
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML file with the same keys as the flags; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Defaults to $COJAM_OUT_DIR, then the working directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveArgs {
    #[arg(long)]
    pub alpha_min: Option<f64>,
    #[arg(long)]
    pub alpha_max: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
}

pub const CURVE_HEADER: &str = "alpha,d_with_helper,d_no_helper,bound1,bound2,bound3";

pub fn gdof_curve(common: &Common, flags: CurveArgs) -> Outcome {
    let file: CurveArgs = read_config(common.config.as_deref())?;
    let cfg = CurveArgs {
        alpha_min: flags.alpha_min.or(file.alpha_min).or(Some(0.0)),
        alpha_max: flags.alpha_max.or(file.alpha_max).or(Some(2.5)),
        step: flags.step.or(file.step).or(Some(0.01)),
    };
    let (lo, hi, step) = (cfg.alpha_min.unwrap(), cfg.alpha_max.unwrap(), cfg.step.unwrap());
    if !(lo >= 0.0 && lo < hi && hi.is_finite()) {
        return Err(Failure::Config(format!("need 0 <= alpha_min < alpha_max, got [{lo}, {hi}]")));
    }
    if !(step >= 1e-9) {
        return Err(Failure::Config(format!("step must be >= 1e-9, got {step}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as u64;
    let mut rows = Vec::with_capacity(n as usize + 1);
    for i in 0..=n {
        // snap to the grid so rows read 0.3 rather than 0.30000000000000004
        let a = ((lo + i as f64 * step) * 1e9).round() / 1e9;
        let params = ChannelParams::symmetric(a, [1.5; 4], 1.0)?;
        let b = gdof_bounds_general(&params);
        rows.push(vec![
            a.to_string(),
            gdof_theorem1(a)?.to_string(),
            gdof_no_helper(&params).to_string(),
            b.bound1.to_string(),
            b.bound2.to_string(),
            b.bound3.to_string(),
        ]);
    }
    let mut run = Run::start("gdof_curve", out_dir(common.out_dir.as_deref()))?;
    run.write("gdof_curve.csv", &csv(CURVE_HEADER, rows))?;
    Ok(run.finish(None, &cfg)?)
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsArgs {
    /// Symmetric cross-link exponent; direct links are 1.
    #[arg(long, conflicts_with = "alphas")]
    pub alpha: Option<f64>,
    /// `a11,a12,a21,a22`
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// `h11,h12,h21,h22`, each in (1, 2]; default 1.5.
    #[arg(long, value_delimiter = ',')]
    pub gains: Option<Vec<f64>>,
    /// Comma-separated SNR values.
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
}

pub const BOUNDS_HEADER: &str =
    "P,bound_wt,bound_half_sum,bound_third,bound_min,norm_wt,norm_half_sum,norm_third,norm_min";

fn four(v: &[f64], name: &str) -> Result<[f64; 4], Failure> {
    v.try_into()
        .map_err(|_| Failure::Config(format!("`{name}` needs exactly four values, got {}", v.len())))
}

pub fn bounds(common: &Common, flags: BoundsArgs) -> Outcome {
    let file: BoundsArgs = read_config(common.config.as_deref())?;
    let (alpha, alphas) = if flags.alpha.is_some() || flags.alphas.is_some() {
        (flags.alpha, flags.alphas)
    } else {
        (file.alpha, file.alphas)
    };
    let cfg = BoundsArgs {
        alpha,
        alphas,
        gains: flags.gains.or(file.gains).or(Some(vec![1.5; 4])),
        p: flags.p.or(file.p),
    };
    let a = match (cfg.alpha, &cfg.alphas) {
        (Some(_), Some(_)) => return Err(Failure::Config("give either `alpha` or `alphas`, not both".into())),
        (Some(a), None) => [1.0, a, a, 1.0],
        (None, Some(v)) => four(v, "alphas")?,
        (None, None) => return Err(Failure::Config("`alpha` or `alphas` is required".into())),
    };
    let h = four(cfg.gains.as_deref().unwrap(), "gains")?;
    let ps = required(cfg.p.clone(), "p")?;
    let mut rows = Vec::with_capacity(ps.len());
    for &p in &ps {
        let params = ChannelParams::new(a, h, p)?;
        let b = rate_upper_finite(&params);
        let n = b.normalized(p);
        let norm = |k: usize| opt(n.map(|n| n[k]));
        let norm_min = opt(n.map(|n| n[0].min(n[1]).min(n[2])));
        rows.push(vec![
            format!("{p:e}"),
            b.bound_wt.to_string(),
            b.bound_half_sum.to_string(),
            b.bound_third.to_string(),
            b.min().to_string(),
            norm(0),
            norm(1),
            norm(2),
            norm_min,
        ]);
    }
    let mut run = Run::start("bounds", out_dir(common.out_dir.as_deref()))?;
    run.write("bounds.csv", &csv(BOUNDS_HEADER, rows))?;
    Ok(run.finish(None, &cfg)?)
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Trials per SNR point.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Transmit without noise.
    #[arg(long)]
    pub zero_noise: bool,
}

fn load_sim_config(path: Option<&Path>, flags: &SimulateArgs) -> Result<SimConfig, Failure> {
    let path = path.ok_or_else(|| Failure::Config("simulate needs --config".into()))?;
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let mut table: toml::Table =
        toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let int = |v: u64| {
        i64::try_from(v)
            .map(toml::Value::Integer)
            .map_err(|_| Failure::Config(format!("{v} does not fit a TOML integer")))
    };
    if let Some(seed) = flags.seed {
        table.insert("seed".into(), int(seed)?);
    } else if !table.contains_key("seed") {
        table.insert("seed".into(), int(rand::random::<u64>() >> 1)?);
    }
    if let Some(n) = flags.trials {
        table.insert("n_trials".into(), int(n)?);
    }
    if flags.zero_noise {
        table.insert("zero_noise".into(), toml::Value::Boolean(true));
    }
    SimConfig::deserialize(table).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

pub fn simulate(common: &Common, flags: SimulateArgs) -> Outcome {
    let cfg = load_sim_config(common.config.as_deref(), &flags)?;
    cfg.validate()?;
    let report: SimReport = run_trials(&cfg)?;
    let mut run = Run::start("simulate", out_dir(common.out_dir.as_deref()))?;
    run.write("simulate.csv", &report.to_csv())?;
    let mut json = serde_json::to_string_pretty(&report).map_err(anyhow::Error::from)?;
    json.push('\n');
    run.write("simulate.json", &json)?;
    Ok(run.finish(Some(cfg.seed), &cfg)?)
}

#[derive(Debug, Default, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MindistArgs {
    /// `triple` or `pair`.
    #[arg(long)]
    pub case: Option<String>,
    /// Defaults to 0.9 (triple) or 1.2 (pair).
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Node budget per minimum-distance search.
    #[arg(long)]
    pub cap: Option<u64>,
    /// Also write every `(h, d_min)` sample.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub detail: Option<bool>,
}

pub const SAMPLE_HEADER: &str = "h11,h12,h21,h22,d_min";

pub fn mindist(common: &Common, flags: MindistArgs) -> Outcome {
    let file: MindistArgs = read_config(common.config.as_deref())?;
    let case: OutageCase = required(flags.case.or(file.case), "case")?.parse()?;
    let study = OutageStudy {
        case,
        alpha: flags.alpha.or(file.alpha).unwrap_or(case.default_alpha()),
        p: required(flags.p.or(file.p), "p")?,
        epsilon: required(flags.epsilon.or(file.epsilon), "epsilon")?,
        delta: required(flags.delta.or(file.delta), "delta")?,
        n_samples: flags.samples.or(file.samples).unwrap_or(10_000),
        seed: flags.seed.or(file.seed).unwrap_or_else(|| rand::random::<u64>() >> 1),
        cap: flags.cap.or(file.cap).unwrap_or(DEFAULT_CAP),
    };
    let detail = flags.detail.or(file.detail).unwrap_or(false);
    let samples = outage_samples(&study)?;
    let est = summarize_outage(&study, &samples);

    let mut run = Run::start("mindist", out_dir(common.out_dir.as_deref()))?;
    run.write("mindist.csv", &csv(OutageEstimate::CSV_HEADER, [est.csv_row().split(',').map(String::from).collect()]))?;
    if detail {
        let rows = samples.iter().map(|s| {
            let mut r: Vec<String> = s.h.iter().map(|h| h.to_string()).collect();
            r.push(s.d_min.to_string());
            r
        });
        run.write("mindist_samples.csv", &csv(SAMPLE_HEADER, rows))?;
    }
    Ok(run.finish(Some(study.seed), &study)?)
}
