//! `aqcount`: run counting experiments, self-checks and cost sweeps.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use adiabatic_counting::scheduler::{run_counting, scaling_curve, CountingConfig, Mode};
use adiabatic_counting::validate::{run_suites, Level};
use adiabatic_counting::{Error, MarkedDatabase, Result};

#[derive(Parser)]
#[command(
    name = "aqcount",
    version,
    about = "Adiabatic quantum counting simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the marked fraction of one instance and write result.json.
    Count(CountArgs),
    /// Run the self-check suites.
    Validate {
        #[arg(long, default_value = "fast")]
        level: String,
    },
    /// Evolution-time totals over a range of precisions; writes scaling.csv.
    Scaling {
        #[arg(long)]
        m_lo: u32,
        #[arg(long)]
        m_hi: u32,
        #[arg(long, default_value_t = 0.05)]
        c_omega: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct CountArgs {
    /// Flat `key=value` file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    c_omega: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    failure_prob: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct RunConfig {
    instance: PathBuf,
    counting: CountingConfig,
    out: PathBuf,
}

fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)?;
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::ConfigFormat(format!("line {}: expected key=value", i + 1)))?;
        map.insert(k.trim().replace('-', "_"), v.trim().to_string());
    }
    Ok(map)
}

fn field<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    map.get(key)
        .map(|v| {
            v.parse()
                .map_err(|_| Error::ConfigFormat(format!("bad value for {key}: `{v}`")))
        })
        .transpose()
}

const KNOWN_KEYS: [&str; 8] = [
    "instance",
    "m",
    "mode",
    "seed",
    "c_omega",
    "delta",
    "failure_prob",
    "out",
];

impl CountArgs {
    fn resolve(self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(p) => parse_config_file(p)?,
            None => BTreeMap::new(),
        };
        if let Some(k) = file.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(Error::ConfigFormat(format!("unknown key `{k}`")));
        }
        let instance = self
            .instance
            .or(field(&file, "instance")?)
            .ok_or_else(|| Error::ConfigFormat("no instance given".into()))?;
        let m = self
            .m
            .or(field(&file, "m")?)
            .ok_or_else(|| Error::ConfigFormat("no m given".into()))?;
        let mode = match self.mode.or(field(&file, "mode")?) {
            Some(s) => s.parse::<Mode>()?,
            None => Mode::ClosedForm,
        };
        let mut counting =
            CountingConfig::new(m, mode, self.seed.or(field(&file, "seed")?).unwrap_or(0));
        if let Some(c) = self.c_omega.or(field(&file, "c_omega")?) {
            counting.c_omega = c;
        }
        if let Some(d) = self.delta.or(field(&file, "delta")?) {
            counting.delta = d;
        }
        if let Some(f) = self.failure_prob.or(field(&file, "failure_prob")?) {
            counting.failure_prob = f;
        }
        let out = self
            .out
            .or(field(&file, "out")?)
            .unwrap_or_else(|| PathBuf::from("."));
        Ok(RunConfig {
            instance,
            counting,
            out,
        })
    }
}

fn count(args: CountArgs) -> Result<()> {
    let cfg = args.resolve()?;
    let db: MarkedDatabase = fs::read_to_string(&cfg.instance)?.parse()?;
    let run = run_counting(&db, &cfg.counting)?;
    let report = run.report(&db, &cfg.counting);
    fs::create_dir_all(&cfg.out)?;
    let file = fs::File::create(cfg.out.join("result.json"))?;
    serde_json::to_writer_pretty(BufWriter::new(file), &report)?;
    println!(
        "alpha_hat = {} ({}), m = {}",
        report.alpha_hat, report.alpha_hat_fraction, report.m
    );
    Ok(())
}

fn scaling(m_lo: u32, m_hi: u32, c_omega: f64, out: &Path) -> Result<()> {
    if !(1 <= m_lo && m_lo < m_hi && m_hi <= 20) {
        return Err(Error::GuardExceeded(format!(
            "need 1 <= m_lo < m_hi <= 20, got {m_lo}, {m_hi}"
        )));
    }
    let curve = scaling_curve(m_lo..=m_hi, c_omega)?;
    fs::create_dir_all(out)?;
    curve.write_csv(BufWriter::new(fs::File::create(out.join("scaling.csv"))?))?;
    println!("slope {:.6}", curve.slope);
    Ok(())
}

fn exit_for(err: &Error) -> ExitCode {
    eprintln!("aqcount: {err}");
    ExitCode::from(if err.is_io() { 1 } else { 2 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Count(args) => count(args),
        Command::Scaling {
            m_lo,
            m_hi,
            c_omega,
            out,
        } => scaling(m_lo, m_hi, c_omega, &out),
        Command::Validate { level } => match level.parse::<Level>() {
            Ok(level) => {
                let results = run_suites(level);
                for r in &results {
                    println!("{r}");
                }
                return if results.iter().all(|r| r.passed) {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(2)
                };
            }
            Err(e) => Err(e),
        },
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => exit_for(&e),
    }
}
