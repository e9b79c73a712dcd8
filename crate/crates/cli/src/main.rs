use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use digitsq::diagnostics::wan_lemma_sum;
use digitsq::field::poly::parse_poly;
use digitsq::harness::config::DigitsField;
use digitsq::harness::{
    rows_to_csv, run_instance, run_lemma_sweep, run_strata, run_sweep, to_json, write_instance_outputs,
    ExperimentConfig, FieldInfo, Family, Instance, LemmaConfig, PivotPolicy, SweepConfig,
};
use digitsq::{Error, Execution, FieldCtx};

/// Exit status when a soundness check fails.
const SOUNDNESS_FAILED: u8 = 4;

#[derive(Parser)]
#[command(name = "digitsq", version, about = "Squares in missing-digit sets of finite fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the field, its modulus and generator; optionally inspect elements.
    Field {
        #[command(flatten)]
        common: Common,
        /// Element as comma-separated coefficients, constant term first.
        #[arg(long = "element")]
        elements: Vec<String>,
    },
    /// Count squares in W by enumeration and by the character identity.
    Count {
        #[command(flatten)]
        common: Common,
    },
    /// Count, evaluate every bound, and run the proof-chain diagnostics.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Skip the proof-chain diagnostics.
        #[arg(long)]
        no_chain: bool,
    },
    /// Evaluate the multiplicative character sum for a pair, or sweep pairs.
    Lemma {
        #[command(flatten)]
        common: Common,
        /// Character orders (must divide q - 1).
        #[arg(long = "s", value_delimiter = ',')]
        orders: Vec<u64>,
        #[arg(long, requires = "beta")]
        alpha: Option<String>,
        #[arg(long, requires = "alpha")]
        beta: Option<String>,
        #[arg(long, value_delimiter = ',')]
        primes: Vec<u64>,
        #[arg(long, value_delimiter = ',')]
        degrees: Vec<usize>,
        /// Largest unordered pair count swept exhaustively.
        #[arg(long)]
        pair_cap: Option<u64>,
        /// Pairs drawn when sampling.
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        force_sampling: bool,
    },
    /// Sweep (p, r, family, size) and emit one summary row per instance.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        primes: Vec<u64>,
        #[arg(long, value_delimiter = ',')]
        degrees: Vec<usize>,
        #[arg(long)]
        family: Option<Family>,
        #[arg(long)]
        min_size: Option<u64>,
        #[arg(long)]
        max_size: Option<u64>,
        /// Repetitions per size for the random family.
        #[arg(long)]
        seeds: Option<u64>,
        #[arg(long)]
        no_chain: bool,
    },
    /// Partition the non-pivot digit tuples by field degree.
    Strata {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    r: Option<usize>,
    /// Monic irreducible modulus, constant term first.
    #[arg(long)]
    modulus: Option<String>,
    /// Digit-set specs: full, range:a..b, list:x,y, random:k:seed (`;` or `,` separated).
    #[arg(long)]
    digits: Option<String>,
    /// `auto` or a one-based position.
    #[arg(long)]
    pivot: Option<PivotPolicy>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for report files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Largest enumeration size.
    #[arg(long)]
    cap: Option<u64>,
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    #[arg(long)]
    csv: bool,
    /// Disable the worker pool.
    #[arg(long)]
    sequential: bool,
}

#[derive(Clone, Copy, PartialEq)]
enum Format {
    Json,
    Csv,
}

impl Common {
    fn config(&self) -> anyhow::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if self.p.is_some() {
            cfg.p = self.p;
        }
        if self.r.is_some() {
            cfg.r = self.r;
        }
        if self.modulus.is_some() {
            cfg.modulus = self.modulus.clone();
        }
        if let Some(d) = &self.digits {
            cfg.digits = Some(DigitsField::Joined(d.clone()));
        }
        if let Some(pv) = self.pivot {
            cfg.pivot = pv;
        }
        if let Some(e) = self.eps {
            if !(e > 0.0 && e.is_finite()) {
                return Err(Error::Config(format!("eps must be positive, got {e}")).into());
            }
            cfg.eps = e;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        if let Some(c) = self.cap {
            cfg.cap = c;
        }
        Ok(cfg)
    }

    fn format(&self, default: Format) -> Format {
        if self.json {
            Format::Json
        } else if self.csv {
            Format::Csv
        } else {
            default
        }
    }

    fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

fn field_ctx(cfg: &ExperimentConfig) -> anyhow::Result<FieldCtx> {
    let modulus = cfg.modulus.as_deref().map(parse_poly).transpose()?;
    Ok(FieldCtx::make(cfg.require_p()?, cfg.require_r()?, modulus.as_deref())?)
}

fn emit(out: Option<&Path>, file: &str, body: &str) -> anyhow::Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| dir.display().to_string())?;
            let path = dir.join(file);
            fs::write(&path, body).with_context(|| path.display().to_string())?;
            eprintln!("wrote {}", path.display());
        }
        None => std::io::stdout().write_all(body.as_bytes())?,
    }
    Ok(())
}

/// Returns whether every soundness check passed.
fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Field { common, elements } => {
            let cfg = common.config()?;
            let ctx = field_ctx(&cfg)?;
            let mut inspected = Vec::new();
            for text in &elements {
                let x = ctx.element(parse_poly(text)?)?;
                let dlog = if x.is_zero() { None } else { Some(ctx.discrete_log(&x)?.to_string()) };
                inspected.push(json!({
                    "element": x,
                    "index": ctx.index_of(&x).to_string(),
                    "degree": ctx.degree_over_prime(&x),
                    "quadratic_char": ctx.quadratic_char(&x),
                    "discrete_log": dlog,
                    "conjugates": ctx.conjugates(&x),
                }));
            }
            let mut body = serde_json::to_value(FieldInfo::of(&ctx))?;
            if !inspected.is_empty() {
                body["elements"] = inspected.into();
            }
            emit(cfg.out.as_deref(), "field.json", &to_json(&body)?)?;
            Ok(true)
        }
        Command::Count { common } => {
            let cfg = common.config()?;
            let inst = Instance::from_config(&cfg)?;
            let exec = common.exec();
            let enumerated = digitsq::counting::count_squares_enum(&inst.ctx, &inst.spec, cfg.cap, exec)?;
            let identity = digitsq::counting::count_squares_identity(&inst.ctx, &inst.spec, cfg.cap, exec)?;
            let agree = enumerated == identity;
            let body = json!({
                "field": FieldInfo::of(&inst.ctx),
                "sizes": inst.sizes_label(),
                "count": enumerated,
                "identity_agrees": agree,
            });
            emit(cfg.out.as_deref(), "count.json", &to_json(&body)?)?;
            Ok(agree)
        }
        Command::Verify { common, no_chain } => {
            let cfg = common.config()?;
            let inst = Instance::from_config(&cfg)?;
            let report = run_instance(&inst, cfg.eps, cfg.cap, common.exec(), !no_chain)?;
            match (&cfg.out, common.format(Format::Json)) {
                (Some(dir), _) => {
                    let (j, c) = write_instance_outputs(&report, &inst, dir)?;
                    eprintln!("wrote {} and {}", j.display(), c.display());
                }
                (None, Format::Json) => print!("{}", to_json(&report)?),
                (None, Format::Csv) => print!("{}", rows_to_csv(&[report.summary_row(&inst)])?),
            }
            if !report.all_pass {
                eprintln!("failed checks: {}", report.failures.join(", "));
            }
            Ok(report.all_pass)
        }
        Command::Lemma {
            common,
            orders,
            alpha,
            beta,
            primes,
            degrees,
            pair_cap,
            samples,
            force_sampling,
        } => {
            let cfg = common.config()?;
            if let (Some(a), Some(b)) = (alpha, beta) {
                let ctx = field_ctx(&cfg)?;
                let a = ctx.element(parse_poly(&a)?)?;
                let b = ctx.element(parse_poly(&b)?)?;
                let mut reports = Vec::new();
                for &s in orders.first().map_or(&[2][..], |_| &orders[..]) {
                    reports.push(wan_lemma_sum(&ctx, s, &a, &b)?);
                }
                let pass = reports.iter().all(|r| r.pass);
                emit(cfg.out.as_deref(), "lemma.json", &to_json(&reports)?)?;
                return Ok(pass);
            }
            let mut lc = cfg.lemma.clone().unwrap_or_default();
            if !primes.is_empty() {
                lc.primes = primes;
            } else if let (Some(p), true) = (cfg.p, lc.primes.is_empty()) {
                lc.primes = vec![p];
            }
            if !degrees.is_empty() {
                lc.degrees = degrees;
            } else if let (Some(r), true) = (cfg.r, lc.degrees.is_empty()) {
                lc.degrees = vec![r];
            }
            if !orders.is_empty() {
                lc.orders = orders;
            }
            lc.pair_cap = pair_cap.unwrap_or(lc.pair_cap);
            lc.samples = samples.unwrap_or(lc.samples);
            lc.force_sampling |= force_sampling;
            check_nonempty(&lc)?;
            let rows = run_lemma_sweep(&lc, cfg.seed, cfg.cap, common.exec());
            let body = match common.format(Format::Csv) {
                Format::Csv => rows_to_csv(&rows)?,
                Format::Json => to_json(&rows)?,
            };
            let file = if common.format(Format::Csv) == Format::Csv { "lemma.csv" } else { "lemma.json" };
            emit(cfg.out.as_deref(), file, &body)?;
            let failed: Vec<_> = rows.iter().filter(|r| r.error.is_none() && r.all_pass != Some(true)).collect();
            for r in rows.iter().filter(|r| r.error.is_some()) {
                eprintln!("p={} r={} s={}: {}", r.p, r.r, r.s, r.error.as_deref().unwrap_or(""));
            }
            Ok(failed.is_empty())
        }
        Command::Sweep {
            common,
            primes,
            degrees,
            family,
            min_size,
            max_size,
            seeds,
            no_chain,
        } => {
            let cfg = common.config()?;
            let mut sc: SweepConfig = cfg.sweep.clone().unwrap_or_default();
            if !primes.is_empty() {
                sc.primes = primes;
            }
            if !degrees.is_empty() {
                sc.degrees = degrees;
            }
            sc.family = family.unwrap_or(sc.family);
            sc.min_size = min_size.unwrap_or(sc.min_size);
            if max_size.is_some() {
                sc.max_size = max_size;
            }
            sc.seeds = seeds.unwrap_or(sc.seeds);
            sc.chain &= !no_chain;
            let rows = run_sweep(&sc, cfg.seed, cfg.eps, cfg.cap, common.exec());
            let format = common.format(Format::Csv);
            let (file, body) = match format {
                Format::Csv => ("sweep.csv", rows_to_csv(&rows)?),
                Format::Json => ("sweep.json", to_json(&rows)?),
            };
            emit(cfg.out.as_deref(), file, &body)?;
            let errors = rows.iter().filter(|r| r.error.is_some()).count();
            let unsound = rows.iter().filter(|r| r.error.is_none() && !r.passed()).count();
            eprintln!("{} rows, {} errors, {} failing checks", rows.len(), errors, unsound);
            Ok(unsound == 0)
        }
        Command::Strata { common } => {
            let cfg = common.config()?;
            let inst = Instance::from_config(&cfg)?;
            let report = run_strata(&inst, cfg.cap, common.exec())?;
            let body = json!({
                "field": FieldInfo::of(&inst.ctx),
                "sizes": inst.sizes_label(),
                "pivot": inst.pivot + 1,
                "strata": report,
            });
            emit(cfg.out.as_deref(), "strata.json", &to_json(&body)?)?;
            Ok(true)
        }
    }
}

fn check_nonempty(lc: &LemmaConfig) -> anyhow::Result<()> {
    if lc.primes.is_empty() || lc.degrees.is_empty() {
        return Err(Error::Config("lemma sweep needs primes and degrees (--p/--r, --primes/--degrees or config)".into()).into());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(SOUNDNESS_FAILED),
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err.downcast_ref::<Error>().map_or(2, Error::exit_code);
            ExitCode::from(code)
        }
    }
}
