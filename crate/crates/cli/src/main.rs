//! `mnl-lab` command line: audits, simulations and regret experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use mnl_lab::adversarial::theorem_lower_bound;
use mnl_lab::certify::{standard_suite, SuiteReport};
use mnl_lab::mnl::Assortment;
use mnl_lab::runner::report::{emit_report, sig12, Format, ReportDocument};
use mnl_lab::runner::{bayes_regret, scaling_fit, simulate, ExperimentConfig, PriorMode};

#[derive(Parser)]
#[command(name = "mnl-lab", version, about = "Capacitated MNL-bandit lower-bound lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every numeric certificate; exits non-zero if any check fails.
    Verify(OutputArgs),
    /// One trajectory on a planted instance.
    Simulate(ExperimentArgs),
    /// Bayes regret over the uniform prior on elevated sets.
    Bayes(ExperimentArgs),
    /// Log-log slope of Bayes regret against the horizon (`--t 1024,4096,16384`).
    Scaling(ExperimentArgs),
    /// Print the lower-bound value for N, T, K.
    Bound {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "table")]
        format: Format,
    },
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "table")]
    format: Format,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON file mirroring the experiment config; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Horizon; a comma-separated list for `scaling`.
    #[arg(long, value_delimiter = ',')]
    t: Vec<usize>,
    /// `auto` or a number in (0, 0.5].
    #[arg(long)]
    epsilon: Option<String>,
    /// `fixed=1,2,3`, `random[=seed]` or `epoch-ucb[=a,b]`.
    #[arg(long)]
    policy: Option<String>,
    /// `auto`, `sampled`, `exhaustive` or `planted=1,2,3`.
    #[arg(long)]
    prior: Option<String>,
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    parallel: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

fn parse_prior(s: &str) -> anyhow::Result<PriorMode> {
    Ok(match s {
        "auto" => PriorMode::Auto,
        "sampled" => PriorMode::Sampled,
        "exhaustive" => PriorMode::Exhaustive,
        _ => match s.strip_prefix("planted=") {
            Some(items) => {
                let ids = items
                    .split(',')
                    .map(|x| x.trim().parse::<usize>())
                    .collect::<Result<Vec<_>, _>>()
                    .with_context(|| format!("bad planted set '{items}'"))?;
                PriorMode::Planted(Assortment::new(ids)?)
            }
            None => bail!("unknown prior '{s}'"),
        },
    })
}

impl ExperimentArgs {
    /// File values first, then flag overrides. Returns the horizon list too.
    fn resolve(&self) -> anyhow::Result<(ExperimentConfig, Vec<usize>)> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(n) = self.n {
            cfg.n_items = n;
        }
        if let Some(k) = self.k {
            cfg.capacity = k;
        }
        if let Some(&t) = self.t.first() {
            cfg.horizon = t;
        }
        if let Some(e) = &self.epsilon {
            cfg.epsilon = e.parse()?;
        }
        if let Some(p) = &self.policy {
            cfg.policy = p.parse()?;
        }
        if let Some(p) = &self.prior {
            cfg.prior = parse_prior(p)?;
        }
        if let Some(d) = self.draws {
            cfg.draws = d;
        }
        if let Some(r) = self.reps {
            cfg.replications = r;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if self.parallel.is_some() {
            cfg.parallelism = self.parallel;
        }
        if self.output.out.is_some() {
            cfg.output = self.output.out.clone();
        }
        cfg.validate()?;
        Ok((cfg, self.t.clone()))
    }

    fn single_horizon(&self) -> anyhow::Result<ExperimentConfig> {
        if self.t.len() > 1 {
            bail!("--t takes a single horizon here; use `scaling` for a list");
        }
        Ok(self.resolve()?.0)
    }
}

fn deliver<D: ReportDocument>(doc: &D, format: Format, out: Option<&PathBuf>) -> anyhow::Result<()> {
    let body = emit_report(doc, format)?;
    match out {
        Some(path) => std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{body}"),
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Verify(out) => {
            let suite = SuiteReport::new(standard_suite()?);
            deliver(&suite, out.format, out.out.as_ref())?;
            if !suite.pass {
                eprintln!("verify: some checks failed");
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Simulate(args) => {
            let cfg = args.single_horizon()?;
            deliver(&simulate(&cfg)?, args.output.format, cfg.output.as_ref())?;
        }
        Command::Bayes(args) => {
            let cfg = args.single_horizon()?;
            deliver(&bayes_regret(&cfg)?, args.output.format, cfg.output.as_ref())?;
        }
        Command::Scaling(args) => {
            let (cfg, horizons) = args.resolve()?;
            let horizons = if horizons.is_empty() { vec![1024, 4096, 16384] } else { horizons };
            deliver(&scaling_fit(&cfg, &horizons)?, args.output.format, cfg.output.as_ref())?;
        }
        Command::Bound { n, t, k, format } => {
            let bound = theorem_lower_bound(n, t, k)?;
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&bound)?),
                Format::Csv => println!("n_items,horizon,capacity,value,regime\n{n},{t},{k},{},{}", sig12(bound.value), bound.regime),
                Format::Table => println!("lower bound (N={n}, T={t}, K={k}): {} [{}]", sig12(bound.value), bound.regime),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
