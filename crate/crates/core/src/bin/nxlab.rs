use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nxlab_core::gauge::Gauge;
use nxlab_core::harness::{
    emit_report, gauge_table, named_set, parse_body, run_dual, run_porosity, run_typical,
    run_verify, ExperimentConfig, Format, Report,
};
use nxlab_core::space::{Norm, Point};
use nxlab_core::Error;

#[derive(Parser)]
#[command(name = "nxlab", version, about = "Perturbation and porosity experiments for non-expansive maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites.
    Verify(RunArgs),
    /// Village perturbations over dyadic nets and their local Lipschitz densities.
    Typical(RunArgs),
    /// Gauge pair, ladder, witness perturbation and hole checks.
    Dual(RunArgs),
    /// Upper and lower porosity verdicts for a set at a point.
    Porosity(PorosityArgs),
    /// Tabulate a gauge, its partner and its ladder as CSV.
    Gauge(GaugeArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    norm_p: Option<Norm>,
    #[arg(long)]
    body: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    tol: Option<f64>,
    #[arg(long)]
    gauge: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Record wall-clock time in the report.
    #[arg(long)]
    timing: bool,
}

impl RunArgs {
    fn into_config(self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => { $(if let Some(v) = self.$field { cfg.$field = v; })* };
        }
        macro_rules! set_opt {
            ($($field:ident),*) => { $(if self.$field.is_some() { cfg.$field = self.$field; })* };
        }
        set!(suite, seed, tol, gauge, lambda, epsilon, k, grid, samples, format);
        set_opt!(dim, norm_p, body, trials, out);
        cfg.timing |= self.timing;
        Ok(cfg)
    }
}

#[derive(Args)]
struct PorosityArgs {
    /// `empty`, `reciprocals`, `rationals`, `whole` or a JSON list of points.
    #[arg(long)]
    set: String,
    /// Comma-separated coordinates of the base point.
    #[arg(long, allow_hyphen_values = true)]
    q: String,
    #[arg(long, default_value = "pow:1@10")]
    gauge: String,
    #[arg(long, default_value = "box")]
    body: String,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    norm_p: Option<Norm>,
    /// Largest scale of the dyadic grid.
    #[arg(long, default_value_t = 0.5)]
    eps0: f64,
    #[arg(long, default_value_t = 24)]
    levels: i32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GaugeArgs {
    #[arg(long, default_value = "sqrt")]
    gauge: String,
    #[arg(long, default_value_t = 2.0)]
    diam: f64,
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_out(text: &str, out: Option<&PathBuf>) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn report_exit(report: &Report, cfg: &ExperimentConfig) -> Result<ExitCode, Error> {
    emit_report(report, cfg.format, cfg.out.as_deref())?;
    eprintln!("{}: {}/{} cases passed", report.suite, report.pass, report.total);
    Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Verify(a) => {
            let cfg = a.into_config()?;
            report_exit(&run_verify(&cfg)?, &cfg)
        }
        Command::Typical(a) => {
            let cfg = a.into_config()?;
            report_exit(&run_typical(&cfg)?, &cfg)
        }
        Command::Dual(a) => {
            let cfg = a.into_config()?;
            report_exit(&run_dual(&cfg)?, &cfg)
        }
        Command::Porosity(a) => {
            let coords = a
                .q
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| Error::Usage(format!("bad point '{}'", a.q)))?;
            let q = Point::new(coords)?;
            let ambient = parse_body(&a.body, a.dim.or(Some(q.dim())), a.norm_p.unwrap_or(Norm::L2))?;
            let set = named_set(&a.set, ambient)?;
            let phi: Gauge = a.gauge.parse()?;
            let verdict = run_porosity(set.as_ref(), &q, &phi, a.eps0, a.levels, a.seed)?;
            let mut text = serde_json::to_string_pretty(&verdict)?;
            text.push('\n');
            write_out(&text, a.out.as_ref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Gauge(a) => {
            let phi: Gauge = a.gauge.parse()?;
            write_out(&gauge_table(&phi, a.diam, a.points)?, a.out.as_ref())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Csv(_) => 3,
        Error::Usage(_)
        | Error::Input(_)
        | Error::Parameter(_)
        | Error::Range { .. }
        | Error::Gauge(_)
        | Error::Precondition(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
