//! `spinrad`: batch front-end. One scenario per invocation.
//!
//! Exit codes: 0 ok, 1 a verification check failed, 2 usage or config
//! error, 3 numeric non-convergence.

mod config;
mod emit;
mod run;

use clap::{Parser, Subcommand, ValueEnum};
use config::Config;
use emit::{config_hash, Format, Header, Regime, Writer};
use run::Failure;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "spinrad", version, about = "Radiation and stochastic spin-down of rotating bodies")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (default: `[output] dir`, else the working directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// Overrides `[rotor] seed` and the verification ensemble seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Per-channel spectral photon flux on a frequency grid.
    Spectrum,
    /// Radiated power, torque and heat.
    Power,
    /// Photon counting statistics and entropy production.
    Stats,
    /// Langevin ensemble and stationary Fokker-Planck density.
    Rotor,
    /// Torque and force on a test body versus separation.
    Twobody,
    /// Runs the closed-form check suite and prints a pass/fail table.
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Self::Spectrum => "spectrum",
            Self::Power => "power",
            Self::Stats => "stats",
            Self::Rotor => "rotor",
            Self::Twobody => "twobody",
            Self::Verify => "verify",
        }
    }

    fn default_format(self) -> Format {
        match self {
            Self::Spectrum | Self::Twobody => Format::Csv,
            _ => Format::Json,
        }
    }
}

fn parse_format(field: &str, s: &str) -> Result<Format, Failure> {
    match s {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        _ => Err(Failure::Config(format!("{field} = \"{s}\" is not one of csv, json"))),
    }
}

fn header(command: Command, hash: String, units: String) -> Header {
    Header {
        program: "spinrad",
        version: env!("CARGO_PKG_VERSION"),
        command: command.name().into(),
        config_sha256: hash,
        units,
        seed: None,
        regime: Regime::default(),
    }
}

fn verify(cli: &Cli) -> Result<(), Failure> {
    let results = run::verify(cli.seed);
    for r in &results {
        println!("{}", r.line());
    }
    let passed = results.iter().filter(|r| r.pass).count();
    println!("{passed} of {} checks passed", results.len());
    if let Some(dir) = &cli.out {
        let mut h = header(Command::Verify, "none".into(), "natural".into());
        h.seed = Some(cli.seed.unwrap_or(spinrad::verify::RotorCheckSetup::default().seed));
        Writer::new(dir, h)?.json("verify", &results)?;
    }
    if passed < results.len() {
        return Err(Failure::Checks { failed: results.len() - passed, total: results.len() });
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Config("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("--threads: {e}")))?;
    }
    if cli.command == Command::Verify {
        return verify(cli);
    }
    let path = cli.config.as_ref().ok_or_else(|| Failure::Config("--config <path> is required".into()))?;
    let bytes = std::fs::read(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| Failure::Config(format!("{}: not UTF-8", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let cfg = Config::parse(&text, base)?;

    let output = cfg.raw.output.as_ref();
    let format = match (cli.format, output.and_then(|o| o.format.as_deref())) {
        (Some(FormatArg::Csv), _) => Format::Csv,
        (Some(FormatArg::Json), _) => Format::Json,
        (None, Some(s)) => parse_format("output.format", s)?,
        (None, None) => cli.command.default_format(),
    };
    let dir = match (&cli.out, output.and_then(|o| o.dir.as_ref())) {
        (Some(d), _) => d.clone(),
        (None, Some(d)) if d.is_absolute() => d.clone(),
        (None, Some(d)) => base.join(d),
        (None, None) => PathBuf::from("."),
    };
    let mut out = Writer::new(&dir, header(cli.command, config_hash(&bytes), cfg.units.label()))?;
    match cli.command {
        Command::Spectrum => run::spectrum_cmd(&cfg, &mut out, format)?,
        Command::Power => run::power(&cfg, &mut out, format)?,
        Command::Stats => run::stats(&cfg, &mut out, format)?,
        Command::Rotor => run::rotor(&cfg, &mut out, format, cli.seed)?,
        Command::Twobody => run::twobody(&cfg, &mut out, format)?,
        Command::Verify => unreachable!(),
    }
    for p in &out.written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spinrad: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
