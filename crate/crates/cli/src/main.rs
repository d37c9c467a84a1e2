mod args;
mod commands;

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use uwoc::config::{Command, ConfigValues, Value};

use args::{Channel, Cli, Cmd, Format, Global, Modulation};
use commands::{Artifact, EyeArgs, SweepArgs};

enum Failure {
    /// Rejected input: exit 2.
    Usage(String),
    Core(uwoc::Error),
    Io(PathBuf, io::Error),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Core(e) if e.is_config() => 2,
            Failure::Core(_) | Failure::Io(..) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(msg) => f.write_str(msg),
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(path, e) => write!(f, "{}: {e}", path.display()),
        }
    }
}

impl From<uwoc::Error> for Failure {
    fn from(e: uwoc::Error) -> Self {
        Failure::Core(e)
    }
}

/// Parses `KEY=VALUE`, reading the value as an integer, a float or text.
fn parse_assignment(s: &str) -> Result<(&str, Value), Failure> {
    let (key, raw) = s
        .split_once('=')
        .ok_or_else(|| Failure::Usage(format!("--set `{s}`: expected KEY=VALUE")))?;
    let raw = raw.trim();
    let value = if let Ok(i) = raw.parse::<i128>() {
        Value::Integer(i)
    } else if let Ok(x) = raw.parse::<f64>() {
        Value::Number(x)
    } else {
        Value::Text(raw.trim_matches('"').to_string())
    };
    Ok((key.trim(), value))
}

fn global_flags(g: &Global, values: &mut ConfigValues) -> Result<(), Failure> {
    for s in &g.set {
        let (key, value) = parse_assignment(s)?;
        values.set(key, value)?;
    }
    values.set_integer("seed", g.seed)?;
    values.set_number("fec_threshold", g.fec_threshold)?;
    values.set_text("aperture", g.aperture.as_deref())?;
    values.set_text("q_grid", g.q_grid.as_deref())?;
    Ok(())
}

fn modulation_flags(m: &Modulation, values: &mut ConfigValues) -> uwoc::Result<()> {
    values.set_number("p", m.p)?;
    values.set_number("q", m.q)
}

fn channel_flags(c: &Channel, values: &mut ConfigValues) -> uwoc::Result<()> {
    values.set_text("channel", c.channel.as_deref())?;
    values.set_number("K_per_meter", c.k_per_meter)
}

fn command_flags(cmd: &Cmd, values: &mut ConfigValues) -> uwoc::Result<Command> {
    Ok(match cmd {
        Cmd::Ber { modulation, snr_db, .. } => {
            modulation_flags(modulation, values)?;
            values.set_number("snr_db", *snr_db)?;
            Command::Ber
        }
        Cmd::Mc {
            modulation,
            snr_db,
            symbols,
        } => {
            modulation_flags(modulation, values)?;
            values.set_number("snr_db", *snr_db)?;
            values.set_integer("symbols", *symbols)?;
            Command::Mc
        }
        Cmd::FecLimit { modulation } => {
            modulation_flags(modulation, values)?;
            Command::FecLimit
        }
        Cmd::OptimizeQ { p, .. } => {
            values.set_number("p", *p)?;
            Command::OptimizeQ
        }
        Cmd::Lmax {
            modulation, channel, ..
        } => {
            modulation_flags(modulation, values)?;
            channel_flags(channel, values)?;
            Command::Lmax
        }
        Cmd::Sweep { p_grid, p, channel, .. } => {
            values.set_text("p_grid", p_grid.as_deref())?;
            values.set_number("p", *p)?;
            channel_flags(channel, values)?;
            Command::Sweep
        }
        Cmd::Eye { modulation, snr_db, .. } => {
            modulation_flags(modulation, values)?;
            values.set_number("snr_db", *snr_db)?;
            Command::Eye
        }
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn emit(artifact: &Artifact, format: Format, out: Option<&Path>) -> Result<(), Failure> {
    let body = match format {
        Format::Csv => artifact.csv.clone(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&artifact.json).expect("JSON value serializes");
            s.push('\n');
            s
        }
    };
    match out {
        Some(path) => write_file(path, &body),
        None => io::stdout()
            .lock()
            .write_all(body.as_bytes())
            .map_err(|e| Failure::Io("<stdout>".into(), e)),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("--threads: {e}")))?;
    }

    let file_values = match &cli.global.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            ConfigValues::from_toml(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => ConfigValues::default(),
    };
    let mut flags = ConfigValues::default();
    global_flags(&cli.global, &mut flags)?;
    let command = command_flags(&cli.command, &mut flags)?;
    let values = file_values.overlay(flags);
    let cfg = values.resolve(command)?;

    let seed = || {
        cfg.seed.unwrap_or_else(|| {
            let s = rand::random();
            log::info!("no seed given, using {s}");
            s
        })
    };

    let artifact = match &cli.command {
        Cmd::Ber { snr_grid, .. } => commands::ber(&cfg, snr_grid)?,
        Cmd::Mc { .. } => commands::mc(&cfg, seed())?,
        Cmd::FecLimit { .. } => commands::fec_limit(&cfg)?,
        Cmd::OptimizeQ { refine, .. } => commands::optimize_q(&cfg, *refine)?,
        Cmd::Lmax { optimum_q, .. } => commands::lmax(&cfg, *optimum_q)?,
        Cmd::Sweep {
            variable,
            grid,
            no_optimize,
            svg,
            ..
        } => commands::sweep(
            &cfg,
            &values,
            SweepArgs {
                variable: *variable,
                grid: grid.as_deref(),
                optimize: !no_optimize,
                svg: svg.is_some(),
            },
        )?,
        Cmd::Eye {
            signal,
            samples_per_symbol,
            traces,
            ..
        } => commands::eye(
            &cfg,
            seed(),
            EyeArgs {
                signal: *signal,
                samples_per_symbol: *samples_per_symbol,
                traces: *traces,
            },
        )?,
    };

    emit(&artifact, cli.global.format, cli.global.out.as_deref())?;
    if let (Cmd::Sweep { svg: Some(path), .. }, Some(svg)) = (&cli.command, &artifact.svg) {
        write_file(path, svg)?;
    }
    eprintln!("{}", artifact.summary);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("uwoc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
