use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Hybrid PAM2/PAM4 link simulator for underwater optical channels.
#[derive(Debug, Parser)]
#[command(name = "uwoc", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Flat TOML file of settings; flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Worker threads for Monte-Carlo chunks and sweep cells.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// BER threshold defining the FEC limit [default: 3.4e-3].
    #[arg(long, global = true, value_name = "FLOAT")]
    pub fec_threshold: Option<f64>,
    /// Receiver aperture: config `D_m` or `2F·tan(FOV)`.
    #[arg(long, global = true, value_name = "MODE")]
    pub aperture: Option<String>,
    /// Candidate q values for optimization, `start:stop:step` or a list.
    #[arg(long, global = true, value_name = "GRID")]
    pub q_grid: Option<String>,
    /// Override any config key, e.g. `--set theta_deg=30`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args, Default)]
pub struct Modulation {
    /// PAM4 generation ratio.
    #[arg(long)]
    pub p: Option<f64>,
    /// Power control factor.
    #[arg(long)]
    pub q: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct Channel {
    /// red, green or blue.
    #[arg(long)]
    pub channel: Option<String>,
    /// Custom beam attenuation coefficient in 1/m.
    #[arg(long = "k-per-meter", visible_alias = "K", value_name = "K")]
    pub k_per_meter: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Closed-form BER against SNR.
    Ber {
        #[command(flatten)]
        modulation: Modulation,
        /// Single SNR point in dB.
        #[arg(long)]
        snr_db: Option<f64>,
        /// SNR points in dB.
        #[arg(long, value_name = "GRID", default_value = "0:25:0.5", conflicts_with = "snr_db")]
        snr_grid: String,
    },
    /// Monte-Carlo BER measurement.
    Mc {
        #[command(flatten)]
        modulation: Modulation,
        #[arg(long)]
        snr_db: Option<f64>,
        /// Symbols per run [default: 10000000].
        #[arg(long)]
        symbols: Option<u64>,
    },
    /// SNR at which the BER meets the FEC threshold.
    FecLimit {
        #[command(flatten)]
        modulation: Modulation,
    },
    /// Best power split q for a PAM4 ratio.
    OptimizeQ {
        #[arg(long)]
        p: Option<f64>,
        /// Polish the grid optimum with a continuous search.
        #[arg(long)]
        refine: bool,
    },
    /// Maximum transmission distance at the FEC limit.
    Lmax {
        #[command(flatten)]
        modulation: Modulation,
        #[command(flatten)]
        channel: Channel,
        /// Use the optimal q for `p` instead of `--q`.
        #[arg(long, conflicts_with = "q")]
        optimum_q: bool,
    },
    /// Sweep one parameter and tabulate FEC limits and L_max.
    Sweep {
        #[arg(value_enum)]
        variable: Variable,
        /// Swept values; defaults depend on the variable.
        #[arg(long, value_name = "GRID")]
        grid: Option<String>,
        /// PAM4 ratios for geometry sweeps.
        #[arg(long, value_name = "GRID")]
        p_grid: Option<String>,
        /// PAM4 ratio held fixed by q sweeps [default: 0.5].
        #[arg(long)]
        p: Option<f64>,
        #[command(flatten)]
        channel: Channel,
        /// Only emit q = 0 baseline rows.
        #[arg(long)]
        no_optimize: bool,
        /// Also render the sweep as an SVG plot.
        #[arg(long, value_name = "PATH")]
        svg: Option<PathBuf>,
    },
    /// Eye-diagram traces.
    Eye {
        #[command(flatten)]
        modulation: Modulation,
        #[arg(long, value_enum, default_value_t = Signal::Tdhp)]
        signal: Signal,
        /// SNR in dB; omit for a noise-free eye.
        #[arg(long)]
        snr_db: Option<f64>,
        #[arg(long, default_value_t = 16)]
        samples_per_symbol: usize,
        #[arg(long, default_value_t = 1000)]
        traces: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variable {
    P,
    Q,
    Theta,
    Phi,
    Fov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Signal {
    Pam2,
    Pam4,
    Tdhp,
}
