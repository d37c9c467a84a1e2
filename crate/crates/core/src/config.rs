//! Run configuration: a flat TOML file of link and modulation settings,
//! overlaid with command-line values, validated into a [`RunConfig`].
//!
//! ```toml
//! P_t_watts = 0.5
//! theta_deg = 10
//! channel = "blue"
//! p = 0.5
//! ```

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::analytic::{default_q_grid, TdhpParams, DEFAULT_FEC_THRESHOLD, DEFAULT_TOL_DB};
use crate::error::{Error, Result};
use crate::geometry::{ApertureMode, LinkGeometry};
use crate::grid::parse_grid;
use crate::sweep::default_p_grid;
use crate::water::ChannelPreset;

/// Keys accepted in a config file.
pub const KEYS: &[&str] = &[
    "P_t_watts",
    "P_n_watts",
    "theta_deg",
    "phi_deg",
    "fov_deg",
    "F_m",
    "D_m",
    "NEP",
    "BW_hz",
    "channel",
    "K_per_meter",
    "p",
    "q",
    "fec_threshold",
    "tol_db",
    "seed",
    "aperture",
    "q_grid",
    "p_grid",
    "symbols",
    "snr_db",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    /// Wide enough for both TOML integers and `u64` flags.
    Integer(i128),
    Text(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(x) => write!(f, "{x}"),
            Value::Integer(i) => write!(f, "{i}"),
            Value::Text(s) => write!(f, "{s:?}"),
        }
    }
}

/// Where a setting came from, for diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    File { line: usize },
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::File { line } => write!(f, "config line {line}"),
            Origin::Flag => f.write_str("command line"),
        }
    }
}

/// Raw settings keyed by config name. Later layers override earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigValues {
    entries: BTreeMap<&'static str, (Value, Origin)>,
}

fn known_key(key: &str) -> Option<&'static str> {
    KEYS.iter().copied().find(|k| *k == key)
}

fn line_of(text: &str, offset: usize) -> usize {
    text.as_bytes()[..offset.min(text.len())]
        .iter()
        .filter(|&&b| b == b'\n')
        .count()
        + 1
}

impl ConfigValues {
    /// Parses a flat TOML document. Tables, arrays and unknown keys are rejected.
    pub fn from_toml(text: &str) -> Result<Self> {
        let table: BTreeMap<String, toml::Spanned<toml::Value>> =
            toml::from_str(text).map_err(|e| Error::Config(format!("config: {}", e.message())))?;
        let mut values = ConfigValues::default();
        for (key, spanned) in table {
            let line = line_of(text, spanned.span().start);
            let Some(name) = known_key(&key) else {
                return Err(Error::Config(format!("config line {line}: unknown key `{key}`")));
            };
            let value = match spanned.into_inner() {
                toml::Value::Float(x) => Value::Number(x),
                toml::Value::Integer(i) => Value::Integer(i.into()),
                toml::Value::String(s) => Value::Text(s),
                other => {
                    return Err(Error::Config(format!(
                        "config line {line}: `{key}` has unsupported type {}",
                        other.type_str()
                    )))
                }
            };
            values.entries.insert(name, (value, Origin::File { line }));
        }
        Ok(values)
    }

    /// Sets a value from the command line.
    pub fn set(&mut self, key: &str, value: Value) -> Result<()> {
        let name = known_key(key).ok_or_else(|| Error::Config(format!("unknown key `{key}`")))?;
        self.entries.insert(name, (value, Origin::Flag));
        Ok(())
    }

    pub fn set_number(&mut self, key: &str, value: Option<f64>) -> Result<()> {
        match value {
            Some(v) => self.set(key, Value::Number(v)),
            None => Ok(()),
        }
    }

    pub fn set_text(&mut self, key: &str, value: Option<&str>) -> Result<()> {
        match value {
            Some(v) => self.set(key, Value::Text(v.to_string())),
            None => Ok(()),
        }
    }

    pub fn set_integer(&mut self, key: &str, value: Option<u64>) -> Result<()> {
        match value {
            Some(v) => self.set(key, Value::Integer(v.into())),
            None => Ok(()),
        }
    }

    /// Applies `other` on top of `self`.
    pub fn overlay(mut self, other: ConfigValues) -> Self {
        self.entries.extend(other.entries);
        self
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn err(&self, key: &str, msg: impl fmt::Display) -> Error {
        match self.entries.get(key) {
            Some((v, origin)) => Error::Config(format!("{origin}: `{key}` = {v}: {msg}")),
            None => Error::Config(format!("`{key}`: {msg}")),
        }
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((Value::Number(x), _)) if x.is_finite() => Ok(Some(*x)),
            Some((Value::Integer(i), _)) => Ok(Some(*i as f64)),
            Some(_) => Err(self.err(key, "expected a finite number")),
        }
    }

    fn text(&self, key: &str) -> Result<Option<&str>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((Value::Text(s), _)) => Ok(Some(s)),
            Some(_) => Err(self.err(key, "expected a string")),
        }
    }

    fn unsigned(&self, key: &str) -> Result<Option<u64>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((Value::Integer(i), _)) => u64::try_from(*i)
                .map(Some)
                .map_err(|_| self.err(key, "expected an integer in [0, 2^64)")),
            // TOML integers stop at 2^63, so larger seeds may be quoted.
            Some((Value::Text(s), _)) => s
                .parse::<u64>()
                .map(Some)
                .map_err(|_| self.err(key, "expected an integer in [0, 2^64)")),
            Some(_) => Err(self.err(key, "expected a non-negative integer")),
        }
    }

    fn ranged(&self, key: &str, default: f64, ok: impl Fn(f64) -> bool, domain: &str) -> Result<f64> {
        let v = self.number(key)?.unwrap_or(default);
        if ok(v) {
            Ok(v)
        } else {
            Err(self.err(key, format!("out of range, must be {domain}")))
        }
    }

    /// Validates every setting and fills defaults.
    pub fn resolve(&self, command: Command) -> Result<RunConfig> {
        let def = LinkGeometry::default();
        let pos = |v: f64| v > 0.0;
        let angle_open = |v: f64| v > 0.0 && v < 90.0;
        let d_explicit = match self.number("D_m")? {
            Some(d) if d > 0.0 => Some(d),
            Some(_) => return Err(self.err("D_m", "out of range, must be > 0")),
            None => def.d_explicit,
        };
        let geometry = LinkGeometry {
            p_t: self.ranged("P_t_watts", def.p_t, pos, "> 0")?,
            p_n: self.ranged("P_n_watts", def.p_n, pos, "> 0")?,
            theta_deg: self.ranged("theta_deg", def.theta_deg, angle_open, "in (0, 90)")?,
            phi_deg: self.ranged("phi_deg", def.phi_deg, |v| (0.0..90.0).contains(&v), "in [0, 90)")?,
            fov_deg: self.ranged("fov_deg", def.fov_deg, angle_open, "in (0, 90)")?,
            focal_m: self.ranged("F_m", def.focal_m, pos, "> 0")?,
            d_explicit,
            nep: self.ranged("NEP", def.nep, |v| v >= 0.0, ">= 0")?,
            bw_hz: self.ranged("BW_hz", def.bw_hz, |v| v >= 0.0, ">= 0")?,
        };

        let channel = match (self.text("channel")?, self.number("K_per_meter")?) {
            (Some(_), Some(_)) => {
                return Err(self.err("K_per_meter", "give either `channel` or `K_per_meter`, not both"))
            }
            (Some(name), None) => Some(
                name.parse::<ChannelPreset>()
                    .map_err(|_| self.err("channel", "expected red, green or blue"))?,
            ),
            (None, Some(k)) => Some(ChannelPreset::custom(k).map_err(|_| self.err("K_per_meter", "must be >= 0"))?),
            (None, None) => None,
        };

        let unit = |v: f64| (0.0..=1.0).contains(&v);
        let p = self.ranged("p", 0.0, unit, "in [0, 1]")?;
        let q = self.ranged("q", 0.0, unit, "in [0, 1]")?;
        let params = TdhpParams::new(p, q)?;

        let threshold = self.ranged(
            "fec_threshold",
            DEFAULT_FEC_THRESHOLD,
            |v| v > 0.0 && v < 0.375,
            "in (0, 0.375)",
        )?;
        let tol_db = self.ranged("tol_db", DEFAULT_TOL_DB, pos, "> 0")?;

        let aperture = match self.text("aperture")? {
            Some(s) => s
                .parse()
                .map_err(|_| self.err("aperture", "expected explicit or from-fov"))?,
            None => ApertureMode::Explicit,
        };
        if aperture == ApertureMode::Explicit && geometry.d_explicit.is_none() {
            return Err(self.err("D_m", "required by the explicit aperture mode"));
        }

        let grid = |key: &str, default: Vec<f64>, ok: &dyn Fn(f64) -> bool, domain: &str| -> Result<Vec<f64>> {
            let Some(spec) = self.text(key)? else {
                return Ok(default);
            };
            let g = parse_grid(spec).map_err(|e| self.err(key, e))?;
            if g.iter().all(|&v| ok(v)) {
                Ok(g)
            } else {
                Err(self.err(key, format!("grid values must be {domain}")))
            }
        };
        let q_grid = grid("q_grid", default_q_grid(), &|v| (0.0..1.0).contains(&v), "in [0, 1)")?;
        let p_grid = grid("p_grid", default_p_grid(), &unit, "in [0, 1]")?;

        let symbols = self.unsigned("symbols")?.unwrap_or(10_000_000);
        if symbols == 0 {
            return Err(self.err("symbols", "must be at least 1"));
        }
        let snr_db = self.number("snr_db")?;
        if command == Command::Mc && snr_db.is_none() {
            return Err(Error::Config("missing required key `snr_db` (flag --snr-db)".into()));
        }
        if command == Command::Lmax && channel.is_none() {
            return Err(Error::Config(
                "missing required key `channel` or `K_per_meter` (flag --channel)".into(),
            ));
        }
        if command == Command::OptimizeQ && !(p > 0.0 && p < 1.0) {
            return Err(self.err("p", "q optimization needs 0 < p < 1"));
        }

        Ok(RunConfig {
            command,
            geometry,
            channel,
            params,
            threshold,
            tol_db,
            aperture,
            seed: self.unsigned("seed")?,
            q_grid,
            p_grid,
            symbols,
            snr_db,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Ber,
    Mc,
    FecLimit,
    OptimizeQ,
    Lmax,
    Sweep,
    Eye,
}

/// Validated settings shared by every command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub geometry: LinkGeometry,
    /// `None` means "all three laser presets" where a command accepts that.
    pub channel: Option<ChannelPreset>,
    pub params: TdhpParams,
    pub threshold: f64,
    pub tol_db: f64,
    pub aperture: ApertureMode,
    pub seed: Option<u64>,
    pub q_grid: Vec<f64>,
    pub p_grid: Vec<f64>,
    pub symbols: u64,
    pub snr_db: Option<f64>,
}

/// Parses an optional config file and applies flag overrides on top.
pub fn parse_config(file: Option<&str>, flags: ConfigValues, command: Command) -> Result<RunConfig> {
    let base = match file {
        Some(text) => ConfigValues::from_toml(text)?,
        None => ConfigValues::default(),
    };
    base.overlay(flags).resolve(command)
}
