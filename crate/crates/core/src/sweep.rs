//! Parameter sweeps over `p`, `q` and the link optics, one record per cell.
//!
//! Every record is produced by [`evaluate_cell`], so any row of a sweep can be
//! recomputed on its own and matches bit for bit.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{default_q_grid, fec_limit_snr, optimize_q, TdhpParams, DEFAULT_FEC_THRESHOLD, DEFAULT_TOL_DB};
use crate::error::{Error, Result};
use crate::geometry::{lmax_for_params, ApertureMode, LinkGeometry};
use crate::grid::linear_grid;
use crate::output::fmt_sig6;
use crate::water::{ChannelLabel, ChannelPreset};

pub const CSV_HEADER: &str = "variable,value,channel,p,q_used,mode,fec_limit_db,lmax_m";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariable {
    P,
    Q,
    Theta,
    Phi,
    Fov,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::P => "p",
            SweepVariable::Q => "q",
            SweepVariable::Theta => "theta",
            SweepVariable::Phi => "phi",
            SweepVariable::Fov => "fov",
        }
    }

    fn check_value(self, v: f64) -> Result<()> {
        let ok = match self {
            SweepVariable::P | SweepVariable::Q => (0.0..=1.0).contains(&v),
            SweepVariable::Theta | SweepVariable::Fov => v > 0.0 && v < 90.0,
            SweepVariable::Phi => (0.0..90.0).contains(&v),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "{} grid value {v} is outside its domain",
                self.name()
            )))
        }
    }

    /// Default grid for this variable.
    pub fn default_grid(self) -> Vec<f64> {
        match self {
            SweepVariable::P => default_p_grid(),
            SweepVariable::Q => default_q_grid(),
            SweepVariable::Theta => vec![10.0, 15.0, 20.0, 25.0, 30.0],
            SweepVariable::Phi | SweepVariable::Fov => vec![5.0, 10.0, 15.0, 20.0, 25.0],
        }
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "p" => Ok(SweepVariable::P),
            "q" => Ok(SweepVariable::Q),
            "theta" => Ok(SweepVariable::Theta),
            "phi" => Ok(SweepVariable::Phi),
            "fov" => Ok(SweepVariable::Fov),
            other => Err(Error::Config(format!("unknown sweep variable `{other}`"))),
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How `q` was chosen for a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// `q = 0`.
    NonOptimum,
    /// `q` from the grid optimization (0 at the pure formats).
    Optimum,
    /// `q` set explicitly by a `q` sweep.
    Fixed,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::NonOptimum => "non-optimum",
            Mode::Optimum => "optimum",
            Mode::Fixed => "fixed",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "non-optimum" => Ok(Mode::NonOptimum),
            "optimum" => Ok(Mode::Optimum),
            "fixed" => Ok(Mode::Fixed),
            other => Err(Error::Config(format!("unknown mode `{other}`"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One row of a sweep. `q` sweeps carry no channel or distance; unreachable
/// cells have no FEC limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub variable: SweepVariable,
    pub value: f64,
    pub channel: Option<ChannelLabel>,
    pub p: f64,
    pub q_used: f64,
    pub mode: Mode,
    pub fec_limit_db: Option<f64>,
    pub lmax_m: Option<f64>,
}

const NO_SOLUTION: &str = "no_solution";

impl SweepRecord {
    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>, missing: &str| v.map(fmt_sig6).unwrap_or_else(|| missing.to_string());
        format!(
            "{},{},{},{},{},{},{},{}",
            self.variable,
            fmt_sig6(self.value),
            self.channel.map(|c| c.to_string()).unwrap_or_default(),
            fmt_sig6(self.p),
            fmt_sig6(self.q_used),
            self.mode,
            opt(self.fec_limit_db, NO_SOLUTION),
            opt(self.lmax_m, ""),
        )
    }

    /// Parses a row written by [`SweepRecord::csv_row`].
    pub fn parse_csv_row(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.trim_end_matches(['\r', '\n']).split(',').collect();
        let [variable, value, channel, p, q_used, mode, fec, lmax] = fields[..] else {
            return Err(Error::Config(format!(
                "sweep row needs 8 fields, found {}",
                fields.len()
            )));
        };
        let num = |name: &str, s: &str| -> Result<f64> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Config(format!("field `{name}`: `{s}` is not a number")))
        };
        let channel = match channel {
            "" => None,
            c => Some(c.parse::<ChannelPreset>()?.label),
        };
        Ok(SweepRecord {
            variable: variable.parse()?,
            value: num("value", value)?,
            channel,
            p: num("p", p)?,
            q_used: num("q_used", q_used)?,
            mode: mode.parse()?,
            fec_limit_db: match fec {
                NO_SOLUTION => None,
                s => Some(num("fec_limit_db", s)?),
            },
            lmax_m: match lmax {
                "" => None,
                s => Some(num("lmax_m", s)?),
            },
        })
    }
}

pub fn write_csv<W: Write>(records: &[SweepRecord], mut w: W) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

/// Settings shared by every cell of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub threshold: f64,
    pub tol_db: f64,
    pub q_grid: Vec<f64>,
    pub aperture: ApertureMode,
    /// Emit optimum rows next to the `q = 0` baseline.
    pub optimize: bool,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            threshold: DEFAULT_FEC_THRESHOLD,
            tol_db: DEFAULT_TOL_DB,
            q_grid: default_q_grid(),
            aperture: ApertureMode::Explicit,
            optimize: true,
        }
    }
}

impl SweepSettings {
    fn modes(&self) -> &'static [Mode] {
        if self.optimize {
            &[Mode::NonOptimum, Mode::Optimum]
        } else {
            &[Mode::NonOptimum]
        }
    }
}

/// Complete description of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    /// PAM4 ratios for link sweeps (ignored by `q` sweeps).
    pub p_grid: Vec<f64>,
    /// PAM4 ratio held fixed by `q` sweeps.
    pub fixed_p: f64,
    pub geometry: LinkGeometry,
    pub channels: Vec<ChannelPreset>,
    pub settings: SweepSettings,
}

impl SweepSpec {
    pub fn new(variable: SweepVariable) -> Self {
        SweepSpec {
            variable,
            grid: variable.default_grid(),
            p_grid: default_p_grid(),
            fixed_p: 0.5,
            geometry: LinkGeometry::default(),
            channels: ChannelPreset::RGB.to_vec(),
            settings: SweepSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_grid(self.variable, &self.grid)?;
        if self.variable != SweepVariable::Q {
            check_grid(SweepVariable::P, &self.p_grid)?;
            if self.channels.is_empty() {
                return Err(Error::Config("sweep needs at least one channel".into()));
            }
        }
        Ok(())
    }
}

/// `{0, 0.1, …, 1}`.
pub fn default_p_grid() -> Vec<f64> {
    linear_grid(0.0, 1.0, 0.1).expect("static grid")
}

fn check_grid(variable: SweepVariable, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config(format!("{variable} grid is empty")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(format!("{variable} grid is not strictly increasing")));
    }
    grid.iter().try_for_each(|&v| variable.check_value(v))
}

/// The `q` a mode uses at PAM4 ratio `p`.
pub fn q_for_mode(p: f64, mode: Mode, settings: &SweepSettings) -> Result<f64> {
    match mode {
        Mode::NonOptimum => Ok(0.0),
        Mode::Optimum if p == 0.0 || p == 1.0 => Ok(0.0),
        Mode::Optimum => Ok(optimize_q(p, settings.threshold, &settings.q_grid)?.q_star),
        Mode::Fixed => Err(Error::Config("fixed mode needs an explicit q".into())),
    }
}

fn apply(variable: SweepVariable, value: f64, base: &LinkGeometry) -> LinkGeometry {
    let mut g = *base;
    match variable {
        SweepVariable::Theta => g.theta_deg = value,
        SweepVariable::Phi => g.phi_deg = value,
        SweepVariable::Fov => g.fov_deg = value,
        SweepVariable::P | SweepVariable::Q => {}
    }
    g
}

/// Computes one link-sweep row with `q` already chosen.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_link_cell(
    variable: SweepVariable,
    value: f64,
    channel: &ChannelPreset,
    p: f64,
    q: f64,
    mode: Mode,
    base: &LinkGeometry,
    settings: &SweepSettings,
) -> Result<SweepRecord> {
    let geometry = apply(variable, value, base);
    let aperture = if variable == SweepVariable::Fov {
        ApertureMode::FromFov
    } else {
        settings.aperture
    };
    let params = TdhpParams::new(p, q)?;
    let sol = lmax_for_params(
        &geometry,
        channel,
        params,
        settings.threshold,
        settings.tol_db,
        aperture,
    )?;
    Ok(SweepRecord {
        variable,
        value,
        channel: Some(channel.label),
        p,
        q_used: params.q(),
        mode,
        fec_limit_db: Some(sol.fec.snr_db),
        lmax_m: Some(sol.lmax.l_max),
    })
}

/// Recomputes a single link-sweep cell from scratch.
pub fn evaluate_cell(
    variable: SweepVariable,
    value: f64,
    channel: &ChannelPreset,
    p: f64,
    mode: Mode,
    base: &LinkGeometry,
    settings: &SweepSettings,
) -> Result<SweepRecord> {
    let q = q_for_mode(p, mode, settings)?;
    evaluate_link_cell(variable, value, channel, p, q, mode, base, settings)
}

fn link_sweep(
    variable: SweepVariable,
    grid: &[f64],
    channels: &[ChannelPreset],
    p_grid: &[f64],
    geometry: &LinkGeometry,
    settings: &SweepSettings,
) -> Result<Vec<SweepRecord>> {
    check_grid(variable, grid)?;
    check_grid(SweepVariable::P, p_grid)?;
    geometry.validate()?;

    let q_star: Vec<(f64, f64)> = p_grid
        .par_iter()
        .map(|&p| Ok((p, q_for_mode(p, Mode::Optimum, settings)?)))
        .collect::<Result<_>>()?;

    let mut cells = Vec::new();
    for &value in grid {
        for channel in sorted_channels(channels) {
            for &(p, q_opt) in &q_star {
                for &mode in settings.modes() {
                    let q = if mode == Mode::Optimum { q_opt } else { 0.0 };
                    cells.push((value, channel, p, q, mode));
                }
            }
        }
    }
    cells
        .into_par_iter()
        .map(|(value, channel, p, q, mode)| {
            evaluate_link_cell(variable, value, &channel, p, q, mode, geometry, settings)
        })
        .collect()
}

fn sorted_channels(channels: &[ChannelPreset]) -> Vec<ChannelPreset> {
    let mut v = channels.to_vec();
    v.sort_by(|a, b| a.label.cmp(&b.label).then(a.k_per_meter.total_cmp(&b.k_per_meter)));
    v
}

/// `L_max` against PAM4 ratio for each channel.
pub fn sweep_p(
    p_grid: &[f64],
    channels: &[ChannelPreset],
    geometry: &LinkGeometry,
    settings: &SweepSettings,
) -> Result<Vec<SweepRecord>> {
    check_grid(SweepVariable::P, p_grid)?;
    let mut rows = Vec::new();
    for &p in p_grid {
        rows.extend(link_sweep(SweepVariable::P, &[p], channels, &[p], geometry, settings)?);
    }
    Ok(rows)
}

/// FEC limit against `q` at fixed `p`. Unreachable cells are kept with no limit.
pub fn sweep_q(p: f64, q_grid: &[f64], threshold: f64, tol_db: f64) -> Result<Vec<SweepRecord>> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain("p", p, "q sweeps need 0 < p < 1"));
    }
    check_grid(SweepVariable::Q, q_grid)?;
    q_grid
        .par_iter()
        .map(|&q| {
            let fec_limit_db = match fec_limit_snr(TdhpParams::new(p, q)?, threshold, tol_db) {
                Ok(r) => Some(r.snr_db),
                Err(Error::NoSolution { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok(SweepRecord {
                variable: SweepVariable::Q,
                value: q,
                channel: None,
                p,
                q_used: q,
                mode: Mode::Fixed,
                fec_limit_db,
                lmax_m: None,
            })
        })
        .collect()
}

/// `L_max` against one of the optical parameters, for every `p` and channel.
/// FOV sweeps always derive the aperture from the FOV.
pub fn sweep_geometry(
    variable: SweepVariable,
    grid: &[f64],
    channels: &[ChannelPreset],
    p_grid: &[f64],
    geometry: &LinkGeometry,
    settings: &SweepSettings,
) -> Result<Vec<SweepRecord>> {
    if !matches!(variable, SweepVariable::Theta | SweepVariable::Phi | SweepVariable::Fov) {
        return Err(Error::Config(format!("`{variable}` is not a geometry variable")));
    }
    link_sweep(variable, grid, channels, p_grid, geometry, settings)
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    match spec.variable {
        SweepVariable::P => sweep_p(&spec.grid, &spec.channels, &spec.geometry, &spec.settings),
        SweepVariable::Q => sweep_q(spec.fixed_p, &spec.grid, spec.settings.threshold, spec.settings.tol_db),
        v => sweep_geometry(
            v,
            &spec.grid,
            &spec.channels,
            &spec.p_grid,
            &spec.geometry,
            &spec.settings,
        ),
    }
}

/// Largest optimum-over-baseline `L_max` gain per (swept value, channel).
pub fn lmax_improvements(records: &[SweepRecord]) -> Vec<(f64, ChannelLabel, f64)> {
    let mut out: Vec<(f64, ChannelLabel, f64)> = Vec::new();
    for opt in records.iter().filter(|r| r.mode == Mode::Optimum) {
        let Some(base) = records
            .iter()
            .find(|r| r.mode == Mode::NonOptimum && r.value == opt.value && r.channel == opt.channel && r.p == opt.p)
        else {
            continue;
        };
        let (Some(a), Some(b), Some(ch)) = (opt.lmax_m, base.lmax_m, opt.channel) else {
            continue;
        };
        let gain = a - b;
        match out.iter_mut().find(|(v, c, _)| *v == opt.value && *c == ch) {
            Some(entry) => entry.2 = entry.2.max(gain),
            None => out.push((opt.value, ch, gain)),
        }
    }
    out
}
