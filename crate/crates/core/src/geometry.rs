//! Geometric link budget and the maximum-distance solver.
//!
//! The received electrical SNR at range `L` is
//!
//! ```text
//! SNR(L) = P_t·D²·cos φ / (4·tan²θ·P_n) · exp(−K·L) / L²
//! ```
//!
//! and the longest usable range solves `exp(K·L)·L² = C` with
//! `C = P_t·D²·cos φ / (4·tan²θ·P_n·SNR_req)`. The solver works on the
//! logarithm `K·L + 2·ln L − ln C`, which is strictly increasing in `L`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analytic::{fec_limit_snr, FecSearchResult, TdhpParams};
use crate::error::{Error, Result};
use crate::units::deg_to_rad;
use crate::water::ChannelPreset;

/// Transmitter and receiver optics. Angles are in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry {
    /// Transmit optical power, W.
    pub p_t: f64,
    /// Thermal noise power, W.
    pub p_n: f64,
    /// Transmit half-beamwidth.
    pub theta_deg: f64,
    /// Receiver axis misalignment from the line of sight.
    pub phi_deg: f64,
    /// Receiver field of view.
    pub fov_deg: f64,
    /// Receiver focal length, m.
    pub focal_m: f64,
    /// Receiver aperture diameter when given directly, m.
    pub d_explicit: Option<f64>,
    /// Noise-equivalent power, W/√Hz. Carried for reference only.
    pub nep: f64,
    /// Bandwidth, Hz. Carried for reference only.
    pub bw_hz: f64,
}

impl Default for LinkGeometry {
    fn default() -> Self {
        LinkGeometry {
            p_t: 0.5,
            p_n: 2e-6,
            theta_deg: 10.0,
            phi_deg: 10.0,
            fov_deg: 10.0,
            focal_m: 0.6,
            d_explicit: Some(0.2),
            nep: 0.4e-12,
            bw_hz: 1e9,
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(name, v, "must be positive and finite"))
    }
}

impl LinkGeometry {
    pub fn validate(&self) -> Result<()> {
        positive("P_t_watts", self.p_t)?;
        positive("P_n_watts", self.p_n)?;
        if !(self.theta_deg > 0.0 && self.theta_deg < 90.0) {
            return Err(Error::domain("theta_deg", self.theta_deg, "must lie in (0, 90)"));
        }
        if !(self.phi_deg >= 0.0 && self.phi_deg < 90.0) {
            return Err(Error::domain("phi_deg", self.phi_deg, "must lie in [0, 90)"));
        }
        if !(self.fov_deg > 0.0 && self.fov_deg < 90.0) {
            return Err(Error::domain("fov_deg", self.fov_deg, "must lie in (0, 90)"));
        }
        positive("F_m", self.focal_m)?;
        if let Some(d) = self.d_explicit {
            positive("D_m", d)?;
        }
        if self.nep.is_nan() || self.nep < 0.0 {
            return Err(Error::domain("NEP", self.nep, "must be non-negative"));
        }
        if self.bw_hz.is_nan() || self.bw_hz < 0.0 {
            return Err(Error::domain("BW_hz", self.bw_hz, "must be non-negative"));
        }
        Ok(())
    }

    /// `P_t·D²·cos φ / (4·tan²θ·P_n)`, the range-independent part of the SNR.
    pub fn snr_gain(&self, mode: ApertureMode) -> Result<f64> {
        self.validate()?;
        let d = effective_aperture(self, mode)?;
        let tan_theta = deg_to_rad(self.theta_deg).tan();
        Ok(self.p_t * d * d * deg_to_rad(self.phi_deg).cos() / (4.0 * tan_theta * tan_theta * self.p_n))
    }

    /// Natural log of [`LinkGeometry::snr_gain`], summed term by term so that
    /// extreme powers do not overflow.
    pub fn ln_snr_gain(&self, mode: ApertureMode) -> Result<f64> {
        self.validate()?;
        let d = effective_aperture(self, mode)?;
        let tan_theta = deg_to_rad(self.theta_deg).tan();
        Ok(self.p_t.ln() + 2.0 * d.ln() + deg_to_rad(self.phi_deg).cos().ln()
            - 4f64.ln()
            - 2.0 * tan_theta.ln()
            - self.p_n.ln())
    }
}

/// Which receiver aperture to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApertureMode {
    /// The configured diameter `D`.
    #[default]
    Explicit,
    /// `2·F·tan(FOV)`.
    FromFov,
}

impl FromStr for ApertureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "explicit" => Ok(ApertureMode::Explicit),
            "from-fov" => Ok(ApertureMode::FromFov),
            other => Err(Error::Config(format!(
                "unknown aperture mode `{other}` (expected explicit or from-fov)"
            ))),
        }
    }
}

impl fmt::Display for ApertureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ApertureMode::Explicit => "explicit",
            ApertureMode::FromFov => "from-fov",
        })
    }
}

/// Receiver aperture diameter from focal length and field of view.
pub fn aperture(focal_m: f64, fov_deg: f64) -> Result<f64> {
    positive("F_m", focal_m)?;
    if !(0.0..90.0).contains(&fov_deg) {
        return Err(Error::domain("fov_deg", fov_deg, "must lie in [0, 90)"));
    }
    Ok(2.0 * focal_m * deg_to_rad(fov_deg).tan())
}

pub fn effective_aperture(geometry: &LinkGeometry, mode: ApertureMode) -> Result<f64> {
    match mode {
        ApertureMode::Explicit => geometry
            .d_explicit
            .ok_or_else(|| Error::Config("explicit aperture mode needs `D_m`".into())),
        ApertureMode::FromFov => aperture(geometry.focal_m, geometry.fov_deg),
    }
}

/// Linear SNR at range `distance_m` over a channel with attenuation `k`.
pub fn snr_at_distance(geometry: &LinkGeometry, k: f64, distance_m: f64, mode: ApertureMode) -> Result<f64> {
    positive("L", distance_m)?;
    if k.is_nan() || k < 0.0 {
        return Err(Error::domain("K", k, "must be non-negative"));
    }
    Ok(geometry.snr_gain(mode)? * (-k * distance_m).exp() / (distance_m * distance_m))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmaxResult {
    pub l_max: f64,
    /// `|exp(K·L)·L²/C − 1|` at the returned distance.
    pub residual: f64,
    pub iterations: u32,
}

const MAX_ITERATIONS: u32 = 2000;

/// Solves `exp(K·L)·L² = C` for the range at which the SNR drops to `required_snr`.
pub fn solve_lmax(geometry: &LinkGeometry, k: f64, required_snr: f64, mode: ApertureMode) -> Result<LmaxResult> {
    positive("required_snr", required_snr)?;
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::domain("K", k, "must be non-negative and finite"));
    }
    let ln_c = geometry.ln_snr_gain(mode)? - required_snr.ln();
    solve_log_budget(k, ln_c)
}

/// Root of `K·L + 2·ln L = ln_c`.
pub fn solve_log_budget(k: f64, ln_c: f64) -> Result<LmaxResult> {
    if !ln_c.is_finite() {
        return Err(Error::domain("ln C", ln_c, "must be finite"));
    }
    let g = |l: f64| k * l + 2.0 * l.ln() - ln_c;

    let mut iterations = 0u32;
    let (mut lo, mut hi) = (1e-6f64, 1.0f64);
    while g(lo) > 0.0 {
        hi = lo;
        lo *= 1e-3;
        iterations += 1;
        if lo == 0.0 || iterations > MAX_ITERATIONS {
            return Err(Error::domain("ln C", ln_c, "root below representable range"));
        }
    }
    while g(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        iterations += 1;
        if !hi.is_finite() || iterations > MAX_ITERATIONS {
            return Err(Error::domain("ln C", ln_c, "root above representable range"));
        }
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || iterations > MAX_ITERATIONS {
            break;
        }
        iterations += 1;
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let l_max = if g(hi).abs() < g(lo).abs() { hi } else { lo };
    Ok(LmaxResult {
        l_max,
        residual: g(l_max).exp_m1().abs(),
        iterations,
    })
}

/// FEC-limit search followed by the range solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkSolution {
    pub fec: FecSearchResult,
    pub lmax: LmaxResult,
}

pub fn lmax_for_params(
    geometry: &LinkGeometry,
    channel: &ChannelPreset,
    params: TdhpParams,
    threshold: f64,
    tol_db: f64,
    mode: ApertureMode,
) -> Result<LinkSolution> {
    let fec = fec_limit_snr(params, threshold, tol_db)?;
    let lmax = solve_lmax(geometry, channel.k_per_meter, fec.snr_linear, mode)?;
    Ok(LinkSolution { fec, lmax })
}
