//! Rate- and distance-adaptive underwater optical links with time-domain
//! hybrid PAM2/PAM4 signalling.
//!
//! * [`water`]: Beer–Lambert attenuation and the red/green/blue presets.
//! * [`analytic`]: closed-form BER, FEC-limit search and power-split optimization.
//! * [`sim`]: Monte-Carlo symbol simulation and eye-diagram traces.
//! * [`geometry`]: optical link budget and the maximum-distance solver.
//! * [`sweep`]: parameter sweeps with CSV and SVG output.
//! * [`config`]: flat TOML run configuration.

pub mod analytic;
pub mod config;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod output;
pub mod sim;
pub mod special;
pub mod svg;
pub mod sweep;
pub mod units;
pub mod water;

pub use analytic::{
    ber_pam2, ber_pam4, ber_tdhp, bits_per_symbol, fec_limit_snr, optimize_q, FecSearchResult, QOptimum, TdhpParams,
    DEFAULT_FEC_THRESHOLD,
};
pub use error::{Error, Result};
pub use geometry::{
    aperture, effective_aperture, lmax_for_params, snr_at_distance, solve_lmax, ApertureMode, LinkGeometry, LmaxResult,
};
pub use sim::{measure_ber, BerEstimate};
pub use units::{db_linear, linear_db};
pub use water::{ChannelLabel, ChannelPreset};
