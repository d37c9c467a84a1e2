//! Eye-diagram traces of NRZ hybrid PAM waveforms.
//!
//! Levels are normalised so the noise-free eye looks the same at every SNR:
//! PAM2 sits at `±√(1−q)`, PAM4 at `{±1, ±3}·√((1+q)/7)`, and each sample gets
//! independent Gaussian noise of standard deviation `1/√snr`. The decision SNR
//! at the symbol centre therefore equals the requested one.

use std::io::{self, Write};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{bits_rng, map_segment, noise_rng, FrameLayout, Layout};
use crate::analytic::TdhpParams;
use crate::error::{Error, Result};
use crate::output::fmt_sig6;

pub const DEFAULT_SAMPLES_PER_SYMBOL: usize = 16;
pub const DEFAULT_TRACES: usize = 1000;
pub const WINDOW_SYMBOLS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EyeFormat {
    Pam2,
    Pam4,
    Tdhp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EyeConfig {
    pub format: EyeFormat,
    /// Only consulted for [`EyeFormat::Tdhp`].
    pub params: TdhpParams,
    /// Linear SNR, or `None` for a noise-free eye.
    pub snr: Option<f64>,
    pub samples_per_symbol: usize,
    pub n_traces: usize,
    pub seed: u64,
}

impl EyeConfig {
    pub fn new(format: EyeFormat, params: TdhpParams, snr: Option<f64>, seed: u64) -> Self {
        EyeConfig {
            format,
            params,
            snr,
            samples_per_symbol: DEFAULT_SAMPLES_PER_SYMBOL,
            n_traces: DEFAULT_TRACES,
            seed,
        }
    }

    fn effective_params(&self) -> TdhpParams {
        match self.format {
            EyeFormat::Pam2 => TdhpParams::pure_pam2(),
            EyeFormat::Pam4 => TdhpParams::pure_pam4(),
            EyeFormat::Tdhp => self.params,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EyeTraceSet {
    pub format: EyeFormat,
    pub samples_per_symbol: usize,
    pub window_symbols: usize,
    pub traces: Vec<Vec<f64>>,
}

impl EyeTraceSet {
    /// Sample offsets of the symbol centres inside a trace.
    pub fn decision_offsets(&self) -> Vec<usize> {
        (0..self.window_symbols)
            .map(|k| k * self.samples_per_symbol + self.samples_per_symbol / 2)
            .collect()
    }

    pub fn decision_samples(&self) -> Vec<f64> {
        let offsets = self.decision_offsets();
        self.traces
            .iter()
            .flat_map(|t| offsets.iter().map(move |&o| t[o]))
            .collect()
    }

    /// Writes `trace_id,sample_index,amplitude` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "trace_id,sample_index,amplitude")?;
        for (id, trace) in self.traces.iter().enumerate() {
            for (i, a) in trace.iter().enumerate() {
                writeln!(w, "{id},{i},{}", fmt_sig6(*a))?;
            }
        }
        Ok(())
    }
}

/// Folds a noisy NRZ waveform into overlapping two-symbol windows.
pub fn eye_traces(config: &EyeConfig) -> Result<EyeTraceSet> {
    let sps = config.samples_per_symbol;
    if sps < 2 {
        return Err(Error::Config(format!(
            "samples_per_symbol must be at least 2, got {sps}"
        )));
    }
    let sigma = match config.snr {
        None => 0.0,
        Some(s) if s > 0.0 && s.is_finite() => 1.0 / s.sqrt(),
        Some(s) => return Err(Error::domain("snr", s, "must be positive for a noisy eye")),
    };
    let n_symbols = config.n_traces + WINDOW_SYMBOLS - 1;
    let layout = FrameLayout::new(n_symbols, config.effective_params(), 1.0, Layout::Interleaved)?;
    let (symbols, _) = map_segment(&layout, 0..n_symbols, &mut bits_rng(config.seed, 0));

    let mut rng = noise_rng(config.seed, 0);
    let waveform: Vec<f64> = symbols
        .iter()
        .flat_map(|s| std::iter::repeat_n(s.amplitude, sps))
        .map(|a| {
            let n: f64 = rng.sample(StandardNormal);
            a + sigma * n
        })
        .collect();

    let width = WINDOW_SYMBOLS * sps;
    let traces = (0..config.n_traces)
        .map(|t| waveform[t * sps..t * sps + width].to_vec())
        .collect();
    Ok(EyeTraceSet {
        format: config.format,
        samples_per_symbol: sps,
        window_symbols: WINDOW_SYMBOLS,
        traces,
    })
}
