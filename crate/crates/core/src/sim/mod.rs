//! Symbol-level Monte-Carlo simulation of hybrid PAM2/PAM4 frames.
//!
//! The pipeline is mapper → AWGN → threshold demapper → error count. Noise has
//! unit variance and the transmitted amplitudes carry the SNR:
//! PAM2 sends `±a₂` with `a₂ = √(snr·(1−q))`, PAM4 sends `{±d, ±3d}` with
//! `d = √(snr·(1+q)/7)`, which makes the measured error rates converge to the
//! closed forms in [`crate::analytic`].
//!
//! Randomness comes from ChaCha8 streams keyed by the master seed. Chunk `c`
//! draws its source bits from stream `2c` and its noise from stream `2c + 1`,
//! so any chunk can be replayed on its own and a run does not depend on how
//! many worker threads share the chunks.

mod eye;

pub use eye::{eye_traces, EyeConfig, EyeFormat, EyeTraceSet};

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{ber_tdhp, TdhpParams};
use crate::error::{non_negative, Error, Result};

/// Symbols per Monte-Carlo chunk.
pub const CHUNK_SYMBOLS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Format {
    Pam2,
    Pam4,
}

/// Where the PAM4 symbols sit inside a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    /// All PAM4 symbols first, then all PAM2 symbols.
    #[default]
    Contiguous,
    /// PAM4 symbols spread evenly through the frame.
    Interleaved,
}

/// Transmit amplitudes for unit-variance noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Amplitudes {
    /// PAM2 level magnitude.
    pub a2: f64,
    /// PAM4 half-spacing; the levels are `±d` and `±3d`.
    pub d: f64,
}

impl Amplitudes {
    pub fn calibrated(snr: f64, q: f64) -> Self {
        Amplitudes {
            a2: (snr * (1.0 - q)).sqrt(),
            d: (snr * (1.0 + q) / 7.0).sqrt(),
        }
    }

    pub fn pam2_levels(&self) -> [f64; 2] {
        [-self.a2, self.a2]
    }

    pub fn pam4_levels(&self) -> [f64; 4] {
        [-3.0 * self.d, -self.d, self.d, 3.0 * self.d]
    }
}

/// Gray labels of the four PAM4 levels, lowest level first.
pub const PAM4_GRAY: [[u8; 2]; 4] = [[0, 0], [0, 1], [1, 1], [1, 0]];

fn gray_index(b0: u8, b1: u8) -> usize {
    match (b0, b1) {
        (0, 0) => 0,
        (0, 1) => 1,
        (1, 1) => 2,
        _ => 3,
    }
}

/// Everything the receiver needs to know about a frame besides the samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameLayout {
    pub n_symbols: usize,
    pub n_pam4: usize,
    pub layout: Layout,
    pub amplitudes: Amplitudes,
}

impl FrameLayout {
    pub fn new(n_symbols: usize, params: TdhpParams, snr: f64, layout: Layout) -> Result<Self> {
        if n_symbols == 0 {
            return Err(Error::Config("frame needs at least one symbol".into()));
        }
        non_negative("snr", snr)?;
        Ok(FrameLayout {
            n_symbols,
            n_pam4: pam4_count(n_symbols, params.p()),
            layout,
            amplitudes: Amplitudes::calibrated(snr, params.q()),
        })
    }

    pub fn format(&self, index: usize) -> Format {
        let is_pam4 = match self.layout {
            Layout::Contiguous => index < self.n_pam4,
            Layout::Interleaved => {
                let n = self.n_symbols as u128;
                let k = self.n_pam4 as u128;
                let i = index as u128;
                (i + 1) * k / n > i * k / n
            }
        };
        if is_pam4 {
            Format::Pam4
        } else {
            Format::Pam2
        }
    }

    pub fn bits_in(&self, range: Range<usize>) -> usize {
        range
            .map(|i| match self.format(i) {
                Format::Pam2 => 1,
                Format::Pam4 => 2,
            })
            .sum()
    }

    pub fn total_bits(&self) -> usize {
        self.n_symbols + self.n_pam4
    }
}

/// `round(p·n)` with ties to even.
pub fn pam4_count(n_symbols: usize, p: f64) -> usize {
    (p * n_symbols as f64).round_ties_even() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Symbol {
    pub format: Format,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub params: TdhpParams,
    pub snr: f64,
    pub seed: u64,
    pub layout: FrameLayout,
    pub symbols: Vec<Symbol>,
    /// Source bits in transmission order, one bit per byte.
    pub source_bits: Vec<u8>,
}

impl Frame {
    pub fn n_symbols(&self) -> usize {
        self.symbols.len()
    }

    pub fn count(&self, format: Format) -> usize {
        self.symbols.iter().filter(|s| s.format == format).count()
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn bits_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    stream_rng(seed, 2 * chunk)
}

fn noise_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    stream_rng(seed, 2 * chunk + 1)
}

fn map_segment(layout: &FrameLayout, range: Range<usize>, rng: &mut impl Rng) -> (Vec<Symbol>, Vec<u8>) {
    let amps = layout.amplitudes;
    let mut symbols = Vec::with_capacity(range.len());
    let mut bits = Vec::with_capacity(2 * range.len());
    for i in range {
        let format = layout.format(i);
        let amplitude = match format {
            Format::Pam2 => {
                let b = rng.random::<bool>() as u8;
                bits.push(b);
                if b == 1 {
                    amps.a2
                } else {
                    -amps.a2
                }
            }
            Format::Pam4 => {
                let b0 = rng.random::<bool>() as u8;
                let b1 = rng.random::<bool>() as u8;
                bits.extend_from_slice(&[b0, b1]);
                amps.pam4_levels()[gray_index(b0, b1)]
            }
        };
        symbols.push(Symbol { format, amplitude });
    }
    (symbols, bits)
}

fn noisy(symbols: &[Symbol], rng: &mut impl Rng, variance: f64) -> Vec<f64> {
    let sigma = variance.sqrt();
    symbols
        .iter()
        .map(|s| {
            let n: f64 = rng.sample(StandardNormal);
            s.amplitude + sigma * n
        })
        .collect()
}

/// Maps `n` random symbols with the contiguous layout.
pub fn build_frame(n: usize, params: TdhpParams, snr: f64, seed: u64) -> Result<Frame> {
    build_frame_with_layout(n, params, snr, seed, Layout::Contiguous)
}

pub fn build_frame_with_layout(n: usize, params: TdhpParams, snr: f64, seed: u64, layout: Layout) -> Result<Frame> {
    let layout = FrameLayout::new(n, params, snr, layout)?;
    let (symbols, source_bits) = map_segment(&layout, 0..n, &mut bits_rng(seed, 0));
    Ok(Frame {
        params,
        snr,
        seed,
        layout,
        symbols,
        source_bits,
    })
}

/// Adds independent unit-variance Gaussian noise to every symbol.
pub fn add_awgn(frame: &Frame, seed: u64) -> Vec<f64> {
    add_awgn_with_variance(frame, seed, 1.0)
}

/// As [`add_awgn`] with an explicit noise variance; 0 passes the frame through.
pub fn add_awgn_with_variance(frame: &Frame, seed: u64, variance: f64) -> Vec<f64> {
    noisy(&frame.symbols, &mut noise_rng(seed, 0), variance)
}

fn detect(format: Format, amps: Amplitudes, r: f64, out: &mut Vec<u8>) {
    match format {
        // Ties go to the lower level.
        Format::Pam2 => out.push((r > 0.0) as u8),
        Format::Pam4 => {
            let t = 2.0 * amps.d;
            let idx = if r <= -t {
                0
            } else if r <= 0.0 {
                1
            } else if r <= t {
                2
            } else {
                3
            };
            out.extend_from_slice(&PAM4_GRAY[idx]);
        }
    }
}

fn demap_range(received: &[f64], layout: &FrameLayout, start: usize) -> Vec<u8> {
    let mut bits = Vec::with_capacity(2 * received.len());
    for (k, &r) in received.iter().enumerate() {
        detect(layout.format(start + k), layout.amplitudes, r, &mut bits);
    }
    bits
}

/// Hard-decision demapping: PAM2 threshold 0, PAM4 thresholds `{−2d, 0, 2d}`.
pub fn demap(received: &[f64], layout: &FrameLayout) -> Result<Vec<u8>> {
    if received.len() != layout.n_symbols {
        return Err(Error::LengthMismatch {
            expected: layout.n_symbols,
            actual: received.len(),
        });
    }
    Ok(demap_range(received, layout, 0))
}

/// Raw error and bit counts, split by format.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorCounts {
    pub bit_errors_pam2: u64,
    pub bit_errors_pam4: u64,
    pub bits_pam2: u64,
    pub bits_pam4: u64,
}

impl std::ops::Add for ErrorCounts {
    type Output = ErrorCounts;

    fn add(self, o: ErrorCounts) -> ErrorCounts {
        ErrorCounts {
            bit_errors_pam2: self.bit_errors_pam2 + o.bit_errors_pam2,
            bit_errors_pam4: self.bit_errors_pam4 + o.bit_errors_pam4,
            bits_pam2: self.bits_pam2 + o.bits_pam2,
            bits_pam4: self.bits_pam4 + o.bits_pam4,
        }
    }
}

impl std::iter::Sum for ErrorCounts {
    fn sum<I: Iterator<Item = ErrorCounts>>(iter: I) -> Self {
        iter.fold(ErrorCounts::default(), |a, b| a + b)
    }
}

/// Binomial 95 % half-width, normal approximation.
pub fn ci95_halfwidth(ber: f64, bits: u64) -> f64 {
    if bits == 0 {
        return f64::NAN;
    }
    1.96 * (ber * (1.0 - ber) / bits as f64).sqrt()
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        f64::NAN
    } else {
        num as f64 / den as f64
    }
}

/// Measured error rates of one Monte-Carlo run, with what is needed to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerEstimate {
    pub p: f64,
    pub q: f64,
    pub snr_linear: f64,
    pub n_symbols: u64,
    pub seed: u64,
    pub bit_errors_pam2: u64,
    pub bit_errors_pam4: u64,
    pub bits_pam2: u64,
    pub bits_pam4: u64,
    /// NaN when the frame has no bits of that format; written as `null`.
    #[serde(deserialize_with = "nan_from_null")]
    pub ber_pam2: f64,
    #[serde(deserialize_with = "nan_from_null")]
    pub ber_pam4: f64,
    #[serde(deserialize_with = "nan_from_null")]
    pub ber_tdhp: f64,
    #[serde(deserialize_with = "nan_from_null")]
    pub ci95_halfwidth: f64,
}

fn nan_from_null<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

impl BerEstimate {
    fn from_counts(mc: &MonteCarlo, c: ErrorCounts) -> Self {
        let total_bits = c.bits_pam2 + c.bits_pam4;
        let ber_tdhp = ratio(c.bit_errors_pam2 + c.bit_errors_pam4, total_bits);
        BerEstimate {
            p: mc.params.p(),
            q: mc.params.q(),
            snr_linear: mc.snr,
            n_symbols: mc.n_symbols as u64,
            seed: mc.seed,
            bit_errors_pam2: c.bit_errors_pam2,
            bit_errors_pam4: c.bit_errors_pam4,
            bits_pam2: c.bits_pam2,
            bits_pam4: c.bits_pam4,
            ber_pam2: ratio(c.bit_errors_pam2, c.bits_pam2),
            ber_pam4: ratio(c.bit_errors_pam4, c.bits_pam4),
            ber_tdhp,
            ci95_halfwidth: ci95_halfwidth(ber_tdhp, total_bits),
        }
    }

    pub fn counts(&self) -> ErrorCounts {
        ErrorCounts {
            bit_errors_pam2: self.bit_errors_pam2,
            bit_errors_pam4: self.bit_errors_pam4,
            bits_pam2: self.bits_pam2,
            bits_pam4: self.bits_pam4,
        }
    }

    pub fn total_bits(&self) -> u64 {
        self.bits_pam2 + self.bits_pam4
    }

    /// Per-format rates mixed by symbol share, `p·ber_pam4 + (1−p)·ber_pam2`,
    /// the quantity the closed-form `ber_tdhp` predicts, with its 95% half-width.
    ///
    /// `ber_tdhp` counts every bit once, so a PAM4 symbol weighs twice. The two
    /// agree only for pure frames.
    pub fn symbol_weighted(&self) -> (f64, f64) {
        let mut ber = 0.0;
        let mut var = 0.0;
        for (w, b, n) in [
            (1.0 - self.p, self.ber_pam2, self.bits_pam2),
            (self.p, self.ber_pam4, self.bits_pam4),
        ] {
            if w > 0.0 && n > 0 {
                ber += w * b;
                var += w * w * b * (1.0 - b) / n as f64;
            }
        }
        (ber, 1.96 * var.sqrt())
    }

    /// Parses a JSON record previously written by [`BerEstimate::to_json`].
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("BER record: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("BerEstimate serializes")
    }
}

/// A fully specified Monte-Carlo run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarlo {
    pub params: TdhpParams,
    pub snr: f64,
    pub n_symbols: usize,
    pub seed: u64,
    pub layout: Layout,
    pub noise_variance: f64,
}

impl MonteCarlo {
    pub fn new(params: TdhpParams, snr: f64, n_symbols: usize, seed: u64) -> Self {
        MonteCarlo {
            params,
            snr,
            n_symbols,
            seed,
            layout: Layout::Contiguous,
            noise_variance: 1.0,
        }
    }

    pub fn with_layout(mut self, layout: Layout) -> Self {
        self.layout = layout;
        self
    }

    pub fn with_noise_variance(mut self, variance: f64) -> Self {
        self.noise_variance = variance;
        self
    }

    pub fn frame_layout(&self) -> Result<FrameLayout> {
        FrameLayout::new(self.n_symbols, self.params, self.snr, self.layout)
    }

    pub fn n_chunks(&self) -> usize {
        self.n_symbols.div_ceil(CHUNK_SYMBOLS)
    }

    /// Simulates chunk `index` in isolation.
    pub fn run_chunk(&self, layout: &FrameLayout, index: usize) -> ErrorCounts {
        let start = index * CHUNK_SYMBOLS;
        let end = (start + CHUNK_SYMBOLS).min(self.n_symbols);
        let (symbols, sent) = map_segment(layout, start..end, &mut bits_rng(self.seed, index as u64));
        let received = noisy(&symbols, &mut noise_rng(self.seed, index as u64), self.noise_variance);
        let got = demap_range(&received, layout, start);

        let mut counts = ErrorCounts::default();
        let mut bit = 0;
        for s in &symbols {
            let width = match s.format {
                Format::Pam2 => 1,
                Format::Pam4 => 2,
            };
            let errors = (bit..bit + width).filter(|&k| sent[k] != got[k]).count() as u64;
            match s.format {
                Format::Pam2 => {
                    counts.bits_pam2 += 1;
                    counts.bit_errors_pam2 += errors;
                }
                Format::Pam4 => {
                    counts.bits_pam4 += 2;
                    counts.bit_errors_pam4 += errors;
                }
            }
            bit += width;
        }
        counts
    }

    pub fn run(&self) -> Result<BerEstimate> {
        non_negative("noise_variance", self.noise_variance)?;
        let layout = self.frame_layout()?;
        let expected_errors = ber_tdhp(self.snr, self.params)? * layout.total_bits() as f64;
        if self.noise_variance > 0.0 && expected_errors < 10.0 {
            log::warn!(
                "only {expected_errors:.1} bit errors expected from {} symbols; the estimate will be coarse",
                self.n_symbols
            );
        }
        let counts: ErrorCounts = (0..self.n_chunks())
            .into_par_iter()
            .map(|c| self.run_chunk(&layout, c))
            .sum();
        Ok(BerEstimate::from_counts(self, counts))
    }
}

/// Runs build → AWGN → demap → count over `n_symbols` with unit noise.
pub fn measure_ber(params: TdhpParams, snr: f64, n_symbols: usize, seed: u64) -> Result<BerEstimate> {
    MonteCarlo::new(params, snr, n_symbols, seed).run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{ber_pam2, ber_pam4};

    fn params(p: f64, q: f64) -> TdhpParams {
        TdhpParams::new(p, q).unwrap()
    }

    #[test]
    fn frame_counts() {
        let f = build_frame(1000, params(0.5, 0.0), 10.0, 1).unwrap();
        assert_eq!(f.count(Format::Pam4), 500);
        assert_eq!(f.count(Format::Pam2), 500);
        assert_eq!(f.source_bits.len(), 1500);
        assert!(f.symbols[..500].iter().all(|s| s.format == Format::Pam4));
    }

    #[test]
    fn pure_pam2_amplitudes() {
        let f = build_frame(10, params(0.0, 0.0), 9.0, 3).unwrap();
        assert!(f
            .symbols
            .iter()
            .all(|s| s.format == Format::Pam2 && s.amplitude.abs() == 3.0));
    }

    #[test]
    fn pure_pam4_levels() {
        let f = build_frame(200, params(1.0, 0.0), 7.0, 3).unwrap();
        for s in &f.symbols {
            assert!([-3.0, -1.0, 1.0, 3.0].contains(&s.amplitude), "{}", s.amplitude);
        }
    }

    #[test]
    fn zero_symbols_rejected() {
        assert!(build_frame(0, params(0.5, 0.0), 1.0, 0).is_err());
    }

    #[test]
    fn rounding_is_half_even() {
        assert_eq!(pam4_count(5, 0.5), 2);
        assert_eq!(pam4_count(7, 0.5), 4);
        assert_eq!(pam4_count(10, 0.25), 2);
    }

    #[test]
    fn interleaved_layout_keeps_count() {
        for (n, p) in [(10, 0.3), (1000, 0.5), (7, 0.5), (13, 1.0), (13, 0.0)] {
            let f = build_frame_with_layout(n, params(p, 0.0), 4.0, 1, Layout::Interleaved).unwrap();
            assert_eq!(f.count(Format::Pam4), pam4_count(n, p));
        }
    }

    #[test]
    fn gray_neighbours_differ_in_one_bit() {
        for w in PAM4_GRAY.windows(2) {
            let diff = (w[0][0] ^ w[1][0]) + (w[0][1] ^ w[1][1]);
            assert_eq!(diff, 1);
        }
    }

    #[test]
    fn noiseless_round_trip() {
        for seed in 0..5 {
            let f = build_frame_with_layout(777, params(0.37, 0.4), 12.0, seed, Layout::Interleaved).unwrap();
            let rx = add_awgn_with_variance(&f, seed, 0.0);
            assert_eq!(rx, f.symbols.iter().map(|s| s.amplitude).collect::<Vec<_>>());
            assert_eq!(demap(&rx, &f.layout).unwrap(), f.source_bits);
        }
    }

    #[test]
    fn awgn_is_deterministic() {
        let f = build_frame(100, params(0.5, 0.0), 5.0, 11).unwrap();
        assert_eq!(add_awgn(&f, 4), add_awgn(&f, 4));
        assert_ne!(add_awgn(&f, 4), add_awgn(&f, 5));
    }

    #[test]
    fn thresholds_tie_low() {
        let layout = FrameLayout::new(3, params(1.0, 0.0), 7.0, Layout::Contiguous).unwrap();
        // d = 1: thresholds at −2, 0, 2.
        let bits = demap(&[-2.0, 0.0, 2.0], &layout).unwrap();
        assert_eq!(bits, [PAM4_GRAY[0], PAM4_GRAY[1], PAM4_GRAY[2]].concat());
    }

    #[test]
    fn pam2_threshold_crossing() {
        let layout = FrameLayout::new(1, params(0.0, 0.0), 4.0, Layout::Contiguous).unwrap();
        // +a₂ carries bit 1; a sample of −0.1 decodes to 0.
        assert_eq!(demap(&[-0.1], &layout).unwrap(), vec![0]);
    }

    #[test]
    fn demap_length_mismatch() {
        let layout = FrameLayout::new(4, params(0.5, 0.0), 4.0, Layout::Contiguous).unwrap();
        assert_eq!(
            demap(&[0.0; 3], &layout),
            Err(Error::LengthMismatch { expected: 4, actual: 3 })
        );
    }

    #[test]
    fn noise_variance_is_unity() {
        let f = build_frame(1_000_000, params(0.5, 0.0), 3.0, 21).unwrap();
        let rx = add_awgn(&f, 21);
        let n = rx.len() as f64;
        let diffs: Vec<f64> = rx.iter().zip(&f.symbols).map(|(r, s)| r - s.amplitude).collect();
        let mean = diffs.iter().sum::<f64>() / n;
        let var = diffs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var - 1.0).abs() < 0.005, "{var}");
    }

    #[test]
    fn frame_power_accounting() {
        let snr = 20.0;
        let q = 0.3;
        let f = build_frame(1_000_000, params(0.5, q), snr, 5).unwrap();
        let mean_sq = |fmt: Format| {
            let v: Vec<f64> = f
                .symbols
                .iter()
                .filter(|s| s.format == fmt)
                .map(|s| s.amplitude * s.amplitude)
                .collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        // PAM2 power is exact; PAM4 power (d², 9d² equally likely) has std 4d²/√n.
        assert!((mean_sq(Format::Pam2) - snr * (1.0 - q)).abs() < 1e-9);
        let expected4 = 5.0 * snr * (1.0 + q) / 7.0;
        let d2 = snr * (1.0 + q) / 7.0;
        let tol = 3.0 * 4.0 * d2 / (500_000f64).sqrt();
        assert!((mean_sq(Format::Pam4) - expected4).abs() < tol);
    }

    #[test]
    fn noise_free_run_has_no_errors() {
        let est = MonteCarlo::new(params(0.5, 0.2), 2.0, 200_000, 9)
            .with_noise_variance(0.0)
            .run()
            .unwrap();
        assert_eq!(est.bit_errors_pam2 + est.bit_errors_pam4, 0);
        assert_eq!(est.total_bits(), 300_000);
    }

    #[test]
    fn single_chunk_matches_frame_pipeline() {
        let (p, snr, n, seed) = (params(0.4, 0.1), 6.0, 5000, 77);
        let f = build_frame(n, p, snr, seed).unwrap();
        let rx = add_awgn(&f, seed);
        let got = demap(&rx, &f.layout).unwrap();
        let errors = got.iter().zip(&f.source_bits).filter(|(a, b)| a != b).count() as u64;
        let est = measure_ber(p, snr, n, seed).unwrap();
        assert_eq!(est.bit_errors_pam2 + est.bit_errors_pam4, errors);
    }

    #[test]
    fn chunks_sum_to_full_run() {
        let mc = MonteCarlo::new(params(0.5, 0.0), 10.0, 3 * CHUNK_SYMBOLS + 123, 5);
        let layout = mc.frame_layout().unwrap();
        let seq: ErrorCounts = (0..mc.n_chunks()).map(|c| mc.run_chunk(&layout, c)).sum();
        assert_eq!(mc.run().unwrap().counts(), seq);
    }

    #[test]
    fn per_format_rates_match_closed_form() {
        let snr = 12.0;
        let est = measure_ber(params(0.5, 0.0), snr, 2_000_000, 13).unwrap();
        let hw2 = ci95_halfwidth(est.ber_pam2, est.bits_pam2);
        let hw4 = ci95_halfwidth(est.ber_pam4, est.bits_pam4);
        assert!((est.ber_pam2 - ber_pam2(snr, 0.0).unwrap()).abs() < 3.0 * hw2);
        assert!((est.ber_pam4 - ber_pam4(snr, 0.0).unwrap()).abs() < 3.0 * hw4);
    }

    #[test]
    fn json_record_round_trip() {
        let est = measure_ber(params(0.5, 0.0), 10.0, 1000, 3).unwrap();
        assert_eq!(BerEstimate::from_json(&est.to_json()).unwrap(), est);
        assert!(BerEstimate::from_json("{").is_err());
    }

    #[test]
    fn json_round_trip_of_a_pure_frame() {
        let est = measure_ber(params(0.0, 0.0), 4.0, 1000, 3).unwrap();
        assert!(est.ber_pam4.is_nan());
        let text = est.to_json();
        assert!(text.contains("\"ber_pam4\":null"), "{text}");
        let back = BerEstimate::from_json(&text).unwrap();
        assert!(back.ber_pam4.is_nan());
        assert_eq!(back.to_json(), text);
    }
}
