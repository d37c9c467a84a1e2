//! Closed-form BER of PAM2, PAM4 and time-domain hybrid PAM frames, the
//! FEC-limit SNR search and the power-split optimization.
//!
//! SNRs are linear unless a name says `_db`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{non_negative, unit_interval, Error, Result};
use crate::special::erfc;
use crate::units::db_linear;

/// Hard-decision FEC threshold used throughout.
pub const DEFAULT_FEC_THRESHOLD: f64 = 3.4e-3;
/// Default bisection tolerance of the FEC search, dB.
pub const DEFAULT_TOL_DB: f64 = 0.01;

const SEARCH_LO_DB: f64 = -10.0;
const SEARCH_HI_DB: f64 = 60.0;
const MAX_BRACKET_GROWTH: usize = 64;

/// PAM4 ratio `p` and power-split `q` of a hybrid frame.
///
/// At the pure formats (`p` of 0 or 1) the split has nothing to act on and
/// `q` is stored as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TdhpParams {
    p: f64,
    q: f64,
}

impl TdhpParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        let p = unit_interval("p", p)?;
        let q = unit_interval("q", q)?;
        let q = if p == 0.0 || p == 1.0 { 0.0 } else { q };
        Ok(TdhpParams { p, q })
    }

    pub fn pure_pam2() -> Self {
        TdhpParams { p: 0.0, q: 0.0 }
    }

    pub fn pure_pam4() -> Self {
        TdhpParams { p: 1.0, q: 0.0 }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// True when the frame carries only one format.
    pub fn is_pure(&self) -> bool {
        self.p == 0.0 || self.p == 1.0
    }

    /// Limit of the hybrid BER as SNR grows without bound.
    pub fn ber_floor(&self) -> f64 {
        if self.q >= 1.0 {
            (1.0 - self.p) * 0.5
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FecSearchResult {
    pub snr_linear: f64,
    pub snr_db: f64,
    pub threshold: f64,
    /// Width of the final bracket, dB.
    pub bracket_db: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QOptimum {
    pub q_star: f64,
    /// FEC-limit SNR at `q_star`, dB.
    pub snr_at_fec_limit: f64,
    /// Every grid point with its FEC-limit SNR in dB (`None` when unreachable).
    pub grid: Vec<(f64, Option<f64>)>,
}

fn check_snr_q(snr: f64, q: f64) -> Result<()> {
    non_negative("snr", snr)?;
    unit_interval("q", q)?;
    Ok(())
}

/// `½·erfc(√(snr·(1−q)/2))`.
pub fn ber_pam2(snr: f64, q: f64) -> Result<f64> {
    check_snr_q(snr, q)?;
    Ok(0.5 * erfc((0.5 * snr * (1.0 - q)).sqrt()))
}

/// `⅜·erfc(√(snr·(1+q)/14))`.
pub fn ber_pam4(snr: f64, q: f64) -> Result<f64> {
    check_snr_q(snr, q)?;
    Ok(0.375 * erfc((snr * (1.0 + q) / 14.0).sqrt()))
}

/// Bit error rate of a hybrid frame: `p·BER₄ + (1−p)·BER₂`.
pub fn ber_tdhp(snr: f64, params: TdhpParams) -> Result<f64> {
    let p = params.p;
    Ok(p * ber_pam4(snr, params.q)? + (1.0 - p) * ber_pam2(snr, params.q)?)
}

/// Bits carried per symbol on average.
pub fn bits_per_symbol(p: f64) -> Result<f64> {
    Ok(1.0 + unit_interval("p", p)?)
}

/// SNR at which `ber_tdhp` crosses `threshold`, by bisection in dB.
///
/// The initial bracket is [−10, 60] dB; it is widened by its own width on the
/// side that fails to bracket.
pub fn fec_limit_snr(params: TdhpParams, threshold: f64, tol_db: f64) -> Result<FecSearchResult> {
    if tol_db.is_nan() || tol_db <= 0.0 {
        return Err(Error::domain("tol_db", tol_db, "must be positive"));
    }
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(Error::domain("threshold", threshold, "must be positive"));
    }
    let ceiling = ber_tdhp(0.0, params)?;
    if threshold >= ceiling {
        return Err(Error::domain("threshold", threshold, "must be below the zero-SNR BER"));
    }
    let floor = params.ber_floor();
    if floor >= threshold {
        return Err(Error::NoSolution { floor, threshold });
    }

    // f(dB) = BER − threshold, strictly decreasing.
    let f = |db: f64| ber_tdhp(db_linear(db), params).map(|b| b - threshold);

    let (mut lo, mut hi) = (SEARCH_LO_DB, SEARCH_HI_DB);
    let mut grown = 0;
    loop {
        let f_lo = f(lo)?;
        let f_hi = f(hi)?;
        if f_lo > 0.0 && f_hi <= 0.0 {
            break;
        }
        grown += 1;
        if grown > MAX_BRACKET_GROWTH {
            return Err(Error::NoSolution { floor, threshold });
        }
        let width = hi - lo;
        if f_lo <= 0.0 {
            lo -= width;
        }
        if f_hi > 0.0 {
            hi += width;
        }
    }

    while hi - lo > tol_db {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let snr_db = 0.5 * (lo + hi);
    Ok(FecSearchResult {
        snr_linear: db_linear(snr_db),
        snr_db,
        threshold,
        bracket_db: hi - lo,
        converged: hi - lo <= tol_db,
    })
}

/// `{0.0, 0.1, …, 0.9}`.
pub fn default_q_grid() -> Vec<f64> {
    (0..10).map(|i| i as f64 / 10.0).collect()
}

/// Picks the grid `q` with the lowest FEC-limit SNR for a fixed `p`.
///
/// Unreachable points are skipped; ties go to the smaller `q`. Grid points are
/// evaluated in parallel and reduced in grid order.
pub fn optimize_q(p: f64, threshold: f64, q_grid: &[f64]) -> Result<QOptimum> {
    optimize_q_with_tol(p, threshold, q_grid, DEFAULT_TOL_DB)
}

pub fn optimize_q_with_tol(p: f64, threshold: f64, q_grid: &[f64], tol_db: f64) -> Result<QOptimum> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain("p", p, "q optimization needs 0 < p < 1"));
    }
    for &q in q_grid {
        if !(0.0..1.0).contains(&q) {
            return Err(Error::domain("q", q, "grid values must lie in [0, 1)"));
        }
    }

    let evaluated = q_grid
        .par_iter()
        .map(|&q| {
            let params = TdhpParams::new(p, q)?;
            match fec_limit_snr(params, threshold, tol_db) {
                Ok(r) => Ok((q, Some(r.snr_db))),
                Err(Error::NoSolution { .. }) => Ok((q, None)),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut best: Option<(f64, f64)> = None;
    for &(q, snr) in &evaluated {
        let Some(snr) = snr else { continue };
        best = match best {
            Some((bq, bs)) if bs < snr || (bs == snr && bq <= q) => Some((bq, bs)),
            _ => Some((q, snr)),
        };
    }
    let (q_star, snr_at_fec_limit) = best.ok_or(Error::NoFeasibleQ { p, threshold })?;
    Ok(QOptimum {
        q_star,
        snr_at_fec_limit,
        grid: evaluated,
    })
}

/// Golden-section refinement of `q` inside `[q0 − half_width, q0 + half_width]`.
///
/// Not used by default; sweeps report the grid optimum.
pub fn refine_q(p: f64, threshold: f64, q0: f64, half_width: f64) -> Result<(f64, f64)> {
    const TOL_Q: f64 = 1e-6;
    const INNER_TOL_DB: f64 = 1e-9;
    let cost = |q: f64| -> Result<f64> {
        match fec_limit_snr(TdhpParams::new(p, q)?, threshold, INNER_TOL_DB) {
            Ok(r) => Ok(r.snr_db),
            Err(Error::NoSolution { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = (q0 - half_width).max(0.0);
    let mut b = (q0 + half_width).min(1.0 - 1e-12);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (cost(c)?, cost(d)?);
    while b - a > TOL_Q {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = cost(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = cost(d)?;
        }
    }
    let q = 0.5 * (a + b);
    Ok((q, cost(q)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn params_force_q_at_endpoints() {
        assert_eq!(TdhpParams::new(0.0, 0.7).unwrap().q(), 0.0);
        assert_eq!(TdhpParams::new(1.0, 0.7).unwrap().q(), 0.0);
        assert_eq!(TdhpParams::new(0.5, 0.7).unwrap().q(), 0.7);
        assert!(TdhpParams::new(1.1, 0.0).is_err());
        assert!(TdhpParams::new(0.5, -0.1).is_err());
        assert!(TdhpParams::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn pam2_examples() {
        assert_eq!(ber_pam2(0.0, 0.0).unwrap(), 0.5);
        assert!(close(ber_pam2(2.0, 0.0).unwrap(), 0.078650, 5e-7));
        assert_eq!(ber_pam2(123.0, 1.0).unwrap(), 0.5);
        assert!(ber_pam2(-1.0, 0.0).is_err());
        assert!(ber_pam2(1.0, 1.5).is_err());
    }

    #[test]
    fn pam4_examples() {
        assert_eq!(ber_pam4(0.0, 0.0).unwrap(), 0.375);
        assert!(close(ber_pam4(14.0, 0.0).unwrap(), 0.0589872, 1e-7));
        assert!(close(ber_pam4(7.0, 1.0).unwrap(), ber_pam4(14.0, 0.0).unwrap(), 1e-15));
    }

    #[test]
    fn tdhp_examples() {
        for s in [0.0, 1.0, 7.3, 40.0] {
            assert_eq!(
                ber_tdhp(s, TdhpParams::new(0.0, 0.0).unwrap()).unwrap(),
                ber_pam2(s, 0.0).unwrap()
            );
            assert_eq!(
                ber_tdhp(s, TdhpParams::new(1.0, 0.0).unwrap()).unwrap(),
                ber_pam4(s, 0.0).unwrap()
            );
        }
        let half = TdhpParams::new(0.5, 0.0).unwrap();
        assert!(close(ber_tdhp(0.0, half).unwrap(), 0.4375, 1e-15));
    }

    #[test]
    fn bits_per_symbol_rule() {
        assert_eq!(bits_per_symbol(0.0).unwrap(), 1.0);
        assert_eq!(bits_per_symbol(1.0).unwrap(), 2.0);
        assert_eq!(bits_per_symbol(0.5).unwrap(), 1.5);
        assert!(bits_per_symbol(1.5).is_err());
    }

    // Expected values computed independently with scipy's erfc and Brent's method.
    #[test]
    fn fec_limits_of_pure_formats() {
        let r = fec_limit_snr(TdhpParams::pure_pam2(), 3.4e-3, 1e-4).unwrap();
        assert!(close(r.snr_db, 8.6476, 1e-3), "{}", r.snr_db);
        assert!(r.converged);
        let r = fec_limit_snr(TdhpParams::pure_pam4(), 3.4e-3, 1e-4).unwrap();
        assert!(close(r.snr_db, 16.7816, 1e-3), "{}", r.snr_db);
    }

    #[test]
    fn fec_limit_default_tolerance_brackets() {
        let r = fec_limit_snr(TdhpParams::pure_pam2(), 3.4e-3, DEFAULT_TOL_DB).unwrap();
        assert!(r.bracket_db <= DEFAULT_TOL_DB);
        assert!(close(r.snr_db, 8.64, 0.01));
    }

    #[test]
    fn fec_limit_floor() {
        let err = fec_limit_snr(TdhpParams::new(0.5, 1.0).unwrap(), 3.4e-3, 0.01).unwrap_err();
        assert_eq!(
            err,
            Error::NoSolution {
                floor: 0.25,
                threshold: 3.4e-3
            }
        );
        assert!(err.to_string().contains("2.5"));
    }

    #[test]
    fn fec_limit_bad_inputs() {
        let p = TdhpParams::pure_pam2();
        assert!(fec_limit_snr(p, 0.6, 0.01).is_err());
        assert!(fec_limit_snr(p, 0.0, 0.01).is_err());
        assert!(fec_limit_snr(p, 1e-3, 0.0).is_err());
    }

    #[test]
    fn fec_limit_tiny_threshold_grows_bracket() {
        let r = fec_limit_snr(TdhpParams::pure_pam2(), 1e-300, 0.01).unwrap();
        assert!(r.converged);
        assert!(r.snr_db > 30.0);
    }

    #[test]
    fn optimum_at_half_ratio() {
        let opt = optimize_q(0.5, 3.4e-3, &default_q_grid()).unwrap();
        assert_eq!(opt.q_star, 0.6);
        assert_eq!(opt.grid.len(), 10);
        let base = fec_limit_snr(TdhpParams::new(0.5, 0.0).unwrap(), 3.4e-3, DEFAULT_TOL_DB).unwrap();
        let gap = base.snr_db - opt.snr_at_fec_limit;
        assert!((1.5..=2.5).contains(&gap), "gap {gap}");
    }

    #[test]
    fn singleton_grid() {
        let opt = optimize_q(0.5, 3.4e-3, &[0.0]).unwrap();
        let direct = fec_limit_snr(TdhpParams::new(0.5, 0.0).unwrap(), 3.4e-3, DEFAULT_TOL_DB).unwrap();
        assert_eq!(opt.q_star, 0.0);
        assert_eq!(opt.snr_at_fec_limit, direct.snr_db);
    }

    #[test]
    fn optimize_q_rejects_bad_domain() {
        assert!(optimize_q(0.0, 3.4e-3, &[0.0]).is_err());
        assert!(optimize_q(1.0, 3.4e-3, &[0.0]).is_err());
        assert!(optimize_q(0.5, 3.4e-3, &[1.0]).is_err());
    }

    #[test]
    fn optimize_q_ties_take_smallest() {
        let opt = optimize_q(0.5, 3.4e-3, &[0.6, 0.6, 0.0]).unwrap();
        assert_eq!(opt.q_star, 0.6);
        let opt = optimize_q(0.5, 3.4e-3, &[0.0, 0.0]).unwrap();
        assert_eq!(opt.q_star, 0.0);
    }

    #[test]
    fn refinement_stays_near_grid_optimum() {
        let opt = optimize_q(0.5, 3.4e-3, &default_q_grid()).unwrap();
        let (q, snr) = refine_q(0.5, 3.4e-3, opt.q_star, 0.1).unwrap();
        assert!((q - 0.6).abs() <= 0.1);
        assert!(snr <= opt.snr_at_fec_limit + DEFAULT_TOL_DB);
    }

    #[test]
    fn fec_limit_nondecreasing_in_p() {
        let mut last = f64::NEG_INFINITY;
        for i in 0..=10 {
            let p = i as f64 / 10.0;
            let r = fec_limit_snr(TdhpParams::new(p, 0.0).unwrap(), 3.4e-3, 1e-4).unwrap();
            assert!(r.snr_db >= last);
            last = r.snr_db;
        }
    }

    proptest! {
        #[test]
        fn bers_decrease_in_snr(a in 0.0f64..200.0, b in 0.0f64..200.0, p in 0.0f64..1.0, q in 0.0f64..0.99) {
            prop_assume!((a - b).abs() > 1e-6);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            // Past ~1e-300 the tails underflow; compare only where both are resolvable.
            let params = TdhpParams::new(p, q).unwrap();
            for f in [
                |s: f64, _p: TdhpParams, q: f64| ber_pam2(s, q).unwrap(),
                |s: f64, _p: TdhpParams, q: f64| ber_pam4(s, q).unwrap(),
                |s: f64, p: TdhpParams, _q: f64| ber_tdhp(s, p).unwrap(),
            ] {
                let (x, y) = (f(lo, params, q), f(hi, params, q));
                if y > 1e-280 {
                    prop_assert!(y < x, "{lo} {hi} {x} {y}");
                }
            }
        }

        #[test]
        fn tdhp_is_bounded(s in 0.0f64..1e4, p in 0.0f64..=1.0, q in 0.0f64..=1.0) {
            let params = TdhpParams::new(p, q).unwrap();
            let b = ber_tdhp(s, params).unwrap();
            prop_assert!(b >= 0.0);
            prop_assert!(b <= (1.0 - p) * 0.5 + p * 0.375 + 1e-15);
        }

        #[test]
        fn fec_residual_is_small(p in 0.0f64..=1.0, q in 0.0f64..0.95) {
            let params = TdhpParams::new(p, q).unwrap();
            let r = fec_limit_snr(params, 3.4e-3, 1e-3).unwrap();
            let ber = ber_tdhp(r.snr_linear, params).unwrap();
            prop_assert!(((ber - 3.4e-3) / 3.4e-3).abs() < 1e-3);
        }

        #[test]
        fn optimization_never_hurts(p in 0.01f64..0.99) {
            let opt = optimize_q(p, 3.4e-3, &default_q_grid()).unwrap();
            let base = fec_limit_snr(TdhpParams::new(p, 0.0).unwrap(), 3.4e-3, DEFAULT_TOL_DB).unwrap();
            prop_assert!(opt.snr_at_fec_limit <= base.snr_db);
        }
    }
}
