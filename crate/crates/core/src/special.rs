//! Complementary error function.
//!
//! Backed by the `libm` port of the FreeBSD/musl `erfc`, which is accurate to
//! about one ulp over the whole real line. The analytic BER model only ever
//! evaluates it at non-negative arguments.

/// `erfc(x) = 1 - erf(x)`.
#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Gaussian tail probability `Q(x) = P[N(0,1) > x]`.
#[inline]
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}
