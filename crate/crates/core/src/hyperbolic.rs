//! Overflow-safe hyperbolic ratios.
//!
//! Everything is written in terms of `q = e^(-x)` with `x > 0`, so no
//! intermediate grows like `e^x`. For example
//! `cosh(x/2 - a)/sinh(x/2) = (e^(-a) + e^(-(x-a))) / (1 - e^(-x))`.

/// `1 - e^(-x)` without cancellation for small `x`.
#[inline]
pub fn one_minus_exp_neg(x: f64) -> f64 {
    -(-x).exp_m1()
}

/// `coth(x/2)`.
#[inline]
pub fn coth_half(x: f64) -> f64 {
    let q = (-x).exp();
    (1.0 + q) / one_minus_exp_neg(x)
}

/// `1 / sinh²(x/2)`.
#[inline]
pub fn csch2_half(x: f64) -> f64 {
    let q = (-x).exp();
    let d = one_minus_exp_neg(x);
    4.0 * q / (d * d)
}

/// `ln(2 sinh(x/2)) = x/2 + ln(1 - e^(-x))`.
#[inline]
pub fn ln_2sinh_half(x: f64) -> f64 {
    0.5 * x + one_minus_exp_neg(x).ln()
}

/// `cosh(x/2 - a) / sinh(x/2)` for `0 <= a <= x`.
#[inline]
pub fn cosh_over_sinh(a: f64, x: f64) -> f64 {
    ((-a).exp() + (-(x - a)).exp()) / one_minus_exp_neg(x)
}

/// Evaluates `Σ_j c_j t^j` by Horner's rule.
#[inline]
pub fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}
