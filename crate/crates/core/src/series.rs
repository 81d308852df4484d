//! Closed-form corrections F⁽²⁾, F⁽³⁾, F⁽⁴⁾ around the variational optimum
//! and their partial sums.
//!
//! Each correction factorizes as `F⁽ⁿ⁾ = λⁿ / (m²ⁿ Ω³ⁿ⁻¹) · kₙ(x)` with
//! `x = βΩ`. The reduced functions `kₙ` are stored over the common
//! denominator `(1 − q)^(2n)`, `q = e^(−x)`, with numerators that are
//! polynomials in `q` and `x`, so they stay finite for any `x > 0`.
//! Below [`SMALL_X`] the brackets cancel heavily and the even Taylor series
//! of `x^(n+1) kₙ(x)` is used instead.

use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::hyperbolic::{horner, one_minus_exp_neg};
use crate::model::ModelParams;
use crate::variational::{solve_gap, DEFAULT_GAP_TOL};

/// Crossover from the exponential-factored forms to the Taylor series.
pub const SMALL_X: f64 = 0.1;

/// `x³ k₂(x)` as a series in `x²`.
const K2_SERIES: [f64; 12] = [
    -12.0,
    0.0,
    -1.0 / 10.0,
    1.0 / 315.0,
    -1.0 / 6720.0,
    1.0 / 138600.0,
    -7213.0 / 21794572800.0,
    257.0 / 18162144000.0,
    -437.0 / 769886208000.0,
    717907.0 / 33262332143040000.0,
    -40866607.0 / 52037070730444800000.0,
    4240501.0 / 153881052017172480000.0,
];

/// `x⁴ k₃(x)` as a series in `x²`.
const K3_SERIES: [f64; 12] = [
    288.0,
    0.0,
    6.0 / 5.0,
    2.0 / 105.0,
    0.0,
    -1.0 / 17325.0,
    701.0 / 121080960.0,
    -251.0 / 605404800.0,
    185389.0 / 7410154752000.0,
    -2977627.0 / 2217488809536000.0,
    285869939.0 / 4336422560870400000.0,
    -1623583303.0 / 538583682060103680000.0,
];

/// `x⁵ k₄(x)` as a series in `x²`.
const K4_SERIES: [f64; 12] = [
    -15264.0,
    0.0,
    -312.0 / 5.0,
    8.0 / 105.0,
    -293.0 / 2100.0,
    263.0 / 34650.0,
    -2347.0 / 6756750.0,
    2383.0 / 141891750.0,
    -7005091.0 / 7410154752000.0,
    93507823.0 / 1583920578240000.0,
    -929221339.0 / 250178224665600000.0,
    149825094119.0 / 673229602575129600000.0,
];

/// Numerator of `k₄`: coefficient of `q^j` as a polynomial in `x`
/// (index = power of `x`), obtained by integrating the three fourth-order
/// diagrams over ordered imaginary-time sub-domains.
const K4_NUMERATOR: [&[f64]; 9] = [
    &[791.0],
    &[18200.0, 432.0],
    &[20258.0, 51516.0, 5616.0, 144.0],
    &[-98280.0, 43248.0, 65664.0, 8064.0],
    &[0.0, -190392.0, 0.0, 25920.0],
    &[98280.0, 43248.0, -65664.0, 8064.0],
    &[-20258.0, 51516.0, -5616.0, 144.0],
    &[-18200.0, 432.0],
    &[-791.0],
];

/// The fourth-order bracket as it is usually quoted, multiplied by `q⁴`:
/// coefficient of `q^(j-1)` as a polynomial in `x`. The leading `3/q` term
/// comes from a `6 cosh(5x)` contribution and grows like `e^x`.
const K4_LITERATURE_NUMERATOR: [&[f64]; 11] = [
    &[3.0],
    &[70.5, 800.0],
    &[-216.0, 18875.0, 432.0],
    &[-3216.0, 21284.0, 50760.0, 6336.0, 144.0],
    &[213.0, -95697.0, 39468.0, 64728.0, 8064.0],
    &[6291.0, 0.0, -181320.0, 0.0, 25920.0],
    &[213.0, 95697.0, 39468.0, -64728.0, 8064.0],
    &[-3216.0, -21284.0, 50760.0, -6336.0, 144.0],
    &[-216.0, -18875.0, 432.0],
    &[70.5, -800.0],
    &[3.0],
];

fn even_series(coeffs: &[f64], x: f64) -> f64 {
    horner(coeffs, x * x)
}

fn q_polynomial(rows: &[&[f64]], q: f64, x: f64) -> f64 {
    rows.iter().rev().fold(0.0, |acc, row| acc * q + horner(row, x))
}

/// Reduced second-order correction `k₂(x) = F⁽²⁾ m⁴Ω⁵/λ²`.
pub fn k2(x: f64) -> f64 {
    if x < SMALL_X {
        return even_series(&K2_SERIES, x) / (x * x * x);
    }
    let q = (-x).exp();
    let d = one_minus_exp_neg(x);
    let num = 0.5 + q * (4.0 + q * (6.0 * x + q * (-4.0 - 0.5 * q)));
    -0.75 * num / (d * d * d * d)
}

/// Reduced third-order correction `k₃(x) = F⁽³⁾ m⁶Ω⁸/λ³`.
pub fn k3(x: f64) -> f64 {
    if x < SMALL_X {
        return even_series(&K3_SERIES, x) / (x * x * x * x);
    }
    let q = (-x).exp();
    let d = one_minus_exp_neg(x);
    let x2 = x * x;
    let c2 = 0.5 * (-3.0 + 8.0 * x2) + 54.0 * x;
    let c4 = 0.5 * (-3.0 + 8.0 * x2) - 54.0 * x;
    let coeffs = [1.5, 24.0, c2, -48.0 + 32.0 * x2, c4, 24.0, 1.5];
    let d3 = d * d * d;
    1.125 * horner(&coeffs, q) / (d3 * d3)
}

/// Reduced fourth-order correction `k₄(x) = F⁽⁴⁾ m⁸Ω¹¹/λ⁴` (sum of the three
/// connected fourth-order diagrams).
pub fn k4(x: f64) -> f64 {
    if x < SMALL_X {
        return even_series(&K4_SERIES, x) / (x * x * x * x * x);
    }
    let q = (-x).exp();
    let d = one_minus_exp_neg(x);
    let d2 = d * d;
    let d4 = d2 * d2;
    -(3.0 / 128.0) * q_polynomial(&K4_NUMERATOR, q, x) / (d4 * d4)
}

/// `k₄` from the commonly quoted fourth-order bracket. It disagrees with
/// direct diagram quadrature and grows like `e^(βΩ)` at low temperature;
/// kept only so that its consequences can be compared.
pub fn k4_literature(x: f64) -> f64 {
    let q = (-x).exp();
    let d = one_minus_exp_neg(x);
    let d2 = d * d;
    let d4 = d2 * d2;
    let poly = q_polynomial(&K4_LITERATURE_NUMERATOR, q, x) / q;
    -(3.0 / 128.0) * poly / (x * d4 * d4)
}

fn check(params: &ModelParams, omega_big: f64) -> Result<f64> {
    params.validate()?;
    positive("omega_big", omega_big)?;
    Ok(params.beta * omega_big)
}

/// `λⁿ / (m²ⁿ Ω³ⁿ⁻¹)`
fn prefactor(p: &ModelParams, omega_big: f64, n: i32) -> f64 {
    p.lambda.powi(n) / (p.m.powi(2 * n) * omega_big.powi(3 * n - 1))
}

/// `F⁽²⁾ = −(3λ²/(64m⁴Ω⁵)) sinh⁻⁴(βΩ/2) [6βΩ + 8 sinh βΩ + sinh 2βΩ]`.
pub fn c2_closed(params: &ModelParams, omega_big: f64) -> Result<f64> {
    let x = check(params, omega_big)?;
    Ok(prefactor(params, omega_big, 2) * k2(x))
}

/// `F⁽³⁾ = (9λ³/(512m⁶Ω⁸)) sinh⁻⁶(βΩ/2) {−48 + 32x² + (−3 + 8x²) cosh x
/// + 48 cosh 2x + 3 cosh 3x + 108 x sinh x}`, `x = βΩ`.
pub fn c3_closed(params: &ModelParams, omega_big: f64) -> Result<f64> {
    let x = check(params, omega_big)?;
    Ok(prefactor(params, omega_big, 3) * k3(x))
}

/// Fourth-order correction, consistent with direct quadrature of the square,
/// double-bridge and triple-bond diagrams.
pub fn c4_closed(params: &ModelParams, omega_big: f64) -> Result<f64> {
    let x = check(params, omega_big)?;
    Ok(prefactor(params, omega_big, 4) * k4(x))
}

/// Fourth-order correction from the commonly quoted bracket; see
/// [`k4_literature`]. Not overflow-safe: returns `-inf` once `e^(βΩ)`
/// overflows.
pub fn c4_literature(params: &ModelParams, omega_big: f64) -> Result<f64> {
    let x = check(params, omega_big)?;
    Ok(prefactor(params, omega_big, 4) * k4_literature(x))
}

/// Truncation order of the expansion. There is no first-order term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Order {
    Zero,
    Two,
    Three,
    Four,
}

impl Order {
    pub fn as_u8(self) -> u8 {
        match self {
            Order::Zero => 0,
            Order::Two => 2,
            Order::Three => 3,
            Order::Four => 4,
        }
    }
}

impl TryFrom<u8> for Order {
    type Error = Error;

    fn try_from(n: u8) -> Result<Self> {
        match n {
            0 => Ok(Order::Zero),
            2 => Ok(Order::Two),
            3 => Ok(Order::Three),
            4 => Ok(Order::Four),
            _ => Err(Error::InvalidRequest(format!(
                "order must be one of 0, 2, 3, 4 (got {n})"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergySeries {
    pub omega_big: f64,
    pub order: Order,
    pub f0: f64,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
    pub c4: Option<f64>,
    pub f2: Option<f64>,
    pub f3: Option<f64>,
    pub f4: Option<f64>,
}

impl FreeEnergySeries {
    /// Highest partial sum available.
    pub fn best(&self) -> f64 {
        self.f4.or(self.f3).or(self.f2).unwrap_or(self.f0)
    }
}

/// Solves the gap equation once and sums the corrections up to `max_order`
/// with that shared Ω.
pub fn series_eval(params: &ModelParams, max_order: Order) -> Result<FreeEnergySeries> {
    let sol = solve_gap(params, DEFAULT_GAP_TOL)?;
    series_at(params, sol.omega_big, sol.f0, max_order)
}

/// Partial sums for an already solved Ω.
pub fn series_at(
    params: &ModelParams,
    omega_big: f64,
    f0: f64,
    max_order: Order,
) -> Result<FreeEnergySeries> {
    let c2 = (max_order >= Order::Two)
        .then(|| c2_closed(params, omega_big))
        .transpose()?;
    let c3 = (max_order >= Order::Three)
        .then(|| c3_closed(params, omega_big))
        .transpose()?;
    let c4 = (max_order >= Order::Four)
        .then(|| c4_closed(params, omega_big))
        .transpose()?;
    let f2 = c2.map(|c| f0 + c);
    let f3 = f2.zip(c3).map(|(f, c)| f + c);
    let f4 = f3.zip(c4).map(|(f, c)| f + c);
    Ok(FreeEnergySeries {
        omega_big,
        order: max_order,
        f0,
        c2,
        c3,
        c4,
        f2,
        f3,
        f4,
    })
}
