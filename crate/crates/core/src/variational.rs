//! Gaussian variational approximation: the trial functional F̄(Ω), its
//! stationarity (gap) condition and the optimized free energy F0.
//!
//! With `G = coth(βΩ/2) / (2mΩ)` the equal-time propagator,
//!
//! ```text
//! F̄(Ω) = (1/β) ln(2 sinh(βΩ/2)) + ½m(ω² − Ω²) G + 3λ G²
//! ```
//!
//! and `dF̄/dΩ² = 0` is the gap equation `Ω² = ω² + 6λ coth(βΩ/2) / (m²Ω)`.
//! At its root `F̄` collapses to `(1/β) ln(2 sinh(βΩ/2)) − 3λG²`.

use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::hyperbolic::{coth_half, csch2_half, ln_2sinh_half};
use crate::model::ModelParams;

pub const DEFAULT_GAP_TOL: f64 = 1e-12;
const MAX_FIXED_POINT_ITERATIONS: usize = 500;
const MAX_BISECTION_ITERATIONS: usize = 400;
const FIXED_POINT_DAMPING: f64 = 0.5;
/// Relative step in Ω² for the second-difference stability check.
const STABILITY_STEP: f64 = 1e-5;

/// Which candidate of `{non-zero root, Ω → 0, Ω → ∞}` minimizes F̄.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    NonzeroRoot,
    Zero,
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationalSolution {
    pub omega_big: f64,
    pub f0: f64,
    pub branch: Branch,
    /// `|Ω² − ω² − 6λ coth(βΩ/2)/(m²Ω)| / Ω²` at the returned Ω.
    pub residual: f64,
    /// Second difference of F̄ in Ω² at the solution.
    pub second_variation: f64,
    /// Sign of `second_variation` (−1, 0 or +1).
    pub second_variation_sign: i8,
    pub iterations: usize,
}

/// Equal-time propagator `coth(βΩ/2)/(2mΩ)`.
fn equal_time(m: f64, beta: f64, omega_big: f64) -> f64 {
    coth_half(beta * omega_big) / (2.0 * m * omega_big)
}

fn check_trial(params: &ModelParams, omega_big: f64) -> Result<()> {
    params.validate()?;
    positive("omega_big", omega_big)?;
    Ok(())
}

/// Trial free energy F̄(Ω); an upper bound on the exact free energy for
/// every Ω > 0.
pub fn fbar(params: &ModelParams, omega_big: f64) -> Result<f64> {
    check_trial(params, omega_big)?;
    Ok(fbar_unchecked(params, omega_big))
}

fn fbar_unchecked(p: &ModelParams, omega_big: f64) -> f64 {
    let g = equal_time(p.m, p.beta, omega_big);
    ln_2sinh_half(p.beta * omega_big) / p.beta
        + 0.5 * p.m * (p.omega * p.omega - omega_big * omega_big) * g
        + 3.0 * p.lambda * g * g
}

/// Analytic `dF̄/dΩ²`.
pub fn dfbar_domega2(params: &ModelParams, omega_big: f64) -> Result<f64> {
    check_trial(params, omega_big)?;
    let p = params;
    let x = p.beta * omega_big;
    let g = equal_time(p.m, p.beta, omega_big);
    let dg = -coth_half(x) / (2.0 * p.m * omega_big * omega_big)
        - p.beta * csch2_half(x) / (4.0 * p.m * omega_big);
    let bracket = 0.5 * p.m * (p.omega * p.omega - omega_big * omega_big) + 6.0 * p.lambda * g;
    Ok(dg * bracket / (2.0 * omega_big))
}

/// `Ω² − ω² − 6λ coth(βΩ/2)/(m²Ω)`; increasing in Ω with a single zero.
pub fn gap_residual(params: &ModelParams, omega_big: f64) -> f64 {
    let p = params;
    omega_big * omega_big
        - p.omega * p.omega
        - 6.0 * p.lambda * coth_half(p.beta * omega_big) / (p.m * p.m * omega_big)
}

/// Right-hand side map `Ω ↦ sqrt(ω² + 6λ coth(βΩ/2)/(m²Ω))`.
fn gap_map(p: &ModelParams, omega_big: f64) -> f64 {
    (p.omega * p.omega + 6.0 * p.lambda * coth_half(p.beta * omega_big) / (p.m * p.m * omega_big))
        .sqrt()
}

fn relative_residual(p: &ModelParams, omega_big: f64) -> f64 {
    (gap_residual(p, omega_big) / (omega_big * omega_big)).abs()
}

/// Root of the gap equation by bisection on a bracket grown until the
/// residual changes sign. Always terminates for valid parameters.
pub fn solve_gap_bisection(params: &ModelParams) -> Result<(f64, usize)> {
    params.validate()?;
    let p = params;
    if p.lambda == 0.0 {
        positive("omega", p.omega)?;
        return Ok((p.omega, 0));
    }
    let mut lo = if p.omega > 0.0 { p.omega } else { 1e-8 };
    while gap_residual(p, lo) >= 0.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(Error::GapNonConvergence {
                iterations: 0,
                omega_big: lo,
                residual: gap_residual(p, lo),
            });
        }
    }
    let mut hi = p.omega + (6.0 * p.lambda / (p.m * p.m)).cbrt();
    while gap_residual(p, hi) <= 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::GapNonConvergence {
                iterations: 0,
                omega_big: hi,
                residual: f64::NAN,
            });
        }
    }
    for it in 0..MAX_BISECTION_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok((mid, it));
        }
        if gap_residual(p, mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((0.5 * (lo + hi), MAX_BISECTION_ITERATIONS))
}

/// Damped fixed-point iteration `Ω ← (1−θ)Ω + θ g(Ω)`. Returns `None` if it
/// fails to settle.
fn fixed_point(p: &ModelParams, tol: f64) -> Option<(f64, usize)> {
    let mut omega_big = if p.omega > 0.0 {
        gap_map(p, p.omega)
    } else {
        (6.0 * p.lambda / (p.m * p.m)).cbrt()
    };
    for it in 1..=MAX_FIXED_POINT_ITERATIONS {
        let next = (1.0 - FIXED_POINT_DAMPING) * omega_big + FIXED_POINT_DAMPING * gap_map(p, omega_big);
        if !next.is_finite() || next <= 0.0 {
            return None;
        }
        let settled = (next - omega_big).abs() <= 4.0 * f64::EPSILON * next;
        omega_big = next;
        if settled || relative_residual(p, omega_big) < 0.01 * tol {
            return Some((omega_big, it));
        }
    }
    None
}

/// F̄ on the Ω → 0 and Ω → ∞ boundaries. Both diverge to +∞ unless
/// `λ = ω = 0`: near zero `3λG² ~ 3λ/(m²β²Ω⁴)` or `mω²G/2 ~ ω²/(2βΩ²)` wins
/// over the logarithm, and for large Ω the leading behaviour is `Ω/4`.
pub fn boundary_fbar(params: &ModelParams, branch: Branch) -> f64 {
    let p = params;
    match branch {
        Branch::NonzeroRoot => f64::NAN,
        Branch::Zero => {
            if p.lambda > 0.0 || p.omega > 0.0 {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            }
        }
        Branch::Infinite => f64::INFINITY,
    }
}

/// Picks the candidate with the lowest F̄; ties go to the earlier entry.
pub fn select_branch(candidates: &[(Branch, f64)]) -> Option<(Branch, f64)> {
    candidates
        .iter()
        .copied()
        .filter(|(_, f)| !f.is_nan())
        .fold(None, |best, c| match best {
            Some((_, fb)) if fb <= c.1 => best,
            _ => Some(c),
        })
}

fn second_variation(p: &ModelParams, omega_big: f64) -> f64 {
    let w2 = omega_big * omega_big;
    let h = STABILITY_STEP * w2;
    let f = |u: f64| fbar_unchecked(p, u.sqrt());
    (f(w2 + h) - 2.0 * f(w2) + f(w2 - h)) / (h * h)
}

/// Solves the gap equation and evaluates F0 at the minimizing branch.
pub fn solve_gap(params: &ModelParams, tol: f64) -> Result<VariationalSolution> {
    params.validate()?;
    positive("tol", tol)?;
    let p = params;

    let (omega_big, iterations) = match fixed_point(p, tol) {
        Some(r) if relative_residual(p, r.0) < tol => r,
        _ => solve_gap_bisection(p)?,
    };
    let residual = relative_residual(p, omega_big);
    if !(residual < tol) {
        return Err(Error::GapNonConvergence {
            iterations,
            omega_big,
            residual,
        });
    }

    let root_value = f0_at(p, omega_big);
    let candidates = [
        (Branch::NonzeroRoot, root_value),
        (Branch::Zero, boundary_fbar(p, Branch::Zero)),
        (Branch::Infinite, boundary_fbar(p, Branch::Infinite)),
    ];
    let (branch, f0) = select_branch(&candidates).expect("root value is finite");
    if branch != Branch::NonzeroRoot {
        // Only reachable for λ = 0 with ω = 0, which validation excludes.
        return Err(Error::InvalidParameter {
            name: "omega",
            value: p.omega,
            reason: "variational minimum lies on the boundary",
        });
    }

    let second = second_variation(p, omega_big);
    Ok(VariationalSolution {
        omega_big,
        f0,
        branch,
        residual,
        second_variation: second,
        second_variation_sign: if second > 0.0 {
            1
        } else if second < 0.0 {
            -1
        } else {
            0
        },
        iterations,
    })
}

/// Closed form of F̄ at a gap root: `(1/β) ln(2 sinh(βΩ/2)) − 3λ coth²(βΩ/2)/(4m²Ω²)`.
pub fn f0_at(params: &ModelParams, omega_big: f64) -> f64 {
    let p = params;
    let x = p.beta * omega_big;
    let c = coth_half(x);
    ln_2sinh_half(x) / p.beta - 3.0 * p.lambda * c * c / (4.0 * p.m * p.m * omega_big * omega_big)
}

/// Variational free energy with the default solver tolerance.
pub fn f0(params: &ModelParams) -> Result<f64> {
    Ok(solve_gap(params, DEFAULT_GAP_TOL)?.f0)
}
