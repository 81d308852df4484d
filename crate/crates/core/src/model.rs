//! Model parameters, the dimensionless `(z, T)` parametrization, the thermal
//! propagator and the harmonic reference free energy.
//!
//! Units have `ħ = κ_B = 1`, so `β = 1/T`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{non_negative, positive, Error, Result};
use crate::hyperbolic::{cosh_over_sinh, ln_2sinh_half, one_minus_exp_neg};

/// Physical inputs of `H = p²/2m + ½mω²x² + λx⁴` at inverse temperature `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub m: f64,
    pub omega: f64,
    pub lambda: f64,
    pub beta: f64,
}

impl ModelParams {
    /// Validated constructor: `m, λ, β > 0`, `ω >= 0`.
    pub fn new(m: f64, omega: f64, lambda: f64, beta: f64) -> Result<Self> {
        let p = ModelParams {
            m,
            omega,
            lambda,
            beta,
        };
        p.validate()?;
        positive("lambda", lambda)?;
        Ok(p)
    }

    pub fn from_temperature(m: f64, omega: f64, lambda: f64, temperature: f64) -> Result<Self> {
        positive("temperature", temperature)?;
        Self::new(m, omega, lambda, 1.0 / temperature)
    }

    /// Checks everything except strict positivity of `λ`; `λ = 0` is the free
    /// theory and is accepted by the formula-level functions.
    pub(crate) fn validate(&self) -> Result<()> {
        positive("m", self.m)?;
        non_negative("omega", self.omega)?;
        non_negative("lambda", self.lambda)?;
        positive("beta", self.beta)?;
        Ok(())
    }

    pub fn temperature(&self) -> f64 {
        1.0 / self.beta
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        ModelParams { lambda, ..self }
    }

    pub fn with_beta(self, beta: f64) -> Self {
        ModelParams { beta, ..self }
    }
}

/// Dimensionless stiffness `z = ½ω²λ^(-2/3)` and reduced temperature
/// `T λ^(-1/3)`, both at `m = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaledParams {
    pub z: f64,
    pub t_reduced: f64,
}

impl RescaledParams {
    pub fn new(z: f64, t_reduced: f64) -> Result<Self> {
        non_negative("z", z)?;
        positive("t_reduced", t_reduced)?;
        Ok(RescaledParams { z, t_reduced })
    }
}

pub fn rescale(params: &ModelParams) -> Result<RescaledParams> {
    params.validate()?;
    positive("lambda", params.lambda)?;
    if params.m != 1.0 {
        return Err(Error::ConventionViolation { mass: params.m });
    }
    let c = params.lambda.cbrt();
    Ok(RescaledParams {
        z: 0.5 * params.omega * params.omega / (c * c),
        t_reduced: 1.0 / (params.beta * c),
    })
}

/// Inverse of [`rescale`] for a chosen physical coupling; always returns `m = 1`.
pub fn unrescale(rp: &RescaledParams, lambda: f64) -> Result<ModelParams> {
    positive("lambda", lambda)?;
    let rp = RescaledParams::new(rp.z, rp.t_reduced)?;
    let c = lambda.cbrt();
    let omega = (2.0 * rp.z).sqrt() * c;
    let beta = 1.0 / (rp.t_reduced * c);
    ModelParams::new(1.0, omega, lambda, beta)
}

/// Converts a physical energy to the reduced unit `F λ^(-1/3)`.
pub fn reduce_energy(energy: f64, lambda: f64) -> f64 {
    energy / lambda.cbrt()
}

/// Thermal two-point function of the trial oscillator with frequency Ω on the
/// imaginary-time circle `[0, β]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagator {
    omega_big: f64,
    m: f64,
    beta: f64,
    /// `1 / (2mΩ (1 - e^(-βΩ)))`
    scale: f64,
    /// `e^(-βΩ)`
    q: f64,
}

impl Propagator {
    pub fn new(omega_big: f64, m: f64, beta: f64) -> Result<Self> {
        positive("omega_big", omega_big)?;
        positive("m", m)?;
        positive("beta", beta)?;
        let x = beta * omega_big;
        Ok(Propagator {
            omega_big,
            m,
            beta,
            scale: 1.0 / (2.0 * m * omega_big * one_minus_exp_neg(x)),
            q: (-x).exp(),
        })
    }

    pub fn omega_big(&self) -> f64 {
        self.omega_big
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `G(τ, τ')` for times on `[0, β]`.
    pub fn eval(&self, tau: f64, tau_prime: f64) -> Result<f64> {
        for (name, t) in [("tau", tau), ("tau_prime", tau_prime)] {
            if !(0.0..=self.beta).contains(&t) {
                return Err(Error::InvalidParameter {
                    name,
                    value: t,
                    reason: "imaginary time must lie in [0, beta]",
                });
            }
        }
        Ok(self.at_separation((tau - tau_prime).abs()))
    }

    /// `G` at separation `s ∈ [0, β]`; no range check.
    #[inline]
    pub fn at_separation(&self, s: f64) -> f64 {
        let a = (-self.omega_big * s).exp();
        // e^(-Ω(β-s)) = q / a while both are normal floats.
        let b = if self.q.is_normal() && a.is_normal() {
            self.q / a
        } else {
            (-self.omega_big * (self.beta - s)).exp()
        };
        self.scale * (a + b)
    }

    /// Same value as [`Propagator::at_separation`] through the generic
    /// `cosh/sinh` helper; used to cross-check the fast path.
    pub fn at_separation_reference(&self, s: f64) -> f64 {
        cosh_over_sinh(self.omega_big * s, self.beta * self.omega_big)
            / (2.0 * self.m * self.omega_big)
    }

    /// Equal-time value `coth(βΩ/2) / (2mΩ)`.
    pub fn equal_time(&self) -> f64 {
        self.scale * (1.0 + self.q)
    }

    /// Symmetric partial sum over Matsubara frequencies `ω_n = 2πn/β`,
    /// `|n| <= n_max`. The `±n` terms are combined into cosines so the result
    /// is real by construction.
    pub fn matsubara(&self, s: f64, n_max: u64) -> f64 {
        let mw2 = self.m * self.omega_big * self.omega_big;
        let step = 2.0 * PI / self.beta;
        // Smallest terms first.
        let tail: f64 = (1..=n_max)
            .rev()
            .map(|n| {
                let w = step * n as f64;
                (w * s).cos() / (self.m * w * w + mw2)
            })
            .sum();
        (1.0 / mw2 + 2.0 * tail) / self.beta
    }
}

/// Free energy `(1/β) ln(2 sinh(βν/2))` of a harmonic oscillator with
/// frequency `ν`; independent of the mass.
pub fn harmonic_free_energy(m: f64, nu: f64, beta: f64) -> Result<f64> {
    positive("m", m)?;
    positive("nu", nu)?;
    positive("beta", beta)?;
    Ok(ln_2sinh_half(beta * nu) / beta)
}
