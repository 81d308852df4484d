//! Exact free energy from the spectrum of `H` in a truncated oscillator
//! basis.
//!
//! The basis belongs to a harmonic oscillator of mass `m` and frequency `ν`
//! (by default the variational Ω, which makes the low levels converge
//! fastest). In that basis
//!
//! ```text
//! H = ν (n + ½) + ½ m (ω² − ν²) X² + λ X⁴,   X_{n,n+1} = √((n+1) / (2mν))
//! ```
//!
//! `X²` and `X⁴` are formed on a basis four states larger than requested and
//! truncated afterwards, so the retained block is exact. `H` only couples
//! states of equal parity; even and odd blocks are diagonalized separately.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{positive, Error, Result};
use crate::exec::Execution;
use crate::model::ModelParams;
use crate::variational::solve_gap;

/// Boltzmann factors below this (relative to the ground state) are dropped.
pub const BOLTZMANN_CUTOFF: f64 = 1e-16;

/// Hamiltonian matrix on the first `basis_size` oscillator states.
pub fn build_hamiltonian(params: &ModelParams, basis_frequency: f64, basis_size: usize) -> Result<DMatrix<f64>> {
    params.validate()?;
    let nu = positive("basis_frequency", basis_frequency)?;
    if basis_size == 0 {
        return Err(Error::InvalidRequest("basis size must be positive".into()));
    }
    let m = params.m;
    let big = basis_size + 4;
    // x_{k,k+1}
    let e: Vec<f64> = (0..big).map(|k| ((k + 1) as f64 / (2.0 * m * nu)).sqrt()).collect();

    // X² has bandwidth 2
    let mut x2 = vec![[0.0f64; 5]; big];
    for i in 0..big {
        let below = if i > 0 { e[i - 1] } else { 0.0 };
        let above = if i + 1 < big { e[i] } else { 0.0 };
        x2[i][2] = below * below + above * above;
        if i + 2 < big {
            x2[i][4] = e[i] * e[i + 1];
            x2[i + 2][0] = x2[i][4];
        }
    }
    let x2_at = |i: usize, j: usize| -> f64 {
        let d = j as isize - i as isize;
        if d.abs() > 2 || j >= big {
            0.0
        } else {
            x2[i][(d + 2) as usize]
        }
    };

    let mut h = DMatrix::<f64>::zeros(basis_size, basis_size);
    let quad = 0.5 * m * (params.omega * params.omega - nu * nu);
    for i in 0..basis_size {
        h[(i, i)] += nu * (i as f64 + 0.5);
        let lo = i.saturating_sub(4);
        let hi = (i + 4).min(basis_size - 1);
        for j in lo..=hi {
            let kl = i.saturating_sub(2).max(j.saturating_sub(2));
            let kh = (i + 2).min(j + 2).min(big - 1);
            let x4: f64 = (kl..=kh).map(|k| x2_at(i, k) * x2_at(k, j)).sum();
            h[(i, j)] += quad * x2_at(i, j) + params.lambda * x4;
        }
    }
    Ok(h)
}

/// Sorted eigenvalues of `H` on `basis_size` states.
pub fn eigenvalues(
    params: &ModelParams,
    basis_frequency: f64,
    basis_size: usize,
    execution: Execution,
) -> Result<Vec<f64>> {
    let h = build_hamiltonian(params, basis_frequency, basis_size)?;
    let blocks = execution.map_range(2, |parity| {
        let idx: Vec<usize> = (parity..basis_size).step_by(2).collect();
        if idx.is_empty() {
            return Vec::new();
        }
        let sub = DMatrix::from_fn(idx.len(), idx.len(), |r, c| h[(idx[r], idx[c])]);
        SymmetricEigen::new(sub).eigenvalues.iter().copied().collect::<Vec<f64>>()
    });
    let mut all: Vec<f64> = blocks.into_iter().flatten().collect();
    all.sort_by(f64::total_cmp);
    Ok(all)
}

/// `(F, retained levels, bound on the dropped tail of Z relative to Z)`.
pub fn free_energy_from_levels(levels: &[f64], beta: f64) -> (f64, usize, f64) {
    let e0 = levels[0];
    let mut sum = 0.0;
    let mut used = levels.len();
    let mut last = 1.0;
    for (k, &e) in levels.iter().enumerate() {
        let w = (-beta * (e - e0)).exp();
        if w < BOLTZMANN_CUTOFF {
            used = k;
            break;
        }
        sum += w;
        last = w;
    }
    let dropped = (levels.len() - used) as f64 * last.min(BOLTZMANN_CUTOFF);
    (e0 - sum.ln() / beta, used, dropped / sum)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub basis_size: usize,
    pub basis_frequency: f64,
    /// Leading levels that agree with the previous, half-size basis.
    pub converged_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactOptions {
    /// Absolute tolerance on F between successive basis doublings.
    pub tolerance: f64,
    /// Defaults to the variational Ω.
    pub basis_frequency: Option<f64>,
    pub initial_size: usize,
    pub max_size: usize,
    pub execution: Execution,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            tolerance: 1e-10,
            basis_frequency: None,
            initial_size: 64,
            max_size: 2048,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactFreeEnergy {
    pub free_energy: f64,
    /// Change in F across the last basis doubling.
    pub last_change: f64,
    /// Levels with a Boltzmann factor above the cutoff.
    pub boltzmann_terms: usize,
    /// Relative bound on the partition-function tail that was dropped.
    pub truncation_bound: f64,
    pub spectrum: Spectrum,
}

impl ExactFreeEnergy {
    pub fn ground_state(&self) -> f64 {
        self.spectrum.eigenvalues[0]
    }
}

pub fn exact_free_energy(params: &ModelParams, tolerance: f64) -> Result<f64> {
    let opts = ExactOptions {
        tolerance,
        ..ExactOptions::default()
    };
    exact_free_energy_with(params, &opts).map(|r| r.free_energy)
}

/// Doubles the basis until F changes by less than the tolerance and the
/// weighted levels have stopped moving by the same amount.
pub fn exact_free_energy_with(params: &ModelParams, opts: &ExactOptions) -> Result<ExactFreeEnergy> {
    params.validate()?;
    positive("tolerance", opts.tolerance)?;
    if opts.initial_size < 2 || opts.max_size < opts.initial_size {
        return Err(Error::InvalidRequest(format!(
            "basis sizes {}..{} are not a valid range",
            opts.initial_size, opts.max_size
        )));
    }
    let nu = match opts.basis_frequency {
        Some(nu) => positive("basis_frequency", nu)?,
        None => solve_gap(params, crate::variational::DEFAULT_GAP_TOL)?.omega_big,
    };

    let mut size = opts.initial_size;
    let mut prev = eigenvalues(params, nu, size, opts.execution)?;
    let (mut f_prev, _, _) = free_energy_from_levels(&prev, params.beta);
    loop {
        let next_size = size * 2;
        if next_size > opts.max_size {
            return Err(Error::BasisCapExceeded {
                cap: opts.max_size,
                partial: f_prev,
                change: f64::NAN,
            });
        }
        let levels = eigenvalues(params, nu, next_size, opts.execution)?;
        let (f, used, tail) = free_energy_from_levels(&levels, params.beta);
        let change = (f - f_prev).abs();
        let converged_count = prev
            .iter()
            .zip(&levels)
            .take_while(|(a, b)| (*a - *b).abs() <= opts.tolerance * b.abs().max(1.0))
            .count();
        // Boltzmann-weighted drift of the retained levels since the last size.
        let e0 = levels[0];
        let (mut drift, mut z) = (0.0, 0.0);
        for (a, b) in prev.iter().zip(&levels).take(used) {
            let w = (-params.beta * (b - e0)).exp();
            drift += w * (a - b).abs();
            z += w;
        }
        if change < opts.tolerance && drift / z < opts.tolerance && used < prev.len() {
            return Ok(ExactFreeEnergy {
                free_energy: f,
                last_change: change,
                boltzmann_terms: used,
                truncation_bound: tail,
                spectrum: Spectrum {
                    eigenvalues: levels,
                    basis_size: next_size,
                    basis_frequency: nu,
                    converged_count,
                },
            });
        }
        if next_size * 2 > opts.max_size {
            return Err(Error::BasisCapExceeded {
                cap: opts.max_size,
                partial: f,
                change,
            });
        }
        size = next_size;
        prev = levels;
        f_prev = f;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_oscillator_in_its_own_basis_is_diagonal() {
        let p = ModelParams {
            m: 1.3,
            omega: 0.7,
            lambda: 0.0,
            beta: 2.0,
        };
        let h = build_hamiltonian(&p, 0.7, 10).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                let want = if i == j { 0.7 * (i as f64 + 0.5) } else { 0.0 };
                assert!((h[(i, j)] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn x4_elements_match_ladder_algebra() {
        // ⟨0|x⁴|0⟩ = 3/(2mν)², ⟨0|x⁴|2⟩ = 6√2/(2mν)², ⟨0|x⁴|4⟩ = √24/(2mν)²
        let p = ModelParams {
            m: 1.0,
            omega: 1.0,
            lambda: 1.0,
            beta: 1.0,
        };
        let h = build_hamiltonian(&p, 1.0, 8).unwrap();
        let s = 0.25;
        assert!((h[(0, 0)] - (0.5 + 3.0 * s)).abs() < 1e-14);
        assert!((h[(0, 2)] - 6.0 * 2f64.sqrt() * s).abs() < 1e-14);
        assert!((h[(0, 4)] - 24f64.sqrt() * s).abs() < 1e-14);
        assert!((h[(3, 1)] - h[(1, 3)]).abs() < 1e-15);
    }

    #[test]
    fn harmonic_limit() {
        let p = ModelParams {
            m: 1.0,
            omega: 1.5,
            lambda: 0.0,
            beta: 0.8,
        };
        let f = exact_free_energy(&p, 1e-12).unwrap();
        let want = crate::model::harmonic_free_energy(1.0, 1.5, 0.8).unwrap();
        assert!((f - want).abs() < 1e-12, "{f} vs {want}");
    }

    #[test]
    fn pure_quartic_ground_state() {
        // E0 of p²/2 + x⁴ is 0.667986259...
        let p = ModelParams::new(1.0, 0.0, 1.0, 60.0).unwrap();
        let r = exact_free_energy_with(&p, &ExactOptions::default()).unwrap();
        assert!((r.ground_state() - 0.667_986_259_155_777).abs() < 1e-9);
        assert!((r.free_energy - r.ground_state()).abs() < 1e-9);
    }

    #[test]
    fn basis_cap_is_reported() {
        let p = ModelParams::new(1.0, 20f64.sqrt(), 1.0, 1.0 / 30.0).unwrap();
        let opts = ExactOptions {
            max_size: 128,
            ..ExactOptions::default()
        };
        let err = exact_free_energy_with(&p, &opts).unwrap_err();
        assert!(matches!(err, Error::BasisCapExceeded { cap: 128, .. }));
        assert!(err.is_numerical());
    }
}
