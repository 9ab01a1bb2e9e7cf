//! Single-user water-filling over a set of sub-bands and the asymptotic
//! (N → ∞, Rayleigh) Lagrange multiplier.

use std::f64::consts::LN_2;

use roots::{find_root_brent, SimpleConvergency};

use crate::error::{Error, Result};
pub use crate::expint::exp_integral_e1;

/// Lower end of the bracket searched for γ₀.
pub const GAMMA0_LOWER: f64 = 1e-12;
/// Largest accepted |residual| of the γ₀ root equation.
pub const GAMMA0_RESIDUAL_TOL: f64 = 1e-10;

/// Optimal powers for one user over the sub-bands it may use.
///
/// `powers[i]` is indexed like the `gains` slice the allocation was
/// computed from; `active_set` lists the indices with positive power.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub powers: Vec<f64>,
    pub water_level: f64,
    pub gamma0: f64,
    pub active_set: Vec<usize>,
}

impl PowerAllocation {
    pub fn mean_power(&self) -> f64 {
        self.powers.iter().sum::<f64>() / self.powers.len() as f64
    }

    /// Σ log2(1 + P·t/N₀) over the allocated bands.
    pub fn rate_sum(&self, gains: &[f64], n0: f64) -> f64 {
        self.active_set
            .iter()
            .map(|&i| (1.0 + self.powers[i] * gains[i] / n0).log2())
            .sum()
    }
}

/// Water-fills `gains` so that the mean power per band equals `p_avg`.
///
/// Sorts the noise-to-gain ratios `N₀/t` ascending and grows the active
/// set while the closed-form water level stays above the next ratio.
/// Bands with zero gain are never active.
pub fn waterfill_finite(gains: &[f64], n0: f64, p_avg: f64) -> Result<PowerAllocation> {
    if gains.is_empty() {
        return Err(Error::invalid("gain vector is empty"));
    }
    if !(n0 > 0.0 && n0.is_finite()) {
        return Err(Error::invalid(format!("noise power must be positive, got {n0}")));
    }
    if !(p_avg > 0.0 && p_avg.is_finite()) {
        return Err(Error::invalid(format!("average power must be positive, got {p_avg}")));
    }
    if let Some(g) = gains.iter().find(|g| !(**g >= 0.0) || !g.is_finite()) {
        return Err(Error::invalid(format!("gain {g} is not a finite nonnegative value")));
    }

    let mut order: Vec<usize> = (0..gains.len()).filter(|&i| gains[i] > 0.0).collect();
    if order.is_empty() {
        return Err(Error::NoFeasibleAllocation);
    }
    order.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]).then(a.cmp(&b)));

    let budget = p_avg * gains.len() as f64;
    let mut inv_sum = 0.0;
    let mut water_level = 0.0;
    let mut active = 0;
    for (k, &i) in order.iter().enumerate() {
        let inv = n0 / gains[i];
        let candidate = (budget + inv_sum + inv) / (k + 1) as f64;
        if candidate <= inv {
            break;
        }
        inv_sum += inv;
        water_level = candidate;
        active = k + 1;
    }
    debug_assert!(active >= 1);

    let mut powers = vec![0.0; gains.len()];
    let mut active_set: Vec<usize> = order[..active].to_vec();
    active_set.sort_unstable();
    for &i in &active_set {
        powers[i] = water_level - n0 / gains[i];
    }
    Ok(PowerAllocation {
        powers,
        water_level,
        gamma0: 1.0 / water_level,
        active_set,
    })
}

/// Root of the asymptotic power constraint for Rayleigh fading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gamma0Solution {
    pub gamma0: f64,
    pub n0: f64,
    pub residual: f64,
}

/// `e^{-γ₀N₀}/γ₀ − N₀·E₁(γ₀N₀) − 1`, strictly decreasing in γ₀.
pub fn gamma0_residual(gamma0: f64, n0: f64) -> Result<f64> {
    let x = gamma0 * n0;
    Ok((-x).exp() / gamma0 - n0 * exp_integral_e1(x)? - 1.0)
}

/// Solves the γ₀ equation with Brent's method on `(1e-12, 1]`.
pub fn solve_gamma0(n0: f64) -> Result<Gamma0Solution> {
    if !(n0 > 0.0 && n0.is_finite()) {
        return Err(Error::invalid(format!("noise power must be positive, got {n0}")));
    }
    let (lo, hi) = (GAMMA0_LOWER, 1.0);
    let f_lo = gamma0_residual(lo, n0)?;
    let f_hi = gamma0_residual(hi, n0)?;
    let failure = |lo, hi| Error::SolverFailure {
        what: "gamma0",
        lo,
        hi,
        f_lo,
        f_hi,
    };
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(failure(lo, hi));
    }

    let f = |g: f64| gamma0_residual(g, n0).unwrap_or(f64::NAN);
    let mut conv = SimpleConvergency {
        eps: 1e-14,
        max_iter: 500,
    };
    let gamma0 = find_root_brent(lo, hi, &f, &mut conv).map_err(|_| failure(lo, hi))?;
    let residual = gamma0_residual(gamma0, n0)?;
    if !(residual.abs() < GAMMA0_RESIDUAL_TOL) || !(gamma0 > 0.0 && gamma0 <= 1.0) {
        return Err(failure(lo, hi));
    }
    Ok(Gamma0Solution { gamma0, n0, residual })
}

/// `C_{l,∞} = E₁(γ₀N₀)/ln 2` in bits/s/Hz.
pub fn capacity_asymptotic(gamma0: f64, n0: f64) -> Result<f64> {
    if !(gamma0 > 0.0 && gamma0 <= 1.0) {
        return Err(Error::Domain(format!("gamma0 must lie in (0, 1], got {gamma0}")));
    }
    if !(n0 > 0.0) {
        return Err(Error::Domain(format!("noise power must be positive, got {n0}")));
    }
    Ok(exp_integral_e1(gamma0 * n0)? / LN_2)
}
