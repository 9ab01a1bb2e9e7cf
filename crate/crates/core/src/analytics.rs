//! Closed-form wideband (N → ∞) results for Rayleigh fading and their
//! Monte Carlo counterparts.

use crate::error::{Error, Result};
use crate::montecarlo::MeanSe;
use crate::pooling::{simulate, PoolingParams, UserLimit};
use crate::waterfill::{capacity_asymptotic, solve_gamma0};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Fraction of the band a user leaves idle: `1 − e^{−γ₀N₀}`.
pub fn delta_inf(gamma0: f64, n0: f64) -> f64 {
    1.0 - (-gamma0 * n0).exp()
}

/// `Σ_{k<L} Δ^k = (1 − Δ^L)/(1 − Δ)`.
pub fn geometric_gain(delta: f64, users: usize) -> f64 {
    if delta == 1.0 {
        users as f64
    } else {
        (1.0 - delta.powi(users as i32)) / (1.0 - delta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticReport {
    pub gamma0: f64,
    pub n0: f64,
    pub delta_inf: f64,
    /// C_{1,∞} in bits/s/Hz.
    pub c1_inf: f64,
    /// Φ_{l,∞} = Δ∞^{l−1}·C_{1,∞} for l = 1..L.
    pub phi_per_user: Vec<f64>,
    pub phi_sum_inf: f64,
    pub users: usize,
}

impl AsymptoticReport {
    /// (Φ_sum,∞ − C_{1,∞}) / C_{1,∞}.
    pub fn relative_gain(&self) -> f64 {
        (self.phi_sum_inf - self.c1_inf) / self.c1_inf
    }
}

pub fn asymptotic_report(n0: f64, users: usize) -> Result<AsymptoticReport> {
    if users == 0 {
        return Err(Error::invalid("user count must be at least 1"));
    }
    let sol = solve_gamma0(n0)?;
    let c1 = capacity_asymptotic(sol.gamma0, n0)?;
    let delta = delta_inf(sol.gamma0, n0);
    let phi_per_user = (0..users).map(|k| delta.powi(k as i32) * c1).collect();
    Ok(AsymptoticReport {
        gamma0: sol.gamma0,
        n0,
        delta_inf: delta,
        c1_inf: c1,
        phi_per_user,
        phi_sum_inf: geometric_gain(delta, users) * c1,
        users,
    })
}

/// Primary-user spectral efficiency at a given Eb/N₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EbN0Solution {
    /// Linear Eb/N₀.
    pub eb_n0: f64,
    pub c1_inf: f64,
    /// Noise power implied by `N₀ = 1/(Eb/N₀ · C₁)` with P̄ = 1.
    pub n0: f64,
    pub gamma0: f64,
    pub residual: f64,
}

pub const EBN0_RESIDUAL_TOL: f64 = 1e-9;
const EBN0_MIN_C: f64 = 1e-8;
const EBN0_MAX_C: f64 = 1e4;

/// `C − E₁(γ₀(N₀)·N₀)/ln 2` with `N₀ = 1/(Eb/N₀ · C)`.
pub fn ebn0_residual(c1: f64, eb_n0: f64) -> Result<f64> {
    let n0 = 1.0 / (eb_n0 * c1);
    let g = solve_gamma0(n0)?;
    Ok(c1 - capacity_asymptotic(g.gamma0, n0)?)
}

/// Solves the implicit Eb/N₀ relation for C₁ by bisection, starting from
/// the bracket `[0.01, 32]` and widening it as needed.
pub fn solve_ebn0(eb_n0: f64) -> Result<EbN0Solution> {
    solve_ebn0_bracketed(eb_n0, 1e-2, 32.0)
}

pub fn solve_ebn0_bracketed(eb_n0: f64, lo: f64, hi: f64) -> Result<EbN0Solution> {
    if !(eb_n0 > 0.0 && eb_n0.is_finite()) {
        return Err(Error::invalid(format!("Eb/N0 must be positive, got {eb_n0}")));
    }
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::invalid(format!("invalid initial bracket [{lo}, {hi}]")));
    }
    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = ebn0_residual(lo, eb_n0)?;
    let mut f_hi = ebn0_residual(hi, eb_n0)?;
    let failure = |lo, hi, f_lo, f_hi| Error::SolverFailure {
        what: "eb/n0",
        lo,
        hi,
        f_lo,
        f_hi,
    };
    while f_lo >= 0.0 {
        if lo / 4.0 < EBN0_MIN_C {
            return Err(failure(lo, hi, f_lo, f_hi));
        }
        hi = lo;
        f_hi = f_lo;
        lo /= 4.0;
        f_lo = ebn0_residual(lo, eb_n0)?;
    }
    while f_hi <= 0.0 {
        if hi * 2.0 > EBN0_MAX_C {
            return Err(failure(lo, hi, f_lo, f_hi));
        }
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        f_hi = ebn0_residual(hi, eb_n0)?;
    }

    let mut mid = 0.5 * (lo + hi);
    let mut f_mid = ebn0_residual(mid, eb_n0)?;
    for _ in 0..200 {
        if f_mid == 0.0 || hi - lo <= 4.0 * f64::EPSILON * mid {
            break;
        }
        if f_mid < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        mid = 0.5 * (lo + hi);
        f_mid = ebn0_residual(mid, eb_n0)?;
    }
    if !(f_mid.abs() < EBN0_RESIDUAL_TOL) {
        return Err(failure(lo, hi, f_lo, f_hi));
    }
    let n0 = 1.0 / (eb_n0 * mid);
    Ok(EbN0Solution {
        eb_n0,
        c1_inf: mid,
        n0,
        gamma0: solve_gamma0(n0)?.gamma0,
        residual: f_mid,
    })
}

/// Sum-efficiency gains at one Eb/N₀, relative to the primary alone.
#[derive(Debug, Clone, PartialEq)]
pub struct GainPoint {
    pub ebn0_db: f64,
    pub solution: EbN0Solution,
    pub delta_inf: f64,
    /// `gains[k]` is the relative gain with `k + 1` cognitive users.
    pub gains: Vec<f64>,
}

/// Operating point fixed by the primary's implicit Eb/N₀ equation; the
/// gain with `l` users is then `(1 − Δ∞^l)/(1 − Δ∞) − 1`.
pub fn sum_gain_at_ebn0(ebn0_db: f64, users: usize) -> Result<GainPoint> {
    if users < 2 {
        return Err(Error::invalid("gain curves need at least one cognitive user"));
    }
    let solution = solve_ebn0(db_to_linear(ebn0_db))?;
    let delta = delta_inf(solution.gamma0, solution.n0);
    let gains = (2..=users).map(|l| geometric_gain(delta, l) - 1.0).collect();
    Ok(GainPoint {
        ebn0_db,
        solution,
        delta_inf: delta,
        gains,
    })
}

/// Maps a channel gain `t` to a frequency in `[−W/2, W/2)` so that the
/// Exp(1) gain distribution becomes uniform over the band.
pub fn frequency_map(t: f64, w: f64) -> f64 {
    -w * (-t).exp() + w / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub user: usize,
    pub n_subbands: usize,
    /// Monte Carlo mean of α_{l,N} = card(Ω_l)/N.
    pub alpha: MeanSe,
    /// α_{l,∞} = Δ∞^{l−1}.
    pub alpha_inf: f64,
}

impl ConvergenceRow {
    pub fn abs_error(&self) -> f64 {
        (self.alpha.mean - self.alpha_inf).abs()
    }
}

/// Simulated band factor gains α_{l,N} next to their wideband limits,
/// one row per (l, N), ordered by N then l.
pub fn band_gain_convergence(
    n0: f64,
    users: usize,
    n_list: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<ConvergenceRow>> {
    if n_list.is_empty() {
        return Err(Error::invalid("N list must be nonempty"));
    }
    let report = asymptotic_report(n0, users)?;
    let mut rows = Vec::with_capacity(n_list.len() * users);
    for &n in n_list {
        let params = PoolingParams::new(n, UserLimit::Fixed(users), n0);
        let trials_out = simulate(&params, trials, seed)?;
        for l in 1..=users {
            let alpha: MeanSe = trials_out.iter().map(|r| r.users[l - 1].band_factor_gain).collect();
            rows.push(ConvergenceRow {
                user: l,
                n_subbands: n,
                alpha,
                alpha_inf: report.delta_inf.powi(l as i32 - 1),
            });
        }
    }
    Ok(rows)
}
